//! File formats: robot configs and scenes (JSON), traces (NDJSON), reports
//! and SVG figures. Angles are degrees in files and radians everywhere else.

mod config;
mod report;
mod scene;
mod svg;
mod trace;

pub use config::{
    load_robot_config, save_robot_config, MassDoc, MovableDoc, RobotConfigDoc, RobotSetup, TolerancesDoc,
    DEFAULT_ROBOT_CONFIG,
};
pub use report::{report_json, ReportDoc, REPORT_FORMAT, REPORT_VERSION};
pub use scene::{load_scene, save_scene, ArenaDoc, LoadedScene, ObstacleDoc, SceneDoc, StartDoc, TargetDoc};
pub use svg::{render_svg, SvgOptions};
pub use trace::{
    parse_trace, read_trace, validate_trace, GeometryEcho, TraceDoc, TraceHeader, TraceKind, TraceRecord, TraceWriter,
    TRACE_FORMAT,
    TRACE_VERSION,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("polygon {index}: {reason}")]
    Geometry { index: usize, reason: String },
    #[error("invalid value: {0}")]
    Invalid(String),
    #[error("inconsistent trace at seq {seq}: {reason}")]
    InconsistentTrace { seq: u64, reason: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FormatError {
    fn from(e: std::io::Error) -> Self {
        FormatError::Io(e.to_string())
    }
}

/// Deserializes `bytes`, splitting syntax errors from schema errors and
/// reporting the offending field path for the latter.
pub(crate) fn from_json<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T, FormatError> {
    let text = std::str::from_utf8(bytes).map_err(|e| FormatError::Parse(e.to_string()))?;
    let de = &mut serde_json::Deserializer::from_str(text);
    let result: Result<T, _> = serde_path_to_error::deserialize(&mut *de);
    match result {
        Ok(v) => {
            de.end().map_err(|e| FormatError::Parse(e.to_string()))?;
            Ok(v)
        }
        Err(err) => {
            let path = err.path().to_string();
            let inner = err.into_inner();
            match inner.classify() {
                serde_json::error::Category::Data => Err(FormatError::Schema {
                    path,
                    message: inner.to_string(),
                }),
                _ => Err(FormatError::Parse(inner.to_string())),
            }
        }
    }
}

pub(crate) fn to_json_pretty<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("documents serialize");
    s.push('\n');
    s
}
