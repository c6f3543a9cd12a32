use serde::{Deserialize, Serialize};

use super::{from_json, to_json_pretty, FormatError};

pub const REPORT_FORMAT: &str = "tumbler-report";
pub const REPORT_VERSION: u32 = 1;

/// Versioned envelope around any result document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDoc<T> {
    pub format: String,
    pub version: u32,
    pub kind: String,
    pub body: T,
}

impl<T> ReportDoc<T> {
    pub fn new(kind: &str, body: T) -> Self {
        Self {
            format: REPORT_FORMAT.into(),
            version: REPORT_VERSION,
            kind: kind.into(),
            body,
        }
    }
}

impl<T: serde::de::DeserializeOwned> ReportDoc<T> {
    pub fn parse(bytes: &[u8]) -> Result<Self, FormatError> {
        let doc: Self = from_json(bytes)?;
        if doc.format != REPORT_FORMAT || doc.version > REPORT_VERSION {
            return Err(FormatError::Schema {
                path: "format".into(),
                message: format!("unsupported report {} v{}", doc.format, doc.version),
            });
        }
        Ok(doc)
    }
}

pub fn report_json<T: Serialize>(kind: &str, body: &T) -> String {
    to_json_pretty(&ReportDoc::new(kind, body))
}
