use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::FormatError;
use crate::geometry::Vec2;
use crate::reachability::{LocomotionMode, TraceStep};
use crate::robot::{world_footprint, Configuration, EdgeLabel, RobotGeometry, StableState};
use crate::tolerances::TRACE_FOOTPRINT_TOL;

pub const TRACE_FORMAT: &str = "tumbler-trace";
pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    Reach,
    Plan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryEcho {
    pub ell: f64,
    pub leg_len: f64,
    pub tri_side: f64,
    pub rect_width: f64,
}

impl GeometryEcho {
    pub fn of(g: &RobotGeometry) -> Self {
        Self {
            ell: g.ell(),
            leg_len: g.leg_len(),
            tri_side: g.tri_side(),
            rect_width: g.rect_width(),
        }
    }

    pub fn geometry(&self) -> Result<RobotGeometry, FormatError> {
        RobotGeometry::new(self.ell, self.leg_len, Some(self.tri_side), Some(self.rect_width))
            .map_err(|e| FormatError::Invalid(e.to_string()))
    }
}

/// First line of every trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceHeader {
    pub format: String,
    pub version: u32,
    pub kind: TraceKind,
    pub geometry: GeometryEcho,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<LocomotionMode>,
}

impl TraceHeader {
    pub fn new(kind: TraceKind, geom: &RobotGeometry, mode: Option<LocomotionMode>) -> Self {
        Self {
            format: TRACE_FORMAT.into(),
            version: TRACE_VERSION,
            kind,
            geometry: GeometryEcho::of(geom),
            mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub seq: u64,
    pub state: StableState,
    pub x: f64,
    pub y: f64,
    /// Degrees.
    pub alpha: f64,
    pub pivot_edge: Option<EdgeLabel>,
    pub footprint: Vec<[f64; 2]>,
}

impl TraceRecord {
    pub fn from_step(geom: &RobotGeometry, seq: u64, step: &TraceStep) -> Self {
        let c = step.config;
        Self {
            seq,
            state: c.state,
            x: c.centroid.x,
            y: c.centroid.y,
            alpha: c.alpha().to_degrees(),
            pivot_edge: step.pivot,
            footprint: world_footprint(geom, &c).vertices().iter().map(|v| [v.x, v.y]).collect(),
        }
    }

    pub fn config(&self) -> Configuration {
        Configuration::new(Vec2::new(self.x, self.y), self.state, self.alpha.to_radians())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceDoc {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

impl TraceDoc {
    pub fn from_steps(header: TraceHeader, steps: &[TraceStep]) -> Result<Self, FormatError> {
        let geom = header.geometry.geometry()?;
        let records = steps
            .iter()
            .enumerate()
            .map(|(i, s)| TraceRecord::from_step(&geom, i as u64, s))
            .collect();
        Ok(Self { header, records })
    }

    pub fn steps(&self) -> Vec<TraceStep> {
        self.records
            .iter()
            .map(|r| TraceStep {
                config: r.config(),
                pivot: r.pivot_edge,
            })
            .collect()
    }

    pub fn to_ndjson(&self) -> String {
        let mut w = TraceWriter::new(Vec::new(), &self.header).expect("in-memory write");
        for r in &self.records {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.finish().expect("in-memory write")).expect("json is utf-8")
    }
}

/// Append-only writer: header first, then records with consecutive `seq`.
pub struct TraceWriter<W: Write> {
    out: W,
    geom: RobotGeometry,
    next_seq: u64,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(mut out: W, header: &TraceHeader) -> Result<Self, FormatError> {
        let geom = header.geometry.geometry()?;
        write_line(&mut out, header)?;
        Ok(Self { out, geom, next_seq: 0 })
    }

    pub fn push(&mut self, step: &TraceStep) -> Result<(), FormatError> {
        let rec = TraceRecord::from_step(&self.geom, self.next_seq, step);
        write_line(&mut self.out, &rec)?;
        self.next_seq += 1;
        Ok(())
    }

    /// Writes a prebuilt record; its `seq` must be the next one.
    pub fn write_record(&mut self, rec: &TraceRecord) -> Result<(), FormatError> {
        if rec.seq != self.next_seq {
            return Err(FormatError::InconsistentTrace {
                seq: rec.seq,
                reason: format!("expected seq {}", self.next_seq),
            });
        }
        write_line(&mut self.out, rec)?;
        self.next_seq += 1;
        Ok(())
    }

    pub fn records_written(&self) -> u64 {
        self.next_seq
    }

    pub fn finish(mut self) -> Result<W, FormatError> {
        self.out.flush()?;
        Ok(self.out)
    }
}

fn write_line<W: Write, T: Serialize>(out: &mut W, v: &T) -> Result<(), FormatError> {
    serde_json::to_writer(&mut *out, v).map_err(|e| FormatError::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

fn line_error(line: usize, e: FormatError) -> FormatError {
    match e {
        FormatError::Schema { path, message } => FormatError::Schema {
            path: format!("line {line}: {path}"),
            message,
        },
        FormatError::Parse(m) => FormatError::Parse(format!("line {line}: {m}")),
        other => other,
    }
}

/// Streams a trace, checking the header and the `seq` sequence. Pose and
/// footprint agreement is left to [`validate_trace`].
pub fn read_trace<R: BufRead>(input: R) -> Result<TraceDoc, FormatError> {
    let mut lines = input.lines().enumerate().filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty()));
    let (_, first) = lines.next().ok_or_else(|| FormatError::Parse("empty trace".into()))?;
    let header: TraceHeader = super::from_json(first?.as_bytes()).map_err(|e| line_error(1, e))?;
    if header.format != TRACE_FORMAT {
        return Err(FormatError::Schema {
            path: "format".into(),
            message: format!("expected {TRACE_FORMAT:?}, got {:?}", header.format),
        });
    }
    if header.version > TRACE_VERSION {
        return Err(FormatError::Schema {
            path: "version".into(),
            message: format!("unsupported version {}", header.version),
        });
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        let rec: TraceRecord = super::from_json(line?.as_bytes()).map_err(|e| line_error(i + 1, e))?;
        let expected = records.len() as u64;
        if rec.seq != expected {
            return Err(FormatError::InconsistentTrace {
                seq: rec.seq,
                reason: format!("expected seq {expected}"),
            });
        }
        records.push(rec);
    }
    Ok(TraceDoc { header, records })
}

pub fn parse_trace(text: &str) -> Result<TraceDoc, FormatError> {
    read_trace(text.as_bytes())
}

/// Every record's footprint must equal the footprint of its pose, vertex by vertex.
pub fn validate_trace(doc: &TraceDoc) -> Result<(), FormatError> {
    let geom = doc.header.geometry.geometry()?;
    for (i, r) in doc.records.iter().enumerate() {
        let bad = |reason: String| FormatError::InconsistentTrace { seq: r.seq, reason };
        if r.seq != i as u64 {
            return Err(bad(format!("expected seq {i}")));
        }
        let expected = world_footprint(&geom, &r.config());
        if expected.len() != r.footprint.len() {
            return Err(bad(format!(
                "{} footprint has {} vertices, expected {}",
                r.state,
                r.footprint.len(),
                expected.len()
            )));
        }
        for (k, (v, p)) in expected.vertices().iter().zip(&r.footprint).enumerate() {
            let err = (v.x - p[0]).abs().max((v.y - p[1]).abs());
            if !(err <= TRACE_FOOTPRINT_TOL) {
                return Err(bad(format!("vertex {k} is off by {err:e}")));
            }
        }
    }
    Ok(())
}
