//! Robot structure: stable states, contact footprints, the transition table
//! and the single kinematic action, [`revolve`].
//!
//! The contact model is a triangular prism. Standing on either triangular end
//! gives the head-up (`HU`) or head-down (`HD`) footprint, an equilateral
//! triangle of side `s`. Lying on a rectangular side gives the side-down
//! (`SD`) footprint, an `w × s` rectangle whose two `s`-long edges lead back to
//! the triangle states.
//!
//! Body frames put the footprint centroid at the origin with the reference
//! direction along `+x`: towards vertex 0 for triangles, towards `HU_END` for
//! the rectangle.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{angle_distance_mod, normalize_angle, ConvexPolygon, Pose2, Segment, Vec2};
use crate::tolerances::POSE_EQ;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RobotError {
    #[error("transition {state} over {edge} is not allowed")]
    DisallowedTransition { state: StableState, edge: EdgeLabel },
    #[error("edge {edge} does not exist in state {state}")]
    InvalidEdge { state: StableState, edge: EdgeLabel },
    #[error("pivot edge length {pivot} does not match arrival edge length {arrival}")]
    EdgeLengthMismatch { pivot: f64, arrival: f64 },
    #[error("invalid robot geometry: {0}")]
    InvalidGeometry(String),
    #[error("transition table: {0}")]
    InvalidTable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StableState {
    #[serde(rename = "HU")]
    Hu,
    #[serde(rename = "HD")]
    Hd,
    #[serde(rename = "SD")]
    Sd,
}

impl StableState {
    pub const ALL: [StableState; 3] = [StableState::Hu, StableState::Hd, StableState::Sd];

    pub fn is_triangle(self) -> bool {
        !matches!(self, StableState::Sd)
    }

    /// Rotation period under which the footprint and all its transitions are unchanged.
    pub fn symmetry_period(self) -> f64 {
        if self.is_triangle() {
            TAU / 3.0
        } else {
            TAU
        }
    }

    /// Pivot edges in canonical expansion order.
    pub fn edges(self) -> &'static [EdgeLabel] {
        const TRI: [EdgeLabel; 3] = [EdgeLabel::Tri(0), EdgeLabel::Tri(1), EdgeLabel::Tri(2)];
        const RECT: [EdgeLabel; 4] = [
            EdgeLabel::HuEnd,
            EdgeLabel::HdEnd,
            EdgeLabel::LongA,
            EdgeLabel::LongB,
        ];
        if self.is_triangle() {
            &TRI
        } else {
            &RECT
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StableState::Hu => "HU",
            StableState::Hd => "HD",
            StableState::Sd => "SD",
        }
    }
}

impl fmt::Display for StableState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StableState {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "HU" => Ok(StableState::Hu),
            "HD" => Ok(StableState::Hd),
            "SD" => Ok(StableState::Sd),
            other => Err(format!("unknown stable state `{other}`")),
        }
    }
}

/// Footprint edge address. Triangle edge `k` is the one opposite vertex `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum EdgeLabel {
    Tri(u8),
    HuEnd,
    HdEnd,
    LongA,
    LongB,
}

impl EdgeLabel {
    pub fn valid_for(self, state: StableState) -> bool {
        match self {
            EdgeLabel::Tri(k) => state.is_triangle() && k < 3,
            _ => state == StableState::Sd,
        }
    }

    /// Index of this edge in the canonical footprint's vertex ring.
    fn polygon_edge(self) -> usize {
        match self {
            EdgeLabel::Tri(k) => (k as usize + 1) % 3,
            EdgeLabel::HuEnd => 0,
            EdgeLabel::LongA => 1,
            EdgeLabel::HdEnd => 2,
            EdgeLabel::LongB => 3,
        }
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::Tri(k) => write!(f, "{k}"),
            EdgeLabel::HuEnd => f.write_str("HU_END"),
            EdgeLabel::HdEnd => f.write_str("HD_END"),
            EdgeLabel::LongA => f.write_str("LONG_A"),
            EdgeLabel::LongB => f.write_str("LONG_B"),
        }
    }
}

impl FromStr for EdgeLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "0" => Ok(EdgeLabel::Tri(0)),
            "1" => Ok(EdgeLabel::Tri(1)),
            "2" => Ok(EdgeLabel::Tri(2)),
            "HU_END" => Ok(EdgeLabel::HuEnd),
            "HD_END" => Ok(EdgeLabel::HdEnd),
            "LONG_A" => Ok(EdgeLabel::LongA),
            "LONG_B" => Ok(EdgeLabel::LongB),
            other => Err(format!("unknown edge label `{other}`")),
        }
    }
}

impl From<EdgeLabel> for String {
    fn from(e: EdgeLabel) -> String {
        e.to_string()
    }
}

impl TryFrom<String> for EdgeLabel {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Robot dimensions. `tri_side` and `rect_width` drive every algorithm;
/// `ell` and `leg_len` are the physical parameters they default from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotGeometry {
    ell: f64,
    leg_len: f64,
    tri_side: f64,
    rect_width: f64,
}

impl RobotGeometry {
    /// Triangle side derived from the tetrahedron edge and leg length.
    pub fn default_tri_side(ell: f64, leg_len: f64) -> f64 {
        ell + leg_len * (8.0f64 / 3.0).sqrt()
    }

    pub fn default_rect_width(tri_side: f64) -> f64 {
        tri_side * 3.0f64.sqrt() / 2.0
    }

    pub fn new(
        ell: f64,
        leg_len: f64,
        tri_side: Option<f64>,
        rect_width: Option<f64>,
    ) -> Result<Self, RobotError> {
        let s = tri_side.unwrap_or_else(|| Self::default_tri_side(ell, leg_len));
        let w = rect_width.unwrap_or_else(|| Self::default_rect_width(s));
        for (name, v) in [("ell", ell), ("leg_len", leg_len), ("tri_side", s), ("rect_width", w)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(RobotError::InvalidGeometry(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(Self {
            ell,
            leg_len,
            tri_side: s,
            rect_width: w,
        })
    }

    /// Geometry given directly by footprint dimensions. `ell` and `leg_len`
    /// are back-filled so that they reproduce `tri_side` on their own.
    pub fn with_sides(tri_side: f64, rect_width: f64) -> Result<Self, RobotError> {
        let ell = tri_side / 2.0;
        let leg_len = (tri_side - ell) / (8.0f64 / 3.0).sqrt();
        Self::new(ell, leg_len, Some(tri_side), Some(rect_width))
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }
    pub fn leg_len(&self) -> f64 {
        self.leg_len
    }
    pub fn tri_side(&self) -> f64 {
        self.tri_side
    }
    pub fn rect_width(&self) -> f64 {
        self.rect_width
    }

    /// Centroid-to-edge distance of the triangle footprint.
    pub fn tri_inradius(&self) -> f64 {
        self.tri_side / (2.0 * 3.0f64.sqrt())
    }

    pub fn tri_circumradius(&self) -> f64 {
        self.tri_side / 3.0f64.sqrt()
    }

    /// Centroid-to-arrival-edge distance for an edge of `state`.
    pub fn centroid_to_edge(&self, state: StableState, edge: EdgeLabel) -> f64 {
        match (state, edge) {
            (StableState::Sd, EdgeLabel::LongA | EdgeLabel::LongB) => self.tri_side / 2.0,
            (StableState::Sd, _) => self.rect_width / 2.0,
            _ => self.tri_inradius(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub centroid: Vec2,
    pub state: StableState,
    alpha: f64,
}

impl Configuration {
    pub fn new(centroid: Vec2, state: StableState, alpha: f64) -> Self {
        Self {
            centroid,
            state,
            alpha: normalize_angle(alpha),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn pose(&self) -> Pose2 {
        Pose2::new(self.centroid, self.alpha)
    }

    /// Same state, and same footprint placement up to the state's rotational symmetry.
    pub fn approx_eq(&self, other: &Configuration, tol: f64) -> bool {
        self.state == other.state
            && self.centroid.distance(other.centroid) <= tol
            && angle_distance_mod(self.alpha, other.alpha, self.state.symmetry_period()) <= tol
    }

    pub fn same_pose(&self, other: &Configuration) -> bool {
        self.approx_eq(other, POSE_EQ)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub target: StableState,
    pub arrival: EdgeLabel,
    pub allowed: bool,
}

/// Data-driven map from `(state, pivot edge)` to the landing state and the
/// edge of the new footprint that lands on the pivot.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    entries: BTreeMap<(StableState, EdgeLabel), Transition>,
}

impl Default for TransitionTable {
    fn default() -> Self {
        Self::prism(false)
    }
}

impl TransitionTable {
    /// The prism contact model's table. Long-edge `SD → SD` tips exist but
    /// are only enabled with `allow_sd_sd`.
    pub fn prism(allow_sd_sd: bool) -> Self {
        use EdgeLabel::*;
        use StableState::*;
        let mut entries = BTreeMap::new();
        let mut put = |s, e, target, arrival, allowed| {
            entries.insert(
                (s, e),
                Transition {
                    target,
                    arrival,
                    allowed,
                },
            );
        };
        for k in 0..3 {
            put(Hu, Tri(k), Sd, HuEnd, true);
            put(Hd, Tri(k), Sd, HdEnd, true);
        }
        put(Sd, HuEnd, Hu, Tri(0), true);
        put(Sd, HdEnd, Hd, Tri(0), true);
        put(Sd, LongA, Sd, LongB, allow_sd_sd);
        put(Sd, LongB, Sd, LongA, allow_sd_sd);
        Self { entries }
    }

    pub fn from_entries(
        entries: impl IntoIterator<Item = ((StableState, EdgeLabel), Transition)>,
    ) -> Result<Self, RobotError> {
        let table = Self {
            entries: entries.into_iter().collect(),
        };
        table.validate()?;
        Ok(table)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(StableState, EdgeLabel), &Transition)> {
        self.entries.iter()
    }

    pub fn get(&self, state: StableState, edge: EdgeLabel) -> Option<&Transition> {
        self.entries.get(&(state, edge))
    }

    pub fn lookup(&self, state: StableState, edge: EdgeLabel) -> Result<Transition, RobotError> {
        match self.entries.get(&(state, edge)) {
            Some(t) if t.allowed => Ok(*t),
            _ => Err(RobotError::DisallowedTransition { state, edge }),
        }
    }

    /// Allowed pivot edges of `state`, in canonical order.
    pub fn allowed_edges(&self, state: StableState) -> impl Iterator<Item = (EdgeLabel, Transition)> + '_ {
        state
            .edges()
            .iter()
            .filter_map(move |&e| self.lookup(state, e).ok().map(|t| (e, t)))
    }

    pub fn set_allowed(&mut self, state: StableState, edge: EdgeLabel, allowed: bool) {
        if let Some(t) = self.entries.get_mut(&(state, edge)) {
            t.allowed = allowed;
        }
    }

    /// Label validity plus the reverse-entry property that makes `revolve`
    /// an involution: every allowed `(S, e) → (T, a)` is answered by an
    /// allowed `(T, a) → (S, e')` where `e'` lands on the same footprint edge.
    pub fn validate(&self) -> Result<(), RobotError> {
        for (&(s, e), t) in &self.entries {
            if !e.valid_for(s) {
                return Err(RobotError::InvalidTable(format!("edge {e} invalid for {s}")));
            }
            if !t.arrival.valid_for(t.target) {
                return Err(RobotError::InvalidTable(format!(
                    "arrival edge {} invalid for {}",
                    t.arrival, t.target
                )));
            }
            if edge_class(s, e) != edge_class(t.target, t.arrival) {
                return Err(RobotError::InvalidTable(format!(
                    "{s}/{e} and {}/{} have different lengths",
                    t.target, t.arrival
                )));
            }
            if !t.allowed {
                continue;
            }
            let back = self.lookup(t.target, t.arrival).map_err(|_| {
                RobotError::InvalidTable(format!(
                    "{s}/{e} -> {}/{} has no allowed reverse entry",
                    t.target, t.arrival
                ))
            })?;
            let same_edge = back.target == s
                && (s.is_triangle() || back.arrival == e)
                && back.arrival.valid_for(s);
            if !same_edge {
                return Err(RobotError::InvalidTable(format!(
                    "reverse of {s}/{e} lands on {}/{}",
                    back.target, back.arrival
                )));
            }
        }
        Ok(())
    }
}

/// Edges are interchangeable for placement only when they have the same length.
#[derive(PartialEq, Eq)]
enum EdgeClass {
    Side,
    Long,
}

fn edge_class(state: StableState, edge: EdgeLabel) -> EdgeClass {
    match (state, edge) {
        (StableState::Sd, EdgeLabel::LongA | EdgeLabel::LongB) => EdgeClass::Long,
        _ => EdgeClass::Side,
    }
}

/// Footprint in the body frame: centroid at the origin, reference direction along `+x`.
pub fn canonical_footprint(geom: &RobotGeometry, state: StableState) -> ConvexPolygon {
    let verts = if state.is_triangle() {
        let r = geom.tri_circumradius();
        (0..3)
            .map(|k| Vec2::from_angle(k as f64 * TAU / 3.0) * r)
            .collect()
    } else {
        let hx = geom.rect_width() / 2.0;
        let hy = geom.tri_side() / 2.0;
        vec![
            Vec2::new(hx, -hy),
            Vec2::new(hx, hy),
            Vec2::new(-hx, hy),
            Vec2::new(-hx, -hy),
        ]
    };
    ConvexPolygon::from_trusted(verts)
}

pub fn world_footprint(geom: &RobotGeometry, config: &Configuration) -> ConvexPolygon {
    canonical_footprint(geom, config.state).transformed(&config.pose())
}

/// Endpoints of `edge` in the body frame, in the footprint's counterclockwise order.
pub fn canonical_edge(geom: &RobotGeometry, state: StableState, edge: EdgeLabel) -> Result<(Vec2, Vec2), RobotError> {
    if !edge.valid_for(state) {
        return Err(RobotError::InvalidEdge { state, edge });
    }
    Ok(canonical_footprint(geom, state).edge(edge.polygon_edge()))
}

/// World-frame segment of the pivot `edge` for `config`.
pub fn pivot_segment(geom: &RobotGeometry, config: &Configuration, edge: EdgeLabel) -> Result<Segment, RobotError> {
    let (a, b) = canonical_edge(geom, config.state, edge)?;
    let pose = config.pose();
    Segment::new(pose.apply(a), pose.apply(b)).map_err(|e| RobotError::InvalidGeometry(e.to_string()))
}

/// Places a footprint of `target` so that its `arrival` edge lies on the
/// pivot edge of `config`, endpoints swapped, interior on the far side.
pub fn place_across(
    geom: &RobotGeometry,
    config: &Configuration,
    pivot: EdgeLabel,
    target: StableState,
    arrival: EdgeLabel,
) -> Result<Configuration, RobotError> {
    let (p0, p1) = canonical_edge(geom, config.state, pivot)?;
    let (q0, q1) = canonical_edge(geom, target, arrival)?;
    let (lp, lq) = (p0.distance(p1), q0.distance(q1));
    if (lp - lq).abs() > POSE_EQ {
        return Err(RobotError::EdgeLengthMismatch {
            pivot: lp,
            arrival: lq,
        });
    }
    let pose = config.pose();
    let placed = Pose2::aligning(q0, q1, pose.apply(p1), pose.apply(p0));
    Ok(Configuration::new(placed.position, target, placed.theta()))
}

/// Tips the robot over `edge`.
pub fn revolve(
    geom: &RobotGeometry,
    table: &TransitionTable,
    config: &Configuration,
    edge: EdgeLabel,
) -> Result<Configuration, RobotError> {
    if !edge.valid_for(config.state) {
        return Err(RobotError::InvalidEdge {
            state: config.state,
            edge,
        });
    }
    let t = table.lookup(config.state, edge)?;
    place_across(geom, config, edge, t.target, t.arrival)
}

/// Where the head foot touches the ground; only defined head-down.
pub fn reachable_point(_geom: &RobotGeometry, config: &Configuration) -> Option<Vec2> {
    (config.state == StableState::Hd).then_some(config.centroid)
}

/// Centroid displacement of a tip between `from` and `to` over an edge pair.
pub fn step_length(geom: &RobotGeometry, from: (StableState, EdgeLabel), to: (StableState, EdgeLabel)) -> f64 {
    geom.centroid_to_edge(from.0, from.1) + geom.centroid_to_edge(to.0, to.1)
}
