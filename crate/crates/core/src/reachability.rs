//! Breadth-first closure of the revolve graph under a locomotion mode.
//!
//! Bistate closures terminate; the tristate closure keeps growing for as long
//! as the budget allows. The report only says "finite" when the frontier
//! actually empties.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Aabb;
use crate::robot::{
    reachable_point, revolve, world_footprint, Configuration, EdgeLabel, RobotGeometry,
    StableState, Transition, TransitionTable,
};
use crate::tolerances::{KEY_ANGLE, KEY_POS_REL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReachError {
    #[error("start state {state} is not part of locomotion mode {mode}")]
    StartStateNotInMode { state: StableState, mode: LocomotionMode },
    #[error("start footprint is not inside the arena")]
    StartOutsideArena,
    #[error("budget must be at least 1")]
    ZeroBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum LocomotionMode {
    #[serde(rename = "bistate-hu-sd", alias = "BISTATE_HU_SD")]
    BistateHuSd,
    #[serde(rename = "bistate-hd-sd", alias = "BISTATE_HD_SD")]
    BistateHdSd,
    #[default]
    #[serde(rename = "tristate", alias = "TRISTATE")]
    Tristate,
}

impl LocomotionMode {
    pub fn allows_state(self, s: StableState) -> bool {
        match self {
            LocomotionMode::BistateHuSd => s != StableState::Hd,
            LocomotionMode::BistateHdSd => s != StableState::Hu,
            LocomotionMode::Tristate => true,
        }
    }

    pub fn allows(self, from: StableState, t: &Transition) -> bool {
        self.allows_state(from) && self.allows_state(t.target)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LocomotionMode::BistateHuSd => "bistate-hu-sd",
            LocomotionMode::BistateHdSd => "bistate-hd-sd",
            LocomotionMode::Tristate => "tristate",
        }
    }
}

impl fmt::Display for LocomotionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LocomotionMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bistate-hu-sd" | "BISTATE_HU_SD" => Ok(Self::BistateHuSd),
            "bistate-hd-sd" | "BISTATE_HD_SD" => Ok(Self::BistateHdSd),
            "tristate" | "TRISTATE" => Ok(Self::Tristate),
            other => Err(format!("unknown locomotion mode `{other}`")),
        }
    }
}

/// Successors of `config` under `mode`, in canonical edge order.
pub fn successors<'a>(
    geom: &'a RobotGeometry,
    table: &'a TransitionTable,
    mode: LocomotionMode,
    config: Configuration,
) -> impl Iterator<Item = (EdgeLabel, Configuration)> + 'a {
    table
        .allowed_edges(config.state)
        .filter(move |(_, t)| mode.allows(config.state, t))
        .filter_map(move |(e, _)| revolve(geom, table, &config, e).ok().map(|c| (e, c)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuantizedKey {
    pub qx: i64,
    pub qy: i64,
    pub qalpha: i64,
    pub state: StableState,
}

/// Rounds a configuration onto a grid of `eps_p` in position and about
/// `eps_a` in angle.
///
/// The angle is first reduced by the state's rotational symmetry (a third of
/// a turn for triangles), and the angular quantum is adjusted to the nearest
/// value dividing that period exactly so the wraparound seam carries no
/// off-by-one bin.
pub fn quantize(config: &Configuration, eps_p: f64, eps_a: f64) -> QuantizedKey {
    let period = config.state.symmetry_period();
    let bins = (period / eps_a).round().max(1.0);
    let reduced = config.alpha().rem_euclid(period);
    let qalpha = ((reduced / period * bins).round() as i64).rem_euclid(bins as i64);
    QuantizedKey {
        qx: (config.centroid.x / eps_p).round() as i64,
        qy: (config.centroid.y / eps_p).round() as i64,
        qalpha,
        state: config.state,
    }
}

/// Visited-set identity policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KeyMode {
    Quantized { eps_p: f64, eps_a: f64 },
    /// Bit-exact coordinates; never merges configurations reached along different chains.
    Exact,
}

impl KeyMode {
    pub fn default_for(geom: &RobotGeometry) -> Self {
        KeyMode::Quantized {
            eps_p: KEY_POS_REL * geom.tri_side(),
            eps_a: KEY_ANGLE,
        }
    }

    pub fn key(&self, config: &Configuration) -> QuantizedKey {
        match *self {
            KeyMode::Quantized { eps_p, eps_a } => quantize(config, eps_p, eps_a),
            KeyMode::Exact => QuantizedKey {
                qx: config.centroid.x.to_bits() as i64,
                qy: config.centroid.y.to_bits() as i64,
                qalpha: config.alpha().rem_euclid(config.state.symmetry_period()).to_bits() as i64,
                state: config.state,
            },
        }
    }

    /// Position-only key, used to count distinct points.
    fn point_key(&self, config: &Configuration) -> (i64, i64) {
        let k = self.key(config);
        (k.qx, k.qy)
    }
}

/// One visited configuration and the pivot edge that first reached it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub config: Configuration,
    pub pivot: Option<EdgeLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachabilityReport {
    pub mode: LocomotionMode,
    pub visited: usize,
    pub reachable_points: usize,
    pub footprint_poses: usize,
    pub footprint_positions: usize,
    pub exhausted: bool,
    pub expansions: usize,
}

#[derive(Debug, Clone)]
pub struct Enumeration {
    pub report: ReachabilityReport,
    pub trace: Vec<TraceStep>,
}

#[derive(Debug, Clone)]
pub struct EnumerateOptions {
    pub mode: LocomotionMode,
    pub arena: Option<Aabb>,
    pub budget: usize,
    pub keys: Option<KeyMode>,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        Self {
            mode: LocomotionMode::Tristate,
            arena: None,
            budget: 10_000,
            keys: None,
        }
    }
}

/// FIFO closure from `start`. Configurations whose footprint leaves the arena
/// are neither recorded nor expanded.
pub fn enumerate(
    geom: &RobotGeometry,
    table: &TransitionTable,
    start: Configuration,
    opts: &EnumerateOptions,
) -> Result<Enumeration, ReachError> {
    let mode = opts.mode;
    if !mode.allows_state(start.state) {
        return Err(ReachError::StartStateNotInMode {
            state: start.state,
            mode,
        });
    }
    if opts.budget == 0 {
        return Err(ReachError::ZeroBudget);
    }
    let inside = |c: &Configuration| {
        opts.arena
            .is_none_or(|a| a.contains_polygon(&world_footprint(geom, c)))
    };
    if !inside(&start) {
        return Err(ReachError::StartOutsideArena);
    }
    let keys = opts.keys.unwrap_or_else(|| KeyMode::default_for(geom));

    let mut seen = HashSet::new();
    let mut positions = HashSet::new();
    let mut points = HashSet::new();
    let mut trace = Vec::new();
    let mut queue = VecDeque::new();

    let mut record = |c: Configuration, pivot, trace: &mut Vec<TraceStep>| {
        if !seen.insert(keys.key(&c)) {
            return false;
        }
        positions.insert((keys.point_key(&c), c.state));
        if reachable_point(geom, &c).is_some() {
            points.insert(keys.point_key(&c));
        }
        trace.push(TraceStep { config: c, pivot });
        true
    };

    record(start, None, &mut trace);
    queue.push_back(start);
    let mut expansions = 0;
    while expansions < opts.budget {
        let Some(current) = queue.pop_front() else {
            break;
        };
        expansions += 1;
        for (edge, next) in successors(geom, table, mode, current) {
            if inside(&next) && record(next, Some(edge), &mut trace) {
                queue.push_back(next);
            }
        }
    }

    let report = ReachabilityReport {
        mode,
        visited: seen.len(),
        reachable_points: points.len(),
        footprint_poses: seen.len(),
        footprint_positions: positions.len(),
        exhausted: queue.is_empty(),
        expansions,
    };
    Ok(Enumeration { report, trace })
}
