//! Goal-directed search over the revolve graph.
//!
//! [`bfs_plan`] minimizes the number of flips; [`astar_plan`] orders its
//! frontier by `g + h`, where `g` is the centroid path length travelled so
//! far and `h` the straight-line distance still to cover, and minimizes total
//! centroid path length. Both prune any move whose footprint touches an
//! obstacle or leaves the arena.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{map_slice, Execution};
use crate::geometry::{point_in_polygon, polygons_intersect, Aabb, ConvexPolygon, Vec2};
use crate::reachability::{successors, KeyMode, LocomotionMode, TraceStep};
use crate::robot::{
    revolve, world_footprint, Configuration, EdgeLabel, RobotGeometry, StableState,
    TransitionTable,
};

pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("no path: frontier exhausted after {expansions} expansions")]
    NoPath { expansions: usize },
    #[error("budget of {expansions} expansions exhausted")]
    BudgetExhausted { expansions: usize },
    #[error("invalid scene: {0}")]
    InvalidScene(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub arena: Option<Aabb>,
    pub obstacles: Vec<ConvexPolygon>,
    pub start: Configuration,
    pub target: Vec2,
    pub tolerance: f64,
    pub goal_state: Option<StableState>,
}

impl Scene {
    /// Open field with no arena or obstacles.
    pub fn open(start: Configuration, target: Vec2, tolerance: f64) -> Self {
        Self {
            arena: None,
            obstacles: Vec::new(),
            start,
            target,
            tolerance,
            goal_state: None,
        }
    }

    pub fn validate(&self, geom: &RobotGeometry) -> Result<(), PlanError> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(PlanError::InvalidScene(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if !self.target.is_finite() {
            return Err(PlanError::InvalidScene("target is not finite".into()));
        }
        if !check_move(geom, self, &self.start, false) {
            return Err(PlanError::InvalidScene(
                "start footprint collides or leaves the arena".into(),
            ));
        }
        Ok(())
    }

    pub fn is_goal(&self, c: &Configuration) -> bool {
        c.centroid.distance(self.target) <= self.tolerance
            && self.goal_state.is_none_or(|s| s == c.state)
    }
}

/// True iff the candidate footprint is clear of every obstacle and inside the
/// arena. With `point_mode` only the centroid is tested.
pub fn check_move(geom: &RobotGeometry, scene: &Scene, candidate: &Configuration, point_mode: bool) -> bool {
    if point_mode {
        let p = candidate.centroid;
        return scene.arena.is_none_or(|a| a.contains_point(p))
            && !scene.obstacles.iter().any(|o| point_in_polygon(p, o));
    }
    let fp = world_footprint(geom, candidate);
    scene.arena.is_none_or(|a| a.contains_polygon(&fp))
        && !scene.obstacles.iter().any(|o| polygons_intersect(&fp, o))
}

/// A* edge cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostMetric {
    /// Centroid travel per flip.
    #[default]
    PathLength,
    /// One per flip.
    Flips,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOptions {
    pub mode: LocomotionMode,
    pub budget: usize,
    pub point_mode: bool,
    pub keys: Option<KeyMode>,
    pub cost: CostMetric,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            mode: LocomotionMode::Tristate,
            budget: DEFAULT_BUDGET,
            point_mode: false,
            keys: None,
            cost: CostMetric::PathLength,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub edge: EdgeLabel,
    pub config: Configuration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub start: Configuration,
    pub steps: Vec<PlanStep>,
    pub flips: usize,
    pub path_length: f64,
    pub expansions: usize,
}

impl Plan {
    pub fn final_config(&self) -> Configuration {
        self.steps.last().map_or(self.start, |s| s.config)
    }

    pub fn trace(&self) -> Vec<TraceStep> {
        std::iter::once(TraceStep {
            config: self.start,
            pivot: None,
        })
        .chain(self.steps.iter().map(|s| TraceStep {
            config: s.config,
            pivot: Some(s.edge),
        }))
        .collect()
    }

    /// Re-executes every edge from `start`; returns the index of the first step
    /// that does not reproduce within [`crate::tolerances::POSE_EQ`], or fails `check_move`.
    pub fn replay(&self, geom: &RobotGeometry, table: &TransitionTable, scene: &Scene, point_mode: bool) -> Result<(), usize> {
        let mut current = self.start;
        for (i, step) in self.steps.iter().enumerate() {
            let next = revolve(geom, table, &current, step.edge).map_err(|_| i)?;
            if !next.same_pose(&step.config) || !check_move(geom, scene, &next, point_mode) {
                return Err(i);
            }
            current = next;
        }
        Ok(())
    }
}

struct Node {
    config: Configuration,
    parent: Option<usize>,
    edge: Option<EdgeLabel>,
    g: f64,
}

fn reconstruct(nodes: &[Node], mut idx: usize, start: Configuration, expansions: usize) -> Plan {
    let mut steps = Vec::new();
    while let (Some(parent), Some(edge)) = (nodes[idx].parent, nodes[idx].edge) {
        steps.push(PlanStep {
            edge,
            config: nodes[idx].config,
        });
        idx = parent;
    }
    steps.reverse();
    let path_length = path_length(start, &steps);
    Plan {
        start,
        flips: steps.len(),
        steps,
        path_length,
        expansions,
    }
}

/// Sum of centroid displacements along the step chain.
pub fn path_length(start: Configuration, steps: &[PlanStep]) -> f64 {
    let mut prev = start.centroid;
    let mut total = 0.0;
    for s in steps {
        total += prev.distance(s.config.centroid);
        prev = s.config.centroid;
    }
    total
}

fn empty_plan(scene: &Scene) -> Plan {
    Plan {
        start: scene.start,
        steps: Vec::new(),
        flips: 0,
        path_length: 0.0,
        expansions: 0,
    }
}

/// FIFO search with unit edge cost; the first goal generated has the fewest flips.
pub fn bfs_plan(
    geom: &RobotGeometry,
    table: &TransitionTable,
    scene: &Scene,
    opts: &PlanOptions,
) -> Result<Plan, PlanError> {
    scene.validate(geom)?;
    if scene.is_goal(&scene.start) {
        return Ok(empty_plan(scene));
    }
    let keys = opts.keys.unwrap_or_else(|| KeyMode::default_for(geom));
    let mut nodes = vec![Node {
        config: scene.start,
        parent: None,
        edge: None,
        g: 0.0,
    }];
    let mut seen = HashSet::from([keys.key(&scene.start)]);
    let mut queue = VecDeque::from([0usize]);
    let mut expansions = 0;
    while let Some(&idx) = queue.front() {
        if expansions >= opts.budget {
            return Err(PlanError::BudgetExhausted { expansions });
        }
        queue.pop_front();
        expansions += 1;
        let current = nodes[idx].config;
        for (edge, next) in successors(geom, table, opts.mode, current) {
            if !check_move(geom, scene, &next, opts.point_mode) || !seen.insert(keys.key(&next)) {
                continue;
            }
            nodes.push(Node {
                config: next,
                parent: Some(idx),
                edge: Some(edge),
                g: nodes[idx].g + 1.0,
            });
            let child = nodes.len() - 1;
            if scene.is_goal(&next) {
                return Ok(reconstruct(&nodes, child, scene.start, expansions));
            }
            queue.push_back(child);
        }
    }
    Err(PlanError::NoPath { expansions })
}

#[derive(Debug, Clone, Copy)]
struct Frontier {
    f: f64,
    h: f64,
    seq: u64,
    node: usize,
}

impl PartialEq for Frontier {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Frontier {}
impl PartialOrd for Frontier {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Frontier {
    // BinaryHeap is a max-heap: invert so the smallest (f, h, seq) pops first
    fn cmp(&self, o: &Self) -> Ordering {
        o.f.total_cmp(&self.f)
            .then_with(|| o.h.total_cmp(&self.h))
            .then_with(|| o.seq.cmp(&self.seq))
    }
}

/// Longest centroid step any allowed transition can make.
fn max_step(geom: &RobotGeometry, table: &TransitionTable) -> f64 {
    table
        .entries()
        .filter(|(_, t)| t.allowed)
        .map(|(&(s, e), t)| geom.centroid_to_edge(s, e) + geom.centroid_to_edge(t.target, t.arrival))
        .fold(0.0, f64::max)
}

/// Best-first search on `g + h`. `h` is the distance from the centroid to the
/// goal disk, which never overestimates because each flip moves the centroid
/// by exactly its chord.
pub fn astar_plan(
    geom: &RobotGeometry,
    table: &TransitionTable,
    scene: &Scene,
    opts: &PlanOptions,
) -> Result<Plan, PlanError> {
    scene.validate(geom)?;
    if scene.is_goal(&scene.start) {
        return Ok(empty_plan(scene));
    }
    let keys = opts.keys.unwrap_or_else(|| KeyMode::default_for(geom));
    let step_scale = match opts.cost {
        CostMetric::PathLength => 1.0,
        CostMetric::Flips => 1.0 / max_step(geom, table).max(f64::MIN_POSITIVE),
    };
    let heuristic = |c: &Configuration| (c.centroid.distance(scene.target) - scene.tolerance).max(0.0) * step_scale;
    let edge_cost = |a: &Configuration, b: &Configuration| match opts.cost {
        CostMetric::PathLength => a.centroid.distance(b.centroid),
        CostMetric::Flips => 1.0,
    };

    let mut nodes = vec![Node {
        config: scene.start,
        parent: None,
        edge: None,
        g: 0.0,
    }];
    let mut best_g = HashMap::from([(keys.key(&scene.start), 0.0f64)]);
    let mut closed = HashSet::new();
    let mut open = BinaryHeap::new();
    let h0 = heuristic(&scene.start);
    open.push(Frontier {
        f: h0,
        h: h0,
        seq: 0,
        node: 0,
    });
    let mut seq = 1u64;
    let mut expansions = 0;

    while let Some(top) = open.pop() {
        let current = nodes[top.node].config;
        let key = keys.key(&current);
        if closed.contains(&key) {
            continue;
        }
        if scene.is_goal(&current) {
            return Ok(reconstruct(&nodes, top.node, scene.start, expansions));
        }
        if expansions >= opts.budget {
            return Err(PlanError::BudgetExhausted { expansions });
        }
        closed.insert(key);
        expansions += 1;
        let g = nodes[top.node].g;
        for (edge, next) in successors(geom, table, opts.mode, current) {
            let nkey = keys.key(&next);
            if closed.contains(&nkey) || !check_move(geom, scene, &next, opts.point_mode) {
                continue;
            }
            let ng = g + edge_cost(&current, &next);
            if best_g.get(&nkey).is_some_and(|&old| old <= ng) {
                continue;
            }
            best_g.insert(nkey, ng);
            nodes.push(Node {
                config: next,
                parent: Some(top.node),
                edge: Some(edge),
                g: ng,
            });
            let h = heuristic(&next);
            open.push(Frontier {
                f: ng + h,
                h,
                seq,
                node: nodes.len() - 1,
            });
            seq += 1;
        }
    }
    Err(PlanError::NoPath { expansions })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bfs,
    #[default]
    Astar,
}

/// Plans every scene independently; results come back in input order.
pub fn plan_batch(
    geom: &RobotGeometry,
    table: &TransitionTable,
    scenes: &[Scene],
    algo: Algorithm,
    opts: &PlanOptions,
    exec: Execution,
) -> Vec<Result<Plan, PlanError>> {
    map_slice(scenes, exec, |scene| match algo {
        Algorithm::Bfs => bfs_plan(geom, table, scene, opts),
        Algorithm::Astar => astar_plan(geom, table, scene, opts),
    })
}
