//! Seeded inputs shared by the integration tests and the acceptance suite.
//! Unlike `common`, these build scenes with the library itself; the values
//! they produce are checked against `common`.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tumbler_core::geometry::{Aabb, ConvexPolygon, Vec2};
use tumbler_core::planner::Scene;
use tumbler_core::robot::{pivot_segment, revolve, Configuration, EdgeLabel, RobotGeometry, StableState, TransitionTable};
use tumbler_core::statics::{LiftState, MassModel, MovableMass, StaticsModel, Vec3, DEFAULT_GRAVITY};

use crate::common::kin::{self, Cfg, Dims, St};
use crate::common::search::World;
use crate::common::statics as oracle;

pub const ELL: f64 = 0.8;
pub const LEG: f64 = 0.3;

pub fn geom() -> RobotGeometry {
    RobotGeometry::new(ELL, LEG, None, None).unwrap()
}

pub fn dims() -> Dims {
    Dims::from_ell(ELL, LEG)
}

pub fn to_st(s: StableState) -> St {
    match s {
        StableState::Hu => St::Hu,
        StableState::Hd => St::Hd,
        StableState::Sd => St::Sd,
    }
}

pub fn edge_index(e: EdgeLabel) -> usize {
    match e {
        EdgeLabel::Tri(k) => k as usize,
        EdgeLabel::HuEnd => 0,
        EdgeLabel::LongA => 1,
        EdgeLabel::HdEnd => 2,
        EdgeLabel::LongB => 3,
    }
}

pub fn to_cfg(c: &Configuration) -> Cfg {
    Cfg {
        st: to_st(c.state),
        c: (c.centroid.x, c.centroid.y),
        a: c.alpha(),
    }
}

/// Distinct footprint poses reachable by the reference tip under one bistate pair.
pub fn oracle_closure(d: &Dims, start: Cfg, other: St) -> usize {
    let mut poses: Vec<Cfg> = vec![start];
    let mut frontier = vec![start];
    while let Some(c) = frontier.pop() {
        for e in 0..kin::n_edges(c.st) {
            let Some(n) = kin::tip(d, &c, e, false) else { continue };
            if n.st != St::Sd && n.st != other {
                continue;
            }
            if !poses.iter().any(|p| kin::same_pose(p, &n, 1e-6)) {
                poses.push(n);
                frontier.push(n);
                assert!(poses.len() < 1000, "closure does not terminate");
            }
        }
    }
    poses.len()
}

pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> ConvexPolygon {
    ConvexPolygon::new(vec![
        Vec2::new(x0, y0),
        Vec2::new(x1, y0),
        Vec2::new(x1, y1),
        Vec2::new(x0, y1),
    ])
    .unwrap()
}

pub fn rect_pts(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<kin::P> {
    vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
}

pub struct PlannerCase {
    pub scene: Scene,
    pub table: TransitionTable,
    pub world: World,
}

impl PlannerCase {
    pub fn oracle_start(&self) -> Cfg {
        to_cfg(&self.scene.start)
    }
}

/// A small scene whose target is the end of a collision-free random walk of
/// at most four flips, so the true optimum lies within the oracle's depth.
pub fn small_case(rng: &mut ChaCha8Rng) -> PlannerCase {
    let g = geom();
    loop {
        let sdsd = rng.random_bool(0.5);
        let table = TransitionTable::prism(sdsd);
        let start = Configuration::new(Vec2::new(0.0, 0.0), StableState::Hu, rng.random_range(-3.2..3.2));
        let (ox, oy) = (rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let (ow, oh) = (rng.random_range(0.2..1.5), rng.random_range(0.2..1.5));
        let obstacle = (ox, oy, ox + ow, oy + oh);
        let arena = (-6.0, -6.0, 6.0, 6.0);
        let mut scene = Scene {
            arena: Some(Aabb::new(Vec2::new(arena.0, arena.1), Vec2::new(arena.2, arena.3)).unwrap()),
            obstacles: vec![rect(obstacle.0, obstacle.1, obstacle.2, obstacle.3)],
            start,
            target: Vec2::new(0.0, 0.0),
            tolerance: 0.05,
            goal_state: None,
        };
        let world = World {
            dims: dims(),
            allow_sd_sd: sdsd,
            arena: Some(((arena.0, arena.1), (arena.2, arena.3))),
            obstacles: vec![rect_pts(obstacle.0, obstacle.1, obstacle.2, obstacle.3)],
            target: (0.0, 0.0),
            tol: 0.05,
            goal_state: None,
            states: vec![St::Hu, St::Hd, St::Sd],
        };
        if !world.free(&to_cfg(&start)) {
            continue;
        }
        let walk = rng.random_range(1..=4);
        let mut c = start;
        let mut ok = true;
        for _ in 0..walk {
            let edges: Vec<_> = table.allowed_edges(c.state).map(|(e, _)| e).collect();
            let e = edges[rng.random_range(0..edges.len())];
            c = revolve(&g, &table, &c, e).unwrap();
            ok &= world.free(&to_cfg(&c));
        }
        if !ok || c.centroid.norm() < 0.1 {
            continue;
        }
        scene.target = c.centroid;
        let world = World {
            target: (c.centroid.x, c.centroid.y),
            ..world
        };
        return PlannerCase { scene, table, world };
    }
}

/// End of a walk that mostly flips over the edge facing a random heading.
pub fn distant_target(g: &RobotGeometry, table: &TransitionTable, start: Configuration, rng: &mut ChaCha8Rng) -> Vec2 {
    let heading = Vec2::from_angle(rng.random_range(-3.2..3.2));
    let mut c = start;
    for _ in 0..rng.random_range(15..25) {
        let edges: Vec<_> = table.allowed_edges(c.state).map(|(e, _)| e).collect();
        let e = if rng.random_bool(0.8) {
            *edges
                .iter()
                .max_by(|a, b| {
                    let score = |e: &EdgeLabel| (pivot_segment(g, &c, *e).unwrap().midpoint() - c.centroid).dot(heading);
                    score(a).total_cmp(&score(b))
                })
                .unwrap()
        } else {
            edges[rng.random_range(0..edges.len())]
        };
        c = revolve(g, table, &c, e).unwrap();
    }
    c.centroid
}

/// Default statics model with every SD-SD transition enabled.
pub fn statics_model() -> StaticsModel {
    StaticsModel::new(geom(), MassModel::default_for(&geom()), TransitionTable::prism(true))
}

pub fn oracle_masses(m: &MassModel) -> oracle::Masses {
    oracle::Masses {
        body: m.body_mass(),
        legs: m
            .movable()
            .iter()
            .map(|l| oracle::Leg {
                mass: l.mass,
                a: [l.a.x, l.a.y, l.a.z],
                b: [l.b.x, l.b.y, l.b.z],
            })
            .collect(),
        g: m.gravity(),
    }
}

pub struct TipCase {
    pub config: Configuration,
    pub edge: EdgeLabel,
    pub beta: f64,
    pub lift: LiftState,
}

/// Random stance, edge, slope and a lift that tips over that edge.
pub fn feasible_case(m: &StaticsModel, rng: &mut ChaCha8Rng) -> TipCase {
    loop {
        let state = StableState::ALL[rng.random_range(0..3)];
        let config = Configuration::new(
            Vec2::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)),
            state,
            rng.random_range(-3.2..3.2),
        );
        let edges: Vec<EdgeLabel> = m.table().allowed_edges(state).map(|(e, _)| e).collect();
        let edge = edges[rng.random_range(0..edges.len())];
        let beta = rng.random_range(0.0..0.5);
        let lift = LiftState::new((0..m.masses().len()).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap();
        let st = m.stance(config);
        if m.can_tip(&lift, &st, edge, beta).unwrap() {
            return TipCase {
                config,
                edge,
                beta,
                lift,
            };
        }
    }
}

/// One mass sliding from the centroid out to 2.5 triangle sides along +x.
pub fn reach_mass(mass: f64) -> MassModel {
    let reach = 2.5 * geom().tri_side();
    MassModel::new(
        1.0,
        vec![MovableMass {
            mass,
            a: Vec3::new(0.0, 0.0, 0.0),
            b: Vec3::new(reach, 0.1, -0.05),
        }],
        DEFAULT_GRAVITY,
    )
    .unwrap()
}

/// First lift on a 1e-4 grid whose oracle clearance over SD edge 0 is positive.
pub fn grid_lift(m: &MassModel, config: &Configuration, beta: f64) -> Option<f64> {
    let om = oracle_masses(m);
    let cfg = to_cfg(config);
    (0..=10_000)
        .map(|i| i as f64 * 1e-4)
        .find(|&t| oracle::clearance(&dims(), &om, &[t], &cfg, 0, beta) > 1e-12)
}
