//! Footprints, revolves and collision tests written from scratch in plain
//! tuples, for cross-checking the geometry kernel and planners.

use std::f64::consts::{PI, TAU};

pub type P = (f64, f64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum St {
    Hu,
    Hd,
    Sd,
}

/// Edge labels by their polygon position: triangles use `0..3` for the edge
/// opposite vertex k; rectangles use 0 = head-up end, 1 = long A,
/// 2 = head-down end, 3 = long B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge(pub St, pub usize);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cfg {
    pub st: St,
    pub c: P,
    pub a: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Dims {
    pub s: f64,
    pub w: f64,
}

impl Dims {
    pub fn from_ell(ell: f64, leg: f64) -> Self {
        let s = ell + leg * (8.0f64 / 3.0).sqrt();
        Self { s, w: s * 3.0f64.sqrt() / 2.0 }
    }
    pub fn r_in(&self) -> f64 {
        self.s / (2.0 * 3.0f64.sqrt())
    }
}

fn rot(p: P, a: f64) -> P {
    let (c, s) = (a.cos(), a.sin());
    (c * p.0 - s * p.1, s * p.0 + c * p.1)
}

pub fn canonical(d: &Dims, st: St) -> Vec<P> {
    match st {
        St::Hu | St::Hd => {
            let r = d.s / 3.0f64.sqrt();
            (0..3).map(|k| rot((r, 0.0), k as f64 * TAU / 3.0)).collect()
        }
        St::Sd => vec![
            (d.w / 2.0, -d.s / 2.0),
            (d.w / 2.0, d.s / 2.0),
            (-d.w / 2.0, d.s / 2.0),
            (-d.w / 2.0, -d.s / 2.0),
        ],
    }
}

pub fn footprint(d: &Dims, c: &Cfg) -> Vec<P> {
    canonical(d, c.st)
        .into_iter()
        .map(|p| {
            let q = rot(p, c.a);
            (q.0 + c.c.0, q.1 + c.c.1)
        })
        .collect()
}

/// Vertex indices `(i, j)` of an edge, counterclockwise.
pub fn edge_vertices(e: usize, st: St) -> (usize, usize) {
    match st {
        St::Hu | St::Hd => ((e + 1) % 3, (e + 2) % 3),
        St::Sd => (e, (e + 1) % 4),
    }
}

pub fn edge_points(d: &Dims, c: &Cfg, e: usize) -> (P, P) {
    let f = footprint(d, c);
    let (i, j) = edge_vertices(e, c.st);
    (f[i], f[j])
}

/// Target state and arrival edge of a tip, or `None` if forbidden.
pub fn transition(st: St, e: usize, allow_sd_sd: bool) -> Option<(St, usize)> {
    match (st, e) {
        (St::Hu, 0..=2) => Some((St::Sd, 0)),
        (St::Hd, 0..=2) => Some((St::Sd, 2)),
        (St::Sd, 0) => Some((St::Hu, 0)),
        (St::Sd, 2) => Some((St::Hd, 0)),
        (St::Sd, 1) if allow_sd_sd => Some((St::Sd, 3)),
        (St::Sd, 3) if allow_sd_sd => Some((St::Sd, 1)),
        _ => None,
    }
}

pub fn n_edges(st: St) -> usize {
    if st == St::Sd {
        4
    } else {
        3
    }
}

/// Lays the arrival edge onto the pivot edge with its endpoints swapped.
pub fn tip(d: &Dims, c: &Cfg, e: usize, allow_sd_sd: bool) -> Option<Cfg> {
    let (to, arr) = transition(c.st, e, allow_sd_sd)?;
    let (p0, p1) = edge_points(d, c, e);
    let can = canonical(d, to);
    let (i, j) = edge_vertices(arr, to);
    let (q0, q1) = (can[i], can[j]);
    let theta = (p0.1 - p1.1).atan2(p0.0 - p1.0) - (q1.1 - q0.1).atan2(q1.0 - q0.0);
    let rq0 = rot(q0, theta);
    Some(Cfg {
        st: to,
        c: (p1.0 - rq0.0, p1.1 - rq0.1),
        a: theta,
    })
}

pub fn dist(a: P, b: P) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Angle difference reduced to `[0, period/2]`.
pub fn angle_gap(a: f64, b: f64, period: f64) -> f64 {
    let x = (a - b).rem_euclid(period);
    x.min(period - x)
}

pub fn sym_period(st: St) -> f64 {
    if st == St::Sd {
        TAU
    } else {
        TAU / 3.0
    }
}

pub fn same_pose(a: &Cfg, b: &Cfg, tol: f64) -> bool {
    a.st == b.st && dist(a.c, b.c) <= tol && angle_gap(a.a, b.a, sym_period(a.st)) <= tol
}

fn project(poly: &[P], axis: P) -> (f64, f64) {
    poly.iter()
        .map(|p| p.0 * axis.0 + p.1 * axis.1)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

/// Closed convex polygons overlap or touch.
pub fn overlap(a: &[P], b: &[P]) -> bool {
    for poly in [a, b] {
        for i in 0..poly.len() {
            let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
            let axis = (q.1 - p.1, p.0 - q.0);
            let (a0, a1) = project(a, axis);
            let (b0, b1) = project(b, axis);
            if a1 < b0 - 1e-12 || b1 < a0 - 1e-12 {
                return false;
            }
        }
    }
    true
}

pub fn inside_box(poly: &[P], lo: P, hi: P) -> bool {
    poly.iter()
        .all(|p| p.0 >= lo.0 - 1e-12 && p.0 <= hi.0 + 1e-12 && p.1 >= lo.1 - 1e-12 && p.1 <= hi.1 + 1e-12)
}

pub fn wrap(a: f64) -> f64 {
    let x = (a + PI).rem_euclid(TAU) - PI;
    if x <= -PI {
        x + TAU
    } else {
        x
    }
}
