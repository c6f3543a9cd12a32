//! Center of mass, half-plane tip test and flip energy recomputed by hand.

use std::f64::consts::{FRAC_PI_2, PI};

use super::kin::{edge_points, Cfg, Dims, St};

pub type V3 = [f64; 3];

pub struct Leg {
    pub mass: f64,
    pub a: V3,
    pub b: V3,
}

pub struct Masses {
    pub body: f64,
    pub legs: Vec<Leg>,
    pub g: f64,
}

fn mat_vec(m: &[[f64; 3]; 3], v: V3) -> V3 {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Body → rest rotation and face height for the default face of each state.
/// Body frame: prism axis along x, head-up end at +x, one long face at z = -r_in.
pub fn rest_frame(d: &Dims, st: St) -> ([[f64; 3]; 3], f64) {
    match st {
        St::Hu => ([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]], d.w / 2.0),
        St::Hd => ([[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]], d.w / 2.0),
        St::Sd => ([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], d.r_in()),
    }
}

pub fn body_com(m: &Masses, t: &[f64]) -> V3 {
    let total = m.body + m.legs.iter().map(|l| l.mass).sum::<f64>();
    let mut acc = [0.0; 3];
    for (l, &ti) in m.legs.iter().zip(t) {
        for k in 0..3 {
            acc[k] += l.mass * (l.a[k] + ti * (l.b[k] - l.a[k]));
        }
    }
    acc.map(|x| x / total)
}

/// Body point in plane coordinates for a configuration on its default face.
pub fn to_plane(d: &Dims, c: &Cfg, p: V3) -> V3 {
    let (r, h) = rest_frame(d, c.st);
    let q = mat_vec(&r, p);
    let q = [q[0], q[1], q[2] + h];
    let (ca, sa) = (c.a.cos(), c.a.sin());
    [ca * q[0] - sa * q[1] + c.c.0, sa * q[0] + ca * q[1] + c.c.1, q[2]]
}

pub fn up(beta: f64) -> V3 {
    [beta.sin(), 0.0, beta.cos()]
}

/// Distance the projected COM lies beyond the edge line (negative: inside).
pub fn clearance(d: &Dims, m: &Masses, t: &[f64], c: &Cfg, e: usize, beta: f64) -> f64 {
    let p = to_plane(d, c, body_com(m, t));
    let g = (p[0] - p[2] * beta.tan(), p[1]);
    let (a, b) = edge_points(d, c, e);
    let (ex, ey) = (b.0 - a.0, b.1 - a.1);
    // footprints are counterclockwise: inside is on the left
    let left = (ex * (g.1 - a.1) - ey * (g.0 - a.0)) / (ex * ex + ey * ey).sqrt();
    -left
}

pub fn tip_angle(st: St, e: usize) -> f64 {
    match (st, e) {
        (St::Sd, 1) | (St::Sd, 3) => 2.0 * PI / 3.0,
        _ => FRAC_PI_2,
    }
}

fn rotate_about(v: V3, k: V3, phi: f64) -> V3 {
    let (c, s) = (phi.cos(), phi.sin());
    let kxv = [k[1] * v[2] - k[2] * v[1], k[2] * v[0] - k[0] * v[2], k[0] * v[1] - k[1] * v[0]];
    let kv = dot(k, v);
    [0, 1, 2].map(|i| v[i] * c + kxv[i] * s + k[i] * kv * (1.0 - c))
}

/// Energy with the barrier found on a uniform grid of `step` radians.
pub fn flip_energy(d: &Dims, m: &Masses, t: &[f64], c: &Cfg, e: usize, beta: f64, step: f64) -> f64 {
    let u = up(beta);
    let total = m.body + m.legs.iter().map(|l| l.mass).sum::<f64>();
    let (r, _) = rest_frame(d, c.st);
    let (ca, sa) = (c.a.cos(), c.a.sin());
    let lift: f64 = m
        .legs
        .iter()
        .zip(t)
        .map(|(l, &ti)| {
            let dv = mat_vec(&r, [0, 1, 2].map(|k| ti * (l.b[k] - l.a[k])));
            let dw = [ca * dv[0] - sa * dv[1], sa * dv[0] + ca * dv[1], dv[2]];
            l.mass * m.g * dot(dw, u).max(0.0)
        })
        .sum();
    let com = to_plane(d, c, body_com(m, t));
    let (a, b) = edge_points(d, c, e);
    let p0 = [a.0, a.1, 0.0];
    let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
    let k = [(b.0 - a.0) / len, (b.1 - a.1) / len, 0.0];
    let rel = sub(com, p0);
    let pot = |phi: f64| {
        let q = rotate_about(rel, k, phi);
        total * m.g * dot([q[0] + p0[0], q[1] + p0[1], q[2]], u)
    };
    let end = tip_angle(c.st, e);
    let n = (end / step).round() as usize;
    let u0 = pot(0.0);
    let peak = (0..=n).map(|j| pot(end * j as f64 / n as f64)).fold(f64::NEG_INFINITY, f64::max);
    lift + (peak - u0).max(0.0)
}
