//! Landing-state reference: face solid angles and an independent settle rule.

use std::f64::consts::PI;

use super::kin::{Dims, St};

pub type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

pub struct Prism {
    pub verts: Vec<V3>,
    /// (state, vertex ring, outward normal, plane offset)
    pub faces: Vec<(St, Vec<usize>, V3, f64)>,
}

impl Prism {
    pub fn new(d: &Dims) -> Self {
        let r = d.s / 3.0f64.sqrt();
        let ang = [90.0f64, 210.0, 330.0].map(|a| a.to_radians());
        let mut verts = Vec::new();
        for x in [d.w / 2.0, -d.w / 2.0] {
            for a in ang {
                verts.push([x, r * a.cos(), r * a.sin()]);
            }
        }
        let mut faces = vec![
            (St::Hu, vec![0, 1, 2], [1.0, 0.0, 0.0], d.w / 2.0),
            (St::Hd, vec![3, 5, 4], [-1.0, 0.0, 0.0], d.w / 2.0),
        ];
        for k in 0..3 {
            let k2 = (k + 1) % 3;
            let mid = (ang[k] + ang[k2]) / 2.0 + if k == 2 { PI } else { 0.0 };
            faces.push((St::Sd, vec![k, k2, k2 + 3, k + 3], [0.0, mid.cos(), mid.sin()], d.r_in()));
        }
        Self { verts, faces }
    }

    /// Face first crossed by the ray `o + λ u`.
    pub fn exit_face(&self, o: V3, u: V3) -> usize {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, (_, _, n, h)) in self.faces.iter().enumerate() {
            let nu = dot(*n, u);
            if nu > 0.0 {
                let lam = (h - dot(*n, o)) / nu;
                if lam < best.1 {
                    best = (i, lam);
                }
            }
        }
        best.0
    }

    /// Edge of face `f` the normal projection of `p` lies beyond, worst first;
    /// `None` when it lies inside. Returns the neighbor sharing that edge.
    fn violated(&self, f: usize, p: V3) -> Option<usize> {
        let (_, ring, n, _) = &self.faces[f];
        let mut worst: Option<(usize, f64)> = None;
        for i in 0..ring.len() {
            let (a, b) = (self.verts[ring[i]], self.verts[ring[(i + 1) % ring.len()]]);
            // inward direction within the face plane, for either ring orientation
            let e = sub(b, a);
            let mut inward = cross(*n, e);
            let centre = ring.iter().fold([0.0; 3], |acc, &v| {
                [0, 1, 2].map(|k| acc[k] + self.verts[v][k] / ring.len() as f64)
            });
            if dot(inward, sub(centre, a)) < 0.0 {
                inward = inward.map(|x| -x);
            }
            let out = -dot(inward, sub(p, a)) / norm(inward);
            if out > 0.0 && worst.is_none_or(|(_, w)| out > w) {
                let nb = (0..self.faces.len())
                    .find(|&g| g != f && self.faces[g].1.contains(&ring[i]) && self.faces[g].1.contains(&ring[(i + 1) % ring.len()]))
                    .unwrap();
                worst = Some((nb, out));
            }
        }
        worst.map(|(g, _)| g)
    }

    /// Resting face for center of mass `com` starting with gravity along `down`.
    pub fn settle(&self, com: V3, down: V3) -> usize {
        let mut f = self.exit_face(com, down);
        for _ in 0..50 {
            match self.violated(f, com) {
                None => return f,
                Some(g) => f = g,
            }
        }
        panic!("settle oracle did not terminate");
    }
}

/// Solid angle of triangle `abc` seen from the origin.
pub fn triangle_solid_angle(a: V3, b: V3, c: V3) -> f64 {
    let (la, lb, lc) = (norm(a), norm(b), norm(c));
    let num = dot(a, cross(b, c)).abs();
    let den = la * lb * lc + dot(a, b) * lc + dot(a, c) * lb + dot(b, c) * la;
    2.0 * num.atan2(den)
}

/// Per-state probabilities when the COM is the centroid: face solid angles over 4π.
pub fn centroid_probabilities(d: &Dims) -> [f64; 3] {
    let p = Prism::new(d);
    let mut out = [0.0; 3];
    for (st, ring, _, _) in &p.faces {
        let mut omega = 0.0;
        for i in 1..ring.len() - 1 {
            omega += triangle_solid_angle(p.verts[ring[0]], p.verts[ring[i]], p.verts[ring[i + 1]]);
        }
        out[state_index(*st)] += omega / (4.0 * PI);
    }
    out
}

pub fn state_index(st: St) -> usize {
    match st {
        St::Hu => 0,
        St::Hd => 1,
        St::Sd => 2,
    }
}

/// Fibonacci-sphere quadrature of the settle basins seen from `com`.
pub fn quadrature(d: &Dims, com: V3, rays: usize) -> [f64; 3] {
    let p = Prism::new(d);
    let golden = PI * (3.0 - 5.0f64.sqrt());
    let mut counts = [0usize; 3];
    for i in 0..rays {
        let z = 1.0 - (2.0 * i as f64 + 1.0) / rays as f64;
        let r = (1.0 - z * z).sqrt();
        let th = golden * i as f64;
        let u = [r * th.cos(), r * th.sin(), z];
        let f = p.settle(com, u);
        counts[state_index(p.faces[f].0)] += 1;
    }
    counts.map(|c| c as f64 / rays as f64)
}
