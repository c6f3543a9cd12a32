//! The triangular prism whose faces generate the planar footprints.

use nalgebra::{Matrix3, Vector3};

use crate::geometry::Vec2;
use crate::robot::{canonical_edge, canonical_footprint, EdgeLabel, RobotGeometry, StableState};

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct FaceEdge {
    pub label: EdgeLabel,
    /// Body vertex indices, in the footprint's counterclockwise order.
    pub vertices: (usize, usize),
    /// Face on the other side of this edge.
    pub neighbor: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub state: StableState,
    /// Outward unit normal, body frame.
    pub normal: Vec3,
    /// Distance from the body centroid to the face plane.
    pub offset: f64,
    /// Body → rest frame rotation: the rest frame has this face on `z = 0`,
    /// the body above it and the canonical footprint in its `xy` plane.
    pub rest: Matrix3<f64>,
    pub edges: Vec<FaceEdge>,
}

impl Face {
    pub fn to_rest(&self, p: &Vec3) -> Vec3 {
        self.rest * p + Vec3::new(0.0, 0.0, self.offset)
    }

    pub fn edge(&self, label: EdgeLabel) -> Option<&FaceEdge> {
        self.edges.iter().find(|e| e.label == label)
    }
}

/// Body frame: centroid at the origin, prism axis along `x` with the head-up
/// end face at `x = +w/2`, one rectangular face flat on `z = -r_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactSolid {
    tri_side: f64,
    length: f64,
    vertices: Vec<Vec3>,
    faces: Vec<Face>,
}

impl ContactSolid {
    pub fn new(geom: &RobotGeometry) -> Self {
        let s = geom.tri_side();
        let w = geom.rect_width();
        let r = geom.tri_circumradius();
        let cross: Vec<(f64, f64)> = (0..3)
            .map(|k| {
                let phi = std::f64::consts::FRAC_PI_2 + k as f64 * std::f64::consts::TAU / 3.0;
                (r * phi.cos(), r * phi.sin())
            })
            .collect();
        let mut vertices = Vec::with_capacity(6);
        for x in [w / 2.0, -w / 2.0] {
            for &(y, z) in &cross {
                vertices.push(Vec3::new(x, y, z));
            }
        }

        // (state, body vertex indices, outward normal, direction mapped to rest +x)
        let mut specs: Vec<(StableState, Vec<usize>, Vec3, Vec3)> = vec![
            (StableState::Hu, vec![0, 1, 2], Vec3::x(), Vec3::new(0.0, cross[0].0, cross[0].1).normalize()),
            (StableState::Hd, vec![3, 4, 5], -Vec3::x(), Vec3::new(0.0, cross[0].0, cross[0].1).normalize()),
        ];
        // first rectangle is the one lying on z = -r_in
        for k in [1usize, 2, 0] {
            let k2 = (k + 1) % 3;
            let mid = Vec3::new(0.0, (cross[k].0 + cross[k2].0) / 2.0, (cross[k].1 + cross[k2].1) / 2.0);
            specs.push((StableState::Sd, vec![k, k2, 3 + k2, 3 + k], mid.normalize(), Vec3::x()));
        }

        let mut faces: Vec<Face> = specs
            .iter()
            .map(|(state, idx, normal, xdir)| {
                let offset = vertices[idx[0]].dot(normal);
                let z = -normal;
                let x = *xdir;
                let y = z.cross(&x);
                let rest = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
                let mut face = Face {
                    state: *state,
                    normal: *normal,
                    offset,
                    rest,
                    edges: Vec::new(),
                };
                face.edges = match_edges(geom, &face, idx, &vertices);
                face
            })
            .collect();

        let vertex_sets: Vec<Vec<usize>> = specs.iter().map(|(_, idx, _, _)| idx.clone()).collect();
        for (fi, face) in faces.iter_mut().enumerate() {
            for e in &mut face.edges {
                e.neighbor = vertex_sets
                    .iter()
                    .enumerate()
                    .find(|(gi, set)| *gi != fi && set.contains(&e.vertices.0) && set.contains(&e.vertices.1))
                    .map(|(gi, _)| gi)
                    .expect("every prism edge is shared by two faces");
            }
        }

        Self {
            tri_side: s,
            length: w,
            vertices,
            faces,
        }
    }

    pub fn tri_side(&self) -> f64 {
        self.tri_side
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, i: usize) -> &Face {
        &self.faces[i]
    }

    /// Face used when only a planar configuration (no face identity) is known.
    pub fn default_face(&self, state: StableState) -> usize {
        match state {
            StableState::Hu => 0,
            StableState::Hd => 1,
            StableState::Sd => 2,
        }
    }

    pub fn faces_of(&self, state: StableState) -> impl Iterator<Item = usize> + '_ {
        self.faces
            .iter()
            .enumerate()
            .filter(move |(_, f)| f.state == state)
            .map(|(i, _)| i)
    }

    /// True iff `p` is inside the closed prism.
    pub fn contains(&self, p: &Vec3) -> bool {
        self.faces.iter().all(|f| f.normal.dot(p) <= f.offset + 1e-12)
    }

    /// Rotation (radians) that carries face `from` onto the ground when
    /// tipping over their shared edge.
    pub fn tip_angle(&self, from: usize, to: usize) -> f64 {
        let c = self.faces[from].normal.dot(&self.faces[to].normal).clamp(-1.0, 1.0);
        c.acos()
    }
}

fn match_edges(geom: &RobotGeometry, face: &Face, idx: &[usize], vertices: &[Vec3]) -> Vec<FaceEdge> {
    let rest_xy: Vec<(usize, Vec2)> = idx
        .iter()
        .map(|&i| {
            let p = face.to_rest(&vertices[i]);
            debug_assert!(p.z.abs() < 1e-12);
            (i, Vec2::new(p.x, p.y))
        })
        .collect();
    let find = |q: Vec2| {
        rest_xy
            .iter()
            .find(|(_, p)| p.distance(q) < 1e-9)
            .map(|(i, _)| *i)
            .expect("face vertices project onto the canonical footprint")
    };
    debug_assert_eq!(canonical_footprint(geom, face.state).len(), idx.len());
    face.state
        .edges()
        .iter()
        .map(|&label| {
            let (q0, q1) = canonical_edge(geom, face.state, label).expect("label valid for face state");
            FaceEdge {
                label,
                vertices: (find(q0), find(q1)),
                neighbor: usize::MAX,
            }
        })
        .collect()
}
