//! Planar geometry kernel: vectors, poses, segments and convex polygons.
//!
//! Everything here is an immutable value type. Predicates use the slack in
//! [`crate::tolerances::GEOM_EPS`]; boundary contact always counts as contact.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tolerances::{GEOM_EPS, MIN_SEGMENT_LEN};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("degenerate segment (length {0:e})")]
    DegenerateSegment(f64),
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("repeated vertex at index {0}")]
    RepeatedVertex(usize),
    #[error("polygon is not strictly convex at vertex {0}")]
    NotConvex(usize),
    #[error("polygon is clockwise")]
    Clockwise,
    #[error("empty or inverted bounds")]
    InvertedBounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Constructor for untrusted input; rejects NaN and infinities.
    pub fn checked(x: f64, y: f64) -> Result<Self, GeometryError> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(GeometryError::NonFinite)
        }
    }

    #[inline]
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, s)
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    #[inline]
    pub fn rotated(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Maps any angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Smallest absolute difference between two angles modulo `period`.
pub fn angle_distance_mod(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Planar rigid pose. `theta` is kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2 {
    pub position: Vec2,
    theta: f64,
}

impl Pose2 {
    pub const IDENTITY: Pose2 = Pose2 {
        position: Vec2::ZERO,
        theta: 0.0,
    };

    pub fn new(position: Vec2, theta: f64) -> Self {
        Self {
            position,
            theta: normalize_angle(theta),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Local (body) point to world.
    #[inline]
    pub fn apply(&self, p: Vec2) -> Vec2 {
        p.rotated(self.theta) + self.position
    }

    /// World point to local (body) frame.
    #[inline]
    pub fn apply_inverse(&self, p: Vec2) -> Vec2 {
        (p - self.position).rotated(-self.theta)
    }

    pub fn compose(&self, other: &Pose2) -> Pose2 {
        Pose2::new(self.apply(other.position), self.theta + other.theta)
    }

    /// The unique proper rigid motion taking `from_a → to_a` and `from_b → to_b`.
    ///
    /// Both pairs must have (numerically) equal length. The rotation is taken
    /// from the chord directions and the translation from the chord midpoints,
    /// which splits any residual length mismatch evenly between the ends.
    pub fn aligning(from_a: Vec2, from_b: Vec2, to_a: Vec2, to_b: Vec2) -> Pose2 {
        let theta = (to_b - to_a).angle() - (from_b - from_a).angle();
        let from_mid = (from_a + from_b) * 0.5;
        let to_mid = (to_a + to_b) * 0.5;
        let position = to_mid - from_mid.rotated(theta);
        Pose2::new(position, theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    a: Vec2,
    b: Vec2,
}

impl Segment {
    pub fn new(a: Vec2, b: Vec2) -> Result<Self, GeometryError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        let len = a.distance(b);
        if len <= MIN_SEGMENT_LEN {
            return Err(GeometryError::DegenerateSegment(len));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> Vec2 {
        self.a
    }

    pub fn b(&self) -> Vec2 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    pub fn midpoint(&self) -> Vec2 {
        (self.a + self.b) * 0.5
    }

    pub fn direction(&self) -> Vec2 {
        (self.b - self.a).normalized()
    }

    /// Signed distance from `p` to the infinite line; positive on the left of `a → b`.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        self.direction().cross(p - self.a)
    }
}

/// Mirror image of `p` across the infinite line through `line`.
pub fn reflect_across_line(p: Vec2, line: &Segment) -> Vec2 {
    let d = line.direction();
    let rel = p - line.a;
    let along = d * rel.dot(d);
    line.a + along * 2.0 - rel
}

/// Strictly convex, counterclockwise polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Vec2>,
}

impl ConvexPolygon {
    /// Validates an already counterclockwise vertex ring.
    pub fn new(vertices: Vec<Vec2>) -> Result<Self, GeometryError> {
        validate_ring(&vertices)?;
        if signed_area(&vertices) <= 0.0 {
            return Err(GeometryError::Clockwise);
        }
        Ok(Self { vertices })
    }

    /// Accepts either orientation, reversing clockwise rings.
    pub fn from_ring(mut vertices: Vec<Vec2>) -> Result<Self, GeometryError> {
        validate_ring(&vertices)?;
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        Ok(Self { vertices })
    }

    /// Skips validation; for vertices produced by rigid motions of a valid polygon.
    pub(crate) fn from_trusted(vertices: Vec<Vec2>) -> Self {
        debug_assert!(vertices.len() >= 3);
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1` (cyclic).
    pub fn edge(&self, i: usize) -> (Vec2, Vec2) {
        let n = self.vertices.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        (0..self.vertices.len()).map(move |i| self.edge(i))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Area centroid.
    pub fn centroid(&self) -> Vec2 {
        let n = self.vertices.len();
        let o = self.vertices[0];
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let p = self.vertices[i] - o;
            let q = self.vertices[(i + 1) % n] - o;
            let c = p.cross(q);
            a2 += c;
            cx += (p.x + q.x) * c;
            cy += (p.y + q.y) * c;
        }
        o + Vec2::new(cx / (3.0 * a2), cy / (3.0 * a2))
    }

    pub fn transformed(&self, pose: &Pose2) -> ConvexPolygon {
        ConvexPolygon::from_trusted(self.vertices.iter().map(|&v| pose.apply(v)).collect())
    }

    /// Moves every edge inward by `d` (only valid for `d` well below the inradius).
    pub fn shrunk(&self, d: f64) -> ConvexPolygon {
        let n = self.vertices.len();
        let lines: Vec<(Vec2, Vec2)> = (0..n)
            .map(|i| {
                let (a, b) = self.edge(i);
                let inward = (b - a).normalized().perp();
                (a + inward * d, b - a)
            })
            .collect();
        let verts = (0..n)
            .map(|i| {
                let (p1, d1) = lines[(i + n - 1) % n];
                let (p2, d2) = lines[i];
                let t = (p2 - p1).cross(d2) / d1.cross(d2);
                p1 + d1 * t
            })
            .collect();
        ConvexPolygon::from_trusted(verts)
    }

    fn project(&self, axis: Vec2) -> (f64, f64) {
        self.vertices
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                let p = v.dot(axis);
                (lo.min(p), hi.max(p))
            })
    }

    fn edge_normals(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.edges().map(|(a, b)| (b - a).normalized().perp())
    }
}

fn signed_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>() * 0.5
}

fn validate_ring(v: &[Vec2]) -> Result<(), GeometryError> {
    let n = v.len();
    if n < 3 {
        return Err(GeometryError::TooFewVertices(n));
    }
    if v.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if v[i].distance(v[j]) <= MIN_SEGMENT_LEN {
                return Err(GeometryError::RepeatedVertex(j));
            }
        }
    }
    let sign = signed_area(v).signum();
    for i in 0..n {
        let a = v[(i + n - 1) % n];
        let b = v[i];
        let c = v[(i + 1) % n];
        let e1 = b - a;
        let e2 = c - b;
        let turn = e1.cross(e2) * sign;
        if turn <= GEOM_EPS * e1.norm() * e2.norm() {
            return Err(GeometryError::NotConvex(i));
        }
    }
    // a star polygon turns the same way at every vertex but winds more than once
    let winding: f64 = (0..n)
        .map(|i| {
            let e1 = v[i] - v[(i + n - 1) % n];
            let e2 = v[(i + 1) % n] - v[i];
            e1.cross(e2).atan2(e1.dot(e2))
        })
        .sum();
    if (winding.abs() - TAU).abs() > 1e-6 {
        return Err(GeometryError::NotConvex(0));
    }
    Ok(())
}

/// True iff the closed regions of `a` and `b` share at least one point.
pub fn polygons_intersect(a: &ConvexPolygon, b: &ConvexPolygon) -> bool {
    separating_axis(a, b).is_none()
}

/// An edge normal of `a` or `b` along which their projections are disjoint
/// by more than [`GEOM_EPS`], if any.
pub fn separating_axis(a: &ConvexPolygon, b: &ConvexPolygon) -> Option<Vec2> {
    a.edge_normals().chain(b.edge_normals()).find(|&axis| {
        let (amin, amax) = a.project(axis);
        let (bmin, bmax) = b.project(axis);
        amax < bmin - GEOM_EPS || bmax < amin - GEOM_EPS
    })
}

/// True iff `p` lies inside `poly` or on its boundary.
pub fn point_in_polygon(p: Vec2, poly: &ConvexPolygon) -> bool {
    poly.edges()
        .all(|(a, b)| (b - a).cross(p - a) >= -GEOM_EPS * a.distance(b))
}

/// Axis-aligned rectangle, used for arena bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec2,
    pub max: Vec2,
}

impl Aabb {
    pub fn new(min: Vec2, max: Vec2) -> Result<Self, GeometryError> {
        if !min.is_finite() || !max.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if !(min.x < max.x && min.y < max.y) {
            return Err(GeometryError::InvertedBounds);
        }
        Ok(Self { min, max })
    }

    pub fn contains_point(&self, p: Vec2) -> bool {
        p.x >= self.min.x - GEOM_EPS
            && p.x <= self.max.x + GEOM_EPS
            && p.y >= self.min.y - GEOM_EPS
            && p.y <= self.max.y + GEOM_EPS
    }

    pub fn contains_polygon(&self, poly: &ConvexPolygon) -> bool {
        poly.vertices().iter().all(|&v| self.contains_point(v))
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}
