//! Quasi-static analysis: center of mass, tip feasibility, flip energy,
//! lift optimization, climbable slopes and landing-state statistics.
//!
//! Slopes are handled in the plane frame: `X` points uphill along the
//! plane, `Z` is the plane normal, and gravity is `(-sin β, 0, -cos β)`.
//! Planar configurations live in the plane's `XY` coordinates.

mod energy;
mod landing;
mod slopes;
mod solid;

pub use energy::LiftSolution;
pub use landing::{sample_orientation, LandingCounts, LandingEstimate};
pub use slopes::{Gait, SlopeResult};
pub use solid::{ContactSolid, Face, FaceEdge, Vec3};

use nalgebra::{Matrix3, Rotation3};
use thiserror::Error;

use crate::geometry::{Segment, Vec2};
use crate::robot::{
    canonical_edge, pivot_segment, place_across, Configuration, EdgeLabel, RobotError, RobotGeometry, StableState,
    TransitionTable,
};
use crate::tolerances::{MIN_SEGMENT_LEN, TIP_MARGIN};

pub const DEFAULT_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StaticsError {
    #[error("transition {state} over {edge} is not allowed")]
    DisallowedTransition { state: StableState, edge: EdgeLabel },
    #[error("edge {edge} does not exist in state {state}")]
    InvalidEdge { state: StableState, edge: EdgeLabel },
    #[error("center of mass does not clear the pivot edge for this lift")]
    InfeasibleLift,
    #[error("no lift in the unit cube tips the robot over this edge")]
    NoFeasibleLift,
    #[error("invalid mass model: {0}")]
    InvalidMassModel(String),
    #[error("invalid lift state: {0}")]
    InvalidLift(String),
    #[error("slope must be finite and in [0, pi/2), got {0}")]
    InvalidSlope(f64),
    #[error("face {face} is a {face_state} face, stance says {state}")]
    FaceStateMismatch {
        face: usize,
        face_state: StableState,
        state: StableState,
    },
    #[error("transition table sends {state} over {edge} to {table}, the solid lands on {solid}")]
    InconsistentTable {
        state: StableState,
        edge: EdgeLabel,
        table: StableState,
        solid: StableState,
    },
    #[error("center of mass lies outside the contact solid")]
    ComOutsideSolid,
    #[error("settling did not terminate within {0} rolls")]
    SettleDiverged(usize),
    #[error("sample count must be at least 1")]
    ZeroSamples,
}

impl From<RobotError> for StaticsError {
    fn from(e: RobotError) -> Self {
        match e {
            RobotError::DisallowedTransition { state, edge } => StaticsError::DisallowedTransition { state, edge },
            RobotError::InvalidEdge { state, edge } => StaticsError::InvalidEdge { state, edge },
            other => StaticsError::InvalidMassModel(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovableMass {
    pub mass: f64,
    /// Lift segment endpoints `A` (t = 0) and `B` (t = 1), body frame.
    pub a: Vec3,
    pub b: Vec3,
}

impl MovableMass {
    pub fn at(&self, t: f64) -> Vec3 {
        self.a + (self.b - self.a) * t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassModel {
    body_mass: f64,
    movable: Vec<MovableMass>,
    gravity: f64,
}

impl MassModel {
    pub fn new(body_mass: f64, movable: Vec<MovableMass>, gravity: f64) -> Result<Self, StaticsError> {
        let bad = |m: String| Err(StaticsError::InvalidMassModel(m));
        if !(body_mass.is_finite() && body_mass > 0.0) {
            return bad(format!("body mass must be positive, got {body_mass}"));
        }
        if !(gravity.is_finite() && gravity > 0.0) {
            return bad(format!("gravity must be positive, got {gravity}"));
        }
        for (i, m) in movable.iter().enumerate() {
            if !(m.mass.is_finite() && m.mass >= 0.0) {
                return bad(format!("movable mass {i} must be non-negative, got {}", m.mass));
            }
            if !(m.a.iter().chain(m.b.iter()).all(|c| c.is_finite())) {
                return bad(format!("movable mass {i} has a non-finite segment"));
            }
            if (m.b - m.a).norm() < MIN_SEGMENT_LEN {
                return bad(format!("movable mass {i} has a degenerate lift segment"));
            }
        }
        Ok(Self {
            body_mass,
            movable,
            gravity,
        })
    }

    /// Four legs from the centroid along the directions of a regular
    /// tetrahedron, each ending `reach` from the centroid.
    pub fn tetrahedral(body_mass: f64, leg_mass: f64, reach: f64, gravity: f64) -> Result<Self, StaticsError> {
        let k = 1.0 / 3.0f64.sqrt();
        let movable = [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)]
            .iter()
            .map(|&(x, y, z)| MovableMass {
                mass: leg_mass,
                a: Vec3::zeros(),
                b: Vec3::new(x, y, z) * (k * reach),
            })
            .collect();
        Self::new(body_mass, movable, gravity)
    }

    /// Default model: 1 kg body, four 1 kg leg masses whose segments reach
    /// [`DEFAULT_REACH_SIDES`] triangle sides out of the centroid.
    pub fn default_for(geom: &RobotGeometry) -> Self {
        Self::tetrahedral(1.0, 1.0, DEFAULT_REACH_SIDES * geom.tri_side(), DEFAULT_GRAVITY)
            .expect("default mass model is valid")
    }

    pub fn body_mass(&self) -> f64 {
        self.body_mass
    }
    pub fn movable(&self) -> &[MovableMass] {
        &self.movable
    }
    pub fn gravity(&self) -> f64 {
        self.gravity
    }
    pub fn len(&self) -> usize {
        self.movable.len()
    }
    pub fn is_empty(&self) -> bool {
        self.movable.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.body_mass + self.movable.iter().map(|m| m.mass).sum::<f64>()
    }

    /// Every mass (body included) multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self, StaticsError> {
        let movable = self
            .movable
            .iter()
            .map(|m| MovableMass {
                mass: m.mass * k,
                ..m.clone()
            })
            .collect();
        Self::new(self.body_mass * k, movable, self.gravity)
    }

    /// Only the movable masses multiplied by `k`.
    pub fn with_movable_scaled(&self, k: f64) -> Result<Self, StaticsError> {
        let movable = self
            .movable
            .iter()
            .map(|m| MovableMass {
                mass: m.mass * k,
                ..m.clone()
            })
            .collect();
        Self::new(self.body_mass, movable, self.gravity)
    }

    /// Body-frame center of mass.
    pub fn com_body(&self, lift: &LiftState) -> Result<Vec3, StaticsError> {
        lift.check_len(self.movable.len())?;
        let mut moment = Vec3::zeros();
        for (m, &t) in self.movable.iter().zip(lift.t()) {
            moment += m.at(t) * m.mass;
        }
        Ok(moment / self.total_mass())
    }
}

/// Default leg reach, in triangle sides.
pub const DEFAULT_REACH_SIDES: f64 = 2.5;

#[derive(Debug, Clone, PartialEq)]
pub struct LiftState {
    t: Vec<f64>,
}

impl LiftState {
    pub fn new(t: Vec<f64>) -> Result<Self, StaticsError> {
        if let Some((i, v)) = t.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(StaticsError::InvalidLift(format!("t[{i}] = {v} is outside [0, 1]")));
        }
        Ok(Self { t })
    }

    pub fn zeros(n: usize) -> Self {
        Self { t: vec![0.0; n] }
    }

    pub fn uniform(n: usize, t: f64) -> Result<Self, StaticsError> {
        Self::new(vec![t; n])
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    fn check_len(&self, n: usize) -> Result<(), StaticsError> {
        if self.t.len() != n {
            return Err(StaticsError::InvalidLift(format!(
                "expected {n} lift fractions, got {}",
                self.t.len()
            )));
        }
        Ok(())
    }
}

/// A resting pose: which face is down, and where the footprint lies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stance {
    pub face: usize,
    pub config: Configuration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComReport {
    pub body: Vec3,
    /// Plane-frame position.
    pub plane: Vec3,
    /// Projection along gravity onto the ground plane.
    pub ground: Vec2,
}

pub(crate) fn check_slope(beta: f64) -> Result<(), StaticsError> {
    if beta.is_finite() && (0.0..std::f64::consts::FRAC_PI_2).contains(&beta) {
        Ok(())
    } else {
        Err(StaticsError::InvalidSlope(beta))
    }
}

/// Unit vector pointing up (against gravity) in the plane frame.
pub fn up_vector(beta: f64) -> Vec3 {
    Vec3::new(beta.sin(), 0.0, beta.cos())
}

/// Gravity-ray projection of `p` onto the plane `z = 0`.
pub fn ground_projection(p: &Vec3, beta: f64) -> Vec2 {
    Vec2::new(p.x - p.z * beta.tan(), p.y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticsModel {
    geom: RobotGeometry,
    solid: ContactSolid,
    masses: MassModel,
    table: TransitionTable,
}

impl StaticsModel {
    pub fn new(geom: RobotGeometry, masses: MassModel, table: TransitionTable) -> Self {
        let solid = ContactSolid::new(&geom);
        Self {
            geom,
            solid,
            masses,
            table,
        }
    }

    pub fn with_defaults(geom: RobotGeometry) -> Self {
        let masses = MassModel::default_for(&geom);
        Self::new(geom, masses, TransitionTable::default())
    }

    pub fn geometry(&self) -> &RobotGeometry {
        &self.geom
    }
    pub fn solid(&self) -> &ContactSolid {
        &self.solid
    }
    pub fn masses(&self) -> &MassModel {
        &self.masses
    }
    pub fn table(&self) -> &TransitionTable {
        &self.table
    }

    pub fn with_masses(&self, masses: MassModel) -> Self {
        Self {
            masses,
            ..self.clone()
        }
    }

    pub fn zero_lift(&self) -> LiftState {
        LiftState::zeros(self.masses.len())
    }

    /// Stance on the state's default face.
    pub fn stance(&self, config: Configuration) -> Stance {
        Stance {
            face: self.solid.default_face(config.state),
            config,
        }
    }

    fn check_stance(&self, stance: &Stance) -> Result<(), StaticsError> {
        let fs = self.solid.face(stance.face).state;
        if fs != stance.config.state {
            return Err(StaticsError::FaceStateMismatch {
                face: stance.face,
                face_state: fs,
                state: stance.config.state,
            });
        }
        Ok(())
    }

    /// Body → plane frame transform `p ↦ R p + o`.
    pub fn plane_transform(&self, stance: &Stance) -> Result<(Matrix3<f64>, Vec3), StaticsError> {
        self.check_stance(stance)?;
        let face = self.solid.face(stance.face);
        let rz = Rotation3::from_axis_angle(&Vec3::z_axis(), stance.config.alpha()).into_inner();
        let c = stance.config.centroid;
        let r = rz * face.rest;
        let o = rz * Vec3::new(0.0, 0.0, face.offset) + Vec3::new(c.x, c.y, 0.0);
        Ok((r, o))
    }

    pub fn com(&self, lift: &LiftState, stance: &Stance, beta: f64) -> Result<ComReport, StaticsError> {
        check_slope(beta)?;
        let body = self.masses.com_body(lift)?;
        let (r, o) = self.plane_transform(stance)?;
        let plane = r * body + o;
        Ok(ComReport {
            body,
            plane,
            ground: ground_projection(&plane, beta),
        })
    }

    fn pivot(&self, stance: &Stance, edge: EdgeLabel) -> Result<Segment, StaticsError> {
        if !edge.valid_for(stance.config.state) {
            return Err(StaticsError::InvalidEdge {
                state: stance.config.state,
                edge,
            });
        }
        Ok(pivot_segment(&self.geom, &stance.config, edge)?)
    }

    /// How far the projected COM lies beyond the edge line (negative: inside).
    pub fn edge_clearance(
        &self,
        lift: &LiftState,
        stance: &Stance,
        edge: EdgeLabel,
        beta: f64,
    ) -> Result<f64, StaticsError> {
        let seg = self.pivot(stance, edge)?;
        let com = self.com(lift, stance, beta)?;
        Ok(-seg.signed_distance(com.ground))
    }

    pub fn can_tip(&self, lift: &LiftState, stance: &Stance, edge: EdgeLabel, beta: f64) -> Result<bool, StaticsError> {
        self.table.lookup(stance.config.state, edge)?;
        Ok(self.edge_clearance(lift, stance, edge, beta)? > TIP_MARGIN)
    }

    /// Smallest inward distance from the projected COM to any footprint edge.
    pub fn stability_margin(&self, lift: &LiftState, stance: &Stance, beta: f64) -> Result<f64, StaticsError> {
        let mut margin = f64::INFINITY;
        for &e in stance.config.state.edges() {
            margin = margin.min(-self.edge_clearance(lift, stance, e, beta)?);
        }
        Ok(margin)
    }

    pub fn is_stable(&self, lift: &LiftState, stance: &Stance, beta: f64) -> Result<bool, StaticsError> {
        Ok(self.stability_margin(lift, stance, beta)? > TIP_MARGIN)
    }

    /// The stance after tipping over `edge`, tracking which face lands.
    pub fn tip(&self, stance: &Stance, edge: EdgeLabel) -> Result<Stance, StaticsError> {
        self.check_stance(stance)?;
        let state = stance.config.state;
        let t = self.table.lookup(state, edge)?;
        let face = self.solid.face(stance.face);
        let fe = face.edge(edge).ok_or(StaticsError::InvalidEdge { state, edge })?;
        let next = self.solid.face(fe.neighbor);
        if next.state != t.target {
            return Err(StaticsError::InconsistentTable {
                state,
                edge,
                table: t.target,
                solid: next.state,
            });
        }
        let arrival = next
            .edges
            .iter()
            .find(|e| e.vertices == (fe.vertices.1, fe.vertices.0))
            .expect("shared edge appears reversed on the neighbor face")
            .label;
        let config = place_across(&self.geom, &stance.config, edge, next.state, arrival)?;
        Ok(Stance {
            face: fe.neighbor,
            config,
        })
    }

    /// Rotation angle of a tip over `edge`.
    pub fn tip_angle(&self, stance: &Stance, edge: EdgeLabel) -> Result<f64, StaticsError> {
        self.check_stance(stance)?;
        let face = self.solid.face(stance.face);
        let fe = face.edge(edge).ok_or(StaticsError::InvalidEdge {
            state: stance.config.state,
            edge,
        })?;
        Ok(self.solid.tip_angle(stance.face, fe.neighbor))
    }

    /// Outward normal of `edge` in the plane frame.
    pub fn edge_normal(&self, config: &Configuration, edge: EdgeLabel) -> Result<Vec2, StaticsError> {
        let (a, b) = canonical_edge(&self.geom, config.state, edge)?;
        let d = (b - a).normalized().rotated(config.alpha());
        Ok(Vec2::new(d.y, -d.x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn model() -> StaticsModel {
        StaticsModel::with_defaults(RobotGeometry::new(0.8, 0.3, None, None).unwrap())
    }

    fn hu() -> Configuration {
        Configuration::new(Vec2::new(0.3, -0.2), StableState::Hu, 0.4)
    }

    #[test]
    fn zero_movable_mass_com_is_centroid() {
        let m = model();
        let mm = m.masses().with_movable_scaled(0.0).unwrap();
        let lift = LiftState::uniform(4, 1.0).unwrap();
        assert!(mm.com_body(&lift).unwrap().norm() < 1e-15);
    }

    #[test]
    fn lever_rule() {
        let mm = MassModel::new(
            2.0,
            vec![MovableMass {
                mass: 0.5,
                a: Vec3::new(0.1, 0.0, 0.0),
                b: Vec3::new(0.1, 0.4, 0.0),
            }],
            DEFAULT_GRAVITY,
        )
        .unwrap();
        let c0 = mm.com_body(&LiftState::zeros(1)).unwrap();
        let c1 = mm.com_body(&LiftState::uniform(1, 1.0).unwrap()).unwrap();
        assert!((c1 - c0 - Vec3::new(0.0, 0.4, 0.0) * (0.5 / 2.5)).norm() < 1e-15);
    }

    #[test]
    fn mass_model_validation() {
        assert!(MassModel::tetrahedral(0.0, 1.0, 1.0, 9.81).is_err());
        assert!(MassModel::tetrahedral(1.0, -1.0, 1.0, 9.81).is_err());
        assert!(MassModel::tetrahedral(1.0, 1.0, 0.0, 9.81).is_err());
        assert!(LiftState::new(vec![1.5]).is_err());
        let m = model();
        assert!(m.masses().com_body(&LiftState::zeros(3)).is_err());
    }

    #[test]
    fn rest_pose_is_stable_and_cannot_tip() {
        let m = model();
        let z = m.zero_lift();
        for s in [hu(), Configuration::new(Vec2::new(1.0, 2.0), StableState::Sd, -1.0)] {
            let st = m.stance(s);
            assert!(m.is_stable(&z, &st, 0.0).unwrap());
            for (e, _) in m.table().allowed_edges(s.state) {
                assert!(!m.can_tip(&z, &st, e, 0.0).unwrap());
            }
        }
    }

    #[test]
    fn disallowed_transition() {
        let m = model();
        let st = m.stance(Configuration::new(Vec2::new(0.0, 0.0), StableState::Sd, 0.0));
        assert!(matches!(
            m.can_tip(&m.zero_lift(), &st, EdgeLabel::LongA, 0.0),
            Err(StaticsError::DisallowedTransition { .. })
        ));
    }

    #[test]
    fn plane_transform_puts_face_on_ground() {
        let m = model();
        for (fi, f) in m.solid().faces().iter().enumerate() {
            let st = Stance {
                face: fi,
                config: Configuration::new(Vec2::new(0.5, 0.1), f.state, 1.1),
            };
            let (r, o) = m.plane_transform(&st).unwrap();
            assert!((o.z - f.offset).abs() < 1e-12);
            let lowest = m.solid().vertices().iter().map(|v| (r * v + o).z).fold(f64::INFINITY, f64::min);
            assert!(lowest.abs() < 1e-12);
        }
    }

    #[test]
    fn tip_matches_a_rigid_rotation() {
        let m = StaticsModel::new(
            RobotGeometry::new(0.8, 0.3, None, None).unwrap(),
            MassModel::default_for(&RobotGeometry::new(0.8, 0.3, None, None).unwrap()),
            TransitionTable::prism(true),
        );
        let mut st = m.stance(hu());
        let seq = [
            EdgeLabel::Tri(1),
            EdgeLabel::LongA,
            EdgeLabel::LongB,
            EdgeLabel::HdEnd,
            EdgeLabel::Tri(2),
            EdgeLabel::HuEnd,
            EdgeLabel::Tri(0),
        ];
        for &e in &seq {
            let (r, o) = m.plane_transform(&st).unwrap();
            let seg = pivot_segment(m.geometry(), &st.config, e).unwrap();
            let p0 = Vec3::new(seg.a().x, seg.a().y, 0.0);
            let d = seg.b() - seg.a();
            let axis = nalgebra::Unit::new_normalize(Vec3::new(d.x, d.y, 0.0));
            let phi = m.tip_angle(&st, e).unwrap();
            let rot = Rotation3::from_axis_angle(&axis, phi).into_inner();
            let next = m.tip(&st, e).unwrap();
            let (r2, o2) = m.plane_transform(&next).unwrap();
            for v in m.solid().vertices() {
                let rolled = rot * (r * v + o - p0) + p0;
                assert!((rolled - (r2 * v + o2)).norm() < 1e-9, "edge {e}");
            }
            st = next;
        }
    }

    #[test]
    fn slope_projection() {
        let p = Vec3::new(1.0, 2.0, 0.5);
        let g = ground_projection(&p, PI / 4.0);
        assert!((g.x - 0.5).abs() < 1e-12 && (g.y - 2.0).abs() < 1e-12);
        assert!(check_slope(PI / 2.0).is_err());
        assert!(check_slope(-0.1).is_err());
    }
}
