//! Numerical tolerances shared by every module.

/// Two poses are considered equal when positions and angles agree within this.
pub const POSE_EQ: f64 = 1e-9;

/// Slack used by geometric predicates (orientation, containment, overlap).
pub const GEOM_EPS: f64 = 1e-12;

/// Minimum segment length; anything shorter is degenerate.
pub const MIN_SEGMENT_LEN: f64 = 1e-12;

/// Relative position quantum for visited-set keys (multiplied by the triangle side).
pub const KEY_POS_REL: f64 = 1e-6;

/// Angular quantum for visited-set keys, radians.
pub const KEY_ANGLE: f64 = 1e-6;

/// Margin a projected center of mass must clear an edge line by to count as "outside".
pub const TIP_MARGIN: f64 = 1e-12;

/// Coarse sweep step used for the tipping barrier search, radians.
pub const BARRIER_SWEEP_STEP: f64 = 1e-3;

/// Lift-fraction tolerance for the single-mass bisection.
pub const LIFT_TOL: f64 = 1e-6;

/// Coordinate descent stops when no coordinate improves energy by more than this (J).
pub const LIFT_ENERGY_TOL: f64 = 1e-9;

/// Final bracket width for slope bisection, radians.
pub const SLOPE_TOL: f64 = 1e-4;

/// Upper bound on quasi-static rolls while settling a thrown body.
pub const MAX_SETTLE_ROLLS: usize = 20;

/// Largest vertex error a trace footprint may carry relative to its pose.
pub const TRACE_FOOTPRINT_TOL: f64 = 1e-9;
