//! Steepest slopes the robot can climb, and descend under control.

use serde::{Deserialize, Serialize};

use super::{Stance, StaticsError, StaticsModel};
use crate::geometry::Vec2;
use crate::robot::{Configuration, EdgeLabel, StableState};
use crate::tolerances::SLOPE_TOL;

/// How the robot picks its pivot edge on a slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Gait {
    /// HU → SD → HD → SD → HU, each flip over the edge facing most directly
    /// along the fall line (uphill to climb, downhill to descend).
    #[default]
    FallLine,
    /// Explicit pivot edges, starting head-up with edge 0 facing the direction of travel.
    Edges(Vec<EdgeLabel>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeResult {
    pub alpha_c: f64,
    pub alpha_a: f64,
    pub converged: bool,
    pub iterations: u32,
    /// Final bisection bracket widths (climb, descent), radians.
    pub bracket_c: f64,
    pub bracket_a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Up,
    Down,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Up => 1.0,
            Direction::Down => -1.0,
        }
    }
}

const GAIT_TIE: f64 = 1e-9;

impl StaticsModel {
    fn gait_start(&self, dir: Direction) -> Stance {
        // edge 0's outward normal points along -x in the footprint frame
        let alpha = match dir {
            Direction::Up => std::f64::consts::PI,
            Direction::Down => 0.0,
        };
        self.stance(Configuration::new(Vec2::new(0.0, 0.0), StableState::Hu, alpha))
    }

    /// Edge whose outward normal points furthest along `dir`, among the
    /// edges leaving toward a different footprint class.
    fn fall_line_edge(&self, stance: &Stance, dir: Direction) -> Result<EdgeLabel, StaticsError> {
        let state = stance.config.state;
        let mut best: Option<(EdgeLabel, f64)> = None;
        for &e in state.edges() {
            if matches!(e, EdgeLabel::LongA | EdgeLabel::LongB) {
                continue;
            }
            let score = self.edge_normal(&stance.config, e)?.x * dir.sign();
            if best.is_none_or(|(_, s)| score > s + GAIT_TIE) {
                best = Some((e, score));
            }
        }
        Ok(best.expect("every state has a non-long edge").0)
    }

    fn gait_edges(&self, gait: &Gait, stance: &Stance, step: usize, dir: Direction) -> Result<Option<EdgeLabel>, StaticsError> {
        match gait {
            Gait::FallLine => {
                if step >= 4 {
                    Ok(None)
                } else {
                    self.fall_line_edge(stance, dir).map(Some)
                }
            }
            Gait::Edges(list) => Ok(list.get(step).copied()),
        }
    }

    /// Whether one full gait cycle succeeds on slope `beta`: every flip has a
    /// feasible lift and every rest, start included, is stable with lift 0.
    pub fn gait_feasible(&self, gait: &Gait, climbing: bool, beta: f64) -> Result<bool, StaticsError> {
        let dir = if climbing { Direction::Up } else { Direction::Down };
        let zero = self.zero_lift();
        let mut stance = self.gait_start(dir);
        if !self.is_stable(&zero, &stance, beta)? {
            return Ok(false);
        }
        let mut step = 0;
        while let Some(edge) = self.gait_edges(gait, &stance, step, dir)? {
            // optimal_lift succeeds exactly when some lift is feasible
            match self.lift_exists(&stance, edge, beta) {
                Ok(true) => {}
                Ok(false) | Err(StaticsError::DisallowedTransition { .. }) => return Ok(false),
                Err(e) => return Err(e),
            }
            stance = self.tip(&stance, edge)?;
            if !self.is_stable(&zero, &stance, beta)? {
                return Ok(false);
            }
            step += 1;
        }
        Ok(true)
    }

    /// Bisection for the largest feasible slope; 0 when flat ground fails.
    fn max_slope(&self, gait: &Gait, climbing: bool) -> Result<(f64, f64, u32), StaticsError> {
        if !self.gait_feasible(gait, climbing, 0.0)? {
            return Ok((0.0, 0.0, 0));
        }
        // a vertical wall has no ground projection; treat it as infeasible
        let (mut lo, mut hi) = (0.0, std::f64::consts::FRAC_PI_2);
        let mut iterations = 0;
        while hi - lo > SLOPE_TOL {
            let mid = 0.5 * (lo + hi);
            if self.gait_feasible(gait, climbing, mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
            iterations += 1;
        }
        Ok((lo, hi - lo, iterations))
    }

    pub fn max_slopes(&self, gait: &Gait) -> Result<SlopeResult, StaticsError> {
        let (alpha_c, bracket_c, ic) = self.max_slope(gait, true)?;
        let (alpha_a, bracket_a, ia) = self.max_slope(gait, false)?;
        Ok(SlopeResult {
            alpha_c,
            alpha_a,
            converged: bracket_c <= SLOPE_TOL && bracket_a <= SLOPE_TOL,
            iterations: ic + ia,
            bracket_c,
            bracket_a,
        })
    }
}
