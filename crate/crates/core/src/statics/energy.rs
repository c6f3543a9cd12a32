//! Flip energy and the lift strategy that minimizes it.

use nalgebra::{Rotation3, Unit};

use super::{check_slope, up_vector, LiftState, Stance, StaticsError, StaticsModel, Vec3};
use crate::robot::EdgeLabel;
use crate::tolerances::{BARRIER_SWEEP_STEP, LIFT_ENERGY_TOL, LIFT_TOL, TIP_MARGIN};

#[derive(Debug, Clone, PartialEq)]
pub struct LiftSolution {
    pub lift: LiftState,
    pub energy: f64,
    /// False when the search is exact (bisection or no lift needed),
    /// true for the multi-mass coordinate descent.
    pub heuristic: bool,
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const MAX_DESCENT_SWEEPS: usize = 200;
const LINE_SAMPLES: usize = 32;
const MAX_CORNER_MASSES: usize = 16;

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

impl StaticsModel {
    /// Total potential energy (J) after rotating the body by `phi` about the
    /// pivot edge, lift held fixed.
    pub fn tipping_potential(
        &self,
        lift: &LiftState,
        stance: &Stance,
        edge: EdgeLabel,
        beta: f64,
        phi: f64,
    ) -> Result<f64, StaticsError> {
        let sweep = self.sweep(lift, stance, edge, beta)?;
        Ok(sweep.potential(phi))
    }

    fn sweep(&self, lift: &LiftState, stance: &Stance, edge: EdgeLabel, beta: f64) -> Result<Sweep, StaticsError> {
        let com = self.com(lift, stance, beta)?;
        let seg = self.pivot(stance, edge)?;
        let d = seg.b() - seg.a();
        Ok(Sweep {
            p0: Vec3::new(seg.a().x, seg.a().y, 0.0),
            axis: Unit::new_normalize(Vec3::new(d.x, d.y, 0.0)),
            com: com.plane,
            up: up_vector(beta),
            weight: self.masses.total_mass() * self.masses.gravity(),
            end: self.tip_angle(stance, edge)?,
        })
    }

    /// Largest rise of total potential energy over the tipping rotation (J);
    /// can be negative when the rotation is downhill throughout.
    pub fn tipping_barrier(
        &self,
        lift: &LiftState,
        stance: &Stance,
        edge: EdgeLabel,
        beta: f64,
    ) -> Result<f64, StaticsError> {
        let sweep = self.sweep(lift, stance, edge, beta)?;
        let n = (sweep.end / BARRIER_SWEEP_STEP).ceil() as usize;
        let step = sweep.end / n as f64;
        let u0 = sweep.potential(0.0);
        let (mut best_j, mut best) = (0usize, f64::NEG_INFINITY);
        for j in 1..=n {
            let u = sweep.potential(j as f64 * step);
            if u > best {
                best = u;
                best_j = j;
            }
        }
        let lo = (best_j.saturating_sub(1)) as f64 * step;
        let hi = ((best_j + 1).min(n)) as f64 * step;
        let (_, refined) = golden_max(|p| sweep.potential(p), lo, hi, 1e-10);
        Ok(best.max(refined) - u0)
    }

    /// Work done lifting the movable masses from `t = 0` to `lift` (J),
    /// counting only mass that goes up.
    pub fn lift_work(&self, lift: &LiftState, stance: &Stance, beta: f64) -> Result<f64, StaticsError> {
        check_slope(beta)?;
        lift.check_len(self.masses.len())?;
        let (r, _) = self.plane_transform(stance)?;
        let up = up_vector(beta);
        let g = self.masses.gravity();
        Ok(self
            .masses
            .movable()
            .iter()
            .zip(lift.t())
            .map(|(m, &t)| m.mass * g * (r * (m.at(t) - m.a)).dot(&up).max(0.0))
            .sum())
    }

    pub fn flip_energy(
        &self,
        lift: &LiftState,
        stance: &Stance,
        edge: EdgeLabel,
        beta: f64,
    ) -> Result<f64, StaticsError> {
        if !self.can_tip(lift, stance, edge, beta)? {
            return Err(StaticsError::InfeasibleLift);
        }
        Ok(self.lift_work(lift, stance, beta)? + self.tipping_barrier(lift, stance, edge, beta)?.max(0.0))
    }

    /// Minimum-energy lift that tips the robot over `edge`.
    pub fn optimal_lift(&self, stance: &Stance, edge: EdgeLabel, beta: f64) -> Result<LiftSolution, StaticsError> {
        self.table.lookup(stance.config.state, edge)?;
        let k = self.masses.len();
        let zero = LiftState::zeros(k);
        if self.can_tip(&zero, stance, edge, beta)? {
            let energy = self.flip_energy(&zero, stance, edge, beta)?;
            return Ok(LiftSolution {
                lift: zero,
                energy,
                heuristic: false,
            });
        }
        match k {
            0 => Err(StaticsError::NoFeasibleLift),
            1 => self.bisect_single(stance, edge, beta),
            _ => self.coordinate_descent(stance, edge, beta),
        }
    }

    /// Whether any lift in the unit cube tips the robot over `edge`; the
    /// clearance is affine in the lift, so the best corner decides.
    pub fn lift_exists(&self, stance: &Stance, edge: EdgeLabel, beta: f64) -> Result<bool, StaticsError> {
        self.table.lookup(stance.config.state, edge)?;
        let k = self.masses.len();
        let c0 = self.clearance_at(&vec![0.0; k], stance, edge, beta)?;
        let mut t = vec![0.0; k];
        for i in 0..k {
            let mut probe = vec![0.0; k];
            probe[i] = 1.0;
            if self.clearance_at(&probe, stance, edge, beta)? > c0 {
                t[i] = 1.0;
            }
        }
        Ok(self.clearance_at(&t, stance, edge, beta)? > TIP_MARGIN)
    }

    fn clearance_at(&self, t: &[f64], stance: &Stance, edge: EdgeLabel, beta: f64) -> Result<f64, StaticsError> {
        self.edge_clearance(&LiftState { t: t.to_vec() }, stance, edge, beta)
    }

    fn energy_at(&self, t: &[f64], stance: &Stance, edge: EdgeLabel, beta: f64) -> Result<f64, StaticsError> {
        self.flip_energy(&LiftState { t: t.to_vec() }, stance, edge, beta)
    }

    fn bisect_single(&self, stance: &Stance, edge: EdgeLabel, beta: f64) -> Result<LiftSolution, StaticsError> {
        if self.clearance_at(&[1.0], stance, edge, beta)? <= TIP_MARGIN {
            return Err(StaticsError::NoFeasibleLift);
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > LIFT_TOL {
            let mid = 0.5 * (lo + hi);
            if self.clearance_at(&[mid], stance, edge, beta)? > TIP_MARGIN {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let lift = LiftState { t: vec![hi] };
        let energy = self.flip_energy(&lift, stance, edge, beta)?;
        Ok(LiftSolution {
            lift,
            energy,
            heuristic: false,
        })
    }

    fn coordinate_descent(&self, stance: &Stance, edge: EdgeLabel, beta: f64) -> Result<LiftSolution, StaticsError> {
        let k = self.masses.len();
        let full = vec![1.0; k];
        let mut t = if self.clearance_at(&full, stance, edge, beta)? > TIP_MARGIN {
            full
        } else {
            self.best_feasible_corner(stance, edge, beta)?
        };
        let mut energy = self.energy_at(&t, stance, edge, beta)?;
        for _ in 0..MAX_DESCENT_SWEEPS {
            let mut improved = false;
            for i in 0..k {
                if let Some((ti, ei)) = self.line_minimum(&t, i, stance, edge, beta)? {
                    if ei < energy - LIFT_ENERGY_TOL {
                        t[i] = ti;
                        energy = ei;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        Ok(LiftSolution {
            lift: LiftState { t },
            energy,
            heuristic: true,
        })
    }

    fn best_feasible_corner(&self, stance: &Stance, edge: EdgeLabel, beta: f64) -> Result<Vec<f64>, StaticsError> {
        let k = self.masses.len();
        if k > MAX_CORNER_MASSES {
            return Err(StaticsError::NoFeasibleLift);
        }
        let mut best: Option<(f64, Vec<f64>)> = None;
        for bits in 0u32..(1 << k) {
            let t: Vec<f64> = (0..k).map(|i| f64::from((bits >> i) & 1)).collect();
            if self.clearance_at(&t, stance, edge, beta)? > TIP_MARGIN {
                let e = self.energy_at(&t, stance, edge, beta)?;
                if best.as_ref().is_none_or(|(be, _)| e < *be) {
                    best = Some((e, t));
                }
            }
        }
        best.map(|(_, t)| t).ok_or(StaticsError::NoFeasibleLift)
    }

    /// Best feasible value for coordinate `i` with the others fixed.
    fn line_minimum(
        &self,
        t: &[f64],
        i: usize,
        stance: &Stance,
        edge: EdgeLabel,
        beta: f64,
    ) -> Result<Option<(f64, f64)>, StaticsError> {
        let mut probe = t.to_vec();
        let mut at = |x: f64| -> Result<f64, StaticsError> {
            probe[i] = x;
            self.clearance_at(&probe, stance, edge, beta)
        };
        // clearance is affine in each coordinate
        let (c0, c1) = (at(0.0)?, at(1.0)?);
        let slope = c1 - c0;
        let (lo, hi) = if slope.abs() < 1e-15 {
            if c0 > TIP_MARGIN {
                (0.0, 1.0)
            } else {
                return Ok(None);
            }
        } else {
            let tb = (TIP_MARGIN - c0) / slope;
            if slope > 0.0 {
                (tb.max(0.0), 1.0)
            } else {
                (0.0, tb.min(1.0))
            }
        };
        if lo > hi {
            return Ok(None);
        }
        let energy = |x: f64| -> Option<f64> {
            let mut probe = t.to_vec();
            probe[i] = x;
            self.energy_at(&probe, stance, edge, beta).ok()
        };
        let mut best: Option<(f64, f64)> = None;
        let consider = |x: f64, e: Option<f64>, best: &mut Option<(f64, f64)>| {
            if let Some(e) = e {
                if best.is_none_or(|(_, be)| e < be) {
                    *best = Some((x, e));
                }
            }
        };
        // nudge off the exact feasibility boundary
        let nudge = 1e-9;
        let (a, b) = (
            if slope > 0.0 { (lo + nudge).min(hi) } else { lo },
            if slope < 0.0 { (hi - nudge).max(lo) } else { hi },
        );
        let h = (b - a) / LINE_SAMPLES as f64;
        let mut best_j = 0;
        for j in 0..=LINE_SAMPLES {
            let x = a + j as f64 * h;
            let before = best;
            consider(x, energy(x), &mut best);
            if best != before {
                best_j = j;
            }
        }
        if h > 0.0 {
            let l = a + best_j.saturating_sub(1) as f64 * h;
            let r = a + (best_j + 1).min(LINE_SAMPLES) as f64 * h;
            let (x, _) = golden_max(|x| energy(x).map_or(f64::NEG_INFINITY, |e| -e), l, r, LIFT_TOL);
            consider(x, energy(x), &mut best);
        }
        Ok(best)
    }
}

struct Sweep {
    p0: Vec3,
    axis: Unit<Vec3>,
    com: Vec3,
    up: Vec3,
    weight: f64,
    end: f64,
}

impl Sweep {
    fn potential(&self, phi: f64) -> f64 {
        let rot = Rotation3::from_axis_angle(&self.axis, phi);
        let c = rot * (self.com - self.p0) + self.p0;
        self.weight * c.dot(&self.up)
    }
}
