//! Monte Carlo estimate of the state a randomly thrown robot comes to rest in.

use nalgebra::{Quaternion, UnitQuaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{LiftState, StaticsError, StaticsModel, Vec3};
use crate::exec::{fold_indexed, Execution};
use crate::geometry::Segment;
use crate::robot::{canonical_edge, StableState};
use crate::tolerances::MAX_SETTLE_ROLLS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LandingCounts {
    pub hu: u64,
    pub hd: u64,
    pub sd: u64,
}

impl LandingCounts {
    fn add(self, o: Self) -> Self {
        Self {
            hu: self.hu + o.hu,
            hd: self.hd + o.hd,
            sd: self.sd + o.sd,
        }
    }

    fn one(state: StableState) -> Self {
        let mut c = Self::default();
        match state {
            StableState::Hu => c.hu = 1,
            StableState::Hd => c.hd = 1,
            StableState::Sd => c.sd = 1,
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandingEstimate {
    pub p_hu: f64,
    pub p_hd: f64,
    pub p_sd: f64,
    pub samples: u64,
    pub seed: u64,
    pub counts: LandingCounts,
}

/// Orientation of sample `index` of a run seeded with `seed`: a uniformly
/// random rotation, drawn from its own generator stream.
pub fn sample_orientation(seed: u64, index: u64) -> UnitQuaternion<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut q = [0.0f64; 4];
    loop {
        for c in &mut q {
            *c = rng.sample(StandardNormal);
        }
        if q.iter().map(|c| c * c).sum::<f64>() > 1e-12 {
            break;
        }
    }
    UnitQuaternion::from_quaternion(Quaternion::new(q[0], q[1], q[2], q[3]))
}

impl StaticsModel {
    /// Face that ends up on the ground when the body starts with gravity
    /// pointing along `down` (body frame) and the COM at `com`.
    pub fn settle(&self, com: &Vec3, down: &Vec3) -> Result<usize, StaticsError> {
        if !self.solid.contains(com) {
            return Err(StaticsError::ComOutsideSolid);
        }
        let faces = self.solid.faces();
        let mut face = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.normal.dot(down) > 0.0)
            .map(|(i, f)| (i, (f.offset - f.normal.dot(com)) / f.normal.dot(down)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
            .expect("some face is hit by the gravity ray");
        let height = |i: usize| faces[i].offset - faces[i].normal.dot(com);
        for _ in 0..=MAX_SETTLE_ROLLS {
            let f = &faces[face];
            let p = f.to_rest(com);
            let p = crate::geometry::Vec2::new(p.x, p.y);
            let mut worst: Option<(usize, f64)> = None;
            for e in &f.edges {
                let (q0, q1) = canonical_edge(&self.geom, f.state, e.label)?;
                let seg = Segment::new(q0, q1).expect("footprint edges are non-degenerate");
                let out = -seg.signed_distance(p);
                if out > 0.0 && worst.is_none_or(|(_, w)| out > w) {
                    worst = Some((e.neighbor, out));
                }
            }
            match worst {
                None => return Ok(face),
                Some((next, _)) => {
                    assert!(height(next) < height(face), "rolling must lower the center of mass");
                    face = next;
                }
            }
        }
        Err(StaticsError::SettleDiverged(MAX_SETTLE_ROLLS))
    }

    /// Landing statistics with the movable masses at `lift`.
    pub fn landing_with_lift(
        &self,
        lift: &LiftState,
        samples: u64,
        seed: u64,
        exec: Execution,
    ) -> Result<LandingEstimate, StaticsError> {
        if samples == 0 {
            return Err(StaticsError::ZeroSamples);
        }
        let com = self.masses.com_body(lift)?;
        if !self.solid.contains(&com) {
            return Err(StaticsError::ComOutsideSolid);
        }
        let n = usize::try_from(samples).map_err(|_| StaticsError::ZeroSamples)?;
        let counts = fold_indexed(
            n,
            exec,
            Ok(LandingCounts::default()),
            |i| {
                let q = sample_orientation(seed, i as u64);
                let down = q.inverse_transform_vector(&-Vec3::z());
                self.settle(&com, &down)
                    .map(|f| LandingCounts::one(self.solid.face(f).state))
            },
            |a, b| match (a, b) {
                (Ok(a), Ok(b)) => Ok(a.add(b)),
                (Err(e), _) | (_, Err(e)) => Err(e),
            },
        )?;
        let n = samples as f64;
        let p_hu = counts.hu as f64 / n;
        let p_hd = counts.hd as f64 / n;
        Ok(LandingEstimate {
            p_hu,
            p_hd,
            p_sd: 1.0 - (p_hu + p_hd),
            samples,
            seed,
            counts,
        })
    }

    /// Landing statistics with every movable mass at the start of its segment.
    pub fn landing_probabilities(&self, samples: u64, seed: u64, exec: Execution) -> Result<LandingEstimate, StaticsError> {
        self.landing_with_lift(&self.zero_lift(), samples, seed, exec)
    }
}
