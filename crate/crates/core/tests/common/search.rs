//! Exhaustive flip-sequence search, for checking planner optimality on small scenes.

use super::kin::{dist, footprint, inside_box, n_edges, overlap, tip, Cfg, Dims, St, P};

pub struct World {
    pub dims: Dims,
    pub allow_sd_sd: bool,
    pub arena: Option<(P, P)>,
    pub obstacles: Vec<Vec<P>>,
    pub target: P,
    pub tol: f64,
    pub goal_state: Option<St>,
    /// States the walk may visit.
    pub states: Vec<St>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Best {
    pub flips: Option<usize>,
    pub length: Option<f64>,
}

impl World {
    pub fn free(&self, c: &Cfg) -> bool {
        let f = footprint(&self.dims, c);
        self.arena.is_none_or(|(lo, hi)| inside_box(&f, lo, hi)) && !self.obstacles.iter().any(|o| overlap(&f, o))
    }

    pub fn goal(&self, c: &Cfg) -> bool {
        dist(c.c, self.target) <= self.tol && self.goal_state.is_none_or(|s| s == c.st)
    }

    /// Fewest flips and shortest centroid path over every sequence of at most `depth` flips.
    pub fn brute_force(&self, start: &Cfg, depth: usize) -> Best {
        let mut best = Best {
            flips: None,
            length: None,
        };
        if self.goal(start) {
            return Best {
                flips: Some(0),
                length: Some(0.0),
            };
        }
        self.dfs(start, 0, 0.0, depth, &mut best);
        best
    }

    fn dfs(&self, c: &Cfg, k: usize, len: f64, depth: usize, best: &mut Best) {
        if k == depth {
            return;
        }
        for e in 0..n_edges(c.st) {
            let Some(n) = tip(&self.dims, c, e, self.allow_sd_sd) else {
                continue;
            };
            if !self.states.contains(&n.st) || !self.free(&n) {
                continue;
            }
            let l = len + dist(c.c, n.c);
            if self.goal(&n) {
                if best.flips.is_none_or(|f| k + 1 < f) {
                    best.flips = Some(k + 1);
                }
                if best.length.is_none_or(|b| l < b) {
                    best.length = Some(l);
                }
            }
            self.dfs(&n, k + 1, l, depth, best);
        }
    }
}
