//! Random initial factors and the seeded random source behind every run.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::factor::FactorPair;
use crate::matrix::DenseMatrix;

/// How the initial `(W, H)` of a run is drawn.
///
/// `SparseIJ`: `I = 0` puts a single nonzero in every row of `W`, `I = 1` a
/// single nonzero in every column of `W`; `J` plays the same role for `H`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitStrategy {
    RndCube,
    Sparse00,
    Sparse01,
    Sparse10,
    Sparse11,
}

impl InitStrategy {
    pub const ALL: [InitStrategy; 5] = [
        InitStrategy::Sparse00,
        InitStrategy::Sparse10,
        InitStrategy::Sparse01,
        InitStrategy::Sparse11,
        InitStrategy::RndCube,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InitStrategy::RndCube => "rndcube",
            InitStrategy::Sparse00 => "sparse00",
            InitStrategy::Sparse01 => "sparse01",
            InitStrategy::Sparse10 => "sparse10",
            InitStrategy::Sparse11 => "sparse11",
        }
    }

    /// `(w_by_column, h_by_column)` for the sparse strategies.
    fn sparse_layout(self) -> Option<(bool, bool)> {
        match self {
            InitStrategy::RndCube => None,
            InitStrategy::Sparse00 => Some((false, false)),
            InitStrategy::Sparse01 => Some((false, true)),
            InitStrategy::Sparse10 => Some((true, false)),
            InitStrategy::Sparse11 => Some((true, true)),
        }
    }
}

impl fmt::Display for InitStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        InitStrategy::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownName {
                name: s.to_string(),
                expected: "rndcube, sparse00, sparse01, sparse10, sparse11".into(),
            })
    }
}

/// Seeded ChaCha8 stream. The generator is portable and platform independent,
/// and [`RandomSource::substream`] yields independent streams from one seed.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Source for run `index` of an experiment whose first run uses `base_seed`.
    pub fn for_run(base_seed: u64, index: u64) -> Self {
        Self::new(base_seed.wrapping_add(index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn substream(&self, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        Self {
            seed: self.seed,
            rng,
        }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform on `(0, 1]`, used where a drawn value must be nonzero.
    pub fn uniform_nonzero(&mut self) -> f64 {
        1.0 - self.rng.gen::<f64>()
    }

    pub fn index(&mut self, bound: usize) -> usize {
        self.rng.gen_range(0..bound)
    }

    /// `count` distinct indices from `0..bound`, in draw order.
    pub fn distinct_indices(&mut self, bound: usize, count: usize) -> Vec<usize> {
        rand::seq::index::sample(&mut self.rng, bound, count).into_vec()
    }
}

fn sparse_factor(
    rows: usize,
    cols: usize,
    by_column: bool,
    rng: &mut RandomSource,
) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(rows, cols);
    if by_column {
        for j in 0..cols {
            let i = rng.index(rows);
            m[(i, j)] = rng.uniform_nonzero();
        }
    } else {
        for i in 0..rows {
            let j = rng.index(cols);
            m[(i, j)] = rng.uniform_nonzero();
        }
    }
    m
}

/// Draws an initial `m×r` / `r×n` pair. `W` is drawn before `H`.
pub fn init_pair(
    strategy: InitStrategy,
    m: usize,
    n: usize,
    r: usize,
    rng: &mut RandomSource,
) -> FactorPair {
    let (w, h) = match strategy.sparse_layout() {
        None => {
            let w = DenseMatrix::from_fn(m, r, |_, _| rng.uniform());
            let h = DenseMatrix::from_fn(r, n, |_, _| rng.uniform());
            (w, h)
        }
        Some((w_by_col, h_by_col)) => {
            let w = sparse_factor(m, r, w_by_col, rng);
            let h = sparse_factor(r, n, h_by_col, rng);
            (w, h)
        }
    };
    FactorPair::from_parts(w, h)
}

/// A random rank-one term with exactly one nonzero in `w` and one in `h`.
pub fn init_rank_one(m: usize, n: usize, rng: &mut RandomSource) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = init_pair(InitStrategy::Sparse10, m, n, 1, rng).into_parts();
    (w.into_data(), h.into_data())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in InitStrategy::ALL {
            assert_eq!(s.name().parse::<InitStrategy>().unwrap(), s);
            assert_eq!(s.to_string().to_uppercase().parse::<InitStrategy>().unwrap(), s);
        }
        assert!("sparse22".parse::<InitStrategy>().is_err());
    }

    #[test]
    fn sparse11_counts() {
        let mut rng = RandomSource::new(7);
        let pair = init_pair(InitStrategy::Sparse11, 4, 4, 2, &mut rng);
        assert_eq!(pair.w().count_nonzero(), 2);
        assert_eq!(pair.h().count_nonzero(), 4);
    }

    #[test]
    fn sparse_counts_match_layout() {
        let (m, n, r) = (7, 5, 3);
        for seed in 0..50 {
            for (s, wn, hn) in [
                (InitStrategy::Sparse00, m, r),
                (InitStrategy::Sparse01, m, n),
                (InitStrategy::Sparse10, r, r),
                (InitStrategy::Sparse11, r, n),
            ] {
                let p = init_pair(s, m, n, r, &mut RandomSource::new(seed));
                assert_eq!(p.w().count_nonzero(), wn, "{s} W");
                assert_eq!(p.h().count_nonzero(), hn, "{s} H");
                assert!(p.w().data().iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }

    #[test]
    fn sparse10_has_no_dead_rank_one_terms() {
        for seed in 0..100 {
            let p = init_pair(InitStrategy::Sparse10, 6, 9, 4, &mut RandomSource::new(seed));
            for k in 0..4 {
                assert!(p.w().column(k).iter().any(|v| *v > 0.0));
                assert!(p.h().row(k).iter().any(|v| *v > 0.0));
            }
        }
    }

    #[test]
    fn sparse00_can_leave_dead_columns() {
        let dead = (0..200).any(|seed| {
            let p = init_pair(InitStrategy::Sparse00, 2, 5, 3, &mut RandomSource::new(seed));
            (0..3).any(|k| p.w().column(k).iter().all(|v| *v == 0.0))
        });
        assert!(dead);
    }

    #[test]
    fn rank_one_draws() {
        let mut rng = RandomSource::new(3);
        let (w, h) = init_rank_one(5, 8, &mut rng);
        assert_eq!(w.iter().filter(|v| **v != 0.0).count(), 1);
        assert_eq!(h.iter().filter(|v| **v != 0.0).count(), 1);
        let placements: std::collections::HashSet<(usize, usize)> = (0..40)
            .map(|_| {
                let (w, h) = init_rank_one(5, 8, &mut rng);
                (
                    w.iter().position(|v| *v != 0.0).unwrap(),
                    h.iter().position(|v| *v != 0.0).unwrap(),
                )
            })
            .collect();
        assert!(placements.len() > 1);
    }

    #[test]
    fn deterministic_and_substreams_differ() {
        let a = init_pair(InitStrategy::RndCube, 3, 4, 2, &mut RandomSource::new(11));
        let b = init_pair(InitStrategy::RndCube, 3, 4, 2, &mut RandomSource::new(11));
        assert_eq!(a, b);
        let s0 = RandomSource::new(11).substream(1).uniform();
        let s1 = RandomSource::new(11).substream(2).uniform();
        assert_ne!(s0, s1);
        assert_eq!(RandomSource::for_run(1, 4).seed(), 5);
    }
}
