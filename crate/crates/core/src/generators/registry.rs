use serde::Serialize;

use super::{
    cell24_slack, dodecahedron_slack, ledm_integer, random_product, regular_ngon_slack, udisj_y,
};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Seed of the pinned `RND1` instance (50×50, rank 10, density 0.1).
pub const RND1_SEED: u64 = 1;
/// Seed of the pinned `RND3` instance (50×50, rank 10, density 0.3).
pub const RND3_SEED: u64 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonnegRank {
    Exact { value: usize },
    /// Best known upper bound (attained by a factorization) and lower bound.
    Bounded { upper: usize, lower: usize },
}

impl NonnegRank {
    /// The rank heuristics are asked to reach.
    pub fn target(self) -> usize {
        match self {
            NonnegRank::Exact { value } => value,
            NonnegRank::Bounded { upper, .. } => upper,
        }
    }

    pub fn lower_bound(self) -> usize {
        match self {
            NonnegRank::Exact { value } => value,
            NonnegRank::Bounded { lower, .. } => lower,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchmarkEntry {
    pub name: &'static str,
    pub matrix: DenseMatrix,
    pub known_rank: usize,
    pub known_nnrank: NonnegRank,
    pub notes: &'static str,
}

struct Spec {
    name: &'static str,
    rank: usize,
    nnrank: NonnegRank,
    notes: &'static str,
}

const fn exact(value: usize) -> NonnegRank {
    NonnegRank::Exact { value }
}

const SPECS: [Spec; 18] = [
    Spec { name: "LEDM6", rank: 3, nnrank: exact(5), notes: "X(i,j) = (i-j)^2, n = 6" },
    Spec { name: "LEDM8", rank: 3, nnrank: exact(6), notes: "X(i,j) = (i-j)^2, n = 8" },
    Spec { name: "LEDM12", rank: 3, nnrank: exact(7), notes: "X(i,j) = (i-j)^2, n = 12" },
    Spec { name: "LEDM16", rank: 3, nnrank: exact(8), notes: "X(i,j) = (i-j)^2, n = 16" },
    Spec {
        name: "LEDM32",
        rank: 3,
        nnrank: NonnegRank::Bounded { upper: 10, lower: 9 },
        notes: "X(i,j) = (i-j)^2, n = 32; nonnegative rank open",
    },
    Spec { name: "6-G", rank: 3, nnrank: exact(5), notes: "regular hexagon slack matrix" },
    Spec { name: "7-G", rank: 3, nnrank: exact(6), notes: "regular heptagon slack matrix" },
    Spec { name: "8-G", rank: 3, nnrank: exact(6), notes: "regular octagon slack matrix" },
    Spec { name: "9-G", rank: 3, nnrank: exact(7), notes: "regular nonagon slack matrix" },
    Spec { name: "16-G", rank: 3, nnrank: exact(8), notes: "regular hexadecagon slack matrix" },
    Spec { name: "32-G", rank: 3, nnrank: exact(10), notes: "regular 32-gon slack matrix" },
    Spec { name: "20-D", rank: 4, nnrank: exact(9), notes: "dodecahedron slack matrix, vertices as rows" },
    Spec {
        name: "24-C",
        rank: 5,
        nnrank: NonnegRank::Bounded { upper: 12, lower: 10 },
        notes: "24-cell slack matrix; nonnegative rank open",
    },
    Spec { name: "UDISJ4", rank: 9, nnrank: exact(9), notes: "sum of 9 disjointness rectangles, n = 4" },
    Spec { name: "UDISJ5", rank: 18, nnrank: exact(18), notes: "sum of 18 disjointness rectangles, n = 5" },
    Spec { name: "UDISJ6", rank: 27, nnrank: exact(27), notes: "sum of 27 disjointness rectangles, n = 6" },
    Spec { name: "RND1", rank: 10, nnrank: exact(10), notes: "50x50 random product, density 0.1, seed 1" },
    Spec { name: "RND3", rank: 10, nnrank: exact(10), notes: "50x50 random product, density 0.3, seed 3" },
];

pub fn registry_names() -> Vec<&'static str> {
    SPECS.iter().map(|s| s.name).collect()
}

fn build(name: &str) -> Result<DenseMatrix> {
    Ok(match name {
        "LEDM6" => ledm_integer(6)?,
        "LEDM8" => ledm_integer(8)?,
        "LEDM12" => ledm_integer(12)?,
        "LEDM16" => ledm_integer(16)?,
        "LEDM32" => ledm_integer(32)?,
        "6-G" => regular_ngon_slack(6)?,
        "7-G" => regular_ngon_slack(7)?,
        "8-G" => regular_ngon_slack(8)?,
        "9-G" => regular_ngon_slack(9)?,
        "16-G" => regular_ngon_slack(16)?,
        "32-G" => regular_ngon_slack(32)?,
        "20-D" => dodecahedron_slack(),
        "24-C" => cell24_slack(),
        "UDISJ4" => udisj_y(4)?,
        "UDISJ5" => udisj_y(5)?,
        "UDISJ6" => udisj_y(6)?,
        "RND1" => random_product(50, 50, 10, 0.1, RND1_SEED)?.x,
        "RND3" => random_product(50, 50, 10, 0.3, RND3_SEED)?.x,
        other => return Err(unknown(other)),
    })
}

fn unknown(name: &str) -> Error {
    Error::UnknownName {
        name: name.to_string(),
        expected: registry_names().join(", "),
    }
}

/// Builds one registry entry by name (case-insensitive).
pub fn lookup(name: &str) -> Result<BenchmarkEntry> {
    let spec = SPECS
        .iter()
        .find(|s| s.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| unknown(name))?;
    Ok(BenchmarkEntry {
        name: spec.name,
        matrix: build(spec.name)?,
        known_rank: spec.rank,
        known_nnrank: spec.nnrank,
        notes: spec.notes,
    })
}

/// All eighteen benchmark matrices with their rank metadata.
pub fn benchmark_registry() -> Vec<BenchmarkEntry> {
    SPECS
        .iter()
        .map(|s| lookup(s.name).expect("registry entries are constructible"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_is_case_insensitive_and_rejects_unknown() {
        assert_eq!(lookup("ledm6").unwrap().name, "LEDM6");
        match lookup("LEDM7") {
            Err(Error::UnknownName { expected, .. }) => assert!(expected.contains("UDISJ6")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn metadata_rows() {
        let e = lookup("LEDM16").unwrap();
        assert_eq!((e.matrix.rows(), e.matrix.cols(), e.known_rank), (16, 16, 3));
        assert_eq!(e.known_nnrank, NonnegRank::Exact { value: 8 });
        let u = lookup("UDISJ6").unwrap();
        assert_eq!(u.matrix.shape(), (64, 64));
        assert_eq!((u.known_rank, u.known_nnrank.target()), (27, 27));
        for s in SPECS.iter() {
            assert!(s.nnrank.lower_bound() >= s.rank);
        }
    }
}
