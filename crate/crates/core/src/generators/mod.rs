//! Benchmark matrix families: linear distance matrices, polytope slack
//! matrices, disjointness-pattern matrices, random products and the small
//! counterexamples used to probe nonnegative rank.

mod registry;

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::init::RandomSource;
use crate::linalg::{numeric_rank, RANK_TOLERANCE};
use crate::matrix::DenseMatrix;

pub use registry::{benchmark_registry, lookup, registry_names, BenchmarkEntry, NonnegRank};

/// Slack entries this close to zero are snapped to exactly zero.
pub const SLACK_ZERO_CLAMP: f64 = 1e-12;

/// Largest bit-vector length accepted by [`udisj_y`] and [`corr_submatrix`].
pub const MAX_BIT_ORDER: usize = 7;

/// Linear Euclidean distance matrix `X(i,j) = (a_i − a_j)²`.
pub fn ledm(a: &[f64]) -> Result<DenseMatrix> {
    if a.len() < 2 {
        return Err(Error::InvalidConfig("ledm needs at least two points".into()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("ledm points must be finite".into()));
    }
    Ok(DenseMatrix::from_fn(a.len(), a.len(), |i, j| {
        (a[i] - a[j]).powi(2)
    }))
}

/// `X(i,j) = (i − j)²` for `1 ≤ i, j ≤ n`.
pub fn ledm_integer(n: usize) -> Result<DenseMatrix> {
    let a: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    ledm(&a)
}

fn clamp_slack(v: f64) -> f64 {
    if v.abs() <= SLACK_ZERO_CLAMP {
        0.0
    } else {
        v
    }
}

/// Slack matrix of the polygon with vertices at the given angles on the unit
/// circle. Row `i` is the edge through vertices `i` and `i+1` written as
/// `a_i·x ≤ 1`; column `j` is vertex `j`.
pub fn polygon_slack(angles: &[f64]) -> Result<DenseMatrix> {
    let n = angles.len();
    if n < 3 {
        return Err(Error::InvalidConfig("a polygon needs at least 3 vertices".into()));
    }
    let mut normals = Vec::with_capacity(n);
    for i in 0..n {
        let t0 = angles[i];
        let t1 = if i + 1 < n {
            angles[i + 1]
        } else {
            angles[0] + TAU
        };
        let gap = t1 - t0;
        if !(gap > 0.0 && gap < PI) {
            return Err(Error::InvalidConfig(format!(
                "vertex angles must increase with gaps in (0, π); gap {i} is {gap}"
            )));
        }
        // The chord between two unit vectors sits at distance cos(gap/2) from
        // the origin along the bisector.
        let mid = 0.5 * (t0 + t1);
        let scale = 1.0 / (0.5 * gap).cos();
        normals.push((mid.cos() * scale, mid.sin() * scale));
    }
    let verts: Vec<(f64, f64)> = angles.iter().map(|t| (t.cos(), t.sin())).collect();
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        let (ax, ay) = normals[i];
        let (vx, vy) = verts[j];
        clamp_slack(1.0 - (ax * vx + ay * vy))
    }))
}

pub fn regular_ngon_angles(n: usize) -> Vec<f64> {
    (0..n).map(|j| TAU * j as f64 / n as f64).collect()
}

pub fn regular_ngon_slack(n: usize) -> Result<DenseMatrix> {
    polygon_slack(&regular_ngon_angles(n))
}

/// One angle per arc: vertex `j` is uniform in the middle half of the `j`-th of
/// `n` equal arcs, which keeps every pair of vertices more than `π/n` apart.
pub fn generic_ngon_angles(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = RandomSource::new(seed);
    let arc = TAU / n as f64;
    (0..n)
        .map(|j| (j as f64 + 0.25 + 0.5 * rng.uniform()) * arc)
        .collect()
}

pub fn generic_ngon_slack(n: usize, seed: u64) -> Result<DenseMatrix> {
    if n < 3 {
        return Err(Error::InvalidConfig("a polygon needs at least 3 vertices".into()));
    }
    polygon_slack(&generic_ngon_angles(n, seed))
}

type Point<const D: usize> = [f64; D];

/// Slack matrix `1 − c_i·v_j` laid out as `rows × cols` by `index`.
fn slack<const D: usize>(
    facets: &[Point<D>],
    vertices: &[Point<D>],
    vertices_as_rows: bool,
) -> DenseMatrix {
    let s = |f: &Point<D>, v: &Point<D>| {
        clamp_slack(1.0 - f.iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
    };
    if vertices_as_rows {
        DenseMatrix::from_fn(vertices.len(), facets.len(), |j, i| s(&facets[i], &vertices[j]))
    } else {
        DenseMatrix::from_fn(facets.len(), vertices.len(), |i, j| s(&facets[i], &vertices[j]))
    }
}

fn cyclic_perms(p: Point<3>) -> [Point<3>; 3] {
    [p, [p[2], p[0], p[1]], [p[1], p[2], p[0]]]
}

fn signed_variants(p: Point<3>) -> Vec<Point<3>> {
    // Every sign pattern on the nonzero coordinates.
    let mut out = vec![p];
    for k in 0..3 {
        if p[k] != 0.0 {
            let flipped: Vec<Point<3>> = out
                .iter()
                .map(|q| {
                    let mut q = *q;
                    q[k] = -q[k];
                    q
                })
                .collect();
            out.extend(flipped);
        }
    }
    out
}

/// Slack matrix of the regular dodecahedron: 20 vertex rows, 12 facet columns.
pub fn dodecahedron_slack() -> DenseMatrix {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices = signed_variants([1.0, 1.0, 1.0]);
    for p in cyclic_perms([0.0, 1.0 / phi, phi]) {
        vertices.extend(signed_variants(p));
    }
    // Facet normals point at the icosahedron vertices (0, ±φ, ±1); each face
    // sits at support value φ².
    let support = phi * phi;
    let facets: Vec<Point<3>> = cyclic_perms([0.0, phi, 1.0])
        .into_iter()
        .flat_map(signed_variants)
        .map(|c| [c[0] / support, c[1] / support, c[2] / support])
        .collect();
    slack(&facets, &vertices, true)
}

/// Slack matrix of the 24-cell: 24 facet rows, 24 vertex columns.
pub fn cell24_slack() -> DenseMatrix {
    let mut vertices: Vec<Point<4>> = Vec::with_capacity(24);
    for a in 0..4 {
        for b in (a + 1)..4 {
            for sa in [1.0, -1.0] {
                for sb in [1.0, -1.0] {
                    let mut v = [0.0; 4];
                    v[a] = sa;
                    v[b] = sb;
                    vertices.push(v);
                }
            }
        }
    }
    let mut facets: Vec<Point<4>> = Vec::with_capacity(24);
    for k in 0..4 {
        for s in [1.0, -1.0] {
            let mut c = [0.0; 4];
            c[k] = s;
            facets.push(c);
        }
    }
    for mask in 0..16u32 {
        let c = std::array::from_fn(|k| if mask >> k & 1 == 1 { -0.5 } else { 0.5 });
        facets.push(c);
    }
    slack(&facets, &vertices, false)
}

/// Bit `k` (most significant first) of index `a` viewed as an `n`-bit vector.
fn bit(a: usize, k: usize, n: usize) -> usize {
    (a >> (n - 1 - k)) & 1
}

fn check_bit_order(n: usize) -> Result<()> {
    if !(2..=MAX_BIT_ORDER).contains(&n) {
        return Err(Error::InvalidConfig(format!(
            "bit order must be in 2..={MAX_BIT_ORDER}, got {n}"
        )));
    }
    Ok(())
}

fn inner(a: usize, b: usize) -> u32 {
    (a & b).count_ones()
}

/// Number of rectangles in the cover used by [`udisj_y`].
pub fn udisj_cover_size(n: usize) -> usize {
    3usize.pow((n / 2) as u32) * if n % 2 == 1 { 2 } else { 1 }
}

/// Sum of the rectangles of a product cover of the unique-disjointness
/// pattern.
///
/// Coordinates are grouped in consecutive pairs with one leftover when `n` is
/// odd. A pair takes one of three local rectangles on (a-bits × b-bits):
/// `{00,01}×{00,10}`, `{00,10}×{00,01}` or `{00,11}×{00,11}`; the leftover
/// takes `{0}×{0,1}` or `{0,1}×{0}`. Each local piece has inner product 0 or
/// 2, so no rectangle ever touches a pair with `aᵀb = 1`, and the pieces
/// cover every locally disjoint pattern. The construction is checked before
/// the matrix is returned.
pub fn udisj_y(n: usize) -> Result<DenseMatrix> {
    check_bit_order(n)?;
    let size = 1usize << n;
    let groups = n / 2;
    let leftover = n % 2 == 1;

    // Local (a-set, b-set) membership on two bits, encoded as (hi << 1 | lo).
    let pair_a = |t: usize, bits: usize| match t {
        0 => bits >> 1 == 0,
        1 => bits & 1 == 0,
        _ => bits == 0 || bits == 3,
    };
    let pair_b = |t: usize, bits: usize| match t {
        0 => bits & 1 == 0,
        1 => bits >> 1 == 0,
        _ => bits == 0 || bits == 3,
    };
    let single_a = |t: usize, bit: usize| t == 1 || bit == 0;
    let single_b = |t: usize, bit: usize| t == 0 || bit == 0;

    let mut y = DenseMatrix::zeros(size, size);
    let count = udisj_cover_size(n);
    for rect in 0..count {
        // Decode the mixed-radix choice: base 3 per pair, base 2 for the leftover.
        let mut code = rect;
        let mut choice = Vec::with_capacity(groups + 1);
        for _ in 0..groups {
            choice.push(code % 3);
            code /= 3;
        }
        if leftover {
            choice.push(code % 2);
        }
        let member = |x: usize, is_a: bool| {
            (0..groups).all(|g| {
                let bits = (bit(x, 2 * g, n) << 1) | bit(x, 2 * g + 1, n);
                if is_a {
                    pair_a(choice[g], bits)
                } else {
                    pair_b(choice[g], bits)
                }
            }) && (!leftover || {
                let b = bit(x, n - 1, n);
                if is_a {
                    single_a(choice[groups], b)
                } else {
                    single_b(choice[groups], b)
                }
            })
        };
        let rows: Vec<usize> = (0..size).filter(|&a| member(a, true)).collect();
        let cols: Vec<usize> = (0..size).filter(|&b| member(b, false)).collect();
        for &a in &rows {
            for &b in &cols {
                y[(a, b)] += 1.0;
            }
        }
    }

    for a in 0..size {
        for b in 0..size {
            let ip = inner(a, b);
            let v = y[(a, b)];
            if ip == 1 && v != 0.0 {
                return Err(Error::ConstructionFailed(format!(
                    "rectangle cover touches ({a}, {b}) with aᵀb = 1"
                )));
            }
            if ip == 0 && v < 1.0 {
                return Err(Error::ConstructionFailed(format!(
                    "disjoint pair ({a}, {b}) is not covered"
                )));
            }
        }
    }
    let rank = numeric_rank(&y, RANK_TOLERANCE);
    if rank != count {
        return Err(Error::ConstructionFailed(format!(
            "cover of {count} rectangles produced rank {rank}"
        )));
    }
    Ok(y)
}

/// `M(a,b) = (1 − aᵀb)²` over `a, b ∈ {0,1}ⁿ` in counting order.
pub fn corr_submatrix(n: usize) -> Result<DenseMatrix> {
    check_bit_order(n)?;
    let size = 1usize << n;
    Ok(DenseMatrix::from_fn(size, size, |a, b| {
        (1.0 - inner(a, b) as f64).powi(2)
    }))
}

/// A random nonnegative product `X = W·H` together with its factors.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomProduct {
    pub x: DenseMatrix,
    pub w: DenseMatrix,
    pub h: DenseMatrix,
}

/// `rows × cols` factor with one guaranteed nonzero per column plus an
/// independent sparse uniform perturbation of the given density.
fn sparse_plus_guaranteed(
    rows: usize,
    cols: usize,
    density: f64,
    rng: &mut RandomSource,
) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(rows, cols);
    for j in 0..cols {
        let i = rng.index(rows);
        m[(i, j)] = rng.uniform();
    }
    for i in 0..rows {
        for j in 0..cols {
            if rng.uniform() < density {
                m[(i, j)] += rng.uniform();
            }
        }
    }
    m
}

pub fn random_product(
    m: usize,
    n: usize,
    r: usize,
    density: f64,
    seed: u64,
) -> Result<RandomProduct> {
    if r == 0 || r >= m.min(n) {
        return Err(Error::InvalidRank {
            r,
            m,
            n,
            reason: "random products need 1 ≤ r < min(m, n)",
        });
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "density must be in (0, 1], got {density}"
        )));
    }
    let mut rng = RandomSource::new(seed);
    let w = sparse_plus_guaranteed(m, r, density, &mut rng);
    // H is built like W with the roles of rows and columns exchanged.
    let h = sparse_plus_guaranteed(n, r, density, &mut rng).transpose();
    let x = w.matmul(&h)?;
    Ok(RandomProduct { x, w, h })
}

/// The 4×4 slack matrix of two nested squares with parameter `a`.
pub fn nested_squares(a: f64) -> Result<DenseMatrix> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::InvalidConfig(format!("a must be in [0, 1], got {a}")));
    }
    let (p, q) = (1.0 + a, 1.0 - a);
    DenseMatrix::from_rows(&[[p, q, q, p], [q, p, p, q], [p, p, q, q], [q, q, p, p]])
}

/// The parameter for which the nested-squares matrix has rank 3.
pub fn nested_squares_parameter() -> f64 {
    2f64.sqrt() - 0.9
}

/// The 4×4 matrix with `a = 3/8` whose Kronecker square has nonnegative
/// rank 15 rather than 16.
pub fn fawzi_counterexample() -> DenseMatrix {
    let a = 3.0 / 8.0;
    DenseMatrix::from_rows(&[
        [1.0, 0.0, 1.0, a],
        [0.0, 1.0, 0.0, 1.0 - a],
        [0.0, 0.0, 1.0, 1.0 - a],
        [1.0, 1.0, 0.0, a],
    ])
    .expect("static matrix is valid")
}

/// Conjectured nonnegative rank of the regular `n`-gon slack matrix:
/// `2k − 1` when `2^(k−1) < n ≤ 2^(k−1) + 2^(k−2)` and `2k` when
/// `2^(k−1) + 2^(k−2) < n ≤ 2^k`.
pub fn conjectured_ngon_rank(n: usize) -> Result<usize> {
    if n < 3 {
        return Err(Error::InvalidConfig("n-gons need n ≥ 3".into()));
    }
    // Smallest k with n ≤ 2^k.
    let k = usize::BITS as usize - (n - 1).leading_zeros() as usize;
    let half = 1usize << (k - 1);
    let quarter = 1usize << (k - 2);
    Ok(if n <= half + quarter { 2 * k - 1 } else { 2 * k })
}
