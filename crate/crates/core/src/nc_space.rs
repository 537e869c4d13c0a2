//! Points of the NC universe, the row-ball, and free words.
//!
//! Layout convention, used everywhere in the crate: an operator on `X ⊗ ℂⁿ`
//! is stored as an `n × n` grid of `dim X`-sized blocks, `X` being the fast
//! index. The operator `Σ_j T_j ⊗ Z_j` therefore has `(p, q)` block
//! `Σ_j (Z_j)_{pq} · T_j`, which is `Σ_j kron(Z_j, T_j)`. Block-permutation
//! differences between formulas written as `T ⊗ Z` and `X ⊗ A` are all
//! absorbed into this one convention.

use std::cmp::Ordering;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    identity, max_abs, numerical_rank, op_norm, real, singular_values, solve, zeros, CMat, Tolerance,
};
use crate::random::gaussian_matrix;

/// A word in the free monoid on `d` letters. Letters are stored zero-based;
/// `Display` prints them one-based as `z1 z2 …`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FreeWord(pub Vec<usize>);

impl FreeWord {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Self(letters)
    }

    pub fn max_letter(&self) -> Option<usize> {
        self.0.iter().copied().max()
    }
}

/// Graded lexicographic: shorter words first, then letter by letter.
impl Ord for FreeWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for FreeWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self.0.iter().map(|l| format!("z{}", l + 1)).collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// All words of length `≤ max_len` over `d` letters, graded lexicographic.
pub fn words_up_to(d: usize, max_len: usize) -> Vec<FreeWord> {
    let mut out = vec![FreeWord::empty()];
    let mut layer = vec![FreeWord::empty()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * d);
        for w in &layer {
            for letter in 0..d {
                let mut letters = w.0.clone();
                letters.push(letter);
                next.push(FreeWord(letters));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Product `T_{i₁} ⋯ T_{i_k}` along the word; identity for the empty word.
pub fn word_apply(ops: &[CMat], w: &FreeWord) -> CMat {
    let n = ops.first().map_or(0, |t| t.nrows());
    w.0.iter().fold(identity(n), |acc, &letter| acc * &ops[letter])
}

/// A point `Z = (Z_1, …, Z_d)` of `d` square matrices of equal size.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTuple {
    coords: Vec<CMat>,
}

impl MatrixTuple {
    pub fn new(coords: Vec<CMat>) -> Result<Self> {
        let first = coords
            .first()
            .ok_or_else(|| Error::InvalidInput("a matrix tuple needs d >= 1".into()))?;
        let n = first.nrows();
        if coords.iter().any(|z| z.nrows() != n || z.ncols() != n) {
            return Err(Error::DimensionMismatch(
                "tuple coordinates must be square of one common size".into(),
            ));
        }
        Ok(Self { coords })
    }

    pub fn zero(d: usize, n: usize) -> Self {
        Self {
            coords: vec![zeros(n, n); d.max(1)],
        }
    }

    /// Scalar point (level 1).
    pub fn scalars(values: &[crate::numerics::C64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| CMat::from_element(1, 1, v)).collect())
    }

    pub fn d(&self) -> usize {
        self.coords.len()
    }

    pub fn n(&self) -> usize {
        self.coords[0].nrows()
    }

    pub fn coords(&self) -> &[CMat] {
        &self.coords
    }

    pub fn coord(&self, j: usize) -> &CMat {
        &self.coords[j]
    }

    /// The `n × n·d` block row `[Z_1 ⋯ Z_d]`.
    pub fn block_row(&self) -> CMat {
        crate::numerics::hstack(&self.coords)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            coords: self.coords.iter().map(|z| z * real(factor)).collect(),
        }
    }

    pub fn adjoint_coords(&self) -> Vec<CMat> {
        self.coords.iter().map(|z| z.adjoint()).collect()
    }
}

/// Largest singular value of the block row `[Z_1 ⋯ Z_d]`.
pub fn row_norm(z: &MatrixTuple) -> f64 {
    op_norm(&z.block_row())
}

pub fn in_row_ball(z: &MatrixTuple, margin: f64) -> bool {
    row_norm(z) < 1.0 - margin
}

/// Coordinate-wise block-diagonal sum.
pub fn direct_sum(z: &MatrixTuple, w: &MatrixTuple) -> Result<MatrixTuple> {
    if z.d() != w.d() {
        return Err(Error::DimensionMismatch(format!(
            "direct sum of tuples with d={} and d={}",
            z.d(),
            w.d()
        )));
    }
    let (n, m) = (z.n(), w.n());
    let coords = z
        .coords
        .iter()
        .zip(&w.coords)
        .map(|(a, b)| {
            let mut out = zeros(n + m, n + m);
            out.view_mut((0, 0), (n, n)).copy_from(a);
            out.view_mut((n, n), (m, m)).copy_from(b);
            out
        })
        .collect();
    MatrixTuple::new(coords)
}

/// Joint similarity `Z_j ↦ S⁻¹ Z_j S`, together with the condition number of `S`.
pub fn conjugate(z: &MatrixTuple, s: &CMat, tol: &Tolerance) -> Result<(MatrixTuple, f64)> {
    if s.nrows() != z.n() || s.ncols() != z.n() {
        return Err(Error::DimensionMismatch(format!(
            "similarity of size {}x{} for a level-{} tuple",
            s.nrows(),
            s.ncols(),
            z.n()
        )));
    }
    let sv = singular_values(s);
    let condition = match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    };
    if numerical_rank(&sv, tol) < z.n() {
        return Err(Error::SingularSimilarity { condition });
    }
    let coords = z
        .coords
        .iter()
        .map(|zj| solve(s, &(zj * s)).ok_or(Error::SingularSimilarity { condition }))
        .collect::<Result<Vec<_>>>()?;
    Ok((MatrixTuple::new(coords)?, condition))
}

/// Seeded complex-Gaussian tuple rescaled to row norm exactly `radius`.
pub fn sample_ball_point(d: usize, n: usize, radius: f64, seed: u64) -> Result<MatrixTuple> {
    if !(0.0..1.0).contains(&radius) || d == 0 || n == 0 {
        return Err(Error::InvalidInput(format!(
            "need d, n >= 1 and radius in [0, 1), got d={d}, n={n}, radius={radius}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = MatrixTuple::new((0..d).map(|_| gaussian_matrix(&mut rng, n, n)).collect())?;
    let norm = row_norm(&z);
    if radius == 0.0 || norm == 0.0 {
        return Ok(MatrixTuple::zero(d, n));
    }
    Ok(z.scaled(radius / norm))
}

/// `Σ_j kron(Z_j, T_j)`, i.e. the operator written `Σ_j T_j ⊗ Z_j`.
pub fn tensor_sum(z: &[CMat], ops: &[CMat]) -> CMat {
    let rows = z[0].nrows() * ops[0].nrows();
    let cols = z[0].ncols() * ops[0].ncols();
    z.iter()
        .zip(ops)
        .fold(zeros(rows, cols), |acc, (zj, tj)| acc + zj.kronecker(tj))
}

/// The map `I_H ⊗ Z : H ⊗ ℂᵈ ⊗ ℂⁿ → H ⊗ ℂⁿ`, `h_j ⊗ v ↦ h_j ⊗ Z_j v`.
///
/// The domain is laid out as `n` blocks of `H ⊗ ℂᵈ` (itself `d` blocks of `H`).
pub fn coefficient_row(z: &MatrixTuple, h_dim: usize) -> CMat {
    let (n, d) = (z.n(), z.d());
    let mut out = zeros(h_dim * n, h_dim * d * n);
    for (j, zj) in z.coords.iter().enumerate() {
        for r in 0..n {
            for p in 0..n {
                let coef = zj[(r, p)];
                if coef == crate::numerics::C64::default() {
                    continue;
                }
                for h in 0..h_dim {
                    out[(r * h_dim + h, p * h_dim * d + j * h_dim + h)] = coef;
                }
            }
        }
    }
    out
}

/// Checks approximate equality of two tuples coordinate-wise.
pub fn tuple_distance(a: &MatrixTuple, b: &MatrixTuple) -> f64 {
    a.coords
        .iter()
        .zip(&b.coords)
        .map(|(x, y)| max_abs(&(x - y)))
        .fold(0.0, f64::max)
}
