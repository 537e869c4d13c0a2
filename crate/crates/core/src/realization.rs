//! Fornasini–Marchesini colligations and their transfer functions
//!
//! `B(X) = I_n ⊗ D̂ + (I_n ⊗ Ĉ)(I − Σ_j X_j ⊗ Â_j)⁻¹ Σ_j X_j ⊗ B̂_j`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::nc_space::{tensor_sum, words_up_to, FreeWord, MatrixTuple};
use crate::numerics::{
    block, condition_number, hstack, identity, lift, max_abs, op_norm, solve, vstack, CMat, Tolerance,
};
use crate::row_contraction::invariant_span;

/// `Â : S → S ⊗ ℂᵈ`, `B̂ : J → S ⊗ ℂᵈ`, `Ĉ : S → K`, `D̂ : J → K`.
///
/// `Â` and `B̂` are stored as columns of `d` blocks, block `j` being `Â_j`
/// (resp. `B̂_j`).
#[derive(Debug, Clone, PartialEq)]
pub struct Colligation {
    d: usize,
    a_hat: CMat,
    b_hat: CMat,
    c_hat: CMat,
    d_hat: CMat,
}

impl Colligation {
    pub fn new(d: usize, a_hat: CMat, b_hat: CMat, c_hat: CMat, d_hat: CMat) -> Result<Self> {
        let s = a_hat.ncols();
        let ok = d > 0
            && a_hat.nrows() == s * d
            && b_hat.nrows() == s * d
            && c_hat.ncols() == s
            && d_hat.nrows() == c_hat.nrows()
            && d_hat.ncols() == b_hat.ncols();
        if !ok {
            return Err(Error::DimensionMismatch(format!(
                "colligation blocks A {:?}, B {:?}, C {:?}, D {:?} are inconsistent for d = {d}",
                a_hat.shape(),
                b_hat.shape(),
                c_hat.shape(),
                d_hat.shape()
            )));
        }
        Ok(Self {
            d,
            a_hat,
            b_hat,
            c_hat,
            d_hat,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn state_dim(&self) -> usize {
        self.a_hat.ncols()
    }

    pub fn input_dim(&self) -> usize {
        self.d_hat.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.d_hat.nrows()
    }

    pub fn a(&self, j: usize) -> CMat {
        let s = self.state_dim();
        block(&self.a_hat, j, 0, s, s)
    }

    pub fn b(&self, j: usize) -> CMat {
        block(&self.b_hat, j, 0, self.state_dim(), self.input_dim())
    }

    pub fn c(&self) -> &CMat {
        &self.c_hat
    }

    pub fn d_hat(&self) -> &CMat {
        &self.d_hat
    }

    pub fn a_ops(&self) -> Vec<CMat> {
        (0..self.d).map(|j| self.a(j)).collect()
    }

    pub fn b_ops(&self) -> Vec<CMat> {
        (0..self.d).map(|j| self.b(j)).collect()
    }

    /// `[[Â, B̂], [Ĉ, D̂]] : S ⊕ J → (S ⊗ ℂᵈ) ⊕ K`.
    pub fn block_matrix(&self) -> CMat {
        vstack(&[
            hstack(&[self.a_hat.clone(), self.b_hat.clone()]),
            hstack(&[self.c_hat.clone(), self.d_hat.clone()]),
        ])
    }

    pub fn is_contractive(&self, tol: &Tolerance) -> bool {
        op_norm(&self.block_matrix()) <= 1.0 + tol.eq_abs
    }

    /// `max(‖M*M − I‖, ‖MM* − I‖)` for the block matrix `M`.
    pub fn unitarity_residual(&self) -> f64 {
        let m = self.block_matrix();
        let left = max_abs(&(m.adjoint() * &m - identity(m.ncols())));
        let right = max_abs(&(&m * m.adjoint() - identity(m.nrows())));
        left.max(right)
    }

    pub fn is_coisometric(&self, tol: &Tolerance) -> bool {
        let m = self.block_matrix();
        max_abs(&(&m * m.adjoint() - identity(m.nrows()))) <= 10.0 * tol.eq_abs
    }

    /// Whether `⋁_ω Â^{*ω} Ran Ĉ*` is the whole state space.
    pub fn is_observable(&self, tol: &Tolerance) -> bool {
        let adjoints: Vec<CMat> = self.a_ops().iter().map(|a| a.adjoint()).collect();
        let (span, _) = invariant_span(&self.c_hat.adjoint(), &adjoints, tol);
        span.ncols() == self.state_dim()
    }
}

/// Evaluates the realization formula at `X`.
pub fn transfer_eval(c: &Colligation, x: &MatrixTuple) -> Result<CMat> {
    if x.d() != c.d() {
        return Err(Error::DimensionMismatch(format!(
            "point has d = {}, colligation has d = {}",
            x.d(),
            c.d()
        )));
    }
    let n = x.n();
    let s = c.state_dim();
    let constant = lift(&c.d_hat, n);
    if s == 0 {
        return Ok(constant);
    }
    let pencil = identity(n * s) - tensor_sum(x.coords(), &c.a_ops());
    let input = tensor_sum(x.coords(), &c.b_ops());
    let state = solve(&pencil, &input).ok_or_else(|| Error::SingularPencil {
        condition: condition_number(&pencil),
    })?;
    Ok(constant + lift(&c.c_hat, n) * state)
}

/// Coefficient `B̂_w` of `X^w` in `B(X) = Σ_w X^w ⊗ B̂_w`.
///
/// For `w = i₁⋯i_k j` this is `Ĉ Â_{i₁}⋯Â_{i_k} B̂_j`; the empty word gives `D̂`.
pub fn taylor_coeff(c: &Colligation, w: &FreeWord) -> CMat {
    let letters = w.letters();
    match letters.split_last() {
        None => c.d_hat.clone(),
        Some((&last, prefix)) => {
            let mut acc = c.c_hat.clone();
            for &i in prefix {
                acc *= c.a(i);
            }
            acc * c.b(last)
        }
    }
}

/// All coefficients of words of length at most `max_len`, built prefix by
/// prefix so each `Ĉ Â^u` is formed once.
pub fn taylor_coeffs(c: &Colligation, max_len: usize) -> BTreeMap<FreeWord, CMat> {
    let mut out = BTreeMap::new();
    out.insert(FreeWord::empty(), c.d_hat.clone());
    let a_ops = c.a_ops();
    let b_ops = c.b_ops();
    // prefixes u of length L with Ĉ Â^u
    let mut layer: Vec<(Vec<usize>, CMat)> = vec![(Vec::new(), c.c_hat.clone())];
    for len in 1..=max_len {
        for (u, cu) in &layer {
            for (j, bj) in b_ops.iter().enumerate() {
                let mut w = u.clone();
                w.push(j);
                out.insert(FreeWord(w), cu * bj);
            }
        }
        if len == max_len {
            break;
        }
        layer = layer
            .iter()
            .flat_map(|(u, cu)| {
                a_ops.iter().enumerate().map(move |(i, ai)| {
                    let mut next = u.clone();
                    next.push(i);
                    (next, cu * ai)
                })
            })
            .collect();
    }
    out
}

/// `Σ_w X^w ⊗ B̂_w` over the given coefficients.
pub fn reassemble(coeffs: &BTreeMap<FreeWord, CMat>, x: &MatrixTuple) -> CMat {
    let (rows, cols) = coeffs.values().next().map_or((0, 0), |b| (b.nrows(), b.ncols()));
    let n = x.n();
    let mut out = crate::numerics::zeros(rows * n, cols * n);
    for (w, b) in coeffs {
        out += crate::nc_space::word_apply(x.coords(), w).kronecker(b);
    }
    out
}

/// Bound on `‖B(X) − Σ_{|w|≤L} X^w ⊗ B̂_w‖` for a contractive colligation at
/// a point of row norm `r < 1`.
pub fn taylor_tail_bound(r: f64, max_len: usize) -> f64 {
    r.powi(max_len as i32 + 1) / (1.0 - r)
}

/// Words of length at most `max_len` over `d` letters with their coefficients.
pub fn coefficient_table(c: &Colligation, max_len: usize) -> Vec<(FreeWord, CMat)> {
    let coeffs = taylor_coeffs(c, max_len);
    words_up_to(c.d(), max_len)
        .into_iter()
        .map(|w| {
            let b = coeffs[&w].clone();
            (w, b)
        })
        .collect()
}
