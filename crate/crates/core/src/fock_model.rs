//! Truncated free Hardy space `ℍ²_d ⊗ 𝒦` up to word length `N`, the
//! operator-range space `𝓗(B)` of a truncated multiplier and a numerical
//! check of the de Branges–Rovnyak model of a CNC row contraction.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nc_space::{tensor_sum, words_up_to, FreeWord, MatrixTuple};
use crate::numerics::{
    fix_column_phases, hermitian_eigen, identity, max_abs, op_norm, psd_sqrt, real, solve, zeros, CMat, Tolerance,
};
use crate::random::gaussian_matrix;
use crate::realization::{taylor_coeffs, transfer_eval};
use crate::row_contraction::{cnc_rank, julia_matrix, RowContraction};

/// `span{𝔷^w : |w| ≤ N} ⊗ ℂ^coeff_dim`, word-major with the coefficient index fast.
#[derive(Debug, Clone)]
pub struct TruncatedFock {
    d: usize,
    max_len: usize,
    coeff_dim: usize,
    words: Vec<FreeWord>,
    index: HashMap<FreeWord, usize>,
}

impl TruncatedFock {
    pub fn new(d: usize, max_len: usize, coeff_dim: usize) -> Self {
        let words = words_up_to(d, max_len);
        let index = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        Self {
            d,
            max_len,
            coeff_dim,
            words,
            index,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_dim
    }

    pub fn words(&self) -> &[FreeWord] {
        &self.words
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn total_dim(&self) -> usize {
        self.coeff_dim * self.words.len()
    }

    pub fn position(&self, w: &FreeWord) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Same words, different coefficient space.
    pub fn with_coeff_dim(&self, coeff_dim: usize) -> Self {
        Self {
            coeff_dim,
            ..self.clone()
        }
    }

    /// `f(Z) = Σ_w Z^w ⊗ f_w` for a (multi-column) element `f` of the space.
    pub fn eval_series(&self, f: &CMat, z: &MatrixTuple) -> CMat {
        let k = self.coeff_dim;
        let powers = word_powers(z.coords(), &self.words);
        let mut out = zeros(k * z.n(), z.n() * f.ncols());
        for (i, w) in self.words.iter().enumerate() {
            let coefficient = f.rows(i * k, k).into_owned();
            out += powers[w].kronecker(&coefficient);
        }
        out
    }
}

/// `Z^w` for every word in the list, each built from its parent prefix.
fn word_powers(ops: &[CMat], words: &[FreeWord]) -> HashMap<FreeWord, CMat> {
    let n = ops[0].nrows();
    let mut out: HashMap<FreeWord, CMat> = HashMap::with_capacity(words.len());
    for w in words {
        let value = match w.letters().split_last() {
            None => identity(n),
            Some((&last, prefix)) => &out[&FreeWord(prefix.to_vec())] * &ops[last],
        };
        out.insert(w.clone(), value);
    }
    out
}

fn word_shift(f: &TruncatedFock, map: impl Fn(&FreeWord) -> FreeWord) -> CMat {
    let count = f.word_count();
    let mut s = zeros(count, count);
    for (col, v) in f.words.iter().enumerate() {
        if let Some(row) = f.position(&map(v)) {
            s[(row, col)] = real(1.0);
        }
    }
    s.kronecker(&identity(f.coeff_dim))
}

/// Left shifts `L_j : 𝔷^v ↦ 𝔷^{jv}` and right shifts `R_j : 𝔷^v ↦ 𝔷^{vj}`,
/// with words leaving the truncation sent to zero.
pub fn shifts(f: &TruncatedFock) -> (Vec<CMat>, Vec<CMat>) {
    let left = (0..f.d)
        .map(|j| word_shift(f, |v| FreeWord(vec![j]).concat(v)))
        .collect();
    let right = (0..f.d)
        .map(|j| word_shift(f, |v| v.concat(&FreeWord(vec![j]))))
        .collect();
    (left, right)
}

/// The permutation `𝔷^w ↦ 𝔷^{wᵗ}`.
pub fn transpose_unitary(f: &TruncatedFock) -> CMat {
    word_shift(f, FreeWord::transpose)
}

/// Truncation of `B(L)` with `B(L)(𝔷^v ⊗ h) = Σ_w 𝔷^{wv} ⊗ B̂_w h`.
pub fn mult_operator(coeffs: &BTreeMap<FreeWord, CMat>, input: &TruncatedFock) -> Result<CMat> {
    let (out_dim, in_dim) = coeffs
        .values()
        .next()
        .map(|b| b.shape())
        .ok_or_else(|| Error::InvalidInput("a multiplier needs at least one coefficient".into()))?;
    if in_dim != input.coeff_dim || coeffs.values().any(|b| b.shape() != (out_dim, in_dim)) {
        return Err(Error::DimensionMismatch(format!(
            "coefficients must all be {out_dim}x{in_dim} with input dimension {}",
            input.coeff_dim
        )));
    }
    let count = input.word_count();
    let mut out = zeros(out_dim * count, in_dim * count);
    for (col, v) in input.words.iter().enumerate() {
        for (w, b) in coeffs {
            if w.len() + v.len() > input.max_len {
                continue;
            }
            if let Some(row) = input.position(&w.concat(v)) {
                out.view_mut((row * out_dim, col * in_dim), (out_dim, in_dim))
                    .copy_from(b);
            }
        }
    }
    Ok(out)
}

/// `𝓗(B) = Ran W` with `W = √(I − B_N B_N*)`, carrying the operator-range
/// inner product `⟨Wx, Wy⟩ = ⟨x, P_{(Ker W)^⊥} y⟩`.
#[derive(Debug, Clone)]
pub struct DbrSpace {
    pub ambient: TruncatedFock,
    pub input: TruncatedFock,
    pub symbol: CMat,
    pub factor: CMat,
    /// Orthonormal eigenvectors of `I − B_N B_N*` spanning `Ran W`.
    pub range_frame: CMat,
    /// `W⁺`, the inverse of `W` on its range.
    pub factor_pinv: CMat,
}

impl DbrSpace {
    pub fn dim(&self) -> usize {
        self.range_frame.ncols()
    }

    /// `E = W Q`, an orthonormal basis of `𝓗(B)` for its own inner product.
    pub fn basis(&self) -> CMat {
        &self.factor * &self.range_frame
    }

    /// `𝓗(B)` Gram matrix of ambient vectors lying in `Ran W`.
    pub fn gram(&self, f: &CMat) -> CMat {
        let g = &self.factor_pinv * f;
        g.adjoint() * g
    }
}

pub fn dbr_space(symbol: &CMat, ambient: &TruncatedFock, input: &TruncatedFock, tol: &Tolerance) -> Result<DbrSpace> {
    if symbol.shape() != (ambient.total_dim(), input.total_dim()) {
        return Err(Error::DimensionMismatch(format!(
            "symbol {:?} does not map a {}-dimensional space into a {}-dimensional one",
            symbol.shape(),
            input.total_dim(),
            ambient.total_dim()
        )));
    }
    let gram = identity(ambient.total_dim()) - symbol * symbol.adjoint();
    // psd_sqrt rejects symbols that are not contractive
    psd_sqrt(&gram, tol)?;
    let (values, vectors) = hermitian_eigen(&gram);
    let kept: Vec<usize> = (0..values.len()).filter(|&k| values[k] > tol.rank_rel).collect();
    let total = ambient.total_dim();
    let mut frame = CMat::from_fn(total, kept.len(), |i, j| vectors[(i, kept[j])]);
    fix_column_phases(&mut frame);
    let scaled = |power: f64| {
        let mut acc = zeros(total, total);
        for (j, &k) in kept.iter().enumerate() {
            let q = frame.column(j);
            acc += (q * q.adjoint()) * real(values[k].powf(power));
        }
        acc
    };
    Ok(DbrSpace {
        ambient: ambient.clone(),
        input: input.clone(),
        symbol: symbol.clone(),
        factor: scaled(0.5),
        factor_pinv: scaled(-0.5),
        range_frame: frame,
    })
}

/// The extremal Gleason tuple `X` with `X_j* = (R_j* ⊗ I)|_{𝓗(B)}`, as
/// matrices in the basis [`DbrSpace::basis`].
pub fn gleason_extremal(space: &DbrSpace) -> Vec<CMat> {
    let (_, right) = shifts(&space.ambient);
    let basis = space.basis();
    let coords = space.range_frame.adjoint() * &space.factor_pinv;
    right
        .iter()
        .map(|r| (&coords * r.adjoint() * &basis).adjoint())
        .collect()
}

/// Coefficients of the Szegő kernel vector `K_{Z,y,u}`, characterised by
/// `⟨f, K_{Z,y,u}⟩ = ⟨f(Z)u, y⟩`: `K_w = Σ_p conj((Z^w u)_p) y_p`.
pub fn szego_vector(fock: &TruncatedFock, z: &MatrixTuple, y: &CMat, u: &CMat) -> CMat {
    let k = fock.coeff_dim;
    let n = z.n();
    let powers = word_powers(z.coords(), &fock.words);
    let mut out = zeros(fock.total_dim(), 1);
    for (i, w) in fock.words.iter().enumerate() {
        let a = &powers[w] * u;
        for p in 0..n {
            let weight = a[(p, 0)].conj();
            for r in 0..k {
                out[(i * k + r, 0)] += weight * y[(p * k + r, 0)];
            }
        }
    }
    out
}

/// `P_N K^B_{Z,g⊗x,u} = P_N K_{Z,y,u} − B_N P_N K_{Z,B(Z)*y,u}` with `y = g ⊗ x`.
///
/// `B(L)` is lower triangular in word length, so the truncation commutes
/// with it and the right-hand side has no truncation error.
pub fn kernel_vector(space: &DbrSpace, z: &MatrixTuple, b_z: &CMat, g: &CMat, x: &CMat, u: &CMat) -> CMat {
    let y = x.kronecker(g);
    let pulled = b_z.adjoint() * &y;
    szego_vector(&space.ambient, z, &y, u) - &space.symbol * szego_vector(&space.input, z, &pulled, u)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelReport {
    pub max_len: usize,
    pub ambient_dim: usize,
    pub space_dim: usize,
    /// `‖O*G⁺O − I‖`: how far the observability map is from an isometry into `𝓗(B)`.
    pub frame_residual: f64,
    /// `max_j ‖(R_j*⊗I)O − O T_j*‖`, nonzero only through the top word level.
    pub intertwine_residual: f64,
    /// Largest `‖O h − K^B‖` over the sampled kernel actions.
    pub kernel_identity_residual: f64,
    /// Largest `‖B̂_w‖` with `|w| = N`, the size of the first neglected layer.
    pub top_level_coefficient: f64,
}

/// Default truncation depth for `d` variables.
pub fn default_depth(d: usize) -> usize {
    match d {
        1 => 8,
        2 => 6,
        _ => 4,
    }
}

/// Builds the truncated model of `T` from its Julia colligation and measures
/// how well the observability map `(Oh)_w = Ĉ Â^w h` realises the unitary
/// equivalence between `T*` and the extremal Gleason tuple.
pub fn model_verify(
    t: &RowContraction,
    max_len: usize,
    samples: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<ModelReport> {
    let rank = cnc_rank(t, tol)?;
    if !rank.is_cnc {
        return Err(Error::NotCnc {
            dim: rank.dim,
            total: t.m(),
        });
    }
    let julia = julia_matrix(t, tol)?;
    let col = &julia.colligation;
    let (d, m) = (t.d(), t.m());
    let input = TruncatedFock::new(d, max_len, col.input_dim());
    let ambient = input.with_coeff_dim(col.output_dim());
    let coeffs = taylor_coeffs(col, max_len);
    let symbol = mult_operator(&coeffs, &input)?;
    let space = dbr_space(&symbol, &ambient, &input, tol)?;

    let k = col.output_dim();
    let a_ops = col.a_ops();
    let word_ops = word_powers(&a_ops, &ambient.words);
    let mut obs = zeros(ambient.total_dim(), m);
    for (i, w) in ambient.words.iter().enumerate() {
        obs.view_mut((i * k, 0), (k, m)).copy_from(&(col.c() * &word_ops[w]));
    }

    let g = space.factor_pinv.clone() * &obs;
    let frame_residual = max_abs(&(g.adjoint() * g - identity(m)));

    let (_, right) = shifts(&ambient);
    let intertwine_residual = right
        .iter()
        .zip(&a_ops)
        .map(|(r, a)| op_norm(&(r.adjoint() * &obs - &obs * a)))
        .fold(0.0, f64::max);

    let defects = crate::row_contraction::defects(t, tol)?;
    let (_, out_frame) = crate::row_contraction::defect_frames(t, tol);
    let lift_out = &defects.d_tstar * &out_frame;
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let mut kernel_identity_residual: f64 = 0.0;
    for s in 0..samples {
        let n = 1 + s % 2;
        let z = crate::nc_space::sample_ball_point(d, n, 0.5, seed.wrapping_add(s as u64))?;
        let b_z = transfer_eval(col, &z)?;
        let gv = gaussian_matrix(&mut rng, k, 1);
        let x = gaussian_matrix(&mut rng, n, 1);
        let u = gaussian_matrix(&mut rng, n, 1);
        let pencil = identity(m * n) - tensor_sum(&z.adjoint_coords(), &t.ops());
        let source = x.kronecker(&(&lift_out * &gv));
        let resolved = solve(&pencil, &source).ok_or(Error::SingularPencil {
            condition: crate::numerics::condition_number(&pencil),
        })?;
        let h = u.adjoint().kronecker(&identity(m)) * resolved;
        let lhs = &obs * h;
        let rhs = kernel_vector(&space, &z, &b_z, &gv, &x, &u);
        let scale = rhs.norm().max(1.0);
        kernel_identity_residual = kernel_identity_residual.max((lhs - rhs).norm() / scale);
    }

    let top_level_coefficient = coeffs
        .iter()
        .filter(|(w, _)| w.len() == max_len)
        .map(|(_, b)| op_norm(b))
        .fold(0.0, f64::max);

    Ok(ModelReport {
        max_len,
        ambient_dim: ambient.total_dim(),
        space_dim: space.dim(),
        frame_residual,
        intertwine_residual,
        kernel_identity_residual,
        top_level_coefficient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nc_space::sample_ball_point;
    use crate::numerics::{c, from_real_rows, singular_values};
    use crate::realization::Colligation;
    use crate::row_contraction::{jordan_block, scalar_row};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn scalar_poly(coeffs: &[(Vec<usize>, f64)]) -> BTreeMap<FreeWord, CMat> {
        coeffs
            .iter()
            .map(|(w, v)| (FreeWord(w.clone()), from_real_rows(&[&[*v]])))
            .collect()
    }

    #[test]
    fn word_counts() {
        assert_eq!(TruncatedFock::new(1, 5, 1).word_count(), 6);
        assert_eq!(TruncatedFock::new(2, 3, 1).word_count(), 15);
        assert_eq!(TruncatedFock::new(3, 2, 2).total_dim(), 26);
    }

    #[test]
    fn shift_examples() {
        let f = TruncatedFock::new(1, 2, 1);
        let (l, r) = shifts(&f);
        let lower = from_real_rows(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert_eq!(l[0], lower);
        assert_eq!(r[0], lower);

        let f = TruncatedFock::new(2, 3, 1);
        let (l, r) = shifts(&f);
        let mut vacuum = zeros(f.total_dim(), 1);
        vacuum[(0, 0)] = real(1.0);
        for j in 0..2 {
            let image = &l[j] * &vacuum;
            assert_eq!(image[(f.position(&FreeWord(vec![j])).unwrap(), 0)], real(1.0));
            assert_eq!(image.iter().filter(|z| z.norm() > 0.0).count(), 1);
        }
        let ut = transpose_unitary(&f);
        for k in 0..2 {
            assert_eq!(&ut * &l[k] * &ut, r[k]);
        }
    }

    #[test]
    fn multiplier_examples() {
        let f = TruncatedFock::new(2, 3, 2);
        let id = BTreeMap::from([(FreeWord::empty(), identity(2))]);
        assert_eq!(mult_operator(&id, &f).unwrap(), identity(f.total_dim()));
        let f1 = TruncatedFock::new(1, 4, 1);
        let (l, _) = shifts(&f1);
        assert_eq!(mult_operator(&scalar_poly(&[(vec![0], 1.0)]), &f1).unwrap(), l[0]);
    }

    #[test]
    fn multiplier_matches_transfer_at_left_shifts() {
        // the left shifts are jointly nilpotent, so B(L) is a finite sum
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = crate::row_contraction::random_cnc(&mut rng, 3, 2, 0.5, &tol()).unwrap();
        let julia = julia_matrix(&t, &tol()).unwrap();
        let col: &Colligation = &julia.colligation;
        let scalar = TruncatedFock::new(2, 3, 1);
        let (l, _) = shifts(&scalar);
        let at_shifts = transfer_eval(col, &MatrixTuple::new(l).unwrap()).unwrap();
        let input = scalar.with_coeff_dim(col.input_dim());
        let built = mult_operator(&taylor_coeffs(col, 3), &input).unwrap();
        assert!(max_abs(&(at_shifts - built)) < 1e-12);
    }

    #[test]
    fn dbr_examples() {
        let f = TruncatedFock::new(1, 4, 1);
        let zero = zeros(5, 5);
        let space = dbr_space(&zero, &f, &f, &tol()).unwrap();
        assert_eq!(space.dim(), 5);
        assert!(max_abs(&(space.gram(&identity(5)) - identity(5))) < 1e-14);

        let unitary = BTreeMap::from([(FreeWord::empty(), from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]))]);
        let f2 = TruncatedFock::new(1, 3, 2);
        let b = mult_operator(&unitary, &f2).unwrap();
        assert_eq!(dbr_space(&b, &f2, &f2, &tol()).unwrap().dim(), 0);

        let z2 = mult_operator(&scalar_poly(&[(vec![0, 0], 1.0)]), &f).unwrap();
        assert_eq!(dbr_space(&z2, &f, &f, &tol()).unwrap().dim(), 2);
    }

    #[test]
    fn gleason_examples() {
        let f = TruncatedFock::new(1, 4, 1);
        let space = dbr_space(&zeros(5, 5), &f, &f, &tol()).unwrap();
        let x = gleason_extremal(&space);
        let (_, r) = shifts(&f);
        let q = &space.range_frame;
        assert!(max_abs(&(q * &x[0] * q.adjoint() - &r[0])) < 1e-14);

        let z2 = mult_operator(&scalar_poly(&[(vec![0, 0], 1.0)]), &f).unwrap();
        let space = dbr_space(&z2, &f, &f, &tol()).unwrap();
        let x = gleason_extremal(&space);
        let jordan = jordan_block().op(0);
        let (sx, sj) = (singular_values(&x[0]), singular_values(&jordan));
        assert!(sx.iter().zip(&sj).all(|(a, b)| (a - b).abs() < 1e-8));
        for power in 1..=3 {
            let tx = x[0].pow(power).trace();
            assert!(tx.norm() < 1e-8);
        }
        let xx = &x[0] * x[0].adjoint();
        assert!(max_abs(&(&xx * &xx - &xx)) < 1e-8);

        // B(0) ≠ 0: the defect of X has rank equal to the coefficient dimension
        let half = mult_operator(&scalar_poly(&[(vec![], 0.5)]), &f).unwrap();
        let hx = gleason_extremal(&dbr_space(&half, &f, &f, &tol()).unwrap());
        let defect = identity(5) - &hx[0] * hx[0].adjoint();
        assert_eq!(singular_values(&defect).iter().filter(|s| **s > 1e-8).count(), 1);

        // f(Z) − f(0) = Σ_j (X_j* f)(Z) Z_j on the basis of 𝓗(B)
        let basis = space.basis();
        let z = sample_ball_point(1, 2, 0.6, 5).unwrap();
        let (_, r) = shifts(&f);
        for k in 0..basis.ncols() {
            let fk = basis.columns(k, 1).into_owned();
            let lhs = f.eval_series(&fk, &z) - f.eval_series(&fk, &MatrixTuple::zero(1, 2));
            let rhs = f.eval_series(&(r[0].adjoint() * &fk), &z) * z.coord(0);
            assert!(max_abs(&(lhs - rhs)) < 1e-12);
        }
    }

    #[test]
    fn kernel_vector_examples() {
        let f = TruncatedFock::new(2, 3, 1);
        let space = dbr_space(&zeros(f.total_dim(), f.total_dim()), &f, &f, &tol()).unwrap();
        let z0 = MatrixTuple::zero(2, 1);
        let one = identity(1);
        let k = kernel_vector(&space, &z0, &zeros(1, 1), &one, &one, &one);
        let mut vacuum = zeros(f.total_dim(), 1);
        vacuum[(0, 0)] = real(1.0);
        assert_eq!(k, vacuum);

        let z = sample_ball_point(2, 2, 0.5, 3).unwrap();
        let y = CMat::from_column_slice(2, 1, &[c(0.3, 0.1), c(-0.2, 0.4)]);
        let u = CMat::from_column_slice(2, 1, &[real(1.0), c(0.0, 1.0)]);
        let kv = szego_vector(&f, &z, &y, &u);
        // ⟨f, K⟩ = ⟨f(Z)u, y⟩ for every basis monomial
        for (i, _) in f.words().iter().enumerate() {
            let mut e = zeros(f.total_dim(), 1);
            e[(i, 0)] = real(1.0);
            let lhs = (kv.adjoint() * &e)[(0, 0)].conj();
            let rhs = (y.adjoint() * f.eval_series(&e, &z) * &u)[(0, 0)];
            assert!((lhs.conj() - rhs).norm() < 1e-14);
        }
    }

    #[test]
    fn model_examples() {
        let report = model_verify(&jordan_block(), 6, 4, 1, &tol()).unwrap();
        assert!(report.frame_residual < 1e-8, "{report:?}");
        assert!(report.intertwine_residual < 1e-8, "{report:?}");
        assert!(report.kernel_identity_residual < 1e-8, "{report:?}");

        let r4 = model_verify(&scalar_row(&[0.5]), 4, 3, 1, &tol()).unwrap();
        let r8 = model_verify(&scalar_row(&[0.5]), 8, 3, 1, &tol()).unwrap();
        assert!(r8.intertwine_residual < r4.intertwine_residual);
        assert!((r4.intertwine_residual - 3f64.sqrt() / 2.0 * 0.5f64.powi(5)).abs() < 1e-12);
        assert!(r4.frame_residual < 1e-8 && r4.kernel_identity_residual < 1e-8);

        assert!(matches!(
            model_verify(&scalar_row(&[1.0]), 4, 1, 1, &tol()),
            Err(Error::NotCnc { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn shift_relations(d in 1usize..4, n in 1usize..4) {
            let f = TruncatedFock::new(d, n, 1);
            let (l, r) = shifts(&f);
            let short: Vec<usize> = (0..f.word_count()).filter(|&i| f.words()[i].len() < n).collect();
            let shorter: Vec<usize> = (0..f.word_count()).filter(|&i| f.words()[i].len() + 1 < n).collect();
            for j in 0..d {
                for k in 0..d {
                    let g = l[j].adjoint() * &l[k];
                    for &a in &short {
                        for &b in &short {
                            let expected = if j == k && a == b { 1.0 } else { 0.0 };
                            prop_assert!((g[(a, b)].re - expected).abs() < 1e-15);
                        }
                    }
                    let comm = &l[j] * &r[k] - &r[k] * &l[j];
                    for &b in &shorter {
                        prop_assert!(comm.column(b).norm() < 1e-15);
                    }
                }
            }
        }

        #[test]
        fn random_models_are_consistent(seed in any::<u64>(), m in 1usize..4, d in 1usize..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = crate::row_contraction::random_cnc(&mut rng, m, d, 0.5, &tol()).unwrap();
            let report = model_verify(&t, 3, 2, seed, &tol()).unwrap();
            prop_assert!(report.kernel_identity_residual < 1e-8, "{:?}", report);
        }
    }
}
