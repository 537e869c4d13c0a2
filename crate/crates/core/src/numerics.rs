//! Dense complex linear algebra with an explicit tolerance policy.
//!
//! Every operator of the model is materialized as a [`CMat`]. Operators on
//! `X ⊗ ℂⁿ` use the layout fixed in [`crate::nc_space`]: `n × n` blocks of
//! `dim X`-sized blocks, so `α ⊗ I_n` is [`lift`]`(α, n)` and `I_X ⊗ A` is
//! [`amp`]`(A, dim X)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Cutoffs used to decide rank and approximate equality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Singular values below `rank_rel · σ_max` count as zero.
    pub rank_rel: f64,
    /// Absolute tolerance for equalities such as Hermitian symmetry.
    pub eq_abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_rel: 1e-10,
            eq_abs: 1e-10,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rel: f64, eq_abs: f64) -> Result<Self> {
        let ok = |v: f64| v > 0.0 && v < 1e-3;
        if !ok(rank_rel) || !ok(eq_abs) {
            return Err(Error::InvalidInput(format!(
                "tolerances must lie in (0, 1e-3), got rank_rel={rank_rel}, eq_abs={eq_abs}"
            )));
        }
        Ok(Self { rank_rel, eq_abs })
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

/// Matrix from rows of real entries.
pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    CMat::from_fn(r, c, |i, j| real(rows[i][j]))
}

pub fn diag_real(values: &[f64]) -> CMat {
    let n = values.len();
    CMat::from_fn(n, n, |i, j| if i == j { real(values[i]) } else { C64::default() })
}

/// `α ⊗ I_n` in the fixed layout: block diagonal with `n` copies of `α`.
pub fn lift(a: &CMat, n: usize) -> CMat {
    identity(n).kronecker(a)
}

/// `I_k ⊗ A` in the fixed layout: every entry of `A` scales a `k × k` identity.
pub fn amp(a: &CMat, k: usize) -> CMat {
    a.kronecker(&identity(k))
}

/// Block `(i, j)` of a matrix partitioned into `rb × cb` blocks.
pub fn block(a: &CMat, i: usize, j: usize, rb: usize, cb: usize) -> CMat {
    a.view((i * rb, j * cb), (rb, cb)).into_owned()
}

/// Stacks the `d` matrices vertically.
pub fn vstack(blocks: &[CMat]) -> CMat {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(b);
        r += b.nrows();
    }
    out
}

/// Concatenates the matrices horizontally.
pub fn hstack(blocks: &[CMat]) -> CMat {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), (rows, b.ncols())).copy_from(b);
        c += b.ncols();
    }
    out
}

pub fn is_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest entry modulus; zero for empty matrices.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral norm.
pub fn op_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Singular values in descending order.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let s = to_faer(a)
        .singular_values()
        .expect("singular value iteration failed to converge");
    let mut s: Vec<f64> = s.into_iter().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

fn to_faer(a: &CMat) -> faer::Mat<C64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: faer::MatRef<'_, C64>) -> CMat {
    CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Thin singular value decomposition with descending singular values.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn svd(a: &CMat) -> Svd {
    let (r, c) = a.shape();
    if r.min(c) == 0 {
        return Svd {
            u: zeros(r, 0),
            s: Vec::new(),
            v: zeros(c, 0),
        };
    }
    let dec = to_faer(a)
        .thin_svd()
        .expect("singular value iteration failed to converge");
    let s: Vec<f64> = (0..r.min(c)).map(|k| dec.S()[k].re).collect();
    let u = from_faer(dec.U());
    let v = from_faer(dec.V());
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    Svd {
        u: CMat::from_fn(r, order.len(), |i, j| u[(i, order[j])]),
        s: order.iter().map(|&i| s[i]).collect(),
        v: CMat::from_fn(c, order.len(), |i, j| v[(i, order[j])]),
    }
}

/// Number of singular values above the relative cutoff.
pub fn numerical_rank(s: &[f64], tol: &Tolerance) -> usize {
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().take_while(|&&x| x > tol.rank_rel * top).count(),
        _ => 0,
    }
}

/// Ratio of extreme singular values; infinite for singular square matrices.
pub fn condition_number(a: &CMat) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * real(0.5)
}

/// Eigen-decomposition of `(A + A*)/2` with eigenvalues ascending.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = to_faer(&hermitian_part(a))
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigen-iteration failed to converge");
    let raw: Vec<f64> = (0..n).map(|k| eig.S()[k].re).collect();
    let vectors = from_faer(eig.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw[i].total_cmp(&raw[j]));
    let values = order.iter().map(|&i| raw[i]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    (values, vectors)
}

pub fn min_eigenvalue(a: &CMat) -> f64 {
    hermitian_eigen(a).0.first().copied().unwrap_or(0.0)
}

fn check_hermitian(a: &CMat, tol: &Tolerance) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let deviation = max_abs(&(a - a.adjoint()));
    if deviation > tol.eq_abs {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Hermitian square root of a positive semidefinite matrix.
///
/// Eigenvalues in `[-100·eq_abs, 0)` are rounding noise and get clamped.
pub fn psd_sqrt(a: &CMat, tol: &Tolerance) -> Result<CMat> {
    check_hermitian(a, tol)?;
    let (values, vectors) = hermitian_eigen(a);
    if let Some(&min_eig) = values.first() {
        if min_eig < -100.0 * tol.eq_abs {
            return Err(Error::NotPsd { min_eig });
        }
    }
    let roots: Vec<C64> = values.iter().map(|&v| real(v.max(0.0).sqrt())).collect();
    let scaled = CMat::from_fn(vectors.nrows(), vectors.ncols(), |i, j| vectors[(i, j)] * roots[j]);
    Ok(hermitian_part(&(scaled * vectors.adjoint())))
}

/// Splits `ℂⁿ` along the spectrum of a Hermitian matrix: orthonormal
/// eigenvector frames for eigenvalues above `cutoff` and for the rest.
///
/// Defect ranges are taken from `I − T*T` rather than its square root, so
/// rounding noise of order `ε` stays at `ε` instead of growing to `√ε`.
pub fn spectral_split(a: &CMat, cutoff: f64) -> (CMat, CMat) {
    let (values, vectors) = hermitian_eigen(a);
    let n = a.nrows();
    let below = values.iter().take_while(|&&v| v <= cutoff).count();
    let mut low = vectors.columns(0, below).into_owned();
    let mut high = CMat::from_fn(n, n - below, |i, j| vectors[(i, n - 1 - j)]);
    fix_column_phases(&mut low);
    fix_column_phases(&mut high);
    (high, low)
}

/// Moore–Penrose pseudo-inverse at the `rank_rel` cutoff.
pub fn pinv(a: &CMat, tol: &Tolerance) -> CMat {
    let dec = svd(a);
    let rank = numerical_rank(&dec.s, tol);
    let mut out = zeros(a.ncols(), a.nrows());
    for k in 0..rank {
        let v = dec.v.column(k);
        let u = dec.u.column(k);
        out += (v * u.adjoint()) * real(1.0 / dec.s[k]);
    }
    out
}

/// Rotates each column so that its first entry of non-negligible modulus is
/// real and positive.
pub fn fix_column_phases(q: &mut CMat) {
    for mut col in q.column_iter_mut() {
        let scale = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            continue;
        }
        if let Some(lead) = col.iter().copied().find(|z| z.norm() > 1e-8 * scale) {
            let phase = lead.conj() / lead.norm();
            col *= phase;
        }
    }
}

/// Orthonormal basis (as columns) of the numerical range of `a`.
pub fn orthonormal_range(a: &CMat, tol: &Tolerance) -> CMat {
    let dec = svd(a);
    let rank = numerical_rank(&dec.s, tol);
    let mut q = dec.u.columns(0, rank).into_owned();
    fix_column_phases(&mut q);
    q
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// (orthonormal) columns of `q` inside `ℂ^dim`.
pub fn orthogonal_complement(q: &CMat, dim: usize, tol: &Tolerance) -> CMat {
    if q.ncols() == 0 {
        return identity(dim);
    }
    let projector = identity(dim) - q * q.adjoint();
    let mut basis = orthonormal_range(&projector, &Tolerance { rank_rel: 0.5, ..*tol });
    fix_column_phases(&mut basis);
    basis
}

/// Orthonormal basis (as columns) of the numerical kernel of `a`.
pub fn orthonormal_kernel(a: &CMat, tol: &Tolerance) -> CMat {
    let row_space = orthonormal_range(&a.adjoint(), tol);
    orthogonal_complement(&row_space, a.ncols(), tol)
}

/// Solves `a · x = b` for square, invertible `a`.
pub fn solve(a: &CMat, b: &CMat) -> Option<CMat> {
    if a.nrows() == 0 {
        return Some(zeros(0, b.ncols()));
    }
    a.clone().lu().solve(b).filter(is_finite)
}

pub fn inverse(a: &CMat) -> Option<CMat> {
    solve(a, &identity(a.nrows()))
}

/// Unitary `U` minimising `Σ ‖U·Aᵢ − Bᵢ‖²_F` and the attained value.
pub fn fit_unitary(pairs: &[(CMat, CMat)]) -> Result<(CMat, f64)> {
    let (first_a, first_b) = pairs
        .first()
        .ok_or_else(|| Error::InvalidInput("fit_unitary needs at least one pair".into()))?;
    let dim = first_b.nrows();
    if first_a.nrows() != dim {
        return Err(Error::DimensionMismatch(format!(
            "unitary must be square: source has {} rows, target {}",
            first_a.nrows(),
            dim
        )));
    }
    let mut cross = zeros(dim, dim);
    for (a, b) in pairs {
        if a.shape() != first_a.shape() || b.shape() != first_b.shape() || a.ncols() != b.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "pair shapes {:?} / {:?} do not match {:?} / {:?}",
                a.shape(),
                b.shape(),
                first_a.shape(),
                first_b.shape()
            )));
        }
        cross += b * a.adjoint();
    }
    let dec = svd(&cross);
    let u = &dec.u * dec.v.adjoint();
    let residual = pairs.iter().map(|(a, b)| (&u * a - b).norm_squared()).sum();
    Ok((u, residual))
}

/// Closest unitary in Frobenius norm (polar factor).
pub fn polar_unitary(a: &CMat) -> CMat {
    let dec = svd(a);
    &dec.u * dec.v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::random::{gaussian_matrix, random_unitary};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        let s = psd_sqrt(&identity(3), &tol()).unwrap();
        assert!(max_abs(&(s - identity(3))) < 1e-14);
        let s = psd_sqrt(&diag_real(&[4.0, 0.0]), &tol()).unwrap();
        assert!(max_abs(&(s - diag_real(&[2.0, 0.0]))) < 1e-14);
    }

    #[test]
    fn sqrt_of_gram_matrix_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = gaussian_matrix(&mut rng, 5, 4);
        let a = &g * g.adjoint();
        let s = psd_sqrt(&a, &tol()).unwrap();
        // oracle: recompose from the eigendecomposition and compare squares
        assert!(max_abs(&(&s * &s - &a)) < 1e-10);
        assert!(max_abs(&(&s - s.adjoint())) < 1e-14);
    }

    #[test]
    fn sqrt_rejects_bad_inputs() {
        let a = from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(psd_sqrt(&a, &tol()), Err(Error::NotHermitian { .. })));
        let a = diag_real(&[1.0, -1.0]);
        assert!(matches!(psd_sqrt(&a, &tol()), Err(Error::NotPsd { .. })));
        // tiny negative eigenvalues are clamped
        let a = diag_real(&[1.0, -1e-11]);
        let s = psd_sqrt(&a, &tol()).unwrap();
        assert_eq!(s[(1, 1)], real(0.0));
    }

    #[test]
    fn pinv_cases() {
        let p = pinv(&diag_real(&[2.0, 0.0]), &tol());
        assert!(max_abs(&(p - diag_real(&[0.5, 0.0]))) < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(&mut rng, 4);
        assert!(max_abs(&(pinv(&u, &tol()) - u.adjoint())) < 1e-12);

        let a = gaussian_matrix(&mut rng, 4, 4);
        let direct = inverse(&a).unwrap();
        assert!(max_abs(&(pinv(&a, &tol()) - direct)) < 1e-10);
    }

    #[test]
    fn range_and_kernel_of_zero_and_rank_one() {
        let z = zeros(2, 3);
        assert_eq!(orthonormal_range(&z, &tol()).ncols(), 0);
        let k = orthonormal_kernel(&z, &tol());
        assert!(max_abs(&(k - identity(3))) < 1e-14);

        let u = CVec::from_vec(vec![c(1.0, 1.0), real(2.0), real(0.0)]);
        let v = CVec::from_vec(vec![real(1.0), c(0.0, -1.0)]);
        let a = &u * v.adjoint();
        let r = orthonormal_range(&a, &tol());
        assert_eq!(r.ncols(), 1);
        let expected = &u * real(1.0 / u.norm());
        // first entry of each basis column is real positive
        let phase = expected[0].conj() / expected[0].norm();
        let expected = CMat::from_column_slice(3, 1, (expected * phase).as_slice());
        assert!(max_abs(&(r.columns(0, 1).into_owned() - expected)) < 1e-12);
    }

    #[test]
    fn rank_three_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = gaussian_matrix(&mut rng, 5, 3) * gaussian_matrix(&mut rng, 3, 5);
        assert_eq!(orthonormal_range(&a, &tol()).ncols(), 3);
        assert_eq!(orthonormal_kernel(&a, &tol()).ncols(), 2);
    }

    #[test]
    fn procrustes_cases() {
        let (u, res) = fit_unitary(&[(identity(2), identity(2))]).unwrap();
        assert!(max_abs(&(u - identity(2))) < 1e-14 && res < 1e-24);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = random_unitary(&mut rng, 3);
        let pairs: Vec<_> = (0..3)
            .map(|_| {
                let a = gaussian_matrix(&mut rng, 3, 2);
                let b = &v * &a;
                (a, b)
            })
            .collect();
        let (u, res) = fit_unitary(&pairs).unwrap();
        assert!(max_abs(&(u - v)) < 1e-12 && res < 1e-12);

        // closed form: any unitary gives |u-1|^2 + |u+1|^2 = 4
        let one = identity(1);
        let (u, res) = fit_unitary(&[(one.clone(), one.clone()), (one.clone(), -one)]).unwrap();
        assert!((res - 4.0).abs() < 1e-12);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-12);

        let bad = fit_unitary(&[(identity(2), identity(3))]);
        assert!(matches!(bad, Err(Error::DimensionMismatch(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn sqrt_squares_back(seed in any::<u64>(), n in 1usize..6, k in 1usize..6) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let g = gaussian_matrix(&mut rng, n, k);
                let a = &g * g.adjoint();
                let s = psd_sqrt(&a, &tol()).unwrap();
                prop_assert!(max_abs(&(&s * &s - &a)) <= 10.0 * tol().eq_abs * (1.0 + max_abs(&a)));
            }

            #[test]
            fn moore_penrose_identities(seed in any::<u64>(), r in 1usize..6, c in 1usize..6, k in 1usize..4) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = gaussian_matrix(&mut rng, r, k) * gaussian_matrix(&mut rng, k, c);
                let p = pinv(&a, &tol());
                let eps = 10.0 * tol().eq_abs * (1.0 + max_abs(&a)).powi(2);
                prop_assert!(max_abs(&(&a * &p * &a - &a)) < eps);
                prop_assert!(max_abs(&(&p * &a * &p - &p)) < eps * (1.0 + max_abs(&p)).powi(2));
                let ap = &a * &p;
                let pa = &p * &a;
                prop_assert!(max_abs(&(&ap - ap.adjoint())) < eps);
                prop_assert!(max_abs(&(&pa - pa.adjoint())) < eps);
            }

            #[test]
            fn bases_are_orthonormal(seed in any::<u64>(), r in 1usize..7, c in 1usize..7, k in 0usize..4) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = gaussian_matrix(&mut rng, r, k) * gaussian_matrix(&mut rng, k, c);
                for q in [orthonormal_range(&a, &tol()), orthonormal_kernel(&a, &tol())] {
                    let gram = q.adjoint() * &q;
                    prop_assert!(max_abs(&(gram - identity(q.ncols()))) < tol().eq_abs);
                }
            }

            #[test]
            fn procrustes_is_unitary(seed in any::<u64>(), n in 1usize..5, pairs in 1usize..4) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let data: Vec<_> = (0..pairs)
                    .map(|_| (gaussian_matrix(&mut rng, n, 2), gaussian_matrix(&mut rng, n, 2)))
                    .collect();
                let (u, _) = fit_unitary(&data).unwrap();
                prop_assert!(max_abs(&(u.adjoint() * &u - identity(n))) < 1e-12);
            }
        }
    }
}
