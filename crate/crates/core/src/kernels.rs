//! NC Szegő kernel, de Branges–Rovnyak kernels and the Choi-matrix
//! positivity test.

use crate::char_function::SchurSampler;
use crate::error::{Error, Result};
use crate::nc_space::{row_norm, MatrixTuple};
use crate::numerics::{condition_number, hermitian_part, identity, min_eigenvalue, op_norm, solve, zeros, CMat};

const NEAR_BOUNDARY: f64 = 1e-6;
const CP_THRESHOLD: f64 = -1e-9;

fn check_pair(z: &MatrixTuple, w: &MatrixTuple, p: &CMat) -> Result<()> {
    if z.d() != w.d() || p.shape() != (z.n(), w.n()) {
        return Err(Error::DimensionMismatch(format!(
            "Z (d={}, n={}), W (d={}, n={}) and P {:?} are incompatible",
            z.d(),
            z.n(),
            w.d(),
            w.n(),
            p.shape()
        )));
    }
    Ok(())
}

/// `Ad_{Z,W*}(P) = Σ_j Z_j P W_j*`.
pub fn ad_map(z: &MatrixTuple, w: &MatrixTuple, p: &CMat) -> Result<CMat> {
    check_pair(z, w, p)?;
    Ok(z.coords()
        .iter()
        .zip(w.coords())
        .fold(zeros(z.n(), w.n()), |acc, (zj, wj)| acc + zj * p * wj.adjoint()))
}

/// `K(Z,W)[P] = Σ_ω Z^ω P W^{ω*}`, the solution of `K − Ad_{Z,W*}(K) = P`.
///
/// Column-major vectorization turns `Z_j K W_j*` into `(W̄_j ⊗ Z_j) vec K`,
/// so the kernel is one dense solve of size `n·n'`.
pub fn szego_kernel(z: &MatrixTuple, w: &MatrixTuple, p: &CMat) -> Result<CMat> {
    check_pair(z, w, p)?;
    let (rz, rw) = (row_norm(z), row_norm(w));
    if rz >= 1.0 - NEAR_BOUNDARY || rw >= 1.0 - NEAR_BOUNDARY {
        log::warn!("Szegő kernel evaluated near the boundary (row norms {rz:.9}, {rw:.9})");
    }
    let (n, k) = (z.n(), w.n());
    let mut system = identity(n * k);
    for (zj, wj) in z.coords().iter().zip(w.coords()) {
        system -= wj.map(|x| x.conj()).kronecker(zj);
    }
    let rhs = CMat::from_column_slice(n * k, 1, p.as_slice());
    let vec_k = solve(&system, &rhs).ok_or_else(|| Error::SingularPencil {
        condition: condition_number(&system),
    })?;
    Ok(CMat::from_column_slice(n, k, vec_k.as_slice()))
}

/// Partial sum `Σ_{ℓ≤L} Ad^{∘ℓ}(P)`.
pub fn szego_series(z: &MatrixTuple, w: &MatrixTuple, p: &CMat, max_len: usize) -> Result<CMat> {
    check_pair(z, w, p)?;
    let mut term = p.clone();
    let mut sum = p.clone();
    for _ in 0..max_len {
        term = ad_map(z, w, &term)?;
        sum += &term;
    }
    Ok(sum)
}

/// `‖P‖·(r_Z r_W)^{L+1} / (1 − r_Z r_W)`, bounding the error of [`szego_series`].
pub fn szego_tail_bound(z: &MatrixTuple, w: &MatrixTuple, p: &CMat, max_len: usize) -> f64 {
    let r = row_norm(z) * row_norm(w);
    op_norm(p) * r.powi(max_len as i32 + 1) / (1.0 - r)
}

/// `K(Z,W)[P] ⊗ I_K − B(Z) (K(Z,W)[P] ⊗ I_J) B(W)*`.
pub fn dbr_kernel(b: &SchurSampler, z: &MatrixTuple, w: &MatrixTuple, p: &CMat) -> Result<CMat> {
    let k = szego_kernel(z, w, p)?;
    let bz = b.eval(z)?;
    let bw = b.eval(w)?;
    let id_out = identity(b.output_dim());
    let id_in = identity(b.input_dim());
    Ok(k.kronecker(&id_out) - bz * k.kronecker(&id_in) * bw.adjoint())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpReport {
    pub min_eig: f64,
    pub psd: bool,
}

/// Minimal eigenvalue of the Choi matrix `[K^B(Z,Z)[E_pq]]_{p,q}`.
pub fn cp_check(b: &SchurSampler, z: &MatrixTuple) -> Result<CpReport> {
    let n = z.n();
    let bz = b.eval(z)?;
    let (out, inp) = (b.output_dim(), b.input_dim());
    let side = n * out * n;
    let mut choi = zeros(side, side);
    for p in 0..n {
        for q in 0..n {
            let mut unit = zeros(n, n);
            unit[(p, q)] = crate::numerics::real(1.0);
            let k = szego_kernel(z, z, &unit)?;
            let value = k.kronecker(&identity(out)) - &bz * k.kronecker(&identity(inp)) * bz.adjoint();
            let size = n * out;
            choi.view_mut((p * size, q * size), (size, size)).copy_from(&value);
        }
    }
    let min_eig = min_eigenvalue(&hermitian_part(&choi));
    Ok(CpReport {
        min_eig,
        psd: min_eig >= CP_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nc_space::{direct_sum, sample_ball_point};
    use crate::numerics::{c, max_abs, real, vstack};
    use crate::random::gaussian_matrix;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar(v: f64) -> MatrixTuple {
        MatrixTuple::scalars(&[real(v)]).unwrap()
    }

    #[test]
    fn ad_map_examples() {
        let z = MatrixTuple::zero(2, 2);
        let p = CMat::from_element(2, 2, real(1.0));
        assert_eq!(ad_map(&z, &z, &p).unwrap(), zeros(2, 2));
        let a = MatrixTuple::scalars(&[c(0.3, 0.2)]).unwrap();
        let b = MatrixTuple::scalars(&[c(-0.1, 0.5)]).unwrap();
        let v = ad_map(&a, &b, &identity(1)).unwrap();
        assert!((v[(0, 0)] - c(0.3, 0.2) * c(-0.1, 0.5).conj()).norm() < 1e-16);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let z = sample_ball_point(3, 2, 0.5, 1).unwrap();
        let w = sample_ball_point(3, 3, 0.5, 2).unwrap();
        let p = gaussian_matrix(&mut rng, 2, 3);
        let got = ad_map(&z, &w, &p).unwrap();
        let mut naive = zeros(2, 3);
        for j in 0..3 {
            for r in 0..2 {
                for s in 0..3 {
                    for a in 0..2 {
                        for b in 0..3 {
                            naive[(r, s)] += z.coord(j)[(r, a)] * p[(a, b)] * w.coord(j)[(s, b)].conj();
                        }
                    }
                }
            }
        }
        assert!(max_abs(&(got - naive)) < 1e-14);
    }

    #[test]
    fn szego_examples() {
        let z = MatrixTuple::zero(2, 2);
        let p = CMat::from_fn(2, 2, |i, j| c(i as f64, j as f64));
        assert_eq!(szego_kernel(&z, &z, &p).unwrap(), p);
        let half = scalar(0.5);
        let k = szego_kernel(&half, &half, &identity(1)).unwrap();
        assert!((k[(0, 0)].re - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(szego_series(&half, &half, &identity(1), 0).unwrap(), identity(1));
        let s1 = szego_series(&half, &half, &identity(1), 1).unwrap();
        assert!((s1[(0, 0)].re - 1.25).abs() < 1e-15);
    }

    #[test]
    fn dbr_examples() {
        let half = scalar(0.5);
        let b = SchurSampler::literal(1, 1, 1, |z| Ok(z.coord(0).clone()));
        let k = dbr_kernel(&b, &half, &half, &identity(1)).unwrap();
        assert!((k[(0, 0)].re - 1.0).abs() < 1e-15);

        let zero = SchurSampler::constant(1, zeros(2, 3));
        let z = sample_ball_point(1, 2, 0.6, 3).unwrap();
        let w = sample_ball_point(1, 2, 0.6, 4).unwrap();
        let p = identity(2);
        let k = dbr_kernel(&zero, &z, &w, &p).unwrap();
        assert!(max_abs(&(k - szego_kernel(&z, &w, &p).unwrap().kronecker(&identity(2)))) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = crate::random::random_unitary(&mut rng, 2);
        let unitary = SchurSampler::constant(2, u);
        let z0 = MatrixTuple::zero(2, 1);
        assert!(max_abs(&dbr_kernel(&unitary, &z0, &z0, &identity(1)).unwrap()) < 1e-14);
    }

    #[test]
    fn cp_examples() {
        let zero = SchurSampler::constant(2, zeros(1, 1));
        let z = sample_ball_point(2, 3, 0.8, 6).unwrap();
        assert!(cp_check(&zero, &z).unwrap().psd);

        let big = SchurSampler::constant(1, identity(1) * real(2.0));
        let r = cp_check(&big, &MatrixTuple::zero(1, 1)).unwrap();
        assert!((r.min_eig + 3.0).abs() < 1e-14);
        assert!(!r.psd);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn fixed_point_and_symmetry(seed in any::<u64>(), d in 1usize..4, n in 1usize..4, k in 1usize..4, r in 0.0f64..0.9) {
            let z = sample_ball_point(d, n, r, seed).unwrap();
            let w = sample_ball_point(d, k, r, seed.wrapping_add(1)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = gaussian_matrix(&mut rng, n, k);
            let kz = szego_kernel(&z, &w, &p).unwrap();
            prop_assert!(max_abs(&(&kz - &p - ad_map(&z, &w, &kz).unwrap())) < 1e-9);
            let kw = szego_kernel(&w, &z, &p.adjoint()).unwrap();
            prop_assert!(max_abs(&(kz.adjoint() - kw)) < 1e-10);
        }

        #[test]
        fn direct_sums_stack(seed in any::<u64>(), d in 1usize..3, n in 1usize..3, n2 in 1usize..3, k in 1usize..3) {
            let z = sample_ball_point(d, n, 0.6, seed).unwrap();
            let z2 = sample_ball_point(d, n2, 0.6, seed ^ 1).unwrap();
            let w = sample_ball_point(d, k, 0.6, seed ^ 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = gaussian_matrix(&mut rng, n, k);
            let p2 = gaussian_matrix(&mut rng, n2, k);
            let sum = direct_sum(&z, &z2).unwrap();
            let stacked = szego_kernel(&sum, &w, &vstack(&[p.clone(), p2.clone()])).unwrap();
            let expected = vstack(&[szego_kernel(&z, &w, &p).unwrap(), szego_kernel(&z2, &w, &p2).unwrap()]);
            prop_assert!(max_abs(&(stacked - expected)) < 1e-10);
        }

        #[test]
        fn series_within_tail(seed in any::<u64>(), d in 1usize..4, n in 1usize..4, len in 0usize..12) {
            let z = sample_ball_point(d, n, 0.5, seed).unwrap();
            let w = sample_ball_point(d, n, 0.5, seed ^ 9).unwrap();
            let p = identity(n);
            let err = op_norm(&(szego_kernel(&z, &w, &p).unwrap() - szego_series(&z, &w, &p, len).unwrap()));
            prop_assert!(err <= szego_tail_bound(&z, &w, &p, len) * (1.0 + 1e-9) + 1e-14);
        }
    }
}
