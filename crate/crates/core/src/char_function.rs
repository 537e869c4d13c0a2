//! Characteristic functions of row contractions.
//!
//! The canonical model of a row partial isometry `V` gives `B_V = D_V⁻¹ N_V`;
//! a general CNC row contraction `T = V + C` is handled through its defect
//! point `δ_T` and the operator Möbius map. Popescu's `Θ_T`, Frostman shifts,
//! supports and the weak-coincidence fit live here too.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nc_space::{coefficient_row, tensor_sum, MatrixTuple};
use crate::numerics::{
    amp, block, condition_number, fit_unitary, hermitian_eigen, hstack, identity, inverse, lift, max_abs, op_norm,
    polar_unitary, psd_sqrt, solve, spectral_split, svd, zeros, CMat, Tolerance, C64,
};
use crate::random::gaussian_matrix;
use crate::row_contraction::{
    canonical_frames, defect_frames, defect_point, defects, CanonicalModelFrames, RowContraction,
};

pub type Evaluator = Arc<dyn Fn(&MatrixTuple) -> Result<CMat> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    CharFn,
    Popescu,
    Transfer,
    Frostman,
    MoebiusComposite,
    Literal,
}

/// An NC Schur-class function `B : 𝔹ᵈ → L(J, K)` given by its evaluator.
///
/// At level `n` the value is a `(dim K · n) × (dim J · n)` matrix in the
/// crate's block layout.
#[derive(Clone)]
pub struct SchurSampler {
    d: usize,
    input_dim: usize,
    output_dim: usize,
    provenance: Provenance,
    evaluator: Evaluator,
}

impl fmt::Debug for SchurSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchurSampler")
            .field("d", &self.d)
            .field("input_dim", &self.input_dim)
            .field("output_dim", &self.output_dim)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl SchurSampler {
    pub fn new<F>(d: usize, input_dim: usize, output_dim: usize, provenance: Provenance, f: F) -> Self
    where
        F: Fn(&MatrixTuple) -> Result<CMat> + Send + Sync + 'static,
    {
        Self {
            d,
            input_dim,
            output_dim,
            provenance,
            evaluator: Arc::new(f),
        }
    }

    pub fn literal<F>(d: usize, input_dim: usize, output_dim: usize, f: F) -> Self
    where
        F: Fn(&MatrixTuple) -> Result<CMat> + Send + Sync + 'static,
    {
        Self::new(d, input_dim, output_dim, Provenance::Literal, f)
    }

    /// The constant function `Z ↦ value ⊗ I_n`.
    pub fn constant(d: usize, value: CMat) -> Self {
        let (rows, cols) = value.shape();
        Self::literal(d, cols, rows, move |z| Ok(lift(&value, z.n())))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn eval(&self, z: &MatrixTuple) -> Result<CMat> {
        if z.d() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "point has d = {}, function expects d = {}",
                z.d(),
                self.d
            )));
        }
        let value = (self.evaluator)(z)?;
        let expected = (self.output_dim * z.n(), self.input_dim * z.n());
        if value.shape() != expected {
            return Err(Error::DimensionMismatch(format!(
                "evaluator returned {:?}, expected {:?}",
                value.shape(),
                expected
            )));
        }
        Ok(value)
    }

    /// `B(0)` at level one.
    pub fn at_zero(&self) -> Result<CMat> {
        self.eval(&MatrixTuple::zero(self.d, 1))
    }

    /// `Z ↦ (L ⊗ I_n) B(Z) (R ⊗ I_n)` for constant `L`, `R`.
    pub fn sandwich(&self, left: CMat, right: CMat, provenance: Provenance) -> Result<Self> {
        if left.ncols() != self.output_dim || right.nrows() != self.input_dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot sandwich a {}x{} function between {:?} and {:?}",
                self.output_dim,
                self.input_dim,
                left.shape(),
                right.shape()
            )));
        }
        let inner = self.clone();
        let (out, inp) = (left.nrows(), right.ncols());
        Ok(Self::new(self.d, inp, out, provenance, move |z| {
            let n = z.n();
            Ok(lift(&left, n) * inner.eval(z)? * lift(&right, n))
        }))
    }
}

/// `Γ_V(Z) = (I − Σ_j V_j ⊗ Z_j*)⁻¹ (γ(0) ⊗ I_n)`, an `m·n × p·n` matrix.
pub fn model_gamma(v: &RowContraction, frames: &CanonicalModelFrames, z: &MatrixTuple) -> Result<CMat> {
    let n = z.n();
    let m = v.m();
    let pencil = identity(m * n) - tensor_sum(&z.adjoint_coords(), &v.ops());
    solve(&pencil, &lift(&frames.gamma0, n)).ok_or_else(|| Error::SingularPencil {
        condition: condition_number(&pencil),
    })
}

/// The canonical NC model of a row partial isometry.
#[derive(Debug, Clone)]
pub struct CanonicalModel {
    v: RowContraction,
    frames: CanonicalModelFrames,
}

impl CanonicalModel {
    pub fn new(v: RowContraction, tol: &Tolerance) -> Result<Self> {
        let frames = canonical_frames(&v, tol)?;
        Ok(Self { v, frames })
    }

    pub fn frames(&self) -> &CanonicalModelFrames {
        &self.frames
    }

    pub fn v(&self) -> &RowContraction {
        &self.v
    }

    pub fn gamma(&self, z: &MatrixTuple) -> Result<CMat> {
        model_gamma(&self.v, &self.frames, z)
    }

    /// `D_V(Z) = Γ_V(Z)* (γ(0) ⊗ I_n)`.
    pub fn denominator(&self, z: &MatrixTuple) -> Result<CMat> {
        Ok(self.gamma(z)?.adjoint() * lift(&self.frames.gamma0, z.n()))
    }

    /// `N_V(Z) = Γ_V(Z)* (I_H ⊗ Z) (γ(∞) ⊗ I_n)`.
    pub fn numerator(&self, z: &MatrixTuple) -> Result<CMat> {
        let n = z.n();
        Ok(self.gamma(z)?.adjoint() * coefficient_row(z, self.v.m()) * lift(&self.frames.gamma_inf, n))
    }

    /// `B_V(Z) = D_V(Z)⁻¹ N_V(Z)`.
    pub fn eval(&self, z: &MatrixTuple) -> Result<CMat> {
        let gamma = self.gamma(z)?;
        let n = z.n();
        let denominator = gamma.adjoint() * lift(&self.frames.gamma0, n);
        let numerator = gamma.adjoint() * coefficient_row(z, self.v.m()) * lift(&self.frames.gamma_inf, n);
        if denominator.nrows() == 0 {
            return Ok(numerator);
        }
        let condition = condition_number(&denominator);
        if condition > 1e12 {
            return Err(Error::DenominatorSingular { condition });
        }
        solve(&denominator, &numerator).ok_or(Error::DenominatorSingular { condition })
    }

    /// Both sides of the kernel identity
    /// `D(Z){K[P]⊗I − B(Z)(K[P]⊗I)B(W)*}D(W)* = Γ(Z)*(I_H⊗P)Γ(W)`.
    pub fn kernel_sides(&self, z: &MatrixTuple, w: &MatrixTuple, p: &CMat) -> Result<(CMat, CMat)> {
        let k = crate::kernels::szego_kernel(z, w, p)?;
        let (bz, bw) = (self.eval(z)?, self.eval(w)?);
        let (dz, dw) = (self.denominator(z)?, self.denominator(w)?);
        let (p_dim, q_dim) = (self.frames.p(), self.frames.q());
        let middle = k.kronecker(&identity(p_dim)) - bz * k.kronecker(&identity(q_dim)) * bw.adjoint();
        let lhs = dz * middle * dw.adjoint();
        let rhs = self.gamma(z)?.adjoint() * p.kronecker(&identity(self.v.m())) * self.gamma(w)?;
        Ok((lhs, rhs))
    }

    pub fn sampler(&self) -> SchurSampler {
        let model = self.clone();
        SchurSampler::new(
            self.v.d(),
            self.frames.q(),
            self.frames.p(),
            Provenance::CharFn,
            move |z| model.eval(z),
        )
    }
}

/// `B_V` for a row partial isometry.
pub fn char_fn_partial_isometry(v: &RowContraction, tol: &Tolerance) -> Result<SchurSampler> {
    Ok(CanonicalModel::new(v.clone(), tol)?.sampler())
}

/// `D_α`, `D_α⁻¹`, `D_{α*}`, `D_{α*}⁻¹` for a strict contraction `α`.
struct StrictDefects {
    d_a: CMat,
    d_a_inv: CMat,
    d_as: CMat,
    d_as_inv: CMat,
}

fn strict_defects(alpha: &CMat) -> Result<StrictDefects> {
    let norm = op_norm(alpha);
    if norm >= 1.0 - 1e-12 {
        return Err(Error::NotStrict { norm });
    }
    // strictness keeps both Gram matrices well inside the PSD cone
    let tol = Tolerance::default();
    let (p, q) = alpha.shape();
    let d_a = psd_sqrt(&(identity(q) - alpha.adjoint() * alpha), &tol)?;
    let d_as = psd_sqrt(&(identity(p) - alpha * alpha.adjoint()), &tol)?;
    let singular = || Error::NotStrict { norm };
    Ok(StrictDefects {
        d_a_inv: inverse(&d_a).ok_or_else(singular)?,
        d_as_inv: inverse(&d_as).ok_or_else(singular)?,
        d_a,
        d_as,
    })
}

/// Level `ℓ` of a `pℓ × qℓ` argument for a `p × q` parameter.
fn level(alpha: &CMat, zeta: &CMat) -> Result<usize> {
    let (p, q) = alpha.shape();
    let (r, c) = zeta.shape();
    let l = r.checked_div(p).or_else(|| c.checked_div(q)).unwrap_or(0);
    if r != p * l || c != q * l {
        return Err(Error::DimensionMismatch(format!(
            "argument {:?} is not a level-l amplification of a {p}x{q} parameter",
            zeta.shape()
        )));
    }
    Ok(l)
}

fn inverse_or_pencil(a: &CMat) -> Result<CMat> {
    inverse(a).ok_or_else(|| Error::SingularPencil {
        condition: condition_number(a),
    })
}

/// `Ξ_α(β) = (D_{α*} ⊗ I)(I − β(α* ⊗ I))⁻¹`.
pub fn xi_map(alpha: &CMat, beta: &CMat) -> Result<CMat> {
    let l = level(alpha, beta)?;
    let s = strict_defects(alpha)?;
    let resolvent = inverse_or_pencil(&(identity(beta.nrows()) - beta * lift(&alpha.adjoint(), l)))?;
    Ok(lift(&s.d_as, l) * resolvent)
}

/// `Θ_α(β) = (β − α ⊗ I)(D_α⁻¹ ⊗ I)`.
pub fn theta_map(alpha: &CMat, beta: &CMat) -> Result<CMat> {
    let l = level(alpha, beta)?;
    let s = strict_defects(alpha)?;
    Ok((beta - lift(alpha, l)) * lift(&s.d_a_inv, l))
}

/// `Φ_α(ζ) = D_{α*}(I − ζα*)⁻¹(ζ − α)D_α⁻¹`, amplified to the level of `ζ`.
pub fn moebius(alpha: &CMat, zeta: &CMat) -> Result<CMat> {
    Ok(xi_map(alpha, zeta)? * theta_map(alpha, zeta)?)
}

/// `Φ_α⁻¹(ζ) = D_{α*}⁻¹(ζ + α)(I + α*ζ)⁻¹D_α`.
pub fn moebius_inv(alpha: &CMat, zeta: &CMat) -> Result<CMat> {
    let l = level(alpha, zeta)?;
    let s = strict_defects(alpha)?;
    let resolvent = inverse_or_pencil(&(identity(zeta.ncols()) + lift(&alpha.adjoint(), l) * zeta))?;
    Ok(lift(&s.d_as_inv, l) * (zeta + lift(alpha, l)) * resolvent * lift(&s.d_a, l))
}

/// Both sides of
/// `I⊗A − Φ_α(β)(I⊗A)Φ_α(γ)* = Ξ_α(β)[I⊗A − β(I⊗A)γ*]Ξ_α(γ)*`
/// for `β` at level `ℓ`, `γ` at level `ℓ'` and `A` of size `ℓ × ℓ'`.
pub fn adjunction_sides(alpha: &CMat, beta: &CMat, gamma: &CMat, a: &CMat) -> Result<(CMat, CMat)> {
    let (p, q) = alpha.shape();
    let (ampl_out, ampl_in) = (amp(a, p), amp(a, q));
    let lhs = &ampl_out - moebius(alpha, beta)? * &ampl_in * moebius(alpha, gamma)?.adjoint();
    let rhs = xi_map(alpha, beta)? * (&ampl_out - beta * &ampl_in * gamma.adjoint()) * xi_map(alpha, gamma)?.adjoint();
    Ok((lhs, rhs))
}

/// `B^⟨α⟩ = Φ_α⁻¹ ∘ Φ_{B(0)} ∘ B`, the Frostman shift with `B^⟨α⟩(0) = α`.
pub fn frostman_shift(b: &SchurSampler, alpha: &CMat) -> Result<SchurSampler> {
    let b0 = b.at_zero()?;
    if alpha.shape() != b0.shape() {
        return Err(Error::DimensionMismatch(format!(
            "shift parameter {:?} does not match B(0) {:?}",
            alpha.shape(),
            b0.shape()
        )));
    }
    strict_defects(&b0)?;
    strict_defects(alpha)?;
    let inner = b.clone();
    let alpha = alpha.clone();
    Ok(SchurSampler::new(
        b.d(),
        b.input_dim(),
        b.output_dim(),
        Provenance::Frostman,
        move |z| moebius_inv(&alpha, &moebius(&b0, &inner.eval(z)?)?),
    ))
}

/// `B_T = Φ_{δ_T}⁻¹ ∘ B_V` for the isometric part `V` and defect point `δ_T`.
pub fn char_fn(t: &RowContraction, tol: &Tolerance) -> Result<SchurSampler> {
    let dp = defect_point(t, tol)?;
    let model = CanonicalModel {
        v: dp.parts.v.clone(),
        frames: dp.frames.clone(),
    };
    let delta = dp.delta;
    strict_defects(&delta)?;
    Ok(SchurSampler::new(
        t.d(),
        model.frames.q(),
        model.frames.p(),
        Provenance::CharFn,
        move |z| moebius_inv(&delta, &model.eval(z)?),
    ))
}

/// Popescu's `Θ_T(Z) = −T ⊗ I + (D_{T*} ⊗ I)(I − Σ T_j* ⊗ Z_j)⁻¹(I ⊗ Z)(D_T ⊗ I)`,
/// restricted to `Ran D_T` and compressed to `Ran D_{T*}`.
pub fn popescu_char(t: &RowContraction, tol: &Tolerance) -> Result<SchurSampler> {
    let defects = defects(t, tol)?;
    let (in_frame, out_frame) = defect_frames(t, tol);
    let t = t.clone();
    let (inp, out) = (in_frame.ncols(), out_frame.ncols());
    Ok(SchurSampler::new(t.d(), inp, out, Provenance::Popescu, move |z| {
        let n = z.n();
        let m = t.m();
        let pencil = identity(m * n) - tensor_sum(z.coords(), &t.adjoint_ops());
        let rhs = coefficient_row(z, m) * lift(&(&defects.d_t * &in_frame), n);
        let state = solve(&pencil, &rhs).ok_or_else(|| Error::SingularPencil {
            condition: condition_number(&pencil),
        })?;
        let head = out_frame.adjoint();
        Ok(lift(&(&head * &defects.d_tstar), n) * state - lift(&(head * t.row() * &in_frame), n))
    }))
}

/// Orthonormal frame of the numerical range with an absolute floor, so that
/// rounding noise of an identically vanishing function is not mistaken for
/// a direction.
fn floored_range(a: &CMat, tol: &Tolerance) -> CMat {
    let dec = svd(a);
    let top = dec.s.first().copied().unwrap_or(0.0);
    let cutoff = (tol.rank_rel * top).max(tol.eq_abs);
    let rank = dec.s.iter().take_while(|&&s| s > cutoff).count();
    let mut q = dec.u.columns(0, rank).into_owned();
    crate::numerics::fix_column_phases(&mut q);
    q
}

#[derive(Debug, Clone)]
pub struct SupportFrames {
    /// Columns spanning the support of `B*` in `J`.
    pub input: CMat,
    /// Columns spanning the support of `B` in `K`.
    pub output: CMat,
    /// Whether both ranks were unchanged over the last two enlargements.
    pub stabilized: bool,
}

/// Sampled supports: the span of all `p × q` blocks of `B(Z)` (output side)
/// and of their adjoints (input side).
pub fn support_frames(b: &SchurSampler, points: &[MatrixTuple], tol: &Tolerance) -> Result<SupportFrames> {
    let (out, inp) = (b.output_dim(), b.input_dim());
    let mut output = zeros(out, 0);
    let mut input = zeros(inp, 0);
    let mut history = Vec::with_capacity(points.len());
    for z in points {
        let value = b.eval(z)?;
        let n = z.n();
        let mut outs = vec![output.clone()];
        let mut ins = vec![input.clone()];
        for r in 0..n {
            for c in 0..n {
                let blk = block(&value, r, c, out, inp);
                ins.push(blk.adjoint());
                outs.push(blk);
            }
        }
        output = floored_range(&hstack(&outs), tol);
        input = floored_range(&hstack(&ins), tol);
        history.push((output.ncols(), input.ncols()));
    }
    let stabilized = history.len() >= 3 && history[history.len() - 3..].windows(2).all(|w| w[0] == w[1]);
    Ok(SupportFrames {
        input,
        output,
        stabilized,
    })
}

#[derive(Debug, Clone)]
pub struct CoincidenceFit {
    pub u_out: CMat,
    pub u_in: CMat,
    pub residual: f64,
    pub verdict: bool,
    pub sweeps: usize,
    pub support_dims: [(usize, usize); 2],
}

fn split_blocks(a: &CMat, rb: usize, cb: usize) -> Vec<CMat> {
    if rb == 0 || cb == 0 {
        return Vec::new();
    }
    let (r, c) = (a.nrows() / rb, a.ncols() / cb);
    (0..r)
        .flat_map(|i| (0..c).map(move |j| (i, j)))
        .map(|(i, j)| block(a, i, j, rb, cb))
        .collect()
}

/// Initial unitaries from the near-null space of `(X, Y) ↦ {(X⊗I)B₁ − B₂(Y⊗I)}`.
///
/// A seeded generic combination of the null vectors is taken so that a
/// degenerate commutant still yields invertible `X`, `Y` before the polar step.
fn coincidence_init(pairs: &[(CMat, CMat)], po: usize, qi: usize) -> (CMat, CMat) {
    let unknowns = po * po + qi * qi;
    let mut gram = zeros(unknowns, unknowns);
    for (b1, b2) in pairs {
        let n = b1.nrows() / po;
        let mut columns = Vec::with_capacity(unknowns);
        for k in 0..po * po {
            let mut e = zeros(po, po);
            e[(k % po, k / po)] = C64::new(1.0, 0.0);
            let image = lift(&e, n) * b1;
            columns.push(CMat::from_column_slice(image.len(), 1, image.as_slice()));
        }
        for k in 0..qi * qi {
            let mut e = zeros(qi, qi);
            e[(k % qi, k / qi)] = C64::new(1.0, 0.0);
            let image = -(b2 * lift(&e, n));
            columns.push(CMat::from_column_slice(image.len(), 1, image.as_slice()));
        }
        let m = hstack(&columns);
        gram += m.adjoint() * m;
    }
    let (values, vectors) = hermitian_eigen(&gram);
    let top = values.last().copied().unwrap_or(0.0).max(1.0);
    let nullity = values.iter().take_while(|&&v| v <= 1e-12 * top).count().max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let weights = gaussian_matrix(&mut rng, nullity, 1);
    let combo = vectors.columns(0, nullity) * weights;
    let x = CMat::from_column_slice(po, po, &combo.as_slice()[..po * po]);
    let y = CMat::from_column_slice(qi, qi, &combo.as_slice()[po * po..]);
    (polar_unitary(&x), polar_unitary(&y))
}

/// Fits constant unitaries with `(U_out ⊗ I) B₁(Z) = B₂(Z) (U_in ⊗ I)` on the
/// supports, then reports the largest holdout residual.
pub fn weak_coincidence_fit(
    b1: &SchurSampler,
    b2: &SchurSampler,
    fit_points: &[MatrixTuple],
    holdout_points: &[MatrixTuple],
    verdict_tol: f64,
    tol: &Tolerance,
) -> Result<CoincidenceFit> {
    let all: Vec<MatrixTuple> = fit_points.iter().chain(holdout_points).cloned().collect();
    let s1 = support_frames(b1, &all, tol)?;
    let s2 = support_frames(b2, &all, tol)?;
    let dims1 = (s1.output.ncols(), s1.input.ncols());
    let dims2 = (s2.output.ncols(), s2.input.ncols());
    if dims1 != dims2 || b1.d() != b2.d() {
        return Ok(CoincidenceFit {
            u_out: zeros(0, 0),
            u_in: zeros(0, 0),
            residual: f64::INFINITY,
            verdict: false,
            sweeps: 0,
            support_dims: [dims1, dims2],
        });
    }
    let r1 = b1.sandwich(s1.output.adjoint(), s1.input.clone(), b1.provenance())?;
    let r2 = b2.sandwich(s2.output.adjoint(), s2.input.clone(), b2.provenance())?;
    let (po, qi) = dims1;
    let samples = |pts: &[MatrixTuple]| -> Result<Vec<(CMat, CMat)>> {
        pts.iter().map(|z| Ok((r1.eval(z)?, r2.eval(z)?))).collect()
    };
    let fit = samples(fit_points)?;
    let holdout = samples(holdout_points)?;

    let (mut u_out, mut u_in) = (identity(po), identity(qi));
    let mut sweeps = 0;
    if po > 0 && qi > 0 && !fit.is_empty() {
        (u_out, u_in) = coincidence_init(&fit, po, qi);
        let mut previous = f64::INFINITY;
        while sweeps < 50 {
            sweeps += 1;
            let pairs_out: Vec<(CMat, CMat)> = fit
                .iter()
                .flat_map(|(a, b)| {
                    let n = a.nrows() / po;
                    let target = b * lift(&u_in, n);
                    split_blocks(a, po, qi).into_iter().zip(split_blocks(&target, po, qi))
                })
                .collect();
            u_out = fit_unitary(&pairs_out)?.0;
            let pairs_in: Vec<(CMat, CMat)> = fit
                .iter()
                .flat_map(|(a, b)| {
                    let n = a.nrows() / po;
                    let target = (lift(&u_out, n) * a).adjoint();
                    split_blocks(&b.adjoint(), qi, po)
                        .into_iter()
                        .zip(split_blocks(&target, qi, po))
                })
                .collect();
            let (w, objective) = fit_unitary(&pairs_in)?;
            u_in = w.adjoint();
            if (previous - objective).abs() <= 1e-12 {
                break;
            }
            previous = objective;
        }
    }
    let residual = holdout
        .iter()
        .map(|(a, b)| {
            let n = a.nrows().checked_div(po).unwrap_or(0);
            op_norm(&(lift(&u_out, n) * a - b * lift(&u_in, n)))
        })
        .fold(0.0, f64::max);
    Ok(CoincidenceFit {
        u_out,
        u_in,
        residual,
        verdict: residual <= verdict_tol,
        sweeps,
        support_dims: [dims1, dims2],
    })
}

#[derive(Debug, Clone)]
pub struct PureUnitarySplit {
    pub pure_in: CMat,
    pub unitary_in: CMat,
    pub pure_out: CMat,
    pub unitary_out: CMat,
    pub constancy_deviation: f64,
}

/// Splits off the subspace on which `B(0)` is isometric; `B` must be constant
/// there, which is checked at the sample points.
pub fn pure_unitary_split(b: &SchurSampler, points: &[MatrixTuple], tol: &Tolerance) -> Result<PureUnitarySplit> {
    let b0 = b.at_zero()?;
    let cutoff = 1.0 - 100.0 * tol.eq_abs;
    let (unitary_in, pure_in) = spectral_split(&(b0.adjoint() * &b0), cutoff);
    let (unitary_out, pure_out) = spectral_split(&(&b0 * b0.adjoint()), cutoff);
    let mut deviation: f64 = 0.0;
    for z in points {
        let n = z.n();
        let value = b.eval(z)?;
        let right = &value * lift(&unitary_in, n) - lift(&(&b0 * &unitary_in), n);
        let left = lift(&unitary_out.adjoint(), n) * &value - lift(&(unitary_out.adjoint() * &b0), n);
        deviation = deviation.max(max_abs(&right)).max(max_abs(&left));
    }
    if deviation > 1e-9 {
        return Err(Error::ConstancyViolated { deviation });
    }
    Ok(PureUnitarySplit {
        pure_in,
        unitary_in,
        pure_out,
        unitary_out,
        constancy_deviation: deviation,
    })
}
