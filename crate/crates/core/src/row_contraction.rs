//! Row contractions `T = [T_1 ⋯ T_d] : H ⊗ ℂᵈ → H`, their defect operators,
//! the isometric–pure decomposition, the CNC test, the defect point and the
//! Julia colligation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    block, hstack, identity, max_abs, op_norm, orthonormal_kernel, orthonormal_range, psd_sqrt, real, spectral_split,
    CMat, Tolerance,
};
use crate::random::{random_contraction, random_isometry};
use crate::realization::Colligation;

/// `d` operators on an `m`-dimensional space with `‖Σ T_j T_j*‖ ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RowContraction {
    d: usize,
    row: CMat,
}

impl RowContraction {
    pub fn new(ops: Vec<CMat>, tol: &Tolerance) -> Result<Self> {
        let t = Self::from_ops_unchecked(ops)?;
        let row_norm = op_norm(&t.row);
        if row_norm > 1.0 + tol.eq_abs {
            return Err(Error::NotContraction { row_norm });
        }
        Ok(t)
    }

    /// Builds the tuple without checking contractivity (fixtures, negative controls).
    pub fn from_ops_unchecked(ops: Vec<CMat>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidInput("a row contraction needs d >= 1".into()))?;
        let m = first.nrows();
        if ops.iter().any(|t| t.nrows() != m || t.ncols() != m) {
            return Err(Error::DimensionMismatch(
                "row contraction components must be square of one common size".into(),
            ));
        }
        Ok(Self {
            d: ops.len(),
            row: hstack(&ops),
        })
    }

    /// From the `m × m·d` block row.
    pub fn from_row(row: CMat, d: usize, tol: &Tolerance) -> Result<Self> {
        if d == 0 || row.ncols() != row.nrows() * d {
            return Err(Error::DimensionMismatch(format!(
                "block row of shape {:?} is not m x m*{d}",
                row.shape()
            )));
        }
        let m = row.nrows();
        Self::new((0..d).map(|j| block(&row, 0, j, m, m)).collect(), tol)
    }

    fn from_row_raw(row: CMat, d: usize) -> Self {
        Self { d, row }
    }

    pub fn m(&self) -> usize {
        self.row.nrows()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// The block row `[T_1 ⋯ T_d]`, an `m × m·d` matrix.
    pub fn row(&self) -> &CMat {
        &self.row
    }

    pub fn op(&self, j: usize) -> CMat {
        let m = self.m();
        block(&self.row, 0, j, m, m)
    }

    pub fn ops(&self) -> Vec<CMat> {
        (0..self.d).map(|j| self.op(j)).collect()
    }

    pub fn adjoint_ops(&self) -> Vec<CMat> {
        (0..self.d).map(|j| self.op(j).adjoint()).collect()
    }

    pub fn row_norm(&self) -> f64 {
        op_norm(&self.row)
    }

    /// `U T_j U*` for every component.
    pub fn conjugate_unitary(&self, u: &CMat) -> Self {
        let ops = self.ops().iter().map(|t| u * t * u.adjoint()).collect();
        Self::from_ops_unchecked(ops).expect("shapes preserved by conjugation")
    }
}

/// `D_T = √(I − T*T)` on `H ⊗ ℂᵈ` and `D_{T*} = √(I − TT*)` on `H`.
#[derive(Debug, Clone)]
pub struct Defects {
    pub d_t: CMat,
    pub d_tstar: CMat,
}

pub fn defects(t: &RowContraction, tol: &Tolerance) -> Result<Defects> {
    let (gram, gram_star) = defect_grams(t);
    Ok(Defects {
        d_t: psd_sqrt(&gram, tol)?,
        d_tstar: psd_sqrt(&gram_star, tol)?,
    })
}

/// `I − T*T` and `I − TT*`.
pub fn defect_grams(t: &RowContraction) -> (CMat, CMat) {
    let (m, d) = (t.m(), t.d());
    let row = t.row();
    (identity(m * d) - row.adjoint() * row, identity(m) - row * row.adjoint())
}

/// Orthonormal frames of `Ran D_T` and `Ran D_{T*}`.
///
/// An eigenvalue of `I − T*T` counts as zero below `rank_rel`.
pub fn defect_frames(t: &RowContraction, tol: &Tolerance) -> (CMat, CMat) {
    let (gram, gram_star) = defect_grams(t);
    (
        spectral_split(&gram, tol.rank_rel).0,
        spectral_split(&gram_star, tol.rank_rel).0,
    )
}

/// `T = V + C` with `V = T·P_{Ker D_T}` a row partial isometry and `C` pure.
#[derive(Debug, Clone)]
pub struct IsoPureParts {
    pub v: RowContraction,
    pub c: RowContraction,
    pub ker_d_t_projector: CMat,
}

pub fn iso_pure_decompose(t: &RowContraction, tol: &Tolerance) -> Result<IsoPureParts> {
    let (gram, _) = defect_grams(t);
    let kernel = spectral_split(&gram, tol.rank_rel).1;
    let projector = &kernel * kernel.adjoint();
    let v_row = t.row() * &projector;
    let c_row = t.row() - &v_row;
    let v = RowContraction::from_row_raw(v_row, t.d());
    partial_isometry_defect(&v, tol)?;
    Ok(IsoPureParts {
        v,
        c: RowContraction::from_row_raw(c_row, t.d()),
        ker_d_t_projector: projector,
    })
}

/// `‖(V*V)² − V*V‖`, failing above `100·eq_abs`.
pub fn partial_isometry_defect(v: &RowContraction, tol: &Tolerance) -> Result<f64> {
    let gram = v.row().adjoint() * v.row();
    let defect = max_abs(&(&gram * &gram - &gram));
    if defect > 100.0 * tol.eq_abs {
        return Err(Error::NotPartialIsometry { defect });
    }
    Ok(defect)
}

/// Smallest subspace containing `Ran seed` and invariant under every op.
///
/// Grows `S_{L+1} = S_L + Σ_j op_j S_L` until the dimension stops changing;
/// returns the orthonormal basis and the number of growth steps taken.
pub fn invariant_span(seed: &CMat, ops: &[CMat], tol: &Tolerance) -> (CMat, usize) {
    let mut basis = orthonormal_range(seed, tol);
    let mut steps = 0;
    loop {
        if basis.ncols() == 0 || basis.ncols() == basis.nrows() {
            return (basis, steps);
        }
        let mut parts = vec![basis.clone()];
        parts.extend(ops.iter().map(|op| op * &basis));
        let grown = orthonormal_range(&hstack(&parts), tol);
        if grown.ncols() == basis.ncols() {
            return (basis, steps);
        }
        basis = grown;
        steps += 1;
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CncRank {
    pub dim: usize,
    pub is_cnc: bool,
    pub stabilized_at: usize,
}

/// Dimension of `⋁_ω T^ω Ran D_{T*}`; `T` is CNC iff this is all of `H`.
pub fn cnc_rank(t: &RowContraction, tol: &Tolerance) -> Result<CncRank> {
    let (_, out_frame) = defect_frames(t, tol);
    let (basis, steps) = invariant_span(&out_frame, &t.ops(), tol);
    Ok(CncRank {
        dim: basis.ncols(),
        is_cnc: basis.ncols() == t.m(),
        stabilized_at: steps,
    })
}

/// Isometries onto `Ran V^⊥` (`gamma0`, `m × p`) and `Ker V` (`gamma_inf`, `md × q`).
#[derive(Debug, Clone)]
pub struct CanonicalModelFrames {
    pub gamma0: CMat,
    pub gamma_inf: CMat,
}

impl CanonicalModelFrames {
    pub fn p(&self) -> usize {
        self.gamma0.ncols()
    }

    pub fn q(&self) -> usize {
        self.gamma_inf.ncols()
    }
}

pub fn canonical_frames(v: &RowContraction, tol: &Tolerance) -> Result<CanonicalModelFrames> {
    partial_isometry_defect(v, tol)?;
    Ok(CanonicalModelFrames {
        gamma0: orthonormal_kernel(&v.row().adjoint(), tol),
        gamma_inf: orthonormal_kernel(v.row(), tol),
    })
}

/// The defect point `δ = −γ(0)* T γ(∞)` with the frames it was computed in.
#[derive(Debug, Clone)]
pub struct DefectPoint {
    pub delta: CMat,
    pub frames: CanonicalModelFrames,
    pub parts: IsoPureParts,
}

impl DefectPoint {
    /// `γ(0) δ γ(∞)*`, which does not depend on the choice of frames.
    pub fn ambient(&self) -> CMat {
        &self.frames.gamma0 * &self.delta * self.frames.gamma_inf.adjoint()
    }
}

pub fn defect_point(t: &RowContraction, tol: &Tolerance) -> Result<DefectPoint> {
    let parts = iso_pure_decompose(t, tol)?;
    let frames = canonical_frames(&parts.v, tol)?;
    let delta = -(frames.gamma0.adjoint() * t.row() * &frames.gamma_inf);
    Ok(DefectPoint { delta, frames, parts })
}

/// `T = V − γ(0) δ γ(∞)*`, the inverse of [`defect_point`] for strict `δ`.
///
/// The minus sign matches `δ_T = −γ(0)* T γ(∞)`, so the two maps compose to
/// the identity.
pub fn reconstruct(v: &RowContraction, delta: &CMat, tol: &Tolerance) -> Result<RowContraction> {
    let frames = canonical_frames(v, tol)?;
    reconstruct_in_frames(v, &frames, delta)
}

pub fn reconstruct_in_frames(
    v: &RowContraction,
    frames: &CanonicalModelFrames,
    delta: &CMat,
) -> Result<RowContraction> {
    if delta.shape() != (frames.p(), frames.q()) {
        return Err(Error::DimensionMismatch(format!(
            "defect point must be {}x{}, got {:?}",
            frames.p(),
            frames.q(),
            delta.shape()
        )));
    }
    let norm = op_norm(delta);
    if norm >= 1.0 {
        return Err(Error::NotPure { norm });
    }
    let row = v.row() - &frames.gamma0 * delta * frames.gamma_inf.adjoint();
    Ok(RowContraction::from_row_raw(row, v.d()))
}

/// Distance between `δ` and the defect point recovered from `reconstruct(V, δ)`,
/// compared through the frame-independent ambient operators.
pub fn roundtrip_residual(v: &RowContraction, delta: &CMat, tol: &Tolerance) -> Result<f64> {
    let frames = canonical_frames(v, tol)?;
    let t = reconstruct_in_frames(v, &frames, delta)?;
    let recovered = defect_point(&t, tol)?;
    let original = &frames.gamma0 * delta * frames.gamma_inf.adjoint();
    let iso_drift = max_abs(&(recovered.parts.v.row() - v.row()));
    Ok(max_abs(&(recovered.ambient() - original)).max(iso_drift))
}

/// Julia colligation `[[T*, D_T], [D_{T*}, −T]]` restricted to
/// `H ⊕ Ran D_T → (H ⊗ ℂᵈ) ⊕ Ran D_{T*}`, with the frames used for the
/// defect spaces.
#[derive(Debug, Clone)]
pub struct JuliaColligation {
    pub colligation: Colligation,
    pub in_frame: CMat,
    pub out_frame: CMat,
}

pub fn julia_matrix(t: &RowContraction, tol: &Tolerance) -> Result<JuliaColligation> {
    let defects = defects(t, tol)?;
    let (in_frame, out_frame) = defect_frames(t, tol);
    let colligation = Colligation::new(
        t.d(),
        t.row().adjoint(),
        &defects.d_t * &in_frame,
        out_frame.adjoint() * &defects.d_tstar,
        -(out_frame.adjoint() * t.row() * &in_frame),
    )?;
    Ok(JuliaColligation {
        colligation,
        in_frame,
        out_frame,
    })
}

/// Random row partial isometry of the given rank on `ℂ^m`.
pub fn random_partial_isometry<R: Rng + ?Sized>(rng: &mut R, m: usize, d: usize, rank: usize) -> RowContraction {
    let rank = rank.min(m);
    let left = random_isometry(rng, m, rank);
    let right = random_isometry(rng, m * d, rank);
    RowContraction::from_row_raw(left * right.adjoint(), d)
}

/// Random CNC row contraction `V − γ(0) δ γ(∞)*` built from a partial
/// isometry of rank `< m` and a defect point of norm `delta_norm < 1`.
pub fn random_cnc<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    d: usize,
    delta_norm: f64,
    tol: &Tolerance,
) -> Result<RowContraction> {
    for _ in 0..50 {
        let rank = if m > 1 { rng.random_range(1..m) } else { 0 };
        let v = random_partial_isometry(rng, m, d, rank);
        let frames = canonical_frames(&v, tol)?;
        let delta = random_contraction(rng, frames.p(), frames.q(), delta_norm);
        let t = reconstruct_in_frames(&v, &frames, &delta)?;
        if cnc_rank(&t, tol)?.is_cnc {
            return Ok(t);
        }
    }
    Err(Error::InvalidInput(format!("no CNC sample found for m={m}, d={d}")))
}

/// The nilpotent Jordan block `e₁ ↦ e₂` on `ℂ²` (`d = 1`).
pub fn jordan_block() -> RowContraction {
    let mut j = crate::numerics::zeros(2, 2);
    j[(1, 0)] = real(1.0);
    RowContraction::from_row_raw(j, 1)
}

/// Scalar row contraction `(t_1, …, t_d)` on `ℂ¹`.
pub fn scalar_row(values: &[f64]) -> RowContraction {
    let row = CMat::from_fn(1, values.len(), |_, j| real(values[j]));
    RowContraction::from_row_raw(row, values.len())
}
