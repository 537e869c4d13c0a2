use std::path::PathBuf;

use ncdbr::char_function::{char_fn, frostman_shift, popescu_char, weak_coincidence_fit};
use ncdbr::fock_model::{default_depth, model_verify, TruncatedFock};
use ncdbr::kernels::cp_check;
use ncdbr::nc_space::{row_norm, sample_ball_point, MatrixTuple};
use ncdbr::numerics::{max_abs, op_norm, zeros};
use ncdbr::poly::parse_poly;
use ncdbr::random::random_contraction;
use ncdbr::row_contraction::{canonical_frames, cnc_rank, partial_isometry_defect, roundtrip_residual, RowContraction};
use ncdbr::Tolerance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::report::Report;
use crate::tuple_file::{digest_bytes, matrix_entries, TupleFile};

/// Largest ambient dimension `m · #words` that model-verify accepts.
const MODEL_SIZE_LIMIT: usize = 5000;

/// Anything that makes a run impossible; reported with exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl From<ncdbr::Error> for InputError {
    fn from(e: ncdbr::Error) -> Self {
        Self(e.to_string())
    }
}

impl From<String> for InputError {
    fn from(e: String) -> Self {
        Self(e)
    }
}

type Outcome = Result<Report, InputError>;

#[derive(Debug, Clone)]
pub struct Settings {
    pub input: Option<PathBuf>,
    pub points: usize,
    pub radius: f64,
    pub seed: u64,
    pub max_len: Option<usize>,
    pub tol: f64,
}

impl Settings {
    pub fn validate(&self) -> Result<(), InputError> {
        if !(self.radius > 0.0 && self.radius < 1.0) {
            return Err(InputError(format!("--radius must lie in (0, 1), got {}", self.radius)));
        }
        if self.points == 0 {
            return Err(InputError("--points must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(InputError(format!("--tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    fn input_file(&self) -> Result<TupleFile, InputError> {
        let path = self
            .input
            .as_ref()
            .ok_or_else(|| InputError("--input is required".into()))?;
        Ok(TupleFile::read(path)?)
    }

    fn contraction(&self) -> Result<(RowContraction, String), InputError> {
        let file = self.input_file()?;
        let t = RowContraction::new(file.to_matrices(), &Tolerance::default())?;
        Ok((t, file.digest()))
    }

    /// The `k`-th sample point, cycling through levels `1..=max_level`.
    fn point(&self, d: usize, k: usize, max_level: usize) -> Result<MatrixTuple, InputError> {
        let seed = self.seed.wrapping_mul(1_000_003).wrapping_add(k as u64);
        Ok(sample_ball_point(d, 1 + k % max_level, self.radius, seed)?)
    }

    fn sample(&self, d: usize, count: usize, max_level: usize, offset: usize) -> Result<Vec<MatrixTuple>, InputError> {
        (0..count).map(|k| self.point(d, offset + k, max_level)).collect()
    }

    fn report(&self, command: &'static str, digest: Option<String>) -> Report {
        let mut report = Report::new(command, digest, self.seed);
        report
            .param("points", self.points)
            .param("radius", self.radius)
            .param("tol", self.tol);
        report
    }
}

fn numerics() -> Tolerance {
    Tolerance::default()
}

pub fn cnc_check(s: &Settings) -> Outcome {
    let (t, digest) = s.contraction()?;
    let rank = cnc_rank(&t, &numerics())?;
    let mut report = s.report("cnc-check", Some(digest));
    report
        .summarize("m", t.m())
        .summarize("d", t.d())
        .summarize("cnc", rank)
        .residual("row_norm", t.row_norm());
    Ok(report)
}

pub fn charfn(s: &Settings) -> Outcome {
    let (t, digest) = s.contraction()?;
    let b = char_fn(&t, &numerics())?;
    let mut report = s.report("charfn", Some(digest));
    report
        .summarize("input_dim", b.input_dim())
        .summarize("output_dim", b.output_dim())
        .summarize("value_at_zero", matrix_entries(&b.at_zero()?));
    let mut excess = f64::NEG_INFINITY;
    for z in s.sample(t.d(), s.points, 3, 0)? {
        let norm = op_norm(&b.eval(&z)?);
        excess = excess.max(norm - 1.0);
        report
            .points
            .push(json!({"level": z.n(), "row_norm": row_norm(&z), "norm": norm}));
    }
    report
        .residual("max_norm_excess", excess)
        .verdict("contractive", excess <= s.tol);
    Ok(report)
}

pub fn compare_popescu(s: &Settings) -> Outcome {
    let (t, digest) = s.contraction()?;
    let b = char_fn(&t, &numerics())?;
    let theta = popescu_char(&t, &numerics())?;
    let fit_points: Vec<MatrixTuple> = (0..s.points)
        .map(|k| Ok(sample_ball_point(t.d(), 2, s.radius, s.seed.wrapping_add(k as u64))?))
        .collect::<Result<_, InputError>>()?;
    let holdout_count = (s.points / 2).max(2);
    let holdout: Vec<MatrixTuple> = (0..holdout_count)
        .map(|k| {
            let seed = s.seed.wrapping_add((s.points + k) as u64);
            Ok(sample_ball_point(t.d(), 2 + k % 2, s.radius, seed)?)
        })
        .collect::<Result<_, InputError>>()?;
    let fit = weak_coincidence_fit(&b, &theta, &fit_points, &holdout, s.tol, &numerics())?;
    let mut report = s.report("compare-popescu", Some(digest));
    report
        .param("holdout_points", holdout_count)
        .summarize("support_dims", fit.support_dims)
        .summarize("sweeps", fit.sweeps)
        .residual("holdout", fit.residual)
        .verdict("weak_coincidence", fit.verdict);
    Ok(report)
}

pub fn kernel_psd(s: &Settings) -> Outcome {
    let (t, digest) = s.contraction()?;
    let b = char_fn(&t, &numerics())?;
    let mut report = s.report("kernel-psd", Some(digest));
    let mut min_eig = f64::INFINITY;
    let mut psd = true;
    for z in s.sample(t.d(), s.points, 3, 0)? {
        let cp = cp_check(&b, &z)?;
        min_eig = min_eig.min(cp.min_eig);
        psd &= cp.psd;
        report
            .points
            .push(json!({"level": z.n(), "min_eig": cp.min_eig, "psd": cp.psd}));
    }
    report.residual("min_eig", min_eig).verdict("psd", psd);
    Ok(report)
}

pub fn frostman(s: &Settings) -> Outcome {
    let (t, digest) = s.contraction()?;
    let b = char_fn(&t, &numerics())?;
    let b0 = b.at_zero()?;
    let normalized = frostman_shift(&b, &zeros(b0.nrows(), b0.ncols()))?;
    let fixed = frostman_shift(&b, &b0)?;
    let at_zero = op_norm(&normalized.at_zero()?);
    let (mut fixed_residual, mut excess) = (0.0f64, f64::NEG_INFINITY);
    let mut report = s.report("frostman", Some(digest));
    for z in s.sample(t.d(), s.points, 3, 0)? {
        let bz = b.eval(&z)?;
        let gap = max_abs(&(fixed.eval(&z)? - &bz));
        let norm = op_norm(&normalized.eval(&z)?);
        fixed_residual = fixed_residual.max(gap);
        excess = excess.max(norm - 1.0);
        report
            .points
            .push(json!({"level": z.n(), "fixed_point_gap": gap, "normalized_norm": norm}));
    }
    report
        .summarize("b_at_zero_norm", op_norm(&b0))
        .residual("normalized_at_zero", at_zero)
        .residual("fixed_point", fixed_residual)
        .residual("normalized_norm_excess", excess)
        .verdict("normalized_vanishes_at_zero", at_zero <= s.tol)
        .verdict("shift_by_own_value_is_identity", fixed_residual <= s.tol)
        .verdict("normalized_contractive", excess <= s.tol);
    Ok(report)
}

pub fn roundtrip(s: &Settings) -> Outcome {
    let (v, digest) = s.contraction()?;
    partial_isometry_defect(&v, &numerics())?;
    let frames = canonical_frames(&v, &numerics())?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut report = s.report("roundtrip", Some(digest));
    report.summarize("p", frames.p()).summarize("q", frames.q());
    let mut worst: f64 = 0.0;
    for k in 0..s.points {
        let norm = 0.95 * (k + 1) as f64 / s.points as f64;
        let delta = random_contraction(&mut rng, frames.p(), frames.q(), norm);
        let residual = roundtrip_residual(&v, &delta, &numerics())?;
        worst = worst.max(residual);
        report.points.push(json!({"delta_norm": norm, "residual": residual}));
    }
    report.residual("roundtrip", worst).verdict("roundtrip", worst <= s.tol);
    Ok(report)
}

pub fn model(s: &Settings) -> Outcome {
    let (t, digest) = s.contraction()?;
    let depth = s.max_len.unwrap_or_else(|| default_depth(t.d()));
    let words = TruncatedFock::new(t.d(), depth, 1).word_count();
    if t.m().saturating_mul(words) > MODEL_SIZE_LIMIT {
        return Err(InputError(format!(
            "model size m·words = {}·{words} exceeds {MODEL_SIZE_LIMIT}; lower --max-len",
            t.m()
        )));
    }
    let r = model_verify(&t, depth, s.points, s.seed, &numerics())?;
    let mut report = s.report("model-verify", Some(digest));
    report
        .param("max_len", depth)
        .summarize("ambient_dim", r.ambient_dim)
        .summarize("space_dim", r.space_dim)
        .residual("frame", r.frame_residual)
        .residual("intertwine", r.intertwine_residual)
        .residual("kernel_identity", r.kernel_identity_residual)
        .residual("top_level_coefficient", r.top_level_coefficient)
        .verdict("frame", r.frame_residual <= s.tol)
        .verdict("kernel_identity", r.kernel_identity_residual <= s.tol);
    Ok(report)
}

pub fn poly_eval(s: &Settings, text: &str) -> Outcome {
    let poly = parse_poly(text)?;
    let normal_form = poly.to_string();
    let (points, digest) = match &s.input {
        Some(_) => {
            let file = s.input_file()?;
            (vec![file.to_tuple()?], file.digest())
        }
        None => (
            s.sample(poly.min_d().max(1), s.points, 3, 0)?,
            digest_bytes(normal_form.as_bytes()),
        ),
    };
    let mut report = s.report("poly-eval", Some(digest));
    report
        .summarize("normal_form", &normal_form)
        .summarize("terms", poly.terms().len())
        .summarize("degree", poly.degree());
    for z in &points {
        let value = poly.eval(z)?;
        report
            .points
            .push(json!({"level": z.n(), "value": matrix_entries(&value)}));
    }
    Ok(report)
}
