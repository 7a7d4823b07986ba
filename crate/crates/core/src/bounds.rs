//! Executable checks of the spectral bounds for nearly orthogonal rows, the
//! random-vector orthogonality estimate and the block Kaczmarz error
//! recursion, plus seeded batch drivers that export one CSV row per trial.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::cluster::RowClustering;
use crate::error::{Error, Result};
use crate::linalg::{self, dot, normalize_rows, DenseMatrix};
use crate::paving::{build_cluster_paving, build_random_paving, lemma1_bound, Lemma1Bound, RowPaving};
use crate::rng::{derive_seed, rng_for, Rng};
use crate::solvers::{Method, Solver, SolverConfig};
use crate::stats;
use crate::system::LinearSystem;

/// Absolute slack allowed on the exactly provable bounds.
pub const BOUND_TOL: f64 = 1e-9;

/// Inner products below this magnitude count as zero for sign coherence.
const SIGN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm2Report {
    pub ov: f64,
    pub k: usize,
    pub spectral: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `‖ÂÂᵀ‖₂ ≤ 1 + k·ov(A)` for the row-normalized `Â`.
pub fn check_thm2(a: &DenseMatrix) -> Result<Thm2Report> {
    let an = normalize_rows(a)?;
    let k = an.n_rows();
    let ov = if k >= 2 { linalg::orthogonality_value(&an)? } else { 0.0 };
    let (_, spectral) = linalg::gram_extreme_eigenvalues(&an)?;
    let bound = 1.0 + k as f64 * ov;
    Ok(Thm2Report {
        ov,
        k,
        spectral,
        bound,
        holds: spectral <= bound + BOUND_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm3Report {
    pub delta: f64,
    pub spectral: f64,
    pub bound: f64,
    /// Whether some choice of row signs makes every inner product
    /// nonnegative. Without that the lower bound can fail, e.g. three unit
    /// vectors at 120° in a plane.
    pub applicable: bool,
    /// `spectral ≥ bound − tol`; vacuously true when not applicable.
    pub holds: bool,
}

/// Whether rows can be re-signed so that all off-diagonal Gram entries are
/// nonnegative (a two-colouring of the nonzero-entry graph).
pub fn sign_coherent(gram: &DenseMatrix) -> bool {
    let k = gram.n_rows();
    let mut sign = vec![0i8; k];
    for start in 0..k {
        if sign[start] != 0 {
            continue;
        }
        sign[start] = 1;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..k {
                let g = gram.get(i, j);
                if i == j || g.abs() <= SIGN_TOL {
                    continue;
                }
                let want = if g > 0.0 { sign[i] } else { -sign[i] };
                if sign[j] == 0 {
                    sign[j] = want;
                    stack.push(j);
                } else if sign[j] != want {
                    return false;
                }
            }
        }
    }
    true
}

/// `‖ÂÂᵀ‖₂ ≥ 1 + (k − 1)·δ` with `δ = min_{i≠j} |⟨Â_i, Â_j⟩|`.
pub fn check_thm3(a: &DenseMatrix) -> Result<Thm3Report> {
    let an = normalize_rows(a)?;
    let k = an.n_rows();
    let gram = an.gram();
    let mut delta = f64::INFINITY;
    for i in 0..k {
        for j in i + 1..k {
            delta = delta.min(gram.get(i, j).abs());
        }
    }
    if k < 2 {
        delta = 0.0;
    }
    let (_, spectral) = linalg::gram_extreme_eigenvalues(&an)?;
    let bound = 1.0 + (k as f64 - 1.0) * delta;
    let applicable = sign_coherent(&gram);
    Ok(Thm3Report {
        delta,
        spectral,
        bound,
        applicable,
        holds: !applicable || spectral >= bound - BOUND_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm45Report {
    pub k: usize,
    pub ov: f64,
    /// `λ_min(ÂÂᵀ)`.
    pub sigma_min: f64,
    /// `1 − ε`.
    pub sigma_min_bound_paper: f64,
    /// `1 − (k − 1)ε`, the Gershgorin-disc bound.
    pub sigma_min_bound_gershgorin: f64,
    /// `λ_max / λ_min` of `ÂÂᵀ`; infinite when singular.
    pub cond: f64,
    /// `(1 + kε) / (1 − ε)`.
    pub cond_bound: f64,
    pub holds_gershgorin: bool,
    pub holds_paper: bool,
    /// `cond ≤ cond_bound`; follows from the `1 − ov` bound, so report-only.
    pub holds_cond: bool,
}

/// Lower bounds on `λ_min(ÂÂᵀ)` and the resulting condition-number bound.
/// Fails with [`Error::CondBoundUndefined`] when `ov(A) ≥ 1`.
pub fn check_thm4_thm5(a: &DenseMatrix) -> Result<Thm45Report> {
    let an = normalize_rows(a)?;
    let k = an.n_rows();
    let ov = if k >= 2 { linalg::orthogonality_value(&an)? } else { 0.0 };
    if ov >= 1.0 {
        return Err(Error::CondBoundUndefined(ov));
    }
    let (lmin, lmax) = linalg::gram_extreme_eigenvalues(&an)?;
    let tol = k.max(an.n_cols()) as f64 * f64::EPSILON * lmax;
    let cond = if lmin > tol { (lmax / lmin).max(1.0) } else { f64::INFINITY };
    let one_minus_ov = 1.0 - ov;
    let gersh = 1.0 - (k as f64 - 1.0) * ov;
    let cond_bound = (1.0 + k as f64 * ov) / (1.0 - ov);
    Ok(Thm45Report {
        k,
        ov,
        sigma_min: lmin,
        sigma_min_bound_paper: one_minus_ov,
        sigma_min_bound_gershgorin: gersh,
        cond,
        cond_bound,
        holds_gershgorin: lmin >= gersh - BOUND_TOL,
        holds_paper: lmin >= one_minus_ov - BOUND_TOL,
        holds_cond: cond <= cond_bound * (1.0 + BOUND_TOL),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm1Report {
    pub d: usize,
    pub eps: f64,
    pub delta: f64,
    pub trials: usize,
    pub empirical_fraction: f64,
    /// `1 − 1 / (ε² (1 − δ)⁴ d)`; negative values are vacuous.
    pub structural_lower_bound: f64,
    pub std_error: f64,
    /// `empirical_fraction ≥ structural_lower_bound − 2·std_error`.
    pub holds: bool,
}

/// Fraction of independent Gaussian pairs in `ℝ^d` whose cosine is at most
/// `eps` in magnitude. Pair `t` is drawn from its own stream so the result
/// does not depend on evaluation order.
pub fn orthogonality_probability_experiment(
    d: usize,
    eps: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<Thm1Report> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument("eps and delta must lie in (0, 1)".into()));
    }
    if trials < 1000 {
        return Err(Error::InvalidArgument("at least 1000 trials are required".into()));
    }
    let mut u = vec![0.0; d];
    let mut v = vec![0.0; d];
    let mut hits = 0usize;
    for t in 0..trials {
        let mut rng = rng_for(seed, t as u64);
        u.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
        v.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
        let cos = dot(&u, &v) / (dot(&u, &u) * dot(&v, &v)).sqrt();
        if cos.abs() <= eps {
            hits += 1;
        }
    }
    let empirical_fraction = hits as f64 / trials as f64;
    let structural_lower_bound = 1.0 - 1.0 / (eps * eps * (1.0 - delta).powi(4) * d as f64);
    let std_error = stats::binomial_std_error(empirical_fraction, trials);
    Ok(Thm1Report {
        d,
        eps,
        delta,
        trials,
        empirical_fraction,
        structural_lower_bound,
        std_error,
        holds: empirical_fraction >= structural_lower_bound - 2.0 * std_error,
    })
}

/// Inclusive integer range, parsed from `"6"` or `"2..10"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntRange {
    pub lo: usize,
    pub hi: usize,
}

impl IntRange {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidArgument(format!("empty range {lo}..{hi}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn single(v: usize) -> Self {
        Self { lo: v, hi: v }
    }

    fn sample(&self, rng: &mut Rng) -> usize {
        rng.random_range(self.lo..=self.hi)
    }
}

impl FromStr for IntRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("expected N or LO..HI, got {s:?}"));
        match s.split_once("..") {
            Some((lo, hi)) => Self::new(
                lo.trim().parse().map_err(|_| bad())?,
                hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?,
            ),
            None => Ok(Self::single(s.trim().parse().map_err(|_| bad())?)),
        }
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

/// Random test matrices for the batch audits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFamily {
    /// Orthonormal rows plus a Gaussian perturbation whose size is
    /// log-uniform on `[1e-3, 10]`, so `ov` ranges from tiny to nearly 1.
    Perturbed,
    /// Rows within a narrow cone around one direction, so all inner
    /// products are positive.
    NarrowCone,
}

/// Row-normalized `k × p` matrix drawn from `family` with the given seed.
pub fn random_audit_matrix(k: usize, p: usize, family: MatrixFamily, seed: u64) -> Result<DenseMatrix> {
    if k == 0 || p == 0 {
        return Err(Error::InvalidArgument("k and p must be positive".into()));
    }
    let mut rng = rng_for(seed, 0);
    let g: Vec<f64> = (0..k * p)
        .map(|_| rng.sample::<f64, _>(StandardNormal) / (p as f64).sqrt())
        .collect();
    let g = DenseMatrix::new(k, p, g)?;
    let data = match family {
        MatrixFamily::Perturbed => {
            let t = 10f64.powf(rng.random_range(-3.0..1.0));
            let q = if k <= p { random_orthonormal_rows(k, p, &mut rng)? } else { DenseMatrix::zeros(k, p) };
            q.as_slice().iter().zip(g.as_slice()).map(|(a, b)| a + t * b).collect()
        }
        MatrixFamily::NarrowCone => {
            let t = rng.random_range(0.01..0.5);
            let c: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
            let cn = linalg::norm2(&c);
            let mut out = Vec::with_capacity(k * p);
            for row in g.rows() {
                out.extend(row.iter().zip(&c).map(|(gi, ci)| ci / cn + t * gi));
            }
            out
        }
    };
    normalize_rows(&DenseMatrix::new(k, p, data)?)
}

fn random_orthonormal_rows(k: usize, p: usize, rng: &mut Rng) -> Result<DenseMatrix> {
    let g = nalgebra::DMatrix::<f64>::from_fn(p, k, |_, _| rng.sample(StandardNormal));
    let q = g.qr().q();
    let mut data = Vec::with_capacity(k * p);
    for i in 0..k {
        data.extend(q.column(i).iter());
    }
    DenseMatrix::new(k, p, data)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditConfig {
    pub trials: usize,
    pub k: IntRange,
    pub p: IntRange,
    pub seed: u64,
}

impl AuditConfig {
    /// Per-trial `(seed, k, p)`, independent of evaluation order.
    pub fn trial(&self, t: usize) -> (u64, usize, usize) {
        let s = derive_seed(self.seed, t as u64);
        let mut rng = rng_for(s, 1);
        let k = self.k.sample(&mut rng);
        let p = self.p.sample(&mut rng);
        (s, k, p)
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.k.lo == 0 || self.p.lo == 0 {
            return Err(Error::InvalidArgument("trials, k and p must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm2Trial {
    pub trial: usize,
    pub seed: u64,
    pub k: usize,
    pub p: usize,
    pub ov: f64,
    pub spectral: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn audit_thm2(cfg: &AuditConfig) -> Result<Vec<Thm2Trial>> {
    cfg.validate()?;
    (0..cfg.trials)
        .map(|t| {
            let (seed, k, p) = cfg.trial(t);
            let r = check_thm2(&random_audit_matrix(k, p, MatrixFamily::Perturbed, seed)?)?;
            Ok(Thm2Trial { trial: t, seed, k, p, ov: r.ov, spectral: r.spectral, bound: r.bound, holds: r.holds })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm3Trial {
    pub trial: usize,
    pub seed: u64,
    pub k: usize,
    pub p: usize,
    pub delta: f64,
    pub spectral: f64,
    pub bound: f64,
    pub applicable: bool,
    pub holds: bool,
}

pub fn audit_thm3(cfg: &AuditConfig) -> Result<Vec<Thm3Trial>> {
    cfg.validate()?;
    (0..cfg.trials)
        .map(|t| {
            let (seed, k, p) = cfg.trial(t);
            let r = check_thm3(&random_audit_matrix(k, p, MatrixFamily::NarrowCone, seed)?)?;
            Ok(Thm3Trial {
                trial: t,
                seed,
                k,
                p,
                delta: r.delta,
                spectral: r.spectral,
                bound: r.bound,
                applicable: r.applicable,
                holds: r.holds,
            })
        })
        .collect()
}

/// One thm45 trial. The report fields are empty when the condition bound is
/// undefined (`ov ≥ 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm45Trial {
    pub trial: usize,
    pub seed: u64,
    pub k: usize,
    pub p: usize,
    pub ov: f64,
    /// `(k − 1)·ov < 1`, i.e. the Gershgorin bound is informative.
    pub gershgorin_applicable: bool,
    pub sigma_min: Option<f64>,
    pub sigma_min_bound_paper: Option<f64>,
    pub sigma_min_bound_gershgorin: Option<f64>,
    pub cond: Option<f64>,
    pub cond_bound: Option<f64>,
    pub holds_gershgorin: Option<bool>,
    pub holds_paper: Option<bool>,
    pub holds_cond: Option<bool>,
    pub note: &'static str,
}

impl Thm45Trial {
    /// The gating condition: the Gershgorin bound holds wherever it applies.
    pub fn passes(&self) -> bool {
        !self.gershgorin_applicable || self.holds_gershgorin == Some(true)
    }
}

pub fn audit_thm45(cfg: &AuditConfig) -> Result<Vec<Thm45Trial>> {
    cfg.validate()?;
    (0..cfg.trials)
        .map(|t| {
            let (seed, k, p) = cfg.trial(t);
            let a = random_audit_matrix(k, p, MatrixFamily::Perturbed, seed)?;
            let ov = if k >= 2 { linalg::orthogonality_value(&a)? } else { 0.0 };
            let gershgorin_applicable = (k as f64 - 1.0) * ov < 1.0;
            let mut trial = Thm45Trial {
                trial: t,
                seed,
                k,
                p,
                ov,
                gershgorin_applicable,
                sigma_min: None,
                sigma_min_bound_paper: None,
                sigma_min_bound_gershgorin: None,
                cond: None,
                cond_bound: None,
                holds_gershgorin: None,
                holds_paper: None,
                holds_cond: None,
                note: "",
            };
            match check_thm4_thm5(&a) {
                Ok(r) => {
                    trial.sigma_min = Some(r.sigma_min);
                    trial.sigma_min_bound_paper = Some(r.sigma_min_bound_paper);
                    trial.sigma_min_bound_gershgorin = Some(r.sigma_min_bound_gershgorin);
                    trial.cond = Some(r.cond);
                    trial.cond_bound = Some(r.cond_bound);
                    trial.holds_gershgorin = Some(r.holds_gershgorin);
                    trial.holds_paper = Some(r.holds_paper);
                    trial.holds_cond = Some(r.holds_cond);
                    if !r.holds_paper {
                        log::info!("trial {t} (k={k}, p={p}, seed={seed}): λ_min {} below 1 − ov = {}", r.sigma_min, r.sigma_min_bound_paper);
                    }
                }
                Err(Error::CondBoundUndefined(_)) => trial.note = "cond bound undefined (ov >= 1)",
                Err(e) => return Err(e),
            }
            Ok(trial)
        })
        .collect()
}

/// Regenerates the matrix of a batch trial, for counterexample dumps.
pub fn audit_witness(cfg: &AuditConfig, trial: usize, family: MatrixFamily) -> Result<DenseMatrix> {
    let (seed, k, p) = cfg.trial(trial);
    random_audit_matrix(k, p, family, seed)
}

/// Writes serializable records as CSV with a header row.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma1Step {
    pub j: usize,
    pub mean_err_sq: f64,
    pub std_error: f64,
    /// `coefficient · mean_{j−1} + step_noise`.
    pub recursion_bound: f64,
    /// Standard error of the per-run recursion residual.
    pub recursion_std_error: f64,
    pub closed_form_bound: f64,
    /// `mean_j ≤ recursion_bound + 3·recursion_std_error`.
    pub holds_recursion: bool,
    /// `mean_j ≤ closed_form_bound + 3·std_error`.
    pub holds_closed_form: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Audit {
    pub bound: Lemma1Bound,
    pub runs: usize,
    pub steps: Vec<Lemma1Step>,
}

impl Lemma1Audit {
    pub fn holds(&self) -> bool {
        self.steps.iter().all(|s| s.holds_recursion && s.holds_closed_form)
    }
}

/// Runs randomized block Kaczmarz `runs` times on one fixed paving (only the
/// block-selection stream varies) and compares the empirical mean squared
/// error at each step `j ≤ max_j` against the bound.
pub fn lemma1_audit(sys: &LinearSystem, paving: &RowPaving, runs: usize, max_j: usize, seed: u64) -> Result<Lemma1Audit> {
    let x_star = sys
        .x_star()
        .ok_or_else(|| Error::InvalidArgument("the error recursion needs a known x*".into()))?;
    let e = sys.e().expect("e is present whenever x* is");
    if runs < 2 || max_j == 0 {
        return Err(Error::InvalidArgument("need at least 2 runs and 1 step".into()));
    }
    let x0 = vec![0.0; sys.p()];
    let bound = lemma1_bound(sys.a(), paving, &x0, x_star, e)?;
    // err[j][r] = ‖x_j − x*‖² for run r.
    let mut err = vec![Vec::with_capacity(runs); max_j + 1];
    for r in 0..runs {
        let cfg = SolverConfig {
            max_iters: max_j,
            residual_tol: f64::MIN_POSITIVE,
            seed: derive_seed(seed, r as u64),
            trace_every: 1,
            ..SolverConfig::new(Method::RkaBlock)
        };
        let mut solver = Solver::with_paving(sys, &cfg, paving.clone())?;
        err[0].push(linalg::distance_sq(solver.x(), x_star));
        for j in 1..=max_j {
            if solver.step()?.is_none() {
                // Converged exactly; the error stays where it is.
                let last = *err[j - 1].last().unwrap();
                err[j].push(last);
                continue;
            }
            err[j].push(linalg::distance_sq(solver.x(), x_star));
        }
    }
    let steps = (1..=max_j)
        .map(|j| {
            let mean = stats::mean(&err[j]);
            let se = stats::std_error(&err[j]);
            let prev = stats::mean(&err[j - 1]);
            let diff: Vec<f64> = err[j]
                .iter()
                .zip(&err[j - 1])
                .map(|(now, before)| now - bound.coefficient * before)
                .collect();
            let rse = stats::std_error(&diff);
            let recursion_bound = bound.next(prev);
            let closed = bound.at(j);
            Lemma1Step {
                j,
                mean_err_sq: mean,
                std_error: se,
                recursion_bound,
                recursion_std_error: rse,
                closed_form_bound: closed,
                holds_recursion: mean <= recursion_bound + 3.0 * rse,
                holds_closed_form: mean <= closed + 3.0 * se,
            }
        })
        .collect();
    Ok(Lemma1Audit { bound, runs, steps })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PavingKind {
    Cluster,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PavingSample {
    pub kind: PavingKind,
    pub paving_seed: u64,
    pub block: usize,
    pub size: usize,
    pub cond: f64,
    pub spectral_norm: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub ov: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PavingQualitySummary {
    pub cluster_median_cond: f64,
    pub random_median_cond: f64,
    pub cluster_median_spectral_norm: f64,
    pub random_median_spectral_norm: f64,
}

impl PavingQualitySummary {
    pub fn cluster_better(&self) -> bool {
        self.cluster_median_cond < self.random_median_cond
            && self.cluster_median_spectral_norm < self.random_median_spectral_norm
    }
}

/// Per-block spectra of cluster pavings and of random pavings with block
/// size `k` over `seeds` paving seeds derived from `seed`.
pub fn paving_quality(a: &DenseMatrix, clustering: &RowClustering, seeds: usize, seed: u64) -> Result<Vec<PavingSample>> {
    let mut out = Vec::new();
    for s in 0..seeds {
        let ps = derive_seed(seed, s as u64);
        let cluster = build_cluster_paving(a, clustering, ps)?;
        let random = build_random_paving(a, clustering.k(), ps)?;
        for (kind, paving) in [(PavingKind::Cluster, &cluster), (PavingKind::Random, &random)] {
            for (b, (rows, sp)) in paving.blocks().iter().zip(paving.per_block()).enumerate() {
                out.push(PavingSample {
                    kind,
                    paving_seed: ps,
                    block: b,
                    size: rows.len(),
                    cond: sp.cond,
                    spectral_norm: sp.spectral_norm,
                    lambda_min: sp.lambda_min,
                    lambda_max: sp.lambda_max,
                    ov: sp.ov,
                });
            }
        }
    }
    Ok(out)
}

pub fn summarize_paving_quality(samples: &[PavingSample]) -> PavingQualitySummary {
    let pick = |kind: PavingKind, f: fn(&PavingSample) -> f64| {
        let v: Vec<f64> = samples.iter().filter(|s| s.kind == kind).map(f).collect();
        stats::median(&v)
    };
    PavingQualitySummary {
        cluster_median_cond: pick(PavingKind::Cluster, |s| s.cond),
        random_median_cond: pick(PavingKind::Random, |s| s.cond),
        cluster_median_spectral_norm: pick(PavingKind::Cluster, |s| s.spectral_norm),
        random_median_spectral_norm: pick(PavingKind::Random, |s| s.spectral_norm),
    }
}
