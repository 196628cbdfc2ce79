//! Monte Carlo ensembles over the random measure: admissibility
//! frequencies, moment bounds, CLT and LLN checks for `Z = ‖u_ω‖∞`, and the
//! exceedance-sum check for series measures.
//!
//! Every sample draws from its own ChaCha stream keyed by `(seed, role,
//! index)`, so results do not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use std::io::{self, Write};
use std::sync::Arc;

use crate::domain::{BallDomain, GreenKernel};
use crate::error::{Error, Result};
use crate::measures::{AtomicMeasure, MeasureModel};
use crate::operator::{fmt_f64, rule_on, HOperator};
use crate::solver::{contraction_constants, is_admissible, picard_solve, ProblemSpec};
use crate::stats::{self, Interval};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1000;
pub const KS_ALPHA: f64 = 0.01;

const ROLE_MAIN: u64 = 0;
const ROLE_PILOT: u64 = 1;
const ROLE_TAIL: u64 = 2;
const ROLE_EXCEED: u64 = 3;
const ROLE_SURROGATE: u64 = 4;

/// RNG for one sample: the master seed selects the key, `(role, index)` the
/// stream.
pub fn sample_rng(seed: u64, role: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((role << 56) ^ index);
    rng
}

/// Runs `f(0..n)` and returns the results in index order.
fn par_map<T, F>(n: usize, threads: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let run = || (0..n).into_par_iter().map(&f).collect::<Vec<T>>();
        match threads.filter(|&t| t > 0) {
            Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                Ok(pool) => pool.install(run),
                Err(_) => run(),
            },
            None => run(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        (0..n).map(f).collect()
    }
}

fn first_error<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

/// Everything needed to draw and solve an ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub model: MeasureModel,
    pub spec: ProblemSpec,
    pub operator: Arc<HOperator>,
    pub n_samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    /// Worker cap; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl EnsembleConfig {
    /// Builds the discrete operator on the grid of `spec`.
    pub fn new(model: MeasureModel, spec: ProblemSpec, n_samples: usize, seed: u64) -> Result<Self> {
        let layout = spec.layout().clone();
        let kernel = GreenKernel::new(layout.domain().clone());
        let operator = Arc::new(HOperator::new(rule_on(layout), kernel)?);
        Self::with_operator(model, spec, operator, n_samples, seed)
    }

    pub fn with_operator(
        model: MeasureModel,
        spec: ProblemSpec,
        operator: Arc<HOperator>,
        n_samples: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::param("n_samples", "need at least one sample"));
        }
        if !crate::operator::same_layout(operator.layout(), spec.layout()) {
            return Err(Error::LayoutMismatch);
        }
        model.validate(operator.layout().domain())?;
        Ok(Self {
            model,
            spec,
            operator,
            n_samples,
            seed,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            threads: None,
        })
    }

    pub fn domain(&self) -> &BallDomain {
        self.operator.layout().domain()
    }

    /// `l₀ ‖f‖∞`, the factor turning `|μ|` into `τ`.
    pub fn tau_scale(&self) -> f64 {
        self.spec.l0() * self.spec.f().sup_norm()
    }

    fn solve(&self, model: &MeasureModel, role: u64, index: usize) -> Result<SampleRecord> {
        let mut rng = sample_rng(self.seed, role, index as u64);
        let mu = model.sample(self.domain(), &mut rng);
        self.solve_measure(&mu, index)
    }

    fn solve_measure(&self, mu: &AtomicMeasure, index: usize) -> Result<SampleRecord> {
        let out = picard_solve(&self.spec, mu, &self.operator, self.tol, self.max_iter).map_err(|e| {
            Error::Sample {
                index,
                source: Box::new(e),
            }
        })?;
        Ok(SampleRecord {
            index,
            total_variation: mu.total_variation(),
            tau: out.budget.tau,
            admissible: out.admissible,
            sup_norm: out.sup_norm(),
            iterations: out.iterations,
            residual: out.admissible.then_some(out.residual),
        })
    }
}

/// One realization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub index: usize,
    pub total_variation: f64,
    pub tau: f64,
    pub admissible: bool,
    pub sup_norm: Option<f64>,
    pub iterations: usize,
    pub residual: Option<f64>,
}

/// Aggregates over an ensemble. Solution-norm statistics use admissible
/// samples only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub n_samples: usize,
    pub admissible_count: usize,
    pub admissible_fraction: f64,
    pub sup_norm_mean: Option<f64>,
    pub sup_norm_second_moment: Option<f64>,
    pub sup_norm_max: Option<f64>,
    pub total_variation_mean: f64,
    pub total_variation_second_moment: f64,
    pub total_variation_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleReport {
    pub summary: EnsembleSummary,
    #[serde(skip)]
    pub records: Vec<SampleRecord>,
}

impl EnsembleReport {
    fn from_records(records: Vec<SampleRecord>) -> Self {
        let n = records.len();
        let norms: Vec<f64> = records.iter().filter_map(|r| r.sup_norm).collect();
        let tvs: Vec<f64> = records.iter().map(|r| r.total_variation).collect();
        let sq = |xs: &[f64]| xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        let nonempty = !norms.is_empty();
        let summary = EnsembleSummary {
            n_samples: n,
            admissible_count: norms.len(),
            admissible_fraction: norms.len() as f64 / n as f64,
            sup_norm_mean: nonempty.then(|| stats::mean(&norms)),
            sup_norm_second_moment: nonempty.then(|| sq(&norms)),
            sup_norm_max: nonempty.then(|| norms.iter().copied().fold(0.0, f64::max)),
            total_variation_mean: stats::mean(&tvs),
            total_variation_second_moment: sq(&tvs),
            total_variation_max: tvs.iter().copied().fold(0.0, f64::max),
        };
        Self { summary, records }
    }

    pub fn admissible_fraction(&self) -> f64 {
        self.summary.admissible_fraction
    }
}

/// Draws `n_samples` measures, decides admissibility and solves each
/// admissible instance.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleReport> {
    let records = par_map(cfg.n_samples, cfg.threads, |i| cfg.solve(&cfg.model, ROLE_MAIN, i));
    Ok(EnsembleReport::from_records(first_error(records)?))
}

/// Admissible frequency with reference values of `ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibleProbability {
    pub p_hat: f64,
    pub ci95: Interval,
    /// `ν([0, c₀ / (l₀‖f‖∞)))`, the threshold of the direct check.
    pub nu_below_c0: Option<f64>,
    /// `ν([0, 1 / (l₀‖f‖∞)))`.
    pub nu_below_one: Option<f64>,
}

pub fn admissible_probability(report: &EnsembleReport, cfg: &EnsembleConfig) -> AdmissibleProbability {
    let s = &report.summary;
    let scale = cfg.tau_scale();
    let threshold = |level: f64| if scale > 0.0 { level / scale } else { f64::INFINITY };
    AdmissibleProbability {
        p_hat: s.admissible_fraction,
        ci95: stats::wilson_interval(s.admissible_count, s.n_samples),
        nu_below_c0: cfg.model.tv_prob_below(cfg.domain(), threshold(cfg.spec.c0())),
        nu_below_one: cfg.model.tv_prob_below(cfg.domain(), threshold(1.0)),
    }
}

/// Empirical `E[‖u‖∞^m]` against its two upper bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub m: u32,
    pub empirical: f64,
    /// `(2ε)^m (1 + Σ_j C(m+j-1, j) Ê[τ^j])`.
    pub series_bound: f64,
    pub series_terms: usize,
    /// `(2ε)^m Ê[(1-τ)^(-m)]`.
    pub closed_bound: f64,
}

const SERIES_CUTOFF: f64 = 1e-12;
const SERIES_MAX_TERMS: usize = 1_000_000;

pub fn moment_report(report: &EnsembleReport, cfg: &EnsembleConfig, m: u32) -> Result<MomentReport> {
    if m == 0 {
        return Err(Error::param("m", "moment order must be >= 1"));
    }
    let mut norms = Vec::with_capacity(report.records.len());
    let mut taus = Vec::with_capacity(report.records.len());
    for r in &report.records {
        match r.sup_norm {
            Some(z) if r.admissible => norms.push(z),
            _ => {
                return Err(Error::HypothesisViolation(format!(
                    "sample {} is not admissible",
                    r.index
                )))
            }
        }
        if !(r.tau < 1.0) {
            return Err(Error::HypothesisViolation(format!(
                "sample {} has tau = {} >= 1",
                r.index, r.tau
            )));
        }
        taus.push(r.tau);
    }
    let mi = m as i32;
    let scale = (2.0 * cfg.spec.epsilon()).powi(mi);
    let empirical = stats::mean(&norms.iter().map(|z| z.powi(mi)).collect::<Vec<_>>());
    let closed = stats::mean(&taus.iter().map(|t| (1.0 - t).powi(-mi)).collect::<Vec<_>>());

    // c_i = C(m+j-1, j) τ_i^j, updated in place.
    let mut c = vec![1.0; taus.len()];
    let tau_max = taus.iter().copied().fold(0.0, f64::max);
    let mut sum = 1.0;
    let mut j = 0usize;
    loop {
        j += 1;
        let factor = (m as usize + j - 1) as f64 / j as f64;
        for (ci, t) in c.iter_mut().zip(&taus) {
            *ci *= t * factor;
        }
        let term = stats::mean(&c);
        sum += term;
        let ratio = tau_max * (m as usize + j) as f64 / (j + 1) as f64;
        let decreasing = ratio < 1.0;
        if (term <= SERIES_CUTOFF * sum && decreasing) || j >= SERIES_MAX_TERMS {
            break;
        }
    }
    Ok(MomentReport {
        m,
        empirical,
        series_bound: scale * sum,
        series_terms: j,
        closed_bound: scale * closed,
    })
}

/// Kolmogorov–Smirnov comparison with `N(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsVerdict {
    pub ks_stat: f64,
    pub critical: f64,
    pub alpha: f64,
    pub pass: bool,
}

pub fn ks_normal(xs: &[f64], alpha: f64) -> KsVerdict {
    let ks_stat = stats::ks_statistic(xs, stats::normal_cdf);
    let critical = stats::ks_critical(alpha, xs.len());
    KsVerdict {
        ks_stat,
        critical,
        alpha,
        pass: ks_stat <= critical,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub k: usize,
    pub trials: usize,
    pub pilot_size: usize,
    pub m_hat: f64,
    pub sigma_hat: f64,
    #[serde(flatten)]
    pub verdict: KsVerdict,
    /// `Σ_{j≤k} (Z_j - m̂) / (σ̂ √k)` per trial.
    #[serde(skip)]
    pub sums: Vec<f64>,
}

/// Default pilot size: large enough that the error in `m̂` moves the
/// standardized sums by a few hundredths at most.
pub fn default_clt_pilot(k: usize, trials: usize) -> usize {
    (8 * k * trials).max(10 * k)
}

fn admissible_norms(records: Vec<SampleRecord>) -> Result<Vec<f64>> {
    records
        .into_iter()
        .map(|r| match r.sup_norm {
            Some(z) if r.admissible => Ok(z),
            _ => Err(Error::Sample {
                index: r.index,
                source: Box::new(Error::HypothesisViolation(format!(
                    "inadmissible realization (tau = {})",
                    r.tau
                ))),
            }),
        })
        .collect()
}

/// Standardized sums of `k` i.i.d. solution norms over `trials` trials,
/// with `m` and `σ` estimated from an independent pilot ensemble.
pub fn clt_test(cfg: &EnsembleConfig, k: usize, trials: usize, pilot_size: Option<usize>) -> Result<CltReport> {
    if k == 0 || trials < 2 {
        return Err(Error::param("trials", "need k >= 1 and trials >= 2"));
    }
    let pilot_size = pilot_size.unwrap_or_else(|| default_clt_pilot(k, trials));
    if pilot_size < 2 {
        return Err(Error::param("pilot_size", "need at least two pilot samples"));
    }
    let pilot = par_map(pilot_size, cfg.threads, |i| cfg.solve(&cfg.model, ROLE_PILOT, i));
    let pilot = admissible_norms(first_error(pilot)?)?;
    let m_hat = stats::mean(&pilot);
    let sigma_hat = stats::variance(&pilot).sqrt();
    if sigma_hat < 1e-12 {
        return Err(Error::Degenerate(sigma_hat));
    }
    let main = par_map(k * trials, cfg.threads, |i| cfg.solve(&cfg.model, ROLE_MAIN, i));
    let z = admissible_norms(first_error(main)?)?;
    let norm = sigma_hat * (k as f64).sqrt();
    let sums: Vec<f64> = z
        .chunks(k)
        .map(|chunk| chunk.iter().map(|zj| zj - m_hat).sum::<f64>() / norm)
        .collect();
    Ok(CltReport {
        k,
        trials,
        pilot_size,
        m_hat,
        sigma_hat,
        verdict: ks_normal(&sums, KS_ALPHA),
        sums,
    })
}

/// Runs the KS comparison on exact standard normal surrogates.
pub fn clt_self_test(trials: usize, seed: u64) -> KsVerdict {
    let mut rng = sample_rng(seed, ROLE_SURROGATE, 0);
    let xs: Vec<f64> = (0..trials).map(|_| StandardNormal.sample(&mut rng)).collect();
    ks_normal(&xs, KS_ALPHA)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlnReport {
    pub k: usize,
    pub delta: f64,
    pub trials: usize,
    pub pilot_size: usize,
    /// `ess sup l₀ ‖f‖∞ |μ_j|` over the model sequence.
    pub l_bound: f64,
    pub q0: f64,
    pub chebyshev_bound: f64,
    pub empirical_prob: f64,
    pub standard_error: f64,
    pub pass: bool,
    /// `k⁻¹ Σ_j (Z_j - Ê[Z_j])` per trial.
    #[serde(skip)]
    pub deviations: Vec<f64>,
}

/// `min(1, 4 Q₀² / (δ² k))`.
pub fn chebyshev_bound(q0: f64, delta: f64, k: usize) -> f64 {
    (4.0 * q0 * q0 / (delta * delta * k as f64)).min(1.0)
}

pub const DEFAULT_LLN_PILOT: usize = 2000;

/// Frequency of `|k⁻¹ Σ_j (Z_j - Ê[Z_j])| ≥ δ` over `trials` trials, where
/// `Z_j` solves with `μ_j` drawn from `models[j mod models.len()]`
/// (or `cfg.model` when `models` is empty).
pub fn lln_test(
    cfg: &EnsembleConfig,
    models: &[MeasureModel],
    k: usize,
    delta: f64,
    trials: usize,
    pilot_size: Option<usize>,
) -> Result<LlnReport> {
    if k == 0 || trials == 0 {
        return Err(Error::param("trials", "need k >= 1 and trials >= 1"));
    }
    if !(delta > 0.0) {
        return Err(Error::param("delta", format!("must be positive, got {delta}")));
    }
    let own = [cfg.model.clone()];
    let models = if models.is_empty() { &own[..] } else { models };
    let scale = cfg.tau_scale();
    let mut l_bound: f64 = 0.0;
    for model in models {
        model.validate(cfg.domain())?;
        let tv = model.tv_bound(cfg.domain()).ok_or_else(|| {
            Error::HypothesisViolation("model has no almost-sure bound on |mu|".into())
        })?;
        l_bound = l_bound.max(scale * tv);
    }
    if l_bound >= 1.0 {
        return Err(Error::HypothesisViolation(format!(
            "l0 |f| ess sup |mu| = {l_bound} must be below 1"
        )));
    }
    let q0 = 2.0 * cfg.spec.epsilon() / (1.0 - l_bound);
    let bound = chebyshev_bound(q0, delta, k);

    let pilot_size = pilot_size.unwrap_or(DEFAULT_LLN_PILOT).max(1);
    let mut pilot_means = Vec::with_capacity(models.len());
    for (d, model) in models.iter().enumerate() {
        let runs = par_map(pilot_size, cfg.threads, |i| {
            cfg.solve(model, ROLE_PILOT, d * pilot_size + i)
        });
        pilot_means.push(stats::mean(&admissible_norms(first_error(runs)?)?));
    }

    let runs = par_map(k * trials, cfg.threads, |i| {
        cfg.solve(&models[(i % k) % models.len()], ROLE_MAIN, i)
    });
    let z = admissible_norms(first_error(runs)?)?;
    let deviations: Vec<f64> = z
        .chunks(k)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .map(|(j, zj)| zj - pilot_means[j % models.len()])
                .sum::<f64>()
                / k as f64
        })
        .collect();
    let failures = deviations.iter().filter(|d| d.abs() >= delta).count();
    let empirical_prob = failures as f64 / trials as f64;
    let standard_error = stats::binomial_se(bound, trials);
    Ok(LlnReport {
        k,
        delta,
        trials,
        pilot_size,
        l_bound,
        q0,
        chebyshev_bound: bound,
        empirical_prob,
        standard_error,
        pass: empirical_prob <= bound + 2.0 * standard_error,
        deviations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BorelCantelliReport {
    pub c_tilde: f64,
    pub k_max: usize,
    pub n_per_k: usize,
    /// `P̂(|S_k| ≥ c̃)` for `k = 1..=k_max`.
    pub probabilities: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// Running sums of `probabilities`.
    pub partial_sums: Vec<f64>,
    /// Standard errors of the running sums (independent draws per `k`).
    pub partial_sum_errors: Vec<f64>,
    pub full_draws: usize,
    /// Fraction of full-series draws whose last exceedance comes before
    /// the final term, so that `|μ_ω| < c̃`.
    pub tail_fraction: f64,
    /// Largest last-exceedance index seen (0 if none).
    pub max_last_exceedance: usize,
    /// Fraction of full-series draws passing the direct admissibility check.
    pub admissible_fraction: f64,
}

/// Monte Carlo estimates of `P(L_k)`, `L_k = {|S_k| ≥ c̃}`, plus a tail check
/// on `cfg.n_samples` full-series draws.
pub fn borel_cantelli_check(
    cfg: &EnsembleConfig,
    c_tilde: f64,
    k_max: usize,
    n_per_k: usize,
) -> Result<BorelCantelliReport> {
    let scale = cfg.tau_scale();
    let upper = if scale > 0.0 { 1.0 / scale } else { f64::INFINITY };
    if !(c_tilde > 0.0 && c_tilde < upper) {
        return Err(Error::param(
            "c_tilde",
            format!("need 0 < c_tilde < 1/(l0 |f|) = {upper}, got {c_tilde}"),
        ));
    }
    if k_max == 0 || n_per_k == 0 {
        return Err(Error::param("k_max", "need k_max >= 1 and n_per_k >= 1"));
    }
    // Fails early for models that are not series-type.
    cfg.model.sample_series(&mut sample_rng(cfg.seed, ROLE_EXCEED, 0))?;

    let hits = par_map(k_max * n_per_k, cfg.threads, |flat| {
        let (k, i) = (flat / n_per_k + 1, flat % n_per_k);
        let mut rng = sample_rng(cfg.seed, ROLE_EXCEED, ((k as u64) << 32) | i as u64);
        let draw = cfg.model.sample_series(&mut rng).expect("series-type model");
        draw.partial_sum(k).total_variation() >= c_tilde
    });
    let mut probabilities = Vec::with_capacity(k_max);
    let mut standard_errors = Vec::with_capacity(k_max);
    let mut partial_sums = Vec::with_capacity(k_max);
    let mut partial_sum_errors = Vec::with_capacity(k_max);
    let (mut running, mut var) = (0.0, 0.0);
    for row in hits.chunks(n_per_k) {
        let p = row.iter().filter(|&&h| h).count() as f64 / n_per_k as f64;
        let se = stats::binomial_se(p, n_per_k);
        running += p;
        var += se * se;
        probabilities.push(p);
        standard_errors.push(se);
        partial_sums.push(running);
        partial_sum_errors.push(var.sqrt());
    }

    let tails = par_map(cfg.n_samples, cfg.threads, |i| {
        let mut rng = sample_rng(cfg.seed, ROLE_TAIL, i as u64);
        let draw = cfg.model.sample_series(&mut rng).expect("series-type model");
        let vars = draw.partial_variations();
        let last = vars.iter().rposition(|v| *v >= c_tilde).map_or(0, |p| p + 1);
        let full = draw.full();
        let budget = contraction_constants(&cfg.spec, &full);
        let admissible = is_admissible(&budget, cfg.spec.g().sup_norm(), cfg.spec.l0());
        (last, last < draw.depth(), admissible)
    });
    let n = cfg.n_samples as f64;
    Ok(BorelCantelliReport {
        c_tilde,
        k_max,
        n_per_k,
        probabilities,
        standard_errors,
        partial_sums,
        partial_sum_errors,
        full_draws: cfg.n_samples,
        tail_fraction: tails.iter().filter(|t| t.1).count() as f64 / n,
        max_last_exceedance: tails.iter().map(|t| t.0).max().unwrap_or(0),
        admissible_fraction: tails.iter().filter(|t| t.2).count() as f64 / n,
    })
}

/// Per-sample records as CSV.
pub fn write_samples_csv<W: Write>(mut out: W, records: &[SampleRecord]) -> io::Result<()> {
    writeln!(out, "index,total_variation,tau,admissible,sup_norm,iterations,residual")?;
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.index,
            fmt_f64(r.total_variation),
            fmt_f64(r.tau),
            u8::from(r.admissible),
            opt(r.sup_norm),
            r.iterations,
            opt(r.residual)
        )?;
    }
    Ok(())
}

/// One value per trial as CSV.
pub fn write_sums_csv<W: Write>(mut out: W, values: &[f64]) -> io::Result<()> {
    writeln!(out, "trial,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{i},{}", fmt_f64(*v))?;
    }
    Ok(())
}

/// Exceedance probabilities as CSV.
pub fn write_exceedance_csv<W: Write>(mut out: W, report: &BorelCantelliReport) -> io::Result<()> {
    writeln!(out, "k,probability,standard_error,partial_sum,partial_sum_error")?;
    for k in 0..report.k_max {
        writeln!(
            out,
            "{},{},{},{},{}",
            k + 1,
            fmt_f64(report.probabilities[k]),
            fmt_f64(report.standard_errors[k]),
            fmt_f64(report.partial_sums[k]),
            fmt_f64(report.partial_sum_errors[k])
        )?;
    }
    Ok(())
}
