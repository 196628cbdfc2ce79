//! JSON experiment configs and the command runners behind the binary.
//!
//! A run writes `report.json` (resolved config, results, verdicts) and CSV
//! artifacts into the output directory. The exit status follows
//! [`ExitCode`].

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::domain::{BallDomain, GreenKernel};
use crate::ensemble::{
    self, admissible_probability, borel_cantelli_check, clt_self_test, clt_test, lln_test,
    moment_report, run_ensemble, EnsembleConfig,
};
use crate::error::Error;
use crate::measures::{AtomicMeasure, MeasureModel};
use crate::operator::{rule_on, torsion_error, write_fields_csv, GridField, GridLayout, HOperator, QUADRATURE_SLACK};
use crate::potential::potential_field;
use crate::solver::{picard_solve, ProblemConfig};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    VerdictFailed = 1,
    BadInput = 2,
    SolverFailure = 3,
}

/// The experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    GreenCheck,
    Solve,
    Ensemble,
    Clt,
    Lln,
    BorelCantelli,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GreenCheck => "green-check",
            Command::Solve => "solve",
            Command::Ensemble => "ensemble",
            Command::Clt => "clt",
            Command::Lln => "lln",
            Command::BorelCantelli => "borel-cantelli",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenCheckConfig {
    /// Maximum allowed sup relative error.
    #[serde(default = "default_green_threshold")]
    pub threshold: f64,
    /// Finer spacing; the error there must be smaller.
    #[serde(default)]
    pub refine_h: Option<f64>,
}

fn default_green_threshold() -> f64 {
    0.03
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    /// Moment orders to report.
    #[serde(default)]
    pub moments: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CltConfig {
    pub k: usize,
    pub trials: usize,
    #[serde(default)]
    pub pilot_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlnConfig {
    pub k: usize,
    pub delta: f64,
    pub trials: usize,
    #[serde(default)]
    pub pilot_size: Option<usize>,
    /// Per-index models, cycled; defaults to the top-level model.
    #[serde(default)]
    pub models: Vec<MeasureModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BorelCantelliConfig {
    pub c_tilde: f64,
    pub k_max: usize,
    pub n_per_k: usize,
    /// Expected limit of the exceedance sums, checked within 3 standard errors.
    #[serde(default)]
    pub expected_sum: Option<f64>,
}

/// One experiment, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub command: Option<Command>,
    pub domain: BallDomain,
    pub h: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub model: Option<MeasureModel>,
    /// A fixed measure for `solve`; otherwise one draw of `model` is used.
    #[serde(default)]
    pub measure: Option<AtomicMeasure>,
    #[serde(default)]
    pub green_check: Option<GreenCheckConfig>,
    #[serde(default)]
    pub ensemble: Option<EnsembleSection>,
    #[serde(default)]
    pub clt: Option<CltConfig>,
    #[serde(default)]
    pub lln: Option<LlnConfig>,
    #[serde(default)]
    pub borel_cantelli: Option<BorelCantelliConfig>,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_samples() -> usize {
    1
}

fn default_tol() -> f64 {
    ensemble::DEFAULT_TOL
}

fn default_max_iter() -> usize {
    ensemble::DEFAULT_MAX_ITER
}

/// Flag values that replace top-level config fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub h: Option<f64>,
    pub n_samples: Option<usize>,
    pub threads: Option<usize>,
}

/// Failure of a run, mapped to an exit status.
#[derive(Debug)]
pub enum RunError {
    Input(String),
    Io(io::Error),
    Library(Error),
}

impl RunError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            RunError::Input(_) | RunError::Io(_) => ExitCode::BadInput,
            RunError::Library(e) => library_exit_code(e),
        }
    }
}

fn library_exit_code(e: &Error) -> ExitCode {
    match e {
        Error::InvalidDimension(..)
        | Error::InvalidParameter { .. }
        | Error::OutsideDomain { .. }
        | Error::EmptyRule { .. }
        | Error::LayoutMismatch => ExitCode::BadInput,
        Error::Sample { source, .. } => match library_exit_code(source) {
            ExitCode::BadInput => ExitCode::BadInput,
            _ => ExitCode::SolverFailure,
        },
        _ => ExitCode::SolverFailure,
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Input(msg) => write!(f, "{msg}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
            RunError::Library(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Library(e)
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        serde_json::from_str(text).map_err(|e| RunError::Input(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path)
            .map_err(|e| RunError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(p) = &o.out {
            self.out = p.clone();
        }
        if let Some(h) = o.h {
            self.h = h;
        }
        if let Some(n) = o.n_samples {
            self.n_samples = n;
        }
        if let Some(t) = o.threads {
            self.threads = Some(t);
        }
    }

    fn problem(&self) -> Result<&ProblemConfig, RunError> {
        self.problem
            .as_ref()
            .ok_or_else(|| RunError::Input("config needs a `problem` section".into()))
    }

    fn model(&self) -> Result<&MeasureModel, RunError> {
        self.model
            .as_ref()
            .ok_or_else(|| RunError::Input("config needs a `model` section".into()))
    }

    fn section<'a, T>(&self, s: &'a Option<T>, name: &str) -> Result<&'a T, RunError> {
        s.as_ref()
            .ok_or_else(|| RunError::Input(format!("config needs a `{name}` section")))
    }

    fn operator(&self) -> Result<Arc<HOperator>, RunError> {
        let layout = Arc::new(GridLayout::new(&self.domain, self.h)?);
        Ok(Arc::new(HOperator::new(rule_on(layout), GreenKernel::new(self.domain.clone()))?))
    }

    fn ensemble_config(&self) -> Result<EnsembleConfig, RunError> {
        let op = self.operator()?;
        let spec = self.problem()?.build(op.layout())?;
        let mut cfg = EnsembleConfig::with_operator(self.model()?.clone(), spec, op, self.n_samples, self.seed)?;
        cfg.tol = self.tol;
        cfg.max_iter = self.max_iter;
        cfg.threads = self.threads;
        Ok(cfg)
    }
}

/// A named pass/fail check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Value,
    pub verdicts: Vec<Verdict>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn exit_code(&self) -> ExitCode {
        if self.passed() {
            ExitCode::Ok
        } else {
            ExitCode::VerdictFailed
        }
    }
}

struct Artifacts {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), RunError> {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        f(&mut w)?;
        w.flush()?;
        self.files.push(path);
        Ok(())
    }
}

/// Runs `command` with the resolved config and writes all artifacts.
pub fn run(command: Command, config: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    if let Some(c) = config.command {
        if c != command {
            return Err(RunError::Input(format!(
                "config is for `{}` but `{}` was requested",
                c.name(),
                command.name()
            )));
        }
    }
    if !(config.tol > 0.0) {
        return Err(RunError::Input(format!("tol must be positive, got {}", config.tol)));
    }
    let mut art = Artifacts::new(&config.out)?;
    let (body, verdicts) = match command {
        Command::GreenCheck => green_check(config, &mut art)?,
        Command::Solve => solve(config, &mut art)?,
        Command::Ensemble => ensemble_run(config, &mut art)?,
        Command::Clt => clt(config, &mut art)?,
        Command::Lln => lln(config, &mut art)?,
        Command::BorelCantelli => borel_cantelli(config, &mut art)?,
    };
    let pass = verdicts.iter().all(|v| v.pass);
    let report = json!({
        "command": command.name(),
        "config": config,
        "results": body,
        "verdicts": verdicts,
        "pass": pass,
    });
    art.write("report.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)
    })?;
    Ok(RunOutcome {
        report,
        verdicts,
        files: art.files,
    })
}

type Section = (Value, Vec<Verdict>);

fn green_check(config: &ExperimentConfig, art: &mut Artifacts) -> Result<Section, RunError> {
    let gc = config.green_check.clone().unwrap_or(GreenCheckConfig {
        threshold: default_green_threshold(),
        refine_h: None,
    });
    let op = config.operator()?;
    let layout = op.layout().clone();
    let h1 = op.apply(&GridField::constant(&layout, 1.0))?;
    let exact = GridField::from_fn(&layout, |x| config.domain.torsion(x));
    let error = h1.sup_distance(&exact)? / exact.sup_norm();
    let mut verdicts = vec![Verdict::new(
        "torsion_error",
        error <= gc.threshold,
        format!("sup relative error {error:.6e} vs threshold {}", gc.threshold),
    )];
    let mut body = json!({
        "h": config.h,
        "nodes": layout.len(),
        "l0": config.domain.l0(),
        "sup_relative_error": error,
        "threshold": gc.threshold,
    });
    if let Some(fine) = gc.refine_h {
        let fine_op = HOperator::on_ball(&config.domain, fine)?;
        let fine_error = torsion_error(&fine_op)?;
        verdicts.push(Verdict::new(
            "refinement_decreases_error",
            fine_error < error,
            format!("h = {fine}: {fine_error:.6e}"),
        ));
        body["refined"] = json!({ "h": fine, "nodes": fine_op.layout().len(), "sup_relative_error": fine_error });
    }
    art.write("field.csv", |w| {
        write_fields_csv(w, &layout, &[("h_one", h1.values()), ("torsion", exact.values())])
    })?;
    Ok((body, verdicts))
}

fn solve(config: &ExperimentConfig, art: &mut Artifacts) -> Result<Section, RunError> {
    let op = config.operator()?;
    let spec = config.problem()?.build(op.layout())?;
    let mu = match (&config.measure, &config.model) {
        (Some(m), _) => {
            m.validate(&config.domain)?;
            m.clone()
        }
        (None, Some(model)) => {
            model.validate(&config.domain)?;
            model.sample(&config.domain, &mut ensemble::sample_rng(config.seed, 0, 0))
        }
        (None, None) => AtomicMeasure::empty(),
    };
    let out = picard_solve(&spec, &mu, &op, config.tol, config.max_iter)?;
    let summary = out.summary();
    let mut verdicts = vec![Verdict::new(
        "admissible",
        out.admissible,
        format!("tau = {}, q = {}", out.budget.tau, out.budget.q.map_or("undefined".to_string(), |q| q.to_string())),
    )];
    if let Some(u) = &out.u {
        verdicts.push(Verdict::new(
            "residual",
            out.residual <= config.tol,
            format!("{:e} vs tol {:e}", out.residual, config.tol),
        ));
        let norm = u.sup_norm();
        verdicts.push(Verdict::new(
            "norm_bound",
            norm <= out.norm_bound * (1.0 + QUADRATURE_SLACK),
            format!("{norm:e} vs {:e}", out.norm_bound),
        ));
        let v = potential_field(spec.f(), &mu, op.layout());
        art.write("field.csv", |w| {
            write_fields_csv(w, op.layout(), &[("u", u.values()), ("potential", v.values())])
        })?;
    }
    let body = json!({
        "solve": summary,
        "measure": mu,
        "nodes": op.layout().len(),
    });
    Ok((body, verdicts))
}

fn ensemble_run(config: &ExperimentConfig, art: &mut Artifacts) -> Result<Section, RunError> {
    let cfg = config.ensemble_config()?;
    let report = run_ensemble(&cfg)?;
    let prob = admissible_probability(&report, &cfg);
    let worst = report
        .records
        .iter()
        .filter_map(|r| r.sup_norm.map(|z| z * (1.0 - r.tau) / (2.0 * cfg.spec.epsilon())))
        .fold(0.0, f64::max);
    let mut verdicts = vec![Verdict::new(
        "norm_bound",
        worst <= 1.0 + QUADRATURE_SLACK,
        format!("max sup_norm / (2 eps / (1 - tau)) = {worst:.6}"),
    )];
    let resid = report.records.iter().filter_map(|r| r.residual).fold(0.0, f64::max);
    verdicts.push(Verdict::new("residual", resid <= cfg.tol, format!("max residual {resid:e}")));
    let mut moments = Vec::new();
    let orders = config.ensemble.as_ref().map(|e| e.moments.clone()).unwrap_or_default();
    for m in orders {
        let mr = moment_report(&report, &cfg, m)?;
        verdicts.push(Verdict::new(
            &format!("moment_{m}"),
            mr.empirical <= mr.closed_bound * (1.0 + QUADRATURE_SLACK),
            format!("empirical {:e} vs closed bound {:e}", mr.empirical, mr.closed_bound),
        ));
        moments.push(mr);
    }
    art.write("samples.csv", |w| ensemble::write_samples_csv(w, &report.records))?;
    let body = json!({
        "summary": report.summary,
        "admissible_probability": prob,
        "moments": moments,
    });
    Ok((body, verdicts))
}

fn clt(config: &ExperimentConfig, art: &mut Artifacts) -> Result<Section, RunError> {
    let sec = config.section(&config.clt, "clt")?;
    let cfg = config.ensemble_config()?;
    let rep = clt_test(&cfg, sec.k, sec.trials, sec.pilot_size)?;
    let self_test = clt_self_test(sec.trials, config.seed);
    let verdicts = vec![
        Verdict::new(
            "ks",
            rep.verdict.pass,
            format!("D = {:.6} vs critical {:.6}", rep.verdict.ks_stat, rep.verdict.critical),
        ),
        Verdict::new(
            "ks_self_test",
            self_test.pass,
            format!("D = {:.6} on normal surrogates", self_test.ks_stat),
        ),
    ];
    art.write("sums.csv", |w| ensemble::write_sums_csv(w, &rep.sums))?;
    Ok((json!({ "clt": rep, "self_test": self_test }), verdicts))
}

fn lln(config: &ExperimentConfig, art: &mut Artifacts) -> Result<Section, RunError> {
    let sec = config.section(&config.lln, "lln")?;
    let cfg = config.ensemble_config()?;
    let rep = lln_test(&cfg, &sec.models, sec.k, sec.delta, sec.trials, sec.pilot_size)?;
    let verdicts = vec![Verdict::new(
        "chebyshev",
        rep.pass,
        format!(
            "empirical {:.4} vs bound {:.4} + 2 x {:.4}",
            rep.empirical_prob, rep.chebyshev_bound, rep.standard_error
        ),
    )];
    art.write("sums.csv", |w| ensemble::write_sums_csv(w, &rep.deviations))?;
    Ok((json!({ "lln": rep }), verdicts))
}

fn borel_cantelli(config: &ExperimentConfig, art: &mut Artifacts) -> Result<Section, RunError> {
    let sec = config.section(&config.borel_cantelli, "borel_cantelli")?;
    let cfg = config.ensemble_config()?;
    let rep = borel_cantelli_check(&cfg, sec.c_tilde, sec.k_max, sec.n_per_k)?;
    let mut verdicts = vec![Verdict::new(
        "tail",
        rep.tail_fraction == 1.0,
        format!(
            "{} of {} full draws end below c_tilde",
            rep.tail_fraction, rep.full_draws
        ),
    )];
    if let Some(expected) = sec.expected_sum {
        let sum = *rep.partial_sums.last().expect("k_max >= 1");
        let se = *rep.partial_sum_errors.last().expect("k_max >= 1");
        verdicts.push(Verdict::new(
            "exceedance_sum",
            (sum - expected).abs() <= 3.0 * se,
            format!("{sum:.6} vs expected {expected:.6} (se {se:.2e})"),
        ));
    }
    art.write("samples.csv", |w| ensemble::write_exceedance_csv(w, &rep))?;
    Ok((json!({ "borel_cantelli": rep }), verdicts))
}
