//! Acceptance checks. Each test prints one `criterion N PASS|FAIL` line to
//! stdout (bypassing the harness capture) and then asserts.

use std::io::Write;
use std::path::Path;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use randschro::domain::BallDomain;
use randschro::ensemble::{
    borel_cantelli_check, clt_self_test, clt_test, lln_test, moment_report, run_ensemble, EnsembleConfig,
    EnsembleReport,
};
use randschro::experiment::{run, Command, ExperimentConfig};
use randschro::measures::{uniform_in_ball, Atom, AtomicMeasure, CountLaw, MeasureModel, ScalarLaw};
use randschro::operator::{torsion_error, GridField, HOperator, QUADRATURE_SLACK};
use randschro::potential::BumpProfile;
use randschro::solver::{
    budget_for_tau, is_admissible, lipschitz_gap, observed_contraction, picard_solve, ProblemSpec,
};

fn line(n: u32, title: &str, pass: bool, detail: &str) {
    let msg = format!(
        "criterion {n:>2} {} {title}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(msg.as_bytes());
    let _ = out.flush();
}

fn unit_ball() -> BallDomain {
    BallDomain::centered(3, 1.0).unwrap()
}

fn tent() -> BumpProfile {
    BumpProfile::Tent { amplitude: 1.0, radius: 0.5 }
}

fn constant_spec(op: &HOperator, p: f64, b: f64, g: f64, f: BumpProfile) -> ProblemSpec {
    let l = op.layout();
    ProblemSpec::new(p, GridField::constant(l, b), GridField::constant(l, g), f, 0.5, None).unwrap()
}

/// `((1-c₀)^p / (2^p l₀ p ‖b‖))^(1/(p-1))`, computed from scratch.
fn eps0_oracle(p: f64, b: f64, c0: f64, l0: f64) -> f64 {
    ((1.0 - c0).powf(p) / (2f64.powf(p) * l0 * p * b)).powf(1.0 / (p - 1.0))
}

#[cfg(feature = "parallel")]
fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

#[cfg(not(feature = "parallel"))]
fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    f()
}

#[test]
fn criterion_01_green_operator_oracle() {
    let d = unit_ball();
    let start = Instant::now();
    let (coarse, fine) = single_thread(|| {
        let coarse = torsion_error(&HOperator::on_ball(&d, 1.0 / 12.0).unwrap()).unwrap();
        let fine = torsion_error(&HOperator::on_ball(&d, 1.0 / 16.0).unwrap()).unwrap();
        (coarse, fine)
    });
    let secs = start.elapsed().as_secs_f64();
    let pass = coarse <= 0.03 && fine < coarse && secs <= 60.0;
    line(
        1,
        "torsion oracle",
        pass,
        &format!("err(h=1/12) = {coarse:.4e} <= 3e-2, err(h=1/16) = {fine:.4e}, {secs:.1}s single-threaded"),
    );
    assert!(pass);
}

#[test]
fn criterion_02_discrete_operator_bound() {
    let d = unit_ball();
    let op = HOperator::on_ball(&d, 0.125).unwrap();
    let l0 = d.l0();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let phi = match case % 3 {
            0 => GridField::from_fn(op.layout(), |_| 2.0 * rng.random::<f64>() - 1.0),
            1 => GridField::constant(op.layout(), if case % 2 == 0 { 1.0 } else { -3.0 }),
            _ => {
                let c = uniform_in_ball(&d, &mut rng);
                let w = 0.1 + rng.random::<f64>();
                GridField::from_fn(op.layout(), |x| {
                    let r2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
                    (-r2 / (2.0 * w * w)).exp()
                })
            }
        };
        let ratio = op.apply(&phi).unwrap().sup_norm() / (l0 * phi.sup_norm());
        worst = worst.max(ratio);
        if ratio > 1.0 + QUADRATURE_SLACK {
            violations += 1;
        }
    }
    let pass = violations == 0;
    line(
        2,
        "sup|H phi| <= l0 sup|phi| (1.05)",
        pass,
        &format!("{violations} violations in 100 fields, max ratio {worst:.4}"),
    );
    assert!(pass);
}

#[test]
fn criterion_03_fixed_point_contract() {
    let start = Instant::now();
    let d = unit_ball();
    let op = HOperator::on_ball(&d, 0.125).unwrap();
    let l0 = d.l0();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_res, mut worst_norm, mut worst_q): (f64, f64, f64) = (0.0, 0.0, f64::NEG_INFINITY);
    let mut failures = 0;
    let mut instances = 0;
    let mut attempts = 0;
    while instances < 50 {
        attempts += 1;
        assert!(attempts < 1000, "could not draw enough admissible instances");
        let p = [1.5, 2.0, 3.0][instances % 3];
        let b = 0.02 + 0.18 * rng.random::<f64>();
        let eps0 = eps0_oracle(p, b, 0.5, l0);
        let amp = 0.9 * rng.random::<f64>() * eps0 / l0;
        let g = if rng.random::<bool>() {
            GridField::constant(op.layout(), amp)
        } else {
            GridField::from_fn(op.layout(), |x| amp * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 0.18).exp())
        };
        let f = if rng.random::<bool>() {
            BumpProfile::Tent { amplitude: 1.0, radius: 0.4 }
        } else {
            BumpProfile::TruncatedGaussian { amplitude: -0.8, width: 0.2, cutoff: 0.6 }
        };
        let spec = ProblemSpec::new(p, GridField::constant(op.layout(), b), g, f, 0.5, None).unwrap();
        let model = if rng.random::<bool>() {
            MeasureModel::Alloy {
                spacing: 0.5,
                charge: ScalarLaw::Uniform { low: -0.012, high: 0.012 },
            }
        } else {
            MeasureModel::Points {
                count: CountLaw::UniformRange { low: 0, high: 4 },
                charge: 0.07,
            }
        };
        let mu = model.sample(&d, &mut rng);
        let out = picard_solve(&spec, &mu, &op, 1e-9, 1000).unwrap();
        if !out.admissible {
            continue;
        }
        instances += 1;
        let u = out.u.as_ref().unwrap();
        let norm_ratio = u.sup_norm() / (2.0 * eps0 / (1.0 - out.budget.tau));
        let q = out.budget.q.unwrap();
        let observed = observed_contraction(&out.gaps).unwrap();
        worst_res = worst_res.max(out.residual);
        worst_norm = worst_norm.max(norm_ratio);
        worst_q = worst_q.max(observed - q);
        if out.residual > 1e-8 || norm_ratio > 1.0 + QUADRATURE_SLACK || observed > q + 0.05 {
            failures += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = failures == 0 && secs <= 120.0;
    line(
        3,
        "fixed-point contract",
        pass,
        &format!(
            "50 instances: max residual {worst_res:.2e} <= 1e-8, max |u|/(2eps0/(1-tau)) {worst_norm:.4} <= 1.05, \
             max observed-q {worst_q:+.4} <= 0.05, {secs:.1}s"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_04_admissibility_equivalence() {
    let start = Instant::now();
    let d = unit_ball();
    let op = HOperator::on_ball(&d, 0.5).unwrap();
    let l0 = d.l0();
    let mut mismatches = 0;
    let mut worst_boundary: f64 = 0.0;
    for (p, b) in [(1.5, 0.05), (2.0, 0.1), (3.0, 0.3)] {
        let spec = constant_spec(&op, p, b, 0.0, tent());
        let eps = eps0_oracle(p, b, 0.5, l0);
        let k = l0 * p * b;
        for i in 0..1000 {
            let tau = 2.0 * i as f64 / 1000.0;
            let brute = tau < 1.0
                && 2f64.powf(p) * k * eps.powf(p - 1.0) / (1.0 - tau).powf(p - 1.0) + tau < 1.0
                && 0.0 <= eps / l0;
            if brute != is_admissible(&budget_for_tau(&spec, tau), 0.0, l0) {
                mismatches += 1;
            }
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if is_admissible(&budget_for_tau(&spec, mid), 0.0, l0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        worst_boundary = worst_boundary.max((0.5 * (lo + hi) - spec.c0()).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = mismatches == 0 && worst_boundary <= 1e-12 && secs < 1.0;
    line(
        4,
        "admissibility equivalence",
        pass,
        &format!("{mismatches} mismatches over 3x1000 tau values, |boundary - c0| = {worst_boundary:.1e}, {secs:.3}s"),
    );
    assert!(pass);
}

/// The almost-sure existence series model and its N = 500 ensemble.
fn series_ensemble() -> &'static (EnsembleConfig, EnsembleReport) {
    static CELL: OnceLock<(EnsembleConfig, EnsembleReport)> = OnceLock::new();
    CELL.get_or_init(|| {
        let d = unit_ball();
        let op = Arc::new(HOperator::on_ball(&d, 1.0 / 6.0).unwrap());
        let spec = constant_spec(&op, 2.0, 0.1, 0.05, tent());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bases: Vec<AtomicMeasure> = (0..30)
            .map(|j| {
                let atoms = (0..1 + j % 3)
                    .map(|_| Atom {
                        location: uniform_in_ball(&d, &mut rng),
                        weight: 2.0 * rng.random::<f64>() - 1.0,
                    })
                    .collect();
                AtomicMeasure::from_atoms(atoms)
            })
            .collect();
        let model =
            MeasureModel::decaying_series(bases, 2.0, spec.c0(), spec.l0(), spec.f().sup_norm()).unwrap();
        let cfg = EnsembleConfig::with_operator(model, spec, op, 500, 55).unwrap();
        let report = run_ensemble(&cfg).unwrap();
        (cfg, report)
    })
}

#[test]
fn criterion_05_almost_sure_existence() {
    let (cfg, report) = series_ensemble();
    let frac = report.admissible_fraction();
    let max_tau = report.records.iter().map(|r| r.tau).fold(0.0, f64::max);
    let pass = frac == 1.0 && report.records.len() == 500;
    line(
        5,
        "series model is admissible a.s.",
        pass,
        &format!("admissible fraction {frac} over 500 draws, max tau {max_tau:.4} < c0 = {}", cfg.spec.c0()),
    );
    assert!(pass);
}

#[test]
fn criterion_06_lipschitz_estimate() {
    let d = unit_ball();
    let op = HOperator::on_ball(&d, 1.0 / 6.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let base = constant_spec(&op, 2.0, 0.1, 0.0, tent());
    let g_max = base.eps0() / base.l0();
    let (mut pairs, mut failures, mut worst): (usize, usize, f64) = (0, 0, 0.0);
    let mut attempts = 0;
    while pairs < 100 {
        attempts += 1;
        assert!(attempts < 2000);
        let g1 = 0.9 * g_max * rng.random::<f64>();
        let spec1 = base.with_source(GridField::constant(op.layout(), g1)).unwrap();
        let atoms: Vec<Atom> = (0..1 + rng.random_range(0..4))
            .map(|_| Atom {
                location: uniform_in_ball(&d, &mut rng),
                weight: 0.08 * (2.0 * rng.random::<f64>() - 1.0),
            })
            .collect();
        let mu1 = AtomicMeasure::from_atoms(atoms.clone());
        let (spec2, mu2) = if pairs % 2 == 0 {
            let g2 = (g1 + 0.02 * (2.0 * rng.random::<f64>() - 1.0)).clamp(0.0, g_max);
            let bump = GridField::from_fn(op.layout(), |x| 0.005 * (1.0 - x[0] * x[0]));
            let g2 = GridField::constant(op.layout(), g2).lin_comb(1.0, &bump, 1.0).unwrap();
            (base.with_source(g2).unwrap(), mu1.clone())
        } else {
            let mut moved = atoms;
            for a in &mut moved {
                a.weight += 0.01 * (2.0 * rng.random::<f64>() - 1.0);
            }
            (spec1.clone(), AtomicMeasure::from_atoms(moved))
        };
        let o1 = picard_solve(&spec1, &mu1, &op, 1e-12, 1000).unwrap();
        let o2 = picard_solve(&spec2, &mu2, &op, 1e-12, 1000).unwrap();
        if !(o1.admissible && o2.admissible) {
            continue;
        }
        let chk = lipschitz_gap((&o1, &spec1, &mu1), (&o2, &spec2, &mu2)).unwrap();
        if !chk.valid || chk.denominator < 0.05 {
            continue;
        }
        pairs += 1;
        worst = worst.max(chk.lhs / chk.rhs);
        if chk.lhs > chk.rhs * (1.0 + QUADRATURE_SLACK) {
            failures += 1;
        }
    }
    let pass = failures == 0;
    line(
        6,
        "Lipschitz stability",
        pass,
        &format!("{failures} violations in 100 pairs (50 source, 50 measure), max lhs/rhs {worst:.4} <= 1.05"),
    );
    assert!(pass);
}

#[test]
fn criterion_07_moment_bound() {
    let (cfg, report) = series_ensemble();
    let mut pass = true;
    let mut detail = Vec::new();
    for m in [1u32, 2] {
        let mr = moment_report(report, cfg, m).unwrap();
        let agree = (mr.series_bound - mr.closed_bound).abs() / mr.closed_bound;
        let ok = mr.empirical <= mr.closed_bound * (1.0 + QUADRATURE_SLACK) && agree <= 1e-9;
        pass &= ok;
        detail.push(format!(
            "m={m}: E|u|^m {:.4e} <= bound {:.4e}, series/closed rel diff {agree:.1e}",
            mr.empirical, mr.closed_bound
        ));
    }
    line(7, "moment bound", pass, &detail.join("; "));
    assert!(pass);
}

fn clt_config() -> EnsembleConfig {
    let d = unit_ball();
    let op = Arc::new(HOperator::on_ball(&d, 0.25).unwrap());
    let spec = constant_spec(&op, 2.0, 0.1, 0.05, tent());
    // 27 sites, τ ≤ 2 · 27 · 0.009 = 0.486 < c₀
    let model = MeasureModel::Alloy {
        spacing: 0.5,
        charge: ScalarLaw::Uniform { low: 0.0, high: 0.009 },
    };
    let mut cfg = EnsembleConfig::with_operator(model, spec, op, 1, 8).unwrap();
    cfg.threads = Some(4);
    cfg
}

#[test]
fn criterion_08_clt() {
    let start = Instant::now();
    let cfg = clt_config();
    let bound = cfg.model.tv_bound(cfg.domain()).unwrap() * cfg.tau_scale();
    let rep = clt_test(&cfg, 64, 200, None).unwrap();
    let own = clt_self_test(200, 8);
    let secs = start.elapsed().as_secs_f64();
    let critical = (-(0.005f64).ln() / 400.0).sqrt();
    let pass = bound < cfg.spec.c0()
        && rep.verdict.ks_stat <= critical
        && own.pass
        && secs <= 300.0;
    line(
        8,
        "CLT",
        pass,
        &format!(
            "KS {:.4} <= {critical:.4} (pilot {}, m {:.5e}, sigma {:.3e}), surrogate KS {:.4}, sup tau {bound:.3}, {secs:.1}s on 4 workers",
            rep.verdict.ks_stat, rep.pilot_size, rep.m_hat, rep.sigma_hat, own.ks_stat
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_lln() {
    let d = unit_ball();
    let op = Arc::new(HOperator::on_ball(&d, 0.25).unwrap());
    let spec = constant_spec(&op, 2.0, 0.3, 0.02, tent());
    let model = MeasureModel::Points {
        count: CountLaw::UniformRange { low: 0, high: 2 },
        charge: 0.1,
    };
    let cfg = EnsembleConfig::with_operator(model, spec, op, 1, 9).unwrap();
    let rep = lln_test(&cfg, &[], 256, 0.05, 200, None).unwrap();
    let q0 = 2.0 * cfg.spec.eps0() / (1.0 - rep.l_bound);
    let se = (rep.chebyshev_bound * (1.0 - rep.chebyshev_bound) / 200.0).sqrt();
    let pass = rep.pass
        && (rep.q0 - q0).abs() <= 1e-15
        && rep.empirical_prob <= rep.chebyshev_bound + 2.0 * se;
    line(
        9,
        "LLN",
        pass,
        &format!(
            "failure frequency {:.4} <= {:.4} + 2 x {se:.4} (Q0 {:.4}, L {:.2})",
            rep.empirical_prob, rep.chebyshev_bound, rep.q0, rep.l_bound
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_borel_cantelli() {
    let d = unit_ball();
    let op = Arc::new(HOperator::on_ball(&d, 0.5).unwrap());
    let spec = constant_spec(&op, 2.0, 0.1, 0.0, tent());
    // |S_k| ≥ 0.2 exactly when the k-th independent event of probability 2^-k occurs
    let model = MeasureModel::Ladder {
        location: vec![0.0; 3],
        jump: 0.4,
        ratio: 0.5,
        drift: 1e-3,
        depth: 40,
    };
    let cfg = EnsembleConfig::with_operator(model, spec, op, 1000, 10).unwrap();
    let rep = borel_cantelli_check(&cfg, 0.2, 12, 20_000).unwrap();
    let sum = rep.partial_sums[11];
    let se = rep.partial_sum_errors[11];
    let target = 1.0 - 0.5f64.powi(12);
    let pass = (sum - target).abs() <= 3.0 * se && rep.tail_fraction == 1.0 && rep.admissible_fraction == 1.0;
    line(
        10,
        "Borel-Cantelli",
        pass,
        &format!(
            "sum_(k<=12) P(L_k) = {sum:.5} vs {target:.5} (3 se = {:.5}); tail fraction {}, admissible {} of {} full draws",
            3.0 * se,
            rep.tail_fraction,
            rep.admissible_fraction,
            rep.full_draws
        ),
    );
    assert!(pass);
}

fn read_csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_11_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let base = r#"{
        "domain": {"dim": 3, "radius": 1.0},
        "h": 0.5,
        "seed": 11,
        "n_samples": 60,
        "problem": {
            "p": 2.0,
            "b": {"kind": "constant", "value": 0.1},
            "g": {"kind": "constant", "value": 0.05},
            "f": {"family": "tent", "amplitude": 1.0, "radius": 0.5},
            "c0": 0.5
        },
        "model": {"model": "points", "count": {"law": "uniform_range", "low": 0, "high": 3}, "charge": 0.05},
        "ensemble": {"moments": [1, 2]},
        "clt": {"k": 8, "trials": 20, "pilot_size": 200},
        "lln": {"k": 16, "delta": 0.05, "trials": 10, "pilot_size": 50}
    }"#;
    let ladder = r#"{
        "domain": {"dim": 3, "radius": 1.0},
        "h": 0.5,
        "seed": 11,
        "n_samples": 100,
        "problem": {
            "p": 2.0,
            "b": {"kind": "constant", "value": 0.1},
            "g": {"kind": "constant", "value": 0.0},
            "f": {"family": "tent", "amplitude": 1.0, "radius": 0.5},
            "c0": 0.5
        },
        "model": {"model": "ladder", "location": [0.0, 0.0, 0.0], "jump": 0.4, "ratio": 0.5, "drift": 0.001, "depth": 20},
        "borel_cantelli": {"c_tilde": 0.2, "k_max": 6, "n_per_k": 200}
    }"#;
    let mut identical = 0;
    let mut checked = Vec::new();
    for (command, text) in [
        (Command::Ensemble, base),
        (Command::Clt, base),
        (Command::Lln, base),
        (Command::BorelCantelli, ladder),
    ] {
        let mut runs = Vec::new();
        for (tag, threads) in [("a", Some(1)), ("b", Some(4)), ("c", None)] {
            let mut cfg = ExperimentConfig::from_json(text).unwrap();
            cfg.out = tmp.path().join(format!("{}-{tag}", command.name()));
            cfg.threads = threads;
            run(command, &cfg).unwrap();
            runs.push(read_csvs(&cfg.out));
        }
        assert!(!runs[0].is_empty());
        if runs.iter().all(|r| *r == runs[0]) {
            identical += 1;
        }
        checked.push(command.name());
    }
    let pass = identical == checked.len();
    line(
        11,
        "determinism",
        pass,
        &format!(
            "{identical}/{} commands ({}) byte-identical CSV across threads 1, 4 and default",
            checked.len(),
            checked.join(", ")
        ),
    );
    assert!(pass);
}
