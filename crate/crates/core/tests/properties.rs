use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use randschro::domain::{kernel_upper_bound, BallDomain, GreenKernel};
use randschro::ensemble::chebyshev_bound;
use randschro::measures::{Atom, AtomicMeasure};
use randschro::operator::{signed_pow, GridField, HOperator};
use randschro::potential::{evaluate_potential, potential_sup_bound, BumpProfile};
use randschro::solver::{a_priori_iterations, budget_for_tau, is_admissible, ProblemSpec};
use randschro::stats::wilson_interval;

fn ball() -> BallDomain {
    BallDomain::centered(3, 1.0).unwrap()
}

fn operator() -> &'static HOperator {
    static OP: OnceLock<HOperator> = OnceLock::new();
    OP.get_or_init(|| HOperator::on_ball(&ball(), 0.25).unwrap())
}

fn point_in_ball() -> impl Strategy<Value = Vec<f64>> {
    (prop::collection::vec(-1.0f64..1.0, 3), 0.0f64..0.99).prop_map(|(v, r)| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-9);
        v.iter().map(|x| x / n * r).collect()
    })
}

fn measure() -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((point_in_ball(), -2.0f64..2.0), 0..6).prop_map(|atoms| {
        AtomicMeasure::from_atoms(
            atoms
                .into_iter()
                .map(|(location, weight)| Atom { location, weight })
                .collect(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kernel_symmetric_nonnegative_dominated(x in point_in_ball(), y in point_in_ball()) {
        prop_assume!(x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() > 1e-6);
        let k = GreenKernel::new(ball());
        let gxy = k.eval(&x, &y).unwrap();
        let gyx = k.eval(&y, &x).unwrap();
        prop_assert!(gxy >= 0.0);
        prop_assert!((gxy - gyx).abs() <= 1e-12 * gxy.max(1.0));
        prop_assert!(gxy <= kernel_upper_bound(3, &x, &y).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn operator_linear_and_monotone(a in -3.0f64..3.0, seed in 0u64..1000) {
        let op = operator();
        let layout = op.layout();
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let phi = GridField::from_fn(layout, |_| next());
        let psi = GridField::from_fn(layout, |_| next() - 0.5);
        let lhs = op.apply(&phi.lin_comb(a, &psi, 1.0).unwrap()).unwrap();
        let rhs = op.apply(&phi).unwrap().lin_comb(a, &op.apply(&psi).unwrap(), 1.0).unwrap();
        prop_assert!(lhs.sup_distance(&rhs).unwrap() <= 1e-12 * (1.0 + lhs.sup_norm()));
        // φ ≥ 0 gives Hφ ≥ 0
        prop_assert!(op.apply(&phi).unwrap().values().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn potential_bounded_by_total_variation(mu in measure(), x in point_in_ball(), w in 0.05f64..1.0) {
        let f = BumpProfile::TruncatedGaussian { amplitude: 1.3, width: w, cutoff: 2.0 * w };
        prop_assert!(evaluate_potential(&f, &mu, &x).abs() <= potential_sup_bound(&f, &mu) * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn merging_never_increases_variation(mu in measure(), s in -3.0f64..3.0) {
        let doubled = mu.concat(&mu).merged();
        prop_assert!((doubled.total_variation() - 2.0 * mu.total_variation()).abs() <= 1e-12 * (1.0 + mu.total_variation()));
        prop_assert!(mu.merged().total_variation() <= mu.total_variation() + 1e-12);
        prop_assert!((mu.scaled(s).total_variation() - s.abs() * mu.total_variation()).abs() <= 1e-12 * (1.0 + mu.total_variation()));
    }

    #[test]
    fn admissible_iff_tau_below_c0(p in 1.1f64..4.0, b in 0.01f64..1.0, c0 in 0.05f64..0.95, tau in 0.0f64..2.0) {
        prop_assume!((tau - c0).abs() > 1e-9);
        let layout = operator().layout();
        let spec = ProblemSpec::new(
            p,
            GridField::constant(layout, b),
            GridField::constant(layout, 0.0),
            BumpProfile::Constant { amplitude: 1.0 },
            c0,
            None,
        ).unwrap();
        prop_assert_eq!(is_admissible(&budget_for_tau(&spec, tau), 0.0, spec.l0()), tau < c0);
    }

    #[test]
    fn a_priori_count_is_minimal(q in 0.01f64..0.99, first in 1e-6f64..10.0, e in 1i32..12) {
        let tol = 10f64.powi(-e);
        let k = a_priori_iterations(q, first, tol).unwrap();
        let bound = |k: usize| q.powi(k as i32) * first / (1.0 - q);
        prop_assert!(bound(k) <= tol);
        prop_assert!(k == 0 || bound(k - 1) > tol);
    }

    #[test]
    fn signed_pow_is_odd(u in -5.0f64..5.0, p in 1.01f64..4.0) {
        prop_assert_eq!(signed_pow(-u, p), -signed_pow(u, p));
        prop_assert!((signed_pow(u, p).abs() - u.abs().powf(p)).abs() <= 1e-12 * (1.0 + u.abs().powf(p)));
    }

    #[test]
    fn chebyshev_monotone(q0 in 0.01f64..1.0, k in 1usize..10_000, delta in 0.01f64..1.0) {
        prop_assert!(chebyshev_bound(q0, delta, 2 * k) <= chebyshev_bound(q0, delta, k));
        prop_assert!(chebyshev_bound(1.1 * q0, delta, k) >= chebyshev_bound(q0, delta, k));
    }

    #[test]
    fn wilson_contains_p_hat(n in 1usize..5000, frac in 0.0f64..=1.0) {
        let s = ((n as f64) * frac).round() as usize;
        let ci = wilson_interval(s, n);
        prop_assert!(ci.contains(s as f64 / n as f64));
    }
}

#[test]
fn operator_shared_across_threads() {
    let op = Arc::new(HOperator::on_ball(&ball(), 0.5).unwrap());
    let one = GridField::constant(op.layout(), 1.0);
    let expected = op.apply(&one).unwrap();
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let op = Arc::clone(&op);
            let one = one.clone();
            std::thread::spawn(move || op.apply(&one).unwrap())
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), expected);
    }
}
