//! Contraction constants, admissibility, Picard iteration and the Lipschitz
//! stability estimate for
//!
//! ```text
//! u = H(g) + H(V_ω u) + H(b u|u|^(p-1))
//! ```
//!
//! With `τ = l₀ ‖f‖∞ |μ_ω|`, `K = l₀ p ‖b‖∞` and a radius parameter `ε`, the
//! map `Φ` is a contraction on the ball `‖u‖∞ ≤ 2ε/(1-τ)` whenever
//!
//! ```text
//! τ < 1,   2^p K ε^(p-1) / (1-τ)^(p-1) + τ < 1,   ‖g‖∞ ≤ ε / l₀,
//! ```
//!
//! with contraction factor `q = τ + 2^p K ε^(p-1) / (1-τ)^(p-1)`.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measures::AtomicMeasure;
use crate::operator::{GridField, GridLayout, HOperator};
use crate::potential::{potential_field, BumpProfile};

/// Deterministic coefficient or source field, specified analytically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant { value: f64 },
    /// `A exp(-|x - c|² / (2 s²))` centered at the domain center.
    Gaussian { amplitude: f64, width: f64 },
}

impl FieldSpec {
    pub fn sample(&self, layout: &Arc<GridLayout>) -> GridField {
        match *self {
            FieldSpec::Constant { value } => GridField::constant(layout, value),
            FieldSpec::Gaussian { amplitude, width } => {
                let domain = layout.domain().clone();
                GridField::from_fn(layout, |x| {
                    let r = domain.radial(x);
                    amplitude * (-r * r / (2.0 * width * width)).exp()
                })
            }
        }
    }

    fn validate(&self, name: &'static str) -> Result<()> {
        let ok = match *self {
            FieldSpec::Constant { value } => value.is_finite(),
            FieldSpec::Gaussian { amplitude, width } => amplitude.is_finite() && width > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(name, format!("invalid field {self:?}")))
        }
    }
}

/// Serializable description of the deterministic problem data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub p: f64,
    pub b: FieldSpec,
    pub g: FieldSpec,
    pub f: BumpProfile,
    pub c0: f64,
    /// Overrides `ε₀` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl ProblemConfig {
    pub fn build(&self, layout: &Arc<GridLayout>) -> Result<ProblemSpec> {
        self.b.validate("b")?;
        self.g.validate("g")?;
        ProblemSpec::new(
            self.p,
            self.b.sample(layout),
            self.g.sample(layout),
            self.f,
            self.c0,
            self.epsilon,
        )
    }
}

/// Deterministic data `(p, b, g, f, c₀)` on a grid.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    p: f64,
    b: GridField,
    g: GridField,
    f: BumpProfile,
    c0: f64,
    epsilon: Option<f64>,
}

impl ProblemSpec {
    /// Validates `p > 1`, `0 < c₀ < 1`, matching layouts, and the source
    /// bound `‖g‖∞ < (1/l₀) (1/(2^p K))^(1/(p-1))`.
    pub fn new(
        p: f64,
        b: GridField,
        g: GridField,
        f: BumpProfile,
        c0: f64,
        epsilon: Option<f64>,
    ) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::param("p", format!("exponent must satisfy p > 1, got {p}")));
        }
        if !(c0 > 0.0 && c0 < 1.0) {
            return Err(Error::param("c0", format!("must lie in (0, 1), got {c0}")));
        }
        if let Some(e) = epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::param("epsilon", format!("must be positive, got {e}")));
            }
        }
        if !b.same_layout(&g) {
            return Err(Error::LayoutMismatch);
        }
        f.validate()?;
        let spec = Self {
            p,
            b,
            g,
            f,
            c0,
            epsilon,
        };
        let l0 = spec.l0();
        let k = spec.k_constant();
        if k > 0.0 {
            let limit = (1.0 / (2f64.powf(p) * k)).powf(1.0 / (p - 1.0)) / l0;
            if spec.g.sup_norm() >= limit {
                return Err(Error::param(
                    "g",
                    format!("sup|g| = {} must be below {limit}", spec.g.sup_norm()),
                ));
            }
        }
        Ok(spec)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn b(&self) -> &GridField {
        &self.b
    }

    pub fn g(&self) -> &GridField {
        &self.g
    }

    pub fn f(&self) -> &BumpProfile {
        &self.f
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn layout(&self) -> &Arc<GridLayout> {
        self.g.layout()
    }

    pub fn l0(&self) -> f64 {
        self.layout().domain().l0()
    }

    /// `K = l₀ p ‖b‖∞`.
    pub fn k_constant(&self) -> f64 {
        self.l0() * self.p * self.b.sup_norm()
    }

    /// `ε₀ = ((1-c₀)^p / (2^p K))^(1/(p-1))`.
    ///
    /// With `K = 0` the nonlinear term vanishes and the smallest admissible
    /// radius `l₀ ‖g‖∞` is used instead.
    pub fn eps0(&self) -> f64 {
        let k = self.k_constant();
        if k == 0.0 {
            return self.l0() * self.g.sup_norm();
        }
        ((1.0 - self.c0).powf(self.p) / (2f64.powf(self.p) * k)).powf(1.0 / (self.p - 1.0))
    }

    /// `ε`: the override if present, otherwise `ε₀`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or_else(|| self.eps0())
    }

    /// Same data with the source replaced.
    pub fn with_source(&self, g: GridField) -> Result<Self> {
        Self::new(self.p, self.b.clone(), g, self.f, self.c0, self.epsilon)
    }
}

/// Contraction constants for one realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionBudget {
    pub p: f64,
    pub tau: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "eps0")]
    pub epsilon: f64,
    /// `None` when `τ ≥ 1`.
    pub q: Option<f64>,
}

impl ContractionBudget {
    /// `2^p K ε^(p-1) / (1-τ)^(p-1)`; `None` when `τ ≥ 1`.
    pub fn nonlinear_term(&self) -> Option<f64> {
        (self.tau < 1.0).then(|| nonlinear_term(self.p, self.k, self.epsilon, self.tau))
    }

    /// `2ε / (1-τ)`, the radius of the invariant ball.
    pub fn norm_bound(&self) -> f64 {
        if self.tau < 1.0 {
            2.0 * self.epsilon / (1.0 - self.tau)
        } else {
            f64::INFINITY
        }
    }
}

fn nonlinear_term(p: f64, k: f64, eps: f64, tau: f64) -> f64 {
    if k == 0.0 {
        return 0.0;
    }
    2f64.powf(p) * k * eps.powf(p - 1.0) / (1.0 - tau).powf(p - 1.0)
}

/// `τ = l₀ ‖f‖∞ |μ|`, `K = l₀ p ‖b‖∞`, `ε` and `q`.
pub fn contraction_constants(spec: &ProblemSpec, mu: &AtomicMeasure) -> ContractionBudget {
    budget_for_tau(spec, spec.l0() * spec.f.sup_norm() * mu.total_variation())
}

/// Budget for a prescribed `τ`.
pub fn budget_for_tau(spec: &ProblemSpec, tau: f64) -> ContractionBudget {
    let k = spec.k_constant();
    let epsilon = spec.epsilon();
    let q = (tau < 1.0).then(|| tau + nonlinear_term(spec.p, k, epsilon, tau));
    ContractionBudget {
        p: spec.p,
        tau,
        k,
        epsilon,
        q,
    }
}

/// The smallness conditions for a contraction on `‖u‖∞ ≤ 2ε/(1-τ)`.
pub fn is_admissible(budget: &ContractionBudget, g_norm: f64, l0: f64) -> bool {
    match budget.nonlinear_term() {
        Some(nl) => budget.tau >= 0.0 && nl + budget.tau < 1.0 && g_norm <= budget.epsilon / l0,
        None => false,
    }
}

/// Smallest `k` with `q^k · first_step / (1-q) ≤ tol`.
pub fn a_priori_iterations(q: f64, first_step: f64, tol: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::NotAContraction(q));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    if first_step <= 0.0 {
        return Ok(0);
    }
    let bound = |k: usize| q.powi(k as i32) * first_step / (1.0 - q);
    if bound(0) <= tol {
        return Ok(0);
    }
    if q == 0.0 {
        return Ok(1);
    }
    let guess = ((tol * (1.0 - q) / first_step).ln() / q.ln()).ceil().max(0.0) as usize;
    let mut k = guess.saturating_sub(1);
    while bound(k) > tol {
        k += 1;
    }
    while k > 0 && bound(k - 1) <= tol {
        k -= 1;
    }
    Ok(k)
}

/// Result of a fixed-point solve.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub admissible: bool,
    pub budget: ContractionBudget,
    pub u: Option<GridField>,
    pub iterations: usize,
    /// `‖u - Φ(u)‖∞`, measured; 0 when not admissible.
    pub residual: f64,
    pub norm_bound: f64,
    /// `‖u_{k+1} - u_k‖∞`; the last entry is the residual of the returned `u`.
    pub gaps: Vec<f64>,
}

/// JSON summary of a [`SolveOutcome`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub admissible: bool,
    pub tau: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub eps0: f64,
    pub q: Option<f64>,
    pub iterations: usize,
    pub residual: Option<f64>,
    pub sup_norm: Option<f64>,
    pub norm_bound: Option<f64>,
}

impl SolveOutcome {
    pub fn sup_norm(&self) -> Option<f64> {
        self.u.as_ref().map(GridField::sup_norm)
    }

    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            admissible: self.admissible,
            tau: self.budget.tau,
            k: self.budget.k,
            eps0: self.budget.epsilon,
            q: self.budget.q,
            iterations: self.iterations,
            residual: self.admissible.then_some(self.residual),
            sup_norm: self.sup_norm(),
            norm_bound: self.norm_bound.is_finite().then_some(self.norm_bound),
        }
    }
}

/// Picard iteration `u_{k+1} = Φ(u_k)` from `u₀ = 0`.
pub fn picard_solve(
    spec: &ProblemSpec,
    mu: &AtomicMeasure,
    op: &HOperator,
    tol: f64,
    max_iter: usize,
) -> Result<SolveOutcome> {
    let zero = GridField::zeros(op.layout());
    picard_solve_from(spec, mu, op, zero, tol, max_iter)
}

/// Picard iteration from an arbitrary starting field.
///
/// Stops once `‖u_{k+1} - u_k‖∞ ≤ tol (1-q)/q` or the a-priori iteration
/// count is reached, and only returns a field whose measured residual is at
/// most `tol`.
pub fn picard_solve_from(
    spec: &ProblemSpec,
    mu: &AtomicMeasure,
    op: &HOperator,
    initial: GridField,
    tol: f64,
    max_iter: usize,
) -> Result<SolveOutcome> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    if !initial.same_layout(spec.g()) || !crate::operator::same_layout(op.layout(), spec.layout()) {
        return Err(Error::LayoutMismatch);
    }
    let budget = contraction_constants(spec, mu);
    let l0 = op.l0();
    let norm_bound = budget.norm_bound();
    if !is_admissible(&budget, spec.g.sup_norm(), l0) {
        return Ok(SolveOutcome {
            admissible: false,
            budget,
            u: None,
            iterations: 0,
            residual: 0.0,
            norm_bound,
            gaps: Vec::new(),
        });
    }
    let q = budget.q.expect("admissible implies tau < 1");
    let threshold = if q > 0.0 { tol * (1.0 - q) / q } else { f64::INFINITY };
    let v = potential_field(&spec.f, mu, op.layout());

    let mut u = initial;
    let mut gaps = Vec::new();
    let mut iterations = 0;
    let mut cap = usize::MAX;
    let mut settled = false;
    let residual = loop {
        let next = op.compose_rhs(&spec.g, &spec.b, &v, &u, spec.p)?;
        let gap = next.sup_distance(&u)?;
        gaps.push(gap);
        if settled && gap <= tol {
            break gap;
        }
        if iterations >= max_iter {
            return Err(Error::NonConvergence { iterations, gap });
        }
        iterations += 1;
        if iterations == 1 {
            cap = a_priori_iterations(q, gap, tol)?;
        }
        u = next;
        if gap <= threshold || iterations >= cap {
            settled = true;
        }
    };
    Ok(SolveOutcome {
        admissible: true,
        budget,
        u: Some(u),
        iterations,
        residual,
        norm_bound,
        gaps,
    })
}

/// `max_k ‖u_{k+1} - u_k‖ / ‖u_k - u_{k-1}‖` over gaps above `1e-14`.
pub fn observed_contraction(gaps: &[f64]) -> Result<f64> {
    if gaps.len() < 2 {
        return Err(Error::InsufficientHistory {
            needed: 3,
            got: gaps.len() + 1,
        });
    }
    Ok(gaps
        .windows(2)
        .filter(|w| w[0] > 1e-14)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max))
}

/// Both sides of the stability estimate for two admissible solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub denominator: f64,
    pub valid: bool,
}

/// Compares `‖u₁ - u₂‖∞` against
///
/// ```text
/// l₀ (‖g₁ - g₂‖∞ + 2ε₀/(1-η) ‖f‖∞ |μ₁ - μ₂|) / (1 - η - 2^p K ε₀^(p-1)/(1-η)^(p-1))
/// ```
///
/// with `η = l₀ ‖f‖∞ max(|μ₁|, |μ₂|)`. `valid` is false when the
/// denominator is not positive.
pub fn lipschitz_gap(
    first: (&SolveOutcome, &ProblemSpec, &AtomicMeasure),
    second: (&SolveOutcome, &ProblemSpec, &AtomicMeasure),
) -> Result<LipschitzCheck> {
    let (out1, spec1, mu1) = first;
    let (out2, spec2, mu2) = second;
    let (u1, u2) = match (&out1.u, &out2.u) {
        (Some(a), Some(b)) if out1.admissible && out2.admissible => (a, b),
        _ => return Err(Error::NotAdmissible),
    };
    let lhs = u1.sup_distance(u2)?;
    let l0 = spec1.l0();
    let f_sup = spec1.f.sup_norm();
    let eta = l0 * f_sup * mu1.total_variation().max(mu2.total_variation());
    let eps0 = out1.budget.epsilon;
    let k = out1.budget.k;
    let g_gap = spec1.g.sup_distance(&spec2.g)?;
    let mu_gap = mu1.distance_tv(mu2);
    let denom = 1.0 - eta - nonlinear_term(spec1.p, k, eps0, eta);
    let numer = l0 * (g_gap + 2.0 * eps0 / (1.0 - eta) * f_sup * mu_gap);
    let valid = eta < 1.0 && denom > 0.0;
    Ok(LipschitzCheck {
        lhs,
        rhs: if valid { numer / denom } else { f64::INFINITY },
        denominator: denom,
        valid,
    })
}
