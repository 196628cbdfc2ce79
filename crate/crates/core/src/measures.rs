//! Finite signed atomic measures and samplers for random-measure models.
//!
//! Every realization `μ_ω` is represented as a finite list of weighted Dirac
//! atoms. Samplers are pure functions of the model parameters and the RNG
//! state handed to them.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::domain::BallDomain;
use crate::error::{Error, Result};

/// A weighted Dirac atom `w δ_η`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub location: Vec<f64>,
    pub weight: f64,
}

/// `μ = Σ wᵢ δ_{ηᵢ}`. Serializes as a JSON array of `{location, weight}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_atoms(atoms: Vec<Atom>) -> Self {
        Self { atoms }
    }

    pub fn dirac(location: Vec<f64>, weight: f64) -> Self {
        Self {
            atoms: vec![Atom { location, weight }],
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Total variation `|μ| = Σ |wᵢ|` of the atom list as stored.
    ///
    /// Atoms sharing a location are not merged here; use [`Self::merged`]
    /// first when the list may contain cancelling duplicates.
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.abs()).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    location: a.location.clone(),
                    weight: factor * a.weight,
                })
                .collect(),
        }
    }

    /// Concatenation of the two atom lists, i.e. `μ + ν`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Self { atoms }
    }

    /// Same measure with atoms at identical locations combined and zero
    /// weights dropped. Order follows first appearance.
    pub fn merged(&self) -> Self {
        let mut out: Vec<Atom> = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            match out.iter_mut().find(|b| b.location == a.location) {
                Some(b) => b.weight += a.weight,
                None => out.push(a.clone()),
            }
        }
        out.retain(|a| a.weight != 0.0);
        Self { atoms: out }
    }

    /// `|μ - ν|` computed on the merged atom list.
    pub fn distance_tv(&self, other: &Self) -> f64 {
        self.concat(&other.scaled(-1.0)).merged().total_variation()
    }

    /// Checks that every atom lies in the closed ball.
    pub fn validate(&self, domain: &BallDomain) -> Result<()> {
        for a in &self.atoms {
            domain.check_closed(&a.location)?;
            if !a.weight.is_finite() {
                return Err(Error::param("weight", "atom weights must be finite"));
            }
        }
        Ok(())
    }
}

/// Law of a real coefficient with a declared almost-sure bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarLaw {
    /// Uniform on `[low, high)`.
    Uniform { low: f64, high: f64 },
    /// `value` with probability `p`, otherwise 0.
    Bernoulli { p: f64, value: f64 },
    Deterministic { value: f64 },
}

impl ScalarLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ScalarLaw::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return Err(Error::param("uniform", format!("need low < high, got [{low}, {high})")));
                }
            }
            ScalarLaw::Bernoulli { p, value } => {
                if !(0.0..=1.0).contains(&p) || !value.is_finite() {
                    return Err(Error::param("bernoulli", format!("need p in [0,1], got {p}")));
                }
            }
            ScalarLaw::Deterministic { value } => {
                if !value.is_finite() {
                    return Err(Error::param("deterministic", "value must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ScalarLaw::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            ScalarLaw::Bernoulli { p, value } => {
                if rng.random::<f64>() < p {
                    value
                } else {
                    0.0
                }
            }
            ScalarLaw::Deterministic { value } => value,
        }
    }

    /// Almost-sure bound on `|X|`.
    pub fn abs_bound(&self) -> f64 {
        match *self {
            ScalarLaw::Uniform { low, high } => low.abs().max(high.abs()),
            ScalarLaw::Bernoulli { value, .. } | ScalarLaw::Deterministic { value } => value.abs(),
        }
    }

    /// `P(|X| < t)`.
    pub fn prob_abs_below(&self, t: f64) -> f64 {
        match *self {
            ScalarLaw::Uniform { low, high } => {
                let lo = low.max(-t);
                let hi = high.min(t);
                ((hi - lo) / (high - low)).clamp(0.0, 1.0)
            }
            ScalarLaw::Bernoulli { p, value } => {
                let below_zero = if t > 0.0 { 1.0 - p } else { 0.0 };
                let below_value = if value.abs() < t { p } else { 0.0 };
                below_zero + below_value
            }
            ScalarLaw::Deterministic { value } => indicator(value.abs() < t),
        }
    }

    fn is_deterministic(&self) -> Option<f64> {
        match *self {
            ScalarLaw::Deterministic { value } => Some(value),
            ScalarLaw::Bernoulli { p, value } if p == 1.0 => Some(value),
            ScalarLaw::Bernoulli { p, .. } if p == 0.0 => Some(0.0),
            _ => None,
        }
    }
}

/// Law of the number of atoms in the points model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum CountLaw {
    Deterministic { count: usize },
    /// Poisson with mean `intensity · vol(U)`.
    Poisson { intensity: f64 },
    /// Uniform on `{low, ..., high}`.
    UniformRange { low: usize, high: usize },
}

impl CountLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CountLaw::Poisson { intensity } if !(intensity >= 0.0 && intensity.is_finite()) => {
                Err(Error::param("poisson", format!("intensity must be >= 0, got {intensity}")))
            }
            CountLaw::UniformRange { low, high } if low > high => {
                Err(Error::param("uniform_range", format!("need low <= high, got {low}..={high}")))
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, volume: f64, rng: &mut R) -> usize {
        match *self {
            CountLaw::Deterministic { count } => count,
            CountLaw::Poisson { intensity } => {
                let mean = intensity * volume;
                if mean <= 0.0 {
                    0
                } else {
                    let d = Poisson::new(mean).expect("positive finite mean");
                    d.sample(rng) as usize
                }
            }
            CountLaw::UniformRange { low, high } => rng.random_range(low..=high),
        }
    }

    pub fn mean(&self, volume: f64) -> f64 {
        match *self {
            CountLaw::Deterministic { count } => count as f64,
            CountLaw::Poisson { intensity } => intensity * volume,
            CountLaw::UniformRange { low, high } => (low + high) as f64 / 2.0,
        }
    }

    /// Almost-sure maximum, `None` when unbounded.
    pub fn max(&self) -> Option<usize> {
        match *self {
            CountLaw::Deterministic { count } => Some(count),
            CountLaw::Poisson { intensity } if intensity == 0.0 => Some(0),
            CountLaw::Poisson { .. } => None,
            CountLaw::UniformRange { high, .. } => Some(high),
        }
    }

    /// `P(N < t)` for real `t`.
    pub fn prob_below(&self, volume: f64, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        // N < t  ⟺  N <= ceil(t) - 1
        let kmax = t.ceil() as i64 - 1;
        match *self {
            CountLaw::Deterministic { count } => indicator((count as f64) < t),
            CountLaw::Poisson { intensity } => poisson_cdf(intensity * volume, kmax),
            CountLaw::UniformRange { low, high } => {
                let hits = (kmax.min(high as i64) - low as i64 + 1).max(0) as f64;
                hits / (high - low + 1) as f64
            }
        }
    }
}

/// One term `a_j μ_j` of a series measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesTerm {
    pub base: AtomicMeasure,
    pub coefficient: ScalarLaw,
}

/// A random-measure model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureModel {
    /// `μ_ω = 0`.
    Empty,
    /// Charges `q_i` at the lattice sites `(spacing · ℤⁿ) ∩ U`.
    Alloy { spacing: f64, charge: ScalarLaw },
    /// `N` atoms i.i.d. uniform on `U`, each with weight `charge`.
    Points {
        count: CountLaw,
        #[serde(default = "unit_charge")]
        charge: f64,
    },
    /// `Σ_{j≤J} a_j μ_j` with independent coefficients.
    Series { terms: Vec<SeriesTerm> },
    /// Series on a single atom whose partial sums exceed `jump` exactly on
    /// independent events of probability `ratio^k`:
    /// `S_k = (jump · 1[B_k] + Σ_{j≤k} drift · ratio^j) δ_location`.
    Ladder {
        location: Vec<f64>,
        jump: f64,
        ratio: f64,
        drift: f64,
        depth: usize,
    },
}

fn unit_charge() -> f64 {
    1.0
}

/// A draw of a series-type model kept term by term, so that partial sums
/// `S_k = Σ_{j≤k} a_j μ_j` can be inspected.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesDraw {
    pub coefficients: Vec<f64>,
    pub bases: Vec<AtomicMeasure>,
}

impl SeriesDraw {
    pub fn depth(&self) -> usize {
        self.coefficients.len()
    }

    /// `S_k` for `k` terms (clamped to the depth).
    pub fn partial_sum(&self, k: usize) -> AtomicMeasure {
        let k = k.min(self.depth());
        let mut atoms = Vec::new();
        for (a, base) in self.coefficients[..k].iter().zip(&self.bases[..k]) {
            if *a != 0.0 {
                atoms.extend(base.scaled(*a).atoms);
            }
        }
        AtomicMeasure::from_atoms(atoms).merged()
    }

    /// `|S_k|` for `k = 1..=depth`.
    pub fn partial_variations(&self) -> Vec<f64> {
        (1..=self.depth())
            .map(|k| self.partial_sum(k).total_variation())
            .collect()
    }

    pub fn full(&self) -> AtomicMeasure {
        self.partial_sum(self.depth())
    }
}

impl MeasureModel {
    pub fn validate(&self, domain: &BallDomain) -> Result<()> {
        match self {
            MeasureModel::Empty => Ok(()),
            MeasureModel::Alloy { spacing, charge } => {
                if !(*spacing > 0.0 && spacing.is_finite()) {
                    return Err(Error::param("spacing", format!("must be positive, got {spacing}")));
                }
                charge.validate()
            }
            MeasureModel::Points { count, charge } => {
                if !charge.is_finite() {
                    return Err(Error::param("charge", "must be finite"));
                }
                count.validate()
            }
            MeasureModel::Series { terms } => {
                if terms.is_empty() {
                    return Err(Error::param("terms", "series needs at least one term"));
                }
                for t in terms {
                    t.base.validate(domain)?;
                    t.coefficient.validate()?;
                }
                Ok(())
            }
            MeasureModel::Ladder {
                location,
                jump,
                ratio,
                drift,
                depth,
            } => {
                domain.check_closed(location)?;
                if *depth == 0 {
                    return Err(Error::param("depth", "must be >= 1"));
                }
                if !(0.0..1.0).contains(ratio) {
                    return Err(Error::param("ratio", format!("need 0 <= ratio < 1, got {ratio}")));
                }
                if !jump.is_finite() || !drift.is_finite() {
                    return Err(Error::param("jump", "jump and drift must be finite"));
                }
                Ok(())
            }
        }
    }

    /// Draws one realization `μ_ω`.
    pub fn sample<R: Rng + ?Sized>(&self, domain: &BallDomain, rng: &mut R) -> AtomicMeasure {
        match self {
            MeasureModel::Empty => AtomicMeasure::empty(),
            MeasureModel::Alloy { spacing, charge } => sample_alloy(domain, *spacing, charge, rng),
            MeasureModel::Points { count, charge } => sample_points(domain, count, *charge, rng),
            MeasureModel::Series { .. } | MeasureModel::Ladder { .. } => self
                .sample_series(rng)
                .expect("series-type model")
                .full(),
        }
    }

    /// Term-by-term draw for series-type models.
    pub fn sample_series<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SeriesDraw> {
        match self {
            MeasureModel::Series { terms } => Ok(SeriesDraw {
                coefficients: terms.iter().map(|t| t.coefficient.sample(rng)).collect(),
                bases: terms.iter().map(|t| t.base.clone()).collect(),
            }),
            MeasureModel::Ladder {
                location,
                jump,
                ratio,
                drift,
                depth,
            } => {
                let mut coefficients = Vec::with_capacity(*depth);
                let mut prev = 0.0;
                let mut p = 1.0;
                for _ in 0..*depth {
                    p *= ratio;
                    let hit = if rng.random::<f64>() < p { 1.0 } else { 0.0 };
                    coefficients.push(jump * (hit - prev) + drift * p);
                    prev = hit;
                }
                Ok(SeriesDraw {
                    coefficients,
                    bases: vec![AtomicMeasure::dirac(location.clone(), 1.0); *depth],
                })
            }
            _ => Err(Error::param("model", "not a series-type model")),
        }
    }

    /// Almost-sure bound on `|μ_ω|`; `None` when the model is unbounded.
    pub fn tv_bound(&self, domain: &BallDomain) -> Option<f64> {
        match self {
            MeasureModel::Empty => Some(0.0),
            MeasureModel::Alloy { spacing, charge } => {
                Some(lattice_sites(domain, *spacing).len() as f64 * charge.abs_bound())
            }
            MeasureModel::Points { count, charge } => count.max().map(|m| m as f64 * charge.abs()),
            MeasureModel::Series { terms } => Some(
                terms
                    .iter()
                    .map(|t| t.coefficient.abs_bound() * t.base.total_variation())
                    .sum(),
            ),
            MeasureModel::Ladder {
                jump,
                ratio,
                drift,
                depth,
                ..
            } => {
                let drift_total: f64 = (1..=*depth).map(|j| (drift * ratio.powi(j as i32)).abs()).sum();
                Some(jump.abs() + drift_total)
            }
        }
    }

    /// `ν([0, t)) = P(|μ_ω| < t)` when it has a closed form.
    pub fn tv_prob_below(&self, domain: &BallDomain, t: f64) -> Option<f64> {
        match self {
            MeasureModel::Empty => Some(indicator(0.0 < t)),
            MeasureModel::Alloy { spacing, charge } => {
                let sites = lattice_sites(domain, *spacing).len();
                if sites == 0 {
                    return Some(indicator(0.0 < t));
                }
                match *charge {
                    ScalarLaw::Deterministic { value } => Some(indicator(sites as f64 * value.abs() < t)),
                    ScalarLaw::Bernoulli { p, value } => {
                        if value == 0.0 {
                            Some(indicator(0.0 < t))
                        } else {
                            // |μ| = |value| · Binomial(sites, p)
                            let kmax = (t / value.abs()).ceil() as i64 - 1;
                            Some(binomial_cdf(sites, p, kmax))
                        }
                    }
                    ScalarLaw::Uniform { .. } if sites == 1 => Some(charge.prob_abs_below(t)),
                    ScalarLaw::Uniform { .. } => None,
                }
            }
            MeasureModel::Points { count, charge } => {
                if *charge == 0.0 {
                    Some(indicator(0.0 < t))
                } else {
                    Some(count.prob_below(domain.volume(), t / charge.abs()))
                }
            }
            MeasureModel::Series { terms } => {
                let coefficients: Option<Vec<f64>> =
                    terms.iter().map(|t| t.coefficient.is_deterministic()).collect();
                let draw = SeriesDraw {
                    coefficients: coefficients?,
                    bases: terms.iter().map(|t| t.base.clone()).collect(),
                };
                Some(indicator(draw.full().total_variation() < t))
            }
            MeasureModel::Ladder { .. } => None,
        }
    }

    /// The series model of the almost-sure existence example: base measures
    /// `μ_j` with coefficients uniform on `(-b_j, b_j)`, where
    /// `b_j = level · ζ(q)⁻¹ / (l₀ |μ_j| ‖f‖∞) · j^(-q)`.
    ///
    /// Every draw then has `l₀ ‖f‖∞ |μ_ω| < level`.
    pub fn decaying_series(
        bases: Vec<AtomicMeasure>,
        q: f64,
        level: f64,
        l0: f64,
        f_sup: f64,
    ) -> Result<Self> {
        if q <= 1.0 {
            return Err(Error::param("q", format!("need q > 1, got {q}")));
        }
        if !(level > 0.0 && l0 > 0.0 && f_sup > 0.0) {
            return Err(Error::param("level", "level, l0 and sup|f| must be positive"));
        }
        let zeta = zeta(q);
        let terms = bases
            .into_iter()
            .enumerate()
            .map(|(i, base)| {
                let tv = base.total_variation();
                let coefficient = if tv == 0.0 {
                    ScalarLaw::Deterministic { value: 0.0 }
                } else {
                    let b = level / (zeta * l0 * tv * f_sup) / ((i + 1) as f64).powf(q);
                    ScalarLaw::Uniform { low: -b, high: b }
                };
                SeriesTerm { base, coefficient }
            })
            .collect();
        Ok(MeasureModel::Series { terms })
    }
}

/// Lattice sites `(spacing · ℤⁿ) ∩ U` of the open ball.
pub fn lattice_sites(domain: &BallDomain, spacing: f64) -> Vec<Vec<f64>> {
    let n = domain.dim();
    let c = domain.center();
    let r = domain.radius();
    let lo: Vec<i64> = (0..n).map(|i| ((c[i] - r) / spacing).ceil() as i64).collect();
    let hi: Vec<i64> = (0..n).map(|i| ((c[i] + r) / spacing).floor() as i64).collect();
    if lo.iter().zip(&hi).any(|(a, b)| a > b) {
        return Vec::new();
    }
    let mut sites = Vec::new();
    let mut idx = lo.clone();
    loop {
        let p: Vec<f64> = idx.iter().map(|&k| k as f64 * spacing).collect();
        if domain.contains(&p) {
            sites.push(p);
        }
        // odometer increment
        let mut d = 0;
        loop {
            if d == n {
                return sites;
            }
            idx[d] += 1;
            if idx[d] <= hi[d] {
                break;
            }
            idx[d] = lo[d];
            d += 1;
        }
    }
}

/// Alloy model: i.i.d. charges on the lattice sites inside `U`.
pub fn sample_alloy<R: Rng + ?Sized>(
    domain: &BallDomain,
    spacing: f64,
    charge: &ScalarLaw,
    rng: &mut R,
) -> AtomicMeasure {
    let atoms = lattice_sites(domain, spacing)
        .into_iter()
        .map(|location| Atom {
            location,
            weight: charge.sample(rng),
        })
        .collect();
    AtomicMeasure::from_atoms(atoms)
}

/// Points model: a random number of unit-charge (times `charge`) atoms
/// placed i.i.d. uniformly in `U`.
pub fn sample_points<R: Rng + ?Sized>(
    domain: &BallDomain,
    count: &CountLaw,
    charge: f64,
    rng: &mut R,
) -> AtomicMeasure {
    let n = count.sample(domain.volume(), rng);
    let atoms = (0..n)
        .map(|_| Atom {
            location: uniform_in_ball(domain, rng),
            weight: charge,
        })
        .collect();
    AtomicMeasure::from_atoms(atoms)
}

/// Uniform point in the ball: Gaussian direction, radius `R U^(1/n)`.
pub fn uniform_in_ball<R: Rng + ?Sized>(domain: &BallDomain, rng: &mut R) -> Vec<f64> {
    let n = domain.dim();
    let mut dir: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let mut len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    while len == 0.0 {
        dir = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    let radius = domain.radius() * rng.random::<f64>().powf(1.0 / n as f64);
    dir.iter()
        .zip(domain.center())
        .map(|(d, c)| c + radius * d / len)
        .collect()
}

/// Riemann zeta `ζ(q) = Σ k^(-q)` for `q > 1` (Euler–Maclaurin tail).
pub fn zeta(q: f64) -> f64 {
    const N: usize = 1000;
    let head: f64 = (1..N).map(|k| (k as f64).powf(-q)).sum();
    let nf = N as f64;
    head + nf.powf(1.0 - q) / (q - 1.0) + 0.5 * nf.powf(-q) + q * nf.powf(-q - 1.0) / 12.0
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn poisson_cdf(mean: f64, kmax: i64) -> f64 {
    if kmax < 0 {
        return 0.0;
    }
    if mean == 0.0 {
        return 1.0;
    }
    let mut term = (-mean).exp();
    let mut sum = term;
    for k in 1..=kmax {
        term *= mean / k as f64;
        sum += term;
    }
    sum.min(1.0)
}

fn binomial_cdf(n: usize, p: f64, kmax: i64) -> f64 {
    if kmax < 0 {
        return 0.0;
    }
    if kmax as usize >= n {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut binom = 1.0;
    for k in 0..=kmax as usize {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
        }
        sum += binom * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
    }
    sum.min(1.0)
}
