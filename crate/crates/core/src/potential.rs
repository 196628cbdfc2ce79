//! Bump profiles `f` and the random potential `V_ω(x) = ∫_U f(x - y) dμ_ω(y)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::AtomicMeasure;
use crate::operator::{GridField, GridLayout};
use std::sync::Arc;

/// A radial profile `f ∈ BC(ℝⁿ)` with a closed-form sup norm `|A|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum BumpProfile {
    /// `A · max(0, 1 - |z|/radius)`.
    Tent { amplitude: f64, radius: f64 },
    /// `A (e^{-|z|²/2s²} - e^{-r²/2s²}) / (1 - e^{-r²/2s²})` inside the
    /// cutoff radius `r`, zero outside. Continuous, peak value `A`.
    TruncatedGaussian {
        amplitude: f64,
        width: f64,
        cutoff: f64,
    },
    Constant { amplitude: f64 },
}

impl BumpProfile {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            BumpProfile::Tent { amplitude, radius } => amplitude.is_finite() && radius > 0.0,
            BumpProfile::TruncatedGaussian {
                amplitude,
                width,
                cutoff,
            } => amplitude.is_finite() && width > 0.0 && cutoff > 0.0,
            BumpProfile::Constant { amplitude } => amplitude.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param("profile", format!("invalid parameters in {self:?}")))
        }
    }

    /// `‖f‖∞`.
    pub fn sup_norm(&self) -> f64 {
        match *self {
            BumpProfile::Tent { amplitude, .. }
            | BumpProfile::TruncatedGaussian { amplitude, .. }
            | BumpProfile::Constant { amplitude } => amplitude.abs(),
        }
    }

    /// `f(z)` as a function of `|z|`.
    pub fn radial_value(&self, r: f64) -> f64 {
        match *self {
            BumpProfile::Tent { amplitude, radius } => amplitude * (1.0 - r / radius).max(0.0),
            BumpProfile::TruncatedGaussian {
                amplitude,
                width,
                cutoff,
            } => {
                if r >= cutoff {
                    return 0.0;
                }
                let s2 = 2.0 * width * width;
                let floor = (-cutoff * cutoff / s2).exp();
                amplitude * ((-r * r / s2).exp() - floor) / (1.0 - floor)
            }
            BumpProfile::Constant { amplitude } => amplitude,
        }
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        self.radial_value(z.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}

/// `V(x) = Σ wᵢ f(x - ηᵢ)`.
pub fn evaluate_potential(f: &BumpProfile, mu: &AtomicMeasure, x: &[f64]) -> f64 {
    mu.atoms()
        .iter()
        .map(|a| {
            let r = x
                .iter()
                .zip(&a.location)
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt();
            a.weight * f.radial_value(r)
        })
        .sum()
}

/// The potential sampled at every node of `layout`.
pub fn potential_field(f: &BumpProfile, mu: &AtomicMeasure, layout: &Arc<GridLayout>) -> GridField {
    let values = layout
        .nodes()
        .map(|x| evaluate_potential(f, mu, x))
        .collect();
    GridField::from_values(layout.clone(), values).expect("one value per node")
}

/// `‖f‖∞ · |μ|`, an upper bound on `sup_U |V|`.
pub fn potential_sup_bound(f: &BumpProfile, mu: &AtomicMeasure) -> f64 {
    f.sup_norm() * mu.total_variation()
}
