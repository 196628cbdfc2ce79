//! Ball domains and the Dirichlet Green function of `-Δ` on them.
//!
//! The Green function of the ball is given in closed form by the method of
//! images. Writing `x' = x - c`, `y' = y - c` for a ball of radius `R`
//! centered at `c`,
//!
//! ```text
//! G(x, y) = c_n ( |x - y|^(2-n) - d(x, y)^(2-n) ),
//! d(x, y) = sqrt( |x'|^2 |y'|^2 / R^2 - 2 x'.y' + R^2 ),
//! ```
//!
//! where `c_n = 1 / (n α_n (n - 2))` and `α_n` is the volume of the unit
//! ball. `d` equals `|y'| |x - y*| / R` with `y*` the Kelvin image of `y`,
//! written in a form that is symmetric in `x, y` and regular at `y = c`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative distance (in units of the radius) below which two points are
/// treated as coincident by the singular kernels.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// Volume `α_n = π^(n/2) / Γ(n/2 + 1)` of the unit ball in `ℝⁿ`.
pub fn unit_ball_volume(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidDimension(n, 1));
    }
    // α_n = 2π/n · α_{n-2}, seeded with α_0 = 1 and α_1 = 2.
    let mut alpha = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        alpha *= 2.0 * PI / k as f64;
        k += 2;
    }
    Ok(alpha)
}

/// Normalization `c_n = 1/(n α_n (n - 2))` of the Newtonian kernel.
pub fn newton_constant(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidDimension(n, 3));
    }
    let alpha = unit_ball_volume(n)?;
    Ok(1.0 / (n as f64 * alpha * (n as f64 - 2.0)))
}

/// `c_n |x - y|^(2-n)`, the free-space kernel that dominates the Green
/// function of every bounded domain.
pub fn kernel_upper_bound(n: usize, x: &[f64], y: &[f64]) -> Result<f64> {
    let c_n = newton_constant(n)?;
    let r = distance(x, y);
    if r < COINCIDENCE_TOL * norm(x).max(norm(y)).max(1.0) {
        return Err(Error::Singular(r));
    }
    Ok(c_n * r.powi(2 - n as i32))
}

#[derive(Debug, Deserialize)]
struct RawBall {
    dim: usize,
    #[serde(default)]
    center: Option<Vec<f64>>,
    radius: f64,
}

/// An open ball `U = B(center, radius) ⊂ ℝⁿ` with `n >= 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBall")]
pub struct BallDomain {
    dim: usize,
    center: Vec<f64>,
    radius: f64,
}

impl TryFrom<RawBall> for BallDomain {
    type Error = Error;

    fn try_from(raw: RawBall) -> Result<Self> {
        let center = raw.center.unwrap_or_else(|| vec![0.0; raw.dim]);
        BallDomain::new(raw.dim, center, raw.radius)
    }
}

impl BallDomain {
    pub fn new(dim: usize, center: Vec<f64>, radius: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidDimension(dim, 3));
        }
        if center.len() != dim {
            return Err(Error::param(
                "center",
                format!("expected {dim} coordinates, got {}", center.len()),
            ));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("center", "coordinates must be finite"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param("radius", format!("must be positive, got {radius}")));
        }
        Ok(Self {
            dim,
            center,
            radius,
        })
    }

    /// Ball of the given radius centered at the origin.
    pub fn centered(dim: usize, radius: f64) -> Result<Self> {
        Self::new(dim, vec![0.0; dim], radius)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    /// `l₀ = d_U² / (2(n - 2))`, the uniform bound on `∫_U G(x, y) dy`.
    pub fn l0(&self) -> f64 {
        let d = self.diameter();
        d * d / (2.0 * (self.dim as f64 - 2.0))
    }

    pub fn volume(&self) -> f64 {
        // dim >= 3 is enforced at construction.
        unit_ball_volume(self.dim).expect("dim >= 1") * self.radius.powi(self.dim as i32)
    }

    /// Distance from the center.
    pub fn radial(&self, x: &[f64]) -> f64 {
        distance(x, &self.center)
    }

    /// Open-ball membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.radial(x) < self.radius
    }

    /// Closed-ball membership with a relative rounding allowance.
    pub fn contains_closed(&self, x: &[f64]) -> bool {
        self.radial(x) <= self.radius * (1.0 + COINCIDENCE_TOL)
    }

    /// Torsion function `(R² - |x - c|²)/(2n)`, the exact solution of
    /// `-Δw = 1` with `w = 0` on the boundary.
    pub fn torsion(&self, x: &[f64]) -> f64 {
        let r = self.radial(x);
        (self.radius * self.radius - r * r) / (2.0 * self.dim as f64)
    }

    pub(crate) fn check_closed(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::param(
                "point",
                format!("expected {} coordinates, got {}", self.dim, x.len()),
            ));
        }
        if self.contains_closed(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                distance: self.radial(x),
                radius: self.radius,
            })
        }
    }
}

/// Dirichlet Green function of `-Δ` on a [`BallDomain`].
#[derive(Debug, Clone, PartialEq)]
pub struct GreenKernel {
    domain: BallDomain,
    c_n: f64,
}

impl GreenKernel {
    pub fn new(domain: BallDomain) -> Self {
        let c_n = newton_constant(domain.dim).expect("BallDomain guarantees dim >= 3");
        Self { domain, c_n }
    }

    pub fn domain(&self) -> &BallDomain {
        &self.domain
    }

    /// `c_n = 1/(n α_n (n - 2))`.
    pub fn normalization(&self) -> f64 {
        self.c_n
    }

    /// `G(x, y)` for `x ≠ y` in the closed ball.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.domain.check_closed(x)?;
        self.domain.check_closed(y)?;
        let r = distance(x, y);
        if r < COINCIDENCE_TOL * self.domain.radius {
            return Err(Error::Singular(r));
        }
        Ok(self.eval_unchecked(x, y))
    }

    /// Kernel evaluation without domain or coincidence checks. The caller
    /// guarantees `x ≠ y`, both in the closed ball.
    #[inline]
    pub fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let c = &self.domain.center;
        let r2 = self.domain.radius * self.domain.radius;
        let (mut dxy2, mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..x.len() {
            let a = x[i] - c[i];
            let b = y[i] - c[i];
            let d = a - b;
            dxy2 += d * d;
            xx += a * a;
            yy += b * b;
            xy += a * b;
        }
        let image2 = (xx * yy / r2 - 2.0 * xy + r2).max(0.0);
        let g = self.c_n * (inv_pow(dxy2, self.domain.dim) - inv_pow(image2, self.domain.dim));
        g.max(0.0)
    }

    /// Regular (image) part `c_n d(x, x)^(2-n)` of the kernel on the diagonal.
    pub fn regular_part_diagonal(&self, x: &[f64]) -> f64 {
        let r = self.domain.radial(x);
        let rr = self.domain.radius;
        let d = (rr * rr - r * r) / rr;
        self.c_n * d.powi(2 - self.domain.dim as i32)
    }
}

/// `s^((2-n)/2)` for a squared distance `s`.
#[inline]
fn inv_pow(s: f64, n: usize) -> f64 {
    match n {
        3 => 1.0 / s.sqrt(),
        4 => 1.0 / s,
        _ => s.powf((2.0 - n as f64) / 2.0),
    }
}

pub(crate) fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}
