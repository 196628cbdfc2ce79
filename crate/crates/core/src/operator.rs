//! Quadrature discretization of `H(φ)(x) = ∫_U G(x, y) φ(y) dy`.
//!
//! Nodes form a regular grid of spacing `h` anchored at the corner of the
//! bounding box of the ball; only nodes strictly inside `U` are kept. Each
//! node carries the midpoint weight `hⁿ`. The diagonal term, where `G` is
//! singular, is replaced by the exact integral of the bounding kernel
//! `c_n |z|^(2-n)` over the ball of volume `hⁿ` centered at the node.

use std::io::{self, Write};
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::domain::{unit_ball_volume, BallDomain, GreenKernel};
use crate::error::{Error, Result};

/// Relative slack allowed when a continuum inequality is checked on the grid.
pub const QUADRATURE_SLACK: f64 = 0.05;

/// Largest node count for which the kernel matrix is cached.
pub const DENSE_LIMIT: usize = 2600;

/// Grid nodes strictly inside a ball.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLayout {
    domain: BallDomain,
    h: f64,
    coords: Vec<f64>,
    index: Vec<i32>,
}

impl GridLayout {
    pub fn new(domain: &BallDomain, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::param("h", format!("grid spacing must be positive, got {h}")));
        }
        let n = domain.dim();
        let r = domain.radius();
        let steps = (2.0 * r / h + 1e-9).floor() as i64;
        if steps > 100_000 {
            return Err(Error::param("h", format!("grid spacing {h} too fine for radius {r}")));
        }
        let origin: Vec<f64> = domain.center().iter().map(|c| c - r).collect();
        let inner = r * (1.0 - 1e-12);
        let mut coords = Vec::new();
        let mut index = Vec::new();
        let mut k = vec![0i64; n];
        let mut p = vec![0.0; n];
        'outer: loop {
            for i in 0..n {
                p[i] = origin[i] + k[i] as f64 * h;
            }
            if domain.radial(&p) < inner {
                coords.extend_from_slice(&p);
                index.extend(k.iter().map(|&v| v as i32));
            }
            let mut d = 0;
            loop {
                if d == n {
                    break 'outer;
                }
                k[d] += 1;
                if k[d] <= steps {
                    break;
                }
                k[d] = 0;
                d += 1;
            }
        }
        if coords.is_empty() {
            return Err(Error::EmptyRule { h });
        }
        Ok(Self {
            domain: domain.clone(),
            h,
            coords,
            index,
        })
    }

    pub fn domain(&self) -> &BallDomain {
        &self.domain
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.coords[i * n..(i + 1) * n]
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim())
    }

    /// Integer grid index of node `i` (offsets from the bounding-box corner).
    pub fn grid_index(&self, i: usize) -> &[i32] {
        let n = self.dim();
        &self.index[i * n..(i + 1) * n]
    }

    /// Cell volume `hⁿ`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }
}

/// A function on `U` sampled at the nodes of a [`GridLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    layout: Arc<GridLayout>,
    values: Vec<f64>,
}

impl GridField {
    pub fn from_values(layout: Arc<GridLayout>, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::LayoutMismatch);
        }
        Ok(Self { layout, values })
    }

    pub fn zeros(layout: &Arc<GridLayout>) -> Self {
        Self::constant(layout, 0.0)
    }

    pub fn constant(layout: &Arc<GridLayout>, value: f64) -> Self {
        Self {
            values: vec![value; layout.len()],
            layout: layout.clone(),
        }
    }

    pub fn from_fn(layout: &Arc<GridLayout>, f: impl FnMut(&[f64]) -> f64) -> Self {
        Self {
            values: layout.nodes().map(f).collect(),
            layout: layout.clone(),
        }
    }

    pub fn layout(&self) -> &Arc<GridLayout> {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Max of `|values|` over the nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn same_layout(&self, other: &GridField) -> bool {
        same_layout(&self.layout, &other.layout)
    }

    /// `‖self - other‖∞`.
    pub fn sup_distance(&self, other: &GridField) -> Result<f64> {
        if !self.same_layout(other) {
            return Err(Error::LayoutMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &GridField, b: f64) -> Result<GridField> {
        if !self.same_layout(other) {
            return Err(Error::LayoutMismatch);
        }
        Ok(GridField {
            layout: self.layout.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField {
            layout: self.layout.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// CSV with node coordinates and the value column.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        write_fields_csv(out, &self.layout, &[("value", &self.values)])
    }
}

pub(crate) fn same_layout(a: &Arc<GridLayout>, b: &Arc<GridLayout>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Writes `x0,..,x{n-1},<names>` rows with 17 significant digits.
pub fn write_fields_csv<W: Write>(
    mut out: W,
    layout: &GridLayout,
    columns: &[(&str, &[f64])],
) -> io::Result<()> {
    let n = layout.dim();
    let mut header: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    header.extend(columns.iter().map(|(name, _)| name.to_string()));
    writeln!(out, "{}", header.join(","))?;
    for (i, x) in layout.nodes().enumerate() {
        let mut row: Vec<String> = x.iter().map(|v| fmt_f64(*v)).collect();
        row.extend(columns.iter().map(|(_, col)| fmt_f64(col[i])));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Float formatting for CSV output: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Midpoint rule on a [`GridLayout`] with an analytic singular self-weight.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    layout: Arc<GridLayout>,
    weight: f64,
    self_weight: f64,
}

impl QuadratureRule {
    pub fn layout(&self) -> &Arc<GridLayout> {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.layout.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layout.is_empty()
    }

    /// Off-diagonal weight `hⁿ`.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// `c_n (n α_n) r_h² / 2` with `r_h = (hⁿ/α_n)^(1/n)`.
    pub fn self_weight(&self) -> f64 {
        self.self_weight
    }

    pub fn total_weight(&self) -> f64 {
        self.weight * self.len() as f64
    }
}

/// Builds the quadrature rule of spacing `h` on the ball.
pub fn build_rule(domain: &BallDomain, h: f64) -> Result<QuadratureRule> {
    let layout = Arc::new(GridLayout::new(domain, h)?);
    Ok(rule_on(layout))
}

/// Quadrature rule on an existing layout.
pub fn rule_on(layout: Arc<GridLayout>) -> QuadratureRule {
    let n = layout.dim();
    let nf = n as f64;
    let alpha = unit_ball_volume(n).expect("dim >= 3");
    let c_n = 1.0 / (nf * alpha * (nf - 2.0));
    let weight = layout.cell_volume();
    let r_h = (weight / alpha).powf(1.0 / nf);
    let self_weight = c_n * nf * alpha * r_h * r_h / 2.0;
    QuadratureRule {
        layout,
        weight,
        self_weight,
    }
}

/// The discrete operator `H`. Caches the kernel matrix when the node count
/// is at most [`DENSE_LIMIT`], otherwise evaluates the kernel on the fly.
#[derive(Debug, Clone)]
pub struct HOperator {
    rule: QuadratureRule,
    kernel: GreenKernel,
    matrix: Option<Arc<Vec<f64>>>,
}

impl HOperator {
    pub fn new(rule: QuadratureRule, kernel: GreenKernel) -> Result<Self> {
        if rule.layout.domain() != kernel.domain() {
            return Err(Error::LayoutMismatch);
        }
        let matrix = (rule.len() <= DENSE_LIMIT).then(|| Arc::new(assemble(&rule, &kernel)));
        Ok(Self {
            rule,
            kernel,
            matrix,
        })
    }

    /// Convenience constructor from a domain and spacing.
    pub fn on_ball(domain: &BallDomain, h: f64) -> Result<Self> {
        Self::new(build_rule(domain, h)?, GreenKernel::new(domain.clone()))
    }

    /// Operator that never caches the kernel matrix.
    pub fn matrix_free(rule: QuadratureRule, kernel: GreenKernel) -> Result<Self> {
        if rule.layout.domain() != kernel.domain() {
            return Err(Error::LayoutMismatch);
        }
        Ok(Self {
            rule,
            kernel,
            matrix: None,
        })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn kernel(&self) -> &GreenKernel {
        &self.kernel
    }

    pub fn layout(&self) -> &Arc<GridLayout> {
        &self.rule.layout
    }

    pub fn l0(&self) -> f64 {
        self.kernel.domain().l0()
    }

    /// `(Hφ)(xᵢ) = Σ_{j≠i} G(xᵢ, xⱼ) φ(xⱼ) hⁿ + w_self φ(xᵢ)`.
    pub fn apply(&self, phi: &GridField) -> Result<GridField> {
        if !same_layout(phi.layout(), self.layout()) {
            return Err(Error::LayoutMismatch);
        }
        let values = self.apply_slice(phi.values());
        Ok(GridField {
            layout: self.layout().clone(),
            values,
        })
    }

    /// `Φ(u) = H(g + V u + b u|u|^(p-1))`, one kernel pass over the combined
    /// integrand.
    pub fn compose_rhs(
        &self,
        g: &GridField,
        b: &GridField,
        v: &GridField,
        u: &GridField,
        p: f64,
    ) -> Result<GridField> {
        for f in [g, b, v, u] {
            if !same_layout(f.layout(), self.layout()) {
                return Err(Error::LayoutMismatch);
            }
        }
        let integrand: Vec<f64> = (0..u.values.len())
            .map(|i| {
                let ui = u.values[i];
                g.values[i] + v.values[i] * ui + b.values[i] * signed_pow(ui, p)
            })
            .collect();
        Ok(GridField {
            layout: self.layout().clone(),
            values: self.apply_slice(&integrand),
        })
    }

    fn apply_slice(&self, phi: &[f64]) -> Vec<f64> {
        let n = phi.len();
        let row = |i: usize| -> f64 {
            let mut acc = 0.0;
            match &self.matrix {
                Some(m) => {
                    let r = &m[i * n..(i + 1) * n];
                    for j in 0..n {
                        acc += r[j] * phi[j];
                    }
                }
                None => {
                    let xi = self.rule.layout.node(i);
                    let w = self.rule.weight;
                    for j in 0..n {
                        if j != i {
                            acc += self.kernel.eval_unchecked(xi, self.rule.layout.node(j)) * w * phi[j];
                        } else {
                            acc += self.rule.self_weight * phi[j];
                        }
                    }
                }
            }
            acc
        };
        #[cfg(feature = "parallel")]
        {
            (0..n).into_par_iter().map(row).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..n).map(row).collect()
        }
    }
}

fn assemble(rule: &QuadratureRule, kernel: &GreenKernel) -> Vec<f64> {
    let layout = &rule.layout;
    let n = layout.len();
    let w = rule.weight;
    let row = |i: usize| -> Vec<f64> {
        let xi = layout.node(i);
        (0..n)
            .map(|j| {
                if j == i {
                    rule.self_weight
                } else {
                    kernel.eval_unchecked(xi, layout.node(j)) * w
                }
            })
            .collect()
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(row).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = (0..n).map(row).collect();
    rows.concat()
}

/// `u|u|^(p-1)`, with value 0 at `u = 0`.
#[inline]
pub fn signed_pow(u: f64, p: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else if p == 2.0 {
        u * u.abs()
    } else if p == 3.0 {
        u * u * u
    } else {
        u.signum() * u.abs().powf(p)
    }
}

/// `‖H1 - w‖∞ / ‖w‖∞` against the torsion function `w`.
pub fn torsion_error(op: &HOperator) -> Result<f64> {
    let layout = op.layout();
    let one = GridField::constant(layout, 1.0);
    let h1 = op.apply(&one)?;
    let exact = GridField::from_fn(layout, |x| layout.domain().torsion(x));
    Ok(h1.sup_distance(&exact)? / exact.sup_norm())
}
