//! One-dimensional quadratic Wasserstein distances through quantile functions.
//!
//! Every distance here is `W₂(μ, ν) = (∫₀¹ |Q_μ(q) − Q_ν(q)|² dq)^{1/2}`. Empirical
//! quantiles are right-continuous step functions, `Q(q) = x_(⌈q·n⌉)`, so each
//! integral splits into pieces on which one side is constant; the other side is
//! integrated in closed form (linear uniform quantile, normal partial moments,
//! mixture partial moments between bisected quantile breakpoints).
//!
//! Multivariate distances are sums of marginal distances.

use crate::error::{AqError, Result};
use crate::marginal::{Marginal, MarginalMixture, Shape};
use crate::sample::Sample;
use crate::special::{normal_pdf, normal_quantile, z_pdf};

/// Sorted copy of a one-dimensional sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalQuantile {
    sorted: Vec<f64>,
}

impl EmpiricalQuantile {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(AqError::EmptySample);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(AqError::NonFinite);
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub(crate) fn from_sorted_unchecked(sorted: Vec<f64>) -> Self {
        Self { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    /// `Q(q) = x_(⌈q·n⌉)` for `q ∈ (0, 1]`; `q <= 0` gives the minimum.
    pub fn eval(&self, q: f64) -> f64 {
        let n = self.sorted.len();
        let idx = (q * n as f64).ceil() as usize;
        self.sorted[idx.clamp(1, n) - 1]
    }
}

/// Any one-dimensional target a sample marginal can be compared with.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution1d {
    Empirical(EmpiricalQuantile),
    Parametric(Marginal),
    Mixture(MarginalMixture),
}

/// Exact `W₂` between two empirical measures over the common refinement of
/// their step grids.
pub fn w2_empirical_empirical(x: &EmpiricalQuantile, y: &EmpiricalQuantile) -> f64 {
    let (nx, ny) = (x.len() as u64, y.len() as u64);
    let denom = (nx * ny) as f64;
    // breakpoints i/nx and j/ny scaled to integers i*ny and j*nx
    let (mut i, mut j) = (1u64, 1u64);
    let mut pos = 0u64;
    let mut total = 0.0;
    while i <= nx && j <= ny {
        let bx = i * ny;
        let by = j * nx;
        let next = bx.min(by);
        let d = x.sorted[(i - 1) as usize] - y.sorted[(j - 1) as usize];
        total += d * d * ((next - pos) as f64 / denom);
        pos = next;
        if bx == next {
            i += 1;
        }
        if by == next {
            j += 1;
        }
    }
    total.max(0.0).sqrt()
}

/// Squared `W₂` between an empirical measure and a parametric marginal.
pub fn w2_squared_empirical_parametric(x: &EmpiricalQuantile, r: &Marginal) -> Result<f64> {
    r.validate()?;
    let n = x.len();
    let nf = n as f64;
    let total = match r.shape() {
        Shape::Point(g) => x.sorted.iter().map(|v| (v - g) * (v - g)).sum::<f64>() / nf,
        Shape::Interval(a, b) => {
            let slope = b - a;
            let within = slope * slope / (12.0 * nf * nf);
            x.sorted
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let mid = (i as f64 + 0.5) / nf;
                    let d = v - (a + slope * mid);
                    (d * d + within) / nf
                })
                .sum()
        }
        Shape::Normal(mu, sigma) => {
            let z: Vec<f64> = (0..=n).map(|i| normal_quantile(i as f64 / nf)).collect();
            x.sorted
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let (z0, z1) = (z[i], z[i + 1]);
                    let width = 1.0 / nf;
                    let first = normal_pdf(z0) - normal_pdf(z1);
                    let second = (width - (z_pdf(z1) - z_pdf(z0))).max(0.0);
                    let d = v - mu;
                    (d * d * width - 2.0 * d * sigma * first + sigma * sigma * second).max(0.0)
                })
                .sum()
        }
    };
    Ok(total.max(0.0))
}

/// `W₂` between an empirical measure and a parametric marginal.
pub fn w2_empirical_parametric(x: &EmpiricalQuantile, r: &Marginal) -> Result<f64> {
    w2_squared_empirical_parametric(x, r).map(f64::sqrt)
}

/// `W₂` between an empirical measure and a mixture of marginals.
///
/// The mixture quantile is bisected at every empirical breakpoint `i/n`; on each
/// step piece the cost is integrated exactly from the partial moments of the
/// components between the two bracketing mixture quantiles.
pub fn w2_empirical_mixture(x: &EmpiricalQuantile, m: &MarginalMixture) -> f64 {
    let n = x.len();
    let nf = n as f64;
    let breaks: Vec<f64> = (0..=n).map(|i| m.quantile(i as f64 / nf)).collect();
    let total: f64 = x
        .sorted
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let q0 = i as f64 / nf;
            let q1 = (i + 1) as f64 / nf;
            m.piece_cost(c, q0, q1, breaks[i], breaks[i + 1])
        })
        .sum();
    total.max(0.0).sqrt()
}

pub fn w2(x: &EmpiricalQuantile, target: &Distribution1d) -> Result<f64> {
    match target {
        Distribution1d::Empirical(y) => Ok(w2_empirical_empirical(x, y)),
        Distribution1d::Parametric(r) => w2_empirical_parametric(x, r),
        Distribution1d::Mixture(m) => Ok(w2_empirical_mixture(x, m)),
    }
}

/// Marginal-sum surrogate `Σ_k W₂(x^k, y^k)` of the multivariate distance.
pub fn w2_multivariate(x: &Sample, targets: &[Distribution1d]) -> Result<f64> {
    if targets.len() != x.dim() {
        return Err(AqError::DimensionMismatch {
            expected: x.dim(),
            found: targets.len(),
        });
    }
    let mut total = 0.0;
    for (k, target) in targets.iter().enumerate() {
        let q = EmpiricalQuantile::new(&x.column(k))?;
        total += w2(&q, target)?;
    }
    Ok(total)
}
