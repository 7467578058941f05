//! One-dimensional parametric distributions used as representative marginals.

use serde::{Deserialize, Serialize};

use crate::error::{AqError, Result};
use crate::special::{normal_cdf, normal_pdf, normal_quantile, z_pdf};

/// A parametric marginal. `Window` is the fixed-width uniform of the flood
/// family, parameterized by its center and support width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Marginal {
    Dirac { location: f64 },
    Uniform { lower: f64, upper: f64 },
    Gaussian { mean: f64, std_dev: f64 },
    Window { center: f64, width: f64 },
}

/// Canonical geometric form: degenerate intervals and zero-variance
/// Gaussians collapse to point masses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Shape {
    Point(f64),
    Interval(f64, f64),
    Normal(f64, f64),
}

impl Marginal {
    pub fn validate(&self) -> Result<()> {
        let finite = |vals: &[f64]| vals.iter().all(|v| v.is_finite());
        match *self {
            Marginal::Dirac { location } if finite(&[location]) => Ok(()),
            Marginal::Uniform { lower, upper } if finite(&[lower, upper]) => {
                if lower > upper {
                    Err(AqError::InvalidParameter(format!(
                        "uniform requires lower <= upper, got ({lower}, {upper})"
                    )))
                } else {
                    Ok(())
                }
            }
            Marginal::Gaussian { mean, std_dev } if finite(&[mean, std_dev]) => {
                if std_dev < 0.0 {
                    Err(AqError::InvalidParameter(format!(
                        "gaussian requires std_dev >= 0, got {std_dev}"
                    )))
                } else {
                    Ok(())
                }
            }
            Marginal::Window { center, width } if finite(&[center, width]) => {
                if width < 0.0 {
                    Err(AqError::InvalidParameter(format!(
                        "window width must be non-negative, got {width}"
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Err(AqError::NonFinite),
        }
    }

    pub(crate) fn shape(&self) -> Shape {
        match *self {
            Marginal::Dirac { location } => Shape::Point(location),
            Marginal::Uniform { lower, upper } => {
                if lower == upper {
                    Shape::Point(lower)
                } else {
                    Shape::Interval(lower, upper)
                }
            }
            Marginal::Gaussian { mean, std_dev } => {
                if std_dev == 0.0 {
                    Shape::Point(mean)
                } else {
                    Shape::Normal(mean, std_dev)
                }
            }
            Marginal::Window { center, width } => {
                if width == 0.0 {
                    Shape::Point(center)
                } else {
                    Shape::Interval(center - 0.5 * width, center + 0.5 * width)
                }
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Marginal::Dirac { .. } => "dirac",
            Marginal::Uniform { .. } => "uniform",
            Marginal::Gaussian { .. } => "gaussian",
            Marginal::Window { .. } => "window",
        }
    }

    pub fn mean(&self) -> f64 {
        match self.shape() {
            Shape::Point(x) => x,
            Shape::Interval(a, b) => 0.5 * (a + b),
            Shape::Normal(m, _) => m,
        }
    }

    /// Quantile function; at `q = 0` and `q = 1` returns the support bounds.
    pub fn quantile(&self, q: f64) -> f64 {
        match self.shape() {
            Shape::Point(x) => x,
            Shape::Interval(a, b) => a + (b - a) * q.clamp(0.0, 1.0),
            Shape::Normal(m, s) => m + s * normal_quantile(q),
        }
    }

    /// `P(X <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        match self.shape() {
            Shape::Point(x) => {
                if t >= x {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::Interval(a, b) => ((t - a) / (b - a)).clamp(0.0, 1.0),
            Shape::Normal(m, s) => normal_cdf((t - m) / s),
        }
    }

    /// Point mass at `t`.
    pub fn atom(&self, t: f64) -> f64 {
        match self.shape() {
            Shape::Point(x) if x == t => 1.0,
            _ => 0.0,
        }
    }

    pub fn atom_location(&self) -> Option<f64> {
        match self.shape() {
            Shape::Point(x) => Some(x),
            _ => None,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self.shape() {
            Shape::Point(x) => (x, x),
            Shape::Interval(a, b) => (a, b),
            Shape::Normal(..) => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// `∫ (c - t)² dR(t)` over the open interval `(t0, t1)`.
    pub(crate) fn open_second_moment(&self, c: f64, t0: f64, t1: f64) -> f64 {
        if t1 <= t0 {
            return 0.0;
        }
        match self.shape() {
            Shape::Point(x) => {
                if t0 < x && x < t1 {
                    (c - x) * (c - x)
                } else {
                    0.0
                }
            }
            Shape::Interval(a, b) => {
                let lo = t0.max(a);
                let hi = t1.min(b);
                if hi <= lo {
                    return 0.0;
                }
                let cube = |u: f64| (u - c).powi(3);
                (cube(hi) - cube(lo)) / (3.0 * (b - a))
            }
            Shape::Normal(m, s) => {
                let z0 = (t0 - m) / s;
                let z1 = (t1 - m) / s;
                let mass = normal_mass(z0, z1);
                let d = c - m;
                let first = normal_pdf(z0) - normal_pdf(z1);
                let second = mass - (z_pdf(z1) - z_pdf(z0));
                (d * d * mass - 2.0 * d * s * first + s * s * second).max(0.0)
            }
        }
    }
}

/// `Φ(z1) − Φ(z0)` evaluated on the side of the distribution that keeps
/// precision in the tails.
fn normal_mass(z0: f64, z1: f64) -> f64 {
    if z0 > 0.0 {
        normal_cdf(-z0) - normal_cdf(-z1)
    } else {
        normal_cdf(z1) - normal_cdf(z0)
    }
}

/// A finite weighted mixture of marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalMixture {
    components: Vec<(f64, Marginal)>,
}

impl MarginalMixture {
    pub fn new(components: Vec<(f64, Marginal)>) -> Result<Self> {
        if components.is_empty() {
            return Err(AqError::InvalidWeights("mixture has no components".into()));
        }
        let mut total = 0.0;
        for (w, m) in &components {
            m.validate()?;
            if !w.is_finite() || *w < 0.0 {
                return Err(AqError::InvalidWeights(format!("weight {w} is not a probability")));
            }
            total += w;
        }
        if total == 0.0 {
            return Err(AqError::InvalidWeights("mixture with zero total weight".into()));
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(AqError::InvalidWeights(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(f64, Marginal)] {
        &self.components
    }

    fn active(&self) -> impl Iterator<Item = &(f64, Marginal)> {
        self.components.iter().filter(|(w, _)| *w > 0.0)
    }

    pub fn cdf(&self, t: f64) -> f64 {
        self.active().map(|(w, m)| w * m.cdf(t)).sum()
    }

    /// `P(X < t)`.
    pub fn cdf_left(&self, t: f64) -> f64 {
        self.active().map(|(w, m)| w * (m.cdf(t) - m.atom(t))).sum()
    }

    pub fn support(&self) -> (f64, f64) {
        self.active().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, m)| {
            let (a, b) = m.support();
            (lo.min(a), hi.max(b))
        })
    }

    /// Mixture quantile `inf { t : F(t) >= q }` by bisection to an absolute
    /// tolerance of 1e-12, snapped onto atoms when the jump covers `q`.
    pub fn quantile(&self, q: f64) -> f64 {
        if q <= 0.0 {
            return self.support().0;
        }
        if q >= 1.0 {
            return self.support().1;
        }
        let (mut lo, mut hi) = self
            .active()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, m)| {
                let t = m.quantile(q);
                (lo.min(t), hi.max(t))
            });
        if self.cdf(lo) >= q {
            return lo;
        }
        for _ in 0..200 {
            if hi - lo <= 1e-12 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= q {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let snapped = self
            .active()
            .filter_map(|(_, m)| m.atom_location())
            .filter(|&x| x >= lo && x <= hi && self.cdf(x) >= q)
            .fold(f64::INFINITY, f64::min);
        if snapped.is_finite() {
            snapped
        } else {
            hi
        }
    }

    /// `∫ (c − Q(q))² dq` over `[q0, q1]` given `t0 = Q(q0)`, `t1 = Q(q1)`.
    pub(crate) fn piece_cost(&self, c: f64, q0: f64, q1: f64, t0: f64, t1: f64) -> f64 {
        let width = q1 - q0;
        if t1 <= t0 {
            return width * (c - t0) * (c - t0);
        }
        let sq = |t: f64| if t.is_finite() { (c - t) * (c - t) } else { 0.0 };
        let mass_lo = if t0.is_finite() {
            (self.cdf(t0) - q0).clamp(0.0, width)
        } else {
            0.0
        };
        let mass_hi = if t1.is_finite() {
            (q1 - self.cdf_left(t1)).clamp(0.0, width)
        } else {
            0.0
        };
        let interior: f64 = self
            .active()
            .map(|(w, m)| w * m.open_second_moment(c, t0, t1))
            .sum();
        mass_lo * sq(t0) + mass_hi * sq(t1) + interior
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Marginal::Uniform { lower: 1.0, upper: 0.0 }.validate().is_err());
        assert!(Marginal::Gaussian { mean: 0.0, std_dev: -1.0 }.validate().is_err());
        assert!(Marginal::Dirac { location: f64::NAN }.validate().is_err());
        assert!(Marginal::Uniform { lower: 0.0, upper: 0.0 }.validate().is_ok());
    }

    #[test]
    fn mixture_quantile_snaps_to_atoms() {
        let m = MarginalMixture::new(vec![
            (0.5, Marginal::Dirac { location: 0.0 }),
            (0.5, Marginal::Dirac { location: 1.0 }),
        ])
        .unwrap();
        assert_eq!(m.quantile(0.25), 0.0);
        assert_eq!(m.quantile(0.5), 0.0);
        assert_eq!(m.quantile(0.5000001), 1.0);
        assert_eq!(m.quantile(1.0), 1.0);
    }

    #[test]
    fn mixture_quantile_continuous() {
        let m = MarginalMixture::new(vec![
            (1.0 / 3.0, Marginal::Uniform { lower: 0.0, upper: 1.0 }),
            (2.0 / 3.0, Marginal::Uniform { lower: 0.3, upper: 0.6 }),
        ])
        .unwrap();
        for &q in &[0.05, 0.1, 0.5, 0.9] {
            let t = m.quantile(q);
            assert!((m.cdf(t) - q).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_weight_rejected() {
        let err = MarginalMixture::new(vec![(0.0, Marginal::Dirac { location: 0.0 })]);
        assert!(matches!(err, Err(AqError::InvalidWeights(_))));
    }

    #[test]
    fn open_moment_of_full_normal() {
        let g = Marginal::Gaussian { mean: 1.0, std_dev: 2.0 };
        // E (c - X)^2 = (c - mu)^2 + sigma^2
        let v = g.open_second_moment(0.0, f64::NEG_INFINITY, f64::INFINITY);
        assert!((v - 5.0).abs() < 1e-14);
    }
}
