//! Representative families and their Wasserstein-optimal fits.
//!
//! Every fit works one marginal at a time from four moments of the sorted
//! cluster values `x_(1) <= … <= x_(n)`:
//!
//! * the mean and the population variance,
//! * `S = ∫ Q(q)(q − ½) dq = Σ x_(i)(2i − 1 − n) / (2n²)`,
//! * `G = ∫ Q(q) z(q) dq = Σ x_(i) c_i` with `c_i = φ(z((i−1)/n)) − φ(z(i/n))`.
//!
//! Since `{1, √12(q − ½)}` and `{1, z(q)}` are orthonormal in `L²(0, 1)`, the
//! best uniform quantile `a + (b − a)q` and the best Gaussian quantile
//! `μ + σz(q)` are projections of `Q`, with squared residuals `var − 12S²` and
//! `var − G²`. A width-`w` window centred at `c` costs
//! `var + (mean − c)² − 2wS + w²/12`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{AqError, Result};
use crate::marginal::Marginal;
use crate::sample::{column_mean, Sample};
use crate::special::gaussian_piece_weights;
use crate::transport::{w2_squared_empirical_parametric, EmpiricalQuantile};

/// Supports available to the flood family's window marginals.
pub const FLOOD_WIDTHS: [f64; 3] = [0.25, 0.5, 1.0];

const RANK_SLACK: f64 = 1e-9;

/// Family of representatives shared by all components of a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Dirac,
    Uniform,
    Gaussian,
    /// Per marginal, whichever of uniform and Gaussian fits better.
    Hybrid,
    /// Per marginal, a Dirac or a window of width 0.25, 0.5 or 1.
    #[serde(alias = "flood")]
    FloodHybrid,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Dirac,
        Family::Uniform,
        Family::Gaussian,
        Family::Hybrid,
        Family::FloodHybrid,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Dirac => "dirac",
            Family::Uniform => "uniform",
            Family::Gaussian => "gaussian",
            Family::Hybrid => "hybrid",
            Family::FloodHybrid => "flood_hybrid",
        }
    }

    /// Whether `m` is a marginal this family can produce.
    pub fn admits(&self, m: &Marginal) -> bool {
        matches!(
            (self, m),
            (Family::Dirac, Marginal::Dirac { .. })
                | (Family::Uniform, Marginal::Uniform { .. })
                | (Family::Gaussian, Marginal::Gaussian { .. })
                | (Family::Hybrid, Marginal::Uniform { .. } | Marginal::Gaussian { .. })
                | (Family::FloodHybrid, Marginal::Dirac { .. } | Marginal::Window { .. })
        )
    }

    pub(crate) fn needs_gaussian_moment(&self) -> bool {
        matches!(self, Family::Gaussian | Family::Hybrid)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = AqError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirac" => Ok(Family::Dirac),
            "uniform" => Ok(Family::Uniform),
            "gaussian" => Ok(Family::Gaussian),
            "hybrid" => Ok(Family::Hybrid),
            "flood" | "flood_hybrid" | "flood-hybrid" => Ok(Family::FloodHybrid),
            other => Err(AqError::InvalidParameter(format!("unknown family '{other}'"))),
        }
    }
}

/// A product measure: one independent marginal per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Representative {
    marginals: Vec<Marginal>,
}

impl Representative {
    pub fn new(marginals: Vec<Marginal>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(AqError::InvalidParameter("representative without marginals".into()));
        }
        for m in &marginals {
            m.validate()?;
        }
        Ok(Self { marginals })
    }

    pub fn dirac(point: &[f64]) -> Result<Self> {
        Self::new(point.iter().map(|&x| Marginal::Dirac { location: x }).collect())
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    pub fn marginal(&self, k: usize) -> &Marginal {
        &self.marginals[k]
    }

    pub fn means(&self) -> Vec<f64> {
        self.marginals.iter().map(Marginal::mean).collect()
    }

    /// Appends one draw to `out`.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        for m in &self.marginals {
            let x = match *m {
                Marginal::Dirac { location } => location,
                Marginal::Uniform { lower, upper } => lower + (upper - lower) * rng.random::<f64>(),
                Marginal::Gaussian { mean, std_dev } => {
                    let z: f64 = rng.sample(StandardNormal);
                    mean + std_dev * z
                }
                Marginal::Window { center, width } => {
                    center + width * (rng.random::<f64>() - 0.5)
                }
            };
            out.push(x);
        }
    }
}

/// Moments of one sorted marginal that determine every closed-form fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalMoments {
    pub n: usize,
    pub mean: f64,
    pub var: f64,
    /// `∫ Q(q)(q − ½) dq`.
    pub s: f64,
    /// `∫ Q(q) z(q) dq`; `NaN` when not requested.
    pub g: f64,
    pub median: f64,
}

impl MarginalMoments {
    /// Moments of ascending `sorted`. The Gaussian moment costs `n` normal
    /// quantile evaluations and is only computed when `with_g` is set.
    pub fn from_sorted(sorted: &[f64], with_g: bool) -> Result<Self> {
        if sorted.is_empty() {
            return Err(AqError::EmptyCluster);
        }
        let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
        Self::from_sorted_with_mean(sorted, mean, with_g)
    }

    /// As [`MarginalMoments::from_sorted`] with a mean computed by the caller,
    /// so that the summation order of the mean can be chosen.
    pub fn from_sorted_with_mean(sorted: &[f64], mean: f64, with_g: bool) -> Result<Self> {
        let n = sorted.len();
        if n == 0 {
            return Err(AqError::EmptyCluster);
        }
        let nf = n as f64;
        let mut var = 0.0;
        let mut s = 0.0;
        for (i, &x) in sorted.iter().enumerate() {
            let y = x - mean;
            var += y * y;
            s += y * (2.0 * i as f64 + 1.0 - nf);
        }
        var /= nf;
        s /= 2.0 * nf * nf;
        let g = if with_g {
            gaussian_piece_weights(n)
                .iter()
                .zip(sorted)
                .map(|(c, x)| c * (x - mean))
                .sum()
        } else {
            f64::NAN
        };
        Ok(Self {
            n,
            mean,
            var,
            s,
            g,
            median: median_of_sorted(sorted),
        })
    }
}

pub(crate) fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Squared `W₂` from a cluster marginal to a width-`w` window centred at `c`.
pub(crate) fn window_error_sq(m: &MarginalMoments, center: f64, width: f64) -> f64 {
    let d = m.mean - center;
    m.var + d * d - 2.0 * width * m.s + width * width / 12.0
}

/// Flood candidates in tie-breaking order: narrower windows first, the median
/// centre before the mean centre, the Dirac last.
pub(crate) fn flood_candidates(m: &MarginalMoments) -> Vec<Marginal> {
    let centers = [m.median.clamp(0.0, 1.0), m.mean.clamp(0.0, 1.0)];
    let mut out: Vec<Marginal> = FLOOD_WIDTHS
        .iter()
        .flat_map(|&width| centers.map(|center| Marginal::Window { center, width }))
        .collect();
    out.push(Marginal::Dirac { location: m.mean });
    out
}

/// Optimal marginal of `family` together with its squared `W₂` to the cluster.
pub fn fit_marginal(m: &MarginalMoments, family: Family) -> (Marginal, f64) {
    let (fit, err) = match family {
        Family::Dirac => (Marginal::Dirac { location: m.mean }, m.var),
        Family::Uniform => {
            let half = 6.0 * m.s;
            if half > 0.0 {
                let fit = Marginal::Uniform {
                    lower: m.mean - half,
                    upper: m.mean + half,
                };
                (fit, m.var - 12.0 * m.s * m.s)
            } else {
                let fit = Marginal::Uniform {
                    lower: m.mean,
                    upper: m.mean,
                };
                (fit, m.var)
            }
        }
        Family::Gaussian => {
            let sigma = m.g.max(0.0);
            let fit = Marginal::Gaussian {
                mean: m.mean,
                std_dev: sigma,
            };
            (fit, m.var - sigma * sigma)
        }
        Family::Hybrid => {
            let (u, eu) = fit_marginal(m, Family::Uniform);
            let (g, eg) = fit_marginal(m, Family::Gaussian);
            if eu <= eg {
                (u, eu)
            } else {
                (g, eg)
            }
        }
        Family::FloodHybrid => {
            let mut best = (Marginal::Dirac { location: m.mean }, f64::INFINITY);
            for cand in flood_candidates(m) {
                let err = match cand {
                    Marginal::Window { center, width } => window_error_sq(m, center, width),
                    _ => m.var,
                };
                if err < best.1 {
                    best = (cand, err);
                }
            }
            best
        }
    };
    (fit, err.max(0.0))
}

fn check_ranked(values: &[f64]) -> Result<()> {
    match values
        .iter()
        .find(|&&v| !(-RANK_SLACK..=1.0 + RANK_SLACK).contains(&v))
    {
        Some(&v) => Err(AqError::UnrankedInput(v)),
        None => Ok(()),
    }
}

/// Sorted values of dimension `k` over `indices`, checked for the family.
pub(crate) fn sorted_column(
    sample: &Sample,
    indices: &[usize],
    k: usize,
    family: Family,
) -> Result<Vec<f64>> {
    if indices.is_empty() {
        return Err(AqError::EmptyCluster);
    }
    let mut col = sample.column_of(indices, k);
    if family == Family::FloodHybrid {
        check_ranked(&col)?;
    }
    col.sort_by(f64::total_cmp);
    Ok(col)
}

/// Fits `family` to the sub-cluster `indices` of `sample`; also returns the
/// squared per-marginal errors of the fit.
pub fn fit_indices_with_errors(
    sample: &Sample,
    indices: &[usize],
    family: Family,
) -> Result<(Representative, Vec<f64>)> {
    let mut marginals = Vec::with_capacity(sample.dim());
    let mut errors = Vec::with_capacity(sample.dim());
    for k in 0..sample.dim() {
        let col = sorted_column(sample, indices, k, family)?;
        let mean = column_mean(sample, indices, k);
        let moments = MarginalMoments::from_sorted_with_mean(&col, mean, family.needs_gaussian_moment())?;
        let (m, e) = fit_marginal(&moments, family);
        marginals.push(m);
        errors.push(e);
    }
    Ok((Representative { marginals }, errors))
}

pub fn fit_indices(sample: &Sample, indices: &[usize], family: Family) -> Result<Representative> {
    fit_indices_with_errors(sample, indices, family).map(|(r, _)| r)
}

/// Fits `family` to a whole cluster.
pub fn fit(cluster: &Sample, family: Family) -> Result<Representative> {
    let all: Vec<usize> = (0..cluster.len()).collect();
    fit_indices(cluster, &all, family)
}

pub fn fit_dirac(cluster: &Sample) -> Result<Representative> {
    fit(cluster, Family::Dirac)
}

pub fn fit_uniform(cluster: &Sample) -> Result<Representative> {
    fit(cluster, Family::Uniform)
}

pub fn fit_gaussian(cluster: &Sample) -> Result<Representative> {
    fit(cluster, Family::Gaussian)
}

pub fn fit_flood_hybrid(cluster: &Sample) -> Result<Representative> {
    fit(cluster, Family::FloodHybrid)
}

/// Fits every cluster independently, in cluster order.
pub fn find_r(sample: &Sample, clusters: &[Vec<usize>], family: Family) -> Result<Vec<Representative>> {
    clusters
        .iter()
        .map(|c| fit_indices(sample, c, family))
        .collect()
}

/// Marginal-sum `W₂` between the sub-cluster `indices` and `r`.
pub fn cluster_distance(sample: &Sample, indices: &[usize], r: &Representative) -> Result<f64> {
    if r.dim() != sample.dim() {
        return Err(AqError::DimensionMismatch {
            expected: sample.dim(),
            found: r.dim(),
        });
    }
    let mut total = 0.0;
    for (k, m) in r.marginals.iter().enumerate() {
        let col = sorted_column(sample, indices, k, Family::Dirac)?;
        let q = EmpiricalQuantile::from_sorted_unchecked(col);
        total += w2_squared_empirical_parametric(&q, m)?.sqrt();
    }
    Ok(total)
}

/// `count` independent draws from `r`, reproducible from `seed`.
pub fn sample_representative(r: &Representative, count: usize, seed: u64) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(count * r.dim());
    for _ in 0..count {
        r.draw_into(&mut rng, &mut data);
    }
    Sample::from_rows(r.dim(), data)
}

fn marginal_distance_sq(a: &Marginal, b: &Marginal) -> f64 {
    let sq = |x: f64| x * x;
    match (*a, *b) {
        (Marginal::Dirac { location: x }, Marginal::Dirac { location: y }) => sq(x - y),
        (Marginal::Uniform { lower: a1, upper: b1 }, Marginal::Uniform { lower: a2, upper: b2 }) => {
            sq(a1 - a2) + sq(b1 - b2)
        }
        (
            Marginal::Gaussian { mean: m1, std_dev: s1 },
            Marginal::Gaussian { mean: m2, std_dev: s2 },
        ) => sq(m1 - m2) + sq(s1 - s2),
        (Marginal::Window { center: c1, width: w1 }, Marginal::Window { center: c2, width: w2 }) => {
            sq(c1 - c2) + sq(w1 - w2)
        }
        // flood embedding (α, a, σ) with a Dirac as (0, a, 0)
        (Marginal::Dirac { location }, Marginal::Window { center, width })
        | (Marginal::Window { center, width }, Marginal::Dirac { location }) => {
            1.0 + sq(location - center) + sq(width)
        }
        _ => 1.0 + sq(a.mean() - b.mean()),
    }
}

/// Euclidean distance between the parameter embeddings of two representatives.
pub fn representative_distance(a: &Representative, b: &Representative) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(AqError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let mut total = 0.0;
    for (x, y) in a.marginals.iter().zip(&b.marginals) {
        let compatible = Family::ALL
            .iter()
            .any(|f| f.admits(x) && f.admits(y));
        if !compatible {
            return Err(AqError::FamilyMismatch(format!(
                "cannot compare {} with {}",
                x.kind(),
                y.kind()
            )));
        }
        total += marginal_distance_sq(x, y);
    }
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(v: &[f64]) -> Sample {
        Sample::from_values(v).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn dirac_fits() {
        assert_eq!(fit_dirac(&values(&[0.0, 2.0])).unwrap().marginals(), &[Marginal::Dirac { location: 1.0 }]);
        let s = Sample::from_points(&[vec![0.0, 0.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(fit_dirac(&s).unwrap().means(), vec![1.0, 2.0]);
        let empty = fit_indices(&s, &[], Family::Dirac);
        assert_eq!(empty.unwrap_err().to_string(), "cannot fit empty cluster");
    }

    #[test]
    fn uniform_three_points() {
        let r = fit_uniform(&values(&[0.0, 0.5, 1.0])).unwrap();
        let Marginal::Uniform { lower, upper } = *r.marginal(0) else { panic!() };
        assert!(close(lower, -1.0 / 6.0, 1e-15));
        assert!(close(upper, 7.0 / 6.0, 1e-15));
        let r = fit_uniform(&values(&[0.3, 0.3])).unwrap();
        assert_eq!(r.marginal(0), &Marginal::Uniform { lower: 0.3, upper: 0.3 });
    }

    #[test]
    fn uniform_midpoint_grid() {
        let n = 100;
        let grid: Vec<f64> = (1..=n).map(|i| (2 * i - 1) as f64 / (2 * n) as f64).collect();
        let Marginal::Uniform { lower, upper } = *fit_uniform(&values(&grid)).unwrap().marginal(0) else {
            panic!()
        };
        assert!(lower.abs() <= 0.02 && (upper - 1.0).abs() <= 0.02);
    }

    #[test]
    fn gaussian_fits() {
        let r = fit_gaussian(&values(&[-1.0, 1.0])).unwrap();
        let Marginal::Gaussian { mean, std_dev } = *r.marginal(0) else { panic!() };
        assert!(mean.abs() < 1e-15);
        let expected = (2.0 / std::f64::consts::PI).sqrt();
        assert!(close(std_dev, expected, 1e-14), "{std_dev}");
        let r = fit_gaussian(&values(&[4.0])).unwrap();
        assert_eq!(r.marginal(0), &Marginal::Gaussian { mean: 4.0, std_dev: 0.0 });
    }

    #[test]
    fn gaussian_grid() {
        let n = 400;
        let grid: Vec<f64> = (1..=n)
            .map(|i| crate::special::normal_quantile((2 * i - 1) as f64 / (2 * n) as f64))
            .collect();
        let Marginal::Gaussian { mean, std_dev } = *fit_gaussian(&values(&grid)).unwrap().marginal(0) else {
            panic!()
        };
        assert!(mean.abs() < 1e-6);
        assert!((std_dev - 1.0).abs() < 5e-3, "{std_dev}");
    }

    #[test]
    fn flood_fits() {
        let r = fit_flood_hybrid(&values(&[0.5; 10])).unwrap();
        assert_eq!(r.marginal(0), &Marginal::Dirac { location: 0.5 });
        let n = 100;
        let grid: Vec<f64> = (1..=n).map(|i| (2 * i - 1) as f64 / (2 * n) as f64).collect();
        let r = fit_flood_hybrid(&values(&grid)).unwrap();
        let Marginal::Window { center, width } = *r.marginal(0) else { panic!() };
        assert_eq!(width, 1.0);
        assert!(close(center, 0.5, 1e-12));
        let quarter: Vec<f64> = grid.iter().map(|x| x * 0.25).collect();
        let Marginal::Window { center, width } = *fit_flood_hybrid(&values(&quarter)).unwrap().marginal(0) else {
            panic!()
        };
        assert_eq!(width, 0.25);
        assert!(close(center, 0.125, 1e-12));
        let err = fit_flood_hybrid(&values(&[0.2, 1.5])).unwrap_err();
        assert!(err.to_string().starts_with("unranked input"));
    }

    #[test]
    fn hybrid_picks_better_marginal() {
        let n = 200;
        let uni: Vec<f64> = (1..=n).map(|i| (2 * i - 1) as f64 / (2 * n) as f64).collect();
        let gau: Vec<f64> = (1..=n)
            .map(|i| crate::special::normal_quantile((2 * i - 1) as f64 / (2 * n) as f64))
            .collect();
        let pts: Vec<Vec<f64>> = uni.iter().zip(&gau).map(|(a, b)| vec![*a, *b]).collect();
        let r = fit(&Sample::from_points(&pts).unwrap(), Family::Hybrid).unwrap();
        assert_eq!(r.marginal(0).kind(), "uniform");
        assert_eq!(r.marginal(1).kind(), "gaussian");
    }

    #[test]
    fn moment_errors_match_transport() {
        let data = [0.1, 0.15, 0.4, 0.42, 0.9, 0.93, 0.95];
        for family in Family::ALL {
            let s = values(&data);
            let idx: Vec<usize> = (0..data.len()).collect();
            let (r, errs) = fit_indices_with_errors(&s, &idx, family).unwrap();
            let exact = cluster_distance(&s, &idx, &r).unwrap();
            assert!(close(exact, errs[0].sqrt(), 1e-12), "{family}: {exact} vs {}", errs[0].sqrt());
        }
    }

    #[test]
    fn find_r_per_cluster() {
        let s = values(&[-1.0, 1.0, 5.0]);
        let reps = find_r(&s, &[vec![0, 1], vec![2]], Family::Gaussian).unwrap();
        assert_eq!(reps[1].marginal(0), &Marginal::Gaussian { mean: 5.0, std_dev: 0.0 });
        let reps = find_r(&values(&[0.0, 1.0]), &[vec![0], vec![1]], Family::Dirac).unwrap();
        assert_eq!(reps[0].means(), vec![0.0]);
        assert_eq!(reps[1].means(), vec![1.0]);
    }

    #[test]
    fn sampling() {
        let d = Representative::dirac(&[3.0]).unwrap();
        assert_eq!(sample_representative(&d, 5, 1).unwrap().column(0), vec![3.0; 5]);
        let z = Representative::new(vec![Marginal::Uniform { lower: 0.0, upper: 0.0 }]).unwrap();
        assert!(sample_representative(&z, 7, 2).unwrap().column(0).iter().all(|&x| x == 0.0));
        let u = Representative::new(vec![Marginal::Uniform { lower: 0.0, upper: 1.0 }]).unwrap();
        let s = sample_representative(&u, 100_000, 3).unwrap();
        let mean = s.column(0).iter().sum::<f64>() / 1e5;
        assert!((0.49..=0.51).contains(&mean));
        assert_eq!(sample_representative(&u, 50, 9), sample_representative(&u, 50, 9));
    }

    #[test]
    fn distances() {
        let u1 = Representative::new(vec![Marginal::Uniform { lower: 0.0, upper: 1.0 }]).unwrap();
        let u2 = Representative::new(vec![Marginal::Uniform { lower: 0.0, upper: 2.0 }]).unwrap();
        assert_eq!(representative_distance(&u1, &u2).unwrap(), 1.0);
        assert_eq!(representative_distance(&u1, &u1).unwrap(), 0.0);
        let d0 = Representative::dirac(&[0.0]).unwrap();
        let d3 = Representative::dirac(&[3.0]).unwrap();
        assert_eq!(representative_distance(&d0, &d3).unwrap(), 3.0);
        assert!(matches!(representative_distance(&d0, &u1), Err(AqError::FamilyMismatch(_))));
        let w = Representative::new(vec![Marginal::Window { center: 0.0, width: 0.5 }]).unwrap();
        assert_eq!(representative_distance(&d0, &w).unwrap(), (1.25f64).sqrt());
    }

    #[test]
    fn family_names() {
        for f in Family::ALL {
            assert_eq!(f.as_str().parse::<Family>().unwrap(), f);
        }
        assert_eq!("flood".parse::<Family>().unwrap(), Family::FloodHybrid);
        assert!("beta".parse::<Family>().is_err());
    }
}
