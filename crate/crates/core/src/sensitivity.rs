//! Sensitivity analysis from conditional input distributions.
//!
//! Inputs are mapped to their normalized ranks, the rows of an output regime
//! are kept and a FloodHybrid mixture is fitted to them. A variable that
//! stays uniform on [0, 1] within a representative does not drive that part
//! of the regime.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aq::{fit, AqConfig, FitReport};
use crate::error::{AqError, Result};
use crate::families::{fit_indices, Family};
use crate::marginal::Marginal;
use crate::mixture::Mixture;
use crate::sample::Sample;

/// `x ↦ #{y : y ≤ x} / n`; tied values share the largest rank.
pub fn rank_transform(column: &[f64]) -> Result<Vec<f64>> {
    if column.is_empty() {
        return Err(AqError::EmptySample);
    }
    if column.iter().any(|x| !x.is_finite()) {
        return Err(AqError::NonFinite);
    }
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = column.len() as f64;
    Ok(column
        .iter()
        .map(|&x| sorted.partition_point(|&y| y <= x) as f64 / n)
        .collect())
}

/// A table with its rank-transformed copy and the rows of the regime.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedDataset {
    pub original: Sample,
    pub ranked: Sample,
    pub mask: Vec<bool>,
}

impl RankedDataset {
    pub fn new(original: Sample, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != original.len() {
            return Err(AqError::DimensionMismatch {
                expected: original.len(),
                found: mask.len(),
            });
        }
        let columns = (0..original.dim())
            .map(|k| rank_transform(&original.column(k)))
            .collect::<Result<Vec<_>>>()?;
        let data = (0..original.len())
            .flat_map(|i| columns.iter().map(move |c| c[i]))
            .collect();
        let ranked = Sample::from_rows(original.dim(), data)?.with_names(original.names().to_vec())?;
        Ok(Self { original, ranked, mask })
    }

    pub fn regime_indices(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| self.mask[i]).collect()
    }

    /// Ranked rows of the regime.
    pub fn regime(&self) -> Result<Sample> {
        self.ranked.select(&self.regime_indices())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSummary {
    pub variable: String,
    /// `"dirac"` or `"window"`.
    pub kind: String,
    pub center: f64,
    /// Zero for a Dirac.
    pub width: f64,
    pub influential: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentativeSummary {
    pub index: usize,
    pub weight: f64,
    pub variables: Vec<VariableSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub variables: Vec<String>,
    pub rows: usize,
    pub regime_rows: usize,
    pub representatives: Vec<RepresentativeSummary>,
    pub fit: FitReport,
}

impl SensitivityReport {
    /// The representative of largest weight (lowest index on ties).
    pub fn dominant(&self) -> &RepresentativeSummary {
        let mut best = &self.representatives[0];
        for r in &self.representatives[1..] {
            if r.weight > best.weight {
                best = r;
            }
        }
        best
    }
}

fn summarize(names: &[String], mixture: &Mixture) -> Vec<RepresentativeSummary> {
    mixture
        .representatives()
        .iter()
        .zip(mixture.weights())
        .enumerate()
        .map(|(index, (r, &weight))| RepresentativeSummary {
            index,
            weight,
            variables: r
                .marginals()
                .iter()
                .zip(names)
                .map(|(m, name)| {
                    let (kind, center, width) = match *m {
                        Marginal::Dirac { location } => ("dirac", location, 0.0),
                        Marginal::Window { center, width } => ("window", center, width),
                        _ => unreachable!("flood hybrid marginals are Dirac or window"),
                    };
                    VariableSummary {
                        variable: name.clone(),
                        kind: kind.into(),
                        center,
                        width,
                        influential: !(kind == "window" && width == 1.0),
                    }
                })
                .collect(),
        })
        .collect()
}

/// Starting mixture for the regime: `l` copies of the fit to all regime rows.
pub fn pooled_init(regime: &Sample, l: usize) -> Result<Mixture> {
    let all: Vec<usize> = (0..regime.len()).collect();
    let r = fit_indices(regime, &all, Family::FloodHybrid)?;
    Mixture::uniform_weights(Family::FloodHybrid, vec![r; l])
}

/// Fits a FloodHybrid mixture of `config.l` components to the ranked rows of
/// the regime. The family in `config` is overridden.
pub fn analyze(dataset: &RankedDataset, config: &AqConfig) -> Result<SensitivityReport> {
    let mut config = config.clone();
    config.family = Family::FloodHybrid;
    let regime = dataset.regime()?;
    if regime.len() < config.l {
        return Err(AqError::TooFewPoints {
            clusters: config.l,
            points: regime.len(),
        });
    }
    let init = pooled_init(&regime, config.l)?;
    let report = fit(&regime, &init, &config)?;
    let names = regime.names().to_vec();
    Ok(SensitivityReport {
        representatives: summarize(&names, &report.best.mixture),
        variables: names,
        rows: dataset.original.len(),
        regime_rows: regime.len(),
        fit: report,
    })
}

/// Names of the synthetic benchmark columns; the first one drives the regime.
pub const BENCHMARK_VARIABLES: [&str; 4] = ["q_max", "ks3", "ks4", "erosion"];

/// A flood-like table: a Gumbel discharge, two triangular friction
/// coefficients and a uniform erosion rate, all independent. The regime is
/// the discharge exceeding its empirical 0.999-quantile.
pub fn synthetic_benchmark(rows: usize, seed: u64) -> Result<(Sample, Vec<bool>)> {
    if rows == 0 {
        return Err(AqError::EmptySample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let triangular = |u: f64, a: f64, c: f64, b: f64| {
        let fc = (c - a) / (b - a);
        if u < fc {
            a + (u * (b - a) * (c - a)).sqrt()
        } else {
            b - ((1.0 - u) * (b - a) * (b - c)).sqrt()
        }
    };
    let mut data = Vec::with_capacity(rows * 4);
    let mut q = Vec::with_capacity(rows);
    for _ in 0..rows {
        let u: f64 = rng.random_range(f64::EPSILON..1.0);
        let q_max = 1013.0 - 558.0 * (-u.ln()).ln();
        data.push(q_max);
        data.push(triangular(rng.random(), 15.0, 30.0, 50.0));
        data.push(triangular(rng.random(), 20.0, 30.0, 40.0));
        data.push(rng.random_range(0.0..1.0));
        q.push(q_max);
    }
    let mut sorted = q.clone();
    sorted.sort_by(f64::total_cmp);
    let threshold = sorted[((0.999 * rows as f64).ceil() as usize).clamp(1, rows) - 1];
    let mask = q.iter().map(|&x| x > threshold).collect();
    let names = BENCHMARK_VARIABLES.iter().map(|s| s.to_string()).collect();
    Ok((Sample::from_rows(4, data)?.with_names(names)?, mask))
}
