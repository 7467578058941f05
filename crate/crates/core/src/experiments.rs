//! Experiment protocols: the paired comparison with Lloyd's algorithm and
//! the randomized scenario suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aq::{fit, quantile_slice_init, AqConfig, FitReport};
use crate::error::{AqError, Result};
use crate::families::{Family, Representative};
use crate::lloyd::{lloyd_fit, random_starts, LloydConfig, LloydResult};
use crate::mixture::Mixture;
use crate::sample::Sample;
use crate::testgen::{generate, random_scenarios, true_errors, MixtureScenario};

/// Independent seed for the pair `(a, b)` under `seed`.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub samples: usize,
    pub starts: usize,
    pub points: usize,
    pub dim: usize,
    pub l: usize,
    pub seed: u64,
    /// AQ settings; `l`, `family` and `rng_seed` are set per run.
    pub aq: AqConfig,
    pub lloyd: LloydConfig,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            samples: 50,
            starts: 5,
            points: 20,
            dim: 2,
            l: 2,
            seed: 0,
            aq: AqConfig::new(2, Family::Dirac),
            lloyd: LloydConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRun {
    pub sample: usize,
    pub start: usize,
    pub lloyd_error: f64,
    pub aq_error: f64,
    /// `100·(aq − lloyd)/lloyd`; negative when AQ does better.
    pub relative_difference: f64,
    pub lloyd: LloydResult,
    pub aq: FitReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub runs: usize,
    /// Runs whose errors agree to a relative 1e-9.
    pub fraction_equal: f64,
    pub fraction_aq_better: f64,
    pub fraction_lloyd_better: f64,
    /// Median of `−relative_difference`, in percent.
    pub median_improvement: f64,
    /// Median of `−relative_difference` over the runs where AQ does better.
    pub median_improvement_when_better: Option<f64>,
    /// Quantiles 0, 0.1, 0.25, 0.5, 0.75, 0.9, 1 of the relative difference.
    pub relative_difference_quantiles: Vec<f64>,
}

const EQUAL_TOLERANCE: f64 = 1e-9;

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Quantile by linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(runs: &[CompareRun]) -> CompareSummary {
    let n = runs.len() as f64;
    let rel = |r: &CompareRun| (r.aq_error - r.lloyd_error) / r.lloyd_error.abs().max(f64::MIN_POSITIVE);
    let equal = runs.iter().filter(|r| rel(r).abs() <= EQUAL_TOLERANCE).count();
    let better = runs.iter().filter(|r| rel(r) < -EQUAL_TOLERANCE).count();
    let worse = runs.iter().filter(|r| rel(r) > EQUAL_TOLERANCE).count();
    let mut improvements: Vec<f64> = runs.iter().map(|r| 0.0 - r.relative_difference).collect();
    let mut when_better: Vec<f64> = runs
        .iter()
        .filter(|r| rel(r) < -EQUAL_TOLERANCE)
        .map(|r| 0.0 - r.relative_difference)
        .collect();
    let mut sorted: Vec<f64> = runs.iter().map(|r| r.relative_difference).collect();
    sorted.sort_by(f64::total_cmp);
    CompareSummary {
        runs: runs.len(),
        fraction_equal: equal as f64 / n,
        fraction_aq_better: better as f64 / n,
        fraction_lloyd_better: worse as f64 / n,
        median_improvement: median(&mut improvements).unwrap_or(0.0),
        median_improvement_when_better: median(&mut when_better),
        relative_difference_quantiles: if sorted.is_empty() {
            Vec::new()
        } else {
            [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0]
                .iter()
                .map(|&q| quantile(&sorted, q))
                .collect()
        },
    }
}

/// One paired run: Lloyd and AQ (Dirac family) from the same centroids.
pub fn compare_once(sample: &Sample, starts: &[Vec<f64>], config: &CompareConfig, aq_seed: u64) -> Result<(LloydResult, FitReport)> {
    let lloyd = lloyd_fit(sample, starts, &config.lloyd)?;
    let reps = starts
        .iter()
        .map(|c| Representative::dirac(c))
        .collect::<Result<Vec<_>>>()?;
    let init = Mixture::uniform_weights(Family::Dirac, reps)?;
    let mut aq_config = config.aq.clone();
    aq_config.l = starts.len();
    aq_config.family = Family::Dirac;
    aq_config.rng_seed = aq_seed;
    let report = fit(sample, &init, &aq_config)?;
    Ok((lloyd, report))
}

/// Uniform sample of `points` points in `[0, 1]^dim`.
pub fn uniform_cloud(points: usize, dim: usize, seed: u64) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..points * dim).map(|_| rng.random::<f64>()).collect();
    Sample::from_rows(dim, data)
}

/// The paired protocol over `samples × starts` runs, in input order.
pub fn compare_lloyd(config: &CompareConfig) -> Result<(Vec<CompareRun>, CompareSummary)> {
    if config.samples == 0 || config.starts == 0 {
        return Err(AqError::InvalidParameter("samples and starts must be positive".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..config.samples)
        .flat_map(|s| (0..config.starts).map(move |t| (s, t)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(s, t)| {
            let sample = uniform_cloud(config.points, config.dim, derive_seed(config.seed, s as u64, u64::MAX))?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, s as u64, t as u64));
            let starts = random_starts(&sample, config.l, &mut rng)?;
            let (lloyd, aq) = compare_once(&sample, &starts, config, rng.random())?;
            let lloyd_error = lloyd.error;
            let aq_error = aq.best.quantization_error;
            Ok(CompareRun {
                sample: s,
                start: t,
                lloyd_error,
                aq_error,
                relative_difference: 100.0 * (aq_error - lloyd_error) / lloyd_error,
                lloyd,
                aq,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&runs);
    Ok((runs, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub scenario: String,
    pub n: usize,
    pub fitted_quantization_error: f64,
    pub fitted_global_error: f64,
    pub true_quantization_error: f64,
    pub true_global_error: f64,
}

/// Generates and fits one scenario with `l` components, starting from
/// quantile slices.
pub fn run_scenario(scenario: &MixtureScenario, l: usize, config: &AqConfig) -> Result<(SuiteRow, FitReport)> {
    let generated = generate(scenario)?;
    let truth = true_errors(scenario, &generated)?;
    let family = scenario.mixture.family();
    let init = quantile_slice_init(&generated.sample, l, family)?;
    let mut config = config.clone();
    config.l = l;
    config.family = family;
    config.l_bin = config.l_bin.min(l);
    let report = fit(&generated.sample, &init, &config)?;
    Ok((
        SuiteRow {
            scenario: scenario.name.clone(),
            n: scenario.n,
            fitted_quantization_error: report.best.quantization_error,
            fitted_global_error: report.best.global_error,
            true_quantization_error: truth.quantization_error,
            true_global_error: truth.global_error,
        },
        report,
    ))
}

/// Regenerates `count` randomized two-component scenarios of `family` and
/// fits each with two components.
pub fn suite(family: Family, count: usize, seed: u64, config: &AqConfig) -> Result<Vec<SuiteRow>> {
    let scenarios = random_scenarios(family, count, seed)?;
    scenarios
        .par_iter()
        .map(|s| {
            let mut c = config.clone();
            c.rng_seed = s.seed;
            run_scenario(s, 2, &c).map(|(row, _)| row)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pair() {
        let config = CompareConfig {
            samples: 1,
            starts: 1,
            ..CompareConfig::default()
        };
        let (runs, summary) = compare_lloyd(&config).unwrap();
        assert_eq!(runs.len(), 1);
        assert_eq!(summary.runs, 1);
        let again = compare_lloyd(&config).unwrap();
        assert_eq!(again.1, summary);
    }

    #[test]
    fn quantiles_interpolate() {
        assert_eq!(quantile(&[0.0, 1.0, 2.0], 0.25), 0.5);
        assert_eq!(quantile(&[3.0], 0.9), 3.0);
    }
}
