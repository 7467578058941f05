//! The augmented quantization loop.
//!
//! One epoch per entry of the `p_bin` schedule. Each iteration assigns the
//! sample to clusters by nearest mixture draw, repairs empty clusters,
//! perturbs the clustering, refits the representatives and reweights them by
//! cluster size. An epoch ends when the representatives move by at most
//! `min_distance` (summed over clusters) or after `it_max` iterations. The
//! state of lowest quantization error over all iterations is kept.

mod findc;
mod partitions;
mod perturb;

pub use findc::{find_c, find_c_seeded, repair_empty_clusters};
pub use partitions::{partitions_into, stirling2};
pub use perturb::{
    bin_size, local_error, merge, perturb, select_bins, split, split_clusters, split_clusters_literal,
    MergeOutcome, PerturbOutcome, SplitOutcome, MERGE_LIMIT,
};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AqError, Result};
use crate::families::{cluster_distance, find_r, fit_indices, representative_distance, Family, Representative};
use crate::mixture::{global_error, mixture_weights_from_clustering, Clustering, Mixture};
use crate::sample::Sample;

/// Parameters of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AqConfig {
    pub l: usize,
    pub family: Family,
    pub p_bin_schedule: Vec<f64>,
    pub it_max: usize,
    pub min_distance: f64,
    /// Clusters split per perturbation; defaults to `min(2, l)`.
    pub l_bin: usize,
    /// FindC draw count; `None` means `max(1000, 10·n)`.
    pub n_findc: Option<usize>,
    pub rng_seed: u64,
}

impl AqConfig {
    pub fn new(l: usize, family: Family) -> Self {
        Self {
            l,
            family,
            p_bin_schedule: vec![0.4, 0.2, 0.1],
            it_max: 10,
            min_distance: 1e-2,
            l_bin: l.min(2),
            n_findc: None,
            rng_seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(AqError::InvalidParameter("l must be at least 1".into()));
        }
        if self.it_max == 0 {
            return Err(AqError::InvalidParameter("it_max must be at least 1".into()));
        }
        if !(self.min_distance >= 0.0 && self.min_distance.is_finite()) {
            return Err(AqError::InvalidParameter(format!(
                "min_distance must be a non-negative number, got {}",
                self.min_distance
            )));
        }
        if let Some(p) = self.p_bin_schedule.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
            return Err(AqError::InvalidParameter(format!("p_bin must lie in (0, 1], got {p}")));
        }
        if self.l_bin > self.l {
            return Err(AqError::InvalidParameter(format!(
                "l_bin = {} exceeds l = {}",
                self.l_bin, self.l
            )));
        }
        if !self.p_bin_schedule.is_empty() && self.l + self.l_bin > MERGE_LIMIT {
            return Err(AqError::MergeExplosion {
                clusters: self.l + self.l_bin,
                limit: MERGE_LIMIT,
            });
        }
        if self.n_findc == Some(0) {
            return Err(AqError::InvalidParameter("n_findc must be at least 1".into()));
        }
        Ok(())
    }

    pub fn findc_draws(&self, n: usize) -> usize {
        self.n_findc.unwrap_or_else(|| 1000.max(10 * n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The last epoch stopped because the representatives settled.
    Converged,
    /// The last epoch ran out of iterations.
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub epoch: usize,
    pub iteration: usize,
    /// Zero when the epoch runs without perturbation.
    pub p_bin: f64,
    pub quantization_error: f64,
    pub global_error: f64,
    pub best_quantization_error: f64,
    pub distance: f64,
    pub mixture: Mixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestState {
    pub quantization_error: f64,
    pub global_error: f64,
    pub mixture: Mixture,
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub config: AqConfig,
    pub iterations: Vec<IterationRecord>,
    pub best: BestState,
    pub termination: Termination,
    pub warnings: Vec<String>,
}

/// `(Σ_j (n_j/n) W₂(C_j, R_j)²)^{1/2}` with the marginal-sum `W₂`.
pub fn quantization_error(sample: &Sample, clustering: &Clustering, reps: &[Representative]) -> Result<f64> {
    if reps.len() != clustering.len() {
        return Err(AqError::DimensionMismatch {
            expected: clustering.len(),
            found: reps.len(),
        });
    }
    if clustering.has_empty() {
        return Err(AqError::EmptyCluster);
    }
    let n = clustering.n() as f64;
    let mut total = 0.0;
    for (c, r) in clustering.clusters().iter().zip(reps) {
        let d = cluster_distance(sample, c, r)?;
        total += c.len() as f64 / n * d * d;
    }
    Ok(total.sqrt())
}

/// Quantization error of `clusters` with freshly fitted representatives.
pub fn fitted_quantization_error(sample: &Sample, clusters: &[Vec<usize>], family: Family) -> Result<f64> {
    let n: usize = clusters.iter().map(Vec::len).sum();
    let mut total = 0.0;
    for c in clusters {
        let e = local_error(sample, c, family)?;
        total += c.len() as f64 * e * e;
    }
    Ok((total / n as f64).sqrt())
}

/// Starting mixture: the sample is sorted along its dimension of largest
/// variance and cut into `l` slices of near-equal size; each slice is fitted
/// and the components get equal weights.
pub fn quantile_slice_init(sample: &Sample, l: usize, family: Family) -> Result<Mixture> {
    let n = sample.len();
    if l == 0 {
        return Err(AqError::InvalidParameter("l must be at least 1".into()));
    }
    if n < l {
        return Err(AqError::TooFewPoints { clusters: l, points: n });
    }
    let all: Vec<usize> = (0..n).collect();
    let var = |k: usize| {
        let col = sample.column(k);
        let m = col.iter().sum::<f64>() / n as f64;
        col.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
    };
    let mut axis = 0;
    for k in 1..sample.dim() {
        if var(k) > var(axis) {
            axis = k;
        }
    }
    let mut order = all;
    order.sort_by(|&a, &b| sample.value(a, axis).total_cmp(&sample.value(b, axis)).then(a.cmp(&b)));
    let mut reps = Vec::with_capacity(l);
    for j in 0..l {
        let lo = j * n / l;
        let hi = (j + 1) * n / l;
        let mut slice = order[lo..hi].to_vec();
        slice.sort_unstable();
        reps.push(fit_indices(sample, &slice, family)?);
    }
    Mixture::uniform_weights(family, reps)
}

/// Runs the full fit from `initial`.
pub fn fit(sample: &Sample, initial: &Mixture, config: &AqConfig) -> Result<FitReport> {
    config.validate()?;
    let n = sample.len();
    if initial.len() != config.l {
        return Err(AqError::InvalidParameter(format!(
            "initial mixture has {} components but l = {}",
            initial.len(),
            config.l
        )));
    }
    if n < config.l {
        return Err(AqError::TooFewPoints {
            clusters: config.l,
            points: n,
        });
    }
    if initial.dim() != sample.dim() {
        return Err(AqError::DimensionMismatch {
            expected: sample.dim(),
            found: initial.dim(),
        });
    }
    if initial.family() != config.family {
        return Err(AqError::FamilyMismatch(format!(
            "initial mixture is {} but the fit uses {}",
            initial.family(),
            config.family
        )));
    }
    let family = config.family;
    let draws = config.findc_draws(n);
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    // an empty schedule is one epoch without perturbation
    let epochs: Vec<Option<f64>> = if config.p_bin_schedule.is_empty() {
        vec![None]
    } else {
        config.p_bin_schedule.iter().copied().map(Some).collect()
    };

    let mut mixture = initial.clone();
    let mut iterations = Vec::new();
    let mut warnings = Vec::new();
    let mut best: Option<BestState> = None;
    let mut termination = Termination::MaxIterations;

    for (epoch, p_bin) in epochs.iter().enumerate() {
        let mut distance = f64::INFINITY;
        let mut it = 1;
        termination = Termination::MaxIterations;
        while distance > config.min_distance && it <= config.it_max {
            let old = mixture.representatives().to_vec();
            let mut clustering = find_c(sample, &mixture, draws, &mut rng)?;
            repair_empty_clusters(&mut clustering, sample, family)?;
            if let Some(p) = *p_bin {
                let out = perturb(sample, clustering.clusters(), family, p, config.l_bin)?;
                warnings.extend(
                    out.warnings
                        .into_iter()
                        .map(|w| format!("epoch {epoch}, iteration {it}: {w}")),
                );
                clustering = Clustering::new(out.clusters, n)?;
            }
            let reps = find_r(sample, clustering.clusters(), family)?;
            let weights = mixture_weights_from_clustering(&clustering)?;
            let q_err = quantization_error(sample, &clustering, &reps)?;
            mixture = Mixture::new(family, reps, weights)?;
            let g_err = global_error(sample, &mixture)?;
            if best.as_ref().is_none_or(|b| q_err < b.quantization_error) {
                best = Some(BestState {
                    quantization_error: q_err,
                    global_error: g_err,
                    mixture: mixture.clone(),
                    labels: clustering.labels(),
                });
            }
            distance = 0.0;
            for (a, b) in old.iter().zip(mixture.representatives()) {
                distance += representative_distance(a, b)?;
            }
            iterations.push(IterationRecord {
                epoch,
                iteration: it,
                p_bin: p_bin.unwrap_or(0.0),
                quantization_error: q_err,
                global_error: g_err,
                best_quantization_error: best.as_ref().map_or(q_err, |b| b.quantization_error),
                distance,
                mixture: mixture.clone(),
            });
            it += 1;
        }
        if distance <= config.min_distance {
            termination = Termination::Converged;
        }
    }

    Ok(FitReport {
        config: config.clone(),
        iterations,
        best: best.expect("at least one iteration runs"),
        termination,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(v: &[f64]) -> Sample {
        Sample::from_values(v).unwrap()
    }

    #[test]
    fn quantization_error_examples() {
        let s = values(&[0.0, 1.0]);
        let c = Clustering::new(vec![vec![0], vec![1]], 2).unwrap();
        let reps = vec![Representative::dirac(&[0.0]).unwrap(), Representative::dirac(&[1.0]).unwrap()];
        assert_eq!(quantization_error(&s, &c, &reps).unwrap(), 0.0);

        let s = values(&[0.0, 2.0]);
        let c = Clustering::new(vec![vec![0, 1]], 2).unwrap();
        let reps = vec![Representative::dirac(&[1.0]).unwrap()];
        assert_eq!(quantization_error(&s, &c, &reps).unwrap(), 1.0);

        let s = values(&[0.0, 2.0, 10.0]);
        let c = Clustering::new(vec![vec![0, 1], vec![2]], 3).unwrap();
        let reps = vec![Representative::dirac(&[1.0]).unwrap(), Representative::dirac(&[10.0]).unwrap()];
        let e = quantization_error(&s, &c, &reps).unwrap();
        assert!((e - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn local_error_examples() {
        assert_eq!(local_error(&values(&[0.3, 0.3, 0.3]), &[0, 1, 2], Family::Dirac).unwrap(), 0.0);
        assert_eq!(local_error(&values(&[0.0, 2.0]), &[0, 1], Family::Dirac).unwrap(), 1.0);
        // exact value under the ⌈qn⌉ quantile convention is 1/√54
        let e = local_error(&values(&[0.0, 0.5, 1.0]), &[0, 1, 2], Family::Uniform).unwrap();
        assert!((e - (1.0f64 / 54.0).sqrt()).abs() < 1e-14, "{e}");
    }

    #[test]
    fn point_sample_fits_exactly() {
        let s = values(&[0.0; 20]);
        let init = Mixture::new(Family::Dirac, vec![Representative::dirac(&[0.5]).unwrap()], vec![1.0]).unwrap();
        let report = fit(&s, &init, &AqConfig::new(1, Family::Dirac)).unwrap();
        assert_eq!(report.iterations[0].quantization_error, 0.0);
        assert_eq!(report.best.quantization_error, 0.0);
    }

    #[test]
    fn too_few_points() {
        let s = values(&[0.0]);
        let reps = vec![Representative::dirac(&[0.0]).unwrap(), Representative::dirac(&[1.0]).unwrap()];
        let init = Mixture::uniform_weights(Family::Dirac, reps).unwrap();
        let err = fit(&s, &init, &AqConfig::new(2, Family::Dirac)).unwrap_err();
        assert!(err.to_string().starts_with("more clusters than points"));
    }

    #[test]
    fn config_validation() {
        let mut c = AqConfig::new(7, Family::Uniform);
        assert!(matches!(c.validate(), Err(AqError::MergeExplosion { .. })));
        c.p_bin_schedule.clear();
        assert!(c.validate().is_ok());
        let mut c = AqConfig::new(2, Family::Uniform);
        c.p_bin_schedule = vec![0.0];
        assert!(c.validate().is_err());
        assert_eq!(AqConfig::new(2, Family::Dirac).findc_draws(20), 1000);
        assert_eq!(AqConfig::new(2, Family::Dirac).findc_draws(300), 3000);
    }

    #[test]
    fn slice_init() {
        let s = Sample::from_points(&[vec![0.0, 5.0], vec![0.1, 1.0], vec![0.2, 3.0], vec![0.3, 0.0]]).unwrap();
        let m = quantile_slice_init(&s, 2, Family::Dirac).unwrap();
        assert_eq!(m.representatives()[0].means(), vec![0.2, 0.5]);
        assert_eq!(m.weights(), &[0.5, 0.5]);
    }
}
