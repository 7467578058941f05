//! Lloyd's algorithm, the Dirac special case used as a baseline.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::aq::{quantization_error, repair_empty_clusters};
use crate::error::{AqError, Result};
use crate::families::{Family, Representative};
use crate::mixture::Clustering;
use crate::sample::{column_mean, squared_distance, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LloydConfig {
    pub max_iter: usize,
    /// Stop once the centroids move by at most this much in total.
    pub tolerance: f64,
}

impl Default for LloydConfig {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tolerance: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LloydResult {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Quantization error with Dirac representatives (marginal-sum distance).
    pub error: f64,
    /// Classical `(mean ‖x − c(x)‖²)^{1/2}`.
    pub sse_error: f64,
    /// Centroids after every iteration.
    pub trajectory: Vec<Vec<Vec<f64>>>,
    /// Classical error after every assignment step.
    pub sse_trajectory: Vec<f64>,
    pub iterations: usize,
    pub reseeds: usize,
    pub converged: bool,
}

fn nearest(x: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_distance(x, c);
        if d < best.0 {
            best = (d, j);
        }
    }
    best.1
}

fn sse(sample: &Sample, clusters: &[Vec<usize>], centroids: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for (c, centre) in clusters.iter().zip(centroids) {
        for &i in c {
            total += squared_distance(sample.point(i), centre);
        }
    }
    (total / sample.len() as f64).sqrt()
}

/// Alternates nearest-centroid assignment and centroid updates.
///
/// Ties go to the lowest centroid index. An empty cluster receives the point
/// of the largest cluster farthest from that cluster's mean.
pub fn lloyd_fit(sample: &Sample, initial_centroids: &[Vec<f64>], config: &LloydConfig) -> Result<LloydResult> {
    let l = initial_centroids.len();
    let n = sample.len();
    if l == 0 {
        return Err(AqError::InvalidParameter("no initial centroids".into()));
    }
    if n < l {
        return Err(AqError::TooFewPoints { clusters: l, points: n });
    }
    if config.max_iter == 0 || config.tolerance.is_nan() || config.tolerance < 0.0 {
        return Err(AqError::InvalidParameter("max_iter must be positive and tolerance non-negative".into()));
    }
    if let Some(c) = initial_centroids.iter().find(|c| c.len() != sample.dim()) {
        return Err(AqError::DimensionMismatch {
            expected: sample.dim(),
            found: c.len(),
        });
    }
    for (a, ca) in initial_centroids.iter().enumerate() {
        if initial_centroids[..a].contains(ca) {
            return Err(AqError::InvalidParameter("initial centroids must be distinct".into()));
        }
    }

    let mut centroids = initial_centroids.to_vec();
    let mut trajectory = Vec::new();
    let mut sse_trajectory = Vec::new();
    let mut reseeds = 0;
    let mut converged = false;
    let mut clustering = Clustering::new(vec![(0..n).collect()], n)?;
    let mut iterations = 0;
    while iterations < config.max_iter {
        iterations += 1;
        let labels: Vec<usize> = sample.points().map(|x| nearest(x, &centroids)).collect();
        clustering = Clustering::from_labels(&labels, l)?;
        reseeds += repair_empty_clusters(&mut clustering, sample, Family::Dirac)?;
        sse_trajectory.push(sse(sample, clustering.clusters(), &centroids));
        let updated: Vec<Vec<f64>> = clustering
            .clusters()
            .iter()
            .map(|c| (0..sample.dim()).map(|k| column_mean(sample, c, k)).collect())
            .collect();
        let movement: f64 = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| squared_distance(a, b).sqrt())
            .sum();
        centroids = updated;
        trajectory.push(centroids.clone());
        if movement <= config.tolerance {
            converged = true;
            break;
        }
    }

    let reps = centroids
        .iter()
        .map(|c| Representative::dirac(c))
        .collect::<Result<Vec<_>>>()?;
    let error = quantization_error(sample, &clustering, &reps)?;
    let sse_error = sse(sample, clustering.clusters(), &centroids);
    Ok(LloydResult {
        labels: clustering.labels(),
        centroids,
        error,
        sse_error,
        trajectory,
        sse_trajectory,
        iterations,
        reseeds,
        converged,
    })
}

/// `l` distinct sample points chosen uniformly at random.
pub fn random_starts<R: Rng + ?Sized>(sample: &Sample, l: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    if l > sample.len() {
        return Err(AqError::TooFewPoints {
            clusters: l,
            points: sample.len(),
        });
    }
    Ok(sample_indices(rng, sample.len(), l)
        .into_iter()
        .map(|i| sample.point(i).to_vec())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converges_immediately_on_perfect_starts() {
        let s = Sample::from_values(&[0.0, 1.0]).unwrap();
        let r = lloyd_fit(&s, &[vec![0.0], vec![1.0]], &LloydConfig::default()).unwrap();
        assert_eq!(r.error, 0.0);
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
    }

    #[test]
    fn four_points() {
        let s = Sample::from_values(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        let r = lloyd_fit(&s, &[vec![0.0], vec![3.0]], &LloydConfig::default()).unwrap();
        assert_eq!(r.labels, vec![0, 0, 1, 1]);
        assert_eq!(r.centroids, vec![vec![0.5], vec![2.5]]);
        assert_eq!(r.error, 0.5);
    }

    #[test]
    fn rejects_bad_starts() {
        let s = Sample::from_values(&[0.0, 1.0]).unwrap();
        assert!(lloyd_fit(&s, &[vec![0.0], vec![0.0]], &LloydConfig::default()).is_err());
        assert!(lloyd_fit(&s, &[vec![0.0], vec![1.0], vec![2.0]], &LloydConfig::default()).is_err());
    }
}
