//! Cluster assignment from a mixture and empty-cluster repair.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{AqError, Result};
use crate::families::{fit_indices, Family};
use crate::mixture::{Clustering, Mixture};
use crate::sample::{squared_distance, Sample};

/// Draws `n_draws` labelled points from `m` and gives every sample point the
/// label of its nearest draw (Euclidean, ties to the lowest draw index).
/// Clusters may come back empty.
pub fn find_c<R: Rng + ?Sized>(sample: &Sample, m: &Mixture, n_draws: usize, rng: &mut R) -> Result<Clustering> {
    if n_draws == 0 {
        return Err(AqError::InvalidParameter("FindC needs at least one draw".into()));
    }
    if m.dim() != sample.dim() {
        return Err(AqError::DimensionMismatch {
            expected: sample.dim(),
            found: m.dim(),
        });
    }
    let dim = sample.dim();
    let (draws, labels) = m.draw(n_draws, rng);
    let assigned: Vec<usize> = sample
        .points()
        .map(|x| {
            let mut best = (f64::INFINITY, 0);
            for (i, y) in draws.chunks_exact(dim).enumerate() {
                let d = squared_distance(x, y);
                if d < best.0 {
                    best = (d, i);
                }
            }
            labels[best.1]
        })
        .collect();
    Clustering::from_labels(&assigned, m.len())
}

pub fn find_c_seeded(sample: &Sample, m: &Mixture, n_draws: usize, seed: u64) -> Result<Clustering> {
    find_c(sample, m, n_draws, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Fills empty clusters one at a time. Each receives the point of the
/// currently largest cluster (lowest index on ties) that lies farthest from
/// that cluster's fitted representative mean (lowest sample index on ties).
/// Returns the number of points moved.
pub fn repair_empty_clusters(c: &mut Clustering, sample: &Sample, family: Family) -> Result<usize> {
    if c.n() < c.len() {
        return Err(AqError::TooFewPoints {
            clusters: c.len(),
            points: c.n(),
        });
    }
    let mut moved = 0;
    while let Some(empty) = c.clusters().iter().position(Vec::is_empty) {
        let donor = largest_cluster(c.clusters());
        let members = &c.clusters()[donor];
        let center = fit_indices(sample, members, family)?.means();
        let mut best = (f64::NEG_INFINITY, 0);
        for (pos, &i) in members.iter().enumerate() {
            let d = squared_distance(sample.point(i), &center);
            if d > best.0 {
                best = (d, pos);
            }
        }
        let clusters = c.clusters_mut();
        let point = clusters[donor].remove(best.1);
        clusters[empty].push(point);
        moved += 1;
    }
    Ok(moved)
}

pub(crate) fn largest_cluster(clusters: &[Vec<usize>]) -> usize {
    let mut best = 0;
    for (j, c) in clusters.iter().enumerate() {
        if c.len() > clusters[best].len() {
            best = j;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::Representative;

    fn dirac_mix(points: &[f64], weights: &[f64]) -> Mixture {
        let reps = points.iter().map(|&x| Representative::dirac(&[x]).unwrap()).collect();
        Mixture::new(Family::Dirac, reps, weights.to_vec()).unwrap()
    }

    #[test]
    fn nearest_draw_labels() {
        let s = Sample::from_values(&[0.1, 0.9]).unwrap();
        for seed in 0..5 {
            let c = find_c_seeded(&s, &dirac_mix(&[0.0, 1.0], &[0.5, 0.5]), 100, seed).unwrap();
            assert_eq!(c.clusters(), &[vec![0], vec![1]]);
        }
        let c = find_c_seeded(&s, &dirac_mix(&[0.0, 1.0], &[1.0, 0.0]), 100, 3).unwrap();
        assert_eq!(c.clusters(), &[vec![0, 1], vec![]]);
    }

    #[test]
    fn repair_moves_lowest_index_on_ties() {
        let s = Sample::from_values(&[0.0, 5.0]).unwrap();
        let mut c = Clustering::new(vec![vec![0, 1], vec![]], 2).unwrap();
        assert_eq!(repair_empty_clusters(&mut c, &s, Family::Dirac).unwrap(), 1);
        assert_eq!(c.clusters(), &[vec![1], vec![0]]);
    }

    #[test]
    fn repair_fills_every_cluster() {
        let s = Sample::from_values(&[0.0, 1.0, 2.0]).unwrap();
        let mut c = Clustering::new(vec![vec![0, 1, 2], vec![], vec![]], 3).unwrap();
        repair_empty_clusters(&mut c, &s, Family::Dirac).unwrap();
        assert!(c.clusters().iter().all(|cl| cl.len() == 1));
        let mut c = Clustering::new(vec![vec![0], vec![1], vec![2]], 3).unwrap();
        assert_eq!(repair_empty_clusters(&mut c, &s, Family::Dirac).unwrap(), 0);
        let one = Sample::from_values(&[0.0]).unwrap();
        let mut c = Clustering::new(vec![vec![0], vec![]], 1).unwrap();
        assert!(matches!(
            repair_empty_clusters(&mut c, &one, Family::Dirac),
            Err(AqError::TooFewPoints { .. })
        ));
    }
}
