//! Mixtures of representatives, clusterings and the global error.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AqError, Result};
use crate::families::{Family, Representative};
use crate::marginal::{Marginal, MarginalMixture};
use crate::sample::Sample;
use crate::transport::{w2_empirical_mixture, EmpiricalQuantile};

const WEIGHT_TOLERANCE: f64 = 1e-12;

/// `R_J = Σ_j p_j R_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureDoc", into = "MixtureDoc")]
pub struct Mixture {
    family: Family,
    representatives: Vec<Representative>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentDoc {
    family: Family,
    marginals: Representative,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureDoc {
    family: Family,
    l: usize,
    components: Vec<ComponentDoc>,
}

impl TryFrom<MixtureDoc> for Mixture {
    type Error = AqError;

    fn try_from(doc: MixtureDoc) -> Result<Self> {
        if doc.l != doc.components.len() {
            return Err(AqError::InvalidParameter(format!(
                "mixture declares l = {} but lists {} components",
                doc.l,
                doc.components.len()
            )));
        }
        if let Some(c) = doc.components.iter().find(|c| c.family != doc.family) {
            return Err(AqError::FamilyMismatch(format!(
                "component of family {} in a {} mixture",
                c.family, doc.family
            )));
        }
        let (representatives, weights) = doc
            .components
            .into_iter()
            .map(|c| (c.marginals, c.weight))
            .unzip();
        Mixture::new(doc.family, representatives, weights)
    }
}

impl From<Mixture> for MixtureDoc {
    fn from(m: Mixture) -> Self {
        MixtureDoc {
            family: m.family,
            l: m.representatives.len(),
            components: m
                .representatives
                .into_iter()
                .zip(m.weights)
                .map(|(marginals, weight)| ComponentDoc {
                    family: m.family,
                    marginals,
                    weight,
                })
                .collect(),
        }
    }
}

impl Mixture {
    pub fn new(family: Family, representatives: Vec<Representative>, weights: Vec<f64>) -> Result<Self> {
        if representatives.is_empty() {
            return Err(AqError::InvalidParameter("mixture needs at least one component".into()));
        }
        if representatives.len() != weights.len() {
            return Err(AqError::DimensionMismatch {
                expected: representatives.len(),
                found: weights.len(),
            });
        }
        let dim = representatives[0].dim();
        for r in &representatives {
            if r.dim() != dim {
                return Err(AqError::DimensionMismatch {
                    expected: dim,
                    found: r.dim(),
                });
            }
            if let Some(m) = r.marginals().iter().find(|m| !family.admits(m)) {
                return Err(AqError::FamilyMismatch(format!(
                    "{} marginal in a {family} mixture",
                    m.kind()
                )));
            }
            for m in r.marginals() {
                m.validate()?;
            }
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(AqError::InvalidWeights("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total == 0.0 {
            return Err(AqError::InvalidWeights("mixture with zero total weight".into()));
        }
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(AqError::InvalidWeights(format!("weights sum to {total}, not 1")));
        }
        Ok(Self {
            family,
            representatives,
            weights,
        })
    }

    /// Equal weights `1/ℓ`.
    pub fn uniform_weights(family: Family, representatives: Vec<Representative>) -> Result<Self> {
        let l = representatives.len().max(1);
        Self::new(family, representatives, vec![1.0 / l as f64; l])
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.representatives[0].dim()
    }

    pub fn representatives(&self) -> &[Representative] {
        &self.representatives
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Mixture of the `k`-th marginals.
    pub fn marginal_mixture(&self, k: usize) -> Result<MarginalMixture> {
        let comps: Vec<(f64, Marginal)> = self
            .weights
            .iter()
            .zip(&self.representatives)
            .map(|(&w, r)| (w, *r.marginal(k)))
            .collect();
        MarginalMixture::new(comps)
    }

    /// Draws `count` labelled points: `j ~ weights`, then `y ~ R_j`.
    pub fn draw<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> (Vec<f64>, Vec<usize>) {
        let index = WeightedIndex::new(&self.weights).expect("weights validated at construction");
        let mut points = Vec::with_capacity(count * self.dim());
        let mut labels = Vec::with_capacity(count);
        for _ in 0..count {
            let j = index.sample(rng);
            self.representatives[j].draw_into(rng, &mut points);
            labels.push(j);
        }
        (points, labels)
    }
}

/// Labelled draw of `count` points from `m`, reproducible from `seed`.
pub fn sample_mixture(m: &Mixture, count: usize, seed: u64) -> Result<(Sample, Vec<usize>)> {
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (points, labels) = m.draw(count, &mut rng);
    Ok((Sample::from_rows(m.dim(), points)?, labels))
}

/// A partition of `{0, …, n−1}` into labelled clusters, each kept ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    clusters: Vec<Vec<usize>>,
    n: usize,
}

impl Clustering {
    /// Validates that `clusters` partition `0..n`; sorts each cluster.
    pub fn new(mut clusters: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for c in &mut clusters {
            c.sort_unstable();
            for &i in c.iter() {
                if i >= n {
                    return Err(AqError::InvalidClustering(format!("index {i} out of range for n = {n}")));
                }
                if seen[i] {
                    return Err(AqError::InvalidClustering(format!("index {i} assigned twice")));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(AqError::InvalidClustering(format!("index {i} unassigned")));
        }
        Ok(Self { clusters, n })
    }

    pub fn from_labels(labels: &[usize], l: usize) -> Result<Self> {
        let mut clusters = vec![Vec::new(); l];
        for (i, &j) in labels.iter().enumerate() {
            if j >= l {
                return Err(AqError::InvalidClustering(format!("label {j} out of range for {l} clusters")));
            }
            clusters[j].push(i);
        }
        Ok(Self {
            clusters,
            n: labels.len(),
        })
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub(crate) fn clusters_mut(&mut self) -> &mut Vec<Vec<usize>> {
        &mut self.clusters
    }

    pub fn into_clusters(self) -> Vec<Vec<usize>> {
        self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }

    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n];
        for (j, c) in self.clusters.iter().enumerate() {
            for &i in c {
                labels[i] = j;
            }
        }
        labels
    }

    pub fn has_empty(&self) -> bool {
        self.clusters.iter().any(Vec::is_empty)
    }
}

/// `p_j = n_j / n`.
pub fn mixture_weights_from_clustering(c: &Clustering) -> Result<Vec<f64>> {
    if c.has_empty() {
        return Err(AqError::EmptyCluster);
    }
    let n = c.n() as f64;
    Ok(c.clusters().iter().map(|cl| cl.len() as f64 / n).collect())
}

/// Marginal-sum `W₂` between the whole sample and the mixture.
pub fn global_error(sample: &Sample, m: &Mixture) -> Result<f64> {
    if sample.dim() != m.dim() {
        return Err(AqError::DimensionMismatch {
            expected: sample.dim(),
            found: m.dim(),
        });
    }
    let mut total = 0.0;
    for k in 0..sample.dim() {
        let q = EmpiricalQuantile::new(&sample.column(k))?;
        total += w2_empirical_mixture(&q, &m.marginal_mixture(k)?);
    }
    Ok(total)
}
