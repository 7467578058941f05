//! Split and merge: the cluster perturbation that never raises the
//! quantization error.
//!
//! Split moves points one at a time out of the worst clusters into sister
//! bins, each time choosing the point whose move gives the lowest two-cluster
//! error. Merge then tries every regrouping of the enlarged clustering into
//! `ℓ` clusters; regrouping each bin with its source reproduces the input, so
//! the result is never worse.
//!
//! The greedy step evaluates every candidate move. The fast path updates the
//! sorted-cluster moments of both sides in `O(1)` per candidate from prefix
//! sums; [`split_clusters_literal`] refits both sides from scratch and serves
//! as its reference.

use std::collections::HashMap;

use crate::error::{AqError, Result};
use crate::families::{
    cluster_distance, fit_indices, fit_indices_with_errors, fit_marginal,
    sorted_column, Family, MarginalMoments,
};
use crate::sample::{column_mean, Sample};
use crate::special::gaussian_piece_weights;

use super::partitions::partitions_into;

/// Largest `ℓ + ℓ_bin` accepted by [`merge`].
pub const MERGE_LIMIT: usize = 8;

/// Clusters after a split: the originals first, then one bin per split cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitOutcome {
    pub clusters: Vec<Vec<usize>>,
    /// Index of the source cluster of every appended bin.
    pub sources: Vec<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeOutcome {
    pub clusters: Vec<Vec<usize>>,
    pub quantization_error: f64,
    pub candidates: usize,
}

/// Local error `W₂(C, fit(C))` of one cluster, marginal-sum surrogate.
pub fn local_error(sample: &Sample, indices: &[usize], family: Family) -> Result<f64> {
    let r = fit_indices(sample, indices, family)?;
    cluster_distance(sample, indices, &r)
}

/// Number of points moved out of a cluster of size `n`.
pub fn bin_size(n: usize, p_bin: f64) -> usize {
    if n < 2 {
        return 0;
    }
    // the tiny offset keeps products such as 0.57 * 100 from flooring to 56
    let raw = (p_bin * n as f64 + 1e-9).floor() as usize;
    raw.clamp(1, n - 1)
}

/// The `l_bin` clusters of highest local error, ties to the lowest index.
pub fn select_bins(sample: &Sample, clusters: &[Vec<usize>], family: Family, l_bin: usize) -> Result<Vec<usize>> {
    let mut errors = Vec::with_capacity(clusters.len());
    for (j, c) in clusters.iter().enumerate() {
        errors.push((local_error(sample, c, family)?, j));
    }
    errors.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(errors.into_iter().take(l_bin).map(|(_, j)| j).collect())
}

fn validate_p_bin(p_bin: f64) -> Result<()> {
    if p_bin > 0.0 && p_bin <= 1.0 {
        Ok(())
    } else {
        Err(AqError::InvalidParameter(format!("p_bin must lie in (0, 1], got {p_bin}")))
    }
}

/// Splits the clusters listed in `indexes_bin`, appending one bin each.
pub fn split_clusters(
    sample: &Sample,
    clusters: &[Vec<usize>],
    family: Family,
    p_bin: f64,
    indexes_bin: &[usize],
) -> Result<SplitOutcome> {
    split_with(sample, clusters, family, p_bin, indexes_bin, greedy_fast)
}

/// Same result as [`split_clusters`], refitting both sides for every candidate.
pub fn split_clusters_literal(
    sample: &Sample,
    clusters: &[Vec<usize>],
    family: Family,
    p_bin: f64,
    indexes_bin: &[usize],
) -> Result<SplitOutcome> {
    split_with(sample, clusters, family, p_bin, indexes_bin, greedy_literal)
}

/// Selects the `l_bin` worst clusters and splits them.
pub fn split(sample: &Sample, clusters: &[Vec<usize>], family: Family, p_bin: f64, l_bin: usize) -> Result<SplitOutcome> {
    let chosen = select_bins(sample, clusters, family, l_bin)?;
    split_clusters(sample, clusters, family, p_bin, &chosen)
}

type Greedy = fn(&Sample, &[usize], Family, usize) -> Result<(Vec<usize>, Vec<usize>)>;

fn split_with(
    sample: &Sample,
    clusters: &[Vec<usize>],
    family: Family,
    p_bin: f64,
    indexes_bin: &[usize],
    greedy: Greedy,
) -> Result<SplitOutcome> {
    validate_p_bin(p_bin)?;
    let mut out = clusters.to_vec();
    let mut bins = Vec::new();
    let mut sources = Vec::new();
    let mut warnings = Vec::new();
    for &j in indexes_bin {
        let members = clusters
            .get(j)
            .ok_or_else(|| AqError::InvalidClustering(format!("no cluster {j} to split")))?;
        if members.len() < 2 {
            warnings.push(format!("cluster {j} has {} point(s) and was not split", members.len()));
            continue;
        }
        let (rest, bin) = greedy(sample, members, family, bin_size(members.len(), p_bin))?;
        out[j] = rest;
        if !bin.is_empty() {
            bins.push(bin);
            sources.push(j);
        }
    }
    out.extend(bins);
    Ok(SplitOutcome {
        clusters: out,
        sources,
        warnings,
    })
}

fn two_cluster_cost(n_a: usize, err_a: &[f64], n_b: usize, err_b: &[f64]) -> f64 {
    let a: f64 = err_a.iter().map(|e| e.sqrt()).sum();
    let b: f64 = err_b.iter().map(|e| e.sqrt()).sum();
    n_a as f64 * a * a + n_b as f64 * b * b
}

fn greedy_literal(sample: &Sample, members: &[usize], family: Family, n_bin: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut rest = members.to_vec();
    let mut bin: Vec<usize> = Vec::new();
    for _ in 0..n_bin {
        let mut best = (f64::INFINITY, 0);
        for (pos, &x) in rest.iter().enumerate() {
            let a: Vec<usize> = rest.iter().copied().filter(|&i| i != x).collect();
            let mut b = bin.clone();
            let at = b.partition_point(|&i| i < x);
            b.insert(at, x);
            let (_, ea) = fit_indices_with_errors(sample, &a, family)?;
            let (_, eb) = fit_indices_with_errors(sample, &b, family)?;
            let cost = two_cluster_cost(a.len(), &ea, b.len(), &eb);
            if cost < best.0 {
                best = (cost, pos);
            }
        }
        let x = rest.remove(best.1);
        let at = bin.partition_point(|&i| i < x);
        bin.insert(at, x);
    }
    Ok((rest, bin))
}

/// One dimension of a cluster in sorted order, centred on a fixed value.
struct SortedSide {
    /// `(x − centre, sample index)`, ascending by value then index.
    items: Vec<(f64, usize)>,
}

impl SortedSide {
    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.items.iter().map(|p| p.0)
    }

    fn insert(&mut self, item: (f64, usize)) {
        let at = self
            .items
            .partition_point(|p| p.0 < item.0 || (p.0 == item.0 && p.1 < item.1));
        self.items.insert(at, item);
    }

    fn remove(&mut self, index: usize) -> (f64, usize) {
        let at = self.items.iter().position(|p| p.1 == index).expect("member present");
        self.items.remove(at)
    }
}

#[allow(clippy::too_many_arguments)]
fn moments_from_sums(
    n: usize,
    center: f64,
    sum: f64,
    sumsq: f64,
    s2: f64,
    g: f64,
    median: f64,
) -> MarginalMoments {
    let nf = n as f64;
    let shift = sum / nf;
    MarginalMoments {
        n,
        mean: center + shift,
        var: (sumsq / nf - shift * shift).max(0.0),
        s: s2 / (2.0 * nf * nf),
        g,
        median: center + median,
    }
}

/// Squared errors of the source side after removing its `r`-th smallest value,
/// for every `r`.
fn removal_errors(side: &SortedSide, center: f64, family: Family, with_g: bool) -> Vec<f64> {
    let y: Vec<f64> = side.values().collect();
    let n = y.len();
    let m = n - 1;
    let mf = m as f64;
    let sum: f64 = y.iter().sum();
    let sumsq: f64 = y.iter().map(|v| v * v).sum();
    let a: f64 = y
        .iter()
        .enumerate()
        .map(|(i, v)| v * (2.0 * i as f64 + 1.0 - mf))
        .sum();
    let mut suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + y[i];
    }
    let (prefix_g, suffix_g) = if with_g {
        let c = gaussian_piece_weights(m);
        let mut pre = vec![0.0; n + 1];
        for i in 0..m {
            pre[i + 1] = pre[i] + y[i] * c[i];
        }
        let mut suf = vec![0.0; n + 1];
        for i in (1..n).rev() {
            suf[i] = suf[i + 1] + y[i] * c[i - 1];
        }
        (pre, suf)
    } else {
        (Vec::new(), Vec::new())
    };
    let mut out = vec![0.0; n];
    let mut r = 0;
    while r < n {
        let yr = y[r];
        let s2 = a - yr * (2.0 * r as f64 + 1.0 - mf) - 2.0 * suffix[r + 1];
        let g = if with_g { prefix_g[r] + suffix_g[r + 1] } else { f64::NAN };
        let get = |k: usize| if k < r { y[k] } else { y[k + 1] };
        let median = if m % 2 == 1 {
            get(m / 2)
        } else {
            0.5 * (get(m / 2 - 1) + get(m / 2))
        };
        let mo = moments_from_sums(m, center, sum - yr, sumsq - yr * yr, s2, g, median);
        let err = fit_marginal(&mo, family).1;
        // equal values leave the same multiset whichever copy is removed
        let mut t = r;
        while t < n && y[t] == yr {
            out[t] = err;
            t += 1;
        }
        r = t;
    }
    out
}

/// Squared errors of the bin side after inserting each of `xs`.
fn insertion_errors(side: &SortedSide, xs: &[f64], center: f64, family: Family, with_g: bool) -> Vec<f64> {
    let z: Vec<f64> = side.values().collect();
    let m = z.len();
    let mp = m + 1;
    let mpf = mp as f64;
    let sum: f64 = z.iter().sum();
    let sumsq: f64 = z.iter().map(|v| v * v).sum();
    let b: f64 = z
        .iter()
        .enumerate()
        .map(|(i, v)| v * (2.0 * i as f64 + 1.0 - mpf))
        .sum();
    let mut suffix = vec![0.0; m + 1];
    for i in (0..m).rev() {
        suffix[i] = suffix[i + 1] + z[i];
    }
    let weights = if with_g { gaussian_piece_weights(mp) } else { Vec::new() };
    let (prefix_g, suffix_g) = if with_g {
        let mut pre = vec![0.0; m + 1];
        for i in 0..m {
            pre[i + 1] = pre[i] + z[i] * weights[i];
        }
        let mut suf = vec![0.0; m + 1];
        for i in (0..m).rev() {
            suf[i] = suf[i + 1] + z[i] * weights[i + 1];
        }
        (pre, suf)
    } else {
        (Vec::new(), Vec::new())
    };
    xs.iter()
        .map(|&x| {
            let p = z.partition_point(|&v| v < x);
            let s2 = b + x * (2.0 * p as f64 + 1.0 - mpf) + 2.0 * suffix[p];
            let g = if with_g {
                prefix_g[p] + x * weights[p] + suffix_g[p]
            } else {
                f64::NAN
            };
            let get = |k: usize| match k.cmp(&p) {
                std::cmp::Ordering::Less => z[k],
                std::cmp::Ordering::Equal => x,
                std::cmp::Ordering::Greater => z[k - 1],
            };
            let median = if mp % 2 == 1 {
                get(mp / 2)
            } else {
                0.5 * (get(mp / 2 - 1) + get(mp / 2))
            };
            let mo = moments_from_sums(mp, center, sum + x, sumsq + x * x, s2, g, median);
            fit_marginal(&mo, family).1
        })
        .collect()
}

fn greedy_fast(sample: &Sample, members: &[usize], family: Family, n_bin: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let dim = sample.dim();
    let with_g = family.needs_gaussian_moment();
    let mut centers = Vec::with_capacity(dim);
    let mut sources = Vec::with_capacity(dim);
    let mut bins = Vec::with_capacity(dim);
    for k in 0..dim {
        // validates the values for the family
        sorted_column(sample, members, k, family)?;
        let c = column_mean(sample, members, k);
        let mut items: Vec<(f64, usize)> = members.iter().map(|&i| (sample.value(i, k) - c, i)).collect();
        items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        centers.push(c);
        sources.push(SortedSide { items });
        bins.push(SortedSide { items: Vec::new() });
    }
    let mut rest = members.to_vec();
    let mut bin: Vec<usize> = Vec::new();
    let mut slot = vec![usize::MAX; sample.len()];
    for _ in 0..n_bin {
        let na = rest.len() - 1;
        let nb = bin.len() + 1;
        let mut err_a = vec![vec![0.0; dim]; rest.len()];
        let mut err_b = vec![vec![0.0; dim]; rest.len()];
        for (pos, &i) in rest.iter().enumerate() {
            slot[i] = pos;
        }
        for k in 0..dim {
            let removal = removal_errors(&sources[k], centers[k], family, with_g);
            let xs: Vec<f64> = sources[k].values().collect();
            let insertion = insertion_errors(&bins[k], &xs, centers[k], family, with_g);
            for (r, &(_, i)) in sources[k].items.iter().enumerate() {
                err_a[slot[i]][k] = removal[r];
                err_b[slot[i]][k] = insertion[r];
            }
        }
        let mut best = (f64::INFINITY, 0);
        for pos in 0..rest.len() {
            let cost = two_cluster_cost(na, &err_a[pos], nb, &err_b[pos]);
            if cost < best.0 {
                best = (cost, pos);
            }
        }
        let x = rest.remove(best.1);
        let at = bin.partition_point(|&i| i < x);
        bin.insert(at, x);
        for k in 0..dim {
            let item = sources[k].remove(x);
            bins[k].insert(item);
        }
    }
    Ok((rest, bin))
}

/// Regroups `clusters` into exactly `l` clusters, keeping the partition of
/// lowest quantization error (first found on ties).
pub fn merge(sample: &Sample, clusters: &[Vec<usize>], family: Family, l: usize) -> Result<MergeOutcome> {
    let k = clusters.len();
    if k > MERGE_LIMIT {
        return Err(AqError::MergeExplosion {
            clusters: k,
            limit: MERGE_LIMIT,
        });
    }
    if l == 0 || l > k {
        return Err(AqError::InvalidParameter(format!(
            "cannot merge {k} clusters into {l}"
        )));
    }
    let n: usize = clusters.iter().map(Vec::len).sum();
    let mut cache: HashMap<u32, f64> = HashMap::new();
    let mut group_cost = |mask: u32| -> Result<f64> {
        if let Some(&c) = cache.get(&mask) {
            return Ok(c);
        }
        let mut members: Vec<usize> = (0..k)
            .filter(|b| mask & (1 << b) != 0)
            .flat_map(|b| clusters[b].iter().copied())
            .collect();
        members.sort_unstable();
        let e = local_error(sample, &members, family)?;
        let cost = members.len() as f64 * e * e;
        cache.insert(mask, cost);
        Ok(cost)
    };
    let candidates = partitions_into(k, l);
    let mut best: Option<(f64, Vec<u32>)> = None;
    for labels in &candidates {
        let mut masks = vec![0u32; l];
        for (b, &g) in labels.iter().enumerate() {
            masks[g] |= 1 << b;
        }
        let mut total = 0.0;
        for &mask in &masks {
            total += group_cost(mask)?;
        }
        if best.as_ref().is_none_or(|(t, _)| total < *t) {
            best = Some((total, masks));
        }
    }
    let (total, masks) = best.expect("at least one partition");
    let merged = masks
        .iter()
        .map(|&mask| {
            let mut members: Vec<usize> = (0..k)
                .filter(|b| mask & (1 << b) != 0)
                .flat_map(|b| clusters[b].iter().copied())
                .collect();
            members.sort_unstable();
            members
        })
        .collect();
    Ok(MergeOutcome {
        clusters: merged,
        quantization_error: (total / n as f64).sqrt(),
        candidates: candidates.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbOutcome {
    pub clusters: Vec<Vec<usize>>,
    pub warnings: Vec<String>,
}

/// Split followed by merge back to the original number of clusters.
pub fn perturb(sample: &Sample, clusters: &[Vec<usize>], family: Family, p_bin: f64, l_bin: usize) -> Result<PerturbOutcome> {
    if clusters.iter().any(Vec::is_empty) {
        return Err(AqError::EmptyCluster);
    }
    let l = clusters.len();
    if l + l_bin > MERGE_LIMIT {
        return Err(AqError::MergeExplosion {
            clusters: l + l_bin,
            limit: MERGE_LIMIT,
        });
    }
    let split = split(sample, clusters, family, p_bin, l_bin)?;
    let merged = merge(sample, &split.clusters, family, l)?;
    Ok(PerturbOutcome {
        clusters: merged.clusters,
        warnings: split.warnings,
    })
}
