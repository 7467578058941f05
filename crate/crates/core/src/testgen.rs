//! Deterministic generation of test samples from known mixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aq::quantization_error;
use crate::error::{AqError, Result};
use crate::families::{Family, Representative};
use crate::marginal::Marginal;
use crate::mixture::{global_error, Clustering, Mixture};
use crate::sample::Sample;

/// How the points of each component are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Quantiles at `(2i − 1)/(2n_j)`; extra dimensions use Halton points.
    MidpointGrid,
    /// Quantiles at base-2 van der Corput points; extra dimensions use Halton points.
    VanDerCorput,
    /// Seeded random draws.
    PseudoRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureScenario {
    pub name: String,
    pub mixture: Mixture,
    pub n: usize,
    pub scheme: Scheme,
    pub seed: u64,
}

/// A generated sample together with the component of every point.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub sample: Sample,
    pub labels: Vec<usize>,
}

/// Splits `n` into counts proportional to `weights`: floors first, then one
/// extra unit for the largest remainders (ties to the lowest index).
pub fn allocate(weights: &[f64], n: usize) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / total * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &j in order.iter().take(n.saturating_sub(assigned)) {
        counts[j] += 1;
    }
    counts
}

/// Radical inverse of `i` in `base`: the digits of `i` mirrored after the point.
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    r
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn prime(k: usize) -> Result<u64> {
    PRIMES
        .get(k)
        .copied()
        .ok_or_else(|| AqError::InvalidParameter(format!("low-discrepancy schemes support at most {} dimensions", PRIMES.len())))
}

fn unit_point(scheme: Scheme, i: usize, count: usize, dim: usize, out: &mut Vec<f64>) -> Result<()> {
    out.clear();
    match scheme {
        Scheme::MidpointGrid => {
            out.push((2 * i + 1) as f64 / (2 * count) as f64);
            for k in 1..dim {
                out.push(radical_inverse(i as u64 + 1, prime(k - 1)?));
            }
        }
        Scheme::VanDerCorput => {
            for k in 0..dim {
                out.push(radical_inverse(i as u64 + 1, prime(k)?));
            }
        }
        Scheme::PseudoRandom => unreachable!("random points are drawn directly"),
    }
    Ok(())
}

/// Generates the sample of `scenario`, components in order.
pub fn generate(scenario: &MixtureScenario) -> Result<Generated> {
    if scenario.n == 0 {
        return Err(AqError::InvalidParameter("scenario needs at least one point".into()));
    }
    let m = &scenario.mixture;
    let dim = m.dim();
    if scenario.scheme == Scheme::PseudoRandom {
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        let (data, labels) = m.draw(scenario.n, &mut rng);
        return Ok(Generated {
            sample: Sample::from_rows(dim, data)?,
            labels,
        });
    }
    let counts = allocate(m.weights(), scenario.n);
    let mut data = Vec::with_capacity(scenario.n * dim);
    let mut labels = Vec::with_capacity(scenario.n);
    let mut u = Vec::with_capacity(dim);
    for (j, (&count, r)) in counts.iter().zip(m.representatives()).enumerate() {
        for i in 0..count {
            unit_point(scenario.scheme, i, count, dim, &mut u)?;
            data.extend(u.iter().zip(r.marginals()).map(|(&q, mk)| mk.quantile(q)));
            labels.push(j);
        }
    }
    Ok(Generated {
        sample: Sample::from_rows(dim, data)?,
        labels,
    })
}

/// Errors of the true mixture on its own sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueErrors {
    /// Quantization error of the generating clustering against the true
    /// representatives; components that received no point are dropped.
    pub quantization_error: f64,
    pub global_error: f64,
}

pub fn true_errors(scenario: &MixtureScenario, generated: &Generated) -> Result<TrueErrors> {
    let m = &scenario.mixture;
    let full = Clustering::from_labels(&generated.labels, m.len())?;
    let mut clusters = Vec::new();
    let mut reps = Vec::new();
    for (c, r) in full.clusters().iter().zip(m.representatives()) {
        if !c.is_empty() {
            clusters.push(c.clone());
            reps.push(r.clone());
        }
    }
    let clustering = Clustering::new(clusters, generated.sample.len())?;
    Ok(TrueErrors {
        quantization_error: quantization_error(&generated.sample, &clustering, &reps)?,
        global_error: global_error(&generated.sample, m)?,
    })
}

fn one_d(family: Family, parts: Vec<(f64, Marginal)>) -> Result<Mixture> {
    let (weights, reps): (Vec<f64>, Vec<Representative>) = parts
        .into_iter()
        .map(|(w, mk)| Ok((w, Representative::new(vec![mk])?)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Mixture::new(family, reps, weights)
}

/// `(1/3)·U(0, 1) + (2/3)·U(0.3, 0.6)` with 300 points.
pub fn s_u() -> MixtureScenario {
    let mixture = one_d(
        Family::Uniform,
        vec![
            (1.0 / 3.0, Marginal::Uniform { lower: 0.0, upper: 1.0 }),
            (2.0 / 3.0, Marginal::Uniform { lower: 0.3, upper: 0.6 }),
        ],
    )
    .expect("valid mixture");
    MixtureScenario {
        name: "s_u".into(),
        mixture,
        n: 300,
        scheme: Scheme::VanDerCorput,
        seed: 0,
    }
}

/// `0.45·N(0.21, 0.13) + 0.55·N(0.75, 0.9)` with 400 points.
pub fn s_g() -> MixtureScenario {
    let mixture = one_d(
        Family::Gaussian,
        vec![
            (0.45, Marginal::Gaussian { mean: 0.21, std_dev: 0.13 }),
            (0.55, Marginal::Gaussian { mean: 0.75, std_dev: 0.9 }),
        ],
    )
    .expect("valid mixture");
    MixtureScenario {
        name: "s_g".into(),
        mixture,
        n: 400,
        scheme: Scheme::VanDerCorput,
        seed: 0,
    }
}

/// `(1/3)·U(0.2, 0.5) + (2/3)·N(0.6, 0.2)` with 350 points.
pub fn s_hyb() -> MixtureScenario {
    let mixture = one_d(
        Family::Hybrid,
        vec![
            (1.0 / 3.0, Marginal::Uniform { lower: 0.2, upper: 0.5 }),
            (2.0 / 3.0, Marginal::Gaussian { mean: 0.6, std_dev: 0.2 }),
        ],
    )
    .expect("valid mixture");
    MixtureScenario {
        name: "s_hyb".into(),
        mixture,
        n: 350,
        scheme: Scheme::VanDerCorput,
        seed: 0,
    }
}

fn random_uniform<R: Rng + ?Sized>(rng: &mut R) -> Marginal {
    loop {
        let a: f64 = rng.random();
        let b: f64 = rng.random();
        if a != b {
            return Marginal::Uniform {
                lower: a.min(b),
                upper: a.max(b),
            };
        }
    }
}

fn random_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Marginal {
    let mean: f64 = rng.random();
    loop {
        let std_dev: f64 = rng.random();
        if std_dev > 0.0 {
            return Marginal::Gaussian { mean, std_dev };
        }
    }
}

/// Randomized two-component 1D scenarios: uniform pairs with 300 points,
/// Gaussian pairs with 400 points, or a uniform and a Gaussian with 350.
/// Parameters and the weight `p` of the first component are uniform on [0, 1].
pub fn random_scenarios(family: Family, count: usize, seed: u64) -> Result<Vec<MixtureScenario>> {
    if count == 0 {
        return Err(AqError::InvalidParameter("count must be at least 1".into()));
    }
    let n = match family {
        Family::Uniform => 300,
        Family::Gaussian => 400,
        Family::Hybrid => 350,
        other => {
            return Err(AqError::InvalidParameter(format!("no randomized suite for the {other} family")));
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let (first, second) = match family {
            Family::Uniform => (random_uniform(&mut rng), random_uniform(&mut rng)),
            Family::Gaussian => (random_gaussian(&mut rng), random_gaussian(&mut rng)),
            _ => (random_uniform(&mut rng), random_gaussian(&mut rng)),
        };
        let p: f64 = rng.random();
        let parts = if p == 0.0 {
            vec![(1.0, second)]
        } else if p == 1.0 {
            vec![(1.0, first)]
        } else {
            vec![(p, first), (1.0 - p, second)]
        };
        out.push(MixtureScenario {
            name: format!("{}-{:02}", family, i + 1),
            mixture: one_d(family, parts)?,
            n,
            scheme: Scheme::VanDerCorput,
            seed: seed.wrapping_add(i as u64),
        });
    }
    Ok(out)
}
