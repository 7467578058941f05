use aq_core::marginal::{Marginal, MarginalMixture};
use aq_core::special::normal_quantile;
use aq_core::transport::*;
use proptest::prelude::*;

fn eq(v: &[f64]) -> EmpiricalQuantile {
    EmpiricalQuantile::new(v).unwrap()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Best assignment of the sorted first sample to any ordering of the second.
fn brute_force_w2(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut xs = x.to_vec();
    xs.sort_by(f64::total_cmp);
    let w = n as f64 / (n * n) as f64;
    permutations(n)
        .iter()
        .map(|p| {
            let mut total = 0.0;
            for i in 0..n {
                let d = xs[i] - y[p[i]];
                total += d * d * w;
            }
            total
        })
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

fn values(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 1..=max_len)
}

proptest! {
    #[test]
    fn empirical_distance_is_symmetric(x in values(30), y in values(30)) {
        let a = w2_empirical_empirical(&eq(&x), &eq(&y));
        let b = w2_empirical_empirical(&eq(&y), &eq(&x));
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
    }

    #[test]
    fn empirical_distance_satisfies_triangle_inequality(x in values(20), y in values(20), z in values(20)) {
        let xy = w2_empirical_empirical(&eq(&x), &eq(&y));
        let yz = w2_empirical_empirical(&eq(&y), &eq(&z));
        let xz = w2_empirical_empirical(&eq(&x), &eq(&z));
        prop_assert!(xz <= xy + yz + 1e-12);
    }

    #[test]
    fn distance_to_self_is_zero(x in values(30)) {
        prop_assert_eq!(w2_empirical_empirical(&eq(&x), &eq(&x)), 0.0);
    }

    #[test]
    fn repeating_every_point_changes_nothing(x in values(12), y in values(12), k in 2usize..4) {
        let rep: Vec<f64> = x.iter().flat_map(|&v| std::iter::repeat_n(v, k)).collect();
        let a = w2_empirical_empirical(&eq(&x), &eq(&y));
        let b = w2_empirical_empirical(&eq(&rep), &eq(&y));
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
    }

    #[test]
    fn sorted_matching_is_optimal(n in 1usize..=6, seed in prop::collection::vec(0.0f64..1.0, 12)) {
        let x = &seed[..n];
        let y = &seed[6..6 + n];
        prop_assert_eq!(w2_empirical_empirical(&eq(x), &eq(y)), brute_force_w2(x, y));
    }

    #[test]
    fn interval_distance_matches_fine_grid(x in values(15), a in -3.0f64..3.0, len in 0.01f64..3.0) {
        let b = a + len;
        let exact = w2_empirical_parametric(&eq(&x), &Marginal::Uniform { lower: a, upper: b }).unwrap();
        let grid: Vec<f64> = (0..20_000).map(|i| a + (b - a) * (i as f64 + 0.5) / 20_000.0).collect();
        let approx = w2_empirical_empirical(&eq(&x), &eq(&grid));
        prop_assert!((exact - approx).abs() < 1e-3, "{} vs {}", exact, approx);
    }

    #[test]
    fn mixture_quantile_is_monotone(
        w in 0.05f64..0.95,
        m in -1.0f64..1.0,
        s in 0.01f64..1.0,
        g in -1.0f64..1.0,
        q in prop::collection::vec(0.0f64..1.0, 2..20),
    ) {
        let mix = MarginalMixture::new(vec![
            (w, Marginal::Gaussian { mean: m, std_dev: s }),
            (1.0 - w, Marginal::Dirac { location: g }),
        ]).unwrap();
        let mut q = q;
        q.sort_by(f64::total_cmp);
        let values: Vec<f64> = q.iter().map(|&p| mix.quantile(p)).collect();
        for pair in values.windows(2) {
            prop_assert!(pair[0] <= pair[1]);
        }
    }
}

#[test]
fn gaussian_distance_matches_fine_grid() {
    let x = [-0.7, 0.1, 0.4, 1.9, 2.2];
    let target = Marginal::Gaussian { mean: 0.5, std_dev: 0.8 };
    let exact = w2_empirical_parametric(&eq(&x), &target).unwrap();
    let n = 200_000;
    let grid: Vec<f64> = (0..n)
        .map(|i| 0.5 + 0.8 * normal_quantile((i as f64 + 0.5) / n as f64))
        .collect();
    let approx = w2_empirical_empirical(&eq(&x), &eq(&grid));
    assert!((exact - approx).abs() < 1e-4, "{exact} vs {approx}");
}

#[test]
fn mixture_distance_matches_fine_grid() {
    let mix = MarginalMixture::new(vec![
        (0.3, Marginal::Uniform { lower: 0.0, upper: 1.0 }),
        (0.5, Marginal::Gaussian { mean: 0.4, std_dev: 0.1 }),
        (0.2, Marginal::Dirac { location: 0.8 }),
    ])
    .unwrap();
    let x = [0.05, 0.2, 0.35, 0.41, 0.5, 0.77, 0.8, 0.93];
    let exact = w2_empirical_mixture(&eq(&x), &mix);
    let n = 100_000;
    let grid: Vec<f64> = (0..n).map(|i| mix.quantile((i as f64 + 0.5) / n as f64)).collect();
    let approx = w2_empirical_empirical(&eq(&x), &eq(&grid));
    assert!((exact - approx).abs() < 1e-4, "{exact} vs {approx}");
}
