use aq_core::families::{fit_uniform, Family};
use aq_core::marginal::Marginal;
use aq_core::testgen::*;
use proptest::prelude::*;

proptest! {
    #[test]
    fn allocation_sums_to_n(weights in prop::collection::vec(0.001f64..1.0, 1..8), n in 1usize..2000) {
        let counts = allocate(&weights, n);
        prop_assert_eq!(counts.iter().sum::<usize>(), n);
        let total: f64 = weights.iter().sum();
        for (c, w) in counts.iter().zip(&weights) {
            prop_assert!((*c as f64 - w / total * n as f64).abs() < 1.0 + 1e-9);
        }
    }

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), family in prop::sample::select(vec![Family::Uniform, Family::Gaussian, Family::Hybrid])) {
        let a = random_scenarios(family, 2, seed).unwrap();
        let b = random_scenarios(family, 2, seed).unwrap();
        prop_assert_eq!(&a, &b);
        for s in &a {
            prop_assert_eq!(generate(s).unwrap(), generate(s).unwrap());
        }
    }
}

#[test]
fn midpoint_uniform_fits_back() {
    let s = MixtureScenario {
        name: "u".into(),
        mixture: aq_core::Mixture::new(
            Family::Uniform,
            vec![aq_core::Representative::new(vec![Marginal::Uniform { lower: 0.1, upper: 0.4 }]).unwrap()],
            vec![1.0],
        )
        .unwrap(),
        n: 100,
        scheme: Scheme::MidpointGrid,
        seed: 0,
    };
    let g = generate(&s).unwrap();
    let Marginal::Uniform { lower, upper } = *fit_uniform(&g.sample).unwrap().marginal(0) else {
        unreachable!()
    };
    assert!((lower - 0.1).abs() < 0.02 && (upper - 0.4).abs() < 0.02);
}

#[test]
fn pseudo_random_scheme_follows_the_seed() {
    let mut s = s_u();
    s.scheme = Scheme::PseudoRandom;
    let a = generate(&s).unwrap();
    s.seed = 1;
    let b = generate(&s).unwrap();
    assert_ne!(a.sample, b.sample);
    assert_eq!(a.sample.len(), 300);
}

#[test]
fn scenario_json_roundtrip() {
    let s = s_hyb();
    let text = serde_json::to_string(&s).unwrap();
    let back: MixtureScenario = serde_json::from_str(&text).unwrap();
    assert_eq!(back, s);
    assert!(text.contains("\"van-der-corput\""));
}

#[test]
fn halton_points_fill_two_dimensions() {
    let rep = aq_core::Representative::new(vec![
        Marginal::Uniform { lower: 0.0, upper: 1.0 },
        Marginal::Uniform { lower: 0.0, upper: 1.0 },
    ])
    .unwrap();
    let s = MixtureScenario {
        name: "square".into(),
        mixture: aq_core::Mixture::new(Family::Uniform, vec![rep], vec![1.0]).unwrap(),
        n: 64,
        scheme: Scheme::VanDerCorput,
        seed: 0,
    };
    let g = generate(&s).unwrap();
    let lower_left = g.sample.points().filter(|p| p[0] < 0.5 && p[1] < 0.5).count();
    assert!((12..=20).contains(&lower_left), "{lower_left}");
}
