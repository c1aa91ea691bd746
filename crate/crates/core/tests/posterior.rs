use hallmech::numerics::linspace;
use hallmech::posterior::{mismatched_gamma, HallucinationPosterior, NoisyPosterior};
use hallmech::Prior;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

fn std_normal_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}

#[test]
fn atom_jump_is_exact() {
    for tok in ["uniform:0,1", "beta:5,1", "exponential:1"] {
        let p = Prior::parse(tok).unwrap();
        for &gamma in &[0.1, 0.5, 0.77, 0.99] {
            let s = p.quantile(0.4).unwrap();
            let post = HallucinationPosterior::new(&p, gamma, s).unwrap();
            let jump = post.cdf(s) - post.cdf_left_of_signal();
            assert!((jump - (1.0 - gamma)).abs() <= 1e-15, "{tok} gamma={gamma}: jump {jump}");
            assert_eq!(post.atom_mass(), 1.0 - gamma);
        }
    }
}

#[test]
fn posterior_cdf_is_monotone_on_grid() {
    let p = Prior::parse("beta:1,2").unwrap();
    let post = HallucinationPosterior::new(&p, 0.6, 0.35).unwrap();
    let values: Vec<f64> = linspace(0.0, 1.0, 2000).iter().map(|&v| post.cdf(v)).collect();
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(*values.last().unwrap(), 1.0);
}

#[test]
fn noise_posterior_on_uniform_is_truncated_normal() {
    // With a flat prior the noise posterior is N(s, sigma^2) cut to [0, 1].
    let p = Prior::uniform(0.0, 1.0).unwrap();
    let (s, sigma) = (0.3, 0.1);
    let post = NoisyPosterior::noise(&p, s, sigma).unwrap();
    let z = |x: f64| std_normal_cdf((x - s) / sigma);
    for x in linspace(0.0, 1.0, 101) {
        let expected = (z(1.0) - z(x)) / (z(1.0) - z(0.0));
        assert!((post.tail(x) - expected).abs() < 1e-5, "tail({x}) = {} vs {expected}", post.tail(x));
    }
}

#[test]
fn hybrid_weight_matches_bayes_rule_on_uniform() {
    let p = Prior::uniform(0.0, 1.0).unwrap();
    let (gamma, s, sigma) = (0.7, 0.8, 0.15);
    let post = NoisyPosterior::hybrid(&p, gamma, s, sigma).unwrap();
    let noise_mass = std_normal_cdf((1.0 - s) / sigma) - std_normal_cdf(-s / sigma);
    let expected = (1.0 - gamma) * noise_mass / ((1.0 - gamma) * noise_mass + gamma);
    assert!((post.noise_weight() - expected).abs() < 1e-6, "{} vs {expected}", post.noise_weight());
}

#[test]
fn matching_hallucination_density_keeps_gamma() {
    for &g in &[0.2, 0.5, 0.9] {
        assert!((mismatched_gamma(g, 1.7, 1.7).unwrap() - g).abs() < 1e-15);
    }
    assert!(mismatched_gamma(0.5, 1.0, 3.0).unwrap() > 0.5);
}

proptest! {
    #[test]
    fn hybrid_tail_is_convex_combination(
        gamma in 0.05f64..0.95,
        s in 0.0f64..1.0,
        sigma in 0.02f64..0.5,
        p in 0.0f64..1.0,
    ) {
        let prior = Prior::beta(2.0, 3.0).unwrap();
        let post = NoisyPosterior::hybrid(&prior, gamma, s, sigma).unwrap();
        let w = post.noise_weight();
        prop_assert!((0.0..=1.0).contains(&w));
        let expected = w * post.noise_tail(p) + (1.0 - w) * (1.0 - prior.cdf(p));
        prop_assert!((post.tail(p) - expected).abs() <= 1e-8);
    }

    #[test]
    fn hallucination_tail_complements_left_limit(gamma in 0.01f64..0.99, s in 0.0f64..1.0, p in 0.0f64..1.0) {
        let prior = Prior::uniform(0.0, 1.0).unwrap();
        let post = HallucinationPosterior::new(&prior, gamma, s).unwrap();
        let left = if p <= s { gamma * prior.cdf(p) } else { post.cdf(p) };
        prop_assert!((post.tail(p) + left - 1.0).abs() < 1e-12);
    }
}
