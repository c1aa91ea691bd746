use hallmech::ironing::{
    compute_threshold, ironed_virtual, monteiro_oracle, monteiro_oracle_prior, threshold_gap, truncated_iron, HullTable,
    VirtualValue, THRESHOLD_TOL,
};
use hallmech::numerics::linspace;
use hallmech::posterior::HallucinationPosterior;
use hallmech::Prior;
use proptest::prelude::*;

const REGULAR: [&str; 4] = ["uniform:0,1", "exponential:1", "beta:1,2", "beta:5,1"];

#[test]
fn uniform_threshold_solves_the_quadratic() {
    // For U(0,1) at gamma = 0.75, s = 0.4 the gap function is
    // -(3x^2 - 0.4x - 0.92) / 4.
    let p = Prior::uniform(0.0, 1.0).unwrap();
    let t = compute_threshold(&p, 0.75, 0.4).unwrap();
    assert!((t - (0.4 + 11.2f64.sqrt()) / 6.0).abs() <= 1e-8, "T = {t}");
}

#[test]
fn threshold_bisection_brackets_the_root() {
    for tok in REGULAR {
        let p = Prior::parse(tok).unwrap();
        for &gamma in &[0.5, 0.9] {
            let s = p.quantile(0.3).unwrap();
            let t = compute_threshold(&p, gamma, s).unwrap();
            let tol = THRESHOLD_TOL * (p.hi() - p.lo()).max(1.0);
            assert!(threshold_gap(&p, gamma, s, t) <= 0.0, "{tok}");
            assert!(threshold_gap(&p, gamma, s, t - 2.0 * tol) > 0.0, "{tok}");
        }
    }
}

#[test]
fn uniform_flat_above_signal() {
    let p = Prior::uniform(0.0, 1.0).unwrap();
    let psi = ironed_virtual(&p, 0.75, 0.4, 2000).unwrap();
    let t = psi.threshold();
    for v in linspace(0.4, t - 1e-9, 50) {
        assert!((psi.eval(v) - 0.2489).abs() < 1e-4, "psi({v}) = {}", psi.eval(v));
    }
}

#[test]
fn follows_prior_virtual_value_above_threshold() {
    for tok in REGULAR {
        let p = Prior::parse(tok).unwrap();
        let s = p.quantile(0.5).unwrap();
        let psi = ironed_virtual(&p, 0.75, s, 2000).unwrap();
        for v in linspace(psi.threshold(), p.hi(), 101) {
            assert_eq!(psi.eval(v), p.virtual_value(v), "{tok} at {v}");
        }
    }
}

#[test]
fn exponential_anchor_point() {
    let p = Prior::exponential(1.0).unwrap();
    let psi = ironed_virtual(&p, 0.95, 5.0, 2000).unwrap();
    assert!((psi.eval(5.0) - 4.952).abs() <= 0.01, "psi(5) = {}", psi.eval(5.0));
}

#[test]
fn hull_is_convex_and_below_the_integral() {
    for tok in REGULAR.iter().chain(["mix:0.8*truncnormal:0.51,0.05,0.5,0.52+0.2*uniform:0,1"].iter()) {
        let p = Prior::parse(tok).unwrap();
        let t = p.quantile(0.7).unwrap();
        let iron = truncated_iron(&p, 0.9, t, 2000).unwrap();
        let (q, j, hull) = iron.curve();
        let slopes: Vec<f64> = hull.windows(2).map(|w| (j[w[1]] - j[w[0]]) / (q[w[1]] - q[w[0]])).collect();
        assert!(slopes.windows(2).all(|w| w[0] <= w[1] + 1e-12), "{tok}: slopes not monotone");
        for e in hull.windows(2) {
            let (a, b) = (e[0], e[1]);
            for k in a..=b {
                let line = j[a] + (j[b] - j[a]) * (q[k] - q[a]) / (q[b] - q[a]);
                assert!(line <= j[k] + 1e-12, "{tok}: hull above J at node {k}");
            }
        }
    }
}

#[test]
fn full_support_ironing_matches_prior_oracle() {
    // Without a signal atom and with gamma = 1 both constructions iron the
    // prior itself.
    for tok in REGULAR {
        let p = Prior::parse(tok).unwrap();
        let iron = truncated_iron(&p, 1.0, p.hi(), 2000).unwrap();
        let oracle = monteiro_oracle_prior(&p, 2000).unwrap();
        let mut worst: f64 = 0.0;
        for v in oracle.sample_points() {
            let q = p.cdf(v);
            if !(0.01..=0.999).contains(&q) {
                continue;
            }
            worst = worst.max((iron.eval(v) - oracle.ell(v)).abs());
        }
        assert!(worst <= 5e-3, "{tok}: gap {worst}");
    }
}

#[test]
fn hull_table_agrees_with_closed_form() {
    for tok in ["uniform:0,1", "beta:1,2"] {
        let p = Prior::parse(tok).unwrap();
        let table = HullTable::new(&p, 0.75, 2000).unwrap();
        for &qs in &[0.2, 0.5, 0.8] {
            let s = p.quantile(qs).unwrap();
            let psi = ironed_virtual(&p, 0.75, s, 2000).unwrap();
            let sh = table.for_signal(s);
            for v in linspace(p.quantile(0.01).unwrap(), p.hi(), 200) {
                assert!((sh.eval(v) - psi.eval(v)).abs() < 2e-3, "{tok} s={s} v={v}: {} vs {}", sh.eval(v), psi.eval(v));
            }
        }
    }
}

#[test]
fn oracle_with_signal_is_monotone() {
    let p = Prior::parse("beta:5,1").unwrap();
    let post = HallucinationPosterior::new(&p, 0.9, 0.8).unwrap();
    let oracle = monteiro_oracle(&post, 2000).unwrap();
    let ell: Vec<f64> = oracle.grid().iter().map(|&v| oracle.ell(v)).collect();
    assert!(ell.windows(2).all(|w| w[0] <= w[1] + 1e-12));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ironed_virtual_is_monotone_with_consistent_inverse(
        family in 0usize..4,
        gamma in 0.05f64..0.95,
        qs in 0.0f64..1.0,
    ) {
        let p = Prior::parse(REGULAR[family]).unwrap();
        let s = p.quantile(qs).unwrap();
        let psi = ironed_virtual(&p, gamma, s, 500).unwrap();
        let vs = linspace(p.lo(), p.hi(), 400);
        let zs: Vec<f64> = vs.iter().map(|&v| psi.eval(v)).collect();
        for w in zs.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-12);
        }
        for (&v, &z) in vs.iter().zip(&zs) {
            prop_assert!(psi.pseudo_inverse(z) <= v + 1e-9);
            prop_assert!(psi.strict_inverse(z) >= psi.pseudo_inverse(z));
        }
        prop_assert!(psi.threshold() >= s);
    }
}
