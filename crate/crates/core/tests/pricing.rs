use hallmech::numerics::linspace;
use hallmech::pricing::{
    brute_force_price, count_price_segments, monopoly_price, optimal_price, price_curve, revenue_at, thresholds, CriticalPrices,
    PriceRule, Regime, CURVE_POINTS, PRICE_GRID,
};
use hallmech::{Error, Prior};
use proptest::prelude::*;

const LOG_CONCAVE: [&str; 4] = ["uniform:0,1", "beta:1,2", "beta:5,1", "exponential:1"];
const GAMMAS: [f64; 4] = [0.6, 0.75, 0.77, 0.9];

fn step(p: &Prior) -> f64 {
    (p.hi() - p.lo()) / (PRICE_GRID - 1) as f64
}

fn rank(r: Regime) -> usize {
    match r {
        Regime::Ignore => 0,
        Regime::Follow => 1,
        Regime::Cap => 2,
        Regime::FollowAgain => 3,
        Regime::Unclassified => usize::MAX,
    }
}

#[test]
fn regimes_agree_with_brute_force() {
    for tok in LOG_CONCAVE {
        let p = Prior::parse(tok).unwrap();
        for gamma in GAMMAS {
            let th = thresholds(&p, gamma, PRICE_GRID).unwrap();
            for s in linspace(p.lo(), p.hi(), CURVE_POINTS) {
                let (fast, _) = optimal_price(&th, s);
                let (slow, _) = brute_force_price(&p, gamma, s, PRICE_GRID).unwrap();
                assert!((fast - slow).abs() <= step(&p), "{tok} gamma={gamma} s={s}: {fast} vs {slow}");
            }
        }
    }
}

#[test]
fn regime_sequence_is_ordered() {
    for tok in LOG_CONCAVE {
        let p = Prior::parse(tok).unwrap();
        for gamma in GAMMAS {
            let th = thresholds(&p, gamma, PRICE_GRID).unwrap();
            let ranks: Vec<usize> = linspace(p.lo(), p.hi(), CURVE_POINTS).iter().map(|&s| rank(optimal_price(&th, s).1)).collect();
            assert!(ranks.windows(2).all(|w| w[0] <= w[1]), "{tok} gamma={gamma}: {ranks:?}");
        }
    }
}

#[test]
fn cap_price_sits_between_monopoly_price_and_signal() {
    for tok in LOG_CONCAVE {
        let p = Prior::parse(tok).unwrap();
        for gamma in GAMMAS {
            let th = thresholds(&p, gamma, PRICE_GRID).unwrap();
            for s in linspace(p.lo(), p.hi(), CURVE_POINTS) {
                if optimal_price(&th, s).1 == Regime::Cap {
                    assert!(th.p_ignore < th.p_cap && th.p_cap <= s, "{tok} gamma={gamma} s={s}: {th:?}");
                }
            }
        }
    }
}

#[test]
fn prices_above_the_signal_are_the_monopoly_price() {
    for tok in LOG_CONCAVE {
        let p = Prior::parse(tok).unwrap();
        let p_ignore = monopoly_price(&p, PRICE_GRID);
        for gamma in GAMMAS {
            for s in linspace(p.lo(), p.hi(), 60) {
                let (price, _) = brute_force_price(&p, gamma, s, PRICE_GRID).unwrap();
                if price > s {
                    assert!((price - p_ignore).abs() <= step(&p), "{tok} gamma={gamma} s={s}: {price}");
                } else if price < s {
                    assert!(price >= p_ignore - step(&p), "{tok} gamma={gamma} s={s}: {price}");
                }
            }
        }
    }
}

#[test]
fn beta_one_two_reference_prices() {
    let p = Prior::beta(1.0, 2.0).unwrap();
    let th = thresholds(&p, 0.77, PRICE_GRID).unwrap();
    let cases = [(0.1, 0.33, 0.01), (0.5, 0.50, 0.005), (0.8, 0.56, 0.01), (0.95, 0.95, 0.005)];
    for (s, expected, tol) in cases {
        let (price, _) = optimal_price(&th, s);
        assert!((price - expected).abs() <= tol, "p*({s}) = {price}");
    }
    assert!((th.p_ignore - 1.0 / 3.0).abs() < 1e-9);
}

#[test]
fn bimodal_mixture_falls_back_and_shows_five_segments() {
    let p = Prior::parse("mix:0.75*beta:4,6+0.25*beta:4,1").unwrap();
    let gamma = 0.75;
    assert!(matches!(thresholds(&p, gamma, PRICE_GRID), Err(Error::NotLogConcave { .. }) | Err(Error::NotRegular { .. })));
    let rule = PriceRule::new(&p, gamma, PRICE_GRID).unwrap();
    assert!(matches!(rule, PriceRule::General(_)));
    let signals = linspace(0.0, 1.0, CURVE_POINTS);
    let prices: Vec<f64> = signals.iter().map(|&s| brute_force_price(&p, gamma, s, PRICE_GRID).unwrap().0).collect();
    assert!(count_price_segments(&signals, &prices, 1e-3) >= 5);
    for (&s, &slow) in signals.iter().zip(&prices) {
        let (fast, regime) = rule.price(s);
        assert_eq!(regime, Regime::Unclassified);
        assert!((fast - slow).abs() <= step(&p), "s={s}: {fast} vs {slow}");
    }
}

#[test]
fn noise_prices_shrink_toward_the_middle() {
    let p = Prior::beta(1.0, 2.0).unwrap();
    let rows = price_curve(&p, 0.77, 0.1, 50, PRICE_GRID).unwrap();
    let first = rows.first().unwrap();
    let last = rows.last().unwrap();
    assert!(first.p_noise > first.s);
    assert!(last.p_noise < last.s);
    for w in rows.windows(2) {
        assert!((w[1].p_noise - w[0].p_noise).abs() < 0.1, "noise price jumps at s={}", w[1].s);
    }
    assert!(rows.iter().all(|r| r.regime != Regime::Unclassified));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn critical_prices_beat_any_posted_price(
        family in 0usize..4,
        gamma in 0.05f64..0.95,
        qs in 0.0f64..1.0,
        qp in 0.0f64..1.0,
    ) {
        let p = Prior::parse(LOG_CONCAVE[family]).unwrap();
        let s = p.quantile(qs).unwrap();
        let other = p.quantile(qp).unwrap();
        let cp = CriticalPrices::new(&p, gamma, 500).unwrap();
        let (price, revenue) = cp.price(s);
        prop_assert!((revenue - revenue_at(&p, gamma, s, price)).abs() < 1e-12);
        prop_assert!(revenue >= revenue_at(&p, gamma, s, other) - 1e-9);
    }
}
