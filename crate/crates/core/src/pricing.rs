//! Single-buyer posted prices.
//!
//! With signal `s` the posterior tail is `gamma (1 - F(p)) + (1 - gamma)`
//! for `p <= s` and `gamma (1 - F(p))` above it, so the seller either
//! ignores the signal, posts the signal itself, or caps the price below it.
//! [`thresholds`] locates the boundaries between these regimes for priors
//! whose scaled virtual value changes sign at most twice; [`CriticalPrices`]
//! solves the same problem for any prior by comparing local maxima.

use crate::distributions::Prior;
use crate::error::{Error, Result};
use crate::ironing::compute_threshold;
use crate::numerics::{bisect_first, bisect_last, linspace};
use crate::posterior::NoisyPosterior;

/// Default number of price nodes for grid searches.
pub const PRICE_GRID: usize = 2000;

/// Number of signal points on a price curve.
pub const CURVE_POINTS: usize = 200;

/// Expected revenue of posting `p` to a buyer with signal `s`.
pub fn revenue_at(prior: &Prior, gamma: f64, s: f64, p: f64) -> f64 {
    let tail = if p <= s { 1.0 - gamma * prior.cdf(p) } else { gamma * prior.sf(p) };
    p * tail
}

fn check_inputs(prior: &Prior, gamma: f64, s: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let (lo, hi) = prior.support();
    if !(s >= lo && s <= hi) {
        return Err(Error::InvalidParameter(format!("signal {s} outside support [{lo}, {hi}]")));
    }
    Ok(())
}

/// Price grid on the support that contains `s` and its one-sided
/// neighbours exactly.
pub fn price_grid(prior: &Prior, s: f64, grid_size: usize) -> Vec<f64> {
    let (lo, hi) = prior.support();
    let mut grid = linspace(lo, hi, grid_size.max(2));
    let eps = 1e-9 * (hi - lo);
    grid.extend([s, (s - eps).max(lo), (s + eps).min(hi)]);
    crate::numerics::merge_grid(grid)
}

/// Grid argmax of [`revenue_at`]; ties go to the smaller price.
pub fn brute_force_price(prior: &Prior, gamma: f64, s: f64, grid_size: usize) -> Result<(f64, f64)> {
    check_inputs(prior, gamma, s)?;
    Ok(argmax(&price_grid(prior, s, grid_size), |p| revenue_at(prior, gamma, s, p)))
}

fn argmax<F: Fn(f64) -> f64>(grid: &[f64], f: F) -> (f64, f64) {
    let mut best = (grid[0], f(grid[0]));
    for &p in &grid[1..] {
        let r = f(p);
        if r > best.1 {
            best = (p, r);
        }
    }
    best
}

/// Revenue-maximizing price `argmax p (1 - F(p))` of the prior, comparing
/// the bottom of the support with every point where `phi_F` turns
/// non-negative. Agrees with `inf {phi_F >= 0}` for regular priors.
pub fn monopoly_price(prior: &Prior, grid_size: usize) -> f64 {
    let (lo, hi) = prior.support();
    let tol = 1e-12 * (hi - lo).max(1.0);
    let grid = prior.blend_grid(lo, hi, grid_size);
    let phi = |v: f64| prior.virtual_value(v);
    let rev = |p: f64| p * prior.sf(p);
    let mut best = (lo, rev(lo));
    for k in 1..grid.len() {
        if phi(grid[k - 1]) < 0.0 && phi(grid[k]) >= 0.0 {
            let p = bisect_first(grid[k - 1], grid[k], tol, |v| phi(v) >= 0.0);
            let r = rev(p);
            if r > best.1 {
                best = (p, r);
            }
        }
    }
    best.0
}

/// Pricing regime as a function of the signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Post the monopoly price of the prior.
    Ignore,
    /// Post the signal.
    Follow,
    /// Post a fixed price below the signal.
    Cap,
    /// Post the signal again, for high signals.
    FollowAgain,
    /// Regime boundaries unavailable; the price came from a grid search.
    Unclassified,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Ignore => "ignore",
            Regime::Follow => "follow",
            Regime::Cap => "cap",
            Regime::FollowAgain => "follow_again",
            Regime::Unclassified => "unclassified",
        }
    }
}

/// Regime boundaries for one `(prior, gamma)`.
///
/// The optimal price is `p_ignore` below `lower`, the signal on
/// `[lower, middle)`, `p_cap` on `[middle, upper]` and the signal above
/// `upper`. `cap_zero_hi` and `cap_zero_lo` are the sign-change points of
/// the scaled virtual value `phi_{gamma F}` that bracket its non-negative
/// region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub gamma: f64,
    pub p_ignore: f64,
    pub p_cap: f64,
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
    /// Supremum of `{phi_{gamma F} < 0}`.
    pub cap_zero_hi: f64,
    /// The other sign change: supremum of `{phi_{gamma F} >= 0}` when the
    /// scaled virtual value starts negative, infimum of `{phi_{gamma F} < 0}`
    /// otherwise.
    pub cap_zero_lo: f64,
    /// Whether `phi_{gamma F}` is negative at the bottom of the support.
    pub starts_negative: bool,
}

/// Computes the regime boundaries.
///
/// Fails with [`Error::NotRegular`] when `phi_F` is not monotone and with
/// [`Error::NotLogConcave`] when `phi_{gamma F}` changes sign more than twice
/// on the grid; callers then fall back to [`CriticalPrices`] or
/// [`brute_force_price`].
pub fn thresholds(prior: &Prior, gamma: f64, grid_size: usize) -> Result<Thresholds> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    prior.check_regular(grid_size)?;
    let (lo, hi) = prior.support();
    let tol = 1e-12 * (hi - lo).max(1.0);
    let grid = prior.blend_grid(lo, hi, grid_size);
    let phi_g = |v: f64| prior.gamma_virtual(v, gamma);
    let signs: Vec<bool> = grid.iter().map(|&v| phi_g(v) >= 0.0).collect();
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    if changes > 2 {
        return Err(Error::NotLogConcave { sign_changes: changes });
    }
    let u = |p: f64| p * (1.0 - gamma * prior.cdf(p));

    // First crossing into {pred} after the grid node where it first holds.
    let first_where = |pred: &dyn Fn(f64) -> bool| -> f64 {
        match grid.iter().position(|&v| pred(v)) {
            None => hi,
            Some(0) => lo,
            Some(k) => bisect_first(grid[k - 1], grid[k], tol, pred),
        }
    };
    let last_where = |pred: &dyn Fn(f64) -> bool| -> f64 {
        match grid.iter().rposition(|&v| pred(v)) {
            None => lo,
            Some(k) if k + 1 == grid.len() => hi,
            Some(k) => bisect_last(grid[k], grid[k + 1], tol, pred),
        }
    };

    let p_ignore = first_where(&|v| prior.virtual_value(v) >= 0.0);
    let cap_zero_hi = last_where(&|v| phi_g(v) < 0.0);
    let starts_negative = phi_g(lo) < 0.0;

    let (p_cap, cap_zero_lo, lower) = if starts_negative {
        let p_cap = first_where(&|v| phi_g(v) >= 0.0);
        let zero_lo = last_where(&|v| phi_g(v) >= 0.0);
        let lower = bisect_first(lo, hi, tol, |s| {
            compute_threshold(prior, gamma, s).map(|t| t >= p_ignore).unwrap_or(true)
        });
        (p_cap, zero_lo, lower)
    } else {
        let zero_lo = first_where(&|v| phi_g(v) < 0.0);
        let p_cap = if u(lo) <= u(cap_zero_hi) { cap_zero_hi } else { lo };
        let ua = u(lo);
        let beats_bottom = first_where(&|v| u(v) > ua);
        (p_cap, zero_lo, beats_bottom.min(p_cap))
    };
    let middle = p_cap;
    let um = u(middle);
    let slack = 1e-14 * um.abs().max(1e-300);
    let upper = if u(hi) <= um + slack {
        hi
    } else {
        match grid.iter().rposition(|&v| v >= middle && u(v) <= um + slack) {
            None => middle,
            Some(k) => bisect_last(grid[k].max(middle), grid[k + 1], tol, |s| u(s) <= um + slack),
        }
    };
    Ok(Thresholds { gamma, p_ignore, p_cap, lower, middle, upper, cap_zero_hi, cap_zero_lo, starts_negative })
}

/// Optimal posted price and its regime for signal `s`.
pub fn optimal_price(th: &Thresholds, s: f64) -> (f64, Regime) {
    if s < th.lower {
        (th.p_ignore, Regime::Ignore)
    } else if s < th.middle {
        (s, Regime::Follow)
    } else if s <= th.upper {
        (th.p_cap, Regime::Cap)
    } else {
        (s, Regime::FollowAgain)
    }
}

/// Optimal prices for any prior from the local maxima of the two revenue
/// branches.
///
/// Below the signal the revenue is `u(p) = p (1 - gamma F(p))`, whose local
/// maxima sit where `phi_{gamma F}` turns non-negative; above it the
/// revenue is `gamma p (1 - F(p))`, with local maxima where `phi_F` turns
/// non-negative. The optimum for a signal is the best of the signal itself,
/// the best `u`-maximum below it and the best prior maximum above it.
#[derive(Debug, Clone)]
pub struct CriticalPrices {
    gamma: f64,
    /// `(price, revenue, best_price_so_far, best_revenue_so_far)`, ascending.
    below: Vec<(f64, f64, f64, f64)>,
    /// `(price, revenue, best_price_from_here, best_revenue_from_here)`.
    above: Vec<(f64, f64, f64, f64)>,
    prior: Prior,
}

impl CriticalPrices {
    pub fn new(prior: &Prior, gamma: f64, grid_size: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        let (lo, hi) = prior.support();
        let tol = 1e-12 * (hi - lo).max(1.0);
        let grid = prior.blend_grid(lo, hi, grid_size);
        let u = |p: f64| p * (1.0 - gamma * prior.cdf(p));
        let w = |p: f64| gamma * p * prior.sf(p);
        let turns = |phi: &dyn Fn(f64) -> f64| -> Vec<f64> {
            let mut out = Vec::new();
            for k in 1..grid.len() {
                if phi(grid[k - 1]) < 0.0 && phi(grid[k]) >= 0.0 {
                    out.push(bisect_first(grid[k - 1], grid[k], tol, |v| phi(v) >= 0.0));
                }
            }
            out
        };
        let mut below_pts = vec![lo];
        below_pts.extend(turns(&|v| prior.gamma_virtual(v, gamma)));
        let mut below = Vec::with_capacity(below_pts.len());
        let mut best = (f64::NAN, f64::NEG_INFINITY);
        for p in below_pts {
            let r = u(p);
            if r > best.1 {
                best = (p, r);
            }
            below.push((p, r, best.0, best.1));
        }
        let above_pts = turns(&|v| prior.virtual_value(v));
        let mut above = vec![(0.0, 0.0, 0.0, 0.0); above_pts.len()];
        let mut best = (f64::NAN, f64::NEG_INFINITY);
        for (i, &p) in above_pts.iter().enumerate().rev() {
            let r = w(p);
            if r >= best.1 {
                best = (p, r);
            }
            above[i] = (p, r, best.0, best.1);
        }
        Ok(CriticalPrices { gamma, below, above, prior: prior.clone() })
    }

    /// Optimal price and revenue for signal `s`.
    pub fn price(&self, s: f64) -> (f64, f64) {
        let mut cands: [(f64, f64); 3] = [(f64::NAN, f64::NEG_INFINITY); 3];
        let k = self.below.partition_point(|c| c.0 <= s);
        if k > 0 {
            let c = self.below[k - 1];
            cands[0] = (c.2, c.3);
        }
        cands[1] = (s, revenue_at(&self.prior, self.gamma, s, s));
        let j = self.above.partition_point(|c| c.0 <= s);
        if j < self.above.len() {
            let c = self.above[j];
            cands[2] = (c.2, c.3);
        }
        let mut best = (f64::NAN, f64::NEG_INFINITY);
        for c in cands {
            if c.1 > best.1 || (c.1 == best.1 && c.0 < best.0) {
                best = c;
            }
        }
        best
    }
}

/// Optimal-price rule: regime thresholds when they apply, otherwise the
/// critical-point solver.
#[derive(Debug, Clone)]
pub enum PriceRule {
    Regimes(Thresholds),
    General(CriticalPrices),
}

impl PriceRule {
    pub fn new(prior: &Prior, gamma: f64, grid_size: usize) -> Result<Self> {
        match thresholds(prior, gamma, grid_size) {
            Ok(th) => Ok(PriceRule::Regimes(th)),
            Err(Error::NotRegular { .. }) | Err(Error::NotLogConcave { .. }) => {
                Ok(PriceRule::General(CriticalPrices::new(prior, gamma, grid_size)?))
            }
            Err(e) => Err(e),
        }
    }

    /// Optimal price and regime for signal `s`.
    pub fn price(&self, s: f64) -> (f64, Regime) {
        match self {
            PriceRule::Regimes(th) => optimal_price(th, s),
            PriceRule::General(cp) => (cp.price(s).0, Regime::Unclassified),
        }
    }
}

fn noisy_argmax(post: &NoisyPosterior, prior: &Prior, grid_size: usize) -> (f64, f64) {
    let (lo, hi) = prior.support();
    let grid = linspace(lo, hi, grid_size.max(2));
    argmax(&grid, |p| p * post.tail(p))
}

/// Optimal price under pure Gaussian signal noise.
pub fn noise_price(prior: &Prior, s: f64, sigma: f64, grid_size: usize) -> Result<f64> {
    let post = NoisyPosterior::noise(prior, s, sigma)?;
    Ok(noisy_argmax(&post, prior, grid_size).0)
}

/// Optimal price when the signal is noisy and may also be a hallucination.
pub fn hybrid_price(prior: &Prior, gamma: f64, s: f64, sigma: f64, grid_size: usize) -> Result<f64> {
    let post = NoisyPosterior::hybrid(prior, gamma, s, sigma)?;
    Ok(noisy_argmax(&post, prior, grid_size).0)
}

/// One row of a price curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceRow {
    pub s: f64,
    pub p_hall: f64,
    pub p_noise: f64,
    pub p_hall_noise: f64,
    pub regime: Regime,
}

/// Prices under hallucination, pure noise and both, on `n_points` signals.
pub fn price_curve(prior: &Prior, gamma: f64, sigma: f64, n_points: usize, grid_size: usize) -> Result<Vec<PriceRow>> {
    let th = match thresholds(prior, gamma, grid_size) {
        Ok(th) => Some(th),
        Err(Error::NotRegular { .. }) | Err(Error::NotLogConcave { .. }) => None,
        Err(e) => return Err(e),
    };
    let (lo, hi) = prior.support();
    let mut rows = Vec::with_capacity(n_points);
    for s in prior.blend_grid(lo, hi, n_points) {
        let (p_hall, regime) = match &th {
            Some(th) => optimal_price(th, s),
            None => (brute_force_price(prior, gamma, s, grid_size)?.0, Regime::Unclassified),
        };
        rows.push(PriceRow {
            s,
            p_hall,
            p_noise: noise_price(prior, s, sigma, grid_size)?,
            p_hall_noise: hybrid_price(prior, gamma, s, sigma, grid_size)?,
            regime,
        });
    }
    Ok(rows)
}

/// Number of maximal runs on which a price curve is either the identity or
/// a single constant, comparing with tolerance `tol`.
pub fn count_price_segments(signals: &[f64], prices: &[f64], tol: f64) -> usize {
    #[derive(PartialEq)]
    enum Seg {
        Identity,
        Constant(f64),
    }
    let mut count = 0;
    let mut current: Option<Seg> = None;
    for (&s, &p) in signals.iter().zip(prices) {
        let same = match &current {
            Some(Seg::Identity) => (p - s).abs() <= tol,
            Some(Seg::Constant(c)) => (p - c).abs() <= tol,
            None => false,
        };
        if !same {
            count += 1;
            current = Some(if (p - s).abs() <= tol { Seg::Identity } else { Seg::Constant(p) });
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn revenue_branches() {
        let u = Prior::uniform(0.0, 1.0).unwrap();
        assert!((revenue_at(&u, 0.75, 0.4, 0.4) - 0.4 * (1.0 - 0.3)).abs() < 1e-15);
        assert!((revenue_at(&u, 0.75, 0.4, 0.5) - 0.5 * 0.75 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn uniform_thresholds() {
        let u = Prior::uniform(0.0, 1.0).unwrap();
        let th = thresholds(&u, 0.75, 2000).unwrap();
        assert!((th.p_ignore - 0.5).abs() < 1e-10);
        assert!((th.p_cap - 2.0 / 3.0).abs() < 1e-10);
        assert!((th.upper - 1.0).abs() < 1e-12);
        assert!((th.lower - (4.0 - 7f64.sqrt()) / 6.0).abs() < 1e-9, "{}", th.lower);
        assert_eq!(optimal_price(&th, 0.4), (0.4, Regime::Follow));
        let (p, r) = optimal_price(&th, 0.9);
        assert!((p - 2.0 / 3.0).abs() < 1e-10);
        assert_eq!(r, Regime::Cap);
        assert_eq!(optimal_price(&th, 0.1).1, Regime::Ignore);
    }

    #[test]
    fn brute_force_agrees_on_uniform() {
        let u = Prior::uniform(0.0, 1.0).unwrap();
        let (p, _) = brute_force_price(&u, 0.75, 0.4, 2000).unwrap();
        assert!((p - 0.4).abs() < 1e-12);
    }

    #[test]
    fn critical_prices_match_thresholds() {
        for tok in ["uniform:0,1", "beta:1,2", "beta:5,1", "exponential:1"] {
            let p = Prior::parse(tok).unwrap();
            for &g in &[0.3, 0.77, 0.9] {
                let th = thresholds(&p, g, 2000).unwrap();
                let cp = CriticalPrices::new(&p, g, 2000).unwrap();
                for s in p.blend_grid(p.lo(), p.hi(), 97) {
                    let (a, _) = optimal_price(&th, s);
                    let (b, rb) = cp.price(s);
                    let ra = revenue_at(&p, g, s, a);
                    assert!((ra - rb).abs() <= 1e-9 * ra.abs().max(1.0), "{tok} g={g} s={s}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn segments_counted() {
        let s = linspace(0.0, 1.0, 11);
        let p: Vec<f64> = s.iter().map(|&x| if x < 0.3 { 0.25 } else if x < 0.7 { x } else { 0.6 }).collect();
        assert_eq!(count_price_segments(&s, &p, 1e-9), 3);
    }
}
