//! Value distributions conditioned on a signal.
//!
//! Under the hallucination model the signal equals the value with
//! probability `1 - gamma` and is an independent prior draw otherwise, so the
//! posterior is the prior scaled by `gamma` plus an atom of mass `1 - gamma`
//! at the signal. The Gaussian-noise and hybrid models have absolutely
//! continuous posteriors that are integrated numerically.

use rand::Rng;

use crate::distributions::Prior;
use crate::error::{Error, Result};
use crate::numerics::{cumulative_trapezoid, linspace, locate_cell, merge_grid};

/// Half-width of the noise kernel window in standard deviations.
pub const KERNEL_HALF_WIDTH: f64 = 8.0;

/// Default number of quadrature nodes for the noisy posteriors.
pub const NOISE_NODES: usize = 4001;

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    Ok(())
}

/// Posterior `gamma * F + (1 - gamma) * delta_signal`.
#[derive(Debug, Clone, Copy)]
pub struct HallucinationPosterior<'a> {
    prior: &'a Prior,
    gamma: f64,
    signal: f64,
}

impl<'a> HallucinationPosterior<'a> {
    pub fn new(prior: &'a Prior, gamma: f64, signal: f64) -> Result<Self> {
        check_gamma(gamma)?;
        let (lo, hi) = prior.support();
        if !(signal >= lo && signal <= hi) {
            return Err(Error::InvalidParameter(format!("signal {signal} outside support [{lo}, {hi}]")));
        }
        Ok(HallucinationPosterior { prior, gamma, signal })
    }

    pub fn prior(&self) -> &'a Prior {
        self.prior
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn signal(&self) -> f64 {
        self.signal
    }

    /// Mass of the atom at the signal.
    pub fn atom_mass(&self) -> f64 {
        1.0 - self.gamma
    }

    /// Posterior cdf, right-continuous at the signal.
    pub fn cdf(&self, v: f64) -> f64 {
        let base = self.gamma * self.prior.cdf(v);
        if v < self.signal {
            base
        } else {
            base + 1.0 - self.gamma
        }
    }

    /// Left limit of the cdf at the signal.
    pub fn cdf_left_of_signal(&self) -> f64 {
        self.gamma * self.prior.cdf(self.signal)
    }

    /// Probability that the value is at least `p`.
    pub fn tail(&self, p: f64) -> f64 {
        let atom = if p <= self.signal { 1.0 - self.gamma } else { 0.0 };
        self.gamma * self.prior.sf(p) + atom
    }

    /// `H` of the posterior: `gamma H_F(x) - (1 - gamma) x` below the signal
    /// and `gamma H_F(x)` from the signal on.
    pub fn revenue_h(&self, x: f64, nodes: usize) -> f64 {
        let h = self.gamma * self.prior.revenue_h(x, nodes);
        if x < self.signal {
            h - (1.0 - self.gamma) * x
        } else {
            h
        }
    }

    /// Draws a value from two uniforms: the first decides whether the signal
    /// is truthful, the second drives the inverse-transform prior draw.
    pub fn sample_with(&self, u_truth: f64, u_value: f64) -> f64 {
        if u_truth < 1.0 - self.gamma {
            self.signal
        } else {
            self.prior.quantile_unchecked(u_value)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u_truth = rng.gen::<f64>();
        let u_value = rng.gen::<f64>();
        self.sample_with(u_truth, u_value)
    }
}

/// Posterior weight on "the signal is a hallucination" when hallucinations
/// are drawn from a density `g` that may differ from the prior density `f`:
/// `(1 + ((1 - gamma) / gamma) * f(s) / g(s))^{-1}`.
///
/// The posterior is then the hallucination posterior with this weight in
/// place of `gamma`; when `g = f` the weight is `gamma` itself.
pub fn mismatched_gamma(gamma: f64, prior_density: f64, hallucination_density: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(prior_density >= 0.0 && hallucination_density >= 0.0) {
        return Err(Error::InvalidParameter("densities must be non-negative".into()));
    }
    if hallucination_density == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (1.0 + (1.0 - gamma) / gamma * prior_density / hallucination_density))
}

/// Posterior under Gaussian signal noise, optionally mixed with
/// hallucinations.
///
/// With noise scale `sigma` and hallucination probability `gamma` the
/// posterior density is proportional to
/// `f(v) * ((1 - gamma) * N(s - v; sigma) + gamma * f(s))`; `gamma = 0`
/// recovers the pure-noise model.
#[derive(Debug, Clone)]
pub struct NoisyPosterior {
    prior: Prior,
    signal: f64,
    sigma: f64,
    gamma: f64,
    grid: Vec<f64>,
    cumulative: Vec<f64>,
    noise_mass: f64,
    hallucination_mass: f64,
}

impl NoisyPosterior {
    /// Pure Gaussian-noise posterior.
    pub fn noise(prior: &Prior, signal: f64, sigma: f64) -> Result<Self> {
        Self::build(prior, signal, sigma, 0.0, NOISE_NODES)
    }

    /// Hallucination mixed with Gaussian noise.
    pub fn hybrid(prior: &Prior, gamma: f64, signal: f64, sigma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Self::build(prior, signal, sigma, gamma, NOISE_NODES)
    }

    pub fn build(prior: &Prior, signal: f64, sigma: f64, gamma: f64, nodes: usize) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise scale must be positive, got {sigma}")));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!("gamma must lie in [0, 1), got {gamma}")));
        }
        if !signal.is_finite() {
            return Err(Error::InvalidParameter("signal must be finite".into()));
        }
        let (lo, hi) = prior.support();
        let wlo = (signal - KERNEL_HALF_WIDTH * sigma).max(lo);
        let whi = (signal + KERNEL_HALF_WIDTH * sigma).min(hi);
        let (grid, cumulative) = if whi > wlo {
            let mut grid = linspace(wlo, whi, nodes);
            grid.extend(prior.breakpoints().into_iter().filter(|&b| b > wlo && b < whi));
            let grid = merge_grid(grid);
            let ys: Vec<f64> = grid.iter().map(|&v| prior.pdf(v) * gaussian(signal - v, sigma)).collect();
            let cumulative = cumulative_trapezoid(&grid, &ys);
            (grid, cumulative)
        } else {
            (vec![wlo, wlo], vec![0.0, 0.0])
        };
        let noise_mass = (1.0 - gamma) * cumulative.last().copied().unwrap_or(0.0);
        let hallucination_mass = if gamma > 0.0 && signal >= lo && signal <= hi { gamma * prior.pdf(signal) } else { 0.0 };
        if !(noise_mass + hallucination_mass > 1e-300) {
            return Err(Error::Numerical(format!(
                "posterior normalizer vanishes for signal {signal} and noise scale {sigma}"
            )));
        }
        Ok(NoisyPosterior {
            prior: prior.clone(),
            signal,
            sigma,
            gamma,
            grid,
            cumulative,
            noise_mass,
            hallucination_mass,
        })
    }

    pub fn signal(&self) -> f64 {
        self.signal
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Posterior probability that the signal came from the noise channel.
    pub fn noise_weight(&self) -> f64 {
        self.noise_mass / (self.noise_mass + self.hallucination_mass)
    }

    /// Tail `P(v >= p)` of the noise component alone.
    pub fn noise_tail(&self, p: f64) -> f64 {
        let total = *self.cumulative.last().expect("non-empty grid");
        if total <= 0.0 {
            return if p <= self.grid[0] { 1.0 } else { 0.0 };
        }
        let (g0, gn) = (self.grid[0], *self.grid.last().expect("non-empty grid"));
        if p <= g0 {
            return 1.0;
        }
        if p >= gn {
            return 0.0;
        }
        let k = locate_cell(&self.grid, p);
        let t = (p - self.grid[k]) / (self.grid[k + 1] - self.grid[k]);
        let below = self.cumulative[k] + t * (self.cumulative[k + 1] - self.cumulative[k]);
        ((total - below) / total).clamp(0.0, 1.0)
    }

    /// Posterior tail `P(v >= p)`, a convex combination of the noise tail and
    /// the prior tail.
    pub fn tail(&self, p: f64) -> f64 {
        let w = self.noise_weight();
        let prior_tail = if self.gamma > 0.0 { self.prior.sf(p) } else { 0.0 };
        w * self.noise_tail(p) + (1.0 - w) * prior_tail
    }

    pub fn cdf(&self, v: f64) -> f64 {
        1.0 - self.tail(v)
    }
}

fn gaussian(x: f64, sigma: f64) -> f64 {
    let z = x / sigma;
    0.398_942_280_401_432_7 * (-0.5 * z * z).exp() / sigma
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hallucination_cdf_has_atom() {
        let u = Prior::uniform(0.0, 1.0).unwrap();
        let post = HallucinationPosterior::new(&u, 0.75, 0.4).unwrap();
        assert!((post.cdf(0.39999) - 0.75 * 0.39999).abs() < 1e-12);
        assert!((post.cdf(0.4) - 0.55).abs() < 1e-12);
        assert!((post.cdf_left_of_signal() - 0.3).abs() < 1e-12);
        assert!((post.tail(0.4) - (0.25 + 0.75 * 0.6)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let u = Prior::uniform(0.0, 1.0).unwrap();
        assert!(HallucinationPosterior::new(&u, 1.0, 0.4).is_err());
        assert!(HallucinationPosterior::new(&u, 0.5, 1.5).is_err());
        assert!(NoisyPosterior::noise(&u, 0.5, 0.0).is_err());
    }

    #[test]
    fn atom_frequency_matches_mass() {
        let u = Prior::uniform(0.0, 1.0).unwrap();
        let post = HallucinationPosterior::new(&u, 0.75, 0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let hits = (0..n).filter(|_| post.sample(&mut rng) == 0.4).count();
        let freq = hits as f64 / n as f64;
        let se = (0.25f64 * 0.75 / n as f64).sqrt();
        assert!((freq - 0.25).abs() < 4.0 * se, "{freq}");
    }

    #[test]
    fn mismatched_gamma_reduces_to_gamma() {
        assert!((mismatched_gamma(0.3, 1.7, 1.7).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(mismatched_gamma(0.3, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn wide_noise_recovers_prior() {
        let b = Prior::beta(1.0, 2.0).unwrap();
        let post = NoisyPosterior::noise(&b, 0.5, 1e3).unwrap();
        for &p in &[0.1, 0.3, 0.6, 0.9] {
            assert!((post.tail(p) - b.sf(p)).abs() < 1e-5);
        }
    }

    #[test]
    fn hybrid_is_convex_combination() {
        let b = Prior::beta(1.0, 2.0).unwrap();
        let hyb = NoisyPosterior::hybrid(&b, 0.77, 0.5, 0.1).unwrap();
        let noise = NoisyPosterior::noise(&b, 0.5, 0.1).unwrap();
        let w = hyb.noise_weight();
        assert!(w > 0.0 && w < 1.0);
        for &p in &[0.2, 0.45, 0.5, 0.7] {
            let mix = w * noise.tail(p) + (1.0 - w) * b.sf(p);
            assert!((hyb.tail(p) - mix).abs() < 1e-12);
        }
    }

    #[test]
    fn vanishing_normalizer_is_reported() {
        let u = Prior::uniform(0.0, 1.0).unwrap();
        assert!(matches!(NoisyPosterior::noise(&u, 50.0, 0.01), Err(Error::Numerical(_))));
    }
}
