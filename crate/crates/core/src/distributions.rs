//! Prior value distributions on a bounded support `[lo, hi]`.
//!
//! Families with unbounded support are truncated at their `1 - 1e-6`
//! quantile unless an explicit upper bound is given, and renormalized.
//! Truncated families evaluate through whichever tail (lower or upper) keeps
//! the arithmetic well conditioned, so a normal truncated ten standard
//! deviations above its mean still has an accurate cdf.

use std::fmt;

use rand::Rng;
use statrs::function::beta::{beta_reg, ln_beta};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::numerics::{bisect_first, midpoint};

/// Upper-tail mass removed when an unbounded family is truncated.
pub const TAIL_TRUNCATION: f64 = 1e-6;

/// Relative slack used when testing a virtual value for monotonicity.
pub const REGULARITY_SLACK: f64 = 1e-9;

/// Default number of quadrature nodes for [`Prior::revenue_h`].
pub const H_QUADRATURE_NODES: usize = 4001;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Regularized incomplete beta function with closed forms when either
/// shape parameter is 1.
fn beta_cdf(alpha: f64, beta: f64, x: f64) -> f64 {
    if alpha == 1.0 {
        -(beta * (-x).ln_1p()).exp_m1()
    } else if beta == 1.0 {
        x.powf(alpha)
    } else {
        beta_reg(alpha, beta, x)
    }
}

/// An untruncated family evaluated through both tails.
#[derive(Debug, Clone, PartialEq)]
enum Base {
    Exponential { rate: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Normal { mean: f64, sd: f64 },
}

impl Base {
    fn cdf(&self, x: f64) -> f64 {
        match *self {
            Base::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Base::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    0.5 * erfc(-(x.ln() - mu) / (sigma * SQRT_2))
                }
            }
            Base::Normal { mean, sd } => 0.5 * erfc(-(x - mean) / (sd * SQRT_2)),
        }
    }

    fn sf(&self, x: f64) -> f64 {
        match *self {
            Base::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Base::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    0.5 * erfc((x.ln() - mu) / (sigma * SQRT_2))
                }
            }
            Base::Normal { mean, sd } => 0.5 * erfc((x - mean) / (sd * SQRT_2)),
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        match *self {
            Base::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Base::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let z = (x.ln() - mu) / sigma;
                    INV_SQRT_2PI * (-0.5 * z * z).exp() / (x * sigma)
                }
            }
            Base::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                INV_SQRT_2PI * (-0.5 * z * z).exp() / sd
            }
        }
    }

    /// Inverse of the lower tail, `cdf(x) = p`.
    fn inv_cdf(&self, p: f64) -> f64 {
        match *self {
            Base::Exponential { rate } => -(-p).ln_1p() / rate,
            Base::Lognormal { mu, sigma } => (mu + sigma * std_normal_inv_cdf(p)).exp(),
            Base::Normal { mean, sd } => mean + sd * std_normal_inv_cdf(p),
        }
    }

    /// Inverse of the upper tail, `sf(x) = p`.
    fn inv_sf(&self, p: f64) -> f64 {
        match *self {
            Base::Exponential { rate } => -p.ln() / rate,
            Base::Lognormal { mu, sigma } => (mu - sigma * std_normal_inv_cdf(p)).exp(),
            Base::Normal { mean, sd } => mean - sd * std_normal_inv_cdf(p),
        }
    }

    fn natural_lower(&self) -> f64 {
        match *self {
            Base::Exponential { .. } | Base::Lognormal { .. } => 0.0,
            Base::Normal { mean, sd } => mean - sd * std_normal_inv_cdf(1.0 - TAIL_TRUNCATION),
        }
    }

    fn natural_upper(&self) -> f64 {
        self.inv_sf(TAIL_TRUNCATION)
    }
}

fn std_normal_inv_cdf(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}

/// Truncation of a [`Base`] family to `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
struct Truncated {
    base: Base,
    cdf_lo: f64,
    sf_lo: f64,
    sf_hi: f64,
    mass: f64,
    /// True when the window sits in the upper tail, where survival
    /// differences are better conditioned than cdf differences.
    upper: bool,
}

impl Truncated {
    fn new(base: Base, lo: f64, hi: f64) -> Result<Self> {
        let cdf_lo = base.cdf(lo);
        let sf_lo = base.sf(lo);
        let sf_hi = base.sf(hi);
        let upper = sf_lo < 0.5;
        let mass = if upper { sf_lo - sf_hi } else { base.cdf(hi) - cdf_lo };
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "truncation window [{lo}, {hi}] carries no probability mass"
            )));
        }
        Ok(Truncated { base, cdf_lo, sf_lo, sf_hi, mass, upper })
    }

    fn cdf(&self, x: f64) -> f64 {
        let raw = if self.upper {
            (self.sf_lo - self.base.sf(x)) / self.mass
        } else {
            (self.base.cdf(x) - self.cdf_lo) / self.mass
        };
        raw.clamp(0.0, 1.0)
    }

    fn sf(&self, x: f64) -> f64 {
        ((self.base.sf(x) - self.sf_hi) / self.mass).clamp(0.0, 1.0)
    }

    fn pdf(&self, x: f64) -> f64 {
        self.base.pdf(x) / self.mass
    }

    fn quantile(&self, q: f64) -> f64 {
        if self.upper || q > 0.5 {
            self.base.inv_sf(self.sf_lo - q * self.mass)
        } else {
            self.base.inv_cdf(self.cdf_lo + q * self.mass)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Uniform,
    Beta { alpha: f64, beta: f64, ln_norm: f64 },
    Truncated(Truncated),
    Mixture(Vec<(f64, Prior)>),
}

/// A prior value distribution with cdf, density and quantile on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    kind: Kind,
    lo: f64,
    hi: f64,
    token: String,
}

fn check_support(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!("support [{lo}, {hi}] must be finite with lo < hi")));
    }
    Ok(())
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

impl Prior {
    /// Uniform distribution on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        check_support(lo, hi)?;
        Ok(Prior { kind: Kind::Uniform, lo, hi, token: format!("uniform:{},{}", fmt_num(lo), fmt_num(hi)) })
    }

    /// Beta(`alpha`, `beta`) on `[0, 1]`.
    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        Self::beta_on(alpha, beta, 0.0, 1.0)
    }

    /// Beta(`alpha`, `beta`) mapped affinely onto `[lo, hi]`.
    pub fn beta_on(alpha: f64, beta: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta shape parameters must be positive, got ({alpha}, {beta})")));
        }
        check_support(lo, hi)?;
        Ok(Prior {
            kind: Kind::Beta { alpha, beta, ln_norm: ln_beta(alpha, beta) },
            lo,
            hi,
            token: format!("beta:{},{},{},{}", fmt_num(alpha), fmt_num(beta), fmt_num(lo), fmt_num(hi)),
        })
    }

    /// Exponential with the given rate, truncated to its `1 - 1e-6` quantile.
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("exponential rate must be positive, got {rate}")));
        }
        let base = Base::Exponential { rate };
        let hi = base.natural_upper();
        Self::exponential_on(rate, 0.0, hi)
    }

    /// Exponential with the given rate, truncated to `[lo, hi]` with `lo >= 0`.
    pub fn exponential_on(rate: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("exponential rate must be positive, got {rate}")));
        }
        check_support(lo, hi)?;
        if lo < 0.0 {
            return Err(Error::InvalidParameter("exponential support must be non-negative".into()));
        }
        let t = Truncated::new(Base::Exponential { rate }, lo, hi)?;
        Ok(Prior {
            kind: Kind::Truncated(t),
            lo,
            hi,
            token: format!("exponential:{},{},{}", fmt_num(rate), fmt_num(lo), fmt_num(hi)),
        })
    }

    /// Lognormal with log-mean `mu` and log-sd `sigma`, truncated to its
    /// `1 - 1e-6` quantile.
    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("lognormal needs finite mu and sigma > 0, got ({mu}, {sigma})")));
        }
        let hi = Base::Lognormal { mu, sigma }.natural_upper();
        Self::lognormal_on(mu, sigma, 0.0, hi)
    }

    /// Lognormal truncated to `[lo, hi]` with `lo >= 0`.
    pub fn lognormal_on(mu: f64, sigma: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("lognormal needs finite mu and sigma > 0, got ({mu}, {sigma})")));
        }
        check_support(lo, hi)?;
        if lo < 0.0 {
            return Err(Error::InvalidParameter("lognormal support must be non-negative".into()));
        }
        let t = Truncated::new(Base::Lognormal { mu, sigma }, lo, hi)?;
        Ok(Prior {
            kind: Kind::Truncated(t),
            lo,
            hi,
            token: format!("lognormal:{},{},{},{}", fmt_num(mu), fmt_num(sigma), fmt_num(lo), fmt_num(hi)),
        })
    }

    /// Normal(`mean`, `sd`) truncated to `[lo, hi]`.
    pub fn truncated_normal(mean: f64, sd: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
            return Err(Error::InvalidParameter(format!("normal needs finite mean and sd > 0, got ({mean}, {sd})")));
        }
        check_support(lo, hi)?;
        let t = Truncated::new(Base::Normal { mean, sd }, lo, hi)?;
        Ok(Prior {
            kind: Kind::Truncated(t),
            lo,
            hi,
            token: format!("normal:{},{},{},{}", fmt_num(mean), fmt_num(sd), fmt_num(lo), fmt_num(hi)),
        })
    }

    /// Finite mixture. Weights must be positive and sum to one (within 1e-9);
    /// the support is the hull of the component supports.
    pub fn mixture(components: Vec<(f64, Prior)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("mixture needs at least one component".into()));
        }
        let total: f64 = components.iter().map(|(w, _)| *w).sum();
        if components.iter().any(|(w, _)| !(*w > 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("mixture weights must be positive and sum to 1, got sum {total}")));
        }
        let lo = components.iter().map(|(_, p)| p.lo).fold(f64::INFINITY, f64::min);
        let hi = components.iter().map(|(_, p)| p.hi).fold(f64::NEG_INFINITY, f64::max);
        let token = format!(
            "mix:{}",
            components.iter().map(|(w, p)| format!("{}*{}", fmt_num(*w), p.token)).collect::<Vec<_>>().join("+")
        );
        Ok(Prior { kind: Kind::Mixture(components), lo, hi, token })
    }

    /// Parses a prior token such as `beta:1,2`, `lognormal:0,1.8` or
    /// `mix:0.75*beta:4,6+0.25*beta:4,1`. Optional trailing `a,b` fix the
    /// support.
    pub fn parse(token: &str) -> Result<Self> {
        parse_at(token.trim(), 0)
    }

    /// Canonical token that parses back to this prior.
    pub fn token(&self) -> &str {
        &self.token
    }

    /// Support `(lo, hi)`.
    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Cumulative distribution function, clamped to `[0, 1]`.
    pub fn cdf(&self, v: f64) -> f64 {
        if v <= self.lo {
            return 0.0;
        }
        if v >= self.hi {
            return 1.0;
        }
        match &self.kind {
            Kind::Uniform => (v - self.lo) / (self.hi - self.lo),
            Kind::Beta { alpha, beta, .. } => beta_cdf(*alpha, *beta, (v - self.lo) / (self.hi - self.lo)),
            Kind::Truncated(t) => t.cdf(v),
            Kind::Mixture(cs) => cs.iter().map(|(w, p)| w * p.cdf(v)).sum::<f64>().clamp(0.0, 1.0),
        }
    }

    /// Survival function `1 - cdf`, evaluated without cancellation in the
    /// upper tail.
    pub fn sf(&self, v: f64) -> f64 {
        if v <= self.lo {
            return 1.0;
        }
        if v >= self.hi {
            return 0.0;
        }
        match &self.kind {
            Kind::Uniform => (self.hi - v) / (self.hi - self.lo),
            Kind::Beta { alpha, beta, .. } => beta_cdf(*beta, *alpha, (self.hi - v) / (self.hi - self.lo)),
            Kind::Truncated(t) => t.sf(v),
            Kind::Mixture(cs) => cs.iter().map(|(w, p)| w * p.sf(v)).sum::<f64>().clamp(0.0, 1.0),
        }
    }

    /// Density; zero outside the support.
    pub fn pdf(&self, v: f64) -> f64 {
        if v < self.lo || v > self.hi {
            return 0.0;
        }
        match &self.kind {
            Kind::Uniform => 1.0 / (self.hi - self.lo),
            Kind::Beta { alpha, beta, ln_norm } => {
                let w = self.hi - self.lo;
                let x = (v - self.lo) / w;
                let mut ln = -ln_norm - w.ln();
                if *alpha != 1.0 {
                    ln += (alpha - 1.0) * x.ln();
                }
                if *beta != 1.0 {
                    ln += (beta - 1.0) * (1.0 - x).ln();
                }
                ln.exp()
            }
            Kind::Truncated(t) => t.pdf(v),
            Kind::Mixture(cs) => cs.iter().map(|(w, p)| w * p.pdf(v)).sum(),
        }
    }

    /// Quantile function on `[0, 1]`, accurate to `|cdf(quantile(q)) - q| <= 1e-8`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidParameter(format!("quantile level {q} outside [0, 1]")));
        }
        Ok(self.quantile_unchecked(q))
    }

    pub(crate) fn quantile_unchecked(&self, q: f64) -> f64 {
        if q <= 0.0 {
            return self.lo;
        }
        if q >= 1.0 {
            return self.hi;
        }
        let guess = match &self.kind {
            Kind::Uniform => return self.lo + q * (self.hi - self.lo),
            Kind::Beta { alpha, beta, .. } => {
                let w = self.hi - self.lo;
                if *beta == 1.0 {
                    return self.lo + w * q.powf(1.0 / alpha);
                }
                if *alpha == 1.0 {
                    return self.lo + w * (1.0 - (1.0 - q).powf(1.0 / beta));
                }
                None
            }
            Kind::Truncated(t) => Some(t.quantile(q)),
            Kind::Mixture(_) => None,
        };
        match guess {
            Some(x) if x.is_finite() => {
                let x = x.clamp(self.lo, self.hi);
                if (self.cdf(x) - q).abs() <= 1e-12 {
                    x
                } else {
                    self.solve_quantile(q, Some(x))
                }
            }
            _ => self.solve_quantile(q, None),
        }
    }

    /// Safeguarded Newton iteration on the cdf inside the support bracket.
    fn solve_quantile(&self, q: f64, start: Option<f64>) -> f64 {
        let (mut lo, mut hi) = (self.lo, self.hi);
        let mut x = start.unwrap_or(0.5 * (lo + hi));
        for _ in 0..200 {
            let err = self.cdf(x) - q;
            if err.abs() <= 1e-14 {
                return x;
            }
            if err > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            if hi - lo <= 1e-15 * (1.0 + x.abs()) {
                break;
            }
            let d = self.pdf(x);
            let newton = x - err / d;
            x = if d > 0.0 && newton.is_finite() && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        x
    }

    /// Inverse-transform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile_unchecked(rng.gen::<f64>())
    }

    /// Myerson virtual value `v - (1 - F(v)) / f(v)`.
    pub fn virtual_value(&self, v: f64) -> f64 {
        let d = self.pdf(v);
        let s = self.sf(v);
        if s <= 0.0 {
            return v;
        }
        if d <= 0.0 {
            return f64::NEG_INFINITY;
        }
        v - s / d
    }

    /// Virtual value of the scaled measure `gamma * F`:
    /// `v - (1/gamma - F(v)) / f(v)`.
    pub fn gamma_virtual(&self, v: f64, gamma: f64) -> f64 {
        let d = self.pdf(v);
        let num = (1.0 / gamma - 1.0) + self.sf(v);
        if num <= 0.0 {
            return v;
        }
        if d <= 0.0 {
            return f64::NEG_INFINITY;
        }
        v - num / d
    }

    /// `H(x) = ∫_lo^x t dF(t) - ∫_lo^x (1 - F(t)) dt - lo`, by the midpoint
    /// rule with `nodes` cells.
    pub fn revenue_h(&self, x: f64, nodes: usize) -> f64 {
        let x = x.clamp(self.lo, self.hi);
        midpoint(|t| self.h_integrand(t), self.lo, x, nodes) - self.lo
    }

    fn h_integrand(&self, t: f64) -> f64 {
        let y = t * self.pdf(t) - self.sf(t);
        if y.is_finite() {
            y
        } else {
            -self.sf(t)
        }
    }

    /// `H` on a sorted grid starting at `lo`, integrating each cell with
    /// `sub` midpoint cells.
    pub fn revenue_h_table(&self, grid: &[f64], sub: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(grid.len());
        let mut acc = -self.lo;
        let mut prev = self.lo;
        for &x in grid {
            if x > prev {
                acc += midpoint(|t| self.h_integrand(t), prev, x, sub);
                prev = x;
            }
            out.push(acc);
        }
        out
    }

    /// Grid on `[lo, hi]` whose nodes are equally spaced in the blended
    /// coordinate `(F(x) + (x - lo) / (hi - lo)) / 2`, so both the bulk of the
    /// mass and long tails are resolved. Support endpoints of mixture
    /// components inside `(lo, hi)` are added as extra nodes.
    pub fn blend_grid(&self, lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let n = n.max(2);
        if hi <= lo {
            return vec![lo; 2];
        }
        let (flo, fhi) = (self.cdf(lo), self.cdf(hi));
        let fm = (fhi - flo).max(0.0);
        let width = hi - lo;
        let blend = |x: f64| {
            let qpart = if fm > 0.0 { (self.cdf(x) - flo) / fm } else { 0.0 };
            let w = if fm > 0.0 { 0.5 } else { 0.0 };
            w * qpart + (1.0 - w) * (x - lo) / width
        };
        let mut out = Vec::with_capacity(n);
        out.push(lo);
        let mut left = lo;
        for k in 1..n - 1 {
            let target = k as f64 / (n - 1) as f64;
            let x = bisect_first(left, hi, 1e-13 * (1.0 + hi.abs()), |x| blend(x) >= target);
            out.push(x);
            left = x;
        }
        out.push(hi);
        out.extend(self.breakpoints().into_iter().filter(|&b| b > lo && b < hi));
        crate::numerics::merge_grid(out)
    }

    /// Points where the density may jump: component support endpoints of a
    /// mixture.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Mixture(cs) => cs.iter().flat_map(|(_, p)| {
                let mut b = p.breakpoints();
                b.extend([p.lo, p.hi]);
                b
            }).collect(),
            _ => Vec::new(),
        }
    }

    /// Checks that the virtual value is non-decreasing on a grid of interior
    /// points, with relative slack [`REGULARITY_SLACK`].
    pub fn check_regular(&self, grid_size: usize) -> Result<()> {
        check_monotone(&self.blend_grid(self.lo, self.hi, grid_size), |v| self.virtual_value(v))
    }

    pub fn is_regular(&self, grid_size: usize) -> bool {
        self.check_regular(grid_size).is_ok()
    }
}

/// Verifies that `phi` is non-decreasing over the interior grid nodes.
pub(crate) fn check_monotone<F: Fn(f64) -> f64>(grid: &[f64], phi: F) -> Result<()> {
    let interior = &grid[1..grid.len().saturating_sub(1)];
    let mut prev: Option<f64> = None;
    for &v in interior {
        let cur = phi(v);
        if !cur.is_finite() {
            continue;
        }
        if let Some(p) = prev {
            if cur < p - REGULARITY_SLACK * p.abs().max(1.0) {
                return Err(Error::NotRegular { at: v });
            }
        }
        prev = Some(cur);
    }
    Ok(())
}

impl fmt::Display for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token)
    }
}

impl std::str::FromStr for Prior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Prior::parse(s)
    }
}

fn parse_err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

fn parse_at(token: &str, offset: usize) -> Result<Prior> {
    let colon = token.find(':').ok_or_else(|| parse_err(offset, "expected `family:params`"))?;
    let family = token[..colon].trim().to_ascii_lowercase();
    let body = &token[colon + 1..];
    let body_offset = offset + colon + 1;
    if family == "mix" {
        let mut components = Vec::new();
        let mut start = 0;
        for part in body.split('+') {
            let star = part
                .find('*')
                .ok_or_else(|| parse_err(body_offset + start, "mixture component needs `weight*token`"))?;
            let weight: f64 = part[..star]
                .trim()
                .parse()
                .map_err(|_| parse_err(body_offset + start, format!("bad mixture weight `{}`", &part[..star])))?;
            let comp = parse_at(part[star + 1..].trim(), body_offset + start + star + 1)?;
            components.push((weight, comp));
            start += part.len() + 1;
        }
        return Prior::mixture(components);
    }
    let mut params = Vec::new();
    let mut start = 0;
    if !body.trim().is_empty() {
        for piece in body.split(',') {
            let x: f64 = piece
                .trim()
                .parse()
                .map_err(|_| parse_err(body_offset + start, format!("bad number `{}`", piece.trim())))?;
            params.push(x);
            start += piece.len() + 1;
        }
    }
    let arity = |min: usize, max: usize| -> Result<()> {
        if params.len() < min || params.len() > max || (params.len() != min && params.len() != max) {
            return Err(parse_err(body_offset, format!("`{family}` takes {min} or {max} parameters, got {}", params.len())));
        }
        Ok(())
    };
    match family.as_str() {
        "uniform" => {
            if params.is_empty() {
                Prior::uniform(0.0, 1.0)
            } else {
                arity(2, 2)?;
                Prior::uniform(params[0], params[1])
            }
        }
        "beta" => {
            arity(2, 4)?;
            if params.len() == 4 {
                Prior::beta_on(params[0], params[1], params[2], params[3])
            } else {
                Prior::beta(params[0], params[1])
            }
        }
        "exponential" | "exp" => {
            arity(1, 3)?;
            if params.len() == 3 {
                Prior::exponential_on(params[0], params[1], params[2])
            } else {
                Prior::exponential(params[0])
            }
        }
        "lognormal" => {
            arity(2, 4)?;
            if params.len() == 4 {
                Prior::lognormal_on(params[0], params[1], params[2], params[3])
            } else {
                Prior::lognormal(params[0], params[1])
            }
        }
        "normal" | "truncnormal" => {
            arity(2, 4)?;
            if params.len() == 4 {
                Prior::truncated_normal(params[0], params[1], params[2], params[3])
            } else {
                if !(params[1] > 0.0) {
                    return Err(Error::InvalidParameter(format!("normal sd must be positive, got {}", params[1])));
                }
                let base = Base::Normal { mean: params[0], sd: params[1] };
                Prior::truncated_normal(params[0], params[1], base.natural_lower(), base.natural_upper())
            }
        }
        other => Err(parse_err(offset, format!("unknown family `{other}`"))),
    }
}
