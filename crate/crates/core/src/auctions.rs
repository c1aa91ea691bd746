//! Multi-buyer mechanisms: eager second-price auctions with personalized
//! reserves, the signal-revealing optimal auction driven by per-buyer
//! virtual values, exact and Monte-Carlo revenue, and a two-point-prior
//! mechanism that extracts the full surplus when signals stay hidden.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distributions::Prior;
use crate::error::{Error, Result};
use crate::ironing::{HullTable, SignalHull, VirtualValue};
use crate::numerics::{cumulative_trapezoid, locate_cell, merge_grid, trapezoid};
use crate::pricing::{monopoly_price, PriceRule};

/// Samples per independently seeded Monte-Carlo stream.
pub const MC_CHUNK: usize = 4096;

/// Trapezoid nodes per branch in [`exact_two_buyer_revenue`].
pub const EXACT_NODES: usize = 2001;

const PARTIAL_MEAN_NODES: usize = 20001;

/// Result of one auction run.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome {
    pub winner: Option<usize>,
    pub payment: f64,
    pub per_buyer_payments: Vec<f64>,
}

impl AuctionOutcome {
    fn from_sale(n: usize, sale: Option<(usize, f64)>) -> Self {
        let mut per_buyer_payments = vec![0.0; n];
        match sale {
            Some((w, pay)) => {
                per_buyer_payments[w] = pay;
                AuctionOutcome { winner: Some(w), payment: pay, per_buyer_payments }
            }
            None => AuctionOutcome { winner: None, payment: 0.0, per_buyer_payments },
        }
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a == 0 || a != b {
        return Err(Error::InvalidParameter(format!("expected equal non-zero lengths, got {a} and {b}")));
    }
    Ok(())
}

/// Eager second-price auction: buyers below their reserve are removed, the
/// highest remaining bid wins (lowest index on ties) and pays the larger of
/// its reserve and the best competing active bid.
pub fn eager_run(values: &[f64], reserves: &[f64]) -> Result<AuctionOutcome> {
    check_lengths(values.len(), reserves.len())?;
    if values.iter().chain(reserves).any(|x| x.is_nan()) {
        return Err(Error::InvalidParameter("values and reserves must not be NaN".into()));
    }
    Ok(AuctionOutcome::from_sale(values.len(), eager_sale(values, reserves)))
}

fn eager_sale(values: &[f64], reserves: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<usize> = None;
    for i in 0..values.len() {
        if values[i] >= reserves[i] && best.is_none_or(|b| values[i] > values[b]) {
            best = Some(i);
        }
    }
    let w = best?;
    let mut pay = reserves[w];
    for i in 0..values.len() {
        if i != w && values[i] >= reserves[i] {
            pay = pay.max(values[i]);
        }
    }
    Some((w, pay))
}

/// How an eager auction sets personalized reserves from the signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReservePolicy {
    /// Every buyer faces the prior monopoly price.
    SpaIgnore,
    /// Each reserve is the buyer's own signal.
    SignalEager,
    /// The `k` highest signals get `max(s, p*(s))`, the rest `p*(s)`.
    KUncapped(usize),
    /// The better of `SpaIgnore` and `SignalEager` at the given `gamma`;
    /// only resolvable from revenue estimates.
    Hybrid,
}

impl ReservePolicy {
    pub fn name(&self) -> String {
        match self {
            ReservePolicy::SpaIgnore => "spa_ignore".into(),
            ReservePolicy::SignalEager => "signal_eager".into(),
            ReservePolicy::KUncapped(k) => format!("k_uncapped_{k}"),
            ReservePolicy::Hybrid => "hybrid".into(),
        }
    }
}

/// Per-`(prior, gamma)` data needed to set reserves.
#[derive(Debug, Clone)]
pub struct ReserveContext {
    rule: PriceRule,
    monopoly: f64,
}

impl ReserveContext {
    pub fn new(prior: &Prior, gamma: f64, grid_size: usize) -> Result<Self> {
        Ok(ReserveContext { rule: PriceRule::new(prior, gamma, grid_size)?, monopoly: monopoly_price(prior, grid_size) })
    }

    /// Prior monopoly price used by [`ReservePolicy::SpaIgnore`].
    pub fn monopoly(&self) -> f64 {
        self.monopoly
    }

    /// Optimal single-buyer price for signal `s`.
    pub fn posted_price(&self, s: f64) -> f64 {
        self.rule.price(s).0
    }

    /// Fills `out` with the reserves of `policy`, given the posted prices
    /// `prices[i] = p*(signals[i])`.
    fn fill(&self, policy: ReservePolicy, signals: &[f64], prices: &[f64], out: &mut [f64]) -> Result<()> {
        let n = signals.len();
        match policy {
            ReservePolicy::SpaIgnore => out.fill(self.monopoly),
            ReservePolicy::SignalEager => out.copy_from_slice(signals),
            ReservePolicy::KUncapped(k) => {
                if k > n {
                    return Err(Error::InvalidParameter(format!("k = {k} exceeds the {n} buyers")));
                }
                for i in 0..n {
                    let rank = (0..n).filter(|&j| signals[j] > signals[i] || (signals[j] == signals[i] && j < i)).count();
                    out[i] = if rank < k { signals[i].max(prices[i]) } else { prices[i] };
                }
            }
            ReservePolicy::Hybrid => return Err(Error::UnresolvedHybrid),
        }
        Ok(())
    }

    /// Reserves of `policy` for the given signals, in buyer order.
    pub fn reserves(&self, policy: ReservePolicy, signals: &[f64]) -> Result<Vec<f64>> {
        let prices: Vec<f64> = signals.iter().map(|&s| self.posted_price(s)).collect();
        let mut out = vec![0.0; signals.len()];
        self.fill(policy, signals, &prices, &mut out)?;
        Ok(out)
    }
}

/// Reserves of `policy` for the given signals, in buyer order.
pub fn reserves_for(policy: ReservePolicy, signals: &[f64], prior: &Prior, gamma: f64, grid_size: usize) -> Result<Vec<f64>> {
    let (lo, hi) = prior.support();
    if let Some(s) = signals.iter().find(|&&s| !(s >= lo && s <= hi)) {
        return Err(Error::InvalidParameter(format!("signal {s} outside support [{lo}, {hi}]")));
    }
    ReserveContext::new(prior, gamma, grid_size)?.reserves(policy, signals)
}

/// Signal-revealing optimal auction: the highest non-negative virtual value
/// wins and pays the smallest value at which it would still win.
pub fn optimal_run<V: VirtualValue>(values: &[f64], psis: &[V]) -> Result<AuctionOutcome> {
    check_lengths(values.len(), psis.len())?;
    if values.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidParameter("values must not be NaN".into()));
    }
    Ok(AuctionOutcome::from_sale(values.len(), optimal_sale(values, psis)))
}

fn optimal_sale<V: VirtualValue>(values: &[f64], psis: &[V]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    let mut scores = [0.0f64; 16];
    let mut heap_scores = Vec::new();
    let scores: &mut [f64] = if values.len() <= 16 {
        &mut scores[..values.len()]
    } else {
        heap_scores.resize(values.len(), 0.0);
        &mut heap_scores
    };
    for (i, (&v, psi)) in values.iter().zip(psis).enumerate() {
        let z = psi.eval(v);
        scores[i] = z;
        if z >= 0.0 && best.is_none_or(|(_, bz)| z > bz) {
            best = Some((i, z));
        }
    }
    let (w, _) = best?;
    // Earlier buyers win ties, so the winner must beat them strictly.
    let before = scores[..w].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let after = scores[w + 1..].iter().copied().fold(0.0, f64::max);
    let mut pay = psis[w].pseudo_inverse(after);
    if before >= 0.0 {
        pay = pay.max(psis[w].strict_inverse(before));
    }
    Some((w, pay.min(values[w])))
}

/// A mechanism evaluated by Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mechanism {
    Optimal,
    Eager(ReservePolicy),
}

impl Mechanism {
    pub fn name(&self) -> String {
        match self {
            Mechanism::Optimal => "optimal".into(),
            Mechanism::Eager(p) => p.name(),
        }
    }
}

/// Monte-Carlo budget and seeding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSettings {
    pub n_buyers: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub grid_size: usize,
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Running means and co-moments of per-sample revenue vectors.
#[derive(Debug, Clone)]
struct Moments {
    n: f64,
    mean: Vec<f64>,
    comoment: Vec<f64>,
}

impl Moments {
    fn new(k: usize) -> Self {
        Moments { n: 0.0, mean: vec![0.0; k], comoment: vec![0.0; k * k] }
    }

    fn push(&mut self, x: &[f64], delta: &mut [f64]) {
        let k = self.mean.len();
        self.n += 1.0;
        for i in 0..k {
            delta[i] = x[i] - self.mean[i];
            self.mean[i] += delta[i] / self.n;
        }
        for i in 0..k {
            let after = x[i] - self.mean[i];
            for j in 0..k {
                self.comoment[i * k + j] += after * delta[j];
            }
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0.0 {
            return;
        }
        let k = self.mean.len();
        let n = self.n + other.n;
        let d: Vec<f64> = (0..k).map(|i| other.mean[i] - self.mean[i]).collect();
        let w = self.n * other.n / n;
        for i in 0..k {
            for j in 0..k {
                self.comoment[i * k + j] += other.comoment[i * k + j] + d[i] * d[j] * w;
            }
        }
        for i in 0..k {
            self.mean[i] += d[i] * other.n / n;
        }
        self.n = n;
    }
}

/// Joint Monte-Carlo revenue estimates for several mechanisms on common
/// random numbers.
#[derive(Debug, Clone)]
pub struct McStudy {
    mechanisms: Vec<Mechanism>,
    n: f64,
    mean: Vec<f64>,
    cov: Vec<f64>,
}

impl McStudy {
    pub fn mechanisms(&self) -> &[Mechanism] {
        &self.mechanisms
    }

    pub fn index_of(&self, m: Mechanism) -> Option<usize> {
        self.mechanisms.iter().position(|&x| x == m)
    }

    pub fn samples(&self) -> usize {
        self.n as usize
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.mean[i]
    }

    /// Sample covariance of the per-sample revenues of mechanisms `i`, `j`.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.mechanisms.len() + j]
    }

    pub fn estimate(&self, i: usize) -> McEstimate {
        McEstimate { mean: self.mean[i], stderr: (self.covariance(i, i) / self.n).sqrt() }
    }

    /// Standard error of `mean(i) - mean(j)`.
    pub fn diff_stderr(&self, i: usize, j: usize) -> f64 {
        let v = self.covariance(i, i) + self.covariance(j, j) - 2.0 * self.covariance(i, j);
        (v.max(0.0) / self.n).sqrt()
    }

    /// `mean(i) / mean(j)` with a delta-method standard error.
    pub fn ratio(&self, i: usize, j: usize) -> McEstimate {
        let (a, b) = (self.mean[i], self.mean[j]);
        let r = a / b;
        let rel = self.covariance(i, i) / (a * a) + self.covariance(j, j) / (b * b) - 2.0 * self.covariance(i, j) / (a * b);
        McEstimate { mean: r, stderr: r.abs() * (rel.max(0.0) / self.n).sqrt() }
    }
}

struct Simulator<'a> {
    prior: &'a Prior,
    gamma: f64,
    n_buyers: usize,
    columns: &'a [Mechanism],
    reserves: ReserveContext,
    hull: Option<HullTable>,
}

impl Simulator<'_> {
    fn run_chunk(&self, seed: u64, chunk: usize, count: usize) -> Result<Moments> {
        let n = self.n_buyers;
        let k = self.columns.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk as u64);
        let mut signals = vec![0.0; n];
        let mut values = vec![0.0; n];
        let mut prices = vec![0.0; n];
        let mut reserves = vec![0.0; n];
        let mut revenue = vec![0.0; k];
        let mut delta = vec![0.0; k];
        let mut psis: Vec<SignalHull<'_>> = Vec::with_capacity(n);
        let mut moments = Moments::new(k);
        let keep = 1.0 - self.gamma;
        for _ in 0..count {
            for i in 0..n {
                let (u_signal, u_truth, u_value): (f64, f64, f64) = rng.gen();
                let s = self.prior.quantile_unchecked(u_signal);
                signals[i] = s;
                values[i] = if u_truth < keep { s } else { self.prior.quantile_unchecked(u_value) };
                prices[i] = self.reserves.posted_price(s);
            }
            if let Some(table) = &self.hull {
                psis.clear();
                psis.extend(signals.iter().map(|&s| table.for_signal(s)));
            }
            for (c, m) in self.columns.iter().enumerate() {
                let sale = match *m {
                    Mechanism::Optimal => optimal_sale(&values, &psis),
                    Mechanism::Eager(policy) => {
                        self.reserves.fill(policy, &signals, &prices, &mut reserves)?;
                        eager_sale(&values, &reserves)
                    }
                };
                revenue[c] = sale.map_or(0.0, |(_, p)| p);
            }
            moments.push(&revenue, &mut delta);
        }
        Ok(moments)
    }
}

/// Monte-Carlo revenue of several mechanisms on common random numbers.
///
/// Each buyer's signal is drawn from the prior and the value equals the
/// signal with probability `1 - gamma`, otherwise it is an independent
/// prior draw. Samples come in chunks of [`MC_CHUNK`], chunk `c` using the
/// ChaCha8 stream `c` of `seed`, and chunk statistics are merged in chunk
/// order, so results do not depend on the thread count. `Hybrid` reports
/// whichever of `SpaIgnore` and `SignalEager` has the higher mean.
pub fn mc_study(prior: &Prior, gamma: f64, mechanisms: &[Mechanism], settings: McSettings) -> Result<McStudy> {
    if settings.n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
    }
    if settings.n_buyers == 0 {
        return Err(Error::InvalidParameter("n_buyers must be at least 1".into()));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let hybrid = Mechanism::Eager(ReservePolicy::Hybrid);
    let spa = Mechanism::Eager(ReservePolicy::SpaIgnore);
    let se = Mechanism::Eager(ReservePolicy::SignalEager);
    let mut columns: Vec<Mechanism> = Vec::new();
    for &m in mechanisms {
        let needed: &[Mechanism] = if m == hybrid { &[spa, se] } else { std::slice::from_ref(&m) };
        for &x in needed {
            if !columns.contains(&x) {
                columns.push(x);
            }
        }
    }
    let sim = Simulator {
        prior,
        gamma,
        n_buyers: settings.n_buyers,
        columns: &columns,
        reserves: ReserveContext::new(prior, gamma, settings.grid_size)?,
        hull: if columns.contains(&Mechanism::Optimal) { Some(HullTable::new(prior, gamma, settings.grid_size)?) } else { None },
    };
    let n_chunks = settings.n_samples.div_ceil(MC_CHUNK);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Moments>>>> = Mutex::new((0..n_chunks).map(|_| None).collect());
    let workers = std::thread::available_parallelism().map_or(1, |p| p.get()).min(n_chunks);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let c = next.fetch_add(1, Ordering::Relaxed);
                if c >= n_chunks {
                    break;
                }
                let count = MC_CHUNK.min(settings.n_samples - c * MC_CHUNK);
                let m = sim.run_chunk(settings.seed, c, count);
                results.lock().expect("no poisoned workers")[c] = Some(m);
            });
        }
    });
    let mut total = Moments::new(columns.len());
    for m in results.into_inner().expect("no poisoned workers") {
        total.merge(&m.expect("every chunk ran")?);
    }
    let k = columns.len();
    let denom = (total.n - 1.0).max(1.0);
    let base_cov: Vec<f64> = total.comoment.iter().map(|c| c / denom).collect();
    let map: Vec<usize> = mechanisms
        .iter()
        .map(|&m| {
            if m == hybrid {
                let (a, b) = (columns.iter().position(|&x| x == spa).expect("added"), columns.iter().position(|&x| x == se).expect("added"));
                if total.mean[b] > total.mean[a] { b } else { a }
            } else {
                columns.iter().position(|&x| x == m).expect("added")
            }
        })
        .collect();
    let mut cov = Vec::with_capacity(map.len() * map.len());
    for &i in &map {
        for &j in &map {
            cov.push(base_cov[i * k + j]);
        }
    }
    Ok(McStudy { mechanisms: mechanisms.to_vec(), n: total.n, mean: map.iter().map(|&i| total.mean[i]).collect(), cov })
}

/// Monte-Carlo revenue of a single mechanism.
pub fn mc_revenue(prior: &Prior, gamma: f64, mechanism: Mechanism, settings: McSettings) -> Result<McEstimate> {
    Ok(mc_study(prior, gamma, &[mechanism], settings)?.estimate(0))
}

/// `G(x) = \int_lo^x v f(v) dv`, tabulated once per prior.
#[derive(Debug, Clone)]
struct PartialMean {
    grid: Vec<f64>,
    density: Vec<f64>,
    cumulative: Vec<f64>,
}

impl PartialMean {
    fn new(prior: &Prior) -> Self {
        let (lo, hi) = prior.support();
        let grid = prior.blend_grid(lo, hi, PARTIAL_MEAN_NODES);
        let density: Vec<f64> = grid.iter().map(|&v| v * finite_pdf(prior, v)).collect();
        let cumulative = cumulative_trapezoid(&grid, &density);
        PartialMean { grid, density, cumulative }
    }

    fn at(&self, prior: &Prior, x: f64) -> f64 {
        let x = x.clamp(self.grid[0], self.grid[self.grid.len() - 1]);
        let k = locate_cell(&self.grid, x);
        let y = x * finite_pdf(prior, x);
        self.cumulative[k] + 0.5 * (x - self.grid[k]) * (self.density[k] + y)
    }
}

fn finite_pdf(prior: &Prior, v: f64) -> f64 {
    let f = prior.pdf(v);
    if f.is_finite() { f } else { 0.0 }
}

/// Conditional expected revenue of two-buyer eager auctions given the
/// signal pair, computed without sampling.
#[derive(Debug, Clone)]
pub struct ExactTwoBuyer {
    prior: Prior,
    gamma: f64,
    reserves: ReserveContext,
    partial_mean: PartialMean,
}

impl ExactTwoBuyer {
    pub fn new(prior: &Prior, gamma: f64, grid_size: usize) -> Result<Self> {
        Ok(ExactTwoBuyer {
            prior: prior.clone(),
            gamma,
            reserves: ReserveContext::new(prior, gamma, grid_size)?,
            partial_mean: PartialMean::new(prior),
        })
    }

    /// Expected revenue of `policy` given signals `(s1, s2)`.
    pub fn revenue(&self, signals: (f64, f64), policy: ReservePolicy) -> Result<f64> {
        let r = self.reserves.reserves(policy, &[signals.0, signals.1])?;
        Ok(self.revenue_with_reserves(signals, (r[0], r[1])))
    }

    /// Expected revenue of the eager auction with fixed reserves, averaging
    /// over whether each buyer's signal is truthful.
    pub fn revenue_with_reserves(&self, signals: (f64, f64), reserves: (f64, f64)) -> f64 {
        let g = self.gamma;
        let (s1, s2) = signals;
        let (r1, r2) = reserves;
        let both_atoms = eager_sale(&[s1, s2], &[r1, r2]).map_or(0.0, |(_, p)| p);
        let atom_first = self.one_fixed(s1, s1 >= r1, r1, r2);
        let atom_second = self.one_fixed(s2, s2 >= r2, r2, r1);
        let both_drawn = self.both_drawn(r1, r2);
        (1.0 - g) * (1.0 - g) * both_atoms + (1.0 - g) * g * (atom_first + atom_second) + g * g * both_drawn
    }

    /// Expected revenue when one buyer's value is `v` (active or not) with
    /// reserve `r_fixed` and the other's is a prior draw facing `r_other`.
    fn one_fixed(&self, v: f64, active: bool, r_fixed: f64, r_other: f64) -> f64 {
        let p = &self.prior;
        if !active {
            return r_other * p.sf(r_other);
        }
        let top = r_other.max(v);
        let mid = r_fixed.clamp(r_other, top);
        let fixed_wins = p.cdf(r_other) * r_fixed
            + r_fixed * (p.cdf(mid) - p.cdf(r_other))
            + self.partial_mean.at(p, top)
            - self.partial_mean.at(p, mid);
        fixed_wins + top * p.sf(top)
    }

    fn both_drawn(&self, r1: f64, r2: f64) -> f64 {
        let p = &self.prior;
        let (lo, hi) = p.support();
        let mut cuts = vec![lo, hi];
        cuts.extend([r1, r2].into_iter().filter(|&r| r > lo && r < hi));
        let cuts = merge_grid(cuts);
        cuts.windows(2)
            .map(|w| {
                let active = 0.5 * (w[0] + w[1]) >= r1;
                trapezoid(|v| self.one_fixed(v, active, r1, r2) * finite_pdf(p, v), w[0], w[1], EXACT_NODES)
            })
            .sum()
    }
}

/// Expected two-buyer revenue of an eager `policy` given the signal pair.
pub fn exact_two_buyer_revenue(prior: &Prior, gamma: f64, signals: (f64, f64), policy: ReservePolicy, grid_size: usize) -> Result<f64> {
    ExactTwoBuyer::new(prior, gamma, grid_size)?.revenue(signals, policy)
}

/// Mechanism for a single buyer with value 1 (probability `alpha`) or 2,
/// which always sells and charges a signal-dependent payment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullSurplus {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    /// `P(s = 1 | v = 1)` and `P(s = 1 | v = 2)`.
    pub q: (f64, f64),
    /// Signal weights with conditional means 1 given `v = 1` and 0 given
    /// `v = 2`.
    pub weights: (f64, f64),
    /// `payments[v - 1][s - 1]`.
    pub payments: [[f64; 2]; 2],
    /// `utility[v - 1][report - 1]`: interim utility of type `v` reporting.
    pub utility: [[f64; 2]; 2],
    pub revenue: f64,
}

impl FullSurplus {
    pub fn incentive_compatible(&self) -> bool {
        self.utility[0][0] > self.utility[0][1] && self.utility[1][1] > self.utility[1][0]
    }

    pub fn individually_rational(&self) -> bool {
        self.utility[0][0] > 0.0 && self.utility[1][1] > 0.0
    }

    /// `E[v] - epsilon`.
    pub fn target_revenue(&self) -> f64 {
        2.0 - self.alpha - self.epsilon
    }
}

/// Builds and audits the full-surplus mechanism.
pub fn full_surplus_demo(alpha: f64, gamma: f64, epsilon: f64) -> Result<FullSurplus> {
    for (name, x) in [("alpha", alpha), ("epsilon", epsilon)] {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {x}")));
        }
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    let q1 = 1.0 - gamma + gamma * alpha;
    let q2 = gamma * alpha;
    // Cramer's rule on [[q1, 1 - q1], [q2, 1 - q2]] (c1, c2) = (1, 0).
    let det = q1 * (1.0 - q2) - q2 * (1.0 - q1);
    if det.abs() <= 1e-14 {
        return Err(Error::Singular(format!("signal is uninformative (determinant {det})")));
    }
    let c1 = (1.0 - q2) / det;
    let c2 = -q2 / det;
    let w = [c1, c2];
    let mut payments = [[0.0; 2]; 2];
    for s in 0..2 {
        payments[0][s] = 1.0 - epsilon + 2.0 * (1.0 - w[s]);
        payments[1][s] = 2.0 - epsilon + 2.0 * w[s];
    }
    let signal_law = [[q1, 1.0 - q1], [q2, 1.0 - q2]];
    let mut utility = [[0.0; 2]; 2];
    for v in 0..2 {
        for report in 0..2 {
            let expected_pay: f64 = (0..2).map(|s| signal_law[v][s] * payments[report][s]).sum();
            utility[v][report] = (v + 1) as f64 - expected_pay;
        }
    }
    let type_law = [alpha, 1.0 - alpha];
    let revenue: f64 = (0..2).map(|v| type_law[v] * (0..2).map(|s| signal_law[v][s] * payments[v][s]).sum::<f64>()).sum();
    Ok(FullSurplus { alpha, gamma, epsilon, q: (q1, q2), weights: (c1, c2), payments, utility, revenue })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eager_examples() {
        let o = eager_run(&[0.7, 0.5], &[0.6, 0.6]).unwrap();
        assert_eq!((o.winner, o.payment), (Some(0), 0.6));
        let o = eager_run(&[0.7, 0.65], &[0.6, 0.6]).unwrap();
        assert_eq!((o.winner, o.payment), (Some(0), 0.65));
        assert_eq!(o.per_buyer_payments, vec![0.65, 0.0]);
        let o = eager_run(&[0.5, 0.5], &[0.6, 0.7]).unwrap();
        assert_eq!((o.winner, o.payment), (None, 0.0));
        assert!(eager_run(&[0.5], &[0.6, 0.7]).is_err());
        assert!(eager_run(&[f64::NAN], &[0.6]).is_err());
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<[f64; 2]> = (0..50).map(|i| [(i as f64).sin(), (i as f64 * 0.3).cos()]).collect();
        let mut d = [0.0; 2];
        let mut all = Moments::new(2);
        xs.iter().for_each(|x| all.push(x, &mut d));
        let mut a = Moments::new(2);
        let mut b = Moments::new(2);
        xs[..17].iter().for_each(|x| a.push(x, &mut d));
        xs[17..].iter().for_each(|x| b.push(x, &mut d));
        a.merge(&b);
        for i in 0..4 {
            assert!((a.comoment[i] - all.comoment[i]).abs() < 1e-12);
        }
        assert!((a.mean[1] - all.mean[1]).abs() < 1e-14);
    }

    #[test]
    fn full_surplus_example() {
        let fs = full_surplus_demo(0.5, 0.5, 0.1).unwrap();
        assert!((fs.weights.0 - 1.5).abs() < 1e-12 && (fs.weights.1 + 0.5).abs() < 1e-12);
        let want = [[-0.1, 3.9], [4.9, 0.9]];
        for v in 0..2 {
            for s in 0..2 {
                assert!((fs.payments[v][s] - want[v][s]).abs() < 1e-12);
            }
        }
        assert!((fs.revenue - 1.4).abs() < 1e-12);
        assert!(matches!(full_surplus_demo(0.5, 1.0, 0.1), Err(Error::Singular(_))));
    }
}
