//! Reproducible experiments behind the `hallmech` command line.
//!
//! Each command resolves an [`ExperimentConfig`] (JSON file, then flags),
//! computes its table through the library and renders CSV preceded by a
//! `# schema=1` line and a comment recording every resolved setting.
//! Output is a pure function of the configuration, so re-running a command
//! reproduces its file byte for byte.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::auctions::{full_surplus_demo, mc_study, FullSurplus, McEstimate, McSettings, McStudy, Mechanism, ReservePolicy};
use crate::distributions::Prior;
use crate::error::{Error, Result};
use crate::ironing::{ironed_virtual, monteiro_oracle, truncated_iron, VirtualValue};
use crate::numerics::linspace;
use crate::posterior::HallucinationPosterior;
use crate::pricing::{brute_force_price, count_price_segments, price_curve, PriceRow, CURVE_POINTS};

/// Version tag written as the first line of every CSV.
pub const SCHEMA: &str = "# schema=1";

/// Default Monte-Carlo budget.
pub const DEFAULT_SAMPLES: usize = 100_000;

/// Default grid size.
pub const DEFAULT_GRID: usize = 2000;

/// Default seed.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Prior of the non-regular ironing counterexample.
pub const IRREGULAR_PRIOR: &str = "mix:0.8*truncnormal:0.51,0.05,0.5,0.52+0.2*uniform:0,1";

/// The same mixture with the alternative bump parameters `(0.1, 0.04)`.
pub const IRREGULAR_PRIOR_ALT: &str = "mix:0.8*truncnormal:0.1,0.04,0.5,0.52+0.2*uniform:0,1";

/// Prior whose optimal price curve has more than four regimes.
pub const MANY_REGIMES_PRIOR: &str = "mix:0.75*beta:4,6+0.25*beta:4,1";

/// Hallucination rate at which [`MANY_REGIMES_PRIOR`] shows five regimes.
pub const MANY_REGIMES_GAMMA: f64 = 0.75;

/// Tolerance for merging prices into constant or identity segments.
pub const SEGMENT_TOL: f64 = 1e-3;

/// Thirteen hallucination rates from 0.05 to 0.95.
pub fn default_gamma_grid() -> Vec<f64> {
    (0..13).map(|k| ((0.05 + 0.075 * k as f64) * 1e6).round() / 1e6).collect()
}

/// Settings shared by all commands. Absent fields take per-command
/// defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub prior: Option<String>,
    pub gamma: Option<Vec<f64>>,
    pub sigma: Option<f64>,
    pub signal: Option<f64>,
    pub n_buyers: Option<usize>,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
    pub grid_size: Option<usize>,
    pub out: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub epsilon: Option<f64>,
}

impl ExperimentConfig {
    /// Reads a flat JSON document.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config JSON: {e}")))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overridden_by(mut self, other: ExperimentConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(prior, gamma, sigma, signal, n_buyers, n_samples, seed, grid_size, out, alpha, epsilon);
        self
    }

    fn prior_or(&self, default: &str) -> Result<Prior> {
        Prior::parse(self.prior.as_deref().unwrap_or(default))
    }

    fn gammas_or(&self, default: Vec<f64>) -> Result<Vec<f64>> {
        let gammas = self.gamma.clone().unwrap_or(default);
        if gammas.is_empty() {
            return Err(Error::Config("gamma grid is empty".into()));
        }
        if let Some(g) = gammas.iter().find(|&&g| !(g > 0.0 && g < 1.0)) {
            return Err(Error::Config(format!("gamma {g} outside (0, 1)")));
        }
        Ok(gammas)
    }

    fn single_gamma_or(&self, default: f64) -> Result<f64> {
        let gammas = self.gammas_or(vec![default])?;
        if gammas.len() != 1 {
            return Err(Error::Config(format!("this command takes one gamma, got {}", gammas.len())));
        }
        Ok(gammas[0])
    }

    fn grid(&self) -> Result<usize> {
        let g = self.grid_size.unwrap_or(DEFAULT_GRID);
        if g < 100 {
            return Err(Error::Config(format!("grid size {g} is below the minimum of 100")));
        }
        Ok(g)
    }

    fn samples(&self) -> Result<usize> {
        let n = self.n_samples.unwrap_or(DEFAULT_SAMPLES);
        if n == 0 {
            return Err(Error::Config("n_samples must be at least 1".into()));
        }
        Ok(n)
    }

    fn buyers(&self) -> Result<usize> {
        let n = self.n_buyers.unwrap_or(2);
        if n == 0 {
            return Err(Error::Config("n_buyers must be at least 1".into()));
        }
        Ok(n)
    }

    fn sigma_or(&self, default: f64) -> Result<f64> {
        let s = self.sigma.unwrap_or(default);
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {s}")));
        }
        Ok(s)
    }
}

/// Formats a number with the shortest representation that round-trips;
/// NaN becomes an empty cell.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

/// One row of the virtual-value table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualValueRow {
    pub v: f64,
    /// Unironed posterior virtual value; undefined at the signal.
    pub pre_iron: Option<f64>,
    pub ironed: f64,
    pub oracle: f64,
}

/// Unironed, ironed and oracle virtual values on the value grid plus the
/// signal.
pub fn virtual_value_rows(prior: &Prior, gamma: f64, signal: f64, grid_size: usize) -> Result<Vec<VirtualValueRow>> {
    let psi = ironed_virtual(prior, gamma, signal, grid_size)?;
    let post = HallucinationPosterior::new(prior, gamma, signal)?;
    let oracle = monteiro_oracle(&post, grid_size)?;
    Ok(oracle
        .grid()
        .iter()
        .map(|&v| VirtualValueRow {
            v,
            pre_iron: if v == signal {
                None
            } else if v < signal {
                Some(prior.gamma_virtual(v, gamma))
            } else {
                Some(prior.virtual_value(v))
            },
            ironed: psi.eval(v),
            oracle: oracle.ell(v),
        })
        .collect())
}

/// Revenue of every auction at one hallucination rate.
#[derive(Debug, Clone)]
pub struct RatioRow {
    pub gamma: f64,
    pub study: McStudy,
    pub n_buyers: usize,
    /// `k` with the highest k-uncapped revenue (smallest on ties).
    pub best_k: usize,
}

impl RatioRow {
    fn idx(&self, m: Mechanism) -> usize {
        self.study.index_of(m).expect("mechanism simulated")
    }

    pub fn optimal(&self) -> McEstimate {
        self.study.estimate(self.idx(Mechanism::Optimal))
    }

    /// Revenue of `policy` divided by the optimal revenue.
    pub fn ratio(&self, policy: ReservePolicy) -> McEstimate {
        self.study.ratio(self.idx(Mechanism::Eager(policy)), self.idx(Mechanism::Optimal))
    }

    pub fn best_k_policy(&self) -> ReservePolicy {
        ReservePolicy::KUncapped(self.best_k)
    }

    /// Standard error of the revenue difference between two mechanisms.
    pub fn diff_stderr(&self, a: Mechanism, b: Mechanism) -> f64 {
        self.study.diff_stderr(self.idx(a), self.idx(b))
    }

    pub fn revenue(&self, m: Mechanism) -> McEstimate {
        self.study.estimate(self.idx(m))
    }

    /// Eager policies reported for this row.
    pub fn eager_policies(&self) -> Vec<ReservePolicy> {
        let mut out = vec![ReservePolicy::SignalEager, ReservePolicy::SpaIgnore, ReservePolicy::Hybrid];
        out.extend((0..=self.n_buyers).map(ReservePolicy::KUncapped));
        out
    }
}

/// Mechanisms simulated for each revenue-ratio row.
pub fn ratio_mechanisms(n_buyers: usize) -> Vec<Mechanism> {
    let mut m = vec![Mechanism::Optimal, Mechanism::Eager(ReservePolicy::SignalEager), Mechanism::Eager(ReservePolicy::SpaIgnore)];
    m.extend((0..=n_buyers).map(|k| Mechanism::Eager(ReservePolicy::KUncapped(k))));
    m.push(Mechanism::Eager(ReservePolicy::Hybrid));
    m
}

/// Runs the revenue study at each `gamma`, all on the same seed.
pub fn revenue_ratio_rows(prior: &Prior, gammas: &[f64], settings: McSettings) -> Result<Vec<RatioRow>> {
    let mechanisms = ratio_mechanisms(settings.n_buyers);
    gammas
        .iter()
        .map(|&gamma| {
            let study = mc_study(prior, gamma, &mechanisms, settings)?;
            let mut best_k = 0;
            for k in 1..=settings.n_buyers {
                let m = |k| study.mean(study.index_of(Mechanism::Eager(ReservePolicy::KUncapped(k))).expect("simulated"));
                if m(k) > m(best_k) {
                    best_k = k;
                }
            }
            Ok(RatioRow { gamma, study, n_buyers: settings.n_buyers, best_k })
        })
        .collect()
}

/// Truncated ironing of `gamma F` on `[lo, s]` against the posterior oracle.
#[derive(Debug, Clone)]
pub struct GapReport {
    /// `(v, truncated ironing, oracle)` at oracle sample points below `s`.
    pub rows: Vec<(f64, f64, f64)>,
    pub max_gap: f64,
    pub argmax: f64,
}

pub fn ironing_gap(prior: &Prior, gamma: f64, signal: f64, grid_size: usize) -> Result<GapReport> {
    let iron = truncated_iron(prior, gamma, signal, grid_size)?;
    let post = HallucinationPosterior::new(prior, gamma, signal)?;
    let oracle = monteiro_oracle(&post, grid_size)?;
    let rows: Vec<(f64, f64, f64)> =
        oracle.sample_points().into_iter().filter(|&v| v < signal).map(|v| (v, iron.eval(v), oracle.ell(v))).collect();
    let (mut max_gap, mut argmax) = (0.0, f64::NAN);
    for &(v, a, b) in &rows {
        if (a - b).abs() > max_gap {
            max_gap = (a - b).abs();
            argmax = v;
        }
    }
    Ok(GapReport { rows, max_gap, argmax })
}

/// Brute-force optimal prices over a signal grid and their segment count.
#[derive(Debug, Clone)]
pub struct RegimeReport {
    pub rows: Vec<(f64, f64)>,
    pub segments: usize,
}

pub fn regime_report(prior: &Prior, gamma: f64, n_points: usize, grid_size: usize) -> Result<RegimeReport> {
    let (lo, hi) = prior.support();
    let signals = linspace(lo, hi, n_points);
    let prices = signals.iter().map(|&s| brute_force_price(prior, gamma, s, grid_size).map(|r| r.0)).collect::<Result<Vec<f64>>>()?;
    let segments = count_price_segments(&signals, &prices, SEGMENT_TOL);
    Ok(RegimeReport { rows: signals.into_iter().zip(prices).collect(), segments })
}

fn header(out: &mut String, command: &str, settings: &[(&str, String)]) {
    out.push_str(SCHEMA);
    out.push('\n');
    let _ = write!(out, "# command={command}");
    for (k, v) in settings {
        let _ = write!(out, " {k}={v}");
    }
    out.push('\n');
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";")
}

/// CSV for the `virtual-values` command.
pub fn cmd_virtual_values(cfg: &ExperimentConfig) -> Result<String> {
    let prior = cfg.prior_or("uniform:0,1")?;
    let gamma = cfg.single_gamma_or(0.75)?;
    let signal = cfg.signal.unwrap_or(0.4);
    let grid = cfg.grid()?;
    let rows = virtual_value_rows(&prior, gamma, signal, grid)?;
    let mut out = String::new();
    header(&mut out, "virtual-values", &[("prior", prior.token().into()), ("gamma", num(gamma)), ("signal", num(signal)), ("grid", grid.to_string())]);
    out.push_str("v,pre_iron,ironed,oracle\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", num(r.v), r.pre_iron.map(num).unwrap_or_default(), num(r.ironed), num(r.oracle));
    }
    Ok(out)
}

/// CSV for the `price-curve` command.
pub fn cmd_price_curve(cfg: &ExperimentConfig) -> Result<String> {
    let prior = cfg.prior_or("beta:1,2")?;
    let gamma = cfg.single_gamma_or(0.77)?;
    let sigma = cfg.sigma_or(0.1)?;
    let grid = cfg.grid()?;
    let rows: Vec<PriceRow> = price_curve(&prior, gamma, sigma, CURVE_POINTS, grid)?;
    let mut out = String::new();
    header(
        &mut out,
        "price-curve",
        &[("prior", prior.token().into()), ("gamma", num(gamma)), ("sigma", num(sigma)), ("points", CURVE_POINTS.to_string()), ("grid", grid.to_string())],
    );
    out.push_str("s,p_hall,p_noise,p_hall_noise,regime\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", num(r.s), num(r.p_hall), num(r.p_noise), num(r.p_hall_noise), r.regime.as_str());
    }
    Ok(out)
}

/// CSV for the `revenue-ratio` command.
pub fn cmd_revenue_ratio(cfg: &ExperimentConfig) -> Result<String> {
    let prior = cfg.prior_or("beta:5,1")?;
    let gammas = cfg.gammas_or(default_gamma_grid())?;
    let settings = McSettings { n_buyers: cfg.buyers()?, n_samples: cfg.samples()?, seed: cfg.seed.unwrap_or(DEFAULT_SEED), grid_size: cfg.grid()? };
    let rows = revenue_ratio_rows(&prior, &gammas, settings)?;
    let mut out = String::new();
    header(
        &mut out,
        "revenue-ratio",
        &[
            ("prior", prior.token().into()),
            ("gamma", join(&gammas)),
            ("buyers", settings.n_buyers.to_string()),
            ("samples", settings.n_samples.to_string()),
            ("seed", settings.seed.to_string()),
            ("grid", settings.grid_size.to_string()),
        ],
    );
    let mut cols = vec!["gamma".to_string(), "optimal_revenue".into(), "optimal_stderr".into(), "ratio_signal_eager".into(), "ratio_monopoly_eager".into()];
    cols.extend((0..=settings.n_buyers).map(|k| format!("ratio_k_uncapped_{k}")));
    cols.extend(["ratio_best_k_uncapped", "best_k", "ratio_spa_ignore", "ratio_hybrid"].map(String::from));
    out.push_str(&cols.join(","));
    out.push('\n');
    for r in &rows {
        let opt = r.optimal();
        let mut cells = vec![num(r.gamma), num(opt.mean), num(opt.stderr), num(r.ratio(ReservePolicy::SignalEager).mean), num(r.ratio(ReservePolicy::KUncapped(0)).mean)];
        cells.extend((0..=settings.n_buyers).map(|k| num(r.ratio(ReservePolicy::KUncapped(k)).mean)));
        cells.push(num(r.ratio(r.best_k_policy()).mean));
        cells.push(r.best_k.to_string());
        cells.push(num(r.ratio(ReservePolicy::SpaIgnore).mean));
        cells.push(num(r.ratio(ReservePolicy::Hybrid).mean));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// The two counterexample tables.
pub fn cmd_counterexamples(cfg: &ExperimentConfig) -> Result<(String, String)> {
    let prior = cfg.prior_or(IRREGULAR_PRIOR)?;
    let gamma = cfg.single_gamma_or(0.9)?;
    let signal = cfg.signal.unwrap_or(0.53);
    let grid = cfg.grid()?;
    let gap = ironing_gap(&prior, gamma, signal, grid)?;
    let mut first = String::new();
    header(
        &mut first,
        "counterexamples/ironing-gap",
        &[
            ("prior", prior.token().into()),
            ("gamma", num(gamma)),
            ("signal", num(signal)),
            ("grid", grid.to_string()),
            ("max_gap", num(gap.max_gap)),
            ("at", num(gap.argmax)),
        ],
    );
    first.push_str("v,truncated_iron,oracle,gap\n");
    for &(v, a, b) in &gap.rows {
        let _ = writeln!(first, "{},{},{},{}", num(v), num(a), num(b), num((a - b).abs()));
    }

    let regimes_prior = Prior::parse(MANY_REGIMES_PRIOR)?;
    let report = regime_report(&regimes_prior, MANY_REGIMES_GAMMA, CURVE_POINTS, grid)?;
    let mut second = String::new();
    header(
        &mut second,
        "counterexamples/regimes",
        &[
            ("prior", regimes_prior.token().into()),
            ("gamma", num(MANY_REGIMES_GAMMA)),
            ("points", CURVE_POINTS.to_string()),
            ("grid", grid.to_string()),
            ("regimes", report.segments.to_string()),
        ],
    );
    second.push_str("s,p_star\n");
    for &(s, p) in &report.rows {
        let _ = writeln!(second, "{},{}", num(s), num(p));
    }
    Ok((first, second))
}

/// Text report for the `full-surplus` command.
pub fn cmd_full_surplus(cfg: &ExperimentConfig) -> Result<String> {
    let alpha = cfg.alpha.unwrap_or(0.5);
    let gamma = match cfg.gamma.as_deref() {
        None => 0.5,
        Some([g]) => *g,
        Some(gs) => return Err(Error::Config(format!("this command takes one gamma, got {}", gs.len()))),
    };
    let epsilon = cfg.epsilon.unwrap_or(0.1);
    let fs: FullSurplus = full_surplus_demo(alpha, gamma, epsilon)?;
    let mut out = String::new();
    header(&mut out, "full-surplus", &[("alpha", num(alpha)), ("gamma", num(gamma)), ("epsilon", num(epsilon))]);
    let _ = writeln!(out, "q1={} q2={}", num(fs.q.0), num(fs.q.1));
    let _ = writeln!(out, "c1={} c2={}", num(fs.weights.0), num(fs.weights.1));
    out.push_str("v,s,payment\n");
    for v in 0..2 {
        for s in 0..2 {
            let _ = writeln!(out, "{},{},{}", v + 1, s + 1, num(fs.payments[v][s]));
        }
    }
    for v in 0..2 {
        for r in 0..2 {
            let _ = writeln!(out, "U({};{})={}", v + 1, r + 1, num(fs.utility[v][r]));
        }
    }
    let _ = writeln!(out, "incentive_compatible={}", fs.incentive_compatible());
    let _ = writeln!(out, "individually_rational={}", fs.individually_rational());
    let _ = writeln!(out, "revenue={} target={}", num(fs.revenue), num(fs.target_revenue()));
    Ok(out)
}

#[derive(Debug, Parser)]
#[command(name = "hallmech", version, about = "Pricing and auction experiments for buyers with hallucinated signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Unironed, ironed and oracle virtual values for one signal.
    VirtualValues(CommonArgs),
    /// Optimal prices under hallucinated, noisy and hybrid signals.
    PriceCurve(CommonArgs),
    /// Revenue of eager auctions relative to the optimal auction.
    RevenueRatio(CommonArgs),
    /// The non-regular ironing gap and the five-regime price curve.
    Counterexamples(CommonArgs),
    /// Full-surplus extraction with hidden signals on a two-point prior.
    FullSurplus(SurplusArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Prior token such as `beta:5,1` or `lognormal:0,1.8`.
    #[arg(long)]
    prior: Option<String>,
    /// Hallucination rate(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    /// Standard deviation of the signal noise.
    #[arg(long)]
    sigma: Option<f64>,
    /// Signal value.
    #[arg(long)]
    signal: Option<f64>,
    /// Number of buyers.
    #[arg(long)]
    buyers: Option<usize>,
    /// Monte-Carlo samples per hallucination rate.
    #[arg(long)]
    samples: Option<usize>,
    /// Random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Grid size for ironing and price searches.
    #[arg(long)]
    grid: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with default settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SurplusArgs {
    /// Probability of the low value.
    #[arg(long)]
    alpha: Option<f64>,
    /// Hallucination rate.
    #[arg(long)]
    gamma: Option<f64>,
    /// Utility left to each type.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn resolve(config: &Option<PathBuf>, flags: ExperimentConfig) -> Result<ExperimentConfig> {
    let base = match config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::default(),
    };
    Ok(base.overridden_by(flags))
}

impl CommonArgs {
    fn into_config(self) -> Result<ExperimentConfig> {
        let flags = ExperimentConfig {
            prior: self.prior,
            gamma: self.gamma,
            sigma: self.sigma,
            signal: self.signal,
            n_buyers: self.buyers,
            n_samples: self.samples,
            seed: self.seed,
            grid_size: self.grid,
            out: self.out,
            ..Default::default()
        };
        resolve(&self.config, flags)
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Config(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::Config(format!("stdout: {e}")))
        }
    }
}

/// `path` with `suffix` appended to its file stem.
fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::VirtualValues(a) => {
            let cfg = a.into_config()?;
            write_output(cfg.out.as_deref(), &cmd_virtual_values(&cfg)?)
        }
        Command::PriceCurve(a) => {
            let cfg = a.into_config()?;
            write_output(cfg.out.as_deref(), &cmd_price_curve(&cfg)?)
        }
        Command::RevenueRatio(a) => {
            let cfg = a.into_config()?;
            write_output(cfg.out.as_deref(), &cmd_revenue_ratio(&cfg)?)
        }
        Command::Counterexamples(a) => {
            let cfg = a.into_config()?;
            let (gap, regimes) = cmd_counterexamples(&cfg)?;
            match cfg.out.as_deref() {
                Some(p) => {
                    write_output(Some(&with_suffix(p, "ironing_gap")), &gap)?;
                    write_output(Some(&with_suffix(p, "regimes")), &regimes)
                }
                None => write_output(None, &format!("{gap}\n{regimes}")),
            }
        }
        Command::FullSurplus(a) => {
            let flags = ExperimentConfig { alpha: a.alpha, gamma: a.gamma.map(|g| vec![g]), epsilon: a.epsilon, out: a.out, ..Default::default() };
            let cfg = resolve(&a.config, flags)?;
            write_output(cfg.out.as_deref(), &cmd_full_surplus(&cfg)?)
        }
    }
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
