//! Ironed virtual values for the hallucination posterior.
//!
//! Three constructions live here:
//!
//! * [`truncated_iron`] and [`ironed_virtual`]: the closed form for a
//!   regular prior. Below the signal the virtual value is the ironed virtual
//!   value of the scaled measure `gamma * F` restricted to `[lo, s]`, on
//!   `[s, T)` it is the constant `phi_F(T)`, and from `T` on it is `phi_F`.
//! * [`monteiro_oracle`]: the lower convex hull of the posterior revenue
//!   curve in quantile space, valid for any prior. Used as a reference.
//! * [`HullTable`]: the same hull, precomputed once per `(prior, gamma)` so
//!   that the virtual value for any signal costs a handful of
//!   binary-lifting steps. Used by the Monte Carlo revenue estimates.

use crate::distributions::Prior;
use crate::error::{Error, Result};
use crate::numerics::{bisect_first, cross, lower_hull};
use crate::posterior::HallucinationPosterior;

/// Absolute tolerance (scaled by the support width) for locating `T`.
pub const THRESHOLD_TOL: f64 = 1e-10;

/// Default grid size for ironing and the oracle.
pub const DEFAULT_GRID: usize = 2000;

/// A monotone virtual-value function with its generalized inverse.
pub trait VirtualValue {
    /// Virtual value at `v`.
    fn eval(&self, v: f64) -> f64;

    /// `inf { v : eval(v) >= z }`, or `+inf` when the set is empty.
    fn pseudo_inverse(&self, z: f64) -> f64;

    /// `inf { v : eval(v) > z }`: the price a buyer must beat when losing
    /// ties at level `z`.
    fn strict_inverse(&self, z: f64) -> f64 {
        self.pseudo_inverse(z.next_up())
    }
}

fn check_gamma_closed(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    Ok(())
}

fn check_gamma_open(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    Ok(())
}

fn check_signal(prior: &Prior, s: f64) -> Result<()> {
    let (lo, hi) = prior.support();
    if !(s >= lo && s <= hi) {
        return Err(Error::InvalidParameter(format!("signal {s} outside support [{lo}, {hi}]")));
    }
    Ok(())
}

/// The function whose smallest root above the signal is `T`.
///
/// It is non-increasing on `(s, hi]` for a regular prior, positive at `s`
/// and non-positive at `hi`. `H_F` enters through the identity
/// `H_F(x) = -x (1 - F(x))`.
pub fn threshold_gap(prior: &Prior, gamma: f64, s: f64, x: f64) -> f64 {
    let h = |y: f64| -y * prior.sf(y);
    let phi = prior.virtual_value(x);
    let fx = prior.cdf(x);
    let fs = prior.cdf(s);
    gamma * (h(x) - phi * fx) + gamma * phi * fs - (1.0 - gamma) * phi - gamma * h(s) + (1.0 - gamma) * s
}

/// Point `T` where the ironed virtual value rejoins `phi_F` above the
/// signal. Returns `s` when the gap function is already non-positive at `s`
/// (only possible at the top of the support).
pub fn compute_threshold(prior: &Prior, gamma: f64, s: f64) -> Result<f64> {
    check_gamma_open(gamma)?;
    check_signal(prior, s)?;
    let (lo, hi) = prior.support();
    if s >= hi || threshold_gap(prior, gamma, s, s) <= 0.0 {
        return Ok(s);
    }
    let tol = THRESHOLD_TOL * (hi - lo).max(1.0);
    Ok(bisect_first(s, hi, tol, |x| threshold_gap(prior, gamma, s, x) <= 0.0))
}

/// Shape of a piece of a piecewise virtual value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PieceKind {
    /// An ironed interval.
    Constant(f64),
    /// Follows the virtual value of `gamma * F`, clamped to keep the whole
    /// function monotone across piece boundaries.
    FollowGamma { floor: f64, ceiling: f64 },
    /// Follows the prior virtual value `phi_F`.
    FollowPrior { floor: f64 },
}

/// A piece on `[lo, hi)`; the last piece of a function is closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub kind: PieceKind,
}

fn piece_value(prior: &Prior, gamma: f64, kind: PieceKind, v: f64) -> f64 {
    match kind {
        PieceKind::Constant(c) => c,
        PieceKind::FollowGamma { floor, ceiling } => prior.gamma_virtual(v, gamma).max(floor).min(ceiling),
        PieceKind::FollowPrior { floor } => prior.virtual_value(v).max(floor),
    }
}

fn locate_piece(pieces: &[Piece], v: f64) -> usize {
    pieces.partition_point(|p| p.hi <= v).min(pieces.len() - 1)
}

/// Generalized inverse over monotone pieces.
fn pieces_pseudo_inverse(prior: &Prior, gamma: f64, pieces: &[Piece], z: f64) -> f64 {
    for p in pieces {
        let top = piece_value(prior, gamma, p.kind, p.hi);
        if top < z {
            continue;
        }
        if piece_value(prior, gamma, p.kind, p.lo) >= z {
            return p.lo;
        }
        let tol = 1e-13 * (1.0 + p.hi.abs());
        return bisect_first(p.lo, p.hi, tol, |v| piece_value(prior, gamma, p.kind, v) >= z);
    }
    f64::INFINITY
}

/// Lower convex hull of `J(q) = ∫_0^q phi_{gamma F}((gamma F)^{-1}(r)) dr` on
/// `[0, gamma F(t)]`, together with its right derivative expressed as
/// monotone pieces in value space.
#[derive(Debug, Clone)]
pub struct QuantileHull {
    prior: Prior,
    gamma: f64,
    upper: f64,
    values: Vec<f64>,
    quantiles: Vec<f64>,
    integral: Vec<f64>,
    hull: Vec<usize>,
    pieces: Vec<Piece>,
}

/// Irons the virtual value of `gamma * F` on `[lo, t]`.
///
/// In quantile space `q = gamma F(v)` the integral of the virtual value is
/// `J(q) = lo - v (1 - q)`, evaluated exactly at value nodes, so density
/// jumps inside a cell cost no accuracy. Hull edges spanning more than one
/// cell become constant pieces; runs of single-cell edges follow the
/// virtual value exactly.
pub fn truncated_iron(prior: &Prior, gamma: f64, t: f64, grid_size: usize) -> Result<QuantileHull> {
    check_gamma_closed(gamma)?;
    check_signal(prior, t)?;
    let lo = prior.lo();
    if t <= lo {
        return Err(Error::InvalidParameter("ironing window [lo, t] is empty".into()));
    }
    if grid_size < 3 {
        return Err(Error::InvalidParameter("grid size must be at least 3".into()));
    }
    let values = prior.blend_grid(lo, t, grid_size);
    let quantiles: Vec<f64> = values.iter().map(|&v| gamma * prior.cdf(v)).collect();
    let integral: Vec<f64> = values.iter().zip(&quantiles).map(|(&v, &q)| lo - v * (1.0 - q)).collect();
    let hull = lower_hull(&quantiles, &integral);
    let pieces = hull_pieces(&values, &quantiles, &integral, &hull);
    Ok(QuantileHull { prior: prior.clone(), gamma, upper: t, values, quantiles, integral, hull, pieces })
}

fn hull_pieces(values: &[f64], xs: &[f64], ys: &[f64], hull: &[usize]) -> Vec<Piece> {
    let slope = |i: usize, j: usize| (ys[j] - ys[i]) / (xs[j] - xs[i]);
    let mut edges: Vec<(usize, usize, f64)> = hull.windows(2).map(|w| (w[0], w[1], slope(w[0], w[1]))).collect();
    if edges.is_empty() {
        edges.push((0, values.len() - 1, f64::NAN));
    }
    let mut pieces: Vec<Piece> = Vec::new();
    let mut e = 0;
    while e < edges.len() {
        let (i, j, sl) = edges[e];
        if j == i + 1 && !sl.is_nan() {
            let start = e;
            while e + 1 < edges.len() && edges[e + 1].1 == edges[e + 1].0 + 1 {
                e += 1;
            }
            let floor = if start > 0 { edges[start - 1].2 } else { f64::NEG_INFINITY };
            let ceiling = if e + 1 < edges.len() { edges[e + 1].2 } else { f64::INFINITY };
            pieces.push(Piece {
                lo: values[edges[start].0],
                hi: values[edges[e].1],
                kind: PieceKind::FollowGamma { floor, ceiling },
            });
        } else {
            pieces.push(Piece { lo: values[i], hi: values[j], kind: PieceKind::Constant(sl) });
        }
        e += 1;
    }
    pieces
}

impl QuantileHull {
    /// Ironed virtual value at `v`, the right derivative of the hull at
    /// `gamma F(v)`; `v` is clamped to `[lo, t]`.
    pub fn eval(&self, v: f64) -> f64 {
        let v = v.clamp(self.values[0], self.upper);
        let k = locate_piece(&self.pieces, v);
        piece_value(&self.prior, self.gamma, self.pieces[k].kind, v)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Quantile nodes, `J` values and hull vertex indices.
    pub fn curve(&self) -> (&[f64], &[f64], &[usize]) {
        (&self.quantiles, &self.integral, &self.hull)
    }

    /// Value-space intervals ironed to a constant.
    pub fn ironed_intervals(&self) -> Vec<(f64, f64, f64)> {
        self.pieces
            .iter()
            .filter_map(|p| match p.kind {
                PieceKind::Constant(c) => Some((p.lo, p.hi, c)),
                _ => None,
            })
            .collect()
    }
}

/// Piecewise ironed virtual value of a hallucination posterior.
#[derive(Debug, Clone)]
pub struct PiecewiseVirtual {
    prior: Prior,
    gamma: f64,
    signal: f64,
    threshold: f64,
    pieces: Vec<Piece>,
}

/// Closed-form ironed virtual value for signal `s` under a regular prior.
pub fn ironed_virtual(prior: &Prior, gamma: f64, s: f64, grid_size: usize) -> Result<PiecewiseVirtual> {
    check_gamma_open(gamma)?;
    check_signal(prior, s)?;
    prior.check_regular(grid_size)?;
    ironed_virtual_unchecked(prior, gamma, s, grid_size)
}

/// [`ironed_virtual`] without the regularity check. For a non-regular prior
/// the result is the truncated-ironing formula, which need not be optimal.
pub fn ironed_virtual_unchecked(prior: &Prior, gamma: f64, s: f64, grid_size: usize) -> Result<PiecewiseVirtual> {
    check_gamma_open(gamma)?;
    check_signal(prior, s)?;
    let (lo, hi) = prior.support();
    let threshold = compute_threshold(prior, gamma, s)?;
    let mut pieces = if s > lo { truncated_iron(prior, gamma, s, grid_size)?.pieces } else { Vec::new() };
    let level = prior.virtual_value(threshold);
    if threshold > s {
        pieces.push(Piece { lo: s, hi: threshold, kind: PieceKind::Constant(level) });
    }
    pieces.push(Piece { lo: threshold, hi, kind: PieceKind::FollowPrior { floor: level } });
    pieces.retain(|p| p.hi > p.lo || p.hi == hi);
    Ok(PiecewiseVirtual { prior: prior.clone(), gamma, signal: s, threshold, pieces })
}

impl PiecewiseVirtual {
    pub fn signal(&self) -> f64 {
        self.signal
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The point `T` above the signal where the function rejoins `phi_F`.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Value just below the signal, or `-inf` when the signal is the bottom
    /// of the support.
    pub fn left_of_signal(&self) -> f64 {
        match self.pieces.iter().rev().find(|p| p.hi <= self.signal && p.hi > p.lo) {
            Some(p) => piece_value(&self.prior, self.gamma, p.kind, p.hi),
            None => f64::NEG_INFINITY,
        }
    }
}

impl VirtualValue for PiecewiseVirtual {
    fn eval(&self, v: f64) -> f64 {
        let (lo, hi) = self.prior.support();
        let v = v.clamp(lo, hi);
        let k = locate_piece(&self.pieces, v);
        piece_value(&self.prior, self.gamma, self.pieces[k].kind, v)
    }

    fn pseudo_inverse(&self, z: f64) -> f64 {
        pieces_pseudo_inverse(&self.prior, self.gamma, &self.pieces, z)
    }
}

/// Reference virtual value: the left derivative of the lower convex hull of
/// the posterior revenue curve `(F_post(y), H_post(y))` in quantile space.
#[derive(Debug, Clone)]
pub struct MonteiroOracle {
    prior: Prior,
    gamma: f64,
    signal: Option<f64>,
    grid: Vec<f64>,
    hull_x: Vec<f64>,
    hull_y: Vec<f64>,
}

/// Builds the oracle for a hallucination posterior on `grid_size` value
/// nodes, with `H_F` integrated numerically on the grid.
pub fn monteiro_oracle(post: &HallucinationPosterior<'_>, grid_size: usize) -> Result<MonteiroOracle> {
    build_oracle(post.prior(), post.gamma(), Some(post.signal()), grid_size)
}

/// The oracle for the prior itself (no signal): classical ironing.
pub fn monteiro_oracle_prior(prior: &Prior, grid_size: usize) -> Result<MonteiroOracle> {
    build_oracle(prior, 1.0, None, grid_size)
}

fn build_oracle(prior: &Prior, gamma: f64, signal: Option<f64>, grid_size: usize) -> Result<MonteiroOracle> {
    if grid_size < 3 {
        return Err(Error::InvalidParameter("grid size must be at least 3".into()));
    }
    let (lo, hi) = prior.support();
    let mut grid = prior.blend_grid(lo, hi, grid_size);
    if let Some(s) = signal {
        grid.push(s);
        grid = crate::numerics::merge_grid(grid);
    }
    let h = prior.revenue_h_table(&grid, 9);
    let mut xs = Vec::with_capacity(grid.len() + 1);
    let mut ys = Vec::with_capacity(grid.len() + 1);
    match signal {
        None => {
            for (k, &y) in grid.iter().enumerate() {
                xs.push(prior.cdf(y));
                ys.push(h[k]);
            }
        }
        Some(s) => {
            let ks = grid.partition_point(|&y| y < s);
            for k in 0..ks {
                xs.push(gamma * prior.cdf(grid[k]));
                ys.push(gamma * h[k] - (1.0 - gamma) * grid[k]);
            }
            let hs = h[ks];
            xs.push(gamma * prior.cdf(s));
            ys.push(gamma * hs - (1.0 - gamma) * s);
            for k in ks..grid.len() {
                xs.push(gamma * prior.cdf(grid[k]) + 1.0 - gamma);
                ys.push(gamma * h[k]);
            }
        }
    }
    let idx = lower_hull(&xs, &ys);
    let hull_x = idx.iter().map(|&i| xs[i]).collect();
    let hull_y = idx.iter().map(|&i| ys[i]).collect();
    Ok(MonteiroOracle { prior: prior.clone(), gamma, signal, grid, hull_x, hull_y })
}

impl MonteiroOracle {
    fn post_cdf(&self, x: f64) -> f64 {
        match self.signal {
            None => self.prior.cdf(x),
            Some(s) => {
                let base = self.gamma * self.prior.cdf(x);
                if x < s {
                    base
                } else {
                    base + 1.0 - self.gamma
                }
            }
        }
    }

    /// Slope of the hull edge immediately left of quantile `F_post(x)`; at
    /// the bottom of the support, the first edge.
    pub fn ell(&self, x: f64) -> f64 {
        let q = self.post_cdf(x);
        let n = self.hull_x.len();
        let k = self.hull_x.partition_point(|&hx| hx < q).clamp(1, n - 1);
        (self.hull_y[k] - self.hull_y[k - 1]) / (self.hull_x[k] - self.hull_x[k - 1])
    }

    /// Value nodes used to build the point cloud.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Comparison abscissae: the quantile midpoint of each grid cell, where a
    /// chord slope is a second-order estimate of the derivative.
    pub fn sample_points(&self) -> Vec<f64> {
        self.grid
            .windows(2)
            .filter_map(|w| {
                let (fa, fb) = (self.prior.cdf(w[0]), self.prior.cdf(w[1]));
                if fb > fa {
                    Some(self.prior.quantile_unchecked(0.5 * (fa + fb)).clamp(w[0], w[1]))
                } else {
                    None
                }
            })
            .collect()
    }

    /// Hull vertices in quantile space.
    pub fn hull(&self) -> (&[f64], &[f64]) {
        (&self.hull_x, &self.hull_y)
    }
}

const NONE: u32 = u32::MAX;

/// Precomputed prefix and suffix hulls of the posterior revenue curve for
/// one `(prior, gamma)` pair.
///
/// Below the signal the curve is `(gamma F(v), -v (1 - gamma F(v)))` and
/// from the signal on it is `(gamma F(v) + 1 - gamma, -gamma v (1 - F(v)))`.
/// The lower hull of a prefix of the first curve is the chain of
/// monotone-chain predecessor links ending at its last node, and likewise
/// for suffixes of the second curve with successor links. A signal only
/// adds two points and a bridge between the chains, so each query walks
/// `O(log n)` links through binary-lifting tables.
#[derive(Debug, Clone)]
pub struct HullTable {
    prior: Prior,
    gamma: f64,
    values: Vec<f64>,
    pre_x: Vec<f64>,
    pre_y: Vec<f64>,
    post_x: Vec<f64>,
    post_y: Vec<f64>,
    pred_up: Vec<Vec<u32>>,
    succ_up: Vec<Vec<u32>>,
}

fn lifting(first: Vec<u32>) -> Vec<Vec<u32>> {
    let n = first.len();
    let mut levels = vec![first];
    let mut span = 1usize;
    while span < n {
        let prev = levels.last().expect("non-empty");
        let next: Vec<u32> = (0..n).map(|k| if prev[k] == NONE { NONE } else { prev[prev[k] as usize] }).collect();
        levels.push(next);
        span *= 2;
    }
    levels
}

impl HullTable {
    pub fn new(prior: &Prior, gamma: f64, grid_size: usize) -> Result<Self> {
        check_gamma_open(gamma)?;
        if grid_size < 3 {
            return Err(Error::InvalidParameter("grid size must be at least 3".into()));
        }
        let (lo, hi) = prior.support();
        let values = prior.blend_grid(lo, hi, grid_size);
        let n = values.len();
        let mut pre_x = Vec::with_capacity(n);
        let mut pre_y = Vec::with_capacity(n);
        let mut post_x = Vec::with_capacity(n);
        let mut post_y = Vec::with_capacity(n);
        for &v in &values {
            let f = prior.cdf(v);
            let sf = prior.sf(v);
            pre_x.push(gamma * f);
            pre_y.push(-v * (gamma * sf + 1.0 - gamma));
            post_x.push(gamma * f + 1.0 - gamma);
            post_y.push(-gamma * v * sf);
        }
        let mut pred = vec![NONE; n];
        let mut stack: Vec<u32> = Vec::with_capacity(n);
        for k in 0..n {
            let pk = (pre_x[k], pre_y[k]);
            while stack.len() >= 2 {
                let o = stack[stack.len() - 2] as usize;
                let p = stack[stack.len() - 1] as usize;
                if cross((pre_x[o], pre_y[o]), (pre_x[p], pre_y[p]), pk) <= 0.0 {
                    stack.pop();
                } else {
                    break;
                }
            }
            pred[k] = stack.last().copied().unwrap_or(NONE);
            stack.push(k as u32);
        }
        let mut succ = vec![NONE; n];
        stack.clear();
        for k in (0..n).rev() {
            let pk = (post_x[k], post_y[k]);
            while stack.len() >= 2 {
                let o = stack[stack.len() - 2] as usize;
                let p = stack[stack.len() - 1] as usize;
                // Walking right to left, a lower hull turns clockwise.
                if cross((post_x[o], post_y[o]), (post_x[p], post_y[p]), pk) >= 0.0 {
                    stack.pop();
                } else {
                    break;
                }
            }
            succ[k] = stack.last().copied().unwrap_or(NONE);
            stack.push(k as u32);
        }
        Ok(HullTable {
            prior: prior.clone(),
            gamma,
            values,
            pre_x,
            pre_y,
            post_x,
            post_y,
            pred_up: lifting(pred),
            succ_up: lifting(succ),
        })
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Virtual value for one signal.
    pub fn for_signal(&self, s: f64) -> SignalHull<'_> {
        SignalHull::new(self, s)
    }

    #[inline]
    fn pred(&self, k: u32) -> u32 {
        self.pred_up[0][k as usize]
    }

    #[inline]
    fn succ(&self, k: u32) -> u32 {
        self.succ_up[0][k as usize]
    }

    /// Walks predecessor links from `start` while `go(node)` holds, assuming
    /// `go` is true on a prefix of the walk. Returns the last node visited.
    fn descend_pred<P: Fn(u32) -> bool>(&self, start: u32, go: P) -> u32 {
        let mut cur = start;
        for level in self.pred_up.iter().rev() {
            let c = level[cur as usize];
            if c != NONE && go(c) {
                cur = c;
            }
        }
        cur
    }

    fn advance_succ<P: Fn(u32) -> bool>(&self, start: u32, go: P) -> u32 {
        let mut cur = start;
        for level in self.succ_up.iter().rev() {
            let c = level[cur as usize];
            if c != NONE && go(c) {
                cur = c;
            }
        }
        cur
    }
}

/// A vertex of the hull for one signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Vtx {
    Pre(u32),
    LeftLimit,
    Atom,
    Post(u32),
}

/// Hull-based virtual value for a single signal, borrowing a [`HullTable`].
#[derive(Debug, Clone, Copy)]
pub struct SignalHull<'t> {
    table: &'t HullTable,
    signal: f64,
    left_limit: (f64, f64),
    atom: (f64, f64),
    /// Last pre-signal node kept below the left-limit point.
    left_head: u32,
    /// First post-signal node kept after the atom point.
    right_head: u32,
    bridge_left: Vtx,
    bridge_right: Vtx,
}

impl<'t> SignalHull<'t> {
    fn new(table: &'t HullTable, s: f64) -> Self {
        let prior = &table.prior;
        let g = table.gamma;
        let (lo, hi) = prior.support();
        let s = s.clamp(lo, hi);
        let f = prior.cdf(s);
        let sf = prior.sf(s);
        let left_limit = (g * f, -s * (g * sf + 1.0 - g));
        let atom = (g * f + 1.0 - g, -g * s * sf);
        let ks = table.values.partition_point(|&v| v < s);
        let j0 = table.values.partition_point(|&v| v <= s);
        let mut hull = SignalHull {
            table,
            signal: s,
            left_limit,
            atom,
            left_head: NONE,
            right_head: NONE,
            bridge_left: Vtx::LeftLimit,
            bridge_right: Vtx::Atom,
        };
        if ks > 0 {
            hull.left_head = hull.left_tangent_node((ks - 1) as u32, left_limit);
        }
        if j0 < table.values.len() {
            hull.right_head = hull.right_tangent_node(j0 as u32, atom);
        }
        hull.bridge();
        hull
    }

    fn coord(&self, v: Vtx) -> (f64, f64) {
        match v {
            Vtx::Pre(k) => (self.table.pre_x[k as usize], self.table.pre_y[k as usize]),
            Vtx::LeftLimit => self.left_limit,
            Vtx::Atom => self.atom,
            Vtx::Post(k) => (self.table.post_x[k as usize], self.table.post_y[k as usize]),
        }
    }

    fn value_of(&self, v: Vtx) -> f64 {
        match v {
            Vtx::Pre(k) | Vtx::Post(k) => self.table.values[k as usize],
            Vtx::LeftLimit | Vtx::Atom => self.signal,
        }
    }

    /// Last node of the prefix chain ending at `top` that stays on the hull
    /// once point `p` (to its right) is appended.
    fn left_tangent_node(&self, top: u32, p: (f64, f64)) -> u32 {
        let t = self.table;
        let kept = |u: u32| {
            let pu = t.pred(u);
            pu == NONE || cross((t.pre_x[pu as usize], t.pre_y[pu as usize]), (t.pre_x[u as usize], t.pre_y[u as usize]), p) > 0.0
        };
        if kept(top) {
            return top;
        }
        let last_dropped = t.descend_pred(top, |u| !kept(u));
        t.pred(last_dropped)
    }

    /// First node of the suffix chain starting at `first` that stays on the
    /// hull once point `p` (to its left) is prepended.
    fn right_tangent_node(&self, first: u32, p: (f64, f64)) -> u32 {
        let t = self.table;
        let kept = |u: u32| {
            let su = t.succ(u);
            su == NONE || cross(p, (t.post_x[u as usize], t.post_y[u as usize]), (t.post_x[su as usize], t.post_y[su as usize])) > 0.0
        };
        if kept(first) {
            return first;
        }
        let last_dropped = t.advance_succ(first, |u| !kept(u));
        t.succ(last_dropped)
    }

    fn left_prev(&self, v: Vtx) -> Option<Vtx> {
        match v {
            Vtx::LeftLimit => (self.left_head != NONE).then_some(Vtx::Pre(self.left_head)),
            Vtx::Pre(k) => {
                let p = self.table.pred(k);
                (p != NONE).then_some(Vtx::Pre(p))
            }
            _ => None,
        }
    }

    fn right_next(&self, v: Vtx) -> Option<Vtx> {
        match v {
            Vtx::Atom => (self.right_head != NONE).then_some(Vtx::Post(self.right_head)),
            Vtx::Post(k) => {
                let s = self.table.succ(k);
                (s != NONE).then_some(Vtx::Post(s))
            }
            _ => None,
        }
    }

    /// Common lower tangent of the left chain (ending at the left-limit
    /// point) and the right chain (starting at the atom point).
    fn bridge(&mut self) {
        let mut l = Vtx::LeftLimit;
        let mut r = Vtx::Atom;
        for _ in 0..64 {
            let new_r = self.tangent_on_right(self.coord(l));
            let new_l = self.tangent_on_left(self.coord(new_r));
            let done = new_r == r && new_l == l;
            l = new_l;
            r = new_r;
            if done {
                break;
            }
        }
        self.bridge_left = l;
        self.bridge_right = r;
    }

    /// Vertex of the right chain touched by the lower tangent from `p`.
    fn tangent_on_right(&self, p: (f64, f64)) -> Vtx {
        let t = self.table;
        let a = self.atom;
        let turns_up = |from: (f64, f64), next: (f64, f64)| cross(p, from, next) > 0.0;
        if self.right_head == NONE {
            return Vtx::Atom;
        }
        let first = Vtx::Post(self.right_head);
        if turns_up(a, self.coord(first)) {
            return Vtx::Atom;
        }
        let node_ok = |u: u32| {
            let su = t.succ(u);
            su == NONE || turns_up((t.post_x[u as usize], t.post_y[u as usize]), (t.post_x[su as usize], t.post_y[su as usize]))
        };
        if node_ok(self.right_head) {
            return first;
        }
        let last_bad = t.advance_succ(self.right_head, |u| !node_ok(u));
        Vtx::Post(t.succ(last_bad))
    }

    /// Vertex of the left chain touched by the lower tangent from `p`.
    fn tangent_on_left(&self, p: (f64, f64)) -> Vtx {
        let t = self.table;
        let turns_up = |prev: (f64, f64), at: (f64, f64)| cross(prev, at, p) > 0.0;
        if self.left_head == NONE {
            return Vtx::LeftLimit;
        }
        if turns_up(self.coord(Vtx::Pre(self.left_head)), self.left_limit) {
            return Vtx::LeftLimit;
        }
        let node_ok = |u: u32| {
            let pu = t.pred(u);
            pu == NONE || turns_up((t.pre_x[pu as usize], t.pre_y[pu as usize]), (t.pre_x[u as usize], t.pre_y[u as usize]))
        };
        if node_ok(self.left_head) {
            return Vtx::Pre(self.left_head);
        }
        let last_bad = t.descend_pred(self.left_head, |u| !node_ok(u));
        Vtx::Pre(t.pred(last_bad))
    }

    fn slope(&self, a: Vtx, b: Vtx) -> f64 {
        let (pa, pb) = (self.coord(a), self.coord(b));
        (pb.1 - pa.1) / (pb.0 - pa.0)
    }

    fn bridge_slope(&self) -> f64 {
        self.slope(self.bridge_left, self.bridge_right)
    }

    /// Edge `(prev, top)` of the left chain whose quantile range contains
    /// `q`, for `q` strictly left of the bridge.
    fn left_edge(&self, q: f64) -> (Vtx, Vtx) {
        let t = self.table;
        let top = self.bridge_left;
        if let Vtx::LeftLimit = top {
            let head = Vtx::Pre(self.left_head);
            if self.coord(head).0 <= q {
                return (head, top);
            }
        }
        let start = match top {
            Vtx::Pre(k) => k,
            _ => self.left_head,
        };
        let cur = t.descend_pred(start, |u| t.pre_x[u as usize] > q);
        let cur = if t.pre_x[cur as usize] > q { cur } else { start };
        let prev = t.pred(cur);
        if prev == NONE {
            return (Vtx::Pre(cur), self.bridge_left);
        }
        (Vtx::Pre(prev), Vtx::Pre(cur))
    }

    /// Edge `(from, next)` of the right chain whose quantile range contains
    /// `q`, for `q` at or right of the bridge end.
    fn right_edge(&self, q: f64) -> (Vtx, Vtx) {
        let t = self.table;
        let first = self.bridge_right;
        let Some(after) = self.right_next(first) else {
            return (self.bridge_left, first);
        };
        if let Vtx::Atom = first {
            if self.coord(after).0 > q {
                return (first, after);
            }
        }
        let start = match first {
            Vtx::Post(k) => k,
            _ => self.right_head,
        };
        let cur = t.advance_succ(start, |u| t.post_x[u as usize] <= q);
        let next = t.succ(cur);
        if next == NONE {
            // q at the top vertex: the last edge.
            let prev_x = t.post_x[cur as usize];
            let back = t.advance_succ(start, |u| t.post_x[u as usize] < prev_x);
            if back == cur {
                return if first == Vtx::Post(cur) { (self.bridge_left, first) } else { (first, Vtx::Post(cur)) };
            }
            return (Vtx::Post(back), Vtx::Post(cur));
        }
        (Vtx::Post(cur), Vtx::Post(next))
    }

    /// Bridge endpoints: the ironed interval that straddles the signal.
    pub fn bridge_values(&self) -> (f64, f64) {
        (self.value_of(self.bridge_left), self.value_of(self.bridge_right))
    }

    pub fn signal(&self) -> f64 {
        self.signal
    }
}

impl VirtualValue for SignalHull<'_> {
    fn eval(&self, v: f64) -> f64 {
        let prior = &self.table.prior;
        let g = self.table.gamma;
        let (lo, hi) = prior.support();
        let v = v.clamp(lo, hi);
        if v < self.signal {
            let q = g * prior.cdf(v);
            if q >= self.coord(self.bridge_left).0 {
                return self.bridge_slope();
            }
            let (a, b) = self.left_edge(q);
            self.slope(a, b)
        } else {
            let q = g * prior.cdf(v) + 1.0 - g;
            if q < self.coord(self.bridge_right).0 {
                return self.bridge_slope();
            }
            let (a, b) = self.right_edge(q);
            self.slope(a, b)
        }
    }

    fn pseudo_inverse(&self, z: f64) -> f64 {
        let t = self.table;
        let sb = self.bridge_slope();
        if z > sb {
            let first = self.bridge_right;
            let Some(after) = self.right_next(first) else { return f64::INFINITY };
            if self.slope(first, after) >= z {
                return self.value_of(first);
            }
            let start = match after {
                Vtx::Post(k) => k,
                _ => unreachable!("atom is never a successor"),
            };
            let edge_low = |u: u32| {
                let su = t.succ(u);
                su != NONE && self.slope(Vtx::Post(u), Vtx::Post(su)) < z
            };
            if t.succ(start) == NONE {
                return f64::INFINITY;
            }
            if !edge_low(start) {
                return self.value_of(after);
            }
            let cur = t.advance_succ(start, edge_low);
            let next = t.succ(cur);
            if next == NONE || t.succ(next) == NONE {
                return f64::INFINITY;
            }
            return t.values[next as usize];
        }
        // The answer is the left end of the first edge with slope >= z,
        // searching the left chain backwards from the bridge.
        let top = self.bridge_left;
        let Some(prev) = self.left_prev(top) else { return self.value_of(top) };
        if self.slope(prev, top) < z {
            return self.value_of(top);
        }
        let Vtx::Pre(start) = prev else { unreachable!("left chain holds pre-signal nodes") };
        let edge_high = |u: u32| {
            let pu = t.pred(u);
            pu != NONE && self.slope(Vtx::Pre(pu), Vtx::Pre(u)) >= z
        };
        if !edge_high(start) {
            return t.values[start as usize];
        }
        let cur = t.descend_pred(start, edge_high);
        t.values[t.pred(cur) as usize]
    }
}
