//! Small numerical building blocks shared by the modules: bracketed
//! bisection, trapezoid rules and the monotone-chain lower hull.

/// Smallest `x` in `[lo, hi]` with `pred(x)` true, assuming `pred` is
/// monotone (false then true). Returns `hi` when the predicate never flips
/// inside the bracket and `lo` when it already holds at `lo`.
pub fn bisect_first<P: Fn(f64) -> bool>(mut lo: f64, mut hi: f64, tol: f64, pred: P) -> f64 {
    if pred(lo) {
        return lo;
    }
    if !pred(hi) {
        return hi;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Largest `x` in `[lo, hi]` with `pred(x)` true, assuming `pred` is
/// monotone (true then false). Returns `lo` when the predicate fails
/// everywhere.
pub fn bisect_last<P: Fn(f64) -> bool>(mut lo: f64, mut hi: f64, tol: f64, pred: P) -> f64 {
    if pred(hi) {
        return hi;
    }
    if !pred(lo) {
        return lo;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Composite trapezoid rule on `nodes` equally spaced points of `[a, b]`.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, nodes: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = nodes.max(2);
    let h = (b - a) / (n - 1) as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for i in 1..n - 1 {
        acc += f(a + h * i as f64);
    }
    acc * h
}

/// Composite midpoint rule with `cells` equal cells on `[a, b]`. It never
/// evaluates `f` at `a` or `b`, so one-sided jumps there are harmless.
pub fn midpoint<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cells: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = cells.max(1);
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + h * (i as f64 + 0.5))).sum::<f64>() * h
}

/// Running trapezoid integral of `ys` over the abscissae `xs`, starting at 0.
pub fn cumulative_trapezoid(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    debug_assert_eq!(xs.len(), ys.len());
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..xs.len() {
        acc += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
        out.push(acc);
    }
    out
}

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            let mut out: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
            out[n - 1] = b;
            out
        }
    }
}

/// Twice the signed area of the triangle `o, p, q`; positive for a
/// counter-clockwise (convex from below) turn.
#[inline]
pub fn cross(o: (f64, f64), p: (f64, f64), q: (f64, f64)) -> f64 {
    (p.0 - o.0) * (q.1 - o.1) - (p.1 - o.1) * (q.0 - o.0)
}

/// Indices of the lower convex hull of points sorted by abscissa.
///
/// Collinear interior points are dropped, so every returned edge has a
/// strictly larger slope than the one before it.
pub fn lower_hull(xs: &[f64], ys: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for k in 0..xs.len() {
        if let Some(&last) = hull.last() {
            if xs[k] <= xs[last] {
                // Equal abscissae: keep the lower point.
                if ys[k] < ys[last] {
                    hull.pop();
                } else {
                    continue;
                }
            }
        }
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let p = hull[hull.len() - 1];
            if cross((xs[o], ys[o]), (xs[p], ys[p]), (xs[k], ys[k])) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    hull
}

/// Index `i` with `xs[i] <= x < xs[i + 1]` for a sorted slice, clamped to the
/// valid cell range `0..xs.len() - 1`.
pub fn locate_cell(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    debug_assert!(n >= 2);
    let k = xs.partition_point(|&v| v <= x);
    k.saturating_sub(1).min(n - 2)
}

/// Sorts, deduplicates and returns a grid of abscissae.
pub fn merge_grid(mut xs: Vec<f64>) -> Vec<f64> {
    xs.retain(|x| x.is_finite());
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));
    xs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_first_finds_threshold() {
        let x = bisect_first(0.0, 2.0, 1e-12, |x| x * x >= 2.0);
        assert!((x - 2f64.sqrt()).abs() < 1e-11);
        assert_eq!(bisect_first(0.0, 1.0, 1e-12, |_| true), 0.0);
        assert_eq!(bisect_first(0.0, 1.0, 1e-12, |_| false), 1.0);
    }

    #[test]
    fn bisect_last_finds_threshold() {
        let x = bisect_last(0.0, 2.0, 1e-12, |x| x * x <= 2.0);
        assert!((x - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn trapezoid_exact_on_linear() {
        let v = trapezoid(|x| 3.0 * x + 1.0, 0.0, 2.0, 3);
        assert!((v - 8.0).abs() < 1e-14);
        let q = trapezoid(|x| x * x, 0.0, 1.0, 4001);
        assert!((q - 1.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn midpoint_exact_on_linear() {
        let v = midpoint(|x| 3.0 * x + 1.0, 0.0, 2.0, 1);
        assert!((v - 8.0).abs() < 1e-14);
        let step = midpoint(|x| if x < 1.0 { 0.0 } else { 1.0 }, 0.0, 1.0, 10);
        assert_eq!(step, 0.0);
    }

    #[test]
    fn cumulative_matches_total() {
        let xs = linspace(0.0, 1.0, 101);
        let ys: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
        let c = cumulative_trapezoid(&xs, &ys);
        assert!((c[100] - (1f64.exp() - 1.0)).abs() < 1e-4);
    }

    #[test]
    fn lower_hull_of_parabola_keeps_all() {
        let xs = linspace(-1.0, 1.0, 21);
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert_eq!(lower_hull(&xs, &ys).len(), 21);
    }

    #[test]
    fn lower_hull_skips_bump() {
        let xs = vec![0.0, 1.0, 2.0, 3.0];
        let ys = vec![0.0, 1.0, 0.5, 0.0];
        assert_eq!(lower_hull(&xs, &ys), vec![0, 3]);
    }

    #[test]
    fn locate_cell_clamps() {
        let xs = vec![0.0, 1.0, 2.0];
        assert_eq!(locate_cell(&xs, -1.0), 0);
        assert_eq!(locate_cell(&xs, 0.5), 0);
        assert_eq!(locate_cell(&xs, 1.0), 1);
        assert_eq!(locate_cell(&xs, 2.0), 1);
    }
}
