//! Root finding and quadrature shared by the curve machinery and metrics.

/// Absolute tolerance on the search coordinate for every bisection.
pub const BISECT_TOL: f64 = 1e-12;
pub const BISECT_MAX_ITER: usize = 200;

/// Smallest `x` in `[lo, hi]` with `f(x) >= target`, for nondecreasing `f`.
///
/// The returned point always satisfies `f(x) >= target` provided `f(hi)` does.
pub fn bisect_nondecreasing<F: Fn(f64) -> f64>(f: F, target: f64, lo: f64, hi: f64) -> f64 {
    if f(lo) >= target {
        return lo;
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..BISECT_MAX_ITER {
        if hi - lo <= BISECT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Doubles an upper bracket until the nondecreasing `f` reaches `target`.
pub fn bracket_upper<F: Fn(f64) -> f64>(f: F, target: f64, start: f64) -> f64 {
    let mut hi = start.max(1.0);
    while f(hi) < target {
        hi *= 2.0;
        assert!(hi.is_finite(), "bracket_upper: target {target} is never reached");
    }
    hi
}

const MAX_DEPTH: u32 = 50;
const MIN_DEPTH: u32 = 4;

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || (depth >= MIN_DEPTH && delta.abs() <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, b - a);
    simpson_rec(&mut f, a, b, fa, fm, fb, whole, tol, 0)
}

/// Adaptive Simpson split into panels at the given breakpoints, with the
/// tolerance shared in proportion to panel length.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut knots: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut edges = Vec::with_capacity(knots.len() + 2);
    edges.push(a);
    edges.extend(knots);
    edges.push(b);
    let len = b - a;
    edges
        .windows(2)
        .map(|w| adaptive_simpson(&mut f, w[0], w[1], tol * (w[1] - w[0]) / len))
        .sum()
}
