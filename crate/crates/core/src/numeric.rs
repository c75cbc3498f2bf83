//! One-dimensional search routines shared by the rate and solver modules.

/// Inverse golden ratio, (sqrt(5) - 1) / 2.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Result of a bracketed maximization.
#[derive(Debug, Clone, Copy)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
///
/// Stops when the bracket width falls below `rel_tol * max(|x|, tiny)` or
/// after `max_iter` iterations. The returned point is the best point probed,
/// so endpoint maxima are approached but never evaluated exactly.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, rel_tol: f64, max_iter: usize) -> Maximum
where
    F: Fn(f64) -> f64,
{
    debug_assert!(lo < hi);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut it = 0;
    while it < max_iter {
        let scale = c.abs().max(d.abs()).max(f64::MIN_POSITIVE);
        if (b - a) <= rel_tol * scale {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        it += 1;
    }
    if fc >= fd {
        Maximum { x: c, value: fc, iterations: it }
    } else {
        Maximum { x: d, value: fd, iterations: it }
    }
}

/// Stopping rule for bisection: the bracket is accepted once its width is
/// below `abs` or below `rel * |x|`, whichever is looser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn met(&self, lo: f64, hi: f64) -> bool {
        let width = hi - lo;
        width <= self.abs || width <= self.rel * hi.abs().max(lo.abs())
    }
}

/// Smallest `x` in `[lo, hi]` with `f(x) >= target`, for `f` nondecreasing on
/// the bracket. Requires `f(lo) < target <= f(hi)`; returns the upper end of
/// the final bracket so the returned point always satisfies the target.
///
/// Midpoints are taken geometrically when the bracket is strictly positive,
/// which suits bandwidth brackets spanning many decades.
pub fn bisect_increasing<F>(f: F, target: f64, mut lo: f64, mut hi: f64, tol: Tolerance, max_iter: usize) -> (f64, usize)
where
    F: Fn(f64) -> f64,
{
    let mut it = 0;
    while it < max_iter && !tol.met(lo, hi) {
        let mid = if lo > 0.0 && hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
        it += 1;
    }
    (hi, it)
}
