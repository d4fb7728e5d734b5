//! Small floating-point helpers shared by the distribution and model code.
//!
//! The analytical failure-probability expressions are differences of
//! products like `(1 - p)^M` whose leading terms cancel exactly in the
//! lower tail. The helpers here return the *remainders* of those binomial
//! expansions directly so that the cancellation happens algebraically
//! instead of in floating point.

/// `ln(1 - p)`, accurate for tiny `p`.
#[inline]
pub fn ln_1m(p: f64) -> f64 {
    (-p).ln_1p()
}

/// `(1 - p)^m - sum_{j<order} C(m, j) (-p)^j` for `order` in 1..=3.
///
/// `m` may be any non-negative real; for integer `m` the series terminates.
pub fn binomial_remainder(m: f64, p: f64, order: usize) -> f64 {
    debug_assert!((1..=3).contains(&order));
    if p <= 0.0 {
        return 0.0;
    }
    if order == 1 {
        return (m * ln_1m(p)).exp_m1();
    }
    if m * p < 0.1 && p < 0.1 {
        // term_j = C(m, j) (-p)^j, built incrementally
        let mut term = 1.0;
        let mut sum = 0.0;
        for j in 1..200usize {
            let jf = j as f64;
            term *= -(m - jf + 1.0) * p / jf;
            if j >= order {
                sum += term;
                if term == 0.0 || term.abs() <= sum.abs() * 1e-18 {
                    break;
                }
            }
        }
        return sum;
    }
    let full = (m * ln_1m(p)).exp();
    let mut poly = 1.0 - m * p;
    if order == 3 {
        poly += 0.5 * m * (m - 1.0) * p * p;
    }
    full - poly
}

/// `x - ln(1 + x)` without cancellation for small `x`.
pub fn x_minus_ln_1p(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let mut term = -x;
        let mut sum = 0.0;
        for j in 2..40 {
            term *= -x;
            let t = term / j as f64;
            sum += t;
            if t.abs() <= sum.abs() * 1e-18 {
                break;
            }
        }
        sum
    } else {
        x - x.ln_1p()
    }
}

/// Ordinary least squares fit `y = a + b x`; returns `(b, a)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Log-spaced grid of `count` points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while (hi - lo).abs() > tol * (1.0 + lo.abs()) {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}
