//! Bessel functions of the first kind and modified Bessel functions of the
//! first kind, integer orders 0..=2, plus the root finders the sloshing
//! formulas need.
//!
//! Ascending series are used up to `|x| = 12`, the Hankel asymptotic
//! expansion above. Modified functions are returned exponentially scaled
//! (`e^{-x} I_n(x)`) so that the pressure series can take ratios at large
//! arguments without overflow.

use std::f64::consts::PI;

/// Argument above which the asymptotic expansions replace the series.
pub const SERIES_LIMIT: f64 = 12.0;

/// `a_k(nu)` coefficients of the Hankel expansions, `k = 0..`.
fn hankel_coefficient(nu: usize, k: usize, prev: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mu = 4.0 * (nu * nu) as f64;
    let odd = (2 * k - 1) as f64;
    prev * (mu - odd * odd) / (k as f64 * 8.0)
}

fn j_series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(n as i32) / factorial(n);
    let mut sum = term;
    let q = -half * half;
    for k in 1..200 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn j_asymptotic(n: usize, x: f64) -> f64 {
    let (p, q) = hankel_pq(n, x);
    let chi = x - (0.5 * n as f64 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// P and Q sums of the Hankel expansion for `J_n`, stopped at the smallest
/// term.
fn hankel_pq(n: usize, x: f64) -> (f64, f64) {
    let mut a = 1.0;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        a = hankel_coefficient(n, k, a);
        let term = a / x.powi(k as i32);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        let sign = if (k / 2) % 2 == 1 { -1.0 } else { 1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Bessel function of the first kind `J_n(x)` for `n` in `0..=2`.
pub fn bessel_j(n: usize, x: f64) -> f64 {
    debug_assert!(n <= 2);
    let sign = if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        j_series(n, ax)
    } else {
        j_asymptotic(n, ax)
    };
    sign * v
}

pub fn bessel_j0(x: f64) -> f64 {
    bessel_j(0, x)
}

pub fn bessel_j1(x: f64) -> f64 {
    bessel_j(1, x)
}

/// `d/dx J_1(x) = J_0(x) - J_1(x)/x`, with the limit 1/2 at the origin.
pub fn bessel_j1_prime(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        return 0.5 - 3.0 * x * x / 16.0;
    }
    bessel_j0(x) - bessel_j1(x) / x
}

fn i_series_scaled(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(n as i32) / factorial(n);
    let mut sum = term;
    let q = half * half;
    for k in 1..400 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum * (-x).exp()
}

fn i_asymptotic_scaled(n: usize, x: f64) -> f64 {
    let mut a = 1.0;
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        a = hankel_coefficient(n, k, a);
        let term = a / x.powi(k as i32);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        sum += if k % 2 == 0 { term } else { -term };
        if term.abs() < 1e-17 {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

/// Exponentially scaled modified Bessel function `e^{-x} I_n(x)`, `x >= 0`,
/// `n` in `0..=2`.
pub fn bessel_i_scaled(n: usize, x: f64) -> f64 {
    debug_assert!(n <= 2 && x >= 0.0);
    if x <= SERIES_LIMIT {
        i_series_scaled(n, x)
    } else {
        i_asymptotic_scaled(n, x)
    }
}

/// Unscaled `I_n(x)`; overflows for `x` beyond ~700.
pub fn bessel_i(n: usize, x: f64) -> f64 {
    bessel_i_scaled(n, x) * x.exp()
}

/// Scaled derivative `e^{-x} I_1'(x) = e^{-x} (I_0(x) + I_2(x)) / 2`.
pub fn bessel_i1_prime_scaled(x: f64) -> f64 {
    0.5 * (bessel_i_scaled(0, x) + bessel_i_scaled(2, x))
}

/// `I_1(x) / I_1'(x)`, finite for all `x > 0` and tending to `x` at the origin.
pub fn i1_over_i1_prime(x: f64) -> f64 {
    if x < 1e-8 {
        return x;
    }
    bessel_i_scaled(1, x) / bessel_i1_prime_scaled(x)
}

/// `I_2(x) / I_1'(x)`.
pub fn i2_over_i1_prime(x: f64) -> f64 {
    if x < 1e-8 {
        return 0.25 * x * x;
    }
    bessel_i_scaled(2, x) / bessel_i1_prime_scaled(x)
}

/// Bisection on a bracketed sign change, to an interval of `1e-15` relative.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-15 * mid.abs().max(1.0) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn scan_roots(f: impl Fn(f64) -> f64, start: f64, count: usize) -> Vec<f64> {
    let step = 0.25;
    let mut roots = Vec::with_capacity(count);
    let mut a = start;
    let mut fa = f(a);
    while roots.len() < count {
        let b = a + step;
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if (fa > 0.0) != (fb > 0.0) {
            roots.push(bisect(&f, a, b));
        }
        a = b;
        fa = fb;
    }
    roots
}

/// The first `count` positive roots of `J_1'(x) = 0`, strictly increasing.
pub fn bessel_j1_prime_roots(count: usize) -> Vec<f64> {
    scan_roots(bessel_j1_prime, 0.5, count)
}

/// The first `count` positive roots of `J_1(x) = 0` (equivalently of `J_0'`).
pub fn bessel_j1_roots(count: usize) -> Vec<f64> {
    scan_roots(bessel_j1, 0.5, count)
}
