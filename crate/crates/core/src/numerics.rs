//! Small numerical kernels shared across modules.

use crate::error::{Error, Result};

/// Root of an increasing function on a bracket, Newton steps kept inside
/// the bracket and replaced by bisection when they stall.
pub fn safeguarded_newton<F>(f: F, mut lo: f64, mut hi: f64, x0: f64, what: &str) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::Numerical { what: format!("{what}: bad bracket [{lo}, {hi}]"), residual: flo.abs().min(fhi.abs()) });
    }
    let mut x = x0.clamp(lo, hi);
    let mut last_res = f64::INFINITY;
    for _ in 0..300 {
        let (fx, dfx) = f(x);
        last_res = fx.abs();
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = if dfx > 0.0 && dfx.is_finite() { x - fx / dfx } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) || hi - lo <= 4.0 * f64::EPSILON * hi.abs() {
            return Ok(next);
        }
        x = next;
    }
    if hi - lo <= 1e-12 * hi.abs().max(1.0) {
        return Ok(0.5 * (lo + hi));
    }
    Err(Error::Numerical { what: what.to_string(), residual: last_res })
}

/// Plain bisection for an increasing function with f(lo) ≤ 0 ≤ f(hi).
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson on a uniform grid; falls back to the trapezoid on the
/// last interval when the number of intervals is odd.
pub fn simpson(f: &[f64], dx: f64) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * dx * (f[0] + f[1]);
    }
    let m = if n % 2 == 1 { n } else { n - 1 };
    let mut acc = f[0] + f[m - 1];
    for (i, fi) in f.iter().enumerate().take(m - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * fi } else { 2.0 * fi };
    }
    let mut total = acc * dx / 3.0;
    if m < n {
        total += 0.5 * dx * (f[n - 2] + f[n - 1]);
    }
    total
}

/// Trapezoid rule on an arbitrary grid.
pub fn trapezoid(x: &[f64], f: &[f64]) -> f64 {
    x.windows(2).zip(f.windows(2)).map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1])).sum()
}

/// Centred first derivative on a uniform grid, one-sided second order at ends.
pub fn gradient(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        if n == 2 {
            let s = (f[1] - f[0]) / dx;
            d[0] = s;
            d[1] = s;
        }
        return d;
    }
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
    }
    d
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// SplitMix64 step, used to derive per-scenario seeds from one seed.
pub fn splitmix64(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_finds_cube_root() {
        let r = safeguarded_newton(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0, 1.0, "cbrt").unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-15);
        assert!(safeguarded_newton(|x| (x, 1.0), 1.0, 2.0, 1.5, "none").is_err());
    }

    #[test]
    fn simpson_exact_on_cubics() {
        let n = 11;
        let dx = 0.1;
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * dx).powi(3)).collect();
        assert!((simpson(&f, dx) - 0.25).abs() < 1e-14);
        let f: Vec<f64> = (0..12).map(|i| i as f64 * dx).collect();
        assert!((simpson(&f, dx) - 0.5 * 1.1 * 1.1).abs() < 1e-13);
    }

    #[test]
    fn fit_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|x| 2.0 * x - 1.0).collect();
        let (a, b) = linear_fit(&x, &y);
        assert!((a - 2.0).abs() < 1e-14 && (b + 1.0).abs() < 1e-14);
    }

    #[test]
    fn splitmix_distinct() {
        assert_ne!(splitmix64(1, 0), splitmix64(1, 1));
        assert_eq!(splitmix64(7, 3), splitmix64(7, 3));
    }
}
