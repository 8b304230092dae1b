//! Grid generation and deterministic sampling used by the scan drivers.

use crate::error::{Error, Result};

/// `n` log-spaced points between `lo` and `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(Error::config(format!(
            "log_space needs 0 < lo < hi finite, got [{lo}, {hi}]"
        )));
    }
    if n < 2 {
        return Err(Error::config("log_space needs at least 2 points"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if i == 0 {
            out.push(lo);
        } else if i == n - 1 {
            out.push(hi);
        } else {
            out.push((a + (b - a) * i as f64 / (n - 1) as f64).exp());
        }
    }
    Ok(out)
}

/// `n` uniformly spaced points between `lo` and `hi` inclusive.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::config(format!(
            "lin_space needs lo < hi finite, got [{lo}, {hi}]"
        )));
    }
    if n < 2 {
        return Err(Error::config("lin_space needs at least 2 points"));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if i == n - 1 {
            out.push(hi);
        } else {
            out.push(lo + (hi - lo) * i as f64 / (n - 1) as f64);
        }
    }
    Ok(out)
}

/// Radical-inverse (van der Corput) value of `index` in the given base.
///
/// Pairs `(halton(i,2), halton(i,3))` give the deterministic low-discrepancy
/// point set used to sample point pairs in the Harnack/modulus batteries.
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_space_endpoints_exact() {
        let g = log_space(1e-6, 1e6, 41).unwrap();
        assert_eq!(g[0], 1e-6);
        assert_eq!(g[40], 1e6);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn lin_space_endpoints_exact() {
        let g = lin_space(-0.5, 0.5, 101).unwrap();
        assert_eq!(g[0], -0.5);
        assert_eq!(g[100], 0.5);
    }

    #[test]
    fn halton_first_values() {
        // base 2: 1/2, 1/4, 3/4, 1/8, ...
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(2, 2), 0.25);
        assert_eq!(halton(3, 2), 0.75);
        // base 3: 1/3, 2/3, 1/9
        assert!((halton(1, 3) - 1.0 / 3.0).abs() < 1e-15);
        assert!((halton(3, 3) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn bad_ranges_rejected() {
        assert!(log_space(0.0, 1.0, 5).is_err());
        assert!(log_space(2.0, 1.0, 5).is_err());
        assert!(lin_space(1.0, 1.0, 5).is_err());
    }
}
