//! Spatial modulus-of-continuity verification: the relative increment
//! |u(x,t) - u(y,t)| / u(x,t) of admissible pairs stays below psi(d(x,y)).

use crate::bounds::{modulus_psi, modulus_threshold, BoundEnv};
use crate::error::{Error, Result};
use crate::solutions::ClosedFormFamily;
use crate::sweep::halton;

/// Battery outcome; `admitted` counts (ordered) pairs within the theorem's
/// admissible radius for their base point.
#[derive(Debug, Clone)]
pub struct ModulusReport {
    pub trial_c_small: f64,
    pub trial_c_big: f64,
    pub pairs: usize,
    pub admitted: usize,
    pub violations: usize,
    /// Max over admitted pairs of increment / psi (1 is the pass line).
    pub max_slack: f64,
    pub passed: bool,
}

/// Runs the pair battery for a closed-form family on B(x0, R/2) at the
/// given times. `trial_c_small` scales the admissible radius, `trial_c_big`
/// scales psi.
pub fn modulus_check(
    family: &ClosedFormFamily,
    x0: f64,
    env: &BoundEnv,
    times: &[f64],
    trial_c_small: f64,
    trial_c_big: f64,
    pair_count: usize,
) -> Result<ModulusReport> {
    if times.is_empty() || pair_count == 0 {
        return Err(Error::config("modulus battery needs times and pairs"));
    }
    if !(trial_c_small > 0.0 && trial_c_big > 0.0) {
        return Err(Error::domain("trial constants must be > 0"));
    }
    let half = env.radius / 2.0;
    let mut report = ModulusReport {
        trial_c_small,
        trial_c_big,
        pairs: 0,
        admitted: 0,
        violations: 0,
        max_slack: 0.0,
        passed: true,
    };
    for &t in times {
        let mut pair_list: Vec<(f64, f64)> = (1..=pair_count as u64)
            .map(|i| {
                (x0 - half + 2.0 * half * halton(i, 2), x0 - half + 2.0 * half * halton(i, 3))
            })
            .collect();
        // Corner cases: coincident pairs, and pairs grazing the admissible
        // radius of their base point.
        pair_list.push((x0, x0));
        pair_list.push((x0 + half / 2.0, x0 + half / 2.0));
        for base in [x0 - half / 2.0, x0, x0 + half / 2.0] {
            let u_base = family.sample_line(base, t)?.u;
            if let Ok(radius) = modulus_threshold(u_base, env, t, trial_c_small) {
                let partner = (base + 0.999 * radius).min(x0 + half);
                pair_list.push((base, partner));
            }
        }

        for &(x, y) in &pair_list {
            for (base, other) in [(x, y), (y, x)] {
                report.pairs += 1;
                let d = (base - other).abs();
                let u_base = family.sample_line(base, t)?.u;
                let u_other = family.sample_line(other, t)?.u;
                let radius = modulus_threshold(u_base, env, t, trial_c_small)?;
                if d > radius {
                    continue;
                }
                report.admitted += 1;
                let increment = (u_base - u_other).abs() / u_base;
                let psi = modulus_psi(d, u_base, env, t, trial_c_big)?;
                if d == 0.0 {
                    // psi(0) = 0 exactly; the increment must vanish too.
                    if increment != 0.0 {
                        report.violations += 1;
                    }
                    continue;
                }
                let slack = increment / psi;
                if slack > report.max_slack {
                    report.max_slack = slack;
                }
                if increment > psi * (1.0 + 1e-12) {
                    report.violations += 1;
                }
            }
        }
    }
    report.passed = report.violations == 0;
    Ok(report)
}

/// Smallest psi-constant C for which the battery passes at fixed c
/// (monotone: psi increases with C).
pub fn modulus_min_passing_big_c(
    family: &ClosedFormFamily,
    x0: f64,
    env: &BoundEnv,
    times: &[f64],
    trial_c_small: f64,
    pair_count: usize,
) -> Result<f64> {
    let passes = |c_big: f64| -> Result<bool> {
        Ok(modulus_check(family, x0, env, times, trial_c_small, c_big, pair_count)?.passed)
    };
    let mut hi = 1.0f64;
    let mut guard = 0;
    while !passes(hi)? {
        hi *= 2.0;
        guard += 1;
        if guard > 50 {
            return Err(Error::Validation("no passing modulus constant below 1e15".into()));
        }
    }
    let mut lo = hi / 1e6;
    if passes(lo)? {
        return Ok(lo);
    }
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Largest admissible-radius constant c for which the battery passes at
/// fixed C (monotone: larger c admits more pairs).
pub fn modulus_max_passing_small_c(
    family: &ClosedFormFamily,
    x0: f64,
    env: &BoundEnv,
    times: &[f64],
    trial_c_big: f64,
    pair_count: usize,
) -> Result<f64> {
    let passes = |c_small: f64| -> Result<bool> {
        Ok(modulus_check(family, x0, env, times, c_small, trial_c_big, pair_count)?.passed)
    };
    if !passes(1e-9)? {
        return Err(Error::Validation(
            "battery fails even with a vanishing admissible radius".into(),
        ));
    }
    let mut lo = 1e-9f64;
    let mut hi = 1.0f64;
    let mut guard = 0;
    while passes(hi)? {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Ok(lo); // passes at every tested radius constant
        }
    }
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if passes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
