//! Same-time pseudo-Harnack verification, the critical-constant
//! computation, and the elementary implication lemma used by the modulus
//! proofs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{pseudo_harnack, BoundEnv};
use crate::error::{Error, Result};
use crate::solutions::ClosedFormFamily;
use crate::sweep::halton;

/// Positive root of 32 C^2 + 32 C - 1 = 0 by bisection; analytically
/// (3 - 2 sqrt 2) / (4 sqrt 2).
pub fn critical_constant() -> f64 {
    let f = |c: f64| 32.0 * c * c + 32.0 * c - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Exponent coefficient C - 1/(32 (1 + C)) of the kernel-family inequality;
/// its sign flips exactly at the critical constant.
pub fn exponent_coefficient(c: f64) -> f64 {
    c - 1.0 / (32.0 * (1.0 + c))
}

/// Result of scanning 1 <= 2^(1 + n(1-theta)/2) e^C exp[coeff * q] over q.
#[derive(Debug, Clone)]
pub struct FamilyScanReport {
    pub trial_c: f64,
    pub coefficient: f64,
    pub min_value: f64,
    pub first_failure_q: Option<f64>,
    pub passed: bool,
}

/// Evaluates the Gaussian-family sharpness inequality over q = R^2/tau.
pub fn kernel_family_scan(trial_c: f64, n: usize, q_grid: &[f64]) -> Result<FamilyScanReport> {
    if !(trial_c > 0.0) {
        return Err(Error::domain(format!("trial constant C = {trial_c} must be > 0")));
    }
    let theta = 1.0 / (1.0 + trial_c);
    let prefactor = 2f64.powf(1.0 + n as f64 * (1.0 - theta) / 2.0) * trial_c.exp();
    let coefficient = exponent_coefficient(trial_c);
    let mut min_value = f64::INFINITY;
    let mut first_failure_q = None;
    for &q in q_grid {
        let value = prefactor * (coefficient * q).exp();
        if value < min_value {
            min_value = value;
        }
        if value < 1.0 && first_failure_q.is_none() {
            first_failure_q = Some(q);
        }
    }
    Ok(FamilyScanReport {
        trial_c,
        coefficient,
        min_value,
        first_failure_q,
        passed: first_failure_q.is_none(),
    })
}

/// Outcome of a pseudo-Harnack battery over sampled same-time pairs.
#[derive(Debug, Clone)]
pub struct HarnackReport {
    pub trial_c: f64,
    /// Max over pairs of u(y,t) / (L M^(1-theta) u(x,t)^theta).
    pub max_ratio: f64,
    pub argmax: Option<(f64, f64, f64)>,
    pub pairs: usize,
    pub skipped: usize,
    pub violations: usize,
    pub passed: bool,
}

/// Verifies u(y,t) <= L M^(1-theta) u(x,t)^theta with (theta, L) from the
/// trial constant, over a deterministic low-discrepancy pair battery in
/// B(x0, R/2) at the supplied times.
pub fn harnack_check(
    family: &ClosedFormFamily,
    x0: f64,
    env: &BoundEnv,
    times: &[f64],
    trial_c: f64,
    pair_count: usize,
) -> Result<HarnackReport> {
    if times.is_empty() || pair_count == 0 {
        return Err(Error::config("harnack battery needs times and pairs"));
    }
    let half = env.radius / 2.0;
    let mut report = HarnackReport {
        trial_c,
        max_ratio: 0.0,
        argmax: None,
        pairs: 0,
        skipped: 0,
        violations: 0,
        passed: true,
    };
    let mut pair_list: Vec<(f64, f64)> = (1..=pair_count as u64)
        .map(|i| {
            (x0 - half + 2.0 * half * halton(i, 2), x0 - half + 2.0 * half * halton(i, 3))
        })
        .collect();
    // Corner cases: coincident pairs and the full half-ball diameter.
    pair_list.push((x0 - half / 3.0, x0 - half / 3.0));
    pair_list.push((x0, x0));
    pair_list.push((x0 - half, x0 + half));

    for &t in times {
        for &(x, y) in &pair_list {
            if (x - x0).abs() > half || (y - x0).abs() > half {
                report.skipped += 1;
                continue;
            }
            let d = (x - y).abs();
            let (theta, l) = pseudo_harnack(d, env, t, trial_c)?;
            for (from, to) in [(x, y), (y, x)] {
                let u_from = family.sample_line(from, t)?.u;
                let u_to = family.sample_line(to, t)?.u;
                let rhs = l * env.ceiling.powf(1.0 - theta) * u_from.powf(theta);
                let ratio = u_to / rhs;
                report.pairs += 1;
                if ratio > report.max_ratio {
                    report.max_ratio = ratio;
                    report.argmax = Some((from, to, t));
                }
                if ratio > 1.0 {
                    report.violations += 1;
                }
            }
        }
    }
    report.passed = report.violations == 0;
    Ok(report)
}

/// Smallest trial constant for which the battery passes (monotone in C).
pub fn harnack_min_passing_c(
    family: &ClosedFormFamily,
    x0: f64,
    env: &BoundEnv,
    times: &[f64],
    pair_count: usize,
) -> Result<f64> {
    let passes = |c: f64| -> Result<bool> {
        Ok(harnack_check(family, x0, env, times, c, pair_count)?.passed)
    };
    let mut hi = 1.0f64;
    let mut guard = 0;
    while !passes(hi)? {
        hi *= 2.0;
        guard += 1;
        if guard > 40 {
            return Err(Error::Validation("no passing Harnack constant below 1e12".into()));
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

/// The elementary implication: a + mu <= lambda (b + mu) with a, b, mu >= 0
/// and lambda >= 1 forces a^2 <= lambda^4 b^2 + (lambda^2 - 1) mu^2.
/// Returns (hypothesis holds, conclusion holds).
pub fn check_implication(a: f64, b: f64, mu: f64, lambda: f64) -> (bool, bool) {
    let hypothesis = a + mu <= lambda * (b + mu);
    let conclusion =
        a * a <= lambda.powi(4) * b * b + (lambda * lambda - 1.0) * mu * mu + 1e-12 * (1.0 + a * a);
    (hypothesis, conclusion)
}

/// Seeded battery for the implication lemma.
#[derive(Debug, Clone, Copy)]
pub struct ImplicationScan {
    pub checked: usize,
    pub counterexamples: usize,
}

/// Draws hypothesis-satisfying samples across magnitudes and counts
/// conclusion failures.
pub fn implication_scan(seed: u64, count: usize) -> ImplicationScan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scan = ImplicationScan { checked: 0, counterexamples: 0 };
    for i in 0..count {
        // Alternate moderate and log-uniform magnitudes.
        let magnitude = |rng: &mut ChaCha8Rng, wide: bool| -> f64 {
            if wide {
                10f64.powf(rng.gen_range(-6.0..6.0))
            } else {
                rng.gen_range(0.0..10.0)
            }
        };
        let wide = i % 2 == 1;
        let b = magnitude(&mut rng, wide);
        let mu = magnitude(&mut rng, wide);
        let lambda = if wide { 10f64.powf(rng.gen_range(0.0..3.0)) } else { rng.gen_range(1.0..10.0) };
        let a_max = lambda * (b + mu) - mu;
        if a_max < 0.0 {
            continue;
        }
        let a = rng.gen_range(0.0..=a_max);
        let (hypothesis, conclusion) = check_implication(a, b, mu, lambda);
        if !hypothesis {
            continue;
        }
        scan.checked += 1;
        if !conclusion {
            scan.counterexamples += 1;
        }
    }
    scan
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::env_for_family;
    use approx::assert_relative_eq;

    #[test]
    fn critical_constant_matches_closed_form() {
        let root = critical_constant();
        let exact = (3.0 - 2.0 * 2f64.sqrt()) / (4.0 * 2f64.sqrt());
        assert!((root - exact).abs() <= 1e-9, "root {root} vs exact {exact}");
        assert_relative_eq!(root, 0.030330086, max_relative = 1e-7);
        // The exponent coefficient flips sign exactly there.
        assert!(exponent_coefficient(root * (1.0 + 1e-9)) > 0.0);
        assert!(exponent_coefficient(root * (1.0 - 1e-9)) < 0.0);
        assert!(exponent_coefficient(root).abs() < 1e-10);
    }

    #[test]
    fn family_scan_passes_above_and_fails_below_critical() {
        let q_grid: Vec<f64> = crate::sweep::log_space(1e-3, 1e6, 200).unwrap();
        let root = critical_constant();
        let above = kernel_family_scan(2.0 * root, 3, &q_grid).unwrap();
        assert!(above.passed && above.coefficient > 0.0 && above.min_value >= 1.0);
        let below = kernel_family_scan(root / 2.0, 3, &q_grid).unwrap();
        assert!(!below.passed && below.coefficient < 0.0);
        // Failure happens at large q only.
        assert!(below.first_failure_q.unwrap() > 1.0);
    }

    #[test]
    fn harnack_trivial_pair_is_one_over_l() {
        // x = y makes the inequality u <= L u with L >= 2.
        let family = ClosedFormFamily::ExpTravel { a: 1.0, n: 1 };
        let env = env_for_family(&family, 0.0, 1.0, 1.0).unwrap();
        let report = harnack_check(&family, 0.0, &env, &[1.0], 1.0, 4).unwrap();
        assert!(report.passed, "max ratio {}", report.max_ratio);
        assert!(report.max_ratio <= 1.0);
    }

    #[test]
    fn harnack_battery_and_minimal_constant() {
        let families: Vec<ClosedFormFamily> = vec![
            ClosedFormFamily::ExpTravel { a: 2.0, n: 1 },
            ClosedFormFamily::ShiftedGaussian { a: 0.5, n: 2 },
            ClosedFormFamily::HeatKernelH3 { t0: 0.2 },
        ];
        for family in &families {
            let env = env_for_family(family, 0.0, 1.0, 1.0).unwrap();
            let c_min = harnack_min_passing_c(family, 0.0, &env, &[0.25, 1.0], 64).unwrap();
            assert!(c_min.is_finite() && c_min > 0.0);
            let report = harnack_check(family, 0.0, &env, &[0.25, 1.0], c_min, 64).unwrap();
            assert!(report.passed, "{} fails at its own c_min", family.describe());
        }
    }

    #[test]
    fn implication_hand_example() {
        // (a, b, mu, lambda) = (2, 1, 1, 1.5): hypothesis 3 <= 3, conclusion
        // 4 <= 1.5^4 + 1.25 = 6.3125.
        let (hyp, concl) = check_implication(2.0, 1.0, 1.0, 1.5);
        assert!(hyp && concl);
        // A comfortably false hypothesis leaves the conclusion untested.
        let (hyp, _) = check_implication(10.0, 1.0, 1.0, 1.5);
        assert!(!hyp);
    }

    #[test]
    fn implication_scan_finds_no_counterexamples() {
        let scan = implication_scan(1234, 100_000);
        assert!(scan.checked > 90_000);
        assert_eq!(scan.counterexamples, 0);
    }
}
