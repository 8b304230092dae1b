//! Heat-kernel anchors: the Euclidean log-gradient constant, the hyperbolic
//! kernel scan, the two-sided Gaussian-type bound with hyperbolic ball
//! volumes, and the Li-Yau drift form with its flat equality case.

use crate::bounds::{kernel_log_grad_bound, BoundEnv};
use crate::error::{Error, Result};
use crate::solutions::ClosedFormFamily;
use crate::sweep;

/// Euclidean kernel: |grad G|^2/G^2 = d^2/4t^2 against (C/t)(1 + d^2/t)
/// reduces to (q/4)/(1+q) with q = d^2/t, whose supremum is 1/4. Returns
/// (grid supremum, analytic limit 1/4); the minimal admissible constant is
/// their max.
pub fn euclid_kernel_min_c(q_grid: &[f64]) -> (f64, f64) {
    let grid_sup = q_grid
        .iter()
        .map(|&q| (q / 4.0) / (1.0 + q))
        .fold(0.0f64, f64::max);
    (grid_sup, 0.25)
}

/// Result of scanning a kernel's log-gradient against the profile
/// (1/t)(1 + d^2/t).
#[derive(Debug, Clone)]
pub struct KernelScanReport {
    pub c_emp: f64,
    pub argmax: Option<(f64, f64)>,
    pub violations: usize,
    pub trial_c: f64,
}

/// Hyperbolic 3-space kernel scan over a (d, t) grid. The geometry carries
/// negative curvature, so the flat-space profile degrades as t grows; the
/// empirical constant over the compact grid is reported, not asserted.
pub fn h3_kernel_scan(d_grid: &[f64], t_grid: &[f64], trial_c: f64) -> Result<KernelScanReport> {
    let kernel = ClosedFormFamily::HeatKernelH3 { t0: 0.0 };
    let mut report =
        KernelScanReport { c_emp: 0.0, argmax: None, violations: 0, trial_c };
    for &t in t_grid {
        if !(t > 0.0) {
            return Err(Error::domain(format!("kernel time {t} must be > 0")));
        }
        for &d in d_grid {
            if !(d >= 0.0) {
                return Err(Error::domain(format!("distance {d} must be >= 0")));
            }
            let sample = kernel.sample_line(d, t)?;
            let lg = sample.log_grad_norm();
            let lhs = lg * lg;
            let profile = kernel_log_grad_bound(d, t, 1.0)?;
            let ratio = lhs / profile;
            if ratio > report.c_emp {
                report.c_emp = ratio;
                report.argmax = Some((d, t));
            }
            if lhs > trial_c * profile {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}

/// Volume of the geodesic ball of radius r in hyperbolic 3-space:
/// pi (sinh 2r - 2r).
pub fn h3_ball_volume(r: f64) -> f64 {
    std::f64::consts::PI * ((2.0 * r).sinh() - 2.0 * r)
}

/// Admissible constants of the two-sided kernel bound
/// c2/V(sqrt t) e^(-d^2/(4-delta)t) <= G <= c1/V(sqrt t) e^(-d^2/(4+delta)t)
/// measured on the hyperbolic 3-space kernel over a (d, t) grid.
#[derive(Debug, Clone)]
pub struct TwoSidedReport {
    pub delta: f64,
    /// Smallest admissible upper constant: sup of G V e^(d^2/(4+delta)t).
    pub c1_min: f64,
    /// Largest admissible lower constant: inf of G V e^(d^2/(4-delta)t).
    pub c2_max: f64,
}

pub fn kernel_two_sided(delta: f64, d_grid: &[f64], t_grid: &[f64]) -> Result<TwoSidedReport> {
    if !(delta > 0.0 && delta < 4.0) {
        return Err(Error::domain(format!("delta = {delta} must lie in (0, 4)")));
    }
    let kernel = ClosedFormFamily::HeatKernelH3 { t0: 0.0 };
    let mut c1_min = 0.0f64;
    let mut c2_max = f64::INFINITY;
    for &t in t_grid {
        let volume = h3_ball_volume(t.sqrt());
        for &d in d_grid {
            let g = kernel.sample_line(d, t)?.u;
            let upper = g * volume * (d * d / ((4.0 + delta) * t)).exp();
            let lower = g * volume * (d * d / ((4.0 - delta) * t)).exp();
            c1_min = c1_min.max(upper);
            c2_max = c2_max.min(lower);
        }
    }
    Ok(TwoSidedReport { delta, c1_min, c2_max })
}

/// Li-Yau drift scan: sup of |grad u|^2/u^2 - alpha u_t/u over the
/// half-cylinder, scaled by 1/R^2 + 1/t + k.
#[derive(Debug, Clone)]
pub struct LiYauReport {
    pub alpha: f64,
    /// Raw supremum of the left side (can be negative).
    pub sup_raw: f64,
    /// Empirical constant: sup of LHS / (1/R^2 + 1/t + k), floored at 0.
    pub c_emp: f64,
    pub argmax: Option<(f64, f64)>,
}

pub fn li_yau_check(
    family: &ClosedFormFamily,
    alpha: f64,
    x0: f64,
    env: &BoundEnv,
    nx: usize,
    nt: usize,
) -> Result<LiYauReport> {
    if !(alpha >= 1.0) {
        return Err(Error::domain(format!(
            "alpha = {alpha} must be >= 1 (alpha = 1 is the global sanity case)"
        )));
    }
    let half = if env.radius.is_finite() { env.radius / 2.0 } else { 2.0 * env.horizon.sqrt() };
    let xs = sweep::lin_space(x0 - half, x0 + half, nx)?;
    let denom_base = env.inv_radius_sq() + env.k;
    let mut report = LiYauReport { alpha, sup_raw: f64::NEG_INFINITY, c_emp: 0.0, argmax: None };
    for j in 1..=nt {
        let t = env.horizon * j as f64 / nt as f64;
        let denom = denom_base + 1.0 / t;
        for &x in &xs {
            let sample = family.sample_line(x, t)?;
            let lg = sample.log_grad_norm();
            let lhs = lg * lg - alpha * sample.u_t / sample.u;
            if lhs > report.sup_raw {
                report.sup_raw = lhs;
                report.argmax = Some((x, t));
            }
            let scaled = lhs / denom;
            if scaled > report.c_emp {
                report.c_emp = scaled;
            }
        }
    }
    Ok(report)
}

/// Flat equality case: for the Euclidean kernel with alpha = 1 the drift
/// form equals n/2t identically; returns the max deviation of LHS * 2t/n
/// from 1 over the grid.
pub fn li_yau_flat_kernel_identity(n: usize, d_grid: &[f64], t_grid: &[f64]) -> Result<f64> {
    let kernel = ClosedFormFamily::HeatKernelEuclidean {
        n,
        center: vec![0.0; n],
        t0: 0.0,
    };
    let mut worst = 0.0f64;
    for &t in t_grid {
        for &d in d_grid {
            let sample = kernel.sample_line(d, t)?;
            let lg = sample.log_grad_norm();
            let lhs = lg * lg - sample.u_t / sample.u;
            let deviation = (lhs * 2.0 * t / n as f64 - 1.0).abs();
            worst = worst.max(deviation);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::env_for_family;
    use approx::assert_relative_eq;

    #[test]
    fn euclid_min_c_is_quarter() {
        let q_grid = sweep::log_space(1e-6, 1e8, 300).unwrap();
        let (grid_sup, analytic) = euclid_kernel_min_c(&q_grid);
        assert_eq!(analytic, 0.25);
        assert!(grid_sup <= 0.25);
        assert!((grid_sup - 0.25).abs() <= 1e-6, "grid sup {grid_sup}");
        // d = 0 contributes ratio 0.
        let (zero, _) = euclid_kernel_min_c(&[0.0]);
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn h3_scan_reports_finite_constant() {
        let d_grid = sweep::lin_space(0.0, 8.0, 80).unwrap();
        let t_grid = sweep::log_space(1e-2, 10.0, 40).unwrap();
        let report = h3_kernel_scan(&d_grid, &t_grid, f64::INFINITY).unwrap();
        assert!(report.c_emp.is_finite() && report.c_emp > 0.0);
        assert_eq!(report.violations, 0);
        // Negative curvature pushes the constant above the flat 1/4 for
        // late times.
        assert!(report.c_emp > 0.25);
    }

    #[test]
    fn volume_formula_matches_quadrature() {
        // V(r) = integral of the area element 4 pi sinh^2.
        for &r in &[0.3, 1.0, 2.5] {
            let cells = 200_000;
            let h = r / cells as f64;
            let mut acc = 0.0;
            for i in 0..cells {
                let rho = (i as f64 + 0.5) * h;
                acc += 4.0 * std::f64::consts::PI * rho.sinh().powi(2) * h;
            }
            assert_relative_eq!(h3_ball_volume(r), acc, max_relative = 1e-8);
        }
        assert_relative_eq!(h3_ball_volume(1.0), 5.11093, max_relative = 1e-5);
    }

    #[test]
    fn two_sided_bounds_on_model_kernel() {
        let d_grid = sweep::lin_space(0.0, 3.0, 40).unwrap();
        let t_grid = sweep::log_space(0.05, 2.0, 30).unwrap();
        let report = kernel_two_sided(1.0, &d_grid, &t_grid).unwrap();
        assert!(report.c1_min > 0.0 && report.c1_min.is_finite());
        assert!(report.c2_max > 0.0 && report.c2_max.is_finite());
        assert!(report.c2_max <= report.c1_min);
        assert!(kernel_two_sided(0.0, &d_grid, &t_grid).is_err());
        assert!(kernel_two_sided(4.0, &d_grid, &t_grid).is_err());
    }

    #[test]
    fn li_yau_flat_kernel_equality() {
        let d_grid = sweep::lin_space(0.0, 3.0, 25).unwrap();
        let t_grid = sweep::log_space(0.05, 5.0, 25).unwrap();
        for n in [1usize, 2, 3] {
            let worst = li_yau_flat_kernel_identity(n, &d_grid, &t_grid).unwrap();
            assert!(worst <= 1e-10, "n = {n}: deviation {worst}");
        }
    }

    #[test]
    fn li_yau_exp_travel_is_negative() {
        // LHS = a^2 - alpha a^2 <= 0 for alpha >= 1.
        let family = ClosedFormFamily::ExpTravel { a: 1.5, n: 1 };
        let env = env_for_family(&family, 0.0, 1.0, 1.0).unwrap();
        let report = li_yau_check(&family, 2.0, 0.0, &env, 31, 10).unwrap();
        assert_relative_eq!(report.sup_raw, -2.25, max_relative = 1e-12);
        assert_eq!(report.c_emp, 0.0);
    }

    #[test]
    fn li_yau_constant_mode_is_zero() {
        let family = ClosedFormFamily::FourierPositive { lambda: 0.0, amplitude: 2.0 };
        let env = env_for_family(&family, 0.0, 1.0, 1.0).unwrap();
        let report = li_yau_check(&family, 1.0, 0.0, &env, 31, 10).unwrap();
        assert_eq!(report.sup_raw, 0.0);
        assert_eq!(report.c_emp, 0.0);
    }

    #[test]
    fn li_yau_rejects_small_alpha() {
        let family = ClosedFormFamily::ExpTravel { a: 1.0, n: 1 };
        let env = env_for_family(&family, 0.0, 1.0, 1.0).unwrap();
        assert!(li_yau_check(&family, 0.9, 0.0, &env, 11, 4).is_err());
    }
}
