//! Extremal lower-bound search: how large can |grad u|^2/u^2 get at a
//! prescribed log-ratio s, time t and radius R?
//!
//! Two families realize the known lower bounds. The traveling exponential
//! u = exp(a x + a^2 t) pinned at x = R/2 with a = 2s/R achieves
//! lhs = 4 s^2/R^2 exactly. The shifted Gaussian family achieves the
//! temporal part: with ceiling M = a^(-n/2) over B(0,R) x (0,t], the
//! constraint log(M/u(x,t)) = s fixes |x|^2 = 4 (t+a) (s - psi0(a)) with
//! psi0(a) = (n/2) log(1 + t/a), leaving lhs(a) = (s - psi0(a)) / (t + a)
//! to be maximized over the feasible offsets a (|x| <= R/2). The classical
//! evaluation point |x| = sqrt(t)/2 corresponds to solving
//! psi(a) = (n/2) log(1 + t/a) + t/(16 (t+a)) = s for a.

use crate::bounds::{self, HamiltonQuery};
use crate::error::{Error, Result};
use crate::solutions::ClosedFormFamily;
use crate::sweep;

/// Best configuration found at fixed (s, t, R).
#[derive(Debug, Clone)]
pub struct LowerSearchResult {
    /// Achieved |grad u|^2 / u^2.
    pub lhs: f64,
    pub family: ClosedFormFamily,
    /// First coordinate of the evaluation point (x0 = 0 cylinders).
    pub point: f64,
    /// log(M/u) at the evaluation point; equals the query s by construction.
    pub achieved_s: f64,
    pub recipe: &'static str,
}

/// Golden-section maximization of a unimodal function on [lo, hi].
pub fn golden_section_max(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    iterations: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iterations {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 > f2 { (x1, f1) } else { (x2, f2) }
}

fn psi0(a: f64, t: f64, n: f64) -> f64 {
    n / 2.0 * (1.0 + t / a).ln()
}

/// The classical root equation psi(a) = (n/2) log(1 + t/a) + t/(16(t+a)).
pub fn gaussian_psi(a: f64, t: f64, n: usize) -> f64 {
    psi0(a, t, n as f64) + t / (16.0 * (t + a))
}

/// Solves psi(a) = s by bisection; psi decreases from +inf to 0.
pub fn solve_gaussian_psi(s: f64, t: f64, n: usize) -> Result<f64> {
    if !(s > 0.0 && t > 0.0) {
        return Err(Error::domain(format!("psi root needs s, t > 0, got s={s}, t={t}")));
    }
    let mut lo = t;
    let mut hi = t;
    let mut guard = 0;
    while gaussian_psi(lo, t, n) < s {
        lo /= 8.0;
        guard += 1;
        if guard > 400 {
            return Err(Error::Internal("psi bracket failure toward a -> 0".into()));
        }
    }
    while gaussian_psi(hi, t, n) > s {
        hi *= 8.0;
        guard += 1;
        if guard > 800 {
            return Err(Error::Internal("psi bracket failure toward a -> inf".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gaussian_psi(mid, t, n) > s {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Feasible-offset window [a0, a1] of the constrained Gaussian problem and
/// the objective lhs(a); a1 is infinite when R is.
struct GaussianProblem {
    s: f64,
    t: f64,
    n: f64,
    half_r_sq: f64, // (R/2)^2, +inf for global
}

impl GaussianProblem {
    fn x_sq(&self, a: f64) -> f64 {
        4.0 * (self.t + a) * (self.s - psi0(a, self.t, self.n))
    }

    fn objective(&self, a: f64) -> f64 {
        let w = self.s - psi0(a, self.t, self.n);
        if w < 0.0 || self.x_sq(a) > self.half_r_sq {
            return f64::NEG_INFINITY;
        }
        w / (self.t + a)
    }

    /// Smallest feasible offset: psi0(a0) = s.
    fn a_lower(&self) -> f64 {
        self.t / ((2.0 * self.s / self.n).exp() - 1.0)
    }

    /// Largest feasible offset under |x| <= R/2 (monotone constraint).
    fn a_upper(&self) -> f64 {
        let a0 = self.a_lower();
        if self.half_r_sq.is_infinite() {
            return a0 * 1e9 + self.t * 1e9;
        }
        let mut hi = a0.max(self.t);
        let mut guard = 0;
        while self.x_sq(hi) < self.half_r_sq {
            hi *= 4.0;
            guard += 1;
            if guard > 600 {
                return hi;
            }
        }
        let mut lo = a0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.x_sq(mid) < self.half_r_sq {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Executes the extremal recipes at fixed (s, t, R) and locally refines the
/// Gaussian offset by golden-section search; returns the best achieved lhs.
pub fn lower_search(q: &HamiltonQuery, n: usize) -> Result<LowerSearchResult> {
    if !(q.s > 0.0) {
        // s = 0 forces u = M: only the zero-gradient configuration remains.
        return Ok(LowerSearchResult {
            lhs: 0.0,
            family: ClosedFormFamily::FourierPositive { lambda: 0.0, amplitude: 2.0 },
            point: 0.0,
            achieved_s: 0.0,
            recipe: "ceiling",
        });
    }
    let mut best: Option<LowerSearchResult> = None;
    let mut consider = |candidate: LowerSearchResult| {
        if best.as_ref().map_or(true, |b| candidate.lhs > b.lhs) {
            best = Some(candidate);
        }
    };

    // Traveling exponential pinned at the half-radius: exact for the
    // spatial part, available only on finite balls.
    if q.radius.is_finite() {
        let a = 2.0 * q.s / q.radius;
        consider(LowerSearchResult {
            lhs: a * a,
            family: ClosedFormFamily::ExpTravel { a, n },
            point: q.radius / 2.0,
            achieved_s: q.s,
            recipe: "exponential",
        });
    }

    let problem = GaussianProblem {
        s: q.s,
        t: q.t,
        n: n as f64,
        half_r_sq: if q.radius.is_finite() { q.radius * q.radius / 4.0 } else { f64::INFINITY },
    };
    let a0 = problem.a_lower();
    let a1 = problem.a_upper();

    // Classical evaluation point |x| = sqrt(t)/2, feasible when t <= R^2.
    if q.t.sqrt() / 2.0 <= problem.half_r_sq.sqrt() {
        if let Ok(a_root) = solve_gaussian_psi(q.s, q.t, n) {
            let lhs = q.t / (16.0 * (q.t + a_root) * (q.t + a_root));
            consider(LowerSearchResult {
                lhs,
                family: ClosedFormFamily::ShiftedGaussian { a: a_root, n },
                point: q.t.sqrt() / 2.0,
                achieved_s: q.s,
                recipe: "gaussian-psi-root",
            });
        }
    }

    // Constrained Gaussian sweep over the feasible offset window: coarse
    // log scan to bracket the peak, then golden refinement. For very large
    // s the window underflows and the exponential recipe dominates anyway.
    if a0 > 0.0 && a0.is_finite() && a1 > a0 {
        let lo = a0 * (1.0 + 1e-9);
        let grid = sweep::log_space(lo, a1.max(lo * (1.0 + 1e-6)), 64)?;
        let mut best_idx = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, &a) in grid.iter().enumerate() {
            let v = problem.objective(a);
            if v > best_val {
                best_val = v;
                best_idx = i;
            }
        }
        if best_val > f64::NEG_INFINITY {
            let blo = grid[best_idx.saturating_sub(1)];
            let bhi = grid[(best_idx + 1).min(grid.len() - 1)];
            let (a_star, val) =
                golden_section_max(|a| problem.objective(a), blo, bhi, 120);
            let (a_best, lhs) = if val > best_val { (a_star, val) } else { (grid[best_idx], best_val) };
            consider(LowerSearchResult {
                lhs,
                family: ClosedFormFamily::ShiftedGaussian { a: a_best, n },
                point: problem.x_sq(a_best).max(0.0).sqrt(),
                achieved_s: q.s,
                recipe: "gaussian-golden",
            });
        }
    }

    best.ok_or_else(|| Error::Internal("no lower-bound recipe was feasible".into()))
}

/// One cell of the sharpness map.
#[derive(Debug, Clone, Copy)]
pub struct HmapCell {
    pub s: f64,
    pub t: f64,
    pub radius: f64,
    pub lower_search: f64,
    pub lower_envelope: f64,
    pub h0: f64,
    /// h0 / lower_envelope: the logarithmic gap for s <= 1/2.
    pub ratio: f64,
}

/// Sharpness map over an (s, t, R) grid; empty grids give an empty map.
pub fn hmap(s_grid: &[f64], t_grid: &[f64], r_grid: &[f64], n: usize) -> Result<Vec<HmapCell>> {
    let mut cells = Vec::with_capacity(s_grid.len() * t_grid.len() * r_grid.len());
    for &s in s_grid {
        for &t in t_grid {
            for &radius in r_grid {
                let q = HamiltonQuery::new(s, t, radius)?;
                let achieved = lower_search(&q, n)?.lhs;
                let envelope = bounds::lower_envelope(&q)?;
                let h0 = bounds::h0(&q, 0.0)?;
                cells.push(HmapCell {
                    s,
                    t,
                    radius,
                    lower_search: achieved,
                    lower_envelope: envelope,
                    h0,
                    ratio: h0 / envelope,
                });
            }
        }
    }
    Ok(cells)
}
