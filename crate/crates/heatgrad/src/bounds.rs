//! Closed-form evaluation of the gradient bounds and their companions.
//!
//! Everything here is "C-free": the right-hand sides are evaluated without
//! any dimensional constant, so `|grad u|^2/u^2 <= C * bound` can be probed
//! empirically by the verify module for trial values of C. The basic
//! variable is the log-ratio `s = log(M/u) >= 0` measured against the
//! ceiling M of the solution on the parabolic cylinder.
//!
//! The sharp local profile is
//!
//! ```text
//! H0(s,t,R) = ( |log s|^2/R^2 + (1/t + k)|log s| ) s^2     for 0 < s <= 1/2
//!           =   s^2/R^2       + (1/t + k) s                for s > 1/2
//! ```
//!
//! and its global (R = inf) limit factors as `(1/t + k) * H1(s)` with
//! `H1(s) = s^2|log s|` below 1/2 and `H1(s) = s` above. Both are extended
//! by continuity with value 0 at s = 0. The jump at s = 1/2 is kept exactly
//! as defined; callers compare bounds only up to multiplicative constants.

use crate::error::{Error, Result};

/// Cylinder parameters every bound is evaluated against.
///
/// `radius` may be `f64::INFINITY` for global estimates (then 1/R^2 = 0).
/// `ceiling` is the value M with respect to which `s = log(M/u) >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundEnv {
    pub n: usize,
    pub k: f64,
    pub radius: f64,
    pub horizon: f64,
    pub ceiling: f64,
}

impl BoundEnv {
    pub fn new(n: usize, k: f64, radius: f64, horizon: f64, ceiling: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("dimension n must be >= 1"));
        }
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::domain(format!("curvature magnitude k = {k} must be finite >= 0")));
        }
        if !(radius > 0.0) {
            return Err(Error::domain(format!("radius R = {radius} must be > 0 (or +inf)")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::domain(format!("horizon T = {horizon} must be finite > 0")));
        }
        if !(ceiling > 0.0 && ceiling.is_finite()) {
            return Err(Error::domain(format!("ceiling M = {ceiling} must be finite > 0")));
        }
        Ok(BoundEnv { n, k, radius, horizon, ceiling })
    }

    /// 1/R^2, exactly 0 for the infinite radius.
    pub fn inv_radius_sq(&self) -> f64 {
        if self.radius.is_infinite() { 0.0 } else { self.radius.powi(-2) }
    }
}

/// Point in (s, t, R)-space at which a bound profile is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonQuery {
    /// Log-ratio log(M/u), >= 0.
    pub s: f64,
    /// Time, > 0.
    pub t: f64,
    /// Ball radius, > 0 or +inf.
    pub radius: f64,
}

impl HamiltonQuery {
    pub fn new(s: f64, t: f64, radius: f64) -> Result<Self> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::domain(format!("log-ratio s = {s} must be finite >= 0")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(format!("time t = {t} must be finite > 0")));
        }
        if !(radius > 0.0) {
            return Err(Error::domain(format!("radius R = {radius} must be > 0 (or +inf)")));
        }
        Ok(HamiltonQuery { s, t, radius })
    }

    fn inv_radius_sq(&self) -> f64 {
        if self.radius.is_infinite() { 0.0 } else { self.radius.powi(-2) }
    }
}

/// Which right-hand side to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundKind {
    /// Elliptic bound for positive harmonic functions: 1/R^2 + k.
    ChengYau,
    /// Classical global parabolic bound: (1/t + 2k) s.
    HamiltonClassic,
    /// Parabolic bound with drift term alpha * u_t/u on the left: 1/R^2 + 1/t + k.
    LiYau { alpha: f64 },
    /// Localized quadratic-log bound: (1/R^2 + 1/t + k)(1 + s^2).
    Sz2006,
    /// Positive-infimum variant, carrying s_bar = log(M/m) >= s:
    /// ((1 + s_bar)/R^2 + 1/t + k) s.
    Dn { s_bar: f64 },
    /// Sharp local profile H0.
    H0,
    /// Global profile (1/t + k) H1(s).
    H1Global,
    /// Lower envelope (1/R^2 + 1/(t(s+1))) s^2.
    LowerEnvelope,
    /// Global lower envelope s^2 / (t (s+1)).
    LowerGlobal,
    /// Heat-kernel log-gradient profile (evaluated by the kernel checker,
    /// which knows the distance to the kernel center).
    KernelLogGrad,
}

impl BoundKind {
    /// Stable identifier used in CLI flags and report echoes.
    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::ChengYau => "cheng-yau",
            BoundKind::HamiltonClassic => "hamilton",
            BoundKind::LiYau { .. } => "li-yau",
            BoundKind::Sz2006 => "sz2006",
            BoundKind::Dn { .. } => "dn",
            BoundKind::H0 => "h0",
            BoundKind::H1Global => "h1-global",
            BoundKind::LowerEnvelope => "lower-envelope",
            BoundKind::LowerGlobal => "lower-global",
            BoundKind::KernelLogGrad => "kernel-log-grad",
        }
    }

    /// C-free value of the selected bound at `q` with curvature `k`.
    pub fn evaluate(&self, q: &HamiltonQuery, k: f64) -> Result<f64> {
        check_query(q, k)?;
        let inv_r2 = q.inv_radius_sq();
        let s = q.s;
        match *self {
            BoundKind::ChengYau => Ok(inv_r2 + k),
            BoundKind::HamiltonClassic => Ok((1.0 / q.t + 2.0 * k) * s),
            BoundKind::LiYau { alpha } => {
                if !(alpha >= 1.0) {
                    return Err(Error::config(format!("li-yau needs alpha >= 1, got {alpha}")));
                }
                Ok(inv_r2 + 1.0 / q.t + k)
            }
            BoundKind::Sz2006 => Ok((inv_r2 + 1.0 / q.t + k) * (1.0 + s * s)),
            BoundKind::Dn { s_bar } => {
                if !(s_bar >= s) {
                    return Err(Error::config(format!(
                        "dn needs s_bar >= s, got s_bar = {s_bar} < s = {s}"
                    )));
                }
                Ok(((1.0 + s_bar) * inv_r2 + 1.0 / q.t + k) * s)
            }
            BoundKind::H0 => h0(q, k),
            BoundKind::H1Global => h1_global(s, q.t, k),
            BoundKind::LowerEnvelope => lower_envelope(q),
            BoundKind::LowerGlobal => {
                let global = HamiltonQuery { radius: f64::INFINITY, ..*q };
                lower_envelope(&global)
            }
            BoundKind::KernelLogGrad => Err(Error::config(
                "kernel-log-grad depends on the distance to the kernel center; \
                 use kernel_log_grad_bound / the kernel checker",
            )),
        }
    }
}

fn check_query(q: &HamiltonQuery, k: f64) -> Result<()> {
    if !(q.s >= 0.0 && q.s.is_finite()) {
        return Err(Error::domain(format!("log-ratio s = {} must be finite >= 0", q.s)));
    }
    if !(q.t > 0.0 && q.t.is_finite()) {
        return Err(Error::domain(format!("time t = {} must be finite > 0", q.t)));
    }
    if !(q.radius > 0.0) {
        return Err(Error::domain(format!("radius R = {} must be > 0", q.radius)));
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::domain(format!("curvature magnitude k = {k} must be finite >= 0")));
    }
    Ok(())
}

/// Sharp local profile H0(s, t, R) with curvature folded in.
pub fn h0(q: &HamiltonQuery, k: f64) -> Result<f64> {
    check_query(q, k)?;
    let s = q.s;
    if s == 0.0 {
        return Ok(0.0);
    }
    let decay = 1.0 / q.t + k;
    let inv_r2 = q.inv_radius_sq();
    // Factored so that the infinite-radius value equals (1/t + k) H1(s)
    // bitwise, not just algebraically.
    if s <= 0.5 {
        let l = -s.ln();
        Ok((l * inv_r2 + decay) * (s * s * l))
    } else {
        Ok(s * s * inv_r2 + decay * s)
    }
}

/// Profile H1 alone: s^2 |log s| below 1/2, s above, 0 at 0.
pub fn h1_profile(s: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::domain(format!("log-ratio s = {s} must be finite >= 0")));
    }
    if s == 0.0 {
        Ok(0.0)
    } else if s <= 0.5 {
        Ok(s * s * (-s.ln()))
    } else {
        Ok(s)
    }
}

/// Global bound (1/t + k) H1(s).
pub fn h1_global(s: f64, t: f64, k: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("time t = {t} must be finite > 0")));
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::domain(format!("curvature magnitude k = {k} must be finite >= 0")));
    }
    Ok((1.0 / t + k) * h1_profile(s)?)
}

/// Lower envelope (1/R^2 + 1/(t(s+1))) s^2; the 1/R^2 term vanishes for
/// the infinite radius, giving s^2/(t(s+1)).
pub fn lower_envelope(q: &HamiltonQuery) -> Result<f64> {
    check_query(q, 0.0)?;
    let s = q.s;
    Ok((q.inv_radius_sq() + 1.0 / (q.t * (s + 1.0))) * s * s)
}

/// Pseudo-Harnack pair: theta = (1 + C d/R)^-1 and L = 2 exp(C R^2 (1/t + k)).
///
/// Scope is same-time comparison of points inside B(x0, R/2), so d <= R.
pub fn pseudo_harnack(d: f64, env: &BoundEnv, t: f64, trial_c: f64) -> Result<(f64, f64)> {
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::domain(format!("distance d = {d} must be finite >= 0")));
    }
    if !env.radius.is_finite() {
        return Err(Error::domain("pseudo-Harnack needs a finite radius"));
    }
    if d > env.radius {
        return Err(Error::domain(format!(
            "distance d = {d} exceeds radius R = {}; points must lie in B(x0, R/2)",
            env.radius
        )));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("time t = {t} must be finite > 0")));
    }
    if !(trial_c > 0.0) {
        return Err(Error::domain(format!("trial constant C = {trial_c} must be > 0")));
    }
    let theta = 1.0 / (1.0 + trial_c * d / env.radius);
    let l = 2.0 * (trial_c * env.radius * env.radius * (1.0 / t + env.k)).exp();
    Ok((theta, l))
}

/// Which side of the ceiling the base point sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulusBranch {
    /// u <= M/2: xi = M/u.
    FarFromCeiling,
    /// u >= M/2: xi = log(M/u).
    NearCeiling,
}

fn psi_far(d: f64, xi: f64, env: &BoundEnv, t: f64, trial_c: f64) -> f64 {
    let rate = (trial_c * d * env.radius * (1.0 / t + env.k)).exp();
    rate * xi.powf(trial_c * d / env.radius) - 1.0
}

fn psi_near(d: f64, xi: f64, env: &BoundEnv, t: f64, trial_c: f64) -> f64 {
    let rate = (trial_c * d * env.radius * (1.0 / t + env.k)).exp();
    (rate * xi.powf(1.0 / (1.0 + trial_c * d / env.radius)) - xi).exp() - 1.0
}

/// Modulus of continuity psi(d) for the relative increment |u(x)-u(y)|/u(x).
///
/// Branch selection is by u against M/2; exactly at M/2 both branch values
/// are computed and the larger returned, keeping the guarantee valid on the
/// overlap. psi(0) = 0 exactly in both branches.
pub fn modulus_psi(d: f64, u_val: f64, env: &BoundEnv, t: f64, trial_c: f64) -> Result<f64> {
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::domain(format!("distance d = {d} must be finite >= 0")));
    }
    if !env.radius.is_finite() {
        return Err(Error::domain("modulus_psi needs a finite radius"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("time t = {t} must be finite > 0")));
    }
    if !(u_val > 0.0) || u_val > env.ceiling {
        return Err(Error::domain(format!(
            "base value u = {u_val} must satisfy 0 < u <= M = {}",
            env.ceiling
        )));
    }
    let m = env.ceiling;
    let half = m / 2.0;
    if u_val < half {
        Ok(psi_far(d, m / u_val, env, t, trial_c))
    } else if u_val > half {
        Ok(psi_near(d, (m / u_val).ln(), env, t, trial_c))
    } else {
        let far = psi_far(d, m / u_val, env, t, trial_c);
        let near = psi_near(d, (m / u_val).ln(), env, t, trial_c);
        Ok(far.max(near))
    }
}

/// Admissible-pair radius c R / (R^2 (1/t + k) + |log xi|) of the modulus
/// theorem, with xi chosen by the branch of `u_val`. At exactly M/2 the
/// smaller (conservative) branch radius is returned.
pub fn modulus_threshold(u_val: f64, env: &BoundEnv, t: f64, trial_c_small: f64) -> Result<f64> {
    if !env.radius.is_finite() {
        return Err(Error::domain("modulus_threshold needs a finite radius"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("time t = {t} must be finite > 0")));
    }
    if !(u_val > 0.0) || u_val > env.ceiling {
        return Err(Error::domain(format!(
            "base value u = {u_val} must satisfy 0 < u <= M = {}",
            env.ceiling
        )));
    }
    let m = env.ceiling;
    let base = env.radius * env.radius * (1.0 / t + env.k);
    let radius_for = |xi: f64| trial_c_small * env.radius / (base + xi.ln().abs());
    let half = m / 2.0;
    if u_val < half {
        Ok(radius_for(m / u_val))
    } else if u_val > half {
        Ok(radius_for((m / u_val).ln()))
    } else {
        Ok(radius_for(m / u_val).min(radius_for((m / u_val).ln())))
    }
}

/// Heat-kernel log-gradient profile (C/t)(1 + d^2/t).
pub fn kernel_log_grad_bound(d: f64, t: f64, trial_c: f64) -> Result<f64> {
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::domain(format!("distance d = {d} must be finite >= 0")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("time t = {t} must be finite > 0")));
    }
    Ok(trial_c / t * (1.0 + d * d / t))
}

/// The three functional rewrites of the gradient estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradForm {
    /// u <= M/2: phi(s) = log(sqrt(s) + K).
    SmallU,
    /// u >= M/2: phi(s) = log(sqrt(|log s|) + K).
    LargeU,
    /// All u: phi(s) = log(sqrt(s + log(1 + 1/s)) + K).
    Global,
}

impl GradForm {
    pub fn name(&self) -> &'static str {
        match self {
            GradForm::SmallU => "small-u",
            GradForm::LargeU => "large-u",
            GradForm::Global => "global",
        }
    }
}

/// Value of the composed profile phi(s) for the given form; `big_k` is the
/// dimensionless K = R sqrt(1/t + k).
pub fn grad_form_value(form: GradForm, s: f64, big_k: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Singular(format!("phi is singular at s = {s}; need s > 0")));
    }
    match form {
        GradForm::SmallU => Ok((s.sqrt() + big_k).ln()),
        GradForm::LargeU => {
            if s == 1.0 {
                return Err(Error::Singular("log s = 0 at s = 1".into()));
            }
            Ok((s.ln().abs().sqrt() + big_k).ln())
        }
        GradForm::Global => {
            let w = s + (1.0 + 1.0 / s).ln();
            Ok((w.sqrt() + big_k).ln())
        }
    }
}

/// |phi'(s)| for the given form.
pub fn grad_form_derivative(form: GradForm, s: f64, big_k: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Singular(format!("phi' is singular at s = {s}; need s > 0")));
    }
    match form {
        GradForm::SmallU => {
            let r = s.sqrt();
            Ok(1.0 / (2.0 * r * (r + big_k)))
        }
        GradForm::LargeU => {
            if s == 1.0 {
                return Err(Error::Singular("log s = 0 at s = 1".into()));
            }
            let l = s.ln().abs();
            let r = l.sqrt();
            Ok(1.0 / (2.0 * s * r * (r + big_k)))
        }
        GradForm::Global => {
            let w = s + (1.0 + 1.0 / s).ln();
            let wp = 1.0 - 1.0 / (s * (s + 1.0));
            let r = w.sqrt();
            Ok((wp / (2.0 * r * (r + big_k))).abs())
        }
    }
}

/// Exact chain-rule magnitude of the gradient of the composed functional
/// phi(log(M/u)) given the point values of u and |grad u|.
///
/// The form preconditions mirror the estimate's branches: `SmallU` expects
/// u <= M/2 and `LargeU` expects u >= M/2 (the Global form has no gate).
pub fn grad_functional(
    form: GradForm,
    u_val: f64,
    grad_norm: f64,
    env: &BoundEnv,
    t: f64,
) -> Result<f64> {
    if !(u_val > 0.0 && u_val < env.ceiling) {
        return Err(Error::domain(format!(
            "need 0 < u < M, got u = {u_val}, M = {}",
            env.ceiling
        )));
    }
    if !(grad_norm >= 0.0 && grad_norm.is_finite()) {
        return Err(Error::domain(format!("|grad u| = {grad_norm} must be finite >= 0")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("time t = {t} must be finite > 0")));
    }
    if !env.radius.is_finite() {
        return Err(Error::domain("grad_functional needs a finite radius"));
    }
    match form {
        GradForm::SmallU if u_val > env.ceiling / 2.0 => {
            return Err(Error::domain("small-u form expects u <= M/2"));
        }
        GradForm::LargeU if u_val < env.ceiling / 2.0 => {
            return Err(Error::domain("large-u form expects u >= M/2"));
        }
        _ => {}
    }
    if grad_norm == 0.0 {
        return Ok(0.0);
    }
    let s = (env.ceiling / u_val).ln();
    let big_k = env.radius * (1.0 / t + env.k).sqrt();
    Ok(grad_norm / u_val * grad_form_derivative(form, s, big_k)?)
}
