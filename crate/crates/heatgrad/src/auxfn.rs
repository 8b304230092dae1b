//! The auxiliary function driving the sharp bound, and numerical
//! certification of its comparability properties.
//!
//! With L(s) = log(e + 1/s) the pieces are
//!
//! ```text
//! g1(s) = s L(s)
//! g2(s) = s (s+1)^(-1/2) L(s)^(1/2)
//! g(s)  = g1/R + K g2,        K = tau^(-1/2) + k^(1/2)
//! ```
//!
//! and the two sides whose comparability is certified are
//! F1 = g (g' - g'') and F2 = |g - g'|/R + B with B = 1/R^2 + 1/tau + k.
//!
//! Derivatives are closed-form (s L(s) differentiates through
//! s E(s) = e s + 1, which keeps the expressions stable at both ends of the
//! s range) and are locked against finite differences by the test suite.

use crate::error::{Error, Result};
use crate::sweep;

/// Scan parameters; `aux_time` is the proof-time parameter of the scan,
/// distinct from any solution time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxParams {
    pub radius: f64,
    pub aux_time: f64,
    pub k: f64,
}

impl AuxParams {
    pub fn new(radius: f64, aux_time: f64, k: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!("radius = {radius} must be finite > 0")));
        }
        if !(aux_time > 0.0 && aux_time.is_finite()) {
            return Err(Error::domain(format!("aux-time = {aux_time} must be finite > 0")));
        }
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::domain(format!("k = {k} must be finite >= 0")));
        }
        Ok(AuxParams { radius, aux_time, k })
    }

    /// K = tau^(-1/2) + k^(1/2).
    pub fn big_k(&self) -> f64 {
        self.aux_time.powf(-0.5) + self.k.sqrt()
    }

    /// B = R^(-2) + tau^(-1) + k.
    pub fn big_b(&self) -> f64 {
        self.radius.powi(-2) + 1.0 / self.aux_time + self.k
    }
}

/// g and its first two derivatives, plus the bare pieces g1, g2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GEval {
    pub g: f64,
    pub g_prime: f64,
    pub g_second: f64,
    pub g1: f64,
    pub g2: f64,
}

/// Closed-form evaluation of (g, g', g'', g1, g2) at s > 0.
pub fn g_eval(s: f64, p: &AuxParams) -> Result<GEval> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain(format!("s = {s} must be finite > 0")));
    }
    let e = std::f64::consts::E;
    let se = e * s + 1.0; // s * (e + 1/s)
    let l = (e + 1.0 / s).ln();

    // g1 = s L
    let g1 = s * l;
    let g1_p = l - 1.0 / se;
    let g1_pp = -1.0 / (s * se * se);

    // g2 = phi sqrt(L), phi = s (s+1)^(-1/2)
    let sqrt_l = l.sqrt();
    let sp1 = s + 1.0;
    let phi = s / sp1.sqrt();
    let phi_p = (s + 2.0) / (2.0 * sp1.powf(1.5));
    let phi_pp = -(s + 4.0) / (4.0 * sp1.powf(2.5));
    let l_p = -1.0 / (s * se);
    let l_pp = (2.0 * e * s + 1.0) / (s * s * se * se);
    let g2 = phi * sqrt_l;
    let g2_p = phi_p * sqrt_l + phi * l_p / (2.0 * sqrt_l);
    let g2_pp = phi_pp * sqrt_l
        + phi_p * l_p / sqrt_l
        + phi * (l_pp / (2.0 * sqrt_l) - l_p * l_p / (4.0 * l * sqrt_l));

    let inv_r = 1.0 / p.radius;
    let big_k = p.big_k();
    Ok(GEval {
        g: inv_r * g1 + big_k * g2,
        g_prime: inv_r * g1_p + big_k * g2_p,
        g_second: inv_r * g1_pp + big_k * g2_pp,
        g1,
        g2,
    })
}

/// The comparability pair F1 = g (g' - g''), F2 = |g - g'|/R + B.
pub fn f_pair(s: f64, p: &AuxParams) -> Result<(f64, f64)> {
    let ge = g_eval(s, p)?;
    let f1 = ge.g * (ge.g_prime - ge.g_second);
    let f2 = (ge.g - ge.g_prime).abs() / p.radius + p.big_b();
    Ok((f1, f2))
}

/// One grid cell of the comparability scan.
#[derive(Debug, Clone, Copy)]
pub struct AuxScanRow {
    pub s: f64,
    pub radius: f64,
    pub aux_time: f64,
    pub k: f64,
    pub f1: f64,
    pub f2: f64,
    pub ratio: f64,
}

/// Envelope constants certified over a parameter grid.
#[derive(Debug, Clone)]
pub struct AuxScanResult {
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// (s, R, tau, k) attaining the extremes.
    pub argmin: (f64, f64, f64, f64),
    pub argmax: (f64, f64, f64, f64),
    /// Grid cells whose evaluation was non-finite, excluded from the envelope.
    pub flagged: usize,
    pub rows: Vec<AuxScanRow>,
    pub grid_description: String,
}

/// Scan grid: the cartesian product of the four axes.
#[derive(Debug, Clone)]
pub struct AuxGrid {
    pub s: Vec<f64>,
    pub radius: Vec<f64>,
    pub aux_time: Vec<f64>,
    pub k: Vec<f64>,
}

impl AuxGrid {
    /// The default certification grid: log-spaced s plus the reference
    /// {0.1, 1, 10} x {0.01, 1, 100} x {0, 1, 10} parameter block.
    pub fn standard(s_min: f64, s_max: f64, points: usize) -> Result<Self> {
        Ok(AuxGrid {
            s: sweep::log_space(s_min, s_max, points)?,
            radius: vec![0.1, 1.0, 10.0],
            aux_time: vec![0.01, 1.0, 100.0],
            k: vec![0.0, 1.0, 10.0],
        })
    }
}

/// Min/max of F1/F2 over the grid, with locations.
pub fn comparability_scan(grid: &AuxGrid) -> Result<AuxScanResult> {
    if grid.s.is_empty() || grid.radius.is_empty() || grid.aux_time.is_empty() || grid.k.is_empty()
    {
        return Err(Error::config("comparability scan grid must be nonempty"));
    }
    if grid.s.iter().any(|&s| !(1e-8..=1e8).contains(&s)) {
        return Err(Error::config("scan s range must lie within [1e-8, 1e8]"));
    }
    let mut result = AuxScanResult {
        ratio_min: f64::INFINITY,
        ratio_max: f64::NEG_INFINITY,
        argmin: (0.0, 0.0, 0.0, 0.0),
        argmax: (0.0, 0.0, 0.0, 0.0),
        flagged: 0,
        rows: Vec::with_capacity(grid.s.len() * grid.radius.len() * grid.aux_time.len() * grid.k.len()),
        grid_description: format!(
            "s: {} log points in [{:e}, {:e}]; R: {:?}; tau: {:?}; k: {:?}",
            grid.s.len(),
            grid.s[0],
            grid.s[grid.s.len() - 1],
            grid.radius,
            grid.aux_time,
            grid.k
        ),
    };
    for &radius in &grid.radius {
        for &aux_time in &grid.aux_time {
            for &k in &grid.k {
                let p = AuxParams::new(radius, aux_time, k)?;
                for &s in &grid.s {
                    let (f1, f2) = f_pair(s, &p)?;
                    let ratio = f1 / f2;
                    if !(f1.is_finite() && f2.is_finite() && ratio.is_finite()) {
                        result.flagged += 1;
                        continue;
                    }
                    if ratio < result.ratio_min {
                        result.ratio_min = ratio;
                        result.argmin = (s, radius, aux_time, k);
                    }
                    if ratio > result.ratio_max {
                        result.ratio_max = ratio;
                        result.argmax = (s, radius, aux_time, k);
                    }
                    result.rows.push(AuxScanRow { s, radius, aux_time, k, f1, f2, ratio });
                }
            }
        }
    }
    if result.rows.is_empty() {
        return Err(Error::Validation("every grid point was flagged non-finite".into()));
    }
    Ok(result)
}

/// Bounded-ratio envelope of one asymptotic model claim.
#[derive(Debug, Clone)]
pub struct ClaimEnvelope {
    pub name: &'static str,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

fn g1_prime_raw(s: f64) -> f64 {
    let e = std::f64::consts::E;
    (e + 1.0 / s).ln() - 1.0 / (e * s + 1.0)
}

fn g1_second_raw(s: f64) -> f64 {
    let se = std::f64::consts::E * s + 1.0;
    -1.0 / (s * se * se)
}

fn g2_prime_raw(s: f64) -> f64 {
    // Isolate the g2 part of g' at R = 1, K = 1 by subtracting the g1 part.
    let unit = AuxParams { radius: 1.0, aux_time: 1.0, k: 0.0 };
    let ge = g_eval(s, &unit).expect("s validated by caller");
    ge.g_prime - g1_prime_raw(s)
}

fn g2_second_raw(s: f64) -> f64 {
    let unit = AuxParams { radius: 1.0, aux_time: 1.0, k: 0.0 };
    let ge = g_eval(s, &unit).expect("s validated by caller");
    ge.g_second - g1_second_raw(s)
}

/// Certifies the four derivative models (actual/model stays in a positive
/// bounded window over the s grid).
pub fn asymptotic_claim_envelopes(s_grid: &[f64]) -> Result<Vec<ClaimEnvelope>> {
    let claims: [(&'static str, fn(f64) -> (f64, f64)); 4] = [
        ("g1' ~ log(e + 1/s)", |s| (g1_prime_raw(s), (std::f64::consts::E + 1.0 / s).ln())),
        ("g1'' ~ -1/(s (s+1)^2)", |s| {
            (g1_second_raw(s), -1.0 / (s * (s + 1.0) * (s + 1.0)))
        }),
        ("g2' ~ (s+1)^(-1/2) log^(1/2)(e + 1/s)", |s| {
            let l = (std::f64::consts::E + 1.0 / s).ln();
            (g2_prime_raw(s), l.sqrt() / (s + 1.0).sqrt())
        }),
        ("g2'' ~ -1/(s (s+1)^(1/2) log^(1/2)(e + 1/s))", |s| {
            let l = (std::f64::consts::E + 1.0 / s).ln();
            (g2_second_raw(s), -1.0 / (s * (s + 1.0).sqrt() * l.sqrt()))
        }),
    ];

    let mut out = Vec::new();
    for (name, eval) in claims {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &s in s_grid {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::domain(format!("claim grid point s = {s} must be > 0")));
            }
            let (actual, model) = eval(s);
            let ratio = actual / model;
            if !ratio.is_finite() {
                return Err(Error::Validation(format!("non-finite claim ratio for {name} at s={s}")));
            }
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        out.push(ClaimEnvelope { name, ratio_min: lo, ratio_max: hi });
    }
    Ok(out)
}

/// Outcome of one adaptive quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOutcome {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Adaptive Simpson integration of 1/g over [s_lo, s_hi], carried out in
/// log coordinates so the steep left end is resolved cheaply.
pub fn integral_inv_g(s_lo: f64, s_hi: f64, p: &AuxParams, tol: f64) -> Result<QuadratureOutcome> {
    if !(s_lo > 0.0 && s_hi.is_finite() && s_lo.is_finite()) {
        return Err(Error::domain(format!("need finite 0 < s_lo <= s_hi, got [{s_lo}, {s_hi}]")));
    }
    if s_hi < s_lo {
        return Err(Error::domain(format!("need s_lo <= s_hi, got [{s_lo}, {s_hi}]")));
    }
    if s_lo == s_hi {
        return Ok(QuadratureOutcome { value: 0.0, error_estimate: 0.0, evaluations: 0 });
    }
    let f = |y: f64| {
        let s = y.exp();
        let ge = g_eval(s, p).expect("s > 0 inside the integration window");
        s / ge.g
    };
    let mut evals = 0usize;
    let mut worst = 0.0f64;
    let value = adaptive_simpson(&f, s_lo.ln(), s_hi.ln(), tol, 52, &mut evals, &mut worst)?;
    Ok(QuadratureOutcome { value, error_estimate: worst, evaluations: evals })
}

fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
    evals: &mut usize,
    worst: &mut f64,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    *evals += 3;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth, evals, worst)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    evals: &mut usize,
    worst: &mut f64,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    *evals += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if diff.abs() <= 15.0 * tol || (b - a) < 1e-14 {
        if depth == 0 && diff.abs() > 15.0 * tol {
            return Err(Error::Quadrature(format!(
                "interval [{a}, {b}] not resolved to tolerance {tol} (residual {})",
                diff.abs() / 15.0
            )));
        }
        *worst += diff.abs() / 15.0;
        return Ok(left + right + diff / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!(
            "recursion depth exhausted on [{a}, {b}] (residual {})",
            diff.abs() / 15.0
        )));
    }
    let l = simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1, evals, worst)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1, evals, worst)?;
    Ok(l + r)
}

/// Verdict on one integral tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailVerdict {
    Convergent,
    Divergent,
}

/// Least-squares fit of the ladder against a growth predictor.
#[derive(Debug, Clone)]
pub struct GrowthFit {
    pub law: String,
    pub intercept: f64,
    pub slope: f64,
    /// Max |fit - data| over the data range.
    pub max_residual: f64,
}

/// Measured growth of a tail of the integral of 1/g.
#[derive(Debug, Clone)]
pub struct TailLadder {
    /// eps ladder (lower tail) or X ladder (upper tail).
    pub abscissas: Vec<f64>,
    pub integrals: Vec<f64>,
    pub verdict: TailVerdict,
    pub fit: GrowthFit,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let resid = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (intercept + slope * x - y).abs())
        .fold(0.0f64, f64::max);
    (intercept, slope, resid)
}

fn classify_tail(abscissas: Vec<f64>, integrals: Vec<f64>, predictors: &[(&str, fn(f64) -> f64)]) -> TailLadder {
    let n = integrals.len();
    let last_increment = (integrals[n - 1] - integrals[n - 2]).abs();
    let verdict = if last_increment <= 1e-3 * integrals[n - 1].abs().max(1e-300) {
        TailVerdict::Convergent
    } else {
        TailVerdict::Divergent
    };
    let fit = if verdict == TailVerdict::Convergent {
        GrowthFit {
            law: "bounded".into(),
            intercept: integrals[n - 1],
            slope: 0.0,
            max_residual: last_increment,
        }
    } else {
        let mut best: Option<GrowthFit> = None;
        for (label, pred) in predictors {
            let xs: Vec<f64> = abscissas.iter().map(|&x| pred(x)).collect();
            let (intercept, slope, resid) = least_squares(&xs, &integrals);
            if best.as_ref().map_or(true, |b| resid < b.max_residual) {
                best = Some(GrowthFit {
                    law: (*label).into(),
                    intercept,
                    slope,
                    max_residual: resid,
                });
            }
        }
        best.expect("at least one predictor supplied")
    };
    TailLadder { abscissas, integrals, verdict, fit }
}

/// Full quadrature report: the requested segment integral plus the measured
/// growth of both tails of the integral of 1/g.
#[derive(Debug, Clone)]
pub struct HQuadratureReport {
    pub segment: QuadratureOutcome,
    pub lower_tail: TailLadder,
    pub upper_tail: TailLadder,
}

/// Integral of 1/g over [s_lo, s_hi] plus tail diagnostics: growth of
/// the integral over [eps, 1] along eps = 1e-2..1e-12 and over [1, X] along
/// X = 10..1e6, each classified with a fitted growth law. No verdict on the
/// tails is presumed; the ladder itself is the measurement.
pub fn h_quadrature(s_lo: f64, s_hi: f64, p: &AuxParams) -> Result<HQuadratureReport> {
    let tol = 1e-10;
    let segment = integral_inv_g(s_lo, s_hi, p, tol)?;

    let eps_ladder: Vec<f64> = (1..=6).map(|i| 10f64.powi(-2 * i)).collect();
    let mut lower = Vec::with_capacity(eps_ladder.len());
    for &eps in &eps_ladder {
        lower.push(integral_inv_g(eps, 1.0, p, tol)?.value);
    }
    let lower_tail = classify_tail(
        eps_ladder,
        lower,
        &[
            ("log log(1/eps)", |eps| (1.0 / eps).ln().ln()),
            ("log(1/eps)", |eps| (1.0 / eps).ln()),
        ],
    );

    let x_ladder: Vec<f64> = (1..=6).map(|i| 10f64.powi(i)).collect();
    let mut upper = Vec::with_capacity(x_ladder.len());
    for &x in &x_ladder {
        upper.push(integral_inv_g(1.0, x, p, tol)?.value);
    }
    let upper_tail = classify_tail(
        x_ladder,
        upper,
        &[("log X", |x| x.ln()), ("log log X", |x| x.ln().ln())],
    );

    Ok(HQuadratureReport { segment, lower_tail, upper_tail })
}
