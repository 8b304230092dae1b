//! Batch front end: subcommands map one-to-one onto library operations and
//! emit the deterministic JSON/CSV reports. Exit codes: 0 pass, 1 violation
//! found, 2 configuration error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use crate::auxfn::{self, AuxGrid};
use crate::bounds::{BoundEnv, BoundKind, HamiltonQuery};
use crate::error::{Error, Result};
use crate::pde::{self, BoundaryMode, GeometrySpec, InitialData, RunSpec};
use crate::report::{self, json_f64};
use crate::solutions::ClosedFormFamily;
use crate::sweep;
use crate::verify;

/// Relative output paths are redirected here when set.
pub const OUT_DIR_ENV: &str = "HEATGRAD_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "heatgrad",
    about = "Gradient-bound laboratory for positive heat-equation solutions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certify the F1/F2 comparability envelope of the auxiliary function
    ScanAux(ScanAuxArgs),
    /// Lambda-scan a solution source against a bound profile
    VerifyUpper(VerifyUpperArgs),
    /// Extremal search: best achievable |grad u|^2/u^2 at fixed (s, t, R)
    LowerSearch(LowerSearchArgs),
    /// Sharpness map of bounds vs achieved lower values over an (s,t,R) grid
    Hmap(HmapArgs),
    /// Same-time pseudo-Harnack battery and the critical constant
    Harnack(HarnackArgs),
    /// Spatial modulus-of-continuity battery
    Modulus(ModulusArgs),
    /// Heat-kernel anchors (flat constant 1/4, hyperbolic scan, two-sided)
    Kernel(KernelArgs),
    /// Drift-form scan with the flat equality case
    Liyau(LiyauArgs),
    /// Solver refinement study against exact solutions
    PdeValidate(PdeValidateArgs),
    /// Composite anchor report
    Report(ReportArgs),
}

fn parse_radius(s: &str) -> std::result::Result<f64, String> {
    if s == "inf" || s == "+inf" || s == "infinity" {
        return Ok(f64::INFINITY);
    }
    s.parse::<f64>().map_err(|e| e.to_string())
}

#[derive(Debug, Args, Clone)]
struct FamilyArgs {
    /// Solution family: exp | gaussian | kernel | kernel-h3 | fourier
    #[arg(long)]
    family: String,
    /// Wavenumber (exp) or time offset (gaussian)
    #[arg(long)]
    a: Option<f64>,
    /// Mode number of the fourier family
    #[arg(long)]
    lambda: Option<f64>,
    /// Amplitude floor of the fourier family (> 1)
    #[arg(long)]
    amplitude: Option<f64>,
    /// Kernel start offset t0 (>= 0)
    #[arg(long)]
    t0: Option<f64>,
    /// Kernel center (first coordinate)
    #[arg(long)]
    center: Option<f64>,
    /// Dimension
    #[arg(long)]
    n: Option<usize>,
}

impl FamilyArgs {
    fn build(&self) -> Result<ClosedFormFamily> {
        let n = self.n.unwrap_or(1);
        match self.family.as_str() {
            "exp" => Ok(ClosedFormFamily::ExpTravel { a: self.a.unwrap_or(1.0), n }),
            "gaussian" => Ok(ClosedFormFamily::ShiftedGaussian { a: self.a.unwrap_or(1.0), n }),
            "kernel" => {
                let mut center = vec![0.0; n];
                center[0] = self.center.unwrap_or(0.0);
                Ok(ClosedFormFamily::HeatKernelEuclidean {
                    n,
                    center,
                    t0: self.t0.unwrap_or(0.1),
                })
            }
            "kernel-h3" => Ok(ClosedFormFamily::HeatKernelH3 { t0: self.t0.unwrap_or(0.1) }),
            "fourier" => Ok(ClosedFormFamily::FourierPositive {
                lambda: self.lambda.unwrap_or(1.0),
                amplitude: self.amplitude.unwrap_or(2.0),
            }),
            other => Err(Error::config(format!(
                "unknown family '{other}' (expected exp|gaussian|kernel|kernel-h3|fourier)"
            ))),
        }
    }
}

#[derive(Debug, Args, Clone)]
struct EnvArgs {
    /// Ball radius (finite number or "inf")
    #[arg(long = "R", value_parser = parse_radius, default_value = "1")]
    radius: f64,
    /// Time horizon
    #[arg(long = "T", default_value_t = 1.0)]
    horizon: f64,
    /// Curvature magnitude; defaults to the family/geometry value
    #[arg(long)]
    k: Option<f64>,
    /// Ceiling override; defaults to the analytic cylinder supremum
    #[arg(long = "M")]
    ceiling: Option<f64>,
}

impl EnvArgs {
    fn build(&self, family: &ClosedFormFamily, x0: f64) -> Result<BoundEnv> {
        let mut env = verify::env_for_family(family, x0, self.radius, self.horizon)?;
        if let Some(k) = self.k {
            env = BoundEnv::new(env.n, k, env.radius, env.horizon, env.ceiling)?;
        }
        if let Some(m) = self.ceiling {
            env = BoundEnv::new(env.n, env.k, env.radius, env.horizon, m)?;
        }
        Ok(env)
    }
}

#[derive(Debug, Args, Clone)]
struct OutputArgs {
    /// Write the JSON summary here as well as to stdout
    #[arg(long = "out-json")]
    out_json: Option<PathBuf>,
    /// Write the CSV records here
    #[arg(long = "out-csv")]
    out_csv: Option<PathBuf>,
    /// Flat key=value file supplying defaults for any long flag
    #[arg(long)]
    config: Option<PathBuf>,
}

fn out_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn emit(output: &OutputArgs, summary: &Value, csv: Option<String>) -> Result<()> {
    let text = report::to_json_string(summary);
    print!("{text}");
    if let Some(p) = &output.out_json {
        report::write_text(&out_path(p), &text)?;
    }
    if let Some(p) = &output.out_csv {
        let body = csv.ok_or_else(|| Error::config("this subcommand emits no CSV records"))?;
        report::write_text(&out_path(p), &body)?;
    }
    Ok(())
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|tok| {
            let tok = tok.trim();
            if tok.is_empty() {
                return Err(Error::config("empty entry in numeric list"));
            }
            parse_radius(tok).map_err(Error::Config)
        })
        .collect()
}

#[derive(Debug, Args)]
struct ScanAuxArgs {
    #[arg(long = "s-min", default_value_t = 1e-6)]
    s_min: f64,
    #[arg(long = "s-max", default_value_t = 1e6)]
    s_max: f64,
    #[arg(long, default_value_t = 400)]
    points: usize,
    /// Comma-separated radius values
    #[arg(long = "r-values", default_value = "0.1,1,10")]
    r_values: String,
    /// Comma-separated aux-time values
    #[arg(long = "tau-values", default_value = "0.01,1,100")]
    tau_values: String,
    /// Comma-separated curvature values
    #[arg(long = "k-values", default_value = "0,1,10")]
    k_values: String,
    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_scan_aux(args: &ScanAuxArgs) -> Result<i32> {
    let grid = AuxGrid {
        s: sweep::log_space(args.s_min, args.s_max, args.points)?,
        radius: parse_list(&args.r_values)?,
        aux_time: parse_list(&args.tau_values)?,
        k: parse_list(&args.k_values)?,
    };
    let result = auxfn::comparability_scan(&grid)?;
    let summary = report::aux_scan_summary(&result);
    emit(&args.output, &summary, Some(report::aux_scan_csv(&result)))?;
    Ok(0)
}

#[derive(Debug, Args)]
struct VerifyUpperArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    env: EnvArgs,
    /// Scan a seeded solver run instead of the closed-form family:
    /// interval | circle | radial-euclidean | radial-hyperbolic
    #[arg(long)]
    geometry: Option<String>,
    /// Seed for the random initial data (mandatory with --geometry)
    #[arg(long)]
    seed: Option<u64>,
    /// Node count of the solver grid
    #[arg(long, default_value_t = 201)]
    nodes: usize,
    /// Solver time step
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Bound profile: h0 | h1-global | cheng-yau | hamilton | li-yau | sz2006 | dn
    #[arg(long, default_value = "h0")]
    bound: String,
    /// Drift weight for the li-yau bound kind
    #[arg(long)]
    alpha: Option<f64>,
    /// log(M/m) for the dn bound kind
    #[arg(long = "s-bar")]
    s_bar: Option<f64>,
    /// Violation threshold for the empirical constant
    #[arg(long = "trial-C", default_value_t = f64::INFINITY)]
    trial_c: f64,
    #[arg(long, default_value_t = 101)]
    nx: usize,
    #[arg(long, default_value_t = 40)]
    nt: usize,
    /// Half-width of the scan window (required for R = inf)
    #[arg(long = "x-width")]
    x_width: Option<f64>,
    /// Ball center (first coordinate)
    #[arg(long, default_value_t = 0.0)]
    x0: f64,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_bound(name: &str, alpha: Option<f64>, s_bar: Option<f64>) -> Result<BoundKind> {
    match name {
        "h0" => Ok(BoundKind::H0),
        "h1-global" => Ok(BoundKind::H1Global),
        "cheng-yau" => Ok(BoundKind::ChengYau),
        "hamilton" => Ok(BoundKind::HamiltonClassic),
        "li-yau" => Ok(BoundKind::LiYau {
            alpha: alpha.ok_or_else(|| Error::config("li-yau bound needs --alpha"))?,
        }),
        "sz2006" => Ok(BoundKind::Sz2006),
        "dn" => Ok(BoundKind::Dn {
            s_bar: s_bar.ok_or_else(|| Error::config("dn bound needs --s-bar"))?,
        }),
        "lower-envelope" => Ok(BoundKind::LowerEnvelope),
        "lower-global" => Ok(BoundKind::LowerGlobal),
        other => Err(Error::config(format!("unknown bound kind '{other}'"))),
    }
}

fn cmd_verify_upper(args: &VerifyUpperArgs) -> Result<i32> {
    let kind = parse_bound(&args.bound, args.alpha, args.s_bar)?;
    if let Some(geometry_name) = &args.geometry {
        return verify_upper_run_mode(args, geometry_name, kind);
    }
    let family = args.family.build()?;
    let env = args.env.build(&family, args.x0)?;
    let grid = verify::FamilyGrid {
        nx: args.nx,
        nt: args.nt,
        x_half_width: args.x_width,
        keep_records: true,
    };
    let rep = verify::verify_upper_family(&family, args.x0, &env, kind, args.trial_c, &grid)?;
    let summary = report::verification_summary(&rep);
    emit(&args.output, &summary, Some(report::verification_csv(&rep.records)))?;
    Ok(if rep.passed() { 0 } else { 1 })
}

/// Seeded-run source: the domain wraps the verification ball with margin
/// (interval of length 2R centered on the ball; radial domains out to 4R),
/// zero-flux boundaries, snapshots along (0, T].
fn verify_upper_run_mode(args: &VerifyUpperArgs, geometry_name: &str, kind: BoundKind) -> Result<i32> {
    let seed = args
        .seed
        .ok_or_else(|| Error::config("--seed is mandatory for random-data runs"))?;
    let radius = args.env.radius;
    if !radius.is_finite() {
        return Err(Error::config("run mode needs a finite radius"));
    }
    let n = args.family.n.unwrap_or(if geometry_name.starts_with("radial") { 3 } else { 1 });
    let (geometry, x0) = match geometry_name {
        "interval" => (GeometrySpec::Interval1D { length: 2.0 * radius }, radius),
        "circle" => (GeometrySpec::PeriodicCircle { length: 4.0 * radius }, 0.0),
        "radial-euclidean" => (GeometrySpec::RadialEuclidean { n, r_max: 4.0 * radius }, 0.0),
        "radial-hyperbolic" => (GeometrySpec::RadialHyperbolic { n, r_max: 4.0 * radius }, 0.0),
        other => return Err(Error::config(format!("unknown geometry '{other}'"))),
    };
    let spec = RunSpec {
        geometry: geometry.clone(),
        initial: InitialData::SeededBumps { seed },
        n_nodes: args.nodes,
        dt: args.dt,
        t_start: 0.0,
        snapshot_times: sweep::lin_space(args.env.horizon / 10.0, args.env.horizon, 10)?,
        boundary: BoundaryMode::ZeroFlux,
        m_center: x0,
        m_radius: Some(radius),
    };
    let mut result = pde::run(&spec)?;
    if geometry.is_radial() {
        result.metadata.sensitivity = Some(pde::boundary_sensitivity(&spec, radius / 2.0)?);
    }
    let (rep, _env) = verify::verify_upper_run(&result, x0, radius, kind, args.trial_c, true)?;
    let mut summary = report::verification_summary(&rep);
    if let Value::Object(map) = &mut summary {
        map.insert("run".into(), serde_json::to_value(&result.metadata)?);
    }
    emit(&args.output, &summary, Some(report::verification_csv(&rep.records)))?;
    Ok(if rep.passed() { 0 } else { 1 })
}

#[derive(Debug, Args)]
struct LowerSearchArgs {
    #[arg(long)]
    s: f64,
    #[arg(long)]
    t: f64,
    #[arg(long = "R", value_parser = parse_radius, default_value = "1")]
    radius: f64,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_lower_search(args: &LowerSearchArgs) -> Result<i32> {
    let q = HamiltonQuery::new(args.s, args.t, args.radius)?;
    let result = verify::lower_search(&q, args.n)?;
    let mut m = Map::new();
    m.insert("lhs".into(), json_f64(result.lhs));
    m.insert("family".into(), Value::String(result.family.describe()));
    m.insert("point".into(), json_f64(result.point));
    m.insert("achieved_s".into(), json_f64(result.achieved_s));
    m.insert("recipe".into(), Value::String(result.recipe.into()));
    m.insert("s".into(), json_f64(args.s));
    m.insert("t".into(), json_f64(args.t));
    m.insert("radius".into(), json_f64(args.radius));
    emit(&args.output, &Value::Object(m), None)?;
    Ok(0)
}

#[derive(Debug, Args)]
struct HmapArgs {
    #[arg(long = "s-min", default_value_t = 1e-6)]
    s_min: f64,
    #[arg(long = "s-max", default_value_t = 1e6)]
    s_max: f64,
    #[arg(long = "s-points", default_value_t = 49)]
    s_points: usize,
    #[arg(long = "t-values", default_value = "0.1,1,10")]
    t_values: String,
    #[arg(long = "r-values", default_value = "0.5,1,2,inf")]
    r_values: String,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_hmap(args: &HmapArgs) -> Result<i32> {
    let s_grid = sweep::log_space(args.s_min, args.s_max, args.s_points)?;
    let cells = verify::hmap(&s_grid, &parse_list(&args.t_values)?, &parse_list(&args.r_values)?, args.n)?;
    let mut m = Map::new();
    m.insert("cells".into(), Value::from(cells.len()));
    let worst = cells.iter().map(|c| c.ratio).fold(0.0f64, f64::max);
    m.insert("max_h0_over_envelope".into(), json_f64(worst));
    emit(&args.output, &Value::Object(m), Some(report::hmap_csv(&cells)))?;
    Ok(0)
}

#[derive(Debug, Args)]
struct HarnackArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long = "trial-C", default_value_t = 1.0)]
    trial_c: f64,
    #[arg(long, default_value_t = 128)]
    pairs: usize,
    /// Times at which pairs are compared
    #[arg(long = "t-values", default_value = "0.25,0.5,1")]
    t_values: String,
    #[arg(long, default_value_t = 0.0)]
    x0: f64,
    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_harnack(args: &HarnackArgs) -> Result<i32> {
    let family = args.family.build()?;
    let env = args.env.build(&family, args.x0)?;
    let times = parse_list(&args.t_values)?;
    let rep = verify::harnack_check(&family, args.x0, &env, &times, args.trial_c, args.pairs)?;
    let root = verify::critical_constant();
    let q_grid = sweep::log_space(1e-3, 1e6, 200)?;
    let scan = verify::kernel_family_scan(args.trial_c, env.n, &q_grid)?;

    let mut m = Map::new();
    m.insert("trial_c".into(), json_f64(args.trial_c));
    m.insert("max_ratio".into(), json_f64(rep.max_ratio));
    m.insert("violations".into(), Value::from(rep.violations));
    m.insert("pairs".into(), Value::from(rep.pairs));
    m.insert("skipped".into(), Value::from(rep.skipped));
    m.insert("critical_constant".into(), json_f64(root));
    m.insert("exponent_coefficient".into(), json_f64(scan.coefficient));
    m.insert("family_scan_passed".into(), Value::Bool(scan.passed));
    m.insert(
        "family_scan_first_failure_q".into(),
        scan.first_failure_q.map_or(Value::Null, json_f64),
    );
    emit(&args.output, &Value::Object(m), None)?;
    Ok(if rep.passed { 0 } else { 1 })
}

#[derive(Debug, Args)]
struct ModulusArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    env: EnvArgs,
    /// Admissible-radius constant c
    #[arg(long = "trial-c", default_value_t = 1.0)]
    trial_c_small: f64,
    /// Modulus constant C
    #[arg(long = "trial-C", default_value_t = 4.0)]
    trial_c_big: f64,
    #[arg(long, default_value_t = 128)]
    pairs: usize,
    #[arg(long = "t-values", default_value = "0.5,1")]
    t_values: String,
    #[arg(long, default_value_t = 0.0)]
    x0: f64,
    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_modulus(args: &ModulusArgs) -> Result<i32> {
    let family = args.family.build()?;
    let env = args.env.build(&family, args.x0)?;
    let times = parse_list(&args.t_values)?;
    let rep = verify::modulus_check(
        &family,
        args.x0,
        &env,
        &times,
        args.trial_c_small,
        args.trial_c_big,
        args.pairs,
    )?;
    let c_big_min =
        verify::modulus_min_passing_big_c(&family, args.x0, &env, &times, args.trial_c_small, args.pairs)?;
    let c_small_max =
        verify::modulus_max_passing_small_c(&family, args.x0, &env, &times, c_big_min, args.pairs)?;

    let mut m = Map::new();
    m.insert("pairs".into(), Value::from(rep.pairs));
    m.insert("admitted".into(), Value::from(rep.admitted));
    m.insert("violations".into(), Value::from(rep.violations));
    m.insert("max_slack".into(), json_f64(rep.max_slack));
    m.insert("trial_c_small".into(), json_f64(args.trial_c_small));
    m.insert("trial_c_big".into(), json_f64(args.trial_c_big));
    m.insert("min_passing_C".into(), json_f64(c_big_min));
    m.insert("max_passing_c".into(), json_f64(c_small_max));
    emit(&args.output, &Value::Object(m), None)?;
    Ok(if rep.passed { 0 } else { 1 })
}

#[derive(Debug, Args)]
struct KernelArgs {
    /// euclid | h3
    #[arg(long, default_value = "euclid")]
    kind: String,
    #[arg(long = "trial-C", default_value_t = 0.25)]
    trial_c: f64,
    /// Two-sided bound width for the h3 kind (0 < delta < 4)
    #[arg(long)]
    delta: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_kernel(args: &KernelArgs) -> Result<i32> {
    let mut m = Map::new();
    let violation = match args.kind.as_str() {
        "euclid" => {
            let q_grid = sweep::log_space(1e-6, 1e8, 400)?;
            let (grid_sup, analytic) = verify::euclid_kernel_min_c(&q_grid);
            let min_c = grid_sup.max(analytic);
            m.insert("grid_sup".into(), json_f64(grid_sup));
            m.insert("analytic_limit".into(), json_f64(analytic));
            m.insert("min_admissible_c".into(), json_f64(min_c));
            args.trial_c < min_c - 1e-12
        }
        "h3" => {
            let d_grid = sweep::lin_space(0.0, 8.0, 80)?;
            let t_grid = sweep::log_space(1e-2, 10.0, 40)?;
            let scan = verify::h3_kernel_scan(&d_grid, &t_grid, args.trial_c)?;
            m.insert("c_emp".into(), json_f64(scan.c_emp));
            m.insert("violations".into(), Value::from(scan.violations));
            if let Some(delta) = args.delta {
                let two = verify::kernel_two_sided(delta, &d_grid, &t_grid)?;
                m.insert("delta".into(), json_f64(delta));
                m.insert("c1_min".into(), json_f64(two.c1_min));
                m.insert("c2_max".into(), json_f64(two.c2_max));
            }
            scan.violations > 0
        }
        other => return Err(Error::config(format!("unknown kernel kind '{other}'"))),
    };
    m.insert("trial_c".into(), json_f64(args.trial_c));
    emit(&args.output, &Value::Object(m), None)?;
    Ok(if violation { 1 } else { 0 })
}

#[derive(Debug, Args)]
struct LiyauArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 101)]
    nx: usize,
    #[arg(long, default_value_t = 40)]
    nt: usize,
    #[arg(long, default_value_t = 0.0)]
    x0: f64,
    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_liyau(args: &LiyauArgs) -> Result<i32> {
    let family = args.family.build()?;
    let env = args.env.build(&family, args.x0)?;
    let rep = verify::li_yau_check(&family, args.alpha, args.x0, &env, args.nx, args.nt)?;
    let mut m = Map::new();
    m.insert("alpha".into(), json_f64(rep.alpha));
    m.insert("sup_raw".into(), json_f64(rep.sup_raw));
    m.insert("c_emp".into(), json_f64(rep.c_emp));
    emit(&args.output, &Value::Object(m), None)?;
    Ok(0)
}

#[derive(Debug, Args)]
struct PdeValidateArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// interval | circle | radial-euclidean | radial-hyperbolic
    #[arg(long, default_value = "interval")]
    geometry: String,
    /// Domain extent (interval/circle length or radial r_max)
    #[arg(long, default_value_t = 4.0)]
    extent: f64,
    /// Comma-separated node-count ladder
    #[arg(long = "n-ladder", default_value = "251,501,1001")]
    n_ladder: String,
    #[arg(long = "t-start", default_value_t = 0.1)]
    t_start: f64,
    #[arg(long = "t-end", default_value_t = 0.2)]
    t_end: f64,
    /// Time step at the coarsest resolution (refined as h^2)
    #[arg(long, default_value_t = 6.4e-3)]
    dt: f64,
    #[arg(long = "min-order", default_value_t = 1.8)]
    min_order: f64,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_geometry(name: &str, n: usize, extent: f64) -> Result<GeometrySpec> {
    match name {
        "interval" => Ok(GeometrySpec::Interval1D { length: extent }),
        "circle" => Ok(GeometrySpec::PeriodicCircle { length: extent }),
        "radial-euclidean" => Ok(GeometrySpec::RadialEuclidean { n, r_max: extent }),
        "radial-hyperbolic" => Ok(GeometrySpec::RadialHyperbolic { n, r_max: extent }),
        other => Err(Error::config(format!("unknown geometry '{other}'"))),
    }
}

fn cmd_pde_validate(args: &PdeValidateArgs) -> Result<i32> {
    let family = args.family.build()?;
    let geometry = parse_geometry(&args.geometry, args.family.n.unwrap_or(family.dim()), args.extent)?;
    let ladder: Vec<usize> = args
        .n_ladder
        .split(',')
        .map(|tok| tok.trim().parse::<usize>().map_err(|e| Error::config(e.to_string())))
        .collect::<Result<_>>()?;
    let table = pde::convergence_validate(
        &family,
        &geometry,
        &ladder,
        args.t_start,
        args.t_end,
        args.dt,
    )?;
    let mut m = Map::new();
    m.insert(
        "n_values".into(),
        Value::Array(table.n_values.iter().map(|&n| Value::from(n)).collect()),
    );
    m.insert(
        "errors".into(),
        Value::Array(table.errors.iter().map(|&e| json_f64(e)).collect()),
    );
    m.insert(
        "orders".into(),
        Value::Array(table.orders.iter().map(|&o| json_f64(o)).collect()),
    );
    let ok = table.orders.iter().all(|&o| o >= args.min_order);
    m.insert("min_order_required".into(), json_f64(args.min_order));
    m.insert("passed".into(), Value::Bool(ok));
    emit(&args.output, &Value::Object(m), None)?;
    Ok(if ok { 0 } else { 1 })
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_report(args: &ReportArgs) -> Result<i32> {
    let mut m = Map::new();
    let mut all_passed = true;

    let grid = AuxGrid::standard(1e-6, 1e6, 400)?;
    let aux = auxfn::comparability_scan(&grid)?;
    let spread = aux.ratio_max / aux.ratio_min;
    m.insert("aux_envelope_spread".into(), json_f64(spread));
    all_passed &= spread <= 100.0;

    let root = verify::critical_constant();
    let exact = (3.0 - 2.0 * 2f64.sqrt()) / (4.0 * 2f64.sqrt());
    m.insert("harnack_critical_constant".into(), json_f64(root));
    all_passed &= (root - exact).abs() <= 1e-9;

    let q_grid = sweep::log_space(1e-6, 1e8, 400)?;
    let (grid_sup, analytic) = verify::euclid_kernel_min_c(&q_grid);
    m.insert("euclid_kernel_min_c".into(), json_f64(grid_sup.max(analytic)));
    all_passed &= (grid_sup.max(analytic) - 0.25).abs() <= 1e-6;

    let d_grid = sweep::lin_space(0.0, 3.0, 25)?;
    let t_grid = sweep::log_space(0.05, 5.0, 25)?;
    let deviation = verify::li_yau_flat_kernel_identity(2, &d_grid, &t_grid)?;
    m.insert("li_yau_flat_identity_deviation".into(), json_f64(deviation));
    all_passed &= deviation <= 1e-10;

    let family = ClosedFormFamily::ExpTravel { a: 2.0, n: 1 };
    let env = verify::env_for_family(&family, 0.0, 1.0, 1.0)?;
    let rep = verify::verify_upper_family(
        &family,
        0.0,
        &env,
        BoundKind::H0,
        4.0,
        &verify::FamilyGrid { keep_records: false, ..Default::default() },
    )?;
    m.insert("exp_anchor_c_emp".into(), json_f64(rep.c_emp));
    all_passed &= (rep.c_emp - 2.0).abs() <= 1e-10;

    m.insert("passed".into(), Value::Bool(all_passed));
    emit(&args.output, &Value::Object(m), None)?;
    Ok(if all_passed { 0 } else { 1 })
}

/// Reads a flat key=value file into flag tokens.
fn config_tokens(path: &Path) -> Result<Vec<String>> {
    let body = std::fs::read_to_string(path)?;
    let mut tokens = Vec::new();
    for (lineno, raw) in body.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(format!("{}:{}: expected key = value", path.display(), lineno + 1))
        })?;
        tokens.push(format!("--{}", key.trim()));
        tokens.push(value.trim().to_string());
    }
    Ok(tokens)
}

/// Merges config-file defaults into the argument list. Flags given on the
/// command line win: config entries whose flag already appears are dropped.
fn merge_config(argv: &[String]) -> Result<Vec<String>> {
    let config_pos = argv.iter().position(|a| a == "--config");
    let Some(pos) = config_pos else {
        return Ok(argv.to_vec());
    };
    let path = argv
        .get(pos + 1)
        .ok_or_else(|| Error::config("--config needs a path"))?;
    let tokens = config_tokens(Path::new(path))?;
    if argv.len() < 2 {
        return Err(Error::config("--config needs a subcommand"));
    }
    let mut merged: Vec<String> = argv[..2].to_vec();
    let mut i = 0;
    while i + 1 < tokens.len() {
        let flag = &tokens[i];
        if !argv.iter().any(|a| a == flag) {
            merged.push(flag.clone());
            merged.push(tokens[i + 1].clone());
        }
        i += 2;
    }
    merged.extend_from_slice(&argv[2..]);
    Ok(merged)
}

/// Parses and executes one command line; returns the process exit code.
pub fn run_command<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let merged = match merge_config(&argv) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(&merged) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own usage text; --help/--version are not errors.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::ScanAux(a) => cmd_scan_aux(a),
        Command::VerifyUpper(a) => cmd_verify_upper(a),
        Command::LowerSearch(a) => cmd_lower_search(a),
        Command::Hmap(a) => cmd_hmap(a),
        Command::Harnack(a) => cmd_harnack(a),
        Command::Modulus(a) => cmd_modulus(a),
        Command::Kernel(a) => cmd_kernel(a),
        Command::Liyau(a) => cmd_liyau(a),
        Command::PdeValidate(a) => cmd_pde_validate(a),
        Command::Report(a) => cmd_report(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
