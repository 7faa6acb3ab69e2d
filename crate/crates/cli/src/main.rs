mod input;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gauss_extremal::error::Error;
use gauss_extremal::extremal::{self, QuadScheme, QuadratureSpec, RadialExtremal};
use gauss_extremal::hilbert::{bound_check, hls_constants, PointConfiguration};
use gauss_extremal::lpinterp::{required_truncation, truncation_certificate, ExtremalEvaluator};
use gauss_extremal::periodic::{gaussian_periodic_extremal, subordinated_periodic_extremal};
use gauss_extremal::specfun::HomogeneousParameter;
use gauss_extremal::subordination::{subordinate_value, RadialFunctionSpec, SubordinatedExtremal};
use gauss_extremal::Side;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "gauss-extremal", version, about = "Optimal one-sided bandlimited approximation of Gaussians")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal value U(δ, λ) or U(δ, μ).
    Value(ValueArgs),
    /// Evaluate the extremal function at a point.
    Eval(EvalArgs),
    /// Cross-check closed forms against independent computations.
    #[command(subcommand)]
    Verify(Verify),
    /// Hilbert-type inequalities for well-spaced points.
    #[command(subcommand)]
    Hilbert(Hilbert),
    /// Optimal one-sided trigonometric polynomials.
    Periodic(PeriodicArgs),
    /// Parallel sweeps over a grid.
    #[command(subcommand)]
    Sweep(Sweep),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, allow_hyphen_values = true)]
    nu: f64,
    #[arg(long, value_parser = parse_side)]
    side: Side,
    #[arg(long, default_value_t = 2.0)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    dim: u32,
}

#[derive(Args)]
struct ValueArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, conflicts_with = "measure")]
    lambda: Option<f64>,
    /// Subordination measure: point:λ0, power:sigma=σ, table:path.csv, expsub:path.csv.
    #[arg(long)]
    measure: Option<String>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, conflicts_with = "measure")]
    lambda: Option<f64>,
    #[arg(long)]
    measure: Option<String>,
    /// Comma-separated coordinates, one per dimension.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
}

#[derive(Subcommand)]
enum Verify {
    /// Zero-sum value against weighted quadrature of the constructed function.
    Quadrature(VerifyQuadArgs),
    /// Sign of target − extremal on a grid.
    Onesided(VerifyOneSidedArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Gl,
    TanhSinh,
}

#[derive(Args)]
struct VerifyQuadArgs {
    #[arg(long, allow_hyphen_values = true)]
    nu: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long, value_parser = parse_side)]
    side: Side,
    #[arg(long, default_value_t = 1e-5)]
    rtol: f64,
    #[arg(long, value_enum, default_value_t = SchemeArg::Gl)]
    scheme: SchemeArg,
}

#[derive(Args)]
struct VerifyOneSidedArgs {
    #[arg(long, allow_hyphen_values = true)]
    nu: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long, value_parser = parse_side)]
    side: Side,
    #[arg(long, default_value = "lin:-12:12:10000", allow_hyphen_values = true)]
    grid: String,
    #[arg(long, default_value_t = 1e-10)]
    slack: f64,
}

#[derive(Subcommand)]
enum Hilbert {
    /// Eigenvalue bounds of the off-diagonal form for points read from CSV.
    Check(HilbertCheckArgs),
    /// Constants of the discrete Hardy–Littlewood–Sobolev inequality.
    Hls(HlsArgs),
}

#[derive(Args)]
struct HilbertCheckArgs {
    /// CSV with one point per row.
    #[arg(long)]
    points: PathBuf,
    /// Minimum spacing δ; the optimal values are taken at type 2πδ.
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    measure: String,
    #[arg(long, value_enum, default_value_t = SidesArg::Both)]
    sides: SidesArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SidesArg {
    Both,
    Minus,
    Plus,
}

#[derive(Args)]
struct HlsArgs {
    #[arg(long)]
    dim: u32,
    #[arg(long, allow_hyphen_values = true)]
    sigma: f64,
    #[arg(long)]
    delta: f64,
}

#[derive(Args)]
struct PeriodicArgs {
    /// lebesgue, density:path.csv or moments:path.csv.
    #[arg(long, default_value = "lebesgue")]
    measure: String,
    #[arg(long)]
    degree: usize,
    #[arg(long, conflicts_with = "subordination")]
    lambda: Option<f64>,
    /// Measure on (0, ∞) for the subordinated target, same syntax as `value --measure`.
    #[arg(long)]
    subordination: Option<String>,
    #[arg(long, value_parser = parse_side)]
    side: Side,
}

#[derive(Subcommand)]
enum Sweep {
    /// Optimal values over a λ grid.
    Value(SweepValueArgs),
    /// Extremal function along a radial grid.
    Eval(SweepEvalArgs),
}

#[derive(Args)]
struct SweepValueArgs {
    #[command(flatten)]
    common: Common,
    /// lin:a:b:n or log:a:b:n.
    #[arg(long)]
    lambda_grid: String,
}

#[derive(Args)]
struct SweepEvalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    lambda: f64,
    #[arg(long, allow_hyphen_values = true)]
    x_grid: String,
}

fn parse_side(s: &str) -> Result<Side, String> {
    s.parse::<Side>().map_err(|e| e.to_string())
}

type Res<T> = std::result::Result<T, Error>;

/// JSON body plus the CSV rendering of the same result.
struct Report {
    json: Map<String, Value>,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    /// Verification verdict; `false` exits with the numeric-failure code.
    passed: bool,
}

impl Report {
    fn new(command: &str, inputs: Value) -> Self {
        let mut json = Map::new();
        json.insert("command".into(), json!(command));
        json.insert("inputs".into(), inputs);
        Report { json, header: Vec::new(), rows: Vec::new(), passed: true }
    }

    fn set(&mut self, key: &str, v: Value) {
        self.json.insert(key.into(), v);
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn parameter(nu: f64) -> Res<HomogeneousParameter> {
    HomogeneousParameter::new(nu)
}

fn validate_common(c: &Common) -> Res<()> {
    if !(c.delta > 0.0 && c.delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be > 0, got {}", c.delta)));
    }
    if c.dim < 1 {
        return Err(Error::InvalidParameter("dim must be >= 1".into()));
    }
    parameter(c.nu).map(|_| ())
}

fn validate_lambda(l: f64) -> Res<f64> {
    if l > 0.0 && l.is_finite() {
        Ok(l)
    } else {
        Err(Error::InvalidParameter(format!("lambda must be > 0, got {l}")))
    }
}

fn either(lambda: Option<f64>, measure: &Option<String>) -> Res<()> {
    if lambda.is_none() && measure.is_none() {
        return Err(Error::InvalidParameter("one of --lambda or --measure is required".into()));
    }
    Ok(())
}

fn common_inputs(c: &Common) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("nu".into(), json!(c.nu));
    m.insert("side".into(), json!(c.side.as_str()));
    m.insert("delta".into(), json!(c.delta));
    m.insert("dim".into(), json!(c.dim));
    m
}

fn run_value(a: &ValueArgs) -> Res<Report> {
    validate_common(&a.common)?;
    either(a.lambda, &a.measure)?;
    let c = &a.common;
    let p = parameter(c.nu)?;
    let mut inputs = common_inputs(c);
    if let Some(spec) = &a.measure {
        inputs.insert("measure".into(), json!(spec));
        let m = input::parse_measure(spec)?;
        let v = subordinate_value(&p, c.dim, c.delta, &m, c.side)?;
        let mut r = Report::new("value", Value::Object(inputs));
        r.set("value", json!(v.value));
        r.set("terms_used", json!(v.intervals));
        r.set("error_estimate", json!(v.error_estimate));
        r.header = vec!["nu", "side", "delta", "dim", "measure", "value", "terms_used", "error_estimate"];
        r.rows.push(vec![
            c.nu.to_string(),
            c.side.to_string(),
            c.delta.to_string(),
            c.dim.to_string(),
            spec.clone(),
            num(v.value),
            v.intervals.to_string(),
            num(v.error_estimate),
        ]);
        return Ok(r);
    }
    let lambda = validate_lambda(a.lambda.unwrap())?;
    inputs.insert("lambda".into(), json!(lambda));
    let v = extremal::value_scaled(&p, c.delta, lambda, c.dim, c.side)?;
    let mut r = Report::new("value", Value::Object(inputs));
    r.set("value", json!(v.value));
    r.set("terms_used", json!(v.terms_used));
    r.set("tail_bound", json!(v.tail_bound));
    r.header = vec!["nu", "side", "delta", "dim", "lambda", "value", "terms_used", "tail_bound"];
    r.rows.push(vec![
        c.nu.to_string(),
        c.side.to_string(),
        c.delta.to_string(),
        c.dim.to_string(),
        lambda.to_string(),
        num(v.value),
        v.terms_used.to_string(),
        num(v.tail_bound),
    ]);
    Ok(r)
}

fn run_eval(a: &EvalArgs) -> Res<Report> {
    validate_common(&a.common)?;
    either(a.lambda, &a.measure)?;
    let c = &a.common;
    let p = parameter(c.nu)?;
    let point = input::parse_point(&a.point)?;
    if point.len() != c.dim as usize {
        return Err(Error::InvalidParameter(format!("point has {} coordinates, --dim is {}", point.len(), c.dim)));
    }
    let mut inputs = common_inputs(c);
    inputs.insert("point".into(), json!(point));
    let header = vec!["value", "target", "terms_used"];
    if let Some(spec) = &a.measure {
        inputs.insert("measure".into(), json!(spec));
        let m = input::parse_measure(spec)?;
        let target = RadialFunctionSpec::for_measure(&m, c.dim)?;
        let e = SubordinatedExtremal::new(&p, c.dim, c.delta, &m, target, c.side)?;
        let v = e.eval(&point)?;
        let mut r = Report::new("eval", Value::Object(inputs));
        r.set("value", json!(v.value));
        r.set("target", json!(v.target));
        r.set("deficit", json!(v.deficit));
        r.set("terms_used", json!(v.intervals));
        r.set("error_estimate", json!(v.error_estimate));
        r.header = [header, vec!["deficit", "error_estimate"]].concat();
        r.rows.push(vec![num(v.value), num(v.target), v.intervals.to_string(), num(v.deficit), num(v.error_estimate)]);
        return Ok(r);
    }
    let lambda = validate_lambda(a.lambda.unwrap())?;
    inputs.insert("lambda".into(), json!(lambda));
    let e = RadialExtremal::new(&p, c.dim, c.delta, lambda, c.side)?;
    let value = e.eval(&point)?;
    let target = e.target(&point);
    let kappa = 2.0 / c.delta;
    let terms = required_truncation(c.nu);
    let tail = truncation_certificate(&p, kappa * kappa * lambda, c.side, terms)?;
    let mut r = Report::new("eval", Value::Object(inputs));
    r.set("value", json!(value));
    r.set("target", json!(target));
    r.set("terms_used", json!(terms));
    r.set("tail_bound", json!(tail));
    r.header = [header, vec!["tail_bound"]].concat();
    r.rows.push(vec![num(value), num(target), terms.to_string(), num(tail)]);
    Ok(r)
}

fn run_verify_quadrature(a: &VerifyQuadArgs) -> Res<Report> {
    let p = parameter(a.nu)?;
    let lambda = validate_lambda(a.lambda)?;
    if !(a.rtol > 0.0 && a.rtol < 1.0) {
        return Err(Error::InvalidParameter(format!("rtol must be in (0, 1), got {}", a.rtol)));
    }
    let scheme = match a.scheme {
        SchemeArg::Gl => QuadScheme::GaussLegendrePanels,
        SchemeArg::TanhSinh => QuadScheme::TanhSinh,
    };
    let spec = QuadratureSpec { scheme, rel_tol: (0.1 * a.rtol).min(1e-6), ..Default::default() };
    let closed = extremal::value_one_dim(&p, lambda, a.side)?;
    let q = extremal::l1_error_quadrature(&p, lambda, a.side, &spec, required_truncation(a.nu))?;
    let gap = (q.value - closed.value).abs() / closed.value.abs().max(f64::MIN_POSITIVE);
    let passed = gap <= a.rtol;
    let status = if passed { "PASS" } else { "FAIL" };
    let inputs = json!({"nu": a.nu, "lambda": lambda, "side": a.side.as_str(), "rtol": a.rtol, "scheme": spec.scheme});
    let mut r = Report::new("verify quadrature", inputs);
    r.set("status", json!(status));
    r.set("value", json!(closed.value));
    r.set("quadrature_value", json!(q.value));
    r.set("relative_gap", json!(gap));
    r.set("terms_used", json!(closed.terms_used));
    r.set("tail_bound", json!(closed.tail_bound));
    r.set("error_estimate", json!(q.error_estimate));
    r.set("quadrature_panels", json!(q.panels));
    r.set("min_integrand", json!(q.min_integrand));
    r.header = vec!["status", "value", "quadrature_value", "relative_gap", "terms_used", "tail_bound", "error_estimate"];
    r.rows.push(vec![
        status.into(),
        num(closed.value),
        num(q.value),
        num(gap),
        closed.terms_used.to_string(),
        num(closed.tail_bound),
        num(q.error_estimate),
    ]);
    r.passed = passed;
    Ok(r)
}

fn run_verify_onesided(a: &VerifyOneSidedArgs) -> Res<Report> {
    let p = parameter(a.nu)?;
    let lambda = validate_lambda(a.lambda)?;
    let grid = input::parse_grid(&a.grid)?;
    let terms = required_truncation(a.nu);
    let e = ExtremalEvaluator::with_truncation(&p, lambda, a.side, terms)?;
    let sign = if a.side == Side::Minus { 1.0 } else { -1.0 };
    let (worst, at) = grid
        .par_iter()
        .map(|&x| (sign * (e.gaussian(x) - e.eval(x)), x))
        .reduce(|| (f64::INFINITY, f64::NAN), |u, v| if v.0 < u.0 { v } else { u });
    let tail = truncation_certificate(&p, lambda, a.side, terms)?;
    let passed = worst >= -a.slack;
    let status = if passed { "PASS" } else { "FAIL" };
    let inputs = json!({"nu": a.nu, "lambda": lambda, "side": a.side.as_str(), "grid": a.grid, "slack": a.slack});
    let mut r = Report::new("verify onesided", inputs);
    r.set("status", json!(status));
    r.set("value", json!(worst));
    r.set("argmin", json!(at));
    r.set("points", json!(grid.len()));
    r.set("terms_used", json!(terms));
    r.set("tail_bound", json!(tail));
    r.header = vec!["status", "min_slack", "argmin", "points", "terms_used", "tail_bound"];
    r.rows.push(vec![status.into(), num(worst), num(at), grid.len().to_string(), terms.to_string(), num(tail)]);
    r.passed = passed;
    Ok(r)
}

fn run_hilbert_check(a: &HilbertCheckArgs) -> Res<Report> {
    let rows = input::read_rows(&a.points, 0)?;
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::InvalidParameter("all points must have the same number of coordinates".into()));
    }
    let cfg = PointConfiguration::new(dim as u32, rows, a.delta)?;
    let m = input::parse_measure(&a.measure)?;
    let sides: &[Side] = match a.sides {
        SidesArg::Both => &[Side::Minus, Side::Plus],
        SidesArg::Minus => &[Side::Minus],
        SidesArg::Plus => &[Side::Plus],
    };
    let rep = bound_check(&cfg, &m, sides)?;
    let passed = rep.holds(1e-9);
    let status = if passed { "PASS" } else { "FAIL" };
    let inputs = json!({
        "points": a.points.display().to_string(),
        "count": cfg.len(),
        "dim": dim,
        "nu": 0.5 * dim as f64 - 1.0,
        "delta": a.delta,
        "type_parameter": 2.0 * PI * a.delta,
        "measure": a.measure,
    });
    let mut r = Report::new("hilbert check", inputs);
    r.set("status", json!(status));
    r.set("values", serde_json::to_value(&rep).expect("report serializes"));
    r.set("terms_used", json!(cfg.len()));
    r.set("error_estimate", json!(rep.error_estimate));
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    r.header = vec!["status", "lower", "upper", "min_eig", "max_eig", "margin_lower", "margin_upper", "error_estimate"];
    r.rows.push(vec![
        status.into(),
        opt(rep.lower),
        opt(rep.upper),
        num(rep.min_eig),
        num(rep.max_eig),
        opt(rep.margin_lower),
        opt(rep.margin_upper),
        num(rep.error_estimate),
    ]);
    r.passed = passed;
    Ok(r)
}

fn run_hls(a: &HlsArgs) -> Res<Report> {
    let c = hls_constants(a.dim, a.sigma, a.delta)?;
    let inputs = json!({"dim": a.dim, "sigma": a.sigma, "delta": a.delta, "type_parameter": 2.0 * PI * a.delta});
    let mut r = Report::new("hilbert hls", inputs);
    r.set("values", json!({"lower": c.lower, "upper": c.upper}));
    r.set("terms_used", json!(if c.upper.is_some() { 2 } else { 1 }));
    r.set("error_estimate", json!(c.error_estimate));
    r.header = vec!["lower", "upper", "error_estimate"];
    r.rows.push(vec![num(c.lower), c.upper.map(num).unwrap_or_default(), num(c.error_estimate)]);
    Ok(r)
}

fn run_periodic(a: &PeriodicArgs) -> Res<Report> {
    let m = input::parse_circle_measure(&a.measure)?;
    either(a.lambda, &a.subordination)?;
    let mut inputs = Map::new();
    inputs.insert("measure".into(), json!(a.measure));
    inputs.insert("degree".into(), json!(a.degree));
    inputs.insert("side".into(), json!(a.side.as_str()));
    let res = if let Some(spec) = &a.subordination {
        inputs.insert("subordination".into(), json!(spec));
        let vs = input::parse_measure(spec)?;
        subordinated_periodic_extremal(&m, a.degree, &vs, a.side)?
    } else {
        let lambda = validate_lambda(a.lambda.unwrap())?;
        inputs.insert("lambda".into(), json!(lambda));
        gaussian_periodic_extremal(&m, a.degree, lambda, a.side)?
    };
    let n = a.degree as i64;
    let coeffs: Vec<Value> = (-n..=n)
        .map(|k| {
            let c = res.poly.coefficient(k);
            json!({"k": k, "re": c.re, "im": c.im})
        })
        .collect();
    let mut r = Report::new("periodic", Value::Object(inputs));
    r.set("value", json!(res.integral));
    r.set("value_formula", json!(res.value_formula));
    r.set("terms_used", json!(res.nodes.len()));
    r.set("error_estimate", json!((res.integral - res.value_formula).abs()));
    r.set("nodes", json!(res.nodes));
    r.set("coefficients", Value::Array(coeffs));
    r.set("kept_residual", json!(res.kept_residual));
    r.set("dropped_residual", json!(res.dropped_residual));
    r.set("min_slack", json!(res.min_slack));
    r.header = vec!["k", "re", "im"];
    for k in -n..=n {
        let c = res.poly.coefficient(k);
        r.rows.push(vec![k.to_string(), num(c.re), num(c.im)]);
    }
    Ok(r)
}

fn run_sweep_value(a: &SweepValueArgs) -> Res<Report> {
    validate_common(&a.common)?;
    let c = a.common.clone();
    let grid = input::parse_grid(&a.lambda_grid)?;
    if grid.iter().any(|&l| l.is_nan() || l <= 0.0) {
        return Err(Error::InvalidParameter("lambda grid must be positive".into()));
    }
    let p = parameter(c.nu)?;
    let vals: Vec<_> = grid
        .par_iter()
        .map(|&l| extremal::value_scaled(&p, c.delta, l, c.dim, c.side))
        .collect::<Res<Vec<_>>>()?;
    let mut inputs = common_inputs(&c);
    inputs.insert("lambda_grid".into(), json!(a.lambda_grid));
    let mut r = Report::new("sweep value", Value::Object(inputs));
    r.set(
        "values",
        Value::Array(
            vals.iter()
                .map(|v| json!({"lambda": v.lambda, "value": v.value, "terms_used": v.terms_used, "tail_bound": v.tail_bound}))
                .collect(),
        ),
    );
    r.set("terms_used", json!(vals.iter().map(|v| v.terms_used).max()));
    r.set("tail_bound", json!(vals.iter().map(|v| v.tail_bound).fold(0.0, f64::max)));
    r.header = vec!["lambda", "value", "terms_used", "tail_bound"];
    for v in &vals {
        r.rows.push(vec![num(v.lambda), num(v.value), v.terms_used.to_string(), num(v.tail_bound)]);
    }
    Ok(r)
}

fn run_sweep_eval(a: &SweepEvalArgs) -> Res<Report> {
    validate_common(&a.common)?;
    let c = a.common.clone();
    let lambda = validate_lambda(a.lambda)?;
    let grid = input::parse_grid(&a.x_grid)?;
    let p = parameter(c.nu)?;
    let e = RadialExtremal::new(&p, c.dim, c.delta, lambda, c.side)?;
    let rows: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|&x| {
            let mut pt = vec![0.0; c.dim as usize];
            pt[0] = x;
            Ok((x, e.eval(&pt)?, e.target(&pt)))
        })
        .collect::<Res<Vec<_>>>()?;
    let terms = required_truncation(c.nu);
    let kappa = 2.0 / c.delta;
    let tail = truncation_certificate(&p, kappa * kappa * lambda, c.side, terms)?;
    let mut inputs = common_inputs(&c);
    inputs.insert("lambda".into(), json!(lambda));
    inputs.insert("x_grid".into(), json!(a.x_grid));
    let mut r = Report::new("sweep eval", Value::Object(inputs));
    r.set("values", Value::Array(rows.iter().map(|(x, v, t)| json!({"x": x, "value": v, "target": t})).collect()));
    r.set("terms_used", json!(terms));
    r.set("tail_bound", json!(tail));
    r.header = vec!["x", "value", "target"];
    for (x, v, t) in &rows {
        r.rows.push(vec![num(*x), num(*v), num(*t)]);
    }
    Ok(r)
}

fn dispatch(cmd: &Command) -> Res<Report> {
    match cmd {
        Command::Value(a) => run_value(a),
        Command::Eval(a) => run_eval(a),
        Command::Verify(Verify::Quadrature(a)) => run_verify_quadrature(a),
        Command::Verify(Verify::Onesided(a)) => run_verify_onesided(a),
        Command::Hilbert(Hilbert::Check(a)) => run_hilbert_check(a),
        Command::Hilbert(Hilbert::Hls(a)) => run_hls(a),
        Command::Periodic(a) => run_periodic(a),
        Command::Sweep(Sweep::Value(a)) => run_sweep_value(a),
        Command::Sweep(Sweep::Eval(a)) => run_sweep_eval(a),
    }
}

fn render(r: Report, format: Format, elapsed: f64) -> std::io::Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut json = r.json;
            json.insert("elapsed".into(), json!(elapsed));
            let mut out = serde_json::to_vec_pretty(&Value::Object(json)).map_err(std::io::Error::other)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&r.header)?;
            for row in &r.rows {
                w.write_record(row)?;
            }
            w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::Domain(_) => "domain",
        Error::Range(_) => "range",
        Error::ZeroNotConverged { .. } => "zero_not_converged",
        Error::UnsupportedDegree(_) => "unsupported_degree",
        Error::UnsupportedMultiplicity(_) => "unsupported_multiplicity",
        Error::Quadrature { .. } => "quadrature",
        Error::Divergent(_) => "divergent",
        Error::NeedMoreZeros { .. } => "need_more_zeros",
        Error::IllConditioned(_) => "ill_conditioned",
        Error::Consistency(_) => "consistency",
    }
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    let body = json!({"error": kind, "message": message, "exit_code": code});
    eprintln!("{body}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let msg = e.render().to_string();
            return fail("usage", msg.trim_end(), 2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let start = Instant::now();
    let report = match dispatch(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            let code = if e.is_usage() { 2 } else { 3 };
            return fail(error_kind(&e), &e.to_string(), code);
        }
    };
    let passed = report.passed;
    let bytes = match render(report, cli.format, start.elapsed().as_secs_f64()) {
        Ok(b) => b,
        Err(e) => return fail("io", &e.to_string(), 3),
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &bytes),
        None => std::io::stdout().write_all(&bytes),
    };
    if let Err(e) = written {
        return fail("io", &e.to_string(), 3);
    }
    if !passed {
        return fail("verification_failed", "check did not pass; see report", 3);
    }
    ExitCode::SUCCESS
}
