//! Command-line front end. Exit codes: 0 success, 1 rejected input, 2 numerical
//! failure, 3 selftest tolerance breach.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use spectral_orbit::curve::{validate_curve, IntersectionTable};
use spectral_orbit::flow::{compare_flows, flow_point, flow_trace, integrate_nahm, uniform_grid};
use spectral_orbit::frames::{frame_checks, jacobian_from_frame, polynomial_from_frame, unitary_frame};
use spectral_orbit::io;
use spectral_orbit::linalg::trace;
use spectral_orbit::potential::{eguchi_hanson_from_polynomial, hitchin_residual, kahler_potential};
use spectral_orbit::sections::is_definite;
use spectral_orbit::theta::{theta_pq, theta_with_scale, pq_gluing, JacobianPoint};
use spectral_orbit::{selftest, Error, Result};

#[derive(Parser)]
#[command(name = "spectral-orbit", version, about = "Theta functions and Nahm flows on reducible real spectral curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a curve and print its intersection table
    Curve(Config),
    /// Evaluate θ_{p,q} at a gluing, optionally flowed by --t0
    Theta(Config),
    /// Unitary frame, matricial polynomial and residual report
    Frame(Config),
    /// Trace of the linear flow on the grid [t0, t1]
    Flow(Config),
    /// Compare RK4 integration of the Nahm equations with the algebraic flow
    NahmOde(Config),
    /// Kahler potential, with the closed-form cross-check for k = 2
    Potential(Config),
    /// Seeded invariant suite
    Selftest(Config),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Config {
    /// Curve JSON file, or inline JSON
    #[arg(long)]
    curve: Option<String>,
    /// Gluing JSON file, or inline JSON
    #[arg(long)]
    gluing: Option<String>,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    p: i32,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    q: i32,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t0: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    t1: f64,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// RK4 step
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    /// Bound on frame residuals
    #[arg(long, default_value_t = 1e-9)]
    tol_frame: f64,
    /// Bound on Hitchin identity residuals
    #[arg(long, default_value_t = 1e-7)]
    tol_hitchin: f64,
    /// Bound on ODE vs algebraic trace deltas
    #[arg(long, default_value_t = 1e-6)]
    tol_ode: f64,
    /// Bound on |K_theta − K_closed_form|
    #[arg(long, default_value_t = 1e-8)]
    tol_potential: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Defaults to csv for `flow`, json otherwise
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_source(arg: &str) -> Result<String> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|e| Error::Io(format!("{arg}: {e}")))
}

impl Config {
    fn table(&self) -> Result<IntersectionTable> {
        let src = self.curve.as_deref().ok_or_else(|| Error::InvalidInput("--curve is required".into()))?;
        validate_curve(&io::parse_curve(&read_source(src)?)?)
    }

    fn point(&self, table: &IntersectionTable) -> Result<JacobianPoint> {
        let src = self.gluing.as_deref().ok_or_else(|| Error::InvalidInput("--gluing is required".into()))?;
        let ratios = io::parse_gluing(table.k(), &read_source(src)?)?;
        Ok(JacobianPoint::from_ratios(table.k(), &ratios))
    }

    fn grid(&self) -> Result<Vec<f64>> {
        if self.steps == 0 || !(self.t1 >= self.t0) {
            return Err(Error::InvalidInput(format!(
                "need steps > 0 and t1 >= t0, got steps = {}, [{}, {}]",
                self.steps, self.t0, self.t1
            )));
        }
        Ok(uniform_grid(self.t0, self.t1, self.steps))
    }
}

fn pair(z: spectral_orbit::linalg::C64) -> Value {
    json!([z.re, z.im])
}

fn cmd_theta(cfg: &Config) -> Result<Value> {
    let table = cfg.table()?;
    let pt = flow_point(&table, &cfg.point(&table)?, cfg.t0);
    let value = theta_pq(&table, &pt, cfg.p, cfg.q);
    let (_, scale) = theta_with_scale(&table, &pq_gluing(table.k(), pt.ratios(), cfg.p, cfg.q));
    Ok(json!({
        "p": cfg.p,
        "q": cfg.q,
        "t": cfg.t0,
        "theta": pair(value),
        "relative": value.norm() / scale,
        "point": io::gluing_to_json(table.k(), pt.ratios()),
        "verdict": is_definite(&table, &pt).verdict.as_str(),
    }))
}

fn cmd_frame(cfg: &Config) -> Result<Value> {
    let table = cfg.table()?;
    let pt = flow_point(&table, &cfg.point(&table)?, cfg.t0);
    let frame = unitary_frame(&table, &pt)?;
    let a = polynomial_from_frame(&table, &frame)?;
    let r = frame_checks(&table, &frame, &a);
    let round_trip = jacobian_from_frame(&table, &frame)?.point.distance(&pt);
    Ok(json!({
        "t": cfg.t0,
        "A": io::polynomial_to_json(&a),
        "frame": io::frame_to_json(&frame),
        "residuals": {
            "unitarity": r.unitarity,
            "reality_a2": r.reality_a2,
            "reality_a1": r.reality_a1,
            "lower_a0": r.lower_a0,
            "upper_a2": r.upper_a2,
            "diagonal_a0": r.diagonal_a0,
            "char_poly": r.char_poly,
            "matching": r.matching,
            "round_trip": round_trip,
        },
        "tolerance": cfg.tol_frame,
        "passes": r.worst().max(round_trip) < cfg.tol_frame,
    }))
}

fn cmd_flow(cfg: &Config) -> Result<String> {
    let table = cfg.table()?;
    let samples = flow_trace(&table, &cfg.point(&table)?, &cfg.grid()?)?;
    Ok(match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => io::trace_to_csv(&samples),
        Format::Json => pretty(&io::trace_to_json(&samples)),
    })
}

fn cmd_nahm_ode(cfg: &Config) -> Result<Value> {
    let table = cfg.table()?;
    let pt = cfg.point(&table)?;
    let grid = cfg.grid()?;
    let mut samples = flow_trace(&table, &pt, &grid)?;
    for s in &mut samples {
        s.t -= cfg.t0;
    }
    // step shrunk so every grid node is an RK4 node
    let span = cfg.t1 - cfg.t0;
    let spacing = span / cfg.steps as f64;
    let sub = if spacing > 0.0 { (spacing / cfg.h - 1e-9).ceil().max(1.0) } else { 1.0 };
    let h = if spacing > 0.0 { spacing / sub } else { cfg.h };
    let traj = integrate_nahm(samples[0].a.nahm_triple(), span, h)?;
    let cmp = compare_flows(&traj, &samples)?;
    Ok(json!({
        "t0": cfg.t0,
        "t1": cfg.t1,
        "h": traj.h,
        "rows": cmp.rows.iter().map(|r| json!({
            "t": r.t + cfg.t0,
            "trTsq_delta": r.tr_sq_delta,
            "spectral_delta": r.spectral_delta,
        })).collect::<Vec<_>>(),
        "max_delta": cmp.max_delta,
        "argmax_t": cmp.argmax_t + cfg.t0,
        "max_spectral_delta": cmp.max_spectral_delta,
        "invariant_drift": traj.invariant_drift(),
        "skew_drift": traj.skew_drift,
        "tolerance": cfg.tol_ode,
        "passes": cmp.max_delta < cfg.tol_ode,
    }))
}

fn cmd_potential(cfg: &Config) -> Result<Value> {
    let table = cfg.table()?;
    let pt = cfg.point(&table)?;
    let k_theta = kahler_potential(&table, &pt)?;
    let hr = hitchin_residual(&table, &pt, 0.0)?;
    let mut out = json!({
        "K": k_theta,
        "hitchin_residual": hr.worst(),
        "hitchin_passes": hr.worst() < cfg.tol_hitchin,
    });
    if table.k() == 2 {
        let a = polynomial_from_frame(&table, &unitary_frame(&table, &pt)?)?;
        let (f, k_closed) = eguchi_hanson_from_polynomial(&table, &a)?;
        let map = out.as_object_mut().expect("object");
        map.insert("K_closed_form".into(), json!(k_closed));
        map.insert("f_closed_form".into(), json!(f));
        map.insert("trA0A0star".into(), json!(trace(&(&a.a0 * a.a0.adjoint())).re));
        map.insert("agreement".into(), json!((k_theta - k_closed).abs()));
        map.insert("passes".into(), json!((k_theta - k_closed).abs() < cfg.tol_potential));
    }
    Ok(out)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn emit(cfg: &Config, text: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let (cfg, text) = match &cli.command {
        Command::Curve(cfg) => (cfg, pretty(&io::intersection_report(&cfg.table()?))),
        Command::Theta(cfg) => (cfg, pretty(&cmd_theta(cfg)?)),
        Command::Frame(cfg) => (cfg, pretty(&cmd_frame(cfg)?)),
        Command::Flow(cfg) => (cfg, cmd_flow(cfg)?),
        Command::NahmOde(cfg) => (cfg, pretty(&cmd_nahm_ode(cfg)?)),
        Command::Potential(cfg) => (cfg, pretty(&cmd_potential(cfg)?)),
        Command::Selftest(cfg) => {
            let report = selftest::run(cfg.seed);
            let text = match cfg.format {
                Some(Format::Json) => pretty(&serde_json::to_value(&report)?),
                _ => report.render(),
            };
            emit(cfg, &text)?;
            return Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(3) });
        }
    };
    emit(cfg, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("SPECTRAL_ORBIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
