use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use swwe_core::analysis::{convergence_table, ConvergenceRow};
use swwe_core::model::{reflection_formula_variant, spectral_data, FlowConfig};
use swwe_core::sat::resolve_penalties;
use swwe_core::sbp::Grid;
use swwe_core::scenarios::Scenario;
use swwe_core::solver::{run, RunParams, RunResult};
use swwe_core::verify::{run_verification, VerifyConfig, VerifyReport};
use swwe_core::{Result, SwweError};

use crate::config::{Command, Settings};

fn io_err(path: &Path, e: std::io::Error) -> SwweError {
    SwweError::InvalidConfig {
        field: "out_dir",
        reason: format!("{}: {e}", path.display()),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Serialize)]
struct RegimeReport {
    label: String,
    regime: String,
    velocity: f64,
    lambda1: f64,
    lambda2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma1: Option<f64>,
    /// The alternate closed form, reported next to the values in use.
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_formula_variant: Option<[f64; 2]>,
    tau01: f64,
    tau02: f64,
    taun1: f64,
    taun2: f64,
}

fn regime_report(settings: &Settings, flow: &FlowConfig) -> Result<RegimeReport> {
    let sd = spectral_data(flow)?;
    let pen = resolve_penalties(&sd, &settings.penalties())?;
    Ok(RegimeReport {
        label: sd.regime.label().to_string(),
        regime: sd.regime.to_string(),
        velocity: flow.velocity,
        lambda1: sd.lambda1,
        lambda2: sd.lambda2,
        gamma0: pen.reflection.map(|r| r.gamma0),
        gamma1: pen.reflection.map(|r| r.gamma1),
        gamma_formula_variant: pen.reflection.map(|_| {
            let (g0, g1) = reflection_formula_variant(&sd);
            [g0, g1]
        }),
        tau01: pen.tau01,
        tau02: pen.tau02,
        taun1: pen.taun1,
        taun2: pen.taun2,
    })
}

#[derive(Serialize)]
struct Manifest<'a, R: Serialize> {
    command: &'static str,
    version: &'static str,
    wall_time_s: f64,
    config: &'a Settings,
    regime: Option<RegimeReport>,
    run: R,
}

fn write_manifest<R: Serialize>(
    dir: &Path,
    cmd: Command,
    settings: &Settings,
    regime: Option<RegimeReport>,
    run: R,
    started: Instant,
) -> Result<PathBuf> {
    let m = Manifest {
        command: cmd.name(),
        version: env!("CARGO_PKG_VERSION"),
        wall_time_s: started.elapsed().as_secs_f64(),
        config: settings,
        regime,
        run,
    };
    let text = toml::to_string(&m).map_err(|e| SwweError::InvalidConfig {
        field: "manifest",
        reason: e.to_string(),
    })?;
    write_file(dir, "manifest.toml", &text)
}

fn params(settings: &Settings, record_energy: bool) -> RunParams {
    RunParams {
        cr: settings.cr,
        t_final: settings.t_final,
        alpha: settings.alpha,
        scaling: settings.dissipation_scale,
        record_energy,
        record_interval: settings.record_interval,
        snapshots: settings.snapshots.clone(),
        penalties: settings.penalties(),
    }
}

pub fn solution_csv(result: &RunResult, grid: &Grid, scenario: &Scenario, flow: &FlowConfig) -> String {
    let scale = Scenario::x_scale(flow);
    let mut out = String::from("t,x,x_scaled,h,u,h_exact,u_exact\n");
    for snap in &result.snapshots {
        let (h, u) = (snap.h(), snap.u());
        for (i, x) in grid.nodes().iter().enumerate() {
            let exact = scenario.exact_at(*x, snap.t);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                num(snap.t),
                num(*x),
                num(x / scale),
                num(h[i]),
                num(u[i]),
                opt_num(exact.map(|e| e.0)),
                opt_num(exact.map(|e| e.1)),
            );
        }
    }
    out
}

pub fn energy_csv(result: &RunResult) -> String {
    let mut out = String::from("t,energy\n");
    for (t, e) in &result.energy {
        let _ = writeln!(out, "{},{}", num(*t), num(*e));
    }
    out
}

pub fn convergence_csv(rows: &[ConvergenceRow], alpha: f64, regime: &str) -> String {
    let mut out = String::from("N,h_error,h_rate,u_error,u_rate,alpha,regime\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            num(r.h_error),
            opt_num(r.h_rate),
            num(r.u_error),
            opt_num(r.u_rate),
            num(alpha),
            regime
        );
    }
    out
}

#[derive(Serialize)]
struct SimulateRun {
    steps: usize,
    dt: f64,
    final_time: f64,
    domain_length: f64,
    x_scale: f64,
}

pub fn simulate(settings: &Settings, out_dir: &Path) -> Result<()> {
    let started = Instant::now();
    let flow = settings.flow()?;
    let regime = regime_report(settings, &flow)?;
    let scenario = settings.scenario.build(&flow, settings.seed)?;
    let grid = Grid::uniform(settings.n, scenario.domain_length)?;
    let result = run(&scenario, &grid, &flow, &params(settings, true))?;

    write_file(out_dir, "solution.csv", &solution_csv(&result, &grid, &scenario, &flow))?;
    write_file(out_dir, "energy.csv", &energy_csv(&result))?;
    let info = SimulateRun {
        steps: result.steps,
        dt: result.dt,
        final_time: result.final_state.t,
        domain_length: scenario.domain_length,
        x_scale: Scenario::x_scale(&flow),
    };
    println!(
        "{} flow, {} on N = {}: {} steps of dt = {:.6e} to t = {}",
        regime.label, settings.scenario, settings.n, result.steps, result.dt, info.final_time
    );
    if let Some(exact) = &scenario.exact {
        let (eh, eu) = swwe_core::analysis::l2_error(&result.final_state, &**exact, &grid, info.final_time)?;
        println!("L2 error at t = {}: h {eh:.6e}, u {eu:.6e}", info.final_time);
    }
    write_manifest(out_dir, Command::Simulate, settings, Some(regime), info, started)?;
    println!("wrote {}", out_dir.display());
    Ok(())
}

#[derive(Serialize)]
struct ConvergeRun {
    rows: Vec<ConvergenceRow>,
}

pub fn converge(settings: &Settings, out_dir: &Path) -> Result<()> {
    let started = Instant::now();
    let flow = settings.flow()?;
    let regime = regime_report(settings, &flow)?;
    let scenario = settings.scenario.build(&flow, settings.seed)?;
    let rows = convergence_table(&scenario, &flow, &params(settings, false), &settings.resolutions)?;

    println!(
        "{} flow, {}, alpha = {}, t = {}",
        regime.label, settings.scenario, settings.alpha, settings.t_final
    );
    println!("{:>6} {:>12} {:>6} {:>12} {:>6}", "N", "h error", "rate", "u error", "rate");
    let rate = |r: Option<f64>| r.map(|v| format!("{v:.2}")).unwrap_or_default();
    for r in &rows {
        println!(
            "{:>6} {:>12.3e} {:>6} {:>12.3e} {:>6}",
            r.n,
            r.h_error,
            rate(r.h_rate),
            r.u_error,
            rate(r.u_rate)
        );
    }
    write_file(out_dir, "convergence.csv", &convergence_csv(&rows, settings.alpha, &regime.label))?;
    write_manifest(out_dir, Command::Converge, settings, Some(regime), ConvergeRun { rows }, started)?;
    println!("wrote {}", out_dir.display());
    Ok(())
}

#[derive(Serialize)]
struct VerifyRun {
    passed: bool,
}

/// Returns whether every check passed.
pub fn verify(settings: &Settings, out_dir: Option<&Path>) -> Result<bool> {
    let started = Instant::now();
    let flow = settings.flow()?;
    let cfg = VerifyConfig {
        flow,
        n: settings.n,
        alpha: settings.alpha,
        scaling: settings.dissipation_scale,
        penalties: settings.penalties(),
        samples: settings.samples,
        seed: settings.seed,
    };
    let report: VerifyReport = run_verification(&cfg);
    println!("{} flow", report.regime);
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let passed = report.passed();
    if let Some(dir) = out_dir {
        let json = serde_json::to_string_pretty(&report).map_err(|e| SwweError::InvalidConfig {
            field: "verify",
            reason: e.to_string(),
        })?;
        write_file(dir, "verify.json", &json)?;
        let regime = regime_report(settings, &flow).ok();
        write_manifest(dir, Command::Verify, settings, regime, VerifyRun { passed }, started)?;
    }
    Ok(passed)
}
