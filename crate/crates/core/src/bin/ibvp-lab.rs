use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use log::info;
use serde::Serialize;
use serde_json::{json, Value};

use ibvp_lab::compat::{compat_report, compat_report_with, CompatOptions, DataFn};
use ibvp_lab::config::{Case, ExperimentConfig, RunManifest};
use ibvp_lab::grid::{diff, l2_norm, HalfLineSamples, LineSamples};
use ibvp_lab::harness::{estimate_sides, regularity_sweep_with, EstimateSides, SweepResult};
use ibvp_lab::io;
use ibvp_lab::lifting::{corner_lift, lift_rm, synthesize_compatible_data};
use ibvp_lab::solver::{boundary_residual, solve};
use ibvp_lab::sobolev::{gagliardo_seminorm, h1200_norm};
use ibvp_lab::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Cmd {
    CheckCompat,
    Solve,
    Sweep,
    Lift,
    Synthesize,
    Norms,
    Estimate,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::CheckCompat => "check-compat",
            Cmd::Solve => "solve",
            Cmd::Sweep => "sweep",
            Cmd::Lift => "lift",
            Cmd::Synthesize => "synthesize",
            Cmd::Norms => "norms",
            Cmd::Estimate => "estimate",
        }
    }
}

/// Compatibility checks, solves and regularity experiments for first-order
/// hyperbolic initial boundary value problems on the quarter plane.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    cmd: Cmd,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `levels` in the config.
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long, short)]
    verbose: bool,
}

struct Run {
    cfg: ExperimentConfig,
    cases: Vec<Case>,
    out: Option<PathBuf>,
    manifest: RunManifest,
}

impl Run {
    fn record(&mut self, paths: Vec<PathBuf>) {
        for p in paths {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            self.manifest.outputs.push(name);
        }
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        if let Some(dir) = &self.out {
            let p = dir.join(name);
            io::write_json(&p, value)?;
            self.record(vec![p]);
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    env_logger::Builder::new()
        .filter_level(if args.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .init();
    match run(&args) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: &Args) -> Result<Value> {
    let (mut cfg, text) = ExperimentConfig::load(&args.config, args.seed)?;
    if let Some(l) = args.levels {
        cfg.levels = l;
    }
    let out = args.out.clone().or_else(|| cfg.output.dir.clone());
    if let Some(dir) = &out {
        fs::create_dir_all(dir)?;
    }
    let cases = cfg.cases()?;
    let manifest = RunManifest::new(args.cmd.name(), &text, cfg.seed);
    let mut run = Run {
        cfg,
        cases,
        out,
        manifest,
    };
    info!("{} on {} case(s)", args.cmd.name(), run.cases.len());
    let summary = match args.cmd {
        Cmd::CheckCompat => check_compat(&mut run),
        Cmd::Solve => cmd_solve(&mut run),
        Cmd::Sweep => cmd_sweep(&mut run),
        Cmd::Lift => cmd_lift(&mut run),
        Cmd::Synthesize => cmd_synthesize(&mut run),
        Cmd::Norms => cmd_norms(&mut run),
        Cmd::Estimate => cmd_estimate(&mut run),
    }?;
    if let Some(dir) = run.out.clone() {
        run.manifest.finish();
        io::write_json(&dir.join("manifest.json"), &run.manifest)?;
    }
    Ok(summary)
}

fn check_compat(run: &mut Run) -> Result<Value> {
    let mut reports = serde_json::Map::new();
    for c in &run.cases {
        info!("compatibility of {}", c.name);
        let rep = compat_report(&c.spec, &c.data, run.cfg.s_max)?;
        reports.insert(c.name.clone(), serde_json::to_value(rep)?);
    }
    let v = Value::Object(reports);
    run.write_json("compat.json", &v)?;
    Ok(v)
}

fn cmd_solve(run: &mut Run) -> Result<Value> {
    let sc = run.cfg.solve.to_config();
    let mut summary = serde_json::Map::new();
    for c in run.cases.clone() {
        info!("solving {}", c.name);
        let u = solve(&c.spec, &c.data, &sc)?;
        if !u.is_finite() {
            return Err(Error::InvalidParameter(format!("{}: non-finite solution", c.name)));
        }
        let residual = if c.data.f.is_zero() {
            Some(boundary_residual(&c.spec, &u, &c.data.g)?)
        } else {
            None
        };
        let max_abs = u.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if let Some(dir) = run.out.clone() {
            let mut paths = io::write_field(&dir, &c.name, &u, run.cfg.output.field_csv)?;
            paths.extend(io::write_traces(&dir, &c.name, &u)?);
            run.record(paths);
        }
        summary.insert(
            c.name.clone(),
            json!({ "nx": u.nx(), "nt": u.nt(), "max_abs": max_abs, "boundary_residual": residual }),
        );
    }
    let v = Value::Object(summary);
    run.write_json("solve.json", &v)?;
    Ok(v)
}

fn cmd_sweep(run: &mut Run) -> Result<Value> {
    let mut rows: Vec<(String, SweepResult)> = vec![];
    for c in &run.cases {
        info!("sweeping {}", c.name);
        let r = regularity_sweep_with(&c.spec, &c.data, &run.cfg.s_grid, run.cfg.levels, &run.cfg.sweep)?;
        rows.push((c.name.clone(), r));
    }
    let mut cells = 0;
    let mut agree = 0;
    let mut flagged = vec![];
    for (name, r) in &rows {
        for (i, m) in r.matches().into_iter().enumerate() {
            cells += 1;
            match m {
                Some(true) => agree += 1,
                _ => flagged.push(json!({ "case": name, "s": r.s[i], "classification": r.classification[i], "predicted": r.predicted[i] })),
            }
        }
    }
    let summary = json!({ "cases": rows.len(), "cells": cells, "matching": agree, "flagged": flagged });
    if let Some(dir) = run.out.clone() {
        let csv = dir.join("sweep.csv");
        io::write_sweep_csv(&csv, &rows)?;
        let mut paths = vec![csv];
        for (name, r) in &rows {
            paths.extend(io::write_sweep_plots(&dir, name, r)?);
        }
        run.record(paths);
        let full: serde_json::Map<String, Value> = rows
            .iter()
            .map(|(n, r)| Ok((n.clone(), serde_json::to_value(r)?)))
            .collect::<Result<_>>()?;
        run.write_json("sweep.json", &json!({ "summary": summary, "results": full }))?;
    }
    Ok(summary)
}

fn trace_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn half_line(d: &DataFn, extent: f64, points: usize) -> Result<HalfLineSamples> {
    let h = extent / points as f64;
    let v = (0..=points)
        .map(|i| d.eval(0, i as f64 * h).ok_or(Error::HorizonExceeded("sampled")))
        .collect::<Result<Vec<f64>>>()?;
    HalfLineSamples::scalar(h, v)
}

fn cmd_lift(run: &mut Run) -> Result<Value> {
    let lp = run.cfg.lifting.clone();
    let mut summary = serde_json::Map::new();
    for c in run.cases.clone() {
        info!("lifting {}", c.name);
        let g = LineSamples::from_fn(-lp.window, lp.window, lp.points, |x| c.data.g.eval(0, x).unwrap_or(f64::NAN));
        let lift = lift_rm(&g, lp.m, lp.lambda, lp.s)?;
        let scale = g.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let traces: Vec<Value> = (0..=lp.m + 1)
            .map(|j| {
                let d = lift.plane.time_jet(j)?;
                let want: Vec<f64> = if j == lp.m { g.values.clone() } else { vec![0.0; g.values.len()] };
                Ok(json!({ "order": j, "max_error_rel": trace_error(&d, &want) / scale }))
            })
            .collect::<Result<_>>()?;
        let mut entry = json!({ "report": lift.report, "traces": traces });
        if let Some(dir) = run.out.clone() {
            let paths = io::write_plane(&dir, &format!("{}_lift", c.name), &lift.plane, run.cfg.output.field_csv)?;
            run.record(paths);
        }
        if lp.corner {
            let u0 = half_line(&c.data.u0, lp.window, lp.points)?;
            let gh = half_line(&c.data.g, lp.window, lp.points)?;
            let cl = corner_lift(&u0, &gh, lp.theta)?;
            let p = &cl.plane;
            let n = p.nx.min(p.nt);
            let row0: Vec<f64> = (0..n).map(|i| p.get(i, 0)).collect();
            let col0: Vec<f64> = (0..n).map(|j| p.get(0, j)).collect();
            entry["corner"] = json!({
                "membership": cl.membership,
                "initial_trace_error": trace_error(&row0, &u0.comp(0)[..n]),
                "boundary_trace_error": trace_error(&col0, &gh.comp(0)[..n]),
            });
            if let Some(dir) = run.out.clone() {
                let paths = io::write_plane(&dir, &format!("{}_corner", c.name), p, run.cfg.output.field_csv)?;
                run.record(paths);
            }
        }
        summary.insert(c.name.clone(), entry);
    }
    let v = Value::Object(summary);
    run.write_json("lift.json", &v)?;
    Ok(v)
}

fn cmd_synthesize(run: &mut Run) -> Result<Value> {
    let lp = run.cfg.lifting.clone();
    let mut summary = serde_json::Map::new();
    for c in &run.cases {
        info!("synthesizing {}", c.name);
        let syn = synthesize_compatible_data(&c.spec, &c.data, lp.k, lp.m, lp.lambda)?;
        let before = compat_report_with(&c.spec, &c.data, lp.m as f64, CompatOptions { capped: true })?;
        let after = compat_report_with(&c.spec, &syn.data, lp.m as f64, CompatOptions { capped: true })?;
        summary.insert(
            c.name.clone(),
            json!({
                "lambda": syn.lambda,
                "corrections": syn.corrections,
                "change_h1": syn.change_h1,
                "verified_before": before.verified_order,
                "verified_after": after.verified_order,
                "data": syn.data,
            }),
        );
    }
    let v = Value::Object(summary);
    run.write_json("synthesize.json", &v)?;
    Ok(v)
}

/// `s = k + theta`: L2 norm of the k-th difference quotient for integer
/// `s`, its Gagliardo seminorm otherwise.
fn line_norm(v: &[f64], h: f64, s: f64) -> Result<Value> {
    let k = s.floor() as usize;
    let theta = s - k as f64;
    let mut d = v.to_vec();
    for _ in 0..k {
        d = diff(&d, h);
    }
    if theta == 0.0 {
        Ok(json!({ "s": s, "value": l2_norm(&d, h), "verdict": null }))
    } else {
        let r = gagliardo_seminorm(&d, h, theta)?;
        Ok(json!({ "s": s, "value": r.value, "verdict": r.verdict, "slope": r.slope }))
    }
}

fn cmd_norms(run: &mut Run) -> Result<Value> {
    let np = run.cfg.norms.clone();
    let h = np.extent / np.points as f64;
    let mut summary = serde_json::Map::new();
    for c in &run.cases {
        let mut entry = serde_json::Map::new();
        for (what, d) in [("u0", &c.data.u0), ("g", &c.data.g)] {
            let comps: Vec<Value> = (0..d.ncomp())
                .map(|comp| {
                    let v: Vec<f64> = (0..=np.points)
                        .map(|i| d.eval(comp, i as f64 * h).ok_or(Error::HorizonExceeded("sampled")))
                        .collect::<Result<_>>()?;
                    let norms = run.cfg.s_grid.iter().map(|&s| line_norm(&v, h, s)).collect::<Result<Vec<_>>>()?;
                    Ok(Value::Array(norms))
                })
                .collect::<Result<_>>()?;
            entry.insert(what.to_string(), Value::Array(comps));
        }
        if c.spec.q() == 1 {
            // Corner mismatch u0(s) - g(s) for scalar problems.
            let diff: Vec<f64> = (0..=np.points)
                .map(|i| {
                    let x = i as f64 * h;
                    c.data.u0.eval(0, x).unwrap_or(f64::NAN) - c.data.g.eval(0, x).unwrap_or(f64::NAN)
                })
                .collect();
            entry.insert("mismatch_h1200".into(), serde_json::to_value(h1200_norm(&diff, h))?);
        }
        summary.insert(c.name.clone(), Value::Object(entry));
    }
    let v = Value::Object(summary);
    run.write_json("norms.json", &v)?;
    Ok(v)
}

fn cmd_estimate(run: &mut Run) -> Result<Value> {
    let sc = run.cfg.solve.to_config();
    let ep = run.cfg.estimate.clone();
    let mut rows: Vec<(String, EstimateSides)> = vec![];
    for c in &run.cases {
        info!("estimates for {}", c.name);
        let u = solve(&c.spec, &c.data, &sc)?;
        for &gamma in &run.cfg.gamma {
            rows.push((c.name.clone(), estimate_sides(&u, &c.data, gamma, ep.s, ep.kind)?));
        }
    }
    if let Some(dir) = run.out.clone() {
        let p = dir.join("estimates.csv");
        io::write_estimates_csv(&p, &rows)?;
        run.record(vec![p]);
    }
    let v = json!(rows
        .iter()
        .map(|(n, e)| json!({ "case": n, "gamma": e.gamma, "ratio": e.ratio, "anomaly": e.anomaly }))
        .collect::<Vec<_>>());
    run.write_json("estimates.json", &v)?;
    Ok(v)
}
