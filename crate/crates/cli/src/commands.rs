use crate::config::{initial_field, CMode, ExperimentConfig, InitialConfig};
use anyhow::{bail, Context};
use mixlog_core::advection::run;
use mixlog_core::diagnostics::{
    attach_dvdt_gaps, calibrate, check_envelope, least_squares_slope, record, sharpness, to_series, trajectory_records,
    Calibration, DiagnosticsOptions, EnvelopeReport, Functional,
};
use mixlog_core::functionals::hs_norm;
use mixlog_core::io::{list_snapshots, read_field, snapshot_name, write_atomic, write_field, Series};
use mixlog_core::mixing::{decay_inputs, functional_decay_bound, Verdict};
use mixlog_core::verify::{run_suite, SUITES};
use mixlog_core::{Constants, Grid, MixError};
use serde_json::{json, Value};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Marks an error as a usage problem (exit status 2).
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(e: impl fmt::Display) -> anyhow::Error {
    Usage(e.to_string()).into()
}

fn usage_chain(e: anyhow::Error) -> anyhow::Error {
    usage(format!("{e:#}"))
}

fn write_json(path: &Path, value: &Value) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

fn calibration_json(c: &Calibration, env: &EnvelopeReport) -> Value {
    json!({
        "C": c.c,
        "t_max": c.t_max,
        "norm_factor": c.norm_factor,
        "p": c.p,
        "provenance": c.provenance,
        "envelope_holds": env.holds,
        "envelope_worst_excess": env.worst_excess,
    })
}

pub fn simulate(config: &Path, out: Option<PathBuf>, seed: Option<u64>) -> anyhow::Result<ExitCode> {
    let cfg = ExperimentConfig::load(config, seed).map_err(usage_chain)?;
    let out = out.or_else(|| cfg.out.clone()).ok_or_else(|| usage("no output directory: pass --out or set `out`"))?;
    let theta0 = cfg.initial_field()?;
    let flow = cfg.flow_spec()?;
    let p = cfg.certificates.p;
    let traj = run(&theta0, &flow, cfg.horizon, cfg.sample_dt, p).context("running the solver")?;

    let mut records = trajectory_records(&traj, &cfg.diagnostics_options())?;
    if cfg.diagnostics.dvdt_check {
        attach_dvdt_gaps(&mut records, &traj, cfg.diagnostics.dvdt_dt)?;
    }

    let snap_dir = out.join("snapshots");
    fs::create_dir_all(&snap_dir).with_context(|| format!("creating {}", snap_dir.display()))?;
    for stale in list_snapshots(&snap_dir)? {
        fs::remove_file(&stale).with_context(|| format!("removing {}", stale.display()))?;
    }
    for (i, s) in traj.snapshots().iter().enumerate() {
        write_field(&snap_dir.join(snapshot_name(i)), &s.field)?;
    }
    let series = to_series(&records);
    series.write(&out.join("series.csv"))?;

    let ts = traj.times();
    let vs: Vec<f64> = records.iter().map(|r| r.v).collect();
    let sqrt_ws: Vec<f64> = records.iter().map(|r| r.w.sqrt()).collect();
    let l2_0 = records[0].l2;
    let l2_drift = records.iter().map(|r| (r.l2 - l2_0).abs()).fold(0.0, f64::max) / l2_0.max(f64::MIN_POSITIVE);
    let v_slope = least_squares_slope(&ts, &vs);
    let cum = traj.last().cum_grad_p;
    let mean_grad = (cfg.horizon > 0.0).then(|| cum / cfg.horizon);

    let cal_v = calibrate(&traj, Functional::V)?;
    let env_v = check_envelope(&traj, &cal_v);
    let sqrt_w = if p >= 2.0 {
        let cal = calibrate(&traj, Functional::SqrtW)?;
        let env = check_envelope(&traj, &cal);
        calibration_json(&cal, &env)
    } else {
        Value::Null
    };
    let slope_bound = match (v_slope, mean_grad) {
        (Some(s), Some(g)) => {
            let bound = cal_v.c * cal_v.norm_factor * g;
            json!({ "slope": s, "bound": bound, "holds": s.abs() <= bound * (1.0 + 1e-12) })
        }
        _ => Value::Null,
    };

    let (c, provenance) = match cfg.certificates.c_mode {
        CMode::Calibrated => (cal_v.c, cal_v.provenance.clone()),
        CMode::Fixed => (cfg.certificates.c.expect("validated"), "fixed: supplied in the configuration".to_string()),
    };
    let mut certificates = Vec::new();
    for &s in &cfg.certificates.s {
        let mut all_pass = true;
        let mut last = None;
        for snap in traj.snapshots() {
            let inputs = decay_inputs(&theta0, s, p, snap.cum_grad_p)?;
            let cert = functional_decay_bound(&inputs, c, &provenance)?.check(hs_norm(&snap.field, -s), 1e-12);
            all_pass &= cert.verdict == Verdict::Pass;
            last = Some(cert);
        }
        let mut entry = serde_json::to_value(last.expect("at least one snapshot"))?;
        entry["s"] = json!(s);
        entry["all_samples_pass"] = json!(all_pass);
        certificates.push(entry);
    }

    let dvdt_gap_max = cfg.diagnostics.dvdt_check.then(|| {
        records.iter().filter_map(|r| r.dvdt_gap).filter(|g| g.is_finite()).fold(0.0, f64::max)
    });

    let summary = json!({
        "config": cfg,
        "samples": records.len(),
        "l2_relative_drift": l2_drift,
        "cum_grad_p": cum,
        "mean_grad_p": mean_grad,
        "slopes": {
            "v_vs_t": v_slope,
            "sqrt_w_vs_t": least_squares_slope(&ts, &sqrt_ws),
        },
        "calibration": {
            "v": calibration_json(&cal_v, &env_v),
            "sqrt_w": sqrt_w,
        },
        "v_slope_bound": slope_bound,
        "certificates": certificates,
        "dvdt_gap_max": dvdt_gap_max,
    });
    write_json(&out.join("summary.json"), &summary)?;
    println!("wrote {} snapshots, series.csv and summary.json to {}", records.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

pub struct SharpnessArgs {
    pub m: u64,
    pub n_max: u32,
    pub n: usize,
    pub d: usize,
    pub pattern: String,
    pub mode: u32,
    pub offset: f64,
    pub out: Option<PathBuf>,
}

pub fn sharpness_cmd(a: &SharpnessArgs) -> anyhow::Result<ExitCode> {
    let grid = Grid::torus(a.d, a.n).map_err(usage)?;
    let init = InitialConfig { pattern: a.pattern.clone(), mode: Some(a.mode), amplitude: None, offset: Some(a.offset), max_mode: None };
    if a.pattern == "random" {
        bail!(usage("the sharpness demonstration takes a deterministic pattern"));
    }
    let theta0 = initial_field(&init, grid, None).map_err(usage_chain)?;
    let report = sharpness(&theta0, a.m, a.n_max).map_err(|e| match e {
        MixError::BandOverflow(_) | MixError::InvalidArgument(_) => usage(e),
        other => other.into(),
    })?;
    let value = serde_json::to_value(&report)?;
    if let Some(out) = &a.out {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        let mut csv = String::from("n,v\n");
        for (n, v) in &report.rows {
            csv.push_str(&format!("{n},{}\n", mixlog_core::io::fmt_f64(*v)));
        }
        write_atomic(&out.join("sharpness.csv"), csv.as_bytes())?;
        write_json(&out.join("sharpness.json"), &value)?;
    }
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(ExitCode::SUCCESS)
}

pub fn verify(suite: &str, seed: u64, out: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&suite) {
        vec![suite]
    } else {
        return Err(usage(format!("unknown suite `{suite}` (expected one of {}, or all)", SUITES.join(", "))));
    };
    let results = names.iter().map(|n| run_suite(n, seed)).collect::<Result<Vec<_>, _>>()?;
    let passed = results.iter().all(|r| r.passed);
    let value = json!({ "seed": seed, "passed": passed, "suites": results });
    if let Some(path) = out {
        write_json(&path, &value)?;
    }
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn constants(d: usize) -> anyhow::Result<ExitCode> {
    if d != 1 && d != 2 {
        return Err(usage(format!("dimension must be 1 or 2, got {d}")));
    }
    let c = Constants::new(d)?;
    println!("{}", serde_json::to_string_pretty(&c)?);
    Ok(ExitCode::SUCCESS)
}

/// Recompute diagnostics for the snapshots of a run directory. Times and
/// accumulated gradients come from the run's `series.csv` when it matches.
pub fn diagnostics(dir: &Path, kappa: Option<f64>, hs: Vec<f64>, out: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    if let Some(k) = kappa {
        if !(k > 0.0 && k < 1.0) {
            return Err(usage(format!("kappa must lie in (0, 1), got {k}")));
        }
    }
    let snap_dir = if dir.join("snapshots").is_dir() { dir.join("snapshots") } else { dir.to_path_buf() };
    let paths = list_snapshots(&snap_dir)?;
    if paths.is_empty() {
        bail!("no snapshot files in {}", snap_dir.display());
    }
    let series_path = dir.join("series.csv");
    let known = if series_path.is_file() { Some(Series::read(&series_path)?) } else { None };
    let (ts, cums) = match &known {
        Some(s) if s.rows.len() == paths.len() => (s.column("t").expect("base column"), s.column("cum_grad_p").expect("base column")),
        _ => ((0..paths.len()).map(|i| i as f64).collect(), vec![f64::NAN; paths.len()]),
    };
    let opts = DiagnosticsOptions { hs, kappa };
    let mut records = Vec::with_capacity(paths.len());
    for (i, p) in paths.iter().enumerate() {
        let field = read_field(p)?;
        records.push(record(&field, ts[i], cums[i], &opts)?);
    }
    let out = out.unwrap_or_else(|| dir.join("diagnostics.csv"));
    to_series(&records).write(&out)?;
    println!("wrote {} rows to {}", records.len(), out.display());
    Ok(ExitCode::SUCCESS)
}
