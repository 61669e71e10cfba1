use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};
use supercrit::config::{CaseId, RawConfig, SimulationConfig};
use supercrit::diagnostics::{
    boundedness_verdict, simulate, window_fluctuation, DiagnosticsOptions, DiagnosticsSeries,
    TailWarning, MIN_WINDOW_SAMPLES,
};
use supercrit::initial::case_for_config;
use supercrit::output::{series_to_csv, write_atomic};
use supercrit::solver::Snapshot;
use supercrit::svg::{emit_svg, Axis, Curve, PlotSpec};
use supercrit::{Error, FirstStepMode};

use crate::{exit_code_for, Budget, RunArgs, EXIT_BLOWUP, EXIT_FAILURE, EXIT_USAGE};

/// Points kept per profile curve in the plots.
const PLOT_POINTS: usize = 1500;

fn build_config(args: &RunArgs) -> supercrit::Result<SimulationConfig> {
    let case = args.case.as_deref().map(str::parse::<CaseId>).transpose()?;
    let dim = args.dim.as_deref().map(|d| d.parse::<u32>().expect("validated by clap"));
    let mut raw = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<RawConfig>(&text).map_err(|e| Error::Parse(e.to_string()))?
        }
        None => {
            let case = case.ok_or_else(|| {
                Error::InvalidParameter("--case is required without --config".into())
            })?;
            let d = dim.ok_or_else(|| {
                Error::InvalidParameter("--dim is required without --config".into())
            })?;
            match args.budget {
                Budget::Paper => RawConfig::paper(case, d),
                Budget::Desk => RawConfig::desk(case, d),
            }
        }
    };
    if let Some(c) = case {
        raw.case_id = c;
    }
    if let Some(d) = dim {
        if d != raw.d {
            raw.d = d;
            raw.p = supercrit::config::library_power(d).unwrap_or(raw.p);
        }
    }
    if let Some(v) = args.dr {
        raw.dr = v;
    }
    if let Some(v) = args.dt {
        raw.dt = v;
    }
    if let Some(v) = args.tfinal {
        raw.t_final = v;
        raw.snapshot_times.retain(|&t| t <= v);
    }
    if let Some(v) = args.rmax {
        raw.r_max = v;
    }
    raw.validate()
}

fn time_label(t: f64) -> String {
    format!("{t}").replace('-', "m")
}

fn write_snapshot(dir: &Path, snap: &Snapshot) -> supercrit::Result<PathBuf> {
    let rel = PathBuf::from("snapshots").join(format!("u_t{}.csv", time_label(snap.t)));
    let mut buf = Vec::new();
    snap.field.write_csv(&mut buf, 1)?;
    write_atomic(&dir.join(&rel), &buf)?;
    Ok(rel)
}

fn series_curve(series: &DiagnosticsSeries, name: &str, f: impl Fn(&supercrit::diagnostics::DiagnosticsRow) -> f64) -> Curve {
    Curve::new(name, series.rows.iter().map(|r| (r.t, f(r))).filter(|p| p.1.is_finite()).collect())
}

fn plots(series: &DiagnosticsSeries, snapshots: &[Snapshot], cfg: &SimulationConfig) -> Vec<(String, PlotSpec, Vec<Curve>)> {
    let title = |what: &str| format!("{what}: case {}, d = {}, p = {}", cfg.case_id(), cfg.d(), cfg.p());
    let spec = |what: &str, x: &str, y: &str| PlotSpec {
        title: title(what),
        x: Axis::linear(x),
        y: Axis::linear(y),
        guide: None,
    };
    let profiles = snapshots
        .iter()
        .map(|s| {
            let stride = (s.field.values().len() / PLOT_POINTS).max(1);
            let grid = s.field.grid();
            let pts = s.field.values().iter().enumerate().step_by(stride).map(|(j, &v)| (grid.r(j), v)).collect();
            Curve::new(&format!("t = {}", s.t), pts)
        })
        .collect();
    let e = cfg.exponents();
    vec![
        ("profiles".into(), spec("Solution profiles", "r", "u(t, r)"), profiles),
        (
            "sobolev".into(),
            spec("Critical Sobolev norms", "t", "norm"),
            vec![
                series_curve(series, &format!("H^{:.4} of u", e.s_c), |r| r.sobolev_u),
                series_curve(series, &format!("H^{:.4} of u_t", e.s_c_minus_1), |r| r.sobolev_ut),
            ],
        ),
        (
            "besov".into(),
            spec("Critical Besov norms", "t", "norm"),
            vec![
                series_curve(series, "B of u", |r| r.besov_u),
                series_curve(series, "B of u_t", |r| r.besov_ut),
            ],
        ),
        (
            "decay".into(),
            spec("Scaled decay", "t", "scaled norm"),
            vec![
                series_curve(series, &format!("(1+t)^{:.3} L^{} norm", e.lp_decay_exponent, cfg.p() + 2.0), |r| r.scaled_lp2),
                series_curve(series, &format!("t^{:.3} sup norm", e.linf_decay_exponent), |r| r.scaled_linf),
            ],
        ),
        (
            "energy".into(),
            spec("Relative energy drift", "t", "|E(t) - E(0)| / E(0)"),
            vec![series_curve(series, "drift", |r| r.relative_drift)],
        ),
    ]
}

fn or_null<T: serde::Serialize>(r: supercrit::Result<T>) -> Value {
    r.ok().and_then(|v| serde_json::to_value(v).ok()).unwrap_or(Value::Null)
}

fn verdicts(series: &DiagnosticsSeries) -> Value {
    let t_end = series.rows.last().map_or(0.0, |r| r.t);
    let window = ((t_end - 5.0).max(0.0), t_end);
    let spectral: Vec<_> = series.rows.iter().filter(|r| r.sobolev_u.is_finite()).collect();
    let besov_le_sobolev = !spectral.is_empty()
        && spectral.iter().all(|r| r.besov_u <= r.sobolev_u && r.besov_ut <= r.sobolev_ut);
    let ratio_change = match (spectral.first(), spectral.last()) {
        (Some(a), Some(b)) if a.besov_ratio > 0.0 => json!(b.besov_ratio / a.besov_ratio),
        _ => Value::Null,
    };
    let agreement = spectral
        .last()
        .map(|r| json!((r.sobolev_u - r.sobolev_ut).abs() / r.sobolev_u))
        .unwrap_or(Value::Null);
    json!({
        "energy_drift": or_null(series.energy_drift()),
        "boundedness": if spectral.is_empty() { Value::Null } else { or_null(boundedness_verdict(series, window)) },
        "scaled_lp2_fluctuation": or_null(window_fluctuation(series, window, MIN_WINDOW_SAMPLES, |r| r.scaled_lp2)),
        "scaled_linf_fluctuation": or_null(window_fluctuation(series, window, MIN_WINDOW_SAMPLES, |r| r.scaled_linf)),
        "sobolev_agreement_at_end": agreement,
        "besov_le_sobolev": besov_le_sobolev,
        "besov_ratio_change": ratio_change,
    })
}

struct Outputs<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Outputs<'_> {
    fn put(&mut self, rel: &str, bytes: &[u8]) -> supercrit::Result<()> {
        write_atomic(&self.dir.join(rel), bytes)?;
        self.files.push(PathBuf::from(rel));
        Ok(())
    }
}

fn write_all(
    dir: &Path,
    cfg: &SimulationConfig,
    mode: FirstStepMode,
    series: &DiagnosticsSeries,
    snapshots: &[Snapshot],
    tail: &[TailWarning],
    failure: Option<&Error>,
    started: Instant,
) -> supercrit::Result<()> {
    std::fs::create_dir_all(dir.join("snapshots"))?;
    std::fs::create_dir_all(dir.join("plots"))?;
    let mut out = Outputs { dir, files: Vec::new() };
    out.put("series.csv", series_to_csv(series).as_bytes())?;
    for s in snapshots {
        let rel = write_snapshot(dir, s)?;
        out.files.push(rel);
    }
    for (name, spec, curves) in plots(series, snapshots, cfg) {
        if let Ok(svg) = emit_svg(&spec, &curves) {
            out.put(&format!("plots/{name}.svg"), svg.as_bytes())?;
        }
    }
    let manifest = json!({
        "config": serde_json::to_value(cfg.raw()).map_err(|e| Error::Parse(e.to_string()))?,
        "first_step": mode.as_str(),
        "version": env!("CARGO_PKG_VERSION"),
        "status": if failure.is_some() { "blowup" } else { "ok" },
        "error": failure.map(|e| e.to_string()),
        "wall_time_s": started.elapsed().as_secs_f64(),
        "warnings": cfg.warnings(),
        "tail_warnings": tail,
        "files": out.files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "verdicts": verdicts(series),
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Parse(e.to_string()))?;
    write_atomic(&dir.join("manifest.json"), text.as_bytes())
}

pub fn cmd_run(args: &RunArgs) -> u8 {
    let started = Instant::now();
    let cfg = match build_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let case = match case_for_config(&cfg) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    let mut opts = DiagnosticsOptions::full(&cfg);
    opts.first_step = args.first_step.into();
    let (series, snapshots, tail, failure) = match simulate(&cfg, &case, &opts) {
        Ok(sim) => (sim.series, sim.snapshots, sim.tail_warnings, None),
        Err(f) => (f.series, f.snapshots, f.tail_warnings, Some(f.error)),
    };
    for w in &tail {
        eprintln!("warning: spectral tail {:.2e} at t = {}", w.fraction, w.t);
    }
    if let Err(e) = write_all(&args.out, &cfg, opts.first_step, &series, &snapshots, &tail, failure.as_ref(), started) {
        eprintln!("error: writing outputs: {e}");
        return EXIT_FAILURE;
    }
    match failure {
        None => {
            println!("wrote {} samples to {}", series.rows.len(), args.out.display());
            0
        }
        Some(e @ Error::Blowup { .. }) => {
            eprintln!("error: {e}");
            EXIT_BLOWUP
        }
        Some(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
