//! Time series of the scattering diagnostics and the verification studies
//! (mesh convergence, domain truncation, boundedness).

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{CriticalExponents, RawConfig, SimulationConfig};
use crate::energy::{discrete_energy, energy_drift, EnergyRecord, EnergyTracker};
use crate::error::{Error, Result};
use crate::grid::{linf_of_field, SolverState};
use crate::initial::CaseSpec;
use crate::solver::{run, FirstStepMode, Observer, Snapshot};
use crate::spectral::{lebesgue_norms, norms_of_state_unchecked, SpectralOptions, TAIL_LIMIT};

/// Column order of the series CSV.
pub const COLUMNS: [&str; 12] = [
    "t",
    "sobolev_u",
    "sobolev_ut",
    "besov_u",
    "besov_ut",
    "lp2",
    "linf",
    "energy",
    "relative_drift",
    "scaled_lp2",
    "scaled_linf",
    "besov_ratio",
];

/// One sample of every tracked quantity. Spectral columns are NaN when the
/// run was configured without spectral diagnostics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub sobolev_u: f64,
    pub sobolev_ut: f64,
    pub besov_u: f64,
    pub besov_ut: f64,
    pub lp2: f64,
    pub linf: f64,
    pub energy: f64,
    pub relative_drift: f64,
    pub scaled_lp2: f64,
    pub scaled_linf: f64,
    pub besov_ratio: f64,
}

impl DiagnosticsRow {
    pub fn to_array(&self) -> [f64; 12] {
        [
            self.t,
            self.sobolev_u,
            self.sobolev_ut,
            self.besov_u,
            self.besov_ut,
            self.lp2,
            self.linf,
            self.energy,
            self.relative_drift,
            self.scaled_lp2,
            self.scaled_linf,
            self.besov_ratio,
        ]
    }

    pub fn from_array(a: [f64; 12]) -> Self {
        DiagnosticsRow {
            t: a[0],
            sobolev_u: a[1],
            sobolev_ut: a[2],
            besov_u: a[3],
            besov_ut: a[4],
            lp2: a[5],
            linf: a[6],
            energy: a[7],
            relative_drift: a[8],
            scaled_lp2: a[9],
            scaled_linf: a[10],
            besov_ratio: a[11],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticsSeries {
    pub rows: Vec<DiagnosticsRow>,
}

impl DiagnosticsSeries {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn energy_records(&self) -> Vec<EnergyRecord> {
        self.rows
            .iter()
            .map(|r| EnergyRecord { t: r.t, energy: r.energy, relative_drift: r.relative_drift })
            .collect()
    }

    pub fn energy_drift(&self) -> Result<f64> {
        energy_drift(&self.energy_records())
    }

    /// Row whose time is closest to `t`.
    pub fn nearest(&self, t: f64) -> Option<&DiagnosticsRow> {
        self.rows.iter().min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    pub fn window(&self, t_a: f64, t_b: f64) -> impl Iterator<Item = &DiagnosticsRow> {
        let eps = 1e-9 * t_b.abs().max(1.0);
        self.rows.iter().filter(move |r| r.t >= t_a - eps && r.t <= t_b + eps)
    }
}

/// `((1+t)^{(d-1)p/(2(p+2))} ||u||_{L^{p+2}}, t^{(d-1)/2} ||u||_{L^inf})`.
pub fn scaled_decay(t: f64, lp2: f64, linf: f64, exps: &CriticalExponents) -> (f64, f64) {
    ((1.0 + t).powf(exps.lp_decay_exponent) * lp2, t.powf(exps.linf_decay_exponent) * linf)
}

/// `sqrt(B_u^2 + B_ut^2) / sqrt(H_u^2 + H_ut^2)`.
pub fn besov_sobolev_ratio(row: &DiagnosticsRow) -> Result<f64> {
    let den = row.sobolev_u.hypot(row.sobolev_ut);
    if !(den > 0.0) {
        return Err(Error::InvalidParameter("Sobolev norms vanish".into()));
    }
    Ok(row.besov_u.hypot(row.besov_ut) / den)
}

#[derive(Clone, Debug)]
pub struct DiagnosticsOptions {
    pub first_step: FirstStepMode,
    /// `None` skips the transform-based columns.
    pub spectral: Option<SpectralOptions>,
}

impl DiagnosticsOptions {
    pub fn full(cfg: &SimulationConfig) -> Self {
        DiagnosticsOptions {
            first_step: FirstStepMode::default(),
            spectral: Some(SpectralOptions::for_grid(&cfg.grid())),
        }
    }

    pub fn energy_only() -> Self {
        DiagnosticsOptions { first_step: FirstStepMode::default(), spectral: None }
    }
}

/// A sample whose spectrum was still significant at `k_max`; its spectral
/// columns are kept but understate the true norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailWarning {
    pub t: f64,
    pub fraction: f64,
}

/// Observer that appends one [`DiagnosticsRow`] per sampled level.
pub struct DiagnosticsRecorder<'a> {
    cfg: &'a SimulationConfig,
    exps: CriticalExponents,
    spectral: Option<SpectralOptions>,
    energy: EnergyTracker,
    pub series: DiagnosticsSeries,
    pub tail_warnings: Vec<TailWarning>,
}

impl<'a> DiagnosticsRecorder<'a> {
    pub fn new(cfg: &'a SimulationConfig, spectral: Option<SpectralOptions>) -> Self {
        DiagnosticsRecorder {
            cfg,
            exps: cfg.exponents(),
            spectral,
            energy: EnergyTracker::new(),
            series: DiagnosticsSeries::default(),
            tail_warnings: Vec::new(),
        }
    }

    fn record(&mut self, state: &SolverState) -> Result<DiagnosticsRow> {
        let t = state.t();
        let energy = discrete_energy(state, self.cfg)?;
        let rec = self.energy.push(t, energy);
        let mut row = DiagnosticsRow {
            t,
            energy,
            relative_drift: rec.relative_drift,
            sobolev_u: f64::NAN,
            sobolev_ut: f64::NAN,
            besov_u: f64::NAN,
            besov_ut: f64::NAN,
            besov_ratio: f64::NAN,
            ..Default::default()
        };
        match &self.spectral {
            Some(opts) => {
                let (u, ut) = norms_of_state_unchecked(state, self.cfg, &self.exps, opts)?;
                let fraction = u.tail_fraction.max(ut.tail_fraction);
                if fraction > TAIL_LIMIT {
                    self.tail_warnings.push(TailWarning { t, fraction });
                }
                row.sobolev_u = u.sobolev_s;
                row.sobolev_ut = ut.sobolev_s;
                row.besov_u = u.besov_s;
                row.besov_ut = ut.besov_s;
                row.lp2 = u.lp2;
                row.linf = u.linf;
                row.besov_ratio = besov_sobolev_ratio(&row).unwrap_or(f64::NAN);
            }
            None => {
                let (lp2, linf) = lebesgue_norms(state.u_curr(), self.cfg.d(), self.cfg.p())?;
                row.lp2 = lp2;
                row.linf = linf;
            }
        }
        (row.scaled_lp2, row.scaled_linf) = scaled_decay(t, row.lp2, row.linf, &self.exps);
        Ok(row)
    }
}

impl Observer for DiagnosticsRecorder<'_> {
    fn observe(&mut self, state: &SolverState) -> Result<()> {
        let row = self.record(state)?;
        self.series.rows.push(row);
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Simulation {
    pub series: DiagnosticsSeries,
    pub snapshots: Vec<Snapshot>,
    pub final_state: SolverState,
    pub tail_warnings: Vec<TailWarning>,
}

/// A run that ended early, with everything recorded up to that point.
#[derive(Debug)]
pub struct SimulationFailure {
    pub error: Error,
    pub series: DiagnosticsSeries,
    pub snapshots: Vec<Snapshot>,
    pub tail_warnings: Vec<TailWarning>,
}

impl From<SimulationFailure> for Error {
    fn from(f: SimulationFailure) -> Self {
        f.error
    }
}

/// Runs `case` under `cfg`, recording diagnostics every `diag_interval`.
pub fn simulate(
    cfg: &SimulationConfig,
    case: &CaseSpec,
    opts: &DiagnosticsOptions,
) -> std::result::Result<Simulation, SimulationFailure> {
    let mut rec = DiagnosticsRecorder::new(cfg, opts.spectral.clone());
    let out = run(cfg, case, opts.first_step, &mut [&mut rec]);
    match out {
        Ok(out) => Ok(Simulation {
            series: rec.series,
            snapshots: out.snapshots,
            final_state: out.final_state,
            tail_warnings: rec.tail_warnings,
        }),
        Err(f) => Err(SimulationFailure {
            error: f.error,
            series: rec.series,
            snapshots: f.snapshots,
            tail_warnings: rec.tail_warnings,
        }),
    }
}

// ---------------------------------------------------------------------------
// Mesh convergence

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceLevel {
    pub dr: f64,
    pub dt: f64,
    pub l2_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<ConvergenceLevel>,
    /// Least-squares slope of `log(error)` against `log(dr)`.
    pub order: f64,
    pub reference_dr: f64,
    pub reference_dt: f64,
    pub t_eval: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_order(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// `sqrt(dr * sum_j e_j^2)`: the discrete `L^2(0, R_max)` norm of the
/// pointwise difference.
pub fn l2_grid_norm(diff: &[f64], dr: f64) -> f64 {
    (dr * diff.iter().map(|e| e * e).sum::<f64>()).sqrt()
}

fn config_at(base: &RawConfig, dr: f64, dt: f64, t_final: f64) -> Result<SimulationConfig> {
    let mut raw = base.clone();
    raw.dr = dr;
    raw.dt = dt;
    raw.t_final = t_final;
    raw.snapshot_times = vec![t_final];
    raw.diag_interval = t_final;
    raw.validate()
}

/// Field at `t` on the given mesh.
pub fn solution_at(
    base: &RawConfig,
    case: &CaseSpec,
    dr: f64,
    dt: f64,
    t: f64,
    mode: FirstStepMode,
) -> Result<crate::grid::RadialField> {
    let cfg = config_at(base, dr, dt, t)?;
    let steps = t / dt;
    if (steps - steps.round()).abs() > 1e-6 {
        return Err(Error::Study(format!("t = {t} is not a multiple of dt = {dt}")));
    }
    let out = run(&cfg, case, mode, &mut [])?;
    Ok(out.snapshots.into_iter().last().expect("snapshot at t_final").field)
}

/// Largest step not exceeding `dr / 4` that lands exactly on `t`.
pub fn coupled_time_step(dr: f64, t: f64) -> f64 {
    let steps = (4.0 * t / dr * (1.0 - 1e-12)).ceil().max(1.0);
    t / steps
}

/// Compares each level against a fine-mesh run of the same scheme at
/// `t_eval`, sampling the reference at the coarse nodes. Level time steps
/// follow [`coupled_time_step`]; the reference step is used as given.
pub fn convergence_study(
    base: &RawConfig,
    case: &CaseSpec,
    t_eval: f64,
    levels: &[f64],
    reference: (f64, f64),
    mode: FirstStepMode,
) -> Result<ConvergenceReport> {
    if levels.is_empty() {
        return Err(Error::Empty("convergence levels"));
    }
    if !(t_eval > 0.0) || t_eval > base.t_final {
        return Err(Error::Study(format!("t_eval = {t_eval} outside (0, {}]", base.t_final)));
    }
    let (dr_ref, dt_ref) = reference;
    for &dr in levels {
        let ratio = dr / dr_ref;
        if ratio < 1.0 - 1e-12 || (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(Error::Study(format!(
                "reference dr = {dr_ref} is not an integer refinement of level dr = {dr}"
            )));
        }
    }
    let fine = solution_at(base, case, dr_ref, dt_ref, t_eval, mode)?;
    let mut out: Vec<ConvergenceLevel> = levels
        .par_iter()
        .map(|&dr| {
            let dt = coupled_time_step(dr, t_eval);
            let coarse = solution_at(base, case, dr, dt, t_eval, mode)?;
            let ratio = (dr / dr_ref).round() as usize;
            let diff: Vec<f64> = coarse
                .values()
                .iter()
                .enumerate()
                .map(|(j, &u)| u - fine.value_at(j * ratio))
                .collect();
            Ok(ConvergenceLevel { dr, dt, l2_error: l2_grid_norm(&diff, dr) })
        })
        .collect::<Result<_>>()?;
    out.sort_by(|a, b| b.dr.total_cmp(&a.dr));
    let pts: Vec<(f64, f64)> = out.iter().map(|l| (l.dr, l.l2_error)).collect();
    let order = if pts.len() >= 2 && pts.iter().all(|p| p.1 > 0.0) { fit_order(&pts) } else { f64::NAN };
    Ok(ConvergenceReport {
        levels: out,
        order,
        reference_dr: dr_ref,
        reference_dt: dt_ref,
        t_eval,
    })
}

// ---------------------------------------------------------------------------
// Domain truncation

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationRow {
    pub t: f64,
    pub r_max: f64,
    /// `u(t, r)` at each probe radius, in the order given.
    pub probes: Vec<f64>,
    pub linf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationTable {
    pub probe_radii: Vec<f64>,
    pub rows: Vec<TruncationRow>,
    /// Largest disagreement between domains at equal `(t, probe)`.
    pub max_mismatch: f64,
    /// Largest `|u|` at the outermost probe.
    pub boundary_max: f64,
    pub clean: bool,
}

pub const TRUNCATION_AGREEMENT: f64 = 1e-6;
pub const TRUNCATION_BOUNDARY: f64 = 1e-8;

/// Repeats the run on several domain radii and compares probe values.
/// The largest probe radius is the near-boundary probe.
pub fn truncation_study(
    base: &RawConfig,
    case: &CaseSpec,
    rmax_list: &[f64],
    probe_times: &[f64],
    probe_radii: &[f64],
    mode: FirstStepMode,
) -> Result<TruncationTable> {
    if rmax_list.is_empty() || probe_times.is_empty() || probe_radii.is_empty() {
        return Err(Error::Empty("truncation study inputs"));
    }
    let r_probe_max = probe_radii.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if probe_radii.iter().any(|&r| r < 0.0) || rmax_list.iter().any(|&r| r < r_probe_max) {
        return Err(Error::Study("probe radius outside a domain".into()));
    }
    let t_final = probe_times.iter().copied().fold(0.0, f64::max);

    let mut rows: Vec<TruncationRow> = rmax_list
        .par_iter()
        .map(|&r_max| {
            let mut raw = base.clone();
            raw.r_max = r_max;
            raw.t_final = t_final;
            raw.snapshot_times = probe_times.to_vec();
            raw.diag_interval = t_final;
            let cfg = raw.validate()?;
            let out = run(&cfg, case, mode, &mut [])?;
            let grid = cfg.grid();
            out.snapshots
                .iter()
                .map(|s| {
                    let probes = probe_radii
                        .iter()
                        .map(|&r| {
                            grid.nearest_index(r)
                                .map(|j| s.field.value_at(j))
                                .ok_or_else(|| Error::Study(format!("probe {r} off grid")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok(TruncationRow { t: s.t, r_max, probes, linf: linf_of_field(&s.field) })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.r_max.total_cmp(&b.r_max)));

    let outer = probe_radii.iter().position(|&r| r == r_probe_max).unwrap();
    let mut max_mismatch: f64 = 0.0;
    for &t in probe_times {
        let same_t: Vec<&TruncationRow> = rows.iter().filter(|r| r.t == t).collect();
        for pair in same_t.windows(2) {
            for (a, b) in pair[0].probes.iter().zip(&pair[1].probes) {
                max_mismatch = max_mismatch.max((a - b).abs());
            }
            max_mismatch = max_mismatch.max((pair[0].linf - pair[1].linf).abs());
        }
    }
    let boundary_max = rows.iter().fold(0.0f64, |m, r| m.max(r.probes[outer].abs()));
    let clean = max_mismatch <= TRUNCATION_AGREEMENT && boundary_max <= TRUNCATION_BOUNDARY;
    Ok(TruncationTable { probe_radii: probe_radii.to_vec(), rows, max_mismatch, boundary_max, clean })
}

// ---------------------------------------------------------------------------
// Boundedness

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fluctuation {
    pub mean: f64,
    pub max_deviation: f64,
    /// `max_deviation / |mean|`.
    pub relative: f64,
}

/// Mean and spread of a column over `[t_a, t_b]`; needs at least
/// `min_samples` samples.
pub fn window_fluctuation(
    series: &DiagnosticsSeries,
    window: (f64, f64),
    min_samples: usize,
    column: impl Fn(&DiagnosticsRow) -> f64,
) -> Result<Fluctuation> {
    let values: Vec<f64> = series.window(window.0, window.1).map(column).collect();
    if values.is_empty() {
        return Err(Error::Empty("window"));
    }
    if values.len() < min_samples {
        return Err(Error::Study(format!(
            "window [{}, {}] holds {} samples, need {min_samples}",
            window.0,
            window.1,
            values.len()
        )));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let max_deviation = values.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    Ok(Fluctuation { mean, max_deviation, relative: max_deviation / mean.abs() })
}

pub const BOUNDED_FLUCTUATION: f64 = 0.05;
pub const MIN_WINDOW_SAMPLES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundednessReport {
    pub window: (f64, f64),
    pub sobolev_u: Fluctuation,
    pub sobolev_ut: Fluctuation,
    pub bounded: bool,
}

/// "bounded" when both critical Sobolev norms fluctuate by less than 5% of
/// their mean over the window.
pub fn boundedness_verdict(
    series: &DiagnosticsSeries,
    window: (f64, f64),
) -> Result<BoundednessReport> {
    let u = window_fluctuation(series, window, MIN_WINDOW_SAMPLES, |r| r.sobolev_u)?;
    let ut = window_fluctuation(series, window, MIN_WINDOW_SAMPLES, |r| r.sobolev_ut)?;
    let bounded = u.relative < BOUNDED_FLUCTUATION && ut.relative < BOUNDED_FLUCTUATION;
    Ok(BoundednessReport { window, sobolev_u: u, sobolev_ut: ut, bounded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{critical_exponent, CaseId};
    use crate::initial::make_case;

    fn synthetic(f: impl Fn(f64) -> f64) -> DiagnosticsSeries {
        DiagnosticsSeries {
            rows: (0..=300)
                .map(|k| {
                    let t = k as f64 * 0.05;
                    DiagnosticsRow { t, sobolev_u: f(t), sobolev_ut: f(t), ..Default::default() }
                })
                .collect(),
        }
    }

    #[test]
    fn scaled_exponents() {
        let e3 = critical_exponent(3, 6.0).unwrap();
        assert_eq!((e3.lp_decay_exponent, e3.linf_decay_exponent), (0.75, 1.0));
        let e5 = critical_exponent(5, 2.0).unwrap();
        assert_eq!((e5.lp_decay_exponent, e5.linf_decay_exponent), (1.0, 2.0));
        let (a, b) = scaled_decay(0.0, 2.0, 7.0, &e3);
        assert_eq!((a, b), (2.0, 0.0));
        let (a, b) = scaled_decay(3.0, 2.0, 7.0, &e5);
        assert_eq!((a, b), (8.0, 63.0));
    }

    #[test]
    fn ratio_of_pure_position_state() {
        let row = DiagnosticsRow { sobolev_u: 4.0, besov_u: 1.0, ..Default::default() };
        assert_eq!(besov_sobolev_ratio(&row).unwrap(), 0.25);
        assert!(besov_sobolev_ratio(&DiagnosticsRow::default()).is_err());
    }

    #[test]
    fn constant_series_has_no_fluctuation() {
        let rep = boundedness_verdict(&synthetic(|_| 3.0), (10.0, 15.0)).unwrap();
        assert_eq!(rep.sobolev_u.relative, 0.0);
        assert!(rep.bounded);
    }

    #[test]
    fn growing_series_is_unbounded() {
        let rep = boundedness_verdict(&synthetic(|t| 1.0 + t), (10.0, 15.0)).unwrap();
        assert!(!rep.bounded);
    }

    #[test]
    fn window_errors() {
        let s = synthetic(|_| 1.0);
        assert!(matches!(boundedness_verdict(&s, (20.0, 30.0)), Err(Error::Empty(_))));
        assert!(matches!(boundedness_verdict(&s, (14.5, 15.0)), Err(Error::Study(_))));
        assert_eq!(s.window(10.0, 15.0).count(), 101);
    }

    #[test]
    fn coupled_step_lands_on_t() {
        let dt = coupled_time_step(20.0 / 1024.0, 2.0);
        assert!(dt <= 20.0 / 1024.0 / 4.0);
        assert_eq!((2.0 / dt).round(), 410.0);
        assert_eq!(coupled_time_step(0.01, 2.0), 0.0025);
    }

    #[test]
    fn order_fit_recovers_power_law() {
        let pts: Vec<_> = [0.1, 0.05, 0.025].iter().map(|&h| (h, 3.0 * h * h)).collect();
        assert!((fit_order(&pts) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identical_level_and_reference_give_zero_error() {
        let base = RawConfig::desk(CaseId::Gaussian, 3);
        let case = make_case(CaseId::Gaussian, 3).unwrap();
        let rep = convergence_study(
            &base,
            &case,
            0.5,
            &[0.02],
            (0.02, 0.005),
            FirstStepMode::PaperFaithful,
        )
        .unwrap();
        assert_eq!(rep.levels[0].l2_error, 0.0);
    }

    #[test]
    fn convergence_rejects_bad_reference() {
        let base = RawConfig::desk(CaseId::Gaussian, 3);
        let case = make_case(CaseId::Gaussian, 3).unwrap();
        let mode = FirstStepMode::PaperFaithful;
        assert!(convergence_study(&base, &case, 0.5, &[0.02], (0.04, 0.01), mode).is_err());
        assert!(convergence_study(&base, &case, 99.0, &[0.02], (0.01, 0.0025), mode).is_err());
        assert!(convergence_study(&base, &case, 0.5, &[0.02], (0.03, 0.0075), mode).is_err());
    }

    #[test]
    fn truncation_probe_outside_domain() {
        let base = RawConfig::desk(CaseId::Gaussian, 3);
        let case = make_case(CaseId::Gaussian, 3).unwrap();
        let r = truncation_study(&base, &case, &[10.0], &[1.0], &[12.0], FirstStepMode::default());
        assert!(r.is_err());
    }
}
