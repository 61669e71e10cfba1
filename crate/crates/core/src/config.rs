//! Run parameters, the stability bound of the explicit scheme, and the
//! critical exponents of the equation.
//!
//! A [`SimulationConfig`] can only be obtained through validation, so any
//! value of that type satisfies the time-step restriction and describes an
//! integer number of mesh intervals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;

pub const DEFAULT_MU: f64 = 1.0;
pub const DEFAULT_DIAG_INTERVAL: f64 = 0.05;

/// Relative slack when comparing `dt` against the stability limit and when
/// checking that `r_max / dr` is an integer.
const RATIO_TOL: f64 = 1e-9;

/// Identifies one of the initial-data families, or user-supplied expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    Gaussian,
    Ring,
    IncomingRing,
    OscGaussian,
    IncomingOscGaussian,
    Custom,
}

impl CaseId {
    pub const LIBRARY: [CaseId; 5] = [
        CaseId::Gaussian,
        CaseId::Ring,
        CaseId::IncomingRing,
        CaseId::OscGaussian,
        CaseId::IncomingOscGaussian,
    ];

    /// Library cases are numbered 1 through 5.
    pub fn from_number(n: u32) -> Option<Self> {
        match n {
            1..=5 => Some(Self::LIBRARY[n as usize - 1]),
            _ => None,
        }
    }

    pub fn number(self) -> Option<u32> {
        Self::LIBRARY
            .iter()
            .position(|&c| c == self)
            .map(|i| i as u32 + 1)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::Gaussian => "gaussian",
            CaseId::Ring => "ring",
            CaseId::IncomingRing => "incoming_ring",
            CaseId::OscGaussian => "osc_gaussian",
            CaseId::IncomingOscGaussian => "incoming_osc_gaussian",
            CaseId::Custom => "custom",
        }
    }

    pub fn is_incoming(self) -> bool {
        matches!(self, CaseId::IncomingRing | CaseId::IncomingOscGaussian)
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(n) = s.parse::<u32>() {
            return Self::from_number(n).ok_or_else(|| Error::UnknownCase(s.to_string()));
        }
        let all = Self::LIBRARY.iter().chain(std::iter::once(&CaseId::Custom));
        all.copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownCase(s.to_string()))
    }
}

/// Exponents derived from `(d, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalExponents {
    pub s_c: f64,
    pub s_c_minus_1: f64,
    /// Rate at which the `L^{p+2}` norm of a linear wave decays.
    pub lp_decay_exponent: f64,
    /// Rate at which the sup norm of a linear wave decays.
    pub linf_decay_exponent: f64,
}

/// Critical regularity `s_c = d/2 - 2/p` and the linear decay rates.
pub fn critical_exponent(d: u32, p: f64) -> Result<CriticalExponents> {
    if d < 1 {
        return Err(Error::InvalidParameter(format!("dimension d = {d} must be >= 1")));
    }
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("power p = {p} must be positive")));
    }
    let df = d as f64;
    let s_c = df / 2.0 - 2.0 / p;
    Ok(CriticalExponents {
        s_c,
        s_c_minus_1: s_c - 1.0,
        lp_decay_exponent: (df - 1.0) * p / (2.0 * (p + 2.0)),
        linf_decay_exponent: (df - 1.0) / 2.0,
    })
}

/// Largest admissible time step, `dr * sqrt(2^{d-1} / (1 + 3^{d-1}))`.
pub fn stability_limit(d: u32, dr: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("dimension d = {d} must be >= 2")));
    }
    if !(dr > 0.0) || !dr.is_finite() {
        return Err(Error::InvalidParameter(format!("mesh size dr = {dr} must be positive")));
    }
    let two = 2f64.powi(d as i32 - 1);
    let three = 3f64.powi(d as i32 - 1);
    Ok(dr * (two / (1.0 + three)).sqrt())
}

/// Nonlinearity power used for each dimension in the case library.
pub fn library_power(d: u32) -> Option<f64> {
    match d {
        3 => Some(6.0),
        5 => Some(2.0),
        _ => None,
    }
}

/// Unvalidated configuration document, exactly as it appears on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub d: u32,
    pub p: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    pub r_max: f64,
    pub dr: f64,
    pub dt: f64,
    pub t_final: f64,
    pub case_id: CaseId,
    #[serde(default = "default_diag_interval")]
    pub diag_interval: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Expression for `u0`; only meaningful with `case_id = "custom"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<String>,
    /// Expression for `u1`; only meaningful with `case_id = "custom"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u1: Option<String>,
}

fn default_mu() -> f64 {
    DEFAULT_MU
}

fn default_diag_interval() -> f64 {
    DEFAULT_DIAG_INTERVAL
}

impl RawConfig {
    /// Parameters of the published experiments: `R_max = 20`, `dr = 4e-4`,
    /// `dt = 1.25e-4`, horizon 15.
    pub fn paper(case_id: CaseId, d: u32) -> Self {
        Self::preset(case_id, d, 20.0, 4e-4, 1.25e-4, 15.0)
    }

    /// A coarser run (`dr = 2e-3`, `dt = 5e-4`) that finishes in seconds.
    pub fn desk(case_id: CaseId, d: u32) -> Self {
        Self::preset(case_id, d, 20.0, 2e-3, 5e-4, 15.0)
    }

    fn preset(case_id: CaseId, d: u32, r_max: f64, dr: f64, dt: f64, t_final: f64) -> Self {
        RawConfig {
            d,
            p: library_power(d).unwrap_or(f64::NAN),
            mu: DEFAULT_MU,
            r_max,
            dr,
            dt,
            t_final,
            case_id,
            diag_interval: DEFAULT_DIAG_INTERVAL,
            snapshot_times: vec![0.0, 1.0, 5.0, 10.0, 15.0],
            u0: None,
            u1: None,
        }
    }

    pub fn validate(self) -> Result<SimulationConfig> {
        SimulationConfig::try_from(self)
    }
}

/// Validated run parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    raw: RawConfig,
    n_intervals: usize,
}

impl TryFrom<RawConfig> for SimulationConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if raw.d < 3 {
            return bad(format!("dimension d = {} must be >= 3", raw.d));
        }
        if raw.case_id != CaseId::Custom && raw.d != 3 && raw.d != 5 {
            return bad(format!("case library requires d in {{3, 5}}, got {}", raw.d));
        }
        if raw.case_id == CaseId::Custom {
            if raw.u0.is_none() {
                return bad("custom case requires a u0 expression".into());
            }
        } else if raw.u0.is_some() || raw.u1.is_some() {
            return bad("u0/u1 expressions are only accepted with case_id = \"custom\"".into());
        }
        for (name, v) in [
            ("p", raw.p),
            ("r_max", raw.r_max),
            ("dr", raw.dr),
            ("dt", raw.dt),
            ("t_final", raw.t_final),
            ("diag_interval", raw.diag_interval),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} = {v} must be positive and finite"));
            }
        }
        if !raw.mu.is_finite() {
            return bad(format!("mu = {} must be finite", raw.mu));
        }

        let ratio = raw.r_max / raw.dr;
        let n = ratio.round();
        if n < 2.0 || (ratio - n).abs() > RATIO_TOL * ratio {
            return Err(Error::NonIntegerMesh { ratio });
        }

        let limit = stability_limit(raw.d, raw.dr)?;
        if raw.dt > limit * (1.0 + RATIO_TOL) {
            return Err(Error::Stability { d: raw.d, dr: raw.dr, dt: raw.dt, limit });
        }

        for &t in &raw.snapshot_times {
            if !(0.0..=raw.t_final).contains(&t) {
                return bad(format!("snapshot time {t} outside [0, {}]", raw.t_final));
            }
        }

        Ok(SimulationConfig { raw, n_intervals: n as usize })
    }
}

impl SimulationConfig {
    pub fn d(&self) -> u32 {
        self.raw.d
    }

    pub fn p(&self) -> f64 {
        self.raw.p
    }

    pub fn mu(&self) -> f64 {
        self.raw.mu
    }

    pub fn r_max(&self) -> f64 {
        self.raw.r_max
    }

    pub fn dr(&self) -> f64 {
        self.raw.dr
    }

    pub fn dt(&self) -> f64 {
        self.raw.dt
    }

    pub fn t_final(&self) -> f64 {
        self.raw.t_final
    }

    pub fn case_id(&self) -> CaseId {
        self.raw.case_id
    }

    pub fn diag_interval(&self) -> f64 {
        self.raw.diag_interval
    }

    pub fn snapshot_times(&self) -> &[f64] {
        &self.raw.snapshot_times
    }

    /// Number of mesh intervals `N`; the grid has `N + 1` nodes.
    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    pub fn grid(&self) -> RadialGrid {
        RadialGrid::new(self.raw.dr, self.n_intervals)
    }

    /// Number of time steps needed to reach `t_final`.
    pub fn n_steps(&self) -> usize {
        self.step_index(self.raw.t_final)
    }

    /// Nearest time index for `t`.
    pub fn step_index(&self, t: f64) -> usize {
        (t / self.raw.dt).round() as usize
    }

    pub fn exponents(&self) -> CriticalExponents {
        critical_exponent(self.raw.d, self.raw.p).expect("validated config")
    }

    pub fn raw(&self) -> &RawConfig {
        &self.raw
    }

    pub fn into_raw(self) -> RawConfig {
        self.raw
    }

    /// Non-fatal remarks about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.raw.mu < 0.0 {
            out.push(format!("mu = {} is focusing; finite-time blowup is possible", self.raw.mu));
        }
        if self.raw.mu == 0.0 {
            out.push("mu = 0: linear wave equation".to_string());
        }
        let s_c = self.exponents().s_c;
        if s_c <= 1.0 {
            out.push(format!("s_c = {s_c:.4} is not energy-supercritical"));
        }
        out
    }
}

/// Parses and validates a JSON configuration document.
pub fn load_config(text: &str) -> Result<SimulationConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    raw.validate()
}
