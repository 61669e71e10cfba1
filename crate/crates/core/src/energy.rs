//! Discrete energy and its drift.
//!
//! ```text
//! E^n = dr/2 * sum_{j=1}^{N} [ ((U_j^{n+1} - U_j^{n-1}) / (2 dt))^2
//!                            + ((U_{j+1}^n - U_{j-1}^n) / (2 dr))^2
//!                            + 2 mu / (p + 2) |U_j^n|^{p+2} ] r_j^{d-1},   U_{N+1} := 0
//! ```
//!
//! This is the radial integral only: the surface area of the unit sphere is
//! not included, unlike the norms in [`crate::spectral`].

use serde::{Deserialize, Serialize};

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::grid::SolverState;
use crate::solver::Power;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub energy: f64,
    pub relative_drift: f64,
}

/// Energy of the complete triplet around level `n >= 1`.
pub fn discrete_energy(state: &SolverState, cfg: &SimulationConfig) -> Result<f64> {
    let next = match state.u_next() {
        Some(next) if state.n() >= 1 => next.values(),
        _ => return Err(Error::IncompleteState(state.n())),
    };
    if *state.grid() != cfg.grid() {
        return Err(Error::GridMismatch);
    }
    let prev = state.u_prev().values();
    let curr = state.u_curr().values();
    let grid = state.grid();
    let n = grid.n_intervals();
    let d1 = cfg.d() as i32 - 1;
    let p = cfg.p();
    let power = Power::new(p);
    let pot = 2.0 * cfg.mu() / (p + 2.0);
    let inv_2dt = 1.0 / (2.0 * state.dt());
    let inv_2dr = 1.0 / (2.0 * grid.dr());

    let mut sum = 0.0;
    for j in 1..=n {
        let right = if j < n { curr[j + 1] } else { 0.0 };
        let ut = (next[j] - prev[j]) * inv_2dt;
        let ur = (right - curr[j - 1]) * inv_2dr;
        let u = curr[j];
        let density = ut * ut + ur * ur + pot * power.abs_pow(u) * u * u;
        sum += density * grid.r(j).powi(d1);
    }
    Ok(0.5 * grid.dr() * sum)
}

/// Appends records with drift measured against the first energy pushed.
#[derive(Clone, Debug, Default)]
pub struct EnergyTracker {
    records: Vec<EnergyRecord>,
}

impl EnergyTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, energy: f64) -> EnergyRecord {
        let e0 = self.records.first().map_or(energy, |r| r.energy);
        let relative_drift = if e0 != 0.0 { (energy - e0).abs() / e0.abs() } else { 0.0 };
        let rec = EnergyRecord { t, energy, relative_drift };
        self.records.push(rec);
        rec
    }

    pub fn records(&self) -> &[EnergyRecord] {
        &self.records
    }

    pub fn initial(&self) -> Option<f64> {
        self.records.first().map(|r| r.energy)
    }
}

/// `max_t |E(t) - E(0)| / |E(0)|` over the series.
pub fn energy_drift(series: &[EnergyRecord]) -> Result<f64> {
    let first = series.first().ok_or(Error::Empty("energy series"))?;
    if first.energy == 0.0 {
        return Err(Error::InvalidParameter("initial energy is zero".into()));
    }
    let e0 = first.energy;
    Ok(series.iter().fold(0.0, |m, r| m.max((r.energy - e0).abs() / e0.abs())))
}
