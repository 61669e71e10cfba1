//! Explicit three-level finite-difference integrator.
//!
//! Interior nodes `1 <= j <= N-1` use
//!
//! ```text
//! U_j^{n+1} = 2 U_j^n - U_j^{n-1}
//!           + dt^2 [ (eta_j^+)^{d-1} (U_{j+1}^n - U_j^n) + (eta_j^-)^{d-1} (U_{j-1}^n - U_j^n) ] / dr^2
//!           - dt^2 mu |U_j^n|^p U_j^n,          eta_j^± = (r_j ± dr/2) / r_j
//! ```
//!
//! The origin uses the ghost value `U_{-1} = U_1`, which turns the Laplacian
//! into `2d (U_1 - U_0) / dr^2`. The last node is held at zero.

use std::collections::BTreeMap;

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid, SolverState};
use crate::initial::CaseSpec;

/// Any sample above this magnitude is treated as blowup.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

/// How `U^1` is built from the initial data.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum FirstStepMode {
    /// `U^1 = U^0 + dt u1`.
    #[default]
    PaperFaithful,
    /// Adds the Taylor term `dt^2/2 (Lap U^0 - mu |U^0|^p U^0)`.
    SecondOrder,
}

impl FirstStepMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FirstStepMode::PaperFaithful => "paper",
            FirstStepMode::SecondOrder => "second-order",
        }
    }
}

/// `|x|^p x`, specialised for the small even integer powers used in practice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Power {
    Two,
    Four,
    Six,
    Int(i32),
    Real(f64),
}

impl Power {
    pub(crate) fn new(p: f64) -> Self {
        if p == 2.0 {
            Power::Two
        } else if p == 4.0 {
            Power::Four
        } else if p == 6.0 {
            Power::Six
        } else if p.fract() == 0.0 && p <= 64.0 {
            Power::Int(p as i32)
        } else {
            Power::Real(p)
        }
    }

    /// `|x|^p`.
    #[inline(always)]
    pub(crate) fn abs_pow(self, x: f64) -> f64 {
        match self {
            Power::Two => x * x,
            Power::Four => {
                let x2 = x * x;
                x2 * x2
            }
            Power::Six => {
                let x2 = x * x;
                x2 * x2 * x2
            }
            Power::Int(n) => x.abs().powi(n),
            Power::Real(p) => x.abs().powf(p),
        }
    }
}

/// Grid-dependent coefficients of the stencil, computed once per run.
#[derive(Clone, Debug)]
pub struct StencilCoefficients {
    /// `((r_j + dr/2) / r_j)^{d-1}`; entry 0 and N are unused.
    pub eta_plus: Vec<f64>,
    /// `((r_j - dr/2) / r_j)^{d-1}`; entry 0 and N are unused.
    pub eta_minus: Vec<f64>,
    /// `2d / dr^2`, the origin Laplacian weight.
    pub origin_factor: f64,
    grid: RadialGrid,
    dt: f64,
    mu: f64,
    power: Power,
    // eta * dt^2 / dr^2
    lam_plus: Vec<f64>,
    lam_minus: Vec<f64>,
    lam_origin: f64,
}

impl StencilCoefficients {
    pub fn new(cfg: &SimulationConfig) -> Self {
        let grid = cfg.grid();
        let d = cfg.d();
        let n = grid.n_intervals();
        let h = grid.dr();
        let mut eta_plus = vec![0.0; n + 1];
        let mut eta_minus = vec![0.0; n + 1];
        for j in 1..n {
            let r = grid.r(j);
            eta_plus[j] = ((r + h / 2.0) / r).powi(d as i32 - 1);
            eta_minus[j] = ((r - h / 2.0) / r).powi(d as i32 - 1);
        }
        let origin_factor = 2.0 * d as f64 / (h * h);
        let dt = cfg.dt();
        let ratio = dt * dt / (h * h);
        StencilCoefficients {
            lam_plus: eta_plus.iter().map(|e| e * ratio).collect(),
            lam_minus: eta_minus.iter().map(|e| e * ratio).collect(),
            lam_origin: origin_factor * dt * dt,
            eta_plus,
            eta_minus,
            origin_factor,
            grid,
            dt,
            mu: cfg.mu(),
            power: Power::new(cfg.p()),
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    /// Discrete radial Laplacian of `u` (zero at the last node).
    pub fn laplacian(&self, u: &RadialField) -> Vec<f64> {
        let v = u.values();
        let n = self.grid.n_intervals();
        let h2 = self.grid.dr() * self.grid.dr();
        let mut out = vec![0.0; n + 1];
        out[0] = self.origin_factor * (v[1] - v[0]);
        for j in 1..n {
            out[j] = (self.eta_plus[j] * (v[j + 1] - v[j]) + self.eta_minus[j] * (v[j - 1] - v[j]))
                / h2;
        }
        out
    }

    fn check(&self, state: &SolverState) -> Result<()> {
        if *state.grid() != self.grid || state.dt() != self.dt {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

/// Builds the state at `n = 1` from the sampled initial data.
pub fn first_step(
    u0: &RadialField,
    u1: &RadialField,
    cfg: &SimulationConfig,
    mode: FirstStepMode,
) -> Result<SolverState> {
    let coeffs = StencilCoefficients::new(cfg);
    first_step_with(u0, u1, &coeffs, mode)
}

pub(crate) fn first_step_with(
    u0: &RadialField,
    u1: &RadialField,
    coeffs: &StencilCoefficients,
    mode: FirstStepMode,
) -> Result<SolverState> {
    if *u0.grid() != coeffs.grid || *u1.grid() != coeffs.grid {
        return Err(Error::GridMismatch);
    }
    let n = coeffs.grid.n_intervals();
    if u0.value_at(n) != 0.0 {
        return Err(Error::BoundaryValue { r_max: coeffs.grid.r_max(), value: u0.value_at(n) });
    }
    let dt = coeffs.dt;
    let mut next: Vec<f64> =
        u0.values().iter().zip(u1.values()).map(|(a, b)| a + dt * b).collect();
    if mode == FirstStepMode::SecondOrder {
        let lap = coeffs.laplacian(u0);
        let half = 0.5 * dt * dt;
        for ((x, &l), &u) in next.iter_mut().zip(&lap).zip(u0.values()) {
            *x += half * (l - coeffs.mu * coeffs.power.abs_pow(u) * u);
        }
    }
    next[n] = 0.0;
    let u1_level = RadialField::from_values(coeffs.grid, next)?;
    SolverState::new(u0.clone(), u1_level, 1, dt)
}

/// Completes the triplet around the next level.
///
/// If `U^{n+1}` is already present the state first moves forward one level
/// (`n` is incremented); then the new `U^{n+1}` is computed.
pub fn step(state: &mut SolverState, coeffs: &StencilCoefficients) -> Result<()> {
    coeffs.check(state)?;
    if state.has_next {
        std::mem::swap(&mut state.prev, &mut state.curr);
        std::mem::swap(&mut state.curr, &mut state.next);
        state.n += 1;
        state.has_next = false;
    }
    let ok = match coeffs.power {
        Power::Two => sweep(state, coeffs, |x| x * x),
        Power::Four => sweep(state, coeffs, |x| {
            let x2 = x * x;
            x2 * x2
        }),
        Power::Six => sweep(state, coeffs, |x| {
            let x2 = x * x;
            x2 * x2 * x2
        }),
        p => sweep(state, coeffs, move |x| p.abs_pow(x)),
    };
    state.has_next = true;
    if !ok {
        let step = state.n + 1;
        return Err(Error::Blowup { t: step as f64 * state.dt, step });
    }
    Ok(())
}

/// Writes `U^{n+1}`; returns false on a non-finite or oversized value.
#[inline(always)]
fn sweep(state: &mut SolverState, c: &StencilCoefficients, abs_pow: impl Fn(f64) -> f64) -> bool {
    let prev = state.prev.values();
    let curr = state.curr.values();
    let next = state.next.values_mut();
    let n = next.len() - 1;
    let nl = c.dt * c.dt * c.mu;

    let u0 = curr[0];
    next[0] = 2.0 * u0 - prev[0] + c.lam_origin * (curr[1] - u0) - nl * abs_pow(u0) * u0;
    let mut ok = next[0].abs() <= BLOWUP_THRESHOLD;

    let interior = next[1..n]
        .iter_mut()
        .zip(curr.windows(3))
        .zip(&prev[1..n])
        .zip(c.lam_plus[1..n].iter().zip(&c.lam_minus[1..n]));
    for (((out, w), &old), (&lp, &lm)) in interior {
        let u = w[1];
        let v = 2.0 * u - old + (lp * (w[2] - u) + lm * (w[0] - u)) - nl * abs_pow(u) * u;
        *out = v;
        ok &= v.abs() <= BLOWUP_THRESHOLD;
    }
    next[n] = 0.0;
    ok
}

/// A captured copy of `U^n`.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub n: usize,
    pub field: RadialField,
}

/// Receives the complete triplet at each sampling level.
pub trait Observer {
    fn observe(&mut self, state: &SolverState) -> Result<()>;
}

impl<F: FnMut(&SolverState) -> Result<()>> Observer for F {
    fn observe(&mut self, state: &SolverState) -> Result<()> {
        self(state)
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub snapshots: Vec<Snapshot>,
    pub final_state: SolverState,
    /// Levels at which observers were invoked.
    pub sample_steps: Vec<usize>,
}

/// A run that stopped early; `partial` holds what was captured before.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub snapshots: Vec<Snapshot>,
}

impl From<RunFailure> for Error {
    fn from(f: RunFailure) -> Self {
        f.error
    }
}

/// Time levels at which observers fire: every multiple of the sampling
/// period up to `t_final`, with level 0 replaced by level 1 (the first level
/// with a centred time derivative).
pub fn sample_levels(cfg: &SimulationConfig) -> Vec<usize> {
    let n_final = cfg.n_steps().max(1);
    let k_max = (cfg.t_final() / cfg.diag_interval() + 1e-9).floor() as usize;
    let mut out: Vec<usize> = (0..=k_max)
        .map(|k| cfg.step_index(k as f64 * cfg.diag_interval()).clamp(1, n_final))
        .collect();
    out.dedup();
    out
}

/// Integrates from `t = 0` to `t_final`.
pub fn run(
    cfg: &SimulationConfig,
    case: &CaseSpec,
    mode: FirstStepMode,
    observers: &mut [&mut dyn Observer],
) -> std::result::Result<RunOutput, RunFailure> {
    let fail = |error: Error, snapshots: Vec<Snapshot>| RunFailure { error, snapshots };
    let grid = cfg.grid();
    let (u0, u1) = case.sample(grid).map_err(|e| fail(e, Vec::new()))?;
    let coeffs = StencilCoefficients::new(cfg);
    let mut state = first_step_with(&u0, &u1, &coeffs, mode).map_err(|e| fail(e, Vec::new()))?;

    let mut snap_at: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &t in cfg.snapshot_times() {
        snap_at.entry(cfg.step_index(t)).or_default().push(t);
    }
    let mut snapshots = Vec::new();
    if let Some(times) = snap_at.get(&0) {
        for &t in times {
            snapshots.push(Snapshot { t, n: 0, field: u0.clone() });
        }
    }

    let levels = sample_levels(cfg);
    let mut next_level = levels.iter().peekable();
    let n_final = cfg.n_steps().max(1);
    loop {
        if let Err(e) = step(&mut state, &coeffs) {
            return Err(fail(e, snapshots));
        }
        let n = state.n;
        if next_level.peek() == Some(&&n) {
            next_level.next();
            for obs in observers.iter_mut() {
                if let Err(e) = obs.observe(&state) {
                    return Err(fail(e, snapshots));
                }
            }
        }
        if let Some(times) = snap_at.get(&n) {
            for &t in times {
                snapshots.push(Snapshot { t, n, field: state.curr.clone() });
            }
        }
        if n >= n_final {
            break;
        }
    }
    Ok(RunOutput { snapshots, final_state: state, sample_steps: levels })
}

/// Runs without observers and returns the final state.
pub fn evolve_to(
    cfg: &SimulationConfig,
    case: &CaseSpec,
    mode: FirstStepMode,
) -> Result<SolverState> {
    Ok(run(cfg, case, mode, &mut [])?.final_state)
}
