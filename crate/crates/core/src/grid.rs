//! Uniform radial grid, sampled fields and the three-level solver state.

use std::io::Write;

use crate::error::{Error, Result};

/// Samples smaller than this at `r_max` are taken to be the Dirichlet zero.
pub const BOUNDARY_EPS: f64 = 1e-14;

/// Nodes `r_j = j * dr` for `j = 0..=n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialGrid {
    dr: f64,
    n: usize,
}

impl RadialGrid {
    pub fn new(dr: f64, n_intervals: usize) -> Self {
        assert!(dr > 0.0 && n_intervals >= 1, "degenerate grid");
        RadialGrid { dr, n: n_intervals }
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    /// Number of intervals `N`.
    pub fn n_intervals(&self) -> usize {
        self.n
    }

    pub fn n_points(&self) -> usize {
        self.n + 1
    }

    #[inline]
    pub fn r(&self, j: usize) -> f64 {
        j as f64 * self.dr
    }

    pub fn r_max(&self) -> f64 {
        self.r(self.n)
    }

    pub fn coordinates(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(|j| self.r(j))
    }

    /// Index of the node nearest to `r`, if `r` lies on the grid's span.
    pub fn nearest_index(&self, r: f64) -> Option<usize> {
        if !(r >= 0.0) || r > self.r_max() * (1.0 + 1e-12) {
            return None;
        }
        Some(((r / self.dr).round() as usize).min(self.n))
    }
}

/// Real radial function sampled on a [`RadialGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct RadialField {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl RadialField {
    pub fn zeros(grid: RadialGrid) -> Self {
        RadialField { grid, values: vec![0.0; grid.n_points()] }
    }

    pub fn from_values(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::GridMismatch);
        }
        Ok(RadialField { grid, values })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn value_at(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn same_grid(&self, other: &RadialField) -> bool {
        self.grid == other.grid
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RadialField {
        RadialField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Writes `r,u` rows, every `stride`-th node plus the last one.
    pub fn write_csv<W: Write>(&self, mut out: W, stride: usize) -> Result<()> {
        let stride = stride.max(1);
        writeln!(out, "r,u")?;
        let last = self.grid.n;
        for j in (0..=last).step_by(stride).chain((last % stride != 0).then_some(last)) {
            writeln!(out, "{:.16e},{:.16e}", self.grid.r(j), self.values[j])?;
        }
        Ok(())
    }
}

/// Samples `f` at every node. The value at `r_max` must already be zero to
/// within [`BOUNDARY_EPS`]; it is then stored as exactly zero.
pub fn sample(f: impl Fn(f64) -> f64, grid: RadialGrid) -> Result<RadialField> {
    let mut values = Vec::with_capacity(grid.n_points());
    for j in 0..=grid.n {
        let r = grid.r(j);
        let v = f(r);
        if !v.is_finite() {
            return Err(Error::NonFinite { r });
        }
        values.push(v);
    }
    let edge = values[grid.n];
    if edge.abs() >= BOUNDARY_EPS {
        return Err(Error::BoundaryValue { r_max: grid.r_max(), value: edge });
    }
    values[grid.n] = 0.0;
    Ok(RadialField { grid, values })
}

/// `max_j |f_j|`.
pub fn linf_of_field(f: &RadialField) -> f64 {
    f.values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Three consecutive time levels of the explicit scheme.
///
/// `curr` holds level `n`. `prev` holds `n - 1`. `next` holds `n + 1` once
/// it has been computed (`has_next()`); only then is the triplet complete.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub(crate) prev: RadialField,
    pub(crate) curr: RadialField,
    pub(crate) next: RadialField,
    pub(crate) n: usize,
    pub(crate) has_next: bool,
    pub(crate) dt: f64,
}

impl SolverState {
    /// State positioned at level `n` with `prev = U^{n-1}` and `curr = U^n`.
    pub fn new(prev: RadialField, curr: RadialField, n: usize, dt: f64) -> Result<Self> {
        if !prev.same_grid(&curr) {
            return Err(Error::GridMismatch);
        }
        let next = RadialField::zeros(curr.grid);
        Ok(SolverState { prev, curr, next, n, has_next: false, dt })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.curr.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t(&self) -> f64 {
        self.n as f64 * self.dt
    }

    pub fn u_prev(&self) -> &RadialField {
        &self.prev
    }

    pub fn u_curr(&self) -> &RadialField {
        &self.curr
    }

    pub fn u_next(&self) -> Option<&RadialField> {
        self.has_next.then_some(&self.next)
    }

    pub fn has_next(&self) -> bool {
        self.has_next
    }

    /// Central difference `(U^{n+1} - U^{n-1}) / (2 dt)`.
    pub fn velocity(&self) -> Result<RadialField> {
        let next = self.u_next().ok_or(Error::IncompleteState(self.n))?;
        let inv = 1.0 / (2.0 * self.dt);
        let values =
            next.values.iter().zip(&self.prev.values).map(|(a, b)| (a - b) * inv).collect();
        Ok(RadialField { grid: self.curr.grid, values })
    }

    /// The same levels with the arrow of time reversed: the new `prev` is
    /// `U^{n+1}`, so the next step reproduces `U^{n-1}`.
    pub fn reversed(&self) -> Result<SolverState> {
        let next = self.u_next().ok_or(Error::IncompleteState(self.n))?.clone();
        SolverState::new(next, self.curr.clone(), 0, self.dt)
    }
}
