use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("time step {dt} exceeds the stability limit {limit} (d = {d}, dr = {dr})")]
    Stability { d: u32, dr: f64, dt: f64, limit: f64 },

    #[error("r_max / dr = {ratio} is not a positive integer")]
    NonIntegerMesh { ratio: f64 },

    #[error("non-finite sample at r = {r}")]
    NonFinite { r: f64 },

    #[error("function does not vanish at r_max: |f({r_max})| = {value:e}")]
    BoundaryValue { r_max: f64, value: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("solution blew up at t = {t} (step {step})")]
    Blowup { t: f64, step: usize },

    #[error("unsupported dimension d = {0}")]
    UnsupportedDimension(u32),

    #[error("under-resolved quadrature: k_max * h = {kh} exceeds pi/4")]
    UnderResolved { kh: f64 },

    #[error("spectral tail at k_max holds {fraction:e} of the total (limit 1e-6)")]
    SpectralTail { fraction: f64 },

    #[error("state at n = {0} has no completed neighbour levels")]
    IncompleteState(usize),

    #[error("unknown case: {0}")]
    UnknownCase(String),

    #[error("expression error at offset {pos}: {msg}")]
    Expression { pos: usize, msg: String },

    #[error("{0}")]
    Study(String),

    #[error("empty data: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
