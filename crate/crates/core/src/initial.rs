//! Initial data: the five library families and the incoming-velocity map.
//!
//! | case | `u0`                      | `u1`                         |
//! |------|---------------------------|------------------------------|
//! | 1    | `4 exp(-r^2)`             | 0                            |
//! | 2    | `10 r^2 exp(-r^2)`        | 0                            |
//! | 3    | `10 r^2 exp(-r^2)`        | incoming                     |
//! | 4    | `5 exp(-r^2) sin(3r)`     | 0                            |
//! | 5    | `5 exp(-r^2) sin(3r)`     | incoming                     |
//!
//! "Incoming" means `u1 = u0' + (d - 2) u0 / r`. The same amplitudes are
//! used in every dimension.

use std::fmt;
use std::sync::Arc;

use crate::config::{CaseId, SimulationConfig};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::grid::{sample, RadialField, RadialGrid};

/// A real function of the radius, shareable across threads.
#[derive(Clone)]
pub struct RadialFn(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl RadialFn {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RadialFn(Arc::new(f))
    }

    pub fn zero() -> Self {
        RadialFn::new(|_| 0.0)
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        (self.0)(r)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let f = self.clone();
        RadialFn::new(move |r| c * f.eval(r))
    }

    pub fn sample(&self, grid: RadialGrid) -> Result<RadialField> {
        sample(|r| self.eval(r), grid)
    }
}

impl fmt::Debug for RadialFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RadialFn(..)")
    }
}

/// Initial position and velocity of one run.
#[derive(Clone, Debug)]
pub struct CaseSpec {
    pub case_id: CaseId,
    pub u0: RadialFn,
    pub u1: RadialFn,
}

impl CaseSpec {
    /// Data with both components multiplied by -1.
    pub fn negated(&self) -> CaseSpec {
        CaseSpec { case_id: self.case_id, u0: self.u0.scaled(-1.0), u1: self.u1.scaled(-1.0) }
    }

    pub fn sample(&self, grid: RadialGrid) -> Result<(RadialField, RadialField)> {
        Ok((self.u0.sample(grid)?, self.u1.sample(grid)?))
    }
}

/// `u1 = u0' + (d - 2) u0 / r`, with the value at `r = 0` set to the limit
/// `(d - 1) u0'(0)`.
///
/// `u0` must vanish at the origin whenever `d > 2`, otherwise `u1` is
/// singular there.
pub fn incoming_velocity(u0: &RadialFn, du0: &RadialFn, d: u32) -> Result<RadialFn> {
    let at_origin = u0.eval(0.0);
    if d > 2 && at_origin != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "incoming data needs u0(0) = 0 in d = {d}, got {at_origin}"
        )));
    }
    let k = d as f64 - 2.0;
    let limit = (d as f64 - 1.0) * du0.eval(0.0);
    let (u0, du0) = (u0.clone(), du0.clone());
    Ok(RadialFn::new(move |r| if r == 0.0 { limit } else { du0.eval(r) + k / r * u0.eval(r) }))
}

fn gaussian() -> (RadialFn, RadialFn) {
    (
        RadialFn::new(|r| 4.0 * (-r * r).exp()),
        RadialFn::new(|r| -8.0 * r * (-r * r).exp()),
    )
}

fn ring() -> (RadialFn, RadialFn) {
    (
        RadialFn::new(|r| 10.0 * r * r * (-r * r).exp()),
        RadialFn::new(|r| (20.0 * r - 20.0 * r * r * r) * (-r * r).exp()),
    )
}

fn osc_gaussian() -> (RadialFn, RadialFn) {
    (
        RadialFn::new(|r| 5.0 * (-r * r).exp() * (3.0 * r).sin()),
        RadialFn::new(|r| {
            5.0 * (-r * r).exp() * (3.0 * (3.0 * r).cos() - 2.0 * r * (3.0 * r).sin())
        }),
    )
}

/// Closed-form position and its radial derivative for a library case.
pub fn library_profile(case_id: CaseId) -> Result<(RadialFn, RadialFn)> {
    match case_id {
        CaseId::Gaussian => Ok(gaussian()),
        CaseId::Ring | CaseId::IncomingRing => Ok(ring()),
        CaseId::OscGaussian | CaseId::IncomingOscGaussian => Ok(osc_gaussian()),
        CaseId::Custom => Err(Error::UnknownCase("custom data is not in the library".into())),
    }
}

pub fn make_case(case_id: CaseId, d: u32) -> Result<CaseSpec> {
    if d != 3 && d != 5 {
        return Err(Error::UnsupportedDimension(d));
    }
    let (u0, du0) = library_profile(case_id)?;
    let u1 = if case_id.is_incoming() { incoming_velocity(&u0, &du0, d)? } else { RadialFn::zero() };
    Ok(CaseSpec { case_id, u0, u1 })
}

/// Data from expression strings; a missing `u1` means zero velocity.
pub fn custom_case(u0: &str, u1: Option<&str>) -> Result<CaseSpec> {
    let e0 = Expression::parse(u0)?;
    let u1 = match u1 {
        Some(src) => {
            let e1 = Expression::parse(src)?;
            RadialFn::new(move |r| e1.eval(r))
        }
        None => RadialFn::zero(),
    };
    Ok(CaseSpec { case_id: CaseId::Custom, u0: RadialFn::new(move |r| e0.eval(r)), u1 })
}

/// The data a validated configuration asks for.
pub fn case_for_config(cfg: &SimulationConfig) -> Result<CaseSpec> {
    match cfg.case_id() {
        CaseId::Custom => {
            let raw = cfg.raw();
            let u0 = raw.u0.as_deref().ok_or_else(|| Error::UnknownCase("custom without u0".into()))?;
            custom_case(u0, raw.u1.as_deref())
        }
        id => make_case(id, cfg.d()),
    }
}
