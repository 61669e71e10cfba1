//! Radial Fourier transform and the homogeneous Sobolev, Besov and Lebesgue
//! norms built on it.
//!
//! For radial `f` on `R^d` the unitary Fourier transform reduces to
//!
//! ```text
//! f^(k) = k^{-(d-2)/2} ∫_0^∞ J_{(d-2)/2}(k r) f(r) r^{d/2} dr
//! ```
//!
//! and for odd `d` the Bessel kernel is elementary:
//!
//! ```text
//! d = 3:  f^(k) = sqrt(2/pi) k^{-1} ∫ sin(kr) f(r) r dr
//! d = 5:  f^(k) = sqrt(2/pi) k^{-3} ∫ [sin(kr) - kr cos(kr)] f(r) r dr
//! ```
//!
//! The radial integral is a trapezoidal sum over the (possibly strided)
//! solver grid. Wavenumbers are geometric; norms integrate in `log k`.
//! Littlewood–Paley pieces are sharp dyadic annuli `[N, 2N)`, so the band
//! masses add up to the full mass and every Besov value is bounded by the
//! Sobolev value computed from the same samples.
//!
//! All norms here include the sphere area `omega_{d-1}`.

use std::f64::consts::{FRAC_PI_4, LN_2, PI};

use rayon::prelude::*;
use serde::Serialize;
use wide::f64x4;

use crate::config::{CriticalExponents, SimulationConfig};
use crate::error::{Error, Result};
use crate::grid::{linf_of_field, RadialField, RadialGrid, SolverState};

/// Largest tolerated share of the Sobolev integral attributed to the end of
/// the wavenumber span.
pub const TAIL_LIMIT: f64 = 1e-6;

/// Largest stride picked automatically.
pub const MAX_AUTO_STRIDE: usize = 8;

/// Surface area of the unit sphere in `R^d`, `2 pi^{d/2} / Gamma(d/2)`.
pub fn sphere_area(d: u32) -> f64 {
    // Gamma(d/2) by recurrence from Gamma(1) = 1 or Gamma(1/2) = sqrt(pi).
    let mut gamma = if d % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if d % 2 == 0 { 1.0 } else { 0.5 };
    while x < d as f64 / 2.0 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(d as f64 / 2.0) / gamma
}

/// Wavenumber nodes on `[k_min, k_max]`, split into dyadic bands
/// `[N, 2N]`. Each band is divided uniformly in `k` into at least
/// `per_octave` intervals, and more where needed to keep the spacing below
/// `max_spacing`.
///
/// For a field supported in `r <= R`, `|f^(k)|^2` oscillates in `k` with
/// periods down to `pi / R`; spacing below that is what lets the band
/// quadrature integrate it without aliasing. Interval counts are even so each
/// band can use Simpson's rule.
#[derive(Clone, Debug, PartialEq)]
pub struct WavenumberGrid {
    k_min: f64,
    per_octave: usize,
    max_spacing: f64,
    k: Vec<f64>,
    /// Node index of each band floor, plus the index of `k_max`.
    band_start: Vec<usize>,
}

impl WavenumberGrid {
    /// `k_min` and `k_max` must both be powers of two.
    pub fn new(k_min: f64, k_max: f64, per_octave: usize) -> Result<Self> {
        Self::with_max_spacing(k_min, k_max, per_octave, f64::INFINITY)
    }

    /// Grid resolving fields supported in `r <= r_max`: spacing at most
    /// `pi / (2 r_max)`.
    pub fn for_support(k_min: f64, k_max: f64, per_octave: usize, r_max: f64) -> Result<Self> {
        if !(r_max > 0.0) {
            return Err(Error::InvalidParameter(format!("support radius {r_max} must be positive")));
        }
        Self::with_max_spacing(k_min, k_max, per_octave, PI / (2.0 * r_max))
    }

    pub fn with_max_spacing(
        k_min: f64,
        k_max: f64,
        per_octave: usize,
        max_spacing: f64,
    ) -> Result<Self> {
        let is_pow2 = |x: f64| x > 0.0 && x.is_finite() && x.log2().fract() == 0.0;
        if !is_pow2(k_min) || !is_pow2(k_max) || k_max <= k_min {
            return Err(Error::InvalidParameter(format!(
                "wavenumber span [{k_min}, {k_max}] must be bounded by powers of two"
            )));
        }
        if per_octave == 0 || !(max_spacing > 0.0) {
            return Err(Error::InvalidParameter("wavenumber spacing must be positive".into()));
        }
        let octaves = (k_max / k_min).log2().round() as i32;
        let mut k = Vec::new();
        let mut band_start = Vec::new();
        for b in 0..octaves {
            let floor = k_min * 2f64.powi(b);
            let m = per_octave.max((floor / max_spacing).ceil() as usize);
            let m = m + m % 2;
            band_start.push(k.len());
            k.extend((0..m).map(|i| floor + floor * i as f64 / m as f64));
        }
        band_start.push(k.len());
        k.push(k_max);
        Ok(WavenumberGrid { k_min, per_octave, max_spacing, k, band_start })
    }

    pub fn values(&self) -> &[f64] {
        &self.k
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn k_min(&self) -> f64 {
        self.k_min
    }

    pub fn k_max(&self) -> f64 {
        *self.k.last().unwrap()
    }

    pub fn per_octave(&self) -> usize {
        self.per_octave
    }

    pub fn max_spacing(&self) -> f64 {
        self.max_spacing
    }

    pub fn n_bands(&self) -> usize {
        self.band_start.len() - 1
    }

    /// Lower edge `N` of band `b`.
    pub fn band_floor(&self, b: usize) -> f64 {
        self.k[self.band_start[b]]
    }

    /// Node indices `[lo, hi]` (inclusive) spanned by band `b`.
    fn band_nodes(&self, b: usize) -> (usize, usize) {
        (self.band_start[b], self.band_start[b + 1])
    }
}

impl Default for WavenumberGrid {
    fn default() -> Self {
        WavenumberGrid::new(2f64.powi(-6), 2f64.powi(7), 64).expect("valid default span")
    }
}

/// Upper end of the span chosen by [`SpectralOptions::for_grid`]; the
/// nonlinear interaction phase of the three-dimensional library cases puts
/// measurable mass up to about `k = 300`.
pub const MAX_AUTO_K: f64 = 512.0;

/// Wavenumber grid plus the radial quadrature stride.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralOptions {
    pub kgrid: WavenumberGrid,
    pub stride: usize,
}

impl SpectralOptions {
    /// Widest power-of-two span up to [`MAX_AUTO_K`] that the solver grid
    /// resolves (`k_max dr <= pi/4`), with spacing fine enough for the whole
    /// domain, then the largest stride (at most [`MAX_AUTO_STRIDE`]) that
    /// divides `N` and keeps `k_max h <= pi/4`.
    pub fn for_grid(grid: &RadialGrid) -> Self {
        let k_min = 2f64.powi(-6);
        let mut k_max = MAX_AUTO_K;
        while k_max > 2.0 * k_min && k_max * grid.dr() > FRAC_PI_4 {
            k_max /= 2.0;
        }
        let kgrid =
            WavenumberGrid::for_support(k_min, k_max, 64, grid.r_max()).expect("valid span");
        Self::with_kgrid(grid, kgrid)
    }

    /// Largest admissible stride for a given wavenumber grid.
    pub fn with_kgrid(grid: &RadialGrid, kgrid: WavenumberGrid) -> Self {
        let n = grid.n_intervals();
        let stride = (1..=MAX_AUTO_STRIDE)
            .rev()
            .find(|&s| n % s == 0 && kgrid.k_max() * s as f64 * grid.dr() <= FRAC_PI_4)
            .unwrap_or(1);
        SpectralOptions { kgrid, stride }
    }
}

/// Samples of the radial transform on a [`WavenumberGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub grid: WavenumberGrid,
    pub amplitudes: Vec<f64>,
    pub d: u32,
}

/// Norms of one field at a given order `s`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct NormBundle {
    pub s: f64,
    pub sobolev_s: f64,
    pub l2: f64,
    pub besov_s: f64,
    pub lp2: f64,
    pub linf: f64,
    /// See [`SpectralField::tail_fraction`].
    pub tail_fraction: f64,
}

fn check_dimension(d: u32) -> Result<()> {
    match d {
        3 | 5 => Ok(()),
        _ => Err(Error::UnsupportedDimension(d)),
    }
}

/// Weighted samples `w_j f(r_j) r_j` on the strided grid, trapezoid weights
/// included, together with the strided spacing.
fn quadrature_samples(f: &RadialField, stride: usize, k_max: f64) -> Result<(Vec<f64>, f64)> {
    let grid = f.grid();
    let n = grid.n_intervals();
    if stride == 0 || n % stride != 0 {
        return Err(Error::InvalidParameter(format!("stride {stride} does not divide N = {n}")));
    }
    let h = stride as f64 * grid.dr();
    if k_max * h > FRAC_PI_4 {
        return Err(Error::UnderResolved { kh: k_max * h });
    }
    let m = n / stride;
    let v = f.values();
    let g = (0..=m)
        .map(|j| {
            let w = if j == m { 0.5 } else { 1.0 };
            // r_0 = 0 contributes nothing.
            w * v[j * stride] * grid.r(j * stride) * h
        })
        .collect();
    Ok((g, h))
}

/// Series for `sin x - x cos x`, used for `x < 0.5` where the difference
/// cancels.
#[inline]
fn j32_series(x: f64) -> f64 {
    let x2 = x * x;
    x * x2
        * (1.0 / 3.0
            - x2 * (1.0 / 30.0
                - x2 * (1.0 / 840.0
                    - x2 * (1.0 / 45360.0
                        - x2 * (1.0 / 3_991_680.0
                            - x2 * (1.0 / 518_918_400.0 - x2 / 93_405_312_000.0))))))
}

/// Exact sin/cos is recomputed every this many radial nodes; in between the
/// pairs are advanced by a rotation.
const RESEED: usize = 256;

/// Wavenumbers processed together in one pass over the radial samples.
const LANES: usize = 8;

/// Sums `sum_j g_j K(j theta_i)` for up to [`LANES`] wavenumbers at once,
/// with `K = sin` for `d = 3` and `K = sin - x cos` for `d = 5`. Each lane
/// accumulates in node order, so results do not depend on the lane count.
fn kernel_sums(g: &[f64], h: f64, ks: &[f64], d: u32) -> [f64; LANES] {
    let mut theta = [0.0; LANES];
    for (t, &k) in theta.iter_mut().zip(ks) {
        *t = k * h;
    }
    let mut acc = [0.0; LANES];
    let m = g.len();
    // For d = 5 the nodes with x < 0.5 in any lane use the series.
    let j0 = if d == 3 {
        0
    } else {
        let t_min = theta[..ks.len()].iter().copied().fold(f64::INFINITY, f64::min);
        ((0.5 / t_min).ceil() as usize).min(m)
    };
    for (j, &gj) in g.iter().enumerate().take(j0) {
        for i in 0..ks.len() {
            let x = j as f64 * theta[i];
            let kernel = if x < 0.5 {
                j32_series(x)
            } else {
                let (s, c) = x.sin_cos();
                s - x * c
            };
            acc[i] += kernel * gj;
        }
    }
    let mut s1 = [0.0; LANES];
    let mut c1 = [1.0; LANES];
    for i in 0..LANES {
        (s1[i], c1[i]) = theta[i].sin_cos();
    }
    let mut j = j0;
    while j < m {
        let end = (j + RESEED).min(m);
        let mut s = [0.0; LANES];
        let mut c = [1.0; LANES];
        for i in 0..LANES {
            (s[i], c[i]) = (j as f64 * theta[i]).sin_cos();
        }
        if d == 3 {
            rotate_block::<false>(&g[j..end], j, &theta, &s1, &c1, &mut s, &mut c, &mut acc);
        } else {
            rotate_block::<true>(&g[j..end], j, &theta, &s1, &c1, &mut s, &mut c, &mut acc);
        }
        j = end;
    }
    acc
}

/// Rotation recurrence over one reseed block, two `f64x4` vectors wide.
#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn rotate_block<const D5: bool>(
    g: &[f64],
    j_start: usize,
    theta: &[f64; LANES],
    s1: &[f64; LANES],
    c1: &[f64; LANES],
    s: &mut [f64; LANES],
    c: &mut [f64; LANES],
    acc: &mut [f64; LANES],
) {
    let split = |a: &[f64; LANES]| {
        (f64x4::new([a[0], a[1], a[2], a[3]]), f64x4::new([a[4], a[5], a[6], a[7]]))
    };
    let (t_a, t_b) = split(theta);
    let (s1_a, s1_b) = split(s1);
    let (c1_a, c1_b) = split(c1);
    let (mut s_a, mut s_b) = split(s);
    let (mut c_a, mut c_b) = split(c);
    let (mut acc_a, mut acc_b) = split(acc);
    for (off, &gj) in g.iter().enumerate() {
        let gv = f64x4::splat(gj);
        let (k_a, k_b) = if D5 {
            let x = f64x4::splat((j_start + off) as f64);
            (s_a - x * t_a * c_a, s_b - x * t_b * c_b)
        } else {
            (s_a, s_b)
        };
        acc_a += k_a * gv;
        acc_b += k_b * gv;
        (s_a, c_a) = (s_a * c1_a + c_a * s1_a, c_a * c1_a - s_a * s1_a);
        (s_b, c_b) = (s_b * c1_b + c_b * s1_b, c_b * c1_b - s_b * s1_b);
    }
    let join = |out: &mut [f64; LANES], a: f64x4, b: f64x4| {
        out[..4].copy_from_slice(&a.to_array());
        out[4..].copy_from_slice(&b.to_array());
    };
    join(s, s_a, s_b);
    join(c, c_a, c_b);
    join(acc, acc_a, acc_b);
}

fn finish(acc: f64, k: f64, d: u32) -> f64 {
    let norm = (2.0 / PI).sqrt();
    if d == 3 {
        norm * acc / k
    } else {
        norm * acc / (k * k * k)
    }
}

fn transform_many(g: &[f64], h: f64, ks: &[f64], d: u32) -> Vec<f64> {
    let chunks: Vec<&[f64]> = ks.chunks(LANES).collect();
    chunks
        .par_iter()
        .flat_map_iter(|chunk| {
            let acc = kernel_sums(g, h, chunk, d);
            chunk.iter().zip(acc).map(move |(&k, a)| finish(a, k, d)).collect::<Vec<_>>()
        })
        .collect()
}

/// Transform of `f` at a single wavenumber.
pub fn transform_at(f: &RadialField, d: u32, k: f64, stride: usize) -> Result<f64> {
    check_dimension(d)?;
    let (g, h) = quadrature_samples(f, stride, k)?;
    Ok(transform_many(&g, h, &[k], d)[0])
}

/// Transform of `f` on every wavenumber of `kgrid`.
pub fn radial_fourier(
    f: &RadialField,
    d: u32,
    kgrid: &WavenumberGrid,
    stride: usize,
) -> Result<SpectralField> {
    check_dimension(d)?;
    let (g, h) = quadrature_samples(f, stride, kgrid.k_max())?;
    let amplitudes = transform_many(&g, h, kgrid.values(), d);
    Ok(SpectralField { grid: kgrid.clone(), amplitudes, d })
}

/// `J_{nu}(x)` for half-integer `nu = l + 1/2`, by upward recurrence from
/// the closed forms of `J_{-1/2}` and `J_{1/2}`.
pub fn bessel_j_half(l: u32, x: f64) -> f64 {
    let pref = (2.0 / (PI * x)).sqrt();
    let (s, c) = x.sin_cos();
    let mut lower = pref * c; // J_{-1/2}
    let mut upper = pref * s; // J_{1/2}
    for i in 0..l {
        let nu = i as f64 + 0.5;
        let next = 2.0 * nu / x * upper - lower;
        lower = upper;
        upper = next;
    }
    upper
}

/// The same transform evaluated directly from the Bessel form
/// `k^{-(d-2)/2} ∫ J_{(d-2)/2}(kr) f(r) r^{d/2} dr`, one `sin_cos` per node.
/// Slower; kept as an independent route for cross-checking.
pub fn radial_fourier_bessel(
    f: &RadialField,
    d: u32,
    kgrid: &WavenumberGrid,
    stride: usize,
) -> Result<SpectralField> {
    check_dimension(d)?;
    let (g, h) = quadrature_samples(f, stride, kgrid.k_max())?;
    let l = (d - 3) / 2;
    let half_d = d as f64 / 2.0;
    let amplitudes = kgrid
        .values()
        .iter()
        .map(|&k| {
            let sum: f64 = g
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, &gj)| {
                    let r = j as f64 * h;
                    // gj carries one factor of r; the Bessel form wants r^{d/2}.
                    bessel_j_half(l, k * r) * gj * r.powf(half_d - 1.0)
                })
                .sum();
            k.powf(-(half_d - 1.0)) * sum
        })
        .collect();
    Ok(SpectralField { grid: kgrid.clone(), amplitudes, d })
}

impl SpectralField {
    /// Per-band integrals `∫_band k^{2s} |f^|^2 k^{d-1} dk` (no sphere factor),
    /// Simpson's rule in `k`.
    pub fn band_integrals(&self, s: f64) -> Vec<f64> {
        let k = self.grid.values();
        let dim = self.d as i32;
        let weighted: Vec<f64> = k
            .iter()
            .zip(&self.amplitudes)
            .map(|(&k, &a)| k.powf(2.0 * s) * a * a * k.powi(dim - 1))
            .collect();
        (0..self.grid.n_bands())
            .map(|b| {
                let (lo, hi) = self.grid.band_nodes(b);
                let dk = (k[hi] - k[lo]) / (hi - lo) as f64;
                let odd: f64 = weighted[lo + 1..hi].iter().step_by(2).sum();
                let even: f64 = weighted[lo + 2..hi].iter().step_by(2).sum();
                dk / 3.0 * (weighted[lo] + 4.0 * odd + 2.0 * even + weighted[hi])
            })
            .collect()
    }

    /// `∫_0^{k_min} k^{2s} |f^|^2 k^{d-1} dk` with `f^` frozen at its value at
    /// `k_min`; the transform is even and smooth in `k`, so the error is
    /// `O(k_min^2)` relative to this already small piece.
    pub fn low_cap(&self, s: f64) -> f64 {
        let k = self.grid.k_min();
        let a = self.amplitudes[0];
        let e = 2.0 * s + self.d as f64;
        a * a * k.powf(e) / e
    }

    /// Full order-`s` integral: every band plus [`Self::low_cap`].
    pub fn total_integral(&self, s: f64) -> f64 {
        self.band_integrals(s).iter().sum::<f64>() + self.low_cap(s)
    }

    /// Share of the order-`s` integral implied by the integrand at `k_max`,
    /// estimated as one octave at the end-point value.
    pub fn tail_fraction(&self, s: f64) -> f64 {
        let total = self.total_integral(s);
        if total == 0.0 {
            return 0.0;
        }
        let k = self.grid.k_max();
        let a = *self.amplitudes.last().unwrap();
        k.powf(2.0 * s) * a * a * k.powi(self.d as i32) * LN_2 / total
    }

    fn check_tail(&self, s: f64) -> Result<()> {
        let fraction = self.tail_fraction(s);
        if fraction > TAIL_LIMIT {
            return Err(Error::SpectralTail { fraction });
        }
        Ok(())
    }

    /// Band masses `||P_N f||_{L^2}^2` including the sphere factor.
    pub fn band_masses(&self) -> Vec<f64> {
        let omega = sphere_area(self.d);
        self.band_integrals(0.0).into_iter().map(|m| omega * m).collect()
    }
}

/// `||f||_{H^s} = sqrt(omega ∫ k^{2s} |f^|^2 k^{d-1} dk)`.
pub fn sobolev_norm(field: &SpectralField, s: f64, d: u32) -> Result<f64> {
    check_order(field, s, d)?;
    field.check_tail(s)?;
    let total = field.total_integral(s);
    Ok((sphere_area(d) * total).sqrt())
}

/// `sup_N N^s ||P_N f||_{L^2}` over sharp dyadic bands.
pub fn besov_norm(field: &SpectralField, s: f64, d: u32) -> Result<f64> {
    check_order(field, s, d)?;
    field.check_tail(s)?;
    Ok(besov_unchecked(field, s))
}

fn besov_unchecked(field: &SpectralField, s: f64) -> f64 {
    let omega = sphere_area(field.d);
    field
        .band_integrals(0.0)
        .iter()
        .enumerate()
        .map(|(b, &m)| field.grid.band_floor(b).powf(s) * (omega * m).sqrt())
        .fold(0.0, f64::max)
}

fn check_order(field: &SpectralField, s: f64, d: u32) -> Result<()> {
    check_dimension(d)?;
    if field.d != d {
        return Err(Error::InvalidParameter(format!(
            "field was transformed in d = {}, not {d}",
            field.d
        )));
    }
    if !(s >= 0.0) {
        return Err(Error::InvalidParameter(format!("order s = {s} must be >= 0")));
    }
    Ok(())
}

/// `(||f||_{L^{p+2}}, ||f||_{L^inf})`, the first by the trapezoid rule on the
/// solver grid.
pub fn lebesgue_norms(f: &RadialField, d: u32, p: f64) -> Result<(f64, f64)> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must be positive")));
    }
    let grid = f.grid();
    let q = p + 2.0;
    let n = grid.n_intervals();
    let d1 = d as i32 - 1;
    let sum: f64 = f
        .values()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, &v)| {
            let w = if j == n { 0.5 } else { 1.0 };
            w * v.abs().powf(q) * grid.r(j).powi(d1)
        })
        .sum();
    let lp2 = (sphere_area(d) * sum * grid.dr()).powf(1.0 / q);
    Ok((lp2, linf_of_field(f)))
}

/// Norm bundle of one field at order `s`.
pub fn field_norms(
    f: &RadialField,
    d: u32,
    p: f64,
    s: f64,
    opts: &SpectralOptions,
) -> Result<NormBundle> {
    let spec = radial_fourier(f, d, &opts.kgrid, opts.stride)?;
    bundle(&spec, f, p, s, true)
}

fn bundle(spec: &SpectralField, f: &RadialField, p: f64, s: f64, strict: bool) -> Result<NormBundle> {
    let d = spec.d;
    let (lp2, linf) = lebesgue_norms(f, d, p)?;
    let tail_fraction = spec.tail_fraction(s);
    if strict {
        spec.check_tail(s)?;
    }
    check_order(spec, s, d)?;
    let omega = sphere_area(d);
    Ok(NormBundle {
        s,
        sobolev_s: (omega * spec.total_integral(s)).sqrt(),
        l2: (omega * spec.total_integral(0.0)).sqrt(),
        besov_s: besov_unchecked(spec, s),
        lp2,
        linf,
        tail_fraction,
    })
}

/// Bundles for `u` (order `s_c`) and `du/dt` (order `s_c - 1`), the latter
/// from the central difference of the triplet.
pub fn norms_of_state(
    state: &SolverState,
    cfg: &SimulationConfig,
    exps: &CriticalExponents,
    opts: &SpectralOptions,
) -> Result<(NormBundle, NormBundle)> {
    let (u, v) = norms_of_state_unchecked(state, cfg, exps, opts)?;
    let fraction = u.tail_fraction.max(v.tail_fraction);
    if fraction > TAIL_LIMIT {
        return Err(Error::SpectralTail { fraction });
    }
    Ok((u, v))
}

/// As [`norms_of_state`], but a truncated spectrum is only reported through
/// `tail_fraction`.
pub fn norms_of_state_unchecked(
    state: &SolverState,
    cfg: &SimulationConfig,
    exps: &CriticalExponents,
    opts: &SpectralOptions,
) -> Result<(NormBundle, NormBundle)> {
    let ut = state.velocity()?;
    let d = cfg.d();
    let (su, sv) = rayon::join(
        || radial_fourier(state.u_curr(), d, &opts.kgrid, opts.stride),
        || radial_fourier(&ut, d, &opts.kgrid, opts.stride),
    );
    let u = bundle(&su?, state.u_curr(), cfg.p(), exps.s_c, false)?;
    let v = bundle(&sv?, &ut, cfg.p(), exps.s_c_minus_1.max(0.0), false)?;
    Ok((u, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample;
    use approx::assert_relative_eq;

    fn grid(dr: f64) -> RadialGrid {
        RadialGrid::new(dr, (20.0 / dr).round() as usize)
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(5), 8.0 * PI * PI / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn bands_tile_span() {
        let kg = WavenumberGrid::default();
        assert_eq!(kg.n_bands(), 13);
        assert_eq!(kg.values().len(), 13 * 64 + 1);
        assert_eq!(kg.k_min(), 1.0 / 64.0);
        assert_eq!(kg.k_max(), 128.0);
        for b in 0..kg.n_bands() {
            assert_eq!(kg.band_floor(b), 2f64.powi(b as i32 - 6));
        }
        assert!(WavenumberGrid::new(0.1, 128.0, 8).is_err());
        assert!(WavenumberGrid::new(1.0, 1.0, 8).is_err());
    }

    #[test]
    fn gaussian_transform_at_two() {
        let f = sample(|r| (-r * r).exp(), grid(1e-3)).unwrap();
        let got = transform_at(&f, 3, 2.0, 1).unwrap();
        let want = 2f64.powf(-1.5) * (-1f64).exp();
        assert_relative_eq!(got, want, max_relative = 1e-9);
        assert_relative_eq!(got, 0.130066, max_relative = 1e-5);
    }

    #[test]
    fn gaussian_transform_d5_closed_form() {
        // In any dimension the unitary transform of exp(-r^2) is 2^{-d/2} exp(-k^2/4).
        let f = sample(|r| (-r * r).exp(), grid(1e-3)).unwrap();
        for k in [0.02, 0.3, 1.0, 4.0] {
            let got = transform_at(&f, 5, k, 1).unwrap();
            let want = 2f64.powf(-2.5) * (-k * k / 4.0).exp();
            assert_relative_eq!(got, want, max_relative = 1e-8);
        }
    }

    #[test]
    fn plancherel_gaussian() {
        let f = sample(|r| (-r * r).exp(), grid(4e-3)).unwrap();
        let opts = SpectralOptions::for_grid(f.grid());
        let spec = radial_fourier(&f, 3, &opts.kgrid, opts.stride).unwrap();
        let spectral = spec.total_integral(0.0);
        let oracle = (PI / 2.0).sqrt() / 8.0;
        assert_relative_eq!(oracle, 0.156664, max_relative = 1e-5);
        assert_relative_eq!(spectral, oracle, max_relative = 1e-6);
        assert!(spec.low_cap(0.0) > 0.0 && spec.low_cap(0.0) < 1e-5 * oracle);
    }

    #[test]
    fn zero_field() {
        let f = RadialField::zeros(grid(2e-3));
        let kg = WavenumberGrid::default();
        let spec = radial_fourier(&f, 3, &kg, 1).unwrap();
        assert!(spec.amplitudes.iter().all(|&a| a == 0.0));
        assert_eq!(sobolev_norm(&spec, 7.0 / 6.0, 3).unwrap(), 0.0);
        assert_eq!(besov_norm(&spec, 7.0 / 6.0, 3).unwrap(), 0.0);
        assert_eq!(lebesgue_norms(&f, 3, 6.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn rejects_unsupported_and_underresolved() {
        let f = RadialField::zeros(grid(2e-3));
        let kg = WavenumberGrid::default();
        assert!(matches!(radial_fourier(&f, 4, &kg, 1), Err(Error::UnsupportedDimension(4))));
        assert!(matches!(radial_fourier(&f, 3, &kg, 1), Ok(_)));
        assert!(matches!(radial_fourier(&f, 3, &kg, 1000), Err(Error::UnderResolved { .. })));
        assert!(matches!(radial_fourier(&f, 3, &kg, 3), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn auto_stride_choices() {
        let with_default = |dr| SpectralOptions::with_kgrid(&grid(dr), WavenumberGrid::default());
        assert_eq!(with_default(4e-4).stride, 8);
        assert_eq!(with_default(2e-3).stride, 2);
        assert_eq!(with_default(0.01).stride, 1);
        let auto = |dr| {
            let o = SpectralOptions::for_grid(&grid(dr));
            (o.kgrid.k_max(), o.stride)
        };
        assert_eq!(auto(4e-4), (512.0, 2));
        assert_eq!(auto(2e-3), (256.0, 1));
        assert_eq!(auto(0.01), (64.0, 1));
    }

    #[test]
    fn bessel_half_integer_orders() {
        for x in [0.3, 1.0, 7.5] {
            let j32 = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
            assert_relative_eq!(bessel_j_half(1, x), j32, max_relative = 1e-12);
        }
    }

    #[test]
    fn small_argument_kernel_is_continuous() {
        for x in [0.499_999_999, 0.5] {
            let (s, c) = f64::sin_cos(x);
            assert_relative_eq!(j32_series(x), s - x * c, max_relative = 1e-12);
        }
    }
}
