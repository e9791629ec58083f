//! Finite-difference derivatives of real and complex maps.
//!
//! Everything here goes through one primitive: differentiate `t ↦ g(t)` at
//! `t = 0` with a central or forward quotient, optionally refined by a
//! Richardson tableau. Jacobians, directional derivatives and the
//! Cauchy-Riemann partials are all built on top of it.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Central,
    Forward,
}

impl Scheme {
    /// Leading truncation order and the order increment between Richardson levels.
    fn orders(self) -> (i32, i32) {
        match self {
            Scheme::Central => (2, 2),
            Scheme::Forward => (1, 1),
        }
    }
}

/// Step size, differencing scheme and Richardson depth.
///
/// With `step: None` the step is chosen from machine epsilon and the scale
/// of the evaluation point; for a plain central quotient that is
/// `eps^(1/3) · max(1, |a|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDiffConfig {
    pub step: Option<f64>,
    pub scheme: Scheme,
    pub richardson_levels: u8,
}

impl Default for FiniteDiffConfig {
    fn default() -> Self {
        Self {
            step: None,
            scheme: Scheme::Central,
            richardson_levels: 0,
        }
    }
}

impl FiniteDiffConfig {
    pub const MAX_RICHARDSON_LEVELS: u8 = 4;

    pub fn with_step(step: f64) -> Self {
        Self { step: Some(step), ..Self::default() }
    }

    pub fn richardson(levels: u8) -> Self {
        Self { richardson_levels: levels, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Domain(format!("finite-difference step must be positive, got {h}")));
            }
        }
        if self.richardson_levels > Self::MAX_RICHARDSON_LEVELS {
            return Err(Error::Domain(format!(
                "richardson_levels must be at most {}, got {}",
                Self::MAX_RICHARDSON_LEVELS,
                self.richardson_levels
            )));
        }
        Ok(())
    }

    /// Step used at a point of magnitude `scale`.
    pub fn step_for(&self, scale: f64) -> f64 {
        if let Some(h) = self.step {
            return h;
        }
        let (order, inc) = self.scheme.orders();
        let effective = order + inc * i32::from(self.richardson_levels);
        f64::EPSILON.powf(1.0 / f64::from(effective + 1)) * scale.max(1.0)
    }
}

/// Differentiates `g` at zero with step `h`. `g` returns a vector of reals.
pub(crate) fn derivative_at_zero<G>(mut g: G, h: f64, cfg: &FiniteDiffConfig) -> Result<Vec<f64>>
where
    G: FnMut(f64) -> Result<Vec<f64>>,
{
    let levels = usize::from(cfg.richardson_levels);
    let base = match cfg.scheme {
        Scheme::Forward => Some(g(0.0)?),
        Scheme::Central => None,
    };
    let mut row: Vec<Vec<f64>> = Vec::with_capacity(levels + 1);
    let mut step = h;
    for _ in 0..=levels {
        let quotient = match (&base, cfg.scheme) {
            (Some(f0), Scheme::Forward) => {
                let fp = g(step)?;
                fp.iter().zip(f0).map(|(p, z)| (p - z) / step).collect()
            }
            _ => {
                let fp = g(step)?;
                let fm = g(-step)?;
                fp.iter().zip(&fm).map(|(p, m)| (p - m) / (2.0 * step)).collect()
            }
        };
        row.push(quotient);
        step *= 0.5;
    }
    let (order, inc) = cfg.scheme.orders();
    for level in 1..=levels {
        let factor = 2f64.powi(order + inc * (level as i32 - 1)) - 1.0;
        row = row
            .windows(2)
            .map(|w| w[1].iter().zip(&w[0]).map(|(fine, coarse)| fine + (fine - coarse) / factor).collect())
            .collect();
    }
    Ok(row.swap_remove(0))
}

type RealFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A map `R^n → R^m` supplied by the caller.
#[derive(Clone)]
pub struct RealMap {
    arity_in: usize,
    arity_out: usize,
    eval: Arc<RealFn>,
}

impl fmt::Debug for RealMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealMap")
            .field("arity_in", &self.arity_in)
            .field("arity_out", &self.arity_out)
            .finish_non_exhaustive()
    }
}

impl RealMap {
    pub fn new<F>(arity_in: usize, arity_out: usize, eval: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if arity_in == 0 || arity_out == 0 {
            return Err(Error::Domain("map arities must be positive".into()));
        }
        Ok(Self { arity_in, arity_out, eval: Arc::new(eval) })
    }

    pub fn arity_in(&self) -> usize {
        self.arity_in
    }

    pub fn arity_out(&self) -> usize {
        self.arity_out
    }

    pub fn call(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.arity_in {
            return Err(Error::DimensionMismatch { expected: self.arity_in, got: x.len() });
        }
        let y = (self.eval)(x);
        if y.len() != self.arity_out {
            return Err(Error::DimensionMismatch { expected: self.arity_out, got: y.len() });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { point: x.to_vec() });
        }
        Ok(y)
    }
}

/// The `m × n` matrix of partials; entry `(i, j)` is `∂f_i/∂x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianMatrix {
    pub entries: DMatrix<f64>,
}

impl JacobianMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.nrows())
            .map(|i| (0..self.ncols()).map(|j| self.entries[(i, j)] * v[j]).sum())
            .collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn jacobian(f: &RealMap, a: &[f64], cfg: &FiniteDiffConfig) -> Result<JacobianMatrix> {
    cfg.validate()?;
    if a.len() != f.arity_in {
        return Err(Error::DimensionMismatch { expected: f.arity_in, got: a.len() });
    }
    let h = cfg.step_for(norm(a));
    let mut entries = DMatrix::zeros(f.arity_out, f.arity_in);
    let mut x = a.to_vec();
    for j in 0..f.arity_in {
        let column = derivative_at_zero(
            |t| {
                x[j] = a[j] + t;
                let y = f.call(&x);
                x[j] = a[j];
                y
            },
            h,
            cfg,
        )?;
        entries.set_column(j, &nalgebra::DVector::from_vec(column));
    }
    Ok(JacobianMatrix { entries })
}

pub fn directional_derivative(f: &RealMap, a: &[f64], v: &[f64], cfg: &FiniteDiffConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if a.len() != f.arity_in {
        return Err(Error::DimensionMismatch { expected: f.arity_in, got: a.len() });
    }
    if v.len() != f.arity_in {
        return Err(Error::DimensionMismatch { expected: f.arity_in, got: v.len() });
    }
    let speed = norm(v);
    if speed == 0.0 || !speed.is_finite() {
        return Err(Error::Domain("direction vector must be non-zero".into()));
    }
    let h = cfg.step_for(norm(a)) / speed;
    let mut x = vec![0.0; a.len()];
    derivative_at_zero(
        |t| {
            for ((xi, ai), vi) in x.iter_mut().zip(a).zip(v) {
                *xi = ai + t * vi;
            }
            f.call(&x)
        },
        h,
        cfg,
    )
}

/// An open disc `|z - center| < radius`; an infinite radius is the whole plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: Complex64,
    pub radius: f64,
}

impl Disc {
    pub fn plane() -> Self {
        Self { center: Complex64::new(0.0, 0.0), radius: f64::INFINITY }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.is_finite() && (z - self.center).norm() < self.radius
    }
}

type ComplexFn = dyn Fn(Complex64) -> Complex64 + Send + Sync;

/// A complex map `f = u + iv` on a disc, optionally with a known derivative.
#[derive(Clone)]
pub struct ComplexMap {
    name: String,
    eval: Arc<ComplexFn>,
    derivative: Option<Arc<ComplexFn>>,
    domain: Disc,
}

impl fmt::Debug for ComplexMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComplexMap")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl ComplexMap {
    pub fn new<F>(name: impl Into<String>, domain: Disc, eval: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self { name: name.into(), eval: Arc::new(eval), derivative: None, domain }
    }

    pub fn with_derivative<D>(mut self, derivative: D) -> Self
    where
        D: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn identity() -> Self {
        Self::new("identity", Disc::plane(), |z| z).with_derivative(|_| Complex64::new(1.0, 0.0))
    }

    pub fn square() -> Self {
        Self::new("square", Disc::plane(), |z| z * z).with_derivative(|z| 2.0 * z)
    }

    pub fn power(k: i32) -> Self {
        Self::new(format!("power{k}"), Disc::plane(), move |z| z.powi(k))
            .with_derivative(move |z| f64::from(k) * z.powi(k - 1))
    }

    pub fn exp() -> Self {
        Self::new("exp", Disc::plane(), |z| z.exp()).with_derivative(|z| z.exp())
    }

    /// `1/z`; evaluating at the pole yields a non-finite error.
    pub fn reciprocal() -> Self {
        Self::new("reciprocal", Disc::plane(), |z| z.inv()).with_derivative(|z| -(z * z).inv())
    }

    pub fn conjugate() -> Self {
        Self::new("conjugate", Disc::plane(), |z| z.conj())
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new("constant", Disc::plane(), move |_| c).with_derivative(|_| Complex64::new(0.0, 0.0))
    }

    /// Looks up one of the built-in maps by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "identity" => Some(Self::identity()),
            "square" => Some(Self::square()),
            "exp" => Some(Self::exp()),
            "reciprocal" => Some(Self::reciprocal()),
            "conjugate" => Some(Self::conjugate()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Disc {
        self.domain
    }

    pub fn with_domain(mut self, domain: Disc) -> Self {
        self.domain = domain;
        self
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn call(&self, z: Complex64) -> Result<Complex64> {
        if !self.domain.contains(z) {
            return Err(Error::Domain(format!("{z} is outside the domain of `{}`", self.name)));
        }
        let w = (self.eval)(z);
        if !w.is_finite() {
            return Err(Error::NonFinite { point: vec![z.re, z.im] });
        }
        Ok(w)
    }

    /// The caller-supplied derivative, when one exists.
    pub fn analytic_derivative(&self, z: Complex64) -> Option<Result<Complex64>> {
        self.derivative.as_ref().map(|d| {
            let w = d(z);
            if w.is_finite() {
                Ok(w)
            } else {
                Err(Error::NonFinite { point: vec![z.re, z.im] })
            }
        })
    }
}

/// The four partials of `u` and `v` at a point plus the two residuals
/// `r1 = u_x - v_y` and `r2 = v_x + u_y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyRiemann {
    pub u_x: f64,
    pub u_y: f64,
    pub v_x: f64,
    pub v_y: f64,
    pub r1: f64,
    pub r2: f64,
}

impl CauchyRiemann {
    pub fn residual(&self) -> f64 {
        self.r1.hypot(self.r2)
    }
}

pub fn cauchy_riemann_residual(f: &ComplexMap, z: Complex64, cfg: &FiniteDiffConfig) -> Result<CauchyRiemann> {
    cfg.validate()?;
    if !f.domain.contains(z) {
        return Err(Error::Domain(format!("{z} is not interior to the domain of `{}`", f.name)));
    }
    let h = cfg.step_for(z.norm());
    f.call(z)?;
    if (z - f.domain.center).norm() + h >= f.domain.radius {
        return Err(Error::Domain(format!("difference stencil at {z} leaves the domain of `{}`", f.name)));
    }
    let along = |dir: Complex64| {
        derivative_at_zero(
            |t| {
                let w = f.call(z + dir * t)?;
                Ok(vec![w.re, w.im])
            },
            h,
            cfg,
        )
    };
    let dx = along(Complex64::new(1.0, 0.0))?;
    let dy = along(Complex64::new(0.0, 1.0))?;
    let (u_x, v_x, u_y, v_y) = (dx[0], dx[1], dy[0], dy[1]);
    Ok(CauchyRiemann { u_x, u_y, v_x, v_y, r1: u_x - v_y, r2: v_x + u_y })
}

/// Relative Cauchy-Riemann tolerance used to flag non-holomorphic points.
pub const DEFAULT_CR_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexDerivative {
    /// `u_x + i v_x`.
    pub value: Complex64,
    pub cauchy_riemann: CauchyRiemann,
    pub holomorphic: bool,
}

pub fn complex_derivative(f: &ComplexMap, z: Complex64, cfg: &FiniteDiffConfig) -> Result<ComplexDerivative> {
    complex_derivative_with_tol(f, z, cfg, DEFAULT_CR_TOL)
}

/// Like [`complex_derivative`] with an explicit tolerance, scaled by `max(1, |partials|)`.
pub fn complex_derivative_with_tol(
    f: &ComplexMap,
    z: Complex64,
    cfg: &FiniteDiffConfig,
    tol: f64,
) -> Result<ComplexDerivative> {
    let cr = cauchy_riemann_residual(f, z, cfg)?;
    let value = Complex64::new(cr.u_x, cr.v_x);
    let scale = value.norm().max(Complex64::new(cr.u_y, cr.v_y).norm()).max(1.0);
    Ok(ComplexDerivative { value, cauchy_riemann: cr, holomorphic: cr.residual() <= tol * scale })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolomorphyReport {
    pub holomorphic: bool,
    pub worst_point: Complex64,
    pub worst_residual: f64,
    pub samples: usize,
}

/// Certifies the Cauchy-Riemann equations on a finite sample set, never on a region.
pub fn is_holomorphic_on(f: &ComplexMap, samples: &[Complex64], tol: f64) -> Result<HolomorphyReport> {
    is_holomorphic_on_with(f, samples, tol, &FiniteDiffConfig::default())
}

pub fn is_holomorphic_on_with(
    f: &ComplexMap,
    samples: &[Complex64],
    tol: f64,
    cfg: &FiniteDiffConfig,
) -> Result<HolomorphyReport> {
    if samples.is_empty() {
        return Err(Error::Domain("holomorphy check needs at least one sample".into()));
    }
    let mut worst_point = samples[0];
    let mut worst_residual = f64::NEG_INFINITY;
    for &z in samples {
        let r = cauchy_riemann_residual(f, z, cfg)?.residual();
        if r > worst_residual {
            worst_residual = r;
            worst_point = z;
        }
    }
    Ok(HolomorphyReport {
        holomorphic: worst_residual <= tol,
        worst_point,
        worst_residual,
        samples: samples.len(),
    })
}
