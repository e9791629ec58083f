//! Arcs in the complex plane, their images under complex maps, and
//! parametric arc-length integrals.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc as Shared;

use num_complex::Complex64;

use crate::differential::{complex_derivative, ComplexMap, FiniteDiffConfig};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureConfig};

/// Moduli of `f'` below this are treated as critical points.
pub const CRITICAL_MODULUS: f64 = 1e-10;
/// Tangents shorter than this have no defined direction.
pub const SINGULAR_TANGENT: f64 = 1e-12;
/// Largest allowed gap between two arcs at their shared parameter.
pub const INTERSECTION_TOL: f64 = 1e-9;
/// Endpoint and grid tolerance for parametrizations.
pub const PARAM_TOL: f64 = 1e-9;

const VALIDATION_SAMPLES: usize = 256;
const DERIVATIVE_MATCH_TOL: f64 = 1e-5;
const COMMON_GRID: usize = 64;

type PathFn = dyn Fn(f64) -> Complex64 + Send + Sync;
type RealFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Maps any angle into `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// `a - b` taken modulo `2π`, in `(-π, π]`.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

/// A parametrized curve `z(t)`, `a <= t <= b`.
#[derive(Clone)]
pub struct Arc {
    kind: String,
    eval: Shared<PathFn>,
    deriv: Option<Shared<PathFn>>,
    a: f64,
    b: f64,
    /// Parameters where the derivative may jump (polyline corners).
    breaks: Vec<f64>,
}

impl fmt::Debug for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Arc")
            .field("kind", &self.kind)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("analytic_derivative", &self.deriv.is_some())
            .finish()
    }
}

impl Arc {
    /// A derivative-free arc; tangents come from central differences.
    pub fn new<F>(a: f64, b: f64, eval: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Domain(format!("arc needs finite a < b, got [{a}, {b}]")));
        }
        let arc = Self { kind: "custom".into(), eval: Shared::new(eval), deriv: None, a, b, breaks: Vec::new() };
        arc.validate()?;
        Ok(arc)
    }

    /// Attaches an analytic derivative, checked against finite differences.
    pub fn with_derivative<D>(mut self, deriv: D) -> Result<Self>
    where
        D: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        self.deriv = Some(Shared::new(deriv));
        self.validate()?;
        Ok(self)
    }

    pub fn from_fns<F, D>(a: f64, b: f64, eval: F, deriv: D) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
        D: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(a, b, eval)?.with_derivative(deriv)
    }

    /// `z0 + t (z1 - z0)` on `[0, 1]`.
    pub fn line(z0: Complex64, z1: Complex64) -> Result<Self> {
        check_finite(&[z0, z1])?;
        let d = z1 - z0;
        Ok(Self {
            kind: "line".into(),
            eval: Shared::new(move |t| z0 + d * t),
            deriv: Some(Shared::new(move |_| d)),
            a: 0.0,
            b: 1.0,
            breaks: Vec::new(),
        })
    }

    /// `c + r e^{it}` on `[t0, t1]`.
    pub fn circle(c: Complex64, r: f64, t0: f64, t1: f64) -> Result<Self> {
        check_finite(&[c])?;
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Domain(format!("circle radius must be positive, got {r}")));
        }
        if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
            return Err(Error::Domain(format!("circle needs finite t0 < t1, got [{t0}, {t1}]")));
        }
        Ok(Self {
            kind: "circle".into(),
            eval: Shared::new(move |t| c + r * Complex64::from_polar(1.0, t)),
            deriv: Some(Shared::new(move |t| Complex64::i() * r * Complex64::from_polar(1.0, t))),
            a: t0,
            b: t1,
            breaks: Vec::new(),
        })
    }

    /// Piecewise-linear through `points`, segment `k` traversed for `t ∈ [k, k+1]`.
    pub fn polyline(points: &[Complex64]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Domain("polyline needs at least two points".into()));
        }
        check_finite(points)?;
        let nseg = points.len() - 1;
        let pts: Shared<[Complex64]> = points.into();
        let seg = move |t: f64| (t.floor().max(0.0) as usize).min(nseg - 1);
        let p = pts.clone();
        let eval = move |t: f64| {
            let k = seg(t);
            p[k] + (p[k + 1] - p[k]) * (t - k as f64)
        };
        let deriv = move |t: f64| {
            let k = seg(t);
            pts[k + 1] - pts[k]
        };
        Ok(Self {
            kind: "polyline".into(),
            eval: Shared::new(eval),
            deriv: Some(Shared::new(deriv)),
            a: 0.0,
            b: nseg as f64,
            breaks: (1..nseg).map(|k| k as f64).collect(),
        })
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.deriv.is_some()
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    fn check_param(&self, t: f64) -> Result<f64> {
        let slack = PARAM_TOL * (self.b - self.a).max(1.0);
        if !(t >= self.a - slack && t <= self.b + slack) {
            return Err(Error::Domain(format!("t = {t} is outside [{}, {}]", self.a, self.b)));
        }
        Ok(t.clamp(self.a, self.b))
    }

    pub fn eval(&self, t: f64) -> Result<Complex64> {
        let t = self.check_param(t)?;
        let z = (self.eval)(t);
        if !z.is_finite() {
            return Err(Error::NonFinite { point: vec![t] });
        }
        Ok(z)
    }

    pub fn start(&self) -> Result<Complex64> {
        self.eval(self.a)
    }

    pub fn end(&self) -> Result<Complex64> {
        self.eval(self.b)
    }

    /// `z'(t)`, analytic when available, otherwise by differences with step `1e-6 (b - a)`.
    pub fn derivative(&self, t: f64) -> Result<Complex64> {
        let t = self.check_param(t)?;
        let d = match &self.deriv {
            Some(d) => d(t),
            None => self.fd_derivative(t)?,
        };
        if !d.is_finite() {
            return Err(Error::NonFinite { point: vec![t] });
        }
        Ok(d)
    }

    fn fd_derivative(&self, t: f64) -> Result<Complex64> {
        let h = 1e-6 * (self.b - self.a);
        let z = |s: f64| {
            let w = (self.eval)(s);
            if w.is_finite() {
                Ok(w)
            } else {
                Err(Error::NonFinite { point: vec![s] })
            }
        };
        fd_along(z, t, h, self.a, self.b)
    }

    /// Samples the arc for finite values and, when an analytic derivative
    /// exists, compares it with differences of `eval`.
    pub fn validate(&self) -> Result<()> {
        let w = self.b - self.a;
        let h = 1e-6 * w;
        for k in 0..=VALIDATION_SAMPLES {
            let t = self.a + w * k as f64 / VALIDATION_SAMPLES as f64;
            self.eval(t)?;
        }
        if let Some(d) = &self.deriv {
            for k in 0..VALIDATION_SAMPLES {
                let t = self.a + w * (k as f64 + 0.5) / VALIDATION_SAMPLES as f64;
                if self.breaks.iter().any(|b| (b - t).abs() <= 2.0 * h) {
                    continue;
                }
                let analytic = d(t);
                let numeric = self.fd_derivative(t)?;
                let scale = analytic.norm().max(1.0);
                if !analytic.is_finite() || (analytic - numeric).norm() > DERIVATIVE_MATCH_TOL * scale {
                    return Err(Error::Domain(format!(
                        "derivative mismatch at t = {t}: supplied {analytic}, differenced {numeric}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_finite(points: &[Complex64]) -> Result<()> {
    match points.iter().find(|z| !z.is_finite()) {
        Some(z) => Err(Error::NonFinite { point: vec![z.re, z.im] }),
        None => Ok(()),
    }
}

/// Central difference, or the second-order one-sided formula near an end.
fn fd_along<F>(z: F, t: f64, h: f64, a: f64, b: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if t - h >= a && t + h <= b {
        Ok((z(t + h)? - z(t - h)?) / (2.0 * h))
    } else if t + 2.0 * h <= b {
        Ok((-3.0 * z(t)? + 4.0 * z(t + h)? - z(t + 2.0 * h)?) / (2.0 * h))
    } else {
        Ok((3.0 * z(t)? - 4.0 * z(t - h)? + z(t - 2.0 * h)?) / (2.0 * h))
    }
}

impl FromStr for Arc {
    type Err = Error;

    /// `line x0 y0 x1 y1`, `circle cx cy r t0 t1` or `polyline x0 y0 x1 y1 ...`.
    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<(usize, &str)> =
            s.split_whitespace().map(|tok| (tok.as_ptr() as usize - s.as_ptr() as usize, tok)).collect();
        let parse_err = |at: usize, message: String| Error::Parse { line: 1, column: at + 1, message };
        let Some(&(_, kind)) = tokens.first() else {
            return Err(parse_err(0, "empty arc descriptor".into()));
        };
        let mut nums = Vec::with_capacity(tokens.len() - 1);
        for &(at, tok) in &tokens[1..] {
            let v: f64 = tok.parse().map_err(|_| parse_err(at, format!("expected a number, found `{tok}`")))?;
            if !v.is_finite() {
                return Err(parse_err(at, format!("non-finite number `{tok}`")));
            }
            nums.push(v);
        }
        let end = s.trim_end().len();
        let arity = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(parse_err(end, format!("`{kind}` takes {n} numbers, found {}", nums.len())))
            }
        };
        let c = |i: usize| Complex64::new(nums[i], nums[i + 1]);
        match kind {
            "line" => {
                arity(4)?;
                Arc::line(c(0), c(2))
            }
            "circle" => {
                arity(5)?;
                Arc::circle(c(0), nums[2], nums[3], nums[4])
            }
            "polyline" => {
                if nums.len() < 4 || nums.len() % 2 != 0 {
                    return Err(parse_err(end, format!("`polyline` takes an even count of at least 4 numbers, found {}", nums.len())));
                }
                let pts: Vec<Complex64> = nums.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
                Arc::polyline(&pts)
            }
            other => Err(parse_err(0, format!("unknown arc kind `{other}` (expected line, circle or polyline)"))),
        }
    }
}

/// `arg z'(t)` in `(-π, π]`.
pub fn tangent_angle(arc: &Arc, t: f64) -> Result<f64> {
    let d = arc.derivative(t)?;
    if d.norm() <= SINGULAR_TANGENT {
        return Err(Error::SingularTangent { t });
    }
    Ok(wrap_angle(d.arg()))
}

/// `f'(z)`, analytic when the map provides it.
fn map_derivative(f: &ComplexMap, z: Complex64) -> Result<Complex64> {
    match f.analytic_derivative(z) {
        Some(d) => d,
        None => Ok(complex_derivative(f, z, &FiniteDiffConfig::default())?.value),
    }
}

/// The composed arc `t ↦ f(z(t))` with derivative `f'(z(t)) z'(t)`.
pub fn image_arc(f: &ComplexMap, arc: &Arc) -> Result<Arc> {
    let w = arc.b - arc.a;
    for k in 0..VALIDATION_SAMPLES {
        let t = arc.a + w * k as f64 / (VALIDATION_SAMPLES - 1) as f64;
        let z = arc.eval(t)?;
        if !f.domain().contains(z) || f.call(z).is_err() {
            return Err(Error::OutsideMapDomain { t });
        }
    }
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let (fe, src) = (f.clone(), arc.clone());
    let eval = move |t: f64| src.eval(t).and_then(|z| fe.call(z)).unwrap_or(nan);
    let (fd, src) = (f.clone(), arc.clone());
    let deriv = move |t: f64| {
        let chain = || -> Result<Complex64> {
            let z = src.eval(t)?;
            Ok(map_derivative(&fd, z)? * src.derivative(t)?)
        };
        chain().unwrap_or(nan)
    };
    Ok(Arc {
        kind: format!("{}∘{}", f.name(), arc.kind),
        eval: Shared::new(eval),
        deriv: Some(Shared::new(deriv)),
        a: arc.a,
        b: arc.b,
        breaks: arc.breaks.clone(),
    })
}

/// Tangent of `t ↦ f(z(t))` at `c` by differences, without using `f'`.
fn composed_tangent(f: &ComplexMap, arc: &Arc, c: f64) -> Result<Complex64> {
    let h = 1e-6 * (arc.b - arc.a);
    fd_along(|t| f.call(arc.eval(t)?), c, h, arc.a, arc.b)
}

/// One arc's tangent before and after the map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageTangent {
    pub z: Complex64,
    pub derivative: Complex64,
    /// `arg z'(c)`.
    pub theta: f64,
    /// `arg f'(z(c))`.
    pub rotation: f64,
    /// `arg` of the differenced image tangent.
    pub image_theta: f64,
    /// `|image_theta - (rotation + theta)|` modulo `2π`.
    pub chain_residual: f64,
}

/// Image tangent angle at `c`; `f` must be holomorphic and non-critical at `z(c)`.
pub fn image_tangent_angle(f: &ComplexMap, arc: &Arc, c: f64) -> Result<ImageTangent> {
    let z = arc.eval(c)?;
    let theta = tangent_angle(arc, c)?;
    let cd = complex_derivative(f, z, &FiniteDiffConfig::default())?;
    if !cd.holomorphic {
        return Err(Error::NotHolomorphic { z, residual: cd.cauchy_riemann.residual() });
    }
    let derivative = match f.analytic_derivative(z) {
        Some(d) => d?,
        None => cd.value,
    };
    if derivative.norm() < CRITICAL_MODULUS {
        return Err(Error::CriticalPoint { z, modulus: derivative.norm() });
    }
    let tangent = composed_tangent(f, arc, c)?;
    if tangent.norm() <= SINGULAR_TANGENT {
        return Err(Error::SingularTangent { t: c });
    }
    let rotation = wrap_angle(derivative.arg());
    let image_theta = wrap_angle(tangent.arg());
    let chain_residual = angle_difference(image_theta, rotation + theta).abs();
    Ok(ImageTangent { z, derivative, theta, rotation, image_theta, chain_residual })
}

/// Source and image angles between two arcs crossing at a shared parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleReport2D {
    pub theta1: f64,
    pub theta2: f64,
    pub image_theta1: f64,
    pub image_theta2: f64,
    /// `θ2 - θ1`.
    pub source_angle: f64,
    pub image_angle: f64,
    /// `|image_angle - source_angle|` modulo `2π`.
    pub difference: f64,
    pub tol: f64,
    pub passed: bool,
    pub derivative: Complex64,
}

/// Compares the angle from arc 1 to arc 2 at `z(c)` with the angle between
/// their images. Image tangents are differenced directly, so maps that are not
/// holomorphic produce a failing report rather than an error.
pub fn angle_preservation_check(f: &ComplexMap, arc1: &Arc, arc2: &Arc, c: f64, tol: f64) -> Result<AngleReport2D> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::Domain(format!("tolerance must be non-negative, got {tol}")));
    }
    let z1 = arc1.eval(c)?;
    let z2 = arc2.eval(c)?;
    let gap = (z1 - z2).norm();
    if gap > INTERSECTION_TOL {
        return Err(Error::ArcsDoNotIntersect { gap });
    }
    let theta1 = tangent_angle(arc1, c)?;
    let theta2 = tangent_angle(arc2, c)?;
    let derivative = map_derivative(f, z1)?;
    if derivative.norm() < CRITICAL_MODULUS {
        return Err(Error::CriticalPoint { z: z1, modulus: derivative.norm() });
    }
    let t1 = composed_tangent(f, arc1, c)?;
    let t2 = composed_tangent(f, arc2, c)?;
    if t1.norm() <= SINGULAR_TANGENT || t2.norm() <= SINGULAR_TANGENT {
        return Err(Error::CriticalPoint { z: z1, modulus: t1.norm().min(t2.norm()) });
    }
    let image_theta1 = wrap_angle(t1.arg());
    let image_theta2 = wrap_angle(t2.arg());
    let source_angle = angle_difference(theta2, theta1);
    let image_angle = angle_difference(image_theta2, image_theta1);
    let difference = angle_difference(image_angle, source_angle).abs();
    Ok(AngleReport2D {
        theta1,
        theta2,
        image_theta1,
        image_theta2,
        source_angle,
        image_angle,
        difference,
        tol,
        passed: difference <= tol,
        derivative,
    })
}

/// A substitution `t = ψ(τ)`, `α <= τ <= β`, increasing.
#[derive(Clone)]
pub struct Parametrization {
    psi: Shared<RealFn>,
    dpsi: Shared<RealFn>,
    alpha: f64,
    beta: f64,
}

impl fmt::Debug for Parametrization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Parametrization").field("alpha", &self.alpha).field("beta", &self.beta).finish()
    }
}

impl Parametrization {
    pub fn new<P, D>(alpha: f64, beta: f64, psi: P, dpsi: D) -> Result<Self>
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(alpha.is_finite() && beta.is_finite() && alpha < beta) {
            return Err(Error::InvalidParametrization(format!("needs finite α < β, got [{alpha}, {beta}]")));
        }
        let rep = Self { psi: Shared::new(psi), dpsi: Shared::new(dpsi), alpha, beta };
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=VALIDATION_SAMPLES {
            let tau = rep.node(k, VALIDATION_SAMPLES);
            let (t, dt) = ((rep.psi)(tau), (rep.dpsi)(tau));
            if !t.is_finite() || !dt.is_finite() {
                return Err(Error::InvalidParametrization(format!("non-finite value at τ = {tau}")));
            }
            if t <= prev {
                return Err(Error::InvalidParametrization(format!("ψ is not increasing at τ = {tau}")));
            }
            if dt < 0.0 {
                return Err(Error::InvalidParametrization(format!("ψ' is negative at τ = {tau}")));
            }
            prev = t;
        }
        Ok(rep)
    }

    /// `ψ(τ) = τ` on `[a, b]`.
    pub fn identity(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, |t| t, |_| 1.0)
    }

    /// The increasing affine map from `[alpha, beta]` onto `[a, b]`.
    pub fn affine(alpha: f64, beta: f64, a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidParametrization(format!("target needs finite a < b, got [{a}, {b}]")));
        }
        let slope = (b - a) / (beta - alpha);
        Self::new(alpha, beta, move |tau| a + slope * (tau - alpha), move |_| slope)
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.alpha, self.beta)
    }

    pub fn psi(&self, tau: f64) -> f64 {
        (self.psi)(tau)
    }

    pub fn dpsi(&self, tau: f64) -> f64 {
        (self.dpsi)(tau)
    }

    fn node(&self, k: usize, n: usize) -> f64 {
        self.alpha + (self.beta - self.alpha) * k as f64 / n as f64
    }

    /// Checks that `ψ(α) = a` and `ψ(β) = b` for the arc.
    pub fn check_target(&self, arc: &Arc) -> Result<()> {
        let (a, b) = arc.bounds();
        let (ta, tb) = (self.psi(self.alpha), self.psi(self.beta));
        let tol = PARAM_TOL * (b - a).abs().max(1.0);
        if (ta - a).abs() > tol || (tb - b).abs() > tol {
            return Err(Error::InvalidParametrization(format!(
                "ψ maps [{}, {}] onto [{ta}, {tb}], arc domain is [{a}, {b}]",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    /// Solves `ψ(τ) = t` by bisection.
    fn preimage(&self, t: f64) -> f64 {
        let (mut lo, mut hi) = (self.alpha, self.beta);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.psi(mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// `∫_α^β |z'(ψ(τ))| ψ'(τ) dτ`, split at the arc's corners.
pub fn arc_length(arc: &Arc, rep: &Parametrization, q: &QuadratureConfig) -> Result<f64> {
    rep.check_target(arc)?;
    let (a, b) = arc.bounds();
    let mut cuts = vec![rep.alpha];
    cuts.extend(arc.breaks.iter().filter(|t| **t > a && **t < b).map(|t| rep.preimage(*t)));
    cuts.push(rep.beta);
    let integrand = |tau: f64| -> Result<f64> {
        let t = rep.psi(tau).clamp(a, b);
        let v = arc.derivative(t)?.norm() * rep.dpsi(tau);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { point: vec![tau] })
        }
    };
    let mut total = 0.0;
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            total += integrate(integrand, w[0], w[1], q)?;
        }
    }
    Ok(total.max(0.0))
}

/// The shared `ψ` of a list of parametrizations that agree on a 64-point grid.
pub fn common_parametrization(reps: &[Parametrization]) -> Result<Parametrization> {
    let Some(first) = reps.first() else {
        return Err(Error::Domain("common parametrization needs at least one representation".into()));
    };
    for (i, pair) in reps.windows(2).enumerate() {
        let (p, r) = (&pair[0], &pair[1]);
        let same_domain = (p.alpha - r.alpha).abs() <= PARAM_TOL && (p.beta - r.beta).abs() <= PARAM_TOL;
        let agree = same_domain
            && (0..=COMMON_GRID).all(|k| {
                let tau = p.node(k, COMMON_GRID);
                (p.psi(tau) - r.psi(tau)).abs() <= PARAM_TOL
            });
        if !agree {
            return Err(Error::ParametrizationMismatch { first: i, second: i + 1 });
        }
    }
    Ok(first.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::differential::Disc;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn horizontal_and_vertical_through(z: Complex64) -> (Arc, Arc) {
        (
            Arc::line(z - c(0.5, 0.0), z + c(0.5, 0.0)).unwrap(),
            Arc::line(z - c(0.0, 0.5), z + c(0.0, 0.5)).unwrap(),
        )
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
        assert!((angle_difference(PI - 0.01, -PI + 0.01) + 0.02).abs() < 1e-12);
    }

    #[test]
    fn tangent_angles() {
        let line = Arc::new(0.0, 1.0, |t| c(t, 0.0)).unwrap();
        for t in [0.0, 0.3, 1.0] {
            assert!(tangent_angle(&line, t).unwrap().abs() < 1e-9);
        }
        let circle = Arc::new(0.0, PI, |t| Complex64::from_polar(1.0, t)).unwrap();
        assert!((tangent_angle(&circle, 0.0).unwrap() - FRAC_PI_2).abs() < 1e-8);
        let constant = Arc::new(0.0, 1.0, |_| c(2.0, 1.0)).unwrap();
        assert!(matches!(tangent_angle(&constant, 0.5), Err(Error::SingularTangent { .. })));
    }

    #[test]
    fn derivative_validation() {
        assert!(Arc::from_fns(0.0, 1.0, |t| c(t * t, 0.0), |t| c(2.0 * t, 0.0)).is_ok());
        assert!(Arc::from_fns(0.0, 1.0, |t| c(t * t, 0.0), |t| c(3.0 * t, 0.0)).is_err());
        assert!(Arc::new(1.0, 1.0, |t| c(t, 0.0)).is_err());
        assert!(Arc::new(0.0, 1.0, |t| c(1.0 / (t - 0.5), 0.0)).is_err());
    }

    #[test]
    fn image_arcs() {
        let arc = Arc::line(c(1.0, 0.0), c(2.0, 0.0)).unwrap();
        let same = image_arc(&ComplexMap::identity(), &arc).unwrap();
        for t in [0.0, 0.25, 1.0] {
            assert_eq!(same.eval(t).unwrap(), arc.eval(t).unwrap());
        }
        let sq = image_arc(&ComplexMap::square(), &arc).unwrap();
        assert!((sq.eval(0.5).unwrap() - c(2.25, 0.0)).norm() < 1e-15);
        assert!((sq.derivative(0.5).unwrap() - c(3.0, 0.0)).norm() < 1e-12);
        let right_disc = ComplexMap::reciprocal().with_domain(Disc { center: c(1.0, 0.0), radius: 1.0 });
        let escaping = Arc::line(c(0.5, 0.0), c(2.5, 0.0)).unwrap();
        match image_arc(&right_disc, &escaping) {
            Err(Error::OutsideMapDomain { t }) => assert!((0.75..0.76).contains(&t)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn image_tangents() {
        let z = c(1.0, 1.0);
        let (h, _) = horizontal_and_vertical_through(z);
        let id = image_tangent_angle(&ComplexMap::identity(), &h, 0.5).unwrap();
        assert!((id.image_theta - id.theta).abs() < 1e-9);
        let sq = image_tangent_angle(&ComplexMap::square(), &h, 0.5).unwrap();
        assert!((sq.image_theta - PI / 4.0).abs() < 1e-8);
        assert!(sq.chain_residual < 1e-8);
        let through_zero = Arc::line(c(-1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!(matches!(
            image_tangent_angle(&ComplexMap::square(), &through_zero, 0.5),
            Err(Error::CriticalPoint { .. })
        ));
        assert!(matches!(
            image_tangent_angle(&ComplexMap::conjugate(), &h, 0.5),
            Err(Error::NotHolomorphic { .. })
        ));
    }

    #[test]
    fn angle_checks() {
        let (h, v) = horizontal_and_vertical_through(c(1.0, 1.0));
        let id = angle_preservation_check(&ComplexMap::identity(), &h, &v, 0.5, 1e-12).unwrap();
        assert!(id.passed);
        assert_eq!(id.source_angle, id.image_angle);
        let sq = angle_preservation_check(&ComplexMap::square(), &h, &v, 0.5, 1e-6).unwrap();
        assert!(sq.passed);
        assert!((sq.source_angle - FRAC_PI_2).abs() < 1e-12);
        assert!((sq.image_angle - FRAC_PI_2).abs() < 1e-6);
        let cj = angle_preservation_check(&ComplexMap::conjugate(), &h, &v, 0.5, 1e-6).unwrap();
        assert!(!cj.passed);
        assert!((cj.image_angle + FRAC_PI_2).abs() < 1e-6);
        let apart = Arc::line(c(5.0, 5.0), c(6.0, 6.0)).unwrap();
        assert!(matches!(
            angle_preservation_check(&ComplexMap::square(), &h, &apart, 0.5, 1e-6),
            Err(Error::ArcsDoNotIntersect { .. })
        ));
    }

    #[test]
    fn lengths() {
        let q = QuadratureConfig::default();
        let half = Arc::circle(c(0.0, 0.0), 1.0, 0.0, PI).unwrap();
        let id = Parametrization::identity(0.0, PI).unwrap();
        assert!((arc_length(&half, &id, &q).unwrap() - PI).abs() < 1e-12);
        let sq = Parametrization::new(0.0, 1.0, |t| PI * t * t, |t| 2.0 * PI * t).unwrap();
        assert!((arc_length(&half, &sq, &q).unwrap() - PI).abs() < 1e-8);
        let seg = Arc::line(c(0.0, 0.0), c(1.0, 1.0)).unwrap();
        let unit = Parametrization::identity(0.0, 1.0).unwrap();
        assert!((arc_length(&seg, &unit, &q).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!(arc_length(&seg, &id, &q).is_err());
    }

    #[test]
    fn polyline_length_and_tangents() {
        let q = QuadratureConfig::default();
        let p = Arc::polyline(&[c(0.0, 0.0), c(3.0, 0.0), c(3.0, 4.0)]).unwrap();
        let rep = Parametrization::new(0.0, 1.0, |t| 2.0 * t * t, |t| 4.0 * t).unwrap();
        assert!((arc_length(&p, &rep, &q).unwrap() - 7.0).abs() < 1e-10);
        assert!(tangent_angle(&p, 0.5).unwrap().abs() < 1e-12);
        assert!((tangent_angle(&p, 1.5).unwrap() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn parametrization_rules() {
        assert!(Parametrization::new(0.0, 1.0, |t| 1.0 - t, |_| -1.0).is_err());
        assert!(Parametrization::new(1.0, 0.0, |t| t, |_| 1.0).is_err());
        let five: Vec<_> = (0..5).map(|_| Parametrization::identity(0.0, 1.0).unwrap()).collect();
        assert_eq!(common_parametrization(&five).unwrap().bounds(), (0.0, 1.0));
        let affine = vec![
            Parametrization::affine(0.0, 2.0, 0.0, 1.0).unwrap(),
            Parametrization::new(0.0, 2.0, |t| t / 2.0, |_| 0.5).unwrap(),
        ];
        assert!(common_parametrization(&affine).is_ok());
        let mixed = vec![Parametrization::identity(0.0, 1.0).unwrap(), Parametrization::identity(0.0, 2.0).unwrap()];
        assert!(matches!(
            common_parametrization(&mixed),
            Err(Error::ParametrizationMismatch { first: 0, second: 1 })
        ));
        assert!(common_parametrization(&[]).is_err());
    }

    #[test]
    fn descriptors() {
        let l: Arc = "line 0 0 1 1".parse().unwrap();
        assert_eq!(l.kind(), "line");
        let ci: Arc = "circle 0 0 2 0 2.5".parse().unwrap();
        assert_eq!(ci.bounds(), (0.0, 2.5));
        let p: Arc = "polyline 0 0 1 0 1 1".parse().unwrap();
        assert_eq!(p.bounds(), (0.0, 2.0));
        match "line 0 x 1 1".parse::<Arc>() {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 8),
            other => panic!("{other:?}"),
        }
        assert!("spiral 1 2".parse::<Arc>().is_err());
        assert!("line 0 0 1".parse::<Arc>().is_err());
        assert!("polyline 0 0 1".parse::<Arc>().is_err());
    }
}
