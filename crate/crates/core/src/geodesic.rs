//! Rao distances as lengths of Fisher-metric geodesics.
//!
//! The two-point problem is solved by shooting: the geodesic equation
//! `θ'' + Γ(θ)(θ', θ') = 0` is integrated over unit arc time with a fixed-step
//! RK4 scheme, and the initial velocity is corrected by damped Newton steps
//! until the endpoint lands on the target. Christoffel symbols come from
//! central differences of the metric field.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::statmanifold::{fisher_information, FamilyKind, ParamPoint, ParametricFamily, TangentVector};

/// A Riemannian metric on an open parameter region.
pub trait MetricField {
    fn dim(&self) -> usize;

    /// Whether `theta` lies in the region where the metric is defined.
    fn contains(&self, theta: &[f64]) -> bool;

    fn metric(&self, theta: &[f64]) -> Result<DMatrix<f64>>;
}

/// The Fisher metric of a family.
#[derive(Debug, Clone)]
pub struct FisherField<'a> {
    pub family: &'a ParametricFamily,
    pub quadrature: QuadratureConfig,
}

impl MetricField for FisherField<'_> {
    fn dim(&self) -> usize {
        self.family.dim()
    }

    fn contains(&self, theta: &[f64]) -> bool {
        self.family.is_valid(theta)
    }

    fn metric(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        Ok(fisher_information(self.family, &ParamPoint::new(theta.to_vec()), &self.quadrature)?.entries)
    }
}

/// The identity metric on all of `R^n`.
#[derive(Debug, Clone, Copy)]
pub struct FlatMetric(pub usize);

impl MetricField for FlatMetric {
    fn dim(&self) -> usize {
        self.0
    }

    fn contains(&self, theta: &[f64]) -> bool {
        theta.iter().all(|v| v.is_finite())
    }

    fn metric(&self, _theta: &[f64]) -> Result<DMatrix<f64>> {
        Ok(DMatrix::identity(self.0, self.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub ode_steps: usize,
    /// Endpoint miss allowed by the shooting solver, measured in the metric at the target.
    pub shoot_tol: f64,
    pub max_shoot_iters: usize,
    /// Relative metric-differencing step; the absolute step is `fd_step_metric · (1 + |θ|)`.
    pub fd_step_metric: f64,
    pub quadrature: QuadratureConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            ode_steps: 128,
            shoot_tol: 1e-9,
            max_shoot_iters: 50,
            fd_step_metric: 1e-4,
            quadrature: QuadratureConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ode_steps < 16 {
            return Err(Error::Domain(format!("ode_steps must be at least 16, got {}", self.ode_steps)));
        }
        if !(self.shoot_tol > 0.0) {
            return Err(Error::Domain("shoot_tol must be positive".into()));
        }
        if !(self.fd_step_metric > 0.0) {
            return Err(Error::Domain("fd_step_metric must be positive".into()));
        }
        if self.max_shoot_iters == 0 {
            return Err(Error::Domain("max_shoot_iters must be at least 1".into()));
        }
        self.quadrature.validate()
    }
}

/// Christoffel symbols of the second kind, `Γ^k_ij`, at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    symbols: Vec<f64>,
    /// Metric at the point, kept for speed evaluations.
    pub metric: DMatrix<f64>,
    pub condition: f64,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.symbols[(k * self.dim + i) * self.dim + j]
    }

    /// `Γ^k_ij v^i v^j` for every `k`.
    pub fn contract(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|k| {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += self.get(k, i, j) * v[i] * v[j];
                    }
                }
                acc
            })
            .collect()
    }
}

/// Largest metric condition number accepted before declaring it singular.
const MAX_CONDITION: f64 = 1e12;

fn condition_number(g: &DMatrix<f64>) -> f64 {
    let eig = ((g + g.transpose()) * 0.5).symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Christoffel symbols of an arbitrary metric field.
pub fn christoffel_of<M: MetricField + ?Sized>(field: &M, theta: &[f64], cfg: &SolverConfig) -> Result<Christoffel> {
    christoffel_impl(field, theta, cfg, true)
}

/// With `shrink` unset, a stencil that does not fit in the region is an error
/// instead of being narrowed.
fn christoffel_impl<M: MetricField + ?Sized>(
    field: &M,
    theta: &[f64],
    cfg: &SolverConfig,
    shrink: bool,
) -> Result<Christoffel> {
    let n = field.dim();
    if theta.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: theta.len() });
    }
    if !field.contains(theta) {
        return Err(Error::Domain(format!("{theta:?} is outside the metric's region")));
    }
    let g = field.metric(theta)?;
    let condition = condition_number(&g);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularMetric { condition });
    }
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or(Error::SingularMetric { condition })?;

    let norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
    let mut dg = Vec::with_capacity(n);
    let mut x = theta.to_vec();
    for l in 0..n {
        let mut h = cfg.fd_step_metric * (1.0 + norm);
        // Shrink the step until the stencil fits inside the region.
        let mut tries = 0;
        loop {
            x[l] = theta[l] + h;
            let up_ok = field.contains(&x);
            x[l] = theta[l] - h;
            let down_ok = field.contains(&x);
            if up_ok && down_ok {
                break;
            }
            tries += 1;
            if !shrink || tries > 40 {
                x[l] = theta[l];
                return Err(Error::Domain(format!("no room for a metric stencil at {theta:?}")));
            }
            h *= 0.5;
        }
        x[l] = theta[l] + h;
        let up = field.metric(&x)?;
        x[l] = theta[l] - h;
        let down = field.metric(&x)?;
        x[l] = theta[l];
        dg.push((up - down) / (2.0 * h));
    }

    // Γ^k_ij = ½ g^{kl} (∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let mut symbols = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += g_inv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                let value = 0.5 * acc;
                symbols[(k * n + i) * n + j] = value;
                symbols[(k * n + j) * n + i] = value;
            }
        }
    }
    Ok(Christoffel { dim: n, symbols, metric: g, condition })
}

/// Christoffel symbols of a family's Fisher metric.
pub fn christoffel(fam: &ParametricFamily, p: &ParamPoint, cfg: &SolverConfig) -> Result<Christoffel> {
    fam.check(p)?;
    let field = FisherField { family: fam, quadrature: cfg.quadrature };
    christoffel_of(&field, &p.theta, cfg)
}

/// A discretised geodesic with the metric speed at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    pub points: Vec<ParamPoint>,
    pub velocities: Vec<TangentVector>,
    pub speeds: Vec<f64>,
    pub length: f64,
    pub arc_time: f64,
}

impl GeodesicPath {
    pub fn start(&self) -> &ParamPoint {
        &self.points[0]
    }

    pub fn end(&self) -> &ParamPoint {
        self.points.last().expect("non-empty path")
    }

    /// `(max − min) / max` of the node speeds; zero for a stationary path.
    pub fn speed_variation(&self) -> f64 {
        let hi = self.speeds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = self.speeds.iter().copied().fold(f64::INFINITY, f64::min);
        if hi <= 0.0 {
            0.0
        } else {
            (hi - lo) / hi
        }
    }
}

const MAX_SPEED_DRIFT: f64 = 1e-2;

fn quad_form(g: &DMatrix<f64>, v: &[f64]) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += g[(i, j)] * v[i] * v[j];
        }
    }
    acc
}

/// Integrates the geodesic equation from `theta0` with velocity `v0`.
pub fn shoot_in<M: MetricField + ?Sized>(
    field: &M,
    theta0: &[f64],
    v0: &[f64],
    arc_time: f64,
    cfg: &SolverConfig,
) -> Result<GeodesicPath> {
    cfg.validate()?;
    let n = field.dim();
    if theta0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: theta0.len() });
    }
    if v0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v0.len() });
    }
    if !(arc_time.is_finite() && arc_time >= 0.0) {
        return Err(Error::Domain(format!("arc time must be non-negative, got {arc_time}")));
    }
    if !field.contains(theta0) {
        return Err(Error::Domain(format!("start point {theta0:?} is outside the metric's region")));
    }
    let steps = cfg.ode_steps;
    if v0.iter().all(|v| *v == 0.0) || arc_time == 0.0 {
        return Ok(GeodesicPath {
            points: vec![ParamPoint::new(theta0.to_vec()); steps + 1],
            velocities: vec![TangentVector::new(v0.to_vec()); steps + 1],
            speeds: vec![0.0; steps + 1],
            length: 0.0,
            arc_time,
        });
    }

    let dt = arc_time / steps as f64;
    let mut theta = theta0.to_vec();
    let mut vel = v0.to_vec();
    let mut points = Vec::with_capacity(steps + 1);
    let mut velocities = Vec::with_capacity(steps + 1);
    let mut speeds: Vec<f64> = Vec::with_capacity(steps + 1);

    let exit = |point: &[f64], step: usize| Error::BoundaryExit {
        point: point.to_vec(),
        fraction: step as f64 / steps as f64,
    };
    let accel = |theta: &[f64], vel: &[f64], step: usize| -> Result<(Vec<f64>, Christoffel)> {
        if !field.contains(theta) {
            return Err(exit(theta, step));
        }
        let gamma = christoffel_impl(field, theta, cfg, false).map_err(|e| match e {
            Error::Domain(_) => exit(theta, step),
            other => other,
        })?;
        let a = gamma.contract(vel).into_iter().map(|x| -x).collect();
        Ok((a, gamma))
    };
    let offset = |base: &[f64], d: &[f64], s: f64| -> Vec<f64> { base.iter().zip(d).map(|(b, d)| b + s * d).collect() };

    for step in 0..steps {
        let (a1, gamma) = accel(&theta, &vel, step)?;
        let speed = quad_form(&gamma.metric, &vel).max(0.0).sqrt();
        // Speed is conserved along a geodesic; losing it means the path ran
        // into the singular edge of the region.
        if let Some(first) = speeds.first() {
            if (speed - first).abs() > MAX_SPEED_DRIFT * first {
                return Err(exit(&theta, step));
            }
        }
        points.push(ParamPoint::new(theta.clone()));
        velocities.push(TangentVector::new(vel.clone()));
        speeds.push(speed);

        let k1x = vel.clone();
        let k1v = a1;
        let x2 = offset(&theta, &k1x, 0.5 * dt);
        let v2 = offset(&vel, &k1v, 0.5 * dt);
        let (k2v, _) = accel(&x2, &v2, step)?;
        let k2x = v2;
        let x3 = offset(&theta, &k2x, 0.5 * dt);
        let v3 = offset(&vel, &k2v, 0.5 * dt);
        let (k3v, _) = accel(&x3, &v3, step)?;
        let k3x = v3;
        let x4 = offset(&theta, &k3x, dt);
        let v4 = offset(&vel, &k3v, dt);
        let (k4v, _) = accel(&x4, &v4, step)?;
        let k4x = v4;
        for i in 0..n {
            theta[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            vel[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        if !field.contains(&theta) {
            return Err(exit(&theta, step + 1));
        }
    }
    let g_end = field.metric(&theta)?;
    points.push(ParamPoint::new(theta));
    speeds.push(quad_form(&g_end, &vel).max(0.0).sqrt());
    velocities.push(TangentVector::new(vel));

    // Composite Simpson where the step count allows it, trapezoid otherwise.
    let length = if steps.is_multiple_of(2) {
        let mut acc = speeds[0] + speeds[steps];
        for (i, s) in speeds.iter().enumerate().take(steps).skip(1) {
            acc += if i % 2 == 1 { 4.0 * s } else { 2.0 * s };
        }
        acc * dt / 3.0
    } else {
        let inner: f64 = speeds[1..steps].iter().sum();
        (0.5 * (speeds[0] + speeds[steps]) + inner) * dt
    };
    Ok(GeodesicPath { points, velocities, speeds, length, arc_time })
}

pub fn geodesic_shoot(
    fam: &ParametricFamily,
    p0: &ParamPoint,
    v0: &TangentVector,
    arc_time: f64,
    cfg: &SolverConfig,
) -> Result<GeodesicPath> {
    fam.check(p0)?;
    let field = FisherField { family: fam, quadrature: cfg.quadrature };
    shoot_in(&field, &p0.theta, &v0.dtheta, arc_time, cfg)
}

/// Converged two-point geodesic with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RaoSolution {
    pub distance: f64,
    pub path: GeodesicPath,
    pub iterations: usize,
    pub residual: f64,
}

/// Endpoint miss and its length `sqrt(rᵀ G r)` in the metric at the target,
/// so the tolerance is in distance units.
fn residual_norm(path: &GeodesicPath, target: &[f64], g: &DMatrix<f64>) -> (Vec<f64>, f64) {
    let r: Vec<f64> = path.end().theta.iter().zip(target).map(|(e, t)| e - t).collect();
    let rv = DVector::from_column_slice(&r);
    let norm = (rv.dot(&(g * &rv))).max(0.0).sqrt();
    (r, norm)
}

/// Coarsest step count used for warm starts.
const MIN_COARSE_STEPS: usize = 16;

/// Solves the boundary problem `θ(0) = a`, `θ(1) = b` in an arbitrary metric field.
pub fn solve_bvp<M: MetricField + ?Sized>(field: &M, a: &[f64], b: &[f64], cfg: &SolverConfig) -> Result<RaoSolution> {
    cfg.validate()?;
    let n = field.dim();
    for p in [a, b] {
        if p.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: p.len() });
        }
        if !field.contains(p) {
            return Err(Error::Domain(format!("{p:?} is outside the metric's region")));
        }
    }
    if a == b {
        let path = shoot_in(field, a, &vec![0.0; n], 1.0, cfg)?;
        return Ok(RaoSolution { distance: 0.0, path, iterations: 0, residual: 0.0 });
    }
    Ok(shoot_cascade(field, a, b, cfg)?.0)
}

/// Solves on a grid half as fine first and starts from its velocity and
/// Jacobian; falls back to a cold start when that fails.
fn shoot_cascade<M: MetricField + ?Sized>(
    field: &M,
    a: &[f64],
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<(RaoSolution, Vec<f64>, DMatrix<f64>)> {
    let coarse_steps = cfg.ode_steps / 2;
    let warm = if coarse_steps >= MIN_COARSE_STEPS {
        let coarse = SolverConfig { ode_steps: coarse_steps, shoot_tol: cfg.shoot_tol * 1e2, ..*cfg };
        shoot_cascade(field, a, b, &coarse).ok().map(|(_, v, jac)| (v, jac))
    } else {
        None
    };
    match warm {
        Some(start) => newton_shoot(field, a, b, cfg, Some(start)).or_else(|_| newton_shoot(field, a, b, cfg, None)),
        None => newton_shoot(field, a, b, cfg, None),
    }
}

fn newton_shoot<M: MetricField + ?Sized>(
    field: &M,
    a: &[f64],
    b: &[f64],
    cfg: &SolverConfig,
    warm: Option<(Vec<f64>, DMatrix<f64>)>,
) -> Result<(RaoSolution, Vec<f64>, DMatrix<f64>)> {
    let n = field.dim();
    let g_target = field.metric(b)?;

    // Forward-difference sensitivity of the endpoint to the initial velocity,
    // refreshed only when a Broyden-updated estimate stops making progress.
    let sensitivity = |v: &[f64], end: &[f64]| -> Result<DMatrix<f64>> {
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dv = 1e-6 * vnorm.max(1e-3);
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut vj = v.to_vec();
            vj[j] += dv;
            let pj = shoot_in(field, a, &vj, 1.0, cfg)?;
            for i in 0..n {
                jac[(i, j)] = (pj.end().theta[i] - end[i]) / dv;
            }
        }
        Ok(jac)
    };

    let (mut v, mut path, mut jac, mut fresh) = match warm {
        Some((v, jac)) => {
            let path = shoot_in(field, a, &v, 1.0, cfg)?;
            (v, path, jac, false)
        }
        None => {
            let (v, path) = chord_start(field, a, b, cfg)?;
            let jac = sensitivity(&v, &path.end().theta)?;
            (v, path, jac, true)
        }
    };
    let (mut r, mut norm) = residual_norm(&path, b, &g_target);

    let mut iter = 0;
    while iter < cfg.max_shoot_iters {
        if norm <= cfg.shoot_tol {
            return Ok((RaoSolution { distance: path.length, path, iterations: iter, residual: norm }, v, jac));
        }
        iter += 1;
        let step = jac.clone().lu().solve(&DVector::from_iterator(n, r.iter().map(|x| -x)));
        let mut accepted = None;
        if let Some(step) = step {
            let mut damping = 1.0;
            for _ in 0..30 {
                let trial: Vec<f64> = v.iter().zip(step.iter()).map(|(v, s)| v + damping * s).collect();
                match shoot_in(field, a, &trial, 1.0, cfg) {
                    Ok(p) => {
                        let (tr, tn) = residual_norm(&p, b, &g_target);
                        if tn < norm || tn <= cfg.shoot_tol {
                            accepted = Some((trial, p, tr, tn));
                            break;
                        }
                    }
                    Err(Error::BoundaryExit { .. }) => {}
                    Err(e) => return Err(e),
                }
                damping *= 0.5;
            }
        }
        match accepted {
            Some((trial, p, tr, tn)) => {
                // Broyden rank-one update: J += (Δr − J Δv) Δvᵀ / |Δv|².
                let dv = DVector::from_iterator(n, trial.iter().zip(&v).map(|(t, v)| t - v));
                let dr = DVector::from_iterator(n, tr.iter().zip(&r).map(|(t, r)| t - r));
                let denom = dv.norm_squared();
                if denom > 0.0 {
                    let correction = (&dr - &jac * &dv) * dv.transpose() / denom;
                    jac += correction;
                }
                fresh = false;
                v = trial;
                path = p;
                r = tr;
                norm = tn;
            }
            None if !fresh => {
                jac = sensitivity(&v, &path.end().theta)?;
                fresh = true;
            }
            None => return Err(Error::ShootingNonConvergence { iterations: iter, residual: norm }),
        }
    }
    if norm <= cfg.shoot_tol {
        let sol = RaoSolution { distance: path.length, path, iterations: cfg.max_shoot_iters, residual: norm };
        return Ok((sol, v, jac));
    }
    Err(Error::ShootingNonConvergence { iterations: cfg.max_shoot_iters, residual: norm })
}

/// Initial velocity along the chord, halved until the first shot stays in the region.
fn chord_start<M: MetricField + ?Sized>(
    field: &M,
    a: &[f64],
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, GeodesicPath)> {
    let chord: Vec<f64> = b.iter().zip(a).map(|(b, a)| b - a).collect();
    for k in 0..8 {
        let v: Vec<f64> = chord.iter().map(|c| c * 0.5f64.powi(k)).collect();
        match shoot_in(field, a, &v, 1.0, cfg) {
            Ok(p) => return Ok((v, p)),
            Err(Error::BoundaryExit { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ShootingNonConvergence { iterations: 0, residual: f64::INFINITY })
}

/// Geodesic chart used for distances: multinomials drop their last probability.
fn geodesic_chart(fam: &ParametricFamily, p: &ParamPoint) -> Result<(Option<ParametricFamily>, Vec<f64>)> {
    fam.check(p)?;
    match fam.kind() {
        FamilyKind::Multinomial(n) => {
            Ok((Some(ParametricFamily::multinomial_free(n)?), p.theta[..n - 1].to_vec()))
        }
        _ => Ok((None, p.theta.clone())),
    }
}

pub fn rao_distance_detailed(
    fam: &ParametricFamily,
    a: &ParamPoint,
    b: &ParamPoint,
    cfg: &SolverConfig,
) -> Result<RaoSolution> {
    let (chart, ta) = geodesic_chart(fam, a)?;
    let (_, tb) = geodesic_chart(fam, b)?;
    let family = chart.as_ref().unwrap_or(fam);
    let field = FisherField { family, quadrature: cfg.quadrature };
    solve_bvp(&field, &ta, &tb, cfg)
}

/// Length of the Fisher geodesic between `a` and `b`, in the metric's natural units.
pub fn rao_distance(fam: &ParametricFamily, a: &ParamPoint, b: &ParamPoint, cfg: &SolverConfig) -> Result<f64> {
    if a == b {
        fam.check(a)?;
        return Ok(0.0);
    }
    Ok(rao_distance_detailed(fam, a, b, cfg)?.distance)
}

/// `|∫_a^b √F(θ) dθ|` for a one-parameter family.
pub fn rao_distance_1d(fam: &ParametricFamily, a: f64, b: f64, q: &QuadratureConfig) -> Result<f64> {
    if fam.dim() != 1 {
        return Err(Error::Domain(format!("`{}` has {} parameters, expected 1", fam.name(), fam.dim())));
    }
    for t in [a, b] {
        fam.check(&ParamPoint::new(vec![t]))?;
    }
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let inner = QuadratureConfig { abs_tol: q.abs_tol * 1e-2, rel_tol: q.rel_tol * 1e-2, ..*q };
    let outer = QuadratureConfig { abs_tol: q.abs_tol.max(1e-10), rel_tol: q.rel_tol.max(1e-10), ..*q };
    integrate(
        |t| {
            let f = fisher_information(fam, &ParamPoint::new(vec![t]), &inner)?.get(0, 0);
            if !(f > 0.0) {
                return Err(Error::Domain(format!("Fisher information vanishes at {t}")));
            }
            Ok(f.sqrt())
        },
        lo,
        hi,
        &outer,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn flat_metric_has_no_christoffels() {
        let g = christoffel_of(&FlatMetric(3), &[0.3, -1.0, 2.0], &cfg()).unwrap();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(g.get(k, i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn poisson_christoffel() {
        // g = 1/λ ⇒ Γ = ½ g⁻¹ g' = ½ λ (−1/λ²) = −1/(2λ)
        let fam = ParametricFamily::poisson();
        for lambda in [0.5, 1.0, 3.0] {
            let g = christoffel(&fam, &ParamPoint::new(vec![lambda]), &cfg()).unwrap();
            assert!((g.get(0, 0, 0) + 0.5 / lambda).abs() < 1e-6, "{lambda}: {}", g.get(0, 0, 0));
        }
    }

    #[test]
    fn normal_christoffel_symmetric() {
        let fam = ParametricFamily::normal();
        let g = christoffel(&fam, &ParamPoint::new(vec![0.3, 1.7]), &cfg()).unwrap();
        for k in 0..2 {
            assert_eq!(g.get(k, 0, 1), g.get(k, 1, 0));
        }
        // Closed form for ds² = (dμ² + 2dσ²)/σ²: Γ^μ_μσ = −1/σ, Γ^σ_μμ = 1/(2σ), Γ^σ_σσ = −1/σ.
        let s = 1.7;
        assert!((g.get(0, 0, 1) + 1.0 / s).abs() < 1e-6);
        assert!((g.get(1, 0, 0) - 0.5 / s).abs() < 1e-6);
        assert!((g.get(1, 1, 1) + 1.0 / s).abs() < 1e-6);
        assert!(g.get(0, 0, 0).abs() < 1e-6 && g.get(1, 0, 1).abs() < 1e-6);
    }

    #[test]
    fn stationary_and_straight_paths() {
        let fam = ParametricFamily::poisson();
        let p = geodesic_shoot(&fam, &ParamPoint::new(vec![1.0]), &TangentVector::zeros(1), 1.0, &cfg()).unwrap();
        assert_eq!(p.length, 0.0);
        assert!(p.points.iter().all(|q| q.theta == vec![1.0]));

        let flat = shoot_in(&FlatMetric(2), &[1.0, 2.0], &[0.5, -1.0], 2.0, &cfg()).unwrap();
        let end = &flat.end().theta;
        assert!((end[0] - 2.0).abs() < 1e-12 && (end[1] - 0.0).abs() < 1e-12);
        assert!((flat.length - 2.0 * 1.25f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn poisson_geodesic_speed_is_constant() {
        let fam = ParametricFamily::poisson();
        let p = geodesic_shoot(&fam, &ParamPoint::new(vec![1.0]), &TangentVector::new(vec![2.0]), 1.0, &cfg()).unwrap();
        assert!(p.speed_variation() < 1e-5, "{}", p.speed_variation());
    }

    #[test]
    fn boundary_exit_is_reported() {
        let fam = ParametricFamily::poisson();
        let err = geodesic_shoot(&fam, &ParamPoint::new(vec![1.0]), &TangentVector::new(vec![-5.0]), 1.0, &cfg())
            .unwrap_err();
        match err {
            Error::BoundaryExit { fraction, .. } => assert!(fraction > 0.0 && fraction < 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn poisson_distances() {
        let fam = ParametricFamily::poisson();
        let d = rao_distance(&fam, &ParamPoint::new(vec![1.0]), &ParamPoint::new(vec![4.0]), &cfg()).unwrap();
        assert!((d - 2.0).abs() < 1e-4, "{d}");
        let d1 = rao_distance_1d(&fam, 1.0, 4.0, &QuadratureConfig::default()).unwrap();
        assert!((d1 - 2.0).abs() < 1e-8, "{d1}");
        assert_eq!(rao_distance(&fam, &ParamPoint::new(vec![2.0]), &ParamPoint::new(vec![2.0]), &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn bernoulli_1d_oracle() {
        let fam = ParametricFamily::bernoulli();
        let q = QuadratureConfig::default();
        assert_eq!(rao_distance_1d(&fam, 0.5, 0.5, &q).unwrap(), 0.0);
        let d = rao_distance_1d(&fam, 0.25, 0.75, &q).unwrap();
        let exact = 2.0 * (0.75f64.sqrt().asin() - 0.25f64.sqrt().asin());
        assert!((d - exact).abs() < 1e-9);
        assert!(rao_distance_1d(&ParametricFamily::normal(), 0.0, 1.0, &q).is_err());
    }

    #[test]
    fn binary_multinomial_matches_sphere_formula() {
        let fam = ParametricFamily::multinomial(2).unwrap();
        let a = ParamPoint::new(vec![0.9, 0.1]);
        let b = ParamPoint::new(vec![0.1, 0.9]);
        let d = rao_distance(&fam, &a, &b, &cfg()).unwrap();
        let bc: f64 = a.theta.iter().zip(&b.theta).map(|(p, q)| (p * q).sqrt()).sum();
        assert!((d - 2.0 * bc.acos()).abs() < 1e-4, "{d}");
    }

    #[test]
    fn config_is_validated() {
        let bad = SolverConfig { ode_steps: 8, ..cfg() };
        assert!(bad.validate().is_err());
        let bad = SolverConfig { shoot_tol: 0.0, ..cfg() };
        assert!(bad.validate().is_err());
    }
}
