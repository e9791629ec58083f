//! Statistical families, Fisher information and Burbea-Rao entropy metrics.
//!
//! Every tensor here is an expectation of a score outer product,
//! `G_ij = ∫ w(P) (∂_i log P)(∂_j log P) dμ`, with weight `w(P) = P` for the
//! Fisher metric and `w(P) = P^α` for the order-α entropy metric. Finite
//! supports are summed exactly, the counting measure is summed until the
//! tail is negligible, and real intervals are integrated adaptively.

mod family;
mod metric;

pub use family::{
    family_by_name, ln_factorial, parse_reals, FamilyKind, FamilySpec, ParamPoint, ParametricFamily, Support,
    TangentVector, BOUNDARY_MARGIN, SIMPLEX_TOL,
};
pub use metric::{rao_line_element, tensor_rank, MetricKind, MetricTensor};

use nalgebra::DMatrix;

use crate::differential::{jacobian, FiniteDiffConfig, RealMap};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_vec_hinted, QuadratureConfig};

/// Hard cap on the number of terms of a counting-measure series.
const MAX_SERIES_TERMS: u64 = 200_000;

fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

fn unpack(n: usize, packed: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = packed[k];
            m[(j, i)] = packed[k];
            k += 1;
        }
    }
    m
}

/// Score vector `∂ log P(x, θ) / ∂θ`, analytic when available and by
/// central differences of `log P` otherwise.
pub fn score(fam: &ParametricFamily, x: f64, theta: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; fam.dim()];
    score_into(fam, x, theta, &mut out)?;
    Ok(out)
}

fn score_into(fam: &ParametricFamily, x: f64, theta: &[f64], out: &mut [f64]) -> Result<()> {
    if fam.has_analytic_score() {
        for (i, o) in out.iter_mut().enumerate() {
            *o = fam.analytic_score(x, theta, i).expect("analytic score");
        }
        return Ok(());
    }
    let density = fam.density_fn();
    let log_density = RealMap::new(fam.dim(), 1, move |t| vec![density(x, t).ln()])?;
    let jac = jacobian(&log_density, theta, &FiniteDiffConfig::default())?;
    for (i, o) in out.iter_mut().enumerate() {
        *o = jac.get(0, i);
    }
    Ok(())
}

/// Accumulates `w(P) s sᵀ` (upper triangle, packed) at one support point.
fn outer_product_term(
    fam: &ParametricFamily,
    x: f64,
    theta: &[f64],
    weight: &dyn Fn(f64) -> f64,
    scratch: &mut [f64],
    out: &mut [f64],
) -> Result<()> {
    let density = fam.density(x, theta);
    if !(density >= 0.0) || !density.is_finite() {
        return Err(Error::NonFinite { point: vec![x] });
    }
    let w = weight(density);
    if w == 0.0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return Ok(());
    }
    score_into(fam, x, theta, scratch)?;
    let s = &*scratch;
    let n = fam.dim();
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            out[k] = w * s[i] * s[j];
            k += 1;
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { point: vec![x] });
    }
    Ok(())
}

/// `∫ w(P) (∂_i log P)(∂_j log P) dμ` over the family's support.
fn expected_outer_product(
    fam: &ParametricFamily,
    p: &ParamPoint,
    weight: &dyn Fn(f64) -> f64,
    q: &QuadratureConfig,
) -> Result<DMatrix<f64>> {
    fam.check(p)?;
    q.validate()?;
    let n = fam.dim();
    let len = packed_len(n);
    let theta = p.theta.as_slice();
    let mut scratch = vec![0.0; n];
    let packed = match fam.support() {
        Support::Finite(points) => {
            let mut acc = vec![0.0; len];
            let mut term = vec![0.0; len];
            for &x in points {
                outer_product_term(fam, x, theta, weight, &mut scratch, &mut term)?;
                acc.iter_mut().zip(&term).for_each(|(a, t)| *a += t);
            }
            acc
        }
        Support::Counting => counting_series(len, q, |k, out| {
            outer_product_term(fam, k, theta, weight, &mut scratch, out)?;
            Ok(fam.density(k, theta))
        })?,
        Support::Interval { lo, hi } => {
            let (centre, scale) = fam.quadrature_hint(theta);
            integrate_vec_hinted(
                |x, out| outer_product_term(fam, x, theta, weight, &mut scratch, out),
                len,
                *lo,
                *hi,
                centre,
                scale,
                q,
            )?
        }
    };
    Ok(unpack(n, &packed))
}

/// Sums `term(k)` over `k = 0, 1, 2, …`. `term` writes its contribution and
/// returns the probability mass at `k`; summation stops once the remaining
/// mass is below `q.tail_mass` and the latest contribution is negligible.
fn counting_series<F>(len: usize, q: &QuadratureConfig, mut term: F) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]) -> Result<f64>,
{
    let mut acc = vec![0.0; len];
    let mut buf = vec![0.0; len];
    let mut mass = 0.0;
    for k in 0..MAX_SERIES_TERMS {
        mass += term(k as f64, &mut buf)?;
        acc.iter_mut().zip(&buf).for_each(|(a, t)| *a += t);
        let largest = acc.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let latest = buf.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if 1.0 - mass < q.tail_mass && latest <= q.abs_tol.min(q.tail_mass * largest.max(1.0)) {
            return Ok(acc);
        }
    }
    let estimate = acc.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Err(Error::QuadratureNonConvergence { estimate, achieved_error: f64::INFINITY })
}

/// Total probability mass at `p`; should be 1 for a proper family.
pub fn total_mass(fam: &ParametricFamily, p: &ParamPoint, q: &QuadratureConfig) -> Result<f64> {
    fam.check(p)?;
    let theta = p.theta.as_slice();
    match fam.support() {
        Support::Finite(points) => Ok(points.iter().map(|&x| fam.density(x, theta)).sum()),
        Support::Counting => {
            // Summing the mass itself: stop when the tail bound is met.
            let mut mass = 0.0;
            for k in 0..MAX_SERIES_TERMS {
                mass += fam.density(k as f64, theta);
                if 1.0 - mass < q.tail_mass {
                    return Ok(mass);
                }
            }
            Err(Error::QuadratureNonConvergence { estimate: mass, achieved_error: 1.0 - mass })
        }
        Support::Interval { lo, hi } => {
            let (centre, scale) = fam.quadrature_hint(theta);
            let v = integrate_vec_hinted(
                |x, out| {
                    out[0] = fam.density(x, theta);
                    Ok(())
                },
                1,
                *lo,
                *hi,
                centre,
                scale,
                q,
            )?;
            Ok(v[0])
        }
    }
}

/// Fisher information `F_ij = E[(∂_i log φ)(∂_j log φ)]`.
pub fn fisher_information(fam: &ParametricFamily, p: &ParamPoint, q: &QuadratureConfig) -> Result<MetricTensor> {
    let m = expected_outer_product(fam, p, &|d| d, q)?;
    MetricTensor::new(m, MetricKind::Fisher)
}

/// Burbea-Rao order-α entropy metric `G_ij = ∫ P^α (∂_i log P)(∂_j log P) dμ`.
pub fn burbea_rao_tensor(
    fam: &ParametricFamily,
    p: &ParamPoint,
    alpha: f64,
    q: &QuadratureConfig,
) -> Result<MetricTensor> {
    if !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must be finite, got {alpha}")));
    }
    let m = expected_outer_product(fam, p, &|d| d.powf(alpha), q)?;
    MetricTensor::new(m, MetricKind::Alpha(alpha))
}

/// The multinomial order-α tensor together with its numerical rank.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTensor {
    pub tensor: MetricTensor,
    pub rank: usize,
}

/// Relative singular-value threshold used when reporting the rank of an α-tensor.
pub const RANK_TOL: f64 = 1e-12;

/// `G_ij = Σ_x P(x)^(α-2) (∂_i log P)(∂_j log P)` over the outcomes `x = 1..n`,
/// with the `n` outcome probabilities as coordinates.
pub fn multinomial_alpha_tensor(probs: &ParamPoint, alpha: f64) -> Result<AlphaTensor> {
    let p = &probs.theta;
    let n = p.len();
    if n == 0 {
        return Err(Error::Domain("need at least one outcome".into()));
    }
    if !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must be finite, got {alpha}")));
    }
    if let Some(bad) = p.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("probabilities must be strictly positive, got {bad}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::Domain(format!("probabilities sum to {total}, not 1")));
    }
    let mut g = DMatrix::zeros(n, n);
    let mut s = vec![0.0; n];
    for (x, &px) in p.iter().enumerate() {
        // ∂_i log P(x) = δ_ix / p_x
        s.iter_mut().enumerate().for_each(|(i, si)| *si = if i == x { 1.0 / px } else { 0.0 });
        let w = px.powf(alpha - 2.0);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] += w * s[i] * s[j];
            }
        }
    }
    let tensor = MetricTensor::new(g, MetricKind::Alpha(alpha))?;
    let rank = tensor_rank(&tensor, RANK_TOL);
    Ok(AlphaTensor { tensor, rank })
}
