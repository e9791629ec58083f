//! Globally adaptive Gauss-Kronrod (7/15) quadrature for vector-valued integrands.
//!
//! Error estimates follow the QUADPACK `qk15` heuristic. Infinite ranges are
//! mapped onto a finite interval by a rational substitution centred on a
//! caller-supplied location and scale.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances shared by every integration and series summation in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Remaining probability mass below which a counting-measure series is truncated.
    pub tail_mass: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_subdivisions: 400,
            tail_mass: 1e-12,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.tail_mass > 0.0) {
            return Err(Error::Domain("quadrature tolerances must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Domain("max_subdivisions must be at least 1".into()));
        }
        Ok(())
    }
}

struct Segment {
    lo: f64,
    hi: f64,
    value: Vec<f64>,
    error: f64,
}

#[allow(clippy::needless_range_loop)]
fn gauss_kronrod<F>(f: &mut F, lo: f64, hi: f64, dim: usize, buf: &mut [f64]) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(f64, &mut [f64]) -> Result<()>,
{
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut samples = vec![0.0; 15 * dim];
    let mut eval = |x: f64, slot: usize, samples: &mut [f64], buf: &mut [f64]| -> Result<()> {
        buf.iter_mut().for_each(|b| *b = 0.0);
        f(x, buf)?;
        if buf.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { point: vec![x] });
        }
        samples[slot * dim..(slot + 1) * dim].copy_from_slice(buf);
        Ok(())
    };
    eval(centre, 0, &mut samples, buf)?;
    for (j, &x) in XGK[..7].iter().enumerate() {
        let dx = half * x;
        eval(centre - dx, 1 + 2 * j, &mut samples, buf)?;
        eval(centre + dx, 2 + 2 * j, &mut samples, buf)?;
    }
    let at = |slot: usize, c: usize| samples[slot * dim + c];

    let mut kronrod = vec![0.0; dim];
    let mut worst = 0.0_f64;
    for c in 0..dim {
        let fc = at(0, c);
        let mut res_k = WGK[7] * fc;
        let mut res_g = WG[3] * fc;
        let mut res_abs = WGK[7] * fc.abs();
        for j in 0..7 {
            let (a, b) = (at(1 + 2 * j, c), at(2 + 2 * j, c));
            res_k += WGK[j] * (a + b);
            res_abs += WGK[j] * (a.abs() + b.abs());
            if j % 2 == 1 {
                res_g += WG[j / 2] * (a + b);
            }
        }
        let mean = 0.5 * res_k;
        let mut res_asc = WGK[7] * (fc - mean).abs();
        for j in 0..7 {
            let (a, b) = (at(1 + 2 * j, c), at(2 + 2 * j, c));
            res_asc += WGK[j] * ((a - mean).abs() + (b - mean).abs());
        }
        let scale = half.abs();
        let (res_k, res_g, res_abs, res_asc) =
            (res_k * half, res_g * half, res_abs * scale, res_asc * scale);
        let mut err = (res_k - res_g).abs();
        if res_asc != 0.0 && err != 0.0 {
            err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
        }
        if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * res_abs);
        }
        kronrod[c] = res_k;
        worst = worst.max(err);
    }
    Ok((kronrod, worst))
}

/// Integrates a vector-valued function over `[lo, hi]`.
///
/// Infinite endpoints are allowed; they are handled by substitution around
/// `centre` with width `scale`.
pub fn integrate_vec_hinted<F>(
    mut f: F,
    dim: usize,
    lo: f64,
    hi: f64,
    centre: f64,
    scale: f64,
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]) -> Result<()>,
{
    cfg.validate()?;
    if lo.is_nan() || hi.is_nan() || !(lo <= hi) {
        return Err(Error::Domain(format!("invalid integration range [{lo}, {hi}]")));
    }
    if lo == hi {
        return Ok(vec![0.0; dim]);
    }
    let scale = if scale.is_finite() && scale > 0.0 { scale } else { 1.0 };
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => integrate_finite(&mut f, dim, lo, hi, cfg),
        (false, false) => {
            let mut g = |t: f64, out: &mut [f64]| {
                let d = 1.0 - t * t;
                let x = centre + scale * t / d;
                f(x, out)?;
                let jac = scale * (1.0 + t * t) / (d * d);
                out.iter_mut().for_each(|v| *v *= jac);
                Ok(())
            };
            integrate_finite(&mut g, dim, -1.0, 1.0, cfg)
        }
        (true, false) => {
            let mut g = |t: f64, out: &mut [f64]| {
                let d = 1.0 - t;
                f(lo + scale * t / d, out)?;
                let jac = scale / (d * d);
                out.iter_mut().for_each(|v| *v *= jac);
                Ok(())
            };
            integrate_finite(&mut g, dim, 0.0, 1.0, cfg)
        }
        (false, true) => {
            let mut g = |t: f64, out: &mut [f64]| {
                let d = 1.0 - t;
                f(hi - scale * t / d, out)?;
                let jac = scale / (d * d);
                out.iter_mut().for_each(|v| *v *= jac);
                Ok(())
            };
            integrate_finite(&mut g, dim, 0.0, 1.0, cfg)
        }
    }
}

pub fn integrate_vec<F>(f: F, dim: usize, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]) -> Result<()>,
{
    integrate_vec_hinted(f, dim, lo, hi, 0.0, 1.0, cfg)
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F>(mut f: F, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let v = integrate_vec(
        |x, out| {
            out[0] = f(x)?;
            Ok(())
        },
        1,
        lo,
        hi,
        cfg,
    )?;
    Ok(v[0])
}

fn integrate_finite<F>(f: &mut F, dim: usize, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]) -> Result<()>,
{
    let mut buf = vec![0.0; dim];
    let (value, error) = gauss_kronrod(f, lo, hi, dim, &mut buf)?;
    let mut segments = vec![Segment { lo, hi, value, error }];

    loop {
        let mut total = vec![0.0; dim];
        let mut total_err = 0.0;
        for s in &segments {
            total.iter_mut().zip(&s.value).for_each(|(t, v)| *t += v);
            total_err += s.error;
        }
        let magnitude = total.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if total_err <= cfg.abs_tol.max(cfg.rel_tol * magnitude) {
            return Ok(total);
        }
        if segments.len() >= cfg.max_subdivisions {
            return Err(Error::QuadratureNonConvergence {
                estimate: magnitude,
                achieved_error: total_err,
            });
        }

        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        if mid <= seg.lo || mid >= seg.hi {
            return Err(Error::QuadratureNonConvergence {
                estimate: magnitude,
                achieved_error: total_err,
            });
        }
        let (v1, e1) = gauss_kronrod(f, seg.lo, mid, dim, &mut buf)?;
        let (v2, e2) = gauss_kronrod(f, mid, seg.hi, dim, &mut buf)?;
        segments.push(Segment { lo: seg.lo, hi: mid, value: v1, error: e1 });
        segments.push(Segment { lo: mid, hi: seg.hi, value: v2, error: e2 });
    }
}
