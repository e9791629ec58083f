use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

/// Parameters closer than this to the edge of the valid region are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

/// Tolerance on the simplex constraint of multinomial probabilities.
pub const SIMPLEX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    /// A finite list of outcomes, summed exactly.
    Finite(Vec<f64>),
    /// The non-negative integers; the series is truncated once the tail mass is negligible.
    Counting,
    /// A real interval, possibly unbounded, integrated adaptively.
    Interval { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Bernoulli,
    Poisson,
    Normal,
    /// All `n` outcome probabilities as coordinates.
    Multinomial(usize),
    /// The first `n - 1` probabilities; the last one is eliminated.
    MultinomialFree(usize),
    Custom,
}

type DensityFn = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;
type ScoreFn = dyn Fn(f64, &[f64], usize) -> f64 + Send + Sync;
type ValidFn = dyn Fn(&[f64]) -> bool + Send + Sync;
type HintFn = dyn Fn(&[f64]) -> (f64, f64) + Send + Sync;

/// A named parametric family `P(x, θ)`.
#[derive(Clone)]
pub struct ParametricFamily {
    name: String,
    dim: usize,
    support: Support,
    kind: FamilyKind,
    density: Arc<DensityFn>,
    score: Option<Arc<ScoreFn>>,
    valid: Arc<ValidFn>,
    hint: Option<Arc<HintFn>>,
}

impl fmt::Debug for ParametricFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricFamily")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("support", &self.support)
            .field("kind", &self.kind)
            .field("analytic_score", &self.score.is_some())
            .finish()
    }
}

impl ParametricFamily {
    /// A custom family. `valid` must return `true` only for parameters strictly
    /// inside the region, at least [`BOUNDARY_MARGIN`] away from its edge.
    pub fn new<D, V>(name: impl Into<String>, dim: usize, support: Support, density: D, valid: V) -> Result<Self>
    where
        D: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
        V: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::Domain("family dimension must be positive".into()));
        }
        if let Support::Interval { lo, hi } = support {
            if !(lo < hi) {
                return Err(Error::Domain(format!("empty support interval [{lo}, {hi}]")));
            }
        }
        Ok(Self {
            name: name.into(),
            dim,
            support,
            kind: FamilyKind::Custom,
            density: Arc::new(density),
            score: None,
            valid: Arc::new(valid),
            hint: None,
        })
    }

    /// Attaches an analytic score `∂ log P / ∂θ_i`.
    pub fn with_score<S>(mut self, score: S) -> Self
    where
        S: Fn(f64, &[f64], usize) -> f64 + Send + Sync + 'static,
    {
        self.score = Some(Arc::new(score));
        self
    }

    /// Drops the analytic score so that scores are taken by finite differences.
    pub fn without_score(mut self) -> Self {
        self.score = None;
        self
    }

    /// Location and width used to map an unbounded support onto a finite interval.
    pub fn with_quadrature_hint<H>(mut self, hint: H) -> Self
    where
        H: Fn(&[f64]) -> (f64, f64) + Send + Sync + 'static,
    {
        self.hint = Some(Arc::new(hint));
        self
    }

    fn with_kind(mut self, kind: FamilyKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn bernoulli() -> Self {
        Self::new(
            "bernoulli",
            1,
            Support::Finite(vec![0.0, 1.0]),
            |x, t| if x > 0.5 { t[0] } else { 1.0 - t[0] },
            |t| t[0] >= BOUNDARY_MARGIN && 1.0 - t[0] >= BOUNDARY_MARGIN,
        )
        .expect("valid built-in")
        .with_score(|x, t, _| if x > 0.5 { 1.0 / t[0] } else { -1.0 / (1.0 - t[0]) })
        .with_kind(FamilyKind::Bernoulli)
    }

    pub fn poisson() -> Self {
        Self::new(
            "poisson",
            1,
            Support::Counting,
            |k, t| {
                let lambda = t[0];
                (k * lambda.ln() - lambda - ln_factorial(k as u64)).exp()
            },
            |t| t[0] >= BOUNDARY_MARGIN && t[0].is_finite(),
        )
        .expect("valid built-in")
        .with_score(|k, t, _| k / t[0] - 1.0)
        .with_kind(FamilyKind::Poisson)
    }

    /// Univariate normal with `θ = (μ, σ)`.
    pub fn normal() -> Self {
        Self::new(
            "normal",
            2,
            Support::Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY },
            |x, t| {
                let z = (x - t[0]) / t[1];
                (-0.5 * z * z).exp() / (t[1] * (2.0 * std::f64::consts::PI).sqrt())
            },
            |t| t[0].is_finite() && t[1] >= BOUNDARY_MARGIN && t[1].is_finite(),
        )
        .expect("valid built-in")
        .with_score(|x, t, i| {
            let d = x - t[0];
            let s2 = t[1] * t[1];
            if i == 0 {
                d / s2
            } else {
                (d * d - s2) / (s2 * t[1])
            }
        })
        .with_quadrature_hint(|t| (t[0], t[1]))
        .with_kind(FamilyKind::Normal)
    }

    /// Multinomial (single draw) over `n` outcomes, coordinatised by all `n`
    /// probabilities. The simplex constraint is validated, not eliminated.
    pub fn multinomial(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("multinomial needs at least two outcomes".into()));
        }
        Ok(Self::new(
            format!("multinomial{n}"),
            n,
            Support::Finite((0..n).map(|k| k as f64).collect()),
            |x, t| t[x as usize],
            |t| t.iter().all(|p| *p >= BOUNDARY_MARGIN) && (t.iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOL,
        )?
        .with_score(|x, t, i| if x as usize == i { 1.0 / t[i] } else { 0.0 })
        .with_kind(FamilyKind::Multinomial(n)))
    }

    /// Multinomial over `n` outcomes in the `n - 1` free coordinates.
    pub fn multinomial_free(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("multinomial needs at least two outcomes".into()));
        }
        let last = n - 1;
        Ok(Self::new(
            format!("multinomial{n}-free"),
            n - 1,
            Support::Finite((0..n).map(|k| k as f64).collect()),
            move |x, t| {
                let k = x as usize;
                if k == last {
                    1.0 - t.iter().sum::<f64>()
                } else {
                    t[k]
                }
            },
            |t| t.iter().all(|p| *p >= BOUNDARY_MARGIN) && 1.0 - t.iter().sum::<f64>() >= BOUNDARY_MARGIN,
        )?
        .with_score(move |x, t, i| {
            let k = x as usize;
            if k == last {
                -1.0 / (1.0 - t.iter().sum::<f64>())
            } else if k == i {
                1.0 / t[i]
            } else {
                0.0
            }
        })
        .with_kind(FamilyKind::MultinomialFree(n)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn has_analytic_score(&self) -> bool {
        self.score.is_some()
    }

    pub fn density(&self, x: f64, theta: &[f64]) -> f64 {
        (self.density)(x, theta)
    }

    pub(crate) fn density_fn(&self) -> Arc<DensityFn> {
        Arc::clone(&self.density)
    }

    pub fn analytic_score(&self, x: f64, theta: &[f64], i: usize) -> Option<f64> {
        self.score.as_ref().map(|s| s(x, theta, i))
    }

    pub fn quadrature_hint(&self, theta: &[f64]) -> (f64, f64) {
        self.hint.as_ref().map_or((0.0, 1.0), |h| h(theta))
    }

    pub fn is_valid(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim && theta.iter().all(|v| v.is_finite()) && (self.valid)(theta)
    }

    /// Checks dimension and region membership of a parameter point.
    pub fn check(&self, p: &ParamPoint) -> Result<()> {
        if p.theta.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.theta.len() });
        }
        if !self.is_valid(&p.theta) {
            return Err(Error::OutsideRegion { family: self.name.clone(), theta: p.theta.clone() });
        }
        Ok(())
    }
}

/// A point `Θ = (θ_1, …, θ_n)` of the parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint {
    pub theta: Vec<f64>,
}

impl ParamPoint {
    pub fn new(theta: impl Into<Vec<f64>>) -> Self {
        Self { theta: theta.into() }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }
}

impl From<Vec<f64>> for ParamPoint {
    fn from(theta: Vec<f64>) -> Self {
        Self { theta }
    }
}

/// A displacement `dΘ` at a parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub dtheta: Vec<f64>,
}

impl TangentVector {
    pub fn new(dtheta: impl Into<Vec<f64>>) -> Self {
        Self { dtheta: dtheta.into() }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dtheta: vec![0.0; dim] }
    }
}

impl From<Vec<f64>> for TangentVector {
    fn from(dtheta: Vec<f64>) -> Self {
        Self { dtheta }
    }
}

/// `family=<name>; theta=<comma-separated reals>`
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub family: String,
    pub theta: Vec<f64>,
}

impl FamilySpec {
    /// Builds the named built-in family. `multinomial` takes its outcome count from `theta`.
    pub fn build(&self) -> Result<(ParametricFamily, ParamPoint)> {
        let fam = family_by_name(&self.family, self.theta.len())?;
        let point = ParamPoint::new(self.theta.clone());
        fam.check(&point)?;
        Ok((fam, point))
    }
}

pub fn family_by_name(name: &str, dim_hint: usize) -> Result<ParametricFamily> {
    match name.trim().to_ascii_lowercase().as_str() {
        "bernoulli" => Ok(ParametricFamily::bernoulli()),
        "poisson" => Ok(ParametricFamily::poisson()),
        "normal" | "gaussian" => Ok(ParametricFamily::normal()),
        "multinomial" => ParametricFamily::multinomial(dim_hint),
        other => Err(Error::Domain(format!(
            "unknown family `{other}` (expected bernoulli, poisson, normal or multinomial)"
        ))),
    }
}

pub fn parse_reals(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Domain(format!("`{s}` is not a finite real number")))
        })
        .collect()
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut family = None;
        let mut theta = None;
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Domain(format!("expected key=value, got `{part}`")))?;
            match key.trim() {
                "family" => family = Some(value.trim().to_string()),
                "theta" => theta = Some(parse_reals(value)?),
                other => return Err(Error::Domain(format!("unknown key `{other}` in family spec"))),
            }
        }
        Ok(Self {
            family: family.ok_or_else(|| Error::Domain("family spec is missing `family=`".into()))?,
            theta: theta.ok_or_else(|| Error::Domain("family spec is missing `theta=`".into()))?,
        })
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let theta: Vec<String> = self.theta.iter().map(|v| v.to_string()).collect();
        write!(f, "family={}; theta={}", self.family, theta.join(","))
    }
}

const LN_FACTORIAL_TABLE: usize = 1024;

/// `ln k!`, tabulated for small `k` and by Stirling's series beyond.
pub fn ln_factorial(k: u64) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACTORIAL_TABLE);
        let mut acc = 0.0;
        t.push(0.0);
        for i in 1..LN_FACTORIAL_TABLE {
            acc += (i as f64).ln();
            t.push(acc);
        }
        t
    });
    if (k as usize) < LN_FACTORIAL_TABLE {
        return table[k as usize];
    }
    let n = k as f64 + 1.0;
    let inv = 1.0 / n;
    (n - 0.5) * n.ln() - n + 0.5 * (2.0 * std::f64::consts::PI).ln() + inv / 12.0 - inv.powi(3) / 360.0
        + inv.powi(5) / 1260.0
}
