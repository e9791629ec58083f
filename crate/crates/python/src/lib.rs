//! Python bindings: families and Rao distances, conformal checks, arc lengths
//! and the four-point scene.

use std::collections::HashMap;

use pyo3::create_exception;
use pyo3::prelude::*;

use raogeo::cli::{self, Projection};
use raogeo::conformal::{self, Arc, Parametrization};
use raogeo::differential::ComplexMap;
use raogeo::geodesic::{self, SolverConfig};
use raogeo::quadrature::QuadratureConfig;
use raogeo::scene3d::{self, DistanceReport};
use raogeo::statmanifold::{self, family_by_name, MetricTensor, ParamPoint, ParametricFamily};

create_exception!(pyraogeo, RaoGeoError, pyo3::exceptions::PyValueError);

fn err(e: raogeo::Error) -> PyErr {
    RaoGeoError::new_err(e.to_string())
}

fn quadrature(tol: Option<f64>) -> QuadratureConfig {
    match tol {
        Some(t) => QuadratureConfig { abs_tol: t, rel_tol: t, ..QuadratureConfig::default() },
        None => QuadratureConfig::default(),
    }
}

fn load(family: &str, theta: &[f64]) -> PyResult<(ParametricFamily, ParamPoint)> {
    let fam = family_by_name(family, theta.len()).map_err(err)?;
    let p = ParamPoint::new(theta.to_vec());
    fam.check(&p).map_err(err)?;
    Ok((fam, p))
}

fn rows(m: &MetricTensor) -> Vec<Vec<f64>> {
    m.to_rows()
}

/// Fisher information matrix of a built-in family at `theta`.
#[pyfunction]
#[pyo3(signature = (family, theta, tol=None))]
fn fisher_information(family: &str, theta: Vec<f64>, tol: Option<f64>) -> PyResult<Vec<Vec<f64>>> {
    let (fam, p) = load(family, &theta)?;
    Ok(rows(&statmanifold::fisher_information(&fam, &p, &quadrature(tol)).map_err(err)?))
}

/// Burbea-Rao order-`alpha` metric tensor at `theta`.
#[pyfunction]
#[pyo3(signature = (family, theta, alpha, tol=None))]
fn burbea_rao_tensor(family: &str, theta: Vec<f64>, alpha: f64, tol: Option<f64>) -> PyResult<Vec<Vec<f64>>> {
    let (fam, p) = load(family, &theta)?;
    Ok(rows(&statmanifold::burbea_rao_tensor(&fam, &p, alpha, &quadrature(tol)).map_err(err)?))
}

/// Multinomial α-tensor over outcome probabilities, with its numerical rank.
#[pyfunction]
fn multinomial_alpha_tensor(probs: Vec<f64>, alpha: f64) -> PyResult<(Vec<Vec<f64>>, usize)> {
    let t = statmanifold::multinomial_alpha_tensor(&ParamPoint::new(probs), alpha).map_err(err)?;
    Ok((rows(&t.tensor), t.rank))
}

/// Rao distance by geodesic shooting.
#[pyfunction]
#[pyo3(signature = (family, theta_a, theta_b, shoot_tol=None, ode_steps=None))]
fn rao_distance(
    family: &str,
    theta_a: Vec<f64>,
    theta_b: Vec<f64>,
    shoot_tol: Option<f64>,
    ode_steps: Option<usize>,
) -> PyResult<f64> {
    let (fam, a) = load(family, &theta_a)?;
    let b = ParamPoint::new(theta_b);
    let mut cfg = SolverConfig::default();
    if let Some(t) = shoot_tol {
        cfg.shoot_tol = t;
    }
    if let Some(n) = ode_steps {
        cfg.ode_steps = n;
    }
    geodesic::rao_distance(&fam, &a, &b, &cfg).map_err(err)
}

/// `|∫ sqrt(F)|` between two parameters of a one-parameter family.
#[pyfunction]
fn rao_distance_1d(family: &str, a: f64, b: f64) -> PyResult<f64> {
    let fam = family_by_name(family, 1).map_err(err)?;
    geodesic::rao_distance_1d(&fam, a, b, &QuadratureConfig::default()).map_err(err)
}

fn parse_arc(descriptor: &str) -> PyResult<Arc> {
    descriptor.parse().map_err(err)
}

/// Length of an arc descriptor such as `"circle 0 0 1 0 3.14159"`.
#[pyfunction]
fn arc_length(arc: &str) -> PyResult<f64> {
    let arc = parse_arc(arc)?;
    let (a, b) = arc.bounds();
    let rep = Parametrization::identity(a, b).map_err(err)?;
    conformal::arc_length(&arc, &rep, &QuadratureConfig::default()).map_err(err)
}

#[pyfunction]
fn tangent_angle(arc: &str, t: f64) -> PyResult<f64> {
    conformal::tangent_angle(&parse_arc(arc)?, t).map_err(err)
}

#[pyclass(get_all, frozen, skip_from_py_object)]
#[derive(Debug, Clone)]
struct AngleReport {
    theta1: f64,
    theta2: f64,
    image_theta1: f64,
    image_theta2: f64,
    source_angle: f64,
    image_angle: f64,
    difference: f64,
    passed: bool,
}

#[pymethods]
impl AngleReport {
    fn __repr__(&self) -> String {
        format!(
            "AngleReport(source_angle={}, image_angle={}, difference={:e}, passed={})",
            self.source_angle, self.image_angle, self.difference, self.passed
        )
    }
}

/// Angle between two arcs at parameter `at`, before and after a built-in map.
#[pyfunction]
#[pyo3(signature = (map_name, arc1, arc2, at, tol=1e-6))]
fn conformal_check(map_name: &str, arc1: &str, arc2: &str, at: f64, tol: f64) -> PyResult<AngleReport> {
    let f = ComplexMap::builtin(map_name).ok_or_else(|| RaoGeoError::new_err(format!("unknown map `{map_name}`")))?;
    let r = conformal::angle_preservation_check(&f, &parse_arc(arc1)?, &parse_arc(arc2)?, at, tol).map_err(err)?;
    Ok(AngleReport {
        theta1: r.theta1,
        theta2: r.theta2,
        image_theta1: r.image_theta1,
        image_theta2: r.image_theta2,
        source_angle: r.source_angle,
        image_angle: r.image_angle,
        difference: r.difference,
        passed: r.passed,
    })
}

/// The four labelled points A0, B0, C0 and C1.
#[pyclass(frozen, skip_from_py_object, name = "Scene")]
#[derive(Debug, Clone)]
struct PyScene {
    inner: scene3d::Scene,
}

#[pymethods]
impl PyScene {
    #[new]
    fn new(a0: [f64; 3], b0: [f64; 3], c0: [f64; 3], c1: [f64; 3]) -> PyResult<Self> {
        Ok(Self { inner: scene3d::Scene::new(a0, b0, c0, c1).map_err(err)? })
    }

    /// Parses the `LABEL = x y z` scene format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self { inner: cli::parse_scene(text).map_err(err)? })
    }

    fn to_text(&self) -> String {
        cli::serialize_scene(&self.inner)
    }

    fn five_distances(&self) -> HashMap<String, f64> {
        let d = scene3d::five_distances(&self.inner);
        DistanceReport::NAMES.iter().map(|n| n.to_string()).zip(d.as_array()).collect()
    }

    /// `alpha`, `beta1` and `beta2` in radians; `None` where a ray is degenerate.
    fn view_angles(&self) -> HashMap<String, Option<f64>> {
        let a = scene3d::view_angles(&self.inner);
        [("alpha", a.alpha), ("beta1", a.beta1), ("beta2", a.beta2)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.value()))
            .collect()
    }

    #[pyo3(signature = (tol=cli::DEFAULT_SCENE_TOL))]
    fn single_plane_feasible(&self, tol: f64) -> bool {
        scene3d::single_plane_feasibility(&self.inner, tol).feasible
    }

    #[pyo3(signature = (tol=cli::DEFAULT_SCENE_TOL))]
    fn report_csv(&self, tol: f64) -> PyResult<String> {
        Ok(cli::scene_report(&self.inner, tol, &QuadratureConfig::default()).map_err(err)?.to_csv())
    }

    #[pyo3(signature = (projection="xy"))]
    fn render_svg(&self, projection: &str) -> PyResult<String> {
        let p = match projection {
            "xy" => Projection::Xy,
            "xz" => Projection::Xz,
            "yz" => Projection::Yz,
            other => return Err(RaoGeoError::new_err(format!("unknown projection `{other}`"))),
        };
        Ok(cli::render_svg(&self.inner, p))
    }

    fn __repr__(&self) -> String {
        let [a, b, c, d] = self.inner.points().map(|p| p.coords);
        format!("Scene(a0={a:?}, b0={b:?}, c0={c:?}, c1={d:?})")
    }
}

#[pymodule]
fn pyraogeo(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RaoGeoError", m.py().get_type::<RaoGeoError>())?;
    m.add_class::<AngleReport>()?;
    m.add_class::<PyScene>()?;
    m.add_function(wrap_pyfunction!(fisher_information, m)?)?;
    m.add_function(wrap_pyfunction!(burbea_rao_tensor, m)?)?;
    m.add_function(wrap_pyfunction!(multinomial_alpha_tensor, m)?)?;
    m.add_function(wrap_pyfunction!(rao_distance, m)?)?;
    m.add_function(wrap_pyfunction!(rao_distance_1d, m)?)?;
    m.add_function(wrap_pyfunction!(arc_length, m)?)?;
    m.add_function(wrap_pyfunction!(tangent_angle, m)?)?;
    m.add_function(wrap_pyfunction!(conformal_check, m)?)?;
    Ok(())
}
