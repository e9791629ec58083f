//! The four-point viewing scene: distances, view angles, plane assignments
//! and the arcs whose lengths are reported per plane.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::conformal::{arc_length, Arc, Parametrization};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureConfig;

/// Rays shorter than this have no direction.
pub const DEGENERATE_RAY: f64 = 1e-12;
/// Orthonormality tolerance for similarity rotations.
pub const ROTATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    A0,
    B0,
    C0,
    C1,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::A0, Label::B0, Label::C0, Label::C1];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::A0 => "A0",
            Label::B0 => "B0",
            Label::C0 => "C0",
            Label::C1 => "C1",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Label::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown point label `{s}` (expected A0, B0, C0 or C1)")))
    }
}

/// A labelled point `(x, y, height)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenePoint {
    pub label: Label,
    pub coords: [f64; 3],
}

impl ScenePoint {
    pub fn new(label: Label, coords: [f64; 3]) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { point: coords.to_vec() });
        }
        Ok(Self { label, coords })
    }

    pub fn height(&self) -> f64 {
        self.coords[2]
    }

    fn vector(&self) -> Vector3<f64> {
        Vector3::from(self.coords)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scene {
    pub a0: ScenePoint,
    pub b0: ScenePoint,
    pub c0: ScenePoint,
    pub c1: ScenePoint,
}

impl Scene {
    pub fn new(a0: [f64; 3], b0: [f64; 3], c0: [f64; 3], c1: [f64; 3]) -> Result<Self> {
        Ok(Self {
            a0: ScenePoint::new(Label::A0, a0)?,
            b0: ScenePoint::new(Label::B0, b0)?,
            c0: ScenePoint::new(Label::C0, c0)?,
            c1: ScenePoint::new(Label::C1, c1)?,
        })
    }

    /// Builds a scene from exactly one point per label, in any order.
    pub fn from_points(points: &[ScenePoint]) -> Result<Self> {
        let mut slots: [Option<ScenePoint>; 4] = [None; 4];
        for p in points {
            let slot = &mut slots[p.label as usize];
            if slot.is_some() {
                return Err(Error::Domain(format!("point {} given twice", p.label)));
            }
            ScenePoint::new(p.label, p.coords)?;
            *slot = Some(*p);
        }
        let missing: Vec<&str> =
            Label::ALL.iter().zip(&slots).filter(|(_, s)| s.is_none()).map(|(l, _)| l.as_str()).collect();
        if !missing.is_empty() {
            return Err(Error::Domain(format!("missing point(s): {}", missing.join(", "))));
        }
        let [a0, b0, c0, c1] = slots.map(Option::unwrap);
        Ok(Self { a0, b0, c0, c1 })
    }

    pub fn get(&self, label: Label) -> &ScenePoint {
        match label {
            Label::A0 => &self.a0,
            Label::B0 => &self.b0,
            Label::C0 => &self.c0,
            Label::C1 => &self.c1,
        }
    }

    pub fn points(&self) -> [&ScenePoint; 4] {
        [&self.a0, &self.b0, &self.c0, &self.c1]
    }
}

fn distance(p: &ScenePoint, q: &ScenePoint) -> f64 {
    let [dx, dy, dz] = [0, 1, 2].map(|i| q.coords[i] - p.coords[i]);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceReport {
    pub a0c0: f64,
    pub a0c1: f64,
    pub b0a0: f64,
    pub b0c0: f64,
    pub b0c1: f64,
}

impl DistanceReport {
    pub const NAMES: [&'static str; 5] = ["a0c0", "a0c1", "b0a0", "b0c0", "b0c1"];

    pub fn as_array(&self) -> [f64; 5] {
        [self.a0c0, self.a0c1, self.b0a0, self.b0c0, self.b0c1]
    }
}

pub fn five_distances(s: &Scene) -> DistanceReport {
    DistanceReport {
        a0c0: distance(&s.a0, &s.c0),
        a0c1: distance(&s.a0, &s.c1),
        b0a0: distance(&s.b0, &s.a0),
        b0c0: distance(&s.b0, &s.c0),
        b0c1: distance(&s.b0, &s.c1),
    }
}

/// An unsigned angle in `[0, π]`, or the reason it is undefined.
#[derive(Debug, Clone, PartialEq)]
pub enum ViewAngle {
    Defined(f64),
    Undefined { cause: String },
}

impl ViewAngle {
    pub fn value(&self) -> Option<f64> {
        match self {
            ViewAngle::Defined(v) => Some(*v),
            ViewAngle::Undefined { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewAngleReport {
    /// At A0, between rays A0C1 and A0C0.
    pub alpha: ViewAngle,
    /// At B0, between rays B0C0 and B0C1.
    pub beta1: ViewAngle,
    /// At B0, between rays B0A0 and B0C0.
    pub beta2: ViewAngle,
}

fn angle_at(vertex: &ScenePoint, p: &ScenePoint, q: &ScenePoint) -> ViewAngle {
    let u = p.vector() - vertex.vector();
    let v = q.vector() - vertex.vector();
    for (ray, end) in [(&u, p), (&v, q)] {
        if ray.norm() <= DEGENERATE_RAY {
            return ViewAngle::Undefined { cause: format!("ray {}{} has zero length", vertex.label, end.label) };
        }
    }
    // atan2 keeps full accuracy for nearly parallel or opposite rays, where
    // arccos of the normalized dot product loses half the digits.
    ViewAngle::Defined(u.cross(&v).norm().atan2(u.dot(&v)))
}

pub fn view_angles(s: &Scene) -> ViewAngleReport {
    ViewAngleReport {
        alpha: angle_at(&s.a0, &s.c1, &s.c0),
        beta1: angle_at(&s.b0, &s.c0, &s.c1),
        beta2: angle_at(&s.b0, &s.a0, &s.c0),
    }
}

/// Whether the four points fit in one horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// Largest minus smallest height.
    pub spread: f64,
    pub tol: f64,
    /// Heights of C0 and C1; when they differ no single plane can hold the scene.
    pub c0_height: f64,
    pub c1_height: f64,
}

impl FeasibilityReport {
    pub fn witness(&self) -> bool {
        self.c0_height != self.c1_height
    }
}

pub fn single_plane_feasibility(s: &Scene, tol: f64) -> FeasibilityReport {
    let heights = s.points().map(ScenePoint::height);
    let hi = heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = heights.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = hi - lo;
    FeasibilityReport { feasible: spread <= tol, spread, tol, c0_height: s.c0.height(), c1_height: s.c1.height() }
}

/// The five complex planes, one per ray pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlaneId {
    C1,
    C2,
    C3,
    C4,
    C5,
}

impl PlaneId {
    pub const ALL: [PlaneId; 5] = [PlaneId::C1, PlaneId::C2, PlaneId::C3, PlaneId::C4, PlaneId::C5];

    /// The ray `(P, Q)` embedded in this plane.
    pub fn pair(self) -> (Label, Label) {
        match self {
            PlaneId::C1 => (Label::A0, Label::C0),
            PlaneId::C2 => (Label::A0, Label::C1),
            PlaneId::C3 => (Label::A0, Label::B0),
            PlaneId::C4 => (Label::B0, Label::C0),
            PlaneId::C5 => (Label::B0, Label::C1),
        }
    }
}

impl fmt::Display for PlaneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", *self as usize + 1)
    }
}

/// `P ↦ 0`, `Q ↦ ‖Q − P‖` in one plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Embedding {
    pub plane: PlaneId,
    pub from: Label,
    pub to: Label,
    pub from_image: Complex64,
    pub to_image: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneAssignment {
    pub embeddings: [Embedding; 5],
}

/// Embeds the ray of one plane; fails when its endpoints coincide.
pub fn embed(s: &Scene, plane: PlaneId) -> Result<Embedding> {
    let (from, to) = plane.pair();
    let d = distance(s.get(from), s.get(to));
    if d <= DEGENERATE_RAY {
        return Err(Error::DegenerateRay { plane: plane.to_string(), from: from.to_string(), to: to.to_string() });
    }
    Ok(Embedding { plane, from, to, from_image: Complex64::new(0.0, 0.0), to_image: Complex64::new(d, 0.0) })
}

pub fn plane_assignment(s: &Scene) -> Result<PlaneAssignment> {
    let [c1, c2, c3, c4, c5] = PlaneId::ALL.map(|p| embed(s, p));
    Ok(PlaneAssignment { embeddings: [c1?, c2?, c3?, c4?, c5?] })
}

/// `p ↦ scale · R p + t` applied to every point.
pub fn apply_similarity(s: &Scene, scale: f64, rotation: &Matrix3<f64>, translation: &Vector3<f64>) -> Result<Scene> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Domain(format!("similarity scale must be positive, got {scale}")));
    }
    if rotation.iter().chain(translation.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Domain("similarity has non-finite entries".into()));
    }
    let defect = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
    if defect > ROTATION_TOL {
        return Err(Error::Domain(format!("rotation is not orthonormal (defect {defect:e})")));
    }
    let map = |p: &ScenePoint| {
        let v = rotation * p.vector() * scale + translation;
        ScenePoint::new(p.label, [v.x, v.y, v.z])
    };
    Ok(Scene { a0: map(&s.a0)?, b0: map(&s.b0)?, c0: map(&s.c0)?, c1: map(&s.c1)? })
}

/// The straight arc `t ↦ t ‖Q − P‖`, `0 <= t <= 1`, in the plane's embedding.
pub fn ray_arc(s: &Scene, plane: PlaneId) -> Result<Arc> {
    let e = embed(s, plane)?;
    Arc::line(e.from_image, e.to_image)
}

pub fn ray_arc_length(s: &Scene, plane: PlaneId, rep: &Parametrization, q: &QuadratureConfig) -> Result<f64> {
    arc_length(&ray_arc(s, plane)?, rep, q)
}

/// `L(C1) … L(C5)` with one parametrization per plane, each onto `[0, 1]`.
pub fn ray_arc_lengths(s: &Scene, reps: &[Parametrization; 5], q: &QuadratureConfig) -> Result<[f64; 5]> {
    let mut out = [0.0; 5];
    for ((o, plane), rep) in out.iter_mut().zip(PlaneId::ALL).zip(reps) {
        *o = ray_arc_length(s, plane, rep, q)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn scene(a0: [f64; 3], b0: [f64; 3], c0: [f64; 3], c1: [f64; 3]) -> Scene {
        Scene::new(a0, b0, c0, c1).unwrap()
    }

    #[test]
    fn distances() {
        let s = scene([0.0; 3], [0.0, 0.0, 1.0], [3.0, 4.0, 0.0], [1.0, 1.0, 1.0]);
        assert_eq!(five_distances(&s).a0c0, 5.0);
        let z = scene([2.0; 3], [2.0; 3], [2.0; 3], [2.0; 3]);
        assert_eq!(five_distances(&z).as_array(), [0.0; 5]);
    }

    #[test]
    fn angles() {
        let s = scene([0.0; 3], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let r = view_angles(&s);
        assert!((r.alpha.value().unwrap() - FRAC_PI_2).abs() < 1e-15);
        let same = scene([0.0; 3], [0.0, -1.0, 0.0], [1.0, 2.0, 0.0], [1.0, 2.0, 0.0]);
        assert_eq!(view_angles(&same).alpha, ViewAngle::Defined(0.0));
        assert_eq!(view_angles(&same).beta1, ViewAngle::Defined(0.0));
        let collapsed = scene([0.0; 3], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0], [0.0, 1.0, 0.0]);
        let r = view_angles(&collapsed);
        assert!(matches!(&r.beta1, ViewAngle::Undefined { cause } if cause.contains("B0C0")));
        assert!(r.alpha.value().is_some());
    }

    #[test]
    fn feasibility() {
        let flat = scene([0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 1.0]);
        assert!(single_plane_feasibility(&flat, 0.0).feasible);
        let tall = scene([0.0, 0.0, 2.0], [1.0, 0.0, 3.0], [0.0, 1.0, 1.0], [1.0, 1.0, 0.0]);
        let r = single_plane_feasibility(&tall, 1e-9);
        assert!(!r.feasible);
        assert_eq!(r.spread, 3.0);
        assert!(r.witness());
        assert!(single_plane_feasibility(&tall, 3.0).feasible);
    }

    #[test]
    fn planes() {
        let s = scene([0.0; 3], [0.0, 0.0, 2.0], [3.0, 4.0, 0.0], [1.0, 2.0, 2.0]);
        let pa = plane_assignment(&s).unwrap();
        let c1 = pa.embeddings[0];
        assert_eq!((c1.plane, c1.from, c1.to), (PlaneId::C1, Label::A0, Label::C0));
        assert_eq!((c1.from_image, c1.to_image), (Complex64::new(0.0, 0.0), Complex64::new(5.0, 0.0)));
        let d = five_distances(&s).as_array();
        for (e, d) in pa.embeddings.iter().zip(d) {
            assert_eq!((e.to_image - e.from_image).norm(), d);
        }
        let clash = scene([0.0; 3], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0], [0.0, 1.0, 0.0]);
        match plane_assignment(&clash) {
            Err(Error::DegenerateRay { plane, .. }) => assert_eq!(plane, "C4"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn similarity() {
        let s = scene([0.1, 0.2, 0.3], [1.0, -1.0, 0.5], [2.0, 0.5, 1.5], [-0.5, 1.5, 2.0]);
        let same = apply_similarity(&s, 1.0, &Matrix3::identity(), &Vector3::zeros()).unwrap();
        assert_eq!(same, s);
        let big = apply_similarity(&s, 2.0, &Matrix3::identity(), &Vector3::zeros()).unwrap();
        let (d, d2) = (five_distances(&s).as_array(), five_distances(&big).as_array());
        for (a, b) in d.iter().zip(d2) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
        let (r, r2) = (view_angles(&s), view_angles(&big));
        assert!((r.beta2.value().unwrap() - r2.beta2.value().unwrap()).abs() < 1e-12);
        let shear = Matrix3::new(1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(apply_similarity(&s, 1.0, &shear, &Vector3::zeros()).is_err());
        assert!(apply_similarity(&s, 0.0, &Matrix3::identity(), &Vector3::zeros()).is_err());
    }

    #[test]
    fn arc_lengths_match_distances() {
        let s = scene([0.1, 0.2, 0.3], [1.0, -1.0, 0.5], [2.0, 0.5, 1.5], [-0.5, 1.5, 2.0]);
        let q = QuadratureConfig::default();
        let id = Parametrization::identity(0.0, 1.0).unwrap();
        let reps: [Parametrization; 5] = std::array::from_fn(|_| id.clone());
        let l = ray_arc_lengths(&s, &reps, &q).unwrap();
        for (l, d) in l.iter().zip(five_distances(&s).as_array()) {
            assert!((l - d).abs() < 1e-9);
        }
        let cubic = Parametrization::new(0.0, 1.0, |t| t * t * t, |t| 3.0 * t * t).unwrap();
        let reps: [Parametrization; 5] = std::array::from_fn(|_| cubic.clone());
        let l2 = ray_arc_lengths(&s, &reps, &q).unwrap();
        for (a, b) in l.iter().zip(l2) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn labels() {
        let pts = [
            ScenePoint::new(Label::C1, [0.0; 3]).unwrap(),
            ScenePoint::new(Label::A0, [1.0; 3]).unwrap(),
            ScenePoint::new(Label::C0, [2.0; 3]).unwrap(),
            ScenePoint::new(Label::B0, [3.0; 3]).unwrap(),
        ];
        let s = Scene::from_points(&pts).unwrap();
        assert_eq!(s.b0.coords, [3.0; 3]);
        assert!(Scene::from_points(&pts[..3]).is_err());
        let dup = [pts[0], pts[1], pts[2], pts[0]];
        assert!(Scene::from_points(&dup).is_err());
        assert_eq!("C1".parse::<Label>().unwrap(), Label::C1);
        assert!("D0".parse::<Label>().is_err());
        assert!(ScenePoint::new(Label::A0, [f64::NAN, 0.0, 0.0]).is_err());
    }
}
