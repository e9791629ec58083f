use std::f64::consts::PI;

use nalgebra::{Rotation3, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;

use raogeo::cli::{format_value, parse_scene, serialize_scene, Report, ReportRow, Units};
use raogeo::conformal::{self, angle_difference, wrap_angle, Arc, Parametrization};
use raogeo::differential::{jacobian, FiniteDiffConfig, RealMap};
use raogeo::quadrature::QuadratureConfig;
use raogeo::scene3d::{self, apply_similarity, Scene};
use raogeo::statmanifold::{fisher_information, ParamPoint, ParametricFamily};

fn coord() -> impl Strategy<Value = f64> {
    -10.0..10.0f64
}

fn point3() -> impl Strategy<Value = [f64; 3]> {
    [coord(), coord(), coord()]
}

fn scene() -> impl Strategy<Value = Scene> {
    (point3(), point3(), point3(), point3()).prop_map(|(a, b, c, d)| Scene::new(a, b, c, d).unwrap())
}

fn rotation() -> impl Strategy<Value = Rotation3<f64>> {
    (point3(), 0.0..PI).prop_filter_map("axis", |(axis, angle)| {
        let v = Vector3::from(axis);
        (v.norm() > 1e-3).then(|| Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(v), angle))
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wrapped_angles_lie_in_half_open_interval(x in -1e3..1e3f64) {
        let w = wrap_angle(x);
        prop_assert!(w > -PI && w <= PI);
        let k = ((x - w) / (2.0 * PI)).round();
        prop_assert!((x - w - 2.0 * PI * k).abs() < 1e-9);
    }

    #[test]
    fn angle_difference_is_antisymmetric(a in -PI..PI, b in -PI..PI) {
        let d = angle_difference(a, b);
        let e = angle_difference(b, a);
        prop_assert!(d.abs() <= PI);
        prop_assert!(d.abs() == PI || (d + e).abs() < 1e-12);
    }

    #[test]
    fn arc_length_is_invariant_under_reparametrization(
        pts in prop::collection::vec((coord(), coord()), 2..6),
        k in 1.0..5.0f64,
    ) {
        let zs: Vec<Complex64> = pts.iter().map(|&(x, y)| Complex64::new(x, y)).collect();
        let arc = Arc::polyline(&zs).unwrap();
        let (a, b) = arc.bounds();
        let q = QuadratureConfig::default();
        let id = conformal::arc_length(&arc, &Parametrization::identity(a, b).unwrap(), &q).unwrap();
        let exact: f64 = zs.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        prop_assert!(close(id, exact, 1e-10));

        // A smooth monotone warp of [0, 1] onto [a, b].
        let span = b - a;
        let warp = Parametrization::new(
            0.0,
            1.0,
            move |s: f64| a + span * s.powf(k),
            move |s: f64| span * k * s.powf(k - 1.0),
        )
        .unwrap();
        let warped = conformal::arc_length(&arc, &warp, &q).unwrap();
        prop_assert!(close(warped, exact, 1e-7), "{} vs {}", warped, exact);
    }

    #[test]
    fn arc_length_dominates_chord(
        c in (coord(), coord()),
        r in 0.1..5.0f64,
        t0 in -PI..PI,
        sweep in 0.01..(2.0 * PI),
    ) {
        let arc = Arc::circle(Complex64::new(c.0, c.1), r, t0, t0 + sweep).unwrap();
        let (a, b) = arc.bounds();
        let len = conformal::arc_length(&arc, &Parametrization::identity(a, b).unwrap(), &QuadratureConfig::default()).unwrap();
        let chord = (arc.end().unwrap() - arc.start().unwrap()).norm();
        prop_assert!(len >= chord - 1e-10);
        prop_assert!(close(len, r * sweep, 1e-10));
    }

    #[test]
    fn scene_metrics_are_invariant_under_rigid_motion(
        s in scene(),
        rot in rotation(),
        shift in point3(),
    ) {
        let moved = apply_similarity(&s, 1.0, rot.matrix(), &Vector3::from(shift)).unwrap();
        let d0 = scene3d::five_distances(&s).as_array();
        let d1 = scene3d::five_distances(&moved).as_array();
        for (x, y) in d0.iter().zip(d1) {
            prop_assert!(close(*x, y, 1e-10));
        }
        let a0 = scene3d::view_angles(&s);
        let a1 = scene3d::view_angles(&moved);
        for (x, y) in [(a0.alpha, a1.alpha), (a0.beta1, a1.beta1), (a0.beta2, a1.beta2)] {
            if let (Some(x), Some(y)) = (x.value(), y.value()) {
                prop_assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn distances_scale_and_angles_do_not(s in scene(), k in 0.1..10.0f64) {
        let scaled = apply_similarity(&s, k, &nalgebra::Matrix3::identity(), &Vector3::zeros()).unwrap();
        let d0 = scene3d::five_distances(&s).as_array();
        let d1 = scene3d::five_distances(&scaled).as_array();
        for (x, y) in d0.iter().zip(d1) {
            prop_assert!(close(k * x, y, 1e-12));
        }
        let a0 = scene3d::view_angles(&s);
        let a1 = scene3d::view_angles(&scaled);
        for (x, y) in [(a0.alpha, a1.alpha), (a0.beta1, a1.beta1), (a0.beta2, a1.beta2)] {
            if let (Some(x), Some(y)) = (x.value(), y.value()) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn view_angles_lie_in_zero_pi(s in scene()) {
        let a = scene3d::view_angles(&s);
        for v in [a.alpha, a.beta1, a.beta2].iter().filter_map(|v| v.value()) {
            prop_assert!((0.0..=PI).contains(&v));
        }
    }

    #[test]
    fn scene_parse_serialize_is_idempotent(s in scene()) {
        let text = serialize_scene(&s);
        let once = parse_scene(&text).unwrap();
        prop_assert_eq!(&once, &s);
        prop_assert_eq!(serialize_scene(&once), text);
    }

    #[test]
    fn report_csv_round_trips(
        rows in prop::collection::vec((-1e20..1e20f64, 0usize..3, any::<bool>()), 1..12),
    ) {
        let mut report = Report::default();
        for (i, (v, u, defined)) in rows.into_iter().enumerate() {
            let units = [Units::Length, Units::Radians, Units::Dimensionless][u];
            let name = format!("q{i}");
            report.push(if defined {
                // Values are compared after the fixed-precision rendering.
                ReportRow::ok(name, format_value(v).parse().unwrap(), units)
            } else {
                ReportRow::undefined(name, units, "degenerate ray")
            });
        }
        let csv = report.to_csv();
        prop_assert!(!csv.to_lowercase().contains("nan"));
        let back = Report::from_csv(&csv).unwrap();
        prop_assert_eq!(back.to_csv(), csv);
        prop_assert_eq!(back, report);
    }

    #[test]
    fn jacobian_of_polynomial_map_matches_analytic(x in -3.0..3.0f64, y in -3.0..3.0f64) {
        let f = RealMap::new(2, 2, |v: &[f64]| vec![v[0] * v[0] * v[1], v[0] - 3.0 * v[1] * v[1] * v[1]]).unwrap();
        let j = jacobian(&f, &[x, y], &FiniteDiffConfig::richardson(2)).unwrap();
        let exact = [[2.0 * x * y, x * x], [1.0, -9.0 * y * y]];
        for (i, row) in exact.iter().enumerate() {
            for (k, e) in row.iter().enumerate() {
                prop_assert!((j.get(i, k) - e).abs() < 1e-7 * (1.0 + e.abs()));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn normal_fisher_is_symmetric_and_positive(mu in -5.0..5.0f64, sigma in 0.2..5.0f64) {
        let m = fisher_information(&ParametricFamily::normal(), &ParamPoint::new(vec![mu, sigma]), &QuadratureConfig::default()).unwrap();
        prop_assert!(m.is_symmetric(1e-9));
        prop_assert!(m.is_positive_semidefinite());
        prop_assert!(m.min_eigenvalue() > 0.0);
    }

    #[test]
    fn bernoulli_fisher_positive(p in 0.01..0.99f64) {
        let m = fisher_information(&ParametricFamily::bernoulli(), &ParamPoint::new(vec![p]), &QuadratureConfig::default()).unwrap();
        prop_assert!(m.get(0, 0) > 0.0);
        prop_assert!(close(m.get(0, 0), 1.0 / (p * (1.0 - p)), 1e-9));
    }
}
