//! Command-line front end: scene files, CSV reports and SVG projections.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::conformal::{angle_preservation_check, arc_length, Arc, Parametrization};
use crate::differential::ComplexMap;
use crate::error::{Error, Result};
use crate::geodesic::{rao_distance_detailed, SolverConfig};
use crate::quadrature::QuadratureConfig;
use crate::scene3d::{
    five_distances, ray_arc_length, single_plane_feasibility, view_angles, DistanceReport, Label, PlaneId, Scene,
    ScenePoint, ViewAngle,
};
use crate::statmanifold::{
    burbea_rao_tensor, family_by_name, fisher_information, multinomial_alpha_tensor, parse_reals, FamilyKind,
    MetricTensor, ParamPoint, ParametricFamily,
};

pub const TOL_ENV: &str = "RAOGEO_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;
pub const EXIT_CRITICAL: i32 = 4;

pub const DEFAULT_SCENE_TOL: f64 = 1e-9;
pub const DEFAULT_ANGLE_TOL: f64 = 1e-6;
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Length,
    Radians,
    Dimensionless,
}

impl Units {
    pub fn as_str(self) -> &'static str {
        match self {
            Units::Length => "length",
            Units::Radians => "radians",
            Units::Dimensionless => "dimensionless",
        }
    }
}

impl FromStr for Units {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "length" => Ok(Units::Length),
            "radians" => Ok(Units::Radians),
            "dimensionless" => Ok(Units::Dimensionless),
            other => Err(Error::Domain(format!("unknown units `{other}`"))),
        }
    }
}

/// One CSV row; `value` is `None` exactly when `status` explains why.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub quantity: String,
    pub value: Option<f64>,
    pub units: Units,
    pub status: String,
}

impl ReportRow {
    pub fn ok(quantity: impl Into<String>, value: f64, units: Units) -> Self {
        Self { quantity: quantity.into(), value: Some(value), units, status: "ok".into() }
    }

    pub fn undefined(quantity: impl Into<String>, units: Units, cause: &str) -> Self {
        Self { quantity: quantity.into(), value: None, units, status: format!("undefined: {cause}") }
    }

    fn with_status(mut self, status: &str) -> Self {
        self.status = status.into();
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

const HEADER: [&str; 4] = ["quantity", "value", "units", "status"];

impl Report {
    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn get(&self, quantity: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    pub fn value(&self, quantity: &str) -> Option<f64> {
        self.get(quantity).and_then(|r| r.value)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(HEADER).expect("in-memory write");
        for r in &self.rows {
            let value = r.value.map(format_value).unwrap_or_default();
            w.write_record([r.quantity.as_str(), &value, r.units.as_str(), &r.status]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let parse_err = |line: u64, message: String| Error::Parse { line: line as usize, column: 1, message };
        let header = rd.headers().map_err(|e| parse_err(1, e.to_string()))?;
        if header.iter().ne(HEADER) {
            return Err(parse_err(1, format!("expected header `{}`", HEADER.join(","))));
        }
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != 4 {
                return Err(parse_err(line, format!("expected 4 fields, found {}", rec.len())));
            }
            let value = match &rec[1] {
                "" => None,
                v => Some(
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| parse_err(line, format!("`{v}` is not a finite number")))?,
                ),
            };
            let units = rec[2].parse().map_err(|e: Error| parse_err(line, e.to_string()))?;
            rows.push(ReportRow { quantity: rec[0].to_string(), value, units, status: rec[3].to_string() });
        }
        Ok(Self { rows })
    }
}

/// Eleven significant digits, ties to even, written without an exponent for
/// moderate magnitudes.
pub fn format_value(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    let sci = format!("{v:.10e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..15).contains(&exp) {
        return sci;
    }
    let (sign, mantissa) = mantissa.strip_prefix('-').map_or(("", mantissa), |m| ("-", m));
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let body = if exp >= 0 {
        let split = exp as usize + 1;
        if split >= digits.len() {
            format!("{digits}{}.0", "0".repeat(split - digits.len()))
        } else {
            format!("{}.{}", &digits[..split], &digits[split..])
        }
    } else {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    };
    format!("{sign}{body}")
}

/// Parses `LABEL = x y z` lines; `#` starts a comment.
pub fn parse_scene(text: &str) -> Result<Scene> {
    let mut points: Vec<(usize, ScenePoint)> = Vec::new();
    let mut nlines = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        nlines = line;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let col = |byte: usize| raw[..byte].chars().count() + 1;
        let err = |byte: usize, message: String| Error::Parse { line, column: col(byte), message };
        let first = content.len() - content.trim_start().len();
        let Some(eq) = content.find('=') else {
            return Err(err(first, "expected `LABEL = x y z`".into()));
        };
        let label_text = content[..eq].trim();
        let label: Label = label_text.parse().map_err(|e: Error| err(first, e.to_string()))?;
        if let Some((prev, _)) = points.iter().find(|(_, p)| p.label == label) {
            return Err(err(first, format!("duplicate label {label} (first given on line {prev})")));
        }
        let rhs = &content[eq + 1..];
        let tokens: Vec<(usize, &str)> = rhs
            .split_whitespace()
            .map(|t| (eq + 1 + (t.as_ptr() as usize - rhs.as_ptr() as usize), t))
            .collect();
        if tokens.len() != 3 {
            let at = tokens.get(3).map_or(content.trim_end().len(), |t| t.0);
            return Err(err(at, format!("{label} needs 3 coordinates, found {}", tokens.len())));
        }
        let mut coords = [0.0; 3];
        for (c, &(at, tok)) in coords.iter_mut().zip(&tokens) {
            *c = tok
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(at, format!("`{tok}` is not a finite number")))?;
        }
        points.push((line, ScenePoint::new(label, coords)?));
    }
    let missing: Vec<&str> = Label::ALL
        .iter()
        .filter(|l| !points.iter().any(|(_, p)| p.label == **l))
        .map(|l| l.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Parse { line: nlines + 1, column: 1, message: format!("missing point(s): {}", missing.join(", ")) });
    }
    let pts: Vec<ScenePoint> = points.into_iter().map(|(_, p)| p).collect();
    Scene::from_points(&pts)
}

pub fn serialize_scene(s: &Scene) -> String {
    let mut out = String::new();
    for p in s.points() {
        let [x, y, z] = p.coords;
        writeln!(out, "{} = {x:?} {y:?} {z:?}", p.label).expect("string write");
    }
    out
}

fn angle_row(name: &str, a: &ViewAngle) -> ReportRow {
    match a {
        ViewAngle::Defined(v) => ReportRow::ok(name, *v, Units::Radians),
        ViewAngle::Undefined { cause } => ReportRow::undefined(name, Units::Radians, cause),
    }
}

/// Distances, view angles, height spread and identity-parametrized ray lengths.
pub fn scene_report(s: &Scene, tol: f64, q: &QuadratureConfig) -> Result<Report> {
    let mut r = Report::default();
    let d = five_distances(s);
    for (name, v) in DistanceReport::NAMES.iter().zip(d.as_array()) {
        r.push(ReportRow::ok(*name, v, Units::Length));
    }
    let a = view_angles(s);
    r.push(angle_row("alpha", &a.alpha));
    r.push(angle_row("beta1", &a.beta1));
    r.push(angle_row("beta2", &a.beta2));
    let f = single_plane_feasibility(s, tol);
    r.push(ReportRow::ok("height_spread", f.spread, Units::Length));
    let verdict = if f.feasible { "feasible" } else { "infeasible" };
    r.push(ReportRow::ok("single_plane", if f.feasible { 1.0 } else { 0.0 }, Units::Dimensionless).with_status(verdict));
    let id = Parametrization::identity(0.0, 1.0)?;
    for plane in PlaneId::ALL {
        let name = format!("arc_length_{}", plane.to_string().to_lowercase());
        match ray_arc_length(s, plane, &id, q) {
            Ok(v) => r.push(ReportRow::ok(name, v, Units::Length)),
            Err(e @ Error::DegenerateRay { .. }) => r.push(ReportRow::undefined(name, Units::Length, &e.to_string())),
            Err(e) => return Err(e),
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Projection {
    Xy,
    Xz,
    Yz,
}

impl Projection {
    fn axes(self) -> (usize, usize) {
        match self {
            Projection::Xy => (0, 1),
            Projection::Xz => (0, 2),
            Projection::Yz => (1, 2),
        }
    }
}

const SVG_SIZE: f64 = 480.0;
const SVG_MARGIN: f64 = 60.0;

/// A static projection: four labelled points, the five rays and the view angles.
pub fn render_svg(s: &Scene, projection: Projection) -> String {
    let (iu, iv) = projection.axes();
    let pts = s.points();
    let us: Vec<f64> = pts.iter().map(|p| p.coords[iu]).collect();
    let vs: Vec<f64> = pts.iter().map(|p| p.coords[iv]).collect();
    let min = |xs: &[f64]| xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |xs: &[f64]| xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (u0, v0) = (min(&us), min(&vs));
    let span = (max(&us) - u0).max(max(&vs) - v0);
    let span = if span > 0.0 { span } else { 1.0 };
    let inner = SVG_SIZE - 2.0 * SVG_MARGIN;
    let screen = |p: &ScenePoint| {
        let x = SVG_MARGIN + (p.coords[iu] - u0) / span * inner;
        let y = SVG_SIZE - SVG_MARGIN - (p.coords[iv] - v0) / span * inner;
        (x, y)
    };

    let mut out = String::new();
    let w = &mut out;
    writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">"#
    )
    .unwrap();
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for plane in PlaneId::ALL {
        let (from, to) = plane.pair();
        let (x1, y1) = screen(s.get(from));
        let (x2, y2) = screen(s.get(to));
        writeln!(
            w,
            r#"<line id="ray-{plane}" x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="steelblue" stroke-width="1.5"/>"#
        )
        .unwrap();
    }
    for p in pts {
        let (x, y) = screen(p);
        writeln!(w, r#"<circle cx="{x:.3}" cy="{y:.3}" r="4" fill="black"/>"#).unwrap();
        writeln!(w, r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="14">{}</text>"#, x + 6.0, y - 6.0, p.label)
            .unwrap();
    }
    let a = view_angles(s);
    let label = |name: &str, v: &ViewAngle| match v {
        ViewAngle::Defined(v) => format!("{name} = {} rad", format_value(*v)),
        ViewAngle::Undefined { .. } => format!("{name} undefined"),
    };
    let annotations = [
        (s.get(Label::A0), vec![label("α", &a.alpha)]),
        (s.get(Label::B0), vec![label("β1", &a.beta1), label("β2", &a.beta2)]),
    ];
    for (vertex, lines) in annotations {
        let (x, y) = screen(vertex);
        for (k, text) in lines.iter().enumerate() {
            writeln!(
                w,
                r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="11" fill="firebrick">{text}</text>"#,
                x + 6.0,
                y + 14.0 + 13.0 * k as f64
            )
            .unwrap();
        }
    }
    writeln!(w, "</svg>").unwrap();
    out
}

/// Tolerance precedence: explicit flag, then the environment, then `default`.
pub fn resolve_tol(flag: Option<f64>, env: Option<&str>, default: f64) -> Result<f64> {
    let tol = match (flag, env) {
        (Some(t), _) => t,
        (None, Some(text)) => text
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::Domain(format!("{TOL_ENV}=`{text}` is not a number")))?,
        (None, None) => default,
    };
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive and finite, got {tol}")));
    }
    Ok(tol)
}

/// A comma-separated list of reals given as one flag value.
#[derive(Debug, Clone, PartialEq)]
pub struct Reals(pub Vec<f64>);

fn parse_real_list(s: &str) -> std::result::Result<Reals, String> {
    parse_reals(s).map(Reals).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "raogeo", version, about = "Fisher-Rao distances, conformal angle checks and scene reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scene files: CSV reports and SVG projections.
    Scene {
        #[command(subcommand)]
        action: SceneCommand,
    },
    /// Rao distance between two parameter points.
    Rao(RaoArgs),
    /// Fisher information matrix at a parameter point.
    Fisher(FamilyArgs),
    /// Burbea-Rao order-α metric tensor at a parameter point.
    BurbeaRao(BurbeaRaoArgs),
    /// Arc lengths.
    Arc {
        #[command(subcommand)]
        action: ArcCommand,
    },
    /// Angle-preservation checks for built-in complex maps.
    Conformal {
        #[command(subcommand)]
        action: ConformalCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum SceneCommand {
    /// Distances, view angles, height spread and ray arc lengths as CSV.
    Report {
        scene: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Height-spread tolerance for the single-plane test.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// SVG projection of the scene.
    Render {
        scene: PathBuf,
        #[arg(long, value_enum, default_value = "xy")]
        projection: Projection,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    /// bernoulli, poisson, normal or multinomial.
    #[arg(long)]
    pub family: String,
    /// Comma-separated parameter vector.
    #[arg(long, value_parser = parse_real_list, allow_hyphen_values = true)]
    pub theta: Reals,
    /// Quadrature tolerance (absolute and relative).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RaoArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_parser = parse_real_list, allow_hyphen_values = true)]
    pub theta2: Reals,
    /// Add solver diagnostics rows.
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct BurbeaRaoArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
}

#[derive(Debug, Subcommand)]
pub enum ArcCommand {
    /// Length of `line x0 y0 x1 y1`, `circle cx cy r t0 t1` or `polyline x0 y0 ...`.
    Length {
        #[arg(long, allow_hyphen_values = true)]
        arc: String,
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ConformalCommand {
    /// Compares the angle between two arcs with the angle between their images.
    Check {
        /// identity, square, exp, reciprocal or conjugate.
        #[arg(long)]
        map: String,
        /// Two arc descriptors crossing at the shared parameter.
        #[arg(long, num_args = 1, required = true, allow_hyphen_values = true)]
        arc: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        at: f64,
        /// Angle tolerance in radians.
        #[arg(long)]
        tol: Option<f64>,
    },
}

struct Outcome {
    body: String,
    out: Option<PathBuf>,
    code: i32,
}

impl Outcome {
    fn report(r: Report) -> Self {
        Self { body: r.to_csv(), out: None, code: EXIT_OK }
    }
}

fn quadrature_config(tol: f64) -> QuadratureConfig {
    QuadratureConfig { abs_tol: tol, rel_tol: tol, ..QuadratureConfig::default() }
}

fn read_scene(path: &Path) -> Result<Scene> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))?;
    parse_scene(&text)
}

fn load_family(args: &FamilyArgs) -> Result<(ParametricFamily, ParamPoint)> {
    let fam = family_by_name(&args.family, args.theta.0.len())?;
    let p = ParamPoint::new(args.theta.0.clone());
    fam.check(&p)?;
    Ok((fam, p))
}

fn tensor_rows(r: &mut Report, prefix: &str, m: &MetricTensor) {
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            r.push(ReportRow::ok(format!("{prefix}_{}_{}", i + 1, j + 1), m.get(i, j), Units::Dimensionless));
        }
    }
}

fn dispatch(cmd: Command, env_tol: Option<&str>) -> Result<Outcome> {
    match cmd {
        Command::Scene { action: SceneCommand::Report { scene, out, tol } } => {
            let s = read_scene(&scene)?;
            let tol = resolve_tol(tol, env_tol, DEFAULT_SCENE_TOL)?;
            let r = scene_report(&s, tol, &QuadratureConfig::default())?;
            Ok(Outcome { out, ..Outcome::report(r) })
        }
        Command::Scene { action: SceneCommand::Render { scene, projection, out } } => {
            let s = read_scene(&scene)?;
            Ok(Outcome { body: render_svg(&s, projection), out, code: EXIT_OK })
        }
        Command::Rao(args) => {
            let (fam, a) = load_family(&args.family)?;
            let b = ParamPoint::new(args.theta2.0.clone());
            fam.check(&b)?;
            let tol = resolve_tol(args.family.tol, env_tol, DEFAULT_QUADRATURE_TOL)?;
            let cfg = SolverConfig { quadrature: quadrature_config(tol), ..SolverConfig::default() };
            let (distance, iterations, residual) = if a == b {
                (0.0, 0, 0.0)
            } else {
                let sol = rao_distance_detailed(&fam, &a, &b, &cfg)?;
                (sol.distance, sol.iterations, sol.residual)
            };
            let mut r = Report::default();
            r.push(ReportRow::ok("rao_distance", distance, Units::Dimensionless));
            if args.verbose {
                r.push(ReportRow::ok("shoot_iterations", iterations as f64, Units::Dimensionless));
                r.push(ReportRow::ok("shoot_residual", residual, Units::Dimensionless));
            }
            Ok(Outcome::report(r))
        }
        Command::Fisher(args) => {
            let (fam, p) = load_family(&args)?;
            let tol = resolve_tol(args.tol, env_tol, DEFAULT_QUADRATURE_TOL)?;
            let m = fisher_information(&fam, &p, &quadrature_config(tol))?;
            let mut r = Report::default();
            tensor_rows(&mut r, "fisher", &m);
            Ok(Outcome::report(r))
        }
        Command::BurbeaRao(args) => {
            let (fam, p) = load_family(&args.family)?;
            let tol = resolve_tol(args.family.tol, env_tol, DEFAULT_QUADRATURE_TOL)?;
            let mut r = Report::default();
            if matches!(fam.kind(), FamilyKind::Multinomial(_)) {
                let t = multinomial_alpha_tensor(&p, args.alpha)?;
                tensor_rows(&mut r, "burbea_rao", &t.tensor);
                r.push(ReportRow::ok("rank", t.rank as f64, Units::Dimensionless));
            } else {
                let m = burbea_rao_tensor(&fam, &p, args.alpha, &quadrature_config(tol))?;
                tensor_rows(&mut r, "burbea_rao", &m);
            }
            Ok(Outcome::report(r))
        }
        Command::Arc { action: ArcCommand::Length { arc, tol } } => {
            let arc: Arc = arc.parse()?;
            let tol = resolve_tol(tol, env_tol, DEFAULT_QUADRATURE_TOL)?;
            let (a, b) = arc.bounds();
            let length = arc_length(&arc, &Parametrization::identity(a, b)?, &quadrature_config(tol))?;
            let mut r = Report::default();
            r.push(ReportRow::ok("arc_length", length, Units::Length));
            Ok(Outcome::report(r))
        }
        Command::Conformal { action: ConformalCommand::Check { map, arc, at, tol } } => {
            let f = ComplexMap::builtin(&map).ok_or_else(|| {
                Error::Domain(format!("unknown map `{map}` (expected identity, square, exp, reciprocal or conjugate)"))
            })?;
            if arc.len() != 2 {
                return Err(Error::Domain(format!("conformal check needs exactly two --arc values, got {}", arc.len())));
            }
            let arc1: Arc = arc[0].parse()?;
            let arc2: Arc = arc[1].parse()?;
            let tol = resolve_tol(tol, env_tol, DEFAULT_ANGLE_TOL)?;
            let rep = angle_preservation_check(&f, &arc1, &arc2, at, tol)?;
            let mut r = Report::default();
            for (name, v) in [
                ("theta1", rep.theta1),
                ("theta2", rep.theta2),
                ("image_theta1", rep.image_theta1),
                ("image_theta2", rep.image_theta2),
                ("source_angle", rep.source_angle),
                ("image_angle", rep.image_angle),
                ("angle_difference", rep.difference),
            ] {
                r.push(ReportRow::ok(name, v, Units::Radians));
            }
            let verdict = if rep.passed { "pass" } else { "fail" };
            r.push(ReportRow::ok("conformal", if rep.passed { 1.0 } else { 0.0 }, Units::Dimensionless).with_status(verdict));
            let code = if rep.passed { EXIT_OK } else { EXIT_CHECK_FAILED };
            Ok(Outcome { code, ..Outcome::report(r) })
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CriticalPoint { .. } => EXIT_CRITICAL,
        _ => EXIT_ERROR,
    }
}

/// Runs the CLI with explicit arguments, environment tolerance and streams.
pub fn run<I, T>(args: I, env_tol: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, env_tol) {
        Ok(outcome) => {
            let written = match &outcome.out {
                Some(path) => std::fs::write(path, &outcome.body)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => stdout.write_all(outcome.body.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => outcome.code,
                Err(msg) => {
                    let _ = writeln!(stderr, "error: {msg}");
                    EXIT_ERROR
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point used by the binary.
pub fn main_entry() -> i32 {
    let env_tol = std::env::var(TOL_ENV).ok();
    run(std::env::args_os(), env_tol.as_deref(), &mut std::io::stdout(), &mut std::io::stderr())
}

#[cfg(test)]
mod tests {
    use super::*;

    const ORTHOGONAL: &str = "# orthogonal rays at A0\nA0 = 0 0 0\nB0 = 0 -1 0\nC0 = 1 0 0\nC1 = 0 1 0\n";

    #[test]
    fn value_formatting() {
        assert_eq!(format_value(std::f64::consts::FRAC_PI_2), "1.5707963268");
        assert_eq!(format_value(5.0), "5.0000000000");
        assert_eq!(format_value(0.0), "0.0000000000");
        assert_eq!(format_value(-0.0), "0.0000000000");
        assert_eq!(format_value(-1234.5), "-1234.5000000");
        assert_eq!(format_value(0.00012), "0.00012000000000");
        assert_eq!(format_value(123456789012.0), "123456789010.0");
        assert_eq!(format_value(1e-9), "1.0000000000e-9");
        assert_eq!(format_value(0.125e-5), "1.2500000000e-6");
    }

    #[test]
    fn scene_parsing() {
        let s = parse_scene(ORTHOGONAL).unwrap();
        assert_eq!(s.c1.coords, [0.0, 1.0, 0.0]);
        assert_eq!(parse_scene(&serialize_scene(&s)).unwrap(), s);
        let dup = "A0 = 0 0 0\nB0=1 1 1\nA0 = 2 2 2\n";
        assert!(matches!(parse_scene(dup), Err(Error::Parse { line: 3, column: 1, .. })));
        let short = "A0 = 1 2\n";
        match parse_scene(short) {
            Err(Error::Parse { line: 1, message, .. }) => assert!(message.contains("3 coordinates")),
            other => panic!("{other:?}"),
        }
        let bad = "A0 = 1 x 2\n";
        assert!(matches!(parse_scene(bad), Err(Error::Parse { line: 1, column: 8, .. })));
        assert!(matches!(parse_scene("A0 = 0 0 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_scene("  Z9 = 0 0 0\n"), Err(Error::Parse { line: 1, column: 3, .. })));
        assert!(parse_scene("A0 0 0 0\n").is_err());
    }

    #[test]
    fn report_round_trip() {
        let s = parse_scene(ORTHOGONAL).unwrap();
        let r = scene_report(&s, DEFAULT_SCENE_TOL, &QuadratureConfig::default()).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("quantity,value,units,status\n"));
        assert!(csv.contains("alpha,1.5707963268,radians,ok\n"));
        let back = Report::from_csv(&csv).unwrap();
        assert_eq!(back.to_csv(), csv);
        for (a, b) in r.rows.iter().zip(&back.rows) {
            assert_eq!((&a.quantity, a.units, &a.status), (&b.quantity, b.units, &b.status));
            let (x, y) = (a.value.unwrap(), b.value.unwrap());
            assert!((x - y).abs() <= 1e-10 * x.abs().max(1e-300));
        }
    }

    #[test]
    fn degenerate_scene_rows() {
        let s = parse_scene("A0 = 0 0 0\nB0 = 1 1 1\nC0 = 1 1 1\nC1 = 0 1 0\n").unwrap();
        let r = scene_report(&s, DEFAULT_SCENE_TOL, &QuadratureConfig::default()).unwrap();
        let beta1 = r.get("beta1").unwrap();
        assert_eq!(beta1.value, None);
        assert!(beta1.status.starts_with("undefined"));
        assert_eq!(r.get("arc_length_c4").unwrap().value, None);
        let csv = r.to_csv();
        assert!(!csv.to_lowercase().contains("nan"));
        assert_eq!(Report::from_csv(&csv).unwrap().to_csv(), csv);
    }

    #[test]
    fn svg_is_deterministic() {
        let s = parse_scene(ORTHOGONAL).unwrap();
        let a = render_svg(&s, Projection::Xy);
        assert_eq!(a, render_svg(&s, Projection::Xy));
        assert_eq!(a.matches("<line ").count(), 5);
        assert_eq!(a.matches("<circle ").count(), 4);
        assert!(a.contains("α = 1.5707963268 rad"));
        assert_ne!(a, render_svg(&s, Projection::Xz));
    }

    #[test]
    fn tolerance_precedence() {
        assert_eq!(resolve_tol(Some(1e-3), Some("1e-5"), 1e-9).unwrap(), 1e-3);
        assert_eq!(resolve_tol(None, Some("1e-5"), 1e-9).unwrap(), 1e-5);
        assert_eq!(resolve_tol(None, None, 1e-9).unwrap(), 1e-9);
        assert!(resolve_tol(None, Some("tiny"), 1e-9).is_err());
        assert!(resolve_tol(Some(-1.0), None, 1e-9).is_err());
    }

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("raogeo").chain(args.iter().copied()), None, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn commands() {
        let (code, out, _) = run_capture(&["rao", "--family", "poisson", "--theta", "1", "--theta2", "4"]);
        assert_eq!(code, EXIT_OK);
        let d = Report::from_csv(&out).unwrap().value("rao_distance").unwrap();
        assert!((d - 2.0).abs() < 1e-4);
        let (code, out, _) = run_capture(&["rao", "--family", "poisson", "--theta", "2", "--theta2", "2", "--verbose"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(Report::from_csv(&out).unwrap().value("rao_distance"), Some(0.0));
        let (code, _, err) = run_capture(&["rao", "--family", "bernoulli", "--theta", "1.0", "--theta2", "0.5"]);
        assert_eq!(code, EXIT_ERROR);
        assert!(err.contains("outside"));
        let (code, out, _) = run_capture(&["fisher", "--family", "normal", "--theta", "0,2"]);
        assert_eq!(code, EXIT_OK);
        let r = Report::from_csv(&out).unwrap();
        assert!((r.value("fisher_2_2").unwrap() - 0.5).abs() < 1e-9);
        let (code, out, _) = run_capture(&["burbea-rao", "--family", "multinomial", "--theta", "0.2,0.3,0.5", "--alpha", "2"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(Report::from_csv(&out).unwrap().value("rank"), Some(3.0));
        let (code, out, _) = run_capture(&["arc", "length", "--arc", "line 0 0 1 1"]);
        assert_eq!(code, EXIT_OK);
        assert!((Report::from_csv(&out).unwrap().value("arc_length").unwrap() - 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(run_capture(&["scene", "render", "x.txt", "--projection", "zz"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["bogus"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn conformal_exit_codes() {
        let lines = ["--arc", "line 0.5 1 1.5 1", "--arc", "line 1 0.5 1 1.5", "--at", "0.5"];
        let with = |map: &str| {
            let mut a = vec!["conformal", "check", "--map", map];
            a.extend(lines);
            run_capture(&a)
        };
        let (code, out, _) = with("square");
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("conformal,1.0000000000,dimensionless,pass"));
        let (code, out, _) = with("conjugate");
        assert_eq!(code, EXIT_CHECK_FAILED);
        let r = Report::from_csv(&out).unwrap();
        assert!((r.value("image_angle").unwrap() + std::f64::consts::FRAC_PI_2).abs() < 1e-6);
        let through_zero = ["conformal", "check", "--map", "square", "--arc", "line -1 0 1 0", "--arc", "line 0 -1 0 1", "--at", "0.5"];
        let (code, _, err) = run_capture(&through_zero);
        assert_eq!(code, EXIT_CRITICAL);
        assert!(err.contains("critical"));
    }
}
