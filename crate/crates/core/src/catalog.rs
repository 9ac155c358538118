//! Built-in multifunctions, scalar fields, control systems and controls,
//! addressed by id from scenario files.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::geometry::SetValue;
use crate::measure::ScalarField;
use crate::sensitivity::{ControlSignal, ControlSystem, Piece, SystemBounds};
use crate::trajectory::Trajectory;
use crate::variation::Multifunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    Multifunction,
    Field,
    System,
    Control,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub kind: EntryKind,
    pub summary: &'static str,
}

const ENTRIES: &[(&str, EntryKind, &str)] = &[
    ("section2-example", EntryKind::Multifunction, "F(t,x) = {t x} along x(t) = t on [0,1]; eta(t) = t^2/2, simple variant over X=[0,1] gives t"),
    ("constant-set", EntryKind::Multifunction, "F = [0,1] for all t, x; zero variation"),
    ("step-half", EntryKind::Multifunction, "{1_[1/2,1](t)}: unit jump at 1/2"),
    ("two-steps", EntryKind::Multifunction, "{2 1_[1/4,1] + 1_[3/4,1]}: jumps 2 and 1"),
    ("jump-at-start", EntryKind::Multifunction, "{t} with value 2 at t = 0"),
    ("jump-at-end", EntryKind::Multifunction, "{t} with value 3 at t = 1"),
    ("a-dependent", EntryKind::Multifunction, "{a t} with parameters a in {1, 2}"),
    ("pm-abs-sine", EntryKind::Multifunction, "|sin 2 pi t|, turning points 1/4, 1/2, 3/4"),
    ("pm-sawtooth", EntryKind::Multifunction, "3t - floor(3t), jumps at 1/3, 2/3, 1"),
    ("pm-zigzag", EntryKind::Multifunction, "piecewise linear 0 -> 2 -> -1 -> 1/2 with corners 0.3, 0.8"),
    ("pm-cubic-step", EntryKind::Multifunction, "8 (t - 1/2)^3 plus 1/2 after t = 0.7"),
    ("pm-cosine-drop", EntryKind::Multifunction, "cos 3 pi t minus 1 after t = 0.4"),
    ("step-field", EntryKind::Field, "m(t,x) = 1_[1/2,1](t) along x(t) = t"),
    ("t-times-x", EntryKind::Field, "m(t,x) = t x along x(t) = t, tube radius 1/2"),
    ("sine-field", EntryKind::Field, "m(t,x) = sin(2 pi t) + x^2/2 along x(t) = t, tube radius 1/2"),
    ("integrator", EntryKind::System, "x' = u, g(x) = x, x0 = 0, Omega = [-2, 2]"),
    ("decay", EntryKind::System, "x' = -x + u, g(x) = x, x0 = 0, Omega = [-2, 2]"),
    ("oscillator", EntryKind::System, "x1' = x2, x2' = -x1 + u, g(x) = x1, x0 = (1, 0), Omega = [-2, 2]"),
    ("ramp", EntryKind::Control, "u(t) = t"),
    ("tent", EntryKind::Control, "0 -> 1 -> 0 piecewise linear, peak at 1/2"),
    ("interior-pulse", EntryKind::Control, "1 on [1/4, 3/4), 0 elsewhere"),
    ("bangbang-half", EntryKind::Control, "1_[1/2,1](t)"),
    ("jump-at-end", EntryKind::Control, "0 on [0,1), u(1) = 1"),
    ("constant-half", EntryKind::Control, "u = 1/2"),
];

/// Every built-in item, in catalog order.
pub fn entries() -> Vec<CatalogEntry> {
    ENTRIES
        .iter()
        .map(|&(id, kind, summary)| CatalogEntry { id, kind, summary })
        .collect()
}

/// The catalog as an aligned text table.
pub fn catalog_table() -> String {
    let mut out = format!("{:<18} {:<14} {}\n", "id", "kind", "description");
    for e in entries() {
        let kind = serde_json::to_value(e.kind).unwrap();
        let _ = writeln!(out, "{:<18} {:<14} {}", e.id, kind.as_str().unwrap(), e.summary);
    }
    out
}

const SPAN: (f64, f64) = (0.0, 1.0);

/// A variation problem: the multifunction, the trajectory, and the fixed
/// set `X` used by the simple variant.
#[derive(Debug, Clone)]
pub struct VariationProblem {
    pub f: Multifunction,
    pub xbar: Trajectory,
    pub x_set: SetValue,
}

/// `x(t) = t` on `[0, 1]`, with its exact modulus.
pub fn diagonal() -> Trajectory {
    Trajectory::from_fn(0.0, 1.0, 256, |t| vec![t]).unwrap().with_modulus(|h| h)
}

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The five x-independent piecewise-monotone scalars with their turning
/// points and jump times.
pub fn piecewise_monotone() -> Vec<(&'static str, Scalar, Vec<f64>)> {
    vec![
        ("pm-abs-sine", Arc::new(|t: f64| (2.0 * PI * t).sin().abs()), vec![0.25, 0.5, 0.75]),
        ("pm-sawtooth", Arc::new(|t: f64| 3.0 * t - (3.0 * t).floor()), vec![1.0 / 3.0, 2.0 / 3.0, 1.0]),
        (
            "pm-zigzag",
            Arc::new(|t: f64| {
                if t <= 0.3 {
                    t / 0.3 * 2.0
                } else if t <= 0.8 {
                    2.0 - 3.0 * (t - 0.3) / 0.5
                } else {
                    -1.0 + 1.5 * (t - 0.8) / 0.2
                }
            }),
            vec![0.3, 0.8],
        ),
        (
            "pm-cubic-step",
            Arc::new(|t: f64| 8.0 * (t - 0.5).powi(3) + if t >= 0.7 { 0.5 } else { 0.0 }),
            vec![0.7],
        ),
        (
            "pm-cosine-drop",
            Arc::new(|t: f64| (3.0 * PI * t).cos() - if t >= 0.4 { 1.0 } else { 0.0 }),
            vec![1.0 / 3.0, 0.4, 2.0 / 3.0],
        ),
    ]
}

fn scalar_map(id: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static, breakpoints: Vec<f64>) -> Multifunction {
    Multifunction::from_point_map(SPAN, move |t, _| vec![f(t)])
        .with_breakpoints(breakpoints)
        .with_label(id)
}

pub fn variation_problem(id: &str) -> Result<VariationProblem> {
    let flat = || Trajectory::from_fn(0.0, 1.0, 8, |_| vec![0.0]).unwrap().with_modulus(|_| 0.0);
    let unit = SetValue::interval(0.0, 1.0);
    let (f, xbar) = match id {
        "section2-example" => (
            Multifunction::from_point_map(SPAN, |t, x| vec![t * x[0]])
                .with_tube_radius(0.1)
                .with_label(id),
            diagonal(),
        ),
        "constant-set" => (
            Multifunction::new(SPAN, |_, _, _| SetValue::interval(0.0, 1.0)).with_label(id),
            diagonal(),
        ),
        "step-half" => (scalar_map(id, |t| if t >= 0.5 { 1.0 } else { 0.0 }, vec![0.5]), flat()),
        "two-steps" => (
            scalar_map(
                id,
                |t| if t >= 0.25 { 2.0 } else { 0.0 } + if t >= 0.75 { 1.0 } else { 0.0 },
                vec![0.25, 0.75],
            ),
            flat(),
        ),
        "jump-at-start" => (scalar_map(id, |t| if t == 0.0 { 2.0 } else { t }, vec![]), flat()),
        "jump-at-end" => (scalar_map(id, |t| if t == 1.0 { 3.0 } else { t }, vec![]), flat()),
        "a-dependent" => (
            Multifunction::new(SPAN, |t, _, a| SetValue::scalar(a[0] * t))
                .with_parameters(vec![vec![1.0], vec![2.0]])
                .with_label(id),
            flat(),
        ),
        _ => match piecewise_monotone().into_iter().find(|(pid, _, _)| *pid == id) {
            Some((_, f, bps)) => (scalar_map(id, move |t| f(t), bps), flat()),
            None => return domain(format!("no multifunction '{id}' in the catalog")),
        },
    };
    Ok(VariationProblem { f, xbar, x_set: unit })
}

/// A scalar field with the trajectory it is measured along.
pub fn field(id: &str) -> Result<(ScalarField, Trajectory)> {
    let f = match id {
        "step-field" => {
            ScalarField::time_only(SPAN, 1, |t| if t >= 0.5 { 1.0 } else { 0.0 }).with_breakpoints(vec![0.5])
        }
        "t-times-x" => ScalarField::new(SPAN, 1, 1, |t, x| vec![t * x[0]], |t, _| vec![t]).with_radius(0.5),
        "sine-field" => ScalarField::new(
            SPAN,
            1,
            1,
            |t, x| vec![(2.0 * PI * t).sin() + 0.5 * x[0] * x[0]],
            |_, x| vec![x[0]],
        )
        .with_radius(0.5),
        _ => return domain(format!("no field '{id}' in the catalog")),
    };
    Ok((f.with_label(id), diagonal()))
}

fn omega() -> SetValue {
    SetValue::interval(-2.0, 2.0)
}

pub fn system(id: &str) -> Result<ControlSystem> {
    let sys = match id {
        "integrator" => ControlSystem::new(vec![0.0], omega(), |_, u| vec![u[0]], |_, _| vec![0.0], |x| x[0], |_| vec![1.0])
            .with_grad_u(|_, _| vec![1.0])
            .with_bounds(SystemBounds { c: 2.0, k: 0.0, k1: 1.0 }),
        "decay" => ControlSystem::new(
            vec![0.0],
            omega(),
            |x, u| vec![-x[0] + u[0]],
            |_, _| vec![-1.0],
            |x| x[0],
            |_| vec![1.0],
        )
        .with_grad_u(|_, _| vec![1.0])
        .with_bounds(SystemBounds { c: 2.0, k: 1.0, k1: 1.0 }),
        "oscillator" => ControlSystem::new(
            vec![1.0, 0.0],
            omega(),
            |x, u| vec![x[1], -x[0] + u[0]],
            |_, _| vec![0.0, 1.0, -1.0, 0.0],
            |x| x[0],
            |_| vec![1.0, 0.0],
        )
        .with_grad_u(|_, _| vec![0.0, 1.0])
        .with_bounds(SystemBounds {
            c: 2.0,
            k: 2f64.sqrt(),
            k1: 1.0,
        }),
        _ => return domain(format!("no system '{id}' in the catalog")),
    };
    Ok(sys.with_label(id))
}

pub fn control(id: &str) -> Result<ControlSignal> {
    let (s, e) = SPAN;
    match id {
        "ramp" => ControlSignal::from_samples(&[s, e], &[vec![0.0], vec![1.0]]),
        "tent" => ControlSignal::from_samples(&[0.0, 0.5, 1.0], &[vec![0.0], vec![1.0], vec![0.0]]),
        "interior-pulse" => ControlSignal::new(
            vec![
                Piece::constant(0.0, 0.25, vec![0.0]),
                Piece::constant(0.25, 0.75, vec![1.0]),
                Piece::constant(0.75, 1.0, vec![0.0]),
            ],
            vec![],
        ),
        "bangbang-half" => ControlSignal::step(SPAN, 0.5, 0.0, 1.0),
        "jump-at-end" => ControlSignal::constant(SPAN, vec![0.0])?.with_point(e, vec![1.0]),
        "constant-half" => ControlSignal::constant(SPAN, vec![0.5]),
        _ => domain(format!("no control '{id}' in the catalog")),
    }
}

/// Controls continuous at both endpoints.
pub const ENDPOINT_CONTINUOUS_CONTROLS: [&str; 3] = ["ramp", "tent", "interior-pulse"];
pub const SYSTEMS: [&str; 3] = ["integrator", "decay", "oscillator"];
pub const FIELDS: [&str; 3] = ["step-field", "t-times-x", "sine-field"];
