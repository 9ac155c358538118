use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::control::{delayed_control, ControlSignal};
use super::system::{
    hermite_mid, integration_grid, output_j, simulate_costate, simulate_state, spot_check_hypotheses, ControlSystem,
    HypothesisReport, SimSettings,
};
use crate::error::{domain, Error, Result};
use crate::geometry::dist;
use crate::measure::{integrate, partial_variation_measure, BvDiagnostic, MeasureLimit, MeasureSettings, ScalarField, Window};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeSide {
    Right,
    Left,
    TwoSided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensitivitySettings {
    pub sim: SimSettings,
    pub measure: MeasureSettings,
    /// Tube radius `δ'` of `m^h(t, x) = f(x, u^h(t))`.
    pub tube_radius: f64,
    /// Finite-difference steps relative to `T - S`; empty skips the oracle.
    pub fd_steps: Vec<f64>,
    /// Delays beyond `h_bar · (T - S)` get a warning.
    pub h_bar: f64,
}

impl Default for SensitivitySettings {
    fn default() -> Self {
        SensitivitySettings {
            sim: SimSettings::default(),
            measure: MeasureSettings::default(),
            tube_radius: 0.5,
            fd_steps: vec![1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0, 1.0 / 512.0],
            h_bar: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SensitivityReport {
    pub schema_version: u32,
    pub h: f64,
    pub side: DerivativeSide,
    pub j_h: f64,
    /// `-∫_{[S,T)} p_hᵀ dμ`.
    pub right_derivative: f64,
    /// `-∫_{(S,T]} p_hᵀ dμ`.
    pub left_derivative: f64,
    /// `-∫_{[S,T]} p_hᵀ dμ`, only when `u` is continuous at `S` and `T`.
    pub two_sided: Option<f64>,
    /// The requested side's value.
    pub value: f64,
    /// `p(T)ᵀ Δm(T) - p(S)ᵀ Δm(S)` from the endpoint jumps of `m^h`;
    /// this is what `right - left` should be.
    pub predicted_gap: f64,
    pub fd: Option<FdReport>,
    pub filippov_ratio: Option<f64>,
    pub bv: BvDiagnostic,
    pub hypotheses: HypothesisReport,
    pub measure: MeasureLimit,
    pub warnings: Vec<String>,
}

impl SensitivityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sensitivity report serializes")
    }
}

/// `m^h(t, x) = f(x, u^h(t))` with its state Jacobian.
pub fn delayed_field(sys: &ControlSystem, uh: &ControlSignal, tube_radius: f64) -> ScalarField {
    let (f, gx) = sys.field_handles();
    let n = sys.dim();
    let (ua, ub) = (uh.clone(), uh.clone());
    ScalarField::new(uh.span(), n, n, move |t, x| f(x, &ua.eval(t)), move |t, x| gx(x, &ub.eval(t)))
        .with_radius(tube_radius)
        .with_breakpoints(uh.breakpoints())
        .with_label(format!("{} with delayed control", sys.label))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest `|x(t) - y(t)|` over the union of both time grids.
pub fn sup_distance(x: &Trajectory, y: &Trajectory) -> f64 {
    x.times()
        .iter()
        .chain(y.times())
        .map(|&t| dist(&x.eval(t), &y.eval(t)))
        .fold(0.0, f64::max)
}

/// One-sided derivatives of `h -> J(u^h)` from the partial variation measure
/// of `m^h` along `x^h`, paired with the costate `p_h`.
pub fn sensitivity_derivative(
    sys: &ControlSystem,
    u: &ControlSignal,
    h: f64,
    side: DerivativeSide,
    settings: &SensitivitySettings,
) -> Result<SensitivityReport> {
    sys.validate(u)?;
    if !h.is_finite() {
        return domain("delay must be finite");
    }
    let continuous = u.continuous_at_endpoints();
    if side == DerivativeSide::TwoSided && !continuous {
        return Err(Error::Rejected(
            "control jumps at S or T: the endpoint atoms make the one-sided derivatives differ, so no two-sided derivative exists".into(),
        ));
    }
    let (s, e) = u.span();
    let mut warnings = Vec::new();
    if h.abs() > settings.h_bar * (e - s) {
        warnings.push(format!(
            "|h| = {} exceeds the checked neighbourhood {}",
            h.abs(),
            settings.h_bar * (e - s)
        ));
    }

    let uh = delayed_control(u, h);
    let xh = simulate_state(sys, &uh, &integration_grid(&uh, settings.sim.steps))?;
    let ph = simulate_costate(sys, &uh, &xh)?;
    let m = delayed_field(sys, &uh, settings.tube_radius);
    let measure = partial_variation_measure(&m, &xh, &settings.measure, None, &[])?;
    warnings.extend(measure.warnings.iter().cloned());

    let pair = |w| -integrate(|t| ph.eval(t), &measure.measure, w);
    let right = pair(Window::RightOpen);
    let left = pair(Window::LeftOpen);
    let two_sided = continuous.then(|| pair(Window::Closed));
    let value = match side {
        DerivativeSide::Right => right,
        DerivativeSide::Left => left,
        DerivativeSide::TwoSided => two_sided.expect("checked above"),
    };

    let (xs, xe) = (xh.eval(s), xh.eval(e));
    let jump_s: Vec<f64> = sys.f(&xs, &uh.right_limit(s)).iter().zip(sys.f(&xs, &uh.eval(s))).map(|(a, b)| a - b).collect();
    let jump_e: Vec<f64> = sys.f(&xe, &uh.eval(e)).iter().zip(sys.f(&xe, &uh.left_limit(e))).map(|(a, b)| a - b).collect();
    let predicted_gap = dot(&ph.eval(e), &jump_e) - dot(&ph.eval(s), &jump_s);

    let fd = if settings.fd_steps.is_empty() {
        None
    } else {
        let steps: Vec<f64> = settings.fd_steps.iter().map(|d| d * (e - s)).collect();
        Some(fd_oracle(sys, u, h, &steps, &settings.sim)?)
    };
    let filippov_ratio = if h == 0.0 {
        None
    } else {
        let xbar = simulate_state(sys, u, &integration_grid(u, settings.sim.steps))?;
        Some(sup_distance(&xh, &xbar) / h.abs())
    };
    let bv = m.bv_diagnostic(&xh, &settings.measure.variation)?;
    if !bv.bounded {
        warnings.push("m^h or its Jacobian failed the bounded-variation diagnostic".into());
    }
    let hypotheses = spot_check_hypotheses(sys, &uh, &xh, settings.tube_radius);
    if !hypotheses.within_declared {
        warnings.push("spot-checked growth, Jacobian or control-Lipschitz estimate exceeds the declared constant".into());
    }
    Ok(SensitivityReport {
        schema_version: 1,
        h,
        side,
        j_h: sys.g(xh.values().last().unwrap()),
        right_derivative: right,
        left_derivative: left,
        two_sided,
        value,
        predicted_gap,
        fd,
        filippov_ratio,
        bv,
        hypotheses,
        measure,
        warnings,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FdRow {
    pub step: f64,
    /// `(J(h + Δ) - J(h)) / Δ`.
    pub right: f64,
    /// `(J(h) - J(h - Δ)) / Δ`.
    pub left: f64,
    /// `(J(h + Δ) - J(h - Δ)) / 2Δ`.
    pub symmetric: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FdReport {
    pub rows: Vec<FdRow>,
    /// Richardson extrapolation from the two smallest steps: first order for
    /// the one-sided quotients, second order for the symmetric one.
    pub right_extrapolated: f64,
    pub left_extrapolated: f64,
    pub symmetric_extrapolated: f64,
    pub min_step: f64,
}

fn richardson(d1: f64, q1: f64, d2: f64, q2: f64, order: i32) -> f64 {
    let (a, b) = (d1.powi(order), d2.powi(order));
    (a * q2 - b * q1) / (a - b)
}

/// Difference quotients of `h -> J(u^h)` at `h` for each step in `steps`.
pub fn fd_oracle(sys: &ControlSystem, u: &ControlSignal, h: f64, steps: &[f64], sim: &SimSettings) -> Result<FdReport> {
    if steps.is_empty() || steps.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return domain("finite-difference steps must be positive");
    }
    let mut steps = steps.to_vec();
    steps.sort_by(|a, b| b.total_cmp(a));
    steps.dedup();
    let shifts: Vec<f64> = std::iter::once(h)
        .chain(steps.iter().flat_map(|d| [h + d, h - d]))
        .collect();
    let js = shifts
        .par_iter()
        .map(|&k| output_j(sys, &delayed_control(u, k), sim))
        .collect::<Result<Vec<f64>>>()?;
    let j0 = js[0];
    let rows: Vec<FdRow> = steps
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let (jp, jm) = (js[1 + 2 * i], js[2 + 2 * i]);
            FdRow {
                step: d,
                right: (jp - j0) / d,
                left: (j0 - jm) / d,
                symmetric: (jp - jm) / (2.0 * d),
            }
        })
        .collect();
    let last = rows.last().unwrap();
    let (r, l, c) = match rows.len() {
        1 => (last.right, last.left, last.symmetric),
        k => {
            let p = &rows[k - 2];
            (
                richardson(p.step, p.right, last.step, last.right, 1),
                richardson(p.step, p.left, last.step, last.left, 1),
                richardson(p.step, p.symmetric, last.step, last.symmetric, 2),
            )
        }
    };
    Ok(FdReport {
        min_step: last.step,
        rows,
        right_extrapolated: r,
        left_extrapolated: l,
        symmetric_extrapolated: c,
    })
}

/// How the smooth-control gradient relates to the actual derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `dJ/dh = -∫ pᵀ ∇ᵤf u̇ dt`.
    Negated,
    /// `dJ/dh = +∫ pᵀ ∇ᵤf u̇ dt`.
    AsWritten,
    /// Both signs agree with the oracle (the integral is near zero) or neither does.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothGradient {
    /// `∫_S^T p(t)ᵀ ∇ᵤf(x̄(t), ū(t)) ū̇(t) dt`.
    pub integral: f64,
    pub fd_symmetric: f64,
    pub orientation: Orientation,
    /// The integral with the sign fixed by the oracle; the integral itself when inconclusive.
    pub derivative: f64,
}

/// Composite Simpson quadrature of `pᵀ ∇ᵤf u̇` for a continuous piecewise-linear
/// control, with the sign settled against the symmetric difference quotient.
pub fn smooth_gradient(sys: &ControlSystem, u: &ControlSignal, settings: &SensitivitySettings) -> Result<SmoothGradient> {
    sys.validate(u)?;
    if !u.jump_times().is_empty() {
        return Err(Error::Rejected("smooth gradient needs a continuous control".into()));
    }
    let (s, e) = u.span();
    let n = sys.dim();
    let mdim = u.dim();
    let x = simulate_state(sys, u, &integration_grid(u, settings.sim.steps))?;
    let p = simulate_costate(sys, u, &x)?;
    let integrand = |xv: &[f64], pv: &[f64], uv: &[f64], du: &[f64]| -> Result<f64> {
        let a = sys
            .grad_u_f(xv, uv)
            .ok_or_else(|| Error::Domain("smooth gradient needs the control Jacobian of f".into()))?;
        if a.len() != n * mdim {
            return domain("control Jacobian has the wrong dimension");
        }
        Ok((0..n).map(|i| pv[i] * (0..mdim).map(|j| a[i * mdim + j] * du[j]).sum::<f64>()).sum())
    };
    let ts = x.times();
    let (xs, ps) = (x.values(), p.values());
    let mut integral = 0.0;
    for k in 0..ts.len() - 1 {
        let (t0, t1) = (ts[k], ts[k + 1]);
        let dt = t1 - t0;
        let tm = 0.5 * (t0 + t1);
        let du = u.derivative(tm);
        let (ua, um, ub) = (u.right_limit(t0), u.eval(tm), u.left_limit(t1));
        let xm = hermite_mid(&xs[k], &xs[k + 1], &sys.f(&xs[k], &ua), &sys.f(&xs[k + 1], &ub), dt);
        let pm = p.eval(tm);
        integral += dt / 6.0
            * (integrand(&xs[k], &ps[k], &ua, &du)?
                + 4.0 * integrand(&xm, &pm, &um, &du)?
                + integrand(&xs[k + 1], &ps[k + 1], &ub, &du)?);
    }
    let steps: Vec<f64> = if settings.fd_steps.is_empty() {
        vec![(e - s) / 256.0, (e - s) / 512.0]
    } else {
        settings.fd_steps.iter().map(|d| d * (e - s)).collect()
    };
    let fd = fd_oracle(sys, u, 0.0, &steps, &settings.sim)?.symmetric_extrapolated;
    let tol = 1e-3_f64.max(1e-3 * fd.abs());
    let orientation = match ((fd + integral).abs() <= tol, (fd - integral).abs() <= tol) {
        (true, false) => Orientation::Negated,
        (false, true) => Orientation::AsWritten,
        _ => Orientation::Inconclusive,
    };
    let derivative = if orientation == Orientation::Negated { -integral } else { integral };
    Ok(SmoothGradient {
        integral,
        fd_symmetric: fd,
        orientation,
        derivative,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FilippovRow {
    pub h: f64,
    pub sup_distance: f64,
    /// `sup_distance / |h|`, zero at `h = 0`.
    pub ratio: f64,
}

/// `||x^h - x̄||_∞` and its ratio to `|h|` for each delay, simulated in parallel.
pub fn filippov_check(sys: &ControlSystem, u: &ControlSignal, h_list: &[f64], sim: &SimSettings) -> Result<Vec<FilippovRow>> {
    let xbar = simulate_state(sys, u, &integration_grid(u, sim.steps))?;
    h_list
        .par_iter()
        .map(|&h| {
            let uh = delayed_control(u, h);
            let xh = simulate_state(sys, &uh, &integration_grid(&uh, sim.steps))?;
            let d = sup_distance(&xh, &xbar);
            Ok(FilippovRow {
                h,
                sup_distance: d,
                ratio: if h == 0.0 { 0.0 } else { d / h.abs() },
            })
        })
        .collect()
}

/// `max ratio / min ratio` over the rows with `h != 0`.
pub fn ratio_spread(rows: &[FilippovRow]) -> f64 {
    let r: Vec<f64> = rows.iter().filter(|r| r.h != 0.0).map(|r| r.ratio).collect();
    let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
    if r.is_empty() {
        1.0
    } else {
        hi / lo
    }
}

/// Terminal-state errors at `steps` and `2·steps` against `exact`, and their ratio.
pub fn order_ratio(sys: &ControlSystem, u: &ControlSignal, steps: usize, exact: &[f64]) -> Result<(f64, f64, f64)> {
    let coarse = simulate_state(sys, u, &integration_grid(u, steps))?;
    let fine = simulate_state(sys, u, &integration_grid(u, 2 * steps))?;
    let ec = dist(coarse.values().last().unwrap(), exact);
    let ef = dist(fine.values().last().unwrap(), exact);
    Ok((ec, ef, ec / ef))
}

/// Plot-ready trace with columns `t, x_1..x_n, p_1..p_n, u_1..u_m`.
pub fn trace_csv(x: &Trajectory, p: &Trajectory, u: &ControlSignal) -> String {
    let mut out = String::from("t");
    for (name, k) in [("x", x.dim()), ("p", p.dim()), ("u", u.dim())] {
        for i in 1..=k {
            let _ = write!(out, ",{name}_{i}");
        }
    }
    out.push('\n');
    for (k, &t) in x.times().iter().enumerate() {
        let _ = write!(out, "{t:e}");
        for v in x.values()[k].iter().chain(&p.values()[k]).chain(&u.eval(t)) {
            let _ = write!(out, ",{v:e}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SetValue;

    fn integrator(g_const: bool) -> ControlSystem {
        let sys = ControlSystem::new(
            vec![0.0],
            SetValue::interval(-2.0, 2.0),
            |_, u| u.to_vec(),
            |_, _| vec![0.0],
            move |x| if g_const { 3.0 } else { x[0] },
            move |_| vec![if g_const { 0.0 } else { 1.0 }],
        );
        sys.with_grad_u(|_, _| vec![1.0])
    }

    fn ramp() -> ControlSignal {
        ControlSignal::from_samples(&[0.0, 1.0], &[vec![0.0], vec![1.0]]).unwrap()
    }

    fn quick() -> SensitivitySettings {
        SensitivitySettings {
            sim: SimSettings { steps: 256 },
            fd_steps: vec![],
            ..Default::default()
        }
    }

    #[test]
    fn ramp_derivative_is_minus_one() {
        let r = sensitivity_derivative(&integrator(false), &ramp(), 0.0, DerivativeSide::TwoSided, &quick()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-3, "{}", r.value);
        assert!((r.right_derivative - r.left_derivative).abs() < 1e-3);
    }

    #[test]
    fn constant_cost_has_zero_derivative() {
        let r = sensitivity_derivative(&integrator(true), &ramp(), 0.0, DerivativeSide::Right, &quick()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn jump_at_the_end_splits_the_sides() {
        let u = ControlSignal::constant((0.0, 1.0), vec![0.0]).unwrap().with_point(1.0, vec![1.0]).unwrap();
        let sys = integrator(false);
        assert!(matches!(
            sensitivity_derivative(&sys, &u, 0.0, DerivativeSide::TwoSided, &quick()),
            Err(Error::Rejected(_))
        ));
        let r = sensitivity_derivative(&sys, &u, 0.0, DerivativeSide::Right, &quick()).unwrap();
        assert!(r.right_derivative.abs() < 1e-9);
        assert!((r.left_derivative + 1.0).abs() < 1e-9);
        assert!((r.right_derivative - r.left_derivative - r.predicted_gap).abs() < 1e-9);
    }

    #[test]
    fn fd_quotient_of_the_ramp() {
        let fd = fd_oracle(&integrator(false), &ramp(), 0.0, &[1e-3], &SimSettings::default()).unwrap();
        assert!((fd.rows[0].right + 0.9995).abs() < 1e-9, "{}", fd.rows[0].right);
        let fd = fd_oracle(&integrator(false), &ramp(), 0.0, &[1e-2, 5e-3], &SimSettings::default()).unwrap();
        assert!((fd.right_extrapolated + 1.0).abs() < 1e-9);
        assert!((fd.left_extrapolated + 1.0).abs() < 1e-9);
    }

    #[test]
    fn delayed_ramp_cost() {
        let j = output_j(&integrator(false), &delayed_control(&ramp(), 0.1), &SimSettings::default()).unwrap();
        assert!((j - 0.405).abs() < 1e-12);
    }

    #[test]
    fn smooth_gradient_is_negated() {
        let g = smooth_gradient(&integrator(false), &ramp(), &quick()).unwrap();
        assert!((g.integral - 1.0).abs() < 1e-9);
        assert_eq!(g.orientation, Orientation::Negated);
        let flat = ControlSignal::constant((0.0, 1.0), vec![0.5]).unwrap();
        assert_eq!(smooth_gradient(&integrator(false), &flat, &quick()).unwrap().integral, 0.0);
    }

    #[test]
    fn filippov_ramp() {
        let rows = filippov_check(&integrator(false), &ramp(), &[0.0, 0.25, 0.125], &SimSettings::default()).unwrap();
        assert_eq!(rows[0].sup_distance, 0.0);
        for r in &rows[1..] {
            assert!((r.sup_distance - (r.h - r.h * r.h / 2.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn trace_header() {
        let sys = integrator(false);
        let x = simulate_state(&sys, &ramp(), &[0.0, 0.5, 1.0]).unwrap();
        let p = simulate_costate(&sys, &ramp(), &x).unwrap();
        let csv = trace_csv(&x, &p, &ramp());
        assert!(csv.starts_with("t,x_1,p_1,u_1\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
