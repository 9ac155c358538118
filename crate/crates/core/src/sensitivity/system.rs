use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::control::ControlSignal;
use crate::error::{domain, Error, Result};
use crate::geometry::{norm, SetValue};
use crate::trajectory::Trajectory;

pub type VecField = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
pub type Terminal = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type TerminalGrad = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Declared constants of the standing hypotheses: growth `|f(x,u)| <= c(1 + |x|)`,
/// `|∇ₓf| <= k`, and the `u`-Lipschitz constant `k1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemBounds {
    pub c: f64,
    pub k: f64,
    pub k1: f64,
}

impl Default for SystemBounds {
    fn default() -> Self {
        SystemBounds {
            c: f64::INFINITY,
            k: f64::INFINITY,
            k1: f64::INFINITY,
        }
    }
}

/// `ẋ = f(x, u)`, `x(S) = x0`, cost `g(x(T))`.
///
/// Jacobians are row-major: `∇ₓf` is `n × n`, `∇ᵤf` is `n × m`.
#[derive(Clone)]
pub struct ControlSystem {
    f: VecField,
    grad_x_f: VecField,
    grad_u_f: Option<VecField>,
    g: Terminal,
    grad_g: TerminalGrad,
    pub x0: Vec<f64>,
    pub omega: SetValue,
    pub bounds: SystemBounds,
    pub label: String,
}

impl fmt::Debug for ControlSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlSystem")
            .field("label", &self.label)
            .field("x0", &self.x0)
            .field("omega", &self.omega)
            .field("bounds", &self.bounds)
            .finish()
    }
}

impl ControlSystem {
    pub fn new(
        x0: Vec<f64>,
        omega: SetValue,
        f: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        grad_x_f: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        g: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad_g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        ControlSystem {
            f: Arc::new(f),
            grad_x_f: Arc::new(grad_x_f),
            grad_u_f: None,
            g: Arc::new(g),
            grad_g: Arc::new(grad_g),
            x0,
            omega,
            bounds: SystemBounds::default(),
            label: String::from("anonymous"),
        }
    }

    pub fn with_grad_u(mut self, grad_u_f: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.grad_u_f = Some(Arc::new(grad_u_f));
        self
    }

    pub fn with_bounds(mut self, bounds: SystemBounds) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn f(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        (self.f)(x, u)
    }

    pub fn grad_x_f(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        (self.grad_x_f)(x, u)
    }

    pub fn grad_u_f(&self, x: &[f64], u: &[f64]) -> Option<Vec<f64>> {
        self.grad_u_f.as_ref().map(|g| g(x, u))
    }

    pub fn g(&self, x: &[f64]) -> f64 {
        (self.g)(x)
    }

    pub fn grad_g(&self, x: &[f64]) -> Vec<f64> {
        (self.grad_g)(x)
    }

    /// Shared handles for building `m(t, x) = f(x, u(t))`.
    pub(crate) fn field_handles(&self) -> (VecField, VecField) {
        (self.f.clone(), self.grad_x_f.clone())
    }

    /// Checks dimensions and that the control takes values in `Ω`.
    pub fn validate(&self, u: &ControlSignal) -> Result<()> {
        let n = self.dim();
        if n == 0 || self.x0.iter().any(|v| !v.is_finite()) {
            return domain("initial state must be a nonempty finite vector");
        }
        if self.omega.dim() != u.dim() {
            return domain(format!(
                "control dimension {} differs from the admissible set's {}",
                u.dim(),
                self.omega.dim()
            ));
        }
        u.check_values_in(&self.omega)?;
        let u0 = u.eval(u.span().0);
        if self.f(&self.x0, &u0).len() != n || self.grad_x_f(&self.x0, &u0).len() != n * n {
            return domain("f or its state Jacobian has the wrong dimension");
        }
        if self.grad_g(&self.x0).len() != n {
            return domain("cost gradient has the wrong dimension");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimSettings {
    /// Uniform steps before breakpoints are merged in.
    pub steps: usize,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings { steps: 2048 }
    }
}

/// `steps` uniform cells on `[S, T]` merged with the control's breakpoints,
/// so no step straddles a jump or kink.
pub fn integration_grid(u: &ControlSignal, steps: usize) -> Vec<f64> {
    let (s, e) = u.span();
    let steps = steps.max(1);
    let mut g: Vec<f64> = (0..=steps)
        .map(|i| if i == steps { e } else { s + (e - s) * (i as f64 / steps as f64) })
        .collect();
    g.extend(u.breakpoints());
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn axpy(x: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(xi, ki)| xi + a * ki).collect()
}

fn finite_or_blow_up(t: f64, v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|z| z.is_finite()) {
        Ok(())
    } else {
        Err(Error::BlowUp { t, what: what.to_string() })
    }
}

/// Controls used by the three RK4 stage times of a step: `u(t_k^+)`, `u(mid)`, `u(t_{k+1}^-)`.
fn stage_controls(u: &ControlSignal, t0: f64, t1: f64) -> [Vec<f64>; 3] {
    [u.right_limit(t0), u.right_limit(0.5 * (t0 + t1)), u.left_limit(t1)]
}

/// Classical RK4 for `ẋ = f(x, u(t))` on `grid`.
pub fn simulate_state(sys: &ControlSystem, u: &ControlSignal, grid: &[f64]) -> Result<Trajectory> {
    sys.validate(u)?;
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return domain("integration grid must be strictly increasing");
    }
    let mut x = sys.x0.clone();
    let mut values = vec![x.clone()];
    for w in grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let dt = t1 - t0;
        let [ua, um, ub] = stage_controls(u, t0, t1);
        let k1 = sys.f(&x, &ua);
        let k2 = sys.f(&axpy(&x, dt / 2.0, &k1), &um);
        let k3 = sys.f(&axpy(&x, dt / 2.0, &k2), &um);
        let k4 = sys.f(&axpy(&x, dt, &k3), &ub);
        x = (0..x.len())
            .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        finite_or_blow_up(t1, &x, "state")?;
        values.push(x.clone());
    }
    Trajectory::new(grid.to_vec(), values)
}

/// `Aᵀ p` for row-major `A` (`n × n`).
fn transpose_apply(a: &[f64], p: &[f64]) -> Vec<f64> {
    let n = p.len();
    (0..n).map(|j| (0..n).map(|i| a[i * n + j] * p[i]).sum()).collect()
}

/// Cubic Hermite midpoint of a step from the end values and slopes.
pub(crate) fn hermite_mid(x0: &[f64], x1: &[f64], f0: &[f64], f1: &[f64], dt: f64) -> Vec<f64> {
    (0..x0.len())
        .map(|i| 0.5 * (x0[i] + x1[i]) + dt / 8.0 * (f0[i] - f1[i]))
        .collect()
}

/// Backward RK4 for `-ṗ = ∇ₓf(x, u)ᵀ p`, `p(T) = ∇g(x(T))`, on the grid of `x`.
pub fn simulate_costate(sys: &ControlSystem, u: &ControlSignal, x: &Trajectory) -> Result<Trajectory> {
    let times = x.times();
    let xs = x.values();
    let n = sys.dim();
    let last = xs.last().unwrap();
    let mut p = sys.grad_g(last);
    if p.len() != n {
        return domain("cost gradient has the wrong dimension");
    }
    finite_or_blow_up(times[times.len() - 1], &p, "costate")?;
    let mut out = vec![p.clone()];
    for k in (0..times.len() - 1).rev() {
        let (t0, t1) = (times[k], times[k + 1]);
        let dt = t1 - t0;
        let [ua, um, ub] = stage_controls(u, t0, t1);
        let f0 = sys.f(&xs[k], &ua);
        let f1 = sys.f(&xs[k + 1], &ub);
        let xm = hermite_mid(&xs[k], &xs[k + 1], &f0, &f1, dt);
        let a1 = sys.grad_x_f(&xs[k + 1], &ub);
        let am = sys.grad_x_f(&xm, &um);
        let a0 = sys.grad_x_f(&xs[k], &ua);
        // backward in time: dp/ds = Aᵀ p with s = T - t
        let k1 = transpose_apply(&a1, &p);
        let k2 = transpose_apply(&am, &axpy(&p, dt / 2.0, &k1));
        let k3 = transpose_apply(&am, &axpy(&p, dt / 2.0, &k2));
        let k4 = transpose_apply(&a0, &axpy(&p, dt, &k3));
        p = (0..n)
            .map(|i| p[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        finite_or_blow_up(t0, &p, "costate")?;
        out.push(p.clone());
    }
    out.reverse();
    Trajectory::new(times.to_vec(), out)
}

/// `J(u) = g(x(T))`.
pub fn output_j(sys: &ControlSystem, u: &ControlSignal, settings: &SimSettings) -> Result<f64> {
    let x = simulate_state(sys, u, &integration_grid(u, settings.steps))?;
    Ok(sys.g(x.values().last().unwrap()))
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub growth_estimate: f64,
    pub jacobian_estimate: f64,
    pub control_lipschitz_estimate: f64,
    pub within_declared: bool,
}

/// Spot-checks the declared growth, Jacobian and `u`-Lipschitz constants
/// along `x` and a band of radius `radius` around it.
pub fn spot_check_hypotheses(sys: &ControlSystem, u: &ControlSignal, x: &Trajectory, radius: f64) -> HypothesisReport {
    let (s, e) = u.span();
    let n = sys.dim();
    let mut growth: f64 = 0.0;
    let mut jac: f64 = 0.0;
    let mut lip: f64 = 0.0;
    for i in 0..=32 {
        let t = s + (e - s) * i as f64 / 32.0;
        let xc = x.eval(t);
        let uc = u.eval(t);
        for k in 0..=2 * n {
            let mut y = xc.clone();
            if k > 0 {
                y[(k - 1) / 2] += if k % 2 == 1 { radius } else { -radius };
            }
            let fv = sys.f(&y, &uc);
            growth = growth.max(norm(&fv) / (1.0 + norm(&y)));
            jac = jac.max(norm(&sys.grad_x_f(&y, &uc)));
            for v in [u.left_limit(t), u.right_limit(t)] {
                let du = crate::geometry::dist(&v, &uc);
                if du > 0.0 {
                    lip = lip.max(crate::geometry::dist(&sys.f(&y, &v), &fv) / du);
                }
            }
        }
    }
    let b = sys.bounds;
    HypothesisReport {
        growth_estimate: growth,
        jacobian_estimate: jac,
        control_lipschitz_estimate: lip,
        within_declared: growth <= b.c * (1.0 + 1e-12) && jac <= b.k * (1.0 + 1e-12) && lip <= b.k1 * (1.0 + 1e-12),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrator() -> ControlSystem {
        ControlSystem::new(vec![0.0], SetValue::interval(-10.0, 10.0), |_, u| u.to_vec(), |_, _| vec![0.0], |x| x[0], |_| vec![1.0])
    }

    fn decay() -> ControlSystem {
        ControlSystem::new(
            vec![0.0],
            SetValue::interval(-10.0, 10.0),
            |x, u| vec![-x[0] + u[0]],
            |_, _| vec![-1.0],
            |x| x[0],
            |_| vec![1.0],
        )
    }

    fn ramp() -> ControlSignal {
        ControlSignal::from_samples(&[0.0, 1.0], &[vec![0.0], vec![1.0]]).unwrap()
    }

    #[test]
    fn ramp_integrates_to_one_half() {
        let x = simulate_state(&integrator(), &ramp(), &integration_grid(&ramp(), 16)).unwrap();
        assert!((x.values().last().unwrap()[0] - 0.5).abs() < 1e-8);
        assert!((output_j(&integrator(), &ramp(), &SimSettings::default()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_dynamics_stay_put() {
        let sys = ControlSystem::new(vec![2.0], SetValue::interval(0.0, 1.0), |_, _| vec![0.0], |_, _| vec![0.0], |x| x[0], |_| vec![1.0]);
        let x = simulate_state(&sys, &ramp(), &integration_grid(&ramp(), 8)).unwrap();
        assert!(x.values().iter().all(|v| v == &vec![2.0]));
        assert_eq!(output_j(&sys, &ramp(), &SimSettings::default()).unwrap(), 2.0);
    }

    #[test]
    fn decay_matches_closed_form() {
        let one = ControlSignal::constant((0.0, 1.0), vec![1.0]).unwrap();
        let grid = integration_grid(&one, 64);
        let x = simulate_state(&decay(), &one, &grid).unwrap();
        for (t, v) in x.times().iter().zip(x.values()) {
            assert!((v[0] - (1.0 - (-t).exp())).abs() < 1e-6);
        }
        let p = simulate_costate(&decay(), &one, &x).unwrap();
        for (t, v) in p.times().iter().zip(p.values()) {
            assert!((v[0] - (-(1.0 - t)).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn costate_of_integrator_is_one() {
        let x = simulate_state(&integrator(), &ramp(), &integration_grid(&ramp(), 8)).unwrap();
        let p = simulate_costate(&integrator(), &ramp(), &x).unwrap();
        assert!(p.values().iter().all(|v| v == &vec![1.0]));
        let quad = ControlSystem::new(vec![0.0], SetValue::interval(0.0, 1.0), |_, u| u.to_vec(), |_, _| vec![0.0], |x| 0.5 * x[0] * x[0], |x| x.to_vec());
        let x = simulate_state(&quad, &ramp(), &integration_grid(&ramp(), 8)).unwrap();
        let p = simulate_costate(&quad, &ramp(), &x).unwrap();
        assert_eq!(p.values().last(), x.values().last());
    }

    #[test]
    fn blow_up_is_reported() {
        let sys = ControlSystem::new(vec![1.0], SetValue::interval(0.0, 1.0), |x, _| vec![x[0] * x[0] * 1e200], |x, _| vec![2.0 * x[0]], |x| x[0], |_| vec![1.0]);
        let err = simulate_state(&sys, &ramp(), &integration_grid(&ramp(), 8));
        assert!(matches!(err, Err(Error::BlowUp { .. })));
    }

    #[test]
    fn control_outside_omega_is_rejected() {
        let big = ControlSignal::constant((0.0, 1.0), vec![20.0]).unwrap();
        assert!(integrator().validate(&big).is_err());
    }
}
