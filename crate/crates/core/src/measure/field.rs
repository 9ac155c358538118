use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::geometry::SetValue;
use crate::trajectory::Trajectory;
use crate::variation::{eta_delta_eps, Multifunction, VariationSettings};

pub type PointFn = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;

/// A vector field `m(t, x) ∈ R^r` with its `x`-Jacobian, stored row-major
/// as an `r × n` matrix.
#[derive(Clone)]
pub struct ScalarField {
    m: PointFn,
    grad: PointFn,
    span: (f64, f64),
    out_dim: usize,
    state_dim: usize,
    delta_prime: f64,
    breakpoints: Vec<f64>,
    label: String,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("span", &self.span)
            .field("out_dim", &self.out_dim)
            .field("state_dim", &self.state_dim)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl ScalarField {
    pub fn new(
        span: (f64, f64),
        out_dim: usize,
        state_dim: usize,
        m: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        grad: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            m: Arc::new(m),
            grad: Arc::new(grad),
            span,
            out_dim,
            state_dim,
            delta_prime: 1.0,
            breakpoints: Vec::new(),
            label: String::from("anonymous"),
        }
    }

    /// Scalar field independent of `x`: `m(t, x) = f(t)`, zero Jacobian.
    pub fn time_only(span: (f64, f64), state_dim: usize, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(span, 1, state_dim, move |t, _| vec![f(t)], move |_, _| vec![0.0; state_dim])
    }

    pub fn with_radius(mut self, delta_prime: f64) -> Self {
        self.delta_prime = delta_prime;
        self
    }

    pub fn with_breakpoints(mut self, mut times: Vec<f64>) -> Self {
        times.retain(|t| t.is_finite());
        times.sort_by(f64::total_cmp);
        times.dedup();
        self.breakpoints = times;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Vec<f64> {
        (self.m)(t, x)
    }

    pub fn grad(&self, t: f64, x: &[f64]) -> Vec<f64> {
        (self.grad)(t, x)
    }

    pub fn span(&self) -> (f64, f64) {
        self.span
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn delta_prime(&self) -> f64 {
        self.delta_prime
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub(crate) fn validate(&self, xbar: &Trajectory) -> Result<()> {
        let (s, e) = self.span;
        if !(s < e) || !s.is_finite() || !e.is_finite() {
            return domain(format!("bad time interval [{s}, {e}]"));
        }
        if self.out_dim == 0 {
            return domain("field dimension r must be positive");
        }
        if xbar.dim() != self.state_dim {
            return domain(format!(
                "trajectory dimension {} does not match field state dimension {}",
                xbar.dim(),
                self.state_dim
            ));
        }
        let (xs, xe) = xbar.span();
        if xs > s + 1e-12 * (e - s) || xe < e - 1e-12 * (e - s) {
            return domain(format!("trajectory on [{xs}, {xe}] does not cover [{s}, {e}]"));
        }
        if !(self.delta_prime > 0.0) {
            return domain("tube radius must be positive");
        }
        for k in 0..=8 {
            let t = s + (e - s) * k as f64 / 8.0;
            let x = xbar.eval(t);
            let v = self.eval(t, &x);
            let g = self.grad(t, &x);
            if v.len() != self.out_dim || g.len() != self.out_dim * self.state_dim {
                return domain(format!("field or Jacobian has the wrong length at t = {t}"));
            }
            if v.iter().chain(&g).any(|z| !z.is_finite()) {
                return domain(format!("non-finite field value at t = {t}"));
            }
        }
        Ok(())
    }

    /// `t, x -> {m(t, x)}` as a point-valued multifunction.
    pub fn value_map(&self) -> Multifunction {
        let m = self.m.clone();
        Multifunction::new(self.span, move |t, x, _| SetValue::Singleton { v: m(t, x) })
            .with_tube_radius(self.delta_prime)
            .with_breakpoints(self.breakpoints.clone())
            .with_label(format!("{} (value)", self.label))
    }

    /// `t, x -> {∇ₓm(t, x)}`, flattened into `R^{r n}`.
    pub fn jacobian_map(&self) -> Multifunction {
        let g = self.grad.clone();
        Multifunction::new(self.span, move |t, x, _| SetValue::Singleton { v: g(t, x) })
            .with_tube_radius(self.delta_prime)
            .with_breakpoints(self.breakpoints.clone())
            .with_label(format!("{} (jacobian)", self.label))
    }

    /// Finite `η^δ_ε(T)` for both `m` and `∇ₓm` at `δ = δ'/2`, `ε = (T - S)/16`.
    pub fn bv_diagnostic(&self, xbar: &Trajectory, settings: &VariationSettings) -> Result<BvDiagnostic> {
        self.validate(xbar)?;
        let (s, e) = self.span;
        let delta = self.delta_prime / 2.0;
        let eps = (e - s) / 16.0;
        let value = eta_delta_eps(&self.value_map(), xbar, e, delta, eps, settings)?;
        let jacobian = eta_delta_eps(&self.jacobian_map(), xbar, e, delta, eps, settings)?;
        Ok(BvDiagnostic {
            delta,
            eps,
            value_variation: value,
            jacobian_variation: jacobian,
            bounded: value.is_finite() && jacobian.is_finite(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BvDiagnostic {
    pub delta: f64,
    pub eps: f64,
    pub value_variation: f64,
    pub jacobian_variation: f64,
    pub bounded: bool,
}
