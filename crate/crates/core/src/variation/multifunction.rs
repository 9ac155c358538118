use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::geometry::{dist, hausdorff_distance_with, hausdorff_fast, SetValue, DEFAULT_BOX_RESOLUTION};
use crate::trajectory::{ModulusEntry, Trajectory};

pub type SetFn = Arc<dyn Fn(f64, &[f64], &[f64]) -> SetValue + Send + Sync>;

/// A set-valued map `F(t, x, a)` on `[S, T] x R^n x A` together with the
/// data its variation is measured against: a finite sample of the
/// parameter set `A`, the tube radius `delta_bar`, the bound `c` with
/// `F(t, x, a) ⊂ c·B` and any known discontinuity times.
#[derive(Clone)]
pub struct Multifunction {
    eval: SetFn,
    span: (f64, f64),
    a_points: Vec<Vec<f64>>,
    delta_bar: f64,
    c_bound: f64,
    gamma: Option<Vec<ModulusEntry>>,
    breakpoints: Vec<f64>,
    label: String,
}

impl fmt::Debug for Multifunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Multifunction")
            .field("label", &self.label)
            .field("span", &self.span)
            .field("a_points", &self.a_points.len())
            .field("delta_bar", &self.delta_bar)
            .field("c_bound", &self.c_bound)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl Multifunction {
    /// A multifunction with no parameter (`A` is the single empty vector),
    /// `delta_bar = 1` and an unbounded `c`.
    pub fn new(
        span: (f64, f64),
        eval: impl Fn(f64, &[f64], &[f64]) -> SetValue + Send + Sync + 'static,
    ) -> Self {
        Multifunction {
            eval: Arc::new(eval),
            span,
            a_points: vec![Vec::new()],
            delta_bar: 1.0,
            c_bound: f64::INFINITY,
            gamma: None,
            breakpoints: Vec::new(),
            label: String::from("anonymous"),
        }
    }

    /// Point-valued map `t, x -> {m(t, x)}`.
    pub fn from_point_map(
        span: (f64, f64),
        m: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self::new(span, move |t, x, _| SetValue::Singleton { v: m(t, x) })
    }

    pub fn with_parameters(mut self, a_points: Vec<Vec<f64>>) -> Self {
        self.a_points = a_points;
        self
    }

    pub fn with_tube_radius(mut self, delta_bar: f64) -> Self {
        self.delta_bar = delta_bar;
        self
    }

    pub fn with_bound(mut self, c: f64) -> Self {
        self.c_bound = c;
        self
    }

    pub fn with_gamma(mut self, table: Vec<ModulusEntry>) -> Self {
        self.gamma = Some(table);
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

    /// Same map with the parameter sample replaced by `subset`, for
    /// comparing variation over `A1 ⊂ A`.
    pub fn restrict_parameters(&self, subset: Vec<Vec<f64>>) -> Self {
        let mut out = self.clone();
        out.a_points = subset;
        out
    }

    pub fn eval(&self, t: f64, x: &[f64], a: &[f64]) -> SetValue {
        (self.eval)(t, x, a)
    }

    pub fn span(&self) -> (f64, f64) {
        self.span
    }

    pub fn a_points(&self) -> &[Vec<f64>] {
        &self.a_points
    }

    pub fn delta_bar(&self) -> f64 {
        self.delta_bar
    }

    pub fn c_bound(&self) -> f64 {
        self.c_bound
    }

    pub fn gamma(&self) -> Option<&[ModulusEntry]> {
        self.gamma.as_deref()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let (s, t) = self.span;
        if !(s < t) || !s.is_finite() || !t.is_finite() {
            return domain(format!("bad time interval [{s}, {t}]"));
        }
        if self.a_points.is_empty() {
            return domain("parameter sample A is empty");
        }
        if !(self.delta_bar > 0.0) {
            return domain("tube radius delta_bar must be positive");
        }
        if !(self.c_bound > 0.0) {
            return domain("bound c must be positive");
        }
        Ok(())
    }

    /// Spot-checks that values on the tube are valid sets inside `c·B`.
    pub fn spot_check(&self, xbar: &Trajectory, times: usize, res: &TubeResolution) -> Result<()> {
        self.validate()?;
        let (s, e) = self.span;
        for i in 0..=times {
            let t = s + (e - s) * i as f64 / times.max(1) as f64;
            for x in tube_points(xbar, t, t, self.delta_bar, res) {
                for a in &self.a_points {
                    let v = self.eval(t, &x, a);
                    v.validate()?;
                    if v.max_norm() > self.c_bound * (1.0 + 1e-12) {
                        return domain(format!(
                            "F({t}, {x:?}, {a:?}) leaves the ball of radius {}",
                            self.c_bound
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Empirical continuity modulus in `(x, a)`: for each step `r`, the largest
    /// `d_H(F(t,x,a), F(t,x',a'))` seen with `|x-x'| + |a-a'| <= r` on the tube.
    pub fn estimate_gamma(&self, xbar: &Trajectory, times: usize, res: &TubeResolution) -> Vec<ModulusEntry> {
        let (s, e) = self.span;
        let steps: Vec<f64> = (0..12).rev().map(|k| self.delta_bar / (1u64 << k) as f64).collect();
        let mut best = vec![0.0f64; steps.len()];
        for i in 0..=times {
            let t = s + (e - s) * i as f64 / times.max(1) as f64;
            let xs = tube_points(xbar, t, t, self.delta_bar, res);
            let vals: Vec<Vec<SetValue>> = xs
                .iter()
                .map(|x| self.a_points.iter().map(|a| self.eval(t, x, a)).collect())
                .collect();
            for (p, xp) in xs.iter().enumerate() {
                for (q, xq) in xs.iter().enumerate() {
                    for (ia, ap) in self.a_points.iter().enumerate() {
                        for (ib, aq) in self.a_points.iter().enumerate() {
                            let r = dist(xp, xq) + dist(ap, aq);
                            let d = hausdorff_fast(&vals[p][ia], &vals[q][ib]);
                            for (k, &step) in steps.iter().enumerate() {
                                if r <= step {
                                    best[k] = best[k].max(d);
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut running: f64 = 0.0;
        steps
            .into_iter()
            .zip(best)
            .map(|(step, v)| {
                running = running.max(v);
                ModulusEntry { step, value: running }
            })
            .collect()
    }
}

/// Sampling density of the tube `x([t0, t1]) + δB`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TubeResolution {
    /// Evenly spaced interior arc points added to the trajectory's own samples.
    pub arc_extra: usize,
    /// Radial shells at fractions `1/L, 2/L, .., 1` of δ.
    pub radial_levels: usize,
}

impl Default for TubeResolution {
    fn default() -> Self {
        TubeResolution {
            arc_extra: 1,
            radial_levels: 2,
        }
    }
}

/// A finite sample of `(x([t_lo, t_hi]) + δB) × A`.
#[derive(Debug, Clone, Serialize)]
pub struct TubeSample {
    pub t_lo: f64,
    pub t_hi: f64,
    pub delta: f64,
    pub x_points: Vec<Vec<f64>>,
    pub a_points: Vec<Vec<f64>>,
}

impl TubeSample {
    pub fn new(f: &Multifunction, xbar: &Trajectory, t_lo: f64, t_hi: f64, delta: f64, res: &TubeResolution) -> Self {
        TubeSample {
            t_lo,
            t_hi,
            delta,
            x_points: tube_points(xbar, t_lo, t_hi, delta, res),
            a_points: f.a_points.clone(),
        }
    }

    /// Largest distance from a sample point to the arc; at most `delta` up to rounding.
    pub fn max_offset(&self, xbar: &Trajectory) -> f64 {
        self.x_points
            .iter()
            .map(|x| xbar.distance_to_arc(x, self.t_lo, self.t_hi))
            .fold(0.0, f64::max)
    }
}

/// Unit directions used for ball offsets: ±e_k, plus the normalized
/// diagonals in dimensions two and three.
fn directions(n: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for k in 0..n {
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[k] = sign;
            dirs.push(d);
        }
    }
    if (2..=3).contains(&n) {
        let scale = 1.0 / (n as f64).sqrt();
        for mask in 0..1usize << n {
            dirs.push(
                (0..n)
                    .map(|k| if mask >> k & 1 == 1 { scale } else { -scale })
                    .collect(),
            );
        }
    }
    dirs
}

pub(crate) fn tube_points(xbar: &Trajectory, t0: f64, t1: f64, delta: f64, res: &TubeResolution) -> Vec<Vec<f64>> {
    let arc = xbar.arc_points(t0, t1, res.arc_extra);
    if delta <= 0.0 || res.radial_levels == 0 {
        return arc;
    }
    let dirs = directions(xbar.dim());
    let levels = res.radial_levels;
    let mut pts = Vec::with_capacity(arc.len() * (1 + dirs.len() * levels));
    for c in &arc {
        pts.push(c.clone());
        for l in 1..=levels {
            let r = delta * l as f64 / levels as f64;
            for d in &dirs {
                pts.push(c.iter().zip(d).map(|(ci, di)| ci + r * di).collect());
            }
        }
    }
    pts
}

/// `sup` over the sampled tube of `d_H(F(t1, x, a), F(t0, x, a))`.
pub(crate) fn cell_weight(f: &Multifunction, xbar: &Trajectory, t0: f64, t1: f64, delta: f64, res: &TubeResolution) -> f64 {
    let mut best: f64 = 0.0;
    for x in tube_points(xbar, t0, t1, delta, res) {
        for a in &f.a_points {
            let d = hausdorff_fast(&f.eval(t1, &x, a), &f.eval(t0, &x, a));
            best = best.max(d);
        }
    }
    best
}

/// Checked Hausdorff distance of two values, used where values come from
/// user-supplied maps and must be validated.
pub(crate) fn checked_distance(a: &SetValue, b: &SetValue) -> Result<f64> {
    hausdorff_distance_with(a, b, DEFAULT_BOX_RESOLUTION)
}
