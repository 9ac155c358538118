use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::geometry::dist;

/// Number of dyadic steps in the empirical continuity-modulus table.
const MODULUS_LEVELS: usize = 24;

/// Windows spanning more nodes than this are bounded by subadditivity.
const MODULUS_SCAN_LIMIT: usize = 512;

type Modulus = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A continuous curve `[S, T] -> R^n`, stored as samples and interpolated
/// piecewise-linearly.
///
/// Carries a continuity-modulus table `h -> sup |x(s) - x(t)|, |s - t| <= h`
/// built from the samples, unless an exact modulus is supplied.
#[derive(Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    modulus_steps: Vec<f64>,
    modulus_values: Vec<f64>,
    exact_modulus: Option<Modulus>,
}

impl fmt::Debug for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Trajectory")
            .field("span", &self.span())
            .field("samples", &self.times.len())
            .field("dim", &self.dim())
            .finish()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModulusEntry {
    pub step: f64,
    pub value: f64,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() < 2 {
            return domain("a trajectory needs at least two samples");
        }
        if times.len() != values.len() {
            return domain("sample times and values differ in length");
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("sample times must be strictly increasing");
        }
        let n = values[0].len();
        if n == 0 || values.iter().any(|v| v.len() != n) {
            return domain("trajectory values must share one positive dimension");
        }
        if values.iter().flatten().any(|x| !x.is_finite()) || times.iter().any(|t| !t.is_finite()) {
            return domain("non-finite trajectory sample");
        }
        let mut traj = Trajectory {
            times,
            values,
            modulus_steps: Vec::new(),
            modulus_values: Vec::new(),
            exact_modulus: None,
        };
        traj.build_modulus_table();
        Ok(traj)
    }

    /// Samples `f` on a uniform grid of `n` cells over `[s, t]`.
    pub fn from_fn(s: f64, t: f64, n: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        if !(s < t) || n == 0 {
            return domain("need S < T and at least one cell");
        }
        let times: Vec<f64> = (0..=n).map(|i| s + (t - s) * i as f64 / n as f64).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        Self::new(times, values)
    }

    /// Replaces the empirical modulus with an exact one.
    pub fn with_modulus(mut self, modulus: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.exact_modulus = Some(Arc::new(modulus));
        self
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Index `k` with `times[k] <= t < times[k + 1]`, clamped to the last cell.
    fn cell(&self, t: f64) -> usize {
        let k = self.times.partition_point(|&s| s <= t);
        k.saturating_sub(1).min(self.times.len() - 2)
    }

    /// Piecewise-linear value; clamps outside `[S, T]`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let (s, e) = self.span();
        let t = t.clamp(s, e);
        let k = self.cell(t);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let w = (t - t0) / (t1 - t0);
        self.values[k]
            .iter()
            .zip(&self.values[k + 1])
            .map(|(a, b)| a + w * (b - a))
            .collect()
    }

    /// Points of the arc `x([t0, t1])`: both ends, every sample inside, and
    /// `extra` evenly spaced interior points.
    pub fn arc_points(&self, t0: f64, t1: f64, extra: usize) -> Vec<Vec<f64>> {
        let mut pts = vec![self.eval(t0)];
        if t1 > t0 {
            let lo = self.times.partition_point(|&s| s <= t0);
            let hi = self.times.partition_point(|&s| s < t1);
            for k in lo..hi {
                pts.push(self.values[k].clone());
            }
            for i in 1..=extra {
                pts.push(self.eval(t0 + (t1 - t0) * i as f64 / (extra + 1) as f64));
            }
            pts.push(self.eval(t1));
        }
        pts
    }

    /// Distance from `x` to the sampled arc `x([t0, t1])` (exact for the
    /// piecewise-linear interpolant).
    pub fn distance_to_arc(&self, x: &[f64], t0: f64, t1: f64) -> f64 {
        let mut nodes = vec![t0];
        let lo = self.times.partition_point(|&s| s <= t0);
        let hi = self.times.partition_point(|&s| s < t1);
        nodes.extend_from_slice(&self.times[lo..hi]);
        if t1 > t0 {
            nodes.push(t1);
        }
        if nodes.len() == 1 {
            return dist(x, &self.eval(t0));
        }
        nodes
            .windows(2)
            .map(|w| segment_distance(x, &self.eval(w[0]), &self.eval(w[1])))
            .fold(f64::INFINITY, f64::min)
    }

    /// Continuity modulus `theta(h)`; nondecreasing with `theta(0) = 0`.
    pub fn modulus(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        if let Some(m) = &self.exact_modulus {
            return m(h);
        }
        // smallest tabulated step >= h
        let k = self.modulus_steps.partition_point(|&s| s < h);
        if k >= self.modulus_steps.len() {
            return *self.modulus_values.last().unwrap();
        }
        self.modulus_values[k]
    }

    pub fn modulus_table(&self) -> Vec<ModulusEntry> {
        std::iter::once(ModulusEntry { step: 0.0, value: 0.0 })
            .chain(
                self.modulus_steps
                    .iter()
                    .zip(&self.modulus_values)
                    .map(|(&step, &value)| ModulusEntry { step, value }),
            )
            .collect()
    }

    fn build_modulus_table(&mut self) {
        let (s, e) = self.span();
        let len = e - s;
        // ascending steps len * 2^-k, k = MODULUS_LEVELS-1 .. 0
        let steps: Vec<f64> = (0..MODULUS_LEVELS)
            .rev()
            .map(|k| len / (1u64 << k) as f64)
            .collect();
        let mut values: Vec<f64> = Vec::with_capacity(steps.len());
        let diameter = self.bounding_diameter();
        for (i, &h) in steps.iter().enumerate() {
            let v = if self.max_window_nodes(h) <= MODULUS_SCAN_LIMIT {
                self.scan_modulus(h)
            } else {
                (2.0 * values[i - 1]).min(diameter)
            };
            let prev = values.last().copied().unwrap_or(0.0);
            values.push(f64::max(v, prev));
        }
        self.modulus_steps = steps;
        self.modulus_values = values;
    }

    fn max_window_nodes(&self, h: f64) -> usize {
        let mut best = 0;
        let mut j = 0;
        for i in 0..self.times.len() {
            while j < self.times.len() && self.times[j] <= self.times[i] + h {
                j += 1;
            }
            best = best.max(j - i);
        }
        best
    }

    fn scan_modulus(&self, h: f64) -> f64 {
        let (_, e) = self.span();
        let mut best: f64 = 0.0;
        for i in 0..self.times.len() {
            let ti = self.times[i];
            let mut j = i + 1;
            while j < self.times.len() && self.times[j] <= ti + h {
                best = best.max(dist(&self.values[i], &self.values[j]));
                j += 1;
            }
            if ti + h <= e {
                best = best.max(dist(&self.values[i], &self.eval(ti + h)));
            }
        }
        best
    }

    fn bounding_diameter(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|k| {
                let (lo, hi) = self
                    .values
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v[k]), hi.max(v[k]))
                    });
                (hi - lo).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }
}

fn segment_distance(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(p, q)| q - p).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    if len2 == 0.0 {
        return dist(x, a);
    }
    let proj: f64 = x
        .iter()
        .zip(a)
        .zip(&ab)
        .map(|((xi, ai), di)| (xi - ai) * di)
        .sum::<f64>()
        / len2;
    let w = proj.clamp(0.0, 1.0);
    let p: Vec<f64> = a.iter().zip(&ab).map(|(ai, di)| ai + w * di).collect();
    dist(x, &p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_samples() {
        assert!(Trajectory::new(vec![0.0], vec![vec![0.0]]).is_err());
        assert!(Trajectory::new(vec![0.0, 0.0], vec![vec![0.0], vec![1.0]]).is_err());
        assert!(Trajectory::new(vec![0.0, 1.0], vec![vec![0.0], vec![f64::NAN]]).is_err());
    }

    #[test]
    fn linear_interpolation() {
        let x = Trajectory::from_fn(0.0, 1.0, 4, |t| vec![t * t]).unwrap();
        assert_eq!(x.eval(0.25), vec![0.0625]);
        assert!((x.eval(0.375)[0] - 0.5 * (0.0625 + 0.25)).abs() < 1e-15);
        assert_eq!(x.eval(2.0), vec![1.0]);
    }

    #[test]
    fn modulus_of_identity_is_step() {
        let x = Trajectory::from_fn(0.0, 1.0, 64, |t| vec![t]).unwrap();
        for h in [1.0 / 64.0, 0.125, 0.5, 1.0] {
            assert!((x.modulus(h) - h).abs() < 1e-12, "h = {h}");
        }
        assert_eq!(x.modulus(0.0), 0.0);
        let table = x.modulus_table();
        assert!(table.windows(2).all(|w| w[0].value <= w[1].value));
    }

    #[test]
    fn arc_contains_interior_samples() {
        let x = Trajectory::from_fn(0.0, 1.0, 10, |t| vec![t]).unwrap();
        let arc = x.arc_points(0.25, 0.55, 0);
        let ts: Vec<f64> = arc.iter().map(|p| p[0]).collect();
        assert!(ts.contains(&0.3) && ts.contains(&0.5));
        assert!((x.distance_to_arc(&[0.7], 0.25, 0.55) - 0.15).abs() < 1e-12);
    }
}
