use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::{directed_distance, dist, SetValue};

/// Linear interpolation from `start` at `lo` to `end` at `hi`, used on `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

impl Piece {
    pub fn constant(lo: f64, hi: f64, v: Vec<f64>) -> Self {
        Piece { lo, hi, start: v.clone(), end: v }
    }

    fn at(&self, t: f64) -> Vec<f64> {
        if t == self.lo {
            return self.start.clone();
        }
        if t == self.hi {
            return self.end.clone();
        }
        let w = (t - self.lo) / (self.hi - self.lo);
        self.start.iter().zip(&self.end).map(|(a, b)| a + w * (b - a)).collect()
    }

    fn slope(&self) -> Vec<f64> {
        let d = self.hi - self.lo;
        self.start.iter().zip(&self.end).map(|(a, b)| (b - a) / d).collect()
    }

    /// Sub-piece on `[lo, hi] ∩ [a, b]`, shifted by `h`.
    fn clipped_shift(&self, a: f64, b: f64, h: f64) -> Option<Piece> {
        let lo = (self.lo + h).max(a);
        let hi = (self.hi + h).min(b);
        if !(lo < hi) {
            return None;
        }
        Some(Piece {
            lo,
            hi,
            start: self.at(lo - h),
            end: self.at(hi - h),
        })
    }
}

/// A value that differs from the surrounding pieces at a single time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointValue {
    pub t: f64,
    pub value: Vec<f64>,
}

/// Piecewise-linear control `[S, T] -> R^m` with explicit point values.
///
/// Pieces are half-open `[lo, hi)` except the last, which also supplies the
/// value at `T`. A point value overrides the pieces at its time, so
/// `u(S) != u(S^+)` or a jump exactly at `T` can be expressed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSignal {
    pieces: Vec<Piece>,
    #[serde(default)]
    points: Vec<PointValue>,
}

impl ControlSignal {
    pub fn new(pieces: Vec<Piece>, mut points: Vec<PointValue>) -> Result<Self> {
        if pieces.is_empty() {
            return domain("a control needs at least one piece");
        }
        let m = pieces[0].start.len();
        if m == 0 {
            return domain("control dimension must be positive");
        }
        for p in &pieces {
            if !(p.lo < p.hi) || !p.lo.is_finite() || !p.hi.is_finite() {
                return domain(format!("bad piece [{}, {})", p.lo, p.hi));
            }
            if p.start.len() != m || p.end.len() != m || p.start.iter().chain(&p.end).any(|v| !v.is_finite()) {
                return domain("piece values must be finite and share one dimension");
            }
        }
        if pieces.windows(2).any(|w| w[0].hi != w[1].lo) {
            return domain("pieces must cover the interval without gaps or overlap");
        }
        let (s, e) = (pieces[0].lo, pieces.last().unwrap().hi);
        points.sort_by(|a, b| a.t.total_cmp(&b.t));
        if points.windows(2).any(|w| w[0].t == w[1].t) {
            return domain("two point values at the same time");
        }
        for p in &points {
            if !(p.t >= s && p.t <= e) || p.value.len() != m || p.value.iter().any(|v| !v.is_finite()) {
                return domain(format!("bad point value at t = {}", p.t));
            }
        }
        Ok(ControlSignal { pieces, points })
    }

    pub fn constant(span: (f64, f64), v: Vec<f64>) -> Result<Self> {
        Self::new(vec![Piece::constant(span.0, span.1, v)], Vec::new())
    }

    /// Piecewise-linear interpolation of samples.
    pub fn from_samples(times: &[f64], values: &[Vec<f64>]) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return domain("need at least two samples with matching values");
        }
        let pieces = times
            .windows(2)
            .zip(values.windows(2))
            .map(|(t, v)| Piece {
                lo: t[0],
                hi: t[1],
                start: v[0].clone(),
                end: v[1].clone(),
            })
            .collect();
        Self::new(pieces, Vec::new())
    }

    /// Scalar step: `before` on `[S, at)`, `after` on `[at, T]`.
    pub fn step(span: (f64, f64), at: f64, before: f64, after: f64) -> Result<Self> {
        if !(at > span.0 && at < span.1) {
            return domain("step time must be interior");
        }
        Self::new(
            vec![
                Piece::constant(span.0, at, vec![before]),
                Piece::constant(at, span.1, vec![after]),
            ],
            Vec::new(),
        )
    }

    pub fn with_point(mut self, t: f64, value: Vec<f64>) -> Result<Self> {
        self.points.retain(|p| p.t != t);
        self.points.push(PointValue { t, value });
        Self::new(self.pieces, self.points)
    }

    pub fn span(&self) -> (f64, f64) {
        (self.pieces[0].lo, self.pieces.last().unwrap().hi)
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].start.len()
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn points(&self) -> &[PointValue] {
        &self.points
    }

    fn point_at(&self, t: f64) -> Option<&Vec<f64>> {
        self.points
            .binary_search_by(|p| p.t.total_cmp(&t))
            .ok()
            .map(|i| &self.points[i].value)
    }

    /// Index of the piece with `lo <= t < hi`, the last piece at `T`.
    fn right_piece(&self, t: f64) -> usize {
        let k = self.pieces.partition_point(|p| p.lo <= t);
        k.saturating_sub(1)
    }

    /// Index of the piece with `lo < t <= hi`.
    fn left_piece(&self, t: f64) -> usize {
        let k = self.pieces.partition_point(|p| p.hi < t);
        k.min(self.pieces.len() - 1)
    }

    /// `u(t)`, clamped to `[S, T]`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let (s, e) = self.span();
        let t = t.clamp(s, e);
        if let Some(v) = self.point_at(t) {
            return v.clone();
        }
        self.pieces[self.right_piece(t)].at(t)
    }

    /// `u(t^+)`; at `T` this is the piece value at `T`.
    pub fn right_limit(&self, t: f64) -> Vec<f64> {
        let (s, e) = self.span();
        let t = t.clamp(s, e);
        self.pieces[self.right_piece(t)].at(t)
    }

    /// `u(t^-)`; at `S` this is the piece value at `S`.
    pub fn left_limit(&self, t: f64) -> Vec<f64> {
        let (s, e) = self.span();
        let t = t.clamp(s, e);
        self.pieces[self.left_piece(t)].at(t)
    }

    /// Right derivative `u̇(t^+)`.
    pub fn derivative(&self, t: f64) -> Vec<f64> {
        self.pieces[self.right_piece(t)].slope()
    }

    /// Piece boundaries and point-value times strictly inside `(S, T)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let (s, e) = self.span();
        let mut out: Vec<f64> = self
            .pieces
            .iter()
            .map(|p| p.lo)
            .chain(self.points.iter().map(|p| p.t))
            .filter(|&t| t > s && t < e)
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Times in `[S, T]` where `u` is discontinuous from either side.
    pub fn jump_times(&self) -> Vec<f64> {
        let (s, e) = self.span();
        let mut cand = self.breakpoints();
        cand.extend([s, e]);
        cand.sort_by(f64::total_cmp);
        cand.into_iter()
            .filter(|&t| {
                let v = self.eval(t);
                (t > s && v != self.left_limit(t)) || (t < e && v != self.right_limit(t))
            })
            .collect()
    }

    pub fn continuous_at_endpoints(&self) -> bool {
        let (s, e) = self.span();
        self.eval(s) == self.right_limit(s) && self.eval(e) == self.left_limit(e)
    }

    /// Cumulative variation `t -> V_S^t(u)`, exact for piecewise-linear signals.
    pub fn variation_to(&self, t: f64) -> f64 {
        let (s, e) = self.span();
        let t = t.clamp(s, e);
        let mut nodes: Vec<f64> = self.breakpoints().into_iter().filter(|&b| b < t).collect();
        nodes.insert(0, s);
        if t > s {
            nodes.push(t);
        }
        // u(a) -> u(a+) -> u(b-) -> u(b) on each gap; linear in between
        nodes
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                dist(&self.eval(a), &self.right_limit(a))
                    + dist(&self.right_limit(a), &self.left_limit(b))
                    + dist(&self.left_limit(b), &self.eval(b))
            })
            .sum()
    }

    /// `(t, V_S^t(u))` at each time, the cumulative variation table.
    pub fn variation_table(&self, times: &[f64]) -> Vec<(f64, f64)> {
        times.iter().map(|&t| (t, self.variation_to(t))).collect()
    }

    /// Every piece end value and point value lies in `omega`.
    pub fn check_values_in(&self, omega: &SetValue) -> Result<()> {
        let vals = self
            .pieces
            .iter()
            .flat_map(|p| [&p.start, &p.end])
            .chain(self.points.iter().map(|p| &p.value));
        for v in vals {
            let d = directed_distance(&SetValue::point(v.clone()), omega)?;
            if d > 1e-12 {
                return domain(format!("control value {v:?} lies outside the admissible set"));
            }
        }
        Ok(())
    }
}

/// `u^h(t) = u(S)` if `t - h < S`, `u(t - h)` if `S <= t - h <= T`, `u(T)` if `t - h > T`.
pub fn delayed_control(u: &ControlSignal, h: f64) -> ControlSignal {
    if h == 0.0 {
        return u.clone();
    }
    let (s, e) = u.span();
    let mut pieces = Vec::new();
    if h > 0.0 {
        pieces.push(Piece::constant(s, (s + h).min(e), u.eval(s)));
    }
    pieces.extend(u.pieces.iter().filter_map(|p| p.clipped_shift(s, e, h)));
    if h < 0.0 {
        pieces.push(Piece::constant((e + h).max(s), e, u.eval(e)));
    }
    let mut points: Vec<PointValue> = u
        .points
        .iter()
        .map(|p| PointValue { t: p.t + h, value: p.value.clone() })
        .filter(|p| p.t >= s && p.t <= e)
        .collect();
    points.sort_by(|a, b| a.t.total_cmp(&b.t));
    ControlSignal::new(pieces, points).expect("shift of a valid control is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> ControlSignal {
        ControlSignal::from_samples(&[0.0, 1.0], &[vec![0.0], vec![1.0]]).unwrap()
    }

    #[test]
    fn zero_delay_is_identity() {
        assert_eq!(delayed_control(&ramp(), 0.0), ramp());
    }

    #[test]
    fn delayed_ramp_is_clamped_at_start() {
        let u = delayed_control(&ramp(), 0.25);
        assert_eq!(u.eval(0.1), vec![0.0]);
        assert_eq!(u.eval(0.25), vec![0.0]);
        assert!((u.eval(0.75)[0] - 0.5).abs() < 1e-15);
        assert!((u.eval(1.0)[0] - 0.75).abs() < 1e-15);
        let adv = delayed_control(&ramp(), -0.25);
        assert!((adv.eval(0.0)[0] - 0.25).abs() < 1e-15);
        assert_eq!(adv.eval(0.9), vec![1.0]);
    }

    #[test]
    fn step_moves_with_the_delay() {
        let u = ControlSignal::step((0.0, 1.0), 0.5, 0.0, 1.0).unwrap();
        let d = delayed_control(&u, 0.1);
        assert_eq!(d.jump_times(), vec![0.6]);
        assert_eq!(d.eval(0.59), vec![0.0]);
        assert_eq!(d.eval(0.6), vec![1.0]);
        assert!(u.continuous_at_endpoints());
    }

    #[test]
    fn point_values_and_limits() {
        let u = ControlSignal::constant((0.0, 1.0), vec![0.0]).unwrap().with_point(1.0, vec![1.0]).unwrap();
        assert_eq!(u.eval(1.0), vec![1.0]);
        assert_eq!(u.left_limit(1.0), vec![0.0]);
        assert_eq!(u.jump_times(), vec![1.0]);
        assert!(!u.continuous_at_endpoints());
        assert_eq!(u.variation_to(1.0), 1.0);
        assert_eq!(u.variation_to(0.9), 0.0);
        // an advance spreads u(T) over (T + h, T]
        let a = delayed_control(&u, -0.2);
        assert_eq!(a.eval(0.79), vec![0.0]);
        assert_eq!(a.eval(0.8), vec![1.0]);
        assert_eq!(a.eval(0.9), vec![1.0]);
    }

    #[test]
    fn start_value_spreads_under_delay() {
        let u = ControlSignal::constant((0.0, 1.0), vec![0.0]).unwrap().with_point(0.0, vec![2.0]).unwrap();
        let d = delayed_control(&u, 0.25);
        assert_eq!(d.eval(0.1), vec![2.0]);
        assert_eq!(d.eval(0.25), vec![2.0]);
        assert_eq!(d.eval(0.26), vec![0.0]);
    }

    #[test]
    fn variation_of_ramp_and_steps() {
        assert!((ramp().variation_to(0.5) - 0.5).abs() < 1e-15);
        let u = ControlSignal::new(
            vec![
                Piece::constant(0.0, 0.25, vec![0.0]),
                Piece::constant(0.25, 0.75, vec![2.0]),
                Piece::constant(0.75, 1.0, vec![1.0]),
            ],
            vec![PointValue { t: 0.5, value: vec![5.0] }],
        )
        .unwrap();
        assert_eq!(u.variation_to(0.25), 2.0);
        assert_eq!(u.variation_to(0.5), 5.0);
        assert_eq!(u.variation_to(1.0), 9.0);
        assert_eq!(u.jump_times(), vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn admissible_values() {
        let omega = SetValue::interval(0.0, 1.0);
        assert!(ramp().check_values_in(&omega).is_ok());
        let bad = ControlSignal::constant((0.0, 1.0), vec![2.0]).unwrap();
        assert!(bad.check_values_in(&omega).is_err());
    }
}
