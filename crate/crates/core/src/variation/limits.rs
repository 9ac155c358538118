use serde::{Deserialize, Serialize};

use super::multifunction::{checked_distance, tube_points, Multifunction, TubeResolution};
use crate::error::{domain, Error, Result};
use crate::geometry::{dist, hausdorff_fast, SetValue};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Offsets `first·ratio^k` at which `F(t ∓ offset)` is sampled when
/// approaching `t`, and the Cauchy tolerance that ends the approach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LimitSchedule {
    /// Relative to `T - S`.
    pub first: f64,
    pub ratio: f64,
    pub steps: usize,
    pub tolerance: f64,
    /// Consecutive small increments required.
    pub settle: usize,
}

impl Default for LimitSchedule {
    fn default() -> Self {
        LimitSchedule {
            first: 1e-3,
            ratio: 0.5,
            steps: 36,
            tolerance: 1e-9,
            settle: 3,
        }
    }
}

fn approach(f: &Multifunction, t: f64, side: Side, x: &[f64], a: &[f64], sched: &LimitSchedule) -> Result<(SetValue, bool)> {
    let (s, e) = f.span();
    let len = e - s;
    let sign = match side {
        Side::Left => -1.0,
        Side::Right => 1.0,
    };
    let mut prev: Option<SetValue> = None;
    let mut calm = 0;
    for k in 0..=sched.steps {
        let off = sched.first * len * sched.ratio.powi(k as i32);
        let tk = t + sign * off;
        if tk == t {
            break;
        }
        let v = f.eval(tk, x, a);
        if let Some(p) = &prev {
            if checked_distance(p, &v)? < sched.tolerance {
                calm += 1;
                if calm >= sched.settle {
                    return Ok((v, true));
                }
            } else {
                calm = 0;
            }
        }
        prev = Some(v);
    }
    Ok((prev.expect("schedule has at least one offset"), false))
}

/// One-sided set-valued limit `F(t^±, x, a)`.
///
/// Fails with [`Error::Divergence`] when the sampled values are not Cauchy
/// along the schedule, which would contradict bounded variation.
pub fn one_sided_limit(
    f: &Multifunction,
    xbar: &Trajectory,
    t: f64,
    side: Side,
    x: &[f64],
    a: &[f64],
    sched: &LimitSchedule,
) -> Result<SetValue> {
    let (s, e) = f.span();
    match side {
        Side::Right if !(t >= s && t < e) => return domain(format!("right limit needs t in [{s}, {e})")),
        Side::Left if !(t > s && t <= e) => return domain(format!("left limit needs t in ({s}, {e}]")),
        _ => {}
    }
    if dist(x, &xbar.eval(t)) > f.delta_bar() * (1.0 + 1e-12) {
        return domain(format!("x = {x:?} is outside the tube at t = {t}"));
    }
    let (v, ok) = approach(f, t, side, x, a, sched)?;
    if !ok {
        return Err(Error::Divergence(format!(
            "{side:?} limit at t = {t} did not settle below {}",
            sched.tolerance
        )));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jump {
    pub t: f64,
    pub size: f64,
}

/// Grid points where the tube supremum of the jump between the one-sided
/// limits (and the value itself) exceeds `threshold`, in time order.
pub fn discontinuity_scan(
    f: &Multifunction,
    xbar: &Trajectory,
    delta: f64,
    grid: &[f64],
    threshold: f64,
    res: &TubeResolution,
    sched: &LimitSchedule,
) -> Result<Vec<Jump>> {
    f.validate()?;
    let (s, e) = f.span();
    let mut times: Vec<f64> = grid.iter().copied().filter(|t| *t >= s && *t <= e).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut out = Vec::new();
    for t in times {
        let mut size: f64 = 0.0;
        for x in tube_points(xbar, t, t, delta, res) {
            for a in f.a_points() {
                let here = f.eval(t, &x, a);
                let left = (t > s).then(|| approach(f, t, Side::Left, &x, a, sched)).transpose()?;
                let right = (t < e).then(|| approach(f, t, Side::Right, &x, a, sched)).transpose()?;
                if let Some((l, _)) = &left {
                    size = size.max(hausdorff_fast(l, &here));
                }
                if let Some((r, _)) = &right {
                    size = size.max(hausdorff_fast(&here, r));
                }
                if let (Some((l, _)), Some((r, _))) = (&left, &right) {
                    size = size.max(hausdorff_fast(l, r));
                }
            }
        }
        if size > threshold {
            out.push(Jump { t, size });
        }
    }
    Ok(out)
}

/// `F̃`: endpoint values replaced by the one-sided limits `F(S^+)` and
/// `F(T^-)` inside the open `delta_bar` ball around `x(S)` resp. `x(T)`.
pub fn endpoint_regularize(
    f: &Multifunction,
    xbar: &Trajectory,
    res: &TubeResolution,
    sched: &LimitSchedule,
) -> Result<Multifunction> {
    f.validate()?;
    let (s, e) = f.span();
    let db = f.delta_bar();
    // The limits must exist on the sampled tube at both ends.
    for (t, side) in [(s, Side::Right), (e, Side::Left)] {
        for x in tube_points(xbar, t, t, db * (1.0 - 1e-9), res) {
            for a in f.a_points() {
                one_sided_limit(f, xbar, t, side, &x, a, sched)?;
            }
        }
    }
    let inner = f.clone();
    let (xs, xe) = (xbar.eval(s), xbar.eval(e));
    let sched = *sched;
    let g = Multifunction::new((s, e), move |t, x, a| {
        if t == s && dist(x, &xs) < db {
            approach(&inner, s, Side::Right, x, a, &sched)
                .map(|(v, _)| v)
                .unwrap_or_else(|_| inner.eval(t, x, a))
        } else if t == e && dist(x, &xe) < db {
            approach(&inner, e, Side::Left, x, a, &sched)
                .map(|(v, _)| v)
                .unwrap_or_else(|_| inner.eval(t, x, a))
        } else {
            inner.eval(t, x, a)
        }
    });
    let mut bps: Vec<f64> = f.breakpoints().iter().copied().filter(|&b| b > s && b < e).collect();
    bps.extend([s, e]);
    let mut g = g
        .with_parameters(f.a_points().to_vec())
        .with_tube_radius(db)
        .with_bound(f.c_bound())
        .with_breakpoints(bps)
        .with_label(format!("{} (endpoint-regularized)", f.label()));
    if let Some(gamma) = f.gamma() {
        g = g.with_gamma(gamma.to_vec());
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(at: f64, size: f64) -> impl Fn(f64) -> f64 + Clone {
        move |t| if t >= at { size } else { 0.0 }
    }

    fn scalar_map(g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Multifunction {
        Multifunction::from_point_map((0.0, 1.0), move |t, _| vec![g(t)])
    }

    fn flat() -> Trajectory {
        Trajectory::from_fn(0.0, 1.0, 8, |_| vec![0.0]).unwrap()
    }

    #[test]
    fn limits_at_a_step() {
        let f = scalar_map(step(0.5, 1.0));
        let s = LimitSchedule::default();
        let l = one_sided_limit(&f, &flat(), 0.5, Side::Left, &[0.0], &[], &s).unwrap();
        let r = one_sided_limit(&f, &flat(), 0.5, Side::Right, &[0.0], &[], &s).unwrap();
        assert_eq!(l, SetValue::scalar(0.0));
        assert_eq!(r, SetValue::scalar(1.0));
        for side in [Side::Left, Side::Right] {
            let v = one_sided_limit(&f, &flat(), 0.75, side, &[0.0], &[], &s).unwrap();
            assert_eq!(v, SetValue::scalar(1.0));
        }
    }

    #[test]
    fn limit_at_continuity_point_is_the_value() {
        let f = Multifunction::from_point_map((0.0, 1.0), |t, x| vec![t * x[0]]);
        let xbar = Trajectory::from_fn(0.0, 1.0, 8, |t| vec![t]).unwrap();
        let v = one_sided_limit(&f, &xbar, 0.4, Side::Right, &[0.45], &[], &LimitSchedule::default()).unwrap();
        let d = checked_distance(&v, &SetValue::scalar(0.4 * 0.45)).unwrap();
        assert!(d < 1e-9);
    }

    #[test]
    fn oscillation_has_no_limit() {
        let f = scalar_map(|t| (1.0 / (t - 0.5)).sin());
        let err = one_sided_limit(&f, &flat(), 0.5, Side::Right, &[0.0], &[], &LimitSchedule::default());
        assert!(matches!(err, Err(Error::Divergence(_))));
    }

    #[test]
    fn wrong_side_or_outside_tube() {
        let f = scalar_map(step(0.5, 1.0));
        let s = LimitSchedule::default();
        assert!(one_sided_limit(&f, &flat(), 1.0, Side::Right, &[0.0], &[], &s).is_err());
        assert!(one_sided_limit(&f, &flat(), 0.0, Side::Left, &[0.0], &[], &s).is_err());
        assert!(one_sided_limit(&f, &flat(), 0.5, Side::Left, &[3.0], &[], &s).is_err());
    }

    #[test]
    fn scan_finds_steps_in_order() {
        let res = TubeResolution::default();
        let s = LimitSchedule::default();
        let grid: Vec<f64> = (0..=16).map(|i| i as f64 / 16.0).collect();
        let smooth = scalar_map(|t| t * t);
        assert!(discontinuity_scan(&smooth, &flat(), 0.1, &grid, 1e-6, &res, &s).unwrap().is_empty());
        let one = scalar_map(step(0.5, 1.0));
        let jumps = discontinuity_scan(&one, &flat(), 0.1, &grid, 1e-6, &res, &s).unwrap();
        assert_eq!(jumps, vec![Jump { t: 0.5, size: 1.0 }]);
        let two = scalar_map(|t| 2.0 * step(0.25, 1.0)(t) + step(0.75, 1.0)(t));
        let jumps = discontinuity_scan(&two, &flat(), 0.1, &grid, 1e-6, &res, &s).unwrap();
        assert_eq!(jumps, vec![Jump { t: 0.25, size: 2.0 }, Jump { t: 0.75, size: 1.0 }]);
    }

    #[test]
    fn regularize_endpoints() {
        let res = TubeResolution::default();
        let s = LimitSchedule::default();
        let xbar = flat();
        let cont = scalar_map(|t| t);
        let g = endpoint_regularize(&cont, &xbar, &res, &s).unwrap();
        for t in [0.0, 0.3, 1.0] {
            let d = checked_distance(&g.eval(t, &[0.0], &[]), &cont.eval(t, &[0.0], &[])).unwrap();
            assert!(d < 1e-9);
        }
        // atom at S on top of a continuous part
        let atom = scalar_map(|t| if t == 0.0 { 5.0 } else { t });
        let g = endpoint_regularize(&atom, &xbar, &res, &s).unwrap();
        assert!(checked_distance(&g.eval(0.0, &[0.0], &[]), &SetValue::scalar(0.0)).unwrap() < 1e-9);
        // step exactly at T: F(T) = 1, F(T^-) = 0
        let at_end = scalar_map(step(1.0, 1.0));
        let g = endpoint_regularize(&at_end, &xbar, &res, &s).unwrap();
        assert_eq!(g.eval(1.0, &[0.0], &[]), SetValue::scalar(0.0));
        // outside the ball the value is untouched
        assert_eq!(g.eval(1.0, &[2.0], &[]), SetValue::scalar(1.0));
    }
}
