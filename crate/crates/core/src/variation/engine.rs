//! Cumulative variation along a trajectory.
//!
//! The supremum over partitions with mesh at most `eps` is computed exactly
//! over a finite candidate grid by dynamic programming:
//!
//! ```text
//! V(t_0) = 0,   V(t_j) = max { V(t_i) + w(t_i, t_j) : t_j - t_i <= eps }
//! ```
//!
//! where `w(s, t)` is the sampled tube supremum of `d_H(F(t,x,a), F(s,x,a))`.
//! The candidate grid is dyadic on `[S, T]`, seeded with the probe times, the
//! declared breakpoints and a thin halo around each breakpoint. Refining the
//! grid only adds candidates, so the values form a nondecreasing chain of
//! lower bounds; refinement stops once the chain settles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::multifunction::{cell_weight, Multifunction, TubeResolution};
use super::partition::{node, Partition};
use crate::error::{domain, Error, Result};
use crate::geometry::{hausdorff_fast, SetValue};
use crate::trajectory::Trajectory;

/// Geometric sequence `start, start·ratio, ..., start·ratio^steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub start: f64,
    pub ratio: f64,
    pub steps: usize,
}

impl Schedule {
    pub fn geometric(start: f64, ratio: f64, steps: usize) -> Self {
        Schedule { start, ratio, steps }
    }

    /// Halving schedule with the default eight steps.
    pub fn halving(start: f64) -> Self {
        Self::geometric(start, 0.5, 8)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|k| self.start * self.ratio.powi(k as i32))
            .collect()
    }

    pub fn last(&self) -> f64 {
        self.start * self.ratio.powi(self.steps as i32)
    }

    fn validate(&self) -> Result<()> {
        if !(self.start > 0.0) || !(self.ratio > 0.0 && self.ratio < 1.0) {
            return domain(format!(
                "schedule must be strictly decreasing and positive, got start {} ratio {}",
                self.start, self.ratio
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VariationSettings {
    pub tube: TubeResolution,
    /// Refinement stops once successive grid levels move every probe value by less than this.
    pub refine_tolerance: f64,
    pub min_depth: u32,
    pub max_depth: u32,
    /// Upper bound on pair evaluations per grid level.
    pub pair_budget: usize,
    /// Halo nodes are placed at `b ± breakpoint_halo·(T - S)` around each breakpoint.
    pub breakpoint_halo: f64,
    /// Convergence flag threshold for the ε and δ schedules.
    pub schedule_tolerance: f64,
    /// Allowed relative increase along a schedule before it counts as an ordering violation.
    pub ordering_slack: f64,
    /// Defaults to `(T - S)/16` halved eight times.
    pub eps_schedule: Option<Schedule>,
    /// Defaults to `delta_bar` halved eight times.
    pub delta_schedule: Option<Schedule>,
    /// Points per axis when a fixed comparison set `X` is a box.
    pub set_resolution: usize,
}

impl Default for VariationSettings {
    fn default() -> Self {
        VariationSettings {
            tube: TubeResolution::default(),
            refine_tolerance: 1e-7,
            min_depth: 1,
            max_depth: 6,
            pair_budget: 1 << 22,
            breakpoint_halo: 1e-9,
            schedule_tolerance: 1e-4,
            ordering_slack: 1e-6,
            eps_schedule: None,
            delta_schedule: None,
            set_resolution: 65,
        }
    }
}

impl VariationSettings {
    pub fn eps_schedule_for(&self, span: (f64, f64)) -> Schedule {
        self.eps_schedule
            .unwrap_or_else(|| Schedule::halving((span.1 - span.0) / 16.0))
    }

    pub fn delta_schedule_for(&self, f: &Multifunction) -> Schedule {
        self.delta_schedule
            .unwrap_or_else(|| Schedule::halving(f.delta_bar()))
    }
}

/// Which mesh bound a profile was computed for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshBound {
    Eps(f64),
    /// `eps ↓ 0` along a schedule.
    Limit,
    /// Supremum over all partitions.
    Unrestricted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub t: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementStep {
    pub depth: u32,
    pub nodes: usize,
    /// Value at the last probe.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleStep {
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub value: f64,
}

/// Values of a cumulative variation function at a set of probe times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationProfile {
    pub schema_version: u32,
    /// `None` for the fixed-set variant.
    pub delta: Option<f64>,
    pub eps: MeshBound,
    pub values: Vec<ProfilePoint>,
    pub refinement_trace: Vec<RefinementStep>,
    pub schedule_trace: Vec<ScheduleStep>,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl VariationProfile {
    /// Value at the probe nearest to `t`.
    pub fn at(&self, t: f64) -> f64 {
        self.values
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .map_or(0.0, |p| p.eta)
    }

    pub fn last_value(&self) -> f64 {
        self.values.last().map_or(0.0, |p| p.eta)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,eta\n");
        for p in &self.values {
            out.push_str(&format!("{},{}\n", p.t, p.eta));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }
}

fn check_inputs(f: &Multifunction, xbar: &Trajectory, probes: &[f64], delta: f64) -> Result<Vec<f64>> {
    f.validate()?;
    let (s, e) = f.span();
    let (xs, xe) = xbar.span();
    if xs > s + 1e-12 * (e - s) || xe < e - 1e-12 * (e - s) {
        return domain(format!("trajectory on [{xs}, {xe}] does not cover [{s}, {e}]"));
    }
    if !(delta >= 0.0) {
        return domain("delta must be nonnegative");
    }
    if delta > f.delta_bar() * (1.0 + 1e-12) {
        return domain(format!(
            "delta {delta} exceeds the tube radius {} on which F is declared",
            f.delta_bar()
        ));
    }
    sorted_probes(probes, (s, e))
}

fn sorted_probes(probes: &[f64], (s, e): (f64, f64)) -> Result<Vec<f64>> {
    let mut out = vec![s];
    for &t in probes {
        if !(t >= s && t <= e) {
            return domain(format!("probe time {t} outside [{s}, {e}]"));
        }
        out.push(t);
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

/// `I^δ(P)`: sum over cells of the sampled tube supremum of Hausdorff increments.
pub fn partition_sum(
    f: &Multifunction,
    xbar: &Trajectory,
    p: &Partition,
    delta: f64,
    res: &TubeResolution,
) -> Result<f64> {
    check_inputs(f, xbar, &[], delta)?;
    let (s, e) = f.span();
    if p.start() < s || p.end() > e {
        return domain(format!(
            "partition [{}, {}] leaves [{s}, {e}]",
            p.start(),
            p.end()
        ));
    }
    let weights: Vec<f64> = p
        .points()
        .par_windows(2)
        .map(|w| cell_weight(f, xbar, w[0], w[1], delta, res))
        .collect();
    Ok(weights.iter().sum())
}

fn seed_points(f: &Multifunction, probes: &[f64], halo: f64) -> Vec<f64> {
    let (s, e) = f.span();
    let kappa = halo * (e - s);
    let mut pts = probes.to_vec();
    for &b in f.breakpoints() {
        for p in [b, b - kappa, b + kappa] {
            if p > s && p < e {
                pts.push(p);
            }
        }
    }
    pts
}

fn grid_nodes(span: (f64, f64), level: u32, seeds: &[f64]) -> Vec<f64> {
    let (s, e) = span;
    let n = 1usize << level;
    let mut g: Vec<f64> = (0..=n).map(|i| node(s, e, i, n)).collect();
    g.extend(seeds.iter().copied().filter(|&p| p > s && p < e));
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn in_window(gap: f64, eps: f64) -> bool {
    gap <= eps * (1.0 + 1e-12)
}

fn window_starts(nodes: &[f64], eps: f64) -> Vec<usize> {
    let mut lo = vec![0; nodes.len()];
    let mut i = 0;
    for j in 1..nodes.len() {
        while i < j && !in_window(nodes[j] - nodes[i], eps) {
            i += 1;
        }
        lo[j] = i.min(j - 1);
    }
    lo
}

/// Exact supremum of `I^δ` over partitions drawn from `nodes` with mesh `<= eps`,
/// for every prefix `[S, nodes[j]]`.
fn dp_sup(f: &Multifunction, xbar: &Trajectory, nodes: &[f64], delta: f64, eps: f64, res: &TubeResolution) -> Vec<f64> {
    let lo = window_starts(nodes, eps);
    let weights: Vec<Vec<f64>> = (1..nodes.len())
        .into_par_iter()
        .map(|j| {
            (lo[j]..j)
                .map(|i| cell_weight(f, xbar, nodes[i], nodes[j], delta, res))
                .collect()
        })
        .collect();
    let mut v = vec![0.0; nodes.len()];
    for j in 1..nodes.len() {
        let row = &weights[j - 1];
        v[j] = (lo[j]..j)
            .zip(row)
            .map(|(i, w)| v[i] + w)
            .fold(f64::NEG_INFINITY, f64::max);
    }
    v
}

fn pair_count(nodes: &[f64], eps: f64) -> usize {
    window_starts(nodes, eps)
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, &i)| j - i)
        .sum()
}

/// `η^δ_ε` at each probe time (and at `S`, where it is zero).
pub fn eta_delta_eps_profile(
    f: &Multifunction,
    xbar: &Trajectory,
    probes: &[f64],
    delta: f64,
    eps: f64,
    settings: &VariationSettings,
) -> Result<VariationProfile> {
    let probes = check_inputs(f, xbar, probes, delta)?;
    if !(eps > 0.0) {
        return domain("eps must be positive");
    }
    let span = f.span();
    let len = span.1 - span.0;
    let base_level = (len / eps).log2().ceil().max(0.0) as u32;
    let seeds = seed_points(f, &probes, settings.breakpoint_halo);

    let mut trace = Vec::new();
    let mut warnings = Vec::new();
    let mut best: Option<Vec<f64>> = None;
    let mut converged = false;
    for depth in 0..=settings.max_depth {
        let level = base_level + depth;
        if level > 40 {
            warnings.push(format!("grid level capped at depth {depth}"));
            break;
        }
        let nodes = grid_nodes(span, level, &seeds);
        if depth > 0 && pair_count(&nodes, eps) > settings.pair_budget {
            warnings.push(format!("pair budget reached at refinement depth {depth}"));
            break;
        }
        let v = dp_sup(f, xbar, &nodes, delta, eps, &settings.tube);
        let at_probes: Vec<f64> = probes
            .iter()
            .map(|p| v[nodes.binary_search_by(|q| q.total_cmp(p)).expect("probe is a node")])
            .collect();
        trace.push(RefinementStep {
            depth,
            nodes: nodes.len(),
            value: *at_probes.last().unwrap(),
        });
        let settled = best.as_ref().is_some_and(|prev: &Vec<f64>| {
            prev.iter()
                .zip(&at_probes)
                .all(|(a, b)| (b - a).abs() <= settings.refine_tolerance)
        });
        best = Some(at_probes);
        if settled && depth >= settings.min_depth {
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(format!(
            "refinement did not settle to {} within depth {}",
            settings.refine_tolerance, settings.max_depth
        ));
    }
    let values = probes
        .iter()
        .zip(best.unwrap_or_default())
        .map(|(&t, eta)| ProfilePoint { t, eta })
        .collect();
    Ok(VariationProfile {
        schema_version: 1,
        delta: Some(delta),
        eps: MeshBound::Eps(eps),
        values,
        refinement_trace: trace,
        schedule_trace: Vec::new(),
        converged,
        warnings,
    })
}

/// `η^δ_ε(t)` at a single time.
pub fn eta_delta_eps(
    f: &Multifunction,
    xbar: &Trajectory,
    t: f64,
    delta: f64,
    eps: f64,
    settings: &VariationSettings,
) -> Result<f64> {
    Ok(eta_delta_eps_profile(f, xbar, &[t], delta, eps, settings)?.at(t))
}

fn check_nonincreasing(prev: &VariationProfile, next: &VariationProfile, slack: f64, what: &str) -> Result<()> {
    for (a, b) in prev.values.iter().zip(&next.values) {
        if b.eta > a.eta + slack * a.eta.abs().max(1.0) {
            return Err(Error::Consistency(format!(
                "{what}: value at t = {} rose from {} to {}",
                a.t, a.eta, b.eta
            )));
        }
    }
    Ok(())
}

fn settled(prev: &VariationProfile, next: &VariationProfile, tol: f64) -> bool {
    prev.values
        .iter()
        .zip(&next.values)
        .all(|(a, b)| (a.eta - b.eta).abs() < tol)
}

/// `η^δ = lim_{ε↓0} η^δ_ε`, evaluated along the ε schedule.
pub fn eta_delta(
    f: &Multifunction,
    xbar: &Trajectory,
    probes: &[f64],
    delta: f64,
    settings: &VariationSettings,
) -> Result<VariationProfile> {
    let schedule = settings.eps_schedule_for(f.span());
    schedule.validate()?;
    let mut steps = Vec::new();
    let mut prev: Option<VariationProfile> = None;
    let mut converged = false;
    let mut warnings = Vec::new();
    for eps in schedule.values() {
        let p = eta_delta_eps_profile(f, xbar, probes, delta, eps, settings)?;
        warnings.extend(p.warnings.iter().map(|w| format!("eps {eps}: {w}")));
        steps.push(ScheduleStep {
            delta: Some(delta),
            eps: Some(eps),
            value: p.last_value(),
        });
        if let Some(q) = &prev {
            check_nonincreasing(q, &p, settings.ordering_slack, "eps schedule")?;
            converged = settled(q, &p, settings.schedule_tolerance);
        }
        prev = Some(p);
    }
    let mut out = prev.expect("schedule has at least one value");
    out.eps = MeshBound::Limit;
    out.schedule_trace = steps;
    out.converged = converged;
    out.warnings = warnings;
    Ok(out)
}

/// `η = lim_{δ↓0} η^δ`, evaluated along the δ schedule.
pub fn eta(
    f: &Multifunction,
    xbar: &Trajectory,
    probes: &[f64],
    settings: &VariationSettings,
) -> Result<VariationProfile> {
    let schedule = settings.delta_schedule_for(f);
    schedule.validate()?;
    let mut steps = Vec::new();
    let mut prev: Option<VariationProfile> = None;
    let mut converged = false;
    let mut warnings = Vec::new();
    for delta in schedule.values() {
        let p = eta_delta(f, xbar, probes, delta, settings)?;
        warnings.extend(p.warnings.iter().cloned());
        steps.extend(p.schedule_trace.iter().cloned());
        if let Some(q) = &prev {
            check_nonincreasing(q, &p, settings.ordering_slack, "delta schedule")?;
            converged = settled(q, &p, settings.schedule_tolerance);
        }
        prev = Some(p);
    }
    let mut out = prev.expect("schedule has at least one value");
    out.schedule_trace = steps;
    out.converged = converged;
    out.warnings = warnings;
    Ok(out)
}

/// Variation with the inner supremum over a fixed set `X` instead of the
/// trajectory tube, and no mesh restriction.
///
/// By the triangle inequality for `d_H`, refining a partition never lowers
/// the sum, so plain dyadic refinement converges to the supremum.
pub fn eta_simple(
    f: &Multifunction,
    probes: &[f64],
    x_set: &SetValue,
    settings: &VariationSettings,
) -> Result<VariationProfile> {
    f.validate()?;
    x_set.validate()?;
    let span = f.span();
    let probes = sorted_probes(probes, span)?;
    let xs = x_set.sample_points(settings.set_resolution);
    let seeds = seed_points(f, &probes, settings.breakpoint_halo);
    let weight = |t0: f64, t1: f64| {
        let mut best: f64 = 0.0;
        for x in &xs {
            for a in f.a_points() {
                best = best.max(hausdorff_fast(&f.eval(t1, x, a), &f.eval(t0, x, a)));
            }
        }
        best
    };
    let mut trace = Vec::new();
    let mut best: Option<Vec<f64>> = None;
    let mut converged = false;
    let max_level = 4 + settings.max_depth.max(settings.min_depth) + 6;
    for level in 0..=max_level {
        let nodes = grid_nodes(span, level, &seeds);
        let w: Vec<f64> = nodes.par_windows(2).map(|c| weight(c[0], c[1])).collect();
        let mut prefix = vec![0.0; nodes.len()];
        for j in 1..nodes.len() {
            prefix[j] = prefix[j - 1] + w[j - 1];
        }
        let at: Vec<f64> = probes
            .iter()
            .map(|p| prefix[nodes.binary_search_by(|q| q.total_cmp(p)).expect("probe is a node")])
            .collect();
        trace.push(RefinementStep {
            depth: level,
            nodes: nodes.len(),
            value: *at.last().unwrap(),
        });
        let done = best.as_ref().is_some_and(|prev: &Vec<f64>| {
            prev.iter()
                .zip(&at)
                .all(|(a, b)| (b - a).abs() <= settings.refine_tolerance)
        });
        best = Some(at);
        if done && level >= 2 {
            converged = true;
            break;
        }
    }
    let values = probes
        .iter()
        .zip(best.unwrap_or_default())
        .map(|(&t, eta)| ProfilePoint { t, eta })
        .collect();
    Ok(VariationProfile {
        schema_version: 1,
        delta: None,
        eps: MeshBound::Unrestricted,
        values,
        refinement_trace: trace,
        schedule_trace: Vec::new(),
        converged,
        warnings: if converged {
            Vec::new()
        } else {
            vec![String::from("fixed-set refinement did not settle")]
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn section2() -> (Multifunction, Trajectory) {
        let f = Multifunction::from_point_map((0.0, 1.0), |t, x| vec![t * x[0]]).with_tube_radius(0.1);
        let xbar = Trajectory::from_fn(0.0, 1.0, 256, |t| vec![t]).unwrap().with_modulus(|h| h);
        (f, xbar)
    }

    fn step_half() -> (Multifunction, Trajectory) {
        let f = Multifunction::from_point_map((0.0, 1.0), |t, _| vec![if t >= 0.5 { 1.0 } else { 0.0 }])
            .with_breakpoints(vec![0.5]);
        let xbar = Trajectory::from_fn(0.0, 1.0, 4, |_| vec![0.0]).unwrap();
        (f, xbar)
    }

    #[test]
    fn constant_map_has_zero_sum() {
        let f = Multifunction::new((0.0, 1.0), |_, _, _| SetValue::interval(-1.0, 2.0));
        let xbar = Trajectory::from_fn(0.0, 1.0, 8, |t| vec![t]).unwrap();
        let p = Partition::uniform(0.0, 1.0, 7).unwrap();
        assert_eq!(partition_sum(&f, &xbar, &p, 0.5, &TubeResolution::default()).unwrap(), 0.0);
    }

    #[test]
    fn partition_sum_matches_hand_evaluation() {
        let (f, xbar) = section2();
        for n in [2usize, 5, 16] {
            let p = Partition::uniform(0.0, 1.0, n).unwrap();
            // sup over s in [t_i, t_{i+1}] of |t_{i+1} s - t_i s| = (t_{i+1} - t_i) t_{i+1}
            let hand: f64 = p.cells().map(|(a, b)| (b - a) * b).sum();
            let got = partition_sum(&f, &xbar, &p, 0.0, &TubeResolution::default()).unwrap();
            assert!((got - hand).abs() < 1e-12, "n = {n}: {got} vs {hand}");
        }
    }

    #[test]
    fn step_partition_sum_is_one() {
        let (f, xbar) = step_half();
        let p = Partition::new(vec![0.0, 0.3, 0.5, 0.9, 1.0]).unwrap();
        assert_eq!(partition_sum(&f, &xbar, &p, 0.0, &TubeResolution::default()).unwrap(), 1.0);
    }

    #[test]
    fn delta_beyond_tube_is_rejected() {
        let (f, xbar) = section2();
        let p = Partition::uniform(0.0, 1.0, 4).unwrap();
        assert!(matches!(
            partition_sum(&f, &xbar, &p, 0.5, &TubeResolution::default()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn eta_at_start_is_zero() {
        let (f, xbar) = section2();
        let s = VariationSettings::default();
        assert_eq!(eta_delta_eps(&f, &xbar, 0.0, 0.1, 0.1, &s).unwrap(), 0.0);
    }

    #[test]
    fn eta_delta_eps_bracket_for_section2_example() {
        let (f, xbar) = section2();
        let s = VariationSettings::default();
        for t in [0.3, 0.6, 1.0] {
            for eps in [0.25, 0.05, 0.01] {
                let v = eta_delta_eps(&f, &xbar, t, 0.1, eps, &s).unwrap();
                assert!(v >= t * t / 2.0 - 1e-12, "t={t} eps={eps}: {v}");
                // coarsest cells of size <= eps: excess at most eps·t/2 over t²/2 + δt
                assert!(v <= t * t / 2.0 + 0.1 * t + eps * t / 2.0 + 1e-12, "t={t} eps={eps}: {v}");
            }
        }
    }

    #[test]
    fn refinement_trace_is_nondecreasing() {
        let f = Multifunction::from_point_map((0.0, 1.0), |t, x| vec![(7.0 * t).sin() * (1.0 + x[0])]).with_tube_radius(0.2);
        let xbar = Trajectory::from_fn(0.0, 1.0, 64, |t| vec![t * t]).unwrap();
        let s = VariationSettings { min_depth: 4, ..Default::default() };
        let p = eta_delta_eps_profile(&f, &xbar, &[0.5, 1.0], 0.05, 0.2, &s).unwrap();
        assert!(p.refinement_trace.windows(2).all(|w| w[0].value <= w[1].value));
        assert!(p.values.windows(2).all(|w| w[0].eta <= w[1].eta));
    }

    #[test]
    fn section2_limits() {
        let (f, xbar) = section2();
        let s = VariationSettings::default();
        let p = eta(&f, &xbar, &[0.6, 1.0], &s).unwrap();
        assert!((p.at(1.0) - 0.5).abs() < 1e-3, "{}", p.at(1.0));
        assert!((p.at(0.6) - 0.18).abs() < 1e-3, "{}", p.at(0.6));
        // η^δ(1) = 1/2 + δ, so the last two δ levels still differ by δ_min
        assert!(!p.converged);
    }

    #[test]
    fn simple_variant_over_fixed_set() {
        let (f, _) = section2();
        let p = eta_simple(&f, &[0.5, 1.0], &SetValue::interval(0.0, 1.0), &VariationSettings::default()).unwrap();
        assert!((p.at(1.0) - 1.0).abs() < 1e-3);
        assert!((p.at(0.5) - 0.5).abs() < 1e-3);
        let c = Multifunction::new((0.0, 1.0), |_, _, _| SetValue::scalar(3.0));
        let q = eta_simple(&c, &[1.0], &SetValue::interval(0.0, 1.0), &VariationSettings::default()).unwrap();
        assert_eq!(q.at(1.0), 0.0);
    }

    #[test]
    fn step_has_unit_variation() {
        let (f, xbar) = step_half();
        let s = VariationSettings::default();
        let p = eta(&f, &xbar, &[0.4, 0.5, 1.0], &s).unwrap();
        assert_eq!(p.at(0.4), 0.0);
        assert!((p.at(0.5) - 1.0).abs() < 1e-12);
        assert!((p.at(1.0) - 1.0).abs() < 1e-12);
        assert!(p.converged);
    }

    #[test]
    fn profile_csv_header() {
        let (f, xbar) = step_half();
        let p = eta_delta_eps_profile(&f, &xbar, &[1.0], 0.0, 0.25, &VariationSettings::default()).unwrap();
        assert!(p.to_csv().starts_with("t,eta\n0,0\n"));
        assert!(p.to_json().contains("refinement_trace"));
    }
}
