//! Diagnostic reports for the structural identities of cumulative variation.

use serde::Serialize;

use super::engine::{eta_delta, eta_delta_eps_profile, VariationSettings};
use super::limits::{endpoint_regularize, one_sided_limit, LimitSchedule, Side};
use super::multifunction::{checked_distance, tube_points, Multifunction};
use crate::error::{domain, Result};
use crate::geometry::hausdorff_fast;
use crate::trajectory::Trajectory;

/// `F` with `S` and `T` added to its breakpoints, so the engine places
/// halo nodes next to both ends.
fn with_end_breakpoints(f: &Multifunction) -> Multifunction {
    let (s, e) = f.span();
    let mut b = f.breakpoints().to_vec();
    b.extend([s, e]);
    f.clone().with_breakpoints(b)
}

/// Tube supremum of `d_H(F(t, x, a), F(t^±, x, a))` over `x̄(t) + δB`.
pub fn endpoint_jump(
    f: &Multifunction,
    xbar: &Trajectory,
    t: f64,
    side: Side,
    delta: f64,
    settings: &VariationSettings,
    sched: &LimitSchedule,
) -> Result<f64> {
    let mut best: f64 = 0.0;
    for x in tube_points(xbar, t, t, delta, &settings.tube) {
        for a in f.a_points() {
            let lim = one_sided_limit(f, xbar, t, side, &x, a, sched)?;
            best = best.max(checked_distance(&f.eval(t, &x, a), &lim)?);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct EndpointRow {
    pub t: f64,
    pub eta: f64,
    pub eta_tilde: f64,
    /// `η^δ(t)` minus the endpoint jump terms that apply at `t`.
    pub predicted: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EndpointReport {
    pub delta: f64,
    pub jump_at_start: f64,
    pub jump_at_end: f64,
    pub rows: Vec<EndpointRow>,
    /// `|η̃(S + κ) - η̃(S)|` and `|η̃(T) - η̃(T - κ)|`.
    pub right_continuity_gap: f64,
    pub left_continuity_gap: f64,
    pub offset: f64,
    /// Largest `|η̃(t) - predicted(t)|` over the probes.
    pub identity_error: f64,
    /// Largest mismatch of interior increments of `η̃` and `η`.
    pub increment_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares `η^δ` of `F` with that of its endpoint regularization `F̃`.
///
/// Checks one-sided continuity of `η̃^δ` at `S` and `T` (probed at
/// `S + κ`, `T - κ` with `κ = 2^-12 (T - S)`), the identity relating
/// `η̃^δ` to `η^δ` minus the endpoint jump suprema, and equality of their
/// increments on interior intervals.
pub fn check_endpoint_identities(
    f: &Multifunction,
    xbar: &Trajectory,
    delta: f64,
    settings: &VariationSettings,
    sched: &LimitSchedule,
    tolerance: f64,
) -> Result<EndpointReport> {
    if !(delta > 0.0 && delta < f.delta_bar()) {
        return domain(format!("delta must lie in (0, {})", f.delta_bar()));
    }
    let (s, e) = f.span();
    let len = e - s;
    let kappa = len / 4096.0;
    let g = with_end_breakpoints(f);
    let g_tilde = endpoint_regularize(&g, xbar, &settings.tube, sched)?;
    let j_s = endpoint_jump(&g, xbar, s, Side::Right, delta, settings, sched)?;
    let j_t = endpoint_jump(&g, xbar, e, Side::Left, delta, settings, sched)?;

    let mut probes = vec![s, s + kappa];
    probes.extend((1..8).map(|k| s + len * k as f64 / 8.0));
    probes.extend([e - kappa, e]);
    let eta = eta_delta(&g, xbar, &probes, delta, settings)?;
    let eta_t = eta_delta(&g_tilde, xbar, &probes, delta, settings)?;

    let rows: Vec<EndpointRow> = eta
        .values
        .iter()
        .zip(&eta_t.values)
        .map(|(p, q)| {
            let predicted = if p.t == s {
                0.0
            } else if p.t == e {
                p.eta - j_s - j_t
            } else {
                p.eta - j_s
            };
            EndpointRow {
                t: p.t,
                eta: p.eta,
                eta_tilde: q.eta,
                predicted,
            }
        })
        .collect();
    let identity_error = rows
        .iter()
        .map(|r| (r.eta_tilde - r.predicted).abs())
        .fold(0.0, f64::max);
    let interior: Vec<&EndpointRow> = rows.iter().filter(|r| r.t > s && r.t < e).collect();
    let mut increment_error: f64 = 0.0;
    for (i, a) in interior.iter().enumerate() {
        for b in &interior[i + 1..] {
            let d = (b.eta_tilde - a.eta_tilde) - (b.eta - a.eta);
            increment_error = increment_error.max(d.abs());
        }
    }
    let n = rows.len();
    let right_gap = (rows[1].eta_tilde - rows[0].eta_tilde).abs();
    let left_gap = (rows[n - 1].eta_tilde - rows[n - 2].eta_tilde).abs();
    let passed = [identity_error, increment_error, right_gap, left_gap]
        .iter()
        .all(|&v| v <= tolerance);
    Ok(EndpointReport {
        delta,
        jump_at_start: j_s,
        jump_at_end: j_t,
        rows,
        right_continuity_gap: right_gap,
        left_continuity_gap: left_gap,
        offset: kappa,
        identity_error,
        increment_error,
        tolerance,
        passed,
    })
}

/// One comparison `(δ', ε', A1) ≤ (δ, ε, A)` on the interval `[s, t]`.
#[derive(Debug, Clone, Serialize)]
pub struct NestingProbe {
    pub s: f64,
    pub t: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub eps: f64,
    pub eps_prime: f64,
    /// Indices into the parameter sample forming `A1`; empty means all of `A`.
    pub subset: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NestingRow {
    pub probe: NestingProbe,
    pub coarse_s: f64,
    pub coarse_t: f64,
    pub fine_s: f64,
    pub fine_t: f64,
    /// Largest `d_H(F(t,y,a), F(u,y,a))` over the sampled tube on `[u, t]`, `u = max(s, t - ε)`.
    pub increment_sup: f64,
    /// `η^δ_ε(t) - η^δ_ε(u)`.
    pub increment_eta: f64,
    pub ordering_ok: bool,
    pub monotone_ok: bool,
    pub increment_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NestingReport {
    pub rows: Vec<NestingRow>,
    pub ordering_violations: usize,
    pub monotone_violations: usize,
    pub increment_violations: usize,
    pub slack: f64,
    pub passed: bool,
}

fn subset_of(f: &Multifunction, idx: &[usize]) -> Result<Multifunction> {
    if idx.is_empty() {
        return Ok(f.clone());
    }
    let a = f.a_points();
    let mut sub = Vec::with_capacity(idx.len());
    for &i in idx {
        match a.get(i) {
            Some(p) => sub.push(p.clone()),
            None => return domain(format!("parameter index {i} out of range")),
        }
    }
    Ok(f.restrict_parameters(sub))
}

/// For each probe checks the ordering `0 <= η^{δ'}_{ε'} <= η^δ_ε` (with
/// `A1` on the left) at `s` and `t`, that `η^δ_ε(s) <= η^δ_ε(t)`, and the
/// increment bound `d_H(F(t,y,a), F(u,y,a)) <= η^δ_ε(t) - η^δ_ε(u)` on a
/// window of length at most `ε`.
pub fn check_monotone_nesting(
    f: &Multifunction,
    xbar: &Trajectory,
    probes: &[NestingProbe],
    settings: &VariationSettings,
    slack: f64,
) -> Result<NestingReport> {
    let mut rows = Vec::with_capacity(probes.len());
    for p in probes {
        if !(p.s <= p.t && p.delta_prime <= p.delta && p.eps_prime <= p.eps) {
            return domain(format!("probe is not ordered: {p:?}"));
        }
        let u = p.s.max(p.t - p.eps);
        let coarse = eta_delta_eps_profile(f, xbar, &[p.s, u, p.t], p.delta, p.eps, settings)?;
        let fine_f = subset_of(f, &p.subset)?;
        let fine = eta_delta_eps_profile(&fine_f, xbar, &[p.s, p.t], p.delta_prime, p.eps_prime, settings)?;
        let (cs, cu, ct) = (coarse.at(p.s), coarse.at(u), coarse.at(p.t));
        let (fs, ft) = (fine.at(p.s), fine.at(p.t));
        let mut inc: f64 = 0.0;
        for y in tube_points(xbar, u, p.t, p.delta, &settings.tube) {
            for a in f.a_points() {
                inc = inc.max(hausdorff_fast(&f.eval(p.t, &y, a), &f.eval(u, &y, a)));
            }
        }
        let ordering_ok = fs >= -slack && ft >= -slack && fs <= cs + slack && ft <= ct + slack;
        let monotone_ok = cs <= ct + slack && cs <= cu + slack && cu <= ct + slack;
        let increment_ok = inc <= ct - cu + slack;
        rows.push(NestingRow {
            probe: p.clone(),
            coarse_s: cs,
            coarse_t: ct,
            fine_s: fs,
            fine_t: ft,
            increment_sup: inc,
            increment_eta: ct - cu,
            ordering_ok,
            monotone_ok,
            increment_ok,
        });
    }
    let count = |pred: fn(&NestingRow) -> bool| rows.iter().filter(|r| !pred(r)).count();
    let ordering_violations = count(|r| r.ordering_ok);
    let monotone_violations = count(|r| r.monotone_ok);
    let increment_violations = count(|r| r.increment_ok);
    Ok(NestingReport {
        passed: ordering_violations + monotone_violations + increment_violations == 0,
        rows,
        ordering_violations,
        monotone_violations,
        increment_violations,
        slack,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IncrementRow {
    pub s: f64,
    pub t: f64,
    /// `η^{δ'}_{A1}(t) - η^{δ'}_{A1}(s)`.
    pub fine: f64,
    /// `η^δ_A(t) - η^δ_A(s)`.
    pub coarse: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IncrementReport {
    pub delta: f64,
    pub delta_prime: f64,
    pub rows: Vec<IncrementRow>,
    pub max_excess: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Increments of `η^{δ'}` over `A1` never exceed those of `η^δ` over `A`
/// for `δ' <= δ`, up to `tolerance` (both sides are limits along the ε
/// schedule, so their truncation errors enter here).
pub fn check_increment_ordering(
    f: &Multifunction,
    xbar: &Trajectory,
    subset: &[usize],
    delta_prime: f64,
    delta: f64,
    pairs: &[(f64, f64)],
    settings: &VariationSettings,
    tolerance: f64,
) -> Result<IncrementReport> {
    if !(delta_prime <= delta) {
        return domain("need delta' <= delta");
    }
    let mut times: Vec<f64> = pairs.iter().flat_map(|&(s, t)| [s, t]).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let coarse = eta_delta(f, xbar, &times, delta, settings)?;
    let fine = eta_delta(&subset_of(f, subset)?, xbar, &times, delta_prime, settings)?;
    let rows: Vec<IncrementRow> = pairs
        .iter()
        .map(|&(s, t)| IncrementRow {
            s,
            t,
            fine: fine.at(t) - fine.at(s),
            coarse: coarse.at(t) - coarse.at(s),
        })
        .collect();
    let max_excess = rows.iter().map(|r| r.fine - r.coarse).fold(f64::NEG_INFINITY, f64::max);
    Ok(IncrementReport {
        delta,
        delta_prime,
        passed: max_excess <= tolerance,
        rows,
        max_excess,
        tolerance,
    })
}
