use serde::Serialize;

use super::discrete::DiscreteMeasure;
use super::field::ScalarField;
use super::limit::{measure_at_level, MeasureSettings};
use crate::error::{domain, Error, Result};
use crate::geometry::dist;
use crate::trajectory::Trajectory;
use crate::variation::{eta, eta_delta, VariationProfile};

#[derive(Debug, Clone, Serialize)]
pub struct IntervalBoundRow {
    pub a: f64,
    pub b: f64,
    pub xi_time: f64,
    /// `|μ([a, b]) - (m(b, ξ) - m(a, ξ))|`.
    pub lhs: f64,
    pub modulus_term: f64,
    pub left_jump: f64,
    pub right_jump: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// Shared tables for checking many subintervals of one field: a fine
/// discrete measure containing every probe endpoint, `η` of `m` and
/// `η̃^δ` of `∇ₓm` at the endpoints and at `κ`-offsets around them.
pub struct IntervalBoundContext<'a> {
    m: &'a ScalarField,
    xbar: &'a Trajectory,
    delta: f64,
    kappa: f64,
    measure: DiscreteMeasure,
    eta: VariationProfile,
    eta_tilde: VariationProfile,
}

impl<'a> IntervalBoundContext<'a> {
    /// `level` is the dyadic level of the measure; `offset` is the `κ` used
    /// for the one-sided limits of `η`, relative to `T - S`.
    pub fn new(
        m: &'a ScalarField,
        xbar: &'a Trajectory,
        delta: f64,
        endpoints: &[f64],
        level: u32,
        offset: f64,
        settings: &MeasureSettings,
    ) -> Result<Self> {
        m.validate(xbar)?;
        if !(delta > 0.0 && delta < m.delta_prime()) {
            return domain(format!("delta must lie in (0, {})", m.delta_prime()));
        }
        let (s, e) = m.span();
        let kappa = offset * (e - s);
        let mut probes: Vec<f64> = endpoints
            .iter()
            .flat_map(|&t| [t - kappa, t, t + kappa])
            .filter(|&t| t >= s && t <= e)
            .collect();
        probes.sort_by(f64::total_cmp);
        probes.dedup();
        // cells of length κ/2 just outside each endpoint; their mass is then
        // dominated by the variation over the κ-offsets used for the jump terms
        let seeds: Vec<f64> = endpoints
            .iter()
            .flat_map(|&t| [t - kappa / 2.0, t, t + kappa / 2.0])
            .collect();
        let (measure, _) = measure_at_level(m, xbar, level, settings, &seeds)?;
        let mut vs = settings.variation.clone();
        vs.delta_schedule = Some(crate::variation::Schedule::halving(delta));
        let eta = eta(&m.value_map().with_tube_radius(delta), xbar, &probes, &vs)?;
        let eta_tilde = eta_delta(&m.jacobian_map().with_tube_radius(delta), xbar, &probes, delta, &vs)?;
        Ok(IntervalBoundContext {
            m,
            xbar,
            delta,
            kappa,
            measure,
            eta,
            eta_tilde,
        })
    }

    /// Checks the bound on `[a, b]` with `ξ = x̄(xi_time)`; rejects probes
    /// violating `θ_x̄(b - a) <= δ` or with `xi_time` outside `[a, b]`.
    pub fn check(&self, a: f64, b: f64, xi_time: f64) -> Result<IntervalBoundRow> {
        let (s, e) = self.m.span();
        if !(s <= a && a < b && b <= e) {
            return domain(format!("[{a}, {b}] is not a subinterval of [{s}, {e}]"));
        }
        if !(a <= xi_time && xi_time <= b) {
            return domain("xi must be taken at a time inside [a, b]");
        }
        let theta = self.xbar.modulus(b - a);
        if theta > self.delta {
            return Err(Error::Rejected(format!(
                "trajectory modulus {theta} on [{a}, {b}] exceeds delta {}",
                self.delta
            )));
        }
        let xi = self.xbar.eval(xi_time);
        let mu = self.measure.interval_mass(a, b);
        let diff: Vec<f64> = self
            .m
            .eval(b, &xi)
            .iter()
            .zip(self.m.eval(a, &xi))
            .map(|(p, q)| p - q)
            .collect();
        let lhs = dist(&mu, &diff);
        let modulus_term = theta * (self.eta_tilde.at(b) - self.eta_tilde.at(a));
        let left_jump = if a == s { 0.0 } else { self.eta.at(a) - self.eta.at(a - self.kappa) };
        let right_jump = if b == e { 0.0 } else { self.eta.at(b + self.kappa) - self.eta.at(b) };
        let rhs = modulus_term + left_jump + right_jump;
        Ok(IntervalBoundRow {
            a,
            b,
            xi_time,
            lhs,
            modulus_term,
            left_jump,
            right_jump,
            rhs,
            margin: rhs - lhs,
        })
    }
}

/// One-off form of [`IntervalBoundContext::check`].
pub fn interval_bound_check(
    m: &ScalarField,
    xbar: &Trajectory,
    a: f64,
    b: f64,
    xi_time: f64,
    delta: f64,
    settings: &MeasureSettings,
) -> Result<IntervalBoundRow> {
    IntervalBoundContext::new(m, xbar, delta, &[a, b], settings.max_level, 1e-6, settings)?.check(a, b, xi_time)
}
