use serde::{Deserialize, Serialize};

use super::discrete::{discrete_measure, integrate, DiscreteMeasure, Window, XiRule};
use super::field::ScalarField;
use super::test_functions::{test_catalog, TestFunction};
use crate::error::{domain, Result};
use crate::trajectory::Trajectory;
use crate::variation::{eta_delta_eps, Partition, VariationSettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeasureSettings {
    /// Dyadic levels `2^j` cells, `j = min_level..=max_level`.
    pub min_level: u32,
    pub max_level: u32,
    /// Cauchy tolerance on `sup_g |<μ^j - μ^{j+1}, g>|`.
    pub tolerance: f64,
    pub xi: XiRule,
    /// `ρ_j = rho_scale · diam(P_j)`.
    pub rho_scale: f64,
    /// Halo nodes at `b ± halo·(T - S)` around each breakpoint.
    pub halo: f64,
    /// Tube radius for the variation bounds; defaults to half the field's radius.
    pub bound_delta: Option<f64>,
    pub variation: VariationSettings,
}

impl Default for MeasureSettings {
    fn default() -> Self {
        MeasureSettings {
            min_level: 4,
            max_level: 14,
            tolerance: 1e-4,
            xi: XiRule::Left,
            rho_scale: 1.0,
            halo: 1e-9,
            bound_delta: None,
            variation: VariationSettings {
                max_depth: 3,
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSummary {
    pub level: u32,
    pub atoms: usize,
    pub diam: f64,
    pub rho: f64,
    pub total_variation: f64,
}

/// Comparison of level `level` against the next finer level.
#[derive(Debug, Clone, Serialize)]
pub struct CauchyStep {
    pub level: u32,
    pub diam: f64,
    pub sup_difference: f64,
    pub worst_test: String,
    /// Smallest `bound_g - |<μ^j - μ^{j+1}, g>|` over the catalog.
    pub min_bound_margin: f64,
    pub bound_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureLimit {
    pub schema_version: u32,
    pub measure: DiscreteMeasure,
    pub levels: Vec<LevelSummary>,
    pub cauchy_trace: Vec<CauchyStep>,
    pub test_functions: Vec<String>,
    /// `η^δ̄_ε̄(T)` for `m` and for `∇ₓm`.
    pub eta_bar: f64,
    pub eta_tilde_bar: f64,
    pub bound_delta: f64,
    pub bound_eps: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl MeasureLimit {
    /// `<μ, g>` on the finest level for every catalog function.
    pub fn pairings(&self, catalog: &[TestFunction]) -> Vec<(String, f64)> {
        catalog
            .iter()
            .map(|g| (g.name.clone(), integrate(|t| g.eval(t), &self.measure, Window::Closed)))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("measure limit serializes")
    }
}

/// Breakpoints and their halo nodes, plus `extra`, inside `(S, T)`.
pub(crate) fn seed_times(m: &ScalarField, halo: f64, extra: &[f64]) -> Vec<f64> {
    let (s, e) = m.span();
    let kappa = halo * (e - s);
    let mut out: Vec<f64> = m
        .breakpoints()
        .iter()
        .flat_map(|&b| [b - kappa, b, b + kappa])
        .chain(extra.iter().copied())
        .filter(|&p| p > s && p < e)
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// `μ^j` on the dyadic level-`level` partition merged with the seeds.
pub fn measure_at_level(
    m: &ScalarField,
    xbar: &Trajectory,
    level: u32,
    settings: &MeasureSettings,
    extra: &[f64],
) -> Result<(DiscreteMeasure, Partition)> {
    let (s, e) = m.span();
    let p = Partition::dyadic(s, e, level, &seed_times(m, settings.halo, extra))?;
    let rho = settings.rho_scale * p.diam();
    Ok((discrete_measure(m, xbar, &p, &settings.xi, rho)?, p))
}

/// Partial variation measure of `m(·, x)` along `x̄` as the weak* limit of
/// nested dyadic discrete measures, with the Cauchy trace over `catalog`
/// (the built-in test catalog when `None`) checked against the a priori bound
/// `θ_g(ε_j) η + 2 (θ_x̄(ε_j) + ρ_j) ||g|| η̃`.
pub fn partial_variation_measure(
    m: &ScalarField,
    xbar: &Trajectory,
    settings: &MeasureSettings,
    catalog: Option<&[TestFunction]>,
    extra: &[f64],
) -> Result<MeasureLimit> {
    m.validate(xbar)?;
    if settings.min_level > settings.max_level || settings.max_level > 24 {
        return domain("need min_level <= max_level <= 24");
    }
    if !(settings.tolerance > 0.0) {
        return domain("tolerance must be positive");
    }
    let owned;
    let catalog = match catalog {
        Some(c) => c,
        None => {
            owned = test_catalog(m.span(), m.out_dim());
            &owned
        }
    };
    let (s, e) = m.span();
    let mut warnings = Vec::new();

    let bound_delta = settings.bound_delta.unwrap_or(m.delta_prime() / 2.0);
    let bound_eps = (e - s) / f64::from(1u32 << settings.min_level);
    if xbar.modulus(bound_eps) > bound_delta {
        warnings.push(format!(
            "trajectory modulus at {bound_eps} exceeds the tube radius {bound_delta}; the bound may not apply"
        ));
    }
    let eta_bar = eta_delta_eps(&m.value_map(), xbar, e, bound_delta, bound_eps, &settings.variation)?;
    let eta_tilde_bar = eta_delta_eps(&m.jacobian_map(), xbar, e, bound_delta, bound_eps, &settings.variation)?;

    let mut levels = Vec::new();
    let mut trace = Vec::new();
    let mut prev: Option<(DiscreteMeasure, f64, f64, Vec<f64>)> = None;
    let mut converged = false;
    let mut finest = None;
    for level in settings.min_level..=settings.max_level {
        let (mu, p) = measure_at_level(m, xbar, level, settings, extra)?;
        let diam = p.diam();
        let rho = settings.rho_scale * diam;
        levels.push(LevelSummary {
            level,
            atoms: mu.atoms.len(),
            diam,
            rho,
            total_variation: mu.total_variation,
        });
        let pairs: Vec<f64> = catalog
            .iter()
            .map(|g| integrate(|t| g.eval(t), &mu, Window::Closed))
            .collect();
        if let Some((_, pdiam, prho, ppairs)) = &prev {
            let mut sup = 0.0;
            let mut worst = String::new();
            let mut margin = f64::INFINITY;
            for ((g, a), b) in catalog.iter().zip(ppairs).zip(&pairs) {
                let d = (a - b).abs();
                if d > sup || worst.is_empty() {
                    sup = d.max(sup);
                    worst = g.name.clone();
                }
                let bound = g.modulus(*pdiam) * eta_bar
                    + 2.0 * (xbar.modulus(*pdiam) + prho) * g.sup_norm * eta_tilde_bar;
                margin = margin.min(bound - d);
            }
            trace.push(CauchyStep {
                level: level - 1,
                diam: *pdiam,
                sup_difference: sup,
                worst_test: worst,
                min_bound_margin: margin,
                bound_ok: margin >= -1e-12,
            });
            if sup < settings.tolerance {
                converged = true;
                finest = Some(mu);
                break;
            }
        }
        prev = Some((mu, diam, rho, pairs));
    }
    if !converged {
        warnings.push(format!(
            "Cauchy criterion {} not met by level {}",
            settings.tolerance, settings.max_level
        ));
    }
    let measure = finest.or(prev.map(|p| p.0)).expect("at least one level");
    Ok(MeasureLimit {
        schema_version: 1,
        measure,
        levels,
        cauchy_trace: trace,
        test_functions: catalog.iter().map(|g| g.name.clone()).collect(),
        eta_bar,
        eta_tilde_bar,
        bound_delta,
        bound_eps,
        converged,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Trajectory {
        Trajectory::from_fn(0.0, 1.0, 64, |t| vec![t]).unwrap()
    }

    #[test]
    fn t_times_x_has_density_t() {
        let m = ScalarField::new((0.0, 1.0), 1, 1, |t, x| vec![t * x[0]], |t, _| vec![t]).with_radius(0.2);
        let lim = partial_variation_measure(&m, &line(), &MeasureSettings::default(), None, &[]).unwrap();
        assert!(lim.converged);
        let mass = integrate(|_| vec![1.0], &lim.measure, Window::Closed);
        assert!((mass - 0.5).abs() < 1e-3, "{mass}");
        assert!(lim.cauchy_trace.iter().all(|c| c.bound_ok));
    }

    #[test]
    fn step_becomes_a_dirac() {
        let m = ScalarField::time_only((0.0, 1.0), 1, |t| if t >= 0.5 { 1.0 } else { 0.0 }).with_breakpoints(vec![0.5]);
        let lim = partial_variation_measure(&m, &line(), &MeasureSettings::default(), None, &[]).unwrap();
        for g in test_catalog((0.0, 1.0), 1) {
            let v = integrate(|t| g.eval(t), &lim.measure, Window::Closed);
            assert!((v - g.eval(0.5)[0]).abs() < 1e-6, "{}: {v}", g.name);
        }
    }
}
