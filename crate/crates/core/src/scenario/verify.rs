use rayon::prelude::*;
use serde::Serialize;

use crate::catalog;
use crate::error::Result;
use crate::measure::{integrate, partial_variation_measure, test_catalog, MeasureSettings, Window};
use crate::sensitivity::{
    filippov_check, order_ratio, ratio_spread, sensitivity_derivative, ControlSignal, DerivativeSide,
    SensitivitySettings, SimSettings,
};
use crate::variation::{eta, eta_simple, VariationSettings};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub(crate) fn new(name: impl Into<String>, outcome: Result<(bool, String)>) -> Self {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, e.to_string()));
        Check {
            name: name.into(),
            passed,
            detail,
        }
    }
}

/// Closed-form total variation on `[0, 1]` of the piecewise-monotone catalog scalars.
const CLASSICAL_TV: [(&str, f64); 5] = [
    ("pm-abs-sine", 4.0),
    ("pm-sawtooth", 6.0),
    ("pm-zigzag", 6.5),
    ("pm-cubic-step", 2.5),
    ("pm-cosine-drop", 7.0),
];

type Job = fn() -> Result<(bool, String)>;

fn catalog_ids() -> Result<(bool, String)> {
    let t = catalog::catalog_table();
    let ok = !catalog::entries().is_empty() && t.contains("section2-example") && t.contains("bangbang-half");
    Ok((ok, format!("{} entries", catalog::entries().len())))
}

fn section2_eta() -> Result<(bool, String)> {
    let p = catalog::variation_problem("section2-example")?;
    let probes = [0.2, 0.4, 0.6, 0.8, 1.0];
    let prof = eta(&p.f, &p.xbar, &probes, &VariationSettings::default())?;
    let err = probes.iter().map(|&t| (prof.at(t) - t * t / 2.0).abs()).fold(0.0, f64::max);
    Ok((err <= 1e-3, format!("max |eta(t) - t^2/2| = {err:.3e}")))
}

fn section2_simple() -> Result<(bool, String)> {
    let p = catalog::variation_problem("section2-example")?;
    let probes = [0.2, 0.4, 0.6, 0.8, 1.0];
    let prof = eta_simple(&p.f, &probes, &p.x_set, &VariationSettings::default())?;
    let err = probes.iter().map(|&t| (prof.at(t) - t).abs()).fold(0.0, f64::max);
    Ok((err <= 1e-3, format!("max |eta_simple(t) - t| = {err:.3e}")))
}

fn classical_tv() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (id, tv) in CLASSICAL_TV {
        let p = catalog::variation_problem(id)?;
        let v = eta(&p.f, &p.xbar, &[1.0], &VariationSettings::default())?.at(1.0);
        worst = worst.max((v - tv).abs());
    }
    Ok((worst <= 1e-6, format!("max |eta(1) - TV| = {worst:.3e} over {} scalars", CLASSICAL_TV.len())))
}

fn step_measure() -> Result<(bool, String)> {
    let (m, xbar) = catalog::field("step-field")?;
    let lim = partial_variation_measure(&m, &xbar, &MeasureSettings::default(), None, &[])?;
    let cell = lim.levels.last().map_or(0.0, |l| l.diam);
    let near: f64 = lim
        .measure
        .atoms
        .iter()
        .filter(|a| (a.t - 0.5).abs() <= cell)
        .map(|a| a.weight[0])
        .sum();
    let pair_err = test_catalog(m.span(), 1)
        .iter()
        .map(|g| (integrate(|t| g.eval(t), &lim.measure, Window::Closed) - g.eval(0.5)[0]).abs())
        .fold(0.0, f64::max);
    let bound_ok = lim.cauchy_trace.iter().all(|c| c.bound_ok);
    Ok((
        near >= 0.999 && pair_err <= 1e-3 && bound_ok,
        format!("mass near 1/2 = {near:.6}, max pairing error = {pair_err:.3e}, bound dominated = {bound_ok}"),
    ))
}

fn quick_settings() -> SensitivitySettings {
    SensitivitySettings {
        sim: SimSettings { steps: 512 },
        ..Default::default()
    }
}

fn ramp_sensitivity() -> Result<(bool, String)> {
    let sys = catalog::system("integrator")?;
    let r = sensitivity_derivative(&sys, &catalog::control("ramp")?, 0.0, DerivativeSide::TwoSided, &quick_settings())?;
    let fd = r.fd.as_ref().map_or(f64::NAN, |f| f.symmetric_extrapolated);
    let ok = (r.value + 1.0).abs() <= 1e-3 && (r.value - fd).abs() <= 1e-2;
    Ok((ok, format!("two-sided = {:.6}, fd = {fd:.6}", r.value)))
}

fn bangbang_sensitivity() -> Result<(bool, String)> {
    let sys = catalog::system("integrator")?;
    let r = sensitivity_derivative(&sys, &catalog::control("bangbang-half")?, 0.0, DerivativeSide::Right, &quick_settings())?;
    Ok(((r.value + 1.0).abs() <= 1e-2, format!("right = {:.6}", r.value)))
}

fn endpoint_gap() -> Result<(bool, String)> {
    let sys = catalog::system("integrator")?;
    let r = sensitivity_derivative(&sys, &catalog::control("jump-at-end")?, 0.0, DerivativeSide::Right, &quick_settings())?;
    let gap = r.right_derivative - r.left_derivative;
    Ok((
        (gap - r.predicted_gap).abs() <= 1e-2,
        format!("right - left = {gap:.6}, predicted {:.6}", r.predicted_gap),
    ))
}

fn filippov() -> Result<(bool, String)> {
    let hs: Vec<f64> = (3..=8).map(|k| 0.5f64.powi(k)).collect();
    let u = catalog::control("ramp")?;
    let mut worst: f64 = 1.0;
    for id in catalog::SYSTEMS {
        let rows = filippov_check(&catalog::system(id)?, &u, &hs, &SimSettings::default())?;
        worst = worst.max(ratio_spread(&rows));
    }
    Ok((worst <= 2.0, format!("largest ratio spread {worst:.4}")))
}

fn ode_order() -> Result<(bool, String)> {
    let u = ControlSignal::constant((0.0, 1.0), vec![1.0])?;
    let exact = [1.0 - (-1.0f64).exp()];
    let (_, _, ratio) = order_ratio(&catalog::system("decay")?, &u, 16, &exact)?;
    Ok(((12.0..=20.0).contains(&ratio), format!("error ratio on halving = {ratio:.3}")))
}

/// The built-in invariant suite, run concurrently and reported in fixed order.
pub fn verify_all() -> Vec<Check> {
    let jobs: [(&str, Job); 10] = [
        ("catalog", catalog_ids),
        ("diagonal example eta", section2_eta),
        ("diagonal example simple variant", section2_simple),
        ("classical total variation", classical_tv),
        ("step measure", step_measure),
        ("ramp sensitivity", ramp_sensitivity),
        ("bang-bang right derivative", bangbang_sensitivity),
        ("endpoint jump gap", endpoint_gap),
        ("filippov ratio", filippov),
        ("ode order", ode_order),
    ];
    jobs.par_iter().map(|(name, job)| Check::new(*name, job())).collect()
}
