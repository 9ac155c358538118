use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::verify::{verify_all, Check};
use super::{parse, MeasureScenario, Scenario, SensitivityScenario, VariationMode, VariationScenario, SCHEMA_VERSION};
use crate::catalog;
use crate::error::{Error, Result};
use crate::geometry::SetValue;
use crate::measure::{integrate, partial_variation_measure, test_catalog, IntervalBoundContext, Window};
use crate::sensitivity::{
    delayed_control, filippov_check, integration_grid, ratio_spread, sensitivity_derivative, simulate_costate,
    simulate_state, trace_csv, DerivativeSide, SensitivityReport,
};
use crate::trajectory::Trajectory;
use crate::variation::{eta, eta_delta, eta_delta_eps_profile, eta_simple, Multifunction, VariationProfile};

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub name: String,
    pub kind: String,
    /// SHA-256 of the scenario as canonical JSON.
    pub scenario_hash: String,
    pub scenario: serde_json::Value,
    pub artifacts: Vec<String>,
    pub checks: Vec<Check>,
    pub passed: bool,
    /// Not written to `record.json`, so reruns stay byte-identical.
    #[serde(skip)]
    pub wall_time_s: f64,
}

struct Output {
    files: Vec<(String, String)>,
    checks: Vec<Check>,
}

impl Output {
    fn new() -> Self {
        Output {
            files: Vec::new(),
            checks: Vec::new(),
        }
    }

    fn file(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn fail(&mut self, name: &str, e: Error) {
        self.check(name, false, e.to_string());
    }
}

fn with_tolerance(s: &Scenario, tol: f64) -> Scenario {
    let mut s = s.clone();
    match &mut s {
        Scenario::Variation(v) => {
            if let Some(e) = &mut v.expect {
                e.tolerance = tol;
            }
        }
        Scenario::Measure(m) => {
            if let Some(e) = &mut m.expect {
                e.tolerance = tol;
            }
        }
        Scenario::Sensitivity(x) => x.expect.iter_mut().for_each(|e| e.tolerance = tol),
        Scenario::VerifyAll(_) => {}
    }
    s
}

/// Runs one scenario and writes its artifacts and `record.json` into `dir`.
///
/// Numerical failures become failed checks; only I/O errors are returned.
pub fn run_scenario(scenario: &Scenario, dir: &Path, tolerance: Option<f64>) -> Result<RunRecord> {
    let start = Instant::now();
    let scenario = match tolerance {
        Some(t) => with_tolerance(scenario, t),
        None => scenario.clone(),
    };
    scenario.validate()?;
    let snapshot = serde_json::to_value(&scenario).expect("scenario serializes");
    let hash = hex::encode(Sha256::digest(snapshot.to_string().as_bytes()));
    let out = match &scenario {
        Scenario::Variation(v) => run_variation(v),
        Scenario::Measure(m) => run_measure(m),
        Scenario::Sensitivity(s) => run_sensitivity(s),
        Scenario::VerifyAll(_) => {
            let mut o = Output::new();
            o.checks = verify_all();
            o.file("verify.json", serde_json::to_string_pretty(&o.checks).unwrap());
            o
        }
    };
    fs::create_dir_all(dir)?;
    for (name, contents) in &out.files {
        fs::write(dir.join(name), contents)?;
    }
    let record = RunRecord {
        schema_version: SCHEMA_VERSION,
        name: scenario.name().to_string(),
        kind: scenario.kind().to_string(),
        scenario_hash: hash,
        scenario: snapshot,
        artifacts: out.files.iter().map(|(n, _)| n.clone()).collect(),
        passed: out.checks.iter().all(|c| c.passed),
        checks: out.checks,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    fs::write(dir.join("record.json"), serde_json::to_string_pretty(&record).unwrap())?;
    Ok(record)
}

/// Parses `src` and runs every scenario concurrently, each into `root/<name>/`.
pub fn run_source(src: &str, root: &Path, tolerance: Option<f64>) -> Result<Vec<RunRecord>> {
    let file = parse(src)?;
    if let Some(t) = tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Validation(format!("tolerance override must be positive, got {t}")));
        }
    }
    file.scenarios
        .par_iter()
        .map(|s| run_scenario(s, &root.join(s.name()), tolerance))
        .collect()
}

pub fn run_file(path: &Path, root: &Path, tolerance: Option<f64>) -> Result<Vec<RunRecord>> {
    let src = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    run_source(&src, root, tolerance)
}

fn tabulated(times: &[f64], values: &[f64]) -> Multifunction {
    let (t, v) = (times.to_vec(), values.to_vec());
    Multifunction::from_point_map((times[0], times[times.len() - 1]), move |s, _| {
        let k = t.partition_point(|&x| x <= s).clamp(1, t.len() - 1);
        let w = (s - t[k - 1]) / (t[k] - t[k - 1]);
        vec![v[k - 1] + w * (v[k] - v[k - 1])]
    })
    .with_breakpoints(times.to_vec())
    .with_label("tabulated")
}

fn variation_profile(v: &VariationScenario) -> Result<VariationProfile> {
    let (f, xbar, x_set) = match (&v.problem, &v.samples) {
        (Some(id), _) => {
            let p = catalog::variation_problem(id)?;
            (p.f, p.xbar, p.x_set)
        }
        (None, Some(s)) => {
            let (a, b) = (s.times[0], s.times[s.times.len() - 1]);
            let xbar = Trajectory::from_fn(a, b, 8, |_| vec![0.0])?.with_modulus(|_| 0.0);
            (tabulated(&s.times, &s.values), xbar, SetValue::scalar(0.0))
        }
        (None, None) => unreachable!("validated"),
    };
    let delta = v.delta.unwrap_or(0.0);
    match v.mode {
        VariationMode::Eta => eta(&f, &xbar, &v.probes, &v.settings),
        VariationMode::EtaDelta => eta_delta(&f, &xbar, &v.probes, delta, &v.settings),
        VariationMode::EtaDeltaEps => {
            eta_delta_eps_profile(&f, &xbar, &v.probes, delta, v.eps.unwrap_or(0.0), &v.settings)
        }
        VariationMode::EtaSimple => eta_simple(&f, &v.probes, &x_set, &v.settings),
    }
}

fn run_variation(v: &VariationScenario) -> Output {
    let mut o = Output::new();
    let prof = match variation_profile(v) {
        Ok(p) => p,
        Err(e) => {
            o.fail("variation", e);
            return o;
        }
    };
    o.file("profile.csv", prof.to_csv());
    o.file("profile.json", prof.to_json());
    let monotone = prof.values.windows(2).all(|w| w[0].eta <= w[1].eta);
    o.check("profile nondecreasing", monotone, format!("{} probes", prof.values.len()));
    if let Some(e) = &v.expect {
        let err = e
            .values
            .iter()
            .map(|&[t, want]| (prof.at(t) - want).abs())
            .fold(0.0, f64::max);
        o.check(
            "expected values",
            err <= e.tolerance,
            format!("max error {err:.3e} against tolerance {:e}", e.tolerance),
        );
    }
    o
}

fn run_measure(m: &MeasureScenario) -> Output {
    let mut o = Output::new();
    let (field, xbar) = match catalog::field(&m.field) {
        Ok(x) => x,
        Err(e) => {
            o.fail("measure", e);
            return o;
        }
    };
    let lim = match partial_variation_measure(&field, &xbar, &m.settings, None, &[]) {
        Ok(l) => l,
        Err(e) => {
            o.fail("measure", e);
            return o;
        }
    };
    o.file("measure.csv", lim.measure.to_csv());
    o.file("measure.json", lim.to_json());
    let tests = test_catalog(field.span(), field.out_dim());
    let pairs = lim.pairings(&tests);
    let mut csv = String::from("test_function,pairing\n");
    for (name, v) in &pairs {
        let _ = writeln!(csv, "{name},{v:e}");
    }
    o.file("pairings.csv", csv);
    o.check(
        "cauchy criterion",
        lim.converged,
        format!("{} levels, tolerance {:e}", lim.levels.len(), m.settings.tolerance),
    );
    o.check(
        "a priori bound dominates the cauchy trace",
        lim.cauchy_trace.iter().all(|c| c.bound_ok),
        format!("{} level pairs checked", lim.cauchy_trace.len()),
    );
    if let Some(e) = &m.expect {
        if let Some(mass) = e.mass {
            let got = integrate(|_| vec![1.0; field.out_dim()], &lim.measure, Window::Closed);
            o.check("expected mass", (got - mass).abs() <= e.tolerance, format!("mass {got:.6}"));
        }
        for (name, want) in &e.pairings {
            match pairs.iter().find(|(n, _)| n == name) {
                Some((_, got)) => o.check(
                    format!("pairing {name}"),
                    (got - want).abs() <= e.tolerance,
                    format!("{got:.6} vs {want}"),
                ),
                None => o.check(format!("pairing {name}"), false, "no such test function"),
            }
        }
    }
    if !m.intervals.is_empty() {
        let delta = m.interval_delta.unwrap_or(lim.bound_delta);
        let ends: Vec<f64> = m.intervals.iter().flat_map(|&[a, b, _]| [a, b]).collect();
        let rows = IntervalBoundContext::new(&field, &xbar, delta, &ends, m.settings.max_level, 1e-6, &m.settings)
            .and_then(|ctx| m.intervals.iter().map(|&[a, b, xi]| ctx.check(a, b, xi)).collect::<Result<Vec<_>>>());
        match rows {
            Ok(rows) => {
                let mut csv = String::from("a,b,xi_time,lhs,modulus_term,left_jump,right_jump,rhs,margin\n");
                for r in &rows {
                    let _ = writeln!(
                        csv,
                        "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                        r.a, r.b, r.xi_time, r.lhs, r.modulus_term, r.left_jump, r.right_jump, r.rhs, r.margin
                    );
                }
                o.file("intervals.csv", csv);
                let worst = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
                o.check("interval bound", worst >= 0.0, format!("smallest margin {worst:.3e}"));
            }
            Err(e) => o.fail("interval bound", e),
        }
    }
    o
}

fn fd_side(r: &SensitivityReport) -> Option<(f64, f64)> {
    let fd = r.fd.as_ref()?;
    let v = match r.side {
        DerivativeSide::Right => fd.right_extrapolated,
        DerivativeSide::Left => fd.left_extrapolated,
        DerivativeSide::TwoSided => fd.symmetric_extrapolated,
    };
    Some((v, fd.min_step))
}

fn run_sensitivity(s: &SensitivityScenario) -> Output {
    let mut o = Output::new();
    let (sys, u) = match catalog::system(&s.system).and_then(|sys| Ok((sys, s.control_signal()?))) {
        Ok(x) => x,
        Err(e) => {
            o.fail("sensitivity", e);
            return o;
        }
    };
    let results: Vec<Result<(SensitivityReport, String)>> = s
        .h
        .par_iter()
        .map(|&h| {
            let r = sensitivity_derivative(&sys, &u, h, s.side, &s.settings)?;
            let uh = delayed_control(&u, h);
            let x = simulate_state(&sys, &uh, &integration_grid(&uh, s.settings.sim.steps))?;
            let p = simulate_costate(&sys, &uh, &x)?;
            Ok((r, trace_csv(&x, &p, &uh)))
        })
        .collect();
    for (i, (&h, res)) in s.h.iter().zip(results).enumerate() {
        let tag = format!("h={h}");
        let (r, trace) = match res {
            Ok(x) => x,
            Err(e) => {
                o.fail(&tag, e);
                continue;
            }
        };
        o.file(format!("report_{i}.json"), r.to_json());
        o.file(format!("trace_{i}.csv"), trace);
        if let Some((fd, step)) = fd_side(&r) {
            let tol = 1e-2_f64.max(5.0 * step);
            o.check(
                format!("{tag} finite differences"),
                (r.value - fd).abs() <= tol,
                format!("formula {:.6}, extrapolated quotient {fd:.6}, tolerance {tol:e}", r.value),
            );
        }
        let gap = r.right_derivative - r.left_derivative;
        o.check(
            format!("{tag} endpoint atoms"),
            (gap - r.predicted_gap).abs() <= 1e-2,
            format!("right - left = {gap:.6}, predicted {:.6}", r.predicted_gap),
        );
        for e in s.expect.iter().filter(|e| e.h == h) {
            o.check(
                format!("{tag} expected value"),
                (r.value - e.value).abs() <= e.tolerance,
                format!("{:.6} vs {}", r.value, e.value),
            );
        }
    }
    if !s.filippov_h.is_empty() {
        match filippov_check(&sys, &u, &s.filippov_h, &s.settings.sim) {
            Ok(rows) => {
                let mut csv = String::from("h,sup_distance,ratio\n");
                for r in &rows {
                    let _ = writeln!(csv, "{:e},{:e},{:e}", r.h, r.sup_distance, r.ratio);
                }
                o.file("filippov.csv", csv);
                let spread = ratio_spread(&rows);
                o.check("filippov ratio", spread <= 2.0, format!("max/min ratio {spread:.4}"));
            }
            Err(e) => o.fail("filippov ratio", e),
        }
    }
    o
}
