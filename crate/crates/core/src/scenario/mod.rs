//! Versioned TOML scenario files, their validation, and the run records
//! written next to each scenario's artifacts.

mod run;
mod verify;

use std::collections::HashSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::error::{Error, Result};
use crate::measure::MeasureSettings;
use crate::sensitivity::{ControlSignal, DerivativeSide, SensitivitySettings};
use crate::variation::VariationSettings;

pub use run::{run_file, run_scenario, run_source, RunRecord};
pub use verify::{verify_all, Check};

pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable naming the directory artifacts are written under.
pub const OUTPUT_ROOT_VAR: &str = "TUBEVAR_OUTPUT_ROOT";

/// `flag`, else `$TUBEVAR_OUTPUT_ROOT`, else `./tubevar-out`.
pub fn output_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("tubevar-out"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default)]
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    Variation(VariationScenario),
    Measure(MeasureScenario),
    Sensitivity(SensitivityScenario),
    VerifyAll(VerifyAllScenario),
}

impl Scenario {
    pub fn name(&self) -> &str {
        match self {
            Scenario::Variation(s) => &s.name,
            Scenario::Measure(s) => &s.name,
            Scenario::Sensitivity(s) => &s.name,
            Scenario::VerifyAll(s) => &s.name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::Variation(_) => "variation",
            Scenario::Measure(_) => "measure",
            Scenario::Sensitivity(_) => "sensitivity",
            Scenario::VerifyAll(_) => "verify-all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariationMode {
    #[default]
    Eta,
    EtaDelta,
    EtaDeltaEps,
    EtaSimple,
}

/// A tabulated x-independent scalar, linear between samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarSamples {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSamples {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

/// Expected `(t, value)` pairs and the allowed absolute error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectValues {
    pub values: Vec<[f64; 2]>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationScenario {
    pub name: String,
    pub problem: Option<String>,
    pub samples: Option<ScalarSamples>,
    #[serde(default)]
    pub mode: VariationMode,
    pub probes: Vec<f64>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    #[serde(default)]
    pub settings: VariationSettings,
    pub expect: Option<ExpectValues>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureExpect {
    pub mass: Option<f64>,
    /// `(test function name, expected pairing)`.
    #[serde(default)]
    pub pairings: Vec<(String, f64)>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureScenario {
    pub name: String,
    pub field: String,
    #[serde(default)]
    pub settings: MeasureSettings,
    /// `[a, b, xi_time]` subintervals for the interval bound.
    #[serde(default)]
    pub intervals: Vec<[f64; 3]>,
    /// Tube radius of the interval bound; defaults to the bound radius.
    pub interval_delta: Option<f64>,
    pub expect: Option<MeasureExpect>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityExpect {
    pub h: f64,
    pub value: f64,
    pub tolerance: f64,
}

fn zero_delay() -> Vec<f64> {
    vec![0.0]
}

fn right_side() -> DerivativeSide {
    DerivativeSide::Right
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityScenario {
    pub name: String,
    pub system: String,
    pub control: Option<String>,
    pub control_samples: Option<ControlSamples>,
    #[serde(default = "zero_delay")]
    pub h: Vec<f64>,
    #[serde(default = "right_side")]
    pub side: DerivativeSide,
    #[serde(default)]
    pub settings: SensitivitySettings,
    #[serde(default)]
    pub filippov_h: Vec<f64>,
    #[serde(default)]
    pub expect: Vec<SensitivityExpect>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyAllScenario {
    pub name: String,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

/// Parses and validates a scenario file.
pub fn parse(src: &str) -> Result<ScenarioFile> {
    let file: ScenarioFile = toml::from_str(src).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(src, s.start));
        Error::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    file.validate()?;
    Ok(file)
}

fn invalid<T>(name: &str, msg: impl std::fmt::Display) -> Result<T> {
    Err(Error::Validation(format!("scenario '{name}': {msg}")))
}

fn positive(name: &str, what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        invalid(name, format!("{what} must be positive, got {v}"))
    }
}

fn check_times(name: &str, times: &[f64], n_values: usize) -> Result<()> {
    if times.len() < 2 || times.len() != n_values {
        return invalid(name, "samples need at least two times and one value per time");
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) || times.iter().any(|t| !t.is_finite()) {
        return invalid(name, "sample times must be finite and strictly increasing");
    }
    Ok(())
}

impl ScenarioFile {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let mut seen = HashSet::new();
        for s in &self.scenarios {
            let name = s.name();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) || name.starts_with('.') {
                return invalid(name, "names may only use letters, digits, '-', '_' and '.'");
            }
            if !seen.insert(name) {
                return invalid(name, "duplicate scenario name");
            }
            s.validate()?;
        }
        Ok(())
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        match self {
            Scenario::Variation(v) => v.validate(),
            Scenario::Measure(m) => m.validate(),
            Scenario::Sensitivity(s) => s.validate(),
            Scenario::VerifyAll(_) => Ok(()),
        }
    }
}

impl VariationScenario {
    fn validate(&self) -> Result<()> {
        let n = &self.name;
        match (&self.problem, &self.samples) {
            (Some(id), None) => {
                catalog::variation_problem(id).map_err(|e| Error::Validation(format!("scenario '{n}': {e}")))?;
            }
            (None, Some(s)) => check_times(n, &s.times, s.values.len())?,
            _ => return invalid(n, "give exactly one of 'problem' or 'samples'"),
        }
        if self.probes.is_empty() {
            return invalid(n, "no probe times");
        }
        let needs_delta = matches!(self.mode, VariationMode::EtaDelta | VariationMode::EtaDeltaEps);
        match (needs_delta, self.delta) {
            (true, None) => return invalid(n, "this mode needs 'delta'"),
            (_, Some(d)) => positive(n, "delta", d)?,
            _ => {}
        }
        if self.mode == VariationMode::EtaDeltaEps {
            positive(n, "eps", self.eps.ok_or_else(|| Error::Validation(format!("scenario '{n}': eta_delta_eps needs 'eps'")))?)?;
        }
        positive(n, "refine_tolerance", self.settings.refine_tolerance)?;
        positive(n, "schedule_tolerance", self.settings.schedule_tolerance)?;
        if let Some(e) = &self.expect {
            positive(n, "expect.tolerance", e.tolerance)?;
        }
        Ok(())
    }
}

impl MeasureScenario {
    fn validate(&self) -> Result<()> {
        let n = &self.name;
        let (f, _) = catalog::field(&self.field).map_err(|e| Error::Validation(format!("scenario '{n}': {e}")))?;
        positive(n, "settings.tolerance", self.settings.tolerance)?;
        let (s, e) = f.span();
        for &[a, b, xi] in &self.intervals {
            if !(s <= a && a < b && b <= e && a <= xi && xi <= b) {
                return invalid(n, format!("interval [{a}, {b}] with xi at {xi} is not inside [{s}, {e}]"));
            }
        }
        if let Some(d) = self.interval_delta {
            positive(n, "interval_delta", d)?;
        }
        if let Some(x) = &self.expect {
            positive(n, "expect.tolerance", x.tolerance)?;
        }
        Ok(())
    }
}

impl SensitivityScenario {
    /// The control named or tabulated by the scenario.
    pub fn control_signal(&self) -> Result<ControlSignal> {
        match (&self.control, &self.control_samples) {
            (Some(id), None) => catalog::control(id),
            (None, Some(s)) => ControlSignal::from_samples(&s.times, &s.values),
            _ => invalid(&self.name, "give exactly one of 'control' or 'control_samples'"),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = &self.name;
        let wrap = |e: Error| match e {
            Error::Validation(_) => e,
            other => Error::Validation(format!("scenario '{n}': {other}")),
        };
        let sys = catalog::system(&self.system).map_err(wrap)?;
        if let Some(s) = &self.control_samples {
            check_times(n, &s.times, s.values.len())?;
        }
        let u = self.control_signal().map_err(wrap)?;
        sys.validate(&u).map_err(wrap)?;
        if self.h.is_empty() || self.h.iter().chain(&self.filippov_h).any(|h| !h.is_finite()) {
            return invalid(n, "delays must be finite and at least one is needed");
        }
        if self.settings.sim.steps == 0 {
            return invalid(n, "settings.sim.steps must be positive");
        }
        positive(n, "settings.tube_radius", self.settings.tube_radius)?;
        positive(n, "settings.measure.tolerance", self.settings.measure.tolerance)?;
        for d in &self.settings.fd_steps {
            positive(n, "fd step", *d)?;
        }
        for x in &self.expect {
            positive(n, "expect.tolerance", x.tolerance)?;
            if !self.h.contains(&x.h) {
                return invalid(n, format!("expectation for h = {} which is not in the delay list", x.h));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_valid() {
        let f = parse("schema_version = 1\n").unwrap();
        assert!(f.scenarios.is_empty());
    }

    #[test]
    fn parse_error_has_position() {
        let err = parse("schema_version = 1\n\n[[scenarios]]\nname = \"a\"\nkind = \"variation\"\nproblem = 3\nprobes = [1.0]\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert!(line >= 3, "{line}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("schema_version = \n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn unknown_field_is_a_parse_error() {
        let src = "schema_version = 1\n[[scenarios]]\nname = \"a\"\nkind = \"verify-all\"\nbogus = 1\n";
        assert!(matches!(parse(src), Err(Error::Parse { .. })));
    }

    #[test]
    fn validation_catches_bad_references() {
        let src = "schema_version = 1\n[[scenarios]]\nname = \"a\"\nkind = \"measure\"\nfield = \"nope\"\n";
        assert!(matches!(parse(src), Err(Error::Validation(_))));
        let src = "schema_version = 2\n";
        assert!(matches!(parse(src), Err(Error::Validation(_))));
        let src = "schema_version = 1\n[[scenarios]]\nname = \"a\"\nkind = \"variation\"\nproblem = \"step-half\"\nprobes = [1.0]\nmode = \"eta_delta\"\n";
        assert!(matches!(parse(src), Err(Error::Validation(_))));
        let src = "schema_version = 1\n[[scenarios]]\nname = \"a\"\nkind = \"verify-all\"\n[[scenarios]]\nname = \"a\"\nkind = \"verify-all\"\n";
        assert!(matches!(parse(src), Err(Error::Validation(_))));
    }

    #[test]
    fn sensitivity_scenario_defaults() {
        let src = "schema_version = 1\n[[scenarios]]\nname = \"ramp\"\nkind = \"sensitivity\"\nsystem = \"integrator\"\ncontrol = \"ramp\"\n[scenarios.settings.sim]\nsteps = 64\n";
        let f = parse(src).unwrap();
        let Scenario::Sensitivity(s) = &f.scenarios[0] else { panic!() };
        assert_eq!(s.h, vec![0.0]);
        assert_eq!(s.side, DerivativeSide::Right);
        assert_eq!(s.settings.sim.steps, 64);
        assert_eq!(s.settings.tube_radius, SensitivitySettings::default().tube_radius);
    }

    #[test]
    fn output_root_prefers_the_flag() {
        assert_eq!(output_root(Some(PathBuf::from("/x"))), PathBuf::from("/x"));
    }
}
