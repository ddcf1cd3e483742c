//! Scenario configuration: TOML or JSON, plus the manifest wrapper so a
//! manifest can be fed back as a config.

use std::path::Path;

use serde::{Deserialize, Serialize};

use twm_core::adiabatic::{Branch, Process, ProcessKind};
use twm_core::coupled_wave::{Envelope, MrConstants, SimOptions};
use twm_core::linear_twolevel::LinearKind;
use twm_core::profile::{MismatchProfile, Span};
use twm_core::Sign;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process: Option<ProcessKind>,
    #[serde(default)]
    pub sign: Sign,
    /// Stationary branch used to seed runs given by constants.
    #[serde(default)]
    pub branch: Branch,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSpec>,
    pub profile: MismatchProfile,
    pub span: Span,
    #[serde(default)]
    pub tolerance: ToleranceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<LinearSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSpec {
    pub k1: f64,
    pub k2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub intensities: [f64; 3],
    #[serde(default)]
    pub phases: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default = "ToleranceSpec::default_rel")]
    pub rel: f64,
    #[serde(default = "ToleranceSpec::default_abs")]
    pub abs: f64,
}

impl ToleranceSpec {
    fn default_rel() -> f64 {
        SimOptions::default().rel_tol
    }

    fn default_abs() -> f64 {
        SimOptions::default().abs_tol
    }
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self {
            rel: Self::default_rel(),
            abs: Self::default_abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSpec {
    pub kind: LinearKind,
    /// `|κ|` (Hermitian) or `q` (OPA).
    pub coupling: f64,
    /// `(Re A_i, Im A_i, Re A_s, Im A_s)`; defaults to a pure signal.
    #[serde(default = "LinearSpec::default_state")]
    pub state: [f64; 4],
}

impl LinearSpec {
    fn default_state() -> [f64; 4] {
        [0.0, 0.0, 1.0, 0.0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Chirp rates `r` in `ΔΓ = r·(ξ − center)`.
    pub rates: Vec<f64>,
}

/// Nonlinear scenario with everything derived from the config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub process: Process,
    pub env0: Envelope,
    pub opts: SimOptions,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        // a run manifest carries its resolved config under "config"
        let value = match value {
            serde_json::Value::Object(mut map) if map.contains_key("config") => {
                map.remove("config").unwrap_or_default()
            }
            other => other,
        };
        serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Loads by extension; unknown extensions try TOML, then JSON.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text),
            Some("toml") => Self::from_toml(&text),
            _ => Self::from_toml(&text).or_else(|_| Self::from_json(&text)),
        }
    }

    pub fn sim_options(&self) -> CliResult<SimOptions> {
        let mut o = SimOptions::with_tolerances(self.tolerance.rel, self.tolerance.abs);
        o.sign = self.sign;
        o.step_control().validate()?;
        Ok(o)
    }

    pub fn validate_common(&self) -> CliResult<()> {
        self.span.validate()?;
        self.profile.validate_span(self.span.start, self.span.end)?;
        Ok(())
    }

    pub fn process_kind(&self) -> CliResult<ProcessKind> {
        self.process
            .ok_or_else(|| CliError::Config("`process` is required for this command".into()))
    }

    /// Manley–Rowe constants from exactly one of `constants` / `initial`.
    pub fn constants(&self) -> CliResult<MrConstants> {
        match (&self.constants, &self.initial) {
            (Some(c), None) => Ok(MrConstants::new(c.k1, c.k2)),
            (None, Some(i)) => {
                if i.intensities.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                    return Err(CliError::Config(format!(
                        "initial intensities must be finite and non-negative, got {:?}",
                        i.intensities
                    )));
                }
                Ok(MrConstants::from_intensities(i.intensities))
            }
            (Some(_), Some(_)) => Err(CliError::Config(
                "give either [constants] or [initial], not both".into(),
            )),
            (None, None) => Err(CliError::Config(
                "one of [constants] or [initial] is required".into(),
            )),
        }
    }

    pub fn process(&self) -> CliResult<Process> {
        let kind = self.process_kind()?;
        Process::new(kind, self.constants()?).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Process, initial envelope and integrator options. Runs given by
    /// constants start on the configured stationary branch at `span.start`.
    pub fn resolve(&self) -> CliResult<Resolved> {
        self.validate_common()?;
        let process = self.process()?;
        let opts = self.sim_options()?;
        let env0 = match &self.initial {
            Some(i) => Envelope::from_polar(i.intensities, i.phases)?,
            None => {
                let dg = self.profile.value(self.span.start);
                let st = process.stationary_state(self.branch, dg, self.sign, None)?;
                process.envelope(st)?
            }
        };
        Ok(Resolved {
            process,
            env0,
            opts,
        })
    }

    pub fn linear_spec(&self) -> CliResult<LinearSpec> {
        self.linear
            .ok_or_else(|| CliError::Config("a [linear] section is required".into()))
    }

    pub fn sweep_rates(&self) -> CliResult<Vec<f64>> {
        let rates = self
            .sweep
            .as_ref()
            .map(|s| s.rates.clone())
            .unwrap_or_default();
        if rates.is_empty() {
            return Err(CliError::Config("sweep needs a non-empty rate grid".into()));
        }
        if rates.iter().any(|r| !r.is_finite()) {
            return Err(CliError::Config("sweep rates must be finite".into()));
        }
        Ok(rates)
    }

    /// Center of the linear chirp used by sweeps.
    pub fn sweep_center(&self) -> f64 {
        match self.profile {
            MismatchProfile::Linear { center, .. } => center,
            _ => 0.5 * (self.span.start + self.span.end),
        }
    }
}

/// Conversion efficiency relative to the limiting Manley–Rowe constant.
pub fn efficiency(kind: ProcessKind, c: &MrConstants, intensities: [f64; 3]) -> f64 {
    match kind {
        ProcessKind::Sfg | ProcessKind::Shg => intensities[2] / c.k2,
        ProcessKind::Dfg => intensities[2] / c.k1,
        ProcessKind::Opa => intensities[0] / c.k1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG4: &str = r#"
process = "sfg"

[constants]
k1 = 10.0
k2 = 1.0

[profile]
kind = "linear"
slope = 3.0
center = 3.0

[span]
start = 0.0
end = 6.0
samples = 61
"#;

    #[test]
    fn parses_toml_and_resolves() {
        let c = ScenarioConfig::from_toml(FIG4).unwrap();
        assert_eq!(c.process, Some(ProcessKind::Sfg));
        assert_eq!(c.sign, Sign::Plus);
        let r = c.resolve().unwrap();
        assert!((r.process.m() - 0.1).abs() < 1e-15);
        let i = r.env0.intensities();
        assert!((i[0] + i[2] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn toml_and_json_agree() {
        let c = ScenarioConfig::from_toml(FIG4).unwrap();
        let j = serde_json::to_string(&c).unwrap();
        assert_eq!(ScenarioConfig::from_json(&j).unwrap(), c);
        let wrapped = format!("{{\"software\": \"x\", \"config\": {j}}}");
        assert_eq!(ScenarioConfig::from_json(&wrapped).unwrap(), c);
        assert_eq!(
            ScenarioConfig::from_toml(&toml::to_string(&c).unwrap()).unwrap(),
            c
        );
    }

    #[test]
    fn rejects_ambiguous_initial_conditions() {
        let both = format!("{FIG4}\n[initial]\nintensities = [1.0, 1.0, 0.0]\n");
        let c = ScenarioConfig::from_toml(&both).unwrap();
        assert!(matches!(c.resolve(), Err(CliError::Config(_))));
        assert!(ScenarioConfig::from_toml("process = \"sfg\"\nbogus = 1").is_err());
    }

    #[test]
    fn efficiency_definitions() {
        let c = MrConstants::new(10.0, 1.0);
        assert_eq!(efficiency(ProcessKind::Sfg, &c, [9.0, 0.0, 1.0]), 1.0);
        assert_eq!(efficiency(ProcessKind::Opa, &c, [5.0, 0.0, 1.0]), 0.5);
    }
}
