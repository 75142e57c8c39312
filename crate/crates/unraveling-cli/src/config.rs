use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use unraveling_lab::catalog::FamilyParams;
use unraveling_lab::instrument::{InstrumentDoc, DEFAULT_BUDGET};
use unraveling_lab::pmp::SpecDoc;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Info,
    Enumerate,
    Pressure,
    Rate,
    Ep,
    Exponents,
    Clt,
    GibbsDiag,
    Fdr,
    Convert,
    Rotational,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Info => "info",
            Task::Enumerate => "enumerate",
            Task::Pressure => "pressure",
            Task::Rate => "rate",
            Task::Ep => "ep",
            Task::Exponents => "exponents",
            Task::Clt => "clt",
            Task::GibbsDiag => "gibbs-diag",
            Task::Fdr => "fdr",
            Task::Convert => "convert",
            Task::Rotational => "rotational",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A real grid, either listed or as `n` equally spaced points on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { lo: f64, hi: f64, n: usize },
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match *self {
            Grid::List(ref v) => v.clone(),
            Grid::Range { lo, hi, n: 1 } => vec![0.5 * (lo + hi)],
            Grid::Range { lo, hi, n } => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        }
    }

    fn check(&self, name: &str) -> Result<(), CliError> {
        let pts = self.points();
        if pts.is_empty() {
            return Err(CliError::schema(format!("grid {name} is empty")));
        }
        if pts.iter().any(|x| !x.is_finite()) {
            return Err(CliError::schema(format!("grid {name} has a non-finite point")));
        }
        if pts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::schema(format!("grid {name} must be strictly increasing")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// Task parameters. Every field is optional; tasks fall back to their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cdf_grid: Option<Grid>,
    /// `[lo, hi]` range of `α` for Legendre transforms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ts: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<[f64; 2]>,
    /// Per-step ceiling above which an increasing `e_T(α)/T` is reported as `+∞`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ceiling: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Horizon of the assumption checks logged at start.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assumption_t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    /// Real number whose continued fraction supplies the frozen prefix of a constructed angle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cf_seed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_max: Option<u64>,
}

/// The full experiment description after command-line overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instrument: Option<InstrumentDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<SpecDoc>,
    #[serde(default)]
    pub params: TaskParams,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing)]
    pub output: OutputSpec,
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: None,
            family: None,
            instrument: None,
            measure: None,
            params: TaskParams::default(),
            seed: 0,
            budget: DEFAULT_BUDGET,
            workers: None,
            output: OutputSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::schema(e.to_string()))
    }

    /// Structural checks that do not need the library.
    pub fn validate(&self) -> Result<(), CliError> {
        let sources = [self.family.is_some(), self.instrument.is_some(), self.measure.is_some()];
        if sources.iter().filter(|&&s| s).count() > 1 {
            return Err(CliError::schema("give at most one of family, instrument, measure"));
        }
        let p = &self.params;
        for (name, g) in [("alphas", &p.alphas), ("s_grid", &p.s_grid), ("cdf_grid", &p.cdf_grid)] {
            if let Some(g) = g {
                g.check(name)?;
            }
        }
        if let Some(ts) = &p.ts {
            if ts.is_empty() || ts.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CliError::schema("ts must be nonempty and strictly increasing"));
            }
        }
        for (name, r) in [("alpha_range", p.alpha_range), ("interval", p.interval)] {
            if let Some([lo, hi]) = r {
                if !(lo < hi) {
                    return Err(CliError::schema(format!("{name} must satisfy lo < hi")));
                }
            }
        }
        if let Some(level) = p.level {
            if !(level > 0.0 && level < 1.0) {
                return Err(CliError::schema("level must lie in ]0, 1["));
            }
        }
        if self.budget == 0 {
            return Err(CliError::schema("budget must be positive"));
        }
        if self.workers == Some(0) {
            return Err(CliError::schema("workers must be positive"));
        }
        Ok(())
    }

    /// Canonical serialization hashed into the provenance header. Worker
    /// count and output location do not affect results and are left out.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_grid_hits_both_ends() {
        let g = Grid::Range { lo: -2.0, hi: 3.0, n: 11 };
        let pts = g.points();
        assert_eq!(pts.len(), 11);
        assert_eq!(pts[0], -2.0);
        assert_eq!(pts[10], 3.0);
        assert!((pts[4] - 0.0).abs() < 1e-15);
    }

    #[test]
    fn unsorted_grid_is_a_schema_error() {
        let cfg = ExperimentConfig::from_json(r#"{"params": {"alphas": [0.0, 1.0, 0.5]}}"#).unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Schema(_))));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"params": {"alpha": 1}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"sed": 1}"#).is_err());
    }

    #[test]
    fn two_sources_are_rejected() {
        let cfg = ExperimentConfig::from_json(
            r#"{"family": {"family": "keep_switch", "params": {"q1": 0.6, "q2": 0.3}},
                "measure": {"kind": "fm", "alphabet": ["a"], "Q": [[1.0]], "f": ["a"], "p": [1.0]}}"#,
        )
        .unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn canonical_form_ignores_workers_and_output() {
        let a = ExperimentConfig::from_json(r#"{"seed": 3}"#).unwrap();
        let b = ExperimentConfig::from_json(r#"{"seed": 3, "workers": 4, "output": {"format": "json"}}"#).unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json());
    }
}
