use std::path::PathBuf;

use thiserror::Error;
use unraveling_lab::catalog::CatalogError;
use unraveling_lab::entropy::EntropyError;
use unraveling_lab::instrument::{InstrumentError, RepError};
use unraveling_lab::keepswitch::KeepSwitchError;
use unraveling_lab::pmp::PmpError;
use unraveling_lab::rotational::RotationalError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Schema(String),
    #[error("enumeration budget exhausted: {0}")]
    Budget(String),
    #[error("{0}")]
    Compute(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Compute(_) | CliError::Io { .. } => 1,
        }
    }

    pub fn schema(msg: impl Into<String>) -> Self {
        CliError::Schema(msg.into())
    }
}

/// Library errors that may stem from running out of enumeration budget.
pub trait Budgeted: std::fmt::Display {
    fn out_of_budget(&self) -> bool;
}

impl Budgeted for RepError {
    fn out_of_budget(&self) -> bool {
        self.budget_exhausted()
    }
}

impl Budgeted for InstrumentError {
    fn out_of_budget(&self) -> bool {
        self.budget_exhausted()
    }
}

impl Budgeted for PmpError {
    fn out_of_budget(&self) -> bool {
        self.budget_exhausted()
    }
}

impl Budgeted for EntropyError {
    fn out_of_budget(&self) -> bool {
        self.budget_exhausted()
    }
}

impl Budgeted for CatalogError {
    fn out_of_budget(&self) -> bool {
        match self {
            CatalogError::Instrument(e) => e.budget_exhausted(),
            CatalogError::Pmp(e) => e.budget_exhausted(),
            _ => false,
        }
    }
}

impl Budgeted for KeepSwitchError {
    fn out_of_budget(&self) -> bool {
        matches!(self, KeepSwitchError::Pmp(e) if e.budget_exhausted())
    }
}

impl Budgeted for RotationalError {
    fn out_of_budget(&self) -> bool {
        matches!(self, RotationalError::Instrument(e) if e.budget_exhausted())
    }
}

/// A failure while computing.
pub fn compute<E: Budgeted>(e: E) -> CliError {
    if e.out_of_budget() {
        CliError::Budget(e.to_string())
    } else {
        CliError::Compute(e.to_string())
    }
}

/// A failure while turning the configuration into library objects.
pub fn invalid<E: Budgeted>(e: E) -> CliError {
    if e.out_of_budget() {
        CliError::Budget(e.to_string())
    } else {
        CliError::Schema(e.to_string())
    }
}
