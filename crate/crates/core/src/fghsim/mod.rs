//! Standard-model simulations of the arithmetic constructions: witness
//! comparison, the Solovay function over `M'` and the Rosser reordering.

mod rosser;
mod solovay;
mod witness;

use serde::Serialize;

pub use rosser::{mtr_check, rosser_run, ProofStream, RosserError, RosserRun, Tag};
pub use solovay::{climb_step, solovay_check, solovay_run, SolovayError, SolovayRun, Trigger};
pub use witness::{visible_at, wc_prec, wc_preceq, Pos};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The premise of the check does not arise.
    Vacuous,
    /// The finite run cannot decide the check.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckEntry {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub checks: Vec<CheckEntry>,
}

impl CheckReport {
    fn push(&mut self, name: &'static str, status: CheckStatus, detail: impl Into<String>) {
        self.checks.push(CheckEntry {
            name,
            status,
            detail: detail.into(),
        });
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn has_failures(&self) -> bool {
        self.failures().next().is_some()
    }

    pub fn status(&self, name: &str) -> Option<CheckStatus> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.status)
    }
}
