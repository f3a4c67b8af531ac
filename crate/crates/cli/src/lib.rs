//! Batch front end: pool building, anonymization, pre-matching, evaluation
//! and plot-data export over `.saltfeat` files.
//!
//! Every `cmd_*` function is deterministic given its arguments and the sorted
//! input set, so two runs produce byte-identical files.

pub mod commands;
pub mod config;

use std::fmt;

pub use commands::anonymize::{cmd_anonymize, AnonymizeArgs};
pub use commands::build_pool::{cmd_build_pool, BuildPoolArgs};
pub use commands::eval::{cmd_eval, EvalArgs, Metric};
pub use commands::pca::{cmd_pca, PcaArgs};
pub use commands::prematch::{cmd_prematch, PrematchArgs};
pub use config::{Mode, RunConfig};

/// How a batch command ended when it did not abort outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Complete,
    /// Some items failed and were skipped; the rest were written.
    Partial { failed: usize },
}

impl Outcome {
    pub fn from_failures(failed: usize) -> Self {
        if failed == 0 {
            Outcome::Complete
        } else {
            Outcome::Partial { failed }
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Complete => 0,
            Outcome::Partial { .. } => 1,
        }
    }
}

/// The command line or config file asked for something impossible.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

/// 2 for invalid invocations, 1 for everything else that stopped a command.
pub fn exit_code_for(err: &anyhow::Error) -> u8 {
    let invalid = err.chain().any(|e| {
        e.is::<Usage>()
            || matches!(
                e.downcast_ref::<voxblend_core::Error>(),
                Some(voxblend_core::Error::Config(_))
            )
    });
    if invalid {
        2
    } else {
        1
    }
}
