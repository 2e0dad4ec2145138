//! Library half of the `hr-sieve` binary: flag and config handling, the
//! command handlers, and CSV/JSON rendering.

pub mod commands;
pub mod config;
pub mod output;

use hr_sieve::envelopes::EnvelopeError;
use hr_sieve::lemma::LemmaError;
use hr_sieve::sieve::SieveError;
use hr_sieve::sifted::SiftedError;
use hr_sieve::weights::WeightError;
use thiserror::Error;

pub use commands::{run, Outcome};
pub use config::{Command, Flags, Format, Kind, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config, family/weight spec, or an x outside the domain.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Failed(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failed(format!("json: {e}"))
    }
}

impl From<SieveError> for CliError {
    fn from(e: SieveError) -> Self {
        match e {
            SieveError::LimitOutOfRange(_)
            | SieveError::SegmentTooSmall(_)
            | SieveError::InvalidInterval { .. } => CliError::Usage(e.to_string()),
            SieveError::BaseTooSmall { .. } => CliError::Failed(e.to_string()),
        }
    }
}

impl From<SiftedError> for CliError {
    fn from(e: SiftedError) -> Self {
        match e {
            SiftedError::Sieve(e) => e.into(),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<WeightError> for CliError {
    fn from(e: WeightError) -> Self {
        match e {
            WeightError::DomainTooSmall(_) => CliError::Usage(e.to_string()),
            e => CliError::Failed(e.to_string()),
        }
    }
}

impl From<EnvelopeError> for CliError {
    fn from(e: EnvelopeError) -> Self {
        match e {
            EnvelopeError::Domain { .. } | EnvelopeError::ZeroK | EnvelopeError::CheckRange(_) => {
                CliError::Usage(e.to_string())
            }
            EnvelopeError::Weight(w) => w.into(),
            e => CliError::Failed(e.to_string()),
        }
    }
}

impl From<LemmaError> for CliError {
    fn from(e: LemmaError) -> Self {
        match e {
            LemmaError::Range { .. } | LemmaError::ZeroBand | LemmaError::CountRange(_) => {
                CliError::Usage(e.to_string())
            }
            LemmaError::Weight(w) => w.into(),
            LemmaError::Sieve(s) => s.into(),
        }
    }
}
