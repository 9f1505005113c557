use std::fmt::Debug;

use hafcp::augment::AugmentError;
use hafcp::dataset::DatasetError;
use hafcp::fuzzify::FuzzifyError;
use hafcp::gbdt::GbdtError;
use hafcp::miner::MinerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Internal = 1,
    Input = 2,
    MissingArtifact = 3,
}

/// A failure with a stable kind name (e.g. `MissingLabelColumn`) and the
/// exit code it maps to.
#[derive(Debug, thiserror::Error)]
#[error("{name}: {message}")]
pub struct CliError {
    pub kind: ExitKind,
    pub name: String,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ExitKind, name: &str, message: impl Into<String>) -> Self {
        Self { kind, name: name.to_string(), message: message.into() }
    }

    pub fn input(name: &str, message: impl Into<String>) -> Self {
        Self::new(ExitKind::Input, name, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(ExitKind::Internal, "Internal", message)
    }

    pub fn lineage(message: impl Into<String>) -> Self {
        Self::input("LineageMismatch", message)
    }

    pub fn exit_code(&self) -> i32 {
        self.kind as i32
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn variant_name<E: Debug>(e: &E) -> String {
    format!("{e:?}").chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect()
}

fn input_error<E: Debug + std::fmt::Display>(e: E) -> CliError {
    CliError::input(&variant_name(&e), e.to_string())
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        input_error(e)
    }
}

impl From<GbdtError> for CliError {
    fn from(e: GbdtError) -> Self {
        input_error(e)
    }
}

impl From<FuzzifyError> for CliError {
    fn from(e: FuzzifyError) -> Self {
        input_error(e)
    }
}

impl From<MinerError> for CliError {
    fn from(e: MinerError) -> Self {
        input_error(e)
    }
}

impl From<AugmentError> for CliError {
    fn from(e: AugmentError) -> Self {
        match e {
            AugmentError::Fuzzify(e) => e.into(),
            AugmentError::Dataset(e) => e.into(),
            AugmentError::Gbdt(e) => e.into(),
            e => input_error(e),
        }
    }
}
