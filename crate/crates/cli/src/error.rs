use effortnet::design::DesignError;
use effortnet::equilibrium::EquilibriumError;
use effortnet::lp::LpError;
use effortnet::welfare::WelfareError;
use thiserror::Error;

/// Everything a command can fail with, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse(_) | CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<EquilibriumError> for CliError {
    fn from(e: EquilibriumError) -> Self {
        match e {
            EquilibriumError::NotHierarchy => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<WelfareError> for CliError {
    fn from(e: WelfareError) -> Self {
        match e {
            WelfareError::TooLarge { .. } | WelfareError::Domain(_) => {
                CliError::Validation(e.to_string())
            }
            WelfareError::DegenerateOutput { .. } => CliError::Numerical(e.to_string()),
            WelfareError::Equilibrium(inner) => inner.into(),
        }
    }
}

impl From<LpError> for CliError {
    fn from(e: LpError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<DesignError> for CliError {
    fn from(e: DesignError) -> Self {
        match e {
            DesignError::LpNumericalFailure(inner) => inner.into(),
            DesignError::Welfare(inner) => inner.into(),
            DesignError::Equilibrium(inner) => inner.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}
