use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input file {} not found", .0.display())]
    FileNotFound(PathBuf),
    #[error("column '{0}' not found in the header")]
    MissingColumn(String),
    #[error("no complete rows left after removing missing values")]
    NoCompleteRows,
    #[error("the factor columns define a single group; at least two are needed")]
    SingleGroup,
    #[error("line {line}: value '{value}' in column '{column}' is not numeric")]
    NotNumeric {
        line: u64,
        column: String,
        value: String,
    },
    #[error("level combination {0} has no complete rows")]
    EmptyCell(String),
    #[error("cannot read input: {0}")]
    Read(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] rankmanova::Error),
    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),
}

impl CliError {
    /// 2 for bad input, 3 for bad configuration, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        use rankmanova::Error as E;
        match self {
            CliError::FileNotFound(_)
            | CliError::MissingColumn(_)
            | CliError::NoCompleteRows
            | CliError::SingleGroup
            | CliError::NotNumeric { .. }
            | CliError::EmptyCell(_)
            | CliError::Read(_)
            | CliError::Write(_) => 2,
            CliError::Config(_) => 3,
            CliError::Core(e) => match e {
                E::Numerical(_) | E::NotPsd(_) => 4,
                E::NoGroups
                | E::MismatchedDimension { .. }
                | E::ZeroDimension
                | E::EmptyGroup(_)
                | E::NonFiniteValue { .. }
                | E::EmptySample
                | E::DegenerateGroup { .. } => 2,
                _ => 3,
            },
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Read(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
