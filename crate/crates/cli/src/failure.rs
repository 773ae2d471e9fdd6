//! Exit codes. The numbers are a stable contract, documented in the README.

use std::fmt;
use std::io;

use gemlogic::abduction::AbductionError;
use gemlogic::fba::FbaError;
use gemlogic::ledger::LedgerError;
use gemlogic::logic::{CompileError, QueryError};
use gemlogic::reasoner::{GrowthError, ScreenError};
use gemlogic::ParseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitCode {
    Validation = 1,
    Parse = 2,
    Usage = 3,
    Query = 4,
    ScreenUndefined = 5,
    Abduction = 6,
    Fba = 7,
    Ledger = 8,
    Io = 9,
}

/// An error together with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: ExitCode,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(code: ExitCode, error: impl Into<anyhow::Error>) -> Self {
        Self { code, error: error.into() }
    }

    pub fn usage(message: impl fmt::Display) -> Self {
        Self::new(ExitCode::Usage, anyhow::anyhow!("{message}"))
    }
}

pub type Outcome<T> = Result<T, Failure>;

/// Attaches an exit code and context to foreign errors.
pub trait Classify<T> {
    fn code_with(self, code: ExitCode, context: impl FnOnce() -> String) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn code_with(self, code: ExitCode, context: impl FnOnce() -> String) -> Outcome<T> {
        self.map_err(|e| Failure::new(code, e.into().context(context())))
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(ExitCode::Io, e)
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::new(ExitCode::Parse, e)
    }
}

impl From<CompileError> for Failure {
    fn from(e: CompileError) -> Self {
        Failure::new(ExitCode::Validation, e)
    }
}

impl From<QueryError> for Failure {
    fn from(e: QueryError) -> Self {
        Failure::new(ExitCode::Query, e)
    }
}

impl From<GrowthError> for Failure {
    fn from(e: GrowthError) -> Self {
        match e {
            GrowthError::Query(q) => q.into(),
            GrowthError::Rules(r) => r.into(),
        }
    }
}

impl From<ScreenError> for Failure {
    fn from(e: ScreenError) -> Self {
        match e {
            ScreenError::Query(q) => q.into(),
            ScreenError::Rules(r) => r.into(),
            e @ ScreenError::WildTypeNoGrowth { .. } => Failure::new(ExitCode::ScreenUndefined, e),
        }
    }
}

impl From<FbaError> for Failure {
    fn from(e: FbaError) -> Self {
        match e {
            FbaError::Query(q) => q.into(),
            e => Failure::new(ExitCode::Fba, e),
        }
    }
}

impl From<AbductionError> for Failure {
    fn from(e: AbductionError) -> Self {
        match e {
            AbductionError::Query(q) => q.into(),
            AbductionError::Fba(f) => f.into(),
            e @ AbductionError::Observation { .. } => Failure::new(ExitCode::Query, e),
            e @ (AbductionError::ObservationSyntax { .. } | AbductionError::ConflictingObservations { .. }) => {
                Failure::new(ExitCode::Parse, e)
            }
            e => Failure::new(ExitCode::Abduction, e),
        }
    }
}

impl From<LedgerError> for Failure {
    fn from(e: LedgerError) -> Self {
        match e {
            LedgerError::Io(_) => Failure::new(ExitCode::Io, e),
            e => Failure::new(ExitCode::Ledger, e),
        }
    }
}
