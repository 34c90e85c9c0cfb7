use thiserror::Error;

use crate::numerics::ode::OdeError;
use crate::numerics::root::RootError;

/// Error classes, mirrored one-to-one by the CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Domain,
    Numerical,
    Assumption,
    Ambiguous,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Domain => 2,
            ErrorClass::Numerical => 3,
            ErrorClass::Assumption => 4,
            ErrorClass::Ambiguous => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown variable `{name}` at byte {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("origin is not an accumulation point (a1/b2 = {ratio})")]
    NotAccumulating { ratio: f64 },

    #[error("accuracy defect {defect:e} exceeds {limit:e}")]
    Accuracy { defect: f64, limit: f64 },
    #[error("step size underflow at t = {t} (state {state:?})")]
    StepUnderflow { t: f64, state: Vec<f64> },
    #[error("step budget exhausted after {steps} steps (t = {t})")]
    BudgetExceeded { steps: usize, t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("trajectory is not spiraling around the declared center")]
    NotSpiraling,
    #[error("no crossings of the section")]
    NoCrossings,
    #[error("solution escapes at turn {turn}")]
    BlowUp { turn: usize },
    #[error("only {found} usable scales, need at least {needed}")]
    InsufficientScales { found: usize, needed: usize },
    #[error("degenerate sequence: {0}")]
    DegenerateSequence(String),
    #[error("sample spacing {spacing:e} exceeds delta_min/3 = {limit:e}")]
    UnderResolved { spacing: f64, limit: f64 },
    #[error("raster would need {needed} pixels (cap {cap})")]
    RasterBudget { needed: u64, cap: u64 },
    #[error("root solve failed: {0}")]
    Root(String),
    #[error("quadrature error {err:e} above target {target:e}")]
    QuadratureFailure { err: f64, target: f64 },
    #[error("fold could not be resolved near x = {x}")]
    FoldResolution { x: f64 },
    #[error("no bracket for the entry-exit relation at y = {y} (tilde I = {tilde_i:e})")]
    BracketFailure { y: f64, tilde_i: f64 },
    #[error("entry-exit sequence truncated after {count} terms")]
    TruncatedSequence { count: usize },

    #[error("critical curve f = 0 has no solution in the window")]
    NoBranch,
    #[error("contact point is not nilpotent (f_y = {f_y:e})")]
    NotContact { f_y: f64 },
    #[error("not a slow-fast Hopf point: {0}")]
    NotHopf(String),
    #[error("slow dynamics singular at x = {x}")]
    SlowSingularity { x: f64 },
    #[error("no fast fiber at y = {y}")]
    NoFiber { y: f64 },
    #[error("tilde I has no sign change in the window")]
    NoBalancedLevel,
    #[error("tilde I changes sign {count} times in the window")]
    MultipleRoots { count: usize },
    #[error("assumption on the sign of tilde I violated at y = {y}")]
    Assumption2Violated { y: f64 },

    #[error("ambiguous lattice snap for {estimate}: {reason}")]
    Ambiguous { estimate: f64, reason: String },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Syntax { .. }
            | UnknownVariable { .. }
            | Domain(_)
            | NotAccumulating { .. }
            | NoFiber { .. } => ErrorClass::Domain,
            Accuracy { .. }
            | StepUnderflow { .. }
            | BudgetExceeded { .. }
            | NonFinite { .. }
            | NotSpiraling
            | NoCrossings
            | BlowUp { .. }
            | InsufficientScales { .. }
            | DegenerateSequence(_)
            | UnderResolved { .. }
            | RasterBudget { .. }
            | Root(_)
            | QuadratureFailure { .. }
            | FoldResolution { .. }
            | BracketFailure { .. }
            | TruncatedSequence { .. } => ErrorClass::Numerical,
            NoBranch
            | NotContact { .. }
            | NotHopf(_)
            | SlowSingularity { .. }
            | NoBalancedLevel
            | MultipleRoots { .. }
            | Assumption2Violated { .. } => ErrorClass::Assumption,
            Ambiguous { .. } => ErrorClass::Ambiguous,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class().exit_code()
    }
}

impl From<OdeError> for Error {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::StepUnderflow { t, state } => Error::StepUnderflow { t, state },
            OdeError::BudgetExceeded { steps, t } => Error::BudgetExceeded { steps, t },
            OdeError::NonFinite { t } => Error::NonFinite { t },
        }
    }
}

impl From<RootError> for Error {
    fn from(e: RootError) -> Self {
        Error::Root(format!("{e:?}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct_per_class() {
        let codes: Vec<i32> = [
            ErrorClass::Domain,
            ErrorClass::Numerical,
            ErrorClass::Assumption,
            ErrorClass::Ambiguous,
        ]
        .iter()
        .map(|c| c.exit_code())
        .collect();
        assert_eq!(codes, vec![2, 3, 4, 5]);
        assert_eq!(Error::NoBalancedLevel.exit_code(), 4);
        assert_eq!(Error::NotAccumulating { ratio: -1.0 }.exit_code(), 2);
    }
}
