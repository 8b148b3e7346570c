use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("control `{name}` = {value} lies outside [0, 1)")]
    ControlOutOfRange { name: &'static str, value: f64 },

    #[error("parameter `{name}` = {value} is invalid: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{0}")]
    InvalidScenario(String),

    #[error("non-finite or negative state component `{component}` = {value} at t = {time}")]
    NonFiniteState {
        component: &'static str,
        value: f64,
        time: f64,
    },

    #[error("infectious compartments still above {threshold} at horizon t = {horizon}")]
    NonConvergence { horizon: f64, threshold: f64 },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("transition matrix is singular")]
    SingularTransition,

    #[error("power iteration did not converge after {iterations} iterations")]
    EigenNonConvergence { iterations: usize },

    #[error("closed-form reproduction number {closed} disagrees with spectral radius {spectral}")]
    InconsistentClosedForm { closed: f64, spectral: f64 },

    #[error("cost weights are for {weights} control but the scenario uses {scenario} control")]
    StrategyMismatch {
        weights: &'static str,
        scenario: &'static str,
    },

    #[error("invalid range for `{name}`: [{low}, {high})")]
    InvalidRange { name: String, low: f64, high: f64 },

    #[error("degenerate column `{0}`: zero rank variance")]
    DegenerateColumn(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}
