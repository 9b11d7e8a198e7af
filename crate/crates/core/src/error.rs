use thiserror::Error;

pub type Result<T, E = MuntzError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MuntzError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A search ran off the end of the stored exponent prefix.
    #[error("insufficient sequence: requested {requested}, achieved {achieved}")]
    InsufficientSequence { requested: usize, achieved: usize },

    /// The derivative scan found more sign changes than the exponential-sum
    /// term bound allows.
    #[error("numerical inconsistency: {sign_changes} derivative sign changes exceed the bound {bound}")]
    NumericalInconsistency { sign_changes: usize, bound: usize },

    #[error("bisection did not converge on [{lo}, {hi}]")]
    Tolerance { lo: f64, hi: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("empty superlevel set: level {level} is not below the norm {norm}")]
    EmptyInterval { level: f64, norm: f64 },

    /// `alpha = 0`: the function `1 - x^beta` is monotone, not a spike.
    #[error("edge profile: alpha = 0 gives a monotone function with norm 1 attained at x = 0")]
    EdgeProfile { beta: f64 },

    #[error("construction failed at n = {n}: condition ({condition}) violated at t = {t}")]
    ConstructionFailure { n: usize, condition: String, t: f64 },

    #[error("no k <= {k_max} qualifies; best sup-norm excess {best_norm_excess:e}, best membership margin {best_membership_margin:e}")]
    KNotFound { k_max: usize, best_norm_excess: f64, best_membership_margin: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl MuntzError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        MuntzError::InvalidInput(msg.into())
    }
}
