use thiserror::Error;

/// Errors produced by the pricing engine.
///
/// The variants split into two families that callers (notably the CLI)
/// treat differently: input problems (`Domain`, `Config`, `Io`) and
/// mathematical non-existence (`NoSolution`, `NoMartingaleMeasure`,
/// `Unsupported`).
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested measure does not exist for these parameters.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// The physical law can never be a martingale measure (λ⁺ ≤ 1).
    #[error("not a martingale measure: {0}")]
    NoMartingaleMeasure(String),

    /// An iterative scheme failed to meet its tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// The operation is not available for the given law.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Price outside the no-arbitrage interval of an implied-vol inversion.
    #[error("price {price} outside no-arbitrage bounds ({lower}, {upper})")]
    OutOfBounds { price: f64, lower: f64, upper: f64 },

    /// Failure at a single point of a strike/maturity grid.
    #[error("grid point maturity={maturity}, strike={strike}: {source}")]
    GridPoint {
        maturity: f64,
        strike: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that signal mathematical non-existence rather than
    /// bad input.
    pub fn is_no_solution(&self) -> bool {
        match self {
            Error::NoSolution(_) | Error::NoMartingaleMeasure(_) | Error::Unsupported(_) => true,
            Error::GridPoint { source, .. } => source.is_no_solution(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

/// Returns a domain error unless `value` is finite and strictly positive.
pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and > 0, got {value}")))
    }
}
