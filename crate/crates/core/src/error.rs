use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// The split between the first three variants mirrors the CLI exit codes:
/// input and domain problems are the caller's fault, numerical failures are
/// ours (or the problem's conditioning).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or out-of-range arguments.
    #[error("invalid input: {0}")]
    Input(String),

    /// Arguments are well formed but fall outside the mathematical domain,
    /// e.g. a matrix that is not positive definite.
    #[error("domain error: {0}")]
    Domain(String),

    /// A solver failed to bracket or converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The concentration bound is not valid for this sample size.
    #[error(
        "side condition sqrt(log(1/delta)/(2n)) < 1/3 fails for n={n}, delta={delta}; \
         the minimal admissible n is {min_n}"
    )]
    SideCondition { n: usize, delta: f64, min_n: usize },

    /// A growth condition required by an experiment could not be certified.
    #[error("uncertified growth condition: {0}")]
    Uncertified(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for failures a caller cannot fix by changing its arguments.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
