//! Error type shared by the whole crate.

use thiserror::Error;

/// Errors raised by p-adic arithmetic, step-function algebra, Fourier
/// analysis and the experiment driver.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),

    /// A truncated expansion does not carry enough digits to decide the
    /// question being asked. Precision loss is an error, never silent.
    #[error("insufficient precision: digits known below exponent {hi}, need them up to {needed}")]
    InsufficientPrecision { hi: i32, needed: i32 },

    #[error("cannot refine level {have} down to coarser level {requested}")]
    RefinementDirection { have: i32, requested: i32 },

    #[error("{name} must be nonnegative, got {value}")]
    Negative { name: &'static str, value: i64 },

    #[error("digit {digit} out of range for prime {prime}")]
    DigitRange { digit: u32, prime: u64 },

    /// An operation defined on the unit ball Z_p received a function with
    /// support outside it.
    #[error("support must lie in the unit ball Z_p: {0}")]
    OutsideUnitBall(String),

    #[error("denominator {denom} is not a power of the prime {prime}")]
    DenominatorNotPPower { denom: String, prime: u64 },

    #[error("Haar scale must be a positive rational")]
    NonpositiveScale,

    /// The reference function of a measure-ratio comparison must be real,
    /// nonnegative and not identically zero.
    #[error("reference function must be real, nonnegative and nonzero")]
    InvalidReference,

    /// Implementation limit: the requested object would materialize more
    /// pieces than this desk-scale model supports.
    #[error("size limit exceeded: {0}")]
    TooLarge(String),

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
