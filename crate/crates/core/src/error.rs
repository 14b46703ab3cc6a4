use std::fmt;

/// Half-open interval `[lo, hi)` on the real line.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        !(self.hi > self.lo)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn overlap(&self, other: &Interval) -> f64 {
        (self.hi.min(other.hi) - self.lo.max(other.lo)).max(0.0)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid exponent relation: {0}")]
    InvalidExponent(String),

    #[error("domain must be bounded, got {0}")]
    UnboundedDomain(Interval),

    #[error("not integrable on {interval}: {detail}")]
    NonIntegrable { interval: Interval, detail: String },

    #[error("degenerate quantity on {interval}: {detail}")]
    Degenerate { interval: Interval, detail: String },

    #[error("evaluation point {0} is a jump of the integrand")]
    JumpPoint(f64),

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {error:e}")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("search failed: {0}")]
    SearchFailed(String),

    #[error("unresolved: {0}")]
    Unresolved(String),

    #[error("missing reducing matrix for cube {0}")]
    MissingReducer(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerical trouble.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::InvalidExponent(_) | Error::UnboundedDomain(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
