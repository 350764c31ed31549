use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("periods {periods:?} are not pairwise coprime (gcd({a},{b}) = {g}); the irreducibility results assume relatively prime periods, pass the non-coprime override to proceed anyway")]
    NonCoprime {
        periods: Vec<usize>,
        a: usize,
        b: usize,
        g: usize,
    },
    #[error("invalid periods: {0}")]
    InvalidPeriods(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("variable count mismatch: {0} vs {1}")]
    NvarsMismatch(usize, usize),
    #[error("zero coordinate with a negative exponent in variable z{0}")]
    ZeroCoordinate(usize),
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("potential has floating-point values; {0} needs exact values, use the numeric pipeline instead")]
    NotExact(&'static str),
    #[error("potential is not real; {0}")]
    NotReal(&'static str),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
