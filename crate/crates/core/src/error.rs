use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("not a unit: {0}")]
    NotAUnit(String),

    #[error("map is not pi-equivariant: {0}")]
    NotPiEquivariant(String),

    #[error("operands built over different skew data")]
    DatumMismatch,

    #[error("precision too low: {0}")]
    PrecisionTooLow(String),

    #[error("detected order {0} is not a p-power")]
    NotPPower(u64),

    #[error("hypothesis violated: {0}")]
    HypothesisFail(String),

    #[error("cannot certify a finite truncation-tail loss: {0}")]
    UnboundedTail(String),

    #[error("iteration failed to converge: {0}")]
    NoConvergence(String),

    #[error("change of variable is not triangular: {0}")]
    NotTriangular(String),

    #[error("generator set is not sigma-invariant")]
    NotSigmaInvariant,

    #[error("ideal is zero")]
    ZeroIdeal,

    #[error("base ring is not prime")]
    BaseNotPrime,

    #[error("instance too large for exhaustive mode: {0}")]
    TooLarge(String),

    #[error("{0} is not coprime to p")]
    NotCoprime(u64),

    #[error("no nonzero central element of positive degree at this precision")]
    NoCentralElement,

    #[error("no root of the twisted polynomial matches in this extension")]
    RootNotFound,

    #[error("element is not central modulo the maximal ideal")]
    NotCentralModJ,

    #[error("bad degree: {0}")]
    BadDegree(String),

    #[error("certification failed: {0}")]
    CertificationFail(String),

    #[error("map fails multiplicativity on a sample")]
    NotAnAutomorphism,

    #[error("commutation precondition failed: {0}")]
    CommutationFail(String),

    #[error("precision exhausted during {0}")]
    PrecisionExhausted(String),

    #[error("invalid construction: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
