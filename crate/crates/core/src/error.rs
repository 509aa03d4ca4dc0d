use thiserror::Error;

/// Errors produced by parameter validation, exact algebra, and the field oracle.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported discriminant: l = {0} must be a prime congruent to 3 mod 4, l != 3")]
    UnsupportedDiscriminant(u64),
    #[error("no representation a^2 + {l} b^2 = 4 {p}^{h}")]
    NoRepresentation { p: u64, l: u64, h: u32 },
    #[error("not an index-2 instance: ord_{{{modulus}}}({p}) = {order}, expected {expected}")]
    NotIndexTwo {
        p: u64,
        modulus: u64,
        order: u64,
        expected: u64,
    },
    #[error("bad l: {0} (need an odd prime l = 3 mod 4, l != 3)")]
    BadL(u64),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("{0} is not a quadratic residue mod {1}")]
    NotAResidue(u64, u64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid character exponent {0} (must be nonzero mod N)")]
    InvalidExponent(u64),
    #[error("cannot certify a primitive element: {0}")]
    CannotCertifyPrimitive(String),
    #[error("zero input where a nonzero field element is required")]
    ZeroInput,
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
