//! Structured errors shared by all modules.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An operand has the wrong base or fiber dimension.
    DimensionMismatch { expected: usize, got: usize, what: &'static str },
    /// A combinator precondition on index sets or operand shapes failed.
    Arity(String),
    /// A scalar argument lies outside its admissible range.
    Range { what: &'static str, value: f64 },
    /// The almost-simple decomposition is not structurally tracked and the
    /// caller did not supply a Morse index.
    IndexNotTracked,
    /// `strip_stabilization` found no stabilization pattern to remove.
    NoStabilizationFound,
    /// A rewrite expected a specific expression shape (e.g. sum of two
    /// transforms) and the operand does not have it.
    PatternNotApplicable(String),
    /// A function required to be simple has a non-monotone gradient; the
    /// witness interval brackets the violation.
    NotSimple { witness: (f64, f64) },
    /// The essential-rank pattern of the relative sublevel homology is not
    /// "rank 1 in one degree, 0 elsewhere".
    HomologyNotSimple(String),
    /// Conjugation of a grid function whose tail grows sublinearly slow or
    /// concave: the conjugate is not finite-valued.
    ConjugateNotFinite(String),
    /// A cloud required to be nonempty is empty.
    EmptyCloud,
    /// Fiber box expansion hit its retry limit without satisfying the
    /// boundary-gradient precondition.
    BoxInsufficient(String),
    Unsupported(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got, what } => {
                write!(f, "dimension mismatch for {what}: expected {expected}, got {got}")
            }
            Error::Arity(msg) => write!(f, "arity error: {msg}"),
            Error::Range { what, value } => write!(f, "{what} out of range: {value}"),
            Error::IndexNotTracked => {
                write!(f, "almost-simple index not tracked; supply the Morse index explicitly")
            }
            Error::NoStabilizationFound => write!(f, "no stabilization found"),
            Error::PatternNotApplicable(msg) => write!(f, "pattern not applicable: {msg}"),
            Error::NotSimple { witness } => {
                write!(f, "not simple: gradient monotonicity fails on [{}, {}]", witness.0, witness.1)
            }
            Error::HomologyNotSimple(msg) => {
                write!(f, "homology not simple: enlarge box or grid ({msg})")
            }
            Error::ConjugateNotFinite(msg) => write!(f, "conjugate not finite: {msg}"),
            Error::EmptyCloud => write!(f, "empty cloud"),
            Error::BoxInsufficient(msg) => write!(f, "fiber box insufficient: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
