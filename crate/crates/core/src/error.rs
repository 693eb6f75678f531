use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Inputs violate an operation's preconditions.
    Precondition,
    /// The configured work budget was too small to decide or compute.
    Budget,
    /// An internal cross-check disagreed.
    Invariant,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus must be greater than 1 (got {0})")]
    ModulusTooSmall(u64),
    #[error("modulus {q} is not below the factorization bound {bound}")]
    ModulusTooLarge { q: u64, bound: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("moduli {a} and {b} are not coprime")]
    NonCoprimeModuli { a: u64, b: u64 },
    #[error("product of moduli overflows 64 bits")]
    ModulusOverflow,
    #[error("polynomial system is empty")]
    EmptySystem,
    #[error("polynomial #{0} of the system is constant")]
    ConstantPolynomial(usize),
    #[error("matrix is zero")]
    ZeroMatrix,
    #[error("polynomial reduces to a constant modulo {0}")]
    ConstantModPrime(u64),
    #[error("table rule does not declare the eventual parity of g(2^r)")]
    UndeclaredParity,
    #[error("invalid prime-power rule: {0}")]
    InvalidRule(String),
    #[error("{what}: required work {required} exceeds budget {limit}")]
    BudgetExceeded {
        what: &'static str,
        required: u128,
        limit: u128,
    },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("floating-point rounding residual {residual:.3e} (error bound {bound:.3e}) too large to round to an integer")]
    RoundingResidual { residual: f64, bound: f64 },
    #[error("internal consistency check failed: {0}")]
    Inconsistency(String),
    #[error("count table is empty")]
    EmptyTable,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::BudgetExceeded { .. } => ErrorKind::Budget,
            Error::Inconsistency(_) | Error::RoundingResidual { .. } => ErrorKind::Invariant,
            _ => ErrorKind::Precondition,
        }
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

/// Work limits shared by the enumeration-style computations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Tuples examined by the exhaustive joint-equidistribution check.
    pub slow_path_tuples: u128,
    /// Cell updates performed by the convolution counter.
    pub dp_work: u128,
    /// Character tuples summed by the orthogonality counter.
    pub orthogonality_tuples: u128,
    /// Largest sieve bound.
    pub sieve_max_x: u64,
    /// Largest residue table (q^M cells).
    pub table_cells: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            slow_path_tuples: 10_000_000,
            dp_work: 10_000_000_000,
            orthogonality_tuples: 100_000_000,
            sieve_max_x: 200_000_000,
            table_cells: 100_000_000,
        }
    }
}

impl Limits {
    /// Applies one work budget to every enumeration bound.
    pub fn with_work_budget(budget: u128) -> Self {
        Limits {
            slow_path_tuples: budget,
            dp_work: budget,
            orthogonality_tuples: budget,
            ..Limits::default()
        }
    }

    pub(crate) fn check(what: &'static str, required: u128, limit: u128) -> Result<()> {
        if required > limit {
            Err(Error::BudgetExceeded {
                what,
                required,
                limit,
            })
        } else {
            Ok(())
        }
    }
}
