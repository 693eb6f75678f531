//! Joint equidistribution of polynomially-defined additive functions modulo `q`:
//! decision procedures, exponential sums, exact counts and sieve experiments.

pub mod charsum;
pub mod corpus;
pub mod delange;
pub mod error;
pub mod matrix;
pub mod numtheory;
pub mod polysystem;
pub mod sievelab;
pub mod vcount;

pub use delange::{AdditiveFunction, EquidVerdict, PrimePowerRule, SystemFile, Witness};
pub use error::{Error, ErrorKind, Limits, Result};
pub use numtheory::{factor, FactoredModulus, IntPoly, ModPoly, PrimePower, Valuation};
pub use polysystem::PolySystem;
pub use sievelab::{JointCountTable, Restriction, SieveRange};
pub use vcount::VDistribution;

/// Smith normal form over arbitrary-precision integers.
pub type SmithForm = matrix::SmithForm<num_bigint::BigInt>;
/// Integer matrix over arbitrary-precision integers.
pub type IntMatrix = matrix::Matrix<num_bigint::BigInt>;
/// Exponential sums evaluated in double precision.
pub type ExpSumResult = charsum::ExpSumResult<f64>;
pub type SumEngine = charsum::SumEngine<f64>;
