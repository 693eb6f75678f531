//! Sieve-backed experiments over `n ≤ x`.

pub mod counts;
pub mod experiments;
pub mod sieve;

pub use counts::{
    discrepancy, eval_additive, eval_additive_mod, joint_counts, omega_star_gt_q, pk_largest,
    DiscrepancyReport, JointCountTable, Restriction, RestrictionSpec,
};
pub use sieve::{Factorization, SieveRange};
