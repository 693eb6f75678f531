//! Drivers for the desk-scale experiments: overrepresented classes and restriction effects.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::counts::{discrepancy, joint_counts, DiscrepancyReport, JointCountTable, Restriction};
use super::sieve::SieveRange;
use crate::delange::{AdditiveFunction, PrimePowerRule};
use crate::error::{Error, Limits, Result};
use crate::numtheory::{factor, IntPoly};
use crate::polysystem::PolySystem;

#[derive(Clone, Debug)]
pub struct ExperimentOptions {
    /// `K` in the admissible range `q ≤ (log x)^K`.
    pub log_power: f64,
    pub limits: Limits,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            log_power: 2.0,
            limits: Limits::default(),
        }
    }
}

/// Count of one residue class against the uniform expectations.
#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    pub experiment: String,
    pub q: u64,
    pub x: u64,
    pub restriction: Restriction,
    pub class: Vec<u64>,
    pub count: u64,
    pub total_restricted: u64,
    /// `x / q^M`.
    pub uniform_expectation: f64,
    pub ratio: f64,
    /// `total_restricted / q^M`.
    pub restricted_expectation: f64,
    pub restricted_ratio: f64,
    /// `π(x; q, a)` when primes alone force the class.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prime_lower_bound: Option<u64>,
    /// Predicted order of magnitude of the class count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_scale: Option<f64>,
    #[serde(skip)]
    pub table: JointCountTable,
}

impl ClassReport {
    fn from_table(experiment: &str, table: JointCountTable, class: Vec<u64>) -> Self {
        let qm = (table.q as f64).powi(table.dims as i32);
        let count = table.get(&class);
        let uniform_expectation = table.x as f64 / qm;
        let restricted_expectation = table.total_restricted as f64 / qm;
        ClassReport {
            experiment: experiment.to_string(),
            q: table.q,
            x: table.x,
            restriction: table.restriction,
            class,
            count,
            total_restricted: table.total_restricted,
            uniform_expectation,
            ratio: count as f64 / uniform_expectation,
            restricted_expectation,
            restricted_ratio: if restricted_expectation > 0.0 {
                count as f64 / restricted_expectation
            } else {
                f64::NAN
            },
            prime_lower_bound: None,
            predicted_scale: None,
            table,
        }
    }
}

fn check_range(q: u64, x: u64, opts: &ExperimentOptions) -> Result<()> {
    let bound = (x.max(3) as f64).ln().powf(opts.log_power);
    if q as f64 > bound {
        return Err(Error::precondition(format!(
            "q = {q} exceeds (log x)^{} = {bound:.1}",
            opts.log_power
        )));
    }
    Ok(())
}

fn check_least_prime(q: u64, bound: &BigInt, what: &str) -> Result<()> {
    let fq = factor(q)?;
    if q < 2 {
        return Err(Error::ModulusTooSmall(q));
    }
    let p = fq.least_prime();
    if BigInt::from(p) <= *bound {
        return Err(Error::precondition(format!(
            "least prime factor {p} of q = {q} does not exceed {what} = {bound}"
        )));
    }
    Ok(())
}

fn residue(v: &BigInt, q: u64) -> u64 {
    v.mod_floor(&BigInt::from(q)).to_u64().expect("residue below q")
}

/// `G_i = G^i` for a monic `G` with a nonzero integer root `a`: primes `p ≡ a (mod q)`
/// all land in the zero class.
pub fn run_counterexample_4_1(
    g: &IntPoly,
    rule: PrimePowerRule,
    m: usize,
    q: u64,
    x: u64,
    sieve: &SieveRange,
    opts: &ExperimentOptions,
) -> Result<ClassReport> {
    if m == 0 {
        return Err(Error::EmptySystem);
    }
    if !g.is_monic() || g.is_constant() {
        return Err(Error::precondition("G must be monic and nonconstant"));
    }
    let a = g
        .integer_roots()
        .into_iter()
        .filter(|r| !r.is_zero())
        .min_by_key(|r| r.abs())
        .ok_or_else(|| Error::precondition("G has no nonzero integer root"))?;
    let polys: Vec<IntPoly> = (1..=m as u32).map(|i| g.pow(i)).collect();
    let system = PolySystem::new(polys.clone())?;
    let c0 = system
        .c0()
        .ok_or_else(|| Error::precondition("derivatives of the powers are dependent"))?;
    let bound = std::cmp::max(a.abs(), c0.clone());
    check_least_prime(q, &bound, "max{|a|, C0}")?;
    check_range(q, x, opts)?;
    let gs = polys
        .into_iter()
        .map(|p| AdditiveFunction::new(p, rule.clone()))
        .collect::<Result<Vec<_>>>()?;
    let table = joint_counts(&gs, q, x, Restriction::None, sieve, &opts.limits)?;
    let mut report = ClassReport::from_table("cex4.1", table, vec![0; m]);
    report.prime_lower_bound = Some(sieve.prime_count_in_class(q, residue(&a, q)));
    Ok(report)
}

/// `(T, T³)` under the strong rule with `P_2(n) > q`: products of two primes with
/// `P_2 ≡ -P_1 (mod q)` land in the zero class.
pub fn run_counterexample_6_1(
    q: u64,
    x: u64,
    sieve: &SieveRange,
    opts: &ExperimentOptions,
) -> Result<ClassReport> {
    let polys = vec![IntPoly::from_i64s(&[0, 1]), IntPoly::from_i64s(&[0, 0, 0, 1])];
    let system = PolySystem::new(polys.clone())?;
    let c0 = system.c0().expect("T and T^3 have independent derivatives");
    check_least_prime(q, c0, "C0")?;
    check_range(q, x, opts)?;
    let gs = polys
        .into_iter()
        .map(AdditiveFunction::strong)
        .collect::<Result<Vec<_>>>()?;
    let table = joint_counts(&gs, q, x, Restriction::PkGtQ { k: 2 }, sieve, &opts.limits)?;
    let mut report = ClassReport::from_table("cex6.1", table, vec![0, 0]);
    let lx = (x as f64).ln();
    report.predicted_scale = Some(x as f64 * lx.ln() / (q as f64 * lx));
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct Thm14Report {
    /// Target residue before reduction mod `q`.
    #[serde(with = "crate::numtheory::bigint_string")]
    pub b_last: BigInt,
    /// Constant the least prime factor of `q` had to exceed.
    #[serde(with = "crate::numtheory::bigint_string")]
    pub constant: BigInt,
    #[serde(flatten)]
    pub class: ClassReport,
}

/// `b_M = G_M(0)·R + Σ a_i (b_i - G_i(0)·R)`.
pub fn thm14_target(first: &[IntPoly], a: &[i64], last: &IntPoly, r: u32, b: &[i64]) -> BigInt {
    let r = BigInt::from(r);
    let mut acc = last.coeff(0) * &r;
    for ((g, &ai), &bi) in first.iter().zip(a).zip(b) {
        acc += BigInt::from(ai) * (BigInt::from(bi) - g.coeff(0) * &r);
    }
    acc
}

/// Validates `G_M' = Σ a_i G_i'` and `G_M(0) ≠ Σ a_i G_i(0)`, returning the modulus constant
/// `max{C1(G_1..G_M), C0(G_1..G_{M-1})}`.
pub fn thm14_constant(first: &[IntPoly], a: &[i64], last: &IntPoly) -> Result<BigInt> {
    if first.is_empty() {
        return Err(Error::precondition("need at least one function before G_M"));
    }
    if first.len() != a.len() {
        return Err(Error::precondition(format!(
            "{} coefficients a_i for {} functions",
            a.len(),
            first.len()
        )));
    }
    let derivs: Vec<IntPoly> = first.iter().map(IntPoly::derivative).collect();
    let combo = IntPoly::linear_combination(&derivs, a);
    if last.derivative() != combo {
        return Err(Error::precondition(format!(
            "G_M' = {} differs from Σ a_i G_i' = {combo}",
            last.derivative()
        )));
    }
    let shift: BigInt = first
        .iter()
        .zip(a)
        .map(|(g, &ai)| g.coeff(0) * BigInt::from(ai))
        .sum();
    if last.coeff(0) == shift {
        return Err(Error::precondition(format!(
            "G_M(0) = Σ a_i G_i(0) = {shift}"
        )));
    }
    let head = PolySystem::new(first.to_vec())?;
    let c0 = head
        .c0()
        .cloned()
        .ok_or_else(|| Error::precondition("G_1', ..., G_{M-1}' are dependent"))?;
    let mut all = first.to_vec();
    all.push(last.clone());
    let c1 = PolySystem::new(all)?
        .c1()
        .ok_or_else(|| Error::Inconsistency("G_1..G_M dependent despite the shift".into()))?;
    Ok(std::cmp::max(c0, c1))
}

#[allow(clippy::too_many_arguments)]
pub fn run_thm_1_4(
    first: &[AdditiveFunction],
    a: &[i64],
    last: &AdditiveFunction,
    r: u32,
    b: &[i64],
    q: u64,
    x: u64,
    sieve: &SieveRange,
    opts: &ExperimentOptions,
) -> Result<Thm14Report> {
    if b.len() != first.len() {
        return Err(Error::precondition(format!(
            "{} targets b_i for {} functions",
            b.len(),
            first.len()
        )));
    }
    if r == 0 {
        return Err(Error::precondition("R must be positive"));
    }
    let first_polys: Vec<IntPoly> = first.iter().map(|g| g.poly().clone()).collect();
    let constant = thm14_constant(&first_polys, a, last.poly())?;
    check_least_prime(q, &constant, "the modulus constant")?;
    check_range(q, x, opts)?;
    let b_last = thm14_target(&first_polys, a, last.poly(), r, b);
    let mut gs = first.to_vec();
    gs.push(last.clone());
    let mut class: Vec<u64> = b.iter().map(|&bi| residue(&BigInt::from(bi), q)).collect();
    class.push(residue(&b_last, q));
    let table = joint_counts(&gs, q, x, Restriction::PkGtQ { k: r }, sieve, &opts.limits)?;
    let mut report = ClassReport::from_table("thm1.4", table, class);
    let lx = (x as f64).ln();
    report.predicted_scale =
        Some(x as f64 * lx.ln().powi(r as i32 - 1) / ((q as f64).powi(gs.len() as i32 - 1) * lx));
    Ok(Thm14Report {
        b_last,
        constant,
        class: report,
    })
}

/// Which input restriction to compare against the unrestricted count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RestrictedTheorem {
    /// `P_{MD+1}(n) > q`, any `q`.
    GeneralModulus,
    /// `P_{2M}(n) > q`, squarefree `q`.
    SquarefreeModulus,
}

impl RestrictedTheorem {
    pub fn restriction(self, system: &PolySystem, q: u64) -> Result<Restriction> {
        let m = system.len() as u32;
        match self {
            RestrictedTheorem::GeneralModulus => Ok(Restriction::PkGtQ {
                k: m * system.degree_max() as u32 + 1,
            }),
            RestrictedTheorem::SquarefreeModulus => {
                if !factor(q)?.is_squarefree() {
                    return Err(Error::precondition(format!("q = {q} is not squarefree")));
                }
                Ok(Restriction::PkGtQ { k: 2 * m })
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RestrictionComparison {
    pub theorem: RestrictedTheorem,
    pub unrestricted: DiscrepancyReport,
    pub restricted: DiscrepancyReport,
}

impl RestrictionComparison {
    pub fn improves(&self) -> bool {
        self.restricted.max_rel_dev <= self.unrestricted.max_rel_dev
    }
}

/// Discrepancy with and without the theorem's restriction. Fails with
/// [`Error::EmptyTable`] when no `n ≤ x` passes the restriction.
pub fn compare_restriction(
    gs: &[AdditiveFunction],
    theorem: RestrictedTheorem,
    q: u64,
    x: u64,
    sieve: &SieveRange,
    opts: &ExperimentOptions,
) -> Result<RestrictionComparison> {
    let system = PolySystem::new(gs.iter().map(|g| g.poly().clone()).collect())?;
    let restriction = theorem.restriction(&system, q)?;
    let plain = joint_counts(gs, q, x, Restriction::None, sieve, &opts.limits)?;
    let restricted = joint_counts(gs, q, x, restriction, sieve, &opts.limits)?;
    Ok(RestrictionComparison {
        theorem,
        unrestricted: discrepancy(&plain)?,
        restricted: discrepancy(&restricted)?,
    })
}
