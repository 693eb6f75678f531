//! Equidistribution decisions for polynomially-defined additive functions.
//!
//! A function `g` is tested modulo `q` through the divergence of
//! `S_d = Σ_{d ∤ g(p)} 1/p`, which for polynomially-defined `g` happens exactly
//! when `β_G(d) ≠ 0`, together with the parity of `g(2^r)`. Families are
//! reduced to single functions via the combinations `Σ k_i g_i`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Limits, Result};
use crate::numtheory::{gcd, inv_mod, is_prime, mul_mod, pow_mod, FactoredModulus, IntPoly};
use crate::polysystem::{kernel_vector_mod_prime, PolySystem};

/// Primes up to this bound get exact `α` by direct enumeration.
const ALPHA_BRUTE_LIMIT: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn of(n: &BigInt) -> Parity {
        if n.is_even() {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn bit(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

/// Values at prime powers for the rules that need no table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseRule {
    /// `g(p^k) = k·G(p)`.
    Complete,
    /// `g(p^k) = G(p)`.
    Strong,
    /// `g(p^k) = G(p^k)`.
    Poly,
}

/// Explicit values `g(2^r)` for `1 ≤ r ≤ len`, with a base rule everywhere else.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRule {
    pub two_powers: Vec<i64>,
    /// Parity of `g(2^r)` for every `r > len`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eventual_parity: Option<Parity>,
    #[serde(default = "default_fallback")]
    pub fallback: BaseRule,
}

fn default_fallback() -> BaseRule {
    BaseRule::Strong
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrimePowerRule {
    Complete,
    Strong,
    Poly,
    Table(TableRule),
}

impl From<BaseRule> for PrimePowerRule {
    fn from(b: BaseRule) -> Self {
        match b {
            BaseRule::Complete => PrimePowerRule::Complete,
            BaseRule::Strong => PrimePowerRule::Strong,
            BaseRule::Poly => PrimePowerRule::Poly,
        }
    }
}

fn base_value(rule: BaseRule, poly: &IntPoly, p: u64, k: u32) -> BigInt {
    match rule {
        BaseRule::Complete => poly.eval(&BigInt::from(p)) * k,
        BaseRule::Strong => poly.eval(&BigInt::from(p)),
        BaseRule::Poly => poly.eval(&num_traits::pow(BigInt::from(p), k as usize)),
    }
}

fn base_value_mod(rule: BaseRule, poly: &IntPoly, p: u64, k: u32, q: u64) -> u64 {
    let gp = poly.eval_mod(p % q, q);
    match rule {
        BaseRule::Complete => mul_mod(gp, k as u64 % q, q),
        BaseRule::Strong => gp,
        BaseRule::Poly => poly.eval_mod(pow_mod(p % q, k as u64, q), q),
    }
}

fn base_parity(rule: BaseRule, poly: &IntPoly, r: u32) -> Parity {
    match rule {
        BaseRule::Complete => Parity::of(&(poly.eval_i64(2) * r)),
        BaseRule::Strong => Parity::of(&poly.eval_i64(2)),
        // 2^r ≡ 0 mod 2 for r ≥ 1
        BaseRule::Poly => Parity::of(&poly.coeff(0)),
    }
}

/// Additive function with `g(p) = G(p)` on primes and `g(1) = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFunction")]
pub struct AdditiveFunction {
    poly: IntPoly,
    rule: PrimePowerRule,
}

#[derive(Deserialize)]
struct RawFunction {
    poly: IntPoly,
    rule: PrimePowerRule,
}

impl TryFrom<RawFunction> for AdditiveFunction {
    type Error = Error;
    fn try_from(raw: RawFunction) -> Result<Self> {
        AdditiveFunction::new(raw.poly, raw.rule)
    }
}

impl AdditiveFunction {
    pub fn new(poly: IntPoly, rule: PrimePowerRule) -> Result<Self> {
        if poly.is_constant() {
            return Err(Error::ConstantPolynomial(0));
        }
        if let PrimePowerRule::Table(t) = &rule {
            let Some(&first) = t.two_powers.first() else {
                return Err(Error::InvalidRule("table rule lists no values".into()));
            };
            if BigInt::from(first) != poly.eval_i64(2) {
                return Err(Error::InvalidRule(format!(
                    "g(2) = {first} but G(2) = {}",
                    poly.eval_i64(2)
                )));
            }
            if let Some(par) = t.eventual_parity {
                let len = t.two_powers.len() as u32;
                for r in [len + 1, len + 2] {
                    if base_parity(t.fallback, &poly, r) != par {
                        return Err(Error::InvalidRule(format!(
                            "declared parity {par:?} disagrees with the fallback rule at r = {r}"
                        )));
                    }
                }
            }
        }
        Ok(AdditiveFunction { poly, rule })
    }

    pub fn complete(poly: IntPoly) -> Result<Self> {
        Self::new(poly, PrimePowerRule::Complete)
    }

    pub fn strong(poly: IntPoly) -> Result<Self> {
        Self::new(poly, PrimePowerRule::Strong)
    }

    pub fn poly(&self) -> &IntPoly {
        &self.poly
    }

    pub fn rule(&self) -> &PrimePowerRule {
        &self.rule
    }

    /// `g(p^k)` for a prime `p` and `k ≥ 1`.
    pub fn value(&self, p: u64, k: u32) -> BigInt {
        match &self.rule {
            PrimePowerRule::Complete => base_value(BaseRule::Complete, &self.poly, p, k),
            PrimePowerRule::Strong => base_value(BaseRule::Strong, &self.poly, p, k),
            PrimePowerRule::Poly => base_value(BaseRule::Poly, &self.poly, p, k),
            PrimePowerRule::Table(t) => {
                if p == 2 && (k as usize) <= t.two_powers.len() {
                    BigInt::from(t.two_powers[k as usize - 1])
                } else {
                    base_value(t.fallback, &self.poly, p, k)
                }
            }
        }
    }

    /// `g(p^k) mod q`.
    pub fn value_mod(&self, p: u64, k: u32, q: u64) -> u64 {
        match &self.rule {
            PrimePowerRule::Complete => base_value_mod(BaseRule::Complete, &self.poly, p, k, q),
            PrimePowerRule::Strong => base_value_mod(BaseRule::Strong, &self.poly, p, k, q),
            PrimePowerRule::Poly => base_value_mod(BaseRule::Poly, &self.poly, p, k, q),
            PrimePowerRule::Table(t) => {
                if p == 2 && (k as usize) <= t.two_powers.len() {
                    t.two_powers[k as usize - 1].rem_euclid(q as i64) as u64
                } else {
                    base_value_mod(t.fallback, &self.poly, p, k, q)
                }
            }
        }
    }

    /// Parity of `g(2^r)`, `r ≥ 1`.
    pub fn two_power_parity(&self, r: u32) -> Result<Parity> {
        match &self.rule {
            PrimePowerRule::Complete => Ok(base_parity(BaseRule::Complete, &self.poly, r)),
            PrimePowerRule::Strong => Ok(base_parity(BaseRule::Strong, &self.poly, r)),
            PrimePowerRule::Poly => Ok(base_parity(BaseRule::Poly, &self.poly, r)),
            PrimePowerRule::Table(t) => match t.two_powers.get(r as usize - 1) {
                Some(&v) => Ok(Parity::of(&BigInt::from(v))),
                None => t.eventual_parity.ok_or(Error::UndeclaredParity),
            },
        }
    }

    /// Past this `r` the parity sequence of `g(2^r)` repeats with period at most 2.
    pub fn parity_horizon(&self) -> u32 {
        match &self.rule {
            PrimePowerRule::Table(t) => t.two_powers.len() as u32 + 2,
            _ => 2,
        }
    }
}

/// Reason a function or family fails to be equidistributed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `S_d` converges (`β(d) = 0`) while the criterion needs it to diverge.
    ConvergentSum { d: u64 },
    /// `S_2` converges and `f(2^r)` is even.
    EvenTwoPower { r: u32 },
    /// The combination `Σ k_i g_i` (coefficients mod q) fails.
    Combination { k: Vec<u64>, cause: Box<Witness> },
    /// `Σ μ_i G_i ≡ 0` modulo a prime dividing `q`.
    DependentModPrime { prime: u64, relation: Vec<u64> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquidVerdict {
    pub equidistributed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl EquidVerdict {
    pub fn pass() -> Self {
        EquidVerdict {
            equidistributed: true,
            witness: None,
        }
    }

    pub fn fail(witness: Witness) -> Self {
        EquidVerdict {
            equidistributed: false,
            witness: Some(witness),
        }
    }
}

// ---------------------------------------------------------------------------
// α and β

/// Number of distinct nonzero roots in `F_ell` of a polynomial not ≡ 0 mod `ell`.
fn nonzero_root_count(g: &IntPoly, ell: u64) -> u64 {
    let f = trim(g.to_mod(ell).coeffs().to_vec());
    if f.len() <= 1 {
        return 0;
    }
    if ell <= ALPHA_BRUTE_LIMIT {
        let mp = g.to_mod(ell);
        return (1..ell).filter(|&v| mp.eval(v) == 0).count() as u64;
    }
    // deg gcd(f, T^(ℓ-1) - 1)
    let mut xp = poly_pow_t(ell - 1, &f, ell);
    if xp.is_empty() {
        xp.push(0);
    }
    xp[0] = (xp[0] + ell - 1) % ell;
    let h = poly_gcd(f, trim(xp), ell);
    (h.len() - 1) as u64
}

fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(mut a: Vec<u64>, b: &[u64], p: u64) -> Vec<u64> {
    let db = b.len() - 1;
    let inv = inv_mod(b[db], p).expect("nonzero leading coefficient");
    while a.len() > db {
        let lead = mul_mod(*a.last().unwrap(), inv, p);
        let shift = a.len() - 1 - db;
        for (i, &bc) in b.iter().enumerate() {
            let sub = mul_mod(lead, bc, p);
            a[shift + i] = (a[shift + i] + p - sub) % p;
        }
        a.pop();
        a = trim(a);
    }
    trim(a)
}

fn poly_mul_rem(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    poly_rem(out, m, p)
}

/// `T^e mod m` over `F_p`.
fn poly_pow_t(mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut result = poly_rem(vec![1], m, p);
    let mut base = poly_rem(vec![0, 1], m, p);
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mul_rem(&result, &base, m, p);
        }
        base = poly_mul_rem(&base, &base, m, p);
        e >>= 1;
    }
    result
}

fn poly_gcd(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
    while !b.is_empty() {
        let r = poly_rem(a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// `α_G(ℓ)` for a prime `ℓ`; `G` may be constant.
fn alpha_prime(g: &IntPoly, ell: u64) -> BigRational {
    let units = ell - 1;
    let good = if g.is_zero_mod(ell) {
        0
    } else {
        units - nonzero_root_count(g, ell)
    };
    BigRational::new(BigInt::from(good), BigInt::from(units))
}

/// Whether `α_G(ℓ) ≠ 0`; decided without enumeration once `ℓ - 1 > deg G`.
fn alpha_prime_nonzero(g: &IntPoly, ell: u64) -> bool {
    if g.is_zero_mod(ell) {
        return false;
    }
    let deg = g.to_mod(ell).degree().unwrap_or(0) as u64;
    if ell - 1 > deg {
        return true;
    }
    let mp = g.to_mod(ell);
    (1..ell).any(|v| mp.eval(v) != 0)
}

/// Proportion of units `v` mod `q` with `G(v)` a unit, as a product over `ℓ | q`.
pub fn alpha(g: &IntPoly, q: &FactoredModulus) -> BigRational {
    q.primes()
        .map(|ell| alpha_prime(g, ell))
        .fold(BigRational::one(), |acc, a| acc * a)
}

pub fn alpha_nonzero(g: &IntPoly, q: &FactoredModulus) -> bool {
    q.primes().all(|ell| alpha_prime_nonzero(g, ell))
}

/// `β_G(d) = #{r ∈ U_d : d ∤ G(r)} / φ(d)`; `G` may be constant.
pub fn beta_prop(g: &IntPoly, d: u64) -> Result<BigRational> {
    if d < 2 {
        return Err(Error::ModulusTooSmall(d));
    }
    if is_prime(d) {
        return Ok(alpha_prime(g, d));
    }
    Limits::check("beta enumeration", d as u128, Limits::default().table_cells as u128)?;
    let mp = g.to_mod(d);
    let (mut units, mut good) = (0u64, 0u64);
    for r in (1..d).filter(|&r| gcd(r, d) == 1) {
        units += 1;
        if mp.eval(r) != 0 {
            good += 1;
        }
    }
    Ok(BigRational::new(BigInt::from(good), BigInt::from(units)))
}

fn beta_nonzero(g: &IntPoly, d: u64) -> bool {
    if is_prime(d) {
        alpha_prime_nonzero(g, d)
    } else {
        let mp = g.to_mod(d);
        (1..d).any(|r| gcd(r, d) == 1 && mp.eval(r) != 0)
    }
}

// ---------------------------------------------------------------------------
// single functions

/// Delange's single-function criterion for a function with values `f(p) = h(p)`
/// and 2-power parities given by `parity`.
fn delange_single(
    beta_nonzero_at: impl Fn(u64) -> bool,
    parity: impl Fn(u32) -> Result<Parity>,
    horizon: u32,
    q: &FactoredModulus,
) -> Result<EquidVerdict> {
    for ell in q.primes().filter(|&l| l != 2) {
        if !beta_nonzero_at(ell) {
            return Ok(EquidVerdict::fail(Witness::ConvergentSum { d: ell }));
        }
    }
    let v2 = q.valuation(2);
    if v2 == 0 {
        return Ok(EquidVerdict::pass());
    }
    if v2 >= 2 && !beta_nonzero_at(4) {
        return Ok(EquidVerdict::fail(Witness::ConvergentSum { d: 4 }));
    }
    if !beta_nonzero_at(2) {
        for r in 1..=horizon {
            if parity(r)? == Parity::Even {
                return Ok(EquidVerdict::fail(Witness::EvenTwoPower { r }));
            }
        }
    }
    Ok(EquidVerdict::pass())
}

pub fn is_equidistributed_single(g: &AdditiveFunction, q: &FactoredModulus) -> Result<EquidVerdict> {
    delange_single(
        |d| beta_nonzero(g.poly(), d),
        |r| g.two_power_parity(r),
        g.parity_horizon(),
        q,
    )
}

/// Membership via the three-case description in terms of `α` alone.
pub fn lemma23_membership(g: &AdditiveFunction, q: &FactoredModulus) -> Result<bool> {
    let mut some_even = false;
    for r in 1..=g.parity_horizon() {
        if g.two_power_parity(r)? == Parity::Even {
            some_even = true;
            break;
        }
    }
    let alpha_ok = |m: Option<FactoredModulus>| m.is_none_or(|m| alpha_nonzero(g.poly(), &m));
    if some_even {
        return Ok(alpha_nonzero(g.poly(), q));
    }
    let four = BigInt::from(4);
    let g1 = g.poly().eval_i64(1);
    let g3 = g.poly().eval_i64(3);
    if g1.gcd(&g3).is_multiple_of(&four) {
        Ok(match q.valuation(2) {
            0 => alpha_nonzero(g.poly(), q),
            1 => alpha_ok(q.divide(2)),
            _ => false,
        })
    } else {
        Ok(alpha_ok(q.odd_part()))
    }
}

// ---------------------------------------------------------------------------
// families

#[derive(Clone, Debug, Default)]
pub struct JointOptions {
    /// Skip the linear-independence shortcut and enumerate combinations.
    pub force_slow: bool,
    pub limits: Limits,
}

/// Residues `G_i(v) mod q` for `v < q` plus the data needed to test combinations.
struct CombinationTester<'a> {
    gs: &'a [AdditiveFunction],
    q: &'a FactoredModulus,
    tables: Vec<Vec<u64>>,
    horizon: u32,
}

impl<'a> CombinationTester<'a> {
    fn new(gs: &'a [AdditiveFunction], q: &'a FactoredModulus) -> Self {
        let qq = q.q();
        // every d tested divides q, so residues mod q suffice
        let tables = gs
            .iter()
            .map(|g| {
                let mp = g.poly().to_mod(qq);
                (0..qq).map(|v| mp.eval(v)).collect()
            })
            .collect();
        let horizon = gs.iter().map(AdditiveFunction::parity_horizon).max().unwrap_or(2);
        CombinationTester { gs, q, tables, horizon }
    }

    fn combo_residue(&self, k: &[u64], v: u64, d: u64) -> u64 {
        let mut acc = 0u64;
        for (ki, t) in k.iter().zip(&self.tables) {
            acc = (acc + mul_mod(*ki % d, t[v as usize] % d, d)) % d;
        }
        acc
    }

    fn test(&self, k: &[u64]) -> Result<EquidVerdict> {
        let beta_nz = |d: u64| (1..d).any(|r| gcd(r, d) == 1 && self.combo_residue(k, r, d) != 0);
        let parity = |r: u32| -> Result<Parity> {
            let mut bit = 0u8;
            for (ki, g) in k.iter().zip(self.gs) {
                if ki % 2 == 1 {
                    bit ^= g.two_power_parity(r)?.bit();
                }
            }
            Ok(if bit == 0 { Parity::Even } else { Parity::Odd })
        };
        delange_single(beta_nz, parity, self.horizon, self.q)
    }
}

/// Tuples in `(Z/q)^M` with `gcd(k, q) = 1` whose first nonzero entry divides `q`.
/// Every orbit of the unit group acting by scaling meets this set.
fn is_canonical_tuple(k: &[u64], q: u64) -> bool {
    let Some(&first) = k.iter().find(|&&x| x != 0) else {
        return false;
    };
    q % first == 0 && k.iter().fold(q, |g, &x| gcd(g, x)) == 1
}

fn decode_tuple(mut idx: u64, q: u64, m: usize) -> Vec<u64> {
    let mut k = vec![0u64; m];
    for slot in k.iter_mut().rev() {
        *slot = idx % q;
        idx /= q;
    }
    k
}

/// Exhaustive check of every combination `Σ k_i g_i` with `gcd(k, q) = 1`.
pub fn joint_slow_path(
    gs: &[AdditiveFunction],
    q: &FactoredModulus,
    limits: &Limits,
) -> Result<EquidVerdict> {
    let qq = q.q();
    let m = gs.len();
    let total = (qq as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    Limits::check("joint equidistribution tuples", total, limits.slow_path_tuples)?;
    let tester = CombinationTester::new(gs, q);
    let found = (0..total as u64)
        .into_par_iter()
        .map(|idx| decode_tuple(idx, qq, m))
        .filter(|k| is_canonical_tuple(k, qq))
        .map(|k| tester.test(&k).map(|v| (k, v)))
        .find_map_first(|res| match res {
            Ok((_, v)) if v.equidistributed => None,
            other => Some(other),
        });
    match found {
        None => Ok(EquidVerdict::pass()),
        Some(Err(e)) => Err(e),
        Some(Ok((k, v))) => Ok(EquidVerdict::fail(Witness::Combination {
            k,
            cause: Box::new(v.witness.expect("failing verdict has a witness")),
        })),
    }
}

/// Verdict of one combination, coefficients taken mod `q`.
pub fn combination_verdict(
    gs: &[AdditiveFunction],
    k: &[u64],
    q: &FactoredModulus,
) -> Result<EquidVerdict> {
    if k.len() != gs.len() {
        return Err(Error::precondition("combination length differs from system size"));
    }
    CombinationTester::new(gs, q).test(k)
}

pub fn is_jointly_equidistributed(
    gs: &[AdditiveFunction],
    q: &FactoredModulus,
    opts: &JointOptions,
) -> Result<EquidVerdict> {
    if gs.is_empty() {
        return Err(Error::EmptySystem);
    }
    let degree = gs.iter().filter_map(|g| g.poly().degree()).max().unwrap_or(0) as u64;
    if !opts.force_slow && q.least_prime() > degree + 1 {
        let polys: Vec<IntPoly> = gs.iter().map(|g| g.poly().clone()).collect();
        for ell in q.primes() {
            if let Some(relation) = kernel_vector_mod_prime(&polys, ell) {
                return Ok(EquidVerdict::fail(Witness::DependentModPrime { prime: ell, relation }));
            }
        }
        return Ok(EquidVerdict::pass());
    }
    if gs.len() == 1 && !opts.force_slow {
        return is_equidistributed_single(&gs[0], q);
    }
    joint_slow_path(gs, q, &opts.limits)
}

/// Whether `q` lies in the set of moduli for which the family is jointly equidistributed.
pub fn membership_q(gs: &[AdditiveFunction], q: &FactoredModulus, opts: &JointOptions) -> Result<bool> {
    is_jointly_equidistributed(gs, q, opts).map(|v| v.equidistributed)
}

/// A named family of additive functions as stored in system files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub functions: Vec<AdditiveFunction>,
}

impl SystemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let sys: SystemFile = serde_json::from_str(text)
            .map_err(|e| Error::precondition(format!("invalid system file: {e}")))?;
        if sys.functions.is_empty() {
            return Err(Error::EmptySystem);
        }
        Ok(sys)
    }

    pub fn polys(&self) -> Vec<IntPoly> {
        self.functions.iter().map(|g| g.poly().clone()).collect()
    }

    pub fn poly_system(&self) -> Result<PolySystem> {
        PolySystem::new(self.polys())
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

/// `α` as an `f64`, for reports.
pub fn alpha_f64(g: &IntPoly, q: &FactoredModulus) -> f64 {
    let a = alpha(g, q);
    a.numer().to_f64().unwrap_or(f64::NAN) / a.denom().to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::factor;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64s(c)
    }

    fn q(n: u64) -> FactoredModulus {
        factor(n).unwrap()
    }

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn alpha_brute(g: &IntPoly, m: u64) -> BigRational {
        let mp = g.to_mod(m);
        let units: Vec<u64> = (1..m).filter(|&v| gcd(v, m) == 1).collect();
        let good = units.iter().filter(|&&v| gcd(mp.eval(v), m) == 1).count();
        BigRational::new((good as i64).into(), (units.len() as i64).into())
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(&p(&[0, 1]), &q(360)), rat(1, 1));
        assert_eq!(alpha(&p(&[-1, 1]), &q(5)), rat(3, 4));
        assert_eq!(alpha(&p(&[-1, 1]), &q(2)), rat(0, 1));
    }

    #[test]
    fn alpha_large_prime_uses_root_count() {
        let ell = 1_000_003;
        // T^2 - 1 has roots ±1
        assert_eq!(alpha(&p(&[-1, 0, 1]), &q(ell)), rat(ell as i64 - 3, ell as i64 - 1));
        // T^2 + 1 has roots iff ℓ ≡ 1 mod 4; 1000003 ≡ 3 mod 4
        assert_eq!(alpha(&p(&[1, 0, 1]), &q(ell)), rat(1, 1));
        let ell = 1_000_033; // ≡ 1 mod 4
        assert_eq!(alpha(&p(&[1, 0, 1]), &q(ell)), rat(ell as i64 - 3, ell as i64 - 1));
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta_prop(&IntPoly::constant(4), 2).unwrap(), rat(0, 1));
        assert_eq!(beta_prop(&p(&[0, 1]), 4).unwrap(), rat(1, 1));
        // G(1) = 0 and G(2) = 3 are both divisible by 3
        assert_eq!(beta_prop(&p(&[-1, 0, 1]), 3).unwrap(), rat(0, 1));
        assert_eq!(beta_prop(&p(&[-1, 0, 1]), 3).unwrap(), alpha_brute(&p(&[-1, 0, 1]), 3));
    }

    #[test]
    fn single_examples() {
        let a = AdditiveFunction::complete(p(&[0, 1])).unwrap();
        assert!(is_equidistributed_single(&a, &q(12)).unwrap().equidistributed);

        let g = AdditiveFunction::strong(p(&[-1, 1])).unwrap();
        assert!(is_equidistributed_single(&g, &q(2)).unwrap().equidistributed);
        assert!(lemma23_membership(&g, &q(2)).unwrap());

        for rule in [PrimePowerRule::Complete, PrimePowerRule::Strong, PrimePowerRule::Poly] {
            let h = AdditiveFunction::new(p(&[0, 2]), rule).unwrap();
            let v = is_equidistributed_single(&h, &q(2)).unwrap();
            assert!(!v.equidistributed);
            assert_eq!(v.witness, Some(Witness::EvenTwoPower { r: 1 }));
        }
    }

    #[test]
    fn table_rule_parity() {
        let tab = |vals: Vec<i64>, par| {
            AdditiveFunction::new(
                p(&[1, 1]),
                PrimePowerRule::Table(TableRule {
                    two_powers: vals,
                    eventual_parity: par,
                    fallback: BaseRule::Strong,
                }),
            )
        };
        assert!(matches!(tab(vec![], None), Err(Error::InvalidRule(_))));
        assert!(matches!(tab(vec![4], None), Err(Error::InvalidRule(_))));
        assert!(matches!(tab(vec![3], Some(Parity::Even)), Err(Error::InvalidRule(_))));
        let undeclared = tab(vec![3, 5], None).unwrap();
        // T + 1 vanishes at 1 mod 2, so the 2-adic branch needs all parities
        assert!(matches!(
            is_equidistributed_single(&undeclared, &q(2)),
            Err(Error::UndeclaredParity)
        ));
        let odd = tab(vec![3, 5], Some(Parity::Odd)).unwrap();
        assert!(is_equidistributed_single(&odd, &q(2)).unwrap().equidistributed);
        let even_later = tab(vec![3, 6], Some(Parity::Odd)).unwrap();
        assert_eq!(
            is_equidistributed_single(&even_later, &q(2)).unwrap().witness,
            Some(Witness::EvenTwoPower { r: 2 })
        );
        assert_eq!(even_later.value(2, 2), BigInt::from(6));
        assert_eq!(even_later.value(2, 3), BigInt::from(3));
        assert_eq!(even_later.value_mod(3, 2, 5), 4);
    }

    #[test]
    fn joint_examples() {
        let opts = JointOptions::default();
        let slow = JointOptions {
            force_slow: true,
            ..Default::default()
        };
        let t_t3 = [
            AdditiveFunction::strong(p(&[0, 1])).unwrap(),
            AdditiveFunction::strong(p(&[0, 0, 0, 1])).unwrap(),
        ];
        assert!(is_jointly_equidistributed(&t_t3, &q(5), &opts).unwrap().equidistributed);
        assert!(is_jointly_equidistributed(&t_t3, &q(5), &slow).unwrap().equidistributed);

        let t_t5 = [
            AdditiveFunction::strong(p(&[0, 1])).unwrap(),
            AdditiveFunction::strong(p(&[5, 1])).unwrap(),
        ];
        let v = is_jointly_equidistributed(&t_t5, &q(5), &opts).unwrap();
        assert!(!v.equidistributed);
        assert!(matches!(v.witness, Some(Witness::DependentModPrime { prime: 5, .. })));
        let v = is_jointly_equidistributed(&t_t5, &q(5), &slow).unwrap();
        assert!(!v.equidistributed);
        assert!(matches!(v.witness, Some(Witness::Combination { .. })));

        let single = [AdditiveFunction::strong(p(&[0, 1])).unwrap()];
        assert_eq!(
            membership_q(&single, &q(7), &opts).unwrap(),
            is_equidistributed_single(&single[0], &q(7)).unwrap().equidistributed
        );
        assert!(membership_q(&single, &q(7), &slow).unwrap());
    }

    #[test]
    fn slow_path_budget() {
        let gs = [
            AdditiveFunction::strong(p(&[0, 1])).unwrap(),
            AdditiveFunction::strong(p(&[0, 0, 1])).unwrap(),
        ];
        let opts = JointOptions {
            force_slow: true,
            limits: Limits::with_work_budget(100),
        };
        assert!(matches!(
            is_jointly_equidistributed(&gs, &q(11), &opts),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn system_file_roundtrip() {
        let text = r#"{"name": "pair", "functions": [
            {"poly": ["0","1"], "rule": {"kind": "complete"}},
            {"poly": [0, 0, 0, 1], "rule": {"kind": "table", "two_powers": [8, 16], "eventual_parity": "even", "fallback": "strong"}}
        ]}"#;
        let sys = SystemFile::from_json(text).unwrap();
        assert_eq!(sys.len(), 2);
        let back = SystemFile::from_json(&serde_json::to_string(&sys).unwrap()).unwrap();
        assert_eq!(back, sys);
        let bad = r#"{"functions": [{"poly": ["5"], "rule": {"kind": "strong"}}]}"#;
        assert!(SystemFile::from_json(bad).is_err());
        let v = serde_json::to_value(EquidVerdict::pass()).unwrap();
        assert_eq!(v, serde_json::json!({"equidistributed": true}));
    }

    fn arb_rule() -> impl Strategy<Value = PrimePowerRule> {
        prop_oneof![
            Just(PrimePowerRule::Complete),
            Just(PrimePowerRule::Strong),
            Just(PrimePowerRule::Poly),
        ]
    }

    fn arb_function(max_deg: usize) -> impl Strategy<Value = AdditiveFunction> {
        (prop::collection::vec(-6i64..6, 2..=max_deg + 1), arb_rule()).prop_filter_map(
            "nonconstant",
            |(c, rule)| AdditiveFunction::new(IntPoly::from_i64s(&c), rule).ok(),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn alpha_is_multiplicative(c in prop::collection::vec(-9i64..9, 1..5), n in 2u64..200) {
            let g = IntPoly::from_i64s(&c);
            let m = q(n);
            prop_assert_eq!(alpha(&g, &m), alpha_brute(&g, n));
        }

        #[test]
        fn prop21_agrees_with_lemma23(g in arb_function(3), n in 2u64..120) {
            let m = q(n);
            prop_assert_eq!(
                is_equidistributed_single(&g, &m).unwrap().equidistributed,
                lemma23_membership(&g, &m).unwrap()
            );
        }

        #[test]
        fn unit_scaling_preserves_verdict(
            gs in prop::collection::vec(arb_function(3), 2..=2),
            n in 2u64..40,
            k0 in 0u64..40, k1 in 0u64..40, u_seed in 0u64..40,
        ) {
            let m = q(n);
            let k = [k0 % n, k1 % n];
            prop_assume!(gcd(gcd(k[0], k[1]), n) == 1);
            let units: Vec<u64> = m.units().collect();
            let u = units[(u_seed as usize) % units.len()];
            let scaled = [mul_mod(u, k[0], n), mul_mod(u, k[1], n)];
            prop_assert_eq!(
                combination_verdict(&gs, &k, &m).unwrap().equidistributed,
                combination_verdict(&gs, &scaled, &m).unwrap().equidistributed
            );
        }

        #[test]
        fn fast_equals_slow(gs in prop::collection::vec(arb_function(2), 1..=2), n in 2u64..31) {
            let m = q(n);
            let degree = gs.iter().filter_map(|g| g.poly().degree()).max().unwrap() as u64;
            prop_assume!(m.least_prime() > degree + 1);
            let fast = is_jointly_equidistributed(&gs, &m, &JointOptions::default()).unwrap();
            let slow = is_jointly_equidistributed(
                &gs,
                &m,
                &JointOptions { force_slow: true, ..Default::default() },
            ).unwrap();
            prop_assert_eq!(fast.equidistributed, slow.equidistributed);
        }
    }
}
