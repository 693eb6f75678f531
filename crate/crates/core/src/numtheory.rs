//! Exact integer, modular and polynomial arithmetic.
//!
//! Polynomial coefficients are arbitrary precision; residues are `u64` with
//! `u128` intermediates. Every other module routes modular work through
//! [`FactoredModulus`] and [`ModPoly`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Valuation that is `Infinite` for zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(u32),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

/// Serializes as an integer, or the string `"inf"`.
impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => serializer.serialize_u32(*v),
            Valuation::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// `v_ell(n)`, infinite for `n = 0`.
pub fn valuation(n: &BigInt, ell: u64) -> Valuation {
    if n.is_zero() {
        return Valuation::Infinite;
    }
    let ell = BigInt::from(ell);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (quot, rem) = n.div_rem(&ell);
        if !rem.is_zero() {
            return Valuation::Finite(v);
        }
        n = quot;
        v += 1;
    }
}

/// `v_ell(n)` for a nonzero machine integer.
pub fn valuation_u64(mut n: u64, ell: u64) -> u32 {
    debug_assert!(n != 0 && ell > 1);
    let mut v = 0;
    while n % ell == 0 {
        n /= ell;
        v += 1;
    }
    v
}

// ---------------------------------------------------------------------------
// Integer polynomials
// ---------------------------------------------------------------------------

/// Dense integer polynomial, coefficient `r` multiplies `T^r`.
///
/// Trailing zero coefficients are stripped on construction, so equality is
/// structural and the zero polynomial has no coefficients at all.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        IntPoly::new(vec![c.into()])
    }

    /// The polynomial `T`.
    pub fn t() -> Self {
        IntPoly::from_i64s(&[0, 1])
    }

    pub fn monomial(c: impl Into<BigInt>, k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = c.into();
        IntPoly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, r: usize) -> BigInt {
        self.coeffs.get(r).cloned().unwrap_or_default()
    }

    /// `None` stands for the degree of the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(One::is_one)
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(r, c)| c * BigInt::from(r))
                .collect(),
        )
    }

    pub fn eval(&self, v: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * v + c)
    }

    pub fn eval_i64(&self, v: i64) -> BigInt {
        self.eval(&BigInt::from(v))
    }

    /// `p(v) mod m` in `[0, m)`.
    pub fn eval_mod(&self, v: u64, m: u64) -> u64 {
        self.to_mod(m).eval(v)
    }

    pub fn to_mod(&self, m: u64) -> ModPoly {
        ModPoly::new(self, m)
    }

    /// Highest power of `ell` dividing every coefficient.
    pub fn ord_ell(&self, ell: u64) -> Valuation {
        self.coeffs
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| valuation(c, ell))
            .min()
            .unwrap_or(Valuation::Infinite)
    }

    /// True when every nonconstant coefficient vanishes mod `m`.
    pub fn is_constant_mod(&self, m: u64) -> bool {
        let m = BigInt::from(m);
        self.coeffs.iter().skip(1).all(|c| c.mod_floor(&m).is_zero())
    }

    pub fn is_zero_mod(&self, m: u64) -> bool {
        let m = BigInt::from(m);
        self.coeffs.iter().all(|c| c.mod_floor(&m).is_zero())
    }

    pub fn scale(&self, k: &BigInt) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Divides every coefficient by `d`; `d` must divide all of them.
    pub fn exact_div(&self, d: &BigInt) -> IntPoly {
        IntPoly::new(
            self.coeffs
                .iter()
                .map(|c| {
                    debug_assert!((c % d).is_zero());
                    c / d
                })
                .collect(),
        )
    }

    pub fn pow(&self, e: u32) -> IntPoly {
        let mut acc = IntPoly::constant(1);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// `Σ k_i p_i`.
    pub fn linear_combination<K: Into<BigInt> + Clone>(polys: &[IntPoly], ks: &[K]) -> IntPoly {
        assert_eq!(polys.len(), ks.len());
        polys
            .iter()
            .zip(ks)
            .fold(IntPoly::zero(), |acc, (p, k)| &acc + &p.scale(&k.clone().into()))
    }

    /// Integer roots, found among the divisors of the lowest nonzero coefficient.
    pub fn integer_roots(&self) -> Vec<BigInt> {
        let Some(low) = self.coeffs.iter().position(|c| !c.is_zero()) else {
            return Vec::new();
        };
        let mut roots = Vec::new();
        if low > 0 {
            roots.push(BigInt::zero());
        }
        let c = self.coeffs[low].abs();
        let Some(c) = c.to_u64() else {
            return roots;
        };
        let mut d = 1u64;
        while d.saturating_mul(d) <= c {
            if c % d == 0 {
                for cand in [d, c / d] {
                    for s in [BigInt::from(cand), -BigInt::from(cand)] {
                        if !roots.contains(&s) && self.eval(&s).is_zero() {
                            roots.push(s);
                        }
                    }
                }
            }
            d += 1;
        }
        roots.sort();
        roots
    }
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntPoly({self})")
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (r, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let show_coeff = r == 0 || !mag.is_one();
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match r {
                0 => {}
                1 => f.write_str("T")?,
                _ => write!(f, "T^{r}")?,
            }
        }
        Ok(())
    }
}

impl Add for &IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::new((0..n).map(|r| self.coeff(r) + rhs.coeff(r)).collect())
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::new((0..n).map(|r| self.coeff(r) - rhs.coeff(r)).collect())
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }
}

impl Neg for &IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

/// Serializes a `BigInt` as a decimal string.
pub mod bigint_string {
    use num_bigint::BigInt;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }
}

impl Serialize for IntPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(&c.to_string())?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for IntPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Coeff {
            Text(String),
            Int(i64),
        }

        struct PolyVisitor;
        impl<'de> Visitor<'de> for PolyVisitor {
            type Value = IntPoly;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an array of decimal coefficient strings, lowest degree first")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<IntPoly, A::Error> {
                let mut coeffs = Vec::new();
                while let Some(c) = seq.next_element::<Coeff>()? {
                    coeffs.push(match c {
                        Coeff::Int(v) => BigInt::from(v),
                        Coeff::Text(s) => s.trim().parse::<BigInt>().map_err(|_| {
                            de::Error::custom(format!("invalid integer coefficient {s:?}"))
                        })?,
                    });
                }
                Ok(IntPoly::new(coeffs))
            }
        }
        deserializer.deserialize_seq(PolyVisitor)
    }
}

/// A polynomial with coefficients reduced modulo a fixed `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModPoly {
    coeffs: Vec<u64>,
    m: u64,
}

impl ModPoly {
    pub fn new(p: &IntPoly, m: u64) -> Self {
        assert!(m >= 1, "modulus must be positive");
        let big_m = BigInt::from(m);
        let mut coeffs: Vec<u64> = p
            .coeffs()
            .iter()
            .map(|c| c.mod_floor(&big_m).to_u64().expect("reduced residue fits u64"))
            .collect();
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        ModPoly { coeffs, m }
    }

    pub fn from_residues(mut coeffs: Vec<u64>, m: u64) -> Self {
        for c in coeffs.iter_mut() {
            *c %= m;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        ModPoly { coeffs, m }
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, v: u64) -> u64 {
        let m = self.m;
        let v = v % m;
        self.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| add_mod(mul_mod(acc, v, m), c, m))
    }

    /// Divides by `T - a` (synthetic division), returning quotient and remainder.
    pub fn div_linear(&self, a: u64) -> (ModPoly, u64) {
        let m = self.m;
        if self.coeffs.is_empty() {
            return (self.clone(), 0);
        }
        let n = self.coeffs.len();
        let mut quot = vec![0u64; n - 1];
        let mut carry = 0u64;
        for i in (0..n).rev() {
            let cur = add_mod(self.coeffs[i], mul_mod(carry, a, m), m);
            if i == 0 {
                return (ModPoly::from_residues(quot, m), cur);
            }
            quot[i - 1] = cur;
            carry = cur;
        }
        unreachable!()
    }
}

// ---------------------------------------------------------------------------
// Machine-word modular arithmetic
// ---------------------------------------------------------------------------

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (g, x, _) = ext_gcd(a as i128 % m as i128, m as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(m as i128) as u64)
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Euler's totient of a machine integer (by trial division).
pub fn phi(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut n = n;
    let mut result = n;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Pollard-Brent rho; returns a nontrivial factor of an odd composite `n`.
fn pollard_rho(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| add_mod(mul_mod(x, x, n), c, n);
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn factor_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    factor_into(d, out);
    factor_into(n / d, out);
}

const TRIAL_LIMIT: u64 = 1 << 12;

// ---------------------------------------------------------------------------
// Factored moduli
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimePower {
    pub prime: u64,
    pub exp: u32,
}

impl PrimePower {
    pub fn value(&self) -> u64 {
        self.prime.pow(self.exp)
    }

    pub fn phi(&self) -> u64 {
        self.prime.pow(self.exp - 1) * (self.prime - 1)
    }
}

pub const DEFAULT_FACTOR_BOUND: u64 = 1 << 63;

/// A modulus `q > 1` together with its prime factorization.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactoredModulus {
    q: u64,
    factors: Vec<PrimePower>,
}

/// Factors `q` with the default bound.
pub fn factor(q: u64) -> Result<FactoredModulus> {
    factor_with_bound(q, DEFAULT_FACTOR_BOUND)
}

/// Trial division by small primes, then Miller-Rabin / Pollard rho on the cofactor.
pub fn factor_with_bound(q: u64, bound: u64) -> Result<FactoredModulus> {
    if q <= 1 {
        return Err(Error::ModulusTooSmall(q));
    }
    if q >= bound {
        return Err(Error::ModulusTooLarge { q, bound });
    }
    let mut primes = Vec::new();
    let mut n = q;
    let mut p = 2u64;
    while p < TRIAL_LIMIT && p * p <= n {
        while n % p == 0 {
            primes.push(p);
            n /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    factor_into(n, &mut primes);
    primes.sort_unstable();
    let mut factors: Vec<PrimePower> = Vec::new();
    for p in primes {
        match factors.last_mut() {
            Some(pp) if pp.prime == p => pp.exp += 1,
            _ => factors.push(PrimePower { prime: p, exp: 1 }),
        }
    }
    Ok(FactoredModulus { q, factors })
}

impl FactoredModulus {
    /// Builds a modulus from `(prime, exponent)` pairs, validating them.
    pub fn from_factors(pairs: &[(u64, u32)]) -> Result<Self> {
        let mut factors: Vec<PrimePower> = Vec::with_capacity(pairs.len());
        let mut q: u64 = 1;
        for &(prime, exp) in pairs {
            if !is_prime(prime) {
                return Err(Error::NotPrime(prime));
            }
            if exp == 0 {
                return Err(Error::precondition("prime exponent must be at least 1"));
            }
            if factors.last().is_some_and(|last| last.prime >= prime) {
                return Err(Error::precondition("primes must be strictly increasing"));
            }
            let pp = prime
                .checked_pow(exp)
                .ok_or(Error::ModulusOverflow)?;
            q = q.checked_mul(pp).ok_or(Error::ModulusOverflow)?;
            factors.push(PrimePower { prime, exp });
        }
        if q <= 1 {
            return Err(Error::ModulusTooSmall(q));
        }
        Ok(FactoredModulus { q, factors })
    }

    pub fn prime_power(prime: u64, exp: u32) -> Result<Self> {
        FactoredModulus::from_factors(&[(prime, exp)])
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn factors(&self) -> &[PrimePower] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|pp| pp.prime)
    }

    pub fn phi(&self) -> u64 {
        self.factors.iter().map(PrimePower::phi).product()
    }

    /// Smallest prime divisor `P^-(q)`.
    pub fn least_prime(&self) -> u64 {
        self.factors[0].prime
    }

    /// Number of distinct prime divisors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    /// Number of prime divisors counted with multiplicity.
    pub fn big_omega(&self) -> u32 {
        self.factors.iter().map(|pp| pp.exp).sum()
    }

    pub fn valuation(&self, ell: u64) -> u32 {
        self.factors
            .iter()
            .find(|pp| pp.prime == ell)
            .map_or(0, |pp| pp.exp)
    }

    pub fn is_prime_power(&self) -> bool {
        self.factors.len() == 1
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|pp| pp.exp == 1)
    }

    /// Largest odd divisor, `None` when it equals 1.
    pub fn odd_part(&self) -> Option<FactoredModulus> {
        self.filtered(|pp| pp.prime != 2)
    }

    /// The divisor made of the prime powers accepted by `keep`.
    pub fn filtered(&self, keep: impl Fn(&PrimePower) -> bool) -> Option<FactoredModulus> {
        let factors: Vec<PrimePower> = self.factors.iter().copied().filter(|pp| keep(pp)).collect();
        if factors.is_empty() {
            return None;
        }
        let q = factors.iter().map(PrimePower::value).product();
        Some(FactoredModulus { q, factors })
    }

    /// `q / d` for a divisor `d`; `None` when the quotient is 1.
    pub fn divide(&self, d: u64) -> Option<FactoredModulus> {
        assert!(d >= 1 && self.q % d == 0, "{d} does not divide {}", self.q);
        let factors: Vec<PrimePower> = self
            .factors
            .iter()
            .filter_map(|pp| {
                let v = if d % pp.prime == 0 { valuation_u64(d, pp.prime) } else { 0 };
                (pp.exp > v).then_some(PrimePower {
                    prime: pp.prime,
                    exp: pp.exp - v,
                })
            })
            .collect();
        if factors.is_empty() {
            return None;
        }
        Some(FactoredModulus { q: self.q / d, factors })
    }

    /// Each `ℓ^e ‖ q` as its own modulus.
    pub fn prime_power_parts(&self) -> Vec<FactoredModulus> {
        self.factors
            .iter()
            .map(|&pp| FactoredModulus {
                q: pp.value(),
                factors: vec![pp],
            })
            .collect()
    }

    pub fn is_unit(&self, v: u64) -> bool {
        self.factors.iter().all(|pp| v % pp.prime != 0)
    }

    /// Units `v ∈ [1, q)` in increasing order.
    pub fn units(&self) -> impl Iterator<Item = u64> + '_ {
        (1..self.q).filter(move |&v| self.is_unit(v))
    }

    /// Positive divisors in increasing order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for pp in &self.factors {
            let mut next = Vec::with_capacity(divs.len() * (pp.exp as usize + 1));
            for &d in &divs {
                let mut x = d;
                for _ in 0..=pp.exp {
                    next.push(x);
                    x *= pp.prime;
                }
            }
            divs = next;
        }
        divs.sort_unstable();
        divs
    }
}

impl fmt::Display for FactoredModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q)
    }
}

/// Combines congruences `x ≡ r_i (mod m_i)` with pairwise coprime moduli.
pub fn crt_combine(residues: &[(u64, u64)]) -> Result<(u64, u64)> {
    let mut acc_r: u64 = 0;
    let mut acc_m: u64 = 1;
    for &(r, m) in residues {
        if m == 0 {
            return Err(Error::precondition("CRT modulus must be positive"));
        }
        if gcd(acc_m, m) != 1 {
            let clash = residues
                .iter()
                .map(|&(_, mi)| mi)
                .find(|&mi| gcd(mi, m) != 1)
                .unwrap_or(acc_m);
            return Err(Error::NonCoprimeModuli { a: clash, b: m });
        }
        let new_m = acc_m.checked_mul(m).ok_or(Error::ModulusOverflow)?;
        // acc_r + acc_m * t ≡ r (mod m)
        let r = r % m;
        let inv = inv_mod(acc_m % m, m).unwrap_or(0);
        let diff = (r as i128 - (acc_r % m) as i128).rem_euclid(m as i128) as u64;
        let t = mul_mod(diff, inv, m);
        acc_r = ((acc_r as u128 + acc_m as u128 * t as u128) % new_m as u128) as u64;
        acc_m = new_m;
    }
    Ok((acc_r, acc_m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64s(c)
    }

    #[test]
    fn eval_mod_examples() {
        assert_eq!(p(&[1, 0, 1]).eval_mod(3, 5), 0);
        assert_eq!(IntPoly::zero().eval_mod(7, 9), 0);
        assert_eq!(p(&[0, 0, 0, 1]).eval_mod(2, 7), 1);
        assert_eq!(p(&[-1, 0, 0, 1]).eval_mod(0, 7), 6);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(p(&[0, 0, 0, 1]).derivative(), p(&[0, 0, 3]));
        assert_eq!(IntPoly::constant(5).derivative(), IntPoly::zero());
        assert_eq!(p(&[0, 1, 1]).derivative(), p(&[1, 2]));
    }

    #[test]
    fn ord_ell_examples() {
        assert_eq!(p(&[12, 0, 6]).ord_ell(3), Valuation::Finite(1));
        assert_eq!(IntPoly::t().ord_ell(5), Valuation::Finite(0));
        assert_eq!(IntPoly::zero().ord_ell(2), Valuation::Infinite);
    }

    #[test]
    fn canonical_form_strips_zeros() {
        let a = IntPoly::from_i64s(&[1, 2, 0, 0]);
        assert_eq!(a.coeffs().len(), 2);
        assert_eq!(a, p(&[1, 2]));
        assert_eq!(IntPoly::from_i64s(&[0, 0]).degree(), None);
    }

    #[test]
    fn json_is_decimal_strings() {
        let cube_minus_one = p(&[-1, 0, 0, 1]);
        let s = serde_json::to_string(&cube_minus_one).unwrap();
        assert_eq!(s, r#"["-1","0","0","1"]"#);
        let back: IntPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cube_minus_one);
        let ints: IntPoly = serde_json::from_str("[0, 1]").unwrap();
        assert_eq!(ints, IntPoly::t());
        assert!(serde_json::from_str::<IntPoly>(r#"["x"]"#).is_err());
    }

    #[test]
    fn display() {
        assert_eq!(p(&[-1, 0, 0, 1]).to_string(), "T^3 - 1");
        assert_eq!(p(&[1, -2, 3]).to_string(), "3T^2 - 2T + 1");
        assert_eq!(IntPoly::zero().to_string(), "0");
    }

    #[test]
    fn factor_examples() {
        let f = factor(12).unwrap();
        assert_eq!(
            f.factors(),
            &[PrimePower { prime: 2, exp: 2 }, PrimePower { prime: 3, exp: 1 }]
        );
        assert_eq!(factor(41).unwrap().factors(), &[PrimePower { prime: 41, exp: 1 }]);
        assert!(matches!(factor(1), Err(Error::ModulusTooSmall(1))));
        assert!(matches!(factor(0), Err(Error::ModulusTooSmall(0))));
        assert!(matches!(factor(u64::MAX), Err(Error::ModulusTooLarge { .. })));
    }

    #[test]
    fn factor_large_semiprime() {
        let (a, b) = (1_000_000_007u64, 998_244_353u64);
        let f = factor(a * b).unwrap();
        assert_eq!(f.factors().len(), 2);
        assert_eq!(f.factors()[0].prime, b);
        assert_eq!(f.factors()[1].prime, a);
    }

    #[test]
    fn crt_examples() {
        assert_eq!(crt_combine(&[(1, 2), (2, 3)]).unwrap(), (5, 6));
        assert_eq!(crt_combine(&[(0, 5)]).unwrap(), (0, 5));
        assert!(matches!(
            crt_combine(&[(2, 4), (1, 6)]),
            Err(Error::NonCoprimeModuli { .. })
        ));
    }

    #[test]
    fn modulus_helpers() {
        let q = factor(360).unwrap();
        assert_eq!(q.phi(), 96);
        assert_eq!(q.least_prime(), 2);
        assert_eq!(q.omega(), 3);
        assert_eq!(q.big_omega(), 6);
        assert_eq!(q.odd_part().unwrap().q(), 45);
        assert_eq!(q.divide(8).unwrap().q(), 45);
        assert_eq!(q.divisors().len(), 24);
        assert_eq!(q.units().count() as u64, q.phi());
        assert!(factor(8).unwrap().odd_part().is_none());
    }

    #[test]
    fn integer_roots() {
        assert_eq!(p(&[-1, 1]).integer_roots(), vec![BigInt::from(1)]);
        assert_eq!(
            p(&[-6, 1, 1]).integer_roots(),
            vec![BigInt::from(-3), BigInt::from(2)]
        );
        assert_eq!(p(&[1, 0, 1]).integer_roots(), Vec::<BigInt>::new());
    }

    #[test]
    fn synthetic_division() {
        // T^2 - 1 = (T - 1)(T + 1) mod 5
        let f = ModPoly::new(&p(&[-1, 0, 1]), 5);
        let (quot, rem) = f.div_linear(1);
        assert_eq!(rem, 0);
        assert_eq!(quot.coeffs(), &[1, 1]);
        let (_, rem) = f.div_linear(2);
        assert_eq!(rem, 3);
    }

    proptest! {
        #[test]
        fn eval_mod_agrees_with_reduced_poly(
            coeffs in prop::collection::vec(-1000i64..1000, 0..6),
            v in 0u64..10_000,
            m in 1u64..500,
        ) {
            let poly = IntPoly::from_i64s(&coeffs);
            let reduced: Vec<i64> = coeffs.iter().map(|c| c.rem_euclid(m as i64)).collect();
            let exact = poly.eval(&BigInt::from(v)).mod_floor(&BigInt::from(m));
            prop_assert_eq!(BigInt::from(poly.eval_mod(v, m)), exact);
            prop_assert_eq!(poly.eval_mod(v, m), IntPoly::from_i64s(&reduced).eval_mod(v, m));
        }

        #[test]
        fn factor_reconstructs(q in 2u64..(1u64 << 40)) {
            let f = factor(q).unwrap();
            let prod: u64 = f.factors().iter().map(PrimePower::value).product();
            prop_assert_eq!(prod, q);
            prop_assert!(f.factors().windows(2).all(|w| w[0].prime < w[1].prime));
            prop_assert!(f.factors().iter().all(|pp| is_prime(pp.prime)));
            let pairs: Vec<(u64, u32)> = f.factors().iter().map(|pp| (pp.prime, pp.exp)).collect();
            prop_assert_eq!(FactoredModulus::from_factors(&pairs).unwrap(), f);
        }

        #[test]
        fn crt_roundtrip(x in 0u64..1_000_000) {
            let moduli = [7u64, 9, 16, 25];
            let residues: Vec<(u64, u64)> = moduli.iter().map(|&m| (x % m, m)).collect();
            let (r, m) = crt_combine(&residues).unwrap();
            prop_assert_eq!(m, 7 * 9 * 16 * 25);
            prop_assert_eq!(r, x % m);
        }

        #[test]
        fn derivative_coefficients_divisible(coeffs in prop::collection::vec(-50i64..50, 1..7)) {
            let d = IntPoly::from_i64s(&coeffs).derivative();
            for (r, c) in d.coeffs().iter().enumerate() {
                prop_assert!((c % BigInt::from(r + 1)).is_zero());
            }
        }
    }

    #[test]
    fn primality_matches_trial_division() {
        for n in 0u64..5000 {
            let trial = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime(n), trial, "n = {n}");
        }
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751));
    }
}
