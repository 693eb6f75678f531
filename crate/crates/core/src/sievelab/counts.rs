//! Joint residue counts of `(g_1(n)..g_M(n)) mod q` over `n ≤ x`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sieve::{Factorization, SieveRange};
use crate::delange::{AdditiveFunction, PrimePowerRule};
use crate::error::{Error, Limits, Result};
use crate::numtheory::{mul_mod, pow_mod};

/// Filter applied to `n` before counting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Restriction {
    None,
    /// `P_k(n) > q`.
    PkGtQ { k: u32 },
    /// The `J` largest prime factors exceed `y` and divide `n` exactly.
    Convenient { j: u32, y: f64 },
}

impl Restriction {
    /// `J = ⌊log log log x⌋` and `y = exp(√(log x))`.
    pub fn convenient_for(x: u64) -> Restriction {
        let lx = (x.max(3) as f64).ln();
        let j = lx.ln().ln().floor().max(0.0) as u32;
        Restriction::Convenient { j, y: lx.sqrt().exp() }
    }

    pub fn admits(&self, f: &Factorization, q: u64) -> bool {
        match *self {
            Restriction::None => true,
            Restriction::PkGtQ { k } => f.pk_largest(k) > q,
            Restriction::Convenient { j, y } => {
                let mut top = f.iter().rev();
                for _ in 0..j {
                    match top.next() {
                        Some((p, 1)) if p as f64 > y => {}
                        _ => return false,
                    }
                }
                true
            }
        }
    }
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Restriction::None => f.write_str("none"),
            Restriction::PkGtQ { k } => write!(f, "pk:{k}"),
            Restriction::Convenient { j, y } => write!(f, "convenient:J={j}:y={y:.6}"),
        }
    }
}

/// Parses `none`, `pk:K` or `convenient`; the last needs `x`, so it is resolved later.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestrictionSpec {
    None,
    Pk(u32),
    Convenient,
}

impl RestrictionSpec {
    pub fn resolve(self, x: u64) -> Restriction {
        match self {
            RestrictionSpec::None => Restriction::None,
            RestrictionSpec::Pk(k) => Restriction::PkGtQ { k },
            RestrictionSpec::Convenient => Restriction::convenient_for(x),
        }
    }
}

impl FromStr for RestrictionSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "none" => Ok(RestrictionSpec::None),
            "convenient" => Ok(RestrictionSpec::Convenient),
            _ => match s.strip_prefix("pk:").map(str::parse::<u32>) {
                Some(Ok(k)) if k >= 1 => Ok(RestrictionSpec::Pk(k)),
                _ => Err(Error::precondition(format!(
                    "restriction {s:?} is not one of none, pk:K (K ≥ 1), convenient"
                ))),
            },
        }
    }
}

/// `g(n)` exactly.
pub fn eval_additive(g: &AdditiveFunction, n: u64, sieve: &SieveRange) -> BigInt {
    sieve
        .factorize(n)
        .iter()
        .fold(BigInt::zero(), |acc, (p, k)| acc + g.value(p, k))
}

/// `g(n) mod q`.
pub fn eval_additive_mod(g: &AdditiveFunction, n: u64, q: u64, sieve: &SieveRange) -> u64 {
    sieve
        .factorize(n)
        .iter()
        .fold(0, |acc, (p, k)| (acc + g.value_mod(p, k, q)) % q)
}

/// `P_k(n)`.
pub fn pk_largest(n: u64, k: u32, sieve: &SieveRange) -> u64 {
    sieve.factorize(n).pk_largest(k)
}

/// `Ω*_{>q}(n)`.
pub fn omega_star_gt_q(n: u64, q: u64, sieve: &SieveRange) -> u32 {
    sieve.factorize(n).omega_star_gt(q)
}

/// Cached residues `G_i(v) mod q` for `v < q`, specialised per rule.
struct ResidueEvaluator<'a> {
    q: u64,
    gs: &'a [AdditiveFunction],
    at: Vec<Vec<u32>>,
}

impl<'a> ResidueEvaluator<'a> {
    fn new(gs: &'a [AdditiveFunction], q: u64) -> Self {
        let at = gs
            .iter()
            .map(|g| {
                let mp = g.poly().to_mod(q);
                (0..q).map(|v| mp.eval(v) as u32).collect()
            })
            .collect();
        ResidueEvaluator { q, gs, at }
    }

    #[inline]
    fn value(&self, i: usize, p: u64, k: u32) -> u64 {
        let q = self.q;
        let gp = self.at[i][(p % q) as usize] as u64;
        if k == 1 {
            return gp;
        }
        match self.gs[i].rule() {
            PrimePowerRule::Strong => gp,
            PrimePowerRule::Complete => mul_mod(gp, k as u64, q),
            PrimePowerRule::Poly => self.at[i][pow_mod(p % q, k as u64, q) as usize] as u64,
            PrimePowerRule::Table(_) => self.gs[i].value_mod(p, k, q),
        }
    }

    #[inline]
    fn cell(&self, f: &Factorization) -> usize {
        let q = self.q;
        let mut idx = 0usize;
        for i in 0..self.gs.len() {
            let mut acc = 0u64;
            for (p, k) in f.iter() {
                acc += self.value(i, p, k);
            }
            idx = idx * q as usize + (acc % q) as usize;
        }
        idx
    }
}

/// Counts per class `(b_1..b_M) mod q`, `b_1` most significant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointCountTable {
    pub q: u64,
    pub dims: usize,
    pub x: u64,
    pub restriction: Restriction,
    pub counts: Vec<u64>,
    pub total_restricted: u64,
}

impl JointCountTable {
    pub fn index(&self, b: &[u64]) -> usize {
        b.iter()
            .fold(0usize, |acc, &x| acc * self.q as usize + (x % self.q) as usize)
    }

    pub fn class(&self, idx: usize) -> Vec<u64> {
        let q = self.q as usize;
        let mut b = vec![0u64; self.dims];
        let mut rest = idx;
        for slot in b.iter_mut().rev() {
            *slot = (rest % q) as u64;
            rest /= q;
        }
        b
    }

    pub fn get(&self, b: &[u64]) -> u64 {
        self.counts[self.index(b)]
    }

    /// `total / q^M`.
    pub fn expected_per_class(&self) -> f64 {
        self.total_restricted as f64 / (self.q as f64).powi(self.dims as i32)
    }
}

/// Single pass over `1 ≤ n ≤ x` counting the classes of admitted `n`.
pub fn joint_counts(
    gs: &[AdditiveFunction],
    q: u64,
    x: u64,
    restriction: Restriction,
    sieve: &SieveRange,
    limits: &Limits,
) -> Result<JointCountTable> {
    if gs.is_empty() {
        return Err(Error::EmptySystem);
    }
    if q < 2 {
        return Err(Error::ModulusTooSmall(q));
    }
    if q > u32::MAX as u64 {
        return Err(Error::precondition("modulus must fit in 32 bits for sieve counting"));
    }
    if x > sieve.x() {
        return Err(Error::precondition(format!(
            "x = {x} exceeds the sieve bound {}",
            sieve.x()
        )));
    }
    let cells = (q as u128).saturating_pow(gs.len() as u32);
    Limits::check("count table cells", cells, limits.table_cells as u128)?;
    let cells = cells as usize;
    let eval = ResidueEvaluator::new(gs, q);
    let chunk = sieve.segment_size() as u64;
    let chunks = x / chunk + 1;
    let counts = (0..chunks)
        .into_par_iter()
        .fold(
            || vec![0u64; cells],
            |mut local, c| {
                let lo = (c * chunk).max(1);
                let hi = ((c + 1) * chunk).min(x + 1);
                for n in lo..hi {
                    let f = sieve.factorize(n);
                    if restriction.admits(&f, q) {
                        local[eval.cell(&f)] += 1;
                    }
                }
                local
            },
        )
        .reduce(
            || vec![0u64; cells],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let total_restricted = counts.iter().sum();
    Ok(JointCountTable {
        q,
        dims: gs.len(),
        x,
        restriction,
        counts,
        total_restricted,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub q: u64,
    pub x: u64,
    pub restriction: Restriction,
    pub total: u64,
    /// `max_b |count(b)·q^M / total - 1|`.
    pub max_rel_dev: f64,
    pub argmax: Vec<u64>,
}

pub fn discrepancy(table: &JointCountTable) -> Result<DiscrepancyReport> {
    if table.total_restricted == 0 {
        return Err(Error::EmptyTable);
    }
    let expected = table.expected_per_class();
    let (idx, dev) = table
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (i, (c as f64 / expected - 1.0).abs()))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(DiscrepancyReport {
        q: table.q,
        x: table.x,
        restriction: table.restriction,
        total: table.total_restricted,
        max_rel_dev: dev,
        argmax: table.class(idx),
    })
}
