//! Segmented smallest-prime-factor table.

use rayon::prelude::*;

use crate::error::{Error, Limits, Result};

const DEFAULT_SEGMENT: usize = 1 << 16;

/// `spf[n]` for `0 ≤ n ≤ x`; entries 0 and 1 are 0.
#[derive(Clone, Debug)]
pub struct SieveRange {
    x: u64,
    spf: Vec<u32>,
    segment_size: usize,
}

/// Up to this many distinct primes divide any `n < 2^32`.
pub const MAX_DISTINCT: usize = 10;

/// Prime factorization `(p, k)` in increasing `p`, stored inline.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Factorization {
    len: u8,
    primes: [u32; MAX_DISTINCT],
    exps: [u8; MAX_DISTINCT],
}

impl Factorization {
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (u64, u32)> + '_ {
        (0..self.len as usize).map(|i| (self.primes[i] as u64, self.exps[i] as u32))
    }

    /// `Ω(n)`.
    pub fn big_omega(&self) -> u32 {
        self.exps[..self.len as usize].iter().map(|&e| e as u32).sum()
    }

    /// `k`-th largest prime factor with multiplicity, 1 when `Ω(n) < k`.
    pub fn pk_largest(&self, k: u32) -> u64 {
        if k == 0 {
            return 1;
        }
        let mut remaining = k;
        for (p, e) in self.iter().rev() {
            if e >= remaining {
                return p;
            }
            remaining -= e;
        }
        1
    }

    /// Multiplicity-weighted count of primes `p > q` with `p^k ‖ n`, `k > 1`.
    pub fn omega_star_gt(&self, q: u64) -> u32 {
        self.iter().filter(|&(p, k)| p > q && k > 1).map(|(_, k)| k).sum()
    }
}

fn small_primes(limit: usize) -> Vec<u32> {
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u32);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

impl SieveRange {
    pub fn new(x: u64) -> Result<Self> {
        Self::with_limits(x, &Limits::default())
    }

    pub fn with_limits(x: u64, limits: &Limits) -> Result<Self> {
        if x > limits.sieve_max_x {
            return Err(Error::BudgetExceeded {
                what: "sieve bound",
                required: x as u128,
                limit: limits.sieve_max_x as u128,
            });
        }
        if x > u32::MAX as u64 {
            return Err(Error::precondition("sieve bound must fit in 32 bits"));
        }
        let segment_size = DEFAULT_SEGMENT;
        let len = x as usize + 1;
        let mut spf = vec![0u32; len];
        if x < 2 {
            return Ok(SieveRange { x, spf, segment_size });
        }
        let root = (x as f64).sqrt() as usize + 1;
        let base = small_primes(root);
        spf.par_chunks_mut(segment_size).enumerate().for_each(|(s, seg)| {
            let lo = s * segment_size;
            let hi = lo + seg.len();
            for &p in &base {
                let p = p as usize;
                if p * p >= hi {
                    break;
                }
                let start = (p * p).max(lo.div_ceil(p) * p);
                let mut m = start;
                while m < hi {
                    if seg[m - lo] == 0 {
                        seg[m - lo] = p as u32;
                    }
                    m += p;
                }
            }
            for (i, v) in seg.iter_mut().enumerate() {
                let n = lo + i;
                if *v == 0 && n >= 2 {
                    *v = n as u32;
                }
            }
        });
        Ok(SieveRange { x, spf, segment_size })
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn segment_size(&self) -> usize {
        self.segment_size
    }

    /// Smallest prime factor of `n`, `None` for `n < 2`.
    pub fn spf(&self, n: u64) -> Option<u64> {
        match self.spf.get(n as usize) {
            Some(&p) if p != 0 => Some(p as u64),
            _ => None,
        }
    }

    pub fn spf_table(&self) -> &[u32] {
        &self.spf
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf(n) == Some(n)
    }

    /// Factorization of `1 ≤ n ≤ x`.
    pub fn factorize(&self, n: u64) -> Factorization {
        assert!(n <= self.x, "{n} exceeds sieve bound {}", self.x);
        let mut f = Factorization::default();
        let mut m = n as u32;
        while m > 1 {
            let p = self.spf[m as usize];
            let mut k = 0u8;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            f.primes[f.len as usize] = p;
            f.exps[f.len as usize] = k;
            f.len += 1;
        }
        f
    }

    /// Primes `p ≤ x` with `p ≡ a (mod q)`.
    pub fn prime_count_in_class(&self, q: u64, a: u64) -> u64 {
        let a = a % q;
        (2..=self.x)
            .into_par_iter()
            .filter(|&n| n % q == a && self.spf[n as usize] as u64 == n)
            .count() as u64
    }
}
