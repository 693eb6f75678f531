//! Exact counts of `V_{N,M}(q; w)`: tuples `(v_1..v_N)` of units mod `q` with
//! `Σ_j G_i(v_j) ≡ w_i (mod q)` for every `i`.
//!
//! Counts come from `N`-fold convolution of the one-slot distribution over
//! `(Z/q)^M`, done per prime power and recombined through CRT.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Limits, Result};
use crate::numtheory::{FactoredModulus, PrimePower};
use crate::polysystem::PolySystem;

/// Counts indexed by `(w_1..w_M) ∈ (Z/q)^M`, `w_1` most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VDistribution {
    q: FactoredModulus,
    dims: usize,
    n: u32,
    counts: Vec<u128>,
}

fn cell_count(q: u64, dims: usize) -> Option<usize> {
    (q as usize).checked_pow(dims as u32)
}

impl VDistribution {
    pub fn modulus(&self) -> &FactoredModulus {
        &self.q
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Number of unit slots `N`.
    pub fn slots(&self) -> u32 {
        self.n
    }

    pub fn counts(&self) -> &[u128] {
        &self.counts
    }

    pub fn index(&self, w: &[u64]) -> usize {
        let q = self.q.q();
        w.iter().fold(0usize, |acc, &x| acc * q as usize + (x % q) as usize)
    }

    pub fn target(&self, idx: usize) -> Vec<u64> {
        let q = self.q.q() as usize;
        let mut w = vec![0u64; self.dims];
        let mut rest = idx;
        for slot in w.iter_mut().rev() {
            *slot = (rest % q) as u64;
            rest /= q;
        }
        w
    }

    pub fn get(&self, w: &[u64]) -> u128 {
        self.counts[self.index(w)]
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().sum()
    }

    pub fn max(&self) -> u128 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// `(w, count)` pairs in index order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<u64>, u128)> + '_ {
        self.counts.iter().enumerate().map(|(i, &c)| (self.target(i), c))
    }

    /// Convolution with another distribution over the same modulus.
    fn convolve(&self, step: &[(Vec<u64>, u128)]) -> VDistribution {
        let q = self.q.q();
        let counts = (0..self.counts.len())
            .into_par_iter()
            .map(|t| {
                let target = self.target(t);
                let mut acc = 0u128;
                for (s, c) in step {
                    let src: Vec<u64> = target.iter().zip(s).map(|(&a, &b)| (a + q - b) % q).collect();
                    acc += c * self.counts[self.index(&src)];
                }
                acc
            })
            .collect();
        VDistribution {
            q: self.q.clone(),
            dims: self.dims,
            n: self.n + 1,
            counts,
        }
    }

    fn support(&self) -> Vec<(Vec<u64>, u128)> {
        self.iter().filter(|(_, c)| *c != 0).collect()
    }
}

/// `#{v ∈ U_q : (G_i(v)) ≡ w}` for every `w`.
pub fn step_distribution(system: &PolySystem, q: &FactoredModulus) -> Result<VDistribution> {
    let qq = q.q();
    let dims = system.len();
    let cells = cell_count(qq, dims).ok_or(Error::BudgetExceeded {
        what: "distribution cells",
        required: u128::MAX,
        limit: Limits::default().table_cells as u128,
    })?;
    Limits::check("distribution cells", cells as u128, Limits::default().table_cells as u128)?;
    let polys: Vec<_> = system.polys().iter().map(|g| g.to_mod(qq)).collect();
    let mut dist = VDistribution {
        q: q.clone(),
        dims,
        n: 1,
        counts: vec![0; cells],
    };
    for v in q.units() {
        let w: Vec<u64> = polys.iter().map(|g| g.eval(v)).collect();
        let i = dist.index(&w);
        dist.counts[i] += 1;
    }
    Ok(dist)
}

fn dp_work(n: u32, q: &FactoredModulus, dims: usize) -> u128 {
    (n as u128)
        .saturating_mul((q.q() as u128).saturating_pow(dims as u32))
        .saturating_mul(q.phi() as u128)
}

/// Full `N`-slot distribution by repeated convolution over `q` itself.
pub fn distribution_direct(system: &PolySystem, n: u32, q: &FactoredModulus, limits: &Limits) -> Result<VDistribution> {
    if n == 0 {
        return Err(Error::precondition("N must be at least 1"));
    }
    Limits::check("convolution work", dp_work(n, q, system.len()), limits.dp_work)?;
    let step = step_distribution(system, q)?;
    let support = step.support();
    let mut cur = step;
    for _ in 1..n {
        cur = cur.convolve(&support);
    }
    Ok(cur)
}

/// Full distribution, computed per prime power and assembled by CRT.
pub fn distribution_exact(system: &PolySystem, n: u32, q: &FactoredModulus, limits: &Limits) -> Result<VDistribution> {
    if n == 0 {
        return Err(Error::precondition("N must be at least 1"));
    }
    let parts = q.prime_power_parts();
    if parts.len() == 1 {
        return distribution_direct(system, n, q, limits);
    }
    let cells = cell_count(q.q(), system.len()).unwrap_or(usize::MAX);
    Limits::check("distribution cells", cells as u128, limits.table_cells as u128)?;
    let locals = parts
        .iter()
        .map(|p| distribution_direct(system, n, p, limits))
        .collect::<Result<Vec<_>>>()?;
    let mut out = VDistribution {
        q: q.clone(),
        dims: system.len(),
        n,
        counts: vec![0; cells],
    };
    for idx in 0..cells {
        let w = out.target(idx);
        out.counts[idx] = locals.iter().map(|d| d.get(&w)).product();
    }
    Ok(out)
}

/// Prime-power distributions of `V_{N,M}` kept for repeated exact lookups.
#[derive(Clone, Debug)]
pub struct ExactCounter {
    dims: usize,
    locals: Vec<VDistribution>,
}

impl ExactCounter {
    pub fn new(system: &PolySystem, n: u32, q: &FactoredModulus, limits: &Limits) -> Result<Self> {
        if n == 0 {
            return Err(Error::precondition("N must be at least 1"));
        }
        let parts = q.prime_power_parts();
        let total_work: u128 = parts.iter().map(|p| dp_work(n, p, system.len())).sum();
        Limits::check("convolution work", total_work, limits.dp_work)?;
        let locals = parts
            .iter()
            .map(|p| distribution_direct(system, n, p, limits))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExactCounter {
            dims: system.len(),
            locals,
        })
    }

    /// `#V_{N,M}(q; w)`.
    pub fn count(&self, w: &[u64]) -> Result<u128> {
        if w.len() != self.dims {
            return Err(Error::precondition(format!(
                "target has {} entries for a system of {} polynomials",
                w.len(),
                self.dims
            )));
        }
        Ok(self.locals.iter().map(|d| d.get(w)).product())
    }
}

/// `#V_{N,M}(q; w)` as a product of prime-power counts.
pub fn count_exact(system: &PolySystem, n: u32, q: &FactoredModulus, w: &[u64], limits: &Limits) -> Result<u128> {
    if w.len() != system.len() {
        return Err(Error::precondition(format!(
            "target has {} entries for a system of {} polynomials",
            w.len(),
            system.len()
        )));
    }
    ExactCounter::new(system, n, q, limits)?.count(w)
}

/// `∏_{ℓ^e ‖ q, ℓ ≤ C} ℓ^{min(e, R)}`.
pub fn compute_q0(q: &FactoredModulus, c: u64, r: u32) -> Result<u64> {
    if c < 2 || r < 2 {
        return Err(Error::precondition("C and R must be at least 2"));
    }
    Ok(q
        .factors()
        .iter()
        .filter(|pp| pp.prime <= c)
        .map(|pp| pp.prime.pow(pp.exp.min(r)))
        .product())
}

#[derive(Clone, Debug, Serialize)]
pub struct Prop32Report {
    pub q: u64,
    pub n: u32,
    pub w: Vec<u64>,
    pub c: u64,
    pub r: u32,
    pub q0: u64,
    /// `#V(q; w) / φ(q)^N`.
    pub lhs: f64,
    /// `(Q0/q)^M · #V(Q0; w) / φ(Q0)^N`.
    pub main_term: f64,
    pub abs_deviation: f64,
    /// `|lhs / main_term - 1|`, infinite when the main term vanishes and the left side does not.
    pub rel_deviation: f64,
    /// `C^{-N}`.
    pub envelope_small: f64,
    /// `∏_{ℓ | q, ℓ > C} (1 + (2D)^N / ℓ^{N/D - M}) - 1`.
    pub envelope_tail: f64,
}

fn ratio_f64(num: u128, den: u128) -> f64 {
    let r = BigRational::new(BigInt::from(num), BigInt::from(den));
    r.to_f64().unwrap_or(f64::NAN)
}

/// Compares the exact density with the bounded-modulus main term.
pub fn validate_prop32(
    system: &PolySystem,
    n: u32,
    q: &FactoredModulus,
    w: &[u64],
    c: u64,
    r: u32,
    limits: &Limits,
) -> Result<Prop32Report> {
    let dims = system.len();
    let d = system.degree_max();
    let need = dims * d + 1;
    if (n as usize) < need {
        return Err(Error::precondition(format!("N = {n} is below MD + 1 = {need}")));
    }
    let q0 = compute_q0(q, c, r)?;
    let count_q = count_exact(system, n, q, w, limits)?;
    let lhs = ratio_f64(count_q, (q.phi() as u128).pow(n));
    let density_q0 = match FactoredModulus::from_factors(
        &q.factors()
            .iter()
            .filter(|pp| pp.prime <= c)
            .map(|pp| (pp.prime, pp.exp.min(r)))
            .collect::<Vec<_>>(),
    ) {
        Ok(m0) => {
            let w0: Vec<u64> = w.iter().map(|&x| x % q0).collect();
            let cnt = count_exact(system, n, &m0, &w0, limits)?;
            ratio_f64(cnt, (m0.phi() as u128).pow(n))
        }
        // Q0 = 1: every tuple lies in the single class
        Err(_) => 1.0,
    };
    let main_term = (q0 as f64 / q.q() as f64).powi(dims as i32) * density_q0;
    let abs_deviation = (lhs - main_term).abs();
    let rel_deviation = if main_term != 0.0 {
        abs_deviation / main_term
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let two_d = 2.0 * d as f64;
    let expo = n as f64 / d as f64 - dims as f64;
    let envelope_tail = q
        .factors()
        .iter()
        .filter(|pp| pp.prime > c)
        .map(|pp: &PrimePower| 1.0 + two_d.powi(n as i32) / (pp.prime as f64).powf(expo))
        .product::<f64>()
        - 1.0;
    Ok(Prop32Report {
        q: q.q(),
        n,
        w: w.to_vec(),
        c,
        r,
        q0,
        lhs,
        main_term,
        abs_deviation,
        rel_deviation,
        envelope_small: (c as f64).powi(-(n as i32)),
        envelope_tail,
    })
}

/// `ξ(q) = max_w #V_{1,M}(q; w)`.
pub fn xi_max(system: &PolySystem, q: &FactoredModulus) -> Result<u128> {
    Ok(step_distribution(system, q)?.max())
}

/// Exact density `#V / φ(q)^N` as a rational.
pub fn density(count: u128, q: &FactoredModulus, n: u32) -> BigRational {
    let den = BigInt::from(q.phi()).pow(n);
    if den.is_zero() {
        return BigRational::one();
    }
    BigRational::new(BigInt::from(count), den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::{factor, IntPoly};
    use proptest::prelude::*;

    fn sys(polys: &[&[i64]]) -> PolySystem {
        PolySystem::new(polys.iter().map(|c| IntPoly::from_i64s(c)).collect()).unwrap()
    }

    fn fm(n: u64) -> FactoredModulus {
        factor(n).unwrap()
    }

    fn lim() -> Limits {
        Limits::default()
    }

    #[test]
    fn step_examples() {
        let d = step_distribution(&sys(&[&[0, 1]]), &fm(5)).unwrap();
        assert_eq!(d.counts(), &[0, 1, 1, 1, 1]);
        let d = step_distribution(&sys(&[&[0, 0, 1]]), &fm(5)).unwrap();
        assert_eq!(d.counts(), &[0, 2, 0, 0, 2]);
        let d = step_distribution(&sys(&[&[0, 1], &[0, 0, 0, 1]]), &fm(3)).unwrap();
        assert_eq!(d.get(&[1, 1]), 1);
        assert_eq!(d.get(&[2, 2]), 1);
        assert_eq!(d.total(), 2);
    }

    #[test]
    fn count_examples() {
        let t = sys(&[&[0, 1]]);
        assert_eq!(count_exact(&t, 2, &fm(5), &[0], &lim()).unwrap(), 4);
        assert_eq!(count_exact(&t, 2, &fm(5), &[1], &lim()).unwrap(), 3);
        let s = sys(&[&[0, 1], &[0, 0, 0, 1]]);
        let step = step_distribution(&s, &fm(12)).unwrap();
        for (w, c) in step.iter() {
            assert_eq!(count_exact(&s, 1, &fm(12), &w, &lim()).unwrap(), c);
        }
    }

    #[test]
    fn q0_examples() {
        assert_eq!(compute_q0(&fm(32 * 7), 5, 3).unwrap(), 8);
        assert_eq!(compute_q0(&fm(11), 5, 3).unwrap(), 1);
        assert_eq!(compute_q0(&fm(6), 7, 2).unwrap(), 6);
        assert!(compute_q0(&fm(6), 1, 2).is_err());
    }

    #[test]
    fn prop32_examples() {
        let t = sys(&[&[0, 1]]);
        let rep = validate_prop32(&t, 2, &fm(5), &[0], 5, 3, &lim()).unwrap();
        // 5 ≤ C, so Q0 = 5 and the main term is the exact density itself
        assert_eq!(rep.q0, 5);
        assert!((rep.lhs - 0.25).abs() < 1e-15);
        assert!((rep.main_term - 0.25).abs() < 1e-15);
        let rep = validate_prop32(&t, 2, &fm(5), &[0], 3, 3, &lim()).unwrap();
        assert_eq!(rep.q0, 1);
        assert!((rep.main_term - 0.2).abs() < 1e-15);
        assert!((rep.abs_deviation - 0.05).abs() < 1e-15);

        let s = sys(&[&[0, 1], &[0, 0, 0, 1]]);
        let c = s.c0().unwrap().try_into().unwrap();
        let rep = validate_prop32(&s, 7, &fm(7), &[0, 0], c, 3, &lim()).unwrap();
        assert!(rep.rel_deviation.is_finite());
        assert!(matches!(
            validate_prop32(&s, 6, &fm(7), &[0, 0], c, 3, &lim()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn xi_examples() {
        assert_eq!(xi_max(&sys(&[&[0, 1]]), &fm(9)).unwrap(), 1);
        assert_eq!(xi_max(&sys(&[&[0, 0, 1]]), &fm(5)).unwrap(), 2);
        // (v-1)^2 over U_9: v ∈ {1,2,4,5,7,8} gives 0,1,0,7,0,4
        assert_eq!(xi_max(&sys(&[&[1, -2, 1]]), &fm(9)).unwrap(), 3);
    }

    #[test]
    fn budget_enforced() {
        let s = sys(&[&[0, 1], &[0, 0, 1]]);
        assert!(matches!(
            count_exact(&s, 5, &fm(97), &[0, 0], &Limits::with_work_budget(1000)),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn konyagin_shape() {
        // max_w #{v : G(v) ≡ w} stays below a small multiple of q^{1 - 1/D}
        for coeffs in [&[0i64, 0, 1][..], &[1, -2, 1], &[0, 0, 0, 1], &[-1, 0, 0, 1]] {
            let s = sys(&[coeffs]);
            let d = s.degree_max() as f64;
            let worst = (2..=2000u64)
                .map(|q| xi_max(&s, &fm(q)).unwrap() as f64 / (q as f64).powf(1.0 - 1.0 / d))
                .fold(0.0, f64::max);
            assert!(worst <= 2.0 * d, "{coeffs:?}: {worst}");
        }
    }

    #[test]
    fn large_prime_density_is_close_to_uniform() {
        let s = sys(&[&[0, 1], &[0, 0, 1]]);
        let (dims, d) = (2usize, 2usize);
        let n = (dims * d + 1) as u32;
        for ell in [7u64, 11, 13] {
            let q = fm(ell);
            let dist = distribution_exact(&s, n, &q, &lim()).unwrap();
            let phi_n = (q.phi() as f64).powi(n as i32);
            let env = (2.0 * d as f64).powi(n as i32) / (ell as f64).powf(n as f64 / d as f64 - dims as f64);
            for (_, c) in dist.iter() {
                let dev = (c as f64 * (ell as f64).powi(dims as i32) / phi_n - 1.0).abs();
                assert!(dev <= 10.0 * env, "ell={ell}: {dev} vs {env}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn crt_assembly_matches_direct_dp(n in 1u32..4, q in 2u64..60) {
            let s = sys(&[&[0, 1], &[0, 0, 0, 1]]);
            let m = fm(q);
            let a = distribution_exact(&s, n, &m, &lim()).unwrap();
            let b = distribution_direct(&s, n, &m, &lim()).unwrap();
            prop_assert_eq!(a.counts(), b.counts());
            prop_assert_eq!(a.total(), (m.phi() as u128).pow(n));
        }

        #[test]
        fn multiplicative_over_coprime_parts(n in 1u32..4, q in 2u64..100, w0 in 0u64..100, w1 in 0u64..100) {
            let s = sys(&[&[-1, 1], &[1, -2, 1]]);
            let m = fm(q);
            let w = [w0 % q, w1 % q];
            let whole = count_exact(&s, n, &m, &w, &lim()).unwrap();
            let by_parts: u128 = m
                .prime_power_parts()
                .iter()
                .map(|p| distribution_direct(&s, n, p, &lim()).unwrap().get(&w))
                .product();
            prop_assert_eq!(whole, by_parts);
        }
    }
}
