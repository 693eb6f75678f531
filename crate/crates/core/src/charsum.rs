//! Exponential sums `Z_m(r) = Σ_{v ∈ U_m} e((Σ r_i G_i(v)) / m)` and the
//! bounds they satisfy.
//!
//! Sums are accumulated with Kahan compensation over a precomputed table of
//! `m`-th roots of unity. The engine is generic over the float type.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::iter::Sum;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{Float, FloatConst, One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Limits, Result};
use crate::numtheory::{gcd, inv_mod, is_prime, mul_mod, valuation, FactoredModulus, IntPoly, Valuation};
use crate::polysystem::PolySystem;

/// Floating-point scalar for the summation engine.
pub trait Real: Float + FloatConst + Sum + Send + Sync + Debug + 'static {
    fn from_f64(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).expect("representable")
    }
    fn from_u64(x: u64) -> Self {
        <Self as num_traits::NumCast>::from(x).expect("representable")
    }
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Compensated complex accumulator.
#[derive(Clone, Copy, Debug)]
struct Kahan<R: Real> {
    sum: Complex<R>,
    comp: Complex<R>,
}

impl<R: Real> Kahan<R> {
    fn new() -> Self {
        Kahan {
            sum: Complex::zero(),
            comp: Complex::zero(),
        }
    }

    #[inline]
    fn add(&mut self, x: Complex<R>) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// `e(j/m)` for `0 ≤ j < m`.
#[derive(Clone, Debug)]
pub struct RootTable<R: Real> {
    m: u64,
    roots: Vec<Complex<R>>,
}

impl<R: Real> RootTable<R> {
    pub fn new(m: u64) -> Self {
        let two_pi = R::TAU();
        let roots = (0..m)
            .map(|j| {
                let theta = two_pi * R::from_u64(j) / R::from_u64(m);
                Complex::new(theta.cos(), theta.sin())
            })
            .collect();
        RootTable { m, roots }
    }

    #[inline]
    pub fn e(&self, j: u64) -> Complex<R> {
        self.roots[(j % self.m) as usize]
    }
}

/// One evaluated sum with its rounding envelope.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpSumResult<R: Real> {
    pub value: Complex<R>,
    pub modulus: u64,
    pub tuple: Vec<u64>,
    pub abs_error_bound: R,
}

/// Rounding envelope for a sum of `terms` unit-modulus entries.
fn sum_error_bound<R: Real>(terms: u64) -> R {
    R::from_u64(terms.max(1)) * R::from_f64(16.0) * R::epsilon()
}

/// Residue tables `G_i(v) mod m` over the units `v` of `m`, with the roots of unity.
#[derive(Clone, Debug)]
pub struct SumEngine<R: Real> {
    modulus: FactoredModulus,
    roots: RootTable<R>,
    units: Vec<u64>,
    tables: Vec<Vec<u64>>,
}

impl<R: Real> SumEngine<R> {
    pub fn new(polys: &[IntPoly], m: &FactoredModulus) -> Self {
        let mm = m.q();
        let units: Vec<u64> = m.units().collect();
        let tables = polys
            .iter()
            .map(|p| {
                let mp = p.to_mod(mm);
                units.iter().map(|&v| mp.eval(v)).collect()
            })
            .collect();
        SumEngine {
            modulus: m.clone(),
            roots: RootTable::new(mm),
            units,
            tables,
        }
    }

    pub fn modulus(&self) -> &FactoredModulus {
        &self.modulus
    }

    pub fn phi(&self) -> u64 {
        self.units.len() as u64
    }

    /// Direct sum over the units.
    pub fn z(&self, r: &[u64]) -> Complex<R> {
        let m = self.modulus.q();
        let coeffs: Vec<u64> = r.iter().map(|&x| x % m).collect();
        let mut acc = Kahan::new();
        for idx in 0..self.units.len() {
            let mut f = 0u64;
            for (c, t) in coeffs.iter().zip(&self.tables) {
                f = (f + mul_mod(*c, t[idx], m)) % m;
            }
            acc.add(self.roots.e(f));
        }
        acc.sum
    }

    /// Sum for the combination with residues `f[idx] = F(units[idx]) mod m`.
    fn z_from_residues(&self, f: &[u64]) -> Complex<R> {
        let mut acc = Kahan::new();
        for &x in f {
            acc.add(self.roots.e(x));
        }
        acc.sum
    }

    pub fn error_bound(&self) -> R {
        sum_error_bound(self.phi())
    }
}

/// `Z_m(r)`; on composite moduli the value is cross-checked against the CRT factorization.
pub fn expsum<R: Real>(system: &PolySystem, tuple: &[u64], m: &FactoredModulus) -> Result<ExpSumResult<R>> {
    if tuple.len() != system.len() {
        return Err(Error::precondition(format!(
            "tuple has {} entries for a system of {} polynomials",
            tuple.len(),
            system.len()
        )));
    }
    let engine = SumEngine::<R>::new(system.polys(), m);
    let value = engine.z(tuple);
    let mut bound = engine.error_bound();
    if !m.is_prime_power() {
        let crt = expsum_crt::<R>(system.polys(), tuple, m);
        let tol = bound + crt.abs_error_bound + R::from_f64(1e-9) * R::from_u64(m.phi());
        if (crt.value - value).norm() > tol {
            return Err(Error::Inconsistency(format!(
                "direct sum {value:?} and CRT product {:?} disagree mod {}",
                crt.value,
                m.q()
            )));
        }
        bound = bound.max(crt.abs_error_bound);
    }
    Ok(ExpSumResult {
        value,
        modulus: m.q(),
        tuple: tuple.to_vec(),
        abs_error_bound: bound,
    })
}

/// `Z_m(r) = φ(m)/φ(Q') · ∏_{ℓ^e ‖ Q'} Z_{ℓ^e}(r'_ℓ)` with `Q' = m / gcd(m, r)`.
pub fn expsum_crt<R: Real>(polys: &[IntPoly], tuple: &[u64], m: &FactoredModulus) -> ExpSumResult<R> {
    let mm = m.q();
    let g = tuple.iter().fold(mm, |acc, &r| gcd(acc, r % mm));
    let phi_m = m.phi();
    let Some(qp) = m.divide(g) else {
        return ExpSumResult {
            value: Complex::new(R::from_u64(phi_m), R::zero()),
            modulus: mm,
            tuple: tuple.to_vec(),
            abs_error_bound: R::zero(),
        };
    };
    let qpv = qp.q();
    let reduced: Vec<u64> = tuple.iter().map(|&r| (r % mm) / g).collect();
    let mut prod = Complex::<R>::one();
    let mut rel_err = R::zero();
    for part in qp.prime_power_parts() {
        let pe = part.q();
        let c = inv_mod((qpv / pe) % pe, pe).expect("coprime cofactor");
        let local: Vec<u64> = reduced.iter().map(|&r| mul_mod(r % pe, c, pe)).collect();
        let engine = SumEngine::<R>::new(polys, &part);
        prod = prod * engine.z(&local);
        rel_err = rel_err + engine.error_bound();
    }
    let scale = R::from_u64(phi_m / qp.phi());
    ExpSumResult {
        value: prod * scale,
        modulus: mm,
        tuple: tuple.to_vec(),
        abs_error_bound: rel_err * R::from_u64(phi_m),
    }
}

/// Precomputed `Z_m(r)` over all `r ∈ (Z/m)^M`, for counting by orthogonality.
#[derive(Clone, Debug)]
pub struct OrthogonalityCounter<R: Real> {
    m: u64,
    dims: usize,
    phi: u64,
    sums: Vec<Complex<R>>,
    roots: RootTable<R>,
    z_err: R,
}

fn encode(r: &[u64], m: u64) -> usize {
    r.iter().fold(0usize, |acc, &x| acc * m as usize + x as usize)
}

fn decode(mut idx: usize, m: u64, dims: usize) -> Vec<u64> {
    let mut r = vec![0u64; dims];
    for slot in r.iter_mut().rev() {
        *slot = (idx % m as usize) as u64;
        idx /= m as usize;
    }
    r
}

impl<R: Real> OrthogonalityCounter<R> {
    pub fn new(system: &PolySystem, m: &FactoredModulus, limits: &Limits) -> Result<Self> {
        let mm = m.q();
        let dims = system.len();
        let tuples = (mm as u128).checked_pow(dims as u32).unwrap_or(u128::MAX);
        Limits::check("orthogonality tuples", tuples, limits.orthogonality_tuples)?;
        let engine = SumEngine::<R>::new(system.polys(), m);
        let sums = (0..tuples as usize)
            .into_par_iter()
            .map(|idx| engine.z(&decode(idx, mm, dims)))
            .collect();
        Ok(OrthogonalityCounter {
            m: mm,
            dims,
            phi: engine.phi(),
            sums,
            roots: RootTable::new(mm),
            z_err: engine.error_bound() * R::from_u64(engine.phi()),
        })
    }

    pub fn z(&self, r: &[u64]) -> Complex<R> {
        self.sums[encode(r, self.m)]
    }

    /// Real value of `(1/m^M) Σ_r e(-r·w/m) Z_r^N` and its error envelope.
    pub fn raw_count(&self, n: u32, w: &[u64]) -> (Complex<R>, R) {
        let m = self.m;
        let mut acc = Kahan::new();
        let mut err = R::zero();
        let eps = R::epsilon();
        let nn = R::from_u64(n as u64);
        for (idx, z) in self.sums.iter().enumerate() {
            let r = decode(idx, m, self.dims);
            let dot = r.iter().zip(w).fold(0u64, |s, (&a, &b)| (s + mul_mod(a, b % m, m)) % m);
            let phase = self.roots.e((m - dot) % m);
            let zn = z.powu(n);
            acc.add(phase * zn);
            let mag = z.norm();
            err = err
                + nn * mag.powi(n as i32 - 1) * self.z_err
                + (nn + R::from_f64(4.0)) * mag.powi(n as i32) * eps;
        }
        let scale = R::from_u64(m).powi(self.dims as i32);
        let total_terms = R::from_u64(self.sums.len() as u64);
        let phi_n = R::from_u64(self.phi).powi(n as i32);
        err = err + total_terms * R::from_f64(4.0) * eps * phi_n;
        (acc.sum / scale, err / scale)
    }

    /// `#V_{N,M}(m; w)`, rounded after checking the residual against the envelope.
    pub fn count(&self, n: u32, w: &[u64]) -> Result<u64> {
        if n == 0 {
            return Err(Error::precondition("N must be at least 1"));
        }
        if w.len() != self.dims {
            return Err(Error::precondition("target length differs from system size"));
        }
        let (value, bound) = self.raw_count(n, w);
        let rounded = value.re.round();
        let residual = (value.re - rounded).abs().max(value.im.abs());
        if residual.as_f64() + bound.as_f64() >= 0.5 || rounded < R::zero() {
            return Err(Error::RoundingResidual {
                residual: residual.as_f64(),
                bound: bound.as_f64(),
            });
        }
        Ok(rounded.as_f64() as u64)
    }
}

/// `#V_{N,M}(m; w)` from the orthogonality identity.
pub fn count_v_by_orthogonality(
    system: &PolySystem,
    n: u32,
    m: &FactoredModulus,
    w: &[u64],
    limits: &Limits,
) -> Result<u64> {
    OrthogonalityCounter::<f64>::new(system, m, limits)?.count(n, w)
}

// ---------------------------------------------------------------------------
// Cochrane–Zheng data

/// `t_ℓ(F)` and root multiplicities of `ℓ^{-t} F'` over `F_ℓ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CzData {
    pub t: u32,
    /// Largest multiplicity over all zeros; `Infinite` when there is none.
    pub mmult: Valuation,
    /// Largest multiplicity over nonzero zeros only.
    pub mmult_nonzero: Valuation,
    pub critical_multiplicities: BTreeMap<u64, u32>,
}

pub fn cz_data(f: &IntPoly, ell: u64) -> Result<CzData> {
    if !is_prime(ell) {
        return Err(Error::NotPrime(ell));
    }
    if f.is_constant_mod(ell) {
        return Err(Error::ConstantModPrime(ell));
    }
    let deriv = f.derivative();
    let t = deriv.ord_ell(ell).finite().expect("nonconstant derivative");
    let normalized = deriv.exact_div(&num_traits::pow(BigInt::from(ell), t as usize));
    let reduced = normalized.to_mod(ell);
    let mut roots = BTreeMap::new();
    for a in 0..ell {
        let mut cur = reduced.clone();
        let mut mult = 0u32;
        loop {
            if cur.degree().is_none_or(|d| d == 0) {
                break;
            }
            let (quot, rem) = cur.div_linear(a);
            if rem != 0 {
                break;
            }
            mult += 1;
            cur = quot;
        }
        if mult > 0 {
            roots.insert(a, mult);
        }
    }
    let max_of = |it: &mut dyn Iterator<Item = u32>| it.max().map_or(Valuation::Infinite, Valuation::Finite);
    let mmult = max_of(&mut roots.values().copied());
    let mmult_nonzero = max_of(&mut roots.iter().filter(|(&a, _)| a != 0).map(|(_, &m)| m));
    Ok(CzData {
        t,
        mmult,
        mmult_nonzero,
        critical_multiplicities: roots,
    })
}

/// One row of a bound sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub modulus: u64,
    pub tuple: Vec<u64>,
    pub abs_z: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BoundReport {
    pub modulus: u64,
    pub checked: usize,
    pub max_ratio: f64,
    pub argmax: Option<Vec<u64>>,
    /// Tuples whose combination was outside the bound's hypotheses.
    pub skipped: Vec<Vec<u64>>,
    /// Rows with ratio above `1 + tolerance`.
    pub violations: Vec<BoundRow>,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    fn from_rows(modulus: u64, rows: Vec<BoundRow>, skipped: Vec<Vec<u64>>, tolerance: f64) -> Self {
        let mut report = BoundReport {
            modulus,
            checked: rows.len(),
            skipped,
            ..Default::default()
        };
        for row in &rows {
            if report.argmax.is_none() || row.ratio > report.max_ratio {
                report.max_ratio = row.ratio;
                report.argmax = Some(row.tuple.clone());
            }
            if row.ratio > 1.0 + tolerance {
                report.violations.push(row.clone());
            }
        }
        report.rows = rows;
        report
    }

    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Ratio tolerance for bound checks.
pub const BOUND_TOLERANCE: f64 = 1e-6;

/// Tuples in `(Z/m)^M` not all divisible by `ℓ`, in lexicographic order.
fn primitive_tuples(m: u64, ell: u64, dims: usize) -> impl ParallelIterator<Item = Vec<u64>> {
    let total = (m as usize).pow(dims as u32);
    (0..total)
        .into_par_iter()
        .map(move |idx| decode(idx, m, dims))
        .filter(move |r| r.iter().any(|&x| x % ell != 0))
}

/// `|Z_ℓ(r)| ≤ D_0 √ℓ` over every nonzero tuple mod `ℓ`, `D_0` the degree of the combination.
pub fn verify_weil(system: &PolySystem, ell: u64) -> Result<BoundReport> {
    if !is_prime(ell) {
        return Err(Error::NotPrime(ell));
    }
    let ell_fm = FactoredModulus::prime_power(ell, 1)?;
    let engine = SumEngine::<f64>::new(system.polys(), &ell_fm);
    let polys = system.polys();
    let results: Vec<std::result::Result<BoundRow, Vec<u64>>> = primitive_tuples(ell, ell, system.len())
        .map(|r| {
            let f = IntPoly::linear_combination(polys, &r);
            let d0 = f.degree().unwrap_or(0) as u64;
            if f.is_constant_mod(ell) || d0 == 0 || ell <= d0 {
                return Err(r);
            }
            let abs_z = engine.z(&r).norm();
            let bound = d0 as f64 * (ell as f64).sqrt();
            Ok(BoundRow {
                modulus: ell,
                tuple: r,
                abs_z,
                bound,
                ratio: abs_z / bound,
            })
        })
        .collect();
    let (rows, skipped) = split_results(results);
    Ok(BoundReport::from_rows(ell, rows, skipped, BOUND_TOLERANCE))
}

fn split_results(results: Vec<std::result::Result<BoundRow, Vec<u64>>>) -> (Vec<BoundRow>, Vec<Vec<u64>>) {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(t) => skipped.push(t),
        }
    }
    (rows, skipped)
}

/// Outcome of a single Cochrane–Zheng comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CzOutcome {
    Applicable {
        t: u32,
        mmult: Valuation,
        abs_z: f64,
        bound: f64,
        ratio: f64,
    },
    NotApplicable {
        reason: String,
    },
}

/// The Cochrane–Zheng bound for given `D_0`, `t`, multiplicity and `ℓ^e`.
pub fn cz_bound(d0: u64, t: u32, mmult: Valuation, ell: u64, e: u32) -> f64 {
    let l = ell as f64;
    let base = match mmult {
        Valuation::Infinite => d0 as f64 * l.powi(e as i32),
        Valuation::Finite(mm) => {
            let k = (mm + 1) as f64;
            d0 as f64 * l.powf(t as f64 / k) * l.powf(e as f64 * (1.0 - 1.0 / k))
        }
    };
    if ell == 2 {
        2.0 * base
    } else {
        base
    }
}

fn cz_applicable(ell: u64, e: u32, t: u32) -> bool {
    if ell == 2 {
        e >= t + 3
    } else {
        e >= t + 2
    }
}

/// Compares `|Σ_{v mod ℓ^e} χ_0(v) e(F(v)/ℓ^e)|` with the Cochrane–Zheng bound.
pub fn verify_cz(f: &IntPoly, ell: u64, e: u32) -> Result<CzOutcome> {
    let data = cz_data(f, ell)?;
    if !cz_applicable(ell, e, data.t) {
        return Ok(CzOutcome::NotApplicable {
            reason: format!("e = {e} is below the range for t = {}", data.t),
        });
    }
    let m = FactoredModulus::prime_power(ell, e)?;
    let engine = SumEngine::<f64>::new(std::slice::from_ref(f), &m);
    let abs_z = engine.z(&[1]).norm();
    let d0 = f.degree().expect("nonconstant") as u64;
    let bound = cz_bound(d0, data.t, data.mmult, ell, e);
    Ok(CzOutcome::Applicable {
        t: data.t,
        mmult: data.mmult,
        abs_z,
        bound,
        ratio: abs_z / bound,
    })
}

/// Cochrane–Zheng check over every combination `Σ r_i G_i` with `r` not ≡ 0 mod `ℓ`.
pub fn verify_cz_system(system: &PolySystem, ell: u64, e: u32, limits: &Limits) -> Result<BoundReport> {
    if !is_prime(ell) {
        return Err(Error::NotPrime(ell));
    }
    let m = FactoredModulus::prime_power(ell, e)?;
    let mm = m.q();
    let dims = system.len();
    let work = (mm as u128).pow(dims as u32) * m.phi() as u128;
    Limits::check("Cochrane-Zheng sweep", work, limits.dp_work)?;
    let engine = SumEngine::<f64>::new(system.polys(), &m);
    let polys = system.polys();
    let results: Vec<std::result::Result<BoundRow, Vec<u64>>> = primitive_tuples(mm, ell, dims)
        .map(|r| {
            let f = IntPoly::linear_combination(polys, &r);
            if f.is_constant_mod(ell) {
                return Err(r);
            }
            let data = cz_data(&f, ell).expect("checked nonconstant");
            if !cz_applicable(ell, e, data.t) {
                return Err(r);
            }
            let residues: Vec<u64> = (0..engine.units.len())
                .map(|idx| {
                    r.iter()
                        .zip(&engine.tables)
                        .fold(0u64, |s, (&c, t)| (s + mul_mod(c, t[idx], mm)) % mm)
                })
                .collect();
            let abs_z = engine.z_from_residues(&residues).norm();
            let d0 = f.degree().expect("nonconstant") as u64;
            let bound = cz_bound(d0, data.t, data.mmult, ell, e);
            Ok(BoundRow {
                modulus: mm,
                tuple: r,
                abs_z,
                bound,
                ratio: abs_z / bound,
            })
        })
        .collect();
    let (rows, skipped) = split_results(results);
    Ok(BoundReport::from_rows(mm, rows, skipped, BOUND_TOLERANCE))
}

/// `t_ℓ(Σ r_i G_i') ≤ v_ℓ(β_M)` for a tuple not divisible by `ℓ`.
pub fn invariant_factor_valuation_check(system: &PolySystem, ell: u64, tuple: &[u64]) -> Result<bool> {
    if !is_prime(ell) {
        return Err(Error::NotPrime(ell));
    }
    if tuple.len() != system.len() {
        return Err(Error::precondition("tuple length differs from system size"));
    }
    if tuple.iter().all(|&r| r % ell == 0) {
        return Err(Error::precondition(format!("{ell} divides every entry of the tuple")));
    }
    let combo = IntPoly::linear_combination(&system.derivatives(), tuple);
    let t = combo.ord_ell(ell);
    Ok(t <= valuation(system.beta_max(), ell))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::factor;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64s(c)
    }

    fn sys(polys: &[&[i64]]) -> PolySystem {
        PolySystem::new(polys.iter().map(|c| p(c)).collect()).unwrap()
    }

    fn fm(n: u64) -> FactoredModulus {
        factor(n).unwrap()
    }

    fn brute_v(system: &PolySystem, n: u32, m: u64, w: &[u64]) -> u64 {
        let units: Vec<u64> = (1..m).filter(|&v| gcd(v, m) == 1).collect();
        let polys: Vec<_> = system.polys().iter().map(|g| g.to_mod(m)).collect();
        let mut count = 0;
        let mut idx = vec![0usize; n as usize];
        loop {
            let ok = polys.iter().zip(w).all(|(g, &wi)| {
                idx.iter().fold(0u64, |s, &i| (s + g.eval(units[i])) % m) == wi % m
            });
            if ok {
                count += 1;
            }
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    return count;
                }
                idx[pos] += 1;
                if idx[pos] < units.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn expsum_examples() {
        let t = sys(&[&[0, 1]]);
        let z = expsum::<f64>(&t, &[1], &fm(5)).unwrap();
        assert!((z.value - Complex::new(-1.0, 0.0)).norm() < 1e-12);
        let z = expsum::<f64>(&t, &[0], &fm(7)).unwrap();
        assert!((z.value - Complex::new(6.0, 0.0)).norm() < 1e-12);
        let sq = sys(&[&[0, 0, 1]]);
        let z = expsum::<f64>(&sq, &[1], &fm(7)).unwrap();
        assert!(z.value.norm() <= 2.0 * 7f64.sqrt());
        assert!(z.abs_error_bound > 0.0);
    }

    #[test]
    fn single_precision_engine() {
        let t = sys(&[&[0, 1]]);
        let z = expsum::<f32>(&t, &[1], &fm(30)).unwrap();
        // Ramanujan sum c_30(1) = μ(30) = -1
        assert!((z.value - Complex::new(-1.0f32, 0.0)).norm() < 1e-4);
    }

    #[test]
    fn ramanujan_sums() {
        let t = sys(&[&[0, 1]]);
        for (m, mu) in [(6u64, 1.0), (10, 1.0), (12, 0.0), (30, -1.0), (49, 0.0)] {
            let z = expsum::<f64>(&t, &[1], &fm(m)).unwrap();
            assert!((z.value.re - mu).abs() < 1e-9 && z.value.im.abs() < 1e-9, "m = {m}");
        }
    }

    #[test]
    fn orthogonality_examples() {
        let t = sys(&[&[0, 1]]);
        let lim = Limits::default();
        assert_eq!(count_v_by_orthogonality(&t, 2, &fm(5), &[0], &lim).unwrap(), 4);
        assert_eq!(count_v_by_orthogonality(&t, 1, &fm(5), &[2], &lim).unwrap(), 1);
        assert_eq!(count_v_by_orthogonality(&t, 1, &fm(5), &[0], &lim).unwrap(), 0);
    }

    #[test]
    fn orthogonality_matches_brute_force_small() {
        let lim = Limits::default();
        for s in [sys(&[&[0, 1], &[0, 0, 0, 1]]), sys(&[&[-1, 1], &[1, -2, 1]])] {
            for m in [4u64, 8, 9, 12, 25] {
                let counter = OrthogonalityCounter::<f64>::new(&s, &fm(m), &lim).unwrap();
                for n in 1..=3 {
                    for w0 in 0..m {
                        let w = [w0, (w0 * 3 + 1) % m];
                        assert_eq!(counter.count(n, &w).unwrap(), brute_v(&s, n, m, &w), "m={m} n={n} w={w:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn orthogonality_budget() {
        let s = sys(&[&[0, 1], &[0, 0, 1]]);
        let lim = Limits::with_work_budget(10);
        assert!(matches!(
            OrthogonalityCounter::<f64>::new(&s, &fm(7), &lim),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn cz_data_examples() {
        let d = cz_data(&p(&[0, 0, 1]), 5).unwrap();
        assert_eq!((d.t, d.mmult), (0, Valuation::Finite(1)));
        assert_eq!(d.mmult_nonzero, Valuation::Infinite);
        let d = cz_data(&p(&[0, 0, 0, 1]), 3).unwrap();
        assert_eq!((d.t, d.mmult), (1, Valuation::Finite(2)));
        assert!(matches!(cz_data(&IntPoly::constant(7), 7), Err(Error::ConstantModPrime(7))));
        // derivative 3T^2 - 3 = 3(T-1)(T+1) mod 5 has simple roots 1 and 4
        let d = cz_data(&p(&[0, -3, 0, 1]), 5).unwrap();
        assert_eq!(d.critical_multiplicities, BTreeMap::from([(1, 1), (4, 1)]));
    }

    #[test]
    fn weil_examples() {
        let r = verify_weil(&sys(&[&[0, 0, 1]]), 7).unwrap();
        assert!(r.holds() && r.max_ratio <= 1.0);
        let r = verify_weil(&sys(&[&[0, 1]]), 11).unwrap();
        assert!((r.max_ratio - 1.0 / 11f64.sqrt()).abs() < 1e-9);
        let r = verify_weil(&sys(&[&[0, 1, 0, 1]]), 5).unwrap();
        assert_eq!(r.checked, 4);
        assert!(r.holds());
    }

    #[test]
    fn cz_examples() {
        match verify_cz(&p(&[0, 0, 1]), 5, 2).unwrap() {
            CzOutcome::Applicable { bound, abs_z, .. } => {
                assert!((bound - 10.0).abs() < 1e-9);
                assert!(abs_z <= bound);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            verify_cz(&p(&[0, 0, 0, 1]), 3, 3).unwrap(),
            CzOutcome::Applicable { t: 1, .. }
        ));
        assert!(matches!(
            verify_cz(&p(&[0, 0, 1]), 5, 1).unwrap(),
            CzOutcome::NotApplicable { .. }
        ));
    }

    #[test]
    fn cz_system_sweep_small() {
        let r = verify_cz_system(&sys(&[&[0, 1], &[0, 0, 0, 1]]), 3, 3, &Limits::default()).unwrap();
        assert!(r.holds(), "{:?}", r.violations);
        assert!(r.checked > 0);
    }

    #[test]
    fn valuation_check_examples() {
        let s = sys(&[&[0, 1], &[0, 0, 0, 1]]);
        assert!(invariant_factor_valuation_check(&s, 3, &[0, 1]).unwrap());
        assert!(invariant_factor_valuation_check(&s, 5, &[1, 1]).unwrap());
        let s2 = sys(&[&[0, 1], &[0, 0, 1]]);
        for r in [[1, 0], [0, 1], [3, 5]] {
            assert!(invariant_factor_valuation_check(&s2, 7, &r).unwrap());
        }
        assert!(invariant_factor_valuation_check(&s, 3, &[3, 6]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn crt_factorization_matches_direct(
            c1 in prop::collection::vec(-5i64..5, 2..4),
            c2 in prop::collection::vec(-5i64..5, 2..5),
            m in 2u64..120,
            r1 in 0u64..120, r2 in 0u64..120,
        ) {
            let (g1, g2) = (p(&c1), p(&c2));
            prop_assume!(!g1.is_constant() && !g2.is_constant());
            let polys = [g1, g2];
            let fm = fm(m);
            let engine = SumEngine::<f64>::new(&polys, &fm);
            let direct = engine.z(&[r1, r2]);
            let crt = expsum_crt::<f64>(&polys, &[r1, r2], &fm);
            prop_assert!((direct - crt.value).norm() < 1e-8, "{:?} vs {:?}", direct, crt.value);
        }
    }
}
