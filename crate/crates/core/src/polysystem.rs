//! The polynomial system `(G_1, ..., G_M)` and its derivative coefficient matrix.
//!
//! Column `i` of the coefficient matrix `A0` lists the coefficients of `G_i'`
//! in ascending degree. Its invariant factors `β_1 | ... | β_M` determine the
//! primes modulo which the derivatives become linearly dependent: exactly the
//! primes dividing `β_M`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{smith_normal_form, Matrix, SmithForm};
use crate::numtheory::{inv_mod, is_prime, mul_mod, valuation, IntPoly, ModPoly, Valuation};

/// `rows × M` matrix whose column `i` holds the first `rows` coefficients of `polys[i]`.
pub fn coefficient_matrix(polys: &[IntPoly], rows: usize) -> Matrix<BigInt> {
    let mut a = Matrix::zeros(rows, polys.len());
    for (i, p) in polys.iter().enumerate() {
        for r in 0..rows {
            a[(r, i)] = p.coeff(r);
        }
    }
    a
}

fn coefficient_rows(polys: &[IntPoly]) -> usize {
    polys
        .iter()
        .filter_map(IntPoly::degree)
        .max()
        .map_or(0, |d| d + 1)
}

/// True iff the polynomials are linearly independent over ℚ.
pub fn is_indep_over_q(polys: &[IntPoly]) -> bool {
    if polys.is_empty() {
        return true;
    }
    let rows = coefficient_rows(polys);
    if rows < polys.len() {
        return false;
    }
    coefficient_matrix(polys, rows).rank() == polys.len()
}

/// Reduced row echelon form of the coefficient matrix mod `ell`; returns the pivot columns.
fn rref_mod_prime(polys: &[IntPoly], ell: u64) -> (Vec<Vec<u64>>, Vec<usize>) {
    let rows = coefficient_rows(polys);
    let m = polys.len();
    let reduced: Vec<ModPoly> = polys.iter().map(|p| p.to_mod(ell)).collect();
    let mut a: Vec<Vec<u64>> = (0..rows)
        .map(|r| reduced.iter().map(|p| p.coeffs().get(r).copied().unwrap_or(0)).collect())
        .collect();
    let mut pivots = Vec::new();
    for c in 0..m {
        let top = pivots.len();
        let Some(piv) = (top..rows).find(|&r| a[r][c] != 0) else {
            continue;
        };
        a.swap(top, piv);
        let inv = inv_mod(a[top][c], ell).expect("nonzero mod prime");
        for v in a[top].iter_mut() {
            *v = mul_mod(*v, inv, ell);
        }
        for r in 0..rows {
            if r != top && a[r][c] != 0 {
                let f = a[r][c];
                for j in 0..m {
                    let sub = mul_mod(f, a[top][j], ell);
                    a[r][j] = (a[r][j] + ell - sub) % ell;
                }
            }
        }
        pivots.push(c);
    }
    (a, pivots)
}

/// Rank of the coefficient matrix reduced modulo the prime `ell`.
pub fn rank_mod_prime(polys: &[IntPoly], ell: u64) -> usize {
    rref_mod_prime(polys, ell).1.len()
}

/// Nonzero `(μ_i)` mod `ell` with `Σ μ_i G_i ≡ 0`, or `None` when independent.
pub fn kernel_vector_mod_prime(polys: &[IntPoly], ell: u64) -> Option<Vec<u64>> {
    let (a, pivots) = rref_mod_prime(polys, ell);
    let free = (0..polys.len()).find(|c| !pivots.contains(c))?;
    let mut mu = vec![0u64; polys.len()];
    mu[free] = 1;
    for (row, &c) in pivots.iter().enumerate() {
        mu[c] = (ell - a[row][free]) % ell;
    }
    Some(mu)
}

/// True iff the polynomials are linearly independent over `F_ell`.
pub fn is_indep_mod_ell(polys: &[IntPoly], ell: u64) -> Result<bool> {
    if !is_prime(ell) {
        return Err(Error::NotPrime(ell));
    }
    Ok(rank_mod_prime(polys, ell) == polys.len())
}

/// A system of nonconstant integer polynomials with its derived invariants.
#[derive(Clone, Debug)]
pub struct PolySystem {
    polys: Vec<IntPoly>,
    degree_max: usize,
    degree_min: usize,
    a0: Matrix<BigInt>,
    smith: SmithForm<BigInt>,
    invariant_factors: Vec<BigInt>,
    rank: usize,
    c0: Option<BigInt>,
}

impl PolySystem {
    pub fn new(polys: Vec<IntPoly>) -> Result<Self> {
        if polys.is_empty() {
            return Err(Error::EmptySystem);
        }
        if let Some(i) = polys.iter().position(IntPoly::is_constant) {
            return Err(Error::ConstantPolynomial(i));
        }
        let degrees: Vec<usize> = polys.iter().map(|p| p.degree().unwrap()).collect();
        let degree_max = *degrees.iter().max().unwrap();
        let degree_min = *degrees.iter().min().unwrap();
        let m = polys.len();

        let derivs: Vec<IntPoly> = polys.iter().map(IntPoly::derivative).collect();
        let a0 = coefficient_matrix(&derivs, degree_max);
        for ((r, i), a) in (0..degree_max).flat_map(|r| (0..m).map(move |i| (r, i))).map(|(r, i)| ((r, i), &a0[(r, i)])) {
            if !a.is_multiple_of(&BigInt::from(r + 1)) {
                return Err(Error::Inconsistency(format!(
                    "derivative coefficient a[{i},{r}] = {a} not divisible by {}",
                    r + 1
                )));
            }
        }
        let smith = smith_normal_form(&a0)?;
        let mut invariant_factors = smith.invariant_factors();
        invariant_factors.resize(m, BigInt::zero());
        let rank = invariant_factors.iter().filter(|b| !b.is_zero()).count();
        let independent = rank == m;
        if independent && degree_max < m {
            return Err(Error::Inconsistency(format!(
                "independent derivatives with D = {degree_max} < M = {m}"
            )));
        }
        let c0 = independent.then(|| {
            let beta_m = invariant_factors[m - 1].abs();
            std::cmp::max(BigInt::from(degree_max + 1), beta_m) + 1
        });
        Ok(PolySystem {
            polys,
            degree_max,
            degree_min,
            a0,
            smith,
            invariant_factors,
            rank,
            c0,
        })
    }

    pub fn polys(&self) -> &[IntPoly] {
        &self.polys
    }

    /// Number of polynomials `M`.
    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// Maximum degree `D`.
    pub fn degree_max(&self) -> usize {
        self.degree_max
    }

    /// Minimum degree `D_min`.
    pub fn degree_min(&self) -> usize {
        self.degree_min
    }

    /// The `D × M` derivative coefficient matrix.
    pub fn a0(&self) -> &Matrix<BigInt> {
        &self.a0
    }

    pub fn smith(&self) -> &SmithForm<BigInt> {
        &self.smith
    }

    /// `β_1, ..., β_M` (trailing zeros when the derivatives are ℚ-dependent).
    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.invariant_factors
    }

    pub fn beta_max(&self) -> &BigInt {
        self.invariant_factors.last().expect("nonempty system")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Whether `{G_i'}` are ℚ-linearly independent.
    pub fn derivatives_independent(&self) -> bool {
        self.rank == self.polys.len()
    }

    /// Least integer exceeding `max{D + 1, |β_M|}`; `None` when the derivatives are dependent.
    pub fn c0(&self) -> Option<&BigInt> {
        self.c0.as_ref()
    }

    /// Least integer `C1 > D + 1` beyond which `{G_i}` stay independent modulo every prime.
    pub fn c1(&self) -> Option<BigInt> {
        let rows = self.degree_max + 1;
        let a = coefficient_matrix(&self.polys, rows);
        let snf = smith_normal_form(&a).ok()?;
        let mut d = snf.invariant_factors();
        d.resize(self.polys.len(), BigInt::zero());
        let last = d.last()?.abs();
        if last.is_zero() {
            return None;
        }
        Some(std::cmp::max(BigInt::from(self.degree_max + 1), last) + 1)
    }

    pub fn derivatives(&self) -> Vec<IntPoly> {
        self.polys.iter().map(IntPoly::derivative).collect()
    }

    /// `v_ell(β_M)`, infinite when `β_M = 0`.
    pub fn beta_max_valuation(&self, ell: u64) -> Valuation {
        valuation(self.beta_max(), ell)
    }

    fn to_json_repr(&self) -> SystemJson {
        SystemJson {
            polys: self.polys.clone(),
            d: Some(self.degree_max),
            dmin: Some(self.degree_min),
            invariant_factors: Some(self.invariant_factors.iter().map(ToString::to_string).collect()),
            c0: Some(self.c0.as_ref().map(ToString::to_string)),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SystemJson {
    polys: Vec<IntPoly>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    #[serde(rename = "Dmin", default, skip_serializing_if = "Option::is_none")]
    dmin: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    invariant_factors: Option<Vec<String>>,
    #[serde(rename = "C0", default, skip_serializing_if = "Option::is_none")]
    c0: Option<Option<String>>,
}

impl Serialize for PolySystem {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_repr().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PolySystem {
    /// Rebuilds the system from `polys`; derived fields, when present, must agree.
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SystemJson::deserialize(deserializer)?;
        let sys = PolySystem::new(raw.polys.clone()).map_err(de::Error::custom)?;
        let expected = sys.to_json_repr();
        let mismatch = (raw.d.is_some() && raw.d != expected.d)
            || (raw.dmin.is_some() && raw.dmin != expected.dmin)
            || (raw.invariant_factors.is_some() && raw.invariant_factors != expected.invariant_factors)
            || (raw.c0.is_some() && raw.c0 != expected.c0);
        if mismatch {
            return Err(de::Error::custom("derived fields disagree with the polynomials"));
        }
        Ok(sys)
    }
}
