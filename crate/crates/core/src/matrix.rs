//! Small dense matrices over an integer scalar, with the Smith normal form.

use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Scalar types the exact matrix routines accept (`i64`, `i128`, `BigInt`, ...).
pub trait IntScalar: Integer + Signed + Clone + fmt::Debug {}
impl<T: Integer + Signed + Clone + fmt::Debug> IntScalar for T {}

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: IntScalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Matrix::<T>::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * rhs[(k, j)].clone();
                }
            }
        }
        out
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += k * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, k: &T) {
        for j in 0..self.cols {
            let v = self[(src, j)].clone() * k.clone();
            self[(dst, j)] = self[(dst, j)].clone() + v;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, k: &T) {
        for i in 0..self.rows {
            let v = self[(i, src)].clone() * k.clone();
            self[(i, dst)] = self[(i, dst)].clone() + v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            self[(i, j)] = -self[(i, j)].clone();
        }
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> T {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return T::one();
        }
        let mut a = self.clone();
        let mut sign = T::one();
        let mut prev = T::one();
        for k in 0..n {
            if a[(k, k)].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[(i, k)].is_zero()) else {
                    return T::zero();
                };
                a.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = a[(i, j)].clone() * a[(k, k)].clone() - a[(i, k)].clone() * a[(k, j)].clone();
                    a[(i, j)] = v / prev.clone();
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * a[(n - 1, n - 1)].clone()
    }

    /// Rank over the fraction field, by fraction-free elimination.
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        let mut prev = T::one();
        for col in 0..a.cols {
            if rank == a.rows {
                break;
            }
            let Some(p) = (rank..a.rows).find(|&i| !a[(i, col)].is_zero()) else {
                continue;
            };
            a.swap_rows(rank, p);
            for i in rank + 1..a.rows {
                for j in col + 1..a.cols {
                    let v = a[(i, j)].clone() * a[(rank, col)].clone()
                        - a[(i, col)].clone() * a[(rank, j)].clone();
                    a[(i, j)] = v / prev.clone();
                }
                a[(i, col)] = T::zero();
            }
            prev = a[(rank, col)].clone();
            rank += 1;
        }
        rank
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.rows {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for j in 0..self.cols {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{:?}", self.data[i * self.cols + j])?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

/// `P·A·R = S` with `S` diagonal, `d_i | d_{i+1}` and `P`, `R` unimodular.
#[derive(Clone, Debug)]
pub struct SmithForm<T> {
    pub s: Matrix<T>,
    pub p: Matrix<T>,
    pub r: Matrix<T>,
}

impl<T: IntScalar> SmithForm<T> {
    /// Diagonal of `S`, nonnegative and in divisibility order.
    pub fn invariant_factors(&self) -> Vec<T> {
        self.s.diagonal()
    }
}

/// Smith normal form by repeated pivot reduction with exact arithmetic.
pub fn smith_normal_form<T: IntScalar>(a: &Matrix<T>) -> Result<SmithForm<T>> {
    if a.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let (m, n) = (a.rows(), a.cols());
    let mut s = a.clone();
    let mut p = Matrix::identity(m);
    let mut r = Matrix::identity(n);

    for t in 0..m.min(n) {
        loop {
            // smallest nonzero magnitude in the trailing block
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let v = &s[(i, j)];
                    if !v.is_zero()
                        && pivot.is_none_or(|(pi, pj)| v.abs() < s[(pi, pj)].abs())
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                return Ok(SmithForm { s, p, r });
            };
            s.swap_rows(t, pi);
            p.swap_rows(t, pi);
            s.swap_cols(t, pj);
            r.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..m {
                if !s[(i, t)].is_zero() {
                    let k = -s[(i, t)].div_floor(&s[(t, t)]);
                    s.add_row_multiple(i, t, &k);
                    p.add_row_multiple(i, t, &k);
                    clean &= s[(i, t)].is_zero();
                }
            }
            for j in t + 1..n {
                if !s[(t, j)].is_zero() {
                    let k = -s[(t, j)].div_floor(&s[(t, t)]);
                    s.add_col_multiple(j, t, &k);
                    r.add_col_multiple(j, t, &k);
                    clean &= s[(t, j)].is_zero();
                }
            }
            if !clean {
                continue;
            }
            let offender = (t + 1..m).find(|&i| {
                (t + 1..n).any(|j| !s[(i, j)].is_multiple_of(&s[(t, t)]))
            });
            match offender {
                Some(i) => {
                    let one = T::one();
                    s.add_row_multiple(t, i, &one);
                    p.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if s[(t, t)].is_negative() {
            s.negate_row(t);
            p.negate_row(t);
        }
    }
    Ok(SmithForm { s, p, r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn mat(rows: &[&[i64]]) -> Matrix<i64> {
        Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect())
    }

    fn check(a: &Matrix<i64>) -> SmithForm<i64> {
        let snf = smith_normal_form(a).unwrap();
        assert_eq!(snf.p.mul(a).mul(&snf.r), snf.s);
        assert_eq!(snf.p.determinant().abs(), 1);
        assert_eq!(snf.r.determinant().abs(), 1);
        for i in 0..snf.s.rows() {
            for j in 0..snf.s.cols() {
                if i != j {
                    assert_eq!(snf.s[(i, j)], 0);
                }
            }
        }
        let d = snf.invariant_factors();
        for w in d.windows(2) {
            assert!(w[0] >= 0);
            assert!(w[1] == 0 || w[1] % w[0] == 0, "{d:?}");
        }
        snf
    }

    #[test]
    fn diag_2_3() {
        assert_eq!(check(&mat(&[&[2, 0], &[0, 3]])).invariant_factors(), vec![1, 6]);
    }

    #[test]
    fn identity() {
        assert_eq!(check(&mat(&[&[1, 0], &[0, 1]])).invariant_factors(), vec![1, 1]);
    }

    #[test]
    fn tall_matrix() {
        let snf = check(&mat(&[&[1, 0], &[0, 0], &[0, 3]]));
        assert_eq!(snf.invariant_factors(), vec![1, 3]);
    }

    #[test]
    fn zero_matrix_rejected() {
        assert!(matches!(
            smith_normal_form(&Matrix::<i64>::zeros(2, 2)),
            Err(Error::ZeroMatrix)
        ));
    }

    #[test]
    fn bigint_scalar() {
        let a: Matrix<BigInt> = Matrix::from_rows(vec![
            vec![BigInt::from(4), BigInt::from(6)],
            vec![BigInt::from(10), BigInt::from(4)],
        ]);
        let snf = smith_normal_form(&a).unwrap();
        assert_eq!(snf.invariant_factors(), vec![BigInt::from(2), BigInt::from(22)]);
    }

    #[test]
    fn determinant_and_rank() {
        let a = mat(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(a.determinant(), 18);
        assert_eq!(a.rank(), 3);
        let b = mat(&[&[1, 2], &[2, 4], &[3, 6]]);
        assert_eq!(b.rank(), 1);
        assert_eq!(mat(&[&[0, 1], &[1, 0]]).determinant(), -1);
    }

    proptest! {
        #[test]
        fn snf_reconstructs(rows in 1usize..5, cols in 1usize..4, seed in prop::collection::vec(-20i64..20, 16)) {
            let a = Matrix::from_rows(
                (0..rows).map(|i| (0..cols).map(|j| seed[i * 4 + j]).collect()).collect(),
            );
            prop_assume!(!a.is_zero());
            let snf = check(&a);
            // product of invariant factors equals the gcd of maximal minors up to sign
            let rank = snf.invariant_factors().iter().filter(|d| **d != 0).count();
            prop_assert_eq!(rank, a.rank());
        }
    }
}
