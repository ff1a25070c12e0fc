use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense matrix of exact rationals, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"n"` or `"n/d"`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

/// Canonical `"n"` / `"n/d"` rendering.
pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Exponent of `p` in a nonzero integer.
pub fn valuation_int(n: &BigInt, p: u64) -> Option<i64> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        n = q;
        v += 1;
    }
}

/// `v_p(q)`; `None` for zero.
pub fn valuation(q: &BigRational, p: u64) -> Option<i64> {
    Some(valuation_int(q.numer(), p)? - valuation_int(q.denom(), p)?)
}

pub fn is_p_integral(q: &BigRational, p: u64) -> bool {
    q.is_zero() || valuation(q, p).unwrap_or(0) >= 0
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> RationalMatrix {
        RationalMatrix { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> RationalMatrix {
        let mut m = RationalMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    pub fn scalar(n: usize, q: &BigRational) -> RationalMatrix {
        let mut m = RationalMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, q.clone());
        }
        m
    }

    pub fn diagonal(entries: &[BigRational]) -> RationalMatrix {
        let mut m = RationalMatrix::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m.set(i, i, e.clone());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> RationalMatrix {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RationalMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<RationalMatrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(RationalMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Builds an `n x m` matrix from `m` column vectors of length `n`.
    pub fn from_columns(n: usize, columns: &[Vec<BigRational>]) -> Result<RationalMatrix> {
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Dimension(format!("column length differs from ambient dimension {n}")));
        }
        Ok(RationalMatrix::from_fn(n, columns.len(), |i, j| columns[j][i].clone()))
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> RationalMatrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        RationalMatrix::from_fn(r, c, |i, j| rat(rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<BigRational> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<BigRational>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn row(&self, i: usize) -> Vec<BigRational> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigRational>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn transpose(&self) -> RationalMatrix {
        RationalMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = RationalMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] = &out.data[idx] + a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).fold(BigRational::zero(), |acc, j| acc + self.get(i, j) * &v[j]))
            .collect()
    }

    pub fn add(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> RationalMatrix {
        RationalMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * q).collect() }
    }

    pub fn hstack(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.rows, other.rows);
        RationalMatrix::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        })
    }

    pub fn vstack(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, other.cols);
        RationalMatrix::from_fn(self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self.get(i, j).clone()
            } else {
                other.get(i - self.rows, j).clone()
            }
        })
    }

    pub fn block_diag(&self, other: &RationalMatrix) -> RationalMatrix {
        RationalMatrix::from_fn(self.rows + other.rows, self.cols + other.cols, |i, j| {
            match (i < self.rows, j < self.cols) {
                (true, true) => self.get(i, j).clone(),
                (false, false) => other.get(i - self.rows, j - self.cols).clone(),
                _ => BigRational::zero(),
            }
        })
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &RationalMatrix) -> RationalMatrix {
        RationalMatrix::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self.get(i / other.rows, j / other.cols) * other.get(i % other.rows, j % other.cols)
        })
    }

    pub fn select_columns(&self, idx: &[usize]) -> RationalMatrix {
        RationalMatrix::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]).clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> RationalMatrix {
        RationalMatrix::from_fn(idx.len(), self.cols, |i, j| self.get(idx[i], j).clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|q| q.is_integer())
    }

    pub fn is_p_integral(&self, p: u64) -> bool {
        self.data.iter().all(|q| is_p_integral(q, p))
    }

    /// Least common multiple of all denominators.
    pub fn denominator(&self) -> BigInt {
        self.data.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.data
    }

    /// Integer entries; `None` if any entry is fractional.
    pub fn to_integer_rows(&self) -> Option<Vec<Vec<BigInt>>> {
        if !self.is_integral() {
            return None;
        }
        Some((0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).to_integer()).collect()).collect())
    }

    pub fn from_integer_rows(rows: &[Vec<BigInt>], cols: usize) -> RationalMatrix {
        RationalMatrix::from_fn(rows.len(), cols, |i, j| BigRational::from_integer(rows[i][j].clone()))
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (RationalMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, pr);
            let inv = m.get(r, c).recip();
            for j in 0..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i != r && !m.get(i, c).is_zero() {
                    let f = m.get(i, c).clone();
                    for j in 0..m.cols {
                        let v = m.get(i, j) - &f * m.get(r, j);
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn det(&self) -> BigRational {
        assert!(self.is_square(), "determinant of non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut det = BigRational::one();
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return BigRational::zero();
            };
            if pr != c {
                m.swap_rows(pr, c);
                det = -det;
            }
            let piv = m.get(c, c).clone();
            det *= &piv;
            for i in c + 1..n {
                if m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c) / &piv;
                for j in c..n {
                    let v = m.get(i, j) - &f * m.get(c, j);
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<RationalMatrix> {
        if !self.is_square() {
            return Err(Error::Dimension("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let (r, piv) = self.hstack(&RationalMatrix::identity(n)).rref();
        if piv.len() < n || piv[n - 1] != n - 1 {
            return Err(Error::Singular("matrix is not invertible".into()));
        }
        Ok(RationalMatrix::from_fn(n, n, |i, j| r.get(i, n + j).clone()))
    }

    /// Unique solution of `self * X = rhs`, if one exists.
    ///
    /// `self` must have full column rank; an inconsistent system yields `None`.
    pub fn solve(&self, rhs: &RationalMatrix) -> Option<RationalMatrix> {
        assert_eq!(self.rows, rhs.rows);
        let n = self.cols;
        let (r, piv) = self.hstack(rhs).rref();
        if piv.len() < n || piv.iter().take(n).enumerate().any(|(i, &c)| c != i) {
            return None;
        }
        if piv.len() > n {
            return None;
        }
        Some(RationalMatrix::from_fn(n, rhs.cols, |i, j| r.get(i, n + j).clone()))
    }

    /// Basis of the right kernel as columns.
    pub fn kernel(&self) -> RationalMatrix {
        let (r, piv) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !piv.contains(c)).collect();
        let mut out = RationalMatrix::zeros(self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            out.set(f, k, BigRational::one());
            for (i, &pc) in piv.iter().enumerate() {
                out.set(pc, k, -r.get(i, f).clone());
            }
        }
        out
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}
