//! Dense matrices of certified complex numbers.

use std::cmp::Ordering;

use crate::ball::{Complex, Mag};
use crate::error::{Error, Result};
use crate::lines::RationalMatrix;

#[derive(Clone, Debug)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

/// Result of a certified Gauss–Jordan elimination.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub reduced: CMatrix,
    pub pivots: Vec<usize>,
    /// Smallest pivot magnitude relative to the matrix scale (before normalization).
    pub min_pivot: f64,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> CMatrix {
        CMatrix { rows, cols, data: vec![Complex::zero(prec); rows * cols] }
    }

    pub fn identity(n: usize, prec: u32) -> CMatrix {
        let mut m = CMatrix::zeros(n, n, prec);
        for i in 0..n {
            m.set(i, i, Complex::one(prec));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex) -> CMatrix {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_rational(m: &RationalMatrix, prec: u32) -> CMatrix {
        CMatrix::from_fn(m.rows(), m.cols(), |i, j| Complex::from_rational(m.get(i, j), prec))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Complex {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Complex] {
        &self.data
    }

    pub fn precision(&self) -> u32 {
        self.data.iter().map(|c| c.precision()).max().unwrap_or(crate::ball::DEFAULT_PRECISION)
    }

    pub fn with_precision(&self, prec: u32) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|c| c.with_precision(prec)).collect() }
    }

    pub fn conj(&self) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(Complex::conj).collect() }
    }

    pub fn neg(&self) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(Complex::neg).collect() }
    }

    pub fn scale(&self, c: &Complex) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.mul(c)).collect() }
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let prec = self.precision().max(other.precision());
        let mut out = CMatrix::zeros(self.rows, other.cols, prec);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Complex::zero(prec);
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if a.re.is_exact_zero() && a.im.is_exact_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(other.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn mul_rational(&self, other: &RationalMatrix) -> CMatrix {
        self.mul(&CMatrix::from_rational(other, self.precision()))
    }

    pub fn hstack(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.rows, other.rows);
        CMatrix::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        })
    }

    pub fn select_columns(&self, idx: &[usize]) -> CMatrix {
        CMatrix::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]).clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> CMatrix {
        CMatrix::from_fn(idx.len(), self.cols, |i, j| self.get(idx[i], j).clone())
    }

    /// Largest entry bound, at least one.
    fn scale_bound(&self) -> f64 {
        self.data.iter().map(|c| c.upper_abs().to_f64()).fold(1.0, f64::max)
    }

    /// Largest radius over all entries.
    pub fn max_radius(&self) -> Mag {
        self.data.iter().fold(Mag::ZERO, |acc, c| acc.max(c.radius()))
    }

    /// Every entry is a ball of radius at most `tol` around a point within `tol` of zero.
    pub fn is_negligible(&self, tol: f64) -> bool {
        self.data.iter().all(|c| c.upper_abs().to_f64() <= tol)
    }

    /// Gauss–Jordan elimination with certified pivots.
    ///
    /// A column is accepted as pivot when some candidate entry is certified
    /// nonzero. It is treated as dependent when every candidate entry is
    /// below `threshold` (relative to the matrix scale); anything in between
    /// cannot be decided and yields `PrecisionExhausted`.
    pub fn echelon(&self, threshold: f64) -> Result<Echelon> {
        let prec = self.precision();
        let scale = self.scale_bound();
        let (t, min_pivot) = self.preconditioner(threshold * scale);
        let growth = t.data.iter().map(|c| c.upper_abs().to_f64()).fold(1.0, f64::max) * self.rows.max(1) as f64;
        let tol = threshold * scale * growth;
        let mut a = t.mul(self);
        let mut pivots = Vec::new();
        let mut k = 0;
        for j in 0..a.cols {
            if k == a.rows {
                break;
            }
            let best = (k..a.rows).max_by(|&x, &y| {
                a.get(x, j).mid_abs_f64().partial_cmp(&a.get(y, j).mid_abs_f64()).unwrap_or(Ordering::Equal)
            });
            let Some(b) = best else { break };
            let piv = a.get(b, j).clone();
            if !piv.is_certified_nonzero() {
                if (k..a.rows).all(|i| a.get(i, j).upper_abs().to_f64() <= tol) {
                    continue;
                }
                return Err(Error::PrecisionExhausted { context: format!("cannot decide rank at column {j}") });
            }
            a.swap_rows(k, b);
            let inv = piv.recip().expect("certified nonzero");
            for c in 0..a.cols {
                let v = a.get(k, c).mul(&inv);
                a.set(k, c, v);
            }
            a.set(k, j, Complex::one(prec));
            for i in 0..a.rows {
                if i == k {
                    continue;
                }
                let f = a.get(i, j).clone();
                if f.re.is_exact_zero() && f.im.is_exact_zero() {
                    continue;
                }
                for c in 0..a.cols {
                    if c == j {
                        continue;
                    }
                    let v = a.get(i, c).sub(&f.mul(a.get(k, c)));
                    a.set(i, c, v);
                }
                a.set(i, j, Complex::zero(prec));
            }
            pivots.push(j);
            k += 1;
        }
        // rows below the pivots must be negligible
        for i in k..a.rows {
            for j in 0..a.cols {
                if a.get(i, j).is_certified_nonzero() && a.get(i, j).upper_abs().to_f64() > tol {
                    return Err(Error::PrecisionExhausted { context: "residual rows are not negligible".into() });
                }
            }
        }
        Ok(Echelon { reduced: a, pivots, min_pivot })
    }

    /// Row transform `t` (exact) with `t * mid(self)` close to reduced
    /// echelon form, and the smallest relative pivot met on the way.
    /// Eliminating on `t * self` keeps the radii from compounding.
    fn preconditioner(&self, tol: f64) -> (CMatrix, f64) {
        let prec = self.precision();
        let scale = self.scale_bound();
        let n = self.rows;
        let mut a = CMatrix::from_fn(n, self.cols, |i, j| self.get(i, j).midpoint());
        let mut t = CMatrix::identity(n, prec);
        let mut min_pivot = f64::INFINITY;
        let mut k = 0;
        for j in 0..a.cols {
            if k == n {
                break;
            }
            let b = (k..n)
                .max_by(|&x, &y| {
                    a.get(x, j).mid_abs_f64().partial_cmp(&a.get(y, j).mid_abs_f64()).unwrap_or(Ordering::Equal)
                })
                .expect("nonempty range");
            let size = a.get(b, j).mid_abs_f64();
            if size <= tol || size == 0.0 {
                continue;
            }
            min_pivot = min_pivot.min(size / scale);
            a.swap_rows(k, b);
            t.swap_rows(k, b);
            let inv = a.get(k, j).midpoint().recip().expect("nonzero midpoint").midpoint();
            for m in [&mut a, &mut t] {
                for c in 0..m.cols {
                    let v = m.get(k, c).mul(&inv).midpoint();
                    m.set(k, c, v);
                }
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a.get(i, j).clone();
                if f.mid_abs_f64() == 0.0 {
                    continue;
                }
                for m in [&mut a, &mut t] {
                    for c in 0..m.cols {
                        let v = m.get(i, c).sub(&f.mul(m.get(k, c))).midpoint();
                        m.set(i, c, v);
                    }
                }
            }
            k += 1;
        }
        if k == 0 {
            min_pivot = 0.0;
        }
        (t, min_pivot)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self, threshold: f64) -> Result<usize> {
        Ok(self.echelon(threshold)?.pivots.len())
    }

    /// Basis of the null space (columns).
    pub fn kernel(&self, threshold: f64) -> Result<CMatrix> {
        let e = self.echelon(threshold)?;
        let prec = self.precision();
        let free: Vec<usize> = (0..self.cols).filter(|c| !e.pivots.contains(c)).collect();
        let mut out = CMatrix::zeros(self.cols, free.len(), prec);
        for (t, &f) in free.iter().enumerate() {
            out.set(f, t, Complex::one(prec));
            for (row, &pc) in e.pivots.iter().enumerate() {
                out.set(pc, t, e.reduced.get(row, f).neg());
            }
        }
        Ok(out)
    }

    /// Determinant of a square matrix, as `det(t * self) / det(t)` for an
    /// exact approximate inverse `t`.
    pub fn det(&self) -> Result<Complex> {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let (t, _) = self.preconditioner(0.0);
        let dt = t.det_plain()?;
        t.mul(self)
            .det_plain()?
            .div(&dt)
            .ok_or_else(|| Error::PrecisionExhausted { context: "preconditioner is singular".into() })
    }

    /// Elimination with partial pivoting.
    fn det_plain(&self) -> Result<Complex> {
        let prec = self.precision();
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Complex::one(prec);
        for j in 0..n {
            let b = (j..n)
                .max_by(|&x, &y| {
                    a.get(x, j).mid_abs_f64().partial_cmp(&a.get(y, j).mid_abs_f64()).unwrap_or(Ordering::Equal)
                })
                .expect("nonempty range");
            let piv = a.get(b, j).clone();
            if !piv.is_certified_nonzero() {
                return Err(Error::PrecisionExhausted { context: "matrix is not certified invertible".into() });
            }
            if b != j {
                a.swap_rows(b, j);
                det = det.neg();
            }
            det = det.mul(&piv);
            let inv = piv.recip().expect("certified nonzero");
            for i in j + 1..n {
                let f = a.get(i, j).mul(&inv);
                if f.re.is_exact_zero() && f.im.is_exact_zero() {
                    continue;
                }
                for c in j + 1..n {
                    let v = a.get(i, c).sub(&f.mul(a.get(j, c)));
                    a.set(i, c, v);
                }
            }
        }
        Ok(det)
    }

    /// Solve `self * x = rhs` for square invertible `self`.
    pub fn solve(&self, rhs: &CMatrix) -> Result<CMatrix> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        assert_eq!(self.rows, rhs.rows);
        let n = self.rows;
        let aug = self.hstack(rhs);
        let e = aug
            .echelon(0.0)
            .map_err(|_| Error::PrecisionExhausted { context: "matrix is not certified invertible".into() })?;
        if e.pivots.len() < n || e.pivots[n - 1] != n - 1 {
            return Err(Error::PrecisionExhausted { context: "matrix is not certified invertible".into() });
        }
        Ok(CMatrix::from_fn(n, rhs.cols, |i, j| e.reduced.get(i, n + j).clone()))
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        self.solve(&CMatrix::identity(self.rows, self.precision()))
    }
}
