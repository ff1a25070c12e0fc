//! Smith and Hermite normal forms over the integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::RationalMatrix;
use crate::error::{Error, Result};

/// `u * m * v = diag(divisors)` with `u`, `v` unimodular.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub divisors: Vec<BigInt>,
    pub u: RationalMatrix,
    pub v: RationalMatrix,
}

impl SmithForm {
    /// Number of nonzero elementary divisors.
    pub fn rank(&self) -> usize {
        self.divisors.iter().filter(|d| !d.is_zero()).count()
    }
}

type IntMat = Vec<Vec<BigInt>>;

fn identity(n: usize) -> IntMat {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

fn row_axpy(m: &mut IntMat, dst: usize, src: usize, f: &BigInt) {
    if f.is_zero() {
        return;
    }
    let (a, b) = if dst < src {
        let (lo, hi) = m.split_at_mut(src);
        (&mut lo[dst], &hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(dst);
        (&mut hi[0], &lo[src])
    };
    for (x, y) in a.iter_mut().zip(b.iter()) {
        *x -= f * y;
    }
}

fn col_axpy(m: &mut IntMat, dst: usize, src: usize, f: &BigInt) {
    if f.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        let s = row[src].clone();
        row[dst] -= f * s;
    }
}

fn col_swap(m: &mut IntMat, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

/// Smith normal form of an integer matrix.
///
/// Entries must be integers; the result satisfies `d_1 | d_2 | ...` with
/// all divisors nonnegative.
pub fn smith_normal_form(m: &RationalMatrix) -> Result<SmithForm> {
    let mut a = m.to_integer_rows().ok_or_else(|| Error::Invalid("Smith form needs integer entries".into()))?;
    let rows = m.rows();
    let cols = m.cols();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let k = rows.min(cols);
    let mut t = 0;
    while t < k {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        u.swap(t, bi);
        col_swap(&mut a, t, bj);
        col_swap(&mut v, t, bj);

        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                row_axpy(&mut a, i, t, &q);
                row_axpy(&mut u, i, t, &q);
                if !a[i][t].is_zero() {
                    a.swap(t, i);
                    u.swap(t, i);
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                col_axpy(&mut a, j, t, &q);
                col_axpy(&mut v, j, t, &q);
                if !a[t][j].is_zero() {
                    col_swap(&mut a, t, j);
                    col_swap(&mut v, t, j);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // divisibility of the trailing block by the pivot
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&a[i][j] % &a[t][t]).is_zero()));
            match bad {
                Some(i) => {
                    row_axpy(&mut a, t, i, &-BigInt::one());
                    row_axpy(&mut u, t, i, &-BigInt::one());
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
        t += 1;
    }
    let divisors = (0..k).map(|i| a[i][i].clone()).collect();
    Ok(SmithForm {
        divisors,
        u: RationalMatrix::from_integer_rows(&u, rows),
        v: RationalMatrix::from_integer_rows(&v, cols),
    })
}

/// Column-style Hermite normal form of an integer matrix.
///
/// Returns the nonzero columns of a lower echelon basis of the column lattice,
/// pivots positive and entries left of each pivot reduced into `[0, pivot)`.
pub fn hermite_columns(m: &[Vec<BigInt>], rows: usize) -> Vec<Vec<BigInt>> {
    let mut cols: Vec<Vec<BigInt>> = if rows == 0 {
        Vec::new()
    } else {
        (0..m[0].len()).map(|j| (0..rows).map(|i| m[i][j].clone()).collect()).collect()
    };
    let mut k = 0;
    for i in 0..rows {
        if k == cols.len() {
            break;
        }
        // euclid on row i over columns k..
        loop {
            let mut best: Option<usize> = None;
            for (j, col) in cols.iter().enumerate().skip(k) {
                if !col[i].is_zero() && best.is_none_or(|b| col[i].abs() < cols[b][i].abs()) {
                    best = Some(j);
                }
            }
            let Some(b) = best else { break };
            cols.swap(k, b);
            let mut done = true;
            for j in k + 1..cols.len() {
                if cols[j][i].is_zero() {
                    continue;
                }
                let q = cols[j][i].div_floor(&cols[k][i]);
                let pivot = cols[k].clone();
                for (x, y) in cols[j].iter_mut().zip(pivot.iter()) {
                    *x -= &q * y;
                }
                if !cols[j][i].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if k < cols.len() && !cols[k][i].is_zero() {
            if cols[k][i].is_negative() {
                for x in cols[k].iter_mut() {
                    *x = -x.clone();
                }
            }
            let pivot = cols[k].clone();
            for col in cols.iter_mut().take(k) {
                let q = col[i].div_floor(&pivot[i]);
                if !q.is_zero() {
                    for (x, y) in col.iter_mut().zip(pivot.iter()) {
                        *x -= &q * y;
                    }
                }
            }
            k += 1;
        }
    }
    cols.truncate(k);
    cols
}
