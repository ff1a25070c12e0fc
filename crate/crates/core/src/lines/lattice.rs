//! Lattices in `Q^n`, globally (over `Z`) and locally at a prime (over `Z_(p)`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::matrix::{valuation, valuation_int, RationalMatrix};
use super::snf::{hermite_columns, smith_normal_form};
use crate::error::{Error, Result};

/// A `Z`-lattice in `Q^n`, stored as its canonical Hermite basis (columns).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeBasis {
    basis: RationalMatrix,
}

impl LatticeBasis {
    /// Lattice generated by the columns of `gens` (dependent generators allowed).
    pub fn new(gens: &RationalMatrix) -> LatticeBasis {
        let n = gens.rows();
        let d = gens.denominator();
        let scaled = gens.scale(&BigRational::from_integer(d.clone()));
        let ints = scaled.to_integer_rows().expect("denominators cleared");
        let cols = hermite_columns(&ints, n);
        let dq = BigRational::from_integer(d);
        let basis = RationalMatrix::from_fn(n, cols.len(), |i, j| BigRational::from_integer(cols[j][i].clone()) / &dq);
        LatticeBasis { basis }
    }

    /// The standard lattice `Z^n`.
    pub fn standard(n: usize) -> LatticeBasis {
        LatticeBasis::new(&RationalMatrix::identity(n))
    }

    /// Full-rank lattice from a basis matrix, rejecting singular input.
    pub fn full_rank(basis: &RationalMatrix) -> Result<LatticeBasis> {
        if !basis.is_square() || basis.det().is_zero() {
            return Err(Error::Singular("lattice basis must be square with nonzero determinant".into()));
        }
        Ok(LatticeBasis::new(basis))
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &RationalMatrix {
        &self.basis
    }

    pub fn localize(&self, p: u64) -> LocalLattice {
        LocalLattice::new(p, &self.basis)
    }

    /// Covolume of a full-rank lattice, `|det basis|`.
    pub fn covolume(&self) -> BigRational {
        self.basis.det().abs()
    }

    /// `{x in self : q x ∈ p^n Z^k}` for an integer matrix `q` surjective over `Z`.
    pub fn kernel_mod(&self, q: &RationalMatrix, p: u64, n: u32) -> Result<LatticeBasis> {
        let coords = q.mul(&self.basis);
        if !coords.is_integral() {
            return Err(Error::Invalid("quotient map is not integral on the lattice".into()));
        }
        let s = smith_normal_form(&coords)?;
        // coords = u^-1 diag v^-1; condition on z = v^-1 y
        let pn = BigInt::from(p).pow(n);
        let m = coords.cols();
        let mut scale = vec![BigRational::one(); m];
        for (j, d) in s.divisors.iter().enumerate() {
            if d.is_zero() {
                continue;
            }
            // d * z_j ≡ 0 mod p^n  <=>  z_j ∈ (p^n / gcd(p^n, d)) Z
            let g = num_integer::Integer::gcd(d, &pn);
            scale[j] = BigRational::from_integer(&pn / g);
        }
        // y = v z, so the kernel basis is v * diag(scale)
        let gens = self.basis.mul(&s.v).mul(&RationalMatrix::diagonal(&scale));
        Ok(LatticeBasis::new(&gens))
    }
}

/// A `Z_(p)`-lattice in `Q_p^n` with rational generators.
///
/// Canonical form: lower column echelon, pivots `p^e`, entries left of a
/// pivot reduced to integers in `[0, p^e)`. Equality of the canonical forms
/// is equality of lattices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalLattice {
    p: u64,
    basis: RationalMatrix,
}

fn p_power(p: u64, e: i64) -> BigRational {
    let pb = BigInt::from(p);
    if e >= 0 {
        BigRational::from_integer(pb.pow(e as u32))
    } else {
        BigRational::new(BigInt::one(), pb.pow((-e) as u32))
    }
}

/// Representative in `[0, p^e)` of a p-integral rational.
fn residue(x: &BigRational, p: u64, e: i64) -> BigInt {
    let modulus = BigInt::from(p).pow(e as u32);
    let den = x.denom().clone() % &modulus;
    let inv = den.modinv(&modulus).expect("denominator is a p-unit");
    let r = (x.numer() * inv) % &modulus;
    if r.is_negative() {
        r + modulus
    } else {
        r
    }
}

/// Representative in `Z[1/p] ∩ [0, 1)` of `y` modulo `Z_p`.
fn fractional_part(y: &BigRational, p: u64) -> BigRational {
    match valuation(y, p) {
        Some(v) if v < 0 => {
            let k = -v;
            BigRational::from_integer(residue(&(y * p_power(p, k)), p, k)) / p_power(p, k)
        }
        _ => BigRational::zero(),
    }
}

impl LocalLattice {
    pub fn new(p: u64, gens: &RationalMatrix) -> LocalLattice {
        let n = gens.rows();
        let mut cols: Vec<Vec<BigRational>> = gens.columns();
        let mut k = 0;
        for i in 0..n {
            if k == cols.len() {
                break;
            }
            let best = (k..cols.len())
                .filter(|&j| !cols[j][i].is_zero())
                .min_by_key(|&j| valuation(&cols[j][i], p).expect("nonzero"));
            let Some(b) = best else { continue };
            cols.swap(k, b);
            let e = valuation(&cols[k][i], p).expect("nonzero");
            let unit = &cols[k][i] / p_power(p, e);
            for x in cols[k].iter_mut() {
                *x = &*x / &unit;
            }
            let pivot = cols[k].clone();
            let pe = p_power(p, e);
            for col in cols.iter_mut().skip(k + 1) {
                if col[i].is_zero() {
                    continue;
                }
                let f = &col[i] / &pe;
                for (x, y) in col.iter_mut().zip(pivot.iter()) {
                    *x -= &f * y;
                }
            }
            for col in cols.iter_mut().take(k) {
                if col[i].is_zero() {
                    continue;
                }
                let y = &col[i] / &pe;
                let t = &y - fractional_part(&y, p);
                for (x, y) in col.iter_mut().zip(pivot.iter()) {
                    *x -= &t * y;
                }
            }
            k += 1;
        }
        cols.truncate(k);
        LocalLattice { p, basis: RationalMatrix::from_columns(n, &cols).expect("consistent lengths") }
    }

    pub fn zero(p: u64, n: usize) -> LocalLattice {
        LocalLattice { p, basis: RationalMatrix::zeros(n, 0) }
    }

    pub fn standard(p: u64, n: usize) -> LocalLattice {
        LocalLattice::new(p, &RationalMatrix::identity(n))
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &RationalMatrix {
        &self.basis
    }

    pub fn sum(&self, other: &LocalLattice) -> LocalLattice {
        LocalLattice::new(self.p, &self.basis.hstack(&other.basis))
    }

    /// Image under a linear map given in ambient coordinates.
    pub fn image(&self, m: &RationalMatrix) -> LocalLattice {
        LocalLattice::new(self.p, &m.mul(&self.basis))
    }

    pub fn scale(&self, q: &BigRational) -> LocalLattice {
        LocalLattice::new(self.p, &self.basis.scale(q))
    }

    /// Coordinates of `v` (columns) in this lattice's basis, if in the span.
    pub fn coordinates(&self, v: &RationalMatrix) -> Option<RationalMatrix> {
        if self.rank() == 0 {
            return if v.is_zero() { Some(RationalMatrix::zeros(0, v.cols())) } else { None };
        }
        self.basis.solve(v)
    }

    /// Whether every column of `v` lies in the lattice.
    pub fn contains_vectors(&self, v: &RationalMatrix) -> bool {
        match self.coordinates(v) {
            Some(c) => c.is_p_integral(self.p),
            None => false,
        }
    }

    pub fn contains(&self, inner: &LocalLattice) -> bool {
        self.contains_vectors(&inner.basis)
    }

    /// Whether `inner ⊆ self` with torsion-free quotient.
    pub fn is_saturated_sublattice(&self, inner: &LocalLattice) -> bool {
        if !self.contains(inner) {
            return false;
        }
        saturate_in(self, &inner.basis) == *inner
    }

    /// Signed `v_p(det)` of `self` relative to `reference` (same span).
    pub fn relative_valuation(&self, reference: &LocalLattice) -> Result<i64> {
        if self.rank() != reference.rank() {
            return Err(Error::RankMismatch { outer: reference.rank(), inner: self.rank() });
        }
        if self.rank() == 0 {
            return Ok(0);
        }
        let x = reference
            .coordinates(&self.basis)
            .ok_or_else(|| Error::Dimension("lattices span different subspaces".into()))?;
        let d = x.det();
        valuation(&d, self.p).ok_or_else(|| Error::Singular("degenerate lattice".into()))
    }
}

/// Saturation of the span of `gens` inside the lattice `outer`.
pub fn saturate_in(outer: &LocalLattice, gens: &RationalMatrix) -> LocalLattice {
    let p = outer.p;
    let n = outer.ambient_dim();
    if gens.cols() == 0 || gens.is_zero() {
        return LocalLattice::zero(p, n);
    }
    let coords = outer.coordinates(gens).expect("generators lie in the span of the outer lattice");
    let d = coords.denominator();
    let ints = coords.scale(&BigRational::from_integer(d));
    let s = smith_normal_form(&ints).expect("integral");
    let r = s.rank();
    let uinv = s.u.inverse().expect("unimodular");
    let sat = uinv.select_columns(&(0..r).collect::<Vec<_>>());
    LocalLattice::new(p, &outer.basis.mul(&sat))
}

/// `v_p([outer : inner])` for `inner ⊆ outer` at `p`.
pub fn quotient_lattice_valuation(outer: &LatticeBasis, inner: &LatticeBasis, p: u64) -> Result<i64> {
    let o = outer.localize(p);
    let i = inner.localize(p);
    if o.rank() != i.rank() {
        return Err(Error::RankMismatch { outer: o.rank(), inner: i.rank() });
    }
    if !o.contains(&i) {
        return Err(Error::NotSublattice { p });
    }
    i.relative_valuation(&o)
}

/// `{x in lattice : q x ∈ p^n Z_(p)^k}`; `q` must be p-integral on the lattice.
pub fn local_kernel_mod(lattice: &LocalLattice, q: &RationalMatrix, n: u32) -> Result<LocalLattice> {
    if lattice.rank() == 0 {
        return Ok(lattice.clone());
    }
    local_kernel_of_coords(lattice, &q.mul(&lattice.basis), n)
}

/// `{Σ y_j b_j : coords · y ∈ p^n Z_(p)^k}` for the basis `b_j` of `lattice`.
pub fn local_kernel_of_coords(lattice: &LocalLattice, coords: &RationalMatrix, n: u32) -> Result<LocalLattice> {
    let p = lattice.p;
    if lattice.rank() == 0 {
        return Ok(lattice.clone());
    }
    if !coords.is_p_integral(p) {
        return Err(Error::IncompatibleSpec {
            detail: format!("quotient map is not p-integral on the lattice at p = {p}"),
        });
    }
    // a p-unit multiple does not change the condition
    let d = coords.denominator();
    let ints = coords.scale(&BigRational::from_integer(d));
    let s = smith_normal_form(&ints)?;
    let m = coords.cols();
    let mut scale = vec![BigRational::one(); m];
    for (j, dj) in s.divisors.iter().enumerate() {
        if dj.is_zero() {
            continue;
        }
        let v = valuation_int(dj, p).expect("nonzero");
        let need = (n as i64 - v).max(0);
        scale[j] = p_power(p, need);
    }
    let gens = lattice.basis.mul(&s.v).mul(&RationalMatrix::diagonal(&scale));
    Ok(LocalLattice::new(p, &gens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lines::matrix::{rat, ratio};

    fn m(rows: &[&[i64]]) -> RationalMatrix {
        RationalMatrix::from_i64_rows(rows)
    }

    #[test]
    fn equal_lattices_have_zero_valuation() {
        let z2 = LatticeBasis::standard(2);
        assert_eq!(quotient_lattice_valuation(&z2, &z2, 5).unwrap(), 0);
    }

    #[test]
    fn index_five() {
        let z2 = LatticeBasis::standard(2);
        let inner = LatticeBasis::new(&m(&[&[5, 0], &[0, 1]]));
        assert_eq!(quotient_lattice_valuation(&z2, &inner, 5).unwrap(), 1);
    }

    #[test]
    fn determinant_six() {
        let z2 = LatticeBasis::standard(2);
        let inner = LatticeBasis::new(&m(&[&[2, 1], &[0, 3]]));
        assert_eq!(quotient_lattice_valuation(&z2, &inner, 2).unwrap(), 1);
        assert_eq!(quotient_lattice_valuation(&z2, &inner, 3).unwrap(), 1);
        assert_eq!(quotient_lattice_valuation(&z2, &inner, 5).unwrap(), 0);
    }

    #[test]
    fn not_a_sublattice() {
        let z2 = LatticeBasis::standard(2);
        let outer = LatticeBasis::new(&m(&[&[3, 0], &[0, 1]]));
        assert_eq!(quotient_lattice_valuation(&outer, &z2, 3), Err(Error::NotSublattice { p: 3 }));
        // prime-to-p index is invisible
        assert_eq!(quotient_lattice_valuation(&outer, &z2, 2).unwrap(), 0);
    }

    #[test]
    fn local_canonical_form_ignores_units() {
        let a = LocalLattice::new(3, &m(&[&[2, 0], &[0, 9]]));
        let b = LocalLattice::new(3, &m(&[&[1, 0], &[0, 9]]));
        assert_eq!(a, b);
        let c = LocalLattice::new(3, &m(&[&[1, 1], &[0, 9]]));
        assert_eq!(a, c);
        let d = LocalLattice::new(3, &m(&[&[1, 1], &[0, 3]]));
        assert_ne!(a, d);
    }

    #[test]
    fn saturation() {
        let z2 = LocalLattice::standard(5, 2);
        let line = saturate_in(&z2, &m(&[&[5], &[10]]));
        assert_eq!(line, LocalLattice::new(5, &m(&[&[1], &[2]])));
        assert!(z2.is_saturated_sublattice(&line));
        assert!(!z2.is_saturated_sublattice(&LocalLattice::new(5, &m(&[&[5], &[10]]))));
    }

    #[test]
    fn kernels() {
        let z3 = LatticeBasis::standard(3);
        let q = m(&[&[1, 1, 0]]);
        let k = z3.kernel_mod(&q, 3, 2).unwrap();
        assert_eq!(k.covolume(), rat(9));
        let lk = local_kernel_mod(&z3.localize(3), &q, 2).unwrap();
        assert_eq!(lk, k.localize(3));
        let half = LocalLattice::new(2, &RationalMatrix::scalar(1, &ratio(1, 2)));
        assert_eq!(half.relative_valuation(&LocalLattice::standard(2, 1)).unwrap(), -1);
    }
}
