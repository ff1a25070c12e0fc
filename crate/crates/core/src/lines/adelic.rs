//! Finitely supported valuation maps and the rational lattices they cut out.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

/// A finitely supported map `prime -> exponent`; zero exponents are dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ValuationMap {
    entries: BTreeMap<u64, i64>,
}

impl ValuationMap {
    pub fn new() -> ValuationMap {
        ValuationMap::default()
    }

    pub fn get(&self, p: u64) -> i64 {
        self.entries.get(&p).copied().unwrap_or(0)
    }

    pub fn set(&mut self, p: u64, v: i64) {
        if v == 0 {
            self.entries.remove(&p);
        } else {
            self.entries.insert(p, v);
        }
    }

    pub fn add_at(&mut self, p: u64, v: i64) {
        let cur = self.get(p);
        self.set(p, cur + v);
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.entries.iter().map(|(&p, &v)| (p, v))
    }

    /// Pointwise sum.
    pub fn plus(&self, other: &ValuationMap) -> ValuationMap {
        let mut out = self.clone();
        for (p, v) in other.iter() {
            out.add_at(p, v);
        }
        out
    }

    pub fn scaled(&self, k: i64) -> ValuationMap {
        let mut out = ValuationMap::new();
        for (p, v) in self.iter() {
            out.set(p, v * k);
        }
        out
    }
}

impl FromIterator<(u64, i64)> for ValuationMap {
    fn from_iter<I: IntoIterator<Item = (u64, i64)>>(iter: I) -> Self {
        let mut out = ValuationMap::new();
        for (p, v) in iter {
            out.add_at(p, v);
        }
        out
    }
}

/// The positive rational `∏ p^{v(p)}`.
pub fn intersect_adelic(v: &ValuationMap) -> BigRational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for (p, e) in v.iter() {
        let pp = BigInt::from(p).pow(e.unsigned_abs() as u32);
        if e > 0 {
            num *= pp;
        } else {
            den *= pp;
        }
    }
    BigRational::new(num, den)
}
