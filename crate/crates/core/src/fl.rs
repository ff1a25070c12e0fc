//! Fontaine–Laffaille modules over `Z_p` and the local integral structures
//! they define on determinant lines.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lines::{is_prime, saturate_in, smith_normal_form, valuation, LocalLattice, RationalMatrix};

/// A lattice `D ⊂ Q_p^n` with Frobenius `φ` and a descending filtration by
/// sublattices `D^i`, with `D^i = D` for `i ≤ a` and `D^i = 0` for `i ≥ b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilPhiModule {
    p: u64,
    lattice: LocalLattice,
    phi: RationalMatrix,
    a: i64,
    /// `D^{a+t}` for `t = 0..=b-a`.
    steps: Vec<LocalLattice>,
}

impl FilPhiModule {
    /// `filtration` gives generators of `D^i` for `a < i < b`; missing indices
    /// inherit the next step up.
    pub fn new(
        p: u64,
        lattice: &RationalMatrix,
        phi: RationalMatrix,
        window: (i64, i64),
        filtration: &BTreeMap<i64, RationalMatrix>,
    ) -> Result<FilPhiModule> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let n = lattice.rows();
        if !lattice.is_square() || lattice.det().is_zero() {
            return Err(Error::Dimension("lattice basis must be square and nonsingular".into()));
        }
        if phi.rows() != n || phi.cols() != n || phi.det().is_zero() {
            return Err(Error::Dimension("phi must be an invertible n x n matrix".into()));
        }
        let (a, b) = window;
        if a >= b && n > 0 {
            return Err(Error::Invalid(format!("empty filtration window [{a}, {b})")));
        }
        for (&i, g) in filtration {
            if i <= a || i >= b {
                return Err(Error::Invalid(format!("filtration index {i} lies outside the open window ({a}, {b})")));
            }
            if g.rows() != n {
                return Err(Error::Dimension(format!("D^{i} generators have {} rows, expected {n}", g.rows())));
            }
        }
        let d = LocalLattice::new(p, lattice);
        let mut steps = vec![LocalLattice::zero(p, n); (b - a + 1) as usize];
        steps[0] = d.clone();
        let mut current = LocalLattice::zero(p, n);
        for i in (a + 1..b).rev() {
            if let Some(g) = filtration.get(&i) {
                current = LocalLattice::new(p, g);
            }
            steps[(i - a) as usize] = current.clone();
        }
        let m = FilPhiModule { p, lattice: d, phi, a, steps };
        m.check_structure()?;
        Ok(m)
    }

    fn check_structure(&self) -> Result<()> {
        for (t, pair) in self.steps.windows(2).enumerate() {
            let index = self.a + t as i64 + 1;
            if !pair[0].contains(&pair[1]) {
                return Err(Error::NotNested { index });
            }
            if !self.lattice.is_saturated_sublattice(&pair[1]) {
                return Err(Error::NotSaturated { index, p: self.p });
            }
        }
        Ok(())
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn rank(&self) -> usize {
        self.lattice.ambient_dim()
    }

    pub fn lattice(&self) -> &LocalLattice {
        &self.lattice
    }

    pub fn phi(&self) -> &RationalMatrix {
        &self.phi
    }

    pub fn window(&self) -> (i64, i64) {
        (self.a, self.a + self.steps.len() as i64 - 1)
    }

    /// `D^i` for any integer `i`.
    pub fn step(&self, i: i64) -> &LocalLattice {
        let t = (i - self.a).clamp(0, self.steps.len() as i64 - 1);
        &self.steps[t as usize]
    }

    /// Interior filtration steps, as accepted by [`FilPhiModule::new`].
    pub fn interior_filtration(&self) -> BTreeMap<i64, RationalMatrix> {
        let (a, b) = self.window();
        (a + 1..b).map(|i| (i, self.step(i).basis().clone())).collect()
    }

    /// The same module written in new coordinates `x ↦ g x`.
    pub fn transformed(&self, g: &RationalMatrix) -> Result<FilPhiModule> {
        let ginv = g.inverse()?;
        let filtration = self.interior_filtration().into_iter().map(|(i, m)| (i, g.mul(&m))).collect();
        FilPhiModule::new(self.p, &g.mul(self.lattice.basis()), g.mul(&self.phi).mul(&ginv), self.window(), &filtration)
    }

    /// Block direct sum; both modules must share `p` and the window.
    pub fn direct_sum(&self, other: &FilPhiModule) -> Result<FilPhiModule> {
        if self.p != other.p {
            return Err(Error::Invalid("direct sum of modules at different primes".into()));
        }
        if self.window() != other.window() {
            return Err(Error::WindowMismatch(self.window(), other.window()));
        }
        let (a, b) = self.window();
        let filtration = (a + 1..b).map(|i| (i, self.step(i).basis().block_diag(other.step(i).basis()))).collect();
        FilPhiModule::new(
            self.p,
            &self.lattice.basis().block_diag(other.lattice.basis()),
            self.phi.block_diag(&other.phi),
            self.window(),
            &filtration,
        )
    }

    fn check_window(&self) -> Result<()> {
        let (a, b) = self.window();
        let len = b - a;
        if len > self.p as i64 - 1 {
            return Err(Error::WindowTooWide { a, b, len, p: self.p });
        }
        Ok(())
    }

    /// Full validation: window length and strong divisibility.
    pub fn validate(&self) -> Result<()> {
        let report = check_strong_divisibility(self)?;
        if !report.pass {
            return Err(Error::StrongDivisibility { p: self.p });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrongDivisibilityReport {
    pub pass: bool,
    /// The lattice `Σ_i p^{-i} φ D^i`.
    pub witness: LocalLattice,
}

fn p_power(p: u64, e: i64) -> BigRational {
    let pb = BigInt::from(p);
    if e >= 0 {
        BigRational::from_integer(pb.pow(e as u32))
    } else {
        BigRational::new(BigInt::one(), pb.pow((-e) as u32))
    }
}

pub fn check_strong_divisibility(m: &FilPhiModule) -> Result<StrongDivisibilityReport> {
    m.check_window()?;
    let (a, b) = m.window();
    let n = m.rank();
    let mut gens = RationalMatrix::zeros(n, 0);
    for i in a..b {
        let di = m.step(i);
        if di.rank() == 0 {
            continue;
        }
        gens = gens.hstack(&m.phi.mul(di.basis()).scale(&p_power(m.p, -i)));
    }
    let witness = LocalLattice::new(m.p, &gens);
    Ok(StrongDivisibilityReport { pass: witness == m.lattice, witness })
}

/// `D(r)^i = D^{i+r}`, `φ(r) = p^{-r} φ`.
pub fn tate_twist(m: &FilPhiModule, r: i64) -> Result<FilPhiModule> {
    let (a, b) = m.window();
    let twisted = FilPhiModule {
        p: m.p,
        lattice: m.lattice.clone(),
        phi: m.phi.scale(&p_power(m.p, -r)),
        a: a - r,
        steps: m.steps.clone(),
    };
    twisted.check_window()?;
    debug_assert_eq!(twisted.window(), (a - r, b - r));
    debug_assert_eq!(check_strong_divisibility(m)?.pass, check_strong_divisibility(&twisted)?.pass);
    Ok(twisted)
}

/// Coordinates of `(1 - φ)` applied to `D^0`, in the basis of `D`.
fn one_minus_phi_on_d0(m: &FilPhiModule) -> Result<RationalMatrix> {
    let n = m.rank();
    let d0 = m.step(0);
    let map = RationalMatrix::identity(n).sub(&m.phi).mul(d0.basis());
    m.lattice.coordinates(&map).ok_or_else(|| Error::Dimension("D is not full rank".into()))
}

/// `H^0 = ker(1 - φ) ∩ D^0`, a saturated sublattice of `D^0`.
pub fn h0(m: &FilPhiModule) -> Result<LocalLattice> {
    let d0 = m.step(0);
    if d0.rank() == 0 {
        return Ok(d0.clone());
    }
    let coords = one_minus_phi_on_d0(m)?;
    let k = coords.kernel();
    Ok(saturate_in(d0, &d0.basis().mul(&k)))
}

/// Structure of `H^1_cf = coker(1 - φ : D^0 → D)` over `Z_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct H1cf {
    pub free_rank: usize,
    /// Orders `p^e` (with `e > 0`) of the cyclic torsion factors.
    pub torsion: Vec<BigInt>,
}

pub fn h1cf(m: &FilPhiModule) -> Result<H1cf> {
    let n = m.rank();
    let d0 = m.step(0);
    if d0.rank() == 0 {
        return Ok(H1cf { free_rank: n, torsion: vec![] });
    }
    let coords = one_minus_phi_on_d0(m)?;
    if !coords.is_p_integral(m.p) {
        return Err(Error::StrongDivisibility { p: m.p });
    }
    let d = coords.denominator();
    let ints = coords.scale(&BigRational::from_integer(d));
    let s = smith_normal_form(&ints)?;
    let rank = s.rank();
    let pb = BigInt::from(m.p);
    let torsion = s
        .divisors
        .iter()
        .filter(|x| !x.is_zero())
        .filter_map(|x| {
            let e = valuation(&BigRational::from_integer(x.clone()), m.p).expect("nonzero");
            (e > 0).then(|| pb.pow(e as u32))
        })
        .collect();
    Ok(H1cf { free_rank: n - rank, torsion })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    ComputedFromFl,
    ExplicitOverride,
    DefaultGood,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::ComputedFromFl => "fl",
            Provenance::ExplicitOverride => "override",
            Provenance::DefaultGood => "default",
        }
    }
}

/// Valuations `v(r)` of the local lattices `L_r(T_p)` against the reference
/// generators; constant beyond the stored range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalLatticeSpec {
    pub p: u64,
    pub values: BTreeMap<i64, i64>,
    pub provenance: Provenance,
}

impl LocalLatticeSpec {
    pub fn default_good(p: u64) -> LocalLatticeSpec {
        LocalLatticeSpec { p, values: BTreeMap::new(), provenance: Provenance::DefaultGood }
    }

    pub fn value(&self, r: i64) -> i64 {
        if let Some((_, &v)) = self.values.range(..=r).next_back() {
            return v;
        }
        self.values.values().next().copied().unwrap_or(0)
    }
}

/// `v(r) = v_p det(D/D^r)` for `r ∈ [a, b]`, against the standard lattice
/// and its saturated intersections with the filtration subspaces.
pub fn local_valuations(m: &FilPhiModule, window: (i64, i64)) -> Result<LocalLatticeSpec> {
    let n = m.rank();
    let reference = LocalLattice::standard(m.p, n);
    let vd = m.lattice.relative_valuation(&reference)?;
    let mut values = BTreeMap::new();
    for r in window.0..=window.1 {
        let dr = m.step(r);
        let vr = if dr.rank() == 0 {
            0
        } else {
            let sat = saturate_in(&reference, dr.basis());
            dr.relative_valuation(&sat)?
        };
        values.insert(r, vd - vr);
    }
    Ok(LocalLatticeSpec { p: m.p, values, provenance: Provenance::ComputedFromFl })
}

/// The unit object: `D = Z_p`, `φ = 1`, window `(0, 1)`.
pub fn trivial_module(p: u64) -> Result<FilPhiModule> {
    FilPhiModule::new(p, &RationalMatrix::identity(1), RationalMatrix::identity(1), (0, 1), &BTreeMap::new())
}
