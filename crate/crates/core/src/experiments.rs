//! The `s = t` identity, the sublattice construction `M^(n)` with its height
//! invariance audit, and conductor bookkeeping for `n(M)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::ball::Real;
use crate::cmatrix::CMatrix;
use crate::error::{Error, Result};
use crate::fl::{check_strong_divisibility, FilPhiModule};
use crate::hodge::rank_threshold;
use crate::lines::metrized::pow_rational;
use crate::lines::{
    local_kernel_mod, local_kernel_of_coords, smith_normal_form, valuation, LatticeBasis, LocalLattice, RationalMatrix,
};
use crate::motive::{global_lattice, height, lattice_exponents, HeightOptions, LocalDatum, MotiveData, MotiveType};

pub fn s_invariant(t: &MotiveType) -> i64 {
    t.s()
}

pub fn t_invariant(t: &MotiveType) -> BigRational {
    t.t()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SEqualsT {
    pub s: i64,
    pub t: BigRational,
    /// `s - t`.
    pub defect: BigRational,
    pub pass: bool,
}

pub fn check_s_equals_t(t: &MotiveType) -> SEqualsT {
    let s = t.s();
    let tt = t.t();
    let defect = BigRational::from_integer(BigInt::from(s)) - &tt;
    SEqualsT { s, t: tt, pass: defect.is_zero(), defect }
}

/// A quotient `T_p → U` of rank `k`, given in de Rham and Betti coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientSpec {
    pub p: u64,
    pub n: u32,
    /// `k × rank` map on de Rham coordinates.
    pub q_dr: RationalMatrix,
    /// `k × rank` map on Betti coordinates.
    pub q_b: RationalMatrix,
    /// Frobenius of `U`.
    pub phi_u: RationalMatrix,
    /// Generators of `U^i` for `a < i < b`.
    pub u_filtration: BTreeMap<i64, RationalMatrix>,
}

impl QuotientSpec {
    pub fn k(&self) -> usize {
        self.q_dr.rows()
    }

    pub fn with_exponent(&self, n: u32) -> QuotientSpec {
        QuotientSpec { n, ..self.clone() }
    }

    /// The same quotient seen from `M^(n)`, whose Betti lattice has basis
    /// `betti_basis` in the old coordinates.
    pub fn after_step(&self, betti_basis: &RationalMatrix) -> QuotientSpec {
        let pn = BigRational::from_integer(BigInt::from(self.p).pow(self.n)).recip();
        QuotientSpec { q_dr: self.q_dr.scale(&pn), q_b: self.q_b.mul(betti_basis).scale(&pn), ..self.clone() }
    }
}

/// The quotient module `U`, checked against the motive.
pub fn check_spec(m: &MotiveData, spec: &QuotientSpec, prec: u32) -> Result<FilPhiModule> {
    let bad = |detail: String| Error::IncompatibleSpec { detail };
    let n = m.rank();
    let k = spec.k();
    let p = spec.p;
    if spec.q_dr.cols() != n || spec.q_b.cols() != n || spec.q_b.rows() != k {
        return Err(bad(format!("quotient maps must be {k} x {n}")));
    }
    if k == 0 || k > n {
        return Err(bad(format!("quotient rank {k} is out of range")));
    }
    let Some(LocalDatum::Fl(fm)) = m.local.get(&p) else {
        return Err(bad(format!("no Fontaine–Laffaille module at p = {p}")));
    };
    let (a, b) = m.window();
    let u = FilPhiModule::new(p, &RationalMatrix::identity(k), spec.phi_u.clone(), (a, b), &spec.u_filtration)
        .map_err(|e| bad(format!("quotient module: {e}")))?;
    if !check_strong_divisibility(&u).map_err(|e| bad(format!("quotient module: {e}")))?.pass {
        return Err(bad("quotient module is not strongly divisible".into()));
    }
    for i in a..b {
        let image = fm.step(i).image(&spec.q_dr);
        if image != *u.step(i) {
            return Err(bad(format!("q_dR does not map D^{i} onto U^{i}")));
        }
    }
    if spec.q_dr.mul(fm.phi()) != spec.phi_u.mul(&spec.q_dr) {
        return Err(bad("q_dR does not commute with Frobenius".into()));
    }
    let qb = LocalLattice::standard(p, n).image(&spec.q_b);
    if qb != LocalLattice::standard(p, k) {
        return Err(bad(format!("q_B is not surjective at p = {p}")));
    }
    // q_B P must kill P^{-1}-preimages of ker q_dR
    let ker = spec.q_dr.kernel();
    if ker.cols() > 0 {
        let qb_c = CMatrix::from_rational(&spec.q_b, prec);
        let test = qb_c.mul(&m.period.with_precision(prec)).mul_rational(&ker);
        let scale = m.period.entries().iter().map(|c| c.upper_abs().to_f64()).fold(1.0, f64::max);
        if !test.is_negligible(rank_threshold(prec) * scale) {
            return Err(bad("q_B and q_dR are not compatible with the period matrix".into()));
        }
    }
    Ok(u)
}

/// Indices and the Betti basis produced by [`sublattice_motive`].
#[derive(Clone, Debug)]
pub struct SublatticeStep {
    pub motive: MotiveData,
    /// Basis of `H^(n)` in the old Betti coordinates.
    pub betti_basis: RationalMatrix,
    /// `[H_Z : H^(n)]`.
    pub betti_index: BigInt,
    /// `v_p [D : D^(n)]`.
    pub dr_index_valuation: i64,
}

/// `M^(n)`: `T^(n) = ker(T → U/p^n U)` on both the de Rham and Betti sides.
pub fn sublattice_motive(m: &MotiveData, spec: &QuotientSpec, prec: u32) -> Result<SublatticeStep> {
    let u = check_spec(m, spec, prec)?;
    let n_rank = m.rank();
    if spec.n == 0 {
        return Ok(SublatticeStep {
            motive: m.clone(),
            betti_basis: RationalMatrix::identity(n_rank),
            betti_index: BigInt::one(),
            dr_index_valuation: 0,
        });
    }
    let p = spec.p;
    let Some(LocalDatum::Fl(fm)) = m.local.get(&p) else { unreachable!("checked by check_spec") };
    let (a, b) = m.window();
    let d_new = local_kernel_mod(fm.lattice(), &spec.q_dr, spec.n)?;
    let mut filtration = BTreeMap::new();
    for i in a + 1..b {
        let di = fm.step(i);
        let ui = u.step(i);
        let step = if di.rank() == 0 {
            di.clone()
        } else {
            let coords = ui
                .coordinates(&spec.q_dr.mul(di.basis()))
                .ok_or_else(|| Error::IncompatibleSpec { detail: format!("q_dR(D^{i}) is not inside U^{i}") })?;
            local_kernel_of_coords(di, &coords, spec.n)?
        };
        filtration.insert(i, step.basis().clone());
    }
    let new_fm = FilPhiModule::new(p, d_new.basis(), fm.phi().clone(), (a, b), &filtration)
        .map_err(|e| Error::IncompatibleSpec { detail: format!("sublattice module: {e}") })?;
    if !check_strong_divisibility(&new_fm)?.pass {
        return Err(Error::StrongDivisibilityLost { p });
    }
    let h_new = LatticeBasis::standard(n_rank).kernel_mod(&spec.q_b, p, spec.n)?;
    let basis = h_new.basis().clone();
    let betti_index = h_new.covolume();
    debug_assert!(betti_index.is_integer());
    let binv = basis.inverse()?;
    let period = CMatrix::from_rational(&binv, prec).mul(&m.period.with_precision(prec));
    let mut local = m.local.clone();
    local.insert(p, LocalDatum::Fl(new_fm));
    let dr_index_valuation = d_new.relative_valuation(fm.lattice())?;
    let motive = MotiveData::new(m.mtype.clone(), period, local, m.bad_primes.clone())?;
    Ok(SublatticeStep { motive, betti_basis: basis, betti_index: betti_index.to_integer(), dr_index_valuation })
}

/// Type of the quotient `U` determined by its filtration.
pub fn quotient_type(m: &MotiveData, spec: &QuotientSpec) -> Result<MotiveType> {
    let (a, b) = m.window();
    let u =
        FilPhiModule::new(spec.p, &RationalMatrix::identity(spec.k()), spec.phi_u.clone(), (a, b), &spec.u_filtration)?;
    let h = (a..b).map(|r| (r, u.step(r).rank() - u.step(r + 1).rank())).collect();
    MotiveType::new(m.mtype.w, h, (a, b))
}

/// Outcome of the invariance audit.
#[derive(Clone, Debug)]
pub struct InvarianceReport {
    pub p: u64,
    pub n: u32,
    pub k: usize,
    pub s_u: i64,
    pub t_u: BigRational,
    pub lattice_ratio: BigRational,
    pub expected_ratio: BigRational,
    pub lattice_ok: bool,
    pub betti_index: BigInt,
    pub expected_index: BigInt,
    /// `[H_Z : H^(n)]^w == p^{2 n t(U)}`.
    pub betti_ok: bool,
    pub h_before: Real,
    pub h_after: Real,
    pub heights_ok: bool,
}

impl InvarianceReport {
    pub fn pass(&self) -> bool {
        self.lattice_ok && self.betti_ok && self.heights_ok
    }
}

/// Scalar of `L(M)_Z` relative to the reference generator.
pub fn lattice_scalar(m: &MotiveData, opts: &HeightOptions) -> Result<BigRational> {
    let mut q = BigRational::one();
    for (r, e) in lattice_exponents(m.window(), opts.formula) {
        q *= pow_rational(&global_lattice(m, r)?, e);
    }
    Ok(q)
}

pub fn invariance_experiment(m: &MotiveData, spec: &QuotientSpec, opts: &HeightOptions) -> Result<InvarianceReport> {
    let step = sublattice_motive(m, spec, opts.precision)?;
    let ut = quotient_type(m, spec)?;
    let s_u = ut.s();
    let t_u = ut.t();
    let p = BigInt::from(spec.p);
    let before = lattice_scalar(m, opts)?;
    let after = lattice_scalar(&step.motive, opts)?;
    let lattice_ratio = &after / &before;
    let expected_ratio = pow_rational(&BigRational::from_integer(p.clone()), spec.n as i64 * s_u);
    let k = spec.k();
    let expected_index = p.pow(spec.n * k as u32);
    // index^w against p^{2 n t}, both as rationals
    let w = m.mtype.w;
    let lhs = pow_rational(&BigRational::from_integer(step.betti_index.clone()), w);
    let two_nt = BigRational::from_integer(BigInt::from(2 * spec.n)) * &t_u;
    let betti_ok = two_nt.is_integer()
        && {
            let e: i64 = i64::try_from(two_nt.to_integer()).expect("small exponent");
            lhs == pow_rational(&BigRational::from_integer(p.clone()), e)
        }
        && step.betti_index == expected_index;
    let h_before = height(m, opts)?.h;
    let h_after = height(&step.motive, opts)?.h;
    let heights_ok = h_before.overlaps(&h_after);
    Ok(InvarianceReport {
        p: spec.p,
        n: spec.n,
        k,
        s_u,
        t_u,
        lattice_ok: lattice_ratio == expected_ratio,
        lattice_ratio,
        expected_ratio,
        betti_index: step.betti_index,
        expected_index,
        betti_ok,
        h_before,
        h_after,
        heights_ok,
    })
}

/// `n(M) = Σ_{p bad} log p`.
pub fn n_of_m(m: &MotiveData, prec: u32) -> Real {
    let mut acc = Real::zero(prec);
    for &p in &m.bad_primes {
        acc = acc.add(&Real::from_i64(p as i64, prec).log().expect("primes are positive"));
    }
    acc
}

#[derive(Clone, Debug)]
pub struct AbcRow {
    pub id: String,
    pub window: (i64, i64),
    pub h: Result<Real>,
    pub n: Real,
}

/// One row per motive, in input order. Over `Q` the discriminant term is
/// `log |D_Q| = 0` and the degree is 1; nothing about the inequality is asserted.
pub fn abc_report(batch: &[(String, MotiveData)], opts: &HeightOptions) -> Vec<AbcRow> {
    batch
        .iter()
        .map(|(id, m)| AbcRow {
            id: id.clone(),
            window: m.window(),
            h: height(m, opts).map(|r| r.h),
            n: n_of_m(m, opts.precision),
        })
        .collect()
}

/// `v_p` of the elementary divisors of an integer matrix, for diagnostics.
pub fn elementary_valuations(m: &RationalMatrix, p: u64) -> Result<Vec<i64>> {
    let s = smith_normal_form(m)?;
    Ok(s.divisors
        .iter()
        .filter(|d| !d.is_zero())
        .map(|d| valuation(&BigRational::from_integer(d.clone()), p).unwrap())
        .collect())
}
