//! Realization data of a motive over `Q` and its height.
//!
//! The de Rham reference basis `e_1, ..., e_n` is adapted to the Hodge
//! filtration: the vectors are grouped in blocks of size `h(r)` in increasing
//! `r`, so `M^r` is spanned by the last `Σ_{i≥r} h(i)` of them. The period
//! matrix `P` has these vectors as columns in Betti coordinates, the Betti
//! lattice being the standard `Z^n`.
//!
//! The reference generator of `L(M)_Q = ⊗_r (det gr^r)^{⊗r}` is
//! `⊗_r (∧ block_r)^{⊗r}`; that of `L_r(M)_Q = det(M/M^r)` is the wedge of the
//! blocks below `r`. With `L_r(M)_Z = q_r · ref_r`, the windowed lattice
//! `⊗_{a<i<b} L_i^{-1} ⊗ L_b^{b-1}` is `q · ref` with
//! `q = q_b^{b-1} ∏_{a<i<b} q_i^{-1}`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::ball::{Complex, Real};
use crate::cmatrix::CMatrix;
use crate::error::{Error, Result};
use crate::fl::{check_strong_divisibility, local_valuations, FilPhiModule, LocalLatticeSpec, Provenance};
use crate::hodge::{line_metric, purity_check, HodgeStructure};
use crate::lines::metrized::pow_rational;
use crate::lines::{intersect_adelic, is_prime, valuation, MetrizedLine, RationalMatrix, ValuationMap};

/// Weight, Hodge numbers, and the window `(a, b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MotiveType {
    pub w: i64,
    pub h: BTreeMap<i64, usize>,
    pub window: (i64, i64),
}

impl MotiveType {
    pub fn new(w: i64, h: BTreeMap<i64, usize>, window: (i64, i64)) -> Result<MotiveType> {
        let (a, b) = window;
        if a > b {
            return Err(Error::Invalid(format!("window ({a}, {b}) has a > b")));
        }
        let h: BTreeMap<i64, usize> = h.into_iter().filter(|&(_, d)| d > 0).collect();
        if let Some((&r, _)) = h.iter().find(|(&r, _)| r < a || r >= b) {
            return Err(Error::Invalid(format!("h({r}) is nonzero outside the window [{a}, {b})")));
        }
        Ok(MotiveType { w, h, window })
    }

    pub fn rank(&self) -> usize {
        self.h.values().sum()
    }

    pub fn hodge_number(&self, r: i64) -> usize {
        self.h.get(&r).copied().unwrap_or(0)
    }

    /// `dim M^r`.
    pub fn filtration_dim(&self, r: i64) -> usize {
        self.h.range(r..).map(|(_, &d)| d).sum()
    }

    /// Indices of the reference vectors in block `r`.
    pub fn block(&self, r: i64) -> std::ops::Range<usize> {
        let start: usize = self.h.range(..r).map(|(_, &d)| d).sum();
        start..start + self.hodge_number(r)
    }

    /// `s = Σ r·h(r)`.
    pub fn s(&self) -> i64 {
        self.h.iter().map(|(&r, &d)| r * d as i64).sum()
    }

    /// `t = w·n/2`.
    pub fn t(&self) -> BigRational {
        BigRational::new(BigInt::from(self.w) * BigInt::from(self.rank()), BigInt::from(2))
    }
}

/// Local data at one prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalDatum {
    Fl(FilPhiModule),
    Override(LocalLatticeSpec),
}

#[derive(Clone, Debug)]
pub struct MotiveData {
    pub mtype: MotiveType,
    pub period: CMatrix,
    pub local: BTreeMap<u64, LocalDatum>,
    pub bad_primes: BTreeSet<u64>,
}

/// Which tensor expression is used for the lattice in `L(M)_Q`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LatticeFormula {
    /// `⊗_{a<i<b} L_i^{-1} ⊗ L_b^{b-1}`.
    #[default]
    Windowed,
    /// `⊗_{a≤r<b} (L_r^{-1} ⊗ L_{r+1})^{⊗r}` (experimental).
    Graded,
}

impl MotiveData {
    pub fn new(
        mtype: MotiveType,
        period: CMatrix,
        local: BTreeMap<u64, LocalDatum>,
        bad_primes: BTreeSet<u64>,
    ) -> Result<MotiveData> {
        let n = mtype.rank();
        if period.rows() != n || period.cols() != n {
            return Err(Error::Dimension(format!(
                "period matrix is {}x{}, expected {n}x{n}",
                period.rows(),
                period.cols()
            )));
        }
        for (&p, d) in &local {
            if let LocalDatum::Fl(m) = d {
                if m.prime() != p {
                    return Err(Error::Invalid(format!("module filed under p = {p} lives at p = {}", m.prime())));
                }
                if m.rank() != n {
                    return Err(Error::Dimension(format!("module at p = {p} has rank {}, expected {n}", m.rank())));
                }
            }
        }
        Ok(MotiveData { mtype, period, local, bad_primes })
    }

    pub fn rank(&self) -> usize {
        self.mtype.rank()
    }

    pub fn window(&self) -> (i64, i64) {
        self.mtype.window
    }

    /// The Hodge structure on `Z^n` with `F^r = P · span(M^r)`.
    pub fn hodge_structure(&self, prec: u32) -> Result<HodgeStructure> {
        let (a, b) = self.window();
        let n = self.rank();
        let p = self.period.with_precision(prec);
        let steps = (a..=b)
            .map(|r| {
                let d = self.mtype.filtration_dim(r);
                p.select_columns(&(n - d..n).collect::<Vec<_>>())
            })
            .collect();
        HodgeStructure::new(self.mtype.w, a, steps)
    }

    /// Columns of `P` for block `r`, for every `r` with `h(r) > 0`.
    pub fn graded_periods(&self, prec: u32) -> BTreeMap<i64, CMatrix> {
        let p = self.period.with_precision(prec);
        self.mtype.h.keys().map(|&r| (r, p.select_columns(&self.mtype.block(r).collect::<Vec<_>>()))).collect()
    }

    /// Valuations `v_p(r)` at one prime.
    pub fn local_spec(&self, p: u64) -> Result<LocalLatticeSpec> {
        match self.local.get(&p) {
            None => Ok(LocalLatticeSpec::default_good(p)),
            Some(LocalDatum::Override(s)) => Ok(s.clone()),
            Some(LocalDatum::Fl(m)) => local_valuations(m, self.window()),
        }
    }

    /// Re-window the datum; `h` must vanish outside the new window.
    pub fn with_window(&self, window: (i64, i64)) -> Result<MotiveData> {
        let mtype = MotiveType::new(self.mtype.w, self.mtype.h.clone(), window)?;
        let mut local = BTreeMap::new();
        for (&p, d) in &self.local {
            let nd = match d {
                LocalDatum::Override(s) => LocalDatum::Override(s.clone()),
                LocalDatum::Fl(m) => {
                    let filtration = (window.0 + 1..window.1).map(|i| (i, m.step(i).basis().clone())).collect();
                    let w = FilPhiModule::new(p, m.lattice().basis(), m.phi().clone(), window, &filtration)?;
                    // the original steps must be recovered outside the new window
                    let (oa, ob) = m.window();
                    for i in oa.min(window.0)..=ob.max(window.1) {
                        if w.step(i) != m.step(i) {
                            return Err(Error::Invalid(format!(
                                "window ({}, {}) cuts the filtration of the module at p = {p}",
                                window.0, window.1
                            )));
                        }
                    }
                    LocalDatum::Fl(w)
                }
            };
            local.insert(p, nd);
        }
        MotiveData::new(mtype, self.period.clone(), local, self.bad_primes.clone())
    }

    /// Change the de Rham reference basis to the columns of `g`, which must
    /// be block lower triangular (so the filtration is preserved).
    pub fn rebased(&self, g: &RationalMatrix) -> Result<MotiveData> {
        let n = self.rank();
        if g.rows() != n || g.cols() != n || g.det().is_zero() {
            return Err(Error::Dimension("change of basis must be invertible n x n".into()));
        }
        let (a, b) = self.window();
        for r in a..b {
            for j in self.mtype.block(r) {
                for r2 in a..r {
                    for i in self.mtype.block(r2) {
                        if !g.get(i, j).is_zero() {
                            return Err(Error::Invalid("change of basis does not preserve the filtration".into()));
                        }
                    }
                }
            }
        }
        let ginv = g.inverse()?;
        let period = self.period.mul_rational(g);
        // primes where the leading minors of g are not units
        let mut touched: BTreeSet<u64> = BTreeSet::new();
        let mut minor_vals: BTreeMap<i64, ValuationMap> = BTreeMap::new();
        for r in a..=b {
            let m = n - self.mtype.filtration_dim(r);
            let idx: Vec<usize> = (0..m).collect();
            let det = if m == 0 { BigRational::one() } else { g.select_rows(&idx).select_columns(&idx).det() };
            let vm: ValuationMap = prime_factors(&det).into_iter().map(|p| (p, valuation(&det, p).unwrap())).collect();
            touched.extend(vm.iter().map(|(p, _)| p));
            minor_vals.insert(r, vm);
        }
        let mut local = BTreeMap::new();
        for (&p, d) in &self.local {
            let nd = match d {
                LocalDatum::Fl(m) => LocalDatum::Fl(m.transformed(&ginv)?),
                LocalDatum::Override(s) => LocalDatum::Override(shift_spec(s, &minor_vals, (a, b))),
            };
            local.insert(p, nd);
        }
        for p in touched {
            local.entry(p).or_insert_with(|| {
                LocalDatum::Override(shift_spec(&LocalLatticeSpec::default_good(p), &minor_vals, (a, b)))
            });
        }
        MotiveData::new(self.mtype.clone(), period, local, self.bad_primes.clone())
    }
}

fn shift_spec(s: &LocalLatticeSpec, minors: &BTreeMap<i64, ValuationMap>, window: (i64, i64)) -> LocalLatticeSpec {
    let values = (window.0..=window.1).map(|r| (r, s.value(r) - minors[&r].get(s.p))).collect();
    LocalLatticeSpec { p: s.p, values, provenance: Provenance::ExplicitOverride }
}

/// Primes dividing the numerator or denominator of `q`.
pub fn prime_factors(q: &BigRational) -> Vec<u64> {
    let mut out = BTreeSet::new();
    for n in [q.numer().clone(), q.denom().clone()] {
        let mut m = n.magnitude().clone();
        let mut d: u64 = 2;
        while !m.is_zero() && m > num_bigint::BigUint::one() {
            if BigInt::from(d) * BigInt::from(d) > BigInt::from(m.clone()) {
                out.insert(u64::try_from(&m).expect("prime factors of test-sized inputs fit in u64"));
                break;
            }
            while (&m % d).is_zero() {
                out.insert(d);
                m /= d;
            }
            d += 1;
        }
    }
    out.into_iter().collect()
}

/// A located validation failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationIssue {
    pub location: String,
    pub error: Error,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    fn push(&mut self, location: impl Into<String>, error: Error) {
        self.issues.push(ValidationIssue { location: location.into(), error });
    }

    /// The first error, if any.
    pub fn into_result(self) -> Result<()> {
        match self.issues.into_iter().next() {
            None => Ok(()),
            Some(i) => Err(i.error),
        }
    }
}

pub fn validate(m: &MotiveData, prec: u32) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let n = m.rank();
    let (a, b) = m.window();
    match m.hodge_structure(prec).and_then(|h| purity_check(&h).map(|r| (h, r))) {
        Err(e) => rep.push("hodge", e),
        Ok((_, r)) => {
            if !r.pass {
                rep.push(
                    "hodge",
                    Error::NotPure { detail: format!("piece dimensions {:?}, defect {}", r.dims, r.defect) },
                );
            } else {
                for (&r0, &d) in &r.dims {
                    if d != m.mtype.hodge_number(r0) {
                        rep.push(
                            format!("hodge.h({r0})"),
                            Error::NotPure {
                                detail: format!(
                                    "dim H^({r0},{}) = {d} but h({r0}) = {}",
                                    m.mtype.w - r0,
                                    m.mtype.hodge_number(r0)
                                ),
                            },
                        );
                    }
                }
            }
        }
    }
    for &p in &m.bad_primes {
        if !is_prime(p) {
            rep.push(format!("bad_primes.{p}"), Error::NotPrime(p));
        }
    }
    for (&p, d) in &m.local {
        let loc = format!("local.{p}");
        if !is_prime(p) {
            rep.push(loc.clone(), Error::NotPrime(p));
            continue;
        }
        if let LocalDatum::Fl(fm) = d {
            if fm.window() != (a, b) {
                rep.push(format!("{loc}.window"), Error::WindowMismatch(fm.window(), (a, b)));
                continue;
            }
            match check_strong_divisibility(fm) {
                Err(e) => {
                    rep.push(format!("{loc}.window"), e);
                    continue;
                }
                Ok(s) if !s.pass => {
                    rep.push(format!("{loc}.strong_divisibility"), Error::StrongDivisibility { p });
                }
                Ok(_) => {}
            }
            for r in a + 1..b {
                let want = m.mtype.filtration_dim(r);
                let step = fm.step(r);
                let zero_head = (0..n - want).all(|i| (0..step.rank()).all(|j| step.basis().get(i, j).is_zero()));
                if step.rank() != want || !zero_head {
                    rep.push(
                        format!("{loc}.filtration.{r}"),
                        Error::Invalid(format!("D^{r} does not span the de Rham filtration step M^{r}")),
                    );
                }
            }
        }
    }
    rep
}

/// `L_r(M)_Z` relative to the reference generator of `det(M/M^r)`.
pub fn global_lattice(m: &MotiveData, r: i64) -> Result<BigRational> {
    let mut v = ValuationMap::new();
    for &p in m.local.keys() {
        v.set(p, m.local_spec(p)?.value(r));
    }
    Ok(intersect_adelic(&v))
}

/// Exponents `r ↦ e_r` with `L(M)_Z = ⊗ L_r(M)_Z^{⊗ e_r}`.
pub fn lattice_exponents(window: (i64, i64), formula: LatticeFormula) -> BTreeMap<i64, i64> {
    let (a, b) = window;
    let mut e = BTreeMap::new();
    match formula {
        LatticeFormula::Windowed => {
            for i in a + 1..b {
                e.insert(i, -1);
            }
            if b > a {
                *e.entry(b).or_insert(0) += b - 1;
            }
        }
        LatticeFormula::Graded => {
            for r in a..b {
                *e.entry(r).or_insert(0) -= r;
                *e.entry(r + 1).or_insert(0) += r;
            }
        }
    }
    e.retain(|_, v| *v != 0);
    e
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeContribution {
    pub p: u64,
    pub r: i64,
    pub v: i64,
    pub provenance: Provenance,
}

#[derive(Clone, Debug)]
pub struct HeightOptions {
    pub precision: u32,
    pub formula: LatticeFormula,
}

impl Default for HeightOptions {
    fn default() -> Self {
        HeightOptions { precision: crate::ball::DEFAULT_PRECISION, formula: LatticeFormula::Windowed }
    }
}

/// `L(M)_Q` with lattice `L(M)_Z` and the Hodge metric on its reference generator.
pub fn assemble_height_line(m: &MotiveData, opts: &HeightOptions) -> Result<(MetrizedLine, Vec<PrimeContribution>)> {
    validate(m, opts.precision).into_result()?;
    let exps = lattice_exponents(m.window(), opts.formula);
    let mut contributions = Vec::new();
    let mut v = ValuationMap::new();
    for &p in m.local.keys() {
        let spec = m.local_spec(p)?;
        for (&r, &e) in &exps {
            let vr = spec.value(r);
            if vr != 0 {
                contributions.push(PrimeContribution { p, r, v: vr, provenance: spec.provenance });
            }
            v.add_at(p, vr * e);
        }
    }
    let scalar = intersect_adelic(&v);
    let h = m.hodge_structure(opts.precision)?;
    let graded = m.graded_periods(opts.precision);
    let metric = line_metric(&h, &graded, &Complex::one(opts.precision))?;
    let label = graded_label(&m.mtype);
    Ok((MetrizedLine::new(label, scalar, Some(metric))?, contributions))
}

fn graded_label(t: &MotiveType) -> String {
    let parts: Vec<String> = t.h.keys().filter(|&&r| r != 0).map(|r| format!("(det gr^{r})^{r}")).collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" ⊗ ")
    }
}

#[derive(Clone, Debug)]
pub struct HeightReport {
    pub window: (i64, i64),
    pub formula: LatticeFormula,
    /// `h(M) = -log |e|`.
    pub h: Real,
    /// `H(M) = |e|^{-1}`.
    pub big_h: Real,
    /// `|e|` for the lattice generator `e`.
    pub generator_length: Real,
    /// `|ref|` for the reference generator.
    pub reference_length: Real,
    pub lattice_scalar: BigRational,
    pub per_prime: Vec<PrimeContribution>,
    pub warnings: Vec<String>,
}

pub fn height(m: &MotiveData, opts: &HeightOptions) -> Result<HeightReport> {
    let (line, per_prime) = assemble_height_line(m, opts)?;
    let len = line.generator_length()?;
    let h = line.degree()?;
    let big_h = len.recip().ok_or_else(|| Error::PrecisionExhausted { context: "generator length".into() })?;
    let mut warnings = Vec::new();
    for &p in &m.bad_primes {
        if !matches!(m.local.get(&p), Some(LocalDatum::Override(_))) {
            warnings.push(format!("bad prime {p} carries no explicit override"));
        }
    }
    Ok(HeightReport {
        window: m.window(),
        formula: opts.formula,
        h,
        big_h,
        generator_length: len,
        reference_length: line.metric()?.clone(),
        lattice_scalar: line.lattice_scalar.clone(),
        per_prime,
        warnings,
    })
}

/// `Q(r)`: rank one, weight `-2r`, period `(2πi)^{-r}`, all primes default.
pub fn tate_motive(r: i64, prec: u32) -> MotiveData {
    let mtype = MotiveType::new(-2 * r, [(-r, 1)].into(), (-r, -r + 1)).expect("valid type");
    let p = Complex::rational_times_two_pi_i_pow(&BigRational::one(), -r, prec);
    let period = CMatrix::from_fn(1, 1, |_, _| p.clone());
    MotiveData::new(mtype, period, BTreeMap::new(), BTreeSet::new()).expect("consistent")
}

/// The module of `Z_p(r)`: the trivial module twisted `r` times.
pub fn tate_module(r: i64, p: u64) -> Result<FilPhiModule> {
    crate::fl::tate_twist(&crate::fl::trivial_module(p)?, r)
}

pub fn direct_sum(m1: &MotiveData, m2: &MotiveData) -> Result<MotiveData> {
    if m1.mtype.w != m2.mtype.w {
        return Err(Error::WeightMismatch(m1.mtype.w, m2.mtype.w));
    }
    if m1.window() != m2.window() {
        return Err(Error::WindowMismatch(m1.window(), m2.window()));
    }
    let (n1, n2) = (m1.rank(), m2.rank());
    let mut h = m1.mtype.h.clone();
    for (&r, &d) in &m2.mtype.h {
        *h.entry(r).or_insert(0) += d;
    }
    let mtype = MotiveType::new(m1.mtype.w, h, m1.window())?;
    // new index -> index in the block-diagonal concatenation
    let mut perm = Vec::with_capacity(n1 + n2);
    for &r in mtype.h.keys() {
        perm.extend(m1.mtype.block(r));
        perm.extend(m2.mtype.block(r).map(|i| i + n1));
    }
    let prec = m1.period.precision().max(m2.period.precision());
    let stacked = CMatrix::from_fn(n1 + n2, n1 + n2, |i, j| {
        if i < n1 && j < n1 {
            m1.period.get(i, j).clone()
        } else if i >= n1 && j >= n1 {
            m2.period.get(i - n1, j - n1).clone()
        } else {
            Complex::zero(prec)
        }
    });
    let period = stacked.select_columns(&perm);
    // coordinates: new_x[k] = old_x[perm[k]]
    let pm =
        RationalMatrix::from_fn(
            n1 + n2,
            n1 + n2,
            |k, j| if perm[k] == j { BigRational::one() } else { BigRational::zero() },
        );
    let primes: BTreeSet<u64> = m1.local.keys().chain(m2.local.keys()).copied().collect();
    let mut local = BTreeMap::new();
    for p in primes {
        let d = match (m1.local.get(&p), m2.local.get(&p)) {
            (Some(LocalDatum::Fl(a)), Some(LocalDatum::Fl(b))) => LocalDatum::Fl(a.direct_sum(b)?.transformed(&pm)?),
            _ => {
                let (s1, s2) = (m1.local_spec(p)?, m2.local_spec(p)?);
                let (a, b) = m1.window();
                let values = (a..=b).map(|r| (r, s1.value(r) + s2.value(r))).collect();
                LocalDatum::Override(LocalLatticeSpec { p, values, provenance: Provenance::ExplicitOverride })
            }
        };
        local.insert(p, d);
    }
    let bad = m1.bad_primes.union(&m2.bad_primes).copied().collect();
    MotiveData::new(mtype, period, local, bad)
}

/// Local input for the elliptic builder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EllipticLocal {
    /// Good reduction at `p ≥ 3` with trace of Frobenius `a_p`.
    Good { p: u64, a_p: i64 },
    /// Bad reduction; the lattice valuations are supplied explicitly.
    Bad { p: u64, values: BTreeMap<i64, i64> },
}

/// `H_1` of an elliptic curve with period lattice `Z ω1 + Z ω2` of the
/// Néron differential `ω`.
///
/// Weight `-1`, `h(-1) = h(0) = 1`, window `(-1, 1)`. The reference basis is
/// `v_{-1}, v_0` with Betti coordinates (in the basis `γ1, γ2` of `H_1` with
/// `∫_{γi} ω = ωi`)
/// `v_0 = (-ω2, ω1)/(2πi)` and `v_{-1} = (ω̄2, -ω̄1)/(ω1 ω̄2 - ω2 ω̄1)`.
/// At a good prime `p ≥ 3` the module is `D = Z_p^2`, `D^0 = Z_p v_0`,
/// `φ(v_{-1}) = (a_p/p) v_{-1} - (1/p) v_0`, `φ(v_0) = v_{-1}`.
pub fn elliptic_curve_h1(omega1: &Complex, omega2: &Complex, local: &[EllipticLocal], prec: u32) -> Result<MotiveData> {
    let tau = omega2.div(omega1).ok_or(Error::DegeneratePeriods)?;
    if !tau.im.is_positive() && !tau.im.is_negative() {
        return Err(Error::DegeneratePeriods);
    }
    let w1 = omega1.with_precision(prec);
    let w2 = omega2.with_precision(prec);
    let denom = w1.mul(&w2.conj()).sub(&w2.mul(&w1.conj()));
    let two_pi_i_inv = Complex::rational_times_two_pi_i_pow(&BigRational::one(), -1, prec);
    let vm1 = [
        w2.conj().div(&denom).ok_or(Error::DegeneratePeriods)?,
        w1.conj().neg().div(&denom).ok_or(Error::DegeneratePeriods)?,
    ];
    let v0 = [w2.neg().mul(&two_pi_i_inv), w1.mul(&two_pi_i_inv)];
    let period = CMatrix::from_fn(2, 2, |i, j| if j == 0 { vm1[i].clone() } else { v0[i].clone() });
    let mtype = MotiveType::new(-1, [(-1, 1), (0, 1)].into(), (-1, 1))?;
    let mut map = BTreeMap::new();
    let mut bad = BTreeSet::new();
    for l in local {
        match l {
            EllipticLocal::Good { p, a_p } => {
                map.insert(*p, LocalDatum::Fl(elliptic_module(*p, *a_p)?));
            }
            EllipticLocal::Bad { p, values } => {
                bad.insert(*p);
                map.insert(
                    *p,
                    LocalDatum::Override(LocalLatticeSpec {
                        p: *p,
                        values: values.clone(),
                        provenance: Provenance::ExplicitOverride,
                    }),
                );
            }
        }
    }
    MotiveData::new(mtype, period, map, bad)
}

/// The module of `H_1` at a good prime, in the reference basis `v_{-1}, v_0`.
pub fn elliptic_module(p: u64, a_p: i64) -> Result<FilPhiModule> {
    let pq = BigRational::from_integer(BigInt::from(p));
    let phi = RationalMatrix::from_rows(vec![
        vec![BigRational::from_integer(BigInt::from(a_p)) / &pq, BigRational::one()],
        vec![-BigRational::one() / &pq, BigRational::zero()],
    ])?;
    let filtration: BTreeMap<i64, RationalMatrix> = [(0, RationalMatrix::from_i64_rows(&[&[0], &[1]]))].into();
    FilPhiModule::new(p, &RationalMatrix::identity(2), phi, (-1, 1), &filtration)
}

/// `a_p = p + 1 - #E(F_p)` for `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`.
pub fn trace_of_frobenius(a: [i64; 5], p: u64) -> i64 {
    let pi = p as i64;
    let red = |x: i64| x.rem_euclid(pi);
    let [a1, a2, a3, a4, a6] = a.map(red);
    let mut count = 1i64;
    for x in 0..pi {
        let rhs = red(red(red(x * x) * x) + red(a2 * red(x * x)) + red(a4 * x) + a6);
        for y in 0..pi {
            let lhs = red(red(y * y) + red(a1 * red(x * y)) + red(a3 * y));
            if lhs == rhs {
                count += 1;
            }
        }
    }
    pi + 1 - count
}

/// Multiplicative valuation bookkeeping: `q_b^{b-1} ∏ q_i^{-1}` from explicit scalars.
pub fn windowed_scalar(q: &BTreeMap<i64, BigRational>, window: (i64, i64), formula: LatticeFormula) -> BigRational {
    let mut out = BigRational::one();
    for (r, e) in lattice_exponents(window, formula) {
        out *= pow_rational(q.get(&r).unwrap_or(&BigRational::one()), e);
    }
    out
}
