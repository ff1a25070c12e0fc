//! The JSON document format for motive data and quotient specifications.
//!
//! Exact quantities are strings: rationals as `"num/den"`, period components
//! as decimal literals. Each period entry states its own precision, either
//! `"exact"` or a number of bits `k` meaning an absolute error of at most
//! `2^-k` on each component.

use std::collections::{BTreeMap, BTreeSet};

use motive_core::ball::{parse_decimal, Complex, Mag, Real};
use motive_core::cmatrix::CMatrix;
use motive_core::experiments::QuotientSpec;
use motive_core::fl::{FilPhiModule, LocalLatticeSpec, Provenance};
use motive_core::lines::{format_rational, parse_rational, RationalMatrix};
use motive_core::motive::{LocalDatum, MotiveData, MotiveType};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const FORMAT_VERSION: &str = "1";
pub const ADAPTED_BASIS: &str = "adapted-ascending";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotiveDocument {
    pub format_version: String,
    #[serde(rename = "type")]
    pub mtype: TypeSection,
    pub dr: DrSection,
    pub betti: BettiSection,
    pub period: Vec<Vec<PeriodEntry>>,
    #[serde(default)]
    pub local: Vec<LocalEntry>,
    #[serde(default)]
    pub bad_primes: Vec<u64>,
    #[serde(default)]
    pub metadata: Metadata,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeSection {
    pub w: i64,
    pub h: BTreeMap<i64, usize>,
    pub a: i64,
    pub b: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrSection {
    /// Convention for the reference basis; only `adapted-ascending` is defined.
    pub basis: String,
    /// `dim M^r` for `r` in the window.
    pub filtration_dims: BTreeMap<i64, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BettiSection {
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodEntry {
    pub re: String,
    pub im: String,
    pub precision: EntryPrecision,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryPrecision {
    Bits(u32),
    Word(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalEntry {
    pub p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fl: Option<FlSection>,
    #[serde(default, rename = "override", skip_serializing_if = "Option::is_none")]
    pub override_values: Option<BTreeMap<i64, i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlSection {
    pub phi: Vec<Vec<String>>,
    /// Basis of `D` as columns.
    pub lattice: Vec<Vec<String>>,
    #[serde(default)]
    pub filtration: Vec<FiltrationStep>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiltrationStep {
    pub index: i64,
    /// Generators of `D^index` as columns (`n` rows).
    pub generators: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

/// Quotient `T_p → U` for the invariance experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub format_version: String,
    pub p: u64,
    #[serde(default)]
    pub n: u32,
    pub q_dr: Vec<Vec<String>>,
    pub q_b: Vec<Vec<String>>,
    pub phi_u: Vec<Vec<String>>,
    #[serde(default)]
    pub u_filtration: Vec<FiltrationStep>,
}

fn malformed(location: impl Into<String>, detail: impl Into<String>) -> CliError {
    CliError::Malformed { location: location.into(), detail: detail.into() }
}

fn invalid(location: impl Into<String>, error: motive_core::Error) -> CliError {
    CliError::Invalid { location: location.into(), error }
}

fn check_version(v: &str) -> Result<(), CliError> {
    if v != FORMAT_VERSION {
        return Err(malformed(
            "format_version",
            format!("unsupported format_version {v:?}, expected {FORMAT_VERSION:?}"),
        ));
    }
    Ok(())
}

pub fn parse_motive(text: &str) -> Result<MotiveDocument, CliError> {
    let doc: MotiveDocument = serde_json::from_str(text).map_err(|e| malformed("document", e.to_string()))?;
    check_version(&doc.format_version)?;
    Ok(doc)
}

pub fn parse_spec(text: &str) -> Result<SpecDocument, CliError> {
    let doc: SpecDocument = serde_json::from_str(text).map_err(|e| malformed("document", e.to_string()))?;
    check_version(&doc.format_version)?;
    Ok(doc)
}

pub fn to_text<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

// ---------------------------------------------------------------- matrices

pub fn parse_matrix(rows: &[Vec<String>], location: &str) -> Result<RationalMatrix, CliError> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(malformed(location, format!("row {i} has {} entries, expected {cols}", row.len())));
        }
        let parsed: Result<Vec<BigRational>, CliError> = row
            .iter()
            .enumerate()
            .map(|(j, s)| {
                parse_rational(s)
                    .ok_or_else(|| malformed(format!("{location}[{i}][{j}]"), format!("not a rational: {s:?}")))
            })
            .collect();
        out.push(parsed?);
    }
    if out.is_empty() {
        return Ok(RationalMatrix::zeros(0, 0));
    }
    RationalMatrix::from_rows(out).map_err(|e| malformed(location, e.to_string()))
}

/// Like [`parse_matrix`], for `n × k` generator blocks whose rows may be empty.
fn parse_generators(rows: &[Vec<String>], n: usize, location: &str) -> Result<RationalMatrix, CliError> {
    if rows.len() != n {
        return Err(invalid(location, motive_core::Error::Dimension(format!("{} rows, expected {n}", rows.len()))));
    }
    if rows.iter().all(Vec::is_empty) {
        return Ok(RationalMatrix::zeros(n, 0));
    }
    parse_matrix(rows, location)
}

pub fn format_matrix(m: &RationalMatrix) -> Vec<Vec<String>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(format_rational).collect()).collect()
}

// ---------------------------------------------------------------- decimals

/// Exact decimal expansion of a rational whose denominator divides a power of 10.
fn exact_decimal(q: &BigRational) -> Option<String> {
    let mut den = q.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut k2, mut k5) = (0usize, 0usize);
    while (&den % &two).is_zero() {
        den /= &two;
        k2 += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        k5 += 1;
    }
    if den != BigInt::from(1) {
        return None;
    }
    let k = k2.max(k5);
    Some(scaled_decimal(&(q * BigRational::from_integer(num_traits::pow(BigInt::from(10), k))).to_integer(), k))
}

/// `n / 10^k` written out.
fn scaled_decimal(n: &BigInt, k: usize) -> String {
    let sign = if n.is_negative() { "-" } else { "" };
    let digits = n.abs().to_string();
    if k == 0 {
        return format!("{sign}{digits}");
    }
    let padded = format!("{}{}", "0".repeat((k + 1).saturating_sub(digits.len())), digits);
    let (int, frac) = padded.split_at(padded.len() - k);
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

fn canonical_decimal(s: &str, location: &str) -> Result<String, CliError> {
    let q = parse_decimal(s).ok_or_else(|| malformed(location, format!("not a decimal literal: {s:?}")))?;
    Ok(exact_decimal(&q).expect("decimal literals terminate"))
}

fn canonical_rational(s: &str, location: &str) -> Result<String, CliError> {
    let q = parse_rational(s).ok_or_else(|| malformed(location, format!("not a rational: {s:?}")))?;
    Ok(format_rational(&q))
}

/// A ball with an exact decimal midpoint and a radius covering `x`.
fn decimal_component(x: &Real, digits: usize) -> (String, Mag) {
    let scale = BigRational::from_integer(num_traits::pow(BigInt::from(10), digits));
    let scaled = x.midpoint_rational() * &scale;
    let n = scaled.round().to_integer();
    let q = BigRational::new(n.clone(), scale.to_integer());
    let exact = q == x.midpoint_rational();
    let err = if exact { Mag::ZERO } else { Mag::from_f64(10f64.powi(-(digits as i32))) };
    (scaled_decimal(&n, digits), x.radius().add(err))
}

fn entry_from_complex(z: &Complex, digits: usize) -> PeriodEntry {
    let (re, e1) = decimal_component(&z.re, digits);
    let (im, e2) = decimal_component(&z.im, digits);
    let err = e1.max(e2);
    let precision = if err.is_zero() {
        EntryPrecision::Word("exact".into())
    } else {
        // largest k with 2^-k >= err
        let k = (-err.to_f64().log2()).floor().max(0.0) as u32;
        EntryPrecision::Bits(k)
    };
    let (re, im) =
        (exact_decimal(&parse_decimal(&re).unwrap()).unwrap(), exact_decimal(&parse_decimal(&im).unwrap()).unwrap());
    PeriodEntry { re, im, precision }
}

fn entry_to_complex(e: &PeriodEntry, prec: u32, location: &str) -> Result<Complex, CliError> {
    let rad = match &e.precision {
        EntryPrecision::Bits(k) => Mag::pow2(-(*k as i64)),
        EntryPrecision::Word(w) if w == "exact" => Mag::ZERO,
        EntryPrecision::Word(w) => {
            return Err(malformed(
                format!("{location}.precision"),
                format!("expected \"exact\" or a bit count, got {w:?}"),
            ))
        }
    };
    let re = Real::from_decimal(&e.re, rad, prec)
        .ok_or_else(|| malformed(format!("{location}.re"), format!("not a decimal literal: {:?}", e.re)))?;
    let im = Real::from_decimal(&e.im, rad, prec)
        .ok_or_else(|| malformed(format!("{location}.im"), format!("not a decimal literal: {:?}", e.im)))?;
    Ok(Complex::new(re, im))
}

// ---------------------------------------------------------------- canonical form

fn canonical_matrix(rows: &[Vec<String>], location: &str) -> Result<Vec<Vec<String>>, CliError> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter().enumerate().map(|(j, s)| canonical_rational(s, &format!("{location}[{i}][{j}]"))).collect()
        })
        .collect()
}

fn canonical_steps(steps: &[FiltrationStep], location: &str) -> Result<Vec<FiltrationStep>, CliError> {
    let mut out: Vec<FiltrationStep> = steps
        .iter()
        .map(|s| {
            Ok(FiltrationStep {
                index: s.index,
                generators: canonical_matrix(&s.generators, &format!("{location}[{}]", s.index))?,
            })
        })
        .collect::<Result<_, CliError>>()?;
    out.sort_by_key(|s| s.index);
    Ok(out)
}

impl MotiveDocument {
    /// Normalized spelling of every number, primes sorted.
    pub fn canonical(&self) -> Result<MotiveDocument, CliError> {
        let mut doc = self.clone();
        for (i, row) in doc.period.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                e.re = canonical_decimal(&e.re, &format!("period[{i}][{j}].re"))?;
                e.im = canonical_decimal(&e.im, &format!("period[{i}][{j}].im"))?;
            }
        }
        for e in doc.local.iter_mut() {
            if let Some(fl) = e.fl.as_mut() {
                let loc = format!("local.{}", e.p);
                fl.phi = canonical_matrix(&fl.phi, &format!("{loc}.phi"))?;
                fl.lattice = canonical_matrix(&fl.lattice, &format!("{loc}.lattice"))?;
                fl.filtration = canonical_steps(&fl.filtration, &format!("{loc}.filtration"))?;
            }
        }
        doc.local.sort_by_key(|e| e.p);
        doc.bad_primes = doc.bad_primes.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        Ok(doc)
    }

    pub fn id(&self) -> Option<&str> {
        self.metadata.id.as_deref()
    }

    pub fn to_motive(&self, prec: u32) -> Result<MotiveData, CliError> {
        check_version(&self.format_version)?;
        let t = &self.mtype;
        let mtype = MotiveType::new(t.w, t.h.clone(), (t.a, t.b)).map_err(|e| invalid("type", e))?;
        let n = mtype.rank();
        if self.dr.basis != ADAPTED_BASIS {
            return Err(malformed(
                "dr.basis",
                format!("unsupported reference basis {:?}, expected {ADAPTED_BASIS:?}", self.dr.basis),
            ));
        }
        for (&r, &d) in &self.dr.filtration_dims {
            if d != mtype.filtration_dim(r) {
                return Err(invalid(
                    format!("dr.filtration_dims.{r}"),
                    motive_core::Error::Dimension(format!(
                        "dim M^{r} = {d} but the type gives {}",
                        mtype.filtration_dim(r)
                    )),
                ));
            }
        }
        if self.betti.rank != n {
            return Err(invalid(
                "betti.rank",
                motive_core::Error::Dimension(format!("rank {} but the type has rank {n}", self.betti.rank)),
            ));
        }
        if self.period.len() != n || self.period.iter().any(|row| row.len() != n) {
            return Err(invalid("period", motive_core::Error::Dimension(format!("expected a {n}x{n} matrix"))));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in self.period.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                entries.push(entry_to_complex(e, prec, &format!("period[{i}][{j}]"))?);
            }
        }
        let period = CMatrix::from_fn(n, n, |i, j| entries[i * n + j].clone());
        let mut local = BTreeMap::new();
        for e in &self.local {
            let loc = format!("local.{}", e.p);
            let datum = match (&e.fl, &e.override_values) {
                (Some(fl), None) => LocalDatum::Fl(fl_module(fl, e.p, n, (t.a, t.b), &loc)?),
                (None, Some(values)) => LocalDatum::Override(LocalLatticeSpec {
                    p: e.p,
                    values: values.clone(),
                    provenance: Provenance::ExplicitOverride,
                }),
                _ => return Err(malformed(&loc, "each local entry needs exactly one of `fl` and `override`")),
            };
            if local.insert(e.p, datum).is_some() {
                return Err(invalid(&loc, motive_core::Error::Invalid(format!("duplicate entry for p = {}", e.p))));
            }
        }
        let bad: BTreeSet<u64> = self.bad_primes.iter().copied().collect();
        MotiveData::new(mtype, period, local, bad).map_err(|e| invalid("document", e))
    }

    /// Document for `m`, with period components written to `digits` decimals.
    pub fn from_motive(m: &MotiveData, id: Option<String>, digits: usize) -> MotiveDocument {
        let n = m.rank();
        let (a, b) = m.window();
        let period = (0..n).map(|i| (0..n).map(|j| entry_from_complex(m.period.get(i, j), digits)).collect()).collect();
        let local = m
            .local
            .iter()
            .map(|(&p, d)| match d {
                LocalDatum::Fl(fm) => LocalEntry { p, fl: Some(fl_section(fm)), override_values: None },
                LocalDatum::Override(s) => LocalEntry { p, fl: None, override_values: Some(s.values.clone()) },
            })
            .collect();
        MotiveDocument {
            format_version: FORMAT_VERSION.into(),
            mtype: TypeSection { w: m.mtype.w, h: m.mtype.h.clone(), a, b },
            dr: DrSection {
                basis: ADAPTED_BASIS.into(),
                filtration_dims: (a..=b).map(|r| (r, m.mtype.filtration_dim(r))).collect(),
            },
            betti: BettiSection { rank: n },
            period,
            local,
            bad_primes: m.bad_primes.iter().copied().collect(),
            metadata: Metadata { id, ..Metadata::default() },
        }
    }
}

fn fl_module(fl: &FlSection, p: u64, n: usize, window: (i64, i64), loc: &str) -> Result<FilPhiModule, CliError> {
    let phi = parse_matrix(&fl.phi, &format!("{loc}.phi"))?;
    let lattice = parse_matrix(&fl.lattice, &format!("{loc}.lattice"))?;
    for (name, m) in [("phi", &phi), ("lattice", &lattice)] {
        if m.rows() != n || m.cols() != n {
            return Err(invalid(format!("{loc}.{name}"), motive_core::Error::Dimension(format!("expected {n}x{n}"))));
        }
    }
    let mut filtration = BTreeMap::new();
    for s in &fl.filtration {
        let sloc = format!("{loc}.filtration[{}]", s.index);
        let g = parse_generators(&s.generators, n, &sloc)?;
        if filtration.insert(s.index, g).is_some() {
            return Err(invalid(sloc, motive_core::Error::Invalid("duplicate filtration index".into())));
        }
    }
    FilPhiModule::new(p, &lattice, phi, window, &filtration).map_err(|e| invalid(loc, e))
}

fn fl_section(fm: &FilPhiModule) -> FlSection {
    FlSection {
        phi: format_matrix(fm.phi()),
        lattice: format_matrix(fm.lattice().basis()),
        filtration: fm
            .interior_filtration()
            .into_iter()
            .map(|(index, g)| FiltrationStep { index, generators: format_matrix(&g) })
            .collect(),
    }
}

impl SpecDocument {
    pub fn canonical(&self) -> Result<SpecDocument, CliError> {
        Ok(SpecDocument {
            q_dr: canonical_matrix(&self.q_dr, "q_dr")?,
            q_b: canonical_matrix(&self.q_b, "q_b")?,
            phi_u: canonical_matrix(&self.phi_u, "phi_u")?,
            u_filtration: canonical_steps(&self.u_filtration, "u_filtration")?,
            ..self.clone()
        })
    }

    pub fn to_spec(&self) -> Result<QuotientSpec, CliError> {
        check_version(&self.format_version)?;
        let q_dr = parse_matrix(&self.q_dr, "q_dr")?;
        let k = q_dr.rows();
        let mut u_filtration = BTreeMap::new();
        for s in &self.u_filtration {
            let loc = format!("u_filtration[{}]", s.index);
            u_filtration.insert(s.index, parse_generators(&s.generators, k, &loc)?);
        }
        Ok(QuotientSpec {
            p: self.p,
            n: self.n,
            q_dr,
            q_b: parse_matrix(&self.q_b, "q_b")?,
            phi_u: parse_matrix(&self.phi_u, "phi_u")?,
            u_filtration,
        })
    }

    pub fn from_spec(spec: &QuotientSpec) -> SpecDocument {
        SpecDocument {
            format_version: FORMAT_VERSION.into(),
            p: spec.p,
            n: spec.n,
            q_dr: format_matrix(&spec.q_dr),
            q_b: format_matrix(&spec.q_b),
            phi_u: format_matrix(&spec.phi_u),
            u_filtration: spec
                .u_filtration
                .iter()
                .map(|(&index, g)| FiltrationStep { index, generators: format_matrix(g) })
                .collect(),
        }
    }
}
