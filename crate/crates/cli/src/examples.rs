//! Builder documents emitted by `motive-height example`.

use std::collections::BTreeMap;

use motive_core::ball::{Complex, Real};
use motive_core::fl::trivial_module;
use motive_core::lines::is_prime;
use motive_core::motive::{elliptic_curve_h1, tate_motive, trace_of_frobenius, EllipticLocal, LocalDatum, MotiveData};

use crate::document::MotiveDocument;
use crate::error::CliError;

pub const NAMES: &str = "tate:<r>, elliptic:square, trivial";

/// `y^2 = x^3 - x`.
const SQUARE_CURVE: [i64; 5] = [0, 0, 0, -1, 0];

/// Arithmetic-geometric mean of positive balls; the limit lies between the
/// two sequences, so the final gap is added to the radius.
pub fn agm(a: &Real, b: &Real) -> Real {
    let prec = a.precision();
    let (mut a, mut b) = (a.clone(), b.clone());
    let stop = motive_core::ball::Mag::pow2(-(prec as i64));
    for _ in 0..4 * prec {
        let gap = a.mid_distance(&b);
        if gap.cmp_value(stop) == std::cmp::Ordering::Less {
            return a.midpoint().add_error(gap.add(a.radius()).add(b.radius()));
        }
        let next = a.add(&b).mul_2exp(-1);
        b = a.mul(&b).sqrt().expect("positive");
        a = next;
    }
    a.add_error(a.mid_distance(&b))
}

/// Period lattice `Z ω + Z iω` of `y^2 = x^3 - x` with `ω = π / AGM(√2, 1)`.
pub fn square_periods(prec: u32) -> (Complex, Complex) {
    let wp = prec + 32;
    let root2 = Real::from_i64(2, wp).sqrt().expect("positive");
    let w = Real::pi(wp).div(&agm(&root2, &Real::one(wp))).expect("nonzero").with_precision(prec);
    (Complex::from_real(w.clone()), Complex::new(Real::zero(prec), w))
}

pub fn elliptic_square(prec: u32) -> Result<MotiveData, motive_core::Error> {
    let (w1, w2) = square_periods(prec);
    let mut local: Vec<EllipticLocal> = (3..20u64)
        .filter(|&p| is_prime(p))
        .map(|p| EllipticLocal::Good { p, a_p: trace_of_frobenius(SQUARE_CURVE, p) })
        .collect();
    local.push(EllipticLocal::Bad { p: 2, values: BTreeMap::new() });
    elliptic_curve_h1(&w1, &w2, &local, prec)
}

pub fn trivial(prec: u32) -> Result<MotiveData, motive_core::Error> {
    let mut m = tate_motive(0, prec);
    m.local.insert(3, LocalDatum::Fl(trivial_module(3)?));
    Ok(m)
}

/// The document for `name`, with periods good to about `prec` bits.
pub fn example(name: &str, prec: u32) -> Result<MotiveDocument, CliError> {
    let wp = prec + 16;
    let digits = (wp as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
    let build = |r: Result<MotiveData, motive_core::Error>| r.map_err(|e| CliError::computation(name, e));
    let m = if let Some(r) = name.strip_prefix("tate:") {
        let r: i64 =
            r.parse().map_err(|_| CliError::Usage(format!("bad twist in {name:?}; expected tate:<integer>")))?;
        tate_motive(r, wp)
    } else {
        match name {
            "elliptic:square" => build(elliptic_square(wp))?,
            "trivial" => build(trivial(wp))?,
            _ => return Err(CliError::Usage(format!("unknown example {name:?}; known: {NAMES}"))),
        }
    };
    let mut doc = MotiveDocument::from_motive(&m, Some(name.to_string()), digits);
    if name == "elliptic:square" {
        doc.metadata.labels = vec!["y^2 = x^3 - x".into()];
    }
    Ok(doc)
}
