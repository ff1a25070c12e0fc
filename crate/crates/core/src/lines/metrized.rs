//! One-dimensional rational spaces with a lattice and an archimedean metric.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ball::Real;
use crate::error::{Error, Result};

/// A line `Q·ref` with lattice `q·Z·ref` and, optionally, the certified
/// length `|ref|`.
#[derive(Clone, Debug)]
pub struct MetrizedLine {
    pub label: String,
    pub lattice_scalar: BigRational,
    pub metric_ref: Option<Real>,
}

impl MetrizedLine {
    pub fn new(
        label: impl Into<String>,
        lattice_scalar: BigRational,
        metric_ref: Option<Real>,
    ) -> Result<MetrizedLine> {
        if !lattice_scalar.is_positive() {
            return Err(Error::Invalid("lattice scalar must be positive".into()));
        }
        if let Some(m) = &metric_ref {
            if !m.is_positive() {
                return Err(Error::Invalid("metric of the reference generator must be certified positive".into()));
            }
        }
        Ok(MetrizedLine { label: label.into(), lattice_scalar, metric_ref })
    }

    /// The determinant of the zero space: scalar 1, metric exactly 1.
    pub fn trivial(prec: u32) -> MetrizedLine {
        MetrizedLine { label: "1".into(), lattice_scalar: BigRational::one(), metric_ref: Some(Real::one(prec)) }
    }

    pub fn metric(&self) -> Result<&Real> {
        self.metric_ref.as_ref().ok_or_else(|| Error::MissingMetric { label: self.label.clone() })
    }

    /// Length of the lattice generator `q·ref`.
    pub fn generator_length(&self) -> Result<Real> {
        Ok(self.metric()?.mul_rational(&self.lattice_scalar))
    }

    /// Arakelov degree `-log |q·ref|`.
    pub fn degree(&self) -> Result<Real> {
        let len = self.generator_length()?;
        len.log()
            .map(|l| l.neg())
            .ok_or_else(|| Error::PrecisionExhausted { context: "generator length not certified positive".into() })
    }
}

/// Tensor product `⊗ line_i^{e_i}`; the metric is absent if any factor with
/// nonzero exponent lacks one.
pub fn line_tensor(lines: &[(MetrizedLine, i64)], prec: u32) -> MetrizedLine {
    let mut scalar = BigRational::one();
    let mut metric = Some(Real::one(prec));
    let mut word = Vec::new();
    for (line, e) in lines {
        if *e == 0 {
            continue;
        }
        scalar *= pow_rational(&line.lattice_scalar, *e);
        metric = match (metric, &line.metric_ref) {
            (Some(acc), Some(m)) => m.powi(*e).map(|x| acc.mul(&x)),
            _ => None,
        };
        word.push(if *e == 1 { line.label.clone() } else { format!("({})^{}", line.label, e) });
    }
    let label = if word.is_empty() { "1".to_string() } else { word.join(" ⊗ ") };
    MetrizedLine { label, lattice_scalar: scalar, metric_ref: metric }
}

pub fn pow_rational(q: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        num_traits::pow(q.clone(), e as usize)
    } else {
        assert!(!q.is_zero(), "negative power of zero");
        num_traits::pow(q.recip(), e.unsigned_abs() as usize)
    }
}
