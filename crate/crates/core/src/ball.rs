//! Certified real and complex numbers in midpoint-radius ("ball") form.
//!
//! A [`Real`] is a dyadic midpoint together with an upper bound on the
//! distance to the true value. Every operation rounds the midpoint to the
//! working precision and adds the rounding error to the radius, so the
//! enclosure stays valid through arbitrarily long computations.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 128;

const GUARD_BITS: u32 = 32;
const EPS_UP: f64 = 1.0 + 1.0 / (1u64 << 48) as f64;
const EPS_DOWN: f64 = 1.0 - 1.0 / (1u64 << 48) as f64;

/// Nonnegative magnitude bound `m * 2^e` with `m` in `[1, 2)` or zero.
///
/// Used for radii: every operation rounds away from zero so the result is a
/// valid upper bound (or, for the `_down` variants, a valid lower bound).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mag {
    m: f64,
    e: i64,
}

#[allow(clippy::should_implement_trait)]
impl Mag {
    pub const ZERO: Mag = Mag { m: 0.0, e: 0 };

    fn normalized(m: f64, e: i64) -> Mag {
        if m == 0.0 {
            return Mag::ZERO;
        }
        debug_assert!(m.is_finite() && m > 0.0);
        let bits = m.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        if raw_exp == 0 {
            // subnormal mantissa; rescale first
            return Mag::normalized(m * 2f64.powi(64), e - 64);
        }
        let shift = raw_exp - 1023;
        let mant = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1023u64 << 52));
        Mag { m: mant, e: e + shift }
    }

    pub fn pow2(e: i64) -> Mag {
        Mag { m: 1.0, e }
    }

    /// Upper bound for a nonnegative finite `f64`.
    pub fn from_f64(x: f64) -> Mag {
        assert!(x >= 0.0 && x.is_finite(), "magnitude must be finite and nonnegative");
        Mag::normalized(x, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.m == 0.0
    }

    pub fn add(self, other: Mag) -> Mag {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.e >= other.e { (self, other) } else { (other, self) };
        let diff = big.e - small.e;
        if diff > 60 {
            return Mag::normalized(big.m * (1.0 + 1.0 / (1u64 << 40) as f64), big.e);
        }
        let s = big.m + small.m * 2f64.powi(-(diff as i32));
        Mag::normalized(s * EPS_UP, big.e)
    }

    pub fn mul(self, other: Mag) -> Mag {
        if self.is_zero() || other.is_zero() {
            return Mag::ZERO;
        }
        Mag::normalized(self.m * other.m * EPS_UP, self.e + other.e)
    }

    /// Upper bound for `self / other` where `other` is a lower bound of the divisor.
    pub fn div(self, other: Mag) -> Mag {
        assert!(!other.is_zero(), "division by zero magnitude");
        if self.is_zero() {
            return Mag::ZERO;
        }
        Mag::normalized(self.m / other.m * EPS_UP, self.e - other.e)
    }

    pub fn mul_2exp(self, k: i64) -> Mag {
        if self.is_zero() {
            self
        } else {
            Mag { m: self.m, e: self.e + k }
        }
    }

    /// Lower-bound product.
    pub fn mul_down(self, other: Mag) -> Mag {
        if self.is_zero() || other.is_zero() {
            return Mag::ZERO;
        }
        Mag::normalized(self.m * other.m * EPS_DOWN, self.e + other.e)
    }

    /// Lower bound for `self - other`, clamped at zero.
    pub fn sub_down(self, other: Mag) -> Mag {
        if other.is_zero() {
            return self;
        }
        if self.cmp_value(other) != Ordering::Greater {
            return Mag::ZERO;
        }
        let diff = self.e - other.e;
        if diff > 60 {
            return Mag::normalized(self.m * (1.0 - 1.0 / (1u64 << 40) as f64), self.e);
        }
        let s = self.m - other.m * 2f64.powi(-(diff as i32));
        if s <= 0.0 {
            return Mag::ZERO;
        }
        Mag::normalized(s * EPS_DOWN, self.e)
    }

    pub fn sqrt_up(self) -> Mag {
        if self.is_zero() {
            return self;
        }
        let (m, e) = if self.e.rem_euclid(2) == 0 { (self.m, self.e) } else { (self.m * 2.0, self.e - 1) };
        Mag::normalized(m.sqrt() * EPS_UP, e / 2)
    }

    pub fn sqrt_down(self) -> Mag {
        if self.is_zero() {
            return self;
        }
        let (m, e) = if self.e.rem_euclid(2) == 0 { (self.m, self.e) } else { (self.m * 2.0, self.e - 1) };
        Mag::normalized(m.sqrt() * EPS_DOWN, e / 2)
    }

    pub fn cmp_value(&self, other: Mag) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self.e.cmp(&other.e).then(self.m.partial_cmp(&other.m).unwrap_or(Ordering::Equal)),
        }
    }

    pub fn max(self, other: Mag) -> Mag {
        if self.cmp_value(other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    /// Binary exponent `e` with value in `[2^e, 2^(e+1))`; `None` for zero.
    pub fn exponent(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.e)
        }
    }

    /// Approximate value; saturates to `0` or `inf` outside the `f64` range.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let e = self.e.clamp(-2000, 2000) as i32;
        if e < -1070 {
            return 0.0;
        }
        if e > 1023 {
            return f64::INFINITY;
        }
        self.m * 2f64.powi(e)
    }
}

impl fmt::Display for Mag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // decimal exponent from the binary one; display only, rounded upward
        let log10 = (self.e as f64) * std::f64::consts::LOG10_2 + self.m.log10();
        let exp10 = log10.floor();
        let lead = 10f64.powf(log10 - exp10);
        let lead = (lead * 10.0).ceil() / 10.0;
        if lead >= 10.0 {
            write!(f, "1.0e{}", exp10 as i64 + 1)
        } else {
            write!(f, "{:.1}e{}", lead, exp10 as i64)
        }
    }
}

/// Exact dyadic number `man * 2^exp`, normalized so `man` is odd (or zero).
#[derive(Clone, Debug, PartialEq, Eq)]
struct Dyadic {
    man: BigInt,
    exp: i64,
}

impl Dyadic {
    fn zero() -> Dyadic {
        Dyadic { man: BigInt::zero(), exp: 0 }
    }

    fn new(man: BigInt, exp: i64) -> Dyadic {
        if man.is_zero() {
            return Dyadic::zero();
        }
        let tz = man.trailing_zeros().unwrap_or(0);
        Dyadic { man: man >> tz, exp: exp + tz as i64 }
    }

    fn from_int(n: BigInt) -> Dyadic {
        Dyadic::new(n, 0)
    }

    fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    fn bits(&self) -> u64 {
        self.man.bits()
    }

    fn neg(&self) -> Dyadic {
        Dyadic { man: -&self.man, exp: self.exp }
    }

    fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.man << (self.exp - e) as u64;
        let b = &other.man << (other.exp - e) as u64;
        Dyadic::new(a + b, e)
    }

    fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.man * &other.man, self.exp + other.exp)
    }

    fn mul_2exp(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            self.clone()
        } else {
            Dyadic { man: self.man.clone(), exp: self.exp + k }
        }
    }

    /// Round toward zero to `prec` significant bits, returning the error bound.
    fn round(&self, prec: u32) -> (Dyadic, Mag) {
        let bits = self.bits();
        if bits <= prec as u64 {
            return (self.clone(), Mag::ZERO);
        }
        let shift = bits - prec as u64;
        let mag = self.man.magnitude() >> shift;
        let man = BigInt::from_biguint(self.man.sign(), mag);
        (Dyadic::new(man, self.exp + shift as i64), Mag::pow2(self.exp + shift as i64))
    }

    /// `self / other` rounded to about `prec` bits, with error bound.
    fn div(&self, other: &Dyadic, prec: u32) -> (Dyadic, Mag) {
        assert!(!other.is_zero());
        if self.is_zero() {
            return (Dyadic::zero(), Mag::ZERO);
        }
        let k = (prec as i64 + 2 + other.bits() as i64 - self.bits() as i64).max(0);
        let num = &self.man << k as u64;
        let (q, r) = num.div_rem(&other.man);
        let exp = self.exp - other.exp - k;
        let err = if r.is_zero() { Mag::ZERO } else { Mag::pow2(exp) };
        let (d, e2) = Dyadic::new(q, exp).round(prec);
        (d, err.add(e2))
    }

    fn upper_abs(&self) -> Mag {
        if self.is_zero() {
            return Mag::ZERO;
        }
        let bits = self.bits();
        let shift = bits.saturating_sub(53);
        let top = (self.man.magnitude() >> shift).to_f64().unwrap_or(f64::MAX);
        let bump = if shift > 0 { 1.0 } else { 0.0 };
        Mag::normalized((top + bump) * EPS_UP, self.exp + shift as i64)
    }

    fn lower_abs(&self) -> Mag {
        if self.is_zero() {
            return Mag::ZERO;
        }
        let bits = self.bits();
        let shift = bits.saturating_sub(53);
        let top = (self.man.magnitude() >> shift).to_f64().unwrap_or(f64::MAX);
        Mag::normalized(top * EPS_DOWN, self.exp + shift as i64)
    }

    fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.man << self.exp as u64)
        } else {
            BigRational::new(self.man.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.bits();
        let shift = bits.saturating_sub(60);
        let top = (&self.man >> shift).to_f64().unwrap_or(0.0);
        top * 2f64.powf((self.exp + shift as i64) as f64)
    }
}

/// Certified real number: the true value lies in `[mid - rad, mid + rad]`.
#[derive(Clone, Debug)]
pub struct Real {
    mid: Dyadic,
    rad: Mag,
    prec: u32,
}

impl Real {
    pub fn zero(prec: u32) -> Real {
        Real { mid: Dyadic::zero(), rad: Mag::ZERO, prec }
    }

    pub fn one(prec: u32) -> Real {
        Real::from_i64(1, prec)
    }

    pub fn from_i64(n: i64, prec: u32) -> Real {
        Real::from_bigint(&BigInt::from(n), prec)
    }

    pub fn from_bigint(n: &BigInt, prec: u32) -> Real {
        let (mid, rad) = Dyadic::from_int(n.clone()).round(prec);
        Real { mid, rad, prec }
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Real {
        let num = Dyadic::from_int(q.numer().clone());
        let den = Dyadic::from_int(q.denom().clone());
        let (mid, rad) = num.div(&den, prec);
        Real { mid, rad, prec }
    }

    /// Nearest ball to an `f64` (exact dyadic conversion).
    pub fn from_f64(x: f64, prec: u32) -> Real {
        assert!(x.is_finite());
        let q = BigRational::from_float(x).expect("finite float");
        Real::from_rational(&q, prec)
    }

    /// Parses a decimal literal such as `-1.25e-3` exactly, then attaches `rad`.
    pub fn from_decimal(s: &str, rad: Mag, prec: u32) -> Option<Real> {
        let q = parse_decimal(s)?;
        let mut r = Real::from_rational(&q, prec);
        r.rad = r.rad.add(rad);
        Some(r)
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn radius(&self) -> Mag {
        self.rad
    }

    pub fn midpoint_rational(&self) -> BigRational {
        self.mid.to_rational()
    }

    pub fn mid_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.mid.is_zero() && self.rad.is_zero()
    }

    pub fn is_exact_one(&self) -> bool {
        self.rad.is_zero() && self.mid.exp == 0 && self.mid.man.is_one()
    }

    /// The midpoint as an exact ball.
    pub fn midpoint(&self) -> Real {
        Real { mid: self.mid.clone(), rad: Mag::ZERO, prec: self.prec }
    }

    /// Widen the radius by `extra`.
    pub fn add_error(&self, extra: Mag) -> Real {
        Real { mid: self.mid.clone(), rad: self.rad.add(extra), prec: self.prec }
    }

    pub fn with_precision(&self, prec: u32) -> Real {
        let (mid, err) = self.mid.round(prec);
        Real { mid, rad: self.rad.add(err), prec }
    }

    fn from_parts(mid: Dyadic, rad: Mag, prec: u32) -> Real {
        let (m, err) = mid.round(prec);
        Real { mid: m, rad: rad.add(err), prec }
    }

    pub fn upper_abs(&self) -> Mag {
        self.mid.upper_abs().add(self.rad)
    }

    /// Lower bound on `|x|` (zero when the ball touches zero).
    pub fn lower_abs(&self) -> Mag {
        self.mid.lower_abs().sub_down(self.rad)
    }

    pub fn contains_zero(&self) -> bool {
        self.lower_abs().is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.mid.man.sign() == Sign::Plus && !self.contains_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mid.man.sign() == Sign::Minus && !self.contains_zero()
    }

    /// True when the two balls intersect.
    pub fn overlaps(&self, other: &Real) -> bool {
        let diff = self.mid.add(&other.mid.neg());
        diff.lower_abs().cmp_value(self.rad.add(other.rad)) != Ordering::Greater
    }

    /// `|mid(self) - mid(other)|` as an upper bound.
    pub fn mid_distance(&self, other: &Real) -> Mag {
        self.mid.add(&other.mid.neg()).upper_abs()
    }

    pub fn neg(&self) -> Real {
        Real { mid: self.mid.neg(), rad: self.rad, prec: self.prec }
    }

    pub fn abs(&self) -> Real {
        if self.mid.man.sign() == Sign::Minus {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn add(&self, other: &Real) -> Real {
        let prec = self.prec.max(other.prec);
        Real::from_parts(self.mid.add(&other.mid), self.rad.add(other.rad), prec)
    }

    pub fn sub(&self, other: &Real) -> Real {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Real) -> Real {
        let prec = self.prec.max(other.prec);
        let rad =
            self.mid.upper_abs().mul(other.rad).add(other.mid.upper_abs().mul(self.rad)).add(self.rad.mul(other.rad));
        Real::from_parts(self.mid.mul(&other.mid), rad, prec)
    }

    pub fn mul_2exp(&self, k: i64) -> Real {
        Real { mid: self.mid.mul_2exp(k), rad: self.rad.mul_2exp(k), prec: self.prec }
    }

    pub fn mul_rational(&self, q: &BigRational) -> Real {
        self.mul(&Real::from_rational(q, self.prec))
    }

    pub fn square(&self) -> Real {
        self.mul(self)
    }

    /// Division; `None` if the divisor ball contains zero.
    pub fn div(&self, other: &Real) -> Option<Real> {
        let prec = self.prec.max(other.prec);
        let lower = other.lower_abs();
        if lower.is_zero() {
            return None;
        }
        let (mid, err) = self.mid.div(&other.mid, prec);
        let rad = if self.rad.is_zero() && other.rad.is_zero() {
            Mag::ZERO
        } else {
            let num = self.mid.upper_abs().mul(other.rad).add(other.mid.upper_abs().mul(self.rad));
            let den = other.mid.lower_abs().mul_down(lower);
            num.div(den)
        };
        Some(Real { mid, rad: rad.add(err), prec })
    }

    pub fn recip(&self) -> Option<Real> {
        Real::one(self.prec).div(self)
    }

    /// Integer power; negative exponents need a zero-free ball.
    pub fn powi(&self, k: i64) -> Option<Real> {
        if k == 0 {
            return Some(Real::one(self.prec));
        }
        let mut base = self.clone();
        let mut acc = Real::one(self.prec);
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        if k < 0 {
            acc.recip()
        } else {
            Some(acc)
        }
    }

    /// Square root; `None` unless the ball is certified nonnegative.
    pub fn sqrt(&self) -> Option<Real> {
        if self.is_exact_zero() {
            return Some(self.clone());
        }
        if self.mid.man.sign() != Sign::Plus {
            return None;
        }
        let lower = self.lower_abs();
        if lower.is_zero() && !self.rad.is_zero() {
            return None;
        }
        let prec = self.prec;
        // integer square root of man * 2^shift with an even total exponent
        let want = 2 * (prec as i64 + 4);
        let mut shift = (want - self.mid.bits() as i64).max(0);
        if (self.mid.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let scaled = self.mid.man.magnitude() << shift as u64;
        let root = scaled.sqrt();
        let exact = &root * &root == scaled;
        let exp = (self.mid.exp - shift) / 2;
        let root_err = if exact { Mag::ZERO } else { Mag::pow2(exp) };
        let (mid, err) = Dyadic::new(BigInt::from(root), exp).round(prec);
        let prop = if self.rad.is_zero() { Mag::ZERO } else { self.rad.div(lower.sqrt_down()) };
        Some(Real { mid, rad: root_err.add(err).add(prop), prec })
    }

    /// `pi` at the given precision (cached).
    pub fn pi(prec: u32) -> Real {
        cached_constant(&PI_CACHE, prec, compute_pi)
    }

    pub fn ln2(prec: u32) -> Real {
        cached_constant(&LN2_CACHE, prec, compute_ln2)
    }

    /// Exponential function.
    pub fn exp(&self) -> Real {
        if self.is_exact_zero() {
            return Real::one(self.prec);
        }
        let prec = self.prec;
        let mag = self.upper_abs();
        let s = match mag.exponent() {
            Some(e) => (e + 10).max(0),
            None => 0,
        };
        let wp = prec + GUARD_BITS + s as u32;
        let t = self.with_precision(wp).mul_2exp(-s);
        // |t| <= 2^-9: Taylor series with geometric tail bound
        let mut sum = Real::one(wp);
        let mut term = Real::one(wp);
        let mut n = 1i64;
        loop {
            term = term.mul(&t).div(&Real::from_i64(n, wp)).expect("nonzero");
            sum = sum.add(&term);
            if term.upper_abs().cmp_value(Mag::pow2(-(wp as i64) - 4)) == Ordering::Less {
                break;
            }
            n += 1;
        }
        // remaining terms bounded by twice the next one
        let tail = term.upper_abs().mul(t.upper_abs()).mul_2exp(1);
        let mut r = sum.add_error(tail);
        for _ in 0..s {
            r = r.square();
        }
        r.with_precision(prec)
    }

    /// Natural logarithm; `None` unless the ball is certified positive.
    pub fn log(&self) -> Option<Real> {
        if !self.is_positive() {
            return None;
        }
        if self.is_exact_one() {
            return Some(Real::zero(self.prec));
        }
        let prec = self.prec;
        let wp = prec + GUARD_BITS;
        // x = 2^k y with y in [2/3, 4/3)
        let k = self.mid.bits() as i64 + self.mid.exp - 1;
        let mut y = self.with_precision(wp).mul_2exp(-k);
        let mut k = k;
        if y.mid_f64() > 4.0 / 3.0 {
            y = y.mul_2exp(-1);
            k += 1;
        }
        let one = Real::one(wp);
        let z = y.sub(&one).div(&y.add(&one))?;
        let mut r = atanh_series(&z, wp).mul_2exp(1);
        if k != 0 {
            r = r.add(&Real::ln2(wp).mul(&Real::from_i64(k, wp)));
        }
        Some(r.with_precision(prec))
    }

    pub fn max_radius(a: &Real, b: &Real) -> Mag {
        a.rad.max(b.rad)
    }

    /// Decimal rendering of the midpoint with `digits` significant digits.
    pub fn mid_to_decimal(&self, digits: usize) -> String {
        rational_to_decimal(&self.mid.to_rational(), digits)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(30);
        write!(f, "{} ± {}", self.mid_to_decimal(digits), self.rad)
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Real) -> bool {
        self.mid == other.mid && self.rad == other.rad
    }
}

/// `atanh(z) = sum z^(2j+1)/(2j+1)` for `|z| <= 1/2`, tail included in the radius.
fn atanh_series(z: &Real, wp: u32) -> Real {
    let z2 = z.square();
    let mut power = z.clone();
    let mut sum = z.clone();
    let mut j = 1i64;
    loop {
        power = power.mul(&z2);
        let term = power.div(&Real::from_i64(2 * j + 1, wp)).expect("nonzero");
        sum = sum.add(&term);
        if power.upper_abs().cmp_value(Mag::pow2(-(wp as i64) - 4)) == Ordering::Less {
            break;
        }
        j += 1;
    }
    // tail <= |z|^(2j+3) / (1 - z^2) <= 2 |z|^(2j+3) for |z| <= 1/2
    let tail = power.upper_abs().mul(z2.upper_abs()).mul_2exp(1);
    sum.add_error(tail)
}

/// `atan(1/k)` for integer `k >= 2`, alternating series with tail bound.
fn atan_inv(k: i64, wp: u32) -> Real {
    let kk = Real::from_i64(k * k, wp);
    let mut power = Real::from_i64(k, wp).recip().expect("nonzero");
    let mut sum = power.clone();
    let mut j = 1i64;
    loop {
        power = power.div(&kk).expect("nonzero");
        let term = power.div(&Real::from_i64(2 * j + 1, wp)).expect("nonzero");
        sum = if j % 2 == 1 { sum.sub(&term) } else { sum.add(&term) };
        if power.upper_abs().cmp_value(Mag::pow2(-(wp as i64) - 4)) == Ordering::Less {
            break;
        }
        j += 1;
    }
    sum.add_error(power.upper_abs())
}

fn compute_pi(prec: u32) -> Real {
    let wp = prec + GUARD_BITS;
    let a = atan_inv(5, wp).mul_2exp(4);
    let b = atan_inv(239, wp).mul_2exp(2);
    a.sub(&b).with_precision(prec)
}

fn compute_ln2(prec: u32) -> Real {
    let wp = prec + GUARD_BITS;
    let third = Real::from_i64(3, wp).recip().expect("nonzero");
    atanh_series(&third, wp).mul_2exp(1).with_precision(prec)
}

type ConstCache = OnceLock<Mutex<BTreeMap<u32, Real>>>;
static PI_CACHE: ConstCache = OnceLock::new();
static LN2_CACHE: ConstCache = OnceLock::new();

fn cached_constant(cache: &ConstCache, prec: u32, f: fn(u32) -> Real) -> Real {
    let map = cache.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(v) = map.lock().expect("constant cache").get(&prec) {
        return v.clone();
    }
    let v = f(prec);
    map.lock().expect("constant cache").insert(prec, v.clone());
    v
}

/// Exact rational value of a decimal literal (`[-+]digits[.digits][e[-+]digits]`).
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(i) => (&digits[..i], &digits[i + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut n: BigInt = all.parse().ok()?;
    if neg {
        n = -n;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let q = if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    Some(q)
}

/// Decimal string of a rational with `digits` significant digits (truncated).
pub fn rational_to_decimal(q: &BigRational, digits: usize) -> String {
    if q.is_zero() {
        return "0".to_string();
    }
    let neg = q.is_negative();
    let a = q.abs();
    let ten = BigInt::from(10);
    // find e with 10^e <= a < 10^(e+1)
    let approx = a.numer().bits() as f64 - a.denom().bits() as f64;
    let mut e = (approx * std::f64::consts::LOG10_2).floor() as i64;
    let pow10 = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(num_traits::pow(ten.clone(), k as usize))
        } else {
            BigRational::new(BigInt::one(), num_traits::pow(ten.clone(), (-k) as usize))
        }
    };
    while pow10(e) > a {
        e -= 1;
    }
    while pow10(e + 1) <= a {
        e += 1;
    }
    let scaled = &a * pow10(digits as i64 - 1 - e);
    let int = scaled.to_integer().to_string();
    let sign = if neg { "-" } else { "" };
    let trimmed = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    let body = if (-6..digits as i64).contains(&e) {
        if e >= 0 {
            let split = (e + 1) as usize;
            if split >= int.len() {
                format!("{}{}", int, "0".repeat(split - int.len()))
            } else {
                trimmed(&format!("{}.{}", &int[..split], &int[split..]))
            }
        } else {
            trimmed(&format!("0.{}{}", "0".repeat((-e - 1) as usize), int))
        }
    } else {
        let m = trimmed(&format!("{}.{}", &int[..1], &int[1..]));
        format!("{m}e{e}")
    };
    format!("{sign}{body}")
}

/// Certified complex number with rectangular ball components.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Complex {
        Complex { re, im }
    }

    pub fn from_real(re: Real) -> Complex {
        let prec = re.precision();
        Complex { re, im: Real::zero(prec) }
    }

    pub fn zero(prec: u32) -> Complex {
        Complex::from_real(Real::zero(prec))
    }

    pub fn one(prec: u32) -> Complex {
        Complex::from_real(Real::one(prec))
    }

    pub fn i(prec: u32) -> Complex {
        Complex { re: Real::zero(prec), im: Real::one(prec) }
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Complex {
        Complex::from_real(Real::from_rational(q, prec))
    }

    /// `q * (2 pi i)^k` for exact rational `q`.
    pub fn rational_times_two_pi_i_pow(q: &BigRational, k: i64, prec: u32) -> Complex {
        let wp = prec + 16;
        let base = Complex::new(Real::zero(wp), Real::pi(wp).mul_2exp(1));
        let pow = base.powi(k).expect("2 pi i is nonzero");
        pow.scale_rational(q).with_precision(prec)
    }

    pub fn precision(&self) -> u32 {
        self.re.precision().max(self.im.precision())
    }

    pub fn with_precision(&self, prec: u32) -> Complex {
        Complex { re: self.re.with_precision(prec), im: self.im.with_precision(prec) }
    }

    pub fn midpoint(&self) -> Complex {
        Complex { re: self.re.midpoint(), im: self.im.midpoint() }
    }

    pub fn conj(&self) -> Complex {
        Complex { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn neg(&self) -> Complex {
        Complex { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn add(&self, o: &Complex) -> Complex {
        Complex { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &Complex) -> Complex {
        Complex { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn mul(&self, o: &Complex) -> Complex {
        if self.im.is_exact_zero() && o.im.is_exact_zero() {
            return Complex::from_real(self.re.mul(&o.re));
        }
        Complex { re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)), im: self.re.mul(&o.im).add(&self.im.mul(&o.re)) }
    }

    pub fn scale(&self, r: &Real) -> Complex {
        Complex { re: self.re.mul(r), im: self.im.mul(r) }
    }

    pub fn scale_rational(&self, q: &BigRational) -> Complex {
        if q.is_integer() && q.numer().is_one() {
            return self.clone();
        }
        let r = Real::from_rational(q, self.precision());
        self.scale(&r)
    }

    pub fn mul_2exp(&self, k: i64) -> Complex {
        Complex { re: self.re.mul_2exp(k), im: self.im.mul_2exp(k) }
    }

    pub fn abs_sq(&self) -> Real {
        if self.im.is_exact_zero() {
            return self.re.square();
        }
        self.re.square().add(&self.im.square())
    }

    pub fn abs(&self) -> Real {
        if self.im.is_exact_zero() {
            return self.re.abs();
        }
        self.abs_sq().sqrt().expect("squared modulus is nonnegative")
    }

    /// Lower bound on `|z|`; zero when the ball may contain the origin.
    pub fn lower_abs(&self) -> Mag {
        let a = self.re.lower_abs();
        let b = self.im.lower_abs();
        a.max(b)
    }

    pub fn upper_abs(&self) -> Mag {
        self.re.upper_abs().add(self.im.upper_abs())
    }

    pub fn mid_abs_f64(&self) -> f64 {
        self.re.mid_f64().hypot(self.im.mid_f64())
    }

    pub fn is_certified_nonzero(&self) -> bool {
        !self.lower_abs().is_zero()
    }

    pub fn radius(&self) -> Mag {
        self.re.radius().max(self.im.radius())
    }

    pub fn div(&self, o: &Complex) -> Option<Complex> {
        if o.im.is_exact_zero() {
            return Some(Complex { re: self.re.div(&o.re)?, im: self.im.div(&o.re)? });
        }
        let den = o.abs_sq();
        let num = self.mul(&o.conj());
        Some(Complex { re: num.re.div(&den)?, im: num.im.div(&den)? })
    }

    pub fn recip(&self) -> Option<Complex> {
        Complex::one(self.precision()).div(self)
    }

    pub fn powi(&self, k: i64) -> Option<Complex> {
        if k == 0 {
            return Some(Complex::one(self.precision()));
        }
        let mut base = self.clone();
        let mut acc = Complex::one(self.precision());
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        if k < 0 {
            acc.recip()
        } else {
            Some(acc)
        }
    }

    /// Balls intersect componentwise.
    pub fn overlaps(&self, other: &Complex) -> bool {
        self.re.overlaps(&other.re) && self.im.overlaps(&other.im)
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        write!(f, "({:.*}) + ({:.*})i", digits, self.re, digits, self.im)
    }
}
