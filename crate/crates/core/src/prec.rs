//! Fixed-point arithmetic with configurable decimal precision.
//!
//! The public interface speaks decimal digits; internally values are stored
//! as `mant * 2^-bits` with an exact [`BigInt`] mantissa, so rescaling after
//! a product is a bit shift rather than a division. Addition and subtraction
//! are exact and every rounding step loses at most one unit in the last
//! place. The pipeline works at `digits + GUARD_DIGITS` decimal places.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Extra decimal places carried beyond the requested precision.
pub const GUARD_DIGITS: u32 = 30;

pub fn pow10(k: u32) -> BigInt {
    BigInt::from(10u32).pow(k)
}

/// Binary precision backing a decimal scale.
fn bits_for(scale: u32) -> u64 {
    (scale as f64 * std::f64::consts::LOG2_10).ceil() as u64 + 1
}

/// Round `num / den` to the nearest integer, ties away from zero.
/// `den` must be positive.
fn div_round(num: &BigInt, den: &BigInt) -> BigInt {
    debug_assert!(den.is_positive());
    let two = BigInt::from(2);
    if num.is_negative() {
        -((-num + den / &two) / den)
    } else {
        (num + den / &two) / den
    }
}

/// Rounded right shift by `k` bits, ties away from zero.
fn shr_round(x: &BigInt, k: u64) -> BigInt {
    if k == 0 {
        return x.clone();
    }
    let half = BigInt::from(1) << (k - 1);
    if x.is_negative() {
        -((-x + half) >> k)
    } else {
        (x + half) >> k
    }
}

/// A real number at a fixed decimal scale (binary mantissa internally).
#[derive(Clone, PartialEq, Eq)]
pub struct Real {
    mant: BigInt,
    scale: u32,
}

impl Real {
    fn bits(&self) -> u64 {
        bits_for(self.scale)
    }

    pub fn zero(scale: u32) -> Self {
        Real { mant: BigInt::zero(), scale }
    }

    pub fn one(scale: u32) -> Self {
        Real { mant: BigInt::from(1) << bits_for(scale), scale }
    }

    pub fn from_int(v: i64, scale: u32) -> Self {
        Real { mant: BigInt::from(v) << bits_for(scale), scale }
    }

    pub fn from_rational(r: &BigRational, scale: u32) -> Self {
        let num = r.numer() << bits_for(scale);
        Real { mant: div_round(&num, r.denom()), scale }
    }

    pub fn from_f64(v: f64, scale: u32) -> Self {
        let r = BigRational::from_float(v).unwrap_or_else(BigRational::zero);
        Self::from_rational(&r, scale)
    }

    /// `10^-k` at the given scale.
    pub fn eps_pow10(k: u32, scale: u32) -> Self {
        Self::from_rational(&BigRational::new(BigInt::from(1), pow10(k)), scale)
    }

    /// Exact rational value of the stored fixed-point number.
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.mant.clone(), BigInt::from(1) << self.bits())
    }

    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let nb = self.mant.bits();
        let shift = nb.saturating_sub(53);
        let head = (&self.mant >> shift).to_f64().unwrap_or(0.0);
        head * 2f64.powi((shift as i64 - self.bits() as i64) as i32)
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn rescale(&self, scale: u32) -> Self {
        let from = self.bits();
        let to = bits_for(scale);
        match to.cmp(&from) {
            Ordering::Equal => Real { mant: self.mant.clone(), scale },
            Ordering::Greater => Real { mant: &self.mant << (to - from), scale },
            Ordering::Less => Real { mant: shr_round(&self.mant, from - to), scale },
        }
    }

    fn unify(&self, other: &Self) -> (Real, Real, u32) {
        let s = self.scale.max(other.scale);
        (self.rescale(s), other.rescale(s), s)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b, s) = self.unify(other);
        Real { mant: a.mant + b.mant, scale: s }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (a, b, s) = self.unify(other);
        Real { mant: a.mant - b.mant, scale: s }
    }

    pub fn neg(&self) -> Self {
        Real { mant: -&self.mant, scale: self.scale }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b, s) = self.unify(other);
        Real { mant: shr_round(&(&a.mant * &b.mant), bits_for(s)), scale: s }
    }

    pub fn div(&self, other: &Self) -> Self {
        let (a, b, s) = self.unify(other);
        assert!(!b.mant.is_zero(), "division by zero Real");
        let num = &a.mant << bits_for(s);
        let mant = if b.mant.is_negative() {
            div_round(&-num, &-b.mant)
        } else {
            div_round(&num, &b.mant)
        };
        Real { mant, scale: s }
    }

    pub fn abs(&self) -> Self {
        Real { mant: self.mant.abs(), scale: self.scale }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn cmp_real(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.unify(other);
        a.mant.cmp(&b.mant)
    }

    /// Floor square root; requires a nonnegative value.
    pub fn sqrt(&self) -> Self {
        assert!(!self.mant.is_negative(), "sqrt of negative Real");
        let shifted = &self.mant << self.bits();
        Real { mant: num_integer::Roots::sqrt(&shifted), scale: self.scale }
    }

    /// Halve `k` times with one rounding at the end.
    fn div_pow2(&self, k: u32) -> Self {
        Real { mant: shr_round(&self.mant, k as u64), scale: self.scale }
    }

    /// Approximate decimal magnitude: `value ~ 10^mag10`.
    fn mag10(&self) -> i64 {
        if self.mant.is_zero() {
            return i64::MIN / 2;
        }
        let bits = self.mant.bits() as i64 - self.bits() as i64;
        (bits as f64 * 0.30103).ceil() as i64
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string())
    }
}

impl Real {
    /// Exact decimal rendering of the stored binary fraction; parses back to
    /// the identical value.
    pub fn to_decimal_string(&self) -> String {
        let bits = self.bits();
        // mant / 2^b = mant * 5^b / 10^b, which is a finite decimal
        let expanded = &self.mant * BigInt::from(5u32).pow(bits as u32);
        let neg = expanded.is_negative();
        let digits = expanded.abs().to_string();
        let s = bits as usize;
        let padded = if digits.len() <= s {
            format!("0.{}{}", "0".repeat(s - digits.len()), digits)
        } else {
            let (int, frac) = digits.split_at(digits.len() - s);
            if s == 0 { int.to_string() } else { format!("{int}.{frac}") }
        };
        let trimmed = if padded.contains('.') {
            let t = padded.trim_end_matches('0');
            let t = t.strip_suffix('.').unwrap_or(t);
            t.to_string()
        } else {
            padded
        };
        if neg { format!("-{trimmed}") } else { trimmed }
    }

    /// Parse a decimal string at the given scale.
    pub fn parse_decimal(s: &str, scale: u32) -> Option<Self> {
        let r = crate::scalars::parse_rational(s)?;
        Some(Self::from_rational(&r, scale))
    }
}

/// Complex number over [`Real`].
#[derive(Clone, PartialEq, Debug)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Self {
        let s = re.scale().max(im.scale());
        Complex { re: re.rescale(s), im: im.rescale(s) }
    }

    pub fn zero(scale: u32) -> Self {
        Complex { re: Real::zero(scale), im: Real::zero(scale) }
    }

    pub fn one(scale: u32) -> Self {
        Complex { re: Real::one(scale), im: Real::zero(scale) }
    }

    pub fn from_real(re: Real) -> Self {
        let s = re.scale();
        Complex { re, im: Real::zero(s) }
    }

    pub fn from_rational(r: &BigRational, scale: u32) -> Self {
        Complex::from_real(Real::from_rational(r, scale))
    }

    pub fn scale(&self) -> u32 {
        self.re.scale()
    }

    pub fn rescale(&self, scale: u32) -> Self {
        Complex { re: self.re.rescale(scale), im: self.im.rescale(scale) }
    }

    pub fn add(&self, o: &Self) -> Self {
        Complex::new(self.re.add(&o.re), self.im.add(&o.im))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Complex::new(self.re.sub(&o.re), self.im.sub(&o.im))
    }

    pub fn neg(&self) -> Self {
        Complex { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let re = self.re.mul(&o.re).sub(&self.im.mul(&o.im));
        let im = self.re.mul(&o.im).add(&self.im.mul(&o.re));
        Complex::new(re, im)
    }

    pub fn mul_real(&self, r: &Real) -> Self {
        Complex::new(self.re.mul(r), self.im.mul(r))
    }

    pub fn div(&self, o: &Self) -> Self {
        let n2 = o.re.mul(&o.re).add(&o.im.mul(&o.im));
        assert!(!n2.is_zero(), "division by zero Complex");
        let re = self.re.mul(&o.re).add(&self.im.mul(&o.im)).div(&n2);
        let im = self.im.mul(&o.re).sub(&self.re.mul(&o.im)).div(&n2);
        Complex::new(re, im)
    }

    pub fn inv(&self) -> Self {
        Complex::one(self.scale()).div(self)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn abs(&self) -> Real {
        self.re.mul(&self.re).add(&self.im.mul(&self.im)).sqrt()
    }

    fn div_pow2(&self, k: u32) -> Self {
        Complex { re: self.re.div_pow2(k), im: self.im.div_pow2(k) }
    }

    /// e^z by argument halving, a truncated series and repeated squaring.
    pub fn exp(&self) -> Self {
        let s = self.scale();
        let mag = self.re.mag10().max(self.im.mag10());
        assert!(
            mag <= 4,
            "exp argument out of supported range (|z| beyond 1e4)"
        );
        // halve until |z| <= ~1/4
        let m = if mag <= -1 {
            0
        } else {
            (2 + (10f64.powi(mag as i32).log2().ceil() as i64).max(0)) as u32
        };
        let work = s + 12 + m;
        let zr = self.rescale(work).div_pow2(m);
        // series sum_k z^k / k!
        let mut sum = Complex::one(work);
        let mut term = Complex::one(work);
        // terms below 2^-(work_bits - 40) no longer matter after squaring
        let threshold = BigInt::from(1) << 40u32;
        for k in 1..10_000u32 {
            term = term.mul(&zr);
            let kk = BigInt::from(k);
            term = Complex {
                re: Real { mant: div_round(&term.re.mant, &kk), scale: work },
                im: Real { mant: div_round(&term.im.mant, &kk), scale: work },
            };
            sum = sum.add(&term);
            if term.re.mant.abs() < threshold && term.im.mant.abs() < threshold {
                break;
            }
        }
        let mut out = sum;
        for _ in 0..m {
            out = out.mul(&out);
        }
        out.rescale(s)
    }
}

/// pi rounded to the given scale.
pub fn pi(scale: u32) -> Real {
    Real::from_rational(&crate::scalars::pi_rational(scale + 2), scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: f64) -> Real {
        Real::from_f64(v, 60)
    }

    #[test]
    fn fixed_point_basics() {
        let a = r(1.5);
        let b = r(2.25);
        assert_eq!(a.mul(&b).to_f64(), 3.375);
        assert_eq!(a.add(&b).to_f64(), 3.75);
        assert_eq!(b.div(&a).to_f64(), 1.5);
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn sqrt_matches() {
        let v = r(2.0).sqrt();
        let err = v.mul(&v).sub(&r(2.0)).abs();
        assert!(err.to_f64() < 1e-55, "sqrt error {}", err);
    }

    #[test]
    fn exp_real_axis() {
        let e1 = Complex::from_real(r(1.0)).exp();
        // e = 2.718281828459045235360287471352662497757...
        let expect = Real::parse_decimal("2.718281828459045235360287471352662497757", 60).unwrap();
        let err = e1.re.sub(&expect).abs();
        assert!(err.to_f64() < 1e-38, "exp(1) error {}", err);
        assert!(e1.im.is_zero());
    }

    #[test]
    fn exp_additivity() {
        let scale = 80;
        let z1 = Complex::new(Real::from_f64(2.3, scale), Real::from_f64(-1.1, scale));
        let z2 = Complex::new(Real::from_f64(-0.7, scale), Real::from_f64(3.9, scale));
        let lhs = z1.add(&z2).exp();
        let rhs = z1.exp().mul(&z2.exp());
        let err = lhs.sub(&rhs).abs();
        assert!(err.to_f64() < 1e-70, "additivity error {}", err);
    }

    #[test]
    fn exp_large_argument() {
        let scale = 80;
        // e^100 ~ 2.6881171418161354e43
        let z = Complex::from_real(Real::from_int(100, scale));
        let v = z.exp();
        let lg = v.re.to_f64().log10();
        assert!((lg - 43.42944819).abs() < 1e-6, "log10 e^100 = {}", lg);
    }

    #[test]
    fn decimal_roundtrip() {
        let v = Real::from_rational(&BigRational::new((-12345).into(), 789.into()), 40);
        let s = v.to_decimal_string();
        let back = Real::parse_decimal(&s, 40).unwrap();
        assert_eq!(v, back);
    }

    #[test]
    fn eps_constructor() {
        let e = Real::eps_pow10(30, 80);
        assert!((e.to_f64().log10() + 30.0).abs() < 1e-9);
    }
}
