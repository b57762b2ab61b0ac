//! Exact scalar arithmetic.
//!
//! Shift exponents are rational combinations of named delay values plus a
//! rational offset. Delay values are themselves exact rationals (named
//! constants such as pi enter as their decimal truncation at the working
//! precision), so exponent evaluation and ordering are exact rational
//! computations. Two exponents compare equal when their evaluations differ by
//! at most `eps_exp`; merges of formally distinct exponents are flagged on
//! the basis.
//!
//! Constants form the field generated by exponentials of exponents:
//! [`ExpConst`] is a finite sum `sum_k q_k * exp(l_k)` with rational `q_k`,
//! and [`ConstField`] is a quotient of two such sums. [`Scalar`] adds a
//! numeric fallback used when denominator roots leave the rational numbers.

use crate::prec::{pow10, Complex, Real, GUARD_DIGITS};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::sync::Arc;

const PI_DIGITS: &str = "3.14159265358979323846264338327950288419716939937510582097494459230781640628620899862803482534211706798214808651328230665";

/// pi truncated to `digits` decimal places, as an exact rational.
pub fn pi_rational(digits: u32) -> BigRational {
    let avail = (PI_DIGITS.len() - 2) as u32;
    let d = digits.min(avail) as usize;
    parse_rational(&PI_DIGITS[..2 + d]).expect("pi literal")
}

/// Parse "p/q", integer, decimal or scientific notation into a rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mant, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mant.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mant, ""),
    };
    let neg = int_part.starts_with('-');
    let int_clean = int_part.trim_start_matches(['-', '+']);
    if !int_clean.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
        || (int_clean.is_empty() && frac_part.is_empty())
    {
        return None;
    }
    let digits = format!("{int_clean}{frac_part}");
    let mut value = BigRational::new(digits.parse().ok()?, BigInt::one());
    let shift = exp - frac_part.len() as i64;
    let ten = BigRational::from_integer(BigInt::from(10));
    if shift >= 0 {
        value *= ten.pow(shift as i32);
    } else {
        value /= ten.pow((-shift) as i32);
    }
    if neg {
        value = -value;
    }
    Some(value)
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

// ---------------------------------------------------------------------------
// Delay basis
// ---------------------------------------------------------------------------

/// Ordered table of named positive delay values.
#[derive(Debug)]
pub struct DelayBasis {
    names: Vec<String>,
    values: Vec<BigRational>,
    digits: u32,
    merged: AtomicBool,
}

pub type BasisRef = Arc<DelayBasis>;

impl PartialEq for DelayBasis {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.values == other.values && self.digits == other.digits
    }
}

impl DelayBasis {
    pub fn new(entries: Vec<(String, BigRational)>, digits: u32) -> crate::Result<BasisRef> {
        let mut names = Vec::new();
        let mut values = Vec::new();
        for (name, value) in entries {
            if !value.is_positive() {
                return Err(crate::Error::Domain(format!(
                    "delay value for '{name}' must be strictly positive"
                )));
            }
            if names.contains(&name) {
                return Err(crate::Error::Domain(format!("duplicate delay name '{name}'")));
            }
            names.push(name);
            values.push(value);
        }
        Ok(Arc::new(DelayBasis {
            names,
            values,
            digits,
            merged: AtomicBool::new(false),
        }))
    }

    pub fn empty(digits: u32) -> BasisRef {
        Arc::new(DelayBasis {
            names: Vec::new(),
            values: Vec::new(),
            digits,
            merged: AtomicBool::new(false),
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Working fixed-point scale for numeric evaluation.
    pub fn scale(&self) -> u32 {
        self.digits + GUARD_DIGITS
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Tolerance below which two exponent evaluations are identified.
    pub fn eps_exp(&self) -> BigRational {
        BigRational::new(BigInt::one(), pow10(self.digits / 2))
    }

    pub fn flag_merge(&self) {
        self.merged.store(true, AtomicOrdering::Relaxed);
    }

    /// True when two formally distinct exponents merged numerically.
    pub fn merged_exponents(&self) -> bool {
        self.merged.load(AtomicOrdering::Relaxed)
    }
}

fn unify_basis(a: &Option<BasisRef>, b: &Option<BasisRef>) -> Option<BasisRef> {
    match (a, b) {
        (None, None) => None,
        (Some(x), None) => Some(x.clone()),
        (None, Some(y)) => Some(y.clone()),
        (Some(x), Some(y)) => {
            if Arc::ptr_eq(x, y) || **x == **y {
                Some(x.clone())
            } else {
                panic!("delay basis mismatch between operands");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Exponent
// ---------------------------------------------------------------------------

/// A shift exponent: rational vector over the basis plus a rational offset.
#[derive(Clone, Debug)]
pub struct Exponent {
    basis: Option<BasisRef>,
    coeffs: Vec<BigRational>,
    offset: BigRational,
    eval: BigRational,
}

impl Exponent {
    pub fn zero() -> Self {
        Exponent {
            basis: None,
            coeffs: Vec::new(),
            offset: BigRational::zero(),
            eval: BigRational::zero(),
        }
    }

    pub fn from_offset(offset: BigRational) -> Self {
        Exponent {
            basis: None,
            coeffs: Vec::new(),
            eval: offset.clone(),
            offset,
        }
    }

    pub fn new(basis: &BasisRef, coeffs: Vec<BigRational>, offset: BigRational) -> Self {
        assert_eq!(coeffs.len(), basis.len(), "coefficient vector length");
        let mut e = Exponent {
            basis: Some(basis.clone()),
            coeffs,
            offset,
            eval: BigRational::zero(),
        };
        e.normalize();
        e
    }

    pub fn unit(basis: &BasisRef, index: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); basis.len()];
        coeffs[index] = BigRational::one();
        Self::new(basis, coeffs, BigRational::zero())
    }

    fn normalize(&mut self) {
        if self.coeffs.iter().all(|c| c.is_zero()) {
            self.coeffs.clear();
            self.basis = None;
            self.eval = self.offset.clone();
            return;
        }
        let basis = self.basis.as_ref().expect("coeffs without basis");
        let mut eval = self.offset.clone();
        for (c, v) in self.coeffs.iter().zip(basis.values()) {
            if !c.is_zero() {
                eval += c * v;
            }
        }
        self.eval = eval;
    }

    pub fn basis(&self) -> Option<&BasisRef> {
        self.basis.as_ref()
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn offset(&self) -> &BigRational {
        &self.offset
    }

    /// Exact rational evaluation over the basis values.
    pub fn eval(&self) -> &BigRational {
        &self.eval
    }

    pub fn is_formal_zero(&self) -> bool {
        self.coeffs.is_empty() && self.offset.is_zero()
    }

    fn lift(&self, basis: &Option<BasisRef>) -> Vec<BigRational> {
        match basis {
            None => Vec::new(),
            Some(b) => {
                let mut v = vec![BigRational::zero(); b.len()];
                v[..self.coeffs.len()].clone_from_slice(&self.coeffs);
                v
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let basis = unify_basis(&self.basis, &other.basis);
        let mut coeffs = self.lift(&basis);
        for (i, c) in other.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        let offset = &self.offset + &other.offset;
        match basis {
            Some(b) => Exponent::new(&b, coeffs, offset),
            None => Exponent::from_offset(offset),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut e = self.clone();
        for c in &mut e.coeffs {
            *c = -c.clone();
        }
        e.offset = -e.offset.clone();
        e.eval = -e.eval.clone();
        e
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        if factor.is_zero() {
            return Exponent::zero();
        }
        let mut e = self.clone();
        for c in &mut e.coeffs {
            *c = c.clone() * factor;
        }
        e.offset *= factor;
        e.eval *= factor;
        e
    }

    fn formally_eq(&self, other: &Self) -> bool {
        self.offset == other.offset
            && self.coeffs.len() == other.coeffs.len()
            && self.coeffs == other.coeffs
    }

    /// Total order consistent with exact numeric evaluation; `Equal` within
    /// the basis tolerance.
    pub fn compare(&self, other: &Self) -> Ordering {
        if self.formally_eq(other) {
            return Ordering::Equal;
        }
        let diff = &self.eval - &other.eval;
        let eps = match unify_basis(&self.basis, &other.basis) {
            Some(b) => b.eps_exp(),
            None => BigRational::zero(),
        };
        if diff.abs() <= eps {
            if let Some(b) = unify_basis(&self.basis, &other.basis) {
                b.flag_merge();
            }
            return Ordering::Equal;
        }
        if diff.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }

    pub fn is_zero_value(&self) -> bool {
        self.compare(&Exponent::zero()) == Ordering::Equal
    }

    pub fn to_real(&self, scale: u32) -> Real {
        Real::from_rational(&self.eval, scale)
    }
}

impl PartialEq for Exponent {
    fn eq(&self, other: &Self) -> bool {
        self.compare(other) == Ordering::Equal
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(bool, String)> = Vec::new();
        if !self.offset.is_zero() {
            parts.push((self.offset.is_negative(), format_rational(&self.offset.abs())));
        }
        if let Some(b) = &self.basis {
            for (c, name) in self.coeffs.iter().zip(b.names()) {
                if c.is_zero() {
                    continue;
                }
                let mag = c.abs();
                let body = if mag.is_one() {
                    name.clone()
                } else {
                    format!("{}*{}", format_rational(&mag), name)
                };
                parts.push((c.is_negative(), body));
            }
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (i, (neg, body)) in parts.iter().enumerate() {
            if i == 0 {
                if *neg {
                    out.push('-');
                }
            } else {
                out.push_str(if *neg { " - " } else { " + " });
            }
            out.push_str(body);
        }
        write!(f, "{out}")
    }
}

// ---------------------------------------------------------------------------
// ExpConst
// ---------------------------------------------------------------------------

/// Finite sum of rational multiples of exponentials of exponents.
#[derive(Clone, Debug)]
pub struct ExpConst {
    /// Sorted by strictly descending exponent; no zero coefficients.
    terms: Vec<(Exponent, BigRational)>,
}

impl ExpConst {
    pub fn zero() -> Self {
        ExpConst { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn from_rational(q: BigRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        ExpConst { terms: vec![(Exponent::zero(), q)] }
    }

    /// `q * exp(l)`.
    pub fn exp_term(l: Exponent, q: BigRational) -> Self {
        Self::normalize(vec![(l, q)])
    }

    pub fn normalize(mut terms: Vec<(Exponent, BigRational)>) -> Self {
        terms.sort_by(|a, b| b.0.compare(&a.0));
        let mut out: Vec<(Exponent, BigRational)> = Vec::with_capacity(terms.len());
        for (e, q) in terms {
            if q.is_zero() {
                continue;
            }
            match out.last_mut() {
                Some((le, lq)) if le.compare(&e) == Ordering::Equal => {
                    *lq += q;
                    if lq.is_zero() {
                        out.pop();
                    }
                }
                _ => out.push((e, q)),
            }
        }
        ExpConst { terms: out }
    }

    pub fn terms(&self) -> &[(Exponent, BigRational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Rational value when the sum is a pure `exp(0)` embedding.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 if self.terms[0].0.is_formal_zero() => Some(self.terms[0].1.clone()),
            _ => None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::normalize(terms)
    }

    pub fn neg(&self) -> Self {
        ExpConst {
            terms: self.terms.iter().map(|(e, q)| (e.clone(), -q.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ea, qa) in &self.terms {
            for (eb, qb) in &other.terms {
                terms.push((ea.add(eb), qa * qb));
            }
        }
        Self::normalize(terms)
    }

    pub fn mul_rational(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        ExpConst {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * q)).collect(),
        }
    }

    /// Numeric value `sum q_k * e^(l_k)` at the given fixed-point scale.
    pub fn eval(&self, scale: u32) -> Real {
        let mut acc = Real::zero(scale);
        for (e, q) in &self.terms {
            let x = Complex::from_real(e.to_real(scale)).exp().re;
            acc = acc.add(&x.mul(&Real::from_rational(q, scale)));
        }
        acc
    }

    fn leading(&self) -> Option<&(Exponent, BigRational)> {
        self.terms.first()
    }
}

impl PartialEq for ExpConst {
    fn eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

impl fmt::Display for ExpConst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (i, (e, q)) in self.terms.iter().enumerate() {
            let neg = q.is_negative();
            let mag = q.abs();
            let body = if e.is_formal_zero() {
                format_rational(&mag)
            } else if mag.is_one() {
                format!("exp({e})")
            } else {
                format!("{}*exp({e})", format_rational(&mag))
            };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        write!(f, "{out}")
    }
}

// ---------------------------------------------------------------------------
// ConstField
// ---------------------------------------------------------------------------

/// Quotient of two exponential sums; the constant field of the toolkit.
#[derive(Clone, Debug)]
pub struct ConstField {
    num: ExpConst,
    den: ExpConst,
}

impl ConstField {
    pub fn new(num: ExpConst, den: ExpConst) -> crate::Result<Self> {
        if den.is_zero() {
            return Err(crate::Error::DivisionByZero("constant field denominator".into()));
        }
        let mut v = ConstField { num, den };
        v.canonicalize();
        Ok(v)
    }

    fn canonicalize(&mut self) {
        if self.num.is_zero() {
            self.den = ExpConst::one();
            return;
        }
        // scale so the denominator's leading term has coefficient one, and
        // shift both parts so the denominator's leading exponent is zero
        let (lead_exp, lead_coef) = {
            let (e, q) = self.den.leading().expect("nonzero denominator");
            (e.clone(), q.clone())
        };
        let inv = BigRational::one() / lead_coef;
        let shift = lead_exp.neg();
        let rescale = |x: &ExpConst| -> ExpConst {
            ExpConst::normalize(
                x.terms()
                    .iter()
                    .map(|(e, q)| (e.add(&shift), q * &inv))
                    .collect(),
            )
        };
        self.num = rescale(&self.num);
        self.den = rescale(&self.den);
    }

    pub fn zero() -> Self {
        ConstField { num: ExpConst::zero(), den: ExpConst::one() }
    }

    pub fn one() -> Self {
        ConstField { num: ExpConst::one(), den: ExpConst::one() }
    }

    pub fn from_rational(q: BigRational) -> Self {
        ConstField { num: ExpConst::from_rational(q), den: ExpConst::one() }
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_exp(e: Exponent) -> Self {
        ConstField { num: ExpConst::exp_term(e, BigRational::one()), den: ExpConst::one() }
    }

    pub fn num(&self) -> &ExpConst {
        &self.num
    }

    pub fn den(&self) -> &ExpConst {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        let n = self.num.as_rational()?;
        let d = self.den.as_rational()?;
        Some(n / d)
    }

    pub fn add(&self, other: &Self) -> Self {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        ConstField::new(num, den).expect("nonzero denominator closed under mul")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        ConstField { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let num = self.num.mul(&other.num);
        let den = self.den.mul(&other.den);
        ConstField::new(num, den).expect("nonzero denominator closed under mul")
    }

    pub fn mul_rational(&self, q: &BigRational) -> Self {
        ConstField::new(self.num.mul_rational(q), self.den.clone()).expect("den unchanged")
    }

    pub fn inv(&self) -> crate::Result<Self> {
        if self.is_zero() {
            return Err(crate::Error::DivisionByZero("inverse of zero constant".into()));
        }
        ConstField::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &Self) -> crate::Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn eval(&self, scale: u32) -> Real {
        let d = self.den.eval(scale);
        self.num.eval(scale).div(&d)
    }
}

impl PartialEq for ConstField {
    fn eq(&self, other: &Self) -> bool {
        // cross multiplication
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl fmt::Display for ConstField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.den.as_rational() {
            if q.is_one() {
                return write!(f, "{}", self.num);
            }
        }
        write!(f, "({})/({})", self.num, self.den)
    }
}

// ---------------------------------------------------------------------------
// Scalar
// ---------------------------------------------------------------------------

/// A coefficient value: exact where possible, high-precision numeric after an
/// irrational denominator root forced the fallback.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(ConstField),
    Num(Complex),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(ConstField::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(ConstField::one())
    }

    pub fn from_rational(q: BigRational) -> Self {
        Scalar::Exact(ConstField::from_rational(q))
    }

    pub fn from_int(v: i64) -> Self {
        Scalar::Exact(ConstField::from_int(v))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Scalar::Exact(c) => c.as_rational(),
            Scalar::Num(_) => None,
        }
    }

    fn num_eps(scale: u32) -> Real {
        Real::eps_pow10(scale.saturating_sub(GUARD_DIGITS - 10), scale)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(c) => c.is_zero(),
            Scalar::Num(v) => v.abs().cmp_real(&Self::num_eps(v.scale())) != Ordering::Greater,
        }
    }

    pub fn to_complex(&self, scale: u32) -> Complex {
        match self {
            Scalar::Exact(c) => Complex::from_real(c.eval(scale)),
            Scalar::Num(v) => v.rescale(scale),
        }
    }

    fn binop(
        &self,
        other: &Self,
        exact: impl Fn(&ConstField, &ConstField) -> ConstField,
        num: impl Fn(&Complex, &Complex) -> Complex,
    ) -> Self {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(exact(a, b)),
            (Scalar::Num(a), Scalar::Num(b)) => Scalar::Num(num(a, b)),
            (Scalar::Exact(a), Scalar::Num(b)) => {
                Scalar::Num(num(&Complex::from_real(a.eval(b.scale())), b))
            }
            (Scalar::Num(a), Scalar::Exact(b)) => {
                Scalar::Num(num(a, &Complex::from_real(b.eval(a.scale()))))
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.binop(other, |a, b| a.add(b), |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.binop(other, |a, b| a.sub(b), |a, b| a.sub(b))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.binop(other, |a, b| a.mul(b), |a, b| a.mul(b))
    }

    pub fn neg(&self) -> Self {
        match self {
            Scalar::Exact(c) => Scalar::Exact(c.neg()),
            Scalar::Num(v) => Scalar::Num(v.neg()),
        }
    }

    pub fn inv(&self) -> crate::Result<Self> {
        if self.is_zero() {
            return Err(crate::Error::DivisionByZero("inverse of zero scalar".into()));
        }
        Ok(match self {
            Scalar::Exact(c) => Scalar::Exact(c.inv()?),
            Scalar::Num(v) => Scalar::Num(v.inv()),
        })
    }

    pub fn div(&self, other: &Self) -> crate::Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn mul_rational(&self, q: &BigRational) -> Self {
        match self {
            Scalar::Exact(c) => Scalar::Exact(c.mul_rational(q)),
            Scalar::Num(v) => Scalar::Num(v.mul_real(&Real::from_rational(q, v.scale()))),
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => self.sub(other).is_zero(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(c) => write!(f, "{c}"),
            Scalar::Num(v) => {
                if v.im.is_zero() {
                    write!(f, "num({})", v.re)
                } else {
                    write!(f, "num({}, {})", v.re, v.im)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis_pi() -> BasisRef {
        DelayBasis::new(vec![("pi".into(), pi_rational(80))], 50).unwrap()
    }

    fn exp_pi(basis: &BasisRef, k: i64, off: i64) -> Exponent {
        Exponent::new(
            basis,
            vec![BigRational::from_integer(k.into())],
            BigRational::from_integer(off.into()),
        )
    }

    #[test]
    fn compare_pi_vs_ten() {
        let b = basis_pi();
        let pi = exp_pi(&b, 1, 0);
        let ten = Exponent::from_offset(BigRational::from_integer(10.into()));
        assert_eq!(pi.compare(&ten), Ordering::Less);
        assert_eq!(pi.compare(&pi.clone()), Ordering::Equal);
    }

    #[test]
    fn compare_derived_combination() {
        // 10 - 3*pi = 0.5752... vs -10 + 4*pi = 2.5663...
        let b = basis_pi();
        let a = exp_pi(&b, -3, 10);
        let c = exp_pi(&b, 4, -10);
        assert_eq!(a.compare(&c), Ordering::Less);
        assert!(!b.merged_exponents());
    }

    #[test]
    fn eval_identity_and_cancellation() {
        let b = basis_pi();
        let one = ExpConst::one();
        assert_eq!(one.eval(80).to_f64(), 1.0);
        let p = ExpConst::exp_term(exp_pi(&b, 1, 0), BigRational::one());
        let m = ExpConst::exp_term(exp_pi(&b, -1, 0), BigRational::one());
        let prod = p.mul(&m);
        assert_eq!(prod.as_rational(), Some(BigRational::one()));
    }

    #[test]
    fn eval_benchmark_correction_constant() {
        // 16 * e^(6 pi - 20) = 5.0639390244223807569818867467086...
        let b = basis_pi();
        let c = ExpConst::exp_term(exp_pi(&b, 6, -20), BigRational::from_integer(16.into()));
        let v = c.eval(80);
        let expect =
            Real::parse_decimal("5.063939024422380756981886746708624172137", 80).unwrap();
        let err = v.sub(&expect).abs();
        assert!(err.to_f64() < 1e-35, "value {v} err {err}");
    }

    #[test]
    fn field_axioms_spot() {
        let b = basis_pi();
        let x = ConstField::new(
            ExpConst::exp_term(exp_pi(&b, 1, 0), BigRational::one())
                .add(&ExpConst::from_rational(BigRational::one())),
            ExpConst::one(),
        )
        .unwrap();
        // x + 0 = x, x * x^-1 = 1
        assert_eq!(x.add(&ConstField::zero()), x);
        assert_eq!(x.mul(&x.inv().unwrap()), ConstField::one());
        // (e^pi + 1)(e^pi - 1) = e^(2 pi) - 1
        let y = ConstField::new(
            ExpConst::exp_term(exp_pi(&b, 1, 0), BigRational::one())
                .sub(&ExpConst::one()),
            ExpConst::one(),
        )
        .unwrap();
        let lhs = x.mul(&y);
        let rhs = ConstField::new(
            ExpConst::exp_term(exp_pi(&b, 2, 0), BigRational::one()).sub(&ExpConst::one()),
            ExpConst::one(),
        )
        .unwrap();
        assert_eq!(lhs, rhs);
        // numeric cross-check
        let err = lhs.eval(80).sub(&rhs.eval(80)).abs();
        assert!(err.to_f64() < 1e-40);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/4"), Some(BigRational::new(3.into(), 4.into())));
        assert_eq!(parse_rational("-1.25"), Some(BigRational::new((-5).into(), 4.into())));
        assert_eq!(
            parse_rational("1e-2"),
            Some(BigRational::new(1.into(), 100.into()))
        );
        assert_eq!(parse_rational("2.5e3"), Some(BigRational::from_integer(2500.into())));
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn scalar_contagion() {
        let a = Scalar::from_int(3);
        let b = Scalar::Num(Complex::from_real(Real::from_f64(2.0, 80)));
        let c = a.mul(&b);
        assert!(!c.is_exact());
        assert_eq!(c.to_complex(80).re.to_f64(), 6.0);
    }
}
