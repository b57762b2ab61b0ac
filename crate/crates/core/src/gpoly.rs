//! Generalized polynomials in the shift with real exponents.
//!
//! The coefficient layers are `PolyD` (polynomials in the time derivative,
//! written `Dt` in renderings) and `RatD` (reduced quotients of such
//! polynomials). [`GPoly`] is generic over the layer: inputs and final
//! reduced data live over `PolyD`, mid-division values over `RatD`.

use crate::error::{Error, Result};
use crate::prec::Complex;
use crate::scalars::{format_rational, Exponent, Scalar};
use num_rational::BigRational;
use num_traits::One;
use std::cmp::Ordering;
use std::fmt;

// ---------------------------------------------------------------------------
// PolyD
// ---------------------------------------------------------------------------

/// Dense polynomial in the time derivative over [`Scalar`].
#[derive(Clone, Debug, PartialEq)]
pub struct PolyD {
    /// Ascending powers, trailing zeros trimmed; empty means zero.
    coeffs: Vec<Scalar>,
}

impl PolyD {
    pub fn zero() -> Self {
        PolyD { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        PolyD { coeffs: vec![Scalar::one()] }
    }

    pub fn constant(c: Scalar) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn from_coeffs(coeffs: Vec<Scalar>) -> Self {
        let mut p = PolyD { coeffs };
        p.trim();
        p
    }

    pub fn from_rationals(coeffs: &[BigRational]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|q| Scalar::from_rational(q.clone())).collect())
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&v| Scalar::from_int(v)).collect())
    }

    /// `c * Dt^k`.
    pub fn monomial(c: Scalar, k: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Scalar::zero(); k + 1];
        coeffs[k] = c;
        PolyD { coeffs }
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Scalar::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Scalar {
        self.coeffs.get(k).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Every coefficient is a plain rational.
    pub fn all_rational(&self) -> bool {
        self.coeffs.iter().all(|c| c.as_rational().is_some())
    }

    pub fn deg(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn lc(&self) -> Scalar {
        self.coeffs.last().cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(self.coeff(k).add(&other.coeff(k)));
        }
        Self::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        PolyD { coeffs: self.coeffs.iter().map(Scalar::neg).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Scalar::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        Self::from_coeffs(coeffs)
    }

    pub fn mul_scalar(&self, c: &Scalar) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    pub fn pow(&self, mut k: usize) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.mul_rational(&BigRational::from_integer((k as i64).into())))
            .collect();
        Self::from_coeffs(coeffs)
    }

    /// Exact quotient by `(Dt - root)`; `None` when the remainder is
    /// nonzero.
    pub fn deflate_root(&self, root: &BigRational) -> Option<PolyD> {
        if self.is_zero() {
            return None;
        }
        let n = self.coeffs.len();
        let r = Scalar::from_rational(root.clone());
        let mut quo = vec![Scalar::zero(); n - 1];
        let mut carry = Scalar::zero();
        for k in (0..n).rev() {
            let b = self.coeffs[k].add(&carry);
            if k == 0 {
                if !b.is_zero() {
                    return None;
                }
            } else {
                carry = b.mul(&r);
                quo[k - 1] = b;
            }
        }
        Some(PolyD::from_coeffs(quo))
    }

    /// Horner evaluation at a scalar point.
    pub fn eval_scalar(&self, s: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(s).add(c);
        }
        acc
    }

    pub fn eval_complex(&self, lam: &Complex) -> Complex {
        let scale = lam.scale();
        let mut acc = Complex::zero(scale);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(lam).add(&c.to_complex(scale));
        }
        acc
    }

    /// Euclidean division; `den` must be nonzero.
    pub fn divrem(&self, den: &Self) -> Result<(Self, Self)> {
        if den.is_zero() {
            return Err(Error::DivisionByZero("polynomial division".into()));
        }
        let dd = den.deg().unwrap();
        let lc_inv = den.lc().inv()?;
        let mut rem = self.clone();
        let mut quo = vec![Scalar::zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(dr) = rem.deg() {
            if dr < dd {
                break;
            }
            let factor = rem.lc().mul(&lc_inv);
            let k = dr - dd;
            quo[k] = factor.clone();
            let sub = den.mul(&Self::monomial(factor, k));
            rem = rem.sub(&sub);
            if rem.deg() == Some(dr) {
                // guard against nonterminating cancellation in numeric mode
                let mut c = rem.coeffs;
                c.truncate(dr);
                rem = Self::from_coeffs(c);
            }
        }
        Ok((Self::from_coeffs(quo), rem))
    }

    /// Exact quotient; errors if the remainder is nonzero.
    pub fn divexact(&self, den: &Self) -> Result<Self> {
        let (q, r) = self.divrem(den)?;
        if !r.is_zero() {
            return Err(Error::Domain("inexact polynomial division".into()));
        }
        Ok(q)
    }

    pub fn monic(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero("monic of zero polynomial".into()));
        }
        Ok(self.mul_scalar(&self.lc().inv()?))
    }

    /// Monic greatest common divisor by the Euclidean algorithm.
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let b_monic = b.monic()?;
            let (_, r) = a.divrem(&b_monic)?;
            a = b_monic;
            b = r;
        }
        if a.is_zero() {
            Ok(Self::zero())
        } else {
            a.monic()
        }
    }

    pub fn lcm(&self, other: &Self) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        if !(self.all_rational() && other.all_rational()) {
            // a valid common multiple without running the Euclidean algorithm
            return self.mul(other).monic();
        }
        let g = self.gcd(other)?;
        self.mul(other).divexact(&g)?.monic()
    }
}

impl fmt::Display for PolyD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let var = match k {
                0 => String::new(),
                1 => "Dt".into(),
                _ => format!("Dt^{k}"),
            };
            let body = match (c.as_rational(), k) {
                (Some(q), 0) => format_rational(&q),
                (Some(q), _) if q.is_one() => var.clone(),
                (Some(q), _) if q == -BigRational::one() => format!("-{var}"),
                (Some(q), _) => format!("{}*{var}", format_rational(&q)),
                (None, 0) => format!("({c})"),
                (None, _) => format!("({c})*{var}"),
            };
            parts.push(body);
        }
        let mut out = String::new();
        for (i, p) in parts.iter().enumerate() {
            if i == 0 {
                out.push_str(p);
            } else if let Some(stripped) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(stripped);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        write!(f, "{out}")
    }
}

// ---------------------------------------------------------------------------
// RatD
// ---------------------------------------------------------------------------

/// Reduced rational function in the time derivative: coprime numerator and
/// monic denominator.
#[derive(Clone, Debug)]
pub struct RatD {
    num: PolyD,
    den: PolyD,
}

impl RatD {
    pub fn new(num: PolyD, den: PolyD) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero("rational coefficient denominator".into()));
        }
        if num.is_zero() {
            return Ok(RatD { num: PolyD::zero(), den: PolyD::one() });
        }
        // full reduction only over rational coefficients: the Euclidean
        // remainder sequence blows up term counts once exponential constants
        // enter a leading coefficient
        let (mut num, mut den) = if num.all_rational() && den.all_rational() {
            let g = num.gcd(&den)?;
            if g.deg() == Some(0) {
                (num, den)
            } else {
                (num.divexact(&g)?, den.divexact(&g)?)
            }
        } else {
            (num, den)
        };
        let lc_inv = den.lc().inv()?;
        num = num.mul_scalar(&lc_inv);
        den = den.mul_scalar(&lc_inv);
        Ok(RatD { num, den })
    }

    pub fn zero() -> Self {
        RatD { num: PolyD::zero(), den: PolyD::one() }
    }

    pub fn one() -> Self {
        RatD { num: PolyD::one(), den: PolyD::one() }
    }

    pub fn from_poly(p: PolyD) -> Self {
        RatD { num: p, den: PolyD::one() }
    }

    pub fn from_scalar(s: Scalar) -> Self {
        Self::from_poly(PolyD::constant(s))
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_scalar(Scalar::from_int(v))
    }

    pub fn num(&self) -> &PolyD {
        &self.num
    }

    pub fn den(&self) -> &PolyD {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Degree as numerator degree minus denominator degree.
    pub fn deg(&self) -> Option<i64> {
        Some(self.num.deg()? as i64 - self.den.deg().unwrap_or(0) as i64)
    }

    /// Proper means degree at most zero (no polynomial growth).
    pub fn is_proper(&self) -> bool {
        self.deg().is_none_or(|d| d <= 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        Self::new(num, den).expect("denominators nonzero")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RatD { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let num = self.num.mul(&other.num);
        let den = self.den.mul(&other.den);
        Self::new(num, den).expect("denominators nonzero")
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero("inverse of zero rational".into()));
        }
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn mul_scalar(&self, c: &Scalar) -> Self {
        Self::new(self.num.mul_scalar(c), self.den.clone()).expect("den unchanged")
    }

    /// Asymptotic coefficient at `Dt^k`: zero below degree, the leading
    /// coefficient ratio at degree, undefined above.
    pub fn coeff_at_degree(&self, k: i64) -> Result<Scalar> {
        match self.deg() {
            None => Ok(Scalar::zero()),
            Some(d) if d < k => Ok(Scalar::zero()),
            Some(d) if d == k => self.num.lc().div(&self.den.lc()),
            Some(d) => Err(Error::Domain(format!(
                "coefficient extraction at degree {k} below actual degree {d}"
            ))),
        }
    }

    /// Split into polynomial part and strictly proper remainder.
    pub fn split_proper(&self) -> Result<(PolyD, RatD)> {
        let (q, r) = self.num.divrem(&self.den)?;
        Ok((q, RatD::new(r, self.den.clone())?))
    }

    pub fn to_poly(&self) -> Result<PolyD> {
        if self.den.deg() == Some(0) {
            // monic constant denominator is exactly one
            return Ok(self.num.clone());
        }
        Err(Error::CastDown(format!("denominator {} is not constant", self.den)))
    }

    pub fn eval_scalar(&self, s: &Scalar) -> Result<Scalar> {
        let d = self.den.eval_scalar(s);
        if d.is_zero() {
            return Err(Error::PolePoint("rational coefficient pole".into()));
        }
        self.num.eval_scalar(s).div(&d)
    }

    pub fn eval_complex(&self, lam: &Complex) -> Result<Complex> {
        let den = self.den.eval_complex(lam);
        let pole_margin = crate::prec::Real::from_f64(1e-6, lam.scale());
        if den.abs().cmp_real(&pole_margin) != Ordering::Greater {
            return Err(Error::PolePoint("sample point near coefficient pole".into()));
        }
        Ok(self.num.eval_complex(lam).div(&den))
    }
}

impl PartialEq for RatD {
    fn eq(&self, other: &Self) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl fmt::Display for RatD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.deg() == Some(0) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

// ---------------------------------------------------------------------------
// Coefficient layer abstraction
// ---------------------------------------------------------------------------

/// Ring operations shared by the two coefficient layers.
pub trait CoeffRing: Clone + PartialEq + fmt::Display {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool;
    /// Degree in the time derivative; `None` for zero.
    fn deg_dt(&self) -> Option<i64>;
    fn eval_complex(&self, lam: &Complex) -> Result<Complex>;
}

impl CoeffRing for PolyD {
    fn zero() -> Self {
        PolyD::zero()
    }
    fn one() -> Self {
        PolyD::one()
    }
    fn add(&self, other: &Self) -> Self {
        PolyD::add(self, other)
    }
    fn neg(&self) -> Self {
        PolyD::neg(self)
    }
    fn mul(&self, other: &Self) -> Self {
        PolyD::mul(self, other)
    }
    fn is_zero(&self) -> bool {
        PolyD::is_zero(self)
    }
    fn deg_dt(&self) -> Option<i64> {
        self.deg().map(|d| d as i64)
    }
    fn eval_complex(&self, lam: &Complex) -> Result<Complex> {
        Ok(PolyD::eval_complex(self, lam))
    }
}

impl CoeffRing for RatD {
    fn zero() -> Self {
        RatD::zero()
    }
    fn one() -> Self {
        RatD::one()
    }
    fn add(&self, other: &Self) -> Self {
        RatD::add(self, other)
    }
    fn neg(&self) -> Self {
        RatD::neg(self)
    }
    fn mul(&self, other: &Self) -> Self {
        RatD::mul(self, other)
    }
    fn is_zero(&self) -> bool {
        RatD::is_zero(self)
    }
    fn deg_dt(&self) -> Option<i64> {
        self.deg()
    }
    fn eval_complex(&self, lam: &Complex) -> Result<Complex> {
        RatD::eval_complex(self, lam)
    }
}

// ---------------------------------------------------------------------------
// GPoly
// ---------------------------------------------------------------------------

/// Generalized polynomial: finite sum of `c_i * sigma^(alpha_i)` with real
/// exponents, stored with strictly descending exponents.
#[derive(Clone, Debug)]
pub struct GPoly<C: CoeffRing> {
    terms: Vec<(Exponent, C)>,
}

pub type GPolyP = GPoly<PolyD>;
pub type GPolyR = GPoly<RatD>;

impl<C: CoeffRing> GPoly<C> {
    pub fn zero() -> Self {
        GPoly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(Exponent::zero(), c)
    }

    /// `c * sigma^alpha`.
    pub fn monomial(alpha: Exponent, c: C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        GPoly { terms: vec![(alpha, c)] }
    }

    /// Sort, merge equal exponents, drop zero coefficients.
    pub fn normalize(terms: Vec<(Exponent, C)>) -> Self {
        let mut terms = terms;
        terms.sort_by(|a, b| b.0.compare(&a.0));
        let mut out: Vec<(Exponent, C)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            if c.is_zero() {
                continue;
            }
            match out.last_mut() {
                Some((le, lc)) if le.compare(&e) == Ordering::Equal => {
                    *lc = lc.add(&c);
                    if lc.is_zero() {
                        out.pop();
                    }
                }
                _ => out.push((e, c)),
            }
        }
        GPoly { terms: out }
    }

    pub fn terms(&self) -> &[(Exponent, C)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::normalize(terms)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        GPoly { terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                terms.push((ea.add(eb), ca.mul(cb)));
            }
        }
        Self::normalize(terms)
    }

    pub fn mul_coeff(&self, c: &C) -> Self {
        Self::normalize(
            self.terms
                .iter()
                .map(|(e, a)| (e.clone(), a.mul(c)))
                .collect(),
        )
    }

    /// Multiply by `c * sigma^alpha`.
    pub fn mul_monomial(&self, alpha: &Exponent, c: &C) -> Self {
        Self::normalize(
            self.terms
                .iter()
                .map(|(e, a)| (e.add(alpha), a.mul(c)))
                .collect(),
        )
    }

    /// Largest exponent.
    pub fn deg_plus(&self) -> Result<&Exponent> {
        self.terms.first().map(|(e, _)| e).ok_or(Error::DegreeOfZero)
    }

    /// Smallest exponent.
    pub fn deg_minus(&self) -> Result<&Exponent> {
        self.terms.last().map(|(e, _)| e).ok_or(Error::DegreeOfZero)
    }

    /// Diameter of the exponent interval; nonnegative.
    pub fn deg_sigma(&self) -> Result<Exponent> {
        Ok(self.deg_plus()?.sub(self.deg_minus()?))
    }

    /// Maximal coefficient degree in the time derivative; `None` for zero.
    pub fn deg_dt(&self) -> Option<i64> {
        self.terms.iter().filter_map(|(_, c)| c.deg_dt()).max()
    }

    pub fn leading_coeff(&self) -> Result<&C> {
        self.terms.first().map(|(_, c)| c).ok_or(Error::DegreeOfZero)
    }

    pub fn trailing_coeff(&self) -> Result<&C> {
        self.terms.last().map(|(_, c)| c).ok_or(Error::DegreeOfZero)
    }

    /// Coefficient at an exponent, zero when absent.
    pub fn coeff_at(&self, alpha: &Exponent) -> C {
        self.terms
            .iter()
            .find(|(e, _)| e.compare(alpha) == Ordering::Equal)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(C::zero)
    }

    pub fn map_coeffs<D: CoeffRing>(&self, f: impl Fn(&C) -> D) -> GPoly<D> {
        GPoly::normalize(self.terms.iter().map(|(e, c)| (e.clone(), f(c))).collect())
    }
}

impl GPoly<PolyD> {
    pub fn lift(&self) -> GPoly<RatD> {
        self.map_coeffs(|c| RatD::from_poly(c.clone()))
    }
}

impl GPoly<RatD> {
    /// Cast to the polynomial layer; fails loudly on non-constant
    /// denominators.
    pub fn cast_down(&self) -> Result<GPoly<PolyD>> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            terms.push((e.clone(), c.to_poly()?));
        }
        Ok(GPoly::normalize(terms))
    }
}

impl<C: CoeffRing> PartialEq for GPoly<C> {
    fn eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

impl<C: CoeffRing> fmt::Display for GPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                if e.is_formal_zero() {
                    format!("({c})")
                } else {
                    format!("({c})*sigma^({e})")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{pi_rational, BasisRef, DelayBasis};

    fn basis_pi() -> BasisRef {
        DelayBasis::new(vec![("pi".into(), pi_rational(80))], 50).unwrap()
    }

    fn e_pi(b: &BasisRef, k: i64, off: i64) -> Exponent {
        Exponent::new(
            b,
            vec![BigRational::from_integer(k.into())],
            BigRational::from_integer(off.into()),
        )
    }

    /// Row entries of the two-strings fixture: (Dt^2 + 2 Dt) sigma^a + (Dt^2 - 2 Dt) sigma^(-a),
    /// without the common 1/4.
    fn strings_entry(b: &BasisRef, pi_mult: i64, off: i64) -> GPolyP {
        let a = e_pi(b, pi_mult, off);
        GPoly::normalize(vec![
            (a.clone(), PolyD::from_ints(&[0, 2, 1])),
            (a.neg(), PolyD::from_ints(&[0, -2, 1])),
        ])
    }

    #[test]
    fn normalize_merges_and_sorts() {
        let b = basis_pi();
        let e = e_pi(&b, 1, 0);
        let p = GPoly::normalize(vec![
            (e.clone(), PolyD::one()),
            (e.clone(), PolyD::one()),
        ]);
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.coeff_at(&e), PolyD::from_ints(&[2]));

        let q = GPoly::normalize(vec![
            (Exponent::from_offset(BigRational::from_integer(1.into())), PolyD::one()),
            (Exponent::from_offset(BigRational::from_integer(2.into())), PolyD::one()),
        ]);
        assert_eq!(q.deg_plus().unwrap().eval(), &BigRational::from_integer(2.into()));

        let r = GPoly::normalize(vec![
            (e.clone(), PolyD::from_ints(&[3])),
            (e.clone(), PolyD::from_ints(&[-3])),
        ]);
        assert!(r.is_zero());
    }

    #[test]
    fn monomial_inverse_shift() {
        let b = basis_pi();
        let p = GPoly::monomial(e_pi(&b, 1, 0), PolyD::one());
        let q = GPoly::monomial(e_pi(&b, -1, 0), PolyD::one());
        let prod = p.mul(&q);
        assert_eq!(prod, GPoly::one());
    }

    #[test]
    fn strings_degrees() {
        let b = basis_pi();
        let h11 = strings_entry(&b, 1, 0);
        let two_pi = e_pi(&b, 2, 0);
        assert_eq!(h11.deg_sigma().unwrap().compare(&two_pi), Ordering::Equal);
        assert_eq!(h11.deg_dt(), Some(2));

        let h21 = strings_entry(&b, 0, 10);
        let twenty = Exponent::from_offset(BigRational::from_integer(20.into()));
        assert_eq!(h21.deg_sigma().unwrap().compare(&twenty), Ordering::Equal);

        let c = GPoly::constant(PolyD::from_ints(&[5]));
        assert!(c.deg_sigma().unwrap().is_formal_zero());
        assert_eq!(c.deg_dt(), Some(0));

        assert!(matches!(GPolyP::zero().deg_plus(), Err(Error::DegreeOfZero)));
    }

    #[test]
    fn degree_additivity_under_mul() {
        let b = basis_pi();
        let x = strings_entry(&b, 1, 0);
        let y = strings_entry(&b, 0, 10);
        let p = x.mul(&y);
        let expect_plus = x.deg_plus().unwrap().add(y.deg_plus().unwrap());
        let expect_minus = x.deg_minus().unwrap().add(y.deg_minus().unwrap());
        assert_eq!(p.deg_plus().unwrap().compare(&expect_plus), Ordering::Equal);
        assert_eq!(p.deg_minus().unwrap().compare(&expect_minus), Ordering::Equal);
    }

    #[test]
    fn ratd_reduction_and_cast() {
        // (Dt^2 - 4) / (Dt - 2) reduces to Dt + 2
        let r = RatD::new(PolyD::from_ints(&[-4, 0, 1]), PolyD::from_ints(&[-2, 1])).unwrap();
        assert_eq!(r.to_poly().unwrap(), PolyD::from_ints(&[2, 1]));
        // (Dt + 2)/(Dt - 2) stays rational and cast fails
        let s = RatD::new(PolyD::from_ints(&[2, 1]), PolyD::from_ints(&[-2, 1])).unwrap();
        assert_eq!(s.deg(), Some(0));
        assert!(s.to_poly().is_err());
        assert!(s.is_proper());
        let lifted = GPoly::monomial(Exponent::zero(), s.clone());
        assert!(lifted.cast_down().is_err());
    }

    #[test]
    fn polyd_gcd_lcm() {
        let a = PolyD::from_ints(&[-4, 0, 1]); // (Dt-2)(Dt+2)
        let b = PolyD::from_ints(&[-2, 1]); // Dt-2
        assert_eq!(a.gcd(&b).unwrap(), b);
        let l = a.lcm(&b).unwrap();
        assert_eq!(l, a.monic().unwrap());
    }
}
