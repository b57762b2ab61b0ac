//! Numeric certification of symbolic identities.
//!
//! Operators are identified with their Laplace symbols: the shift
//! `sigma^alpha` becomes `e^(lambda alpha)` and the time derivative becomes
//! `lambda`. Identities are then checked by evaluating both sides at random
//! complex points in a disc; complex sampling avoids the sign-symmetric
//! cancellations of hyperbolic shift sums on the real axis.

use crate::division::RootSet;
use crate::error::{Error, Result};
use crate::gpoly::{CoeffRing, GPoly, GPolyR};
use crate::prec::{Complex, Real};
use crate::scalars::Exponent;
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::HashMap;

/// One sample point for symbol evaluation.
#[derive(Clone, Debug)]
pub struct SymbolPoint {
    pub lambda: Complex,
}

/// Configuration of the identity checker.
#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub seed: u64,
    pub trials: usize,
    pub radius: f64,
    pub tol: BigRational,
    pub scale: u32,
    /// Points the sampler must keep a margin from (denominator roots).
    pub avoid: Vec<Complex>,
}

impl OracleConfig {
    pub fn new(seed: u64, digits: u32, tol: BigRational) -> Self {
        OracleConfig {
            seed,
            trials: 64,
            radius: 5.0,
            tol,
            scale: digits + crate::prec::GUARD_DIGITS,
            avoid: Vec::new(),
        }
    }
}

/// Result of one identity check.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub name: String,
    pub points: usize,
    pub max_residual: Real,
    pub pass: bool,
}

impl CheckReport {
    pub fn line(&self) -> String {
        format!(
            "[{}] {}: max residual {} over {} points",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.max_residual.to_f64(),
            self.points
        )
    }
}

/// Cache of `e^(lambda alpha)` keyed by the exact exponent value.
pub struct PointEvaluator {
    lambda: Complex,
    cache: HashMap<BigRational, Complex>,
}

impl PointEvaluator {
    pub fn new(pt: &SymbolPoint) -> Self {
        PointEvaluator { lambda: pt.lambda.clone(), cache: HashMap::new() }
    }

    fn shift_factor(&mut self, e: &Exponent) -> Complex {
        let key = e.eval().clone();
        if let Some(v) = self.cache.get(&key) {
            return v.clone();
        }
        let scale = self.lambda.scale();
        let v = self
            .lambda
            .mul_real(&Real::from_rational(&key, scale))
            .exp();
        self.cache.insert(key, v.clone());
        v
    }

    /// `sum_i c_i(lambda) e^(lambda alpha_i)`.
    pub fn eval<C: CoeffRing>(&mut self, g: &GPoly<C>) -> Result<Complex> {
        let mut acc = Complex::zero(self.lambda.scale());
        for (e, c) in g.terms() {
            let coef = c.eval_complex(&self.lambda)?;
            acc = acc.add(&coef.mul(&self.shift_factor(e)));
        }
        Ok(acc)
    }
}

/// Evaluate a single generalized polynomial at one point.
pub fn eval_symbol<C: CoeffRing>(g: &GPoly<C>, pt: &SymbolPoint) -> Result<Complex> {
    PointEvaluator::new(pt).eval(g)
}

/// An identity `sum of products = sum of products` over the rational layer.
#[derive(Clone, Debug)]
pub struct Identity {
    pub name: String,
    pub lhs: Vec<Vec<GPolyR>>,
    pub rhs: Vec<Vec<GPolyR>>,
}

impl Identity {
    pub fn equal(name: impl Into<String>, lhs: GPolyR, rhs: GPolyR) -> Self {
        Identity { name: name.into(), lhs: vec![vec![lhs]], rhs: vec![vec![rhs]] }
    }

    fn eval_side(side: &[Vec<GPolyR>], ev: &mut PointEvaluator, scale: u32) -> Result<Complex> {
        let mut acc = Complex::zero(scale);
        for product in side {
            let mut term = Complex::one(scale);
            for factor in product {
                term = term.mul(&ev.eval(factor)?);
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Relative residual at one point: `|lhs - rhs| / max(|lhs|, 1)`.
    pub fn residual_at(&self, pt: &SymbolPoint) -> Result<Real> {
        let scale = pt.lambda.scale();
        let mut ev = PointEvaluator::new(pt);
        let lhs = Self::eval_side(&self.lhs, &mut ev, scale)?;
        let rhs = Self::eval_side(&self.rhs, &mut ev, scale)?;
        let diff = lhs.sub(&rhs).abs();
        let mag = lhs.abs();
        let floor = Real::one(scale);
        let denom = if mag.cmp_real(&floor) == Ordering::Greater { mag } else { floor };
        Ok(diff.div(&denom))
    }
}

/// Draw sample points in the disc, keeping a margin from the avoid list.
pub fn sample_points(cfg: &OracleConfig) -> Vec<SymbolPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.trials);
    let margin = Real::from_f64(1e-3, cfg.scale);
    let mut attempts = 0usize;
    while out.len() < cfg.trials && attempts < cfg.trials * 200 {
        attempts += 1;
        let re: f64 = rng.gen_range(-cfg.radius..cfg.radius);
        let im: f64 = rng.gen_range(-cfg.radius..cfg.radius);
        if re * re + im * im > cfg.radius * cfg.radius {
            continue;
        }
        let lambda = Complex::new(
            Real::from_f64(re, cfg.scale),
            Real::from_f64(im, cfg.scale),
        );
        let near_pole = cfg
            .avoid
            .iter()
            .any(|p| lambda.sub(&p.rescale(cfg.scale)).abs().cmp_real(&margin) != Ordering::Greater);
        if near_pole {
            continue;
        }
        out.push(SymbolPoint { lambda });
    }
    out
}

/// Check one identity at sampled points; failures are reported, not thrown.
pub fn check_identity(id: &Identity, cfg: &OracleConfig) -> CheckReport {
    check_identities(std::slice::from_ref(id), cfg).pop().unwrap()
}

/// Check several identities over one shared point set (parallel over
/// points).
pub fn check_identities(ids: &[Identity], cfg: &OracleConfig) -> Vec<CheckReport> {
    let points = sample_points(cfg);
    let tol = Real::from_rational(&cfg.tol, cfg.scale);
    ids.iter()
        .map(|id| {
            let residuals: Vec<Real> = points
                .par_iter()
                .map(|pt| match id.residual_at(pt) {
                    Ok(r) => r,
                    // a pole slipped through the margin: treat as no
                    // information from this point rather than a failure
                    Err(Error::PolePoint(_)) => Real::zero(cfg.scale),
                    Err(_) => Real::one(cfg.scale),
                })
                .collect();
            let max_residual = residuals
                .into_iter()
                .fold(Real::zero(cfg.scale), |a, b| {
                    if b.cmp_real(&a) == Ordering::Greater { b } else { a }
                });
            let pass = max_residual.cmp_real(&tol) != Ordering::Greater;
            CheckReport { name: id.name.clone(), points: points.len(), max_residual, pass }
        })
        .collect()
}

/// Numeric re-verification that a corrected quotient has an entire symbol:
/// after clearing denominators, the numerator symbol and its derivatives up
/// to the root multiplicity must vanish at every denominator root.
pub fn check_entire(
    name: impl Into<String>,
    qstar: &GPolyR,
    roots: &RootSet,
    digits: u32,
    tol: &BigRational,
) -> Result<CheckReport> {
    let scale = digits + crate::prec::GUARD_DIGITS;
    let den = crate::division::common_denominator(qstar)?;
    // numerator polynomials per term, evaluated numerically throughout
    let numerators: Vec<(Exponent, crate::gpoly::PolyD)> = qstar
        .terms()
        .iter()
        .map(|(e, c)| Ok((e.clone(), c.num().mul(&den.divexact(c.den())?))))
        .collect::<Result<_>>()?;

    let tol_real = Real::from_rational(tol, scale);
    let mut max_residual = Real::zero(scale);
    for (root, mult) in &roots.roots {
        let s = root.to_complex(scale);
        for order in 0..*mult {
            // derivative ladder b -> b' + alpha b, evaluated at the root
            let mut value = Complex::zero(scale);
            let mut reference = Real::zero(scale);
            for (alpha, num) in &numerators {
                let alpha_r = Real::from_rational(alpha.eval(), scale);
                let mut b = num.clone();
                for _ in 0..order {
                    let scaled = b.mul_scalar(&crate::scalars::Scalar::from_rational(
                        alpha.eval().clone(),
                    ));
                    b = b.derivative().add(&scaled);
                }
                let term = b.eval_complex(&s).mul(&s.mul_real(&alpha_r).exp());
                reference = reference.add(&term.abs());
                value = value.add(&term);
            }
            let floor = Real::one(scale);
            let denom = if reference.cmp_real(&floor) == Ordering::Greater {
                reference
            } else {
                floor
            };
            let residual = value.abs().div(&denom);
            if residual.cmp_real(&max_residual) == Ordering::Greater {
                max_residual = residual;
            }
        }
    }
    let pass = max_residual.cmp_real(&tol_real) != Ordering::Greater;
    Ok(CheckReport {
        name: name.into(),
        points: roots.total_multiplicity(),
        max_residual,
        pass,
    })
}

/// Multiply one coefficient of one term by `1 + magnitude` (fault-injection
/// hook for the verification suite). The choice of term and coefficient is
/// deterministic in the seed.
pub fn perturb_gpoly(g: &GPolyR, magnitude: &BigRational, seed: u64) -> GPolyR {
    if g.is_zero() {
        return g.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let term_idx = rng.gen_range(0..g.num_terms());
    let factor = BigRational::one() + magnitude;
    let terms: Vec<_> = g
        .terms()
        .iter()
        .enumerate()
        .map(|(i, (e, c))| {
            if i == term_idx {
                let mut coeffs: Vec<_> = c.num().coeffs().to_vec();
                let nonzero: Vec<usize> = coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(k, _)| k)
                    .collect();
                if !nonzero.is_empty() {
                    let k = nonzero[rng.gen_range(0..nonzero.len())];
                    coeffs[k] = coeffs[k].mul_rational(&factor);
                }
                let num = crate::gpoly::PolyD::from_coeffs(coeffs);
                (e.clone(), crate::gpoly::RatD::new(num, c.den().clone()).unwrap())
            } else {
                (e.clone(), c.clone())
            }
        })
        .collect();
    GPoly::normalize(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use crate::gpoly::{GPoly, PolyD, RatD};
    use crate::scalars::{pi_rational, BasisRef, DelayBasis, Exponent};

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

    fn strings_entry(b: &BasisRef, pi_mult: i64, off: i64) -> GPolyR {
        let a = e_pi(b, pi_mult, off);
        GPoly::<PolyD>::normalize(vec![
            (a.clone(), PolyD::from_ints(&[0, 2, 1])),
            (a.neg(), PolyD::from_ints(&[0, -2, 1])),
        ])
        .lift()
    }

    fn cfg(seed: u64) -> OracleConfig {
        OracleConfig::new(seed, 50, BigRational::new(BigInt::one(), crate::prec::pow10(20)))
    }

    #[test]
    fn eval_constants_and_shifts() {
        let scale = 80;
        let pt = SymbolPoint { lambda: Complex::zero(scale) };
        let one: GPolyR = GPoly::one();
        assert_eq!(eval_symbol(&one, &pt).unwrap().re.to_f64(), 1.0);

        // sigma^pi at lambda = 0 evaluates to e^0 = 1
        let b = basis_pi();
        let sp: GPolyR = GPoly::monomial(e_pi(&b, 1, 0), RatD::one());
        let v = eval_symbol(&sp, &pt).unwrap();
        assert_eq!(v.re.to_f64(), 1.0);
        assert!(v.im.is_zero());
    }

    #[test]
    fn eval_strings_entry_at_one() {
        // (3 e^pi - e^-pi) = 69.37886398007403476741284410667...
        let b = basis_pi();
        let h11 = strings_entry(&b, 1, 0);
        let pt = SymbolPoint {
            lambda: Complex::from_real(Real::from_int(1, 80)),
        };
        let v = eval_symbol(&h11, &pt).unwrap();
        let quarter = (3.0 * std::f64::consts::E.powf(std::f64::consts::PI)
            - std::f64::consts::E.powf(-std::f64::consts::PI))
            / 4.0;
        // value of the quarter-scaled entry is 17.344715995018508691853...
        assert!((v.re.to_f64() / 4.0 - quarter).abs() < 1e-9);
        let frozen = Real::parse_decimal(
            "17.344715995018508691853210341668478532380647654497",
            80,
        )
        .unwrap();
        let err = v.re.mul(&Real::from_f64(0.25, 80)).sub(&frozen).abs();
        assert!(err.to_f64() < 1e-40, "err {err}");
    }

    #[test]
    fn identity_self_and_perturbed() {
        let b = basis_pi();
        let x = strings_entry(&b, 0, 10);
        let id = Identity::equal("x = x", x.clone(), x.clone());
        let rep = check_identity(&id, &cfg(7));
        assert!(rep.pass);
        assert!(rep.max_residual.is_zero());

        // perturbing one coefficient by 1e-6 must be detected
        let tweaked = perturb_gpoly(&x, &BigRational::new(BigInt::one(), 1_000_000.into()), 3);
        let id_bad = Identity::equal("x = x'", x.clone(), tweaked);
        let rep = check_identity(&id_bad, &cfg(7));
        assert!(!rep.pass, "perturbation missed: {}", rep.line());
    }

    #[test]
    fn strings_division_identity_at_points() {
        let b = basis_pi();
        let x = strings_entry(&b, 0, 10);
        let y = strings_entry(&b, 1, 0);
        let div = crate::division::gp_div_rem(&x, &y).unwrap();
        let tol = BigRational::new(BigInt::one(), crate::prec::pow10(20));
        let ent = crate::division::entire_correction(&div, 50, &tol).unwrap();
        // x = q* y + r* as symbols
        let id = Identity {
            name: "x = q* y + r*".into(),
            lhs: vec![vec![x.clone()]],
            rhs: vec![vec![ent.qstar.clone(), y.clone()], vec![ent.rstar.clone()]],
        };
        let mut c = cfg(11);
        c.avoid = vec![
            Complex::from_real(Real::from_int(2, c.scale)),
            Complex::from_real(Real::from_int(-2, c.scale)),
        ];
        let rep = check_identity(&id, &c);
        assert!(rep.pass, "{}", rep.line());
    }

    #[test]
    fn entirety_check_detects_uncorrected_quotient() {
        let b = basis_pi();
        let x = strings_entry(&b, 0, 10);
        let y = strings_entry(&b, 1, 0);
        let div = crate::division::gp_div_rem(&x, &y).unwrap();
        let tol = BigRational::new(BigInt::one(), crate::prec::pow10(20));
        let ent = crate::division::entire_correction(&div, 50, &tol).unwrap();
        let roots = crate::division::find_roots(&div.common_den, 50).unwrap();

        let good = check_entire("q*", &ent.qstar, &roots, 50, &tol).unwrap();
        assert!(good.pass, "{}", good.line());

        // negative control: the uncorrected quotient diverges at the roots
        let bad = check_entire("q", &div.quotient, &roots, 50, &tol).unwrap();
        assert!(!bad.pass, "{}", bad.line());
    }

    #[test]
    fn sampling_is_deterministic_and_avoids_poles() {
        let mut c = cfg(42);
        c.avoid = vec![Complex::from_real(Real::from_int(1, c.scale))];
        let p1 = sample_points(&c);
        let p2 = sample_points(&c);
        assert_eq!(p1.len(), 64);
        for (a, b) in p1.iter().zip(&p2) {
            assert_eq!(a.lambda, b.lambda);
        }
        let margin = Real::from_f64(1e-3, c.scale);
        for p in &p1 {
            let d = p.lambda.sub(&c.avoid[0]).abs();
            assert!(d.cmp_real(&margin) == Ordering::Greater);
        }
    }
}
