//! Long division on shift exponents and the pole-removing correction.
//!
//! Division runs in two phases over the rational coefficient layer: quotient
//! terms are taken against the divisor's leading term until the remainder's
//! upper exponent drops strictly below the divisor's, then against the
//! trailing term until the lower exponent rises strictly above. The quotient
//! picked up rational coefficients on the way; the correction step adds a
//! term depending only on the time derivative so that the corrected
//! quotient's Laplace symbol has no poles and therefore describes a
//! compactly supported convolution operator.

use crate::error::{Error, Result};
use crate::gpoly::{GPoly, GPolyP, GPolyR, PolyD, RatD};
use crate::prec::{Complex, Real};
use crate::scalars::{ConstField, Exponent, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

/// Result of the two-phase long division `x = q y + r`.
///
/// For a nonzero remainder, the shift diameter and the upper shift degree
/// drop strictly below the divisor's; the lower shift degree rises at least
/// to the divisor's, with equality exactly when the trailing exponents
/// collide on the shared lattice (a strict bound on both ends is not
/// achievable in that case).
#[derive(Clone, Debug)]
pub struct DivisionResult {
    pub quotient: GPolyR,
    pub remainder: GPolyR,
    /// The dividend `x`, kept for reconstruction checks.
    pub dividend: GPolyR,
    /// The divisor `y`, kept for the correction step.
    pub divisor: GPolyR,
    /// Monic common denominator of the quotient coefficients.
    pub common_den: PolyD,
    /// Steps taken in the leading phase.
    pub iters_upper: usize,
    /// Steps taken in the trailing phase.
    pub iters_lower: usize,
}

const DIVISION_STEP_CAP: usize = 100_000;

/// Two-phase generalized polynomial long division.
///
/// Requires `y != 0` and, for nonzero `x`, a shift diameter of `x` at least
/// that of `y`.
pub fn gp_div_rem(x: &GPolyR, y: &GPolyR) -> Result<DivisionResult> {
    if y.is_zero() {
        return Err(Error::DivisionByZero("division by the zero polynomial".into()));
    }
    if x.is_zero() {
        return Ok(DivisionResult {
            quotient: GPoly::zero(),
            remainder: GPoly::zero(),
            dividend: GPoly::zero(),
            divisor: y.clone(),
            common_den: PolyD::one(),
            iters_upper: 0,
            iters_lower: 0,
        });
    }
    let diam_x = x.deg_sigma()?;
    let diam_y = y.deg_sigma()?;
    if diam_x.compare(&diam_y) == Ordering::Less {
        return Err(Error::PreconditionViolated(format!(
            "dividend shift diameter {} below divisor diameter {}",
            diam_x, diam_y
        )));
    }

    let y_lead_exp = y.deg_plus()?.clone();
    let y_lead_coef = y.leading_coeff()?.clone();
    let y_trail_exp = y.deg_minus()?.clone();
    let y_trail_coef = y.trailing_coeff()?.clone();

    let mut rem = x.clone();
    let mut quo_terms: Vec<(Exponent, RatD)> = Vec::new();
    let mut iters_upper = 0usize;
    let mut iters_lower = 0usize;

    // leading phase
    while !rem.is_zero() && rem.deg_plus()?.compare(&y_lead_exp) != Ordering::Less {
        let exp = rem.deg_plus()?.sub(&y_lead_exp);
        let coef = rem.leading_coeff()?.div(&y_lead_coef)?;
        rem = rem.sub(&y.mul_monomial(&exp, &coef));
        quo_terms.push((exp, coef));
        iters_upper += 1;
        if iters_upper > DIVISION_STEP_CAP {
            return Err(Error::ReductionDiverged("leading division phase did not terminate".into()));
        }
    }
    // trailing phase; stops once the trailing exponent reaches the
    // divisor's, since a step from that boundary would reintroduce a term at
    // the divisor's top exponent
    while !rem.is_zero() && rem.deg_minus()?.compare(&y_trail_exp) == Ordering::Less {
        let exp = rem.deg_minus()?.sub(&y_trail_exp);
        let coef = rem.trailing_coeff()?.div(&y_trail_coef)?;
        rem = rem.sub(&y.mul_monomial(&exp, &coef));
        quo_terms.push((exp, coef));
        iters_lower += 1;
        if iters_lower > DIVISION_STEP_CAP {
            return Err(Error::ReductionDiverged("trailing division phase did not terminate".into()));
        }
    }

    let quotient = GPoly::normalize(quo_terms);
    let common_den = common_denominator(&quotient)?;
    Ok(DivisionResult {
        quotient,
        remainder: rem,
        dividend: x.clone(),
        divisor: y.clone(),
        common_den,
        iters_upper,
        iters_lower,
    })
}

/// Monic least common multiple of the coefficient denominators.
pub fn common_denominator(p: &GPolyR) -> Result<PolyD> {
    let mut den = PolyD::one();
    for (_, c) in p.terms() {
        den = den.lcm(c.den())?;
    }
    Ok(den)
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/// A denominator root: exact rational or high-precision numeric.
#[derive(Clone, Debug)]
pub enum Root {
    Rational(BigRational),
    Numeric(Complex),
}

impl Root {
    pub fn to_scalar(&self) -> Scalar {
        match self {
            Root::Rational(q) => Scalar::from_rational(q.clone()),
            Root::Numeric(v) => Scalar::Num(v.clone()),
        }
    }

    pub fn to_complex(&self, scale: u32) -> Complex {
        match self {
            Root::Rational(q) => Complex::from_rational(q, scale),
            Root::Numeric(v) => v.rescale(scale),
        }
    }
}

/// Multiset of roots with multiplicities.
#[derive(Clone, Debug)]
pub struct RootSet {
    pub roots: Vec<(Root, usize)>,
    /// All roots are exact rationals.
    pub exact: bool,
}

impl RootSet {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|(_, m)| m).sum()
    }
}

/// Roots of a nonzero polynomial with multiplicities.
///
/// Rational roots are recovered exactly (verified by exact substitution);
/// anything else is returned as a high-precision numeric root, which flags
/// the downstream constants as numeric.
pub fn find_roots(d: &PolyD, digits: u32) -> Result<RootSet> {
    if d.is_zero() {
        return Err(Error::DivisionByZero("roots of the zero polynomial".into()));
    }
    if d.deg() == Some(0) {
        return Ok(RootSet { roots: Vec::new(), exact: true });
    }
    let scale = digits + crate::prec::GUARD_DIGITS;
    // the exact route needs plain rational coefficients; exponential or
    // numeric constants go straight to the numeric solver
    let all_rational = d.all_rational();

    let mut out: Vec<(Root, usize)> = Vec::new();
    let mut exact = true;
    if all_rational {
        for (factor, mult) in square_free_factors(d)? {
            for root in roots_of_square_free(&factor, digits)? {
                if matches!(root, Root::Numeric(_)) {
                    exact = false;
                }
                out.push((root, mult));
            }
        }
    } else {
        exact = false;
        let roots = durand_kerner(d, scale);
        for (root, mult) in cluster_roots(roots, digits, scale) {
            let refined = refine_multiple(d, root, mult, scale);
            // attempt exact recognition even in numeric mode
            match rationalize(&refined, d, digits) {
                Some(q) => out.push((Root::Rational(q), mult)),
                None => out.push((Root::Numeric(refined), mult)),
            }
        }
    }
    // aggregate near-identical roots (1e-30 window)
    let eps = Real::eps_pow10(30, scale);
    let mut merged: Vec<(Root, usize)> = Vec::new();
    'outer: for (root, mult) in out {
        for (existing, em) in merged.iter_mut() {
            let d2 = existing.to_complex(scale).sub(&root.to_complex(scale)).abs();
            if d2.cmp_real(&eps) != Ordering::Greater {
                *em += mult;
                continue 'outer;
            }
        }
        merged.push((root, mult));
    }
    Ok(RootSet { roots: merged, exact })
}

/// Yun decomposition: pairs `(factor, multiplicity)` with square-free,
/// pairwise coprime factors.
fn square_free_factors(d: &PolyD) -> Result<Vec<(PolyD, usize)>> {
    let mut out = Vec::new();
    let f = d.monic()?;
    let df = f.derivative();
    let a0 = f.gcd(&df)?;
    if a0.deg() == Some(0) {
        return Ok(vec![(f, 1)]);
    }
    let mut b = f.divexact(&a0)?;
    let mut dd = df.divexact(&a0)?.sub(&b.derivative());
    let mut i = 1usize;
    while b.deg().unwrap_or(0) > 0 {
        let a = b.gcd(&dd)?;
        if a.deg().unwrap_or(0) > 0 {
            out.push((a.clone(), i));
        }
        b = b.divexact(&a)?;
        dd = dd.divexact(&a)?.sub(&b.derivative());
        i += 1;
        if i > 64 {
            return Err(Error::Domain("square-free decomposition did not terminate".into()));
        }
    }
    Ok(out)
}

/// Roots of a square-free factor with exact coefficients.
fn roots_of_square_free(f: &PolyD, digits: u32) -> Result<Vec<Root>> {
    let scale = digits + crate::prec::GUARD_DIGITS;
    let deg = f.deg().unwrap_or(0);
    if deg == 0 {
        return Ok(Vec::new());
    }
    let rational_coeffs: Option<Vec<BigRational>> =
        f.coeffs().iter().map(Scalar::as_rational).collect();
    if deg == 1 {
        if let Some(c) = &rational_coeffs {
            return Ok(vec![Root::Rational(-&c[0] / &c[1])]);
        }
    }
    if deg == 2 {
        if let Some(c) = &rational_coeffs {
            if let Some((r1, r2)) = quadratic_rational_roots(&c[0], &c[1], &c[2]) {
                return Ok(vec![Root::Rational(r1), Root::Rational(r2)]);
            }
        }
    }
    // numeric roots, then exact recognition and deflation where possible
    let mut out = Vec::new();
    for z in durand_kerner(f, scale) {
        let z = newton_polish(f, z, scale);
        match rationalize(&z, f, digits) {
            Some(q) => out.push(Root::Rational(q)),
            None => out.push(Root::Numeric(z)),
        }
    }
    Ok(out)
}

/// Exact roots of `c2 x^2 + c1 x + c0` when the discriminant is a rational
/// square.
fn quadratic_rational_roots(
    c0: &BigRational,
    c1: &BigRational,
    c2: &BigRational,
) -> Option<(BigRational, BigRational)> {
    let disc = c1 * c1 - BigRational::from_integer(4.into()) * c2 * c0;
    if disc.is_negative() {
        return None;
    }
    let s = rational_sqrt(&disc)?;
    let two_a = BigRational::from_integer(2.into()) * c2;
    Some(((-c1 + &s) / &two_a, (-c1 - &s) / &two_a))
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = num_integer::Roots::sqrt(q.numer());
    let d = num_integer::Roots::sqrt(q.denom());
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// Recognize a numeric root as a small rational and verify exactly.
fn rationalize(z: &Complex, f: &PolyD, digits: u32) -> Option<BigRational> {
    let scale = z.scale();
    let imag_eps = Real::eps_pow10(digits / 2, scale);
    if z.im.abs().cmp_real(&imag_eps) == Ordering::Greater {
        return None;
    }
    let target = z.re.to_rational();
    let cand = best_rational_approx(&target, &BigInt::from(10u64.pow(12)))?;
    let err = (&cand - &target).abs();
    let tol = BigRational::new(BigInt::one(), crate::prec::pow10(digits / 2 + 10));
    if err > tol {
        return None;
    }
    let value = f.eval_scalar(&Scalar::from_rational(cand.clone()));
    if value.is_exact() && value.is_zero() {
        Some(cand)
    } else {
        None
    }
}

/// Best rational approximation with bounded denominator (continued
/// fractions).
fn best_rational_approx(x: &BigRational, max_den: &BigInt) -> Option<BigRational> {
    let mut p_prev = BigInt::one();
    let mut q_prev = BigInt::zero();
    let mut p = x.floor().numer().clone();
    let mut q = BigInt::one();
    let mut frac = x - x.floor();
    for _ in 0..200 {
        if &q > max_den {
            return Some(BigRational::new(p_prev, q_prev));
        }
        if frac.is_zero() {
            return Some(BigRational::new(p, q));
        }
        let inv = frac.recip();
        let a = inv.floor();
        frac = &inv - &a;
        let a_int = a.numer().clone();
        let p_next = &a_int * &p + &p_prev;
        let q_next = &a_int * &q + &q_prev;
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
    }
    Some(BigRational::new(p, q))
}

/// Simultaneous root iteration on a monic-normalized polynomial.
fn durand_kerner(f: &PolyD, scale: u32) -> Vec<Complex> {
    let deg = f.deg().unwrap_or(0);
    if deg == 0 {
        return Vec::new();
    }
    let lc_inv = f.lc().inv().expect("nonzero leading coefficient");
    let monic: Vec<Complex> = f
        .coeffs()
        .iter()
        .map(|c| c.mul(&lc_inv).to_complex(scale))
        .collect();
    let radius = 1.0
        + monic
            .iter()
            .take(deg)
            .map(|c| c.abs().to_f64())
            .fold(0.0, f64::max);
    let mut roots: Vec<Complex> = (0..deg)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / (deg as f64) + 0.7;
            Complex::new(
                Real::from_f64(radius * theta.cos(), scale),
                Real::from_f64(radius * theta.sin(), scale),
            )
        })
        .collect();
    let eval = |z: &Complex| -> Complex {
        let mut acc = Complex::zero(scale);
        for c in monic.iter().rev() {
            acc = acc.mul(z).add(c);
        }
        acc
    };
    let stop = Real::eps_pow10(scale / 2, scale);
    for _ in 0..400 {
        let mut max_step = Real::zero(scale);
        for k in 0..deg {
            let mut den = Complex::one(scale);
            for j in 0..deg {
                if j != k {
                    den = den.mul(&roots[k].sub(&roots[j]));
                }
            }
            if den.is_zero() {
                // nudge coincident iterates apart
                roots[k] = roots[k].add(&Complex::new(
                    Real::from_f64(1e-3, scale),
                    Real::from_f64(1e-3, scale),
                ));
                continue;
            }
            let step = eval(&roots[k]).div(&den);
            roots[k] = roots[k].sub(&step);
            let s = step.abs();
            if s.cmp_real(&max_step) == Ordering::Greater {
                max_step = s;
            }
        }
        if max_step.cmp_real(&stop) != Ordering::Greater {
            break;
        }
    }
    roots
}

/// A few Newton steps to tighten a simple root.
fn newton_polish(f: &PolyD, mut z: Complex, _scale: u32) -> Complex {
    let df = f.derivative();
    for _ in 0..6 {
        let d = df.eval_complex(&z);
        if d.is_zero() {
            break;
        }
        z = z.sub(&f.eval_complex(&z).div(&d));
    }
    z
}

/// Cluster numeric roots into multiplicity groups.
fn cluster_roots(mut roots: Vec<Complex>, digits: u32, scale: u32) -> Vec<(Complex, usize)> {
    let eps = Real::eps_pow10(digits / 4, scale);
    roots.sort_by(|a, b| {
        a.re.cmp_real(&b.re).then_with(|| a.im.cmp_real(&b.im))
    });
    let mut out: Vec<(Complex, usize)> = Vec::new();
    'outer: for z in roots {
        for (center, count) in out.iter_mut() {
            if center.sub(&z).abs().cmp_real(&eps) != Ordering::Greater {
                // running centroid
                let n = Real::from_int(*count as i64 + 1, scale);
                let c = center
                    .mul_real(&Real::from_int(*count as i64, scale))
                    .add(&z);
                *center = Complex::new(c.re.div(&n), c.im.div(&n));
                *count += 1;
                continue 'outer;
            }
        }
        out.push((z, 1));
    }
    out
}

/// Newton refinement through the derivative of order `mult - 1`, which sees
/// a multiple root as simple.
fn refine_multiple(f: &PolyD, z: Complex, mult: usize, scale: u32) -> Complex {
    let mut g = f.clone();
    for _ in 1..mult {
        g = g.derivative();
    }
    newton_polish(&g, z, scale)
}

/// Remove shared rational linear factors from a fraction whose denominator
/// has rational coefficients. Fractions with exponential numerators skip the
/// general reduction, so this restores the short representative.
pub fn deflate_rational_factors(c: &RatD, digits: u32) -> RatD {
    if c.is_zero() || c.den().deg() == Some(0) || !c.den().all_rational() {
        return c.clone();
    }
    let Ok(roots) = find_roots(c.den(), digits) else {
        return c.clone();
    };
    let mut num = c.num().clone();
    let mut den = c.den().clone();
    for (root, mult) in &roots.roots {
        let Root::Rational(rho) = root else { continue };
        for _ in 0..*mult {
            let Some(n2) = num.deflate_root(rho) else { break };
            let Some(d2) = den.deflate_root(rho) else { break };
            num = n2;
            den = d2;
        }
    }
    RatD::new(num, den).expect("denominator keeps a nonzero leading factor")
}

fn tidy_gpoly(g: &GPolyR, digits: u32) -> GPolyR {
    g.map_coeffs(|c| deflate_rational_factors(c, digits))
}

// ---------------------------------------------------------------------------
// Entire correction
// ---------------------------------------------------------------------------

/// Residual of the pole-cancellation condition at one root and derivative
/// order.
#[derive(Clone, Debug)]
pub struct RootResidual {
    pub root: Root,
    pub order: usize,
    pub residual: Real,
}

/// Corrected quotient `q* = q + p` with certificate.
#[derive(Clone, Debug)]
pub struct EntireResult {
    pub qstar: GPolyR,
    /// The correction `p`, depending on the time derivative only.
    pub correction: RatD,
    pub rstar: GPolyR,
    pub certificate: Vec<RootResidual>,
    /// Every corrected quotient coefficient has degree at most zero.
    pub proper: bool,
    /// Construction stayed in the exact constant field.
    pub exact: bool,
}

/// Laplace symbol of a polynomial-coefficient generalized polynomial,
/// with s-derivatives taken symbolically:
/// `d/ds [a(s) e^(s alpha)] = (a'(s) + alpha a(s)) e^(s alpha)`.
struct SymbolDerivatives {
    /// Per term: exponent and the derivative ladder of its coefficient.
    terms: Vec<(Exponent, Vec<PolyD>)>,
}

impl SymbolDerivatives {
    fn new(g: &GPolyP, max_order: usize) -> Self {
        let terms = g
            .terms()
            .iter()
            .map(|(alpha, coeff)| {
                let alpha_val = Scalar::from_rational(alpha.eval().clone());
                let mut ladder = vec![coeff.clone()];
                for _ in 0..max_order {
                    let prev = ladder.last().unwrap();
                    ladder.push(prev.derivative().add(&prev.mul_scalar(&alpha_val)));
                }
                (alpha.clone(), ladder)
            })
            .collect();
        SymbolDerivatives { terms }
    }

    /// Value of the `order`-th s-derivative of the symbol at `node`.
    fn eval(&self, node: &Scalar, order: usize, scale: u32) -> Scalar {
        let mut acc = Scalar::zero();
        for (alpha, ladder) in &self.terms {
            let factor = exp_at(alpha, node, scale);
            acc = acc.add(&ladder[order].eval_scalar(node).mul(&factor));
        }
        acc
    }
}

/// `e^(node * alpha)`: exact for rational nodes, numeric otherwise.
fn exp_at(alpha: &Exponent, node: &Scalar, scale: u32) -> Scalar {
    if let Some(q) = node.as_rational() {
        return Scalar::Exact(ConstField::from_exp(alpha.scale(&q)));
    }
    let z = node
        .to_complex(scale)
        .mul_real(&Real::from_rational(alpha.eval(), scale));
    Scalar::Num(z.exp())
}

/// Compute the correction `p` so that `q* = q + p` has an entire symbol, and
/// the matching remainder `r* = r - p y`.
pub fn entire_correction(
    div: &DivisionResult,
    digits: u32,
    tol_entire: &BigRational,
) -> Result<EntireResult> {
    let scale = digits + crate::prec::GUARD_DIGITS;
    let q = &div.quotient;
    let d = &div.common_den;
    if d.deg() == Some(0) || q.is_zero() {
        let proper = q.terms().iter().all(|(_, c)| c.is_proper());
        return Ok(EntireResult {
            qstar: q.clone(),
            correction: RatD::zero(),
            rstar: div.remainder.clone(),
            certificate: Vec::new(),
            proper,
            exact: true,
        });
    }

    // clear denominators: q = qt / d with polynomial qt
    let mut qt_terms = Vec::new();
    for (e, c) in q.terms() {
        let cofactor = d.divexact(c.den())?;
        qt_terms.push((e.clone(), c.num().mul(&cofactor)));
    }
    let qt: GPolyP = GPoly::normalize(qt_terms);

    let roots = find_roots(d, digits)?;
    debug_assert_eq!(roots.total_multiplicity(), d.deg().unwrap());

    // interpolation nodes: each root repeated to its multiplicity
    let mut nodes: Vec<(Scalar, usize)> = Vec::new(); // (value, group id)
    for (gid, (root, mult)) in roots.roots.iter().enumerate() {
        for _ in 0..*mult {
            nodes.push((root.to_scalar(), gid));
        }
    }
    let n_nodes = nodes.len();
    let max_order = roots.roots.iter().map(|(_, m)| *m).max().unwrap_or(1);
    let table = SymbolDerivatives::new(&qt, max_order);

    // confluent divided differences
    let mut factorial = vec![BigRational::one()];
    for k in 1..=max_order {
        let prev = factorial[k - 1].clone();
        factorial.push(prev * BigRational::from_integer((k as i64).into()));
    }
    let mut dd: Vec<Vec<Option<Scalar>>> = vec![vec![None; n_nodes]; n_nodes];
    for i in 0..n_nodes {
        dd[i][i] = Some(table.eval(&nodes[i].0, 0, scale));
    }
    for width in 1..n_nodes {
        for i in 0..n_nodes - width {
            let j = i + width;
            let value = if nodes[i].1 == nodes[j].1 {
                // same root: f^(k)(z)/k!
                let inv = BigRational::one() / &factorial[width];
                table.eval(&nodes[i].0, width, scale).mul_rational(&inv)
            } else {
                let hi = dd[i + 1][j].clone().unwrap();
                let lo = dd[i][j - 1].clone().unwrap();
                let dz = nodes[j].0.sub(&nodes[i].0);
                hi.sub(&lo).div(&dz)?
            };
            dd[i][j] = Some(value);
        }
    }

    // Newton form to coefficient form
    let mut interp = PolyD::zero();
    let mut basis = PolyD::one();
    for k in 0..n_nodes {
        let coef = dd[0][k].clone().unwrap();
        interp = interp.add(&basis.mul_scalar(&coef));
        if k + 1 < n_nodes {
            let lin = PolyD::from_coeffs(vec![nodes[k].0.neg(), Scalar::one()]);
            basis = basis.mul(&lin);
        }
    }

    let correction = deflate_rational_factors(&RatD::new(interp.neg(), d.clone())?, digits);
    let qstar = tidy_gpoly(&q.add(&GPoly::constant(correction.clone())), digits);
    let rstar = tidy_gpoly(
        &div.remainder.sub(&div.divisor.mul_coeff(&correction)),
        digits,
    );

    // certificate: symbol derivatives of (qt - interp) vanish at each root
    let diff: GPolyP = qt.sub(&GPoly::constant(interp.clone()));
    let diff_table = SymbolDerivatives::new(&diff, max_order);
    let mut certificate = Vec::new();
    let mut worst: Option<RootResidual> = None;
    for (gid, (root, mult)) in roots.roots.iter().enumerate() {
        let node = nodes.iter().find(|(_, g)| *g == gid).unwrap().0.clone();
        for order in 0..*mult {
            let value = diff_table.eval(&node, order, scale);
            let residual = if value.is_exact() && value.is_zero() {
                Real::zero(scale)
            } else {
                let reference = table.eval(&node, order, scale).to_complex(scale).abs();
                let floor = Real::one(scale);
                let denom = if reference.cmp_real(&floor) == Ordering::Greater {
                    reference
                } else {
                    floor
                };
                value.to_complex(scale).abs().div(&denom)
            };
            let entry = RootResidual { root: root.clone(), order, residual };
            let is_worse = worst
                .as_ref()
                .map(|w| entry.residual.cmp_real(&w.residual) == Ordering::Greater)
                .unwrap_or(true);
            if is_worse {
                worst = Some(entry.clone());
            }
            certificate.push(entry);
        }
    }
    if let Some(w) = &worst {
        let tol = Real::from_rational(tol_entire, scale);
        if w.residual.cmp_real(&tol) == Ordering::Greater {
            return Err(Error::EntiretyCheckFailed(format!(
                "residual {} at a denominator root exceeds tolerance",
                w.residual
            )));
        }
    }

    let proper = qstar.terms().iter().all(|(_, c)| c.is_proper());
    let exact = roots.exact && qt.terms().iter().all(|(_, c)| c.coeffs().iter().all(Scalar::is_exact));
    Ok(EntireResult {
        qstar,
        correction,
        rstar,
        certificate,
        proper,
        exact,
    })
}

// ---------------------------------------------------------------------------
// Entry reduction
// ---------------------------------------------------------------------------

/// Outcome of reducing one matrix entry against a pivot.
#[derive(Clone, Debug)]
pub struct ReduceOutcome {
    pub qstar: GPolyR,
    pub hbar: GPolyR,
    /// Division and correction records when a reduction actually ran.
    pub record: Option<(DivisionResult, EntireResult)>,
}

/// Reduce `x` against the pivot `y`: `hbar = x - q* y` with the shift degrees
/// of `hbar` matching those of `y`. Entries already within the pivot's
/// degree bounds are returned untouched.
pub fn reduce_entry(
    x: &GPolyR,
    y: &GPolyR,
    digits: u32,
    tol_entire: &BigRational,
) -> Result<ReduceOutcome> {
    if y.is_zero() {
        return Err(Error::DivisionByZero("zero pivot".into()));
    }
    if x.is_zero() || within_bounds(x, y)? {
        return Ok(ReduceOutcome { qstar: GPoly::zero(), hbar: x.clone(), record: None });
    }
    let div = gp_div_rem(x, y)?;
    let ent = entire_correction(&div, digits, tol_entire)?;
    Ok(ReduceOutcome {
        qstar: ent.qstar.clone(),
        hbar: ent.rstar.clone(),
        record: Some((div, ent)),
    })
}

/// Shift-degree goal conditions of `x` relative to the pivot `y`.
pub fn within_bounds(x: &GPolyR, y: &GPolyR) -> Result<bool> {
    if x.is_zero() {
        return Ok(true);
    }
    let up = x.deg_plus()?.compare(y.deg_plus()?) != Ordering::Greater;
    let diam = x.deg_sigma()?.compare(&y.deg_sigma()?) != Ordering::Greater;
    Ok(up && diam)
}
