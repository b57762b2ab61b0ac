//! Explicit delay-differential form and controller-form classification.
//!
//! After the reduction, `K y = hhat^-1 (L^-1 u - htilde y)` is an explicit
//! system: block `i` drives the top derivative of the `i`-th flat output
//! component at its largest prediction. The blocks feed a state made of one
//! integrator chain plus one transport channel per component; the
//! classification reads off which inputs enter with predictions, delays or
//! derivatives.

use crate::error::Result;
use crate::gpmatrix::{GPolyMatrix, ScalarMatrix, Separation};
use crate::gpoly::{GPoly, RatD};
use crate::scalars::Exponent;
use std::cmp::Ordering;
use std::fmt;

/// One convolution atom: `coeff(Dt) sigma^shift` applied to component
/// `target`.
#[derive(Clone, Debug)]
pub struct OperatorAtom {
    pub target: usize,
    pub shift: Exponent,
    pub coeff: RatD,
}

/// One block of the explicit delay-differential system.
#[derive(Clone, Debug)]
pub struct DdeBlock {
    /// Derivative order of the driven output component.
    pub nu: usize,
    /// Largest prediction (upper transport bound).
    pub tau_hat: Exponent,
    /// Lower transport bound.
    pub tau_check: Exponent,
    /// Flat-output feedback atoms (applied with a minus sign).
    pub a_table: Vec<OperatorAtom>,
    /// Input atoms.
    pub b_table: Vec<OperatorAtom>,
}

/// Explicit delay-differential system, one block per input component.
#[derive(Clone, Debug)]
pub struct DdeSystem {
    pub blocks: Vec<DdeBlock>,
}

fn scalar_times_gpoly(s: &ScalarMatrix, m: &GPolyMatrix<RatD>) -> GPolyMatrix<RatD> {
    GPolyMatrix::from_fn(s.rows(), m.cols(), |i, j| {
        let mut acc = GPoly::zero();
        for k in 0..s.cols() {
            if s.get(i, k).is_zero() {
                continue;
            }
            acc = acc.add(&m.get(k, j).mul_coeff(&RatD::from_scalar(s.get(i, k).clone())));
        }
        acc
    })
}

fn atoms_of_row(m: &GPolyMatrix<RatD>, i: usize) -> Vec<OperatorAtom> {
    let mut out = Vec::new();
    for j in 0..m.cols() {
        for (e, c) in m.get(i, j).terms() {
            out.push(OperatorAtom { target: j, shift: e.clone(), coeff: c.clone() });
        }
    }
    out
}

/// Build the explicit per-block equations
/// `Dt^(nu_i) sigma^(tau_hat_i) y_i = -A_i * y + B_i * u`.
pub fn assemble_dde(
    sep: &Separation,
    linv: &GPolyMatrix<RatD>,
    hbar: &GPolyMatrix<RatD>,
) -> Result<DdeSystem> {
    let n = sep.k_diag.len();
    let a_mat = scalar_times_gpoly(&sep.hhat_inv, &sep.htilde);
    let b_mat = scalar_times_gpoly(&sep.hhat_inv, linv);
    let mut blocks = Vec::with_capacity(n);
    for i in 0..n {
        let (nu, tau_hat) = sep.k_diag[i].clone();
        let tau_check = hbar.get(i, i).deg_minus()?.clone();
        blocks.push(DdeBlock {
            nu,
            tau_hat,
            tau_check,
            a_table: atoms_of_row(&a_mat, i),
            b_table: atoms_of_row(&b_mat, i),
        });
    }
    Ok(DdeSystem { blocks })
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// Controller-form variant read off the input tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    /// Inputs enter as plain gains.
    Classic,
    /// Input derivatives occur.
    Discontinuous,
    /// Only input predictions occur.
    NonCausal,
    /// Input predictions and delays occur (two-sided support).
    Quasi,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::Classic => "classic",
            Classification::Discontinuous => "discontinuous",
            Classification::NonCausal => "non-causal",
            Classification::Quasi => "quasi",
        };
        write!(f, "{s}")
    }
}

/// Classify by the input tables: derivatives dominate, then the sign pattern
/// of the input shifts.
pub fn classify(dde: &DdeSystem) -> Classification {
    let zero = Exponent::zero();
    let mut has_pos = false;
    let mut has_neg = false;
    let mut all_plain = true;
    for block in &dde.blocks {
        for atom in &block.b_table {
            if atom.coeff.deg().is_some_and(|d| d > 0) {
                return Classification::Discontinuous;
            }
            if !(atom.coeff.deg() == Some(0) && atom.coeff.den().deg() == Some(0)) {
                all_plain = false;
            }
            match atom.shift.compare(&zero) {
                Ordering::Greater => has_pos = true,
                Ordering::Less => has_neg = true,
                Ordering::Equal => {}
            }
        }
    }
    match (has_pos, has_neg) {
        (false, false) if all_plain => Classification::Classic,
        (true, false) => Classification::NonCausal,
        (true, true) => Classification::Quasi,
        // delay-only or distributed-at-zero tables sit inside the two-sided
        // class
        _ => Classification::Quasi,
    }
}

// ---------------------------------------------------------------------------
// Controller form description
// ---------------------------------------------------------------------------

/// A flat-output evaluation used by the equations but not covered by the
/// controller-form state.
#[derive(Clone, Debug)]
pub struct ResidualTerm {
    pub block: usize,
    pub target: usize,
    pub shift: Exponent,
    /// Derivative order of the evaluation (for point atoms).
    pub order: i64,
    /// True for strictly proper (distributed) parts.
    pub distributed: bool,
}

/// Controller-form description: blocks, classification and residuals.
#[derive(Clone, Debug)]
pub struct HcfDescription {
    pub dde: DdeSystem,
    pub classification: Classification,
    pub residuals: Vec<ResidualTerm>,
}

impl HcfDescription {
    pub fn state_ode_dim(&self) -> usize {
        self.dde.blocks.iter().map(|b| b.nu).sum()
    }
}

/// Assemble the description: classify and list state-coverage residuals.
///
/// The state covers, per component `j`, the top-order evaluations
/// `y_j^(nu_j)(t + tau)` for `tau` in `[tau_check_j, tau_hat_j]` and the
/// lower-order evaluations at the interval's lower end. Point atoms outside
/// that pattern, and distributed parts outside the interval, are reported as
/// residual terms.
pub fn build_description(dde: DdeSystem) -> Result<HcfDescription> {
    let classification = classify(&dde);
    let mut residuals = Vec::new();
    for (bi, block) in dde.blocks.iter().enumerate() {
        for atom in &block.a_table {
            let target_block = &dde.blocks[atom.target];
            let in_window = atom.shift.compare(&target_block.tau_check) != Ordering::Less
                && atom.shift.compare(&target_block.tau_hat) != Ordering::Greater;
            let at_anchor = atom.shift.compare(&target_block.tau_check) == Ordering::Equal;
            let (poly_part, proper) = atom.coeff.split_proper()?;
            for (k, c) in poly_part.coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let covered = (k == target_block.nu && in_window)
                    || (k < target_block.nu && at_anchor);
                if !covered {
                    residuals.push(ResidualTerm {
                        block: bi,
                        target: atom.target,
                        shift: atom.shift.clone(),
                        order: k as i64,
                        distributed: false,
                    });
                }
            }
            if !proper.is_zero() && !in_window {
                residuals.push(ResidualTerm {
                    block: bi,
                    target: atom.target,
                    shift: atom.shift.clone(),
                    order: proper.deg().unwrap_or(0),
                    distributed: true,
                });
            }
        }
    }
    Ok(HcfDescription { dde, classification, residuals })
}

impl fmt::Display for HcfDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.dde.blocks.iter().enumerate() {
            writeln!(
                f,
                "block {}: nu = {}, interval [{}, {}]",
                i + 1,
                b.nu,
                b.tau_check,
                b.tau_hat
            )?;
            writeln!(
                f,
                "  y{}^({})(t + {}) = -A{}*y + B{}*u",
                i + 1,
                b.nu,
                b.tau_hat,
                i + 1,
                i + 1
            )?;
            for atom in &b.a_table {
                writeln!(
                    f,
                    "  A{}: y{} shift {}: {}",
                    i + 1,
                    atom.target + 1,
                    atom.shift,
                    atom.coeff
                )?;
            }
            for atom in &b.b_table {
                writeln!(
                    f,
                    "  B{}: u{} shift {}: {}",
                    i + 1,
                    atom.target + 1,
                    atom.shift,
                    atom.coeff
                )?;
            }
        }
        writeln!(f, "classification: {}", self.classification)?;
        if !self.residuals.is_empty() {
            writeln!(f, "residual flat-output terms:")?;
            for r in &self.residuals {
                writeln!(
                    f,
                    "  block {}: y{}^({}) at shift {}{}",
                    r.block + 1,
                    r.target + 1,
                    r.order,
                    r.shift,
                    if r.distributed { " (distributed)" } else { "" }
                )?;
            }
        }
        Ok(())
    }
}

/// Every input-table coefficient is free of derivatives.
pub fn input_tables_proper(dde: &DdeSystem) -> bool {
    dde.blocks
        .iter()
        .all(|b| b.b_table.iter().all(|a| a.coeff.deg().is_none_or(|d| d <= 0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpoly::PolyD;
    use crate::scalars::{pi_rational, BasisRef, DelayBasis, Scalar};
    use num_rational::BigRational;

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

    fn atom(target: usize, shift: Exponent, coeff: RatD) -> OperatorAtom {
        OperatorAtom { target, shift, coeff }
    }

    fn block_with_b(b_table: Vec<OperatorAtom>) -> DdeBlock {
        DdeBlock {
            nu: 1,
            tau_hat: Exponent::from_offset(BigRational::from_integer(1.into())),
            tau_check: Exponent::from_offset(BigRational::from_integer((-1).into())),
            a_table: Vec::new(),
            b_table,
        }
    }

    #[test]
    fn classify_variants() {
        // unit atoms at shift zero: classic
        let dde = DdeSystem {
            blocks: vec![block_with_b(vec![atom(0, Exponent::zero(), RatD::one())])],
        };
        assert_eq!(classify(&dde), Classification::Classic);

        // one positive shift only: non-causal
        let dde = DdeSystem {
            blocks: vec![block_with_b(vec![atom(
                0,
                Exponent::from_offset(BigRational::from_integer(1.into())),
                RatD::one(),
            )])],
        };
        assert_eq!(classify(&dde), Classification::NonCausal);

        // positive and negative shifts: quasi
        let b = basis_pi();
        let dde = DdeSystem {
            blocks: vec![block_with_b(vec![
                atom(0, e_pi(&b, 1, 0), RatD::one()),
                atom(0, e_pi(&b, -1, 0), RatD::one()),
            ])],
        };
        assert_eq!(classify(&dde), Classification::Quasi);

        // an input derivative forces discontinuous
        let dde = DdeSystem {
            blocks: vec![block_with_b(vec![atom(
                0,
                Exponent::zero(),
                RatD::from_poly(PolyD::from_ints(&[0, 1])),
            )])],
        };
        assert_eq!(classify(&dde), Classification::Discontinuous);
    }

    #[test]
    fn residual_bookkeeping() {
        let b = basis_pi();
        // block with nu = 2 on [-pi, pi]
        let tau_hat = e_pi(&b, 1, 0);
        let tau_check = tau_hat.neg();
        let mk = |a_table| DdeSystem {
            blocks: vec![DdeBlock {
                nu: 2,
                tau_hat: tau_hat.clone(),
                tau_check: tau_check.clone(),
                a_table,
                b_table: Vec::new(),
            }],
        };

        // top-order atom inside the window: covered
        let covered = mk(vec![atom(
            0,
            Exponent::zero(),
            RatD::from_poly(PolyD::from_ints(&[0, 0, 3])),
        )]);
        let desc = build_description(covered).unwrap();
        assert!(desc.residuals.is_empty());

        // low-order atom at an interior shift: residual
        let interior = mk(vec![atom(
            0,
            Exponent::zero(),
            RatD::from_poly(PolyD::from_ints(&[0, 1])),
        )]);
        let desc = build_description(interior).unwrap();
        assert_eq!(desc.residuals.len(), 1);
        assert_eq!(desc.residuals[0].order, 1);

        // low-order atom anchored at the lower end: covered
        let anchored = mk(vec![atom(
            0,
            tau_check.clone(),
            RatD::from_poly(PolyD::from_ints(&[1])),
        )]);
        let desc = build_description(anchored).unwrap();
        assert!(desc.residuals.is_empty());

        // distributed part outside the window: residual
        let outside = mk(vec![atom(
            0,
            e_pi(&b, 2, 0),
            RatD::new(PolyD::one(), PolyD::from_ints(&[1, 1])).unwrap(),
        )]);
        let desc = build_description(outside).unwrap();
        assert_eq!(desc.residuals.len(), 1);
        assert!(desc.residuals[0].distributed);
    }

    #[test]
    fn strings_assembly() {
        // full chain on the working-scale strings matrix
        let b = basis_pi();
        let col1 = |a: Exponent| {
            GPoly::normalize(vec![
                (a.clone(), PolyD::from_ints(&[0, 2, 1])),
                (a.neg(), PolyD::from_ints(&[0, -2, 1])),
            ])
        };
        let col2 = |a: Exponent, sign: i64| {
            GPoly::normalize(vec![
                (a.clone(), PolyD::from_ints(&[sign])),
                (a.neg(), PolyD::from_ints(&[sign])),
            ])
        };
        let alpha = e_pi(&b, 1, 0);
        let beta = e_pi(&b, 0, 10);
        let mut h = GPolyMatrix::zero(2, 2);
        h.set(0, 0, col1(alpha.clone()));
        h.set(0, 1, col2(alpha.clone(), 1));
        h.set(1, 0, col1(beta.clone()));
        h.set(1, 1, col2(beta.clone(), -1));

        let opts = crate::gpmatrix::ReduceOptions {
            digits: 50,
            tol_entire: BigRational::new(1.into(), crate::prec::pow10(20)),
            pass_budget: 8,
        };
        let red = crate::gpmatrix::reduce_shifts(&h, &opts).unwrap();
        let sep = crate::gpmatrix::separate(&red.hbar).unwrap();
        let linv = crate::gpmatrix::invert_unit_lower(&red.l).unwrap();
        let dde = assemble_dde(&sep, &linv, &red.hbar).unwrap();

        assert_eq!(dde.blocks.len(), 2);
        let b1 = &dde.blocks[0];
        assert_eq!(b1.nu, 2);
        assert_eq!(b1.tau_hat.compare(&alpha), Ordering::Equal);
        assert_eq!(b1.tau_check.compare(&alpha.neg()), Ordering::Equal);
        let b2 = &dde.blocks[1];
        assert_eq!(b2.nu, 0);
        assert_eq!(b2.tau_hat.compare(&beta), Ordering::Equal);
        assert_eq!(b2.tau_check.compare(&beta.neg()), Ordering::Equal);

        // hhat^-1 = diag(1, -1/2)
        assert_eq!(sep.hhat_inv.get(0, 0), &Scalar::one());
        assert_eq!(
            sep.hhat_inv.get(1, 1),
            &Scalar::from_rational(BigRational::new((-1).into(), 2.into()))
        );

        // no input derivatives anywhere, predictions and delays both present
        assert!(input_tables_proper(&dde));
        let desc = build_description(dde).unwrap();
        assert_eq!(desc.classification, Classification::Quasi);
        assert_eq!(desc.state_ode_dim(), 2);
    }

    #[test]
    fn diagonal_monomial_assembly() {
        let b = basis_pi();
        let mut m: GPolyMatrix<RatD> = GPolyMatrix::zero(2, 2);
        m.set(0, 0, GPoly::monomial(e_pi(&b, 1, 0), RatD::from_poly(PolyD::monomial(Scalar::one(), 1))));
        m.set(1, 1, GPoly::monomial(e_pi(&b, 0, 2), RatD::from_int(2)));
        let sep = crate::gpmatrix::separate(&m).unwrap();
        let linv: GPolyMatrix<RatD> = GPolyMatrix::identity(2);
        let dde = assemble_dde(&sep, &linv, &m).unwrap();
        for (i, block) in dde.blocks.iter().enumerate() {
            assert!(block.a_table.is_empty());
            assert_eq!(block.b_table.len(), 1);
            assert_eq!(block.b_table[0].target, i);
            assert!(block.b_table[0].shift.is_formal_zero());
        }
    }
}
