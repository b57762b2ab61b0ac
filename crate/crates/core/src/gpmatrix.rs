//! Matrices over the generalized polynomial ring.
//!
//! Provides the leading-column-coefficient extractions, the structural
//! sorting of rows and columns, the shift-reduction sweep that makes the
//! composed extraction full rank, inversion of the accumulated unit lower
//! triangular factor, and the final separation into a constant matrix, a
//! diagonal of leading monomials and a remainder.

use crate::division::{reduce_entry, within_bounds, DivisionResult, EntireResult};
use crate::error::{Error, Result};
use crate::gpoly::{CoeffRing, GPoly, GPolyR, PolyD, RatD};
use crate::scalars::{Exponent, Scalar};
use num_rational::BigRational;
use std::cmp::Ordering;
use std::fmt;

// ---------------------------------------------------------------------------
// Matrix containers
// ---------------------------------------------------------------------------

/// Rectangular matrix of generalized polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct GPolyMatrix<C: CoeffRing> {
    rows: usize,
    cols: usize,
    data: Vec<GPoly<C>>,
}

impl<C: CoeffRing> GPolyMatrix<C> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        GPolyMatrix {
            rows,
            cols,
            data: vec![GPoly::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, GPoly::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> GPoly<C>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        GPolyMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &GPoly<C> {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: GPoly<C>) {
        self.data[i * self.cols + j] = v;
    }

    pub fn map<D: CoeffRing>(&self, f: impl Fn(&GPoly<C>) -> GPoly<D>) -> GPolyMatrix<D> {
        GPolyMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Domain(format!(
                "matrix product dimension mismatch: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = GPoly::zero();
            for k in 0..self.cols {
                acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
            }
            acc
        }))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Domain("matrix difference dimension mismatch".into()));
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).sub(other.get(i, j))
        }))
    }

    /// Reindex entries: `out[i][j] = self[row_perm[i]][col_perm[j]]`.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            self.get(row_perm[i], col_perm[j]).clone()
        })
    }

    /// Determinant by cofactor expansion (small sizes only).
    pub fn det(&self) -> Result<GPoly<C>> {
        if self.rows != self.cols {
            return Err(Error::Domain("determinant of non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(GPoly::one());
        }
        if n == 1 {
            return Ok(self.get(0, 0).clone());
        }
        let mut acc = GPoly::zero();
        for j in 0..n {
            let minor = GPolyMatrix::from_fn(n - 1, n - 1, |r, c| {
                self.get(r + 1, if c < j { c } else { c + 1 }).clone()
            });
            let cof = self.get(0, j).mul(&minor.det()?);
            acc = if j % 2 == 0 { acc.add(&cof) } else { acc.sub(&cof) };
        }
        Ok(acc)
    }
}

impl GPolyMatrix<PolyD> {
    pub fn lift(&self) -> GPolyMatrix<RatD> {
        self.map(|g| g.lift())
    }

    pub fn scale_rational(&self, q: &BigRational) -> Self {
        let factor = PolyD::constant(Scalar::from_rational(q.clone()));
        self.map(|g| g.mul_coeff(&factor))
    }
}

impl<C: CoeffRing> fmt::Display for GPolyMatrix<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[ ")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " | ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

/// Dense matrix of scalars with exact elimination.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl ScalarMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        ScalarMatrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ScalarMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Domain("scalar matrix product dimension mismatch".into()));
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = Scalar::zero();
            for k in 0..self.cols {
                acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
            }
            acc
        }))
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        let mut col = 0;
        while rank < m.rows && col < m.cols {
            let pivot = (rank..m.rows).find(|&r| !m.get(r, col).is_zero());
            let Some(p) = pivot else {
                col += 1;
                continue;
            };
            for j in 0..m.cols {
                let tmp = m.get(rank, j).clone();
                m.set(rank, j, m.get(p, j).clone());
                m.set(p, j, tmp);
            }
            let inv = m.get(rank, col).inv().expect("nonzero pivot");
            for r in rank + 1..m.rows {
                let factor = m.get(r, col).mul(&inv);
                if factor.is_zero() {
                    continue;
                }
                for j in col..m.cols {
                    let v = m.get(r, j).sub(&factor.mul(m.get(rank, j)));
                    m.set(r, j, v);
                }
            }
            rank += 1;
            col += 1;
        }
        rank
    }

    pub fn inverse(&self) -> Result<ScalarMatrix> {
        if self.rows != self.cols {
            return Err(Error::Domain("inverse of non-square scalar matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.get(r, col).is_zero()).ok_or_else(|| {
                Error::NotReducible("leading coefficient matrix is singular".into())
            })?;
            if pivot != col {
                for j in 0..n {
                    let t = a.get(col, j).clone();
                    a.set(col, j, a.get(pivot, j).clone());
                    a.set(pivot, j, t);
                    let t = inv.get(col, j).clone();
                    inv.set(col, j, inv.get(pivot, j).clone());
                    inv.set(pivot, j, t);
                }
            }
            let s = a.get(col, col).inv()?;
            for j in 0..n {
                a.set(col, j, a.get(col, j).mul(&s));
                inv.set(col, j, inv.get(col, j).mul(&s));
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col).clone();
                for j in 0..n {
                    let va = a.get(r, j).sub(&factor.mul(a.get(col, j)));
                    a.set(r, j, va);
                    let vi = inv.get(r, j).sub(&factor.mul(inv.get(col, j)));
                    inv.set(r, j, vi);
                }
            }
        }
        Ok(inv)
    }
}

// ---------------------------------------------------------------------------
// Leading coefficient extractions
// ---------------------------------------------------------------------------

fn column_nu<C: CoeffRing>(m: &GPolyMatrix<C>, j: usize) -> Result<i64> {
    let mut nu: Option<i64> = None;
    for i in 0..m.rows() {
        if let Some(d) = m.get(i, j).deg_dt() {
            nu = Some(nu.map_or(d, |v: i64| v.max(d)));
        }
    }
    nu.ok_or_else(|| Error::DegenerateMatrix(format!("column {j} is zero")))
}

fn column_tau_plus<C: CoeffRing>(m: &GPolyMatrix<C>, j: usize) -> Result<Exponent> {
    let mut tau: Option<Exponent> = None;
    for i in 0..m.rows() {
        if let Ok(d) = m.get(i, j).deg_plus() {
            tau = Some(match tau {
                None => d.clone(),
                Some(t) if d.compare(&t) == Ordering::Greater => d.clone(),
                Some(t) => t,
            });
        }
    }
    tau.ok_or_else(|| Error::DegenerateMatrix(format!("column {j} is zero")))
}

fn column_tau_minus<C: CoeffRing>(m: &GPolyMatrix<C>, j: usize) -> Result<Exponent> {
    let mut tau: Option<Exponent> = None;
    for i in 0..m.rows() {
        if let Ok(d) = m.get(i, j).deg_minus() {
            tau = Some(match tau {
                None => d.clone(),
                Some(t) if d.compare(&t) == Ordering::Less => d.clone(),
                Some(t) => t,
            });
        }
    }
    tau.ok_or_else(|| Error::DegenerateMatrix(format!("column {j} is zero")))
}

/// Per-column coefficient of the highest derivative power.
pub fn lccm_dt(m: &GPolyMatrix<RatD>) -> Result<GPolyMatrix<RatD>> {
    let mut nus = Vec::with_capacity(m.cols());
    for j in 0..m.cols() {
        nus.push(column_nu(m, j)?);
    }
    let mut out = GPolyMatrix::zero(m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let mut terms = Vec::new();
            for (e, c) in m.get(i, j).terms() {
                let lead = c.coeff_at_degree(nus[j])?;
                terms.push((e.clone(), RatD::from_scalar(lead)));
            }
            out.set(i, j, GPoly::normalize(terms));
        }
    }
    Ok(out)
}

/// Per-column terms at the highest shift exponent.
pub fn lccm_sigma_plus(m: &GPolyMatrix<RatD>) -> Result<GPolyMatrix<RatD>> {
    let mut taus = Vec::with_capacity(m.cols());
    for j in 0..m.cols() {
        taus.push(column_tau_plus(m, j)?);
    }
    let mut out = GPolyMatrix::zero(m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let c = m.get(i, j).coeff_at(&taus[j]);
            out.set(i, j, GPoly::monomial(taus[j].clone(), c));
        }
    }
    Ok(out)
}

/// Per-column terms at the extreme exponent pair spanning the diameter.
pub fn lccm_sigma_pair(m: &GPolyMatrix<RatD>) -> Result<GPolyMatrix<RatD>> {
    let mut bounds = Vec::with_capacity(m.cols());
    for j in 0..m.cols() {
        bounds.push((column_tau_plus(m, j)?, column_tau_minus(m, j)?));
    }
    let mut out = GPolyMatrix::zero(m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let (hi, lo) = &bounds[j];
            let mut terms = vec![(hi.clone(), m.get(i, j).coeff_at(hi))];
            if lo.compare(hi) != Ordering::Equal {
                terms.push((lo.clone(), m.get(i, j).coeff_at(lo)));
            }
            out.set(i, j, GPoly::normalize(terms));
        }
    }
    Ok(out)
}

/// Fully composed extraction: per column the coefficient of the top
/// derivative power at the top shift exponent.
pub fn composed_lccm(m: &GPolyMatrix<RatD>) -> Result<ScalarMatrix> {
    let mut out = ScalarMatrix::zero(m.rows(), m.cols());
    for j in 0..m.cols() {
        let nu = column_nu(m, j)?;
        let tau = column_tau_plus(m, j)?;
        for i in 0..m.rows() {
            let c = m.get(i, j).coeff_at(&tau);
            let v = if c.is_zero() { Scalar::zero() } else { c.coeff_at_degree(nu)? };
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// Both composition orders of the derivative and shift extractions agree.
pub fn lccm_composition_commutes(m: &GPolyMatrix<RatD>) -> Result<bool> {
    let a = lccm_dt(&lccm_sigma_plus(m)?)?;
    let b = lccm_sigma_plus(&lccm_dt(m)?)?;
    if a != b {
        return Ok(false);
    }
    let c = lccm_dt(&lccm_sigma_pair(m)?)?;
    let d = lccm_sigma_pair(&lccm_dt(m)?)?;
    Ok(c == d)
}

// ---------------------------------------------------------------------------
// Structural sorting
// ---------------------------------------------------------------------------

/// Row and column permutations establishing the sorted structure.
#[derive(Clone, Debug)]
pub struct SortOutput {
    pub row_perm: Vec<usize>,
    pub col_perm: Vec<usize>,
    pub sorted: GPolyMatrix<PolyD>,
}

/// Sort rows by ascending shift diameter and pick a column order that puts
/// each column's maximal derivative degree onto the diagonal.
///
/// Requires every row to have a uniform shift diameter across its nonzero
/// entries (the structural property of the system class).
pub fn sort_structure(h: &GPolyMatrix<PolyD>) -> Result<SortOutput> {
    let n = h.rows();
    if n != h.cols() {
        return Err(Error::Domain("input parametrization matrix must be square".into()));
    }
    // uniform row diameters
    let mut row_deg: Vec<Exponent> = Vec::with_capacity(n);
    for i in 0..n {
        let mut deg: Option<Exponent> = None;
        for j in 0..n {
            let e = h.get(i, j);
            if e.is_zero() {
                continue;
            }
            let d = e.deg_sigma()?;
            match &deg {
                None => deg = Some(d),
                Some(existing) => {
                    if existing.compare(&d) != Ordering::Equal {
                        return Err(Error::StructureViolation(format!(
                            "row {i} has mixed shift diameters {existing} and {d}"
                        )));
                    }
                }
            }
        }
        row_deg.push(deg.ok_or_else(|| {
            Error::StructureViolation(format!("row {i} is identically zero"))
        })?);
    }

    let mut row_perm: Vec<usize> = (0..n).collect();
    row_perm.sort_by(|&a, &b| row_deg[a].compare(&row_deg[b]).then(a.cmp(&b)));

    let sorted_rows = h.permuted(&row_perm, &(0..n).collect::<Vec<_>>());

    // with ascending diameters the row extremes must both be monotone, or no
    // triangular reduction can reach the diagonal-dominant form
    let row_extreme = |i: usize, upper: bool| -> Result<Exponent> {
        let mut out: Option<Exponent> = None;
        for j in 0..n {
            let e = sorted_rows.get(i, j);
            if e.is_zero() {
                continue;
            }
            let d = if upper { e.deg_plus()? } else { e.deg_minus()? };
            out = Some(match out {
                None => d.clone(),
                Some(t) if upper && d.compare(&t) == Ordering::Greater => d.clone(),
                Some(t) if !upper && d.compare(&t) == Ordering::Less => d.clone(),
                Some(t) => t,
            });
        }
        out.ok_or(Error::DegreeOfZero)
    };
    for i in 1..n {
        let up_prev = row_extreme(i - 1, true)?;
        let up_cur = row_extreme(i, true)?;
        if up_prev.compare(&up_cur) == Ordering::Greater {
            return Err(Error::StructureViolation(format!(
                "row predictions not sortable: {up_prev} above {up_cur} after diameter sort"
            )));
        }
        let lo_prev = row_extreme(i - 1, false)?;
        let lo_cur = row_extreme(i, false)?;
        if lo_prev.compare(&lo_cur) == Ordering::Less {
            return Err(Error::StructureViolation(format!(
                "row delays not sortable: {lo_prev} below {lo_cur} after diameter sort"
            )));
        }
    }

    // column degrees in the row-sorted matrix
    let col_deg: Vec<Vec<Option<i64>>> = (0..n)
        .map(|j| (0..n).map(|i| sorted_rows.get(i, j).deg_dt()).collect())
        .collect();
    let col_max: Vec<i64> = (0..n)
        .map(|j| col_deg[j].iter().flatten().copied().max().unwrap_or(i64::MIN))
        .collect();

    // first permutation (lexicographic) with every diagonal entry attaining
    // its column maximum
    let col_perm = find_col_perm(n, &|i, j| col_deg[j][i] == Some(col_max[j])).ok_or_else(
        || {
            Error::StructureViolation(
                "no column order puts the maximal derivative degrees on the diagonal".into(),
            )
        },
    )?;

    let sorted = sorted_rows.permuted(&(0..n).collect::<Vec<_>>(), &col_perm);
    Ok(SortOutput { row_perm, col_perm, sorted })
}

fn find_col_perm(n: usize, admissible: &dyn Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    fn rec(
        pos: usize,
        n: usize,
        used: &mut Vec<bool>,
        acc: &mut Vec<usize>,
        admissible: &dyn Fn(usize, usize) -> bool,
    ) -> bool {
        if pos == n {
            return true;
        }
        for j in 0..n {
            if !used[j] && admissible(pos, j) {
                used[j] = true;
                acc.push(j);
                if rec(pos + 1, n, used, acc, admissible) {
                    return true;
                }
                acc.pop();
                used[j] = false;
            }
        }
        false
    }
    let mut used = vec![false; n];
    let mut acc = Vec::new();
    if rec(0, n, &mut used, &mut acc, admissible) {
        Some(acc)
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Shift reduction
// ---------------------------------------------------------------------------

/// One recorded entry reduction.
#[derive(Clone, Debug)]
pub struct DivisionRecord {
    pub row: usize,
    pub col: usize,
    pub pass: usize,
    pub qstar: GPolyR,
    pub division: DivisionResult,
    pub entire: EntireResult,
}

/// Output of the reduction sweep.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub hbar: GPolyMatrix<RatD>,
    /// Accumulated unit lower triangular transformation, `hbar = l * sorted`.
    pub l: GPolyMatrix<RatD>,
    pub passes: usize,
    pub records: Vec<DivisionRecord>,
}

/// Options for the reduction sweep.
#[derive(Clone, Debug)]
pub struct ReduceOptions {
    pub digits: u32,
    pub tol_entire: BigRational,
    pub pass_budget: usize,
}

/// Column-wise degree goal: every entry is bounded by its column's diagonal
/// pivot in upper shift degree, shift diameter and derivative degree.
pub fn degree_conditions_hold(m: &GPolyMatrix<RatD>) -> Result<bool> {
    let n = m.rows();
    for j in 0..n {
        let pivot = m.get(j, j);
        if pivot.is_zero() {
            return Ok(false);
        }
        let p_dt = pivot.deg_dt().unwrap_or(i64::MIN);
        for i in 0..n {
            if i == j {
                continue;
            }
            let e = m.get(i, j);
            if e.is_zero() {
                continue;
            }
            if !within_bounds(e, pivot)? {
                return Ok(false);
            }
            if e.deg_dt().unwrap_or(i64::MIN) > p_dt {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Repeated sweeps of below-diagonal entry reductions until the degree goal
/// holds; accumulates the row transformations in a unit lower triangular
/// factor and certifies full rank of the composed extraction.
pub fn reduce_shifts(sorted: &GPolyMatrix<PolyD>, opts: &ReduceOptions) -> Result<Reduction> {
    let n = sorted.rows();
    let mut hbar = sorted.lift();
    let mut l: GPolyMatrix<RatD> = GPolyMatrix::identity(n);
    let mut records = Vec::new();
    let mut passes = 0usize;

    loop {
        if degree_conditions_hold(&hbar)? {
            break;
        }
        if passes >= opts.pass_budget {
            return Err(Error::ReductionDiverged(format!(
                "degree conditions still violated after {passes} passes"
            )));
        }
        let mut applied = 0usize;
        for j in 0..n.saturating_sub(1) {
            for i in j + 1..n {
                let x = hbar.get(i, j).clone();
                let y = hbar.get(j, j).clone();
                if y.is_zero() {
                    return Err(Error::DegenerateMatrix(format!("zero pivot at column {j}")));
                }
                if x.is_zero() || within_bounds(&x, &y)? {
                    continue;
                }
                let out = reduce_entry(&x, &y, opts.digits, &opts.tol_entire).map_err(|e| {
                    match e {
                        Error::PreconditionViolated(msg) => Error::ReductionDiverged(format!(
                            "entry ({i},{j}) not reducible against its pivot: {msg}"
                        )),
                        other => other,
                    }
                })?;
                let Some((division, entire)) = out.record else {
                    continue;
                };
                // row_i <- row_i - q* row_j, in both the matrix and the factor
                for k in 0..n {
                    let v = if k == j {
                        out.hbar.clone()
                    } else {
                        hbar.get(i, k).sub(&out.qstar.mul(hbar.get(j, k)))
                    };
                    hbar.set(i, k, v);
                }
                for k in 0..n {
                    let v = l.get(i, k).sub(&out.qstar.mul(l.get(j, k)));
                    l.set(i, k, v);
                }
                records.push(DivisionRecord {
                    row: i,
                    col: j,
                    pass: passes,
                    qstar: out.qstar,
                    division,
                    entire,
                });
                applied += 1;
            }
        }
        passes += 1;
        if applied == 0 {
            return Err(Error::ReductionDiverged(
                "degree conditions violated but no entry is reducible".into(),
            ));
        }
    }

    // full rank of the composed extraction is the whole point
    let composed = composed_lccm(&hbar)?;
    if composed.rank() < n {
        return Err(Error::NotReducible(format!(
            "composed leading coefficient matrix has rank {} of {}",
            composed.rank(),
            n
        )));
    }
    Ok(Reduction { hbar, l, passes, records })
}

/// Inverse of a unit lower triangular polynomial matrix by forward
/// substitution.
pub fn invert_unit_lower(l: &GPolyMatrix<RatD>) -> Result<GPolyMatrix<RatD>> {
    let n = l.rows();
    if n != l.cols() {
        return Err(Error::PreconditionViolated("factor matrix must be square".into()));
    }
    for i in 0..n {
        if l.get(i, i) != &GPoly::one() {
            return Err(Error::PreconditionViolated(format!(
                "diagonal entry ({i},{i}) is not one"
            )));
        }
        for j in i + 1..n {
            if !l.get(i, j).is_zero() {
                return Err(Error::PreconditionViolated(format!(
                    "entry ({i},{j}) above the diagonal is nonzero"
                )));
            }
        }
    }
    let mut inv: GPolyMatrix<RatD> = GPolyMatrix::identity(n);
    for i in 0..n {
        for j in 0..i {
            let mut acc = GPoly::zero();
            for k in j..i {
                acc = acc.add(&l.get(i, k).mul(inv.get(k, j)));
            }
            inv.set(i, j, acc.neg());
        }
    }
    Ok(inv)
}

// ---------------------------------------------------------------------------
// Separation
// ---------------------------------------------------------------------------

/// `hbar = hhat * K + htilde` with invertible constant `hhat` and diagonal
/// `K` of leading monomials.
#[derive(Clone, Debug)]
pub struct Separation {
    pub hhat: ScalarMatrix,
    pub hhat_inv: ScalarMatrix,
    /// Per column: derivative order and prediction exponent of `K`.
    pub k_diag: Vec<(usize, Exponent)>,
    pub htilde: GPolyMatrix<RatD>,
}

impl Separation {
    /// `K` as a diagonal polynomial matrix.
    pub fn k_matrix(&self) -> GPolyMatrix<RatD> {
        let n = self.k_diag.len();
        let mut k = GPolyMatrix::zero(n, n);
        for (j, (nu, tau)) in self.k_diag.iter().enumerate() {
            k.set(
                j,
                j,
                GPoly::monomial(tau.clone(), RatD::from_poly(PolyD::monomial(Scalar::one(), *nu))),
            );
        }
        k
    }
}

/// Split a reduced matrix into constant leading data and remainder.
pub fn separate(hbar: &GPolyMatrix<RatD>) -> Result<Separation> {
    let n = hbar.rows();
    let mut k_diag = Vec::with_capacity(n);
    for j in 0..n {
        let pivot = hbar.get(j, j);
        if pivot.is_zero() {
            return Err(Error::DegenerateMatrix(format!("zero diagonal entry ({j},{j})")));
        }
        let nu = pivot.deg_dt().unwrap_or(0);
        if nu < 0 {
            return Err(Error::NotReducible(format!(
                "diagonal entry ({j},{j}) has negative derivative degree {nu}"
            )));
        }
        let tau = pivot.deg_plus()?.clone();
        k_diag.push((nu as usize, tau));
    }

    let mut hhat = ScalarMatrix::zero(n, n);
    for j in 0..n {
        let (nu, tau) = &k_diag[j];
        for i in 0..n {
            let c = hbar.get(i, j).coeff_at(tau);
            let v = if c.is_zero() { Scalar::zero() } else { c.coeff_at_degree(*nu as i64)? };
            hhat.set(i, j, v);
        }
    }
    let hhat_inv = hhat.inverse()?;

    let mut htilde = hbar.clone();
    for j in 0..n {
        let (nu, tau) = &k_diag[j];
        for i in 0..n {
            let lead = GPoly::monomial(
                tau.clone(),
                RatD::from_poly(PolyD::monomial(hhat.get(i, j).clone(), *nu)),
            );
            htilde.set(i, j, hbar.get(i, j).sub(&lead));
        }
    }
    Ok(Separation { hhat, hhat_inv, k_diag, htilde })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{pi_rational, BasisRef, DelayBasis};
    use num_bigint::BigInt;
    use num_traits::One;

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

    /// Working-scale two-strings matrix: first column (Dt^2 +- 2 Dt) cosh
    /// profile, second column the flipped cosh column.
    fn strings_matrix(b: &BasisRef) -> GPolyMatrix<PolyD> {
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
        let alpha = e_pi(b, 1, 0);
        let beta = e_pi(b, 0, 10);
        let mut h = GPolyMatrix::zero(2, 2);
        h.set(0, 0, col1(alpha.clone()));
        h.set(0, 1, col2(alpha, 1));
        h.set(1, 0, col1(beta.clone()));
        h.set(1, 1, col2(beta, -1));
        h
    }

    fn opts() -> ReduceOptions {
        ReduceOptions {
            digits: 50,
            tol_entire: BigRational::new(BigInt::one(), crate::prec::pow10(20)),
            pass_budget: 8,
        }
    }

    #[test]
    fn composed_lccm_rank_failure() {
        let b = basis_pi();
        let h = strings_matrix(&b).lift();
        let composed = composed_lccm(&h).unwrap();
        // top prediction and derivative coefficients live in the second row
        assert!(composed.get(0, 0).is_zero());
        assert!(composed.get(0, 1).is_zero());
        assert_eq!(composed.get(1, 0), &Scalar::one());
        assert_eq!(composed.get(1, 1), &Scalar::from_int(-1));
        assert_eq!(composed.rank(), 1);
    }

    #[test]
    fn lccm_identity_fixed_point() {
        let id: GPolyMatrix<RatD> = GPolyMatrix::identity(3);
        assert_eq!(lccm_dt(&id).unwrap(), id);
        assert_eq!(lccm_sigma_plus(&id).unwrap(), id);
        assert_eq!(lccm_sigma_pair(&id).unwrap(), id);
        assert_eq!(composed_lccm(&id).unwrap(), ScalarMatrix::identity(3));
        assert!(lccm_composition_commutes(&id).unwrap());
    }

    #[test]
    fn sorting_on_strings_is_trivial() {
        let b = basis_pi();
        let h = strings_matrix(&b);
        let s = sort_structure(&h).unwrap();
        assert_eq!(s.row_perm, vec![0, 1]);
        assert_eq!(s.col_perm, vec![0, 1]);
        assert_eq!(s.sorted, h);

        // single entry matrix sorts trivially
        let one = GPolyMatrix::from_fn(1, 1, |_, _| GPoly::constant(PolyD::one()));
        let s1 = sort_structure(&one).unwrap();
        assert_eq!(s1.row_perm, vec![0]);
    }

    #[test]
    fn sorting_recovers_swapped_rows() {
        let b = basis_pi();
        let h = strings_matrix(&b);
        let swapped = h.permuted(&[1, 0], &[0, 1]);
        let s = sort_structure(&swapped).unwrap();
        assert_eq!(s.row_perm, vec![1, 0]);
        assert_eq!(s.sorted, h);
    }

    #[test]
    fn reduction_of_strings_matrix() {
        let b = basis_pi();
        let h = strings_matrix(&b);
        let red = reduce_shifts(&h, &opts()).unwrap();

        // exactly one entry reduction, pivot column untouched elsewhere
        assert_eq!(red.records.len(), 1);
        assert_eq!((red.records[0].row, red.records[0].col), (1, 0));
        assert_eq!(red.passes, 1);
        assert!(degree_conditions_hold(&red.hbar).unwrap());
        assert!(lccm_composition_commutes(&red.hbar).unwrap());

        // factor is unit lower triangular with one nontrivial entry
        assert_eq!(red.l.get(0, 0), &GPoly::one());
        assert_eq!(red.l.get(1, 1), &GPoly::one());
        assert!(red.l.get(0, 1).is_zero());
        assert_eq!(red.l.get(1, 0), &red.records[0].qstar.neg());

        // hbar = l * h exactly
        let rebuilt = red.l.mul(&h.lift()).unwrap();
        assert_eq!(rebuilt, red.hbar);

        // determinant of the factor is one (unimodular)
        assert_eq!(red.l.det().unwrap(), GPoly::one());
    }

    #[test]
    fn separation_of_reduced_strings() {
        let b = basis_pi();
        let h = strings_matrix(&b);
        let red = reduce_shifts(&h, &opts()).unwrap();
        let sep = separate(&red.hbar).unwrap();

        // hhat = diag(1, -2)
        assert_eq!(sep.hhat.get(0, 0), &Scalar::one());
        assert_eq!(sep.hhat.get(1, 1), &Scalar::from_int(-2));
        assert!(sep.hhat.get(0, 1).is_zero());
        assert!(sep.hhat.get(1, 0).is_zero());

        // K = diag(Dt^2 sigma^pi, sigma^10)
        assert_eq!(sep.k_diag[0].0, 2);
        assert_eq!(sep.k_diag[0].1.compare(&e_pi(&b, 1, 0)), Ordering::Equal);
        assert_eq!(sep.k_diag[1].0, 0);
        assert_eq!(
            sep.k_diag[1].1.compare(&e_pi(&b, 0, 10)),
            Ordering::Equal
        );

        // hhat inverse = diag(1, -1/2)
        assert_eq!(sep.hhat_inv.get(1, 1), &Scalar::from_rational(BigRational::new(
            (-1).into(),
            2.into()
        )));

        // reassembly: hbar = hhat K + htilde
        let hhat_gp = GPolyMatrix::from_fn(2, 2, |i, j| {
            GPoly::constant(RatD::from_scalar(sep.hhat.get(i, j).clone()))
        });
        let rebuilt = hhat_gp.mul(&sep.k_matrix()).unwrap().sub(&red.hbar).unwrap();
        let diff = rebuilt.sub(&sep.htilde.map(|g| g.neg())).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(diff.get(i, j).is_zero(), "mismatch at ({i},{j})");
            }
        }
    }

    #[test]
    fn separation_of_monomial_diagonal() {
        let b = basis_pi();
        let mut m: GPolyMatrix<RatD> = GPolyMatrix::zero(2, 2);
        m.set(0, 0, GPoly::monomial(e_pi(&b, 1, 0), RatD::from_poly(PolyD::monomial(Scalar::one(), 1))));
        m.set(1, 1, GPoly::monomial(e_pi(&b, 0, 2), RatD::from_int(3)));
        let sep = separate(&m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(sep.htilde.get(i, j).is_zero());
            }
        }
        assert_eq!(sep.hhat.get(1, 1), &Scalar::from_int(3));
    }

    #[test]
    fn diagonal_input_reduces_without_work() {
        let b = basis_pi();
        let mut h: GPolyMatrix<PolyD> = GPolyMatrix::zero(2, 2);
        h.set(0, 0, GPoly::monomial(e_pi(&b, 1, 0), PolyD::from_ints(&[0, 1])));
        h.set(1, 1, GPoly::monomial(e_pi(&b, 0, 2), PolyD::from_ints(&[0, 0, 1])));
        let red = reduce_shifts(&h, &opts()).unwrap();
        assert!(red.records.is_empty());
        assert_eq!(red.passes, 0);
        assert_eq!(red.l, GPolyMatrix::identity(2));
    }

    #[test]
    fn unit_lower_inverse() {
        let b = basis_pi();
        // identity inverts to itself
        let id: GPolyMatrix<RatD> = GPolyMatrix::identity(3);
        assert_eq!(invert_unit_lower(&id).unwrap(), id);

        // single subdiagonal entry flips sign
        let q = GPoly::monomial(
            e_pi(&b, -1, 10),
            RatD::new(PolyD::from_ints(&[2, -1]), PolyD::from_ints(&[2, 1])).unwrap(),
        );
        let mut l: GPolyMatrix<RatD> = GPolyMatrix::identity(2);
        l.set(1, 0, q.neg());
        let inv = invert_unit_lower(&l).unwrap();
        assert_eq!(inv.get(1, 0), &q);
        let prod = l.mul(&inv).unwrap();
        assert_eq!(prod, GPolyMatrix::identity(2));

        // 3x3 with several entries: exact product check
        let mut l3: GPolyMatrix<RatD> = GPolyMatrix::identity(3);
        l3.set(1, 0, q.clone());
        l3.set(2, 0, q.mul(&q));
        l3.set(2, 1, q.neg());
        let inv3 = invert_unit_lower(&l3).unwrap();
        assert_eq!(l3.mul(&inv3).unwrap(), GPolyMatrix::identity(3));

        // non-unitriangular input is rejected
        let mut bad: GPolyMatrix<RatD> = GPolyMatrix::identity(2);
        bad.set(0, 1, GPoly::one());
        assert!(matches!(
            invert_unit_lower(&bad),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn mixed_diameter_row_rejected() {
        let b = basis_pi();
        let mut h: GPolyMatrix<PolyD> = GPolyMatrix::zero(2, 2);
        // row 0 mixes diameters 2pi and 0
        h.set(0, 0, GPoly::normalize(vec![
            (e_pi(&b, 1, 0), PolyD::one()),
            (e_pi(&b, -1, 0), PolyD::one()),
        ]));
        h.set(0, 1, GPoly::one());
        h.set(1, 0, GPoly::one());
        h.set(1, 1, GPoly::one());
        assert!(matches!(
            sort_structure(&h),
            Err(Error::StructureViolation(_))
        ));
    }
}
