//! Input documents, serialization of symbolic data and instance generation.
//!
//! A system document carries either the first-order boundary system matrices
//! (mode `system`) or a directly specified input parametrization matrix
//! (mode `h_matrix`), together with the delay basis and solver options.
//! Delay values are decimal or rational strings; the named constant `pi` is
//! provided so shift exponents like `10 - 3*pi` stay exact at the working
//! precision.

use crate::error::{Error, Result};
use crate::gpmatrix::GPolyMatrix;
use crate::gpoly::{GPoly, PolyD, RatD};
use crate::prec::{Complex, Real};
use crate::scalars::{
    format_rational, parse_rational, pi_rational, BasisRef, ConstField, DelayBasis, ExpConst,
    Exponent, Scalar,
};
use crate::system::HyperbolicSystem;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

// ---------------------------------------------------------------------------
// Input schema
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Default)]
pub struct DocumentOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_digits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_entire: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_oracle: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass_budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct BasisEntry {
    pub name: String,
    /// Rational, decimal or the named constant `pi`.
    pub value: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SystemSection {
    pub f: Vec<Vec<String>>,
    pub b: Vec<Vec<String>>,
    pub q0: Vec<Vec<String>>,
    pub q1: Vec<Vec<String>>,
    pub c: Vec<Vec<String>>,
    pub tau_minus: Vec<String>,
    pub tau_plus: Vec<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct HEntry {
    pub row: usize,
    pub col: usize,
    /// Shift exponent expression, e.g. `"10 - 3*pi"`.
    pub exponent: String,
    /// Derivative-polynomial coefficients, ascending powers.
    pub coeff: Vec<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct HMatrixSection {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<HEntry>,
}

/// Top-level input document; exactly one of `system` / `h_matrix` is set.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SystemDocument {
    #[serde(default)]
    pub basis: Vec<BasisEntry>,
    #[serde(default)]
    pub options: DocumentOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_matrix: Option<HMatrixSection>,
}

impl SystemDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SystemDocument =
            serde_json::from_str(text).map_err(|e| Error::Schema(format!("JSON parse: {e}")))?;
        doc.validate_shape()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serialization")
    }

    fn validate_shape(&self) -> Result<()> {
        match (&self.system, &self.h_matrix) {
            (Some(_), Some(_)) => Err(Error::Schema(
                "document must contain exactly one of 'system' and 'h_matrix', found both".into(),
            )),
            (None, None) => Err(Error::Schema(
                "document must contain one of 'system' or 'h_matrix'".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn digits(&self) -> u32 {
        self.options.precision_digits.unwrap_or(50)
    }

    /// Canonical hash of the document bytes (stable field order).
    pub fn input_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("document serialization");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex_string(&hasher.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Resolve the delay basis at the requested precision.
pub fn build_basis(doc: &SystemDocument) -> Result<BasisRef> {
    let digits = doc.digits();
    let mut entries = Vec::with_capacity(doc.basis.len());
    for e in &doc.basis {
        let value = parse_basis_value(&e.value, digits)?;
        entries.push((e.name.clone(), value));
    }
    DelayBasis::new(entries, digits)
}

/// Basis values: `pi` from the built-in table, otherwise a rational or
/// decimal literal.
pub fn parse_basis_value(text: &str, digits: u32) -> Result<BigRational> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("pi") {
        return Ok(pi_rational(digits + crate::prec::GUARD_DIGITS));
    }
    parse_rational(t).ok_or_else(|| Error::Schema(format!("cannot parse value '{text}'")))
}

// ---------------------------------------------------------------------------
// Exponent expressions
// ---------------------------------------------------------------------------

/// Parse a linear shift-exponent expression over the basis names, e.g.
/// `"10 - 3*pi"`, `"alpha/2 + 1/4"` or `"-beta"`.
pub fn parse_exponent_expr(text: &str, basis: &BasisRef) -> Result<Exponent> {
    let mut coeffs = vec![BigRational::zero(); basis.len()];
    let mut offset = BigRational::zero();
    for (sign, term) in split_terms(text)? {
        let (name, value) = parse_term(&term)?;
        let signed = if sign { -value } else { value };
        match name {
            None => offset += signed,
            Some(n) => {
                let idx = basis.index_of(&n).ok_or_else(|| {
                    Error::Schema(format!("unknown delay name '{n}' in exponent '{text}'"))
                })?;
                coeffs[idx] += signed;
            }
        }
    }
    Ok(Exponent::new(basis, coeffs, offset))
}

fn split_terms(text: &str) -> Result<Vec<(bool, String)>> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut neg = false;
    let mut seen_any = false;
    for ch in text.chars() {
        match ch {
            '+' | '-' if seen_any && !cur.trim().is_empty() => {
                out.push((neg, cur.trim().to_string()));
                cur = String::new();
                neg = ch == '-';
            }
            '-' if cur.trim().is_empty() => {
                neg = !neg;
                seen_any = true;
            }
            '+' if cur.trim().is_empty() => {
                seen_any = true;
            }
            _ => {
                if !ch.is_whitespace() {
                    seen_any = true;
                }
                cur.push(ch);
            }
        }
    }
    if cur.trim().is_empty() {
        return Err(Error::Schema(format!("empty exponent expression '{text}'")));
    }
    out.push((neg, cur.trim().to_string()));
    Ok(out)
}

fn is_name_piece(p: &str) -> bool {
    p.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
}

fn parse_term(term: &str) -> Result<(Option<String>, BigRational)> {
    let mut coeff = BigRational::one();
    let mut name: Option<String> = None;
    for piece in term.split('*') {
        let piece = piece.trim();
        if piece.is_empty() {
            return Err(Error::Schema(format!("malformed exponent term '{term}'")));
        }
        if is_name_piece(piece) {
            // allow a trailing rational divisor: name/2
            let (head, div) = match piece.split_once('/') {
                Some((h, d)) => (h.trim(), Some(d.trim())),
                None => (piece, None),
            };
            if name.is_some() {
                return Err(Error::Schema(format!(
                    "nonlinear exponent term '{term}' (two names)"
                )));
            }
            name = Some(head.to_string());
            if let Some(d) = div {
                let q = parse_rational(d)
                    .ok_or_else(|| Error::Schema(format!("bad divisor in '{term}'")))?;
                if q.is_zero() {
                    return Err(Error::Schema(format!("division by zero in '{term}'")));
                }
                coeff /= q;
            }
        } else {
            let q = parse_rational(piece)
                .ok_or_else(|| Error::Schema(format!("bad number '{piece}' in '{term}'")))?;
            coeff *= q;
        }
    }
    Ok((name, coeff))
}

// ---------------------------------------------------------------------------
// Document to system / matrix
// ---------------------------------------------------------------------------

fn parse_rat_matrix(rows: &[Vec<String>], name: &str) -> Result<Vec<Vec<BigRational>>> {
    let width = rows.first().map_or(0, Vec::len);
    rows.iter()
        .map(|row| {
            if row.len() != width {
                return Err(Error::Schema(format!("ragged matrix '{name}'")));
            }
            row.iter()
                .map(|s| {
                    parse_rational(s).ok_or_else(|| {
                        Error::Schema(format!("bad rational '{s}' in matrix '{name}'"))
                    })
                })
                .collect()
        })
        .collect()
}

/// Build the first-order system from a mode-`system` document.
pub fn doc_to_system(doc: &SystemDocument, basis: &BasisRef) -> Result<HyperbolicSystem> {
    let section = doc
        .system
        .as_ref()
        .ok_or_else(|| Error::Schema("document has no 'system' section".into()))?;
    let sys = HyperbolicSystem {
        f: parse_rat_matrix(&section.f, "F")?,
        b: parse_rat_matrix(&section.b, "B")?,
        q0: parse_rat_matrix(&section.q0, "Q0")?,
        q1: parse_rat_matrix(&section.q1, "Q1")?,
        c: parse_rat_matrix(&section.c, "C")?,
        tau_minus: section
            .tau_minus
            .iter()
            .map(|s| parse_exponent_expr(s, basis))
            .collect::<Result<_>>()?,
        tau_plus: section
            .tau_plus
            .iter()
            .map(|s| parse_exponent_expr(s, basis))
            .collect::<Result<_>>()?,
        basis: basis.clone(),
    };
    sys.validate()?;
    Ok(sys)
}

/// Build the input parametrization matrix from a mode-`h_matrix` document.
pub fn doc_to_h(doc: &SystemDocument, basis: &BasisRef) -> Result<GPolyMatrix<PolyD>> {
    let section = doc
        .h_matrix
        .as_ref()
        .ok_or_else(|| Error::Schema("document has no 'h_matrix' section".into()))?;
    if section.rows == 0 || section.rows != section.cols {
        return Err(Error::Schema("h_matrix must be square and nonempty".into()));
    }
    let mut terms: Vec<Vec<Vec<(Exponent, PolyD)>>> =
        vec![vec![Vec::new(); section.cols]; section.rows];
    for e in &section.entries {
        if e.row >= section.rows || e.col >= section.cols {
            return Err(Error::Schema(format!(
                "entry ({}, {}) outside a {}x{} matrix",
                e.row, e.col, section.rows, section.cols
            )));
        }
        let exp = parse_exponent_expr(&e.exponent, basis)?;
        let coeffs: Vec<BigRational> = e
            .coeff
            .iter()
            .map(|s| {
                parse_rational(s)
                    .ok_or_else(|| Error::Schema(format!("bad coefficient '{s}'")))
            })
            .collect::<Result<_>>()?;
        terms[e.row][e.col].push((exp, PolyD::from_rationals(&coeffs)));
    }
    Ok(GPolyMatrix::from_fn(section.rows, section.cols, |i, j| {
        GPoly::normalize(terms[i][j].clone())
    }))
}

/// Render a polynomial-layer matrix as a mode-`h_matrix` section
/// (inverse of [`doc_to_h`] for rational coefficients).
pub fn h_to_section(h: &GPolyMatrix<PolyD>, basis: &BasisRef) -> Result<HMatrixSection> {
    let mut entries = Vec::new();
    for i in 0..h.rows() {
        for j in 0..h.cols() {
            for (e, c) in h.get(i, j).terms() {
                let coeff: Vec<String> = c
                    .coeffs()
                    .iter()
                    .map(|s| {
                        s.as_rational().map(|q| format_rational(&q)).ok_or_else(|| {
                            Error::Domain("matrix has non-rational coefficients".into())
                        })
                    })
                    .collect::<Result<_>>()?;
                entries.push(HEntry {
                    row: i,
                    col: j,
                    exponent: render_exponent_expr(e, basis),
                    coeff,
                });
            }
        }
    }
    Ok(HMatrixSection { rows: h.rows(), cols: h.cols(), entries })
}

fn render_exponent_expr(e: &Exponent, _basis: &BasisRef) -> String {
    format!("{e}")
}

// ---------------------------------------------------------------------------
// Symbolic value serialization (report round-trip)
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ExponentRepr {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coeffs: Vec<(String, String)>,
    pub offset: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ExpConstRepr(pub Vec<(ExponentRepr, String)>);

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(untagged)]
pub enum ScalarRepr {
    Exact { num: ExpConstRepr, den: ExpConstRepr },
    Num { re: String, im: String, scale: u32 },
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct RatRepr {
    pub num: Vec<ScalarRepr>,
    pub den: Vec<ScalarRepr>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct GPolyRepr {
    pub terms: Vec<(ExponentRepr, RatRepr)>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct MatrixRepr {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<GPolyRepr>,
}

pub fn exponent_repr(e: &Exponent) -> ExponentRepr {
    let coeffs = match e.basis() {
        None => Vec::new(),
        Some(b) => e
            .coeffs()
            .iter()
            .zip(b.names())
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, n)| (n.clone(), format_rational(c)))
            .collect(),
    };
    ExponentRepr { coeffs, offset: format_rational(e.offset()) }
}

pub fn exponent_from_repr(r: &ExponentRepr, basis: &BasisRef) -> Result<Exponent> {
    let mut coeffs = vec![BigRational::zero(); basis.len()];
    for (name, value) in &r.coeffs {
        let idx = basis
            .index_of(name)
            .ok_or_else(|| Error::Schema(format!("unknown delay name '{name}'")))?;
        coeffs[idx] = parse_rational(value)
            .ok_or_else(|| Error::Schema(format!("bad rational '{value}'")))?;
    }
    let offset = parse_rational(&r.offset)
        .ok_or_else(|| Error::Schema(format!("bad rational '{}'", r.offset)))?;
    Ok(Exponent::new(basis, coeffs, offset))
}

fn expconst_repr(c: &ExpConst) -> ExpConstRepr {
    ExpConstRepr(
        c.terms()
            .iter()
            .map(|(e, q)| (exponent_repr(e), format_rational(q)))
            .collect(),
    )
}

fn expconst_from_repr(r: &ExpConstRepr, basis: &BasisRef) -> Result<ExpConst> {
    let mut terms = Vec::with_capacity(r.0.len());
    for (er, q) in &r.0 {
        terms.push((
            exponent_from_repr(er, basis)?,
            parse_rational(q).ok_or_else(|| Error::Schema(format!("bad rational '{q}'")))?,
        ));
    }
    Ok(ExpConst::normalize(terms))
}

pub fn scalar_repr(s: &Scalar) -> ScalarRepr {
    match s {
        Scalar::Exact(c) => ScalarRepr::Exact {
            num: expconst_repr(c.num()),
            den: expconst_repr(c.den()),
        },
        Scalar::Num(v) => ScalarRepr::Num {
            re: v.re.to_decimal_string(),
            im: v.im.to_decimal_string(),
            scale: v.scale(),
        },
    }
}

pub fn scalar_from_repr(r: &ScalarRepr, basis: &BasisRef) -> Result<Scalar> {
    match r {
        ScalarRepr::Exact { num, den } => Ok(Scalar::Exact(ConstField::new(
            expconst_from_repr(num, basis)?,
            expconst_from_repr(den, basis)?,
        )?)),
        ScalarRepr::Num { re, im, scale } => {
            let re = Real::parse_decimal(re, *scale)
                .ok_or_else(|| Error::Schema("bad numeric scalar".into()))?;
            let im = Real::parse_decimal(im, *scale)
                .ok_or_else(|| Error::Schema("bad numeric scalar".into()))?;
            Ok(Scalar::Num(Complex::new(re, im)))
        }
    }
}

fn poly_repr(p: &PolyD) -> Vec<ScalarRepr> {
    p.coeffs().iter().map(scalar_repr).collect()
}

fn poly_from_repr(r: &[ScalarRepr], basis: &BasisRef) -> Result<PolyD> {
    let coeffs = r
        .iter()
        .map(|s| scalar_from_repr(s, basis))
        .collect::<Result<Vec<_>>>()?;
    Ok(PolyD::from_coeffs(coeffs))
}

pub fn rat_repr(r: &RatD) -> RatRepr {
    RatRepr { num: poly_repr(r.num()), den: poly_repr(r.den()) }
}

pub fn rat_from_repr(r: &RatRepr, basis: &BasisRef) -> Result<RatD> {
    RatD::new(poly_from_repr(&r.num, basis)?, poly_from_repr(&r.den, basis)?)
}

pub fn gpoly_repr(g: &GPoly<RatD>) -> GPolyRepr {
    GPolyRepr {
        terms: g
            .terms()
            .iter()
            .map(|(e, c)| (exponent_repr(e), rat_repr(c)))
            .collect(),
    }
}

pub fn gpoly_from_repr(r: &GPolyRepr, basis: &BasisRef) -> Result<GPoly<RatD>> {
    let mut terms = Vec::with_capacity(r.terms.len());
    for (er, cr) in &r.terms {
        terms.push((exponent_from_repr(er, basis)?, rat_from_repr(cr, basis)?));
    }
    Ok(GPoly::normalize(terms))
}

pub fn matrix_repr(m: &GPolyMatrix<RatD>) -> MatrixRepr {
    let mut entries = Vec::with_capacity(m.rows() * m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            entries.push(gpoly_repr(m.get(i, j)));
        }
    }
    MatrixRepr { rows: m.rows(), cols: m.cols(), entries }
}

pub fn matrix_from_repr(r: &MatrixRepr, basis: &BasisRef) -> Result<GPolyMatrix<RatD>> {
    if r.entries.len() != r.rows * r.cols {
        return Err(Error::Schema("matrix entry count mismatch".into()));
    }
    let mut out = GPolyMatrix::zero(r.rows, r.cols);
    for i in 0..r.rows {
        for j in 0..r.cols {
            out.set(i, j, gpoly_from_repr(&r.entries[i * r.cols + j], basis)?);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Built-in documents and generation
// ---------------------------------------------------------------------------

/// The two-strings demo document (travel times pi and 10, unit mass),
/// specified directly as an `h_matrix` at the working scale of the reduction
/// walkthrough.
pub fn strings_demo_document() -> SystemDocument {
    let digits = 50u32;
    let basis = DelayBasis::new(vec![("pi".into(), pi_rational(digits + 30))], digits)
        .expect("demo basis");
    let alpha = Exponent::unit(&basis, 0);
    let beta = Exponent::from_offset(BigRational::from_integer(10.into()));
    let h = crate::system::strings_benchmark(&alpha, &beta, &BigRational::one())
        .scale_rational(&BigRational::from_integer(4.into()));
    let section = h_to_section(&h, &basis).expect("rational benchmark entries");
    SystemDocument {
        basis: vec![BasisEntry { name: "pi".into(), value: "pi".into() }],
        options: DocumentOptions::default(),
        system: None,
        h_matrix: Some(section),
    }
}

/// Deterministic random system document within the configured bounds
/// (`n <= 6` states, `m <= 4` channels).
pub fn generate_document(seed: u64, n: usize, m: usize) -> Result<SystemDocument> {
    if n == 0 || m == 0 || n > 6 || m > 4 || m > n {
        return Err(Error::Schema(format!(
            "generator bounds: 1 <= m <= min(n, 4), 1 <= n <= 6; got n={n}, m={m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _attempt in 0..500 {
        let doc = draw_document(&mut rng, n, m);
        if document_is_generic(&doc) {
            return Ok(doc);
        }
    }
    Err(Error::Schema(format!(
        "could not generate a generic system for seed {seed}, n={n}, m={m}"
    )))
}

fn draw_document(rng: &mut ChaCha8Rng, n: usize, m: usize) -> SystemDocument {
    let mut int_mat = |rows: usize, cols: usize, lo: i64, hi: i64| -> Vec<Vec<String>> {
        (0..rows)
            .map(|_| (0..cols).map(|_| rng.gen_range(lo..=hi).to_string()).collect())
            .collect()
    };
    let f = int_mat(n, n, -2, 2);
    let b = int_mat(n, m, -1, 1);
    let q0 = int_mat(m, m, -2, 2);
    let c = int_mat(m, n, -1, 1);
    // each input side reflects its own channel pair (delays and predictions
    // ascend together, as in physically separate transport lines)
    let weights = ["1", "-1", "2", "-2", "1/2", "-1/2"];
    let q1: Vec<Vec<String>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    if i == j {
                        weights[rng.gen_range(0..weights.len())].to_string()
                    } else {
                        "0".to_string()
                    }
                })
                .collect()
        })
        .collect();
    // distinct delays from the grid k/8, k in 2..=24
    let mut ks: Vec<i64> = (2..=24).collect();
    for i in (1..ks.len()).rev() {
        let j = rng.gen_range(0..=i);
        ks.swap(i, j);
    }
    let mut tm: Vec<i64> = ks[..m].to_vec();
    let mut tp: Vec<i64> = ks[m..2 * m].to_vec();
    tm.sort_unstable();
    tp.sort_unstable();
    let basis: Vec<BasisEntry> = tm
        .iter()
        .enumerate()
        .map(|(i, k)| BasisEntry { name: format!("tm{i}"), value: format!("{k}/8") })
        .chain(tp.iter().enumerate().map(|(i, k)| BasisEntry {
            name: format!("tp{i}"),
            value: format!("{k}/8"),
        }))
        .collect();
    SystemDocument {
        basis,
        options: DocumentOptions { seed: Some(0), ..Default::default() },
        system: Some(SystemSection {
            f,
            b,
            q0,
            q1,
            c,
            tau_minus: (0..m).map(|i| format!("tm{i}")).collect(),
            tau_plus: (0..m).map(|i| format!("tp{i}")).collect(),
        }),
        h_matrix: None,
    }
}

/// A draw is kept when it forms a valid class member whose parametrization
/// matrix sorts structurally.
fn document_is_generic(doc: &SystemDocument) -> bool {
    let Ok(basis) = build_basis(doc) else { return false };
    let Ok(sys) = doc_to_system(doc, &basis) else { return false };
    let Ok(flat) = crate::system::flat_parametrize(&sys.f, &sys.b) else {
        return false;
    };
    let Ok(h) = crate::system::build_h(&sys, &flat) else { return false };
    crate::gpmatrix::sort_structure(&h).is_ok()
}
