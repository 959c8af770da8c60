//! Sparse multivariate polynomial arithmetic over complex coefficients.
//!
//! Polynomials are stored as maps from exponent vectors to coefficients in
//! graded lexicographic order, which keeps printing and iteration
//! deterministic. This carrier is shared by variety generators, Jacobians,
//! minors, and the critical-point systems built on top of them.

use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

mod parse;
mod roots;
pub use parse::parse_polynomial;
pub use roots::univariate_roots;

/// Errors from polynomial parsing, evaluation, and matrix operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("syntax error at position {position}: {message}")]
    Syntax { message: String, position: usize },
    #[error("exponent at position {position} is not a positive integer")]
    BadExponent { position: usize },
    #[error("point has {got} coordinates but the polynomial has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("variable index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },
    #[error("minor size {k} exceeds matrix dimensions {rows}x{cols}")]
    MinorTooLarge { k: usize, rows: usize, cols: usize },
    #[error("matrix shape {rows}x{cols} needs {expected} entries, got {got}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },
    #[error("matrix entries disagree in variable count")]
    MixedVariableCount,
}

/// Exponent vector ordered by total degree first, then lexicographically.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    fn new(exps: Vec<u32>) -> Self {
        Monomial { exps }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    fn total_degree(&self) -> u32 {
        self.exps.iter().sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with complex double-precision coefficients.
///
/// Invariants: no stored coefficient is exactly zero, and every exponent
/// vector has length `num_vars`.
#[derive(Clone, PartialEq, Debug)]
pub struct Polynomial {
    num_vars: usize,
    terms: BTreeMap<Monomial, Complex64>,
}

impl Polynomial {
    /// The zero polynomial (empty term map, total degree 0 by convention).
    pub fn zero(num_vars: usize) -> Self {
        Polynomial {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, value: Complex64) -> Self {
        let mut p = Polynomial::zero(num_vars);
        if value.norm() != 0.0 {
            p.terms.insert(Monomial::new(vec![0; num_vars]), value);
        }
        p
    }

    pub fn one(num_vars: usize) -> Self {
        Polynomial::constant(num_vars, Complex64::new(1.0, 0.0))
    }

    /// The monomial `x_index`.
    pub fn variable(num_vars: usize, index: usize) -> Result<Self, PolyError> {
        if index >= num_vars {
            return Err(PolyError::IndexOutOfRange { index, num_vars });
        }
        let mut exps = vec![0; num_vars];
        exps[index] = 1;
        let mut p = Polynomial::zero(num_vars);
        p.terms
            .insert(Monomial::new(exps), Complex64::new(1.0, 0.0));
        Ok(p)
    }

    /// Builds a polynomial from raw terms, merging duplicates and dropping
    /// exact zeros. Exponent vectors must all have length `num_vars`.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Complex64)>,
    {
        let mut p = Polynomial::zero(num_vars);
        for (exps, coeff) in terms {
            debug_assert_eq!(exps.len(), num_vars);
            p.add_term(Monomial::new(exps), coeff);
        }
        p
    }

    fn add_term(&mut self, mono: Monomial, coeff: Complex64) {
        if coeff.norm() == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                let sum = *e.get() + coeff;
                if sum.norm() == 0.0 {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Maximum term degree; 0 for the zero polynomial.
    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.total_degree())
            .max()
            .unwrap_or(0)
    }

    /// Maximum over terms of the exponent sum restricted to `slots`.
    pub fn degree_in(&self, slots: &[usize]) -> u32 {
        self.terms
            .keys()
            .map(|m| slots.iter().map(|&j| m.exps[j]).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn coefficient(&self, exps: &[u32]) -> Complex64 {
        self.terms
            .get(&Monomial::new(exps.to_vec()))
            .copied()
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], Complex64)> {
        self.terms.iter().map(|(m, &c)| (m.exps.as_slice(), c))
    }

    /// Sum of coefficient magnitudes; a natural scale for residual tests.
    pub fn coeff_l1(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Polynomial {
        let mut out = Polynomial::zero(self.num_vars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * factor);
        }
        out
    }

    /// Term-sum evaluation at a complex point.
    pub fn evaluate(&self, point: &[Complex64]) -> Result<Complex64, PolyError> {
        if point.len() != self.num_vars {
            return Err(PolyError::DimensionMismatch {
                expected: self.num_vars,
                got: point.len(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut term = *c;
            for (j, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    term *= point[j].powu(e);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Formal partial derivative with respect to variable `var`.
    pub fn differentiate(&self, var: usize) -> Result<Polynomial, PolyError> {
        if var >= self.num_vars {
            return Err(PolyError::IndexOutOfRange {
                index: var,
                num_vars: self.num_vars,
            });
        }
        let mut out = Polynomial::zero(self.num_vars);
        for (m, c) in &self.terms {
            let e = m.exps[var];
            if e == 0 {
                continue;
            }
            let mut exps = m.exps.clone();
            exps[var] = e - 1;
            out.add_term(Monomial::new(exps), c * e as f64);
        }
        Ok(out)
    }

    pub fn pow(&self, exponent: u32) -> Polynomial {
        let mut result = Polynomial::one(self.num_vars);
        let mut base = self.clone();
        let mut e = exponent;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Substitutes `subs[j]` for variable `j`. All substitutes must share a
    /// common variable context, which becomes the context of the result.
    pub fn compose(&self, subs: &[Polynomial]) -> Result<Polynomial, PolyError> {
        if subs.len() != self.num_vars {
            return Err(PolyError::DimensionMismatch {
                expected: self.num_vars,
                got: subs.len(),
            });
        }
        let target_vars = subs.first().map(|p| p.num_vars).unwrap_or(0);
        if subs.iter().any(|p| p.num_vars != target_vars) {
            return Err(PolyError::MixedVariableCount);
        }
        let mut power_cache: Vec<HashMap<u32, Polynomial>> = vec![HashMap::new(); subs.len()];
        let mut acc = Polynomial::zero(target_vars);
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(target_vars, *c);
            for (j, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = power_cache[j]
                    .entry(e)
                    .or_insert_with(|| subs[j].pow(e))
                    .clone();
                term = &term * &pw;
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// Re-indexes variables into a larger context: variable `j` maps to slot
    /// `slot_map[j]`.
    pub fn embed(&self, new_num_vars: usize, slot_map: &[usize]) -> Result<Polynomial, PolyError> {
        if slot_map.len() != self.num_vars {
            return Err(PolyError::DimensionMismatch {
                expected: self.num_vars,
                got: slot_map.len(),
            });
        }
        for &s in slot_map {
            if s >= new_num_vars {
                return Err(PolyError::IndexOutOfRange {
                    index: s,
                    num_vars: new_num_vars,
                });
            }
        }
        let mut out = Polynomial::zero(new_num_vars);
        for (m, c) in &self.terms {
            let mut exps = vec![0u32; new_num_vars];
            for (j, &e) in m.exps.iter().enumerate() {
                exps[slot_map[j]] += e;
            }
            out.add_term(Monomial::new(exps), *c);
        }
        Ok(out)
    }

    /// Fixes the trailing `values.len()` variables to the given values,
    /// returning a polynomial in the remaining leading variables.
    pub fn specialize_suffix(&self, values: &[Complex64]) -> Result<Polynomial, PolyError> {
        if values.len() > self.num_vars {
            return Err(PolyError::DimensionMismatch {
                expected: self.num_vars,
                got: values.len(),
            });
        }
        let keep = self.num_vars - values.len();
        let mut out = Polynomial::zero(keep);
        for (m, c) in &self.terms {
            let mut coeff = *c;
            for (i, &v) in values.iter().enumerate() {
                let e = m.exps[keep + i];
                if e > 0 {
                    coeff *= v.powu(e);
                }
            }
            out.add_term(Monomial::new(m.exps[..keep].to_vec()), coeff);
        }
        Ok(out)
    }

    /// Term-wise comparison with absolute tolerance on coefficients.
    pub fn approx_eq(&self, other: &Polynomial, tol: f64) -> bool {
        if self.num_vars != other.num_vars {
            return false;
        }
        let keys: std::collections::BTreeSet<_> =
            self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter().all(|k| {
            let a = self.terms.get(k).copied().unwrap_or_default();
            let b = other.terms.get(k).copied().unwrap_or_default();
            (a - b).norm() <= tol
        })
    }

    /// Renders the polynomial with the given variable names, descending
    /// graded-lex term order. Real-coefficient output re-parses to the same
    /// polynomial.
    pub fn to_text(&self, vars: &[&str]) -> String {
        debug_assert_eq!(vars.len(), self.num_vars);
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let has_vars = m.exps.iter().any(|&e| e > 0);
            let (negative, coeff_str, suppress_coeff) = format_coefficient(*c, has_vars);
            if i == 0 {
                if negative {
                    out.push('-');
                }
            } else if negative {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let mut pieces: Vec<String> = Vec::new();
            if !suppress_coeff {
                pieces.push(coeff_str);
            }
            for (j, &e) in m.exps.iter().enumerate() {
                if e == 1 {
                    pieces.push(vars[j].to_string());
                } else if e > 1 {
                    pieces.push(format!("{}^{}", vars[j], e));
                }
            }
            out.push_str(&pieces.join("*"));
        }
        out
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{}", v)
}

/// Returns (negative-sign, magnitude text, suppress-when-with-vars).
fn format_coefficient(c: Complex64, has_vars: bool) -> (bool, String, bool) {
    if c.im == 0.0 {
        let neg = c.re < 0.0;
        let mag = c.re.abs();
        let one = mag == 1.0;
        (neg, fmt_f64(mag), one && has_vars)
    } else if c.re == 0.0 {
        let neg = c.im < 0.0;
        (neg, format!("{}i", fmt_f64(c.im.abs())), false)
    } else {
        let sign = if c.im < 0.0 { '-' } else { '+' };
        (
            false,
            format!("({}{}{}i)", fmt_f64(c.re), sign, fmt_f64(c.im.abs())),
            false,
        )
    }
}

impl std::ops::Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl std::ops::Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.num_vars, rhs.num_vars, "variable context mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }
}

impl std::ops::Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.num_vars, rhs.num_vars, "variable context mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -*c);
        }
        out
    }
}

impl std::ops::Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.num_vars, rhs.num_vars, "variable context mismatch");
        let mut out = Polynomial::zero(self.num_vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let exps: Vec<u32> = ma
                    .exps
                    .iter()
                    .zip(&mb.exps)
                    .map(|(&a, &b)| a + b)
                    .collect();
                out.add_term(Monomial::new(exps), ca * cb);
            }
        }
        out
    }
}

/// Row-major matrix of polynomials sharing one variable context.
#[derive(Clone, Debug)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Polynomial>) -> Result<Self, PolyError> {
        if entries.len() != rows * cols {
            return Err(PolyError::ShapeMismatch {
                rows,
                cols,
                expected: rows * cols,
                got: entries.len(),
            });
        }
        if let Some(first) = entries.first() {
            if entries.iter().any(|p| p.num_vars != first.num_vars) {
                return Err(PolyError::MixedVariableCount);
            }
        }
        Ok(PolyMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_vars(&self) -> usize {
        self.entries.first().map(|p| p.num_vars).unwrap_or(0)
    }

    pub fn at(&self, row: usize, col: usize) -> &Polynomial {
        &self.entries[row * self.cols + col]
    }

    /// All k-by-k minors in lexicographic order of (row-set, column-set).
    pub fn all_minors(&self, k: usize) -> Result<Vec<Polynomial>, PolyError> {
        if k == 0 || k > self.rows || k > self.cols {
            return Err(PolyError::MinorTooLarge {
                k,
                rows: self.rows,
                cols: self.cols,
            });
        }
        use itertools::Itertools;
        let mut minors = Vec::new();
        for row_set in (0..self.rows).combinations(k) {
            for col_set in (0..self.cols).combinations(k) {
                minors.push(self.submatrix_det(&row_set, &col_set));
            }
        }
        Ok(minors)
    }

    /// Laplace expansion along rows, memoized over remaining-column masks.
    fn submatrix_det(&self, rows: &[usize], cols: &[usize]) -> Polynomial {
        let k = rows.len();
        debug_assert_eq!(k, cols.len());
        let nv = self.num_vars();
        let full_mask: u64 = (1 << k) - 1;
        let mut memo: HashMap<u64, Polynomial> = HashMap::new();
        self.det_rec(rows, cols, 0, full_mask, nv, &mut memo)
    }

    fn det_rec(
        &self,
        rows: &[usize],
        cols: &[usize],
        row_idx: usize,
        col_mask: u64,
        num_vars: usize,
        memo: &mut HashMap<u64, Polynomial>,
    ) -> Polynomial {
        if col_mask == 0 {
            return Polynomial::one(num_vars);
        }
        if let Some(p) = memo.get(&col_mask) {
            return p.clone();
        }
        let mut acc = Polynomial::zero(num_vars);
        let mut sign = 1.0;
        for (j, &col) in cols.iter().enumerate() {
            if col_mask & (1 << j) == 0 {
                continue;
            }
            let entry = self.at(rows[row_idx], col);
            if !entry.is_zero() {
                let sub = self.det_rec(
                    rows,
                    cols,
                    row_idx + 1,
                    col_mask & !(1 << j),
                    num_vars,
                    memo,
                );
                let contrib = &entry.scale(Complex64::new(sign, 0.0)) * &sub;
                acc = &acc + &contrib;
            }
            sign = -sign;
        }
        memo.insert(col_mask, acc.clone());
        acc
    }
}
