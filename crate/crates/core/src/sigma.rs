//! Sigma-basis factor algebra.
//!
//! A [`TensorTerm`] is a scaled tensor product `α · σ₁ ⊗ … ⊗ σₙ` where each
//! factor is drawn from the (overcomplete) sigma basis
//! `{I, σ₊, σ₋, σ₊σ₋, σ₋σ₊}`, optionally extended with Pauli matrices.
//! Factor 1 sits in the most significant Kronecker slot and acts on qubit
//! `q0`. A [`Decomposition`] is a sum of such terms.
//!
//! Every non-unitary factor has a unitary completion (σx for σ±, identity
//! for the projectors); the complement is the difference between the two.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{check_oracle_limit, DenseMatrix, DEFAULT_ORACLE_LIMIT};

/// One single-qubit factor of a tensor term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SigmaFactor {
    Identity,
    /// σ₊ = |0⟩⟨1|
    Plus,
    /// σ₋ = |1⟩⟨0|
    Minus,
    /// σ₊σ₋ = |0⟩⟨0|
    PlusMinus,
    /// σ₋σ₊ = |1⟩⟨1|
    MinusPlus,
    PauliX,
    PauliY,
    PauliZ,
}

impl SigmaFactor {
    /// The five genuine sigma-basis elements.
    pub const SIGMA: [SigmaFactor; 5] = [
        SigmaFactor::Identity,
        SigmaFactor::Plus,
        SigmaFactor::Minus,
        SigmaFactor::PlusMinus,
        SigmaFactor::MinusPlus,
    ];

    pub const ALL: [SigmaFactor; 8] = [
        SigmaFactor::Identity,
        SigmaFactor::Plus,
        SigmaFactor::Minus,
        SigmaFactor::PlusMinus,
        SigmaFactor::MinusPlus,
        SigmaFactor::PauliX,
        SigmaFactor::PauliY,
        SigmaFactor::PauliZ,
    ];

    pub fn is_pauli(self) -> bool {
        matches!(
            self,
            SigmaFactor::Identity | SigmaFactor::PauliX | SigmaFactor::PauliY | SigmaFactor::PauliZ
        )
    }

    pub fn is_sigma(self) -> bool {
        !matches!(self, SigmaFactor::PauliX | SigmaFactor::PauliY | SigmaFactor::PauliZ)
    }

    pub fn token(self) -> &'static str {
        match self {
            SigmaFactor::Identity => "I",
            SigmaFactor::Plus => "P",
            SigmaFactor::Minus => "M",
            SigmaFactor::PlusMinus => "PM",
            SigmaFactor::MinusPlus => "MP",
            SigmaFactor::PauliX => "X",
            SigmaFactor::PauliY => "Y",
            SigmaFactor::PauliZ => "Z",
        }
    }

    /// Diagonal of `f·f†` as `(⟨0|f f†|0⟩ = 1, ⟨1|f f†|1⟩ = 1)`.
    ///
    /// For every factor `f f†` is either the identity or one of the two
    /// computational-basis projectors.
    pub fn range_projector(self) -> (bool, bool) {
        match self {
            SigmaFactor::Plus | SigmaFactor::PlusMinus => (true, false),
            SigmaFactor::Minus | SigmaFactor::MinusPlus => (false, true),
            _ => (true, true),
        }
    }

    /// Diagonal of `f†·f`, the subspace on which the factor is isometric.
    pub fn domain_projector(self) -> (bool, bool) {
        match self {
            SigmaFactor::Minus | SigmaFactor::PlusMinus => (true, false),
            SigmaFactor::Plus | SigmaFactor::MinusPlus => (false, true),
            _ => (true, true),
        }
    }
}

impl fmt::Display for SigmaFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for SigmaFactor {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "I" => SigmaFactor::Identity,
            "P" => SigmaFactor::Plus,
            "M" => SigmaFactor::Minus,
            "PM" => SigmaFactor::PlusMinus,
            "MP" => SigmaFactor::MinusPlus,
            "X" => SigmaFactor::PauliX,
            "Y" => SigmaFactor::PauliY,
            "Z" => SigmaFactor::PauliZ,
            other => return Err(format!("unknown factor token `{other}`")),
        })
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Literal 2×2 realization of a factor.
pub fn factor_matrix(f: SigmaFactor) -> DenseMatrix {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let entries = match f {
        SigmaFactor::Identity => [one, z, z, one],
        SigmaFactor::Plus => [z, one, z, z],
        SigmaFactor::Minus => [z, z, one, z],
        SigmaFactor::PlusMinus => [one, z, z, z],
        SigmaFactor::MinusPlus => [z, z, z, one],
        SigmaFactor::PauliX => [z, one, one, z],
        SigmaFactor::PauliY => [z, c(0.0, -1.0), c(0.0, 1.0), z],
        SigmaFactor::PauliZ => [one, z, z, -one],
    };
    DenseMatrix::from_vec(2, 2, entries.to_vec()).expect("2x2")
}

/// Unitary completion of a single factor: σx for σ±, identity for the
/// projectors, and the factor itself when it is already unitary.
pub fn factor_completion(f: SigmaFactor) -> SigmaFactor {
    match f {
        SigmaFactor::Plus | SigmaFactor::Minus => SigmaFactor::PauliX,
        SigmaFactor::Identity | SigmaFactor::PlusMinus | SigmaFactor::MinusPlus => SigmaFactor::Identity,
        p => p,
    }
}

/// Unitary complement `completion(f) - f` as a matrix.
pub fn factor_complement(f: SigmaFactor) -> DenseMatrix {
    &factor_matrix(factor_completion(f)) - &factor_matrix(f)
}

/// `α · σ₁ ⊗ … ⊗ σₙ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorTerm {
    pub coefficient: Complex64,
    factors: Vec<SigmaFactor>,
}

impl TensorTerm {
    pub fn new(coefficient: Complex64, factors: Vec<SigmaFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSize("a tensor term needs at least one factor".into()));
        }
        Ok(Self { coefficient, factors })
    }

    /// Real-coefficient shorthand.
    pub fn real(coefficient: f64, factors: Vec<SigmaFactor>) -> Result<Self> {
        Self::new(c(coefficient, 0.0), factors)
    }

    /// Unit-coefficient term; panics on an empty factor list.
    pub fn unit(factors: &[SigmaFactor]) -> Self {
        Self::real(1.0, factors.to_vec()).expect("non-empty factor list")
    }

    pub fn factors(&self) -> &[SigmaFactor] {
        &self.factors
    }

    pub fn num_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn is_sigma_only(&self) -> bool {
        self.factors.iter().all(|f| f.is_sigma())
    }

    /// `A ⊗ B` of two terms, coefficients multiplied.
    pub fn tensor(&self, other: &TensorTerm) -> TensorTerm {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        TensorTerm {
            coefficient: self.coefficient * other.coefficient,
            factors,
        }
    }

    pub fn scaled(&self, s: Complex64) -> TensorTerm {
        TensorTerm {
            coefficient: self.coefficient * s,
            factors: self.factors.clone(),
        }
    }
}

impl fmt::Display for TensorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} :", self.coefficient.re, self.coefficient.im)?;
        for factor in &self.factors {
            write!(f, " {factor}")?;
        }
        Ok(())
    }
}

impl FromStr for TensorTerm {
    type Err = String;

    fn from_str(line: &str) -> std::result::Result<Self, String> {
        let (coeff, factors) = line
            .split_once(':')
            .ok_or_else(|| "expected `re im : factors`".to_string())?;
        let parts: Vec<&str> = coeff.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(format!("expected two coefficient fields, found {}", parts.len()));
        }
        let re: f64 = parts[0].parse().map_err(|e| format!("real part: {e}"))?;
        let im: f64 = parts[1].parse().map_err(|e| format!("imaginary part: {e}"))?;
        let factors = factors
            .split_whitespace()
            .map(SigmaFactor::from_str)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        TensorTerm::new(c(re, im), factors).map_err(|e| e.to_string())
    }
}

/// `A = Σ α_l A_l` over a fixed register width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    num_qubits: usize,
    terms: Vec<TensorTerm>,
}

impl Decomposition {
    pub fn new(num_qubits: usize, terms: Vec<TensorTerm>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidSize("a decomposition needs at least one qubit".into()));
        }
        for t in &terms {
            if t.num_qubits() != num_qubits {
                return Err(Error::QubitMismatch {
                    expected: num_qubits,
                    found: t.num_qubits(),
                });
            }
        }
        Ok(Self { num_qubits, terms })
    }

    pub fn empty(num_qubits: usize) -> Result<Self> {
        Self::new(num_qubits, Vec::new())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[TensorTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: TensorTerm) -> Result<()> {
        if term.num_qubits() != self.num_qubits {
            return Err(Error::QubitMismatch {
                expected: self.num_qubits,
                found: term.num_qubits(),
            });
        }
        self.terms.push(term);
        Ok(())
    }

    /// Concatenates the terms of `other`.
    pub fn extend(&mut self, other: Decomposition) -> Result<()> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::QubitMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        self.terms.extend(other.terms);
        Ok(())
    }

    pub fn scaled(&self, s: Complex64) -> Decomposition {
        Decomposition {
            num_qubits: self.num_qubits,
            terms: self.terms.iter().map(|t| t.scaled(s)).collect(),
        }
    }

    /// Prefixes every term with the same factor list (`prefix ⊗ A_l`).
    pub fn prefixed(&self, prefix: &[SigmaFactor]) -> Decomposition {
        Decomposition {
            num_qubits: self.num_qubits + prefix.len(),
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let mut factors = prefix.to_vec();
                    factors.extend_from_slice(t.factors());
                    TensorTerm {
                        coefficient: t.coefficient,
                        factors,
                    }
                })
                .collect(),
        }
    }

    /// Sums coefficients of terms with identical factor lists and drops
    /// terms whose merged coefficient has modulus `<= zero_tol`.
    ///
    /// First-occurrence order is preserved.
    pub fn merged(&self, zero_tol: f64) -> Decomposition {
        let mut index: BTreeMap<&[SigmaFactor], usize> = BTreeMap::new();
        let mut out: Vec<TensorTerm> = Vec::new();
        for t in &self.terms {
            match index.get(t.factors()) {
                Some(&i) => out[i].coefficient += t.coefficient,
                None => {
                    index.insert(t.factors(), out.len());
                    out.push(t.clone());
                }
            }
        }
        out.retain(|t| t.coefficient.norm() > zero_tol);
        Decomposition {
            num_qubits: self.num_qubits,
            terms: out,
        }
    }

    /// Serializes to the line-oriented term-list format.
    pub fn to_text(&self) -> String {
        let mut s = format!("# qubits {}\n", self.num_qubits);
        for t in &self.terms {
            s.push_str(&t.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses the term-list format. Blank lines and `#` comments are
    /// ignored except for an optional `# qubits <n>` header, which is
    /// required only when there are no terms.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut declared: Option<usize> = None;
        let mut terms = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(n) = comment.trim().strip_prefix("qubits") {
                    let n = n.trim().parse().map_err(|e| Error::Parse {
                        line: i + 1,
                        msg: format!("bad qubit header: {e}"),
                    })?;
                    declared = Some(n);
                }
                continue;
            }
            let term: TensorTerm = line.parse().map_err(|msg| Error::Parse { line: i + 1, msg })?;
            terms.push(term);
        }
        let n = match (declared, terms.first()) {
            (Some(n), _) => n,
            (None, Some(t)) => t.num_qubits(),
            (None, None) => {
                return Err(Error::Parse {
                    line: 0,
                    msg: "empty term list without a `# qubits` header".into(),
                })
            }
        };
        Decomposition::new(n, terms)
    }
}

/// Kronecker product of the factor realizations, optionally scaled by the
/// coefficient. Subject to [`DEFAULT_ORACLE_LIMIT`].
pub fn term_matrix(t: &TensorTerm, include_coefficient: bool) -> Result<DenseMatrix> {
    term_matrix_with_limit(t, include_coefficient, DEFAULT_ORACLE_LIMIT)
}

pub fn term_matrix_with_limit(t: &TensorTerm, include_coefficient: bool, limit: usize) -> Result<DenseMatrix> {
    check_oracle_limit(t.num_qubits(), limit)?;
    let m = kron_factors(t.factors().iter().copied());
    Ok(if include_coefficient { m.scale(t.coefficient) } else { m })
}

fn kron_factors(factors: impl Iterator<Item = SigmaFactor>) -> DenseMatrix {
    factors.fold(DenseMatrix::identity(1), |acc, f| acc.kron(&factor_matrix(f)))
}

/// Unit-coefficient term whose factors are the factor-wise completions.
pub fn term_completion(t: &TensorTerm) -> TensorTerm {
    TensorTerm {
        coefficient: c(1.0, 0.0),
        factors: t.factors().iter().map(|&f| factor_completion(f)).collect(),
    }
}

/// `Ā_l − A_l` with the coefficient ignored.
pub fn term_complement_matrix(t: &TensorTerm) -> Result<DenseMatrix> {
    check_oracle_limit(t.num_qubits(), DEFAULT_ORACLE_LIMIT)?;
    let completion = term_matrix(&term_completion(t), false)?;
    Ok(&completion - &term_matrix(t, false)?)
}

/// `Σ α_l A_l` as a dense matrix.
pub fn decomposition_matrix(d: &Decomposition) -> Result<DenseMatrix> {
    decomposition_matrix_with_limit(d, DEFAULT_ORACLE_LIMIT)
}

pub fn decomposition_matrix_with_limit(d: &Decomposition, limit: usize) -> Result<DenseMatrix> {
    check_oracle_limit(d.num_qubits(), limit)?;
    let dim = 1usize << d.num_qubits();
    let mut out = DenseMatrix::zeros(dim, dim);
    for t in d.terms() {
        if t.num_qubits() != d.num_qubits() {
            return Err(Error::QubitMismatch {
                expected: d.num_qubits(),
                found: t.num_qubits(),
            });
        }
        // Sigma and Pauli factors have at most one nonzero per row, so the
        // product is scattered directly instead of through dense krons.
        for row in 0..dim {
            if let Some((col, v)) = term_row_entry(t.factors(), row) {
                out[(row, col)] += t.coefficient * v;
            }
        }
    }
    Ok(out)
}

/// Column and value of the single possible nonzero in `row` of a term.
fn term_row_entry(factors: &[SigmaFactor], row: usize) -> Option<(usize, Complex64)> {
    let n = factors.len();
    let mut col = 0usize;
    let mut value = c(1.0, 0.0);
    for (p, &f) in factors.iter().enumerate() {
        let bit = (row >> (n - 1 - p)) & 1;
        let (cbit, v) = match (f, bit) {
            (SigmaFactor::Identity, b) => (b, c(1.0, 0.0)),
            (SigmaFactor::Plus, 0) => (1, c(1.0, 0.0)),
            (SigmaFactor::Minus, 1) => (0, c(1.0, 0.0)),
            (SigmaFactor::PlusMinus, 0) => (0, c(1.0, 0.0)),
            (SigmaFactor::MinusPlus, 1) => (1, c(1.0, 0.0)),
            (SigmaFactor::PauliX, b) => (1 - b, c(1.0, 0.0)),
            (SigmaFactor::PauliY, 0) => (1, c(0.0, -1.0)),
            (SigmaFactor::PauliY, _) => (0, c(0.0, 1.0)),
            (SigmaFactor::PauliZ, 0) => (0, c(1.0, 0.0)),
            (SigmaFactor::PauliZ, _) => (1, c(-1.0, 0.0)),
            _ => return None,
        };
        col = (col << 1) | cbit;
        value *= v;
    }
    Some((col, value))
}
