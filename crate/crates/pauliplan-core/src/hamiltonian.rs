//! Hamiltonians as weighted sums of Pauli strings, plus the line-oriented
//! text format used for ingest and the canonical serializer.
//!
//! Format: one `<coefficient> <axis string>` pair per line, `#` starts a
//! comment, all axis strings the same length. Duplicate operators merge by
//! coefficient addition; the all-identity coefficient is split off into
//! `identity_offset` because it is an exact, zero-variance contribution.

use crate::pauli::{Axis, PauliString};
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}: malformed coefficient '{text}'")]
    MalformedCoefficient { line: usize, text: String },
    #[error("line {line}: axis character '{ch}' is not one of I, X, Y, Z")]
    InvalidAxis { line: usize, ch: char },
    #[error("line {line}: expected a coefficient and an axis string")]
    MissingField { line: usize },
    #[error("line {line}: axis string length {got} differs from {expected} seen earlier")]
    InconsistentLength {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("input contains no terms")]
    Empty,
}

/// A Pauli Hamiltonian: real coefficients on non-identity Pauli strings,
/// with the identity coefficient tracked separately.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
    identity_offset: f64,
}

impl Hamiltonian {
    /// Build from raw (coefficient, operator) pairs. Duplicates merge in
    /// first-appearance order, exact-zero coefficients drop, identity
    /// terms accumulate into the offset.
    pub fn from_terms(
        n_qubits: usize,
        raw: impl IntoIterator<Item = (f64, PauliString)>,
    ) -> Self {
        let mut order: Vec<PauliString> = Vec::new();
        let mut coeff: HashMap<PauliString, f64> = HashMap::new();
        let mut identity_offset = 0.0;
        for (a, op) in raw {
            assert_eq!(op.n_qubits(), n_qubits, "term width mismatch");
            if op.is_identity() {
                identity_offset += a;
                continue;
            }
            match coeff.get_mut(&op) {
                Some(c) => *c += a,
                None => {
                    coeff.insert(op.clone(), a);
                    order.push(op);
                }
            }
        }
        let terms = order
            .into_iter()
            .filter_map(|op| {
                let a = coeff[&op];
                (a != 0.0).then_some((a, op))
            })
            .collect();
        Hamiltonian {
            n_qubits,
            terms,
            identity_offset,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Non-identity terms in first-appearance order.
    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, term: usize) -> f64 {
        self.terms[term].0
    }

    pub fn operator(&self, term: usize) -> &PauliString {
        &self.terms[term].1
    }

    pub fn identity_offset(&self) -> f64 {
        self.identity_offset
    }

    /// Σ_ℓ |a_ℓ| over non-identity terms.
    pub fn abs_coeff_sum(&self) -> f64 {
        self.terms.iter().map(|(a, _)| a.abs()).sum()
    }

    /// Canonical text form: one term per line with `%.17g` coefficients,
    /// identity line last.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (a, op) in &self.terms {
            let _ = writeln!(out, "{} {}", format_g17(*a), op.to_axis_string());
        }
        let identity: String = std::iter::repeat_n('I', self.n_qubits).collect();
        let _ = writeln!(out, "{} {}", format_g17(self.identity_offset), identity);
        out
    }
}

/// Parse the line-oriented Hamiltonian format.
pub fn parse_hamiltonian(text: &str) -> Result<Hamiltonian, ParseError> {
    let mut raw: Vec<(f64, PauliString)> = Vec::new();
    let mut n_qubits: Option<usize> = None;
    for (idx, full_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match full_line.find('#') {
            Some(pos) => &full_line[..pos],
            None => full_line,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let coeff_text = parts.next().ok_or(ParseError::MissingField { line })?;
        let axis_text = parts.next().ok_or(ParseError::MissingField { line })?;
        if parts.next().is_some() {
            return Err(ParseError::MissingField { line });
        }
        let a: f64 = coeff_text
            .parse()
            .map_err(|_| ParseError::MalformedCoefficient {
                line,
                text: coeff_text.to_string(),
            })?;
        let mut axes = Vec::with_capacity(axis_text.len());
        for ch in axis_text.chars() {
            axes.push(Axis::from_char(ch).ok_or(ParseError::InvalidAxis { line, ch })?);
        }
        match n_qubits {
            None => n_qubits = Some(axes.len()),
            Some(n) if n != axes.len() => {
                return Err(ParseError::InconsistentLength {
                    line,
                    expected: n,
                    got: axes.len(),
                })
            }
            _ => {}
        }
        raw.push((a, PauliString::from_axes(&axes)));
    }
    let n_qubits = n_qubits.ok_or(ParseError::Empty)?;
    Ok(Hamiltonian::from_terms(n_qubits, raw))
}

/// The n-qubit imbalanced two-group Hamiltonian: one all-Z term with
/// coefficient 1 plus every {I,X}-string at coefficient 2^(-2n), the
/// all-identity piece landing in the offset. Valid for 2 <= n <= 10.
pub fn toy_model(n: usize) -> Hamiltonian {
    assert!((2..=10).contains(&n), "toy model defined for 2 <= n <= 10");
    let small = (2.0f64).powi(-2 * (n as i32));
    let mut raw = Vec::with_capacity(1 << n);
    raw.push((1.0, PauliString::from_axes(&vec![Axis::Z; n])));
    for mask in 0..(1u32 << n) {
        let axes: Vec<Axis> = (0..n)
            .map(|i| if mask >> i & 1 == 1 { Axis::X } else { Axis::I })
            .collect();
        raw.push((small, PauliString::from_axes(&axes)));
    }
    Hamiltonian::from_terms(n, raw)
}

/// printf-style `%.17g` rendering: 17 significant digits, fixed or
/// scientific notation chosen by exponent, trailing zeros trimmed.
pub fn format_g17(x: f64) -> String {
    const P: i32 = 17;
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    // Round to P significant digits via the exact e-style formatter, then
    // pick the presentation the way %g does.
    let e_form = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp_str) = e_form.split_once('e').expect("e-format");
    let exp: i32 = exp_str.parse().expect("exponent");
    if !(-4..P).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let (sign, mag) = if exp < 0 { ('-', -exp) } else { ('+', exp) };
        format!("{mantissa}e{sign}{mag:02}")
    } else {
        let prec = (P - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.prec$}"))
    }
}

fn trim_fraction(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}
