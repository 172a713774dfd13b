//! Bit-packed Pauli strings and the qubit-wise predicates the grouping
//! stage is built on.
//!
//! A Pauli string is stored as two bitmasks over qubits: `x_mask` has bit
//! `i` set when the axis at qubit `i` is X or Y, `z_mask` when it is Z or
//! Y. Both predicates (`qwc`, `covered_by`) are word-wise mask
//! arithmetic, O(n/64) per pair.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use thiserror::Error;

/// Single-qubit Pauli axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    I,
    X,
    Y,
    Z,
}

impl Axis {
    /// (x bit, z bit) encoding: I=(0,0), X=(1,0), Z=(0,1), Y=(1,1).
    fn bits(self) -> (bool, bool) {
        match self {
            Axis::I => (false, false),
            Axis::X => (true, false),
            Axis::Y => (true, true),
            Axis::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Axis::I,
            (true, false) => Axis::X,
            (true, true) => Axis::Y,
            (false, true) => Axis::Z,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Axis::I => 'I',
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Axis::I),
            'X' => Some(Axis::X),
            'Y' => Some(Axis::Y),
            'Z' => Some(Axis::Z),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PauliError {
    #[error("axis character '{0}' is not one of I, X, Y, Z")]
    InvalidAxis(char),
    #[error("empty axis string")]
    Empty,
    #[error("mismatched qubit counts: {0} vs {1}")]
    QubitMismatch(usize, usize),
}

const WORD_BITS: usize = 64;

fn word_count(n_qubits: usize) -> usize {
    n_qubits.div_ceil(WORD_BITS)
}

/// An n-qubit tensor product of I/X/Y/Z, bit-packed as (x_mask, z_mask).
///
/// Immutable after construction; cheap to clone and safe to share.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x_mask: Vec<u64>,
    z_mask: Vec<u64>,
}

impl PauliString {
    /// All-identity string on `n_qubits` qubits.
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits > 0, "PauliString needs at least one qubit");
        let words = word_count(n_qubits);
        PauliString {
            n_qubits,
            x_mask: vec![0; words],
            z_mask: vec![0; words],
        }
    }

    /// Build from per-qubit axes; qubit `i` is `axes[i]`.
    pub fn from_axes(axes: &[Axis]) -> Self {
        let mut p = PauliString::identity(axes.len());
        for (i, &a) in axes.iter().enumerate() {
            p.set_axis(i, a);
        }
        p
    }

    /// Parse an axis string such as `"XZI"`; character `i` is qubit `i`.
    pub fn from_axis_str(s: &str) -> Result<Self, PauliError> {
        if s.is_empty() {
            return Err(PauliError::Empty);
        }
        let mut axes = Vec::with_capacity(s.len());
        for c in s.chars() {
            axes.push(Axis::from_char(c).ok_or(PauliError::InvalidAxis(c))?);
        }
        Ok(PauliString::from_axes(&axes))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn axis(&self, qubit: usize) -> Axis {
        debug_assert!(qubit < self.n_qubits);
        let (w, b) = (qubit / WORD_BITS, qubit % WORD_BITS);
        Axis::from_bits(self.x_mask[w] >> b & 1 == 1, self.z_mask[w] >> b & 1 == 1)
    }

    fn set_axis(&mut self, qubit: usize, axis: Axis) {
        debug_assert!(qubit < self.n_qubits);
        let (w, b) = (qubit / WORD_BITS, qubit % WORD_BITS);
        let (x, z) = axis.bits();
        if x {
            self.x_mask[w] |= 1 << b;
        } else {
            self.x_mask[w] &= !(1 << b);
        }
        if z {
            self.z_mask[w] |= 1 << b;
        } else {
            self.z_mask[w] &= !(1 << b);
        }
    }

    /// Copy with the axis at one qubit replaced.
    pub fn with_axis(&self, qubit: usize, axis: Axis) -> Self {
        let mut p = self.clone();
        p.set_axis(qubit, axis);
        p
    }

    /// Qubits with a non-identity axis, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, (&x, &z)) in self.x_mask.iter().zip(&self.z_mask).enumerate() {
            let mut bits = x | z;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.push(w * WORD_BITS + b);
                bits &= bits - 1;
            }
        }
        out
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> usize {
        self.x_mask
            .iter()
            .zip(&self.z_mask)
            .map(|(&x, &z)| (x | z).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask.iter().zip(&self.z_mask).all(|(&x, &z)| x | z == 0)
    }

    /// Support as a single 64-bit mask. Panics beyond 64 qubits; the
    /// simulation and estimation paths are capped far below that.
    pub fn support_mask_u64(&self) -> u64 {
        assert!(self.n_qubits <= 64, "support_mask_u64 requires n_qubits <= 64");
        self.x_mask[0] | self.z_mask[0]
    }

    pub fn axes(&self) -> Vec<Axis> {
        (0..self.n_qubits).map(|i| self.axis(i)).collect()
    }

    pub fn to_axis_string(&self) -> String {
        (0..self.n_qubits).map(|i| self.axis(i).to_char()).collect()
    }

    fn check_len(&self, other: &PauliString) -> Result<(), PauliError> {
        if self.n_qubits != other.n_qubits {
            return Err(PauliError::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(())
    }

    /// Qubit-wise commutation: at every site the axes are equal or at
    /// least one is identity.
    pub fn qwc(&self, other: &PauliString) -> Result<bool, PauliError> {
        self.check_len(other)?;
        for w in 0..self.x_mask.len() {
            let sup_a = self.x_mask[w] | self.z_mask[w];
            let sup_b = other.x_mask[w] | other.z_mask[w];
            let differ = (self.x_mask[w] ^ other.x_mask[w]) | (self.z_mask[w] ^ other.z_mask[w]);
            if sup_a & sup_b & differ != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True iff a measurement in `basis` yields a valid sample for `self`:
    /// every qubit in support(self) carries the same axis in `basis`.
    pub fn covered_by(&self, basis: &PauliString) -> Result<bool, PauliError> {
        self.check_len(basis)?;
        for w in 0..self.x_mask.len() {
            let sup = self.x_mask[w] | self.z_mask[w];
            let differ = (self.x_mask[w] ^ basis.x_mask[w]) | (self.z_mask[w] ^ basis.z_mask[w]);
            if sup & differ != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_axis_string())
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_axis_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        PauliString::from_axis_str(&s).map_err(D::Error::custom)
    }
}
