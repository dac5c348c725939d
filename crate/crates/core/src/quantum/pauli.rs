//! Pauli strings and real-weighted sums of them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

use super::{qubit_mask, C64, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// True for I and Z, the letters diagonal in the computational basis.
    pub fn is_diagonal(self) -> bool {
        matches!(self, Pauli::I | Pauli::Z)
    }

    /// True for X and Y, the letters that flip a computational basis state.
    pub fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn matrix(self) -> [[C64; 2]; 2] {
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -i], [i, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }

    /// Single-letter product `self * rhs = phase * letter`.
    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, rhs: Pauli) -> (C64, Pauli) {
        use Pauli::*;
        let i = Complex64::new(0.0, 1.0);
        match (self, rhs) {
            (I, p) | (p, I) => (ONE, p),
            (a, b) if a == b => (ONE, I),
            (X, Y) => (i, Z),
            (Y, Z) => (i, X),
            (Z, X) => (i, Y),
            (Y, X) => (-i, Z),
            (Z, Y) => (-i, X),
            (X, Z) => (-i, Y),
            _ => unreachable!(),
        }
    }
}

/// A tensor product of single-qubit Paulis; letter 0 acts on qubit 0 (the
/// most significant bit of a basis index).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self(letters)
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self(vec![Pauli::I; n_qubits])
    }

    /// `letter` on `qubit`, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, letter: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n_qubits];
        letters[qubit] = letter;
        Self(letters)
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    pub fn n_qubits(&self) -> usize {
        self.0.len()
    }

    /// Number of non-identity letters (k).
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|p| **p != Pauli::I).count()
    }

    /// Number of X or Y letters (k').
    pub fn flip_weight(&self) -> usize {
        self.0.iter().filter(|p| p.flips()).count()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|p| *p == Pauli::I)
    }

    pub fn is_diagonal(&self) -> bool {
        self.0.iter().all(|p| p.is_diagonal())
    }

    /// Bits flipped by the string.
    pub fn x_mask(&self) -> usize {
        let n = self.n_qubits();
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| p.flips())
            .fold(0, |m, (q, _)| m | qubit_mask(n, q))
    }

    /// Bits that pick up a sign (Z and Y letters).
    pub fn z_mask(&self) -> usize {
        let n = self.n_qubits();
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| matches!(p, Pauli::Y | Pauli::Z))
            .fold(0, |m, (q, _)| m | qubit_mask(n, q))
    }

    fn y_phase(&self) -> C64 {
        match self.0.iter().filter(|p| **p == Pauli::Y).count() % 4 {
            0 => ONE,
            1 => Complex64::new(0.0, 1.0),
            2 => -ONE,
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Compiled form for repeated application to basis indices.
    pub fn action(&self) -> PauliAction {
        PauliAction {
            x_mask: self.x_mask(),
            z_mask: self.z_mask(),
            y_phase: self.y_phase(),
        }
    }

    /// Product of two strings on the same qubits: `self * rhs = phase * string`.
    pub fn mul(&self, rhs: &PauliString) -> (C64, PauliString) {
        debug_assert_eq!(self.n_qubits(), rhs.n_qubits());
        let mut phase = ONE;
        let letters = self
            .0
            .iter()
            .zip(&rhs.0)
            .map(|(a, b)| {
                let (ph, p) = a.mul(*b);
                phase *= ph;
                p
            })
            .collect();
        (phase, PauliString(letters))
    }

    /// Concatenation `self ⊗ rhs`.
    pub fn tensor(&self, rhs: &PauliString) -> PauliString {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&rhs.0);
        PauliString(letters)
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let d = 1usize << self.n_qubits();
        let act = self.action();
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            let (i, ph) = act.apply(j);
            m[(i, j)] = ph;
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| contract(format!("bad Pauli letter {c:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

/// `P|j> = phase(j) |j ^ x_mask>` with `phase(j) = i^{#Y} (-1)^{popcount(j & z_mask)}`.
#[derive(Debug, Clone, Copy)]
pub struct PauliAction {
    pub x_mask: usize,
    pub z_mask: usize,
    y_phase: C64,
}

impl PauliAction {
    #[inline]
    pub fn phase(&self, j: usize) -> C64 {
        if (j & self.z_mask).count_ones() % 2 == 1 {
            -self.y_phase
        } else {
            self.y_phase
        }
    }

    #[inline]
    pub fn apply(&self, j: usize) -> (usize, C64) {
        (j ^ self.x_mask, self.phase(j))
    }

    /// Tr(P A) in O(d).
    pub fn trace_product(&self, a: &DMatrix<C64>) -> C64 {
        let d = a.nrows();
        (0..d).map(|k| self.phase(k) * a[(k, k ^ self.x_mask)]).sum()
    }

    /// P A, computed as a signed row permutation in O(d^2).
    pub fn left_multiply(&self, a: &DMatrix<C64>) -> DMatrix<C64> {
        let d = a.nrows();
        DMatrix::from_fn(d, d, |i, j| {
            let k = i ^ self.x_mask;
            self.phase(k) * a[(k, j)]
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: f64,
    pub string: PauliString,
}

/// A Hermitian operator written as a real-weighted sum of Pauli strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliObservable {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl PauliObservable {
    pub fn new(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.string.n_qubits() != n_qubits) {
            return Err(contract(format!(
                "term {} has {} letters, expected {n_qubits}",
                t.string,
                t.string.n_qubits()
            )));
        }
        if terms.iter().any(|t| !t.coeff.is_finite()) {
            return Err(contract("non-finite Pauli coefficient"));
        }
        Ok(Self { n_qubits, terms })
    }

    pub fn from_string(string: PauliString) -> Self {
        Self {
            n_qubits: string.n_qubits(),
            terms: vec![PauliTerm { coeff: 1.0, string }],
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::from_string(PauliString::identity(n_qubits))
    }

    /// Parses `"0.5*ZZI + -1*XII"`-style sums; a bare string means weight 1.
    pub fn parse(s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for raw in s.split('+') {
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            let (coeff, letters) = match raw.split_once('*') {
                Some((c, l)) => (
                    c.trim()
                        .parse::<f64>()
                        .map_err(|e| contract(format!("bad coefficient {c:?}: {e}")))?,
                    l,
                ),
                None => (1.0, raw),
            };
            terms.push(PauliTerm {
                coeff,
                string: letters.parse()?,
            });
        }
        let n = terms
            .first()
            .map(|t| t.string.n_qubits())
            .ok_or_else(|| contract("empty observable"))?;
        Self::new(n, terms)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|t| t.string.is_diagonal())
    }

    /// Multiplies every coefficient by `f(term)`.
    pub fn map_coefficients(&self, f: impl Fn(&PauliTerm) -> f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm {
                    coeff: t.coeff * f(t),
                    string: t.string.clone(),
                })
                .collect(),
        }
    }

    /// Diagonal entries in the computational basis; `None` if any term flips bits.
    pub fn diagonal(&self) -> Option<Vec<f64>> {
        if !self.is_diagonal() {
            return None;
        }
        let d = 1usize << self.n_qubits;
        let mut diag = vec![0.0; d];
        for t in &self.terms {
            let z = t.string.z_mask();
            for (b, v) in diag.iter_mut().enumerate() {
                *v += if (b & z).count_ones() % 2 == 1 { -t.coeff } else { t.coeff };
            }
        }
        Some(diag)
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let d = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(d, d);
        for t in &self.terms {
            let act = t.string.action();
            for j in 0..d {
                let (i, ph) = act.apply(j);
                m[(i, j)] += ph * t.coeff;
            }
        }
        m
    }

    /// Tr(O A) for an arbitrary square matrix of matching dimension.
    pub fn trace_product(&self, a: &DMatrix<C64>) -> C64 {
        self.terms
            .iter()
            .map(|t| t.string.action().trace_product(a) * t.coeff)
            .sum()
    }

    /// O², re-expanded in the Pauli basis with like strings merged.
    pub fn square(&self) -> Self {
        let mut acc: BTreeMap<PauliString, C64> = BTreeMap::new();
        for a in &self.terms {
            for b in &self.terms {
                let (ph, s) = a.string.mul(&b.string);
                *acc.entry(s).or_insert(ZERO) += ph * (a.coeff * b.coeff);
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(string, c)| {
                debug_assert!(c.im.abs() < 1e-9, "O² picked up an imaginary part");
                PauliTerm { coeff: c.re, string }
            })
            .collect();
        Self {
            n_qubits: self.n_qubits,
            terms,
        }
    }
}

impl fmt::Display for PauliObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*{}", t.coeff, t.string)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_matches_kronecker_matrices() {
        for s in ["XYZ", "IZY", "YYI", "ZIX"] {
            let p: PauliString = s.parse().unwrap();
            let mut dense = DMatrix::from_element(1, 1, ONE);
            for l in p.letters() {
                let m = l.matrix();
                let m = DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]]);
                dense = dense.kronecker(&m);
            }
            assert!((dense - p.to_matrix()).camax() < 1e-15, "{s}");
        }
    }

    #[test]
    fn weights() {
        let p: PauliString = "XZIY".parse().unwrap();
        assert_eq!(p.weight(), 3);
        assert_eq!(p.flip_weight(), 2);
    }

    #[test]
    fn square_of_single_string_is_identity() {
        let o = PauliObservable::parse("2*XZY").unwrap();
        let sq = o.square();
        assert_eq!(sq.terms().len(), 1);
        assert!(sq.terms()[0].string.is_identity());
        assert_eq!(sq.terms()[0].coeff, 4.0);
    }

    #[test]
    fn square_matches_dense_product() {
        let o = PauliObservable::parse("0.3*XZ + -1.2*YY + 0.7*ZI + 0.1*IX").unwrap();
        let m = o.to_matrix();
        assert!((&m * &m - o.square().to_matrix()).camax() < 1e-12);
    }

    #[test]
    fn trace_product_and_left_multiply() {
        let d = 8;
        let a = DMatrix::from_fn(d, d, |i, j| Complex64::new(i as f64 + 0.5, j as f64 - 1.0));
        let p: PauliString = "YXZ".parse().unwrap();
        let pm = p.to_matrix();
        let act = p.action();
        assert!((act.trace_product(&a) - (&pm * &a).trace()).norm() < 1e-12);
        assert!((act.left_multiply(&a) - &pm * &a).camax() < 1e-12);
    }

    #[test]
    fn diagonal_of_zz() {
        let o = PauliObservable::parse("ZZ").unwrap();
        assert_eq!(o.diagonal().unwrap(), vec![1.0, -1.0, -1.0, 1.0]);
        assert!(PauliObservable::parse("XZ").unwrap().diagonal().is_none());
    }

    #[test]
    fn mismatched_term_lengths_rejected() {
        assert!(PauliObservable::parse("XZ + Z").is_err());
        assert!("XQ".parse::<PauliString>().is_err());
    }
}
