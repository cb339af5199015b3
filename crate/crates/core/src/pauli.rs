//! Pauli strings and computational-basis labels on an N-qubit register.
//!
//! Sites are numbered from 1. Site 1 is the most significant bit of a basis
//! index, so `|0011>` on four qubits is index 3. The spin convention is
//! `sigma^z |0> = +|0>`, `sigma^z |1> = -|1>`.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    pub fn from_char(c: char) -> Option<Axis> {
        match c.to_ascii_lowercase() {
            'x' => Some(Axis::X),
            'y' => Some(Axis::Y),
            'z' => Some(Axis::Z),
            _ => None,
        }
    }

    /// Levi-Civita symbol.
    pub fn epsilon(a: Axis, b: Axis, c: Axis) -> f64 {
        use Axis::*;
        match (a, b, c) {
            (X, Y, Z) | (Y, Z, X) | (Z, X, Y) => 1.0,
            (X, Z, Y) | (Z, Y, X) | (Y, X, Z) => -1.0,
            _ => 0.0,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        match (chars.next().and_then(Axis::from_char), chars.next()) {
            (Some(axis), None) => Ok(axis),
            _ => Err(Error::Parse {
                what: "axis",
                input: s.to_string(),
            }),
        }
    }
}

/// Product of single-site Pauli operators with a complex prefactor.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    n_qubits: usize,
    factors: Vec<(usize, Axis)>,
    coefficient: C64,
}

impl PauliString {
    pub fn new(n_qubits: usize, factors: impl IntoIterator<Item = (usize, Axis)>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Domain("a register needs at least one qubit".into()));
        }
        let mut factors: Vec<(usize, Axis)> = factors.into_iter().collect();
        factors.sort_by_key(|&(site, _)| site);
        for &(site, _) in &factors {
            if site == 0 || site > n_qubits {
                return Err(Error::Index(format!("site {site} outside 1..={n_qubits}")));
            }
        }
        if factors.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Index("repeated site in Pauli string".into()));
        }
        Ok(PauliString {
            n_qubits,
            factors,
            coefficient: c64(1.0, 0.0),
        })
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, [])
    }

    pub fn single(n_qubits: usize, site: usize, axis: Axis) -> Result<Self> {
        Self::new(n_qubits, [(site, axis)])
    }

    pub fn with_coefficient(mut self, coefficient: C64) -> Self {
        self.coefficient = coefficient;
        self
    }

    /// Parses the drive-label grammar: concatenated `[xyz]<site>` tokens,
    /// e.g. `z2z3` for `sigma^z_2 sigma^z_3`. `I` is the identity.
    pub fn parse(label: &str, n_qubits: usize) -> Result<Self> {
        let bad = || Error::Parse {
            what: "Pauli label",
            input: label.to_string(),
        };
        let trimmed = label.trim();
        if trimmed.eq_ignore_ascii_case("i") {
            return Self::identity(n_qubits);
        }
        if trimmed.is_empty() {
            return Err(bad());
        }
        let mut factors = Vec::new();
        let mut chars = trimmed.chars().peekable();
        while let Some(c) = chars.next() {
            let axis = Axis::from_char(c).ok_or_else(bad)?;
            let mut digits = String::new();
            while let Some(d) = chars.peek().copied().filter(char::is_ascii_digit) {
                digits.push(d);
                chars.next();
            }
            let site: usize = digits.parse().map_err(|_| bad())?;
            factors.push((site, axis));
        }
        Self::new(n_qubits, factors)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn factors(&self) -> &[(usize, Axis)] {
        &self.factors
    }

    pub fn coefficient(&self) -> C64 {
        self.coefficient
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    /// Compact label, `I` for the identity. The coefficient is not printed.
    pub fn label(&self) -> String {
        if self.factors.is_empty() {
            return "I".to_string();
        }
        self.factors
            .iter()
            .map(|(site, axis)| format!("{axis}{site}"))
            .collect()
    }

    fn bit_of(&self, site: usize) -> usize {
        self.n_qubits - site
    }

    /// Image of basis state `index`: `P |index> = amplitude |image>`.
    pub fn apply_basis(&self, index: usize) -> (usize, C64) {
        let mut image = index;
        let mut amp = self.coefficient;
        for &(site, axis) in &self.factors {
            let bit = self.bit_of(site);
            let is_one = (index >> bit) & 1 == 1;
            match axis {
                Axis::X => image ^= 1 << bit,
                Axis::Y => {
                    image ^= 1 << bit;
                    // Y|0> = i|1>, Y|1> = -i|0>
                    amp *= if is_one { c64(0.0, -1.0) } else { c64(0.0, 1.0) };
                }
                Axis::Z => {
                    if is_one {
                        amp = -amp;
                    }
                }
            }
        }
        (image, amp)
    }

    /// Adds `scale * P` to `target` without forming the dense product.
    pub fn add_to(&self, target: &mut CMatrix, scale: C64) {
        assert_eq!(target.nrows(), self.dim(), "Pauli string dimension mismatch");
        for col in 0..self.dim() {
            let (row, amp) = self.apply_basis(col);
            target[(row, col)] += scale * amp;
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        self.add_to(&mut m, c64(1.0, 0.0));
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Computational basis state `|b_1 b_2 ... b_N>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel {
    bits: Vec<bool>,
}

impl BasisLabel {
    pub fn from_index(index: usize, n_qubits: usize) -> Self {
        let bits = (1..=n_qubits)
            .map(|site| (index >> (n_qubits - site)) & 1 == 1)
            .collect();
        BasisLabel { bits }
    }

    /// State with the given (1-based) sites in `|1>`.
    pub fn from_excited(n_qubits: usize, excited: &[usize]) -> Result<Self> {
        let mut bits = vec![false; n_qubits];
        for &site in excited {
            if site == 0 || site > n_qubits {
                return Err(Error::Index(format!("site {site} outside 1..={n_qubits}")));
            }
            bits[site - 1] = true;
        }
        Ok(BasisLabel { bits })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse {
                    what: "basis label",
                    input: s.to_string(),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        if bits.is_empty() {
            return Err(Error::Parse {
                what: "basis label",
                input: s.to_string(),
            });
        }
        Ok(BasisLabel { bits })
    }

    pub fn n_qubits(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn index(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
    }

    /// Ascending 1-based sites holding an excitation.
    pub fn excited_set(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn excitations(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}
