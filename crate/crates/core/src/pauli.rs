//! Phase-free Pauli products as paired X/Z bit masks.

use std::fmt;

use crate::gf2::{get_bit, set_bit, words_for};

/// Single-qubit Pauli factor.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Measurement basis for single-link observables.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn dual(self) -> Self {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }
}

/// A Pauli product on `n` qubits with no phase. Qubit `i` carries X iff bit
/// `i` of `x` is set and Z iff bit `i` of `z` is set (both: Y).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self { n, x: vec![0; w], z: vec![0; w] }
    }

    /// Product of one Pauli type over `qubits`. Repeated qubits cancel.
    pub fn from_support(n: usize, basis: Basis, qubits: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::identity(n);
        for q in qubits {
            assert!(q < n, "qubit {q} out of range for {n} qubits");
            let words = match basis {
                Basis::X => &mut p.x,
                Basis::Z => &mut p.z,
            };
            words[q >> 6] ^= 1 << (q & 63);
        }
        p
    }

    pub fn single(n: usize, basis: Basis, qubit: usize) -> Self {
        Self::from_support(n, basis, [qubit])
    }

    /// Build from packed words; `None` if the widths are wrong or bits beyond `n` are set.
    pub fn from_words(n: usize, x: Vec<u64>, z: Vec<u64>) -> Option<Self> {
        let w = words_for(n);
        if x.len() != w || z.len() != w {
            return None;
        }
        let p = Self { n, x, z };
        p.padding_clear().then_some(p)
    }

    fn padding_clear(&self) -> bool {
        let tail = self.n & 63;
        if tail == 0 {
            return true;
        }
        let mask = !((1u64 << tail) - 1);
        let last = self.x.len() - 1;
        self.x[last] & mask == 0 && self.z[last] & mask == 0
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn get(&self, q: usize) -> Pauli {
        match (get_bit(&self.x, q), get_bit(&self.z, q)) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (xb, zb) = match p {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        };
        let m = 1u64 << (q & 63);
        self.x[q >> 6] &= !m;
        self.z[q >> 6] &= !m;
        if xb {
            set_bit(&mut self.x, q);
        }
        if zb {
            set_bit(&mut self.z, q);
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    /// Qubits carrying a non-identity factor, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.get(q) != Pauli::I).collect()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        symplectic_product(&self.x, &self.z, &other.x, &other.z) == 0
    }

    /// Phase-free product (bitwise XOR of masks).
    pub fn mul_assign(&mut self, other: &PauliString) {
        assert_eq!(self.n, other.n);
        crate::gf2::xor_into(&mut self.x, &other.x);
        crate::gf2::xor_into(&mut self.z, &other.z);
    }

    pub fn product(&self, other: &PauliString) -> PauliString {
        let mut p = self.clone();
        p.mul_assign(other);
        p
    }

    /// Concatenated `[x | z]` words, the row layout used by the tableau.
    pub fn to_row(&self) -> Vec<u64> {
        let mut row = self.x.clone();
        row.extend_from_slice(&self.z);
        row
    }

    pub(crate) fn from_row(n: usize, row: &[u64]) -> Self {
        let w = words_for(n);
        Self { n, x: row[..w].to_vec(), z: row[w..2 * w].to_vec() }
    }
}

/// Parity of `|x1·z2| + |x2·z1|`: 0 when the two products commute.
#[inline]
pub fn symplectic_product(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> u32 {
    let mut acc = 0u64;
    for i in 0..x1.len() {
        acc ^= (x1[i] & z2[i]) ^ (x2[i] & z1[i]);
    }
    acc.count_ones() & 1
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            let c = match self.get(q) {
                Pauli::I => '.',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PauliString {
    type Err = crate::Error;

    /// Parses strings like `"XZ.Y"`; `.`, `_` and `I` denote identity.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let n = s.chars().count();
        let mut p = PauliString::identity(n);
        for (q, c) in s.chars().enumerate() {
            let f = match c {
                '.' | '_' | 'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(crate::Error::Parse(format!("invalid Pauli character {other:?}"))),
            };
            p.set(q, f);
        }
        Ok(p)
    }
}
