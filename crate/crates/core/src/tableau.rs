//! Phase-free stabilizer states over GF(2).
//!
//! A state on `L` qubits is stored as `L` independent, mutually commuting
//! generator rows, each row the concatenation `[x | z]` of two packed masks.
//! Signs are not tracked, so every query here is a statement about the
//! stabilizer group modulo phases: membership corresponds to `⟨P⟩² = 1` and
//! measurement classification is Random or Deterministic without an outcome.

use crate::error::{Error, Result};
use crate::gf2::{get_bit, words_for, xor_into, BitMatrix, EchelonBasis};
use crate::lattice::LatticeGeometry;
use crate::pauli::{symplectic_product, Basis, PauliString};

/// Classification of a projective Pauli measurement.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// The observable (up to sign) was already in the group; nothing changed.
    Deterministic,
    /// The observable anticommuted with the group and replaced a generator.
    Random,
}

#[derive(Clone, Debug)]
pub struct StabilizerTableau {
    n: usize,
    words: usize,
    data: Vec<u64>,
    scratch: Vec<u64>,
    hits: Vec<usize>,
}

impl StabilizerTableau {
    /// Build a pure state from `n` generators, checking commutation and independence.
    pub fn from_generators(n: usize, generators: &[PauliString]) -> Result<Self> {
        if generators.len() != n {
            return Err(Error::InvalidState(format!("{} generators for {} qubits", generators.len(), n)));
        }
        for g in generators {
            if g.num_qubits() != n {
                return Err(Error::QubitMismatch { expected: n, got: g.num_qubits() });
            }
        }
        for (i, a) in generators.iter().enumerate() {
            for (j, b) in generators.iter().enumerate().skip(i + 1) {
                if !a.commutes_with(b) {
                    return Err(Error::InvalidState(format!("generators {i} and {j} anticommute")));
                }
            }
        }
        if rank(generators) != n {
            return Err(Error::InvalidState("generators are linearly dependent".into()));
        }
        Ok(Self::from_rows_unchecked(n, generators))
    }

    fn from_rows_unchecked(n: usize, generators: &[PauliString]) -> Self {
        let words = words_for(n);
        let mut data = Vec::with_capacity(2 * words * n);
        for g in generators {
            data.extend_from_slice(g.x_words());
            data.extend_from_slice(g.z_words());
        }
        Self { n, words, data, scratch: vec![0; 2 * words], hits: Vec::with_capacity(n) }
    }

    /// Toric-code state on the cylinder: all interior stars, all plaquettes
    /// (including the rough half-plaquettes) and the smooth-boundary stars.
    pub fn initial_state(geometry: &LatticeGeometry) -> Result<Self> {
        let mut gens = Vec::with_capacity(geometry.num_qubits());
        for i in 0..geometry.num_stars() {
            gens.push(geometry.star_support(i)?);
        }
        for i in 0..geometry.num_plaquettes() {
            gens.push(geometry.plaquette_support(i)?);
        }
        for x in 0..geometry.width() {
            gens.push(geometry.boundary_star_support(x)?);
        }
        Self::from_generators(geometry.num_qubits(), &gens)
    }

    /// Product state stabilized by a single-qubit Pauli of `basis` on every qubit.
    pub fn product_state(n: usize, basis: Basis) -> Self {
        let gens: Vec<_> = (0..n).map(|q| PauliString::single(n, basis, q)).collect();
        Self::from_rows_unchecked(n, &gens)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn num_generators(&self) -> usize {
        self.data.len() / self.stride()
    }

    #[inline]
    fn stride(&self) -> usize {
        2 * self.words
    }

    fn row(&self, r: usize) -> &[u64] {
        let s = self.stride();
        &self.data[r * s..(r + 1) * s]
    }

    pub fn generator(&self, r: usize) -> PauliString {
        PauliString::from_row(self.n, self.row(r))
    }

    pub fn generators(&self) -> impl Iterator<Item = PauliString> + '_ {
        (0..self.num_generators()).map(|r| self.generator(r))
    }

    /// Measure an arbitrary Pauli product. The first anticommuting generator
    /// is the pivot: it is multiplied into every other anticommuting row and
    /// then replaced by the observable.
    pub fn measure(&mut self, observable: &PauliString) -> Result<Outcome> {
        if observable.num_qubits() != self.n {
            return Err(Error::QubitMismatch { expected: self.n, got: observable.num_qubits() });
        }
        if observable.is_identity() {
            return Err(Error::IdentityObservable);
        }
        let (px, pz) = (observable.x_words(), observable.z_words());
        let w = self.words;
        let s = self.stride();
        self.hits.clear();
        for r in 0..self.num_generators() {
            let row = &self.data[r * s..(r + 1) * s];
            if symplectic_product(&row[..w], &row[w..], px, pz) == 1 {
                self.hits.push(r);
            }
        }
        Ok(self.collapse(|row| {
            row[..w].copy_from_slice(px);
            row[w..].copy_from_slice(pz);
        }))
    }

    /// Single-qubit measurement of `basis` on `qubit`.
    pub fn measure_single(&mut self, basis: Basis, qubit: usize) -> Result<Outcome> {
        if qubit >= self.n {
            return Err(Error::IndexOutOfRange { kind: "qubit", index: qubit, len: self.n });
        }
        let w = self.words;
        let s = self.stride();
        // X on `qubit` anticommutes with rows carrying a Z bit there, and vice versa.
        let offset = match basis {
            Basis::X => w,
            Basis::Z => 0,
        };
        let (word, mask) = (offset + (qubit >> 6), 1u64 << (qubit & 63));
        self.hits.clear();
        for r in 0..self.num_generators() {
            if self.data[r * s + word] & mask != 0 {
                self.hits.push(r);
            }
        }
        let own = match basis {
            Basis::X => qubit >> 6,
            Basis::Z => w + (qubit >> 6),
        };
        Ok(self.collapse(|row| {
            row.fill(0);
            row[own] = mask;
        }))
    }

    fn collapse(&mut self, write_observable: impl FnOnce(&mut [u64])) -> Outcome {
        let Some((&pivot, rest)) = self.hits.split_first() else {
            return Outcome::Deterministic;
        };
        let s = self.stride();
        self.scratch.copy_from_slice(&self.data[pivot * s..(pivot + 1) * s]);
        for &r in rest {
            xor_into(&mut self.data[r * s..(r + 1) * s], &self.scratch);
        }
        write_observable(&mut self.data[pivot * s..(pivot + 1) * s]);
        Outcome::Random
    }

    /// Row-echelon basis of the group for repeated membership queries.
    pub fn basis(&self) -> StabilizerBasis {
        let mut m = BitMatrix::with_capacity(2 * self.words * 64, self.num_generators());
        for r in 0..self.num_generators() {
            m.push_row(self.row(r));
        }
        StabilizerBasis { n: self.n, inner: EchelonBasis::from_matrix(m) }
    }

    /// True iff `observable` is, up to phase, an element of the stabilizer group.
    pub fn contains(&self, observable: &PauliString) -> bool {
        self.basis().contains(observable)
    }

    /// Entanglement entropy in bits of `region` (qubit indices), computed as
    /// the rank of the generators restricted to the region minus its size.
    /// Uses whichever of the region and its complement is smaller.
    pub fn subsystem_entropy(&self, region: &[usize]) -> Result<usize> {
        let mut inside = vec![false; self.n];
        for &q in region {
            if q >= self.n {
                return Err(Error::IndexOutOfRange { kind: "qubit", index: q, len: self.n });
            }
            inside[q] = true;
        }
        let size = inside.iter().filter(|&&b| b).count();
        let side = size <= self.n - size;
        let qubits: Vec<usize> = (0..self.n).filter(|&q| inside[q] == side).collect();
        Ok(self.restricted_rank(&qubits) - qubits.len())
    }

    fn restricted_rank(&self, qubits: &[usize]) -> usize {
        let m = qubits.len();
        if m == 0 {
            return 0;
        }
        let w = self.words;
        let mut mat = BitMatrix::zeros(self.num_generators(), 2 * m);
        for r in 0..self.num_generators() {
            let (x, z) = self.row(r).split_at(w);
            for (j, &q) in qubits.iter().enumerate() {
                if get_bit(x, q) {
                    mat.set(r, j);
                }
                if get_bit(z, q) {
                    mat.set(r, m + j);
                }
            }
        }
        mat.echelonize().len()
    }

    /// Full structural check: row count, independence, mutual commutation.
    pub fn is_valid_pure_state(&self) -> bool {
        let k = self.num_generators();
        if k != self.n {
            return false;
        }
        let w = self.words;
        for i in 0..k {
            let (xi, zi) = self.row(i).split_at(w);
            for j in i + 1..k {
                let (xj, zj) = self.row(j).split_at(w);
                if symplectic_product(xi, zi, xj, zj) == 1 {
                    return false;
                }
            }
        }
        self.basis().rank() == k
    }

    /// Binary snapshot: little-endian `u64` header `[L, k]` followed by the
    /// rows, each `x` words then `z` words, every word little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 8 * self.data.len());
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
        out.extend_from_slice(&(self.num_generators() as u64).to_le_bytes());
        for w in &self.data {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let word = |i: usize| -> Result<u64> {
            bytes
                .get(8 * i..8 * i + 8)
                .map(|b| u64::from_le_bytes(b.try_into().unwrap()))
                .ok_or_else(|| Error::Snapshot("truncated snapshot".into()))
        };
        let n = word(0)? as usize;
        let k = word(1)? as usize;
        let words = words_for(n);
        let expected = 16 + 8 * k * 2 * words;
        if bytes.len() != expected {
            return Err(Error::Snapshot(format!("expected {expected} bytes, found {}", bytes.len())));
        }
        let gens = (0..k)
            .map(|r| {
                let base = 2 + r * 2 * words;
                let x = (0..words).map(|i| word(base + i)).collect::<Result<Vec<_>>>()?;
                let z = (0..words).map(|i| word(base + words + i)).collect::<Result<Vec<_>>>()?;
                PauliString::from_words(n, x, z)
                    .ok_or_else(|| Error::Snapshot(format!("row {r} has bits beyond qubit {n}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_generators(n, &gens)
    }
}

/// Equality of the stored generator rows (not of the groups they generate).
impl PartialEq for StabilizerTableau {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.data == other.data
    }
}

impl Eq for StabilizerTableau {}

/// Echelon form of a stabilizer group, reusable across many membership tests.
#[derive(Clone, Debug)]
pub struct StabilizerBasis {
    n: usize,
    inner: EchelonBasis,
}

impl StabilizerBasis {
    pub fn rank(&self) -> usize {
        self.inner.rank()
    }

    pub fn contains(&self, observable: &PauliString) -> bool {
        assert_eq!(observable.num_qubits(), self.n, "qubit count mismatch");
        self.inner.contains(&observable.to_row())
    }
}

/// GF(2) rank of the stacked `[x | z]` masks.
pub fn rank(rows: &[PauliString]) -> usize {
    let Some(first) = rows.first() else {
        return 0;
    };
    let mut m = BitMatrix::with_capacity(2 * first.x_words().len() * 64, rows.len());
    for r in rows {
        m.push_row(&r.to_row());
    }
    m.echelonize().len()
}
