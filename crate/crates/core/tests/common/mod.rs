#![allow(dead_code)]

use rand::Rng;
use toric_moc::{Basis, LatticeGeometry, Pauli, PauliString};

/// Image of `p` under the electric-magnetic duality: links mapped by
/// `dual_link`, X and Z exchanged.
pub fn dual_pauli(g: &LatticeGeometry, p: &PauliString) -> PauliString {
    let mut out = PauliString::identity(p.num_qubits());
    for q in p.support() {
        let f = match p.get(q) {
            Pauli::X => Pauli::Z,
            Pauli::Z => Pauli::X,
            other => other,
        };
        out.set(g.dual_link(q), f);
    }
    out
}

pub fn random_pauli<R: Rng>(n: usize, rng: &mut R) -> PauliString {
    let mut p = PauliString::identity(n);
    while p.is_identity() {
        for q in 0..n {
            p.set(q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..4)]);
        }
    }
    p
}

pub fn random_region<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let size = rng.random_range(1..n);
    let mut all: Vec<usize> = (0..n).collect();
    for i in 0..size {
        let j = rng.random_range(i..n);
        all.swap(i, j);
    }
    let mut r = all[..size].to_vec();
    r.sort_unstable();
    r
}

pub fn single(n: usize, basis: Basis, q: usize) -> PauliString {
    PauliString::single(n, basis, q)
}
