//! Dense state-vector reference simulator for small lattices.
//!
//! Shares nothing with the tableau engine beyond the `PauliString` type used
//! to name observables. Amplitudes are indexed so that qubit `q` is bit `q`
//! of the basis-state index, and a phase-free string with masks `(x, z)` is
//! read as the Hermitian operator `i^{|x∧z|} X^x Z^z`.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::pauli::{Basis, PauliString};

pub const MAX_QUBITS: usize = 14;

const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

/// Masks of a string on at most `MAX_QUBITS` qubits.
fn masks(p: &PauliString) -> (usize, usize) {
    (p.x_words()[0] as usize, p.z_words()[0] as usize)
}

fn i_pow(k: u32) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl DenseState {
    /// Computational basis state `|index⟩`.
    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        check_size(n)?;
        if index >> n != 0 {
            return Err(Error::IndexOutOfRange { kind: "basis state", index, len: 1 << n });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Wraps raw amplitudes, normalizing them. Fails on a zero vector.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_size(n)?;
        if amps.len() != 1 << n {
            return Err(Error::Oracle(format!("expected {} amplitudes, got {}", 1usize << n, amps.len())));
        }
        let mut s = Self { n, amps };
        s.normalize()?;
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if norm < NORM_TOL {
            return Err(Error::Oracle("zero-norm state".into()));
        }
        let inv = 1.0 / norm;
        self.amps.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    fn check_observable(&self, p: &PauliString) -> Result<()> {
        if p.num_qubits() != self.n {
            return Err(Error::QubitMismatch { expected: self.n, got: p.num_qubits() });
        }
        Ok(())
    }

    /// `P|ψ⟩` as a raw amplitude vector.
    fn apply(&self, p: &PauliString) -> Vec<Complex64> {
        let (x, z) = masks(p);
        let phase = i_pow((x & z).count_ones());
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (j, &a) in self.amps.iter().enumerate() {
            let sign = if (z & j).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
            out[j ^ x] = phase * a * sign;
        }
        out
    }

    /// `⟨ψ|P|ψ⟩`, real for Hermitian `P`.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        self.check_observable(p)?;
        let pa = self.apply(p);
        let v: Complex64 = self.amps.iter().zip(&pa).map(|(a, b)| a.conj() * b).sum();
        Ok(v.re)
    }

    /// Post-measurement state for outcome `sign` (±1) and its Born probability.
    /// Selecting a branch of probability zero is an error.
    pub fn project(&self, p: &PauliString, sign: i8) -> Result<(f64, DenseState)> {
        self.check_observable(p)?;
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidArgument(format!("outcome must be ±1, got {sign}")));
        }
        let pa = self.apply(p);
        let s = f64::from(sign);
        let amps: Vec<Complex64> = self.amps.iter().zip(&pa).map(|(a, b)| (a + b * s) * 0.5).collect();
        let prob: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if prob < NORM_TOL {
            return Err(Error::Oracle(format!("outcome {sign} of {p} has probability zero")));
        }
        let mut post = DenseState { n: self.n, amps };
        post.normalize()?;
        Ok((prob, post))
    }

    /// Born-rule measurement of `p`.
    pub fn measure<R: Rng>(&self, p: &PauliString, rng: &mut R) -> Result<(i8, DenseState)> {
        let p_plus = ((1.0 + self.expectation(p)?) / 2.0).clamp(0.0, 1.0);
        let sign = if rng.random::<f64>() < p_plus { 1 } else { -1 };
        let (_, post) = self.project(p, sign)?;
        Ok((sign, post))
    }

    /// Von Neumann entropy in bits of the reduced state on `region`.
    pub fn entropy(&self, region: &[usize]) -> Result<f64> {
        let mut mask = 0usize;
        for &q in region {
            if q >= self.n {
                return Err(Error::IndexOutOfRange { kind: "qubit", index: q, len: self.n });
            }
            mask |= 1 << q;
        }
        let inside = mask.count_ones() as usize;
        // The entropy of a pure state is the same on either side; diagonalize the smaller one.
        let keep = if inside <= self.n - inside { mask } else { !mask & ((1 << self.n) - 1) };
        let kept: Vec<usize> = (0..self.n).filter(|q| keep >> q & 1 == 1).collect();
        let traced: Vec<usize> = (0..self.n).filter(|q| keep >> q & 1 == 0).collect();
        if kept.is_empty() {
            return Ok(0.0);
        }
        let gather =
            |bits: &[usize], j: usize| bits.iter().enumerate().fold(0, |acc, (k, &q)| acc | ((j >> q & 1) << k));
        let (da, db) = (1usize << kept.len(), 1usize << traced.len());
        let mut m = vec![Complex64::new(0.0, 0.0); da * db];
        for (j, &a) in self.amps.iter().enumerate() {
            m[gather(&kept, j) * db + gather(&traced, j)] = a;
        }
        // ρ = M M†
        let mut rho = vec![Complex64::new(0.0, 0.0); da * da];
        for i in 0..da {
            for k in i..da {
                let v: Complex64 = (0..db).map(|b| m[i * db + b] * m[k * db + b].conj()).sum();
                rho[i * da + k] = v;
                rho[k * da + i] = v.conj();
            }
        }
        Ok(hermitian_eigenvalues(&mut rho, da)?.into_iter().filter(|&l| l > 1e-14).map(|l| -l * l.log2()).sum())
    }
}

/// Eigenvalues of the Hermitian `d × d` row-major matrix `a` by cyclic
/// Jacobi rotations; `a` is overwritten. Converges on the highly degenerate
/// spectra of stabilizer states, where general-purpose QR iterations can stall.
pub fn hermitian_eigenvalues(a: &mut [Complex64], d: usize) -> Result<Vec<f64>> {
    assert_eq!(a.len(), d * d);
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let off = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for p in 0..d {
            for q in p + 1..d {
                s += a[p * d + q].norm_sqr();
            }
        }
        s
    };
    let mut sweeps = 0;
    while off(a) > 1e-30 * total.max(1e-300) {
        sweeps += 1;
        if sweeps > 100 {
            return Err(Error::Oracle("Jacobi eigenvalue iteration did not converge".into()));
        }
        for p in 0..d {
            for q in p + 1..d {
                let g = a[p * d + q];
                let abs = g.norm();
                if abs < 1e-300 {
                    continue;
                }
                // Rotate the phase of row/column q so that a[p][q] becomes real and positive.
                let e = g / abs;
                for k in 0..d {
                    a[q * d + k] *= e;
                    a[k * d + q] *= e.conj();
                }
                let (app, aqq) = (a[p * d + p].re, a[q * d + q].re);
                let theta = (aqq - app) / (2.0 * abs);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let (kp, kq) = (a[k * d + p], a[k * d + q]);
                    a[k * d + p] = kp * c - kq * s;
                    a[k * d + q] = kp * s + kq * c;
                }
                for k in 0..d {
                    let (pk, qk) = (a[p * d + k], a[q * d + k]);
                    a[p * d + k] = pk * c - qk * s;
                    a[q * d + k] = pk * s + qk * c;
                }
                a[p * d + q] = Complex64::new(0.0, 0.0);
                a[q * d + p] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok((0..d).map(|i| a[i * d + i].re).collect())
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Oracle(format!("{n} qubits outside the supported range 1..={MAX_QUBITS}")));
    }
    Ok(())
}

/// Phase-tracked Pauli `i^e X^x Z^z`, used to count the dimension of a
/// joint eigenspace without touching the state vector.
#[derive(Copy, Clone)]
struct Phased {
    e: u32,
    x: usize,
    z: usize,
}

impl Phased {
    fn hermitian(p: &PauliString) -> Self {
        let (x, z) = masks(p);
        Self { e: (x & z).count_ones() & 3, x, z }
    }

    fn mul(self, o: Phased) -> Phased {
        // Z^z1 X^x2 = (-1)^{|z1∧x2|} X^x2 Z^z1
        let swap = 2 * ((self.z & o.x).count_ones() & 1);
        Phased { e: (self.e + o.e + swap) & 3, x: self.x ^ o.x, z: self.z ^ o.z }
    }
}

/// Dimension of the common +1 eigenspace of commuting `generators` on `n`
/// qubits: `Tr Π (1+g)/2`, expanded over all subset products.
pub fn eigenspace_dimension(n: usize, generators: &[PauliString]) -> Result<f64> {
    check_size(n)?;
    if generators.len() > 2 * MAX_QUBITS {
        return Err(Error::Oracle(format!("too many generators ({})", generators.len())));
    }
    let gens: Vec<Phased> = generators.iter().map(Phased::hermitian).collect();
    let k = gens.len();
    // Walk the subsets in Gray-code order so each step is a single product.
    let mut acc = Phased { e: 0, x: 0, z: 0 };
    let mut trace = 1.0; // empty product
                         // Toggling a generator in or out is one more right-multiplication: the
                         // generators commute and each squares to the identity.
    for step in 1u64..(1u64 << k) {
        acc = acc.mul(gens[step.trailing_zeros() as usize]);
        if acc.x == 0 && acc.z == 0 {
            trace += i_pow(acc.e).re;
        }
    }
    Ok(trace * (1u64 << n) as f64 / (1u64 << k) as f64)
}

/// The unique joint +1 eigenstate of the initial toric-code generators.
pub fn prepare(geometry: &LatticeGeometry) -> Result<DenseState> {
    let n = geometry.num_qubits();
    check_size(n)?;
    let mut generators = Vec::new();
    for s in 0..geometry.num_stars() {
        generators.push(geometry.star_support(s)?);
    }
    for x in 0..geometry.width() {
        generators.push(geometry.boundary_star_support(x)?);
    }
    for p in 0..geometry.num_plaquettes() {
        generators.push(geometry.plaquette_support(p)?);
    }
    let dim = eigenspace_dimension(n, &generators)?;
    if (dim - 1.0).abs() > 1e-9 {
        return Err(Error::Oracle(format!("initial eigenspace has dimension {dim}, expected 1")));
    }
    let amp = Complex64::new(1.0, 0.0);
    let mut state = DenseState { n, amps: vec![amp; 1 << n] };
    state.normalize()?;
    for g in &generators {
        let (_, post) = state.project(g, 1)?;
        state = post;
    }
    Ok(state)
}

/// Product state with every qubit in the +1 eigenstate of `basis`.
pub fn product_state(n: usize, basis: Basis) -> Result<DenseState> {
    match basis {
        Basis::Z => DenseState::basis_state(n, 0),
        Basis::X => {
            check_size(n)?;
            DenseState::from_amplitudes(n, vec![Complex64::new(1.0, 0.0); 1 << n])
        }
    }
}
