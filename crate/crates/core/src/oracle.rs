//! Brute-force dense density-matrix simulation for small codes.
//!
//! Independent of the tensor-network code paths: states are built from
//! explicit projector products on a statevector, noise is applied by Kraus
//! sums and checks by `(I ± S)/2` on both sides.

use crate::ec::ProcessMatrix;
use crate::layout::{recovery_pauli, CodeLayout, Syndrome};
use crate::noise::Channel;
use crate::pauli::{Pauli, PauliString};
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

/// Largest number of data qubits the oracle accepts.
pub const MAX_DATA_QUBITS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("argument error: {0}")]
    Argument(String),
}

/// Density matrix over `n` data qubits plus one ancilla. Basis index bit
/// `n - q` holds data qubit `q` (qubit 0 most significant); bit 0 is the
/// ancilla.
#[derive(Clone, Debug)]
pub struct DenseState {
    pub n: usize,
    pub rho: Vec<Complex64>,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Image of basis state `b` under a Pauli given as (x-mask, z-mask, #Y):
/// `P|b⟩ = phase · |b ⊕ x⟩`.
fn pauli_action(b: usize, x: usize, z: usize, ny: u32) -> (usize, Complex64) {
    let mut ph = Complex64::new(0.0, 1.0).powu(ny);
    if (b & z).count_ones() % 2 == 1 {
        ph = -ph;
    }
    (b ^ x, ph)
}

/// Masks of a Pauli on the full (data + ancilla) register.
#[derive(Clone, Copy, Debug)]
pub struct Masks {
    x: usize,
    z: usize,
    ny: u32,
}

impl DenseState {
    pub fn dim(&self) -> usize {
        1 << (self.n + 1)
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.n - q)
    }

    /// Masks of `p` on data qubits and `anc` on the ancilla.
    pub fn masks(&self, p: &PauliString, anc: Pauli) -> Masks {
        let (mut x, mut z, mut ny) = (0, 0, 0);
        for q in 0..self.n {
            let (bx, bz) = p.get(q).bits();
            if bx {
                x |= self.bit(q);
            }
            if bz {
                z |= self.bit(q);
            }
            if bx && bz {
                ny += 1;
            }
        }
        let (ax, az) = anc.bits();
        if ax {
            x |= 1;
        }
        if az {
            z |= 1;
        }
        if ax && az {
            ny += 1;
        }
        Masks { x, z, ny }
    }

    /// `P ρ` (left) or `ρ P` (right).
    fn mul_pauli(&self, m: Masks, left: bool) -> Vec<Complex64> {
        let d = self.dim();
        let mut out = vec![zero(); d * d];
        if left {
            // (Pρ)[b⊕x, c] = phase(b) ρ[b, c]
            for b in 0..d {
                let (b2, ph) = pauli_action(b, m.x, m.z, m.ny);
                for c in 0..d {
                    out[b2 * d + c] = ph * self.rho[b * d + c];
                }
            }
        } else {
            // (ρP)[r, c] = Σ_b ρ[r, b] P[b, c], P[c⊕x, c] = phase(c)
            for c in 0..d {
                let (b, ph) = pauli_action(c, m.x, m.z, m.ny);
                for r in 0..d {
                    out[r * d + c] = self.rho[r * d + b] * ph;
                }
            }
        }
        out
    }

    /// `ρ ← P ρ P†`.
    pub fn conjugate_pauli(&mut self, p: &PauliString) {
        let m = self.masks(p, Pauli::I);
        let left = DenseState { n: self.n, rho: self.mul_pauli(m, true) };
        self.rho = left.mul_pauli(m, false);
    }

    /// `ρ ← Π ρ Π` with `Π = (I + sign·S)/2`.
    pub fn project(&mut self, s: &PauliString, sign: i8) {
        let m = self.masks(s, Pauli::I);
        let f = sign as f64;
        let sl = self.mul_pauli(m, true);
        let half: Vec<Complex64> = self.rho.iter().zip(&sl).map(|(a, b)| (a + b * f) * 0.5).collect();
        let tmp = DenseState { n: self.n, rho: half };
        let sr = tmp.mul_pauli(m, false);
        self.rho = tmp.rho.iter().zip(&sr).map(|(a, b)| (a + b * f) * 0.5).collect();
    }

    pub fn trace(&self) -> f64 {
        let d = self.dim();
        (0..d).map(|i| self.rho[i * d + i].re).sum()
    }

    /// `Tr((p ⊗ anc) ρ)`.
    pub fn expectation(&self, p: &PauliString, anc: Pauli) -> Complex64 {
        let m = self.masks(p, anc);
        let d = self.dim();
        let mut acc = zero();
        for c in 0..d {
            let (b, ph) = pauli_action(c, m.x, m.z, m.ny);
            // P[b, c] ρ[c, b]
            acc += ph * self.rho[c * d + b];
        }
        acc
    }

    /// `ρ ← Σ_k K_k ρ K_k†` on data qubit `q`.
    pub fn apply_channel_at(&mut self, q: usize, ch: &Channel<f64>) {
        let d = self.dim();
        let bit = self.bit(q);
        let mut out = vec![zero(); d * d];
        for k in ch.kraus() {
            // left multiply
            let mut left = vec![zero(); d * d];
            for r in 0..d {
                let i = usize::from(r & bit != 0);
                let r0 = r & !bit;
                for j in 0..2 {
                    let kij = k[i * 2 + j];
                    if kij == zero() {
                        continue;
                    }
                    let src = r0 | if j == 1 { bit } else { 0 };
                    for c in 0..d {
                        left[r * d + c] += kij * self.rho[src * d + c];
                    }
                }
            }
            for c in 0..d {
                let i = usize::from(c & bit != 0);
                let c0 = c & !bit;
                for j in 0..2 {
                    // (X K†)[r, c] = Σ_j X[r, j'] conj(K[i, j])
                    let kij = k[i * 2 + j].conj();
                    if kij == zero() {
                        continue;
                    }
                    let src = c0 | if j == 1 { bit } else { 0 };
                    for r in 0..d {
                        out[r * d + c] += left[r * d + src] * kij;
                    }
                }
            }
        }
        self.rho = out;
    }

    pub fn apply_channel(&mut self, ch: &Channel<f64>) {
        for q in 0..self.n {
            self.apply_channel_at(q, ch);
        }
    }

    /// `ρ ← O ρ` on data qubit `q` (ket side only).
    pub fn apply_operator_at(&mut self, q: usize, m: &[Complex64; 4]) {
        let d = self.dim();
        let bit = self.bit(q);
        let mut out = vec![zero(); d * d];
        for r in 0..d {
            let i = usize::from(r & bit != 0);
            let r0 = r & !bit;
            for j in 0..2 {
                let src = r0 | if j == 1 { bit } else { 0 };
                for c in 0..d {
                    out[r * d + c] += m[i * 2 + j] * self.rho[src * d + c];
                }
            }
        }
        self.rho = out;
    }
}

/// Normalized `|Ψ⁺⟩⟨Ψ⁺|` with `|Ψ⁺⟩ ∝ |0⟩_L|0⟩_a + |1⟩_L|1⟩_a`, where
/// `|0⟩_L ∝ Π_f (I + A_f)/2 |0…0⟩` over the X-checks and `|1⟩_L = X̄|0⟩_L`.
pub fn dense_bell_state(layout: &CodeLayout) -> Result<DenseState, OracleError> {
    let n = layout.num_qubits();
    if n > MAX_DATA_QUBITS {
        return Err(OracleError::Resource(format!("{n} data qubits exceed the oracle cap of {MAX_DATA_QUBITS}")));
    }
    let dl = 1usize << n;
    let bit = |q: usize| 1usize << (n - 1 - q);
    let mut psi = vec![zero(); dl];
    psi[0] = Complex64::new(1.0, 0.0);
    for k in 0..layout.num_checks() {
        let p = layout.check_pauli(k);
        if layout.checks[k].kind != crate::layout::CheckKind::X {
            continue;
        }
        let xm: usize = (0..n).filter(|&q| p.get(q) == Pauli::X).map(bit).sum();
        let mut next = vec![zero(); dl];
        for (b, &a) in psi.iter().enumerate() {
            next[b] += a * 0.5;
            next[b ^ xm] += a * 0.5;
        }
        psi = next;
    }
    let xm: usize = layout.logical_x.iter().map(|&s| bit(layout.qubit(s))).sum();
    let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let mut full = vec![zero(); dl * 2];
    for (b, &a) in psi.iter().enumerate() {
        full[b << 1] += a / norm;
        full[((b ^ xm) << 1) | 1] += a / norm;
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let d = dl * 2;
    let mut rho = vec![zero(); d * d];
    for i in 0..d {
        if full[i] == zero() {
            continue;
        }
        for j in 0..d {
            rho[i * d + j] = full[i] * full[j].conj() * s * s;
        }
    }
    Ok(DenseState { n, rho })
}

/// One syndrome of a dense round.
#[derive(Clone, Debug)]
pub struct DenseOutcome {
    pub syndrome: Syndrome,
    pub probability: f64,
    pub process: ProcessMatrix,
}

/// Probability and process matrix of syndrome `s` for the noisy state.
pub fn dense_syndrome(noisy: &DenseState, layout: &CodeLayout, s: &Syndrome) -> Result<DenseOutcome, OracleError> {
    if s.len() != layout.num_checks() {
        return Err(OracleError::Argument("syndrome length mismatch".into()));
    }
    let mut st = noisy.clone();
    for k in 0..s.len() {
        st.project(&layout.check_pauli(k), s.outcomes[k]);
    }
    finish(st, layout, s, noisy.trace())
}

fn finish(mut st: DenseState, layout: &CodeLayout, s: &Syndrome, total: f64) -> Result<DenseOutcome, OracleError> {
    let p = st.trace() / total;
    let t = recovery_pauli(layout, s).map_err(|e| OracleError::Argument(e.to_string()))?;
    st.conjugate_pauli(&t);
    let tr = st.trace();
    let mut c = [[0.0; 4]; 4];
    for (i, row) in c.iter_mut().enumerate() {
        let li = layout.logical_pauli(Pauli::from_index(i));
        for (j, v) in row.iter_mut().enumerate() {
            *v = if tr > 0.0 { st.expectation(&li, Pauli::from_index(j)).re / tr } else { 0.0 };
        }
    }
    Ok(DenseOutcome { syndrome: s.clone(), probability: p, process: ProcessMatrix { c, log_norm: tr.ln() } })
}

/// Applies `ch` to every data qubit, then enumerates every syndrome with
/// probability above `min_probability` by branching on each check in order.
pub fn dense_round(state: &DenseState, layout: &CodeLayout, ch: &Channel<f64>, min_probability: f64) -> Result<Vec<DenseOutcome>, OracleError> {
    let mut noisy = state.clone();
    noisy.apply_channel(ch);
    let total = noisy.trace();
    let mut out = Vec::new();
    let mut stack = vec![(noisy, Vec::<i8>::new())];
    while let Some((st, prefix)) = stack.pop() {
        if prefix.len() == layout.num_checks() {
            let s = Syndrome { outcomes: prefix };
            out.push(finish(st, layout, &s, total)?);
            continue;
        }
        let k = prefix.len();
        let sp = layout.check_pauli(k);
        for sign in [-1i8, 1] {
            let mut b = st.clone();
            b.project(&sp, sign);
            if b.trace() / total > min_probability {
                let mut pre = prefix.clone();
                pre.push(sign);
                stack.push((b, pre));
            }
        }
    }
    out.sort_by_key(|o| o.syndrome.to_index());
    Ok(out)
}

/// Samples one syndrome of independent Pauli noise with probabilities
/// `(p_x, p_y, p_z)` per qubit by Pauli-frame propagation.
pub fn pauli_frame_sample<R: Rng + ?Sized>(layout: &CodeLayout, probs: [f64; 3], rng: &mut R) -> Syndrome {
    let n = layout.num_qubits();
    let mut e = PauliString::identity(n);
    for q in 0..n {
        let u: f64 = rng.gen();
        let p = if u < probs[0] {
            Pauli::X
        } else if u < probs[0] + probs[1] {
            Pauli::Y
        } else if u < probs[0] + probs[1] + probs[2] {
            Pauli::Z
        } else {
            Pauli::I
        };
        e.set(q, p);
    }
    layout.syndrome_of(&e)
}
