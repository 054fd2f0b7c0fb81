//! Pauli strings as pairs of bit-vectors, ignoring global phase.

use bitvec::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Single-qubit Pauli in the fixed order I, X, Y, Z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Pauli {
        Self::ALL[i]
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// +1 if the two Paulis commute, −1 otherwise.
    pub fn commutation_sign(self, other: Pauli) -> i32 {
        let (a, b) = self.bits();
        let (c, d) = other.bits();
        if (a & d) ^ (b & c) {
            -1
        } else {
            1
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(s)
    }
}

/// N-qubit Pauli operator `X^x Z^z` up to phase.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub x: BitVec<u64, Lsb0>,
    pub z: BitVec<u64, Lsb0>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self { x: bitvec![u64, Lsb0; 0; n], z: bitvec![u64, Lsb0; 0; n] }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(qubit, p);
        s
    }

    /// Product of `p` on every listed qubit.
    pub fn on(n: usize, qubits: impl IntoIterator<Item = usize>, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        for q in qubits {
            s.set(q, p);
        }
        s
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x[q], self.z[q])
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x.set(q, x);
        self.z.set(q, z);
    }

    /// Product up to phase (bitwise XOR of both parts).
    pub fn mul_assign(&mut self, other: &PauliString) {
        self.x ^= &other.x;
        self.z ^= &other.z;
    }

    pub fn mul(&self, other: &PauliString) -> PauliString {
        let mut r = self.clone();
        r.mul_assign(other);
        r
    }

    pub fn is_identity(&self) -> bool {
        self.x.not_any() && self.z.not_any()
    }

    pub fn weight(&self) -> usize {
        (self.x.clone() | &self.z).count_ones()
    }

    /// Symplectic inner product: true when the operators anticommute.
    pub fn anticommutes(&self, other: &PauliString) -> bool {
        let a = (self.x.clone() & &other.z).count_ones();
        let b = (self.z.clone() & &other.x).count_ones();
        (a + b) % 2 == 1
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        !self.anticommutes(other)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.len() {
            write!(f, "{}", self.get(q))?;
        }
        Ok(())
    }
}
