//! Geometry of the rotated (optimized) surface code on a W×L vertex lattice.
//!
//! Qubit `(row, col)` has `row ∈ 0..W` (row 0 at the top) and `col ∈ 0..L`.
//! Four-qubit checks sit on the faces in a checkerboard pattern; two-qubit
//! checks sit on boundary edges. Left/right boundaries carry X-type checks,
//! top/bottom boundaries carry Z-type checks, so that Z̄ runs down the left
//! column and X̄ along the bottom row.

use crate::pauli::{Pauli, PauliString};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("layout self-check failed: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CheckKind {
    X,
    Z,
}

impl CheckKind {
    pub fn pauli(self) -> Pauli {
        match self {
            CheckKind::X => Pauli::X,
            CheckKind::Z => Pauli::Z,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub row: usize,
    pub col: usize,
}

impl Site {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Where a check lives; determines its recovery string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckPlace {
    Face { row: usize, col: usize },
    Top { col: usize },
    Bottom { col: usize },
    Left { row: usize },
    Right { row: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub kind: CheckKind,
    /// Two or four sites; faces are listed clockwise from the top-left corner.
    pub qubits: Vec<Site>,
    pub place: CheckPlace,
}

impl Check {
    pub fn min_row(&self) -> usize {
        self.qubits.iter().map(|s| s.row).min().unwrap()
    }
    pub fn max_row(&self) -> usize {
        self.qubits.iter().map(|s| s.row).max().unwrap()
    }
    pub fn min_col(&self) -> usize {
        self.qubits.iter().map(|s| s.col).min().unwrap()
    }
    pub fn max_col(&self) -> usize {
        self.qubits.iter().map(|s| s.col).max().unwrap()
    }
}

/// Measurement outcomes (+1 / −1) in the layout's sampling order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Syndrome {
    pub outcomes: Vec<i8>,
}

impl Syndrome {
    pub fn trivial(n: usize) -> Self {
        Self { outcomes: vec![1; n] }
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn flipped(&self, k: usize) -> bool {
        self.outcomes[k] < 0
    }

    /// Bit `k` set when check `k` reads −1.
    pub fn to_bits(&self) -> Vec<bool> {
        self.outcomes.iter().map(|&m| m < 0).collect()
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        Self { outcomes: bits.iter().map(|&b| if b { -1 } else { 1 }).collect() }
    }

    /// Index in `0..2^n` with check 0 as the least significant bit.
    pub fn to_index(&self) -> usize {
        self.outcomes.iter().enumerate().filter(|(_, &m)| m < 0).map(|(k, _)| 1usize << k).sum()
    }

    pub fn from_index(index: usize, n: usize) -> Self {
        Self { outcomes: (0..n).map(|k| if index >> k & 1 == 1 { -1 } else { 1 }).collect() }
    }

    /// Compact hexadecimal encoding, check 0 in the least significant bit of
    /// the last digit.
    pub fn to_hex(&self) -> String {
        let bits = self.to_bits();
        if bits.is_empty() {
            return "0".into();
        }
        let digits = bits.len().div_ceil(4);
        (0..digits)
            .rev()
            .map(|d| {
                let v: u32 = (0..4).filter(|&b| bits.get(4 * d + b).copied().unwrap_or(false)).map(|b| 1 << b).sum();
                std::char::from_digit(v, 16).unwrap()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeLayout {
    pub width: usize,
    pub length: usize,
    /// Checkerboard choice: face (r, c) is X-type iff (r + c) % 2 == parity.
    pub parity: usize,
    /// Checks in sampling order.
    pub checks: Vec<Check>,
    pub logical_x: Vec<Site>,
    pub logical_z: Vec<Site>,
}

impl CodeLayout {
    pub fn num_qubits(&self) -> usize {
        self.width * self.length
    }

    pub fn qubit(&self, s: Site) -> usize {
        s.row * self.length + s.col
    }

    pub fn site(&self, q: usize) -> Site {
        Site::new(q / self.length, q % self.length)
    }

    pub fn num_checks(&self) -> usize {
        self.checks.len()
    }

    pub fn check_pauli(&self, k: usize) -> PauliString {
        let c = &self.checks[k];
        PauliString::on(self.num_qubits(), c.qubits.iter().map(|&s| self.qubit(s)), c.kind.pauli())
    }

    pub fn logical_x_pauli(&self) -> PauliString {
        PauliString::on(self.num_qubits(), self.logical_x.iter().map(|&s| self.qubit(s)), Pauli::X)
    }

    pub fn logical_z_pauli(&self) -> PauliString {
        PauliString::on(self.num_qubits(), self.logical_z.iter().map(|&s| self.qubit(s)), Pauli::Z)
    }

    /// Representative of logical `p`; Ȳ = iX̄Z̄ is Y on the bottom-left corner.
    pub fn logical_pauli(&self, p: Pauli) -> PauliString {
        match p {
            Pauli::I => PauliString::identity(self.num_qubits()),
            Pauli::X => self.logical_x_pauli(),
            Pauli::Z => self.logical_z_pauli(),
            Pauli::Y => self.logical_x_pauli().mul(&self.logical_z_pauli()),
        }
    }

    /// Syndrome produced by a Pauli error on the noiseless code state.
    pub fn syndrome_of(&self, e: &PauliString) -> Syndrome {
        Syndrome {
            outcomes: (0..self.num_checks()).map(|k| if self.check_pauli(k).anticommutes(e) { -1 } else { 1 }).collect(),
        }
    }

    /// Column window `c` (columns c and c+1) in which check `k` is sampled.
    pub fn window(&self, k: usize) -> usize {
        self.checks[k].min_col().min(self.length - 2)
    }

    pub fn is_x_face(&self, row: usize, col: usize) -> bool {
        (row + col) % 2 == self.parity
    }

    /// The recovery string that flips exactly check `k`.
    pub fn recovery_string(&self, k: usize) -> PauliString {
        let n = self.num_qubits();
        let q = |r: usize, c: usize| r * self.length + c;
        match (self.checks[k].kind, self.checks[k].place) {
            (CheckKind::Z, CheckPlace::Face { row, col }) => PauliString::on(n, (0..=col).map(|c| q(row, c)), Pauli::X),
            (CheckKind::Z, CheckPlace::Top { col }) => PauliString::on(n, (0..=col).map(|c| q(0, c)), Pauli::X),
            (CheckKind::Z, CheckPlace::Bottom { col }) => {
                PauliString::on(n, (0..=col).map(|c| q(self.width - 1, c)), Pauli::X)
            }
            (CheckKind::X, CheckPlace::Face { row, col }) => PauliString::on(n, (0..=row).map(|r| q(r, col)), Pauli::Z),
            (CheckKind::X, CheckPlace::Left { row }) => PauliString::on(n, (0..=row).map(|r| q(r, 0)), Pauli::Z),
            (CheckKind::X, CheckPlace::Right { row }) => {
                PauliString::on(n, (0..=row).map(|r| q(r, self.length - 1)), Pauli::Z)
            }
            (kind, place) => unreachable!("no {kind:?} check at {place:?}"),
        }
    }
}

/// Builds the W×L layout, trying both checkerboard completions and keeping the
/// first that passes the self-checks.
pub fn build_layout(width: usize, length: usize) -> Result<CodeLayout, LayoutError> {
    if width < 2 || length < 2 {
        return Err(LayoutError::Argument(format!("W and L must be at least 2, got {width}×{length}")));
    }
    let first = build_layout_with_parity(width, length, 0);
    match first {
        Ok(l) => Ok(l),
        Err(_) => build_layout_with_parity(width, length, 1),
    }
}

/// Builds the layout for a fixed checkerboard parity and verifies it.
pub fn build_layout_with_parity(width: usize, length: usize, parity: usize) -> Result<CodeLayout, LayoutError> {
    if width < 2 || length < 2 {
        return Err(LayoutError::Argument(format!("W and L must be at least 2, got {width}×{length}")));
    }
    let is_x = |r: usize, c: usize| (r + c) % 2 == parity % 2;
    let mut checks = Vec::new();
    for r in 0..width - 1 {
        for c in 0..length - 1 {
            let kind = if is_x(r, c) { CheckKind::X } else { CheckKind::Z };
            checks.push(Check {
                kind,
                qubits: vec![Site::new(r, c), Site::new(r, c + 1), Site::new(r + 1, c + 1), Site::new(r + 1, c)],
                place: CheckPlace::Face { row: r, col: c },
            });
        }
    }
    for c in 0..length - 1 {
        if is_x(0, c) {
            checks.push(Check {
                kind: CheckKind::Z,
                qubits: vec![Site::new(0, c), Site::new(0, c + 1)],
                place: CheckPlace::Top { col: c },
            });
        }
        if is_x(width - 2, c) {
            checks.push(Check {
                kind: CheckKind::Z,
                qubits: vec![Site::new(width - 1, c + 1), Site::new(width - 1, c)],
                place: CheckPlace::Bottom { col: c },
            });
        }
    }
    for r in 0..width - 1 {
        if !is_x(r, 0) {
            checks.push(Check {
                kind: CheckKind::X,
                qubits: vec![Site::new(r + 1, 0), Site::new(r, 0)],
                place: CheckPlace::Left { row: r },
            });
        }
        if !is_x(r, length - 2) {
            checks.push(Check {
                kind: CheckKind::X,
                qubits: vec![Site::new(r, length - 1), Site::new(r + 1, length - 1)],
                place: CheckPlace::Right { row: r },
            });
        }
    }
    let window = |c: &Check| c.min_col().min(length - 2);
    checks.sort_by_key(|c| (window(c), c.min_row(), c.max_row(), c.min_col(), c.max_col()));
    let layout = CodeLayout {
        width,
        length,
        parity: parity % 2,
        checks,
        logical_x: (0..length).map(|c| Site::new(width - 1, c)).collect(),
        logical_z: (0..width).map(|r| Site::new(r, 0)).collect(),
    };
    verify(&layout)?;
    Ok(layout)
}

fn verify(layout: &CodeLayout) -> Result<(), LayoutError> {
    let n = layout.num_qubits();
    let paulis: Vec<PauliString> = (0..layout.num_checks()).map(|k| layout.check_pauli(k)).collect();
    for i in 0..paulis.len() {
        for j in i + 1..paulis.len() {
            if paulis[i].anticommutes(&paulis[j]) {
                return Err(LayoutError::Invalid(format!("checks {i} and {j} anticommute")));
            }
        }
    }
    let rank = gf2_rank(&paulis);
    if rank != n - 1 || paulis.len() != n - 1 {
        return Err(LayoutError::Invalid(format!(
            "{} checks of rank {rank}, expected {} independent",
            paulis.len(),
            n - 1
        )));
    }
    let xl = layout.logical_x_pauli();
    let zl = layout.logical_z_pauli();
    if !xl.anticommutes(&zl) {
        return Err(LayoutError::Invalid("logical X and Z commute".into()));
    }
    for (k, p) in paulis.iter().enumerate() {
        if p.anticommutes(&xl) || p.anticommutes(&zl) {
            return Err(LayoutError::Invalid(format!("check {k} anticommutes with a logical")));
        }
        let r = layout.recovery_string(k);
        for (j, q) in paulis.iter().enumerate() {
            if r.anticommutes(q) != (j == k) {
                return Err(LayoutError::Invalid(format!("recovery string of check {k} flips check {j}")));
            }
        }
    }
    Ok(())
}

/// Rank over GF(2) of a set of Pauli strings in the symplectic representation.
pub fn gf2_rank(rows: &[PauliString]) -> usize {
    let mut vecs: Vec<Vec<bool>> = rows
        .iter()
        .map(|p| p.x.iter().by_vals().chain(p.z.iter().by_vals()).collect())
        .collect();
    let cols = vecs.first().map_or(0, |v| v.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..vecs.len()).find(|&r| vecs[r][col]) else {
            continue;
        };
        vecs.swap(rank, pivot);
        for r in 0..vecs.len() {
            if r != rank && vecs[r][col] {
                let (a, b) = if r < rank {
                    let (lo, hi) = vecs.split_at_mut(rank);
                    (&mut lo[r], &hi[0])
                } else {
                    let (lo, hi) = vecs.split_at_mut(r);
                    (&mut hi[0], &lo[rank])
                };
                for (x, y) in a.iter_mut().zip(b.iter()) {
                    *x ^= *y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Return-to-codespace Pauli T_s: the product of the recovery strings of all
/// flipped checks.
pub fn recovery_pauli(layout: &CodeLayout, s: &Syndrome) -> Result<PauliString, LayoutError> {
    if s.len() != layout.num_checks() {
        return Err(LayoutError::Argument(format!(
            "syndrome has {} outcomes, layout has {} checks",
            s.len(),
            layout.num_checks()
        )));
    }
    let mut t = PauliString::identity(layout.num_qubits());
    for k in 0..s.len() {
        if s.flipped(k) {
            t.mul_assign(&layout.recovery_string(k));
        }
    }
    Ok(t)
}

#[derive(Serialize)]
struct LayoutDump<'a> {
    width: usize,
    length: usize,
    qubits: Vec<Site>,
    checks: &'a [Check],
    logical_x: &'a [Site],
    logical_z: &'a [Site],
}

/// JSON description of the geometry: qubit coordinates, checks in sampling
/// order, and logical operator supports.
pub fn layout_json(layout: &CodeLayout) -> String {
    let dump = LayoutDump {
        width: layout.width,
        length: layout.length,
        qubits: (0..layout.num_qubits()).map(|q| layout.site(q)).collect(),
        checks: &layout.checks,
        logical_x: &layout.logical_x,
        logical_z: &layout.logical_z,
    };
    serde_json::to_string_pretty(&dump).expect("layout serializes")
}
