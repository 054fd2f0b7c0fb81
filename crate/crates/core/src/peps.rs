//! Tensor networks for the encoded Bell state and its density operator.
//!
//! Every check projector chain of `W` tensors carries one value on all of its
//! bonds (each `W(C)` is zero unless its virtual indices agree), so inside the
//! [`DensityNetwork`] a chain is stored as a single shared index — a
//! hyperedge labelled `Check { id, role }` — on every site it touches. The
//! bond form with one inter-column bond per check is produced on demand by the
//! boundary-MPS engine.
//!
//! Internal normalization: preparation projectors are unnormalized `I + A_f`,
//! so the fresh network has trace `‖Ψ⁺‖² = 2^(n_X + 1)`; measurement
//! projectors are normalized `(I ± S)/2` so conditional probabilities are
//! plain ratios of contractions.

use crate::layout::{Check, CheckKind, CheckPlace, CodeLayout, Site};
use crate::noise::{pauli_matrix, to_superoperator, Channel, Mat2};
use crate::pauli::{Pauli, PauliString};
use crate::scalar::{czero, Real, C};
use crate::tensor::{contract, partial_trace, Dir, Label, Role, Side, Tensor, TensorError};
use std::sync::Arc;

/// `W(C)` with indices `[i, i', α_1..α_n]`: δ at all-zero virtual, `C` at
/// all-one virtual, zero elsewhere.
pub fn w_tensor<T: Real>(c: &Mat2<T>, n_virtual: usize) -> Result<Tensor<T>, TensorError> {
    if n_virtual < 1 {
        return Err(TensorError::Argument("w_tensor needs at least one virtual index".into()));
    }
    let mut shape = vec![2, 2];
    shape.extend(std::iter::repeat_n(2, n_virtual));
    Ok(Tensor::from_fn(shape, |idx| {
        let v = &idx[2..];
        if v.iter().all(|&a| a == 0) {
            if idx[0] == idx[1] {
                C::new(T::one(), T::zero())
            } else {
                czero()
            }
        } else if v.iter().all(|&a| a == 1) {
            c[idx[0] * 2 + idx[1]]
        } else {
            czero()
        }
    }))
}

/// Sites of a check in chain order: for faces the chain runs
/// (r+1,c)–(r,c)–(r,c+1)–(r+1,c+1), so only one bond crosses columns.
pub fn chain_order(check: &Check) -> Vec<Site> {
    match check.place {
        CheckPlace::Face { row, col } => vec![
            Site::new(row + 1, col),
            Site::new(row, col),
            Site::new(row, col + 1),
            Site::new(row + 1, col + 1),
        ],
        _ => {
            let mut q = check.qubits.clone();
            q.sort();
            q
        }
    }
}

fn direction(from: Site, to: Site) -> Dir {
    if to.row + 1 == from.row && to.col == from.col {
        Dir::N
    } else if to.row == from.row + 1 && to.col == from.col {
        Dir::S
    } else if to.col + 1 == from.col && to.row == from.row {
        Dir::W
    } else if to.col == from.col + 1 && to.row == from.row {
        Dir::E
    } else {
        panic!("sites {from:?} and {to:?} are not lattice neighbours")
    }
}

/// Chain of `Q±`/`R±` tensors whose contraction is `I ± S` on the check's
/// qubits, in [`chain_order`]. Each tensor has indices
/// `[out, in, virtual...]`, physical labels `Index(0)`, `Index(1)` and virtual
/// labels `Virtual(dir)` pointing at the chain neighbour. The sign sits on the
/// first tensor.
pub fn check_projector_network<T: Real>(check: &Check, sign: i8) -> Vec<(Site, Tensor<T>)> {
    let sites = chain_order(check);
    let p = pauli_matrix::<T>(check.kind.pauli().index());
    let n = sites.len();
    sites
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let mut neighbours = Vec::new();
            if k > 0 {
                neighbours.push(direction(s, sites[k - 1]));
            }
            if k + 1 < n {
                neighbours.push(direction(s, sites[k + 1]));
            }
            let c = if k == 0 && sign < 0 { p.map(|z| -z) } else { p };
            let mut labels = vec![Label::Index(0), Label::Index(1)];
            labels.extend(neighbours.iter().map(|&d| Label::Virtual(d)));
            let t = w_tensor(&c, neighbours.len()).unwrap().with_labels(labels).unwrap();
            (s, t)
        })
        .collect()
}

/// Outcome bookkeeping for each check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckState {
    Unmeasured,
    /// Projector `(I ± S)/2` absorbed on the ket side.
    Measured(i8),
    /// Not applied because the noise commutes with the check; reads +1.
    Implicit,
}

/// Whether the ancilla indices are summed (trace) or left free.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AncillaPolicy {
    Trace,
    Keep,
}

/// Exact restrictions of the capped network that drop variables whose
/// contribution is provably fixed by the noise structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduction {
    /// No restriction.
    General,
    /// Channel preserves bit-flip parity: for an unmeasured X-check the ket
    /// and bra preparation variables agree, for a measured one the outcome
    /// variable is their XOR.
    FlipParity,
    /// Pauli channel: additionally the bra preparation variable contributes
    /// a constant factor 2 and is fixed to 0.
    Pauli,
}

/// Sites carrying each hyperedge label.
#[derive(Clone, Debug)]
pub struct Supports {
    checks: Vec<Vec<usize>>,
    ancilla: Vec<usize>,
}

impl Supports {
    pub fn new(layout: &CodeLayout) -> Self {
        let checks = layout
            .checks
            .iter()
            .map(|c| {
                let mut s: Vec<usize> = c.qubits.iter().map(|&q| layout.qubit(q)).collect();
                s.sort();
                s
            })
            .collect();
        let ancilla = (0..layout.length).map(|c| layout.qubit(Site::new(layout.width - 1, c))).collect();
        Self { checks, ancilla }
    }

    pub fn of(&self, label: Label) -> &[usize] {
        match label {
            Label::Check { id, .. } => &self.checks[id as usize],
            Label::Ancilla(_) => &self.ancilla,
            other => panic!("label {other:?} is not a network hyperedge"),
        }
    }
}

/// Network with every physical pair traced; the input of both engines.
#[derive(Clone, Debug)]
pub struct CappedNetwork<T: Real> {
    pub width: usize,
    pub length: usize,
    /// Row-major site factors with hyperedge labels only.
    pub sites: Vec<Tensor<T>>,
    /// Labels left open in the result, in output order.
    pub free: Vec<Label>,
    /// Constant factor `e^log_scale` multiplying the contraction.
    pub log_scale: T,
    pub supports: Arc<Supports>,
}

/// Grid of doubled site tensors `B_{i,i',α}` for the half-encoded Bell pair.
///
/// Each site tensor has labels `Phys(Ket)`, `Phys(Bra)` followed by hyperedge
/// labels; the ancilla pair `Ancilla(Ket)`, `Ancilla(Bra)` lives on the bottom
/// row (the copy chain ending at the bottom-right corner).
#[derive(Clone, Debug)]
pub struct DensityNetwork<T: Real> {
    layout: Arc<CodeLayout>,
    supports: Arc<Supports>,
    sites: Vec<Tensor<T>>,
    states: Vec<CheckState>,
    /// Number of extra projector layers per check (beyond the first).
    repeats: Vec<u16>,
    all_pauli: bool,
    all_parity: bool,
    all_z_diagonal: bool,
    logical_insertions_only: bool,
}

fn doubled<T: Real>(ket: &Tensor<T>) -> Tensor<T> {
    let mut bra = ket.clone();
    for z in bra.data_mut() {
        *z = z.conj();
    }
    let labels: Vec<Label> = ket
        .labels()
        .iter()
        .map(|&l| match l {
            Label::Phys(_) => Label::Phys(Side::Bra),
            Label::Check { id, .. } => Label::Check { id, role: Role::Bra },
            Label::Ancilla(_) => Label::Ancilla(Side::Bra),
            other => other,
        })
        .collect();
    let bra = bra.with_labels(labels).unwrap();
    contract(ket, &bra, &[]).unwrap()
}

fn apply_ket_matrix<T: Real>(b: &Tensor<T>, m: &Tensor<T>) -> Tensor<T> {
    // m has indices [out, in, extra...]; result keeps Phys(Ket) in front
    let ax = b.axis(Label::Phys(Side::Ket)).expect("ket index");
    let mut out = contract(m, b, &[(1, ax)]).unwrap();
    out.relabel(Label::Index(0), Label::Phys(Side::Ket));
    out
}

/// Builds the density network of `|Ψ⁺⟩ = |0⟩_L|0⟩_a + |1⟩_L|1⟩_a`.
///
/// Per site: `|0⟩`, then one `Q⁺` per X-check touching the site (fixing the
/// input index to 0 as in the projected product state), then the `Q⁺` of the
/// logical-X copy chain on the bottom row with the ancilla variable; finally
/// `B = A ⊗ A*`.
pub fn build_bell_density_network<T: Real>(layout: &CodeLayout) -> DensityNetwork<T> {
    let layout = Arc::new(layout.clone());
    let supports = Arc::new(Supports::new(&layout));
    let x = pauli_matrix::<T>(1);
    let mut sites = Vec::with_capacity(layout.num_qubits());
    for q in 0..layout.num_qubits() {
        let site = layout.site(q);
        let mut ket = Tensor::new(vec![2], vec![C::new(T::one(), T::zero()), czero()])
            .unwrap()
            .with_labels(vec![Label::Phys(Side::Ket)])
            .unwrap();
        for (k, check) in layout.checks.iter().enumerate() {
            if check.kind == CheckKind::X && check.qubits.contains(&site) {
                let w = w_tensor(&x, 1)
                    .unwrap()
                    .with_labels(vec![Label::Index(0), Label::Index(1), Label::Check { id: k as u32, role: Role::Ket }])
                    .unwrap();
                ket = apply_ket_matrix(&ket, &w);
            }
        }
        if site.row == layout.width - 1 {
            let w = w_tensor(&x, 1)
                .unwrap()
                .with_labels(vec![Label::Index(0), Label::Index(1), Label::Ancilla(Side::Ket)])
                .unwrap();
            ket = apply_ket_matrix(&ket, &w);
        }
        sites.push(doubled(&ket));
    }
    let n = layout.num_checks();
    DensityNetwork {
        layout,
        supports,
        sites,
        states: vec![CheckState::Unmeasured; n],
        repeats: vec![0; n],
        all_pauli: true,
        all_parity: true,
        all_z_diagonal: true,
        logical_insertions_only: true,
    }
}

impl<T: Real> DensityNetwork<T> {
    pub fn layout(&self) -> &CodeLayout {
        &self.layout
    }

    pub fn layout_arc(&self) -> &Arc<CodeLayout> {
        &self.layout
    }

    pub fn supports(&self) -> &Arc<Supports> {
        &self.supports
    }

    pub fn site_tensor(&self, q: usize) -> &Tensor<T> {
        &self.sites[q]
    }

    pub fn check_states(&self) -> &[CheckState] {
        &self.states
    }

    pub fn state(&self, k: usize) -> CheckState {
        self.states[k]
    }

    /// Every applied channel so far commutes with the Z-type checks.
    pub fn noise_is_z_diagonal(&self) -> bool {
        self.all_z_diagonal
    }

    /// Applies `c` to the data qubit at row-major index `q`.
    pub fn apply_channel_at(&mut self, q: usize, c: &Channel<T>) {
        let e = to_superoperator(c);
        let b = &self.sites[q];
        let ak = b.axis(Label::Phys(Side::Ket)).unwrap();
        let ab = b.axis(Label::Phys(Side::Bra)).unwrap();
        let mut out = contract(&e, b, &[(1, ak), (2, ab)]).unwrap();
        out.relabel(Label::Index(0), Label::Phys(Side::Ket));
        out.relabel(Label::Index(3), Label::Phys(Side::Bra));
        self.sites[q] = out;
        self.all_pauli &= c.is_pauli();
        self.all_parity &= c.preserves_flip_parity();
        self.all_z_diagonal &= c.is_z_diagonal();
    }

    /// Applies `c` to every data qubit; the ancilla stays noiseless.
    pub fn apply_channel(&mut self, c: &Channel<T>) {
        for q in 0..self.sites.len() {
            self.apply_channel_at(q, c);
        }
    }

    /// Left-multiplies the ket side of site `q` by `m`.
    pub fn apply_ket_operator(&mut self, q: usize, m: &Mat2<T>) {
        self.sites[q] = ket_operator(&self.sites[q], m);
        self.logical_insertions_only = false;
    }

    /// Absorbs the ket-side projector `(I + sign·S_k)/2` of check `k`: one
    /// `W(±P)` per site, sign on the first chain tensor.
    pub fn apply_check(&mut self, k: usize, sign: i8) {
        let repeated = matches!(self.states[k], CheckState::Measured(_));
        let role_label = if repeated {
            self.repeats[k] += 1;
            Label::Check { id: k as u32, role: Role::Repeat(self.repeats[k]) }
        } else {
            Label::Check { id: k as u32, role: Role::Meas }
        };
        for (pos, (site, t)) in check_projector_network::<T>(&self.layout.checks[k], sign).into_iter().enumerate() {
            let q = self.layout.qubit(site);
            let mut w = t.fix_virtual_to_shared(role_label);
            if pos == 0 {
                w.scale_real(T::lit(0.5));
            }
            self.sites[q] = apply_ket_matrix(&self.sites[q], &w);
        }
        if !repeated {
            self.states[k] = CheckState::Measured(sign);
        }
    }

    /// Records that check `k` is not applied and reads +1.
    pub fn mark_implicit(&mut self, k: usize) {
        self.states[k] = CheckState::Implicit;
    }

    /// The strongest exact reduction valid for the current network.
    pub fn auto_reduction(&self) -> Reduction {
        if !self.logical_insertions_only || self.repeats.iter().any(|&r| r > 0) {
            Reduction::General
        } else if self.all_pauli {
            Reduction::Pauli
        } else if self.all_parity {
            Reduction::FlipParity
        } else {
            Reduction::General
        }
    }

    /// Site `q` with physical indices traced, after inserting `insert` on the
    /// ket side, under the given ancilla policy and reduction.
    pub fn capped_site(&self, q: usize, insert: Option<&Mat2<T>>, policy: AncillaPolicy, red: Reduction) -> Tensor<T> {
        let b = match insert {
            Some(m) => ket_operator(&self.sites[q], m),
            None => self.sites[q].clone(),
        };
        cap(&b, &self.states, policy, red, &self.layout)
    }

    /// Capped site with check `k` trial-projected with `sign` (not committed).
    pub fn capped_site_with_trial(&self, q: usize, k: usize, sign: i8, policy: AncillaPolicy, red: Reduction) -> Tensor<T> {
        let mut b = self.sites[q].clone();
        let label = Label::Check { id: k as u32, role: Role::Meas };
        for (pos, (site, t)) in check_projector_network::<T>(&self.layout.checks[k], sign).into_iter().enumerate() {
            if self.layout.qubit(site) == q {
                let mut w = t.fix_virtual_to_shared(label);
                if pos == 0 {
                    w.scale_real(T::lit(0.5));
                }
                b = apply_ket_matrix(&b, &w);
            }
        }
        let mut states = self.states.clone();
        states[k] = CheckState::Measured(sign);
        cap(&b, &states, policy, red, &self.layout)
    }

    /// Constant log-factor removed by `red` (each X-check variable fixed under
    /// the Pauli reduction was a sum of two equal terms).
    pub fn reduction_log_scale(&self, red: Reduction) -> T {
        match red {
            Reduction::Pauli => {
                let nx = self.layout.checks.iter().filter(|c| c.kind == CheckKind::X).count();
                T::lit(nx as f64 * std::f64::consts::LN_2)
            }
            _ => T::zero(),
        }
    }

    /// Caps every site, optionally inserting the ket-side operator of a
    /// Pauli string (phase-free, Y as the Hermitian Pauli).
    pub fn capped(&self, insert: Option<&PauliString>, policy: AncillaPolicy, red: Reduction) -> CappedNetwork<T> {
        let sites = (0..self.sites.len())
            .map(|q| {
                let m = insert.and_then(|p| match p.get(q) {
                    Pauli::I => None,
                    other => Some(pauli_matrix::<T>(other.index())),
                });
                self.capped_site(q, m.as_ref(), policy, red)
            })
            .collect();
        CappedNetwork {
            width: self.layout.width,
            length: self.layout.length,
            sites,
            free: free_labels(policy),
            log_scale: self.reduction_log_scale(red),
            supports: self.supports.clone(),
        }
    }
}

pub fn free_labels(policy: AncillaPolicy) -> Vec<Label> {
    match policy {
        AncillaPolicy::Trace => vec![],
        AncillaPolicy::Keep => vec![Label::Ancilla(Side::Ket), Label::Ancilla(Side::Bra)],
    }
}

fn ket_operator<T: Real>(b: &Tensor<T>, m: &Mat2<T>) -> Tensor<T> {
    let mt = Tensor::matrix(2, 2, m.to_vec()).unwrap();
    apply_ket_matrix(b, &mt)
}

impl<T: Real> Tensor<T> {
    /// Replaces every `Virtual` label of a chain tensor by one shared label,
    /// keeping only the first virtual index (all of them carry equal values on
    /// the support of `W`).
    fn fix_virtual_to_shared(&self, label: Label) -> Tensor<T> {
        let mut t = self.clone();
        while t.labels().iter().filter(|l| matches!(l, Label::Virtual(_))).count() > 1 {
            let axes: Vec<usize> = t
                .labels()
                .iter()
                .enumerate()
                .filter(|(_, l)| matches!(l, Label::Virtual(_)))
                .map(|(i, _)| i)
                .collect();
            t = t.merge_diagonal(axes[0], axes[1]);
        }
        let ax = t.labels().iter().position(|l| matches!(l, Label::Virtual(_))).unwrap();
        let from = t.labels()[ax];
        t.relabel(from, label);
        t
    }
}

/// Keeps entries whose `c` value equals `a ⊕ b`, removing `c`.
fn xor_restrict<T: Real>(t: &Tensor<T>, a: usize, b: usize, c: usize) -> Tensor<T> {
    let mut shape = t.shape().to_vec();
    shape.remove(c);
    let mut labels = t.labels().to_vec();
    labels.remove(c);
    let rank = t.rank();
    let out_pos = |ax: usize| if ax > c { ax - 1 } else { ax };
    let (ao, bo) = (out_pos(a), out_pos(b));
    let mut full = vec![0usize; rank];
    Tensor::from_fn(shape, |idx| {
        let mut j = 0;
        for (ax, slot) in full.iter_mut().enumerate() {
            if ax == c {
                *slot = idx[ao] ^ idx[bo];
            } else {
                *slot = idx[j];
                j += 1;
            }
        }
        t.get(&full)
    })
    .with_labels(labels)
    .unwrap()
}

fn cap<T: Real>(b: &Tensor<T>, states: &[CheckState], policy: AncillaPolicy, red: Reduction, layout: &CodeLayout) -> Tensor<T> {
    let ak = b.axis(Label::Phys(Side::Ket)).unwrap();
    let ab = b.axis(Label::Phys(Side::Bra)).unwrap();
    let mut t = partial_trace(b, &[(ak, ab)]).unwrap();
    if policy == AncillaPolicy::Trace {
        if let (Some(x), Some(y)) = (t.axis(Label::Ancilla(Side::Ket)), t.axis(Label::Ancilla(Side::Bra))) {
            t = t.merge_diagonal(x, y);
        }
    }
    if red == Reduction::General {
        return t;
    }
    let ids: Vec<u32> = t
        .labels()
        .iter()
        .filter_map(|l| match l {
            Label::Check { id, role: Role::Ket } => Some(*id),
            _ => None,
        })
        .collect();
    for id in ids {
        debug_assert_eq!(layout.checks[id as usize].kind, CheckKind::X);
        let ket = Label::Check { id, role: Role::Ket };
        let bra = Label::Check { id, role: Role::Bra };
        let meas = Label::Check { id, role: Role::Meas };
        let measured = matches!(states[id as usize], CheckState::Measured(_));
        match (red, measured) {
            (Reduction::FlipParity, false) => {
                t = t.merge_diagonal(t.axis(ket).unwrap(), t.axis(bra).unwrap());
            }
            (Reduction::FlipParity, true) => {
                t = xor_restrict(&t, t.axis(ket).unwrap(), t.axis(bra).unwrap(), t.axis(meas).unwrap());
            }
            (Reduction::Pauli, false) => {
                t = t.fix(t.axis(ket).unwrap(), 0);
                t = t.fix(t.axis(bra).unwrap(), 0);
            }
            (Reduction::Pauli, true) => {
                t = t.fix(t.axis(bra).unwrap(), 0);
                t = t.merge_diagonal(t.axis(ket).unwrap(), t.axis(meas).unwrap());
            }
            (Reduction::General, _) => unreachable!(),
        }
    }
    t
}

/// Dense 2^n × 2^n matrix of the chain contraction of a projector network,
/// qubits ordered as in `sites` (first site most significant).
pub fn chain_to_dense<T: Real>(chain: &[(Site, Tensor<T>)]) -> Vec<C<T>> {
    let n = chain.len();
    let dim = 1usize << n;
    let mut out = vec![czero::<T>(); dim * dim];
    for v in 0..2usize {
        for row in 0..dim {
            for col in 0..dim {
                let mut prod = C::new(T::one(), T::zero());
                for (k, (_, t)) in chain.iter().enumerate() {
                    let i = (row >> (n - 1 - k)) & 1;
                    let j = (col >> (n - 1 - k)) & 1;
                    let mut idx = vec![i, j];
                    idx.extend(std::iter::repeat_n(v, t.rank() - 2));
                    prod *= t.get(&idx);
                }
                out[row * dim + col] += prod;
            }
        }
    }
    out
}
