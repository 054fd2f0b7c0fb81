//! Single-qubit channels in Kraus, superoperator and χ-matrix form, plus the
//! Pauli twirl and the honest Pauli approximation.
//!
//! Pauli basis order is {I, X, Y, Z}; `E(ρ) = Σ χ_ab P_a ρ P_b` with Tr χ = 1
//! for trace-preserving maps.

use crate::linalg;
use crate::qp::Qp;
use crate::scalar::{czero, Real, C};
use crate::tensor::Tensor;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("internal error: {0}")]
    Internal(String),
}

/// 2×2 complex matrix, row-major.
pub type Mat2<T> = [C<T>; 4];

pub fn mat2<T: Real>(a: [(f64, f64); 4]) -> Mat2<T> {
    a.map(|(re, im)| C::new(T::lit(re), T::lit(im)))
}

pub fn pauli_matrix<T: Real>(i: usize) -> Mat2<T> {
    match i {
        0 => mat2([(1., 0.), (0., 0.), (0., 0.), (1., 0.)]),
        1 => mat2([(0., 0.), (1., 0.), (1., 0.), (0., 0.)]),
        2 => mat2([(0., 0.), (0., -1.), (0., 1.), (0., 0.)]),
        3 => mat2([(1., 0.), (0., 0.), (0., 0.), (-1., 0.)]),
        _ => panic!("Pauli index {i} out of range"),
    }
}

pub fn mat2_mul<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

pub fn mat2_dagger<T: Real>(a: &Mat2<T>) -> Mat2<T> {
    [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()]
}

fn mat2_trace<T: Real>(a: &Mat2<T>) -> C<T> {
    a[0] + a[3]
}

/// The physical noise models plus generic Pauli channels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    AmplitudeDamping { gamma: f64 },
    SystematicRotation { theta: f64 },
    Depolarizing { epsilon: f64 },
    /// Z applied with probability `p`.
    PhaseFlip { p: f64 },
    /// X applied with probability `p`.
    BitFlip { p: f64 },
}

impl NoiseModel {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::AmplitudeDamping { .. } => "amplitude_damping",
            NoiseModel::SystematicRotation { .. } => "systematic_rotation",
            NoiseModel::Depolarizing { .. } => "depolarizing",
            NoiseModel::PhaseFlip { .. } => "phase_flip",
            NoiseModel::BitFlip { .. } => "bit_flip",
        }
    }

    pub fn parameter(&self) -> f64 {
        match *self {
            NoiseModel::AmplitudeDamping { gamma } => gamma,
            NoiseModel::SystematicRotation { theta } => theta,
            NoiseModel::Depolarizing { epsilon } => epsilon,
            NoiseModel::PhaseFlip { p } | NoiseModel::BitFlip { p } => p,
        }
    }

    /// Same model with a different strength parameter.
    pub fn with_parameter(&self, v: f64) -> NoiseModel {
        match self {
            NoiseModel::AmplitudeDamping { .. } => NoiseModel::AmplitudeDamping { gamma: v },
            NoiseModel::SystematicRotation { .. } => NoiseModel::SystematicRotation { theta: v },
            NoiseModel::Depolarizing { .. } => NoiseModel::Depolarizing { epsilon: v },
            NoiseModel::PhaseFlip { .. } => NoiseModel::PhaseFlip { p: v },
            NoiseModel::BitFlip { .. } => NoiseModel::BitFlip { p: v },
        }
    }

    pub fn from_name(name: &str, v: f64) -> Result<NoiseModel, NoiseError> {
        Ok(match name {
            "amplitude_damping" | "ad" => NoiseModel::AmplitudeDamping { gamma: v },
            "systematic_rotation" | "sr" => NoiseModel::SystematicRotation { theta: v },
            "depolarizing" | "dp" => NoiseModel::Depolarizing { epsilon: v },
            "phase_flip" => NoiseModel::PhaseFlip { p: v },
            "bit_flip" => NoiseModel::BitFlip { p: v },
            _ => return Err(NoiseError::Argument(format!("unknown channel kind '{name}'"))),
        })
    }
}

/// Which approximation of the physical channel to simulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Approximation {
    #[default]
    Exact,
    Pta,
    Hpa,
}

impl Approximation {
    pub fn name(self) -> &'static str {
        match self {
            Approximation::Exact => "exact",
            Approximation::Pta => "pta",
            Approximation::Hpa => "hpa",
        }
    }

    pub fn apply<T: Real>(self, c: &Channel<T>) -> Result<Channel<T>, NoiseError> {
        match self {
            Approximation::Exact => Ok(c.clone()),
            Approximation::Pta => Ok(pauli_twirl(c)),
            Approximation::Hpa => honest_pauli_approx(c),
        }
    }
}

/// Trace-preserving single-qubit channel.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel<T: Real> {
    kraus: Vec<Mat2<T>>,
    chi: [[C<T>; 4]; 4],
}

const TP_TOL: f64 = 1e-12;
const STRUCTURE_TOL: f64 = 1e-13;

impl<T: Real> Channel<T> {
    pub fn from_kraus(kraus: Vec<Mat2<T>>) -> Result<Self, NoiseError> {
        if kraus.is_empty() {
            return Err(NoiseError::Argument("no Kraus operators".into()));
        }
        let mut sum = [czero::<T>(); 4];
        for k in &kraus {
            let kk = mat2_mul(&mat2_dagger(k), k);
            for i in 0..4 {
                sum[i] += kk[i];
            }
        }
        let id = pauli_matrix::<T>(0);
        let dev = (0..4).map(|i| (sum[i] - id[i]).norm()).fold(T::zero(), T::max);
        if dev > T::lit(TP_TOL).max(T::epsilon() * T::lit(64.0)) {
            return Err(NoiseError::Argument(format!("Kraus operators are not trace preserving (deviation {dev})")));
        }
        let chi = chi_from_kraus(&kraus);
        Ok(Self { kraus, chi })
    }

    pub fn identity() -> Self {
        Self::from_kraus(vec![pauli_matrix(0)]).unwrap()
    }

    pub fn unitary(u: Mat2<T>) -> Result<Self, NoiseError> {
        Self::from_kraus(vec![u])
    }

    /// Pauli channel with flip probabilities (p_x, p_y, p_z).
    pub fn pauli(px: T, py: T, pz: T) -> Result<Self, NoiseError> {
        let p = [T::one() - px - py - pz, px, py, pz];
        let neg = T::lit(-1e-15);
        if p.iter().any(|&v| v < neg) {
            return Err(NoiseError::Argument(format!("invalid Pauli probabilities {p:?}")));
        }
        let kraus = (0..4)
            .filter(|&i| p[i] > T::zero())
            .map(|i| pauli_matrix::<T>(i).map(|z| z * p[i].max(T::zero()).sqrt()))
            .collect::<Vec<_>>();
        let mut chi = [[czero::<T>(); 4]; 4];
        for i in 0..4 {
            chi[i][i] = C::new(p[i].max(T::zero()), T::zero());
        }
        Ok(Self { kraus: if kraus.is_empty() { vec![pauli_matrix(0)] } else { kraus }, chi })
    }

    /// Builds a channel from its χ matrix via eigendecomposition.
    pub fn from_chi(chi: [[C<T>; 4]; 4]) -> Result<Self, NoiseError> {
        let flat: Vec<C<T>> = chi.iter().flat_map(|r| r.iter().copied()).collect();
        let (vals, vecs) = linalg::eigh(&flat, 4);
        let floor = T::lit(-1e-12);
        if vals.iter().any(|&v| v < floor) {
            return Err(NoiseError::Argument(format!("χ is not positive semidefinite: {vals:?}")));
        }
        let mut kraus = Vec::new();
        for (col, &v) in vals.iter().enumerate() {
            if v <= T::zero() {
                continue;
            }
            let s = v.sqrt();
            let mut k = [czero::<T>(); 4];
            for a in 0..4 {
                let p = pauli_matrix::<T>(a);
                let coef = vecs[a * 4 + col] * s;
                for i in 0..4 {
                    k[i] += p[i] * coef;
                }
            }
            kraus.push(k);
        }
        let mut ch = Self::from_kraus(kraus)?;
        ch.chi = chi;
        Ok(ch)
    }

    /// Builds a channel from its superoperator tensor E_{ijj'i'}.
    pub fn from_superoperator(e: &Tensor<T>) -> Result<Self, NoiseError> {
        if e.shape() != [2, 2, 2, 2] {
            return Err(NoiseError::Argument(format!("superoperator shape {:?}", e.shape())));
        }
        Self::from_chi(chi_from_superoperator(e))
    }

    pub fn kraus(&self) -> &[Mat2<T>] {
        &self.kraus
    }

    pub fn chi(&self) -> &[[C<T>; 4]; 4] {
        &self.chi
    }

    /// Diagonal of χ as real probabilities (p_I, p_X, p_Y, p_Z).
    pub fn pauli_probabilities(&self) -> [T; 4] {
        [0, 1, 2, 3].map(|i| self.chi[i][i].re)
    }

    pub fn apply(&self, rho: &Mat2<T>) -> Mat2<T> {
        let mut out = [czero::<T>(); 4];
        for k in &self.kraus {
            let t = mat2_mul(&mat2_mul(k, rho), &mat2_dagger(k));
            for i in 0..4 {
                out[i] += t[i];
            }
        }
        out
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Channel<T>) -> Channel<T> {
        let mut kraus = Vec::new();
        for a in &self.kraus {
            for b in &first.kraus {
                kraus.push(mat2_mul(a, b));
            }
        }
        let chi = chi_from_kraus(&kraus);
        Channel { kraus, chi }
    }

    fn chi_scale(&self) -> T {
        self.chi.iter().flatten().fold(T::zero(), |m, z| m.max(z.norm())).max(T::min_positive_value())
    }

    /// χ is diagonal: the channel is a Pauli channel.
    pub fn is_pauli(&self) -> bool {
        let tol = T::lit(STRUCTURE_TOL) * self.chi_scale();
        (0..4).all(|a| (0..4).all(|b| a == b || self.chi[a][b].norm() <= tol))
    }

    /// χ has no cross terms between {I, Z} and {X, Y}: the channel maps
    /// `|b⟩⟨b'|` only onto operators with the same bit-flip parity `b ⊕ b'`.
    pub fn preserves_flip_parity(&self) -> bool {
        let tol = T::lit(STRUCTURE_TOL) * self.chi_scale();
        let even = [0usize, 3];
        let odd = [1usize, 2];
        even.iter().all(|&a| odd.iter().all(|&b| self.chi[a][b].norm() <= tol && self.chi[b][a].norm() <= tol))
    }

    /// All Kraus operators are diagonal, so the channel commutes with every
    /// Z-type check.
    pub fn is_z_diagonal(&self) -> bool {
        let tol = T::lit(STRUCTURE_TOL) * self.chi_scale();
        (0..4).all(|a| (0..4).all(|b| (a == 0 || a == 3) && (b == 0 || b == 3) || self.chi[a][b].norm() <= tol))
    }
}

fn pauli_coefficients<T: Real>(k: &Mat2<T>) -> [C<T>; 4] {
    let half = T::lit(0.5);
    [0, 1, 2, 3].map(|a| mat2_trace(&mat2_mul(&pauli_matrix::<T>(a), k)) * half)
}

fn chi_from_kraus<T: Real>(kraus: &[Mat2<T>]) -> [[C<T>; 4]; 4] {
    let mut chi = [[czero::<T>(); 4]; 4];
    for k in kraus {
        let co = pauli_coefficients(k);
        for a in 0..4 {
            for b in 0..4 {
                chi[a][b] += co[a] * co[b].conj();
            }
        }
    }
    chi
}

fn chi_from_superoperator<T: Real>(e: &Tensor<T>) -> [[C<T>; 4]; 4] {
    let quarter = T::lit(0.25);
    let mut chi = [[czero::<T>(); 4]; 4];
    for a in 0..4 {
        let pa = pauli_matrix::<T>(a);
        for b in 0..4 {
            let pb = pauli_matrix::<T>(b);
            let mut s = czero::<T>();
            for i in 0..2 {
                for j in 0..2 {
                    for jp in 0..2 {
                        for ip in 0..2 {
                            s += e.get(&[i, j, jp, ip]) * pa[i * 2 + j].conj() * pb[jp * 2 + ip].conj();
                        }
                    }
                }
            }
            chi[a][b] = s * quarter;
        }
    }
    chi
}

/// Constructs one of the physical noise models.
pub fn make_channel<T: Real>(model: &NoiseModel) -> Result<Channel<T>, NoiseError> {
    let unit = |name: &str, v: f64| {
        if !(0.0..=1.0).contains(&v) || v.is_nan() {
            Err(NoiseError::Argument(format!("{name} = {v} outside [0, 1]")))
        } else {
            Ok(())
        }
    };
    match *model {
        NoiseModel::AmplitudeDamping { gamma } => {
            unit("gamma", gamma)?;
            let k0 = mat2([(1., 0.), (0., 0.), (0., 0.), ((1.0 - gamma).sqrt(), 0.)]);
            let k1 = mat2([(0., 0.), (gamma.sqrt(), 0.), (0., 0.), (0., 0.)]);
            Channel::from_kraus(vec![k0, k1])
        }
        NoiseModel::SystematicRotation { theta } => {
            if !(0.0..std::f64::consts::PI).contains(&theta) {
                return Err(NoiseError::Argument(format!("theta = {theta} outside [0, π)")));
            }
            let (s, c) = theta.sin_cos();
            // e^{-iθZ} = diag(e^{-iθ}, e^{iθ})
            Channel::unitary(mat2([(c, -s), (0., 0.), (0., 0.), (c, s)]))
        }
        NoiseModel::Depolarizing { epsilon } => {
            unit("epsilon", epsilon)?;
            let e3 = T::lit(epsilon / 3.0);
            Channel::pauli(e3, e3, e3)
        }
        NoiseModel::PhaseFlip { p } => {
            unit("p", p)?;
            Channel::pauli(T::zero(), T::zero(), T::lit(p))
        }
        NoiseModel::BitFlip { p } => {
            unit("p", p)?;
            Channel::pauli(T::lit(p), T::zero(), T::zero())
        }
    }
}

/// Superoperator tensor `E_{ijj'i'} = ⟨i|E(|j⟩⟨j'|)|i'⟩`.
pub fn to_superoperator<T: Real>(c: &Channel<T>) -> Tensor<T> {
    Tensor::from_fn(vec![2, 2, 2, 2], |idx| {
        let (i, j, jp, ip) = (idx[0], idx[1], idx[2], idx[3]);
        c.kraus.iter().map(|k| k[i * 2 + j] * k[ip * 2 + jp].conj()).sum()
    })
}

/// The 4×4 χ matrix in the Pauli basis {I, X, Y, Z}.
pub fn chi_matrix<T: Real>(c: &Channel<T>) -> [[C<T>; 4]; 4] {
    c.chi
}

/// Drops the off-diagonal part of χ.
pub fn pauli_twirl<T: Real>(c: &Channel<T>) -> Channel<T> {
    let p = c.pauli_probabilities();
    let sum = p[0] + p[1] + p[2] + p[3];
    let clamp = |v: T| (v / sum).max(T::zero());
    Channel::pauli(clamp(p[1]), clamp(p[2]), clamp(p[3])).expect("diagonal of a valid χ is a distribution")
}

/// Version tag of the fixed honesty input sample.
pub const HONESTY_SAMPLE_VERSION: u32 = 1;
const HONESTY_FIBONACCI_POINTS: usize = 200;

/// Bloch vectors of the pure inputs on which honesty is enforced: 200
/// Fibonacci-lattice points plus the six cardinal states.
pub fn honesty_inputs() -> Vec<[f64; 3]> {
    let n = HONESTY_FIBONACCI_POINTS;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut pts: Vec<[f64; 3]> = (0..n)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect();
    pts.extend([[1., 0., 0.], [-1., 0., 0.], [0., 1., 0.], [0., -1., 0.], [0., 0., 1.], [0., 0., -1.]]);
    pts
}

fn bloch_state<T: Real>(r: &[f64; 3]) -> Mat2<T> {
    mat2([
        ((1.0 + r[2]) / 2.0, 0.0),
        (r[0] / 2.0, -r[1] / 2.0),
        (r[0] / 2.0, r[1] / 2.0),
        ((1.0 - r[2]) / 2.0, 0.0),
    ])
}

fn bloch_of<T: Real>(rho: &Mat2<T>) -> [T; 3] {
    let two = T::lit(2.0);
    [rho[1].re * two, rho[2].im * two, rho[0].re - rho[3].re]
}

/// Squared Bloch distance `|r − E(r)|²` (four times the squared trace
/// distance) for each honesty input.
fn honesty_targets<T: Real>(c: &Channel<T>, inputs: &[[f64; 3]]) -> Vec<T> {
    inputs
        .iter()
        .map(|r| {
            let out = bloch_of(&c.apply(&bloch_state::<T>(r)));
            (0..3).map(|i| (T::lit(r[i]) - out[i]).powi(2)).sum()
        })
        .collect()
}

/// `u_i = 1 − λ_i` for a Pauli channel with flip probabilities p.
fn shrink<T: Real>(p: &[T; 3]) -> [T; 3] {
    let two = T::lit(2.0);
    [two * (p[1] + p[2]), two * (p[0] + p[2]), two * (p[0] + p[1])]
}

/// Gradient of u with respect to p: row i holds ∂u_i/∂p.
const SHRINK_JACOBIAN: [[f64; 3]; 3] = [[0., 2., 2.], [2., 0., 2.], [2., 2., 0.]];

fn honesty_margins<T: Real>(p: &[T; 3], inputs: &[[f64; 3]], targets: &[T]) -> Vec<T> {
    let u = shrink(p);
    inputs
        .iter()
        .zip(targets)
        .map(|(r, &t)| (0..3).map(|i| u[i] * u[i] * T::lit(r[i] * r[i])).sum::<T>() - t)
        .collect()
}

/// Smallest honesty margin `D_A(ρ) − D_E(ρ)` (in trace distance) of the Pauli
/// channel `a` with respect to `c` over the fixed input sample.
pub fn honesty_margin<T: Real>(a: &Channel<T>, c: &Channel<T>) -> T {
    let inputs = honesty_inputs();
    let half = T::lit(0.5);
    inputs
        .iter()
        .map(|r| {
            let rho = bloch_state::<T>(r);
            let ra = bloch_of(&a.apply(&rho));
            let rc = bloch_of(&c.apply(&rho));
            let da: T = (0..3).map(|i| (T::lit(r[i]) - ra[i]).powi(2)).sum::<T>().sqrt() * half;
            let dc: T = (0..3).map(|i| (T::lit(r[i]) - rc[i]).powi(2)).sum::<T>().sqrt() * half;
            da - dc
        })
        .fold(T::infinity(), T::min)
}

/// Nearest Pauli channel (in χ Frobenius distance) whose output is at least as
/// far, in trace distance, from every sampled pure input as the output of `c`.
///
/// The honest set is not convex in the flip probabilities, so the problem is
/// solved by a convex-concave iteration: each honesty constraint
/// `Σ u_i² r_i² ≥ |r − E(r)|²` is replaced by its tangent lower bound at the
/// current iterate (an inner approximation) and the resulting QP is solved
/// exactly. Several feasible starting points from a fixed grid are refined and
/// the best result is kept.
pub fn honest_pauli_approx<T: Real>(c: &Channel<T>) -> Result<Channel<T>, NoiseError> {
    let inputs = honesty_inputs();
    let targets = honesty_targets(c, &inputs);
    let probs = c.pauli_probabilities();
    let tw = [probs[1], probs[2], probs[3]];
    let feasible = |p: &[T; 3], slack: T| honesty_margins(p, &inputs, &targets).iter().all(|&m| m >= -slack);
    if feasible(&tw, T::lit(1e-13)) && tw.iter().all(|&v| v >= T::zero()) {
        return pauli_twirl_checked(tw);
    }
    // objective: (p0 - t0)² + Σ (p_i - t_i)², p0 = 1 - Σ p_i
    let h: Vec<T> = (0..9).map(|k| if k % 4 == 0 { T::lit(4.0) } else { T::lit(2.0) }).collect();
    let t0 = probs[0];
    let g: Vec<T> = (0..3).map(|i| T::lit(-2.0) * (T::one() - t0) - T::lit(2.0) * tw[i]).collect();
    let objective = |p: &[T; 3]| {
        let p0 = T::one() - p[0] - p[1] - p[2];
        (p0 - t0).powi(2) + (0..3).map(|i| (p[i] - tw[i]).powi(2)).sum::<T>()
    };
    // feasible starting points from a grid over the probability simplex
    let steps = 24;
    let mut starts: Vec<(T, [T; 3])> = Vec::new();
    for a in 0..=steps {
        for b in 0..=steps - a {
            for d in 0..=steps - a - b {
                let p = [a, b, d].map(|v| T::lit(v as f64 / steps as f64));
                if feasible(&p, T::zero()) {
                    starts.push((objective(&p), p));
                }
            }
        }
    }
    if starts.is_empty() {
        return Err(NoiseError::Internal("no honest Pauli channel found on the start grid".into()));
    }
    starts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut best: Option<(T, [T; 3])> = None;
    for &(_, p0) in starts.iter().take(6) {
        let p = refine_honest(p0, &inputs, &targets, &h, &g);
        let val = objective(&p);
        if best.is_none_or(|(b, _)| val < b) {
            best = Some((val, p));
        }
    }
    let (_, p) = best.unwrap();
    pauli_twirl_checked(p)
}

fn pauli_twirl_checked<T: Real>(p: [T; 3]) -> Result<Channel<T>, NoiseError> {
    let p = p.map(|v| v.max(T::zero()));
    Channel::pauli(p[0], p[1], p[2]).map_err(|e| NoiseError::Internal(e.to_string()))
}

fn refine_honest<T: Real>(start: [T; 3], inputs: &[[f64; 3]], targets: &[T], h: &[T], g: &[T]) -> [T; 3] {
    let mut p = start;
    for _ in 0..200 {
        let u = shrink(&p);
        let mut rows: Vec<Vec<T>> = Vec::with_capacity(inputs.len() + 4);
        let mut rhs: Vec<T> = Vec::with_capacity(inputs.len() + 4);
        for (r, &t) in inputs.iter().zip(targets) {
            // Σ r_i² (2 u0_i u_i(p) − u0_i²) ≥ t
            let mut row = vec![T::zero(); 3];
            let mut cst = T::zero();
            for i in 0..3 {
                let w = T::lit(r[i] * r[i]);
                for (j, rj) in row.iter_mut().enumerate() {
                    *rj += w * T::lit(2.0) * u[i] * T::lit(SHRINK_JACOBIAN[i][j]);
                }
                cst += w * u[i] * u[i];
            }
            rows.push(row);
            rhs.push(t + cst);
        }
        for i in 0..3 {
            let mut row = vec![T::zero(); 3];
            row[i] = T::one();
            rows.push(row);
            rhs.push(T::zero());
        }
        rows.push(vec![-T::one(); 3]);
        rhs.push(-T::one());
        let qp = Qp { n: 3, h, g, a: &rows, b: &rhs };
        let next = qp.solve(&p);
        let next = [next[0], next[1], next[2]];
        let delta = (0..3).map(|i| (next[i] - p[i]).abs()).fold(T::zero(), T::max);
        p = next;
        if delta < T::lit(1e-14) {
            break;
        }
    }
    p
}
