//! One round of error correction on the density network: noise, sequential
//! syndrome sampling, logical process matrix, decoding and scoring.

use crate::contraction::exact::{check_memory, right_envs};
use crate::contraction::{contract, ContractionConfig, ContractionError, Diagnostics, Engine, Env, ScaledReal, Zipper};
use crate::layout::{recovery_pauli, CheckKind, CodeLayout, LayoutError, Syndrome};
use crate::metrics;
use crate::noise::{pauli_matrix, Channel};
use crate::peps::{build_bell_density_network, AncillaPolicy, CappedNetwork, DensityNetwork, Reduction};
use crate::pauli::Pauli;
use crate::scalar::Real;
use crate::tensor::{Label, Side, Tensor};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on conditional probabilities before they count as inconsistent.
pub const PROBABILITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EcError {
    #[error(transparent)]
    Contraction(#[from] ContractionError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("numerical inconsistency: {0}")]
    Numerical(String),
}

/// Logical channel as the 4×4 real matrix `C_ij = Tr[(P_i ⊗ P_j) J]` of its
/// Bell-state image, normalized so `C_00 = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessMatrix {
    pub c: [[f64; 4]; 4],
    /// `ln Tr(Π_s ρ)` of the unnormalized contraction.
    pub log_norm: f64,
}

/// Process matrix of the identity channel for the `|00⟩ + |11⟩` convention.
pub const IDENTITY_C: [[f64; 4]; 4] = [[1., 0., 0., 0.], [0., 1., 0., 0.], [0., 0., -1., 0.], [0., 0., 0., 1.]];

impl ProcessMatrix {
    pub fn identity() -> Self {
        Self { c: IDENTITY_C, log_norm: 0.0 }
    }

    /// Applies the logical Pauli `d` after the channel.
    pub fn then_pauli(&self, d: Pauli) -> Self {
        let mut c = self.c;
        for (i, row) in c.iter_mut().enumerate() {
            let s = d.commutation_sign(Pauli::from_index(i)) as f64;
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        Self { c, log_norm: self.log_norm }
    }

    /// Pauli transfer matrix `R_ij = ½ Tr(P_i E(P_j))`.
    pub fn transfer_matrix(&self) -> [[f64; 4]; 4] {
        let s = [1.0, 1.0, -1.0, 1.0];
        let mut r = self.c;
        for row in r.iter_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v *= s[j];
            }
        }
        r
    }

    pub fn from_transfer_matrix(r: [[f64; 4]; 4]) -> Self {
        let s = [1.0, 1.0, -1.0, 1.0];
        let mut c = r;
        for row in c.iter_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v *= s[j];
            }
        }
        Self { c, log_norm: 0.0 }
    }

    /// Process matrix of a single-qubit channel.
    pub fn of_channel<T: Real>(ch: &Channel<T>) -> Self {
        let mut r = [[0.0; 4]; 4];
        for j in 0..4 {
            let out = ch.apply(&pauli_matrix::<T>(j));
            for (i, row) in r.iter_mut().enumerate() {
                let p = pauli_matrix::<T>(i);
                // ½ Tr(P_i · out)
                let tr = p[0] * out[0] + p[1] * out[2] + p[2] * out[1] + p[3] * out[3];
                row[j] = 0.5 * tr.re.to_f64_lossy();
            }
        }
        Self::from_transfer_matrix(r)
    }
}

/// Result of one error-correction round.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundResult {
    pub syndrome: Syndrome,
    pub raw_channel: ProcessMatrix,
    pub correction: Pauli,
    pub decoded_channel: ProcessMatrix,
    pub error_2norm: f64,
    pub error_diamond: f64,
    /// `ln` of the sampled syndrome probability.
    pub log_probability: f64,
    pub diagnostics: Diagnostics,
}

/// Applies `c` to every data qubit of `net`; the ancilla is noiseless.
pub fn apply_noise<T: Real>(net: &mut DensityNetwork<T>, c: &Channel<T>) {
    net.apply_channel(c);
}

/// Applies `c` to the single data qubit `q`.
pub fn apply_noise_at<T: Real>(net: &mut DensityNetwork<T>, q: usize, c: &Channel<T>) {
    net.apply_channel_at(q, c);
}

fn reduction<T: Real>(net: &DensityNetwork<T>, cfg: &ContractionConfig) -> Reduction {
    if cfg.fast_paths {
        net.auto_reduction()
    } else {
        Reduction::General
    }
}

/// `Tr ρ` of the network with the ancilla traced.
pub fn network_trace<T: Real>(net: &DensityNetwork<T>, cfg: &ContractionConfig) -> Result<ScaledReal<T>, EcError> {
    let capped = net.capped(None, AncillaPolicy::Trace, reduction(net, cfg));
    Ok(contract(&capped, cfg)?.0.real_value())
}

/// Applies the projectors of every outcome of `s` (no sampling).
pub fn project_syndrome<T: Real>(net: &mut DensityNetwork<T>, s: &Syndrome) {
    for (k, &m) in s.outcomes.iter().enumerate() {
        net.apply_check(k, m);
    }
}

/// Outcome of [`sample_syndrome`].
#[derive(Clone, Debug)]
pub struct SampledSyndrome {
    pub syndrome: Syndrome,
    /// `ln` of the product of the sampled conditionals.
    pub log_probability: f64,
    pub diagnostics: Diagnostics,
}

fn draw<T: Real, R: Rng + ?Sized>(q: T, k: usize, rng: &mut R) -> Result<(i8, T), EcError> {
    let qf = q.to_f64_lossy();
    if !(-PROBABILITY_TOLERANCE..=1.0 + PROBABILITY_TOLERANCE).contains(&qf) || !qf.is_finite() {
        return Err(EcError::Numerical(format!("conditional probability {qf} for check {k}")));
    }
    let q = q.max(T::zero()).min(T::one());
    let u: f64 = rng.gen();
    Ok(if u < q.to_f64_lossy() { (1, q) } else { (-1, T::one() - q) })
}

/// Measures every check in layout order, drawing each outcome from its
/// conditional probability and absorbing the signed projector.
///
/// Under noise diagonal in Z (and with fast paths enabled) Z-checks are not
/// applied and read +1.
pub fn sample_syndrome<T: Real, R: Rng + ?Sized>(
    net: &mut DensityNetwork<T>,
    rng: &mut R,
    cfg: &ContractionConfig,
) -> Result<SampledSyndrome, EcError> {
    cfg.validate()?;
    let skip_z = cfg.fast_paths && net.noise_is_z_diagonal();
    match cfg.engine {
        Engine::Exact => sample_exact(net, rng, cfg, skip_z),
        Engine::BoundaryMps => sample_generic(net, rng, cfg, skip_z),
    }
}

fn syndrome_from_states<T: Real>(net: &DensityNetwork<T>) -> Syndrome {
    use crate::peps::CheckState;
    Syndrome {
        outcomes: net
            .check_states()
            .iter()
            .map(|s| match s {
                CheckState::Measured(m) => *m,
                _ => 1,
            })
            .collect(),
    }
}

/// Full-contraction sampler: every conditional is a fresh contraction of
/// the whole network.
fn sample_generic<T: Real, R: Rng + ?Sized>(
    net: &mut DensityNetwork<T>,
    rng: &mut R,
    cfg: &ContractionConfig,
    skip_z: bool,
) -> Result<SampledSyndrome, EcError> {
    let red = reduction(net, cfg);
    let policy = AncillaPolicy::Trace;
    let mut capped = net.capped(None, policy, red);
    let (first, mut diag) = contract(&capped, cfg)?;
    let mut cur = first.real_value();
    let mut log_p = 0.0;
    for k in 0..net.layout().num_checks() {
        if skip_z && net.layout().checks[k].kind == CheckKind::Z {
            net.mark_implicit(k);
            continue;
        }
        let sites: Vec<usize> = net.layout().checks[k].qubits.iter().map(|&s| net.layout().qubit(s)).collect();
        let trial = |sign: i8, capped: &CappedNetwork<T>| {
            let mut c = capped.clone();
            for &q in &sites {
                c.sites[q] = net.capped_site_with_trial(q, k, sign, policy, red);
            }
            c
        };
        let plus = trial(1, &capped);
        let (vp, d) = contract(&plus, cfg)?;
        diag.merge(&d);
        let vp = vp.real_value();
        let (m, q) = draw(vp.ratio(&cur), k, rng)?;
        log_p += q.to_f64_lossy().ln();
        if m == 1 {
            capped = plus;
            cur = vp;
        } else {
            let minus = trial(-1, &capped);
            let (vm, d) = contract(&minus, cfg)?;
            diag.merge(&d);
            capped = minus;
            cur = vm.real_value();
        }
        net.apply_check(k, m);
    }
    Ok(SampledSyndrome { syndrome: syndrome_from_states(net), log_probability: log_p, diagnostics: diag })
}

/// Column-window sampler with cached left/right environments.
fn sample_exact<T: Real, R: Rng + ?Sized>(
    net: &mut DensityNetwork<T>,
    rng: &mut R,
    cfg: &ContractionConfig,
    skip_z: bool,
) -> Result<SampledSyndrome, EcError> {
    let red = reduction(net, cfg);
    let policy = AncillaPolicy::Trace;
    let layout = net.layout_arc().clone();
    let (w, l) = (layout.width, layout.length);
    let mut capped = net.capped(None, policy, red);
    check_memory(&capped, cfg, 4.0)?;
    let supports = capped.supports.clone();
    let free = capped.free.clone();
    let z = Zipper::new(&supports, &free);
    let right = right_envs(&capped, 0);
    let total = &right[0];
    let mut cur = ScaledReal { mantissa: total.tensor.value().re, log_scale: total.log_scale };
    if !(cur.mantissa > T::zero()) {
        return Err(EcError::Numerical("network trace is not positive".into()));
    }
    let mut log_p = 0.0;
    let mut left = Env::empty(w * l);
    let mut k = 0;
    let nchecks = layout.num_checks();
    for win in 0..l - 1 {
        let q = |r: usize, c: usize| r * l + c;
        // B[r]: strip rows r.. plus everything right of the strip
        let mut below: Vec<Env<T>> = vec![right[(win + 2).min(l)].clone(); w + 1];
        for r in (0..w).rev() {
            below[r] = z.absorb_all(&below[r + 1], [(q(r, win + 1), &capped.sites[q(r, win + 1)]), (q(r, win), &capped.sites[q(r, win)])]);
        }
        let mut top = left.clone();
        let mut top_row = 0;
        while k < nchecks && layout.window(k) == win {
            let check = &layout.checks[k];
            if skip_z && check.kind == CheckKind::Z {
                net.mark_implicit(k);
                k += 1;
                continue;
            }
            let (r0, r1) = (check.min_row(), check.max_row());
            while top_row < r0 {
                top = z.absorb_all(&top, [(q(top_row, win), &capped.sites[q(top_row, win)]), (q(top_row, win + 1), &capped.sites[q(top_row, win + 1)])]);
                top_row += 1;
            }
            let sites: Vec<usize> = check.qubits.iter().map(|&s| layout.qubit(s)).collect();
            let value = |sign: i8| -> (ScaledReal<T>, Vec<(usize, Tensor<T>)>) {
                let trial: Vec<(usize, Tensor<T>)> =
                    sites.iter().map(|&s| (s, net.capped_site_with_trial(s, k, sign, policy, red))).collect();
                let mut env = top.clone();
                for r in r0..=r1 {
                    for c in [win, win + 1] {
                        let s = q(r, c);
                        let t = trial.iter().find(|(x, _)| *x == s).map(|(_, t)| t).unwrap_or(&capped.sites[s]);
                        env = z.absorb(&env, s, t);
                    }
                }
                let full = z.join(&env, &below[r1 + 1]);
                (ScaledReal { mantissa: full.tensor.value().re, log_scale: full.log_scale }, trial)
            };
            let (vp, tp) = value(1);
            let (m, qv) = draw(vp.ratio(&cur), k, rng)?;
            log_p += qv.to_f64_lossy().ln();
            let (v, t) = if m == 1 { (vp, tp) } else { value(-1) };
            cur = v;
            for (s, tensor) in t {
                capped.sites[s] = tensor;
            }
            net.apply_check(k, m);
            k += 1;
        }
        if win + 2 < l {
            left = z.absorb_all(&left, (0..w).map(|r| (q(r, win), &capped.sites[q(r, win)])));
        }
    }
    debug_assert_eq!(k, nchecks);
    Ok(SampledSyndrome { syndrome: syndrome_from_states(net), log_probability: log_p, diagnostics: Diagnostics::default() })
}

fn ancilla_matrix<T: Real>(t: &Tensor<T>) -> [[num_complex::Complex<f64>; 2]; 2] {
    let mut a = [[num_complex::Complex::new(0.0, 0.0); 2]; 2];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let z = t.get(&[i, j]);
            *v = num_complex::Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy());
        }
    }
    a
}

/// Logical process matrix of the projected network for syndrome `s`.
///
/// `A_i` is the 2×2 ancilla matrix obtained by inserting the logical
/// representative of `P_i` on the ket side; `T_s P_i T_s = ±P_i` supplies the
/// sign. With the exact engine the right environments of columns `1..L` are
/// shared between the four insertions (only column 0 and, for X̄/Ȳ, the
/// bottom row differ), so the whole matrix costs two sweeps.
pub fn logical_process_matrix<T: Real>(
    net: &DensityNetwork<T>,
    s: &Syndrome,
    cfg: &ContractionConfig,
) -> Result<(ProcessMatrix, Diagnostics), EcError> {
    let layout = net.layout();
    let t_s = recovery_pauli(layout, s)?;
    let red = reduction(net, cfg);
    let policy = AncillaPolicy::Keep;
    let mut a: Vec<(Tensor<T>, T)> = Vec::with_capacity(4);
    let mut diag = Diagnostics::default();
    match cfg.engine {
        Engine::Exact => {
            let (w, l) = (layout.width, layout.length);
            let plain = net.capped(None, policy, red);
            check_memory(&plain, cfg, 1.0)?;
            let xbar = layout.logical_pauli(Pauli::X);
            let with_x = net.capped(Some(&xbar), policy, red);
            let z = Zipper::for_network(&plain);
            let r_plain = right_envs(&plain, 1).swap_remove(1);
            let r_x = right_envs(&with_x, 1).swap_remove(1);
            for p in Pauli::ALL {
                let rep = layout.logical_pauli(p);
                let tail_x = matches!(p, Pauli::X | Pauli::Y);
                debug_assert!((0..layout.num_qubits()).filter(|q| q % l != 0).all(|q| {
                    let want = if tail_x && q / l == w - 1 { Pauli::X } else { Pauli::I };
                    rep.get(q) == want
                }));
                let base = if tail_x { &r_x } else { &r_plain };
                let mut env = base.clone();
                for r in 0..w {
                    let qi = r * l;
                    let m = match rep.get(qi) {
                        Pauli::I => None,
                        other => Some(pauli_matrix::<T>(other.index())),
                    };
                    let t = net.capped_site(qi, m.as_ref(), policy, red);
                    env = z.absorb(&env, qi, &t);
                }
                a.push((z.finish(&env), env.log_scale + plain.log_scale));
            }
        }
        Engine::BoundaryMps => {
            for p in Pauli::ALL {
                let rep = layout.logical_pauli(p);
                let capped = net.capped(Some(&rep), policy, red);
                let (v, d) = contract(&capped, cfg)?;
                diag.merge(&d);
                a.push((v.tensor, v.log_scale));
            }
        }
    }
    let ref_log = a.iter().map(|x| x.1).fold(T::neg_infinity(), |m, v| m.max(v));
    let mut c = [[0.0f64; 4]; 4];
    for (i, (t, lg)) in a.iter().enumerate() {
        let sign = if t_s.anticommutes(&layout.logical_pauli(Pauli::from_index(i))) { -1.0 } else { 1.0 };
        let f = (*lg - ref_log).to_f64_lossy().exp();
        let m = ancilla_matrix(t);
        for (j, cij) in c[i].iter_mut().enumerate() {
            let p = pauli_matrix::<f64>(j);
            // Tr(P_j A) = Σ P_j[b,a] A[a,b]
            let tr = p[0] * m[0][0] + p[2] * m[0][1] + p[1] * m[1][0] + p[3] * m[1][1];
            *cij = sign * f * tr.re;
        }
    }
    let c00 = c[0][0];
    if !(c00 > 0.0) || !c00.is_finite() {
        return Err(EcError::Numerical(format!("process matrix normalization {c00} for a sampled syndrome")));
    }
    for row in c.iter_mut() {
        for v in row.iter_mut() {
            *v /= c00;
        }
    }
    let log_norm = c00.ln() + ref_log.to_f64_lossy();
    Ok((ProcessMatrix { c, log_norm }, diag))
}

/// Frobenius distance of `c` from the identity process matrix.
pub fn two_norm_error(c: &[[f64; 4]; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let d = c[i][j] - IDENTITY_C[i][j];
            s += d * d;
        }
    }
    s.sqrt()
}

/// The logical Pauli whose composition with `pm` is closest to the identity
/// in 2-norm; ties resolve as I ≺ X ≺ Y ≺ Z.
pub fn decode(pm: &ProcessMatrix) -> Pauli {
    let scale = pm.c[0][0];
    let mut best = (Pauli::I, f64::INFINITY);
    for d in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
        let mut c = pm.then_pauli(d).c;
        if scale != 0.0 && scale != 1.0 {
            for row in c.iter_mut() {
                for v in row.iter_mut() {
                    *v /= scale;
                }
            }
        }
        let e = two_norm_error(&c);
        if e < best.1 - 1e-12 {
            best = (d, e);
        }
    }
    best.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    TwoNorm,
    Diamond,
}

/// Distance of the channel `pm` from the identity.
pub fn channel_distance(pm: &ProcessMatrix, metric: Metric) -> f64 {
    match metric {
        Metric::TwoNorm => two_norm_error(&pm.c),
        Metric::Diamond => metrics::diamond_distance_from_identity(&pm.transfer_matrix()),
    }
}

/// Noise, syndrome sampling, process matrix, decoding and scoring on a fresh
/// copy of `template`.
pub fn run_round<T: Real, R: Rng + ?Sized>(
    template: &DensityNetwork<T>,
    channel: &Channel<T>,
    rng: &mut R,
    cfg: &ContractionConfig,
) -> Result<RoundResult, EcError> {
    let mut net = template.clone();
    apply_noise(&mut net, channel);
    let sampled = sample_syndrome(&mut net, rng, cfg)?;
    let (raw, d) = logical_process_matrix(&net, &sampled.syndrome, cfg)?;
    let mut diagnostics = sampled.diagnostics;
    diagnostics.merge(&d);
    let correction = decode(&raw);
    let decoded = raw.then_pauli(correction);
    Ok(RoundResult {
        syndrome: sampled.syndrome,
        raw_channel: raw,
        correction,
        error_2norm: channel_distance(&decoded, Metric::TwoNorm),
        error_diamond: channel_distance(&decoded, Metric::Diamond),
        decoded_channel: decoded,
        log_probability: sampled.log_probability,
        diagnostics,
    })
}

/// Fresh Bell network for `layout`; convenience for callers that do not
/// keep a template.
pub fn bell_network<T: Real>(layout: &CodeLayout) -> DensityNetwork<T> {
    build_bell_density_network(layout)
}

/// Free-label order of logical contractions.
pub fn ancilla_labels() -> [Label; 2] {
    [Label::Ancilla(Side::Ket), Label::Ancilla(Side::Bra)]
}
