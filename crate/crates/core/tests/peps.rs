use surface_peps::contraction::{contract, ContractionConfig};
use surface_peps::layout::{build_layout, CheckKind, CodeLayout};
use surface_peps::noise::{make_channel, pauli_matrix, NoiseModel};
use surface_peps::oracle::dense_bell_state;
use surface_peps::peps::{
    build_bell_density_network, chain_order, chain_to_dense, check_projector_network, w_tensor, AncillaPolicy,
    Reduction,
};
use surface_peps::tensor::{contract_hyper, Dir, Label, Role, Side};
use surface_peps::{Complex, DensityNetwork, Pauli, Tensor};

fn c(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

/// Dense `I + sign·P^{⊗n}`.
fn dense_projector(p: usize, n: usize, sign: f64) -> Vec<Complex> {
    let m = pauli_matrix::<f64>(p);
    let mut op = vec![c(1.0)];
    let mut dim = 1;
    for _ in 0..n {
        let mut next = vec![c(0.0); dim * dim * 4];
        for r in 0..dim {
            for col in 0..dim {
                for a in 0..2 {
                    for b in 0..2 {
                        next[(2 * r + a) * (2 * dim) + 2 * col + b] = op[r * dim + col] * m[a * 2 + b];
                    }
                }
            }
        }
        op = next;
        dim *= 2;
    }
    (0..dim * dim).map(|k| op[k] * sign + if k / dim == k % dim { c(1.0) } else { c(0.0) }).collect()
}

fn max_diff(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Contracts the uncapped network into a dense matrix over (data qubits,
/// ancilla), using the oracle's basis order: qubit 0 most significant, ancilla
/// in the lowest bit.
fn dense_network(net: &DensityNetwork) -> (usize, Vec<Complex>) {
    let n = net.layout().num_qubits();
    let tensors: Vec<Tensor> = (0..n)
        .map(|q| {
            let mut t = net.site_tensor(q).clone();
            t.relabel(Label::Phys(Side::Ket), Label::Index(2 * q as u32));
            t.relabel(Label::Phys(Side::Bra), Label::Index(2 * q as u32 + 1));
            t
        })
        .collect();
    let mut acc = tensors[0].clone();
    for k in 1..n {
        let later = &tensors[k + 1..];
        acc = contract_hyper(&acc, &tensors[k], |l| {
            matches!(l, Label::Ancilla(_)) || later.iter().any(|t| t.axis(l).is_some())
        });
    }
    assert!(acc.labels().iter().all(|l| matches!(l, Label::Index(_) | Label::Ancilla(_))));
    let d = 1usize << (n + 1);
    let mut rho = vec![c(0.0); d * d];
    let mut idx = vec![0usize; acc.rank()];
    for r in 0..d {
        for col in 0..d {
            for (ax, l) in acc.labels().iter().enumerate() {
                idx[ax] = match *l {
                    Label::Index(k) if k % 2 == 0 => r >> (n - k as usize / 2) & 1,
                    Label::Index(k) => col >> (n - k as usize / 2) & 1,
                    Label::Ancilla(Side::Ket) => r & 1,
                    Label::Ancilla(Side::Bra) => col & 1,
                    _ => unreachable!(),
                };
            }
            rho[r * d + col] = acc.get(&idx);
        }
    }
    (n, rho)
}

fn trace(rho: &[Complex], d: usize) -> f64 {
    (0..d).map(|i| rho[i * d + i].re).sum()
}

/// Ancilla block `⟨a|ρ|b⟩` as a data-qubit matrix.
fn block(rho: &[Complex], n: usize, a: usize, b: usize) -> Vec<Complex> {
    let dl = 1 << n;
    let d = 2 * dl;
    (0..dl * dl).map(|k| rho[((k / dl) << 1 | a) * d + ((k % dl) << 1 | b)]).collect()
}

#[test]
fn w_tensor_entries() {
    let z = pauli_matrix::<f64>(3);
    let w = w_tensor(&z, 2).unwrap();
    assert_eq!(w.shape(), &[2, 2, 2, 2]);
    assert_eq!(w.get(&[0, 0, 1, 1]), c(1.0));
    assert_eq!(w.get(&[1, 1, 1, 1]), c(-1.0));
    assert_eq!(w.get(&[0, 0, 0, 0]), c(1.0));
    assert_eq!(w.get(&[1, 1, 0, 0]), c(1.0));
    for a in 0..2 {
        for b in 0..2 {
            assert_eq!(w.get(&[0, 1, a, b]), c(0.0));
        }
    }
    assert_eq!(w.get(&[0, 0, 0, 1]), c(0.0));
    assert!(w_tensor(&z, 0).is_err());
}

#[test]
fn w_tensor_identity_at_zero_virtual() {
    let w = w_tensor(&pauli_matrix::<f64>(1), 1).unwrap().fix(2, 0);
    let id = Tensor::from_fn(vec![2, 2], |i| c(if i[0] == i[1] { 1.0 } else { 0.0 }));
    assert!(w.distance(&id) < 1e-15);
}

#[test]
fn face_check_chains() {
    let layout = build_layout(3, 3).unwrap();
    for check in layout.checks.iter().filter(|c| c.qubits.len() == 4) {
        let p = check.kind.pauli().index();
        for sign in [1i8, -1] {
            let chain = check_projector_network::<f64>(check, sign);
            assert_eq!(chain.len(), 4);
            assert!(max_diff(&chain_to_dense(&chain), &dense_projector(p, 4, sign as f64)) < 1e-14);
            let east = chain.iter().filter(|(_, t)| t.axis(Label::Virtual(Dir::E)).is_some()).count();
            assert_eq!(east, 1, "one bond crosses between the two columns");
        }
    }
}

#[test]
fn two_qubit_z_check_minus() {
    let layout = build_layout(3, 3).unwrap();
    let check = layout.checks.iter().find(|c| c.qubits.len() == 2 && c.kind == CheckKind::Z).unwrap();
    let chain = check_projector_network::<f64>(check, -1);
    assert_eq!(chain.len(), 2);
    assert!(max_diff(&chain_to_dense(&chain), &dense_projector(3, 2, -1.0)) < 1e-15);
}

#[test]
fn sign_on_any_tensor_flips_the_projector() {
    let layout = build_layout(3, 3).unwrap();
    let check = layout.checks.iter().find(|c| c.qubits.len() == 4 && c.kind == CheckKind::X).unwrap();
    let minus = dense_projector(1, 4, -1.0);
    for k in 0..4 {
        let mut chain = check_projector_network::<f64>(check, 1);
        let t = &mut chain[k].1;
        let rank = t.rank();
        let mut idx = vec![0; rank];
        for i in 0..2 {
            for j in 0..2 {
                idx[0] = i;
                idx[1] = j;
                idx[2..].iter_mut().for_each(|v| *v = 1);
                let v = t.get(&idx);
                t.set(&idx, -v);
            }
        }
        assert!(max_diff(&chain_to_dense(&chain), &minus) < 1e-14, "sign on tensor {k}");
    }
}

#[test]
fn chain_order_keeps_one_inter_column_bond() {
    let layout = build_layout(5, 5).unwrap();
    for check in &layout.checks {
        let order = chain_order(check);
        let crossings = order.windows(2).filter(|p| p[0].col != p[1].col).count();
        assert!(crossings <= 1, "{check:?}");
    }
}

fn compare_with_oracle(layout: &CodeLayout) {
    let net = build_bell_density_network::<f64>(layout);
    let (n, rho) = dense_network(&net);
    let d = 1 << (n + 1);
    let tr = trace(&rho, d);
    let n_x = layout.checks.iter().filter(|c| c.kind == CheckKind::X).count();
    assert!((tr - 2f64.powi(n_x as i32 + 1)).abs() < 1e-9 * tr);
    let oracle = dense_bell_state(layout).unwrap();
    let normalized: Vec<Complex> = rho.iter().map(|z| z / tr).collect();
    assert!(max_diff(&normalized, &oracle.rho) < 1e-12);
}

#[test]
fn bell_network_matches_projector_construction() {
    compare_with_oracle(&build_layout(2, 2).unwrap());
    compare_with_oracle(&build_layout(2, 3).unwrap());
}

#[test]
fn ancilla_blocks_hold_the_logical_states() {
    for (w, l) in [(2, 2), (2, 3), (3, 3)] {
        let layout = build_layout(w, l).unwrap();
        let net = build_bell_density_network::<f64>(&layout);
        let (n, rho) = dense_network(&net);
        let dl = 1usize << n;
        let b00 = block(&rho, n, 0, 0);
        let b11 = block(&rho, n, 1, 1);
        let t00 = trace(&b00, dl);
        assert!(t00 > 0.0);
        // rank one: ρ² = Tr(ρ)·ρ
        let sq: Vec<Complex> = (0..dl * dl)
            .map(|k| (0..dl).map(|m| b00[(k / dl) * dl + m] * b00[m * dl + k % dl]).sum::<Complex>())
            .collect();
        let scaled: Vec<Complex> = b00.iter().map(|z| z * t00).collect();
        assert!(max_diff(&sq, &scaled) < 1e-9 * t00 * t00);
        // +1 eigenstate of every check and of the logical Z
        let mut paulis: Vec<_> = (0..layout.num_checks()).map(|k| layout.check_pauli(k)).collect();
        paulis.push(layout.logical_z_pauli());
        for p in &paulis {
            let mut acc = c(0.0);
            for r in 0..dl {
                for col in 0..dl {
                    // ⟨col|P|r⟩ for a real-phase-free X/Z string
                    let mut flip = 0usize;
                    let mut sign = 1.0;
                    for q in 0..n {
                        let bit = 1 << (n - 1 - q);
                        match p.get(q) {
                            Pauli::X => flip |= bit,
                            Pauli::Z if r & bit != 0 => sign = -sign,
                            _ => {}
                        }
                    }
                    if col == r ^ flip {
                        acc += b00[r * dl + col] * sign;
                    }
                }
            }
            assert!((acc.re / t00 - 1.0).abs() < 1e-10, "{w}×{l}: {p}");
        }
        // X̄ maps the (0,0) block onto the (1,1) block
        let xm: usize = layout.logical_x.iter().map(|&s| 1usize << (n - 1 - layout.qubit(s))).sum();
        for r in 0..dl {
            for col in 0..dl {
                assert!((b11[r * dl + col] - b00[(r ^ xm) * dl + (col ^ xm)]).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn initial_bond_dimensions_are_small() {
    let layout = build_layout(5, 5).unwrap();
    let net = build_bell_density_network::<f64>(&layout);
    for q in 0..layout.num_qubits() {
        let t = net.site_tensor(q);
        let ket_virtual = t
            .labels()
            .iter()
            .filter(|l| matches!(l, Label::Check { role: Role::Ket, .. } | Label::Ancilla(Side::Ket)))
            .count();
        assert!(ket_virtual <= 4, "site {q} has {ket_virtual} virtual indices");
        assert!(t.shape().iter().all(|&d| d == 2));
    }
}

fn ancilla_matrix(net: &DensityNetwork, cfg: &ContractionConfig) -> [Complex; 4] {
    let (s, _) = contract(&net.capped(None, AncillaPolicy::Keep, Reduction::General), cfg).unwrap();
    let t = &s.tensor;
    let (ak, ab) = (t.axis(Label::Ancilla(Side::Ket)).unwrap(), t.axis(Label::Ancilla(Side::Bra)).unwrap());
    let mut m = [c(0.0); 4];
    for a in 0..2 {
        for b in 0..2 {
            let mut idx = vec![0; 2];
            idx[ak] = a;
            idx[ab] = b;
            m[a * 2 + b] = t.get(&idx);
        }
    }
    m
}

#[test]
fn fresh_ancilla_is_maximally_mixed() {
    let layout = build_layout(3, 3).unwrap();
    let net = build_bell_density_network::<f64>(&layout);
    let m = ancilla_matrix(&net, &ContractionConfig::exact());
    assert!(m[0].re > 0.0);
    assert!((m[0] - m[3]).norm() < 1e-12 * m[0].re);
    assert!(m[1].norm() < 1e-12 * m[0].re && m[2].norm() < 1e-12 * m[0].re);
}

#[test]
fn noisy_ancilla_matrix_is_hermitian_psd() {
    let layout = build_layout(3, 3).unwrap();
    for model in [
        NoiseModel::AmplitudeDamping { gamma: 0.3 },
        NoiseModel::SystematicRotation { theta: 0.4 },
        NoiseModel::Depolarizing { epsilon: 0.2 },
    ] {
        let mut net = build_bell_density_network::<f64>(&layout);
        net.apply_channel(&make_channel(&model).unwrap());
        let xs: Vec<usize> = (0..layout.num_checks()).filter(|&k| layout.checks[k].kind == CheckKind::X).collect();
        let zs: Vec<usize> = (0..layout.num_checks()).filter(|&k| layout.checks[k].kind == CheckKind::Z).collect();
        net.apply_check(xs[0], -1);
        net.apply_check(xs[2], -1);
        net.apply_check(zs[1], 1);
        for cfg in [ContractionConfig::exact(), ContractionConfig::boundary(16)] {
            let m = ancilla_matrix(&net, &cfg);
            let scale = m[0].re + m[3].re;
            assert!(scale > 0.0);
            assert!((m[1] - m[2].conj()).norm() < 1e-10 * scale);
            assert!(m[0].im.abs() < 1e-10 * scale && m[3].im.abs() < 1e-10 * scale);
            assert!(m[0].re >= -1e-12 * scale && m[3].re >= -1e-12 * scale);
            assert!(m[0].re * m[3].re - m[1].norm_sqr() >= -1e-10 * scale * scale);
        }
    }
}
