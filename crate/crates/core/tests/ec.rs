use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::f64::consts::PI;
use surface_peps::contraction::ContractionConfig;
use surface_peps::ec::{
    decode, logical_process_matrix, network_trace, project_syndrome, run_round, sample_syndrome, two_norm_error,
    ProcessMatrix, IDENTITY_C,
};
use surface_peps::layout::build_layout;
use surface_peps::noise::{make_channel, mat2, Channel, NoiseModel};
use surface_peps::oracle::{dense_bell_state, dense_round, pauli_frame_sample};
use surface_peps::peps::build_bell_density_network;
use surface_peps::{Pauli, PauliString, Syndrome};

fn x_gate() -> Channel<f64> {
    Channel::unitary(mat2([(0., 0.), (1., 0.), (1., 0.), (0., 0.)])).unwrap()
}

fn max_diff(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> f64 {
    (0..16).map(|k| (a[k / 4][k % 4] - b[k / 4][k % 4]).abs()).fold(0.0, f64::max)
}

fn engines() -> [ContractionConfig; 2] {
    [ContractionConfig::exact(), ContractionConfig::boundary(64)]
}

#[test]
fn noiseless_round_is_trivial() {
    let layout = build_layout(3, 3).unwrap();
    let net = build_bell_density_network::<f64>(&layout);
    for cfg in engines() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = run_round(&net, &Channel::identity(), &mut rng, &cfg).unwrap();
        assert_eq!(r.syndrome, Syndrome::trivial(layout.num_checks()));
        assert!(max_diff(&r.raw_channel.c, &IDENTITY_C) < 1e-12);
        assert_eq!(r.correction, Pauli::I);
        assert!(r.error_2norm < 1e-12 && r.error_diamond < 1e-9);
        assert!(r.log_probability.abs() < 1e-12);
    }
}

#[test]
fn single_x_error_gives_its_syndrome() {
    let layout = build_layout(5, 5).unwrap();
    let q = 2 * 5 + 2;
    let want = layout.syndrome_of(&PauliString::single(25, q, Pauli::X));
    let flipped = (0..want.len()).filter(|&k| want.flipped(k)).count();
    assert_eq!(flipped, 2);
    for cfg in engines() {
        let mut net = build_bell_density_network::<f64>(&layout);
        net.apply_channel_at(q, &x_gate());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = sample_syndrome(&mut net, &mut rng, &cfg).unwrap();
        assert_eq!(s.syndrome, want);
        assert!(s.log_probability.abs() < 1e-10);
        let (pm, _) = logical_process_matrix(&net, &s.syndrome, &cfg).unwrap();
        assert_eq!(decode(&pm), Pauli::I);
    }
}

#[test]
fn logical_x_error_is_corrected() {
    let layout = build_layout(3, 3).unwrap();
    let xbar = layout.logical_pauli(Pauli::X);
    for cfg in engines() {
        let mut net = build_bell_density_network::<f64>(&layout);
        for q in 0..9 {
            if xbar.get(q) == Pauli::X {
                net.apply_channel_at(q, &x_gate());
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample_syndrome(&mut net, &mut rng, &cfg).unwrap();
        assert_eq!(s.syndrome, Syndrome::trivial(layout.num_checks()));
        let (pm, _) = logical_process_matrix(&net, &s.syndrome, &cfg).unwrap();
        assert!(max_diff(&pm.c, &ProcessMatrix::identity().then_pauli(Pauli::X).c) < 1e-12);
        assert_eq!(decode(&pm), Pauli::X);
        assert!(two_norm_error(&pm.then_pauli(Pauli::X).c) < 1e-12);
    }
}

#[test]
fn full_damping_gives_a_reset_channel() {
    let layout = build_layout(3, 3).unwrap();
    let net = build_bell_density_network::<f64>(&layout);
    let ch = make_channel(&NoiseModel::AmplitudeDamping { gamma: 1.0 }).unwrap();
    for seed in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = run_round(&net, &ch, &mut rng, &ContractionConfig::exact()).unwrap();
        // output independent of the input: only the j = 0 column survives
        for row in &r.raw_channel.c {
            for v in &row[1..] {
                assert!(v.abs() < 1e-12, "{:?}", r.raw_channel.c);
            }
        }
        assert!(r.error_diamond > 0.99);
    }
}

#[test]
fn sampled_frequencies_match_oracle_2x2() {
    let layout = build_layout(2, 2).unwrap();
    let ch = make_channel(&NoiseModel::AmplitudeDamping { gamma: 0.3 }).unwrap();
    let outcomes = dense_round(&dense_bell_state(&layout).unwrap(), &layout, &ch, 0.0).unwrap();
    let mut template = build_bell_density_network::<f64>(&layout);
    template.apply_channel(&ch);
    let n = 100_000usize;
    let mut counts: HashMap<Syndrome, usize> = HashMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = ContractionConfig::exact();
    for _ in 0..n {
        let mut net = template.clone();
        *counts.entry(sample_syndrome(&mut net, &mut rng, &cfg).unwrap().syndrome).or_default() += 1;
    }
    let mut tv = 0.0;
    let mut bound = 0.0;
    for o in &outcomes {
        let f = *counts.get(&o.syndrome).unwrap_or(&0) as f64 / n as f64;
        tv += 0.5 * (f - o.probability).abs();
        bound += 0.5 * 3.0 * (o.probability * (1.0 - o.probability) / n as f64).sqrt();
    }
    assert!(counts.keys().all(|s| outcomes.iter().any(|o| &o.syndrome == s)));
    assert!(tv <= bound, "TV {tv} > {bound}");
}

#[test]
fn sequential_probability_telescopes() {
    let layout = build_layout(3, 3).unwrap();
    for model in [NoiseModel::AmplitudeDamping { gamma: 0.2 }, NoiseModel::SystematicRotation { theta: 0.1 * PI }] {
        let mut noisy = build_bell_density_network::<f64>(&layout);
        noisy.apply_channel(&make_channel(&model).unwrap());
        for cfg in engines() {
            let total = network_trace(&noisy, &cfg).unwrap();
            for seed in 0..5 {
                let mut net = noisy.clone();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let s = sample_syndrome(&mut net, &mut rng, &cfg).unwrap();
                let mut once = noisy.clone();
                project_syndrome(&mut once, &s.syndrome);
                let p = network_trace(&once, &cfg).unwrap().ratio(&total);
                assert!((s.log_probability.exp() - p).abs() < 1e-8 * p, "{model:?} {:?}: {} vs {p}", cfg.engine, s.log_probability.exp());
            }
        }
    }
}

#[test]
fn decode_examples() {
    let id = ProcessMatrix::identity();
    assert_eq!(decode(&id), Pauli::I);
    for p in Pauli::ALL {
        assert_eq!(decode(&id.then_pauli(p)), p);
    }
    for (phi, want) in [(0.1, Pauli::I), (0.7, Pauli::I), (0.9, Pauli::Z), (1.4, Pauli::Z)] {
        let rot = ProcessMatrix::of_channel(&make_channel::<f64>(&NoiseModel::SystematicRotation { theta: phi }).unwrap());
        assert_eq!(decode(&rot), want, "φ = {phi}");
    }
    // exact tie at π/4 resolves to the identity
    let tie = ProcessMatrix::of_channel(&make_channel::<f64>(&NoiseModel::SystematicRotation { theta: PI / 4.0 }).unwrap());
    assert_eq!(decode(&tie), Pauli::I);
}

#[test]
fn decode_is_scale_invariant() {
    let ch = make_channel::<f64>(&NoiseModel::AmplitudeDamping { gamma: 0.6 })
        .unwrap()
        .compose(&make_channel(&NoiseModel::SystematicRotation { theta: 1.1 }).unwrap());
    let pm = ProcessMatrix::of_channel(&ch);
    for s in [1e-6, 0.3, 7.5, 1e8] {
        let mut scaled = pm;
        for row in scaled.c.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        assert_eq!(decode(&scaled), decode(&pm), "scale {s}");
    }
}

#[test]
fn pauli_noise_gives_pauli_logical_channels() {
    let layout = build_layout(3, 3).unwrap();
    let net = build_bell_density_network::<f64>(&layout);
    let ch = make_channel(&NoiseModel::Depolarizing { epsilon: 0.15 }).unwrap();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = run_round(&net, &ch, &mut rng, &ContractionConfig::exact()).unwrap();
        let c = r.decoded_channel.c;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(c[i][j].abs() < 1e-12, "{c:?}");
                }
            }
        }
        // decoded channel never does worse than the raw one
        assert!(r.error_2norm <= two_norm_error(&r.raw_channel.c) + 1e-12);
    }
}

#[test]
fn depolarizing_syndromes_match_pauli_frame_sampler() {
    let layout = build_layout(3, 3).unwrap();
    let eps = 0.12;
    let mut template = build_bell_density_network::<f64>(&layout);
    template.apply_channel(&make_channel(&NoiseModel::Depolarizing { epsilon: eps }).unwrap());
    let n = 20_000usize;
    let cfg = ContractionConfig::exact();
    let mut a: HashMap<Syndrome, f64> = HashMap::new();
    let mut b: HashMap<Syndrome, f64> = HashMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..n {
        let mut net = template.clone();
        *a.entry(sample_syndrome(&mut net, &mut rng, &cfg).unwrap().syndrome).or_default() += 1.0 / n as f64;
        *b.entry(pauli_frame_sample(&layout, [eps / 3.0; 3], &mut rng)).or_default() += 1.0 / n as f64;
    }
    // 256 outcomes; each frequency pair must agree within 4σ of their difference
    for s in a.keys().chain(b.keys()) {
        let (fa, fb) = (*a.get(s).unwrap_or(&0.0), *b.get(s).unwrap_or(&0.0));
        let p = 0.5 * (fa + fb);
        let sigma = (2.0 * p * (1.0 - p) / n as f64).sqrt().max(1.0 / n as f64);
        assert!((fa - fb).abs() <= 4.5 * sigma, "{s:?}: {fa} vs {fb}");
    }
}
