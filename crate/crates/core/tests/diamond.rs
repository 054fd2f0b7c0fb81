use num_complex::Complex64;
use surface_peps::ec::ProcessMatrix;
use surface_peps::metrics::{diamond_distance_from_identity, trace_distance_on_input};
use surface_peps::noise::{make_channel, pauli_twirl, Channel, NoiseModel};
use std::f64::consts::PI;

/// Input `√λ|u0⟩|0⟩ + √(1−λ)|u1⟩|1⟩`, `u0 = (cos t/2, e^{iφ} sin t/2)`.
fn schmidt(x: [f64; 3]) -> [Complex64; 4] {
    let [lam, t, phi] = x;
    let lam = lam.clamp(0.0, 1.0);
    let e = Complex64::from_polar(1.0, phi);
    let u0 = [Complex64::new((t / 2.0).cos(), 0.0), e * (t / 2.0).sin()];
    let u1 = [-e.conj() * (t / 2.0).sin(), Complex64::new((t / 2.0).cos(), 0.0)];
    let (a, b) = (lam.sqrt(), (1.0 - lam).sqrt());
    [u0[0] * a, u1[0] * b, u0[1] * a, u1[1] * b]
}

/// Brute-force maximization: grid over (λ, t, φ) then coordinate refinement.
fn grid_diamond(r: &[[f64; 4]; 4]) -> f64 {
    let f = |x: [f64; 3]| trace_distance_on_input(r, &schmidt(x));
    let mut best = ([0.5, 0.0, 0.0], f64::NEG_INFINITY);
    let n = 24;
    for i in 0..=n {
        for j in 0..=n {
            for k in 0..n {
                let x = [i as f64 / n as f64, PI * j as f64 / n as f64, 2.0 * PI * k as f64 / n as f64];
                let v = f(x);
                if v > best.1 {
                    best = (x, v);
                }
            }
        }
    }
    let mut step = [0.05, 0.1, 0.2];
    while step[0] > 1e-12 {
        let mut improved = false;
        for d in 0..3 {
            for sgn in [-1.0, 1.0] {
                let mut x = best.0;
                x[d] += sgn * step[d];
                x[0] = x[0].clamp(0.0, 1.0);
                let v = f(x);
                if v > best.1 + 1e-15 {
                    best = (x, v);
                    improved = true;
                }
            }
        }
        if !improved {
            for s in step.iter_mut() {
                *s *= 0.5;
            }
        }
    }
    best.1
}

fn ptm(ch: &Channel<f64>) -> [[f64; 4]; 4] {
    ProcessMatrix::of_channel(ch).transfer_matrix()
}

#[test]
fn identity_has_zero_distance() {
    assert_eq!(diamond_distance_from_identity(&ptm(&Channel::identity())), 0.0);
}

#[test]
fn z_flip_matches_grid_and_closed_form() {
    for p in [0.01, 0.1, 0.3] {
        let r = ptm(&make_channel(&NoiseModel::PhaseFlip { p }).unwrap());
        let d = diamond_distance_from_identity(&r);
        let g = grid_diamond(&r);
        assert!((d - g).abs() < 1e-6, "p={p}: {d} vs grid {g}");
        assert!((d - p).abs() < 1e-9);
    }
}

#[test]
fn z_rotation_matches_grid_and_exceeds_twirl() {
    for theta in [0.01, 0.05 * PI, 0.2] {
        let ch = make_channel(&NoiseModel::SystematicRotation { theta }).unwrap();
        let r = ptm(&ch);
        let d = diamond_distance_from_identity(&r);
        let g = grid_diamond(&r);
        assert!((d - g).abs() < 1e-6, "theta={theta}: {d} vs grid {g}");
        assert!((d - theta.sin()).abs() < 1e-7, "{d} vs sin θ");
        let twirl = diamond_distance_from_identity(&ptm(&pauli_twirl(&ch)));
        assert!(d > twirl, "{d} <= {twirl}");
    }
}

#[test]
fn amplitude_damping_matches_grid() {
    for gamma in [0.05, 0.3, 0.8] {
        let r = ptm(&make_channel(&NoiseModel::AmplitudeDamping { gamma }).unwrap());
        let d = diamond_distance_from_identity(&r);
        let g = grid_diamond(&r);
        assert!((d - g).abs() < 1e-6, "gamma={gamma}: {d} vs grid {g}");
    }
}

#[test]
fn depolarizing_matches_grid() {
    let r = ptm(&make_channel(&NoiseModel::Depolarizing { epsilon: 0.2 }).unwrap());
    let d = diamond_distance_from_identity(&r);
    assert!((d - grid_diamond(&r)).abs() < 1e-6);
    assert!((d - 0.2).abs() < 1e-9);
}
