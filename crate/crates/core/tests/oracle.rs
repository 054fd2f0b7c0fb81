use std::f64::consts::PI;
use surface_peps::ec::{decode, IDENTITY_C};
use surface_peps::layout::build_layout;
use surface_peps::noise::{make_channel, Channel, NoiseModel};
use surface_peps::oracle::{dense_bell_state, dense_round, dense_syndrome, OracleError};
use surface_peps::{Pauli, Syndrome};

#[test]
fn bell_state_is_stabilized() {
    for (w, l) in [(2, 2), (2, 3), (3, 3)] {
        let layout = build_layout(w, l).unwrap();
        let st = dense_bell_state(&layout).unwrap();
        assert!((st.trace() - 1.0).abs() < 1e-12);
        for k in 0..layout.num_checks() {
            let e = st.expectation(&layout.check_pauli(k), Pauli::I);
            assert!((e.re - 1.0).abs() < 1e-12 && e.im.abs() < 1e-12, "{w}×{l} check {k}: {e}");
        }
        for p in Pauli::ALL {
            let e = st.expectation(&layout.logical_pauli(p), p);
            assert!((e.re - IDENTITY_C[p.index()][p.index()]).abs() < 1e-12, "{w}×{l} {p:?}: {e}");
        }
        let e = st.expectation(&layout.logical_pauli(Pauli::X), Pauli::I);
        assert!(e.norm() < 1e-12);
    }
}

#[test]
fn syndrome_probabilities_sum_to_one() {
    let layout = build_layout(3, 3).unwrap();
    let st = dense_bell_state(&layout).unwrap();
    for m in [
        NoiseModel::AmplitudeDamping { gamma: 0.25 },
        NoiseModel::SystematicRotation { theta: 0.1 * PI },
        NoiseModel::Depolarizing { epsilon: 0.2 },
    ] {
        let outcomes = dense_round(&st, &layout, &make_channel(&m).unwrap(), 0.0).unwrap();
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-12, "{m:?}: {total}");
        for o in &outcomes {
            assert!((o.process.c[0][0] - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn identity_channel_has_one_outcome() {
    let layout = build_layout(3, 3).unwrap();
    let st = dense_bell_state(&layout).unwrap();
    let outcomes = dense_round(&st, &layout, &Channel::identity(), 1e-14).unwrap();
    assert_eq!(outcomes.len(), 1);
    let o = &outcomes[0];
    assert_eq!(o.syndrome, Syndrome::trivial(layout.num_checks()));
    assert!((o.probability - 1.0).abs() < 1e-12);
    for i in 0..4 {
        for j in 0..4 {
            assert!((o.process.c[i][j] - IDENTITY_C[i][j]).abs() < 1e-12);
        }
    }
    assert_eq!(decode(&o.process), Pauli::I);
}

#[test]
fn single_syndrome_matches_enumeration() {
    let layout = build_layout(2, 3).unwrap();
    let ch = make_channel(&NoiseModel::AmplitudeDamping { gamma: 0.4 }).unwrap();
    let st = dense_bell_state(&layout).unwrap();
    let mut noisy = st.clone();
    noisy.apply_channel(&ch);
    for o in dense_round(&st, &layout, &ch, 0.0).unwrap() {
        let one = dense_syndrome(&noisy, &layout, &o.syndrome).unwrap();
        assert!((one.probability - o.probability).abs() < 1e-14);
        assert_eq!(one.process.c, o.process.c);
    }
    assert!(matches!(dense_syndrome(&noisy, &layout, &Syndrome::trivial(2)), Err(OracleError::Argument(_))));
}

#[test]
fn large_layouts_are_refused() {
    let layout = build_layout(4, 4).unwrap();
    assert!(matches!(dense_bell_state(&layout), Err(OracleError::Resource(_))));
}
