use proptest::prelude::*;
use surface_peps::noise::{make_channel, pauli_matrix, to_superoperator, NoiseModel};
use surface_peps::peps::w_tensor;
use surface_peps::tensor::{contract, partial_trace, svd_split, Label, TensorError, SVD_FLOOR};
use surface_peps::{Complex, Tensor};

fn c(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

fn eye(n: usize) -> Tensor {
    Tensor::from_fn(vec![n, n], |i| c(if i[0] == i[1] { 1.0 } else { 0.0 }))
}

fn tensor_from(shape: Vec<usize>, vals: &[(f64, f64)]) -> Tensor {
    let mut k = 0;
    Tensor::from_fn(shape, |_| {
        let (re, im) = vals[k % vals.len()];
        k += 1;
        Complex::new(re, im)
    })
}

fn naive_matmul(a: &Tensor, b: &Tensor) -> Tensor {
    let (m, k, n) = (a.shape()[0], a.shape()[1], b.shape()[1]);
    Tensor::from_fn(vec![m, n], |i| (0..k).map(|x| a.get(&[i[0], x]) * b.get(&[x, i[1]])).sum())
}

#[test]
fn identity_composition() {
    let out = contract(&eye(2), &eye(2), &[(1, 0)]).unwrap();
    assert!(out.distance(&eye(2)) < 1e-15);
}

#[test]
fn x_acts_on_basis_vector() {
    let v = Tensor::new(vec![2], vec![c(1.0), c(0.0)]).unwrap();
    let x = Tensor::new(vec![2, 2], pauli_matrix::<f64>(1).to_vec()).unwrap();
    let out = contract(&v, &x, &[(0, 0)]).unwrap();
    assert_eq!(out.data(), &[c(0.0), c(1.0)]);
}

#[test]
fn contract_rejects_bad_pairs() {
    let a = Tensor::zeros(vec![2, 3]);
    let b = Tensor::zeros(vec![2, 2]);
    assert!(matches!(contract(&a, &b, &[(1, 0)]), Err(TensorError::Shape(_))));
    assert!(matches!(contract(&a, &b, &[(0, 0), (0, 1)]), Err(TensorError::Argument(_))));
}

#[test]
fn q_plus_chain_on_all_zero_input() {
    let x = pauli_matrix::<f64>(1);
    // [i, i', α...] with i' fixed to 0
    let end = w_tensor(&x, 1).unwrap().fix(1, 0);
    let mid = w_tensor(&x, 2).unwrap().fix(1, 0);
    let t = contract(&end, &mid, &[(1, 1)]).unwrap(); // [i1, i2, α2]
    let t = contract(&t, &mid, &[(2, 1)]).unwrap(); // [i1, i2, i3, α3]
    let t = contract(&t, &end, &[(3, 1)]).unwrap(); // [i1, i2, i3, i4]
    for idx in 0..16 {
        let bits = [idx >> 3 & 1, idx >> 2 & 1, idx >> 1 & 1, idx & 1];
        let want = if idx == 0 || idx == 15 { 1.0 } else { 0.0 };
        assert!((t.get(&bits) - c(want)).norm() < 1e-15, "{bits:?}");
    }
}

#[test]
fn trace_of_identity() {
    let t = partial_trace(&eye(2), &[(0, 1)]).unwrap();
    assert!((t.value() - c(2.0)).norm() < 1e-15);
}

#[test]
fn trace_of_doubled_pure_state() {
    let a = [Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)];
    let b = Tensor::from_fn(vec![2, 2], |i| a[i[0]] * a[i[1]].conj());
    let t = partial_trace(&b, &[(0, 1)]).unwrap();
    assert!((t.value() - c(1.0)).norm() < 1e-15);
}

#[test]
fn amplitude_damping_preserves_trace() {
    let ch = make_channel::<f64>(&NoiseModel::AmplitudeDamping { gamma: 0.3 }).unwrap();
    // E_{ijj'i'} applied to |1⟩⟨1|: fix j = j' = 1, then trace i = i'
    let e = to_superoperator(&ch).fix(1, 1).fix(1, 1);
    let t = partial_trace(&e, &[(0, 1)]).unwrap();
    assert!((t.value() - c(1.0)).norm() < 1e-14);
}

#[test]
fn trace_rejects_mismatched_pair() {
    let t = Tensor::zeros(vec![2, 3]);
    assert!(matches!(partial_trace(&t, &[(0, 1)]), Err(TensorError::Shape(_))));
}

fn reconstruct(t: &Tensor, left: &[usize], right: &[usize], chi: usize) -> f64 {
    let s = svd_split(t, left, right, chi, SVD_FLOOR, Label::Bond(0)).unwrap();
    let back = contract(&s.left, &s.right, &[(left.len(), 0)]).unwrap();
    let perm: Vec<usize> = left.iter().chain(right).copied().collect();
    back.distance(&t.permute(&perm))
}

#[test]
fn svd_split_rank_one_is_exact() {
    let u = [c(1.0), Complex::new(2.0, -1.0), c(0.5)];
    let v = [c(-1.0), Complex::new(0.0, 3.0)];
    let t = Tensor::from_fn(vec![3, 2], |i| u[i[0]] * v[i[1]]);
    let s = svd_split(&t, &[0], &[1], 4, SVD_FLOOR, Label::Bond(0)).unwrap();
    assert_eq!(s.singular_values.len(), 1);
    assert!(reconstruct(&t, &[0], &[1], 4) < 1e-13);
}

#[test]
fn svd_split_identity_truncation_error() {
    let t = eye(4);
    assert!(reconstruct(&t, &[0], &[1], 4) < 1e-13);
    assert!((reconstruct(&t, &[0], &[1], 2) - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn svd_split_full_rank_random() {
    let vals: Vec<(f64, f64)> = (0..64).map(|k| ((k as f64 * 0.37).sin(), (k as f64 * 1.3).cos())).collect();
    let t = tensor_from(vec![8, 8], &vals);
    assert!(reconstruct(&t, &[0], &[1], 8) < 1e-12);
}

#[test]
fn svd_split_rejects_zero_chi() {
    assert!(matches!(svd_split(&eye(2), &[0], &[1], 0, SVD_FLOOR, Label::Bond(0)), Err(TensorError::Argument(_))));
}

fn entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contract_matches_naive_summation(m in 1usize..5, k in 1usize..5, n in 1usize..5, va in entries(16), vb in entries(16)) {
        let a = tensor_from(vec![m, k], &va);
        let b = tensor_from(vec![k, n], &vb);
        let fast = contract(&a, &b, &[(1, 0)]).unwrap();
        let slow = naive_matmul(&a, &b);
        prop_assert!(fast.distance(&slow) <= 1e-12 * slow.norm().max(1.0));
    }

    #[test]
    fn contract_matches_naive_on_permuted_pairs(va in entries(24), vb in entries(12)) {
        // a[p, q, r] · b[r, p] summed over p and r
        let a = tensor_from(vec![2, 3, 4], &va);
        let b = tensor_from(vec![4, 2, 3], &vb);
        let fast = contract(&a, &b, &[(0, 1), (2, 0)]).unwrap();
        let slow = Tensor::from_fn(vec![3, 3], |i| {
            let mut s = c(0.0);
            for p in 0..2 {
                for r in 0..4 {
                    s += a.get(&[p, i[0], r]) * b.get(&[r, p, i[1]]);
                }
            }
            s
        });
        prop_assert!(fast.distance(&slow) <= 1e-12 * slow.norm().max(1.0));
    }

    #[test]
    fn contraction_is_associative(va in entries(12), vb in entries(12), vc in entries(12)) {
        let a = tensor_from(vec![3, 4], &va);
        let b = tensor_from(vec![4, 3, 2], &vb);
        let cc = tensor_from(vec![2, 6], &vc);
        let left = contract(&contract(&a, &b, &[(1, 0)]).unwrap(), &cc, &[(2, 0)]).unwrap();
        let right = contract(&a, &contract(&b, &cc, &[(2, 0)]).unwrap(), &[(1, 0)]).unwrap();
        prop_assert!(left.distance(&right) <= 1e-10 * left.norm().max(1.0));
    }

    #[test]
    fn contraction_is_bilinear(va in entries(6), vb in entries(6), vc in entries(6), s in -2.0..2.0f64) {
        let a = tensor_from(vec![2, 3], &va);
        let b = tensor_from(vec![3, 2], &vb);
        let d = tensor_from(vec![3, 2], &vc);
        let sum = Tensor::from_fn(vec![3, 2], |i| b.get(i) * s + d.get(i));
        let lhs = contract(&a, &sum, &[(1, 0)]).unwrap();
        let ab = contract(&a, &b, &[(1, 0)]).unwrap();
        let ad = contract(&a, &d, &[(1, 0)]).unwrap();
        let rhs = Tensor::from_fn(vec![2, 2], |i| ab.get(i) * s + ad.get(i));
        prop_assert!(lhs.distance(&rhs) <= 1e-12 * rhs.norm().max(1.0));
    }

    #[test]
    fn untruncated_svd_split_reconstructs(va in entries(48)) {
        let t = tensor_from(vec![2, 3, 2, 4], &va);
        prop_assert!(reconstruct(&t, &[0, 2], &[1, 3], 64) < 1e-10);
        prop_assert!(reconstruct(&t, &[3], &[0, 1, 2], 64) < 1e-10);
    }
}
