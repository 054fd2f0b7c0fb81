//! Small dense complex linear algebra: one-sided Jacobi SVD and Hermitian
//! Jacobi eigendecomposition. Matrices are row-major slices.

use crate::scalar::{czero, Real, C};

/// Thin singular value decomposition `A = U diag(s) Vh` of a `rows × cols`
/// matrix, with `k = min(rows, cols)` and `s` sorted in descending order.
#[derive(Clone, Debug)]
pub struct Svd<T: Real> {
    pub u: Vec<C<T>>,
    pub s: Vec<T>,
    pub vh: Vec<C<T>>,
    pub rows: usize,
    pub cols: usize,
    pub k: usize,
}

const MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi on the columns of a `m × n` matrix with `m ≥ n`.
/// Returns (U m×n with unnormalized columns, V n×n) such that A V = U.
fn hestenes<T: Real>(a: &[C<T>], m: usize, n: usize) -> (Vec<C<T>>, Vec<C<T>>) {
    // column-major working copies for cache-friendly column operations
    let mut u = vec![czero::<T>(); m * n];
    for i in 0..m {
        for j in 0..n {
            u[j * m + i] = a[i * n + j];
        }
    }
    let mut v = vec![czero::<T>(); n * n];
    for j in 0..n {
        v[j * n + j] = C::new(T::one(), T::zero());
    }
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta) = (T::zero(), T::zero());
                let mut gamma = czero::<T>();
                {
                    let cp = &u[p * m..(p + 1) * m];
                    let cq = &u[q * m..(q + 1) * m];
                    for i in 0..m {
                        alpha += cp[i].norm_sqr();
                        beta += cq[i].norm_sqr();
                        gamma += cp[i].conj() * cq[i];
                    }
                }
                let g = gamma.norm();
                if g == T::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (g + g);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = cs * t;
                let pc = phase.conj();
                for i in 0..m {
                    let xp = u[p * m + i];
                    let xq = u[q * m + i] * pc;
                    u[p * m + i] = xp * cs - xq * sn;
                    u[q * m + i] = xp * sn + xq * cs;
                }
                for i in 0..n {
                    let xp = v[p * n + i];
                    let xq = v[q * n + i] * pc;
                    v[p * n + i] = xp * cs - xq * sn;
                    v[q * n + i] = xp * sn + xq * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (u, v)
}

fn svd_tall<T: Real>(a: &[C<T>], m: usize, n: usize) -> Svd<T> {
    let (uc, vc) = hestenes(a, m, n);
    let mut norms: Vec<(T, usize)> = (0..n)
        .map(|j| {
            let s: T = uc[j * m..(j + 1) * m].iter().map(|z| z.norm_sqr()).sum();
            (s.sqrt(), j)
        })
        .collect();
    norms.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal).then(x.1.cmp(&y.1)));
    let mut u = vec![czero::<T>(); m * n];
    let mut vh = vec![czero::<T>(); n * n];
    let mut s = Vec::with_capacity(n);
    for (col, &(sv, j)) in norms.iter().enumerate() {
        s.push(sv);
        if sv > T::zero() {
            for i in 0..m {
                u[i * n + col] = uc[j * m + i] / sv;
            }
        }
        for i in 0..n {
            vh[col * n + i] = vc[j * n + i].conj();
        }
    }
    Svd { u, s, vh, rows: m, cols: n, k: n }
}

/// Thin SVD of a row-major `rows × cols` complex matrix.
pub fn svd<T: Real>(a: &[C<T>], rows: usize, cols: usize) -> Svd<T> {
    assert_eq!(a.len(), rows * cols);
    if rows >= cols {
        return svd_tall(a, rows, cols);
    }
    // A^H = U' S V'^H  =>  A = V' S U'^H
    let mut ah = vec![czero::<T>(); rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            ah[j * rows + i] = a[i * cols + j].conj();
        }
    }
    let t = svd_tall(&ah, cols, rows);
    let k = rows;
    let mut u = vec![czero::<T>(); rows * k];
    let mut vh = vec![czero::<T>(); k * cols];
    // U = V' = (V'^H)^H, V^H = U'^H
    for i in 0..k {
        for j in 0..rows {
            u[j * k + i] = t.vh[i * rows + j].conj();
        }
    }
    for i in 0..cols {
        for j in 0..k {
            vh[j * cols + i] = t.u[i * k + j].conj();
        }
    }
    Svd { u, s: t.s, vh, rows, cols, k }
}

/// Eigendecomposition of a Hermitian `n × n` matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in ascending order and the eigenvectors as columns of a
/// row-major matrix.
pub fn eigh<T: Real>(h: &[C<T>], n: usize) -> (Vec<T>, Vec<C<T>>) {
    assert_eq!(h.len(), n * n);
    let mut a = h.to_vec();
    let mut v = vec![czero::<T>(); n * n];
    for i in 0..n {
        v[i * n + i] = C::new(T::one(), T::zero());
    }
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag += a[i * n + i].norm_sqr();
            for j in 0..n {
                if i != j {
                    off += a[i * n + j].norm_sqr();
                }
            }
        }
        if off <= eps * eps * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let hpq = a[p * n + q];
                let g = hpq.norm();
                if g == T::zero() {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let e = hpq / g;
                let ec = e.conj();
                let zeta = (aqq - app) / (g + g);
                let t = if zeta == T::zero() {
                    T::one()
                } else {
                    zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt())
                };
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = cs * t;
                // columns: A <- A G with G = [[c, s], [-s e*, c e*]]
                for k in 0..n {
                    let xp = a[k * n + p];
                    let xq = a[k * n + q] * ec;
                    a[k * n + p] = xp * cs - xq * sn;
                    a[k * n + q] = xp * sn + xq * cs;
                }
                // rows: A <- G^H A
                for k in 0..n {
                    let xp = a[p * n + k];
                    let xq = a[q * n + k] * e;
                    a[p * n + k] = xp * cs - xq * sn;
                    a[q * n + k] = xp * sn + xq * cs;
                }
                a[p * n + q] = czero();
                a[q * n + p] = czero();
                a[p * n + p].im = T::zero();
                a[q * n + q].im = T::zero();
                for k in 0..n {
                    let xp = v[k * n + p];
                    let xq = v[k * n + q] * ec;
                    v[k * n + p] = xp * cs - xq * sn;
                    v[k * n + q] = xp * sn + xq * cs;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x * n + x].re.partial_cmp(&a[y * n + y].re).unwrap_or(std::cmp::Ordering::Equal));
    let vals = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut vecs = vec![czero::<T>(); n * n];
    for (col, &j) in order.iter().enumerate() {
        for k in 0..n {
            vecs[k * n + col] = v[k * n + j];
        }
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> Vec<C<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..rows * cols).map(|_| C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect()
    }

    fn reconstruct(d: &Svd<f64>) -> Vec<C<f64>> {
        let mut out = vec![C::new(0.0, 0.0); d.rows * d.cols];
        for i in 0..d.rows {
            for j in 0..d.cols {
                for l in 0..d.k {
                    out[i * d.cols + j] += d.u[i * d.k + l] * d.s[l] * d.vh[l * d.cols + j];
                }
            }
        }
        out
    }

    #[test]
    fn svd_reconstructs_tall_and_wide() {
        for &(r, c) in &[(7, 3), (3, 7), (8, 8), (1, 5), (5, 1)] {
            let a = random(r, c, (r * 31 + c) as u64);
            let d = svd(&a, r, c);
            let back = reconstruct(&d);
            let err: f64 = a.iter().zip(&back).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            assert!(err < 1e-12, "{r}x{c}: {err}");
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_u_is_isometric() {
        let a = random(9, 4, 3);
        let d = svd(&a, 9, 4);
        for p in 0..4 {
            for q in 0..4 {
                let dot: C<f64> = (0..9).map(|i| d.u[i * 4 + p].conj() * d.u[i * 4 + q]).sum();
                let want = if p == q { 1.0 } else { 0.0 };
                assert!((dot - C::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn eigh_diagonalizes_random_hermitian() {
        let n = 5;
        let b = random(n, n, 11);
        let mut h = vec![C::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] = b[i * n + j] + b[j * n + i].conj();
            }
        }
        let (vals, vecs) = eigh(&h, n);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        for col in 0..n {
            for i in 0..n {
                let hv: C<f64> = (0..n).map(|k| h[i * n + k] * vecs[k * n + col]).sum();
                assert!((hv - vecs[i * n + col] * vals[col]).norm() < 1e-11);
            }
        }
    }
}
