//! Dense primal active-set solver for small strictly convex quadratic programs
//! `min ½xᵀHx + gᵀx  s.t.  A x ≥ b`, started from a feasible point.

use crate::scalar::Real;

pub struct Qp<'a, T: Real> {
    pub n: usize,
    /// Row-major n×n, symmetric positive definite.
    pub h: &'a [T],
    pub g: &'a [T],
    /// One row of length n per constraint.
    pub a: &'a [Vec<T>],
    pub b: &'a [T],
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_dense<T: Real>(mut m: Vec<Vec<T>>, mut rhs: Vec<T>) -> Option<Vec<T>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[piv][col].abs() <= T::epsilon() * T::lit(1e3) {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != T::zero() {
                for c in col..n {
                    let v = m[col][c];
                    m[r][c] -= f * v;
                }
                let v = rhs[col];
                rhs[r] -= f * v;
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut s = rhs[r];
        for c in r + 1..n {
            s -= m[r][c] * x[c];
        }
        x[r] = s / m[r][r];
    }
    Some(x)
}

impl<T: Real> Qp<'_, T> {
    fn grad(&self, x: &[T]) -> Vec<T> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.h[i * self.n + j] * x[j]).sum::<T>() + self.g[i]).collect()
    }

    pub fn objective(&self, x: &[T]) -> T {
        let gx = self.grad(x);
        (0..self.n).map(|i| (gx[i] + self.g[i]) * x[i]).sum::<T>() * T::lit(0.5)
    }

    /// Runs the active-set iteration from the feasible point `x0`.
    pub fn solve(&self, x0: &[T]) -> Vec<T> {
        let n = self.n;
        let tol = T::lit(1e-13);
        let mut x = x0.to_vec();
        let mut work: Vec<usize> = Vec::new();
        for _ in 0..500 {
            // equality-constrained step: H p - A_Wᵀ λ = -(Hx+g), A_W p = 0
            let k = work.len();
            let dim = n + k;
            let mut m = vec![vec![T::zero(); dim]; dim];
            let mut rhs = vec![T::zero(); dim];
            let gx = self.grad(&x);
            for i in 0..n {
                for j in 0..n {
                    m[i][j] = self.h[i * n + j];
                }
                for (w, &ci) in work.iter().enumerate() {
                    m[i][n + w] = -self.a[ci][i];
                    m[n + w][i] = self.a[ci][i];
                }
                rhs[i] = -gx[i];
            }
            let Some(sol) = solve_dense(m, rhs) else {
                // dependent working set: drop the newest constraint
                work.pop();
                continue;
            };
            let p = &sol[..n];
            let lam = &sol[n..];
            let pnorm = p.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            if pnorm <= tol {
                match lam.iter().enumerate().min_by(|a, b| a.1.partial_cmp(b.1).unwrap()) {
                    Some((j, &l)) if l < -tol => {
                        work.remove(j);
                        continue;
                    }
                    _ => return x,
                }
            }
            let mut alpha = T::one();
            let mut block = None;
            for (ci, row) in self.a.iter().enumerate() {
                if work.contains(&ci) {
                    continue;
                }
                let ap: T = row.iter().zip(p).map(|(&r, &v)| r * v).sum();
                if ap < -tol * T::lit(1e-3) {
                    let ax: T = row.iter().zip(&x).map(|(&r, &v)| r * v).sum();
                    let step = ((self.b[ci] - ax) / ap).max(T::zero());
                    if step < alpha {
                        alpha = step;
                        block = Some(ci);
                    }
                }
            }
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            if let Some(ci) = block {
                work.push(ci);
                if work.len() > n {
                    work.remove(0);
                }
            }
        }
        x
    }
}
