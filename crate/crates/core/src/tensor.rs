//! Dense complex tensors with row-major storage and per-index labels.
//!
//! Contraction always goes through an explicit permutation followed by a
//! (batched) matrix multiply. Output index orders are documented on each
//! operation and never depend on hashing.

use crate::linalg;
use crate::scalar::{czero, Real, C};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("argument error: {0}")]
    Argument(String),
}

pub type Result<T> = std::result::Result<T, TensorError>;

/// Compass direction of a virtual bond in the square lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    N,
    E,
    S,
    W,
}

/// Ket or bra half of a doubled (density-matrix) index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Ket,
    Bra,
}

/// Role of a check-variable index: the ket/bra copies of a preparation
/// projector, the measurement projector absorbed on the ket side, or a
/// further copy of that projector applied again.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Ket,
    Bra,
    Meas,
    Repeat(u16),
}

/// Tag attached to every tensor index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// Untagged positional index.
    Index(u32),
    /// Physical index of a doubled tensor (`i` for ket, `i'` for bra).
    Phys(Side),
    /// Virtual bond pointing in a lattice direction.
    Virtual(Dir),
    /// Shared variable of a check projector chain.
    Check { id: u32, role: Role },
    /// Free ancilla index of the half-encoded Bell pair.
    Ancilla(Side),
    /// Auxiliary bond created by an engine.
    Bond(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T: Real> {
    shape: Vec<usize>,
    data: Vec<C<T>>,
    labels: Vec<Label>,
}

fn default_labels(rank: usize) -> Vec<Label> {
    (0..rank as u32).map(Label::Index).collect()
}

fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

impl<T: Real> Tensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<C<T>>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(TensorError::Shape(format!(
                "data length {} does not match shape {:?}",
                data.len(),
                shape
            )));
        }
        let labels = default_labels(shape.len());
        Ok(Self { shape, data, labels })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        let labels = default_labels(shape.len());
        Self { shape, data: vec![czero(); n], labels }
    }

    pub fn scalar(v: C<T>) -> Self {
        Self { shape: vec![], data: vec![v], labels: vec![] }
    }

    /// Builds a tensor by evaluating `f` on every multi-index in row-major order.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> C<T>) -> Self {
        let mut t = Self::zeros(shape);
        let rank = t.shape.len();
        let mut idx = vec![0usize; rank];
        for pos in 0..t.data.len() {
            t.data[pos] = f(&idx);
            for k in (0..rank).rev() {
                idx[k] += 1;
                if idx[k] < t.shape[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        t
    }

    /// Row-major matrix as a rank-2 tensor.
    pub fn matrix(rows: usize, cols: usize, data: Vec<C<T>>) -> Result<Self> {
        Self::new(vec![rows, cols], data)
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != self.shape.len() {
            return Err(TensorError::Argument(format!(
                "{} labels for rank-{} tensor",
                labels.len(),
                self.shape.len()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn relabel(&mut self, from: Label, to: Label) {
        for l in &mut self.labels {
            if *l == from {
                *l = to;
            }
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C<T>] {
        &mut self.data
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn axis(&self, label: Label) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn get(&self, idx: &[usize]) -> C<T> {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: C<T>) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.shape.len(), "index rank mismatch");
        let mut o = 0;
        for (k, &i) in idx.iter().enumerate() {
            assert!(i < self.shape[k], "index out of range");
            o = o * self.shape[k] + i;
        }
        o
    }

    /// The single entry of a rank-0 tensor.
    pub fn value(&self) -> C<T> {
        assert!(self.shape.is_empty(), "value() on rank-{} tensor", self.shape.len());
        self.data[0]
    }

    /// Reorders indices so that output axis `k` is input axis `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.rank(), "permutation rank mismatch");
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return self.clone();
        }
        let shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let labels = perm.iter().map(|&p| self.labels[p]).collect();
        let data = permute_data(&self.data, &self.shape, perm);
        Self { shape, data, labels }
    }

    /// Reshape without moving data; labels become positional.
    pub fn reshape(&self, shape: Vec<usize>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != self.data.len() {
            return Err(TensorError::Shape(format!("cannot reshape {:?} into {:?}", self.shape, shape)));
        }
        let labels = default_labels(shape.len());
        Ok(Self { shape, data: self.data.clone(), labels })
    }

    /// Removes `axis` by fixing it to `value`.
    pub fn fix(&self, axis: usize, value: usize) -> Self {
        assert!(value < self.shape[axis]);
        let outer: usize = self.shape[..axis].iter().product();
        let inner: usize = self.shape[axis + 1..].iter().product();
        let d = self.shape[axis];
        let mut data = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = (o * d + value) * inner;
            data.extend_from_slice(&self.data[base..base + inner]);
        }
        let mut shape = self.shape.clone();
        shape.remove(axis);
        let mut labels = self.labels.clone();
        labels.remove(axis);
        Self { shape, data, labels }
    }

    /// Sums over `axis`, removing it.
    pub fn sum_axis(&self, axis: usize) -> Self {
        let outer: usize = self.shape[..axis].iter().product();
        let inner: usize = self.shape[axis + 1..].iter().product();
        let d = self.shape[axis];
        let mut data = vec![czero(); outer * inner];
        for o in 0..outer {
            for v in 0..d {
                let base = (o * d + v) * inner;
                for i in 0..inner {
                    data[o * inner + i] += self.data[base + i];
                }
            }
        }
        let mut shape = self.shape.clone();
        shape.remove(axis);
        let mut labels = self.labels.clone();
        labels.remove(axis);
        Self { shape, data, labels }
    }

    /// Restricts to entries where `keep` and `drop` carry equal values and
    /// removes `drop` (a diagonal restriction, not a trace).
    pub fn merge_diagonal(&self, keep: usize, drop: usize) -> Self {
        assert_ne!(keep, drop);
        assert_eq!(self.shape[keep], self.shape[drop]);
        let mut shape = self.shape.clone();
        shape.remove(drop);
        let mut labels = self.labels.clone();
        labels.remove(drop);
        let st = strides_of(&self.shape);
        let keep_out = if keep > drop { keep - 1 } else { keep };
        Self::from_fn_labeled(shape, labels, |idx| {
            let mut o = 0;
            let mut j = 0;
            for ax in 0..self.shape.len() {
                let v = if ax == drop {
                    idx[keep_out]
                } else {
                    let v = idx[j];
                    j += 1;
                    v
                };
                o += v * st[ax];
            }
            self.data[o]
        })
    }

    fn from_fn_labeled(shape: Vec<usize>, labels: Vec<Label>, f: impl FnMut(&[usize]) -> C<T>) -> Self {
        let mut t = Self::from_fn(shape, f);
        t.labels = labels;
        t
    }

    pub fn scale(&mut self, s: C<T>) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn scale_real(&mut self, s: T) {
        for z in &mut self.data {
            *z = *z * s;
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Frobenius distance to a tensor of identical shape.
    pub fn distance(&self, other: &Self) -> T {
        assert_eq!(self.shape, other.shape);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum::<T>().sqrt()
    }
}

fn permute_data<T: Real>(data: &[C<T>], shape: &[usize], perm: &[usize]) -> Vec<C<T>> {
    let rank = shape.len();
    let src_st = strides_of(shape);
    let out_shape: Vec<usize> = perm.iter().map(|&p| shape[p]).collect();
    let st: Vec<usize> = perm.iter().map(|&p| src_st[p]).collect();
    let n = data.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let last = rank - 1;
    let (ln, ls) = (out_shape[last], st[last]);
    let mut idx = vec![0usize; rank];
    let mut base = 0usize;
    loop {
        let mut o = base;
        for _ in 0..ln {
            out.push(data[o]);
            o += ls;
        }
        // advance the odometer on axes before the last
        let mut k = last;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            base += st[k];
            if idx[k] < out_shape[k] {
                break;
            }
            base -= st[k] * out_shape[k];
            idx[k] = 0;
        }
    }
}

/// `out[b,i,j] = Σ_k a[b,i,k] · b[b,k,j]`, skipping exact zeros of `a`.
fn batched_gemm<T: Real>(a: &[C<T>], b: &[C<T>], nb: usize, m: usize, k: usize, n: usize) -> Vec<C<T>> {
    let mut out = vec![czero::<T>(); nb * m * n];
    let zero = czero::<T>();
    for bt in 0..nb {
        let ab = &a[bt * m * k..(bt + 1) * m * k];
        let bb = &b[bt * k * n..(bt + 1) * k * n];
        let ob = &mut out[bt * m * n..(bt + 1) * m * n];
        for i in 0..m {
            let row = &mut ob[i * n..(i + 1) * n];
            for kk in 0..k {
                let av = ab[i * k + kk];
                if av == zero {
                    continue;
                }
                let brow = &bb[kk * n..(kk + 1) * n];
                for (o, &bv) in row.iter_mut().zip(brow) {
                    *o += av * bv;
                }
            }
        }
    }
    out
}

/// Sums over the paired indices of `a` and `b`.
///
/// Output order: the unpaired indices of `a` in their original order,
/// followed by the unpaired indices of `b` in their original order.
pub fn contract<T: Real>(a: &Tensor<T>, b: &Tensor<T>, pairs: &[(usize, usize)]) -> Result<Tensor<T>> {
    let mut seen_a = vec![false; a.rank()];
    let mut seen_b = vec![false; b.rank()];
    for &(i, j) in pairs {
        if i >= a.rank() || j >= b.rank() {
            return Err(TensorError::Argument(format!("pair ({i},{j}) out of range")));
        }
        if seen_a[i] || seen_b[j] {
            return Err(TensorError::Argument(format!("repeated index in pair ({i},{j})")));
        }
        seen_a[i] = true;
        seen_b[j] = true;
        if a.shape[i] != b.shape[j] {
            return Err(TensorError::Shape(format!(
                "pair ({i},{j}) has dimensions {} and {}",
                a.shape[i], b.shape[j]
            )));
        }
    }
    let free_a: Vec<usize> = (0..a.rank()).filter(|&k| !seen_a[k]).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|&k| !seen_b[k]).collect();
    let mut pa = free_a.clone();
    pa.extend(pairs.iter().map(|p| p.0));
    let mut pb: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    pb.extend(free_b.iter().copied());
    let ap = a.permute(&pa);
    let bp = b.permute(&pb);
    let m: usize = free_a.iter().map(|&k| a.shape[k]).product();
    let n: usize = free_b.iter().map(|&k| b.shape[k]).product();
    let k: usize = pairs.iter().map(|p| a.shape[p.0]).product();
    let data = batched_gemm(&ap.data, &bp.data, 1, m, k, n);
    let mut shape: Vec<usize> = free_a.iter().map(|&x| a.shape[x]).collect();
    shape.extend(free_b.iter().map(|&x| b.shape[x]));
    let mut labels: Vec<Label> = free_a.iter().map(|&x| a.labels[x]).collect();
    labels.extend(free_b.iter().map(|&x| b.labels[x]));
    Ok(Tensor { shape, data, labels })
}

/// Label-driven contraction with hyperedge support.
///
/// Labels present in both tensors are either kept as shared batch indices
/// (when `keep` returns true) or summed. Output order: kept shared labels in
/// the order they appear in `a`, then the remaining labels of `a`, then the
/// remaining labels of `b`.
pub fn contract_hyper<T: Real>(a: &Tensor<T>, b: &Tensor<T>, keep: impl Fn(Label) -> bool) -> Tensor<T> {
    let mut batch_a = Vec::new();
    let mut batch_b = Vec::new();
    let mut sum_a = Vec::new();
    let mut sum_b = Vec::new();
    let mut free_a = Vec::new();
    let mut shared_b = vec![false; b.rank()];
    for (ia, &l) in a.labels.iter().enumerate() {
        match b.labels.iter().position(|&m| m == l) {
            Some(ib) => {
                assert_eq!(a.shape[ia], b.shape[ib], "dimension mismatch on shared label {l:?}");
                shared_b[ib] = true;
                if keep(l) {
                    batch_a.push(ia);
                    batch_b.push(ib);
                } else {
                    sum_a.push(ia);
                    sum_b.push(ib);
                }
            }
            None => free_a.push(ia),
        }
    }
    let free_b: Vec<usize> = (0..b.rank()).filter(|&k| !shared_b[k]).collect();
    let pa: Vec<usize> = batch_a.iter().chain(&free_a).chain(&sum_a).copied().collect();
    let pb: Vec<usize> = batch_b.iter().chain(&sum_b).chain(&free_b).copied().collect();
    let ap = a.permute(&pa);
    let bp = b.permute(&pb);
    let dims = |t: &Tensor<T>, ax: &[usize]| -> usize { ax.iter().map(|&k| t.shape[k]).product() };
    let nb = dims(a, &batch_a);
    let m = dims(a, &free_a);
    let k = dims(a, &sum_a);
    let n = dims(b, &free_b);
    let data = batched_gemm(&ap.data, &bp.data, nb, m, k, n);
    let shape = batch_a
        .iter()
        .chain(&free_a)
        .map(|&x| a.shape[x])
        .chain(free_b.iter().map(|&x| b.shape[x]))
        .collect();
    let labels = batch_a
        .iter()
        .chain(&free_a)
        .map(|&x| a.labels[x])
        .chain(free_b.iter().map(|&x| b.labels[x]))
        .collect();
    Tensor { shape, data, labels }
}

/// Sums the diagonal of each (in, out) index pair. Remaining indices keep
/// their relative order.
pub fn partial_trace<T: Real>(t: &Tensor<T>, pairs: &[(usize, usize)]) -> Result<Tensor<T>> {
    let mut used = vec![false; t.rank()];
    for &(i, j) in pairs {
        if i >= t.rank() || j >= t.rank() || i == j || used[i] || used[j] {
            return Err(TensorError::Argument(format!("invalid trace pair ({i},{j})")));
        }
        if t.shape[i] != t.shape[j] {
            return Err(TensorError::Shape(format!(
                "trace pair ({i},{j}) has dimensions {} and {}",
                t.shape[i], t.shape[j]
            )));
        }
        used[i] = true;
        used[j] = true;
    }
    let rest: Vec<usize> = (0..t.rank()).filter(|&k| !used[k]).collect();
    let st = strides_of(&t.shape);
    let shape: Vec<usize> = rest.iter().map(|&k| t.shape[k]).collect();
    let labels: Vec<Label> = rest.iter().map(|&k| t.labels[k]).collect();
    let tr_dims: Vec<usize> = pairs.iter().map(|p| t.shape[p.0]).collect();
    let tr_st: Vec<usize> = pairs.iter().map(|p| st[p.0] + st[p.1]).collect();
    let tr_total: usize = tr_dims.iter().product();
    let mut out = Tensor::from_fn(shape, |idx| {
        let base: usize = idx.iter().zip(&rest).map(|(&v, &k)| v * st[k]).sum();
        let mut acc = czero::<T>();
        for lin in 0..tr_total {
            let mut rem = lin;
            let mut o = base;
            for q in (0..tr_dims.len()).rev() {
                o += (rem % tr_dims[q]) * tr_st[q];
                rem /= tr_dims[q];
            }
            acc += t.data[o];
        }
        acc
    });
    out.labels = labels;
    Ok(out)
}

/// Result of [`svd_split`].
#[derive(Clone, Debug)]
pub struct Split<T: Real> {
    /// Isometric factor: left indices followed by the new bond.
    pub left: Tensor<T>,
    /// `diag(s) · V†`: the new bond followed by the right indices.
    pub right: Tensor<T>,
    /// Kept singular values, descending.
    pub singular_values: Vec<T>,
    /// Sum of squares of the discarded singular values.
    pub discarded_weight: T,
}

/// Default absolute singular-value floor.
pub const SVD_FLOOR: f64 = 1e-14;

/// Rank-≤`chi` factorization of `t` across the (left, right) index partition.
///
/// Keeps the `chi` largest singular values, additionally dropping those at or
/// below `floor` (at least one value is always kept). The new bond carries the
/// label `bond` on both factors.
pub fn svd_split<T: Real>(
    t: &Tensor<T>,
    left: &[usize],
    right: &[usize],
    chi: usize,
    floor: T,
    bond: Label,
) -> Result<Split<T>> {
    if chi < 1 {
        return Err(TensorError::Argument("chi must be at least 1".into()));
    }
    let mut seen = vec![false; t.rank()];
    for &k in left.iter().chain(right) {
        if k >= t.rank() || seen[k] {
            return Err(TensorError::Argument(format!("index {k} repeated or out of range")));
        }
        seen[k] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(TensorError::Argument("partition does not cover all indices".into()));
    }
    let perm: Vec<usize> = left.iter().chain(right).copied().collect();
    let p = t.permute(&perm);
    let rows: usize = left.iter().map(|&k| t.shape[k]).product();
    let cols: usize = right.iter().map(|&k| t.shape[k]).product();
    let d = linalg::svd(&p.data, rows, cols);
    let mut keep = d.s.iter().take(chi).take_while(|&&s| s > floor).count();
    keep = keep.max(1);
    let discarded_weight = d.s[keep..].iter().map(|&s| s * s).sum();
    let mut ldata = vec![czero::<T>(); rows * keep];
    for i in 0..rows {
        for j in 0..keep {
            ldata[i * keep + j] = d.u[i * d.k + j];
        }
    }
    let mut rdata = vec![czero::<T>(); keep * cols];
    for i in 0..keep {
        for j in 0..cols {
            rdata[i * cols + j] = d.vh[i * cols + j] * d.s[i];
        }
    }
    let mut lshape: Vec<usize> = left.iter().map(|&k| t.shape[k]).collect();
    lshape.push(keep);
    let mut llabels: Vec<Label> = left.iter().map(|&k| t.labels[k]).collect();
    llabels.push(bond);
    let mut rshape = vec![keep];
    rshape.extend(right.iter().map(|&k| t.shape[k]));
    let mut rlabels = vec![bond];
    rlabels.extend(right.iter().map(|&k| t.labels[k]));
    Ok(Split {
        left: Tensor { shape: lshape, data: ldata, labels: llabels },
        right: Tensor { shape: rshape, data: rdata, labels: rlabels },
        singular_values: d.s[..keep].to_vec(),
        discarded_weight,
    })
}
