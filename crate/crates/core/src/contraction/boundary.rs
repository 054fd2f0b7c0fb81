//! Approximate boundary-MPS contraction.
//!
//! The hyperedge network is first converted to bond form: each label is
//! routed along a chain inside every column of its support and crosses to
//! the next column once, at the topmost shared row. Site factors then carry
//! four merged legs `[N, S, W, E]`. Boundary MPSs start from the first and
//! the last column and move towards the middle one; every column they pass
//! is applied exactly as an MPO and the product is compressed back to bond
//! dimension `chi` by a canonical SVD sweep. The middle column is contracted
//! exactly between the two boundaries.

use super::{ContractionConfig, ContractionError, Diagnostics, Scaled};
use crate::peps::CappedNetwork;
use crate::scalar::{Real, C};
use crate::tensor::{contract, svd_split, Label, Tensor};
use std::collections::BTreeSet;

const N: usize = 0;
const S: usize = 1;
const WEST: usize = 2;
const E: usize = 3;

/// Labels routed through each leg of each site.
#[derive(Clone, Debug)]
pub struct BondRouting {
    pub legs: Vec<[Vec<Label>; 4]>,
}

/// Routes every label of `net` through bonds; free labels exit east from
/// the bottom-right site.
pub fn route<T: Real>(net: &CappedNetwork<T>) -> BondRouting {
    let (w, l) = (net.width, net.length);
    let mut legs: Vec<[BTreeSet<Label>; 4]> = vec![Default::default(); w * l];
    let mut labels = BTreeSet::new();
    for t in &net.sites {
        labels.extend(t.labels().iter().copied());
    }
    for &lab in &labels {
        let sup = net.supports.of(lab);
        let mut cols: Vec<usize> = sup.iter().map(|&q| q % l).collect();
        cols.sort();
        cols.dedup();
        for (ci, &c) in cols.iter().enumerate() {
            let rows: Vec<usize> = sup.iter().filter(|&&q| q % l == c).map(|&q| q / l).collect();
            for win in rows.windows(2) {
                assert_eq!(win[1], win[0] + 1, "label {lab:?} has a non-contiguous column support");
                legs[win[0] * l + c][S].insert(lab);
                legs[win[1] * l + c][N].insert(lab);
            }
            if ci + 1 < cols.len() {
                let next = cols[ci + 1];
                assert_eq!(next, c + 1, "label {lab:?} skips a column");
                let r = rows
                    .iter()
                    .copied()
                    .find(|r| sup.contains(&(r * l + next)))
                    .expect("adjacent columns of a support share a row");
                legs[r * l + c][E].insert(lab);
                legs[r * l + next][WEST].insert(lab);
            }
        }
    }
    for &lab in &net.free {
        legs[(w - 1) * l + (l - 1)][E].insert(lab);
    }
    BondRouting { legs: legs.into_iter().map(|a| a.map(|s| s.into_iter().collect())).collect() }
}

/// Site factor `t` rewritten with merged legs `[N, S, W, E]`.
fn bond_tensor<T: Real>(t: &Tensor<T>, legs: &[Vec<Label>; 4]) -> Tensor<T> {
    let dim_of = |lab: Label| t.shape()[t.axis(lab).expect("routed label missing from site")];
    for lab in t.labels() {
        assert!(legs.iter().any(|g| g.contains(lab)), "label {lab:?} not routed");
    }
    let shape: Vec<usize> = legs.iter().map(|g| g.iter().map(|&lab| dim_of(lab)).product()).collect();
    let mut out = Tensor::zeros(shape);
    let axes: Vec<Vec<usize>> = legs.iter().map(|g| g.iter().map(|&lab| t.axis(lab).unwrap()).collect()).collect();
    let rank = t.rank();
    let mut idx = vec![0usize; rank];
    for lin in 0..t.len() {
        let mut rem = lin;
        for k in (0..rank).rev() {
            idx[k] = rem % t.shape()[k];
            rem /= t.shape()[k];
        }
        let v = t.data()[lin];
        if v == C::new(T::zero(), T::zero()) {
            continue;
        }
        let pos: Vec<usize> = axes
            .iter()
            .map(|ax| ax.iter().fold(0usize, |acc, &a| acc * t.shape()[a] + idx[a]))
            .collect();
        out.set(&pos, v);
    }
    out
}

fn normalize<T: Real>(t: &mut Tensor<T>, log: &mut T) {
    let m = t.max_abs();
    if m > T::zero() && m.is_finite() {
        t.scale_real(T::one() / m);
        *log += m.ln();
    }
}

/// Boundary-MPS value of `net`; exact when `chi` exceeds every bond.
pub fn contract_boundary_mps<T: Real>(
    net: &CappedNetwork<T>,
    cfg: &ContractionConfig,
) -> Result<(Scaled<T>, Diagnostics), ContractionError> {
    cfg.validate()?;
    let (w, l) = (net.width, net.length);
    let routing = route(net);
    let floor = T::lit(cfg.svd_floor);
    let bonds: Vec<Tensor<T>> = net.sites.iter().zip(&routing.legs).map(|(t, g)| bond_tensor(t, g)).collect();
    let mut log = net.log_scale;
    let mut diag = Diagnostics::default();
    let v = if l >= 3 {
        // two boundaries meet at the middle column, which is contracted exactly
        let mid = l / 2;
        let mut left = edge_mps(&bonds, w, l, 0, WEST, E, &mut log);
        for c in 1..mid {
            left = apply_and_compress(&left, &bonds, c, l, WEST, cfg.chi, floor, &mut log, &mut diag);
        }
        let mut right = edge_mps(&bonds, w, l, l - 1, E, WEST, &mut log);
        for c in (mid + 1..l - 1).rev() {
            right = apply_and_compress(&right, &bonds, c, l, E, cfg.chi, floor, &mut log, &mut diag);
        }
        close_sandwich(&left, &bonds, mid, l, &right, &mut log)
    } else {
        let mut mps = edge_mps(&bonds, w, l, 0, WEST, E, &mut log);
        for c in 1..l {
            mps = apply_and_compress(&mps, &bonds, c, l, WEST, cfg.chi, floor, &mut log, &mut diag);
        }
        close_chain(&mps, &mut log)
    };
    let free_sorted: Vec<Label> = routing.legs[(w - 1) * l + (l - 1)][E]
        .iter()
        .copied()
        .filter(|lab| net.free.contains(lab))
        .collect();
    let out = finish_free(net, &v, &routing.legs[(w - 1) * l + (l - 1)][E], &free_sorted)?;
    Ok((Scaled { tensor: out, log_scale: log }, diag))
}

/// Column `c` as an MPS `[up, down, phys]` with physical leg `phys`; the
/// `outer` leg is merged into the down bond, so the free legs of the
/// bottom-right site ride along the bottom bond of the right boundary.
fn edge_mps<T: Real>(bonds: &[Tensor<T>], w: usize, l: usize, c: usize, outer: usize, phys: usize, log: &mut T) -> Vec<Tensor<T>> {
    (0..w)
        .map(|r| {
            let t = bonds[r * l + c].permute(&[N, S, outer, phys]);
            let sh = t.shape().to_vec();
            let mut m = t.reshape(vec![sh[0], sh[1] * sh[2], sh[3]]).unwrap();
            normalize(&mut m, log);
            m
        })
        .collect()
}

/// Contracts a chain whose physical legs are trivial except on the bottom
/// site; returns the vector over that leg.
fn close_chain<T: Real>(mps: &[Tensor<T>], log: &mut T) -> Tensor<T> {
    let mut acc: Tensor<T> = Tensor::from_fn(vec![1], |_| C::new(T::one(), T::zero()));
    for m in mps {
        // acc [up] · m [up, down, phys] -> [down · phys]
        let t = contract(&acc, m, &[(0, 0)]).unwrap();
        let n = t.len();
        acc = t.reshape(vec![n]).unwrap();
        normalize(&mut acc, log);
    }
    acc
}

/// Contracts `left`, column `c` and `right` row by row; returns the vector
/// over the bottom bond of `right`.
fn close_sandwich<T: Real>(left: &[Tensor<T>], bonds: &[Tensor<T>], c: usize, l: usize, right: &[Tensor<T>], log: &mut T) -> Tensor<T> {
    // acc [left up, column up, right up]
    let mut acc: Tensor<T> = Tensor::from_fn(vec![1, 1, 1], |_| C::new(T::one(), T::zero()));
    for (r, (lm, rm)) in left.iter().zip(right).enumerate() {
        let o = &bonds[r * l + c];
        // [cu, ru, ld, lp] -> [ru, ld, s, e] -> [ld, s, rd]
        let t = contract(&acc, lm, &[(0, 0)]).unwrap();
        let t = contract(&t, o, &[(0, N), (3, WEST)]).unwrap();
        acc = contract(&t, rm, &[(0, 0), (3, 2)]).unwrap();
        normalize(&mut acc, log);
    }
    let n = acc.len();
    acc.reshape(vec![n]).unwrap()
}

/// Extracts the free labels from the bottom-right east leg, which may also
/// route labels not present (it only carries free labels east).
fn finish_free<T: Real>(net: &CappedNetwork<T>, v: &Tensor<T>, east: &[Label], free_sorted: &[Label]) -> Result<Tensor<T>, ContractionError> {
    if net.free.is_empty() {
        if v.len() != 1 {
            return Err(ContractionError::Numerical("boundary contraction left open legs".into()));
        }
        return Ok(Tensor::scalar(v.data()[0]));
    }
    debug_assert_eq!(east, free_sorted);
    let shape: Vec<usize> = free_sorted.iter().map(|_| 2).collect();
    let t = v.reshape(shape).unwrap().with_labels(free_sorted.to_vec()).unwrap();
    let perm: Vec<usize> = net.free.iter().map(|&lab| t.axis(lab).unwrap()).collect();
    Ok(t.permute(&perm))
}

/// Applies column `c` exactly as an MPO entering through leg `inward`, then
/// compresses the result: a
/// top-to-bottom sweep brings it into left-canonical form and a bottom-to-top
/// sweep truncates every bond to `chi`, so each truncation sees orthonormal
/// environments on both sides.
#[allow(clippy::too_many_arguments)]
fn apply_and_compress<T: Real>(
    mps: &[Tensor<T>],
    bonds: &[Tensor<T>],
    c: usize,
    l: usize,
    inward: usize,
    chi: usize,
    floor: T,
    log: &mut T,
    diag: &mut Diagnostics,
) -> Vec<Tensor<T>> {
    let w = mps.len();
    let mut next: Vec<Tensor<T>> = (0..w)
        .map(|r| {
            let o = &bonds[r * l + c];
            // M [a, d, p] · O [n, s, w, e] -> [a, n, d, s, outward]
            let x = contract(&mps[r], o, &[(2, inward)]).unwrap().permute(&[0, 2, 1, 3, 4]);
            let sh = x.shape().to_vec();
            let mut y = x.reshape(vec![sh[0] * sh[1], sh[2] * sh[3], sh[4]]).unwrap();
            normalize(&mut y, log);
            y
        })
        .collect();
    for r in 0..w - 1 {
        let m = &next[r];
        let full = (m.shape()[0] * m.shape()[2]).min(m.shape()[1]);
        let sp = svd_split(m, &[0, 2], &[1], full, floor, Label::Bond(0)).unwrap();
        next[r] = sp.left.permute(&[0, 2, 1]);
        let mut below = contract(&sp.right, &next[r + 1], &[(1, 0)]).unwrap();
        normalize(&mut below, log);
        next[r + 1] = below;
    }
    for r in (1..w).rev() {
        let m = &next[r];
        let sp = svd_split(m, &[1, 2], &[0], chi, floor, Label::Bond(0)).unwrap();
        let kept: T = sp.singular_values.iter().map(|&s| s * s).sum();
        let rel = (sp.discarded_weight / (kept + sp.discarded_weight)).to_f64_lossy();
        diag.max_discarded = diag.max_discarded.max(rel);
        diag.total_discarded += rel;
        diag.max_bond = diag.max_bond.max(sp.singular_values.len());
        next[r] = sp.left.permute(&[2, 0, 1]);
        let mut above = contract(&next[r - 1], &sp.right, &[(1, 1)]).unwrap().permute(&[0, 2, 1]);
        normalize(&mut above, log);
        next[r - 1] = above;
    }
    next
}
