//! Exact contraction by zipping site factors into a growing environment.
//!
//! A hyperedge label stays open while the environment has not yet covered
//! every site of its support; once covered it is summed. Column environments
//! built this way are exactly the cached left/right partial contractions of
//! the column sweep.

use super::{ContractionConfig, ContractionError, Scaled};
use crate::peps::{CappedNetwork, Supports};
use crate::scalar::{Real, C};
use crate::tensor::{contract_hyper, Label, Tensor};
use std::collections::BTreeMap;

/// Partial contraction over the `covered` sites.
#[derive(Clone, Debug)]
pub struct Env<T: Real> {
    pub tensor: Tensor<T>,
    pub covered: Vec<bool>,
    pub log_scale: T,
}

impl<T: Real> Env<T> {
    pub fn empty(n_sites: usize) -> Self {
        Self { tensor: Tensor::scalar(C::new(T::one(), T::zero())), covered: vec![false; n_sites], log_scale: T::zero() }
    }

    fn normalize(&mut self) {
        let m = self.tensor.max_abs();
        if m > T::zero() && m.is_finite() {
            self.tensor.scale_real(T::one() / m);
            self.log_scale += m.ln();
        }
    }
}

/// Label bookkeeping shared by all absorb/join steps of one network.
pub struct Zipper<'a> {
    supports: &'a Supports,
    free: &'a [Label],
}

impl<'a> Zipper<'a> {
    pub fn new(supports: &'a Supports, free: &'a [Label]) -> Self {
        Self { supports, free }
    }

    pub fn for_network<T: Real>(net: &'a CappedNetwork<T>) -> Self {
        Self::new(&net.supports, &net.free)
    }

    fn open(&self, l: Label, covered: &[bool]) -> bool {
        self.free.contains(&l) || self.supports.of(l).iter().any(|&s| !covered[s])
    }

    fn prune<T: Real>(&self, mut t: Tensor<T>, covered: &[bool]) -> Tensor<T> {
        while let Some(ax) = t.labels().iter().position(|&l| !self.open(l, covered)) {
            t = t.sum_axis(ax);
        }
        t
    }

    /// Adds site factor `t` of site `site` to `env`.
    pub fn absorb<T: Real>(&self, env: &Env<T>, site: usize, t: &Tensor<T>) -> Env<T> {
        let mut covered = env.covered.clone();
        covered[site] = true;
        let out = contract_hyper(&env.tensor, t, |l| self.open(l, &covered));
        let mut e = Env { tensor: self.prune(out, &covered), covered, log_scale: env.log_scale };
        e.normalize();
        e
    }

    /// Absorbs several sites in order.
    pub fn absorb_all<'t, T: Real + 't>(&self, env: &Env<T>, sites: impl IntoIterator<Item = (usize, &'t Tensor<T>)>) -> Env<T> {
        let mut e = env.clone();
        for (s, t) in sites {
            e = self.absorb(&e, s, t);
        }
        e
    }

    /// Contracts two environments over disjoint site sets.
    pub fn join<T: Real>(&self, a: &Env<T>, b: &Env<T>) -> Env<T> {
        let covered: Vec<bool> = a.covered.iter().zip(&b.covered).map(|(&x, &y)| x || y).collect();
        let out = contract_hyper(&a.tensor, &b.tensor, |l| self.open(l, &covered));
        let mut e = Env { tensor: self.prune(out, &covered), covered, log_scale: a.log_scale + b.log_scale };
        e.normalize();
        e
    }

    /// Orders the remaining (free) labels of a complete contraction.
    pub fn finish<T: Real>(&self, env: &Env<T>) -> Tensor<T> {
        let perm: Vec<usize> = self
            .free
            .iter()
            .map(|&l| env.tensor.axis(l).expect("free label missing from contraction"))
            .collect();
        env.tensor.permute(&perm)
    }
}

/// Right environments `R[c]` covering columns `c..L` (`R[L]` is empty).
pub fn right_envs<T: Real>(net: &CappedNetwork<T>, from: usize) -> Vec<Env<T>> {
    let z = Zipper::for_network(net);
    let (w, l) = (net.width, net.length);
    let mut out = vec![Env::empty(w * l); l + 1];
    for c in (from..l).rev() {
        out[c] = z.absorb_all(&out[c + 1], (0..w).map(|r| (r * l + c, &net.sites[r * l + c])));
    }
    out
}

/// Largest environment (in entries) of a left-to-right column zip, assuming
/// every label has dimension 2 or its actual dimension where known.
pub fn estimate_entries<T: Real>(net: &CappedNetwork<T>) -> f64 {
    let (w, l) = (net.width, net.length);
    let mut dims: BTreeMap<Label, usize> = BTreeMap::new();
    for t in &net.sites {
        for (k, &lab) in t.labels().iter().enumerate() {
            dims.insert(lab, t.shape()[k]);
        }
    }
    let mut covered = vec![false; w * l];
    let mut worst = 1.0f64;
    let z = Zipper::for_network(net);
    for c in 0..l {
        for r in 0..w {
            covered[r * l + c] = true;
            let size: f64 = dims
                .iter()
                .filter(|(&lab, _)| {
                    let sup = net.supports.of(lab);
                    sup.iter().any(|&s| covered[s]) && z.open(lab, &covered)
                })
                .map(|(_, &d)| d as f64)
                .product();
            worst = worst.max(size);
        }
    }
    worst
}

pub(crate) fn check_memory<T: Real>(net: &CappedNetwork<T>, cfg: &ContractionConfig, factor: f64) -> Result<(), ContractionError> {
    let est = estimate_entries(net) * factor;
    if est > cfg.max_entries as f64 {
        return Err(ContractionError::Resource(format!(
            "exact contraction of a {}x{} lattice needs about {est:.3e} entries (cap {}); use the boundary_mps engine",
            net.width, net.length, cfg.max_entries
        )));
    }
    Ok(())
}

/// Exact value of `net` (scalar, or the free labels in `net.free` order).
pub fn contract_exact<T: Real>(net: &CappedNetwork<T>, cfg: &ContractionConfig) -> Result<Scaled<T>, ContractionError> {
    check_memory(net, cfg, 1.0)?;
    let z = Zipper::for_network(net);
    let (w, l) = (net.width, net.length);
    let mut env = Env::empty(w * l);
    for c in 0..l {
        env = z.absorb_all(&env, (0..w).map(|r| (r * l + c, &net.sites[r * l + c])));
    }
    Ok(Scaled { tensor: z.finish(&env), log_scale: env.log_scale + net.log_scale })
}
