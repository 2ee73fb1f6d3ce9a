use std::collections::HashMap;
use std::f64::consts::PI;

use super::{length_then_lex, Lattice, Mode};
use crate::linalg::{dot, norm, reject};
use crate::{Error, Result};

/// An ordered, duplicate-free window of reciprocal-lattice modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    modes: Vec<Mode>,
    index: HashMap<Mode, usize>,
}

impl ModeSet {
    /// All `N ∈ Λ*` with `|2πN| <= cutoff`, the zero mode first.
    pub fn ball(lattice: &Lattice, cutoff: f64) -> Self {
        let mut modes = vec![Mode::zero(lattice.dim())];
        modes.extend(lattice.enumerate_dual(cutoff / (2.0 * PI)));
        Self::from_modes(modes).expect("enumeration is duplicate-free")
    }

    pub fn from_modes(modes: Vec<Mode>) -> Result<Self> {
        let mut index = HashMap::with_capacity(modes.len());
        for (i, m) in modes.iter().enumerate() {
            if index.insert(m.clone(), i).is_some() {
                return Err(Error::param("modes", format!("duplicate mode {:?}", m.0)));
            }
        }
        Ok(Self { modes, index })
    }

    /// The same window translated by `shift`.
    pub fn shifted(&self, shift: &Mode) -> Self {
        Self::from_modes(self.modes.iter().map(|m| m.add(shift)).collect()).expect("translation is injective")
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn position(&self, m: &Mode) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn contains(&self, m: &Mode) -> bool {
        self.index.contains_key(m)
    }

    pub fn is_symmetric(&self) -> bool {
        self.modes.iter().all(|m| self.contains(&m.neg()))
    }
}

/// Modes of the window whose shifted frequency `k + 2πN` lies in the open
/// slab-annulus `|(x, e)| < β`, `|ϰ - |x - (x, e) e|| < β`.
pub fn k_beta_set(lattice: &Lattice, modes: &ModeSet, k: &[f64], e: &[f64], kappa: f64, beta: f64) -> Result<Vec<Mode>> {
    if !(beta > 0.0) {
        return Err(Error::param("beta", "must be positive"));
    }
    if !(kappa > beta) {
        return Err(Error::param("kappa", format!("need kappa > beta, got kappa = {kappa}, beta = {beta}")));
    }
    if (norm(e) - 1.0).abs() > 1e-12 {
        return Err(Error::NotOrthonormal(format!("|e| = {}", norm(e))));
    }
    let mut out: Vec<(f64, Mode)> = modes
        .modes()
        .iter()
        .filter(|m| {
            let x = shifted_frequency(lattice, k, m);
            dot(&x, e).abs() < beta && (kappa - norm(&reject(&x, e))).abs() < beta
        })
        .map(|m| (norm(&lattice.dual_cart(m)), m.clone()))
        .collect();
    out.sort_by(|a, b| length_then_lex((a.0 * a.0, &a.1 .0), (b.0 * b.0, &b.1 .0)));
    Ok(out.into_iter().map(|(_, m)| m).collect())
}

/// `k + 2πN` in Cartesian coordinates.
pub fn shifted_frequency(lattice: &Lattice, k: &[f64], m: &Mode) -> Vec<f64> {
    lattice.dual_cart(m).iter().zip(k).map(|(n, k)| k + 2.0 * PI * n).collect()
}
