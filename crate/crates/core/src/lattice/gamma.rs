//! Selection of a period vector `γ` whose orthogonal dual sublattice is
//! sparse and whose slab `{e' : |(e', γ)| <= h}` carries little of a given
//! atomic sphere measure.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{Lattice, LatticeVec, Mode};
use crate::linalg::{dot, norm, par_map};
use crate::{Error, Result};

const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub direction: Vec<f64>,
    pub weight: f64,
}

/// A nonnegative atomic measure on the unit sphere. Atoms are kept in a
/// canonical order so sums do not depend on how the input was listed.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SphereMeasure {
    atoms: Vec<Atom>,
}

impl SphereMeasure {
    pub fn new(mut atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if (norm(&a.direction) - 1.0).abs() > UNIT_TOL {
                return Err(Error::NotOrthonormal(format!("atom direction has length {}", norm(&a.direction))));
            }
            if !(a.weight >= 0.0) || !a.weight.is_finite() {
                return Err(Error::param("weight", format!("atom weight {} must be finite and >= 0", a.weight)));
            }
        }
        atoms.sort_by(|a, b| {
            a.direction
                .iter()
                .zip(&b.direction)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
                .then(a.weight.total_cmp(&b.weight))
        });
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).fold(0.0, |s, x| s + x)
    }

    /// `μ({e' : |(e', v)| <= h})`.
    pub fn slab(&self, v: &[f64], h: f64) -> f64 {
        self.atoms.iter().filter(|a| dot(&a.direction, v).abs() <= h).map(|a| a.weight).fold(0.0, |s, x| s + x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaCertificate {
    pub gamma: LatticeVec,
    pub gamma_cart: Vec<f64>,
    pub length: f64,
    pub r0: f64,
    pub h: f64,
    pub slab_weight: f64,
    pub total_weight: f64,
    /// `μ(slab) / μ(S)` divided by `|γ|^{-1} max{h, R0^{-1/(n-1)}}`: the
    /// smallest `c2` for which condition 3 holds.
    pub slab_ratio: f64,
    /// Shortest dual vector orthogonal to `γ` inside the search window.
    pub min_orth: Option<f64>,
    /// `min_orth / R0^{1/(n-1)}`; `None` when the window holds no such vector.
    pub min_orth_ratio: Option<f64>,
    pub orth_window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSearch {
    pub certificate: GammaCertificate,
    /// Condition 2 holds for every `c1` strictly below this value.
    pub c1_sup: f64,
    /// True when `c1_sup` is limited by the enumeration window rather than
    /// by an orthogonal dual vector.
    pub window_limited: bool,
    /// Condition 3 holds for every `c2 >= c2_min`.
    pub c2_min: f64,
    pub candidates: usize,
}

fn root_exponent(lattice: &Lattice) -> f64 {
    1.0 / (lattice.dim() as f64 - 1.0)
}

fn orth_window(lattice: &Lattice, c1: f64, r0: f64) -> f64 {
    (2.0 * c1 * r0.powf(root_exponent(lattice))).max(10.0 * lattice.shortest_dual())
}

fn validate(lattice: &Lattice, h: f64, r0: f64) -> Result<()> {
    if !(h > 0.0) {
        return Err(Error::param("h", "must be positive"));
    }
    let shortest = lattice.shortest_primal();
    if !(r0 >= shortest * (1.0 - 1e-12)) {
        return Err(Error::NoCandidate(format!("R0 = {r0} is below the shortest lattice vector {shortest}")));
    }
    Ok(())
}

fn certify(lattice: &Lattice, gamma: &LatticeVec, mu: &SphereMeasure, h: f64, r0: f64, window: &[(Mode, f64)], orth_window: f64) -> GammaCertificate {
    let gamma_cart = lattice.primal_cart(gamma);
    let length = norm(&gamma_cart);
    let total = mu.total();
    let slab_weight = mu.slab(&gamma_cart, h);
    let scale = length.recip() * h.max(r0.powf(-root_exponent(lattice)));
    let slab_ratio = if total > 0.0 { slab_weight / total / scale } else { 0.0 };
    let min_orth = window
        .iter()
        .filter(|(m, _)| m.pair(gamma) == 0)
        .map(|(_, l)| *l)
        .fold(None, |acc: Option<f64>, l| Some(acc.map_or(l, |a| a.min(l))));
    GammaCertificate {
        gamma: gamma.clone(),
        gamma_cart,
        length,
        r0,
        h,
        slab_weight,
        total_weight: total,
        slab_ratio,
        min_orth,
        min_orth_ratio: min_orth.map(|l| l / r0.powf(root_exponent(lattice))),
        orth_window,
    }
}

fn dual_window(lattice: &Lattice, radius: f64) -> Vec<(Mode, f64)> {
    lattice
        .enumerate_dual(radius)
        .into_iter()
        .map(|m| {
            let l = norm(&lattice.dual_cart(&m));
            (m, l)
        })
        .collect()
}

/// Evaluates the three selection conditions literally for the given
/// constants.
pub fn check_gamma(lattice: &Lattice, gamma: &LatticeVec, mu: &SphereMeasure, h: f64, r0: f64, c1: f64, c2: f64) -> Result<(bool, GammaCertificate)> {
    if gamma.is_zero() {
        return Err(Error::param("gamma", "must be nonzero"));
    }
    if gamma.0.len() != lattice.dim() {
        return Err(Error::SizeMismatch { expected: lattice.dim(), actual: gamma.0.len() });
    }
    validate(lattice, h, r0)?;
    let radius = orth_window(lattice, c1, r0);
    let window = dual_window(lattice, radius);
    let cert = certify(lattice, gamma, mu, h, r0, &window, radius);
    let cond1 = cert.length <= r0 * (1.0 + 1e-12);
    let cond2 = cert.min_orth.is_none_or(|l| l > c1 * r0.powf(root_exponent(lattice)));
    let cond3 = mu.is_empty() || cert.slab_ratio <= c2;
    Ok((cond1 && cond2 && cond3, cert))
}

/// Search objective: smaller slab ratio, then larger orthogonal gap, then
/// shorter `γ`, then lexicographic coordinates.
pub(crate) fn objective(a: &GammaCertificate, b: &GammaCertificate) -> Ordering {
    let gap = |c: &GammaCertificate| c.min_orth.unwrap_or(f64::INFINITY);
    a.slab_ratio
        .total_cmp(&b.slab_ratio)
        .then_with(|| gap(b).total_cmp(&gap(a)))
        .then_with(|| super::length_then_lex((a.length * a.length, &a.gamma.0), (b.length * b.length, &b.gamma.0)))
}

/// Scans every `γ ∈ Λ \ {0}` with `|γ| <= R0` and returns the best
/// certificate under [`objective`]. An empty measure makes the slab
/// condition vacuous; the shortest lattice vector is returned then.
pub fn find_gamma(lattice: &Lattice, mu: &SphereMeasure, h: f64, r0: f64) -> Result<GammaSearch> {
    validate(lattice, h, r0)?;
    let candidates = lattice.enumerate_primal(r0 * (1.0 + 1e-12));
    if candidates.is_empty() {
        return Err(Error::NoCandidate(format!("no lattice vector within R0 = {r0}")));
    }
    let radius = orth_window(lattice, 0.0, r0);
    let window = dual_window(lattice, radius);
    let best = if mu.is_empty() {
        certify(lattice, &candidates[0], mu, h, r0, &window, radius)
    } else {
        let certs = par_map(&candidates, |g| certify(lattice, g, mu, h, r0, &window, radius));
        certs.into_iter().min_by(objective).expect("nonempty")
    };
    let window_cap = radius / 2.0 / r0.powf(root_exponent(lattice));
    let (c1_sup, window_limited) = match best.min_orth_ratio {
        Some(r) => (r, false),
        None => (window_cap, true),
    };
    Ok(GammaSearch { c2_min: best.slab_ratio, certificate: best, c1_sup, window_limited, candidates: candidates.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(d: &[f64], w: f64) -> Atom {
        Atom { direction: d.to_vec(), weight: w }
    }

    #[test]
    fn slab_excludes_transverse_atom() {
        let l = Lattice::cubic(3).unwrap();
        let mu = SphereMeasure::new(vec![atom(&[1.0, 0.0, 0.0], 1.0)]).unwrap();
        let (_, cert) = check_gamma(&l, &LatticeVec(vec![1, 0, 0]), &mu, 0.1, 2.0, 0.1, 1.0).unwrap();
        assert_eq!(cert.slab_weight, 0.0);
        assert_eq!(cert.slab_ratio, 0.0);
    }

    #[test]
    fn full_slab_ratio() {
        let l = Lattice::cubic(3).unwrap();
        let mu = SphereMeasure::new(vec![atom(&[0.0, 1.0, 0.0], 2.0), atom(&[0.0, 0.0, 1.0], 1.0)]).unwrap();
        let gamma = LatticeVec(vec![1, 0, 0]);
        let (_, cert) = check_gamma(&l, &gamma, &mu, 0.5, 4.0, 0.1, 10.0).unwrap();
        assert_eq!(cert.slab_weight, 3.0);
        // |γ|^{-1} max{h, R0^{-1/2}} = max{0.5, 0.5} = 0.5
        assert!((cert.slab_ratio - 2.0).abs() < 1e-15);
        assert!(check_gamma(&l, &gamma, &mu, 0.5, 4.0, 0.1, 2.0).unwrap().0);
        assert!(!check_gamma(&l, &gamma, &mu, 0.5, 4.0, 0.1, 1.9).unwrap().0);
    }

    #[test]
    fn orthogonal_dual_vectors_fail_condition_two() {
        let l = Lattice::cubic(3).unwrap();
        let mu = SphereMeasure::default();
        let gamma = LatticeVec(vec![1, 0, 0]);
        let (ok, cert) = check_gamma(&l, &gamma, &mu, 0.1, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(cert.min_orth, Some(1.0));
        assert!(!ok);
        assert!(check_gamma(&l, &gamma, &mu, 0.1, 1.0, 0.99, 1.0).unwrap().0);
    }

    #[test]
    fn errors() {
        let l = Lattice::cubic(3).unwrap();
        let mu = SphereMeasure::default();
        assert!(check_gamma(&l, &LatticeVec(vec![0, 0, 0]), &mu, 0.1, 2.0, 1.0, 1.0).is_err());
        assert!(matches!(find_gamma(&l, &mu, 0.1, 0.5), Err(Error::NoCandidate(_))));
        assert!(SphereMeasure::new(vec![atom(&[1.0, 1.0, 0.0], 1.0)]).is_err());
        assert!(SphereMeasure::new(vec![atom(&[1.0, 0.0, 0.0], -1.0)]).is_err());
    }

    #[test]
    fn empty_measure_returns_shortest() {
        let l = Lattice::cubic(3).unwrap();
        let found = find_gamma(&l, &SphereMeasure::default(), 0.1, 5.0).unwrap();
        assert_eq!(found.certificate.length, 1.0);
        assert_eq!(found.certificate.gamma, LatticeVec(vec![-1, 0, 0]));
    }

    #[test]
    fn permutation_invariant() {
        let l = Lattice::cubic(3).unwrap();
        let s = 1.0 / 3f64.sqrt();
        let atoms = vec![atom(&[1.0, 0.0, 0.0], 0.3), atom(&[0.0, 0.6, 0.8], 1.1), atom(&[s, s, -s], 0.7)];
        let mut rev = atoms.clone();
        rev.reverse();
        let a = find_gamma(&l, &SphereMeasure::new(atoms).unwrap(), 0.05, 4.0).unwrap();
        let b = find_gamma(&l, &SphereMeasure::new(rev).unwrap(), 0.05, 4.0).unwrap();
        assert_eq!(a, b);
    }
}
