//! Bloch fibers `D(k + iϰe)` on a truncated Fourier mode set.
//!
//! The fiber acts on `φ = Σ_N φ_N e^{2πi(N, x)}` by
//! `(Dφ)_N = D_N(k; ϰ) φ_N + Σ_{N'} V_{N−N'} φ_{N'}` where
//! `D_N(k; ϰ) = Σ_j (k_j + 2πN_j + iϰe_j) α_j` and `V` is the composite
//! potential `V0 + V1 − Σ_j A_j α_j`.

use serde::Serialize;

use crate::clifford::{CliffordRep, Sign};
use crate::fields::PotentialSet;
use crate::lattice::{shifted_frequency, Lattice, Mode, ModeSet};
use crate::linalg::{asymmetry, dot, hermitian_eigenvalues, norm, reject, scaled, singular_values};
use crate::{CMatrix, Error, Result, C64};

/// Largest matrix dimension handed to the dense decompositions.
pub const DENSE_LIMIT: usize = 4096;

const UNIT_TOL: f64 = 1e-12;
const AXIS_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberPoint {
    pub k: Vec<f64>,
    pub e: Vec<f64>,
    pub kappa: f64,
}

impl FiberPoint {
    pub fn new(k: Vec<f64>, e: Vec<f64>, kappa: f64) -> Result<Self> {
        if k.len() != e.len() {
            return Err(Error::SizeMismatch { expected: k.len(), actual: e.len() });
        }
        if (norm(&e) - 1.0).abs() > UNIT_TOL {
            return Err(Error::param("e", format!("must be a unit vector, |e| = {}", norm(&e))));
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::param("kappa", "must be finite and nonnegative"));
        }
        Ok(Self { k, e, kappa })
    }

    pub fn real(k: Vec<f64>) -> Self {
        let mut e = vec![0.0; k.len()];
        e[0] = 1.0;
        Self { k, e, kappa: 0.0 }
    }

    pub fn with_kappa(&self, kappa: f64) -> Self {
        Self { kappa, ..self.clone() }
    }
}

/// `D_N(k; ϰ)`.
pub fn symbol(rep: &CliffordRep, lattice: &Lattice, fiber: &FiberPoint, m: &Mode) -> CMatrix {
    let q = shifted_frequency(lattice, &fiber.k, m);
    let v: Vec<C64> = q.iter().zip(&fiber.e).map(|(x, e)| C64::new(*x, fiber.kappa * e)).collect();
    rep.dot(&v)
}

/// `(G^−_N, G^+_N)`.
pub fn g_factors(lattice: &Lattice, fiber: &FiberPoint, m: &Mode) -> (f64, f64) {
    let q = shifted_frequency(lattice, &fiber.k, m);
    let along = dot(&q, &fiber.e);
    let perp = norm(&reject(&q, &fiber.e));
    let gm = along.hypot(fiber.kappa - perp);
    let gp = along.hypot(fiber.kappa + perp);
    (gm, gp)
}

/// `G_N = G^−_N`.
pub fn g_weight(lattice: &Lattice, fiber: &FiberPoint, m: &Mode) -> f64 {
    g_factors(lattice, fiber, m).0
}

/// `ẽ(x) = (x − (x, e)e)/|x − (x, e)e|`, or `None` on the axis through `e`.
pub fn transverse_direction(x: &[f64], e: &[f64]) -> Option<Vec<f64>> {
    let r = reject(x, e);
    let len = norm(&r);
    (len > AXIS_TOL * norm(x) && len > 0.0).then(|| scaled(&r, 1.0 / len))
}

/// Block-diagonal `P^±(k)`; blocks on the axis through `e` are zero.
pub fn global_projection(rep: &CliffordRep, lattice: &Lattice, k: &[f64], e: &[f64], modes: &ModeSet, sign: Sign) -> CMatrix {
    let s = rep.size();
    let mut out = CMatrix::zeros(s * modes.len(), s * modes.len());
    for (i, m) in modes.modes().iter().enumerate() {
        let q = shifted_frequency(lattice, k, m);
        if let Some(et) = transverse_direction(&q, e) {
            out.view_mut((i * s, i * s), (s, s)).copy_from(&rep.projector_unchecked(e, &et, sign));
        }
    }
    out
}

/// The fiber restricted to a mode set, together with its dense matrix.
#[derive(Debug, Clone)]
pub struct TruncatedDiracOperator {
    lattice: Lattice,
    rep: CliffordRep,
    modes: ModeSet,
    fiber: FiberPoint,
    matrix: CMatrix,
    clipped: bool,
}

pub fn assemble(modes: &ModeSet, fiber: &FiberPoint, pot: &PotentialSet) -> Result<TruncatedDiracOperator> {
    let lattice = pot.lattice();
    let rep = pot.rep();
    let n = lattice.dim();
    if fiber.k.len() != n {
        return Err(Error::SizeMismatch { expected: n, actual: fiber.k.len() });
    }
    if let Some(bad) = modes.modes().iter().find(|m| m.0.len() != n) {
        return Err(Error::SizeMismatch { expected: n, actual: bad.0.len() });
    }
    let s = rep.size();
    let dim = s * modes.len();
    if dim > DENSE_LIMIT {
        return Err(Error::TooLarge { dim, limit: DENSE_LIMIT });
    }
    let v = pot.composite();
    let mut matrix = CMatrix::zeros(dim, dim);
    for (i, m) in modes.modes().iter().enumerate() {
        matrix.view_mut((i * s, i * s), (s, s)).copy_from(&symbol(rep, lattice, fiber, m));
    }
    let mut clipped = false;
    for (j, mj) in modes.modes().iter().enumerate() {
        for (p, c) in v.iter() {
            let target = mj.add(p);
            match modes.position(&target) {
                Some(i) => {
                    let mut block = matrix.view_mut((i * s, j * s), (s, s));
                    block += c;
                }
                None => clipped = true,
            }
        }
    }
    Ok(TruncatedDiracOperator { lattice: lattice.clone(), rep: rep.clone(), modes: modes.clone(), fiber: fiber.clone(), matrix, clipped })
}

impl TruncatedDiracOperator {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn fiber(&self) -> &FiberPoint {
        &self.fiber
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn rep(&self) -> &CliffordRep {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// True when some convolution term left the mode set.
    pub fn clipped(&self) -> bool {
        self.clipped
    }

    /// The `(i, j)` block in mode-index order.
    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        let s = self.rep.size();
        self.matrix.view((i * s, j * s), (s, s)).into_owned()
    }

    pub fn is_hermitian(&self) -> bool {
        let scale = self.matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
        asymmetry(&self.matrix) <= HERMITIAN_TOL * scale
    }

    /// Ascending eigenvalues with multiplicity; only for Hermitian fibers.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_hermitian() {
            return Err(Error::NonHermitian(asymmetry(&self.matrix)));
        }
        Ok(hermitian_eigenvalues(&self.matrix))
    }

    pub fn singular_values(&self) -> Vec<f64> {
        singular_values(&self.matrix)
    }

    /// `min ‖Dφ‖/‖φ‖` on the truncated space.
    pub fn sigma_min(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// `min ‖Dφ‖ / (Σ w_N² ‖φ_N‖²)^{1/2}`, one weight per mode, as the
    /// smallest singular value of `D W^{-1}`.
    pub fn weighted_sigma_min(&self, weights: &[f64]) -> Result<f64> {
        if weights.len() != self.modes.len() {
            return Err(Error::SizeMismatch { expected: self.modes.len(), actual: weights.len() });
        }
        if let Some(i) = weights.iter().position(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::param("weights", format!("weight for mode {:?} must be positive and finite", self.modes.modes()[i].0)));
        }
        let s = self.rep.size();
        let mut scaled = self.matrix.clone();
        for (j, w) in weights.iter().enumerate() {
            let mut cols = scaled.columns_mut(j * s, s);
            cols /= C64::new(*w, 0.0);
        }
        Ok(singular_values(&scaled).first().copied().unwrap_or(0.0))
    }

    /// `G_N(k; ϰ)` for every mode of the set.
    pub fn g_weights(&self) -> Vec<f64> {
        self.modes.modes().iter().map(|m| g_weight(&self.lattice, &self.fiber, m)).collect()
    }
}
