//! Period lattices, their reciprocals and integer-coordinate point sets.
//!
//! Points of the period lattice `Λ` are stored as integer coordinates in
//! the basis `E_j`, and points of the reciprocal lattice `Λ*` as integer
//! coordinates in the basis `E_j*`. Because `(E_j, E_l*) = δ_jl`, the
//! pairing `(γ, N)` of a lattice vector with a dual vector is the plain
//! integer dot product of their coordinates, so every orthogonality test
//! between `Λ` and `Λ*` is exact.

mod gamma;
mod modes;

use std::cmp::Ordering;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, norm};
use crate::{Error, Result};

pub use gamma::{check_gamma, find_gamma, Atom, GammaCertificate, GammaSearch, SphereMeasure};
pub use modes::{k_beta_set, shifted_frequency, ModeSet};

const PAIRING_TOL: f64 = 1e-12;

/// A reciprocal-lattice index `N ∈ Λ*` in integer coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mode(pub Vec<i64>);

/// A period-lattice vector `γ ∈ Λ` in integer coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVec(pub Vec<i64>);

impl Mode {
    pub fn zero(n: usize) -> Self {
        Mode(vec![0; n])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Exact `(N, γ)`.
    pub fn pair(&self, gamma: &LatticeVec) -> i64 {
        self.0.iter().zip(&gamma.0).map(|(a, b)| a * b).sum()
    }

    pub fn neg(&self) -> Self {
        Mode(self.0.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &Mode) -> Self {
        Mode(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Mode) -> Self {
        Mode(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl LatticeVec {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    n: usize,
    basis: DMatrix<f64>,
    reciprocal: DMatrix<f64>,
    volume: f64,
}

impl Lattice {
    /// Builds a lattice from basis rows `E_1..E_n`.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::Dimension(n));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::SizeMismatch { expected: n, actual: bad.len() });
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::param("basis", "entries must be finite"));
        }
        let basis = crate::linalg::real_matrix(rows);
        let volume = basis.determinant().abs();
        let scale = rows.iter().map(|r| norm(r)).product::<f64>();
        if volume <= 1e-12 * scale {
            return Err(Error::SingularBasis);
        }
        let inv = basis.clone().try_inverse().ok_or(Error::SingularBasis)?;
        Ok(Self { n, basis, reciprocal: inv.transpose(), volume })
    }

    pub fn cubic(n: usize) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(&rows)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `E_j` as row `j`.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// `E_j*` as row `j`.
    pub fn reciprocal(&self) -> &DMatrix<f64> {
        &self.reciprocal
    }

    pub fn basis_rows(&self) -> Vec<Vec<f64>> {
        rows_of(&self.basis)
    }

    pub fn reciprocal_rows(&self) -> Vec<Vec<f64>> {
        rows_of(&self.reciprocal)
    }

    /// The lattice whose basis is this lattice's reciprocal basis.
    pub fn dual(&self) -> Result<Self> {
        Self::new(&self.reciprocal_rows())
    }

    /// `v(K)`.
    pub fn cell_volume(&self) -> f64 {
        self.volume
    }

    /// `v(K*)`.
    pub fn dual_cell_volume(&self) -> f64 {
        1.0 / self.volume
    }

    /// Largest deviation of `(E_j, E_l*)` from `δ_jl`.
    pub fn pairing_error(&self) -> f64 {
        let p = &self.basis * self.reciprocal.transpose();
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p[(i, j)] - target).abs());
            }
        }
        worst
    }

    pub fn is_consistent(&self) -> bool {
        self.pairing_error() <= PAIRING_TOL * self.condition_scale()
    }

    fn condition_scale(&self) -> f64 {
        let b = self.basis.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let r = self.reciprocal.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        (b * r).max(1.0)
    }

    /// Cartesian coordinates of `γ = Σ m_j E_j`.
    pub fn primal_cart(&self, v: &LatticeVec) -> Vec<f64> {
        combine(&self.basis, &v.0)
    }

    /// Cartesian coordinates of `N = Σ p_j E_j*`.
    pub fn dual_cart(&self, m: &Mode) -> Vec<f64> {
        combine(&self.reciprocal, &m.0)
    }

    /// `(N, x)` for Cartesian `x`.
    pub fn dual_dot(&self, m: &Mode, x: &[f64]) -> f64 {
        dot(&self.dual_cart(m), x)
    }

    /// Nonzero lattice vectors with `|γ| <= radius`, sorted by length then
    /// lexicographically by coordinates.
    pub fn enumerate_primal(&self, radius: f64) -> Vec<LatticeVec> {
        enumerate(&self.basis, &self.reciprocal, radius).into_iter().map(LatticeVec).collect()
    }

    /// Nonzero dual vectors with `|N| <= radius`, same ordering.
    pub fn enumerate_dual(&self, radius: f64) -> Vec<Mode> {
        enumerate(&self.reciprocal, &self.basis, radius).into_iter().map(Mode).collect()
    }

    pub fn shortest_primal(&self) -> f64 {
        shortest(&self.basis, &self.reciprocal)
    }

    pub fn shortest_dual(&self) -> f64 {
        shortest(&self.reciprocal, &self.basis)
    }
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn combine(rows: &DMatrix<f64>, coords: &[i64]) -> Vec<f64> {
    let n = rows.ncols();
    let mut out = vec![0.0; n];
    for (j, &c) in coords.iter().enumerate() {
        if c != 0 {
            for (l, o) in out.iter_mut().enumerate() {
                *o += c as f64 * rows[(j, l)];
            }
        }
    }
    out
}

/// Sort key comparison: squared length with a relative tie tolerance, then
/// coordinates.
pub(crate) fn length_then_lex(a: (f64, &[i64]), b: (f64, &[i64])) -> Ordering {
    let tol = 1e-12 * a.0.max(b.0).max(1e-300);
    if (a.0 - b.0).abs() > tol {
        a.0.total_cmp(&b.0)
    } else {
        a.1.cmp(b.1)
    }
}

fn enumerate(gen: &DMatrix<f64>, pairing: &DMatrix<f64>, radius: f64) -> Vec<Vec<i64>> {
    if !(radius > 0.0) {
        return Vec::new();
    }
    let n = gen.nrows();
    // coordinate j of x is (x, pairing row j), bounded by |x| |row j|
    let bounds: Vec<i64> = (0..n)
        .map(|j| {
            let row: Vec<f64> = pairing.row(j).iter().copied().collect();
            (radius * norm(&row) * (1.0 + 1e-12)).floor() as i64
        })
        .collect();
    let r2 = radius * radius * (1.0 + 1e-12);
    let mut found: Vec<(f64, Vec<i64>)> = Vec::new();
    let mut coords: Vec<i64> = bounds.iter().map(|b| -b).collect();
    loop {
        if coords.iter().any(|&c| c != 0) {
            let x = combine(gen, &coords);
            let l2 = dot(&x, &x);
            if l2 <= r2 {
                found.push((l2, coords.clone()));
            }
        }
        let mut j = 0;
        loop {
            if j == n {
                found.sort_by(|a, b| length_then_lex((a.0, &a.1), (b.0, &b.1)));
                return found.into_iter().map(|(_, c)| c).collect();
            }
            if coords[j] < bounds[j] {
                coords[j] += 1;
                break;
            }
            coords[j] = -bounds[j];
            j += 1;
        }
    }
}

fn shortest(gen: &DMatrix<f64>, pairing: &DMatrix<f64>) -> f64 {
    // the shortest basis vector bounds the minimum from above
    let upper = (0..gen.nrows())
        .map(|j| gen.row(j).iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(f64::INFINITY, f64::min);
    enumerate(gen, pairing, upper)
        .first()
        .map(|c| norm(&combine(gen, c)))
        .unwrap_or(upper)
}
