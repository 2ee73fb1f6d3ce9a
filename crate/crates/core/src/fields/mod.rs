//! Trigonometric-polynomial fields on a period lattice.
//!
//! A [`FourierField`] maps finitely many modes `N ∈ Λ*` to coefficients.
//! Coefficients are stored uniformly as complex matrices: `1×1` for
//! scalars, `n×1` columns for vector fields and `M×M` for matrix fields.
//! The value at `x` is `Σ_N c_N e^{2πi(N, x)}`.

mod averaged;
mod measure;
mod potential;
pub mod sphere;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::lattice::{Lattice, Mode};
use crate::linalg::{cnorm, op_norm};
use crate::{CMatrix, Error, Result, C64};

pub use averaged::{averaged_potential, condition_value, transverse_combination, ConditionBracket, ConditionForm};
pub use measure::{Measure, MeasureSpec, Plateau};
pub use potential::{w_norm, PotentialSet};

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Scalar,
    Vector(usize),
    Matrix(usize),
}

impl FieldKind {
    pub fn shape(self) -> (usize, usize) {
        match self {
            FieldKind::Scalar => (1, 1),
            FieldKind::Vector(n) => (n, 1),
            FieldKind::Matrix(m) => (m, m),
        }
    }

    /// Pointwise norm: modulus, Euclidean length or spectral norm.
    pub fn value_norm(self, v: &CMatrix) -> f64 {
        match self {
            FieldKind::Scalar => v[(0, 0)].norm(),
            FieldKind::Vector(_) => cnorm(v.as_slice()),
            FieldKind::Matrix(_) => op_norm(v),
        }
    }
}

/// Certified bracket for a sup norm: `lo` is attained on a grid, `hi` is the
/// coefficient-sum bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupBound {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    lattice: Lattice,
    kind: FieldKind,
    coeffs: BTreeMap<Mode, CMatrix>,
}

impl FourierField {
    pub fn new(lattice: &Lattice, kind: FieldKind) -> Self {
        Self { lattice: lattice.clone(), kind, coeffs: BTreeMap::new() }
    }

    pub fn scalar(lattice: &Lattice) -> Self {
        Self::new(lattice, FieldKind::Scalar)
    }

    pub fn vector(lattice: &Lattice) -> Self {
        Self::new(lattice, FieldKind::Vector(lattice.dim()))
    }

    pub fn matrix(lattice: &Lattice, size: usize) -> Self {
        Self::new(lattice, FieldKind::Matrix(size))
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// Adds `value` to the coefficient at `mode`.
    pub fn add_coeff(&mut self, mode: Mode, value: CMatrix) -> Result<()> {
        if mode.0.len() != self.lattice.dim() {
            return Err(Error::SizeMismatch { expected: self.lattice.dim(), actual: mode.0.len() });
        }
        let (r, c) = self.kind.shape();
        if value.nrows() != r || value.ncols() != c {
            return Err(Error::SizeMismatch { expected: r * c, actual: value.len() });
        }
        match self.coeffs.get_mut(&mode) {
            Some(v) => *v += value,
            None => {
                self.coeffs.insert(mode, value);
            }
        }
        Ok(())
    }

    pub fn set_coeff(&mut self, mode: Mode, value: CMatrix) -> Result<()> {
        self.coeffs.remove(&mode);
        self.add_coeff(mode, value)
    }

    /// Convenience for vector fields.
    pub fn add_vector(&mut self, mode: Mode, v: &[C64]) -> Result<()> {
        self.add_coeff(mode, CMatrix::from_column_slice(v.len(), 1, v))
    }

    pub fn add_scalar(&mut self, mode: Mode, v: C64) -> Result<()> {
        self.add_coeff(mode, CMatrix::from_element(1, 1, v))
    }

    /// Adds `v e^{2πi(N,x)} + conj(v) e^{-2πi(N,x)}` (vector or scalar), or
    /// `V e^{..} + V^* e^{-..}` for matrices, giving a real/Hermitian field.
    pub fn add_real_pair(&mut self, mode: Mode, value: CMatrix) -> Result<()> {
        let partner = match self.kind {
            FieldKind::Matrix(_) => value.adjoint(),
            _ => value.map(|z| z.conj()),
        };
        if mode.is_zero() {
            let sum = &value + &partner;
            return self.add_coeff(mode, sum);
        }
        self.add_coeff(mode.neg(), partner)?;
        self.add_coeff(mode, value)
    }

    pub fn coeff(&self, mode: &Mode) -> Option<&CMatrix> {
        self.coeffs.get(mode)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &CMatrix)> {
        self.coeffs.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Mode> {
        self.coeffs.keys()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|v| v.iter().all(|z| *z == C64::new(0.0, 0.0)))
    }

    pub fn zero_value(&self) -> CMatrix {
        let (r, c) = self.kind.shape();
        CMatrix::zeros(r, c)
    }

    /// `max |2πN|` over the support (0 for an empty field).
    pub fn support_radius(&self) -> f64 {
        self.coeffs
            .keys()
            .map(|m| 2.0 * PI * crate::linalg::norm(&self.lattice.dual_cart(m)))
            .fold(0.0, f64::max)
    }

    /// `c(-N) = conj(c(N))` entrywise.
    pub fn is_real_valued(&self) -> bool {
        self.symmetric_under(|v| v.map(|z| z.conj()))
    }

    /// `c(-N) = c(N)^*` (matrix fields).
    pub fn is_hermitian_valued(&self) -> bool {
        self.symmetric_under(|v| v.adjoint())
    }

    fn symmetric_under(&self, f: impl Fn(&CMatrix) -> CMatrix) -> bool {
        let zero = self.zero_value();
        self.coeffs.iter().all(|(m, v)| {
            let partner = self.coeffs.get(&m.neg()).unwrap_or(&zero);
            let scale = v.norm().max(1.0);
            (f(v) - partner).iter().all(|z| z.norm() <= SYMMETRY_TOL * scale)
        })
    }

    pub fn evaluate(&self, x: &[f64]) -> CMatrix {
        let mut out = self.zero_value();
        for (m, v) in &self.coeffs {
            let phase = C64::from_polar(1.0, 2.0 * PI * self.lattice.dual_dot(m, x));
            out += v * phase;
        }
        out
    }

    pub fn mean(&self) -> CMatrix {
        self.coeffs.get(&Mode::zero(self.lattice.dim())).cloned().unwrap_or_else(|| self.zero_value())
    }

    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.remove(&Mode::zero(self.lattice.dim()));
        out
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        for v in out.coeffs.values_mut() {
            *v *= s;
        }
        out
    }

    pub fn map_coeffs(&self, kind: FieldKind, mut f: impl FnMut(&Mode, &CMatrix) -> Option<CMatrix>) -> Result<Self> {
        let mut out = Self::new(&self.lattice, kind);
        for (m, v) in &self.coeffs {
            if let Some(w) = f(m, v) {
                out.add_coeff(m.clone(), w)?;
            }
        }
        Ok(out)
    }

    /// `Σ_N ‖c_N‖`, an upper bound for the sup norm.
    pub fn coefficient_sum(&self) -> f64 {
        self.coeffs.values().map(|v| self.kind.value_norm(v)).fold(0.0, |s, x| s + x)
    }

    /// Field values on the uniform grid `x = Σ (i_j / g) E_j`, row-major in
    /// the grid index with axis 0 fastest.
    pub fn grid_values(&self, grid: usize) -> Vec<CMatrix> {
        let synth = GridSynth::new(self.lattice.dim(), grid, self.coeffs.keys());
        let coeffs: Vec<&CMatrix> = self.coeffs.values().collect();
        (0..synth.points())
            .map(|p| {
                let mut acc = self.zero_value();
                for (k, c) in coeffs.iter().enumerate() {
                    acc += *c * synth.phase(k, p);
                }
                acc
            })
            .collect()
    }

    /// Grid-max lower bound and coefficient-sum upper bound for
    /// `sup_x ‖field(x)‖`.
    pub fn sup_norm(&self, grid: usize) -> SupBound {
        let hi = self.coefficient_sum();
        if self.coeffs.is_empty() {
            return SupBound { lo: 0.0, hi };
        }
        let lo = self.grid_values(grid).iter().map(|v| self.kind.value_norm(v)).fold(0.0, f64::max);
        // rounding can push the sampled value a hair above an exact bound
        SupBound { lo: lo.min(hi), hi }
    }

    /// Default grid resolution: `2 * span + 1` per axis, at least 8, where
    /// span is the widest coordinate range of the support.
    pub fn default_grid(&self) -> usize {
        default_grid_for(self.coeffs.keys(), self.lattice.dim())
    }
}

pub(crate) fn default_grid_for<'a>(modes: impl Iterator<Item = &'a Mode>, n: usize) -> usize {
    let mut lo = vec![0i64; n];
    let mut hi = vec![0i64; n];
    for m in modes {
        for j in 0..n {
            lo[j] = lo[j].min(m.0[j]);
            hi[j] = hi[j].max(m.0[j]);
        }
    }
    let span = lo.iter().zip(&hi).map(|(a, b)| b - a).max().unwrap_or(0) as usize;
    (2 * span + 1).max(8)
}

/// Phase table `e^{2πi(N, x_p)}` for a fixed mode list on the uniform cell
/// grid. Phases are exact roots of unity indexed by `Σ N_j i_j mod g`.
pub(crate) struct GridSynth {
    grid: usize,
    n: usize,
    roots: Vec<C64>,
    modes: Vec<Vec<i64>>,
}

impl GridSynth {
    pub(crate) fn new<'a>(n: usize, grid: usize, modes: impl Iterator<Item = &'a Mode>) -> Self {
        let grid = grid.max(1);
        let roots = (0..grid).map(|r| C64::from_polar(1.0, 2.0 * PI * r as f64 / grid as f64)).collect();
        Self { grid, n, roots, modes: modes.map(|m| m.0.clone()).collect() }
    }

    pub(crate) fn points(&self) -> usize {
        self.grid.pow(self.n as u32)
    }

    pub(crate) fn phase(&self, mode: usize, point: usize) -> C64 {
        let g = self.grid as i64;
        let mut p = point;
        let mut idx = 0i64;
        for c in &self.modes[mode] {
            let i = (p % self.grid) as i64;
            p /= self.grid;
            idx += c * i;
        }
        self.roots[idx.rem_euclid(g) as usize]
    }

    /// Table of phases, mode-major.
    pub(crate) fn table(&self) -> Vec<Vec<C64>> {
        (0..self.modes.len()).map(|k| (0..self.points()).map(|p| self.phase(k, p)).collect()).collect()
    }

    /// Cell point for a grid index.
    #[cfg(test)]
    pub(crate) fn point(&self, lattice: &Lattice, point: usize) -> Vec<f64> {
        let mut p = point;
        let mut xi = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            xi.push((p % self.grid) as f64 / self.grid as f64);
            p /= self.grid;
        }
        let b = lattice.basis();
        (0..self.n).map(|l| (0..self.n).map(|j| xi[j] * b[(j, l)]).sum()).collect()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z3() -> Lattice {
        Lattice::cubic(3).unwrap()
    }

    pub(crate) fn random_vector_field(lattice: &Lattice, rng: &mut ChaCha8Rng, radius: i64, terms: usize, amp: f64) -> FourierField {
        let n = lattice.dim();
        let mut f = FourierField::vector(lattice);
        for _ in 0..terms {
            let m = Mode((0..n).map(|_| rng.random_range(-radius..=radius)).collect());
            if m.is_zero() {
                continue;
            }
            let v: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-amp..amp), rng.random_range(-amp..amp))).collect();
            f.add_real_pair(m, CMatrix::from_column_slice(n, 1, &v)).unwrap();
        }
        f
    }

    #[test]
    fn empty_and_single_mode() {
        let l = z3();
        let f = FourierField::scalar(&l);
        assert_eq!(f.evaluate(&[0.3, 0.1, 0.2])[(0, 0)], C64::new(0.0, 0.0));
        assert_eq!(f.mean()[(0, 0)], C64::new(0.0, 0.0));
        let mut g = FourierField::scalar(&l);
        g.add_scalar(Mode(vec![1, -2, 0]), C64::new(0.5, -0.25)).unwrap();
        assert_eq!(g.evaluate(&[0.0, 0.0, 0.0])[(0, 0)], C64::new(0.5, -0.25));
        let s = g.sup_norm(9);
        assert_eq!(s.hi, C64::new(0.5, -0.25).norm());
        assert!((s.lo - s.hi).abs() < 1e-15);
    }

    #[test]
    fn constant_field() {
        let l = z3();
        let mut f = FourierField::scalar(&l);
        f.add_scalar(Mode::zero(3), C64::new(-2.0, 0.0)).unwrap();
        assert_eq!(f.mean()[(0, 0)], C64::new(-2.0, 0.0));
        let s = f.sup_norm(4);
        assert_eq!((s.lo, s.hi), (2.0, 2.0));
    }

    #[test]
    fn evaluate_matches_independent_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let l = Lattice::new(&[vec![1.0, 0.2, 0.0], vec![0.0, 0.9, 0.1], vec![0.3, 0.0, 1.1]]).unwrap();
        let f = random_vector_field(&l, &mut rng, 2, 6, 1.0);
        assert!(f.is_real_valued());
        for _ in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let got = f.evaluate(&x);
            for j in 0..3 {
                // Kahan-compensated real-part summation as the oracle
                let (mut sum, mut comp) = (0.0f64, 0.0f64);
                let mut imag = 0.0f64;
                for (m, v) in f.iter() {
                    let nc = l.dual_cart(m);
                    let arg = 2.0 * PI * nc.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
                    let term = v[(j, 0)] * C64::new(arg.cos(), arg.sin());
                    let y = term.re - comp;
                    let t = sum + y;
                    comp = (t - sum) - y;
                    sum = t;
                    imag += term.im;
                }
                assert!((got[(j, 0)].re - sum).abs() < 1e-12);
                assert!(got[(j, 0)].im.abs() < 1e-12 && imag.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mean_matches_cell_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let l = z3();
        let mut f = random_vector_field(&l, &mut rng, 2, 5, 1.0);
        f.add_vector(Mode::zero(3), &[C64::new(0.3, 0.0), C64::new(-0.1, 0.0), C64::new(0.7, 0.0)]).unwrap();
        // midpoint rule on a 12^3 grid integrates modes with |N_j| < 12 exactly
        let g = 12;
        let mut acc = [0.0f64; 3];
        for i in 0..g {
            for j in 0..g {
                for k in 0..g {
                    let x = [(i as f64 + 0.5) / g as f64, (j as f64 + 0.5) / g as f64, (k as f64 + 0.5) / g as f64];
                    let v = f.evaluate(&x);
                    for c in 0..3 {
                        acc[c] += v[(c, 0)].re;
                    }
                }
            }
        }
        let mean = f.mean();
        for c in 0..3 {
            assert!((acc[c] / (g * g * g) as f64 - mean[(c, 0)].re).abs() < 1e-8);
        }
    }

    #[test]
    fn sup_bracket_contains_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = z3();
        let f = random_vector_field(&l, &mut rng, 2, 5, 1.0);
        let s = f.sup_norm(f.default_grid());
        let sampled = (0..20_000)
            .map(|_| {
                let x: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..1.0)).collect();
                FieldKind::Vector(3).value_norm(&f.evaluate(&x))
            })
            .fold(0.0, f64::max);
        assert!(s.lo <= s.hi);
        assert!(sampled <= s.hi + 1e-12);
        // the grid is fine enough that sampling rarely beats it by much
        assert!(s.lo >= 0.8 * sampled);
    }

    #[test]
    fn grid_values_agree_with_evaluate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = Lattice::new(&[vec![1.0, 0.2, 0.0], vec![0.0, 0.9, 0.1], vec![0.3, 0.0, 1.1]]).unwrap();
        let f = random_vector_field(&l, &mut rng, 2, 4, 1.0);
        let g = 5;
        let vals = f.grid_values(g);
        let synth = GridSynth::new(3, g, f.support());
        for p in [0usize, 7, 31, 124] {
            let x = synth.point(&l, p);
            assert!((&vals[p] - f.evaluate(&x)).norm() < 1e-12);
        }
    }
}
