//! Gauge polynomials `Φ^(1,λ)`, `Φ^(2,λ)`, the damping constant `c_5` and a
//! numerical check of the sup-norm estimate on `Φ`.
//!
//! Everything is expressed in a frame `E_1 = ẽ`, `E_2 = e = γ/|γ|`,
//! completed to an orthonormal basis.

mod kernel;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use kernel::{bessel_kernel_constant, kernel_profile, KernelReport, QuadParams};

use crate::fields::{FieldKind, FourierField, Measure};
use crate::lattice::{Lattice, LatticeVec, Mode};
use crate::linalg::{dot, norm, scaled};
use crate::smooth;
use crate::{CMatrix, Error, Result, C64};

const ORTHO_TOL: f64 = 1e-10;

/// Orthonormal frame with `E_1 = ẽ`, `E_2 = e`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frame {
    pub gamma: LatticeVec,
    pub gamma_length: f64,
    pub e: Vec<f64>,
    pub et: Vec<f64>,
    /// Columns are `E_1, …, E_n`.
    #[serde(serialize_with = "columns")]
    pub t: DMatrix<f64>,
}

fn columns<S: serde::Serializer>(t: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let cols: Vec<Vec<f64>> = t.column_iter().map(|c| c.iter().copied().collect()).collect();
    cols.serialize(s)
}

impl Frame {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.t.column(j).iter().copied().collect()
    }

    /// `x_j^(λ) = (x, E_j)` for all `j`.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        (0..self.t.ncols()).map(|j| dot(x, self.t.column(j).as_slice())).collect()
    }
}

pub fn build_frame(lattice: &Lattice, gamma: &LatticeVec, et: &[f64]) -> Result<Frame> {
    let n = lattice.dim();
    if gamma.is_zero() {
        return Err(Error::param("gamma", "must be nonzero"));
    }
    if et.len() != n {
        return Err(Error::SizeMismatch { expected: n, actual: et.len() });
    }
    let g = lattice.primal_cart(gamma);
    let glen = norm(&g);
    let e = scaled(&g, 1.0 / glen);
    if (norm(et) - 1.0).abs() > ORTHO_TOL || dot(et, &e).abs() > ORTHO_TOL {
        return Err(Error::NotOrthonormal(format!("ẽ must be a unit vector orthogonal to γ; (ẽ, e) = {:e}", dot(et, &e))));
    }
    let mut cols = vec![et.to_vec(), e.clone()];
    while cols.len() < n {
        // the standard axis with the largest residual keeps the completion well conditioned
        let (_, best) = (0..n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                for _ in 0..2 {
                    for c in &cols {
                        let p = dot(&v, c);
                        v.iter_mut().zip(c).for_each(|(x, y)| *x -= p * y);
                    }
                }
                (norm(&v), v)
            })
            .fold((0.0, Vec::new()), |acc, cand| if cand.0 > acc.0 + 1e-12 { cand } else { acc });
        let mut v = scaled(&best, 1.0 / norm(&best));
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        cols.push(v);
    }
    let t = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
    Ok(Frame { gamma: gamma.clone(), gamma_length: glen, e, et: et.to_vec(), t })
}

/// Gauge polynomials built from `A − Ã`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugePair {
    pub phi1: FourierField,
    pub phi2: FourierField,
}

fn frame_freqs(lattice: &Lattice, frame: &Frame, m: &Mode) -> Option<(f64, f64)> {
    let n2 = if m.pair(&frame.gamma) == 0 { 0.0 } else { lattice.dual_dot(m, &frame.e) };
    let mut n1 = lattice.dual_dot(m, &frame.et);
    if n1.abs() <= 1e-12 * norm(&lattice.dual_cart(m)) {
        n1 = 0.0;
    }
    (n1 != 0.0 || n2 != 0.0).then_some((n1, n2))
}

pub fn build_phi(a: &FourierField, at: &FourierField, frame: &Frame) -> Result<GaugePair> {
    let lattice = a.lattice();
    let n = lattice.dim();
    if at.lattice() != lattice || a.kind() != FieldKind::Vector(n) || at.kind() != a.kind() {
        return Err(Error::param("A", "A and Ã must be vector fields on the same lattice"));
    }
    let mut phi1 = FourierField::scalar(lattice);
    let mut phi2 = FourierField::scalar(lattice);
    let zero = a.zero_value();
    let modes: std::collections::BTreeSet<&Mode> = a.support().chain(at.support()).collect();
    for m in modes {
        let Some((n1, n2)) = frame_freqs(lattice, frame, m) else { continue };
        let d = a.coeff(m).unwrap_or(&zero) - at.coeff(m).unwrap_or(&zero);
        let d1: C64 = d.iter().zip(&frame.et).map(|(z, x)| z * x).sum();
        let d2: C64 = d.iter().zip(&frame.e).map(|(z, x)| z * x).sum();
        let denom = C64::new(0.0, 2.0 * PI * (n1 * n1 + n2 * n2));
        let c1 = (d1 * n1 + d2 * n2) / denom;
        let c2 = -(d1 * n2 - d2 * n1) / denom;
        if c1 != C64::new(0.0, 0.0) {
            phi1.add_scalar(m.clone(), c1)?;
        }
        if c2 != C64::new(0.0, 0.0) {
            phi2.add_scalar(m.clone(), c2)?;
        }
    }
    Ok(GaugePair { phi1, phi2 })
}

/// Largest coefficientwise residual of the two first-order identities
/// `∂_1Φ1 − ∂_2Φ2 = (A−Ã)_1`, `∂_2Φ1 + ∂_1Φ2 = (A−Ã)_2`, relative to the
/// largest `|(A−Ã)_N|`.
pub fn identity_residual(a: &FourierField, at: &FourierField, frame: &Frame, pair: &GaugePair) -> f64 {
    let lattice = a.lattice();
    let zero_v = a.zero_value();
    let zero_s = CMatrix::zeros(1, 1);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let modes: std::collections::BTreeSet<&Mode> = a.support().chain(at.support()).chain(pair.phi1.support()).chain(pair.phi2.support()).collect();
    for m in modes {
        let d = a.coeff(m).unwrap_or(&zero_v) - at.coeff(m).unwrap_or(&zero_v);
        let d1: C64 = d.iter().zip(&frame.et).map(|(z, x)| z * x).sum();
        let d2: C64 = d.iter().zip(&frame.e).map(|(z, x)| z * x).sum();
        let n1 = lattice.dual_dot(m, &frame.et);
        let n2 = lattice.dual_dot(m, &frame.e);
        let p1 = pair.phi1.coeff(m).unwrap_or(&zero_s)[(0, 0)];
        let p2 = pair.phi2.coeff(m).unwrap_or(&zero_s)[(0, 0)];
        let i2pi = C64::new(0.0, 2.0 * PI);
        let r1 = i2pi * (p1 * n1 - p2 * n2) - d1;
        let r2 = i2pi * (p1 * n2 + p2 * n1) - d2;
        worst = worst.max(r1.norm()).max(r2.norm());
        scale = scale.max(d1.norm()).max(d2.norm());
    }
    if scale == 0.0 { worst } else { worst / scale }
}

/// Smooth cutoff `η(τ) = s·ψ((τ − π)/π)`; `s = 1` is the admissible cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaSpec {
    pub scale: f64,
}

impl Default for EtaSpec {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

impl EtaSpec {
    pub fn value(&self, tau: f64) -> f64 {
        self.scale * smooth::step((tau - PI) / PI)
    }

    pub fn derivative(&self, tau: f64) -> f64 {
        self.scale * smooth::step_derivative((tau - PI) / PI) / PI
    }

    pub fn is_admissible(&self) -> bool {
        self.scale == 1.0
    }
}

/// `max{|γ|, h^{-1}}`.
pub fn scale_factor(gamma_length: f64, mu: &Measure) -> f64 {
    gamma_length.max(mu.h_inv())
}

/// `c_5 = exp(−4C‖μ‖ max{|γ|, h^{-1}} ‖A‖)` with the certified upper
/// bound for `‖A‖_∞`.
pub fn c5(a: &FourierField, gamma: &LatticeVec, mu: &Measure, c: f64) -> f64 {
    let glen = norm(&a.lattice().primal_cart(gamma));
    (-4.0 * c * mu.norm() * scale_factor(glen, mu) * a.coefficient_sum()).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub bound: f64,
    pub a_hi: f64,
    pub phi1_lo: f64,
    pub phi2_lo: f64,
    pub phi1_hi: f64,
    pub phi2_hi: f64,
    pub active_modes: usize,
    pub multiplier_ok: bool,
    pub identity_residual: f64,
    pub pass: bool,
}

pub fn lemma1_check(a: &FourierField, at: &FourierField, frame: &Frame, mu: &Measure, eta: EtaSpec, c: f64, grid: Option<usize>) -> Result<Lemma1Report> {
    let pair = build_phi(a, at, frame)?;
    let lattice = a.lattice();
    let t = scale_factor(frame.gamma_length, mu);
    let bound = c * mu.norm() * t * a.coefficient_sum();
    let zero = a.zero_value();
    let mut active = 0;
    let mut multiplier_ok = true;
    let modes: std::collections::BTreeSet<&Mode> = a.support().chain(at.support()).collect();
    for m in modes {
        let d = a.coeff(m).unwrap_or(&zero) - at.coeff(m).unwrap_or(&zero);
        if d.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            continue;
        }
        active += 1;
        let (n1, n2) = frame_freqs(lattice, frame, m).unwrap_or((0.0, 0.0));
        multiplier_ok &= eta.value(2.0 * PI * t * n1.hypot(n2)) == 1.0;
    }
    let g = grid.unwrap_or_else(|| pair.phi1.default_grid().max(pair.phi2.default_grid()));
    let s1 = pair.phi1.sup_norm(g);
    let s2 = pair.phi2.sup_norm(g);
    let residual = identity_residual(a, at, frame, &pair);
    Ok(Lemma1Report {
        bound,
        a_hi: a.coefficient_sum(),
        phi1_lo: s1.lo,
        phi2_lo: s2.lo,
        phi1_hi: s1.hi,
        phi2_hi: s2.hi,
        active_modes: active,
        multiplier_ok,
        identity_residual: residual,
        pass: s1.lo <= bound && s2.lo <= bound && multiplier_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::averaged_potential;
    use crate::fields::tests::random_vector_field;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z3() -> Lattice {
        Lattice::cubic(3).unwrap()
    }

    #[test]
    fn frame_completion_convention() {
        let f = build_frame(&z3(), &LatticeVec(vec![0, 2, 0]), &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.vector(2), vec![0.0, 0.0, 1.0]);
        assert_eq!(f.vector(0), vec![1.0, 0.0, 0.0]);
        assert_eq!(f.vector(1), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn frame_orthogonal() {
        let l = Lattice::new(&[vec![1.0, 0.2, 0.0, 0.1], vec![0.0, 1.1, 0.3, 0.0], vec![0.2, 0.0, 0.9, 0.0], vec![0.0, 0.1, 0.0, 1.3]]).unwrap();
        let gamma = LatticeVec(vec![1, -1, 0, 2]);
        let e = scaled(&l.primal_cart(&gamma), 1.0 / norm(&l.primal_cart(&gamma)));
        let mut et = crate::linalg::reject(&[0.3, 0.4, -0.2, 0.7], &e);
        et = scaled(&et, 1.0 / norm(&et));
        let f = build_frame(&l, &gamma, &et).unwrap();
        let err = (&f.t * f.t.transpose() - DMatrix::<f64>::identity(4, 4)).abs().max();
        assert!(err < 1e-13);
        let x = [0.5, -1.0, 2.0, 0.25];
        assert!((f.coordinates(&x)[0] - dot(&x, &et)).abs() < 1e-15);
        assert!((f.coordinates(&x)[1] - dot(&x, &e)).abs() < 1e-15);
    }

    #[test]
    fn frame_rejects_parallel() {
        assert!(build_frame(&z3(), &LatticeVec(vec![0, 0, 1]), &[0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn phi_vanishes_when_averaging_is_identity() {
        let l = z3();
        let mut a = FourierField::vector(&l);
        a.add_real_pair(Mode(vec![1, 0, 0]), CMatrix::from_column_slice(3, 1, &[C64::new(0.0, 0.0), C64::new(0.3, 0.1), C64::new(0.2, 0.0)])).unwrap();
        let gamma = LatticeVec(vec![0, 0, 1]);
        let et = [1.0, 0.0, 0.0];
        let at = averaged_potential(&a, &gamma, &Measure::dirac(), &et).unwrap();
        let pair = build_phi(&a, &at, &build_frame(&l, &gamma, &et).unwrap()).unwrap();
        assert!(pair.phi1.is_empty() && pair.phi2.is_empty());
    }

    #[test]
    fn identities_hold_for_random_fields() {
        let l = z3();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let gamma = LatticeVec(vec![1, 1, 0]);
        let et = [0.0, 0.0, 1.0];
        let frame = build_frame(&l, &gamma, &et).unwrap();
        for mu in [Measure::dirac(), Measure::plateau(0.4, 1.2).unwrap()] {
            for _ in 0..20 {
                let a = random_vector_field(&l, &mut rng, 2, 10, 1.0).without_mean();
                let at = averaged_potential(&a, &gamma, &mu, &et).unwrap();
                let pair = build_phi(&a, &at, &frame).unwrap();
                assert!(identity_residual(&a, &at, &frame, &pair) <= 1e-12);
                for m in pair.phi1.support().chain(pair.phi2.support()) {
                    assert!(frame_freqs(&l, &frame, m).is_some());
                }
            }
        }
    }

    #[test]
    fn single_mode_identity_against_direct_difference() {
        let l = z3();
        let gamma = LatticeVec(vec![0, 1, 0]);
        let et = [0.6, 0.0, 0.8];
        let frame = build_frame(&l, &gamma, &et).unwrap();
        let mut a = FourierField::vector(&l);
        a.add_vector(Mode(vec![1, 2, -1]), &[C64::new(0.3, 0.0), C64::new(-0.1, 0.2), C64::new(0.05, 0.0)]).unwrap();
        let at = averaged_potential(&a, &gamma, &Measure::dirac(), &et).unwrap();
        let pair = build_phi(&a, &at, &frame).unwrap();
        // numerical directional derivatives of the synthesized Φ
        let x = [0.13, 0.41, 0.77];
        let h = 1e-5;
        let deriv = |f: &FourierField, dir: &[f64]| {
            let xp: Vec<f64> = x.iter().zip(dir).map(|(a, b)| a + h * b).collect();
            let xm: Vec<f64> = x.iter().zip(dir).map(|(a, b)| a - h * b).collect();
            (f.evaluate(&xp)[(0, 0)] - f.evaluate(&xm)[(0, 0)]) / (2.0 * h)
        };
        let lhs = deriv(&pair.phi1, &frame.et) - deriv(&pair.phi2, &frame.e);
        let d = a.evaluate(&x) - at.evaluate(&x);
        let rhs: C64 = d.iter().zip(&frame.et).map(|(z, w)| z * w).sum();
        assert!((lhs - rhs).norm() < 1e-8);
    }

    #[test]
    fn c5_laws() {
        let l = z3();
        let gamma = LatticeVec(vec![0, 0, 1]);
        let zero = FourierField::vector(&l);
        assert_eq!(c5(&zero, &gamma, &Measure::dirac(), 1.7), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_vector_field(&l, &mut rng, 1, 4, 0.1);
        let c = c5(&a, &gamma, &Measure::dirac(), 1.7);
        let c2 = c5(&a.scaled(C64::new(2.0, 0.0)), &gamma, &Measure::dirac(), 1.7);
        assert!(c < 1.0 && (c2 - c * c).abs() < 1e-15);
        assert!(c5(&a, &LatticeVec(vec![0, 0, 2]), &Measure::dirac(), 1.7) < c);
        assert!(c5(&a, &gamma, &Measure::Dirac { h: Some(0.25) }, 1.7) < c);
        let p1 = Measure::plateau(0.5, 1.0).unwrap();
        let p2 = Measure::plateau(0.5, 0.6).unwrap();
        assert!(p2.norm() > p1.norm());
        assert!(c5(&a, &gamma, &p2, 1.7) < c5(&a, &gamma, &p1, 1.7));
    }

    #[test]
    fn lemma1_random_dirac() {
        let l = z3();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let c = 1.7058;
        for i in 0..100 {
            let gamma = [LatticeVec(vec![0, 0, 1]), LatticeVec(vec![1, 0, 1]), LatticeVec(vec![1, 1, 1])][i % 3].clone();
            let g = l.primal_cart(&gamma);
            let e = scaled(&g, 1.0 / norm(&g));
            let raw: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let et = crate::linalg::reject(&raw, &e);
            let et = scaled(&et, 1.0 / norm(&et));
            let a = random_vector_field(&l, &mut rng, 2, 6, 0.5).without_mean();
            let at = averaged_potential(&a, &gamma, &Measure::dirac(), &et).unwrap();
            let frame = build_frame(&l, &gamma, &et).unwrap();
            let r = lemma1_check(&a, &at, &frame, &Measure::dirac(), EtaSpec::default(), c, None).unwrap();
            assert!(r.pass && r.multiplier_ok, "{r:?}");
        }
        let zero = FourierField::vector(&l);
        let frame = build_frame(&l, &LatticeVec(vec![0, 0, 1]), &[1.0, 0.0, 0.0]).unwrap();
        let r = lemma1_check(&zero, &zero, &frame, &Measure::dirac(), EtaSpec::default(), c, None).unwrap();
        assert!(r.pass && r.active_modes == 0);
    }

    #[test]
    fn lemma1_single_mode_exact() {
        let l = z3();
        let gamma = LatticeVec(vec![0, 0, 1]);
        let et = [1.0, 0.0, 0.0];
        let frame = build_frame(&l, &gamma, &et).unwrap();
        let mut a = FourierField::vector(&l);
        let v = [C64::new(0.2, 0.0), C64::new(0.0, 0.1), C64::new(-0.3, 0.05)];
        a.add_vector(Mode(vec![1, 0, 2]), &v).unwrap();
        let at = averaged_potential(&a, &gamma, &Measure::dirac(), &et).unwrap();
        let r = lemma1_check(&a, &at, &frame, &Measure::dirac(), EtaSpec::default(), 1.7058, None).unwrap();
        // one mode: sup |Φ_s| is the coefficient modulus
        let (n1, n2) = (1.0_f64, 2.0_f64);
        let d1 = v[0];
        let d2 = v[2];
        let den = 2.0 * PI * (n1 * n1 + n2 * n2);
        let phi1 = (d1 * n1 + d2 * n2).norm() / den;
        let phi2 = (d1 * n2 - d2 * n1).norm() / den;
        assert!((r.phi1_lo - phi1).abs() < 1e-15 && (r.phi2_lo - phi2).abs() < 1e-15);
        assert!(r.pass);
    }
}
