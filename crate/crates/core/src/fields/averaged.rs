//! The averaged potential `Ã(γ, μ, ẽ; x)` and the smallness functional
//! built from it.
//!
//! Averaging over a full period along `γ` keeps exactly the modes with
//! `(N, γ) = 0`; averaging along `ẽ` against `μ` multiplies each surviving
//! mode by `μ̂(2π(N, ẽ))`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::sphere::{self, SphereSampling};
use super::{default_grid_for, FieldKind, FourierField, GridSynth, Measure};
use crate::lattice::{LatticeVec, Mode};
use crate::linalg::{cnorm, dot, norm, scaled};
use crate::{CMatrix, Error, Result, C64};

const ORTHO_TOL: f64 = 1e-10;
const MEAN_TOL: f64 = 1e-12;

pub fn averaged_potential(a: &FourierField, gamma: &LatticeVec, mu: &Measure, et: &[f64]) -> Result<FourierField> {
    let lattice = a.lattice();
    if gamma.is_zero() {
        return Err(Error::param("gamma", "must be nonzero"));
    }
    let g = lattice.primal_cart(gamma);
    if et.len() != lattice.dim() || (norm(et) - 1.0).abs() > ORTHO_TOL || dot(et, &g).abs() > ORTHO_TOL * norm(&g) {
        return Err(Error::NotOrthonormal(format!("ẽ must be a unit vector orthogonal to γ; (ẽ, γ) = {:e}", dot(et, &g))));
    }
    a.map_coeffs(a.kind(), |m, c| {
        (m.pair(gamma) == 0).then(|| c * C64::new(mu.transform(2.0 * PI * lattice.dual_dot(m, et)), 0.0))
    })
}

/// `(v, ẽ) + i (v, e)` for a complex vector coefficient.
pub fn transverse_combination(v: &[C64], et: &[f64], e: &[f64]) -> C64 {
    let a: C64 = v.iter().zip(et).map(|(z, x)| z * x).sum();
    let b: C64 = v.iter().zip(e).map(|(z, x)| z * x).sum();
    a + C64::new(0.0, 1.0) * b
}

/// Which pointwise quantity of `Ã` is maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionForm {
    /// `|(Ã, ẽ) + i(Ã, e)|`, the form entering the resolvent bound.
    Combination,
    /// `|Ã|`, the Euclidean form of the absolute-continuity criterion.
    Euclidean,
}

/// Bracket for `θ̃ = |γ| π^{-1} max_ẽ sup_x q(Ã(γ, μ, ẽ; x))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionBracket {
    pub form: ConditionForm,
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub argmax_et: Vec<f64>,
    pub gamma_length: f64,
    pub surviving_modes: usize,
    pub grid: usize,
    pub sphere_evaluations: usize,
}

impl ConditionBracket {
    /// Certified: `θ̃ < 1`.
    pub fn holds(&self) -> bool {
        self.theta_hi < 1.0
    }

    /// Certified: `θ̃ >= 1`.
    pub fn fails(&self) -> bool {
        self.theta_lo >= 1.0
    }
}

pub fn condition_value(a: &FourierField, gamma: &LatticeVec, mu: &Measure, form: ConditionForm, sampling: SphereSampling, grid: Option<usize>) -> Result<ConditionBracket> {
    let lattice = a.lattice();
    let n = lattice.dim();
    if a.kind() != FieldKind::Vector(n) {
        return Err(Error::param("A", "expected a vector field"));
    }
    if gamma.is_zero() {
        return Err(Error::param("gamma", "must be nonzero"));
    }
    let mean = cnorm(a.mean().as_slice());
    if mean > MEAN_TOL {
        return Err(Error::NonzeroMean(mean));
    }
    let g = lattice.primal_cart(gamma);
    let glen = norm(&g);
    let e = scaled(&g, 1.0 / glen);
    let surviving: Vec<(&Mode, &CMatrix)> = a.iter().filter(|(m, _)| !m.is_zero() && m.pair(gamma) == 0).collect();
    let grid = grid.unwrap_or_else(|| default_grid_for(surviving.iter().map(|(m, _)| *m), n));

    let sup_mu = mu.transform_sup();
    let hi_sum: f64 = surviving
        .iter()
        .map(|(_, c)| {
            let v = c.as_slice();
            match form {
                ConditionForm::Euclidean => cnorm(v),
                ConditionForm::Combination if a.is_real_valued() => cnorm(v),
                ConditionForm::Combination => {
                    // |(v, ẽ) + i(v, e)| <= |v_⊥| + |(v, e)| for every ẽ ⊥ e
                    let along: C64 = v.iter().zip(&e).map(|(z, x)| z * x).sum();
                    let perp: Vec<C64> = v.iter().zip(&e).map(|(z, x)| z - along * x).collect();
                    cnorm(&perp) + along.norm()
                }
            }
        })
        .fold(0.0, |s, x: f64| s + x);
    let theta_hi = glen / PI * sup_mu * hi_sum;

    if surviving.is_empty() {
        return Ok(ConditionBracket {
            form,
            theta_lo: 0.0,
            theta_hi,
            argmax_et: sphere::complement_basis(&e)[0].clone(),
            gamma_length: glen,
            surviving_modes: 0,
            grid,
            sphere_evaluations: 0,
        });
    }

    let synth = GridSynth::new(n, grid, surviving.iter().map(|(m, _)| *m));
    let table = synth.table();
    let points = synth.points();
    let freqs: Vec<Vec<f64>> = surviving.iter().map(|(m, _)| lattice.dual_cart(m)).collect();
    let mut buf = vec![C64::new(0.0, 0.0); points * n];
    let mut sup_at = |et: &[f64]| -> f64 {
        let weights: Vec<f64> = freqs.iter().map(|f| mu.transform(2.0 * PI * dot(f, et))).collect();
        match form {
            ConditionForm::Combination => {
                let coeffs: Vec<C64> = surviving.iter().zip(&weights).map(|((_, c), w)| transverse_combination(c.as_slice(), et, &e) * *w).collect();
                (0..points)
                    .map(|p| coeffs.iter().zip(&table).map(|(c, row)| c * row[p]).sum::<C64>().norm())
                    .fold(0.0, f64::max)
            }
            ConditionForm::Euclidean => {
                buf.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                for (((_, c), w), row) in surviving.iter().zip(&weights).zip(&table) {
                    if *w == 0.0 {
                        continue;
                    }
                    for (p, ph) in row.iter().enumerate() {
                        let s = ph * *w;
                        for j in 0..n {
                            buf[p * n + j] += c[(j, 0)] * s;
                        }
                    }
                }
                buf.chunks(n).map(cnorm).fold(0.0, f64::max)
            }
        }
    };
    let best = sphere::maximize(&e, sampling, |et| sup_at(et));
    let theta_lo = (glen / PI * best.value).min(theta_hi);
    Ok(ConditionBracket {
        form,
        theta_lo,
        theta_hi,
        argmax_et: best.argmax,
        gamma_length: glen,
        surviving_modes: surviving.len(),
        grid,
        sphere_evaluations: best.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::tests::random_vector_field;
    use crate::lattice::Lattice;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z3() -> Lattice {
        Lattice::cubic(3).unwrap()
    }

    fn coarse() -> SphereSampling {
        SphereSampling { samples: 256, refine_steps: 30 }
    }

    #[test]
    fn dirac_keeps_orthogonal_modes() {
        let l = z3();
        let mut a = FourierField::vector(&l);
        a.add_real_pair(Mode(vec![1, 0, 0]), CMatrix::from_column_slice(3, 1, &[C64::new(0.0, 0.0), C64::new(0.2, 0.1), C64::new(0.0, 0.3)])).unwrap();
        let gamma = LatticeVec(vec![0, 0, 1]);
        let at = averaged_potential(&a, &gamma, &Measure::dirac(), &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(at, a);
    }

    #[test]
    fn non_orthogonal_modes_annihilated() {
        let l = z3();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_vector_field(&l, &mut rng, 2, 8, 1.0);
        let gamma = LatticeVec(vec![1, 1, 0]);
        let et = [0.0, 0.0, 1.0];
        let at = averaged_potential(&a, &gamma, &Measure::plateau(0.5, 1.0).unwrap(), &et).unwrap();
        for m in at.support() {
            assert_eq!(m.pair(&gamma), 0);
        }
        assert!(averaged_potential(&a, &gamma, &Measure::dirac(), &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn idempotent_for_dirac() {
        let l = z3();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_vector_field(&l, &mut rng, 2, 8, 1.0);
        let gamma = LatticeVec(vec![0, 1, 0]);
        let et = [0.6, 0.0, 0.8];
        let once = averaged_potential(&a, &gamma, &Measure::dirac(), &et).unwrap();
        let twice = averaged_potential(&once, &gamma, &Measure::dirac(), &et).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn preserves_reality_and_bound() {
        let l = z3();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_vector_field(&l, &mut rng, 2, 10, 1.0);
        let gamma = LatticeVec(vec![0, 0, 1]);
        let mu = Measure::plateau(0.3, 0.9).unwrap();
        let et = [0.8, -0.6, 0.0];
        let at = averaged_potential(&a, &gamma, &mu, &et).unwrap();
        assert!(at.is_real_valued());
        let orth_sum: f64 = a.iter().filter(|(m, _)| m.pair(&gamma) == 0).map(|(_, c)| cnorm(c.as_slice())).fold(0.0, |s, x| s + x);
        assert!(at.sup_norm(at.default_grid()).hi <= mu.transform_sup() * orth_sum + 1e-15);
    }

    #[test]
    fn zero_and_annihilated_fields() {
        let l = z3();
        let gamma = LatticeVec(vec![0, 0, 1]);
        let zero = FourierField::vector(&l);
        let b = condition_value(&zero, &gamma, &Measure::dirac(), ConditionForm::Combination, coarse(), None).unwrap();
        assert_eq!((b.theta_lo, b.theta_hi), (0.0, 0.0));
        let mut a = FourierField::vector(&l);
        a.add_real_pair(Mode(vec![1, 0, 1]), CMatrix::from_column_slice(3, 1, &[C64::new(0.4, 0.0); 3])).unwrap();
        let b = condition_value(&a, &gamma, &Measure::dirac(), ConditionForm::Combination, coarse(), None).unwrap();
        assert_eq!((b.theta_lo, b.theta_hi), (0.0, 0.0));
        assert!(b.holds());
    }

    #[test]
    fn nonzero_mean_rejected() {
        let l = z3();
        let mut a = FourierField::vector(&l);
        a.add_vector(Mode::zero(3), &[C64::new(0.1, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let err = condition_value(&a, &LatticeVec(vec![1, 0, 0]), &Measure::dirac(), ConditionForm::Combination, coarse(), None);
        assert!(matches!(err, Err(Error::NonzeroMean(_))));
    }

    #[test]
    fn single_mode_against_circle_scan() {
        let l = z3();
        let gamma = LatticeVec(vec![0, 0, 1]);
        let v = [C64::new(0.05, 0.02), C64::new(-0.03, 0.0), C64::new(0.01, -0.04)];
        let mut a = FourierField::vector(&l);
        a.add_vector(Mode(vec![1, 1, 0]), &v).unwrap();
        let b = condition_value(&a, &gamma, &Measure::dirac(), ConditionForm::Combination, SphereSampling::for_dim(3), None).unwrap();
        // single mode: sup_x |c e^{iθ}| = |c|, so θ̃ = |γ| max_ẽ |(v,ẽ) + i(v,e)| / π
        let e = [0.0, 0.0, 1.0];
        let f = |t: f64| transverse_combination(&v, &[t.cos(), t.sin(), 0.0], &e).norm();
        let h = 2.0 * PI / 100_000.0;
        let coarse_best = (0..100_000).map(|i| i as f64 * h).max_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
        let fine = (-100_000..=100_000).map(|i| f(coarse_best + i as f64 * h / 100_000.0)).fold(0.0, f64::max) / PI;
        assert!(b.theta_lo <= fine + 1e-12 && fine <= b.theta_hi, "{b:?} {fine}");
        assert!((b.theta_lo - fine).abs() < 1e-9);
    }

    #[test]
    fn translation_invariance() {
        let l = z3();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_vector_field(&l, &mut rng, 1, 6, 0.2).without_mean();
        let gamma = LatticeVec(vec![0, 0, 1]);
        let shift = [0.25, 0.5, 0.125];
        let shifted = a
            .map_coeffs(a.kind(), |m, c| Some(c * C64::from_polar(1.0, 2.0 * PI * l.dual_dot(m, &shift))))
            .unwrap();
        for form in [ConditionForm::Combination, ConditionForm::Euclidean] {
            let b1 = condition_value(&a, &gamma, &Measure::dirac(), form, coarse(), Some(8)).unwrap();
            let b2 = condition_value(&shifted, &gamma, &Measure::dirac(), form, coarse(), Some(8)).unwrap();
            assert!((b1.theta_hi - b2.theta_hi).abs() < 1e-14);
            assert!((b1.theta_lo - b2.theta_lo).abs() < 1e-12);
        }
    }
}
