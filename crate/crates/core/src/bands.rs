//! Band functions `ξ ↦ E_ν(k₀ + ξe)` along a line and a flatness
//! diagnostic.

use serde::Serialize;

use crate::fiber::{assemble, FiberPoint};
use crate::fields::PotentialSet;
use crate::lattice::ModeSet;
use crate::linalg::{norm, par_map};
use crate::table::{Cell, Table};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSheet {
    pub k0: Vec<f64>,
    pub e: Vec<f64>,
    pub xi: Vec<f64>,
    /// `eigenvalues[i]` is the ascending spectrum at `xi[i]`.
    pub eigenvalues: Vec<Vec<f64>>,
    pub cutoff: f64,
    pub modes: usize,
    pub clipped: bool,
}

impl BandSheet {
    pub fn bands(&self) -> usize {
        self.eigenvalues.first().map_or(0, Vec::len)
    }

    pub fn band(&self, nu: usize) -> Vec<f64> {
        self.eigenvalues.iter().map(|row| row[nu]).collect()
    }

    /// Columns `xi, E_1, …, E_m`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(std::iter::once("xi".to_string()).chain((1..=self.bands()).map(|i| format!("E_{i}"))));
        for (x, row) in self.xi.iter().zip(&self.eigenvalues) {
            t.push(std::iter::once(Cell::Float(*x)).chain(row.iter().map(|v| Cell::Float(*v))).collect());
        }
        t
    }
}

pub fn band_sweep(pot: &PotentialSet, k0: &[f64], e: &[f64], xi_range: (f64, f64), samples: usize, cutoff: f64) -> Result<BandSheet> {
    let n = pot.lattice().dim();
    if k0.len() != n || e.len() != n {
        return Err(Error::SizeMismatch { expected: n, actual: k0.len().max(e.len()) });
    }
    if samples < 2 {
        return Err(Error::param("samples", "need at least two grid points"));
    }
    if !(xi_range.1 > xi_range.0) {
        return Err(Error::param("xi_range", "must be an increasing interval"));
    }
    if !(cutoff >= 0.0) {
        return Err(Error::param("cutoff", "must be nonnegative"));
    }
    if (norm(e) - 1.0).abs() > 1e-12 {
        return Err(Error::param("e", "must be a unit vector"));
    }
    if !pot.is_self_adjoint() {
        return Err(Error::param("potential", "band sweeps need real A and Hermitian V0, V1"));
    }
    let modes = ModeSet::ball(pot.lattice(), cutoff);
    let xi: Vec<f64> = (0..samples).map(|i| xi_range.0 + (xi_range.1 - xi_range.0) * i as f64 / (samples - 1) as f64).collect();
    let results = par_map(&xi, |&x| {
        let k: Vec<f64> = k0.iter().zip(e).map(|(a, b)| a + x * b).collect();
        let op = assemble(&modes, &FiberPoint::real(k), pot)?;
        Ok::<_, Error>((op.eigenvalues()?, op.clipped()))
    });
    let mut eigenvalues = Vec::with_capacity(samples);
    let mut clipped = false;
    for r in results {
        let (ev, c) = r?;
        eigenvalues.push(ev);
        clipped |= c;
    }
    Ok(BandSheet { k0: k0.to_vec(), e: e.to_vec(), xi, eigenvalues, cutoff, modes: modes.len(), clipped })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandVariation {
    pub band: usize,
    pub min: f64,
    pub max: f64,
    pub variation: f64,
    pub suspect_flat: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonconstancyReport {
    pub window: (f64, f64),
    pub threshold: f64,
    pub bands: Vec<BandVariation>,
    pub suspect_flat: usize,
}

pub const DEFAULT_FLAT_THRESHOLD: f64 = 1e-6;

/// `|E| <= max |E| / 2` over the sheet, keeping clear of the truncation edge.
pub fn default_window(sheet: &BandSheet) -> (f64, f64) {
    let top = sheet.eigenvalues.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    (-top / 2.0, top / 2.0)
}

pub fn nonconstancy_report(sheet: &BandSheet, window: Option<(f64, f64)>, threshold: f64) -> Result<NonconstancyReport> {
    let window = window.unwrap_or_else(|| default_window(sheet));
    if !(window.1 > window.0) {
        return Err(Error::param("window", "energy window is empty"));
    }
    let mut bands = Vec::new();
    for nu in 0..sheet.bands() {
        let b = sheet.band(nu);
        if !b.iter().any(|v| *v >= window.0 && *v <= window.1) {
            continue;
        }
        let min = b.iter().copied().fold(f64::INFINITY, f64::min);
        let max = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        bands.push(BandVariation { band: nu + 1, min, max, variation: max - min, suspect_flat: max - min < threshold });
    }
    let suspect_flat = bands.iter().filter(|b| b.suspect_flat).count();
    Ok(NonconstancyReport { window, threshold, bands, suspect_flat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::CliffordRep;
    use crate::fields::FourierField;
    use crate::lattice::{shifted_frequency, Lattice, Mode};
    use crate::{CMatrix, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn setup() -> (Lattice, CliffordRep) {
        (Lattice::cubic(3).unwrap(), CliffordRep::new(3).unwrap())
    }

    fn small_potential(rng: &mut ChaCha8Rng, l: &Lattice, rep: &CliffordRep, amp: f64) -> PotentialSet {
        let mut a = FourierField::vector(l);
        let mut v0 = FourierField::matrix(l, 4);
        for _ in 0..2 {
            let m = Mode((0..3).map(|_| rng.random_range(-1..=1)).collect());
            if m.is_zero() {
                continue;
            }
            let c: Vec<C64> = (0..3).map(|_| C64::new(rng.random_range(-amp..amp), rng.random_range(-amp..amp))).collect();
            a.add_real_pair(m.clone(), CMatrix::from_column_slice(3, 1, &c)).unwrap();
            v0.add_real_pair(m, rep.identity() * C64::new(rng.random_range(-amp..amp), 0.0)).unwrap();
        }
        PotentialSet::new(rep, a, v0, FourierField::matrix(l, 4)).unwrap()
    }

    #[test]
    fn free_bands_closed_form() {
        let (l, rep) = setup();
        let k0 = vec![0.1, 0.2, 0.3];
        let e = vec![0.6, 0.0, 0.8];
        let cutoff = 2.0 * PI * 1.5;
        let sheet = band_sweep(&PotentialSet::zero(&rep, &l), &k0, &e, (-1.0, 1.0), 20, cutoff).unwrap();
        let modes = ModeSet::ball(&l, cutoff);
        for (x, row) in sheet.xi.iter().zip(&sheet.eigenvalues) {
            let k: Vec<f64> = k0.iter().zip(&e).map(|(a, b)| a + x * b).collect();
            let mut want: Vec<f64> = modes.modes().iter().flat_map(|m| {
                let q = norm(&shifted_frequency(&l, &k, m));
                [q, q, -q, -q]
            }).collect();
            want.sort_by(f64::total_cmp);
            for (a, b) in row.iter().zip(&want) {
                assert!((a - b).abs() < 1e-10);
            }
        }
        let rep_ = nonconstancy_report(&sheet, None, DEFAULT_FLAT_THRESHOLD).unwrap();
        assert_eq!(rep_.suspect_flat, 0);
        assert!(rep_.bands.iter().all(|b| b.variation > 0.0));
    }

    #[test]
    fn constant_shift() {
        let (l, rep) = setup();
        let c = 0.37;
        let mut v0 = FourierField::matrix(&l, 4);
        v0.add_coeff(Mode::zero(3), rep.identity() * C64::new(c, 0.0)).unwrap();
        let pot = PotentialSet::new(&rep, FourierField::vector(&l), v0, FourierField::matrix(&l, 4)).unwrap();
        let k0 = vec![0.1, -0.2, 0.3];
        let e = vec![0.0, 1.0, 0.0];
        let free = band_sweep(&PotentialSet::zero(&rep, &l), &k0, &e, (0.0, 1.0), 7, 2.0 * PI).unwrap();
        let shifted = band_sweep(&pot, &k0, &e, (0.0, 1.0), 7, 2.0 * PI).unwrap();
        for (a, b) in free.eigenvalues.iter().flatten().zip(shifted.eigenvalues.iter().flatten()) {
            assert!((a + c - b).abs() < 1e-12);
        }
        let r1 = nonconstancy_report(&free, Some((-3.0, 3.0)), 1e-6).unwrap();
        let r2 = nonconstancy_report(&shifted, Some((-3.0 + c, 3.0 + c)), 1e-6).unwrap();
        for (a, b) in r1.bands.iter().zip(&r2.bands) {
            assert!((a.variation - b.variation).abs() < 1e-12);
        }
    }

    #[test]
    fn random_small_potentials_not_flat() {
        let (l, rep) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let pot = small_potential(&mut rng, &l, &rep, 0.1);
            let k0: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let sheet = band_sweep(&pot, &k0, &[0.0, 0.0, 1.0], (0.0, 2.0), 12, 2.0 * PI * 1.5).unwrap();
            assert_eq!(nonconstancy_report(&sheet, None, DEFAULT_FLAT_THRESHOLD).unwrap().suspect_flat, 0);
        }
    }

    #[test]
    fn gap_opens_at_crossing() {
        // along e = (1,0,0) from k0 = 0 the shells of N = 0 and N = -E_1* cross at ξ = π;
        // the degenerate level E = π pairs α_1 = +1 in one mode with α_1 = -1 in the other
        let (l, rep) = setup();
        let eps = 0.05;
        let sweep = |v0: FourierField, v1: FourierField| {
            let pot = PotentialSet::new(&rep, FourierField::vector(&l), v0, v1).unwrap();
            let sheet = band_sweep(&pot, &[0.0; 3], &[1.0, 0.0, 0.0], (PI - 0.1, PI + 0.1), 3, 2.0 * PI * 1.2).unwrap();
            sheet.eigenvalues[1].iter().copied().filter(|v| (v - PI).abs() < 0.2).collect::<Vec<_>>()
        };
        let free = sweep(FourierField::matrix(&l, 4), FourierField::matrix(&l, 4));
        assert!(free.len() == 4 && free.iter().all(|v| (v - PI).abs() < 1e-12));
        // α_{n+1} flips α_1 chirality: first-order splitting ±ε
        let mut v1 = FourierField::matrix(&l, 4);
        v1.add_real_pair(Mode(vec![1, 0, 0]), rep.alpha_extra() * C64::new(eps, 0.0)).unwrap();
        let p = sweep(FourierField::matrix(&l, 4), v1);
        let spread = p.iter().copied().fold(f64::NEG_INFINITY, f64::max) - p.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((spread - 2.0 * eps).abs() < 0.01 * eps, "{p:?}");
        // a scalar coupling links E = π only to E = -π: second-order shift ε²/(2π)
        let mut v0 = FourierField::matrix(&l, 4);
        v0.add_real_pair(Mode(vec![1, 0, 0]), rep.identity() * C64::new(eps, 0.0)).unwrap();
        let s = sweep(v0, FourierField::matrix(&l, 4));
        let top = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!((top - PI - eps * eps / (2.0 * PI)).abs() < 0.05 * eps * eps / (2.0 * PI), "{s:?}");
    }

    #[test]
    fn reflection_symmetry() {
        let (l, rep) = setup();
        let mut v0 = FourierField::matrix(&l, 4);
        v0.add_real_pair(Mode(vec![1, 1, 0]), rep.identity() * C64::new(0.2, 0.0)).unwrap();
        let pot = PotentialSet::new(&rep, FourierField::vector(&l), v0, FourierField::matrix(&l, 4)).unwrap();
        let k = vec![0.3, -0.7, 0.45];
        let mk: Vec<f64> = k.iter().map(|x| -x).collect();
        let a = band_sweep(&pot, &k, &[1.0, 0.0, 0.0], (0.0, 0.5), 2, 2.0 * PI * 1.5).unwrap();
        let b = band_sweep(&pot, &mk, &[-1.0, 0.0, 0.0], (0.0, 0.5), 2, 2.0 * PI * 1.5).unwrap();
        for (x, y) in a.eigenvalues.iter().flatten().zip(b.eigenvalues.iter().flatten()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn refinement_stability() {
        let (l, rep) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let pot = small_potential(&mut rng, &l, &rep, 0.1);
        let coarse = band_sweep(&pot, &[0.2, 0.1, 0.0], &[0.0, 1.0, 0.0], (0.0, 1.0), 6, 2.0 * PI).unwrap();
        let fine = band_sweep(&pot, &[0.2, 0.1, 0.0], &[0.0, 1.0, 0.0], (0.0, 1.0), 11, 2.0 * PI).unwrap();
        let step = 0.2;
        let w = Some((-4.0, 4.0));
        let rc = nonconstancy_report(&coarse, w, 1e-6).unwrap();
        let rf = nonconstancy_report(&fine, w, 1e-6).unwrap();
        for (a, b) in rc.bands.iter().zip(&rf.bands) {
            assert!((a.variation - b.variation).abs() <= step + 1e-12);
        }
    }

    #[test]
    fn errors() {
        let (l, rep) = setup();
        let free = PotentialSet::zero(&rep, &l);
        assert!(band_sweep(&free, &[0.0; 3], &[1.0, 0.0, 0.0], (0.0, 1.0), 1, 2.0).is_err());
        let sheet = band_sweep(&free, &[0.0; 3], &[1.0, 0.0, 0.0], (0.0, 1.0), 2, 2.0).unwrap();
        assert!(nonconstancy_report(&sheet, Some((1.0, 1.0)), 1e-6).is_err());
        assert_eq!(sheet.to_table().to_csv().lines().next().unwrap(), "xi,E_1,E_2,E_3,E_4");
    }
}
