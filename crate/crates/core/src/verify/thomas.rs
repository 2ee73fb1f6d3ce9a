use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::fiber::{assemble, g_weight, FiberPoint, TruncatedDiracOperator};
use crate::fields::MeasureSpec;
use crate::fields::sphere::SphereSampling;
use crate::fields::{condition_value, ConditionBracket, ConditionForm, Measure, PotentialSet};
use crate::gauge::c5;
use crate::lattice::{k_beta_set, Lattice, LatticeVec, ModeSet};
use crate::linalg::{dot, norm, par_map, reject, scaled};
use crate::table::{Cell, Table};
use crate::{Error, Result, C64};

/// Quasimomenta on the face `(k, γ) = π`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KGrid {
    pub center: Vec<f64>,
    /// Transverse parts of `2π E_j*` spanning the face.
    pub axes: Vec<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
}

/// `k = πγ/|γ|² + Σ_i s_i b_i` with `b_i` the transverse parts of `n − 1`
/// reciprocal basis vectors (times `2π`) and `s_i` on a centered uniform
/// grid of `per_axis` points in `(−1/2, 1/2)`.
pub fn k_grid(lattice: &Lattice, gamma: &LatticeVec, per_axis: usize) -> Result<KGrid> {
    if gamma.is_zero() {
        return Err(Error::param("gamma", "must be nonzero"));
    }
    if per_axis == 0 {
        return Err(Error::param("k_points", "must be positive"));
    }
    let n = lattice.dim();
    let g = lattice.primal_cart(gamma);
    let glen = norm(&g);
    let e = scaled(&g, 1.0 / glen);
    let center = scaled(&g, PI / (glen * glen));
    let projected: Vec<Vec<f64>> = lattice.reciprocal_rows().iter().map(|r| scaled(&reject(r, &e), 2.0 * PI)).collect();
    // greedy pick of the n - 1 best conditioned transverse directions
    let mut chosen: Vec<usize> = Vec::new();
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    while chosen.len() + 1 < n {
        let (best, resid) = (0..n)
            .filter(|i| !chosen.contains(i))
            .map(|i| {
                let mut v = projected[i].clone();
                for o in &ortho {
                    let p = dot(&v, o);
                    v.iter_mut().zip(o).for_each(|(x, y)| *x -= p * y);
                }
                (i, v)
            })
            .max_by(|a, b| norm(&a.1).total_cmp(&norm(&b.1)).then(b.0.cmp(&a.0)))
            .expect("candidates remain");
        let len = norm(&resid);
        ortho.push(scaled(&resid, 1.0 / len));
        chosen.push(best);
    }
    let axes: Vec<Vec<f64>> = chosen.iter().map(|&i| projected[i].clone()).collect();
    let offsets: Vec<f64> = (0..per_axis).map(|i| (i as f64 - (per_axis as f64 - 1.0) / 2.0) / per_axis as f64).collect();
    let total = per_axis.pow(axes.len() as u32);
    let points = (0..total)
        .map(|mut idx| {
            let mut k = center.clone();
            for axis in &axes {
                let s = offsets[idx % per_axis];
                idx /= per_axis;
                k.iter_mut().zip(axis).for_each(|(x, a)| *x += s * a);
            }
            k
        })
        .collect();
    Ok(KGrid { center, axes, points })
}

/// `ϰ_j = π|γ|^{-1} 2^j`, `j = 0, …, count − 1`.
pub fn kappa_grid(gamma_length: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| PI / gamma_length * 2f64.powi(j as i32)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThomasGrid {
    pub k_points: usize,
    pub kappas: Vec<f64>,
    pub cutoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub samples: usize,
    pub seed: u64,
    pub k_index: usize,
    pub kappa: f64,
    pub sigma_min: f64,
    pub probe_min: f64,
    pub consistent: bool,
}

/// Smallest `‖Dφ‖` over `samples` random unit vectors; never below the true
/// smallest singular value.
pub fn probe_sigma_min(op: &TruncatedDiracOperator, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = op.dim();
    let mut best = f64::INFINITY;
    for _ in 0..samples {
        let v = nalgebra::DVector::from_fn(dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let v = &v / C64::new(v.norm(), 0.0);
        best = best.min((op.matrix() * v).norm());
    }
    best
}

fn run_probe(op: &TruncatedDiracOperator, sigma: f64, k_index: usize, samples: usize, seed: u64) -> ProbeResult {
    let probe = probe_sigma_min(op, samples, seed);
    ProbeResult {
        samples,
        seed,
        k_index,
        kappa: op.fiber().kappa,
        sigma_min: sigma,
        probe_min: probe,
        consistent: probe >= sigma - 1e-9 * sigma.max(1.0),
    }
}

struct Nodes {
    modes: ModeSet,
    kgrid: KGrid,
    e: Vec<f64>,
    gamma_length: f64,
    list: Vec<(usize, usize)>,
}

fn nodes(pot: &PotentialSet, gamma: &LatticeVec, grid: &ThomasGrid) -> Result<Nodes> {
    if !(grid.cutoff >= 0.0) {
        return Err(Error::param("cutoff", "must be nonnegative"));
    }
    if grid.kappas.iter().any(|k| !(*k >= 0.0) || !k.is_finite()) {
        return Err(Error::param("kappas", "must be finite and nonnegative"));
    }
    let lattice = pot.lattice();
    let kgrid = k_grid(lattice, gamma, grid.k_points)?;
    let g = lattice.primal_cart(gamma);
    let gamma_length = norm(&g);
    let e = scaled(&g, 1.0 / gamma_length);
    let modes = ModeSet::ball(lattice, grid.cutoff);
    let list = (0..grid.kappas.len()).flat_map(|j| (0..kgrid.points.len()).map(move |i| (j, i))).collect();
    Ok(Nodes { modes, kgrid, e, gamma_length, list })
}

impl Nodes {
    fn fiber(&self, grid: &ThomasGrid, node: (usize, usize)) -> FiberPoint {
        FiberPoint { k: self.kgrid.points[node.1].clone(), e: self.e.clone(), kappa: grid.kappas[node.0] }
    }
}

fn bracket(pot: &PotentialSet, gamma: &LatticeVec, mu: &Measure) -> Result<ConditionBracket> {
    let n = pot.lattice().dim();
    condition_value(pot.a(), gamma, mu, ConditionForm::Combination, SphereSampling::for_dim(n), None)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem2Node {
    pub k_index: usize,
    pub kappa: f64,
    pub sigma_min: f64,
    /// `min_N G_N` over the mode set, the value for a zero potential.
    pub free_sigma_min: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem2Report {
    pub empirical: bool,
    pub gamma: LatticeVec,
    pub gamma_length: f64,
    pub measure: MeasureSpec,
    pub theta_tilde: ConditionBracket,
    pub theta: f64,
    pub kernel_constant: f64,
    pub c5: f64,
    pub bound: f64,
    pub cutoff: f64,
    pub modes: usize,
    pub dim: usize,
    pub clipped: bool,
    pub k_grid: KGrid,
    pub kappas: Vec<f64>,
    pub nodes: Vec<Theorem2Node>,
    /// Smallest scanned `ϰ` from which on the bound holds at every node.
    pub kappa_star: Option<f64>,
    pub probe: Option<ProbeResult>,
}

impl Theorem2Report {
    pub fn min_margin_at(&self, kappa_index: usize) -> f64 {
        let per = self.k_grid.points.len();
        self.nodes[kappa_index * per..(kappa_index + 1) * per].iter().map(|n| n.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn passed(&self) -> bool {
        self.kappa_star.is_some() && self.probe.as_ref().is_none_or(|p| p.consistent)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["k_index", "kappa", "sigma_min", "bound", "margin"]);
        for n in &self.nodes {
            t.push(vec![n.k_index.into(), n.kappa.into(), n.sigma_min.into(), self.bound.into(), n.margin.into()]);
        }
        t
    }
}

#[allow(clippy::too_many_arguments)]
pub fn verify_theorem2(pot: &PotentialSet, gamma: &LatticeVec, mu: &Measure, theta: f64, grid: &ThomasGrid, kernel_constant: f64, probe: Option<(usize, u64)>) -> Result<Theorem2Report> {
    let tt = bracket(pot, gamma, mu)?;
    if tt.theta_hi >= 1.0 {
        return Err(Error::param("theta_tilde", format!("upper bracket {} is not below 1", tt.theta_hi)));
    }
    if !(theta > 0.0 && theta < 1.0 - tt.theta_hi) {
        return Err(Error::param("theta", format!("must lie in (0, {})", 1.0 - tt.theta_hi)));
    }
    let setup = nodes(pot, gamma, grid)?;
    let lattice = pot.lattice();
    let c5v = c5(pot.a(), gamma, mu, kernel_constant);
    let bound = theta * PI / setup.gamma_length * c5v;
    let results = par_map(&setup.list, |&node| {
        let fiber = setup.fiber(grid, node);
        let op = assemble(&setup.modes, &fiber, pot)?;
        let free = setup.modes.modes().iter().map(|m| g_weight(lattice, &fiber, m)).fold(f64::INFINITY, f64::min);
        Ok::<_, Error>((op.sigma_min(), free, op.clipped(), op.dim()))
    });
    let mut out = Vec::with_capacity(results.len());
    let mut clipped = false;
    let mut dim = 0;
    for (&(j, i), r) in setup.list.iter().zip(results) {
        let (s, free, c, d) = r?;
        clipped |= c;
        dim = d;
        out.push(Theorem2Node { k_index: i, kappa: grid.kappas[j], sigma_min: s, free_sigma_min: free, margin: s - bound });
    }
    let per = setup.kgrid.points.len();
    let holds: Vec<bool> = (0..grid.kappas.len()).map(|j| out[j * per..(j + 1) * per].iter().all(|n| n.margin >= 0.0)).collect();
    let kappa_star = (0..grid.kappas.len()).find(|&j| holds[j..].iter().all(|h| *h)).map(|j| grid.kappas[j]);
    let probe = match probe {
        Some((samples, seed)) if !out.is_empty() => {
            let worst = (0..out.len()).min_by(|a, b| out[*a].sigma_min.total_cmp(&out[*b].sigma_min)).expect("nonempty");
            let op = assemble(&setup.modes, &setup.fiber(grid, setup.list[worst]), pot)?;
            Some(run_probe(&op, out[worst].sigma_min, out[worst].k_index, samples, seed))
        }
        _ => None,
    };
    Ok(Theorem2Report {
        empirical: true,
        gamma: gamma.clone(),
        gamma_length: setup.gamma_length,
        measure: mu.spec(),
        theta_tilde: tt,
        theta,
        kernel_constant,
        c5: c5v,
        bound,
        cutoff: grid.cutoff,
        modes: setup.modes.len(),
        dim,
        clipped,
        k_grid: setup.kgrid,
        kappas: grid.kappas.clone(),
        nodes: out,
        kappa_star,
        probe,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem8Node {
    pub k_index: usize,
    pub kappa: f64,
    pub k_beta: usize,
    /// `min ‖Dφ‖² / (weighted norm)²` over the truncated space.
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem8Report {
    pub empirical: bool,
    pub gamma: LatticeVec,
    pub measure: MeasureSpec,
    pub delta: f64,
    pub beta: f64,
    pub theta_tilde: ConditionBracket,
    pub c5: f64,
    /// Weight on `K_β` modes: `c_5 (1 − θ̃) π|γ|^{-1}`.
    pub k_beta_weight: f64,
    pub cutoff: f64,
    pub modes: usize,
    pub nodes: Vec<Theorem8Node>,
    pub min_ratio: f64,
    /// `1 − min ratio`.
    pub delta_star: f64,
    pub holds: bool,
}

impl Theorem8Report {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["k_index", "kappa", "k_beta", "ratio", "target", "pass"]);
        for n in &self.nodes {
            t.push(vec![n.k_index.into(), n.kappa.into(), n.k_beta.into(), n.ratio.into(), (1.0 - self.delta).into(), n.pass.into()]);
        }
        t
    }
}

#[allow(clippy::too_many_arguments)]
pub fn verify_theorem8(pot: &PotentialSet, gamma: &LatticeVec, mu: &Measure, delta: f64, beta: f64, grid: &ThomasGrid, kernel_constant: f64) -> Result<Theorem8Report> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    if !(beta > 0.0) {
        return Err(Error::param("beta", "must be positive"));
    }
    if let Some(k) = grid.kappas.iter().find(|k| **k <= beta) {
        return Err(Error::param("kappas", format!("every ϰ must exceed β = {beta}; got {k}")));
    }
    let tt = bracket(pot, gamma, mu)?;
    if tt.theta_hi >= 1.0 {
        return Err(Error::param("theta_tilde", format!("upper bracket {} is not below 1", tt.theta_hi)));
    }
    let setup = nodes(pot, gamma, grid)?;
    let lattice = pot.lattice();
    let c5v = c5(pot.a(), gamma, mu, kernel_constant);
    let kw = c5v * (1.0 - tt.theta_hi) * PI / setup.gamma_length;
    let results = par_map(&setup.list, |&node| {
        let fiber = setup.fiber(grid, node);
        let op = assemble(&setup.modes, &fiber, pot)?;
        let kb = k_beta_set(lattice, &setup.modes, &fiber.k, &fiber.e, fiber.kappa, beta)?;
        let weights: Vec<f64> = setup.modes.modes().iter().map(|m| if kb.contains(m) { kw } else { g_weight(lattice, &fiber, m) }).collect();
        let s = op.weighted_sigma_min(&weights)?;
        Ok::<_, Error>((kb.len(), s * s))
    });
    let mut out = Vec::with_capacity(results.len());
    for (&(j, i), r) in setup.list.iter().zip(results) {
        let (kb, ratio) = r?;
        out.push(Theorem8Node { k_index: i, kappa: grid.kappas[j], k_beta: kb, ratio, pass: ratio >= 1.0 - delta });
    }
    let min_ratio = out.iter().map(|n| n.ratio).fold(f64::INFINITY, f64::min);
    Ok(Theorem8Report {
        empirical: true,
        gamma: gamma.clone(),
        measure: mu.spec(),
        delta,
        beta,
        theta_tilde: tt,
        c5: c5v,
        k_beta_weight: kw,
        cutoff: grid.cutoff,
        modes: setup.modes.len(),
        holds: out.iter().all(|n| n.pass),
        nodes: out,
        min_ratio,
        delta_star: 1.0 - min_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryNode {
    pub k_index: usize,
    pub kappa: f64,
    pub sqrt_c9: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryReport {
    pub empirical: bool,
    pub gamma: LatticeVec,
    pub cutoff: f64,
    pub modes: usize,
    pub nodes: Vec<CorollaryNode>,
    pub min_sqrt_c9: f64,
}

impl CorollaryReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["k_index", "kappa", "sqrt_c9"]);
        for n in &self.nodes {
            t.push(vec![Cell::from(n.k_index), n.kappa.into(), n.sqrt_c9.into()]);
        }
        t
    }
}

/// `min ‖Dφ‖ / (Σ G_N² ‖φ_N‖²)^{1/2}` at every node.
pub fn corollary_c9(pot: &PotentialSet, gamma: &LatticeVec, grid: &ThomasGrid) -> Result<CorollaryReport> {
    let setup = nodes(pot, gamma, grid)?;
    let results = par_map(&setup.list, |&node| {
        let op = assemble(&setup.modes, &setup.fiber(grid, node), pot)?;
        op.weighted_sigma_min(&op.g_weights())
    });
    let mut out = Vec::with_capacity(results.len());
    for (&(j, i), r) in setup.list.iter().zip(results) {
        out.push(CorollaryNode { k_index: i, kappa: grid.kappas[j], sqrt_c9: r? });
    }
    let min = out.iter().map(|n| n.sqrt_c9).fold(f64::INFINITY, f64::min);
    Ok(CorollaryReport { empirical: true, gamma: gamma.clone(), cutoff: grid.cutoff, modes: setup.modes.len(), nodes: out, min_sqrt_c9: min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::CliffordRep;
    use crate::fields::FourierField;
    use crate::lattice::Mode;
    use crate::CMatrix;

    fn setup() -> (Lattice, CliffordRep) {
        (Lattice::cubic(3).unwrap(), CliffordRep::new(3).unwrap())
    }

    fn grid(cutoff: f64) -> ThomasGrid {
        ThomasGrid { k_points: 3, kappas: kappa_grid(1.0, 3), cutoff }
    }

    #[test]
    fn k_grid_on_face() {
        let l = Lattice::new(&[vec![1.0, 0.1, 0.0], vec![0.0, 1.2, 0.2], vec![0.3, 0.0, 0.9]]).unwrap();
        let gamma = LatticeVec(vec![1, -1, 2]);
        let g = l.primal_cart(&gamma);
        let kg = k_grid(&l, &gamma, 5).unwrap();
        assert_eq!(kg.points.len(), 25);
        for k in &kg.points {
            assert!((dot(k, &g) - PI).abs() < 1e-12);
        }
        assert!(kg.points.contains(&kg.center));
    }

    #[test]
    fn free_margins_closed_form() {
        let (l, rep) = setup();
        let pot = PotentialSet::zero(&rep, &l);
        let gamma = LatticeVec(vec![0, 0, 1]);
        let r = verify_theorem2(&pot, &gamma, &Measure::dirac(), 0.9, &grid(2.0 * PI * 1.5), 1.7, Some((200, 1))).unwrap();
        assert_eq!(r.kappa_star, Some(r.kappas[0]));
        assert_eq!(r.c5, 1.0);
        for n in &r.nodes {
            assert!((n.sigma_min - n.free_sigma_min).abs() < 1e-10);
            assert!(n.free_sigma_min >= PI - 1e-12);
        }
        assert!(r.passed());
    }

    #[test]
    fn theorem2_rejects_bad_theta() {
        let (l, rep) = setup();
        let pot = PotentialSet::zero(&rep, &l);
        let gamma = LatticeVec(vec![0, 0, 1]);
        assert!(verify_theorem2(&pot, &gamma, &Measure::dirac(), 1.0, &grid(2.0 * PI), 1.7, None).is_err());
        assert!(verify_theorem2(&pot, &gamma, &Measure::dirac(), 0.0, &grid(2.0 * PI), 1.7, None).is_err());
    }

    #[test]
    fn theorem8_free_ratio_at_least_one() {
        let (l, rep) = setup();
        let pot = PotentialSet::zero(&rep, &l);
        let gamma = LatticeVec(vec![0, 0, 1]);
        // on the face |(k + 2πN, e)| >= π, so K_β needs β > π
        let g = ThomasGrid { k_points: 3, kappas: vec![2.0 * PI, 4.0 * PI, 8.0 * PI], cutoff: 2.0 * PI * 1.5 };
        let r = verify_theorem8(&pot, &gamma, &Measure::dirac(), 0.1, 4.0, &g, 1.7).unwrap();
        assert!(r.nodes.iter().any(|n| n.k_beta > 0));
        assert!(r.min_ratio >= 1.0 - 1e-10, "{}", r.min_ratio);
        assert!(verify_theorem8(&pot, &gamma, &Measure::dirac(), 0.1, 2.0 * PI, &g, 1.7).is_err());
    }

    #[test]
    fn corollary_free_and_constant_potential() {
        let (l, rep) = setup();
        let gamma = LatticeVec(vec![0, 0, 1]);
        let g = grid(2.0 * PI * 1.5);
        let r = corollary_c9(&PotentialSet::zero(&rep, &l), &gamma, &g).unwrap();
        assert!(r.nodes.iter().all(|n| (n.sqrt_c9 - 1.0).abs() < 1e-12));
        let v = 0.2;
        let mut v0 = FourierField::matrix(&l, 4);
        v0.add_coeff(Mode::zero(3), rep.identity() * C64::new(v, 0.0)).unwrap();
        let pot = PotentialSet::new(&rep, FourierField::vector(&l), v0, FourierField::matrix(&l, 4)).unwrap();
        let r = corollary_c9(&pot, &gamma, &g).unwrap();
        assert!(r.min_sqrt_c9 >= 1.0 - v / PI);
    }

    #[test]
    fn scaled_potential_continuity() {
        let (l, rep) = setup();
        let mut v0 = FourierField::matrix(&l, 4);
        v0.add_real_pair(Mode(vec![1, 0, 0]), rep.identity() * C64::new(0.2, 0.0)).unwrap();
        let mut a = FourierField::vector(&l);
        a.add_real_pair(Mode(vec![0, 1, 0]), CMatrix::from_column_slice(3, 1, &[C64::new(0.0, 0.02), C64::new(0.0, 0.0), C64::new(0.01, 0.0)])).unwrap();
        let pot = PotentialSet::new(&rep, a, v0, FourierField::matrix(&l, 4)).unwrap();
        let gamma = LatticeVec(vec![0, 0, 1]);
        let g = grid(2.0 * PI);
        let zero = verify_theorem2(&pot.scaled(0.0), &gamma, &Measure::dirac(), 0.5, &g, 1.7, None).unwrap();
        for n in &zero.nodes {
            assert!((n.margin - (n.free_sigma_min - zero.bound)).abs() < 1e-10);
        }
        let mut prev = zero;
        for t in [0.25, 0.5, 1.0] {
            let r = verify_theorem2(&pot.scaled(t), &gamma, &Measure::dirac(), 0.5, &g, 1.7, None).unwrap();
            for (a, b) in r.nodes.iter().zip(&prev.nodes) {
                // σ_min is 1-Lipschitz in the potential
                assert!((a.sigma_min - b.sigma_min).abs() <= 0.5 * 0.25_f64.max(t / 2.0) + 1e-9);
            }
            prev = r;
        }
    }
}
