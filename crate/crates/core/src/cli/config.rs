//! JSON run configuration.
//!
//! Complex numbers are `[re, im]`; lattice entries are numbers or exact
//! `"p/q"` strings. Unknown keys are rejected and every error carries the
//! JSON pointer of the offending value.

use serde::{Deserialize, Serialize};

use crate::bands::DEFAULT_FLAT_THRESHOLD;
use crate::clifford::CliffordRep;
use crate::fields::{FourierField, Measure, MeasureSpec, PotentialSet};
use crate::gauge::{EtaSpec, QuadParams};
use crate::lattice::{Atom, Lattice, LatticeVec, Mode};
use crate::verify::Theorem3Params;
use crate::{CMatrix, Error, Result, C64};

pub type Complex = [f64; 2];

/// A lattice entry: a JSON number or an exact `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Ratio(String),
}

impl Entry {
    pub fn value(&self) -> std::result::Result<f64, String> {
        match self {
            Entry::Number(x) => Ok(*x),
            Entry::Ratio(s) => {
                let (p, q) = s.split_once('/').map_or((s.as_str(), "1"), |(p, q)| (p, q));
                let p: i64 = p.trim().parse().map_err(|_| format!("`{s}` is not of the form p/q"))?;
                let q: i64 = q.trim().parse().map_err(|_| format!("`{s}` is not of the form p/q"))?;
                if q == 0 {
                    return Err(format!("`{s}` has a zero denominator"));
                }
                Ok(p as f64 / q as f64)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    /// Rows are the period basis vectors `E_j`.
    pub basis: Vec<Vec<Entry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorCoeff {
    pub mode: Vec<i64>,
    pub value: Vec<Complex>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixCoeff {
    pub mode: Vec<i64>,
    /// Row-major `M × M`.
    pub value: Vec<Vec<Complex>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(default, rename = "A", skip_serializing_if = "Vec::is_empty")]
    pub a: Vec<VectorCoeff>,
    #[serde(default, rename = "V0", skip_serializing_if = "Vec::is_empty")]
    pub v0: Vec<MatrixCoeff>,
    #[serde(default, rename = "V1", skip_serializing_if = "Vec::is_empty")]
    pub v1: Vec<MatrixCoeff>,
    /// Add the conjugate (adjoint) partner at `-N` for every listed `N ≠ 0`.
    #[serde(default, skip_serializing_if = "is_false")]
    pub symmetrize: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandsConfig {
    pub k0: Vec<f64>,
    pub e: Vec<f64>,
    pub xi: [f64; 2],
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    DEFAULT_FLAT_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaCheck {
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FindGammaConfig {
    pub r0: f64,
    pub h: f64,
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<GammaCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThomasConfig {
    pub theta: f64,
    #[serde(default = "default_k_points")]
    pub k_points: usize,
    /// Explicit `ϰ` grid; otherwise `π|γ|^{-1} 2^j` for `j < kappa_count`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappas: Option<Vec<f64>>,
    #[serde(default = "default_kappa_count")]
    pub kappa_count: usize,
    /// Re-run at `refine × cutoff` and compare `ϰ*`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine: Option<f64>,
    #[serde(default = "default_probe")]
    pub probe_samples: usize,
}

fn default_k_points() -> usize {
    5
}

fn default_kappa_count() -> usize {
    6
}

fn default_probe() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedConfig {
    pub delta: f64,
    pub beta: f64,
    pub kappas: Vec<f64>,
    #[serde(default = "default_k_points")]
    pub k_points: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma1Config {
    /// Transverse direction; defaults to the first completion vector of `e`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub et: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default)]
    pub eta: EtaSpec,
    #[serde(default)]
    pub quad: QuadParams,
    /// Use this value of `C` instead of computing it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default = "default_measure")]
    pub measure: MeasureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bands: Option<BandsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<ConditionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub find_gamma: Option<FindGammaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem3: Option<Theorem3Params>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thomas: Option<ThomasConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weighted: Option<WeightedConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma1: Option<Lemma1Config>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelConfig>,
}

fn default_measure() -> MeasureSpec {
    MeasureSpec::Dirac { h: None }
}

fn cfg_err(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { pointer: pointer.into(), message: message.into() }
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    if out.is_empty() { "/".into() } else { out }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = pointer_of(e.path());
        cfg_err(pointer, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn to_json(cfg: &RunConfig) -> String {
    let mut s = serde_json::to_string_pretty(cfg).expect("config serializes");
    s.push('\n');
    s
}

fn positive(pointer: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() { Ok(()) } else { Err(cfg_err(pointer, format!("must be positive and finite, got {x}"))) }
}

fn finite_all(pointer: &str, xs: &[f64]) -> Result<()> {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(cfg_err(format!("{pointer}/{i}"), "must be finite")),
        None => Ok(()),
    }
}

impl RunConfig {
    pub fn dim(&self) -> usize {
        self.lattice.basis.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n < 2 {
            return Err(cfg_err("/lattice/basis", "need at least two basis rows"));
        }
        for (i, row) in self.lattice.basis.iter().enumerate() {
            if row.len() != n {
                return Err(cfg_err(format!("/lattice/basis/{i}"), format!("expected {n} entries, got {}", row.len())));
            }
            for (j, x) in row.iter().enumerate() {
                let v = x.value().map_err(|m| cfg_err(format!("/lattice/basis/{i}/{j}"), m))?;
                if !v.is_finite() {
                    return Err(cfg_err(format!("/lattice/basis/{i}/{j}"), "must be finite"));
                }
            }
        }
        if let Some(d) = self.dimension {
            if d != n {
                return Err(cfg_err("/dimension", format!("basis has {n} rows but dimension is {d}")));
            }
        }
        let m = CliffordRep::new(n).map_err(|e| cfg_err("/lattice/basis", e.to_string()))?.size();
        for (i, c) in self.potential.a.iter().enumerate() {
            let p = format!("/potential/A/{i}");
            if c.mode.len() != n {
                return Err(cfg_err(format!("{p}/mode"), format!("expected {n} integers")));
            }
            if c.value.len() != n {
                return Err(cfg_err(format!("{p}/value"), format!("expected {n} complex entries")));
            }
            finite_all(&format!("{p}/value"), &c.value.iter().flatten().copied().collect::<Vec<_>>())?;
        }
        for (name, list) in [("V0", &self.potential.v0), ("V1", &self.potential.v1)] {
            for (i, c) in list.iter().enumerate() {
                let p = format!("/potential/{name}/{i}");
                if c.mode.len() != n {
                    return Err(cfg_err(format!("{p}/mode"), format!("expected {n} integers")));
                }
                if c.value.len() != m {
                    return Err(cfg_err(format!("{p}/value"), format!("expected {m} rows")));
                }
                for (r, row) in c.value.iter().enumerate() {
                    if row.len() != m {
                        return Err(cfg_err(format!("{p}/value/{r}"), format!("expected {m} complex entries")));
                    }
                    finite_all(&format!("{p}/value/{r}"), &row.iter().flatten().copied().collect::<Vec<_>>())?;
                }
            }
        }
        Measure::from_spec(self.measure).map_err(|e| cfg_err("/measure", e.to_string()))?;
        if let Some(g) = &self.gamma {
            if g.len() != n || g.iter().all(|x| *x == 0) {
                return Err(cfg_err("/gamma", format!("expected {n} integers, not all zero")));
            }
        }
        if let Some(c) = self.cutoff {
            positive("/cutoff", c)?;
        }
        if let Some(b) = &self.bands {
            if b.k0.len() != n {
                return Err(cfg_err("/bands/k0", format!("expected {n} entries")));
            }
            finite_all("/bands/k0", &b.k0)?;
            if b.e.len() != n || (b.e.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() > 1e-12 {
                return Err(cfg_err("/bands/e", "expected a unit vector"));
            }
            if !(b.xi[1] > b.xi[0]) {
                return Err(cfg_err("/bands/xi", "expected an increasing pair"));
            }
            if b.samples < 2 {
                return Err(cfg_err("/bands/samples", "need at least 2"));
            }
            if let Some(w) = b.window {
                if !(w[1] > w[0]) {
                    return Err(cfg_err("/bands/window", "expected an increasing pair"));
                }
            }
            positive("/bands/threshold", b.threshold)?;
        }
        if let Some(c) = &self.condition {
            if c.sphere_samples == Some(0) {
                return Err(cfg_err("/condition/sphere_samples", "must be positive"));
            }
            if c.grid == Some(0) {
                return Err(cfg_err("/condition/grid", "must be positive"));
            }
        }
        if let Some(f) = &self.find_gamma {
            positive("/find_gamma/r0", f.r0)?;
            positive("/find_gamma/h", f.h)?;
            for (i, a) in f.atoms.iter().enumerate() {
                if a.direction.len() != n {
                    return Err(cfg_err(format!("/find_gamma/atoms/{i}/direction"), format!("expected {n} entries")));
                }
                if !(a.weight >= 0.0) {
                    return Err(cfg_err(format!("/find_gamma/atoms/{i}/weight"), "must be nonnegative"));
                }
            }
            if let Some(c) = &f.check {
                positive("/find_gamma/check/c1", c.c1)?;
                positive("/find_gamma/check/c2", c.c2)?;
            }
        }
        if let Some(t) = &self.theorem3 {
            positive("/theorem3/h", t.h)?;
            if !(t.h1 > t.h) {
                return Err(cfg_err("/theorem3/h1", "must exceed h"));
            }
            if !(2.0 * t.q > n as f64 - 2.0) {
                return Err(cfg_err("/theorem3/q", format!("need 2q > n - 2 = {}", n - 2)));
            }
            if t.r0.is_empty() {
                return Err(cfg_err("/theorem3/r0", "need at least one radius"));
            }
            for (i, r) in t.r0.iter().enumerate() {
                positive(&format!("/theorem3/r0/{i}"), *r)?;
            }
            if t.samples == 0 {
                return Err(cfg_err("/theorem3/samples", "must be positive"));
            }
        }
        if let Some(t) = &self.thomas {
            if !(t.theta > 0.0 && t.theta < 1.0) {
                return Err(cfg_err("/thomas/theta", "must lie in (0, 1)"));
            }
            if t.k_points == 0 {
                return Err(cfg_err("/thomas/k_points", "must be positive"));
            }
            if let Some(k) = &t.kappas {
                for (i, x) in k.iter().enumerate() {
                    if !(*x >= 0.0 && x.is_finite()) {
                        return Err(cfg_err(format!("/thomas/kappas/{i}"), "must be finite and nonnegative"));
                    }
                }
            } else if t.kappa_count == 0 {
                return Err(cfg_err("/thomas/kappa_count", "must be positive"));
            }
            if let Some(r) = t.refine {
                if !(r > 1.0 && r.is_finite()) {
                    return Err(cfg_err("/thomas/refine", "must exceed 1"));
                }
            }
        }
        if let Some(w) = &self.weighted {
            if !(w.delta > 0.0 && w.delta < 1.0) {
                return Err(cfg_err("/weighted/delta", "must lie in (0, 1)"));
            }
            positive("/weighted/beta", w.beta)?;
            if w.kappas.is_empty() {
                return Err(cfg_err("/weighted/kappas", "need at least one value"));
            }
            for (i, x) in w.kappas.iter().enumerate() {
                if !(*x > w.beta && x.is_finite()) {
                    return Err(cfg_err(format!("/weighted/kappas/{i}"), "every ϰ must be finite and exceed beta"));
                }
            }
            if w.k_points == 0 {
                return Err(cfg_err("/weighted/k_points", "must be positive"));
            }
        }
        if let Some(l) = &self.lemma1 {
            if let Some(et) = &l.et {
                if et.len() != n {
                    return Err(cfg_err("/lemma1/et", format!("expected {n} entries")));
                }
            }
            if l.grid == Some(0) {
                return Err(cfg_err("/lemma1/grid", "must be positive"));
            }
        }
        if let Some(k) = &self.kernel {
            positive("/kernel/eta/scale", k.eta.scale)?;
            if k.quad.order < 2 {
                return Err(cfg_err("/kernel/quad/order", "must be at least 2"));
            }
            if k.quad.density == 0 {
                return Err(cfg_err("/kernel/quad/density", "must be positive"));
            }
            positive("/kernel/quad/window", k.quad.window)?;
            positive("/kernel/quad/tail_tol", k.quad.tail_tol)?;
            positive("/kernel/quad/max_radius", k.quad.max_radius)?;
            positive("/kernel/quad/cross_tol", k.quad.cross_tol)?;
            if let Some(c) = k.constant {
                positive("/kernel/constant", c)?;
            }
        }
        Ok(())
    }

    pub fn build_lattice(&self) -> Result<Lattice> {
        let rows: Vec<Vec<f64>> = self.lattice.basis.iter().map(|r| r.iter().map(|x| x.value().expect("validated")).collect()).collect();
        Lattice::new(&rows).map_err(|e| cfg_err("/lattice/basis", e.to_string()))
    }

    pub fn build_measure(&self) -> Measure {
        Measure::from_spec(self.measure).expect("validated")
    }

    pub fn build_gamma(&self) -> Result<LatticeVec> {
        self.gamma.clone().map(LatticeVec).ok_or_else(|| cfg_err("/gamma", "this command needs a lattice vector gamma"))
    }

    pub fn build_potential(&self, lattice: &Lattice) -> Result<PotentialSet> {
        let n = lattice.dim();
        let rep = CliffordRep::new(n)?;
        let c = |z: &Complex| C64::new(z[0], z[1]);
        let sym = self.potential.symmetrize;
        let mut a = FourierField::vector(lattice);
        for (i, coeff) in self.potential.a.iter().enumerate() {
            let v = CMatrix::from_iterator(n, 1, coeff.value.iter().map(c));
            let mode = Mode(coeff.mode.clone());
            let r = if sym && !mode.is_zero() { a.add_real_pair(mode, v) } else { a.add_coeff(mode, v) };
            r.map_err(|e| cfg_err(format!("/potential/A/{i}"), e.to_string()))?;
        }
        let mut matrices = Vec::new();
        for (name, list) in [("V0", &self.potential.v0), ("V1", &self.potential.v1)] {
            let mut f = FourierField::matrix(lattice, rep.size());
            for (i, coeff) in list.iter().enumerate() {
                let s = rep.size();
                let v = CMatrix::from_fn(s, s, |r, col| c(&coeff.value[r][col]));
                let mode = Mode(coeff.mode.clone());
                let r = if sym && !mode.is_zero() { f.add_real_pair(mode, v) } else { f.add_coeff(mode, v) };
                r.map_err(|e| cfg_err(format!("/potential/{name}/{i}"), e.to_string()))?;
            }
            matrices.push(f);
        }
        let v1 = matrices.pop().expect("two fields");
        let v0 = matrices.pop().expect("two fields");
        PotentialSet::new(&rep, a, v0, v1).map_err(|e| match e {
            Error::MatrixClass { field, mode } => cfg_err(format!("/potential/{field}"), format!("coefficient at mode {mode:?} is not in the required matrix class")),
            other => cfg_err("/potential", other.to_string()),
        })
    }

    pub fn require_cutoff(&self) -> Result<f64> {
        self.cutoff.ok_or_else(|| cfg_err("/cutoff", "this command needs a Fourier cutoff (config or --cutoff)"))
    }
}

pub fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T> {
    section.as_ref().ok_or_else(|| cfg_err(format!("/{name}"), "section required by this command"))
}
