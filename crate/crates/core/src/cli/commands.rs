//! One runner per subcommand. Each produces a JSON document, CSV tables and
//! a pass/fail verdict for the empirical checks it performs.

use serde_json::{json, Value};

use super::config::{require, RunConfig};
use crate::bands::{band_sweep, nonconstancy_report};
use crate::fields::sphere::{complement_basis, SphereSampling};
use crate::fields::{averaged_potential, condition_value, ConditionForm};
use crate::gauge::{bessel_kernel_constant, build_frame, c5, lemma1_check, KernelReport};
use crate::lattice::{check_gamma, find_gamma, SphereMeasure};
use crate::linalg::norm;
use crate::table::{Cell, Table};
use crate::verify::{corollary_c9, theorem3_pipeline, verify_theorem2, verify_theorem8, ThomasGrid};
use crate::{Error, Result};

/// Relative agreement required of `ϰ*` between the base and refined cutoffs.
pub const REFINE_TOL: f64 = 0.1;

pub struct Outcome {
    pub report: Value,
    pub tables: Vec<(String, Table)>,
    pub pass: bool,
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn at(pointer: &str, e: Error) -> Error {
    match e {
        Error::Config { .. } => e,
        other => Error::Config { pointer: pointer.into(), message: other.to_string() },
    }
}

pub fn bands(cfg: &RunConfig) -> Result<Outcome> {
    let b = require(&cfg.bands, "bands")?;
    let lattice = cfg.build_lattice()?;
    let pot = cfg.build_potential(&lattice)?;
    let sheet = band_sweep(&pot, &b.k0, &b.e, (b.xi[0], b.xi[1]), b.samples, cfg.require_cutoff()?).map_err(|e| at("/bands", e))?;
    let report = nonconstancy_report(&sheet, b.window.map(|w| (w[0], w[1])), b.threshold)?;
    let pass = report.suspect_flat == 0;
    let mut vt = Table::new(["band", "min", "max", "variation", "suspect_flat"]);
    for v in &report.bands {
        vt.push(vec![v.band.into(), v.min.into(), v.max.into(), v.variation.into(), v.suspect_flat.into()]);
    }
    Ok(Outcome {
        report: json!({
            "command": "bands",
            "cutoff": sheet.cutoff,
            "modes": sheet.modes,
            "clipped": sheet.clipped,
            "nonconstancy": to_value(&report),
            "pass": pass,
        }),
        tables: vec![("bands".into(), sheet.to_table()), ("variation".into(), vt)],
        pass,
    })
}

pub fn check_condition(cfg: &RunConfig) -> Result<Outcome> {
    let lattice = cfg.build_lattice()?;
    let pot = cfg.build_potential(&lattice)?;
    let gamma = cfg.build_gamma()?;
    let mu = cfg.build_measure();
    let c = cfg.condition.clone().unwrap_or_default();
    let mut sampling = SphereSampling::for_dim(lattice.dim());
    if let Some(s) = c.sphere_samples {
        sampling.samples = s;
    }
    let mut table = Table::new(["form", "theta_lo", "theta_hi", "holds", "fails"]);
    let mut brackets = serde_json::Map::new();
    let mut pass = false;
    for (name, form) in [("euclidean", ConditionForm::Euclidean), ("combination", ConditionForm::Combination)] {
        let b = condition_value(pot.a(), &gamma, &mu, form, sampling, c.grid).map_err(|e| at("/potential/A", e))?;
        table.push(vec![Cell::Text(name.into()), b.theta_lo.into(), b.theta_hi.into(), b.holds().into(), b.fails().into()]);
        if form == ConditionForm::Euclidean {
            pass = b.holds();
        }
        brackets.insert(name.into(), to_value(&b));
    }
    Ok(Outcome {
        report: json!({ "command": "check-condition", "gamma": gamma.0, "measure": to_value(&mu.spec()), "brackets": brackets, "pass": pass }),
        tables: vec![("condition".into(), table)],
        pass,
    })
}

pub fn find_gamma_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let f = require(&cfg.find_gamma, "find_gamma")?;
    let lattice = cfg.build_lattice()?;
    let mu = SphereMeasure::new(f.atoms.clone()).map_err(|e| at("/find_gamma/atoms", e))?;
    let search = find_gamma(&lattice, &mu, f.h, f.r0)?;
    let mut pass = true;
    let mut report = json!({ "command": "find-gamma", "search": to_value(&search) });
    if let Some(chk) = &f.check {
        let (ok, _) = check_gamma(&lattice, &search.certificate.gamma, &mu, f.h, f.r0, chk.c1, chk.c2)?;
        report["check"] = json!({ "c1": chk.c1, "c2": chk.c2, "holds": ok });
        pass &= ok;
    }
    let mut tables = Vec::new();
    let c = &search.certificate;
    let mut t = Table::new(["r0", "gamma", "length", "slab_ratio", "min_orth"]);
    t.push(vec![c.r0.into(), Cell::Text(fmt_mode(&c.gamma.0)), c.length.into(), c.slab_ratio.into(), c.min_orth.unwrap_or(f64::INFINITY).into()]);
    if let Some(params) = &cfg.theorem3 {
        let pot = cfg.build_potential(&lattice)?;
        let t3 = theorem3_pipeline(pot.a(), params).map_err(|e| at("/theorem3", e))?;
        let mut st = Table::new(["r0", "gamma", "f_lo", "middle_sup", "outer_sup", "chain_ok"]);
        for s in &t3.steps {
            st.push(vec![s.r0.into(), Cell::Text(fmt_mode(&s.certificate.gamma.0)), s.f_bracket.theta_lo.into(), s.middle_sup.into(), s.outer_sup.into(), s.chain_ok.into()]);
        }
        pass &= t3.passed();
        report["theorem3"] = to_value(&t3);
        tables.push(("chain".into(), st));
    }
    report["pass"] = json!(pass);
    tables.insert(0, ("gamma".into(), t));
    Ok(Outcome { report, tables, pass })
}

fn fmt_mode(m: &[i64]) -> String {
    m.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")
}

fn kernel_constant(cfg: &RunConfig) -> Result<(f64, Option<KernelReport>)> {
    let k = cfg.kernel.clone().unwrap_or_default();
    match k.constant {
        Some(c) => Ok((c, None)),
        None => {
            let r = bessel_kernel_constant(k.eta, k.quad).map_err(|e| at("/kernel", e))?;
            Ok((r.constant, Some(r)))
        }
    }
}

pub fn verify_thomas(cfg: &RunConfig) -> Result<Outcome> {
    let t = require(&cfg.thomas, "thomas")?;
    let lattice = cfg.build_lattice()?;
    let pot = cfg.build_potential(&lattice)?;
    let gamma = cfg.build_gamma()?;
    let mu = cfg.build_measure();
    let cutoff = cfg.require_cutoff()?;
    let (c, kernel) = kernel_constant(cfg)?;
    let glen = norm(&lattice.primal_cart(&gamma));
    let kappas = t.kappas.clone().unwrap_or_else(|| crate::verify::kappa_grid(glen, t.kappa_count));
    let probe = (t.probe_samples > 0).then_some((t.probe_samples, cfg.seed));
    let grid = ThomasGrid { k_points: t.k_points, kappas: kappas.clone(), cutoff };
    let base = verify_theorem2(&pot, &gamma, &mu, t.theta, &grid, c, probe).map_err(|e| at("/thomas", e))?;
    let mut pass = base.passed();
    let mut report = json!({ "command": "verify-thomas", "result": to_value(&base) });
    if let Some(k) = &kernel {
        report["kernel"] = to_value(k);
    }
    if let Some(r) = t.refine {
        let fine = ThomasGrid { cutoff: cutoff * r, ..grid };
        let refined = verify_theorem2(&pot, &gamma, &mu, t.theta, &fine, c, None).map_err(|e| at("/thomas", e))?;
        let stable = match (base.kappa_star, refined.kappa_star) {
            (Some(a), Some(b)) => (a - b).abs() <= REFINE_TOL * a.max(b),
            _ => false,
        };
        pass &= stable;
        report["refined"] = json!({
            "cutoff": refined.cutoff,
            "modes": refined.modes,
            "kappa_star": refined.kappa_star,
            "min_margin": (0..kappas.len()).map(|i| refined.min_margin_at(i)).collect::<Vec<_>>(),
            "stable": stable,
        });
    }
    report["pass"] = json!(pass);
    Ok(Outcome { report, tables: vec![("thomas".into(), base.to_table())], pass })
}

pub fn verify_weighted(cfg: &RunConfig) -> Result<Outcome> {
    let w = require(&cfg.weighted, "weighted")?;
    let lattice = cfg.build_lattice()?;
    let pot = cfg.build_potential(&lattice)?;
    let gamma = cfg.build_gamma()?;
    let mu = cfg.build_measure();
    let (c, _) = kernel_constant(cfg)?;
    let grid = ThomasGrid { k_points: w.k_points, kappas: w.kappas.clone(), cutoff: cfg.require_cutoff()? };
    let t8 = verify_theorem8(&pot, &gamma, &mu, w.delta, w.beta, &grid, c).map_err(|e| at("/weighted", e))?;
    let c9 = corollary_c9(&pot, &gamma, &grid).map_err(|e| at("/weighted", e))?;
    let pass = t8.holds && c9.min_sqrt_c9 > 0.0;
    Ok(Outcome {
        report: json!({ "command": "verify-weighted", "weighted": to_value(&t8), "corollary": to_value(&c9), "pass": pass }),
        tables: vec![("weighted".into(), t8.to_table()), ("corollary".into(), c9.to_table())],
        pass,
    })
}

pub fn lemma1(cfg: &RunConfig) -> Result<Outcome> {
    let lattice = cfg.build_lattice()?;
    let pot = cfg.build_potential(&lattice)?;
    let gamma = cfg.build_gamma()?;
    let mu = cfg.build_measure();
    let l = cfg.lemma1.clone().unwrap_or_default();
    let gcart = lattice.primal_cart(&gamma);
    let glen = norm(&gcart);
    let et = match l.et {
        Some(et) => et,
        None => complement_basis(&gcart.iter().map(|x| x / glen).collect::<Vec<_>>()).remove(0),
    };
    let (c, _) = kernel_constant(cfg)?;
    let frame = build_frame(&lattice, &gamma, &et).map_err(|e| at("/lemma1/et", e))?;
    let at_field = averaged_potential(pot.a(), &gamma, &mu, &et).map_err(|e| at("/lemma1/et", e))?;
    let r = lemma1_check(pot.a(), &at_field, &frame, &mu, cfg.kernel.as_ref().map(|k| k.eta).unwrap_or_default(), c, l.grid).map_err(|e| at("/potential/A", e))?;
    let mut t = Table::new(["bound", "phi1_lo", "phi1_hi", "phi2_lo", "phi2_hi", "identity_residual", "pass"]);
    t.push(vec![r.bound.into(), r.phi1_lo.into(), r.phi1_hi.into(), r.phi2_lo.into(), r.phi2_hi.into(), r.identity_residual.into(), r.pass.into()]);
    Ok(Outcome {
        report: json!({
            "command": "lemma1",
            "kernel_constant": c,
            "c5": c5(pot.a(), &gamma, &mu, c),
            "frame": to_value(&frame),
            "result": to_value(&r),
            "pass": r.pass,
        }),
        tables: vec![("lemma1".into(), t)],
        pass: r.pass,
    })
}

pub fn kernel_constant_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.kernel.clone().unwrap_or_default();
    let r = bessel_kernel_constant(k.eta, k.quad).map_err(|e| at("/kernel", e))?;
    let radii: Vec<f64> = (0..=400).map(|i| i as f64 * r.truncation_radius / 400.0).collect();
    let profile = crate::gauge::kernel_profile(k.eta, &radii);
    let mut t = Table::new(["r", "g"]);
    for (x, g) in radii.iter().zip(&profile) {
        t.push(vec![(*x).into(), (*g).into()]);
    }
    Ok(Outcome {
        report: json!({ "command": "kernel-constant", "result": to_value(&r), "pass": true }),
        tables: vec![("profile".into(), t)],
        pass: true,
    })
}
