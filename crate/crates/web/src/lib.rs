//! WebAssembly bindings for the browser demo. Every function returns a JSON
//! string so the page needs no binding glue beyond `wasm-bindgen`.

use std::f64::consts::PI;

use dirac_floquet::bands::band_sweep;
use dirac_floquet::clifford::CliffordRep;
use dirac_floquet::fiber::{g_factors, symbol, FiberPoint};
use dirac_floquet::fields::{FourierField, PotentialSet};
use dirac_floquet::gauge::{bessel_kernel_constant, kernel_profile, EtaSpec, QuadParams};
use dirac_floquet::lattice::{Lattice, Mode};
use dirac_floquet::linalg::singular_values;
use dirac_floquet::C64;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// Bands of `D + m α₄ + 2v cos(2πx₁)` on Z³ along `k = (ξ, 0.3, 0.2)`,
/// `ξ ∈ [−π, π]`, keeping bands that enter `|E| <= window`.
pub fn bands_json(mass: f64, v: f64, samples: usize, cutoff_periods: f64, window: f64) -> Result<String, String> {
    let l = Lattice::cubic(3).map_err(fail)?;
    let rep = CliffordRep::new(3).map_err(fail)?;
    let mut v0 = FourierField::matrix(&l, rep.size());
    if v != 0.0 {
        v0.add_real_pair(Mode(vec![1, 0, 0]), rep.identity() * C64::new(v, 0.0)).map_err(fail)?;
    }
    let mut v1 = FourierField::matrix(&l, rep.size());
    if mass != 0.0 {
        v1.add_coeff(Mode::zero(3), rep.alpha_extra() * C64::new(mass, 0.0)).map_err(fail)?;
    }
    let pot = PotentialSet::new(&rep, FourierField::vector(&l), v0, v1).map_err(fail)?;
    let sheet = band_sweep(&pot, &[-PI, 0.3, 0.2], &[1.0, 0.0, 0.0], (0.0, 2.0 * PI), samples.max(2), 2.0 * PI * cutoff_periods).map_err(fail)?;
    let kept: Vec<Vec<f64>> = (0..sheet.bands()).map(|nu| sheet.band(nu)).filter(|b| b.iter().any(|e| e.abs() <= window)).collect();
    let xi: Vec<f64> = sheet.xi.iter().map(|x| x - PI).collect();
    Ok(json!({ "xi": xi, "bands": kept, "modes": sheet.modes }).to_string())
}

/// `G^∓_N(k; ϰ)` against the singular values of the symbol for `ϰ ∈ [0, kappa_max]`.
pub fn stretch_factors_json(k: Vec<f64>, e: Vec<f64>, mode: Vec<i32>, kappa_max: f64, samples: usize) -> Result<String, String> {
    let l = Lattice::cubic(3).map_err(fail)?;
    let rep = CliffordRep::new(3).map_err(fail)?;
    let len = e.iter().map(|x| x * x).sum::<f64>().sqrt();
    if k.len() != 3 || e.len() != 3 || mode.len() != 3 || !(len > 0.0) {
        return Err(fail("k, e and mode need three components and e must be nonzero"));
    }
    let e: Vec<f64> = e.iter().map(|x| x / len).collect();
    let m = Mode(mode.iter().map(|&x| x as i64).collect());
    let n = samples.max(2);
    let (mut kappa, mut gm, mut gp, mut smin, mut smax) = (vec![], vec![], vec![], vec![], vec![]);
    for i in 0..n {
        let x = kappa_max * i as f64 / (n - 1) as f64;
        let fiber = FiberPoint::new(k.clone(), e.clone(), x).map_err(fail)?;
        let (a, b) = g_factors(&l, &fiber, &m);
        let sv = singular_values(&symbol(&rep, &l, &fiber, &m));
        kappa.push(x);
        gm.push(a);
        gp.push(b);
        smin.push(sv.iter().copied().fold(f64::INFINITY, f64::min));
        smax.push(sv.iter().copied().fold(0.0, f64::max));
    }
    Ok(json!({ "kappa": kappa, "g_minus": gm, "g_plus": gp, "sigma_min": smin, "sigma_max": smax }).to_string())
}

/// Radial kernel `g(r)` for the cutoff `η(s/scale)`.
pub fn kernel_json(scale: f64, r_max: f64, samples: usize) -> Result<String, String> {
    if !(scale > 0.0 && r_max > 0.0) {
        return Err(fail("scale and r_max must be positive"));
    }
    let n = samples.max(2);
    let r: Vec<f64> = (0..n).map(|i| r_max * i as f64 / (n - 1) as f64).collect();
    let g = kernel_profile(EtaSpec { scale }, &r);
    Ok(json!({ "r": r, "g": g }).to_string())
}

/// Full constant computation with both quadrature routes.
pub fn kernel_constant_json(scale: f64) -> Result<String, String> {
    let report = bessel_kernel_constant(EtaSpec { scale }, QuadParams::default()).map_err(fail)?;
    serde_json::to_string(&report).map_err(fail)
}

#[wasm_bindgen]
pub fn bands(mass: f64, v: f64, samples: usize, cutoff_periods: f64, window: f64) -> Result<String, JsValue> {
    js(bands_json(mass, v, samples, cutoff_periods, window))
}

#[wasm_bindgen]
pub fn stretch_factors(k: Vec<f64>, e: Vec<f64>, mode: Vec<i32>, kappa_max: f64, samples: usize) -> Result<String, JsValue> {
    js(stretch_factors_json(k, e, mode, kappa_max, samples))
}

#[wasm_bindgen]
pub fn kernel(scale: f64, r_max: f64, samples: usize) -> Result<String, JsValue> {
    js(kernel_json(scale, r_max, samples))
}

#[wasm_bindgen]
pub fn kernel_constant(scale: f64) -> Result<String, JsValue> {
    js(kernel_constant_json(scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bands_free_crossing() {
        let out: serde_json::Value = serde_json::from_str(&bands_json(0.0, 0.0, 9, 1.0, 4.0).unwrap()).unwrap();
        let bands = out["bands"].as_array().unwrap();
        assert!(!bands.is_empty());
        assert_eq!(out["xi"].as_array().unwrap().len(), 9);
    }

    #[test]
    fn stretch_factors_match_svd() {
        let out: serde_json::Value = serde_json::from_str(&stretch_factors_json(vec![0.1, 0.2, 0.3], vec![0.0, 0.0, 2.0], vec![1, 0, 0], 10.0, 11).unwrap()).unwrap();
        for (a, b) in out["g_minus"].as_array().unwrap().iter().zip(out["sigma_min"].as_array().unwrap()) {
            assert!((a.as_f64().unwrap() - b.as_f64().unwrap()).abs() < 1e-12);
        }
        assert!(stretch_factors_json(vec![0.0; 3], vec![0.0; 3], vec![0; 3], 1.0, 3).is_err());
    }

    #[test]
    fn kernel_starts_at_one() {
        let out: serde_json::Value = serde_json::from_str(&kernel_json(1.0, 5.0, 6).unwrap()).unwrap();
        assert!((out["g"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
}
