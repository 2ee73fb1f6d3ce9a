//! The radial kernel `g(r) = ∫ η′(τ) J₀(τ r) dτ` and the constant
//! `C = (2/π) ‖G‖_{L¹(R²)}` with `G(x, y) = x (x² + y²)^{-1} g(√(x² + y²))`.
//!
//! In polar coordinates `|G| = |cos φ| |g(ρ)| / ρ`, so
//! `‖G‖_{L¹} = 4 ∫₀^∞ |g(ρ)| dρ`. The cross-check integrates `|G|` as a
//! genuine two-dimensional integrand (numerical angular quadrature) with
//! `g` computed from the integrated-by-parts form
//! `g(r) = η(2π) J₀(2πr) + r ∫ η(τ) J₁(τ r) dτ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::EtaSpec;
use crate::linalg::par_map;
use crate::quad::Rule;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadParams {
    /// Gauss–Legendre order for every panel.
    pub order: usize,
    /// Multiplies every panel count.
    pub density: usize,
    /// Width of the radial windows added until the tail is small.
    pub window: f64,
    /// Stop once the last window contributes less than this fraction.
    pub tail_tol: f64,
    pub max_radius: f64,
    /// Required relative agreement of the two quadrature routes.
    pub cross_tol: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        Self { order: 16, density: 1, window: 10.0, tail_tol: 1e-5, max_radius: 200.0, cross_tol: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport {
    pub eta: EtaSpec,
    pub params: QuadParams,
    pub constant: f64,
    pub l1_norm: f64,
    pub truncation_radius: f64,
    pub tail_estimate: f64,
    pub cross_check_l1: f64,
    pub cross_check_residual: f64,
}

struct Kernel {
    eta: EtaSpec,
    rule: Rule,
    density: usize,
}

impl Kernel {
    fn panels(&self, r: f64) -> usize {
        // η′ is flat to all orders at both ends; a fixed floor of panels
        // resolves it, plus about four panels per oscillation of J(τ r)
        self.density * (16 + (2.0 * r).ceil() as usize)
    }

    fn g(&self, r: f64) -> f64 {
        self.rule.composite(PI, 2.0 * PI, self.panels(r), |t| self.eta.derivative(t) * libm::j0(t * r))
    }

    fn g_by_parts(&self, r: f64) -> f64 {
        let tail = r * self.rule.composite(PI, 2.0 * PI, self.panels(r), |t| self.eta.value(t) * libm::j1(t * r));
        self.eta.value(2.0 * PI) * libm::j0(2.0 * PI * r) + tail
    }
}

/// `g(r)` at the requested radii for the given cutoff.
pub fn kernel_profile(eta: EtaSpec, radii: &[f64]) -> Vec<f64> {
    let k = Kernel { eta, rule: Rule::new(QuadParams::default().order), density: 1 };
    radii.iter().map(|&r| k.g(r)).collect()
}

pub fn bessel_kernel_constant(eta: EtaSpec, params: QuadParams) -> Result<KernelReport> {
    if !(eta.scale > 0.0) {
        return Err(Error::param("eta.scale", "must be positive"));
    }
    if params.order < 2 || params.density == 0 || !(params.window > 0.0) || !(params.tail_tol > 0.0) {
        return Err(Error::param("quad", "order >= 2, density >= 1, window > 0, tail_tol > 0"));
    }
    let kernel = Kernel { eta, rule: Rule::new(params.order), density: params.density };

    // route 1: sign-split radial integral of |g|, one window at a time
    let windows_per_unit = 4 * params.density;
    let mut radial = 0.0;
    let mut radius = 0.0;
    let mut tail = f64::INFINITY;
    while radius < params.max_radius {
        let panels = (params.window * windows_per_unit as f64).ceil() as usize;
        let piece = kernel.rule.abs_composite(radius, radius + params.window, panels, &mut |r| kernel.g(r));
        radial += piece;
        radius += params.window;
        tail = piece;
        if piece < params.tail_tol * radial {
            break;
        }
    }
    if tail >= params.tail_tol * radial {
        return Err(Error::Quadrature(format!("kernel tail {tail:e} still above tolerance at radius {radius}")));
    }
    let l1 = 4.0 * radial;

    // route 2: 2-D polar quadrature of |G| on the same disk
    let panel = 0.01 / params.density as f64;
    let radial_panels = (radius / panel).ceil() as usize;
    let ang = Rule::new(8);
    let ang_panels = 16 * params.density;
    let angular: f64 = ang.composite(0.0, 2.0 * PI, ang_panels, |phi| phi.cos().abs());
    let rrule = Rule::new(8);
    let idx: Vec<usize> = (0..radial_panels).collect();
    let pieces = par_map(&idx, |&i| {
        let a = i as f64 * panel;
        let b = (a + panel).min(radius);
        // |G| ρ = |cos φ| |g(ρ)|
        rrule.integrate(a, b, |rho| kernel.g_by_parts(rho).abs()) * angular
    });
    let cross = pieces.iter().sum::<f64>();
    let residual = (cross - l1).abs() / l1;
    if residual > params.cross_tol {
        return Err(Error::Quadrature(format!("quadrature routes disagree: {l1} vs {cross} (relative {residual:e})")));
    }
    Ok(KernelReport {
        eta,
        params,
        constant: 2.0 / PI * l1,
        l1_norm: l1,
        truncation_radius: radius,
        tail_estimate: 4.0 * tail,
        cross_check_l1: cross,
        cross_check_residual: residual,
    })
}
