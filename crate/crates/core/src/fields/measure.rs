//! Even signed measures on the line, represented through their transforms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::quad::Rule;
use crate::smooth;
use crate::{Error, Result};

/// Wire form: `{"kind":"dirac"}` or `{"kind":"plateau","h":…,"h1":…}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Dirac {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h: Option<f64>,
    },
    Plateau { h: f64, h1: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    /// `μ = δ`: transform identically 1, total variation 1. The plateau
    /// radius is unbounded unless one is given.
    Dirac { h: Option<f64> },
    Plateau(Plateau),
}

/// `μ̂(p) = 1` for `|p| <= 2πh`, `0` for `|p| >= 2πh1`, with a smooth
/// monotone transition in between.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plateau {
    pub h: f64,
    pub h1: f64,
    /// Numerically integrated `∫|m(t)| dt` of the synthesized density.
    pub total_variation: f64,
    pub tv_cutoff: f64,
    pub tv_tail: f64,
}

impl Measure {
    pub fn dirac() -> Self {
        Measure::Dirac { h: None }
    }

    pub fn plateau(h: f64, h1: f64) -> Result<Self> {
        Ok(Measure::Plateau(Plateau::new(h, h1)?))
    }

    pub fn from_spec(spec: MeasureSpec) -> Result<Self> {
        match spec {
            MeasureSpec::Dirac { h } => {
                if let Some(h) = h {
                    if !(h > 0.0) {
                        return Err(Error::param("h", "must be positive"));
                    }
                }
                Ok(Measure::Dirac { h })
            }
            MeasureSpec::Plateau { h, h1 } => Self::plateau(h, h1),
        }
    }

    pub fn spec(&self) -> MeasureSpec {
        match self {
            Measure::Dirac { h } => MeasureSpec::Dirac { h: *h },
            Measure::Plateau(p) => MeasureSpec::Plateau { h: p.h, h1: p.h1 },
        }
    }

    pub fn transform(&self, p: f64) -> f64 {
        match self {
            Measure::Dirac { .. } => 1.0,
            Measure::Plateau(pl) => pl.transform(p),
        }
    }

    /// `‖μ‖`.
    pub fn norm(&self) -> f64 {
        match self {
            Measure::Dirac { .. } => 1.0,
            Measure::Plateau(p) => p.total_variation,
        }
    }

    /// `h^{-1}`; zero for a Dirac measure without an explicit radius.
    pub fn h_inv(&self) -> f64 {
        match self {
            Measure::Dirac { h } => h.map_or(0.0, f64::recip),
            Measure::Plateau(p) => p.h.recip(),
        }
    }

    /// `sup_p |μ̂(p)|`.
    pub fn transform_sup(&self) -> f64 {
        1.0
    }

    /// Radius beyond which `μ̂` vanishes, if any.
    pub fn support_h1(&self) -> Option<f64> {
        match self {
            Measure::Dirac { .. } => None,
            Measure::Plateau(p) => Some(p.h1),
        }
    }
}

impl Plateau {
    pub fn new(h: f64, h1: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::param("h", "must be positive and finite"));
        }
        if !(h1 > h) || !h1.is_finite() {
            return Err(Error::param("h1", format!("need h1 > h, got h = {h}, h1 = {h1}")));
        }
        let mut p = Self { h, h1, total_variation: f64::NAN, tv_cutoff: 0.0, tv_tail: 0.0 };
        let (tv, cutoff, tail) = p.integrate_total_variation()?;
        p.total_variation = tv;
        p.tv_cutoff = cutoff;
        p.tv_tail = tail;
        Ok(p)
    }

    pub fn transform(&self, p: f64) -> f64 {
        let a = p.abs();
        let p0 = 2.0 * PI * self.h;
        let p1 = 2.0 * PI * self.h1;
        1.0 - smooth::step((a - p0) / (p1 - p0))
    }

    /// Density `m(t) = (1/π) ∫_0^{2πh1} μ̂(p) cos(pt) dp`.
    pub fn density(&self, t: f64) -> f64 {
        let rule = Rule::new(16);
        self.density_with(&rule, t)
    }

    fn density_with(&self, rule: &Rule, t: f64) -> f64 {
        let p0 = 2.0 * PI * self.h;
        let p1 = 2.0 * PI * self.h1;
        let flat = if t.abs() < 1e-300 { p0 } else { (p0 * t).sin() / t };
        let panels = 4 + ((p1 - p0) * t.abs() / PI).ceil() as usize;
        let ramp = rule.composite(p0, p1, panels, |p| self.transform(p) * (p * t).cos());
        (flat + ramp) / PI
    }

    fn integrate_total_variation(&self) -> Result<(f64, f64, f64)> {
        let rule = Rule::new(16);
        let outer = Rule::new(10);
        let p1 = 2.0 * PI * self.h1;
        let width = 20.0 * PI / p1;
        let panels = 40;
        let mut total = 0.0;
        let mut start = 0.0;
        let mut quiet = 0;
        let mut last = f64::INFINITY;
        let limit = 2e4 / (2.0 * PI * (self.h1 - self.h)).min(p1);
        while quiet < 2 {
            if start > limit {
                return Err(Error::Quadrature(format!("plateau density tail still {last:e} at t = {start}")));
            }
            let mut f = |t: f64| self.density_with(&rule, t);
            last = 2.0 * outer.abs_composite(start, start + width, panels, &mut f);
            total += last;
            start += width;
            quiet = if last < 1e-10 * total { quiet + 1 } else { 0 };
        }
        Ok((total, start, last))
    }
}
