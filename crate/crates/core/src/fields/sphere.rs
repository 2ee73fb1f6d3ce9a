//! Maximization over the transverse sphere `S_{n-2}(e) = {ẽ : |ẽ| = 1, (ẽ, e) = 0}`.
//!
//! For `n = 3` the sphere is a circle: a uniform scan followed by a
//! golden-section refinement around the best sample. For `n > 3` the scan
//! uses Halton points pushed through Box–Muller onto the sphere, followed
//! by a deterministic compass search. Either way the result is a sampled
//! maximum, i.e. a lower bound for the true maximum.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::linalg::{dot, norm, scaled, sub};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereSampling {
    pub samples: usize,
    pub refine_steps: usize,
}

impl SphereSampling {
    pub fn for_dim(n: usize) -> Self {
        if n <= 3 {
            Self { samples: 4096, refine_steps: 40 }
        } else {
            Self { samples: 2048, refine_steps: 40 }
        }
    }
}

/// Orthonormal basis of the complement of the unit vector `e`, completed
/// from the standard axes by Gram–Schmidt.
pub fn complement_basis(e: &[f64]) -> Vec<Vec<f64>> {
    let n = e.len();
    let mut basis: Vec<Vec<f64>> = vec![e.to_vec()];
    for axis in 0..n {
        let mut v: Vec<f64> = (0..n).map(|j| if j == axis { 1.0 } else { 0.0 }).collect();
        for _ in 0..2 {
            for b in &basis {
                v = sub(&v, &scaled(b, dot(&v, b)));
            }
        }
        let l = norm(&v);
        if l > 1e-8 {
            basis.push(scaled(&v, 1.0 / l));
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}

fn combine(basis: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let n = basis[0].len();
    let mut out = vec![0.0; n];
    for (b, c) in basis.iter().zip(coeffs) {
        for (o, x) in out.iter_mut().zip(b) {
            *o += c * x;
        }
    }
    let l = norm(&out);
    scaled(&out, 1.0 / l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereMax {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub evaluations: usize,
}

/// Points of the transverse sphere visited by the initial scan.
pub fn scan_points(e: &[f64], samples: usize) -> Vec<Vec<f64>> {
    let basis = complement_basis(e);
    let samples = samples.max(1);
    if basis.len() == 2 {
        (0..samples)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / samples as f64;
                combine(&basis, &[phi.cos(), phi.sin()])
            })
            .collect()
    } else {
        let d = basis.len();
        (0..samples)
            .map(|i| {
                let gauss = halton_gaussian(i + 1, d);
                combine(&basis, &gauss)
            })
            .collect()
    }
}

pub fn maximize(e: &[f64], sampling: SphereSampling, mut f: impl FnMut(&[f64]) -> f64) -> SphereMax {
    let basis = complement_basis(e);
    let mut evaluations = 0;
    let mut eval = |v: &[f64]| {
        evaluations += 1;
        f(v)
    };
    if basis.len() == 1 {
        // n = 2: the "sphere" is the pair ±ẽ
        let a = eval(&basis[0]);
        let neg = scaled(&basis[0], -1.0);
        let b = eval(&neg);
        let (value, argmax) = if a >= b { (a, basis[0].clone()) } else { (b, neg) };
        return SphereMax { value, argmax, evaluations };
    }
    let points = scan_points(e, sampling.samples);
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, p) in points.iter().enumerate() {
        let v = eval(p);
        if v > best.0 {
            best = (v, i);
        }
    }
    let mut value = best.0;
    let mut argmax = points[best.1].clone();
    if basis.len() == 2 {
        let step = 2.0 * PI / points.len() as f64;
        let center = step * best.1 as f64;
        let at = |phi: f64| combine(&basis, &[phi.cos(), phi.sin()]);
        let (mut a, mut b) = (center - step, center + step);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (eval(&at(c)), eval(&at(d)));
        for _ in 0..sampling.refine_steps {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = eval(&at(c));
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = eval(&at(d));
            }
            for (phi, v) in [(c, fc), (d, fd)] {
                if v > value {
                    value = v;
                    argmax = at(phi);
                }
            }
        }
    } else {
        let d = basis.len();
        let mut coeffs: Vec<f64> = basis.iter().map(|b| dot(b, &argmax)).collect();
        let mut step = 0.5;
        for _ in 0..sampling.refine_steps {
            let mut improved = false;
            for j in 0..d {
                for s in [step, -step] {
                    let mut trial = coeffs.clone();
                    trial[j] += s;
                    let p = combine(&basis, &trial);
                    let v = eval(&p);
                    if v > value {
                        value = v;
                        argmax = p;
                        coeffs = basis.iter().map(|b| dot(b, &argmax)).collect();
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }
    SphereMax { value, argmax, evaluations }
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

fn halton_gaussian(index: usize, d: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(d + 1);
    let mut j = 0;
    while out.len() < d {
        let u1 = radical_inverse(index as u64, PRIMES[j % PRIMES.len()]).max(1e-300);
        let u2 = radical_inverse(index as u64, PRIMES[(j + 1) % PRIMES.len()]);
        let r = (-2.0 * u1.ln()).sqrt();
        out.push(r * (2.0 * PI * u2).cos());
        out.push(r * (2.0 * PI * u2).sin());
        j += 2;
    }
    out.truncate(d);
    out
}
