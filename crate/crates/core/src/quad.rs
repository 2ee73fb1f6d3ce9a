//! Composite Gauss–Legendre helpers.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// Fixed-order rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    pairs: Vec<(f64, f64)>,
}

impl Rule {
    pub fn new(order: usize) -> Self {
        let gl = GaussLegendre::new(NonZeroUsize::new(order.max(1)).expect("nonzero"));
        Self { pairs: gl.as_node_weight_pairs().to_vec() }
    }

    pub fn order(&self) -> usize {
        self.pairs.len()
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        half * self.pairs.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn nodes(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.pairs.iter().map(move |&(x, w)| (mid + half * x, half * w))
    }

    /// `panels` equal panels on `[a, b]`.
    pub fn composite(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels).map(|i| self.integrate(a + i as f64 * h, a + (i + 1) as f64 * h, &mut f)).sum()
    }

    /// `∫_a^b |f|` on `panels` panels, splitting each panel at sign changes of
    /// `f` between its endpoints so the rule never straddles a kink.
    pub fn abs_composite(&self, a: f64, b: f64, panels: usize, f: &mut impl FnMut(f64) -> f64) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        let mut left = a;
        let mut f_left = f(a);
        for i in 0..panels {
            let right = if i + 1 == panels { b } else { a + (i + 1) as f64 * h };
            let f_right = f(right);
            if f_left * f_right < 0.0 {
                let root = bisect(f, left, right, f_left);
                total += self.integrate(left, root, &mut *f).abs();
                total += self.integrate(root, right, &mut *f).abs();
            } else {
                total += self.integrate(left, right, &mut *f).abs();
            }
            left = right;
            f_left = f_right;
        }
        total
    }
}

fn bisect(f: &mut impl FnMut(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
