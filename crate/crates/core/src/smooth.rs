//! The `exp(-1/s)` smooth step and its derivative.

fn f(s: f64) -> f64 {
    if s > 0.0 { (-1.0 / s).exp() } else { 0.0 }
}

fn df(s: f64) -> f64 {
    if s > 0.0 { (-1.0 / s).exp() / (s * s) } else { 0.0 }
}

/// `ψ(s) = f(s) / (f(s) + f(1 - s))`: 0 for `s <= 0`, 1 for `s >= 1`,
/// smooth and increasing in between.
pub fn step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = f(s);
        a / (a + f(1.0 - s))
    }
}

pub fn step_derivative(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let a = f(s);
    let b = f(1.0 - s);
    let d = a + b;
    (df(s) * b + a * df(1.0 - s)) / (d * d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_symmetry() {
        assert_eq!(step(0.0), 0.0);
        assert_eq!(step(1.0), 1.0);
        assert!((step(0.5) - 0.5).abs() < 1e-15);
        for s in [0.1, 0.3, 0.77] {
            assert!((step(s) + step(1.0 - s) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        for s in [0.05, 0.2, 0.5, 0.81, 0.97] {
            let h = 1e-6;
            let fd = (step(s + h) - step(s - h)) / (2.0 * h);
            assert!((fd - step_derivative(s)).abs() < 1e-7, "s={s}");
        }
    }
}
