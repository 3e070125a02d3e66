//! Piecewise Gauss–Legendre quadrature for one-dimensional profiles.

use std::sync::OnceLock;

use crate::grid::gauss_legendre;

const ORDER: usize = 48;

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(ORDER))
}

/// ∫_a^b f on one smooth piece.
pub fn integrate_piece(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (x, w) = rule();
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(w).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>() * h
}

/// ∫_a^b f, splitting at every breakpoint strictly inside (a, b).
/// Works for either orientation of [a, b].
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64]) -> f64 {
    let (lo, hi, sgn) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut pts = vec![lo];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&t| t > lo && t < hi).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.extend(inner);
    pts.push(hi);
    sgn * pts.windows(2).map(|p| integrate_piece(f, p[0], p[1])).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_and_kinked() {
        let v = integrate(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, &[]);
        assert!((v - 2.0).abs() < 1e-14);
        let k = integrate(&|x: f64| (x - 0.3).abs(), 1.0, 0.0, &[0.3]);
        assert!((k + (0.045 + 0.245)).abs() < 1e-14);
    }
}
