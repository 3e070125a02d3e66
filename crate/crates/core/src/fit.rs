//! Least-squares power laws for convergence studies.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PowerFit {
    /// y ≈ C·x^slope
    pub slope: f64,
    pub log_c: f64,
    /// max |log y − fit| over the points.
    pub max_log_residual: f64,
    pub n: usize,
}

/// Fits log y against log x. Points with non-positive x or y are dropped; `None`
/// when fewer than two remain or all x coincide.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Option<PowerFit> {
    let pts: Vec<(f64, f64)> =
        x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let log_c = my - slope * mx;
    let max_log_residual = pts.iter().map(|p| (p.1 - log_c - slope * p.0).abs()).fold(0.0, f64::max);
    Some(PowerFit { slope, log_c, max_log_residual, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn degenerate_inputs() {
        assert!(loglog_fit(&[1.0], &[2.0]).is_none());
        assert!(loglog_fit(&[2.0, 2.0], &[1.0, 3.0]).is_none());
        assert!(loglog_fit(&[1.0, 2.0, 0.0], &[1.0, 0.0, 5.0]).is_none());
    }

    proptest! {
        #[test]
        fn recovers_exact_power_laws(p in -4.0f64..4.0, c in 1e-6f64..1e6, x0 in 1e-4f64..1.0) {
            let xs = [x0, 2.0 * x0, 4.0 * x0, 10.0 * x0];
            let ys: Vec<f64> = xs.iter().map(|x| c * x.powf(p)).collect();
            let f = loglog_fit(&xs, &ys).unwrap();
            prop_assert!((f.slope - p).abs() < 1e-9);
            prop_assert!((f.log_c - c.ln()).abs() < 1e-7);
            prop_assert!(f.max_log_residual < 1e-9);
        }
    }
}
