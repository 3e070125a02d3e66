//! Classical fourth-order Runge–Kutta, monotone cubic interpolation and
//! finite-difference stencils.

/// One RK4 step for y' = f(t, y).
pub fn rk4_step(f: &mut dyn FnMut(f64, &[f64]) -> Vec<f64>, t: f64, y: &[f64], h: f64) -> Vec<f64> {
    let k1 = f(t, y);
    let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
    let k2 = f(t + 0.5 * h, &y2);
    let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
    let k3 = f(t + 0.5 * h, &y3);
    let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
    let k4 = f(t + h, &y4);
    (0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

/// Fritsch–Carlson slopes for monotone piecewise-cubic Hermite interpolation.
pub fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = del[0];
        d[1] = del[0];
        return d;
    }
    for i in 1..n - 1 {
        if del[i - 1] * del[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(h[0], h[1], del[0], del[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    d
}

/// Evaluates the Hermite cubic on interval i at t ∈ [x_i, x_{i+1}].
pub fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, t: f64) -> f64 {
    let h = x1 - x0;
    let s = (t - x0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Index i with x_i ≤ t ≤ x_{i+1}, clamped to the table.
pub fn locate(x: &[f64], t: f64) -> usize {
    match x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
        Ok(i) => i.min(x.len() - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(x.len() - 2),
    }
}

/// First derivative at sample i of uniformly spaced data, 4th order
/// (central inside, one-sided at the ends).
pub fn fd1(y: &[f64], i: usize, h: f64) -> f64 {
    let n = y.len();
    assert!(n >= 5);
    if i >= 2 && i + 2 < n {
        (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h)
    } else if i < 2 {
        let s = &y[i..i + 5];
        (-25.0 * s[0] + 48.0 * s[1] - 36.0 * s[2] + 16.0 * s[3] - 3.0 * s[4]) / (12.0 * h)
    } else {
        let s = &y[i - 4..=i];
        (25.0 * s[4] - 48.0 * s[3] + 36.0 * s[2] - 16.0 * s[1] + 3.0 * s[0]) / (12.0 * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_exponential() {
        let mut f = |_t: f64, y: &[f64]| vec![-y[0]];
        let mut y = vec![1.0];
        for k in 0..100 {
            y = rk4_step(&mut f, k as f64 * 0.01, &y, 0.01);
        }
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn pchip_reproduces_monotone_data() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let d = pchip_slopes(&x, &y);
        for i in 0..9 {
            let v = hermite(x[i], x[i + 1], y[i], y[i + 1], d[i], d[i + 1], x[i] + 0.5);
            assert!(v >= y[i] && v <= y[i + 1]);
        }
    }

    #[test]
    fn fd1_fourth_order() {
        let h = 0.01;
        let y: Vec<f64> = (0..20).map(|i| (i as f64 * h).sin()).collect();
        for i in 0..20 {
            assert!((fd1(&y, i, h) - (i as f64 * h).cos()).abs() < 1e-8);
        }
    }
}
