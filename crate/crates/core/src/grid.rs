//! Gauss–Legendre × uniform-azimuth grid on S² and its one-dimensional
//! differentiation operators.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [-1, 1], Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Barycentric differentiation matrix (row-major) for arbitrary distinct
/// nodes with the given barycentric weights; diagonal by negative row sum.
pub fn barycentric_diff_matrix(nodes: &[f64], lambda: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = lambda[j] / lambda[i] / (nodes[i] - nodes[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}

/// Quadrature grid on the unit sphere.
///
/// Colatitudes are Gauss–Legendre nodes mapped linearly, θ = π(1+x)/2, so the
/// poles are never sampled. Node `k = i * n_phi + j` sits at (θ_i, φ_j) with
/// φ_j = 2πj/n_phi.
pub struct SphereGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub theta_nodes: Vec<f64>,
    /// Colatitude weights including sinθ and the π/2 Jacobian.
    pub quad_weights: Vec<f64>,
    pub phi_nodes: Vec<f64>,
    pub sin: Vec<f64>,
    pub cos: Vec<f64>,
    pub cot: Vec<f64>,
    dtheta: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SphereGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SphereGrid({}x{})", self.n_theta, self.n_phi)
    }
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Arc<SphereGrid>> {
        if n_theta < 2 || n_phi < 4 || n_phi % 2 != 0 {
            return Err(Error::Config(format!(
                "grid {n_theta}x{n_phi}: need n_theta >= 2 and even n_phi >= 4"
            )));
        }
        let (x, w) = gauss_legendre(n_theta);
        let theta: Vec<f64> = x.iter().map(|&x| 0.5 * PI * (1.0 + x)).collect();
        let sin: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
        let cos: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
        let cot = sin.iter().zip(&cos).map(|(s, c)| c / s).collect();
        let quad_weights = w.iter().zip(&sin).map(|(w, s)| 0.5 * PI * w * s).collect();
        let lambda: Vec<f64> = (0..n_theta)
            .map(|j| {
                let sgn = if j % 2 == 0 { 1.0 } else { -1.0 };
                sgn * ((1.0 - x[j] * x[j]) * w[j]).sqrt()
            })
            .collect();
        let dtheta = barycentric_diff_matrix(&theta, &lambda);
        let phi_nodes = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n_phi);
        let ifft = planner.plan_fft_inverse(n_phi);
        Ok(Arc::new(SphereGrid {
            n_theta,
            n_phi,
            theta_nodes: theta,
            quad_weights,
            phi_nodes,
            sin,
            cos,
            cot,
            dtheta,
            fft,
            ifft,
        }))
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn same_shape(&self, other: &SphereGrid) -> bool {
        self.n_theta == other.n_theta && self.n_phi == other.n_phi
    }

    /// Azimuthal quadrature factor 2π/n_phi.
    pub fn dphi(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    /// Full 2-D quadrature weight of node (i, ·).
    pub fn node_weight(&self, i: usize) -> f64 {
        self.quad_weights[i] * self.dphi()
    }

    /// Highest azimuthal mode number, n_phi / 2.
    pub fn nyquist(&self) -> usize {
        self.n_phi / 2
    }

    pub fn theta_diff_matrix(&self) -> &[f64] {
        &self.dtheta
    }

    /// ∂_θ of one sampled component.
    pub fn d_theta(&self, u: &[f64]) -> Vec<f64> {
        let (nt, np) = (self.n_theta, self.n_phi);
        let mut out = vec![0.0; nt * np];
        for i in 0..nt {
            let row = &self.dtheta[i * nt..(i + 1) * nt];
            let o = &mut out[i * np..(i + 1) * np];
            for (k, &dik) in row.iter().enumerate() {
                if dik == 0.0 {
                    continue;
                }
                let src = &u[k * np..(k + 1) * np];
                for j in 0..np {
                    o[j] += dik * src[j];
                }
            }
        }
        out
    }

    /// Complex Fourier coefficients of one θ-row (unnormalized forward FFT).
    pub fn row_fft(&self, row: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = row.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        self.fft.process(&mut buf);
        buf
    }

    /// Inverse of `row_fft` (applies the 1/n normalization), real part.
    pub fn row_ifft(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.ifft.process(&mut buf);
        let s = 1.0 / self.n_phi as f64;
        buf.iter().map(|c| c.re * s).collect()
    }

    /// Signed wavenumber of FFT bin k; the Nyquist bin maps to 0 for
    /// first derivatives.
    fn wavenumber(&self, k: usize) -> f64 {
        let n = self.n_phi;
        if 2 * k < n {
            k as f64
        } else if 2 * k == n {
            0.0
        } else {
            k as f64 - n as f64
        }
    }

    /// ∂_φ of one sampled component by Fourier differentiation.
    pub fn d_phi(&self, u: &[f64]) -> Vec<f64> {
        let (nt, np) = (self.n_theta, self.n_phi);
        let mut out = vec![0.0; nt * np];
        let mut buf = vec![Complex64::new(0.0, 0.0); np];
        let s = 1.0 / np as f64;
        for i in 0..nt {
            for j in 0..np {
                buf[j] = Complex64::new(u[i * np + j], 0.0);
            }
            self.fft.process(&mut buf);
            for (k, c) in buf.iter_mut().enumerate() {
                let m = self.wavenumber(k);
                *c = Complex64::new(-m * c.im, m * c.re);
            }
            self.ifft.process(&mut buf);
            for j in 0..np {
                out[i * np + j] = buf[j].re * s;
            }
        }
        out
    }

    /// (sinθ)⁻¹∂_φ, the e_2 derivative in the orthonormal dyad.
    pub fn d_e2(&self, u: &[f64]) -> Vec<f64> {
        let mut d = self.d_phi(u);
        let np = self.n_phi;
        for i in 0..self.n_theta {
            let inv = 1.0 / self.sin[i];
            for v in &mut d[i * np..(i + 1) * np] {
                *v *= inv;
            }
        }
        d
    }

    /// Quadrature ∫ u dVol̊ of one sampled component.
    pub fn integrate(&self, u: &[f64]) -> f64 {
        let np = self.n_phi;
        let mut acc = 0.0;
        for i in 0..self.n_theta {
            let row: f64 = u[i * np..(i + 1) * np].iter().sum();
            acc += self.quad_weights[i] * row;
        }
        acc * self.dphi()
    }

    /// Azimuthal average of one component, broadcast back onto the grid.
    pub fn phi_average(&self, u: &[f64]) -> Vec<f64> {
        let np = self.n_phi;
        let mut out = vec![0.0; u.len()];
        for i in 0..self.n_theta {
            let m = u[i * np..(i + 1) * np].iter().sum::<f64>() / np as f64;
            out[i * np..(i + 1) * np].iter_mut().for_each(|v| *v = m);
        }
        out
    }

    /// Largest deviation of a component from its azimuthal average.
    pub fn phi_variation(&self, u: &[f64]) -> f64 {
        let avg = self.phi_average(u);
        u.iter().zip(&avg).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Samples a function of (θ, φ).
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for &t in &self.theta_nodes {
            for &p in &self.phi_nodes {
                out.push(f(t, p));
            }
        }
        out
    }

    /// Broadcasts a θ-profile along φ.
    pub fn broadcast_theta(&self, prof: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for &v in prof {
            out.extend(std::iter::repeat(v).take(self.n_phi));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_weights_sum_and_nodes() {
        for n in [1, 2, 5, 12, 48, 97] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
        let (x, w) = gauss_legendre(3);
        assert!((x[2] - (0.6f64).sqrt()).abs() < 1e-15);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn area_and_interior_nodes() {
        let g = SphereGrid::new(48, 96).unwrap();
        let area: f64 = g.quad_weights.iter().sum::<f64>() * 2.0 * PI;
        assert!((area / (4.0 * PI) - 1.0).abs() < 1e-12);
        assert!(g.theta_nodes[0] > 0.0 && *g.theta_nodes.last().unwrap() < PI);
    }

    #[test]
    fn theta_derivative_of_trig() {
        let g = SphereGrid::new(32, 8).unwrap();
        let u = g.sample(|t, _| (3.0 * t).sin());
        let du = g.d_theta(&u);
        let ex = g.sample(|t, _| 3.0 * (3.0 * t).cos());
        let err = du.iter().zip(&ex).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn phi_derivative_exact_below_nyquist() {
        let g = SphereGrid::new(4, 16).unwrap();
        let u = g.sample(|t, p| t * (3.0 * p).cos() + (7.0 * p).sin());
        let du = g.d_phi(&u);
        let ex = g.sample(|t, p| -3.0 * t * (3.0 * p).sin() + 7.0 * (7.0 * p).cos());
        let err = du.iter().zip(&ex).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(SphereGrid::new(1, 8).is_err());
        assert!(SphereGrid::new(8, 7).is_err());
    }
}
