//! The profile h(θ) with (sinθ)⁻¹(sinθ h)′ = ½a² − ¼I, I = ∫₀^π a² sin.
//!
//! Closed form h = (2 sinθ)⁻¹[J(θ) − I(1 − cosθ)/2] with J(θ) = ∫₀^θ a² sin.
//! Derivatives of F = sinθ·h follow from F′ = ½ sinθ·q, q = a² − I/2, so
//! they only involve derivatives of a.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::elliptic::PoissonSolver;
use crate::error::Result;
use crate::field::ScalarField;
use crate::grid::SphereGrid;
use crate::quad1d;
use crate::seed::{Bump, Profile, SeedData};

#[derive(Clone, Debug)]
pub struct HProfile {
    pub h: ScalarField,
    pub y0: f64,
    pub integral_a2: f64,
    pub bump: Bump,
}

impl HProfile {
    pub fn gamma(&self) -> f64 {
        self.bump.gamma
    }

    fn j(&self, theta: f64) -> f64 {
        let p = &self.bump;
        let f = |t: f64| p.value(t).powi(2) * t.sin();
        // integrate from the nearer pole so the cancellation in h stays benign
        if theta <= PI / 2.0 {
            quad1d::integrate(&f, 0.0, theta, &p.breakpoints())
        } else {
            self.integral_a2 - quad1d::integrate(&f, theta, PI, &p.breakpoints())
        }
    }

    /// F(θ) = sinθ·h(θ).
    pub fn sin_h(&self, theta: f64) -> f64 {
        let i = self.integral_a2;
        0.5 * (self.j(theta) - 0.5 * i * (1.0 - theta.cos()))
    }

    pub fn value(&self, theta: f64) -> f64 {
        let i = self.integral_a2;
        let g = self.bump.gamma;
        // a vanishes near the poles, where h is explicit
        if theta <= g {
            return -0.25 * i * (0.5 * theta).tan();
        }
        if theta >= PI - g {
            return 0.25 * i / (0.5 * theta).tan();
        }
        self.sin_h(theta) / theta.sin()
    }

    /// h′ = ½q − cotθ·h.
    pub fn deriv(&self, theta: f64) -> f64 {
        let q = self.bump.value(theta).powi(2) - 0.5 * self.integral_a2;
        0.5 * q - self.value(theta) / theta.tan()
    }

    /// h″ = ½q′ + h/sin²θ − cotθ·h′.
    pub fn deriv2(&self, theta: f64) -> f64 {
        let q1 = 2.0 * self.bump.value(theta) * self.bump.deriv(1, theta);
        let s = theta.sin();
        0.5 * q1 + self.value(theta) / (s * s) - self.deriv(theta) / theta.tan()
    }

    /// d^k/dθ^k (sinθ·h) for k ≤ 3.
    pub fn sin_h_deriv(&self, k: usize, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let a = self.bump.value(theta);
        let a1 = self.bump.deriv(1, theta);
        let a2 = self.bump.deriv(2, theta);
        let q = a * a - 0.5 * self.integral_a2;
        let q1 = 2.0 * a * a1;
        let q2 = 2.0 * (a1 * a1 + a * a2);
        match k {
            0 => self.sin_h(theta),
            1 => 0.5 * s * q,
            2 => 0.5 * (c * q + s * q1),
            3 => 0.5 * (-s * q + 2.0 * c * q1 + s * q2),
            _ => panic!("sin_h_deriv supports k <= 3"),
        }
    }

    /// 11-component of ∇̊⊗̂(h∂_θ) (the 12-component vanishes).
    pub fn deformation_11(&self, theta: f64) -> f64 {
        let a = self.bump.value(theta);
        let h = self.value(theta);
        0.5 * a * a - 0.25 * self.integral_a2 - 2.0 * h / theta.tan()
    }

    /// Interior critical points of sinθ·h (sign changes of ½ sinθ·q).
    pub fn critical_points(&self, samples: usize) -> Vec<f64> {
        sign_changes(|t| self.sin_h_deriv(1, t), samples)
    }

    /// Interior zeros of h.
    pub fn interior_zeros(&self, samples: usize) -> Vec<f64> {
        sign_changes(|t| self.value(t), samples)
    }

    /// Largest window gap: the smallest c on a scan for which
    /// |h| ≥ γ²/100 on [γ²/4, y0 − c] ∪ [y0 + c, π − γ²/4].
    pub fn measured_window_c(&self, samples: usize) -> f64 {
        let g = self.bump.gamma;
        let floor = g * g / 100.0;
        let (lo, hi) = (g * g / 4.0, PI - g * g / 4.0);
        let mut c = 0.0f64;
        for k in 0..=samples {
            let t = lo + (hi - lo) * k as f64 / samples as f64;
            if self.value(t).abs() < floor {
                c = c.max((t - self.y0).abs());
            }
        }
        c
    }
}

fn sign_changes(f: impl Fn(f64) -> f64, samples: usize) -> Vec<f64> {
    let eps = 1e-9;
    let xs: Vec<f64> = (0..=samples).map(|k| eps + (PI - 2.0 * eps) * k as f64 / samples as f64).collect();
    let mut out = Vec::new();
    let mut prev = f(xs[0]);
    for w in xs.windows(2) {
        let v = f(w[1]);
        if v == 0.0 || prev * v < 0.0 {
            out.push(bisect(&f, w[0], w[1]));
        }
        if v != 0.0 {
            prev = v;
        }
    }
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    out
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a) < 1e-15 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

pub fn make_h_profile(seed: &SeedData) -> HProfile {
    let grid = seed.grid();
    let bump = seed.bump;
    let mut hp = HProfile { h: ScalarField::zeros(grid), y0: PI / 2.0, integral_a2: seed.integral_a2, bump };
    // J(π/2) = I/2 for a reflection-symmetric bump, so y0 = π/2 exactly
    let zeros = hp.interior_zeros(2000);
    let sym = (hp.sin_h(PI / 2.0)).abs() < 1e-15;
    if !sym {
        if let Some(z) = zeros.iter().copied().min_by(|a, b| (a - PI / 2.0).abs().total_cmp(&(b - PI / 2.0).abs())) {
            hp.y0 = z;
        }
    }
    let prof: Vec<f64> = grid.theta_nodes.iter().map(|&t| hp.value(t)).collect();
    hp.h = ScalarField::from_theta_profile(grid, &prof);
    hp
}

/// Grid-consistent h: ∂_θ of the mean-zero solution of Δ̊w = ½a² − ¼I_grid.
pub fn h_grid(grid: &Arc<SphereGrid>, seed: &SeedData) -> Result<ScalarField> {
    h_grid_from(grid, &seed.a_profile, seed.integral_a2_grid)
}

/// As [`h_grid`], from the sampled profile a and I_grid.
pub fn h_grid_from(grid: &Arc<SphereGrid>, a: &ScalarField, i: f64) -> Result<ScalarField> {
    let rhs = a.mul(a).map(|v| 0.5 * v - 0.25 * i);
    let w = PoissonSolver::new(grid)?.solve(&rhs)?;
    ScalarField::from_data(grid, grid.d_theta(w.values()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::{make_seed, SeedParams};

    #[test]
    fn explicit_pole_values_match_closed_form() {
        let g = SphereGrid::new(16, 8).unwrap();
        let seed = make_seed(&g, &SeedParams::default()).unwrap();
        let hp = make_h_profile(&seed);
        for &t in &[0.02, 0.09, PI - 0.09, PI - 0.02] {
            let direct = hp.sin_h(t) / t.sin();
            assert!((hp.value(t) - direct).abs() < 1e-12, "{t}");
        }
        assert_eq!(hp.y0, PI / 2.0);
    }

    #[test]
    fn second_derivative_matches_difference_quotient() {
        let g = SphereGrid::new(16, 8).unwrap();
        let seed = make_seed(&g, &SeedParams::default()).unwrap();
        let hp = make_h_profile(&seed);
        let d = 1e-5;
        for &t in &[0.05, 0.13, 0.17, 0.6, PI / 2.0, 2.9] {
            let fd = (hp.deriv(t + d) - hp.deriv(t - d)) / (2.0 * d);
            assert!((fd - hp.deriv2(t)).abs() < 1e-5 * (1.0 + fd.abs()), "{t}: {fd} vs {}", hp.deriv2(t));
        }
    }

    #[test]
    fn three_zeros() {
        let g = SphereGrid::new(16, 8).unwrap();
        let seed = make_seed(&g, &SeedParams::default()).unwrap();
        let hp = make_h_profile(&seed);
        let z = hp.interior_zeros(4000);
        assert_eq!(z.len(), 1, "{z:?}");
    }
}
