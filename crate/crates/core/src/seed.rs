//! Seed data: the bump a(θ), the azimuthal field b̃ = B(θ)∂_φ with
//! B = ∫_{π/2}^θ a/sinθ' dθ' + r, the divergence-free perturbation z and
//! b̌ = εb̃ + z.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{as_vector, div_vector, grad, star};
use crate::error::{Error, Result};
use crate::field::{Field, OneForm, ScalarField, Tensor, VectorField};
use crate::grid::SphereGrid;
use crate::jet::ShiftJet;
use crate::quad1d;
use crate::random::spherical_harmonic;

/// Axisymmetric profile a(θ) with derivatives up to order 4.
pub trait Profile: Send + Sync {
    fn value(&self, theta: f64) -> f64;
    fn deriv(&self, k: usize, theta: f64) -> f64;
    /// Points where a fails to be analytic; quadrature splits there.
    fn breakpoints(&self) -> Vec<f64>;
}

/// Degree-9 smoothstep, C⁴ at both ends.
pub fn smoothstep(t: f64) -> f64 {
    smoothstep_deriv(0, t)
}

const SS: [f64; 10] = [0.0, 0.0, 0.0, 0.0, 0.0, 126.0, -420.0, 540.0, -315.0, 70.0];

pub fn smoothstep_deriv(k: usize, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let mut acc = 0.0;
    for p in (k..SS.len()).rev() {
        let mut c = SS[p];
        for q in 0..k {
            c *= (p - q) as f64;
        }
        acc = acc * t + c;
    }
    acc
}

/// a ≡ 0 on [0, γ] ∪ [π−γ, π], a ≡ 1 on [2γ, π−2γ], smoothstep in between.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Bump {
    pub gamma: f64,
}

impl Profile for Bump {
    fn value(&self, theta: f64) -> f64 {
        self.deriv(0, theta)
    }

    fn deriv(&self, k: usize, theta: f64) -> f64 {
        let g = self.gamma;
        let scale = g.powi(-(k as i32));
        if theta < PI / 2.0 {
            smoothstep_deriv(k, (theta - g) / g) * scale
        } else {
            let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
            sgn * smoothstep_deriv(k, (PI - g - theta) / g) * scale
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let g = self.gamma;
        vec![g, 2.0 * g, PI / 2.0, PI - 2.0 * g, PI - g]
    }
}

/// 1-D integrals of a profile.
pub struct ProfileIntegrals<'a> {
    pub profile: &'a dyn Profile,
}

impl ProfileIntegrals<'_> {
    /// J(θ) = ∫₀^θ a² sin.
    pub fn j(&self, theta: f64) -> f64 {
        let p = self.profile;
        quad1d::integrate(&|t| p.value(t).powi(2) * t.sin(), 0.0, theta, &p.breakpoints())
    }

    /// I = ∫₀^π a² sin.
    pub fn total(&self) -> f64 {
        self.j(PI)
    }

    /// B(θ) − r = ∫_{π/2}^θ a/sin.
    pub fn b(&self, theta: f64) -> f64 {
        let p = self.profile;
        quad1d::integrate(
            &|t| {
                let a = p.value(t);
                if a == 0.0 {
                    0.0
                } else {
                    a / t.sin()
                }
            },
            PI / 2.0,
            theta,
            &p.breakpoints(),
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ZSpec {
    None,
    /// z = A *∇̊Y_l^m with A fixed by (1 + l(l+1))^{M₁/2}‖z‖_{L²} = ε^{M₀}.
    Mode { l: usize, m: i64 },
}

impl Default for ZSpec {
    fn default() -> Self {
        ZSpec::None
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedParams {
    pub epsilon: f64,
    pub gamma: f64,
    pub r_const: f64,
    pub z_spec: ZSpec,
    /// Parameter ordering check ε ≤ γ^p.
    pub order_exponent: f64,
    pub m0: u32,
    pub m1: u32,
}

impl Default for SeedParams {
    fn default() -> Self {
        SeedParams { epsilon: 1e-2, gamma: 0.1, r_const: 0.0, z_spec: ZSpec::None, order_exponent: 2.0, m0: 8, m1: 12 }
    }
}

#[derive(Clone)]
pub struct SeedData {
    pub params: SeedParams,
    pub bump: Bump,
    pub a_profile: ScalarField,
    /// b̃ = B(θ)∂_φ, dyad components (0, sinθ·B).
    pub b_tilde: VectorField,
    pub z: VectorField,
    pub b_check: VectorField,
    /// Derivative data of b̌: the εb̃ part exact, the z part from the grid.
    pub jet: ShiftJet,
    /// ∫₀^π a² sinθ dθ by piecewise quadrature.
    pub integral_a2: f64,
    /// The same integral by the sphere quadrature, (2π)⁻¹∫a² dVol̊.
    pub integral_a2_grid: f64,
    /// B(θ) at the colatitude nodes (including r).
    pub b_profile: Vec<f64>,
}

impl SeedData {
    pub fn epsilon(&self) -> f64 {
        self.params.epsilon
    }
    pub fn gamma(&self) -> f64 {
        self.params.gamma
    }
    pub fn grid(&self) -> &Arc<SphereGrid> {
        self.a_profile.grid()
    }
}

/// Jet of ε·B(θ)∂_φ from the analytic profile:
/// ∇_θ̂ b^φ̂ = ε(a + cosθ B), ∇_φ̂ b^θ̂ = −ε cosθ B, div(∇̊⊗̂b)_φ̂ = ε(a′ + 2cotθ a).
pub fn azimuthal_jet(grid: &Arc<SphereGrid>, profile: &dyn Profile, b_prof: &[f64], eps: f64) -> ShiftJet {
    let nt = grid.n_theta;
    let mut v = vec![0.0; nt];
    let mut n12 = vec![0.0; nt];
    let mut n21 = vec![0.0; nt];
    let mut dd = vec![0.0; nt];
    for i in 0..nt {
        let t = grid.theta_nodes[i];
        let a = profile.value(t);
        let cb = grid.cos[i] * b_prof[i];
        v[i] = eps * grid.sin[i] * b_prof[i];
        n12[i] = eps * (a + cb);
        n21[i] = -eps * cb;
        dd[i] = eps * (profile.deriv(1, t) + 2.0 * grid.cot[i] * a);
    }
    let zero = vec![0.0; grid.len()];
    let b = Field::from_data(grid, [zero.clone(), grid.broadcast_theta(&v)].concat()).expect("shape");
    let nabla = Tensor {
        grid: grid.clone(),
        rank: 2,
        data: [zero.clone(), grid.broadcast_theta(&n12), grid.broadcast_theta(&n21), zero.clone()].concat(),
    };
    let div_def = OneForm::from_data(grid, [zero.clone(), grid.broadcast_theta(&dd)].concat()).expect("shape");
    ShiftJet { b, nabla, div_def, grad_div: OneForm::zeros(grid) }
}

pub fn make_seed(grid: &Arc<SphereGrid>, params: &SeedParams) -> Result<SeedData> {
    let (eps, gam) = (params.epsilon, params.gamma);
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Config(format!("epsilon must be a non-negative number, got {eps}")));
    }
    if !(gam > 0.0 && gam < PI / 6.0) {
        return Err(Error::Config(format!("gamma must lie in (0, pi/6), got {gam}")));
    }
    let bound = gam.powf(params.order_exponent);
    if eps > bound * (1.0 + 1e-12) {
        return Err(Error::ParameterOrdering(format!(
            "epsilon = {eps:e} exceeds gamma^{} = {bound:e}",
            params.order_exponent
        )));
    }
    if params.r_const.abs() > 10.0 * eps {
        return Err(Error::ParameterOrdering(format!("|r| = {:e} is not O(epsilon)", params.r_const.abs())));
    }
    let bump = Bump { gamma: gam };
    let ints = ProfileIntegrals { profile: &bump };
    let integral_a2 = ints.total();
    let b_profile: Vec<f64> = grid.theta_nodes.iter().map(|&t| ints.b(t) + params.r_const).collect();
    let a_nodes: Vec<f64> = grid.theta_nodes.iter().map(|&t| bump.value(t)).collect();
    let a_profile = ScalarField::from_theta_profile(grid, &a_nodes);
    let a2 = a_profile.mul(&a_profile);
    let integral_a2_grid = grid.integrate(a2.values()) / (2.0 * PI);

    let unit = azimuthal_jet(grid, &bump, &b_profile, 1.0);
    let b_tilde = unit.b.clone();
    let z = match &params.z_spec {
        ZSpec::None => VectorField::zeros(grid),
        ZSpec::Mode { l, m } => {
            if *l == 0 || m.unsigned_abs() as usize > *l {
                return Err(Error::InvalidSeed(format!("no harmonic with l = {l}, m = {m}")));
            }
            let lam = (*l * (*l + 1)) as f64;
            let amp = eps.powi(params.m0 as i32) / ((1.0 + lam).powf(params.m1 as f64 / 2.0) * lam.sqrt());
            as_vector(&star(&grad(&spherical_harmonic(grid, *l, *m)))).scale(amp)
        }
    };
    check_divergence_free(&z)?;
    let mut jet = unit.scale(eps);
    if z.norm_inf() > 0.0 {
        jet = jet.add(&ShiftJet::from_grid(&z));
    }
    let b_check = &b_tilde.scale(eps) + &z;
    Ok(SeedData {
        params: params.clone(),
        bump,
        a_profile,
        b_tilde,
        z,
        b_check,
        jet,
        integral_a2,
        integral_a2_grid,
        b_profile,
    })
}

pub fn check_divergence_free(z: &VectorField) -> Result<()> {
    let d = div_vector(z).norm_inf();
    if d > 1e-10 {
        return Err(Error::InvalidSeed(format!("z has divergence {d:.3e}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_endpoints() {
        assert_eq!(smoothstep(0.0), 0.0);
        assert!((smoothstep(1.0) - 1.0).abs() < 1e-14);
        assert!((smoothstep(0.5) - 0.5).abs() < 1e-14);
        for k in 1..=4 {
            assert!(smoothstep_deriv(k, 1e-12).abs() < 1e-6);
            assert!(smoothstep_deriv(k, 1.0 - 1e-12).abs() < 1e-6);
        }
        // derivative against a difference quotient
        let h = 1e-6;
        for &t in &[0.2, 0.5, 0.8] {
            let fd = (smoothstep(t + h) - smoothstep(t - h)) / (2.0 * h);
            assert!((fd - smoothstep_deriv(1, t)).abs() < 1e-7);
        }
    }

    #[test]
    fn bump_shape() {
        let b = Bump { gamma: 0.1 };
        assert_eq!(b.value(0.05), 0.0);
        assert_eq!(b.value(1.0), 1.0);
        assert_eq!(b.value(PI - 0.05), 0.0);
        assert!((b.value(0.15) - b.value(PI - 0.15)).abs() < 1e-14);
    }
}
