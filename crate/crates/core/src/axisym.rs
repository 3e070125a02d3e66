//! Closed-form axisymmetric profiles of seed-built tuples.
//!
//! The bump transitions [γ, 2γ] hold only a couple of colatitude nodes at
//! desk resolution, so grid derivatives of anything carrying a′ or a″ are
//! dominated by interpolation error, worst at the poles. For a tuple built
//! from the seed the leading parts are known:
//!
//!   b = εB(θ)∂_φ + ε²h∂_θ + e,   e = O(ε⁴),
//!
//! and η^△ is, up to b^θ∂_θη^△ = O(ε³), the pointwise solution of a 2×2
//! system. Both come here with exact first derivatives (dual numbers); the
//! grid only differentiates what is left over.

use std::f64::consts::PI;

use num_dual::{Dual64, DualNum};

use crate::calculus::as_vector;
use crate::field::{Field, OneForm, ScalarField, Tensor, VectorField};
use crate::grid::SphereGrid;
use crate::hprofile::{h_grid_from, HProfile};
use crate::jet::{OneFormJet, ShiftJet};
use crate::seed::{Bump, Profile, ProfileIntegrals};
use crate::tuple::RegularTuple;

#[derive(Clone, Debug)]
pub struct SeedModel {
    pub epsilon: f64,
    pub hp: HProfile,
    /// B(θ) at the colatitude nodes, read back from b^φ̂ = εsinθ·B.
    pub b_profile: Vec<f64>,
    /// Grid-consistent h, the part of ∇f the grid tuple actually carries.
    pub h_grid: ScalarField,
}

/// Profiles at one node; every entry carries its θ-derivative.
struct NodeProfiles {
    s: Dual64,
    c: Dual64,
    a: Dual64,
    da: Dual64,
    h: Dual64,
    dh: Dual64,
    bb: Dual64,
}

/// Model of a tuple built from the seed; None when the tuple has no seed
/// parameters, a non-round metric or a nontrivial lapse.
pub fn seed_model(t: &RegularTuple) -> Option<SeedModel> {
    let (eps, gam) = (t.epsilon, t.gamma);
    if !(eps > 0.0 && eps.is_finite() && gam > 0.0 && gam < PI / 6.0) {
        return None;
    }
    if !t.metric.is_round() || t.metric.log_lapse.norm_inf() > 0.0 {
        return None;
    }
    let g = t.grid();
    let bump = Bump { gamma: gam };
    let integral_a2 = ProfileIntegrals { profile: &bump }.total();
    let hp = HProfile { h: ScalarField::zeros(g), y0: PI / 2.0, integral_a2, bump };
    let bphi = g.phi_average(t.b.comp(1));
    let b_profile = (0..g.n_theta).map(|i| bphi[i * g.n_phi] / (eps * g.sin[i])).collect();
    let a_nodes: Vec<f64> = g.theta_nodes.iter().map(|&th| bump.value(th)).collect();
    let a = ScalarField::from_theta_profile(g, &a_nodes);
    let i_grid = g.integrate(a.mul(&a).values()) / (2.0 * PI);
    let h_grid = h_grid_from(g, &a, i_grid).ok()?;
    Some(SeedModel { epsilon: eps, hp, b_profile, h_grid })
}

impl SeedModel {
    fn node(&self, i: usize, theta: f64) -> NodeProfiles {
        let p = &self.hp.bump;
        let th = Dual64::new(theta, 1.0);
        let (a, a1, a2) = (p.value(theta), p.deriv(1, theta), p.deriv(2, theta));
        let (h, h1, h2) = (self.hp.value(theta), self.hp.deriv(theta), self.hp.deriv2(theta));
        NodeProfiles {
            s: th.sin(),
            c: th.cos(),
            a: Dual64::new(a, a1),
            da: Dual64::new(a1, a2),
            h: Dual64::new(h, h1),
            dh: Dual64::new(h1, h2),
            bb: Dual64::new(self.b_profile[i], a / theta.sin()),
        }
    }

    /// Jet of ε²h∂_θ: ∇_1b^1 = ε²h′, ∇_2b^2 = ε²cotθ h, div = ε²(½a² − ¼I),
    /// div(∇̊⊗̂b) = ∇div + 2b.
    pub fn h_jet(&self, g: &std::sync::Arc<SphereGrid>) -> ShiftJet {
        let e2 = self.epsilon * self.epsilon;
        let nt = g.n_theta;
        let (mut v, mut n11, mut n22, mut gd) = (vec![0.0; nt], vec![0.0; nt], vec![0.0; nt], vec![0.0; nt]);
        for i in 0..nt {
            let th = g.theta_nodes[i];
            let p = &self.hp.bump;
            v[i] = e2 * self.hp.value(th);
            n11[i] = e2 * self.hp.deriv(th);
            n22[i] = g.cot[i] * v[i];
            gd[i] = e2 * p.value(th) * p.deriv(1, th);
        }
        let zero = vec![0.0; g.len()];
        let b = VectorField::from_data(g, [g.broadcast_theta(&v), zero.clone()].concat()).expect("shape");
        let nabla = Tensor {
            grid: g.clone(),
            rank: 2,
            data: [g.broadcast_theta(&n11), zero.clone(), zero.clone(), g.broadcast_theta(&n22)].concat(),
        };
        let dd: Vec<f64> = (0..nt).map(|i| gd[i] + 2.0 * v[i]).collect();
        let div_def = OneForm::from_data(g, [g.broadcast_theta(&dd), zero.clone()].concat()).expect("shape");
        let grad_div = OneForm::from_data(g, [g.broadcast_theta(&gd), zero].concat()).expect("shape");
        ShiftJet { b, nabla, div_def, grad_div }
    }

    /// Tuple jet with the ε²h_grid∂_θ part of ∇f replaced by ε²h∂_θ.
    pub fn refined_jet(&self, t: &RegularTuple) -> ShiftJet {
        let g = t.grid();
        let e2 = self.epsilon * self.epsilon;
        let hg = OneForm::from_data(g, [self.h_grid.values().to_vec(), vec![0.0; g.len()]].concat()).expect("shape");
        let grid_part = ShiftJet::from_grid(&as_vector(&hg)).scale(-e2);
        t.jet.add(&self.h_jet(g)).add(&grid_part)
    }

    /// η^△ from (−2 − div b)η − (ℒ_bη without b^θ∂_θη) = div(∇̊⊗̂b) − ½∇div b
    /// with b = εB∂_φ + ε²h∂_θ, solved at each node.
    pub fn eta(&self, g: &std::sync::Arc<SphereGrid>) -> OneFormJet {
        let (e, e2) = (self.epsilon, self.epsilon * self.epsilon);
        let nt = g.n_theta;
        let mut cols = vec![vec![0.0; nt]; 6];
        for i in 0..nt {
            let p = self.node(i, g.theta_nodes[i]);
            let cot = p.c / p.s;
            let b2 = p.s * p.bb * e;
            let n0 = p.dh * e2;
            let n1 = (p.a + p.c * p.bb) * e;
            let n2 = -(p.c * p.bb) * e;
            let n3 = cot * p.h * e2;
            let d = n0 + n3;
            let f1 = (p.a * p.da * 0.5 + p.h * 2.0) * e2;
            let f2 = (p.da + cot * p.a * 2.0) * e;
            let m11 = -(d + n0) - 2.0;
            let m12 = b2 * cot - n1;
            let m21 = -(b2 * cot) - n2;
            let m22 = -(d + n3) - 2.0;
            let det = m11 * m22 - m12 * m21;
            let w1 = (f1 * m22 - m12 * f2) / det;
            let w2 = (m11 * f2 - m21 * f1) / det;
            let ct = g.cot[i];
            cols[0][i] = w1.re;
            cols[1][i] = w2.re;
            // ∇_1w_1, ∇_1w_2, ∇_2w_1 = −cotθ w_2, ∇_2w_2 = cotθ w_1
            cols[2][i] = w1.eps;
            cols[3][i] = w2.eps;
            cols[4][i] = -ct * w2.re;
            cols[5][i] = ct * w1.re;
        }
        let bc = |k: usize| g.broadcast_theta(&cols[k]);
        let w = Field::from_data(g, [bc(0), bc(1)].concat()).expect("shape");
        let nabla = Tensor { grid: g.clone(), rank: 2, data: [bc(2), bc(3), bc(4), bc(5)].concat() };
        OneFormJet { w, nabla }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::{picard_regular_tuple, PicardOptions};
    use crate::seed::{make_seed, SeedParams};

    #[test]
    fn h_jet_matches_grid_on_a_resolved_profile() {
        // γ large enough for the grid to resolve the bump
        let g = SphereGrid::new(128, 8).unwrap();
        let seed = make_seed(&g, &SeedParams { epsilon: 1e-2, gamma: 0.45, ..Default::default() }).unwrap();
        let t = picard_regular_tuple(&seed, &PicardOptions::default()).unwrap();
        let m = seed_model(&t).unwrap();
        let hj = m.h_jet(&g);
        let gj = ShiftJet::from_grid(&hj.b);
        let err = hj.nabla.data.iter().zip(&gj.nabla.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-7, "{err}");
        // div(ε²h∂_θ) = ε²(½a² − ¼I) from the defining ODE of h
        let e2 = 1e-4;
        let div = hj.div_round();
        for (i, &th) in g.theta_nodes.iter().enumerate() {
            let a = seed.bump.value(th);
            let ex = e2 * (0.5 * a * a - 0.25 * m.hp.integral_a2);
            assert!((div.values()[i * g.n_phi] - ex).abs() < 1e-15, "{th}");
        }
    }

    #[test]
    fn eta_model_solves_the_pointwise_system() {
        let g = SphereGrid::new(48, 16).unwrap();
        let seed = make_seed(&g, &SeedParams { epsilon: 1e-3, ..Default::default() }).unwrap();
        let t = picard_regular_tuple(&seed, &PicardOptions::default()).unwrap();
        let m = seed_model(&t).unwrap();
        let jet = m.refined_jet(&t);
        let eta = m.eta(&g);
        // re-substitute with the jet's own arrays (b^θ∂_θη is the neglected piece)
        let n = g.len();
        let d = jet.div_round();
        let rhs = jet.div_def.axpy(-0.5, &jet.grad_div);
        let mut worst = 0.0f64;
        for k in 0..n {
            let (w1, w2) = (eta.w.comp(0)[k], eta.w.comp(1)[k]);
            let (b1, b2) = (jet.b.comp(0)[k], jet.b.comp(1)[k]);
            let nb = |c: usize| jet.nabla.comp(c)[k];
            let l1 = b1 * eta.nabla.comp(0)[k] + b2 * eta.nabla.comp(2)[k] + nb(0) * w1 + nb(1) * w2;
            let l2 = b1 * eta.nabla.comp(1)[k] + b2 * eta.nabla.comp(3)[k] + nb(2) * w1 + nb(3) * w2;
            let r1 = -(2.0 + d.values()[k]) * w1 - l1 - rhs.comp(0)[k] + b1 * eta.nabla.comp(0)[k];
            let r2 = -(2.0 + d.values()[k]) * w2 - l2 - rhs.comp(1)[k] + b1 * eta.nabla.comp(1)[k];
            worst = worst.max(r1.abs()).max(r2.abs());
        }
        // the refined jet still carries the O(ε⁴) remainder e
        let scale = rhs.norm_inf();
        assert!(worst < 1e-5 * scale, "{worst} vs {scale}");
        // leading order η_2 = −(ε/2)(a′ + 2cotθ a)
        for (i, &th) in g.theta_nodes.iter().enumerate() {
            let p = &seed.bump;
            let lead = -0.5e-3 * (p.deriv(1, th) + 2.0 * a_cot(p.value(th), th));
            assert!((eta.w.comp(1)[i * g.n_phi] - lead).abs() < 1e-5 * (1.0 + lead.abs() * 1e3), "{th}");
        }
    }

    fn a_cot(a: f64, th: f64) -> f64 {
        a / th.tan()
    }
}
