//! Hawking mass of the spheres of the incoming cone.
//!
//! The integrated transport equation for ρ̌ along the cone gives, on the
//! unit-scale sphere,
//!
//!   ∫(1 − ½div b)(−ρ̌) = ∫ ½η·∇div b + ½|η|²(2 − div b) + (1/16)X|∇̂⊗̂b|²,
//!
//! with X = Ω⁻¹trχ. ∫ρ̌ dVol is scale invariant and r scales with −u, so
//! m(u) = (−u)·m(−1).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{OneForm, ScalarField};
use crate::tuple::RegularTuple;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MassReport {
    pub kappa: f64,
    pub epsilon: f64,
    pub u: f64,
    /// ∫(−ρ̌) over the sphere.
    pub integral_rho_check: f64,
    /// The weighted integral ∫(1 − ½div b)(−ρ̌) given by the identity.
    pub weighted_integral: f64,
    /// ½∫div b·(−ρ̌) from one fixed-point pass.
    pub weight_correction: f64,
    pub eta_grad_div_term: f64,
    pub eta_square_term: f64,
    pub shear_term: f64,
    pub mass: f64,
    pub area_radius: f64,
    pub mass_over_sqrt_area: f64,
    /// m/(ε²|u|); no target constant is asserted.
    #[serde(with = "crate::io::nan_as_null")]
    pub mass_over_eps2_u: f64,
}

pub fn hawking_mass_v0(t: &RegularTuple, eta: &OneForm, trchi: &ScalarField, u: f64) -> Result<MassReport> {
    if !(u < 0.0) {
        return Err(Error::Config(format!("u must be negative, got {u}")));
    }
    t.b.check_grid(eta)?;
    t.b.check_grid(trchi)?;
    let m = &t.metric;
    let div = t.div_b();
    let t1 = m.dot_oneform(eta, &t.jet.grad_div_hat(m)).scale(0.5);
    let t2 = m.sq_norm_oneform(eta).mul(&div.map(|d| 2.0 - d)).scale(0.5);
    let t3 = m.sq_norm_symtf(&t.jet.nabla_hat_otimes(m)).mul(trchi).scale(1.0 / 16.0);
    let density = &(&t1 + &t2) + &t3;
    let (i1, i2, i3) = (m.integrate(&t1), m.integrate(&t2), m.integrate(&t3));
    let w = i1 + i2 + i3;
    // −ρ̌ is modelled by the local density, normalized to integrate to w;
    // the divergence terms dropped from it integrate to zero
    let total = m.integrate(&density);
    let corr = if total != 0.0 { 0.5 * w / total * m.integrate(&density.mul(&div)) } else { 0.0 };
    let rho_int = w + corr;
    let area1 = m.area();
    let r = (-u) * (area1 / (4.0 * PI)).sqrt();
    let mass = r / (8.0 * PI) * rho_int;
    let sqrt_area = (-u) * area1.sqrt();
    let e2 = t.epsilon * t.epsilon;
    Ok(MassReport {
        kappa: t.kappa,
        epsilon: t.epsilon,
        u,
        integral_rho_check: rho_int,
        weighted_integral: w,
        weight_correction: corr,
        eta_grad_div_term: i1,
        eta_square_term: i2,
        shear_term: i3,
        mass,
        area_radius: r,
        mass_over_sqrt_area: mass / sqrt_area,
        mass_over_eps2_u: if e2 > 0.0 { mass / (e2 * (-u)) } else { f64::NAN },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::OneForm;
    use crate::grid::SphereGrid;

    #[test]
    fn trivial_tuple_has_zero_mass() {
        let g = SphereGrid::new(16, 16).unwrap();
        let t = RegularTuple::trivial(&g);
        let r = hawking_mass_v0(&t, &OneForm::zeros(&g), &ScalarField::constant(&g, 2.0), -1.0).unwrap();
        assert_eq!(r.mass, 0.0);
        assert!((r.area_radius - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mass_scales_with_u() {
        let g = SphereGrid::new(16, 16).unwrap();
        let t = RegularTuple::trivial(&g);
        let eta = OneForm::from_fn(&g, |th, _| [0.01 * th.sin(), 0.0]);
        let x = ScalarField::constant(&g, 2.0);
        let a = hawking_mass_v0(&t, &eta, &x, -1.0).unwrap();
        let b = hawking_mass_v0(&t, &eta, &x, -3.0).unwrap();
        assert!((b.mass - 3.0 * a.mass).abs() < 1e-15);
        assert!((b.integral_rho_check - a.integral_rho_check).abs() < 1e-18);
        // ∫|η|² with η = 0.01 sinθ: 1e-4·8π/3
        assert!((a.integral_rho_check - 1e-4 * 8.0 * PI / 3.0).abs() < 1e-12);
        assert!(hawking_mass_v0(&t, &eta, &x, 0.0).is_err());
    }
}
