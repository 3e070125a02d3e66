//! Shear of the incoming cone: Ωχ̲̂ = ½∇̂⊗̂b at v = 0, on the sphere of radius −u.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, SymTF2Field};
use crate::seed::{Profile, SeedData};
use crate::tuple::RegularTuple;

#[derive(Clone, Debug)]
pub struct ShearProfile {
    pub u: f64,
    /// Components of Ωχ̲̂ for ĝ(u) = u²ĝ, in the round dyad.
    pub field: SymTF2Field,
    /// |Ωχ̲̂|_{ĝ(u)} pointwise.
    pub norm: ScalarField,
    /// sup over φ of the norm, per θ node.
    pub sup_profile: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShearRatio {
    /// Extremes of |Ωχ̲̂|(−u)√2/(ε|a|) over nodes with |a| ≥ ½.
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub max_deviation: f64,
    pub nodes_checked: usize,
    /// Area{θ : |a| ≤ ½} by quadrature of the indicator on the grid.
    pub small_a_area: f64,
    /// The same area from the closed form of the bump.
    pub small_a_area_exact: f64,
    pub gamma: f64,
}

pub fn shear_profile_v0(t: &RegularTuple, u: f64) -> Result<ShearProfile> {
    if !(u < 0.0) {
        return Err(Error::Config(format!("u must be negative, got {u}")));
    }
    let m = &t.metric;
    let half = t.jet.nabla_hat_otimes(m).scale(0.5);
    let norm = m.sq_norm_symtf(&half).map(|v| v.max(0.0).sqrt() / (-u));
    let g = t.grid();
    let sup_profile = (0..g.n_theta)
        .map(|i| norm.values()[i * g.n_phi..(i + 1) * g.n_phi].iter().fold(0.0f64, |a, v| a.max(*v)))
        .collect();
    Ok(ShearProfile { u, field: half.scale(-u), norm, sup_profile })
}

impl ShearProfile {
    pub fn ratio(&self, seed: &SeedData) -> Result<ShearRatio> {
        let g = self.norm.grid();
        seed.grid().same_shape(g).then_some(()).ok_or_else(|| Error::GridMismatch("shear vs seed".into()))?;
        let eps = seed.epsilon();
        let bump = &seed.bump;
        let (mut lo, mut hi, mut count) = (f64::INFINITY, 0.0f64, 0usize);
        let mut small = vec![0.0; g.len()];
        for i in 0..g.n_theta {
            let a = bump.value(g.theta_nodes[i]).abs();
            for j in 0..g.n_phi {
                let k = i * g.n_phi + j;
                if a <= 0.5 {
                    small[k] = 1.0;
                } else if eps > 0.0 {
                    let r = self.norm.values()[k] * (-self.u) * std::f64::consts::SQRT_2 / (eps * a);
                    lo = lo.min(r);
                    hi = hi.max(r);
                    count += 1;
                }
            }
        }
        // a = ½ at θ = 3γ/2 and π − 3γ/2 for the symmetric smoothstep bump
        let gam = seed.gamma();
        let exact = 2.0 * 2.0 * std::f64::consts::PI * (1.0 - (1.5 * gam).cos());
        Ok(ShearRatio {
            ratio_min: lo,
            ratio_max: hi,
            max_deviation: (1.0 - lo).abs().max((hi - 1.0).abs()),
            nodes_checked: count,
            small_a_area: g.integrate(&small),
            small_a_area_exact: exact,
            gamma: gam,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SphereGrid;
    use crate::seed::{make_seed, SeedParams};

    #[test]
    fn zero_shift_has_zero_shear() {
        let g = SphereGrid::new(16, 8).unwrap();
        let s = shear_profile_v0(&RegularTuple::trivial(&g), -2.0).unwrap();
        assert_eq!(s.norm.norm_inf(), 0.0);
    }

    #[test]
    fn seed_field_gives_the_half_root_two_profile() {
        // b = εb̃ alone: |½∇⊗̂b̃| = |a|/√2
        let g = SphereGrid::new(48, 16).unwrap();
        let seed = make_seed(&g, &SeedParams { epsilon: 1e-3, ..Default::default() }).unwrap();
        let mut t = RegularTuple::trivial(&g);
        t.jet = seed.jet.clone();
        t.b = seed.jet.b.clone();
        for u in [-1.0, -0.25] {
            let r = shear_profile_v0(&t, u).unwrap().ratio(&seed).unwrap();
            assert!(r.max_deviation < 1e-10, "{r:?}");
            assert!(r.nodes_checked > 0);
        }
    }

    #[test]
    fn small_a_region_is_order_gamma_squared() {
        let g = SphereGrid::new(64, 8).unwrap();
        let seed = make_seed(&g, &SeedParams::default()).unwrap();
        let r = shear_profile_v0(&RegularTuple::trivial(&g), -1.0).unwrap().ratio(&seed).unwrap();
        assert!(r.small_a_area_exact <= 15.0 * r.gamma * r.gamma, "{r:?}");
        assert!((r.small_a_area - r.small_a_area_exact).abs() < 0.05, "{r:?}");
    }
}
