//! Self-similar relations on the incoming cone, checked from the definitions.
//!
//! With ĝ(u) = u²ĝ, b(u) = b/(−u), Ω = (−u)^κΩ̃ and e₃ = Ω⁻¹(∂_u + b),
//!
//!   Ωtrχ̲ = ½ĝ(u)^{AB}(∂_u + ℒ_b)ĝ(u)_AB,   Ωχ̲̂ = ½((∂_u + ℒ_b)ĝ(u))^tf,
//!   Ωω̲ = −½(∂_u + b)log Ω.
//!
//! ∂_u is a central difference in u and ℒ_b ĝ is taken with the Lie
//! derivative of the metric tensor, so each relation compares two
//! independently assembled sides.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Tensor;
use crate::lie::{lie_covariant, lie_scalar};
use crate::tuple::RegularTuple;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelfSimReport {
    pub u: f64,
    /// sup |Ωtrχ̲ − (2/u + div b)|.
    pub trchibar: f64,
    /// sup |Ωχ̲̂ − ½∇̂⊗̂b|_{ĝ(u)}.
    pub chibar_hat: f64,
    /// sup |Ωω̲ + ½ℒ_b log Ω + κ/(2u)|.
    pub omegabar: f64,
}

impl SelfSimReport {
    pub fn max(&self) -> f64 {
        self.trchibar.max(self.chibar_hat).max(self.omegabar)
    }
}

fn metric_tensor(t: &RegularTuple, u: f64) -> Tensor {
    let g = t.grid();
    let e = t.metric.e2phi();
    let mut m = Tensor::zeros(g, 2);
    for k in 0..g.len() {
        let v = u * u * e.values()[k];
        m.comp_mut(0)[k] = v;
        m.comp_mut(3)[k] = v;
    }
    m
}

pub fn selfsim_relations(t: &RegularTuple, u: f64) -> Result<SelfSimReport> {
    if !(u < 0.0) {
        return Err(Error::Config(format!("u must be negative, got {u}")));
    }
    let g = t.grid();
    let n = g.len();
    let jet = t.jet.scale(1.0 / (-u));
    let h = 1e-3 * (-u);
    let (gp, gm, g0) = (metric_tensor(t, u + h), metric_tensor(t, u - h), metric_tensor(t, u));
    let lie = lie_covariant(&jet, &g0);
    // (∂_u + ℒ_b)ĝ(u)
    let mut dg = Tensor::zeros(g, 2);
    for c in 0..4 {
        for k in 0..n {
            dg.comp_mut(c)[k] = (gp.comp(c)[k] - gm.comp(c)[k]) / (2.0 * h) + lie.comp(c)[k];
        }
    }
    let inv = t.metric.em2phi();
    let div = t.div_b();
    let def = t.jet.nabla_hat_otimes(&t.metric);
    let llog = lie_scalar(&t.jet, &t.metric.log_lapse);
    let mut rep = SelfSimReport { u, trchibar: 0.0, chibar_hat: 0.0, omegabar: 0.0 };
    for k in 0..n {
        let gi = inv.values()[k] / (u * u);
        let tr = 0.5 * gi * (dg.comp(0)[k] + dg.comp(3)[k]);
        rep.trchibar = rep.trchibar.max((tr - (2.0 / u + div.values()[k] / (-u))).abs());
        // trace-free part, halved, against ½∇̂(u)⊗̂b(u) = ½(−u)∇̂⊗̂b
        let c11 = 0.25 * (dg.comp(0)[k] - dg.comp(3)[k]);
        let c12 = 0.5 * dg.comp(1)[k];
        let (e11, e12) = (0.5 * (-u) * def.comp(0)[k], 0.5 * (-u) * def.comp(1)[k]);
        let d = 2.0 * ((c11 - e11).powi(2) + (c12 - e12).powi(2));
        rep.chibar_hat = rep.chibar_hat.max(d.sqrt() * gi);
    }
    // log Ω(u) = κ log(−u) + log Ω̃
    let dlog = t.kappa * (((-(u + h)).ln() - (-(u - h)).ln()) / (2.0 * h));
    for k in 0..n {
        let om = -0.5 * (dlog + llog.values()[k] / (-u));
        let target = -0.5 * llog.values()[k] / (-u) - t.kappa / (2.0 * u);
        rep.omegabar = rep.omegabar.max((om - target).abs());
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::{picard_regular_tuple, PicardOptions};
    use crate::grid::SphereGrid;
    use crate::seed::{make_seed, SeedParams};

    #[test]
    fn relations_hold_for_a_constructed_tuple() {
        let g = SphereGrid::new(32, 16).unwrap();
        let seed = make_seed(&g, &SeedParams { epsilon: 1e-3, ..Default::default() }).unwrap();
        let t = picard_regular_tuple(&seed, &PicardOptions::default()).unwrap();
        for u in [-1.0, -0.3] {
            let r = selfsim_relations(&t, u).unwrap();
            assert!(r.max() < 1e-9, "{r:?}");
        }
    }
}
