//! Product identities for trace-free symmetric tensors on random fields.
//!
//!   ½(∇(μ·ν) + *∇(μ∧ν)) = μ div ν + (ν·∇)·μ
//!   μ·(ϑ·ν) − ν·(ϑ·μ) = *ϑ (μ∧ν)
//!   μ·(ϑ·ν) + ν·(ϑ·μ) = ϑ (μ·ν)
//!   μ·(ϑ·ν) = ½ϑ(μ·ν) + ½*ϑ(μ∧ν)

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{div_symtf, dot_symtf, grad, nabla, star, symtf_dot_form, wedge_symtf};
use crate::field::{Field, OneForm, ScalarField, SymTF2Field, Tensor};
use crate::grid::SphereGrid;
use crate::random::{random_oneform_ambient, random_symtf_ambient, rng};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityOptions {
    pub trials: usize,
    pub lmax: usize,
    pub seed: u64,
}

impl Default for IdentityOptions {
    fn default() -> Self {
        IdentityOptions { trials: 100, lmax: 8, seed: 7 }
    }
}

/// Worst relative residual of each identity over all trials.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct IdentityReport {
    pub trials: usize,
    pub product_rule: f64,
    pub product_rule_diagonal: f64,
    pub antisymmetric_contraction: f64,
    pub symmetric_contraction: f64,
    pub split_contraction: f64,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.product_rule,
            self.product_rule_diagonal,
            self.antisymmetric_contraction,
            self.symmetric_contraction,
            self.split_contraction,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// ‖a − b‖∞ / max(‖a‖∞, ‖b‖∞), zero when both vanish.
fn rel_diff(a: &OneForm, b: &OneForm) -> f64 {
    let s = a.norm_inf().max(b.norm_inf());
    if s == 0.0 {
        return 0.0;
    }
    a.max_abs_diff(b) / s
}

fn scale_form(w: &OneForm, s: &ScalarField) -> OneForm {
    w.mul_scalar(s)
}

/// ½(∇(μ·ν) + *∇(μ∧ν)).
pub fn product_rule_lhs(mu: &SymTF2Field, nu: &SymTF2Field) -> OneForm {
    let a = grad(&dot_symtf(mu, nu));
    let b = star(&grad(&wedge_symtf(mu, nu)));
    (&a + &b).scale(0.5)
}

/// μ div ν + (ν·∇)·μ, the second term being ν^{BC}∇_Bμ_{CA}.
pub fn product_rule_rhs(mu: &SymTF2Field, nu: &SymTF2Field) -> OneForm {
    let g = mu.grid();
    let n = g.len();
    let first = symtf_dot_form(mu, &div_symtf(nu));
    let d = nabla(&Tensor::from_symtf(mu));
    let nt = Tensor::from_symtf(nu);
    let mut second = vec![0.0; 2 * n];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                let dm = d.comp(4 * b + 2 * c + a);
                let nv = nt.comp(2 * b + c);
                for k in 0..n {
                    second[a * n + k] += nv[k] * dm[k];
                }
            }
        }
    }
    &first + &Field::from_data(g, second).expect("shape")
}

pub fn contraction_sides(mu: &SymTF2Field, nu: &SymTF2Field, th: &OneForm) -> [(OneForm, OneForm); 3] {
    let a = symtf_dot_form(mu, &symtf_dot_form(nu, th));
    let b = symtf_dot_form(nu, &symtf_dot_form(mu, th));
    let dot = dot_symtf(mu, nu);
    let wedge = wedge_symtf(mu, nu);
    let st = scale_form(&star(th), &wedge);
    let sy = scale_form(th, &dot);
    let split = (&sy + &st).scale(0.5);
    [(&a - &b, st), (&a + &b, sy), (a, split)]
}

/// Fields are restrictions of ambient tensors, exact at the near-polar nodes
/// where grid-differentiated potentials are not. Products of two degree-lmax
/// fields need n_theta ≳ 8·lmax for the derivative identity to close at 1e-12.
pub fn tensor_identity_suite(grid: &Arc<SphereGrid>, o: &IdentityOptions) -> IdentityReport {
    let mut r = rng(o.seed);
    let mut rep = IdentityReport { trials: o.trials, ..Default::default() };
    for _ in 0..o.trials {
        let mu = random_symtf_ambient(grid, &mut r, o.lmax);
        let nu = random_symtf_ambient(grid, &mut r, o.lmax);
        let th = random_oneform_ambient(grid, &mut r, o.lmax);
        rep.product_rule = rep.product_rule.max(rel_diff(&product_rule_lhs(&mu, &nu), &product_rule_rhs(&mu, &nu)));
        rep.product_rule_diagonal =
            rep.product_rule_diagonal.max(rel_diff(&product_rule_lhs(&mu, &mu), &product_rule_rhs(&mu, &mu)));
        let [anti, sym, split] = contraction_sides(&mu, &nu, &th);
        rep.antisymmetric_contraction = rep.antisymmetric_contraction.max(rel_diff(&anti.0, &anti.1));
        rep.symmetric_contraction = rep.symmetric_contraction.max(rel_diff(&sym.0, &sym.1));
        rep.split_contraction = rep.split_contraction.max(rel_diff(&split.0, &split.1));
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_tensor_gives_zero_sides() {
        let g = SphereGrid::new(24, 32).unwrap();
        let mut r = rng(1);
        let mu = SymTF2Field::zeros(&g);
        let nu = random_symtf_ambient(&g, &mut r, 6);
        assert_eq!(product_rule_lhs(&mu, &nu).norm_inf(), 0.0);
        assert_eq!(product_rule_rhs(&mu, &nu).norm_inf(), 0.0);
    }

    #[test]
    fn identities_hold_on_random_fields() {
        let g = SphereGrid::new(64, 64).unwrap();
        let rep = tensor_identity_suite(&g, &IdentityOptions { trials: 10, ..Default::default() });
        assert!(rep.max_residual() < 1e-9, "{rep:?}");
        assert!(rep.antisymmetric_contraction < 1e-12, "{rep:?}");
    }

    #[test]
    fn hand_example_of_the_wedge_identity() {
        // μ = diag(1, −1), ν12 = 1, ϑ = e_1 gives (0, −2) on both sides
        let g = SphereGrid::new(4, 4).unwrap();
        let n = g.len();
        let mu = SymTF2Field::from_data(&g, [vec![1.0; n], vec![0.0; n]].concat()).unwrap();
        let nu = SymTF2Field::from_data(&g, [vec![0.0; n], vec![1.0; n]].concat()).unwrap();
        let th = OneForm::from_data(&g, [vec![1.0; n], vec![0.0; n]].concat()).unwrap();
        let [anti, ..] = contraction_sides(&mu, &nu, &th);
        assert!(anti.0.comp(1).iter().all(|v| *v == -2.0));
        assert!(anti.1.comp(1).iter().all(|v| *v == -2.0));
    }
}
