//! Round-sphere differential calculus in dyad components.
//!
//! Connection of the dyad e_1 = ∂_θ, e_2 = (sinθ)⁻¹∂_φ:
//! ∇_{e_1}e_a = 0, ∇_{e_2}e_1 = cotθ e_2, ∇_{e_2}e_2 = −cotθ e_1.

use std::sync::Arc;

use crate::field::{Field, OneForm, ScalarField, SymTF2Field, Tensor, VectorField};
use crate::grid::SphereGrid;

fn cot_row_scale(grid: &SphereGrid, u: &[f64], a: f64, out: &mut [f64]) {
    let np = grid.n_phi;
    for i in 0..grid.n_theta {
        let c = a * grid.cot[i];
        for j in i * np..(i + 1) * np {
            out[j] += c * u[j];
        }
    }
}

/// Covariant derivative; the new index is the first one.
pub fn nabla(t: &Tensor) -> Tensor {
    let g = &t.grid;
    let n = g.len();
    let nc = t.ncomp();
    let r = t.rank;
    let mut out = Tensor::zeros(g, r + 1);
    for a in 0..nc {
        let ta = t.comp(a);
        out.comp_mut(a).copy_from_slice(&g.d_theta(ta));
        let mut e2 = g.d_e2(ta);
        for i in 0..r {
            let bit = 1 << (r - 1 - i);
            let flipped = a ^ bit;
            let sign = if a & bit == 0 { -1.0 } else { 1.0 };
            cot_row_scale(g, &t.data[flipped * n..(flipped + 1) * n], sign, &mut e2);
        }
        out.comp_mut(nc + a).copy_from_slice(&e2);
    }
    out
}

/// Contracts the first two indices of a tensor of rank ≥ 2 with the round metric.
pub fn contract_first_two(t: &Tensor) -> Tensor {
    assert!(t.rank >= 2);
    let r = t.rank - 2;
    let m = 1 << r;
    let mut out = Tensor::zeros(&t.grid, r);
    for a in 0..m {
        let i0 = a;
        let i1 = 3 * m + a;
        let (c0, c1) = (t.comp(i0), t.comp(i1));
        for (o, (x, y)) in out.comp_mut(a).iter_mut().zip(c0.iter().zip(c1)) {
            *o = x + y;
        }
    }
    out
}

pub fn grad(u: &ScalarField) -> OneForm {
    nabla(&Tensor::from_scalar(u)).to_rank1()
}

/// div X = ∂_θX¹ + cotθ X¹ + (sinθ)⁻¹∂_φX².
pub fn div_vector(x: &VectorField) -> ScalarField {
    let g = x.grid();
    let mut d = g.d_theta(x.comp(0));
    let e2 = g.d_e2(x.comp(1));
    for (a, b) in d.iter_mut().zip(&e2) {
        *a += b;
    }
    cot_row_scale(g, x.comp(0), 1.0, &mut d);
    Field::from_raw(g, d)
}

pub fn div_oneform(w: &OneForm) -> ScalarField {
    div_vector(&as_vector(w))
}

/// curl ω = ε^{AB}∇_Aω_B = ∇_1ω_2 − ∇_2ω_1.
pub fn curl(w: &OneForm) -> ScalarField {
    let g = w.grid();
    let mut d = g.d_theta(w.comp(1));
    let e2 = g.d_e2(w.comp(0));
    for (a, b) in d.iter_mut().zip(&e2) {
        *a -= b;
    }
    cot_row_scale(g, w.comp(1), 1.0, &mut d);
    Field::from_raw(g, d)
}

/// Δ̊u = div ∇u.
pub fn laplacian(u: &ScalarField) -> ScalarField {
    div_oneform(&grad(u))
}

/// (∇̊⊗̂X)_AB = ∇_AX_B + ∇_BX_A − (div X)δ_AB, stored as (11, 12).
pub fn otimes_hat_nabla(t1: &Tensor) -> SymTF2Field {
    let d = nabla(t1);
    let f11: Vec<f64> = d.comp(0).iter().zip(d.comp(3)).map(|(a, b)| a - b).collect();
    let f12: Vec<f64> = d.comp(1).iter().zip(d.comp(2)).map(|(a, b)| a + b).collect();
    Field::from_raw(&t1.grid, [f11, f12].concat())
}

pub fn deformation(x: &VectorField) -> SymTF2Field {
    otimes_hat_nabla(&Tensor::from_rank1(x))
}

pub fn otimes_hat_nabla_oneform(w: &OneForm) -> SymTF2Field {
    otimes_hat_nabla(&Tensor::from_rank1(w))
}

/// (div f)_A = ∇^B f_BA.
pub fn div_symtf(f: &SymTF2Field) -> OneForm {
    let d = nabla(&Tensor::from_symtf(f));
    let c0: Vec<f64> = d.comp(0).iter().zip(d.comp(6)).map(|(a, b)| a + b).collect();
    let c1: Vec<f64> = d.comp(1).iter().zip(d.comp(7)).map(|(a, b)| a + b).collect();
    Field::from_raw(f.grid(), [c0, c1].concat())
}

/// Rough Laplacian ∇^C∇_C of a trace-free symmetric tensor.
pub fn rough_laplacian_symtf(f: &SymTF2Field) -> SymTF2Field {
    let dd = nabla(&nabla(&Tensor::from_symtf(f)));
    contract_first_two(&dd).tf_part()
}

/// Hodge dual of a one-form, (*ω)_1 = ω_2, (*ω)_2 = −ω_1.
pub fn star(w: &OneForm) -> OneForm {
    let c1: Vec<f64> = w.comp(1).to_vec();
    let c2: Vec<f64> = w.comp(0).iter().map(|v| -v).collect();
    Field::from_raw(w.grid(), [c1, c2].concat())
}

/// (ω ⊗̂ ψ)_AB = ω_Aψ_B + ω_Bψ_A − (ω·ψ)δ_AB.
pub fn otimes_hat(w: &OneForm, p: &OneForm) -> SymTF2Field {
    let n = w.grid().len();
    let mut f11 = vec![0.0; n];
    let mut f12 = vec![0.0; n];
    let (w1, w2, p1, p2) = (w.comp(0), w.comp(1), p.comp(0), p.comp(1));
    for k in 0..n {
        f11[k] = w1[k] * p1[k] - w2[k] * p2[k];
        f12[k] = w1[k] * p2[k] + w2[k] * p1[k];
    }
    Field::from_raw(w.grid(), [f11, f12].concat())
}

/// μ·ν = μ_ABν^AB = 2(μ11ν11 + μ12ν12) (round contraction).
pub fn dot_symtf(m: &SymTF2Field, v: &SymTF2Field) -> ScalarField {
    let d: Vec<f64> = (0..m.grid().len())
        .map(|k| 2.0 * (m.comp(0)[k] * v.comp(0)[k] + m.comp(1)[k] * v.comp(1)[k]))
        .collect();
    Field::from_raw(m.grid(), d)
}

/// μ∧ν = ε^{AC}δ^{BD}μ_ABν_CD = 2(μ11ν12 − μ12ν11).
pub fn wedge_symtf(m: &SymTF2Field, v: &SymTF2Field) -> ScalarField {
    let d: Vec<f64> = (0..m.grid().len())
        .map(|k| 2.0 * (m.comp(0)[k] * v.comp(1)[k] - m.comp(1)[k] * v.comp(0)[k]))
        .collect();
    Field::from_raw(m.grid(), d)
}

pub fn dot_form(a: &OneForm, b: &OneForm) -> ScalarField {
    let d: Vec<f64> =
        (0..a.grid().len()).map(|k| a.comp(0)[k] * b.comp(0)[k] + a.comp(1)[k] * b.comp(1)[k]).collect();
    Field::from_raw(a.grid(), d)
}

/// (μ·ω)_A = μ_ABω^B.
pub fn symtf_dot_form(m: &SymTF2Field, w: &OneForm) -> OneForm {
    let n = m.grid().len();
    let (m11, m12, w1, w2) = (m.comp(0), m.comp(1), w.comp(0), w.comp(1));
    let c1: Vec<f64> = (0..n).map(|k| m11[k] * w1[k] + m12[k] * w2[k]).collect();
    let c2: Vec<f64> = (0..n).map(|k| m12[k] * w1[k] - m11[k] * w2[k]).collect();
    Field::from_raw(m.grid(), [c1, c2].concat())
}

pub fn as_vector(w: &OneForm) -> VectorField {
    Field::from_raw(w.grid(), w.data().to_vec())
}

pub fn as_oneform(x: &VectorField) -> OneForm {
    Field::from_raw(x.grid(), x.data().to_vec())
}

/// ∫ u dVol̊.
pub fn integrate_round(u: &ScalarField) -> f64 {
    u.grid().integrate(u.values())
}

pub fn round_area(grid: &Arc<SphereGrid>) -> f64 {
    grid.integrate(&vec![1.0; grid.len()])
}
