//! First- and second-order derivative data of a shift vector field.
//!
//! Operators that differentiate b read these arrays instead of
//! re-differentiating b on the grid. For fields that the grid resolves the
//! jet is obtained by grid differentiation; for the seed field the
//! derivatives are filled in from the analytic profile.

use std::sync::Arc;

use crate::calculus;
use crate::field::{Field, OneForm, ScalarField, SymTF2Field, Tensor, VectorField};
use crate::grid::SphereGrid;
use crate::metric::ConformalMetric;

#[derive(Clone, Debug)]
pub struct ShiftJet {
    pub b: VectorField,
    /// ∇̊_a b^c, component index 2a + c.
    pub nabla: Tensor,
    /// div̊(∇̊⊗̂b).
    pub div_def: OneForm,
    /// ∇̊(div̊ b).
    pub grad_div: OneForm,
}

impl ShiftJet {
    pub fn zero(grid: &Arc<SphereGrid>) -> ShiftJet {
        ShiftJet {
            b: VectorField::zeros(grid),
            nabla: Tensor::zeros(grid, 2),
            div_def: OneForm::zeros(grid),
            grad_div: OneForm::zeros(grid),
        }
    }

    pub fn from_grid(b: &VectorField) -> ShiftJet {
        let nabla = calculus::nabla(&Tensor::from_rank1(b));
        let div_def = calculus::div_symtf(&calculus::deformation(b));
        let grad_div = calculus::grad(&calculus::div_vector(b));
        ShiftJet { b: b.clone(), nabla, div_def, grad_div }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        self.b.grid()
    }

    pub fn scale(&self, a: f64) -> ShiftJet {
        ShiftJet {
            b: self.b.scale(a),
            nabla: Tensor {
                grid: self.nabla.grid.clone(),
                rank: 2,
                data: self.nabla.data.iter().map(|v| a * v).collect(),
            },
            div_def: self.div_def.scale(a),
            grad_div: self.grad_div.scale(a),
        }
    }

    pub fn add(&self, o: &ShiftJet) -> ShiftJet {
        ShiftJet {
            b: &self.b + &o.b,
            nabla: Tensor {
                grid: self.nabla.grid.clone(),
                rank: 2,
                data: self.nabla.data.iter().zip(&o.nabla.data).map(|(x, y)| x + y).collect(),
            },
            div_def: &self.div_def + &o.div_def,
            grad_div: &self.grad_div + &o.grad_div,
        }
    }

    /// div̊ b = ∇_a b^a.
    pub fn div_round(&self) -> ScalarField {
        let d = self.nabla.comp(0).iter().zip(self.nabla.comp(3)).map(|(a, b)| a + b).collect();
        Field::from_data(self.grid(), d).expect("jet shape")
    }

    /// ∇̊⊗̂b as (11, 12).
    pub fn deformation(&self) -> SymTF2Field {
        let n = &self.nabla;
        let f11: Vec<f64> = n.comp(0).iter().zip(n.comp(3)).map(|(a, b)| a - b).collect();
        let f12: Vec<f64> = n.comp(1).iter().zip(n.comp(2)).map(|(a, b)| a + b).collect();
        Field::from_data(self.grid(), [f11, f12].concat()).expect("jet shape")
    }

    /// div_ĝ b = div̊b + 2b(φ).
    pub fn div_hat(&self, metric: &ConformalMetric) -> ScalarField {
        let d = self.div_round();
        if metric.is_round() {
            return d;
        }
        let bphi = calculus::dot_form(&calculus::as_oneform(&self.b), &calculus::grad(&metric.phi));
        d.axpy(2.0, &bphi)
    }

    /// Covariant ∇̂⊗̂b = e^{2φ}∇̊⊗̂b.
    pub fn nabla_hat_otimes(&self, metric: &ConformalMetric) -> SymTF2Field {
        let d = self.deformation();
        if metric.is_round() {
            return d;
        }
        d.mul_scalar(&metric.e2phi())
    }

    /// div_ĝ(∇̂⊗̂b) = div̊(∇̊⊗̂b) + 2(∇̊⊗̂b)·∇φ.
    pub fn div_hat_deformation(&self, metric: &ConformalMetric) -> OneForm {
        if metric.is_round() {
            return self.div_def.clone();
        }
        let extra = calculus::symtf_dot_form(&self.deformation(), &calculus::grad(&metric.phi));
        self.div_def.axpy(2.0, &extra)
    }

    /// ∇(div_ĝ b).
    pub fn grad_div_hat(&self, metric: &ConformalMetric) -> OneForm {
        if metric.is_round() {
            return self.grad_div.clone();
        }
        let bphi = calculus::dot_form(&calculus::as_oneform(&self.b), &calculus::grad(&metric.phi));
        self.grad_div.axpy(2.0, &calculus::grad(&bphi))
    }

    /// Pointwise Frobenius norm of ∇̊b, maximized over nodes.
    pub fn max_grad_norm(&self) -> f64 {
        self.nabla.sq_norm_pointwise().iter().fold(0.0f64, |m, v| m.max(v.sqrt()))
    }

    /// Largest azimuthal variation of any jet array.
    pub fn phi_variation(&self) -> f64 {
        let g = self.grid();
        let mut v = self.b.phi_variation().max(self.div_def.phi_variation()).max(self.grad_div.phi_variation());
        for c in 0..4 {
            v = v.max(g.phi_variation(self.nabla.comp(c)));
        }
        v
    }

    pub fn phi_average(&self) -> ShiftJet {
        let g = self.grid();
        let mut nabla = self.nabla.clone();
        for c in 0..4 {
            let avg = g.phi_average(self.nabla.comp(c));
            nabla.comp_mut(c).copy_from_slice(&avg);
        }
        ShiftJet {
            b: self.b.phi_average(),
            nabla,
            div_def: self.div_def.phi_average(),
            grad_div: self.grad_div.phi_average(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.b.norm_inf() == 0.0 && self.nabla.data.iter().all(|v| *v == 0.0)
    }
}

/// A one-form with its covariant derivative ∇̊_a w_b (component index 2a + b).
#[derive(Clone, Debug)]
pub struct OneFormJet {
    pub w: OneForm,
    pub nabla: Tensor,
}

impl OneFormJet {
    pub fn from_grid(w: &OneForm) -> OneFormJet {
        OneFormJet { w: w.clone(), nabla: calculus::nabla(&Tensor::from_rank1(w)) }
    }

    /// Jet of w = model + remainder: model derivatives are taken as given,
    /// the remainder is differentiated on the grid.
    pub fn with_model(w: &OneForm, model: &OneFormJet) -> OneFormJet {
        let rem = calculus::nabla(&Tensor::from_rank1(&(w - &model.w)));
        let data = rem.data.iter().zip(&model.nabla.data).map(|(x, y)| x + y).collect();
        OneFormJet { w: w.clone(), nabla: Tensor { grid: rem.grid.clone(), rank: 2, data } }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        self.w.grid()
    }

    pub fn div_round(&self) -> ScalarField {
        let d = self.nabla.comp(0).iter().zip(self.nabla.comp(3)).map(|(a, b)| a + b).collect();
        Field::from_data(self.grid(), d).expect("jet shape")
    }

    /// ∇̊⊗̂w as (11, 12).
    pub fn deformation(&self) -> SymTF2Field {
        let n = &self.nabla;
        let f11: Vec<f64> = n.comp(0).iter().zip(n.comp(3)).map(|(a, b)| a - b).collect();
        let f12: Vec<f64> = n.comp(1).iter().zip(n.comp(2)).map(|(a, b)| a + b).collect();
        Field::from_data(self.grid(), [f11, f12].concat()).expect("jet shape")
    }

    /// div_ĝ w = e^{−2φ}div̊w.
    pub fn div_hat(&self, metric: &ConformalMetric) -> ScalarField {
        let d = self.div_round();
        if metric.is_round() {
            return d;
        }
        d.mul(&metric.em2phi())
    }

    /// ∇̂⊗̂w = ∇̊⊗̂w − 2 w⊗̂dφ.
    pub fn nabla_hat_otimes(&self, metric: &ConformalMetric) -> SymTF2Field {
        let d = self.deformation();
        if metric.is_round() {
            return d;
        }
        d.axpy(-2.0, &calculus::otimes_hat(&self.w, &calculus::grad(&metric.phi)))
    }
}
