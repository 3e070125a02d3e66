//! Conformally round metrics ĝ = e^{2φ}g̊ with a lapse Ω, and the conformal
//! transformation rules for first-order operators.
//!
//! Tensors stay in round-dyad components; covariant components are stored.
//! Under g = e^{2φ}g̊: |ω|²_ĝ = e^{−2φ}|ω|̊², |f|²_ĝ = e^{−4φ}|f|̊² for covariant
//! 2-tensors, dVol_ĝ = e^{2φ}dVol̊.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus;
use crate::error::{Error, Result};
use crate::field::{AnyField, OneForm, ScalarField, SymTF2Field, VectorField};
use crate::grid::SphereGrid;

#[derive(Clone, Debug)]
pub struct ConformalMetric {
    pub phi: ScalarField,
    pub log_lapse: ScalarField,
}

impl ConformalMetric {
    pub fn round(grid: &Arc<SphereGrid>) -> Self {
        ConformalMetric { phi: ScalarField::zeros(grid), log_lapse: ScalarField::zeros(grid) }
    }

    pub fn new(phi: ScalarField, log_lapse: ScalarField) -> Result<Self> {
        phi.check_grid(&log_lapse)?;
        let m = ConformalMetric { phi, log_lapse };
        if !(m.area() > 0.0) || !m.phi.is_finite() || !m.log_lapse.is_finite() {
            return Err(Error::Config("metric data must be finite with positive area".into()));
        }
        Ok(m)
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        self.phi.grid()
    }

    pub fn is_round(&self) -> bool {
        self.phi.norm_inf() == 0.0
    }

    pub fn e2phi(&self) -> ScalarField {
        self.phi.map(|p| (2.0 * p).exp())
    }

    pub fn em2phi(&self) -> ScalarField {
        self.phi.map(|p| (-2.0 * p).exp())
    }

    pub fn area(&self) -> f64 {
        self.integrate(&ScalarField::constant(self.grid(), 1.0))
    }

    /// ∫ u dVol_ĝ.
    pub fn integrate(&self, u: &ScalarField) -> f64 {
        calculus::integrate_round(&u.mul(&self.e2phi()))
    }

    /// div_ĝ X = div̊X + 2X(φ).
    pub fn div_vector(&self, x: &VectorField) -> ScalarField {
        let d = calculus::div_vector(x);
        if self.is_round() {
            return d;
        }
        let dp = calculus::grad(&self.phi);
        let xphi = calculus::dot_form(&calculus::as_oneform(x), &dp);
        d.axpy(2.0, &xphi)
    }

    /// div_ĝ ω = e^{−2φ}div̊ω for one-forms.
    pub fn div_oneform(&self, w: &OneForm) -> ScalarField {
        calculus::div_oneform(w).mul(&self.em2phi())
    }

    /// curl_ĝ ω = e^{−2φ}curl̊ω.
    pub fn curl(&self, w: &OneForm) -> ScalarField {
        calculus::curl(w).mul(&self.em2phi())
    }

    /// Covariant (∇̂⊗̂X)_AB = e^{2φ}(∇̊⊗̂X)_AB, i.e. (∇̂⊗̂X)^{AB} = e^{−2φ}(∇̊⊗̂X)^{AB}.
    pub fn nabla_hat_otimes_vector(&self, x: &VectorField) -> SymTF2Field {
        calculus::deformation(x).mul_scalar(&self.e2phi())
    }

    /// ∇̂⊗̂ω = ∇̊⊗̂ω − 2 ω⊗̂dφ for one-forms.
    pub fn nabla_hat_otimes_oneform(&self, w: &OneForm) -> SymTF2Field {
        let d = calculus::otimes_hat_nabla_oneform(w);
        if self.is_round() {
            return d;
        }
        d.axpy(-2.0, &calculus::otimes_hat(w, &calculus::grad(&self.phi)))
    }

    /// (div_ĝ T)_A = e^{−2φ}(div̊T)_A for trace-free symmetric T.
    pub fn div_symtf(&self, t: &SymTF2Field) -> OneForm {
        calculus::div_symtf(t).mul_scalar(&self.em2phi())
    }

    /// ĝ-gradient as a one-form (metric-free).
    pub fn grad(&self, u: &ScalarField) -> OneForm {
        calculus::grad(u)
    }

    pub fn sq_norm_oneform(&self, w: &OneForm) -> ScalarField {
        calculus::dot_form(w, w).mul(&self.em2phi())
    }

    pub fn dot_oneform(&self, a: &OneForm, b: &OneForm) -> ScalarField {
        calculus::dot_form(a, b).mul(&self.em2phi())
    }

    pub fn sq_norm_symtf(&self, f: &SymTF2Field) -> ScalarField {
        calculus::dot_symtf(f, f).mul(&self.em2phi().mul(&self.em2phi()))
    }

    pub fn dot_symtf(&self, f: &SymTF2Field, g: &SymTF2Field) -> ScalarField {
        calculus::dot_symtf(f, g).mul(&self.em2phi().mul(&self.em2phi()))
    }

    /// ⟨f, g⟩_ĝ = ∫ e^{−2φ}(f·g)̊ dVol̊.
    pub fn inner_symtf(&self, f: &SymTF2Field, g: &SymTF2Field) -> f64 {
        self.integrate(&self.dot_symtf(f, g))
    }

    pub fn l2_symtf(&self, f: &SymTF2Field) -> f64 {
        self.inner_symtf(f, f).max(0.0).sqrt()
    }

    /// L_b log Ω as a scalar, with b given as a vector field.
    pub fn lie_log_lapse(&self, b: &VectorField) -> ScalarField {
        calculus::dot_form(&calculus::as_oneform(b), &calculus::grad(&self.log_lapse))
    }
}

/// Gaussian curvature K = e^{−2φ}(1 − Δ̊φ).
pub fn gauss_curvature(metric: &ConformalMetric) -> ScalarField {
    let lap = calculus::laplacian(&metric.phi);
    lap.map(|l| 1.0 - l).mul(&metric.em2phi())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FirstOrderOp {
    Grad,
    Div,
    Curl,
    NablaHatOtimes,
}

/// Dispatches the first-order operators by runtime rank.
pub fn first_order_ops(op: FirstOrderOp, field: &AnyField, metric: &ConformalMetric) -> Result<AnyField> {
    if !field.grid().same_shape(metric.grid()) {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", field.grid(), metric.grid())));
    }
    let mismatch = |expected: &str| Error::RankMismatch {
        expected: expected.to_string(),
        got: field.kind().name().to_string(),
    };
    Ok(match (op, field) {
        (FirstOrderOp::Grad, AnyField::Scalar(u)) => AnyField::OneForm(metric.grad(u)),
        (FirstOrderOp::Grad, _) => return Err(mismatch("scalar")),
        (FirstOrderOp::Div, AnyField::Vector(x)) => AnyField::Scalar(metric.div_vector(x)),
        (FirstOrderOp::Div, AnyField::OneForm(w)) => AnyField::Scalar(metric.div_oneform(w)),
        (FirstOrderOp::Div, AnyField::SymTF2(t)) => AnyField::OneForm(metric.div_symtf(t)),
        (FirstOrderOp::Div, _) => return Err(mismatch("vector, one-form or trace-free tensor")),
        (FirstOrderOp::Curl, AnyField::OneForm(w)) => AnyField::Scalar(metric.curl(w)),
        (FirstOrderOp::Curl, _) => return Err(mismatch("one-form")),
        (FirstOrderOp::NablaHatOtimes, AnyField::Vector(x)) => {
            AnyField::SymTF2(metric.nabla_hat_otimes_vector(x))
        }
        (FirstOrderOp::NablaHatOtimes, AnyField::OneForm(w)) => {
            AnyField::SymTF2(metric.nabla_hat_otimes_oneform(w))
        }
        (FirstOrderOp::NablaHatOtimes, _) => return Err(mismatch("vector or one-form")),
    })
}
