//! Round-sphere Sobolev norms ‖u‖²_{H^j} = Σ_{i≤j} ‖∇̊^i u‖²_{L²}.

use crate::calculus::nabla;
use crate::error::{Error, Result};
use crate::field::{AnyField, Tensor};
use crate::metric::ConformalMetric;

pub const MAX_SOBOLEV_ORDER: usize = 4;

pub fn tensor_of(field: &AnyField) -> Tensor {
    match field {
        AnyField::Scalar(u) => Tensor::from_scalar(u),
        AnyField::Vector(x) => Tensor::from_rank1(x),
        AnyField::OneForm(w) => Tensor::from_rank1(w),
        AnyField::SymTF2(f) => Tensor::from_symtf(f),
    }
}

/// ∫ |t|² dVol̊ with the full round contraction.
pub fn l2_sq(t: &Tensor) -> f64 {
    t.grid.integrate(&t.sq_norm_pointwise())
}

/// ‖∇̊^i t‖_{L²} for i = 0..=j.
pub fn derivative_norms(t: &Tensor, j: usize) -> Result<Vec<f64>> {
    if j > MAX_SOBOLEV_ORDER {
        return Err(Error::Unsupported(format!("Sobolev order {j} > {MAX_SOBOLEV_ORDER}")));
    }
    let mut out = Vec::with_capacity(j + 1);
    let mut cur = t.clone();
    out.push(l2_sq(&cur).sqrt());
    for _ in 0..j {
        cur = nabla(&cur);
        out.push(l2_sq(&cur).sqrt());
    }
    Ok(out)
}

pub fn sobolev_norm_tensor(t: &Tensor, j: usize) -> Result<f64> {
    Ok(derivative_norms(t, j)?.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Round Sobolev norm; `metric` fixes the grid (norms are built from ∇̊ and dVol̊).
pub fn sobolev_norm(field: &AnyField, j: usize, metric: &ConformalMetric) -> Result<f64> {
    if !field.grid().same_shape(metric.grid()) {
        return Err(Error::GridMismatch("sobolev_norm: field and metric grids differ".into()));
    }
    sobolev_norm_tensor(&tensor_of(field), j)
}

/// ∫ u dVol_ĝ.
pub fn integrate(field: &crate::field::ScalarField, metric: &ConformalMetric) -> f64 {
    metric.integrate(field)
}
