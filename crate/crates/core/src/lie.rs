//! Lie derivatives along a shift, in dyad components.
//!
//! (ℒ_X T)_{a…} = X^c(∇_cT)_{a…} + Σ_i (∇_{a_i}X^c) T_{…c…} for covariant T,
//! (ℒ_X Y)^a = X^c∇_cY^a − Y^c∇_cX^a for vectors.

use crate::calculus::nabla;
use crate::error::{Error, Result};
use crate::field::{AnyField, Field, ScalarField, Tensor, VectorField};
use crate::jet::ShiftJet;
use crate::norms::tensor_of;

pub fn lie_scalar(jet: &ShiftJet, u: &ScalarField) -> ScalarField {
    let g = u.grid();
    let d1 = g.d_theta(u.values());
    let d2 = g.d_e2(u.values());
    let (b1, b2) = (jet.b.comp(0), jet.b.comp(1));
    let v = (0..g.len()).map(|k| b1[k] * d1[k] + b2[k] * d2[k]).collect();
    Field::from_data(g, v).expect("shape")
}

/// Lie derivative of a covariant tensor of any rank.
pub fn lie_covariant(jet: &ShiftJet, t: &Tensor) -> Tensor {
    let g = &t.grid;
    let n = g.len();
    let r = t.rank;
    let nc = t.ncomp();
    let (b1, b2) = (jet.b.comp(0), jet.b.comp(1));
    let mut out = Tensor::zeros(g, r);
    if r == 0 {
        return Tensor::from_scalar(&lie_scalar(jet, &t.to_scalar()));
    }
    let dt = nabla(t);
    for a in 0..nc {
        let o = &mut out.data[a * n..(a + 1) * n];
        let d1 = dt.comp(a);
        let d2 = dt.comp(nc + a);
        for k in 0..n {
            o[k] = b1[k] * d1[k] + b2[k] * d2[k];
        }
        for i in 0..r {
            let bit = 1 << (r - 1 - i);
            let ai = usize::from(a & bit != 0);
            for c in 0..2usize {
                let src = if c == 1 { a | bit } else { a & !bit };
                let nb = jet.nabla.comp(2 * ai + c);
                let ts = &t.data[src * n..(src + 1) * n];
                for k in 0..n {
                    o[k] += nb[k] * ts[k];
                }
            }
        }
    }
    out
}

pub fn lie_vector(jet: &ShiftJet, y: &VectorField) -> VectorField {
    let g = y.grid();
    let n = g.len();
    let dy = nabla(&Tensor::from_rank1(y));
    let (b1, b2) = (jet.b.comp(0), jet.b.comp(1));
    let mut data = vec![0.0; 2 * n];
    for a in 0..2 {
        for k in 0..n {
            let mut v = b1[k] * dy.comp(a)[k] + b2[k] * dy.comp(2 + a)[k];
            v -= y.comp(0)[k] * jet.nabla.comp(a)[k] + y.comp(1)[k] * jet.nabla.comp(2 + a)[k];
            data[a * n + k] = v;
        }
    }
    Field::from_data(g, data).expect("shape")
}

/// ℒ_X of a scalar, one-form, vector or trace-free tensor, with X
/// differentiated on the grid. Rank-2 results are returned in full
/// (the Lie derivative of a trace-free tensor is not trace-free).
pub fn lie_derivative(x: &VectorField, field: &AnyField) -> Result<Tensor> {
    if !x.grid().same_shape(field.grid()) {
        return Err(Error::GridMismatch("lie_derivative: grids differ".into()));
    }
    let jet = ShiftJet::from_grid(x);
    Ok(match field {
        AnyField::Vector(y) => Tensor::from_rank1(&lie_vector(&jet, y)),
        other => lie_covariant(&jet, &tensor_of(other)),
    })
}

/// ℒ_X of an arbitrary covariant tensor (for instance a metric).
pub fn lie_derivative_tensor(x: &VectorField, t: &Tensor) -> Result<Tensor> {
    if t.rank > 4 {
        return Err(Error::Unsupported(format!("Lie derivative of rank {}", t.rank)));
    }
    Ok(lie_covariant(&ShiftJet::from_grid(x), t))
}
