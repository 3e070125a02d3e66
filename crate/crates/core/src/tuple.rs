//! Regular 4-tuples (ĝ, b, κ, Ω).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{ScalarField, VectorField};
use crate::grid::SphereGrid;
use crate::jet::ShiftJet;
use crate::metric::ConformalMetric;

/// One Picard step of the constraint construction.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct PicardStep {
    pub iter: usize,
    pub kappa: f64,
    /// ‖D_i − D_{i−1}‖_{H²}.
    pub increment_h2: f64,
    /// increment_i / increment_{i−1}.
    pub contraction: Option<f64>,
    /// D̃(κ̃ = 1) − D̃(κ̃ = 0), expected to be the constant −4.
    pub kappa_slope_mean: f64,
    pub kappa_slope_spread: f64,
    /// |c|/4 − (‖∇X‖ + ‖h‖) of the transport solve.
    pub smallness_margin: f64,
    pub solve_residual: f64,
}

#[derive(Clone, Debug)]
pub struct RegularTuple {
    pub metric: ConformalMetric,
    pub b: VectorField,
    /// Derivative data of b used by every operator that differentiates it.
    pub jet: ShiftJet,
    pub kappa: f64,
    /// b = b̌ + ∇̊f with mean-zero f.
    pub f_potential: ScalarField,
    /// L² residual of the κ-constraint equation.
    pub residual: f64,
    pub iteration_trace: Vec<PicardStep>,
    pub epsilon: f64,
    pub gamma: f64,
}

impl RegularTuple {
    /// ĝ round, b = 0, κ = 0, Ω = 1.
    pub fn trivial(grid: &Arc<SphereGrid>) -> RegularTuple {
        RegularTuple {
            metric: ConformalMetric::round(grid),
            b: VectorField::zeros(grid),
            jet: ShiftJet::zero(grid),
            kappa: 0.0,
            f_potential: ScalarField::zeros(grid),
            residual: 0.0,
            iteration_trace: Vec::new(),
            epsilon: 0.0,
            gamma: 0.0,
        }
    }

    /// Externally supplied data; b is differentiated on the grid.
    pub fn from_parts(metric: ConformalMetric, b: VectorField, kappa: f64) -> Result<RegularTuple> {
        metric.phi.check_grid(&b)?;
        let grid = b.grid().clone();
        Ok(RegularTuple {
            jet: ShiftJet::from_grid(&b),
            metric,
            b,
            kappa,
            f_potential: ScalarField::zeros(&grid),
            residual: f64::NAN,
            iteration_trace: Vec::new(),
            epsilon: f64::NAN,
            gamma: f64::NAN,
        })
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        self.b.grid()
    }

    /// div_ĝ b.
    pub fn div_b(&self) -> ScalarField {
        self.jet.div_hat(&self.metric)
    }

    /// ℒ_b log Ω.
    pub fn lie_log_lapse(&self) -> ScalarField {
        self.metric.lie_log_lapse(&self.b)
    }

    pub fn with_kappa(&self, kappa: f64) -> RegularTuple {
        RegularTuple { kappa, ..self.clone() }
    }
}
