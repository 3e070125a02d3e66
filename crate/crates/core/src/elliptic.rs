//! Mean-zero inversion of the discrete Laplacian.

use std::sync::Arc;

use crate::calculus::laplacian;
use crate::error::Result;
use crate::field::ScalarField;
use crate::grid::SphereGrid;
use crate::linalg::{LinearOp, ModeBlocks};

struct LaplaceOp {
    grid: Arc<SphereGrid>,
}

impl LinearOp for LaplaceOp {
    fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }
    fn ncomp(&self) -> usize {
        1
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let u = ScalarField::from_data(&self.grid, x.to_vec()).expect("shape");
        laplacian(&u).into_data()
    }
}

/// Factored Δ̊ on mean-zero fields (m = 0 and Nyquist blocks bordered).
pub struct PoissonSolver {
    blocks: ModeBlocks,
    grid: Arc<SphereGrid>,
}

impl PoissonSolver {
    pub fn new(grid: &Arc<SphereGrid>) -> Result<PoissonSolver> {
        let op = LaplaceOp { grid: grid.clone() };
        Ok(PoissonSolver { blocks: ModeBlocks::assemble(&op, true)?, grid: grid.clone() })
    }

    /// Mean-zero f with Δ̊f = rhs (rhs is used as given; its mean should vanish).
    pub fn solve(&self, rhs: &ScalarField) -> Result<ScalarField> {
        let mut f = self.blocks.solve(rhs.values())?;
        // one refinement pass against the grid operator
        let u = ScalarField::from_data(&self.grid, f.clone())?;
        let r: Vec<f64> = rhs.values().iter().zip(laplacian(&u).values()).map(|(a, b)| a - b).collect();
        let df = self.blocks.solve(&r)?;
        for (x, d) in f.iter_mut().zip(&df) {
            *x += d;
        }
        ScalarField::from_data(&self.grid, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::integrate_round;

    #[test]
    fn inverts_laplacian_on_smooth_data() {
        let g = SphereGrid::new(32, 16).unwrap();
        let u = ScalarField::from_scalar_fn(&g, |t, p| (t.cos().powi(3) - 0.6 * t.cos()) + t.sin().powi(2) * (2.0 * p).cos());
        let mean = integrate_round(&u) / (4.0 * std::f64::consts::PI);
        let u = u.add_const(-mean);
        let rhs = laplacian(&u);
        let f = PoissonSolver::new(&g).unwrap().solve(&rhs).unwrap();
        assert!(f.max_abs_diff(&u) < 1e-11, "{}", f.max_abs_diff(&u));
        assert!(integrate_round(&f).abs() < 1e-13);
    }
}
