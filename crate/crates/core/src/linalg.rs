//! Linear solves for operators on sampled fields.
//!
//! An operator whose coefficients do not depend on φ maps cos(mφ)/sin(mφ)
//! rows into the same mode m, so its matrix splits into one real block per
//! azimuthal mode. Each block is assembled by applying the operator to one
//! batched probe per (component, colatitude, parity) and reading off the
//! Fourier coefficients of the response.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SphereGrid;

pub trait LinearOp {
    fn grid(&self) -> &Arc<SphereGrid>;
    fn ncomp(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;

    fn dim(&self) -> usize {
        self.ncomp() * self.grid().len()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Relative residual target for iterative refinement.
    pub tol: f64,
    pub max_iter: usize,
    /// Iterative paths fail when they stall above this relative residual.
    pub accept_residual: f64,
    /// Largest unknown count assembled as one dense matrix.
    pub dense_limit: usize,
    pub cond_limit: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-13, max_iter: 60, accept_residual: 1e-10, dense_limit: 2400, cond_limit: 1e12 }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct SolveReport {
    pub method: String,
    pub residual_rel: f64,
    pub cond_estimate: f64,
    pub iterations: usize,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Splits a θ-row into (a_m, b_m), m = 0..=M, of
/// r = a_0 + Σ_{0<m<M}(a_m cos mφ + b_m sin mφ) + a_M cos Mφ.
pub fn row_modes(grid: &SphereGrid, row: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = grid.n_phi;
    let mm = grid.nyquist();
    let x = grid.row_fft(row);
    let nf = n as f64;
    let mut a = vec![0.0; mm + 1];
    let mut b = vec![0.0; mm + 1];
    a[0] = x[0].re / nf;
    for m in 1..mm {
        a[m] = 2.0 * x[m].re / nf;
        b[m] = -2.0 * x[m].im / nf;
    }
    a[mm] = x[mm].re / nf;
    (a, b)
}

pub fn row_synth(grid: &SphereGrid, a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = grid.n_phi;
    let mm = grid.nyquist();
    let nf = n as f64;
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    x[0] = Complex64::new(nf * a[0], 0.0);
    for m in 1..mm {
        let c = Complex64::new(0.5 * nf * a[m], -0.5 * nf * b[m]);
        x[m] = c;
        x[n - m] = c.conj();
    }
    x[mm] = Complex64::new(nf * a[mm], 0.0);
    grid.row_ifft(x)
}

struct Block {
    parities: usize,
    bordered: bool,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    cond: f64,
}

/// Per-azimuthal-mode factorization of a φ-independent operator.
pub struct ModeBlocks {
    grid: Arc<SphereGrid>,
    ncomp: usize,
    blocks: Vec<Block>,
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn lu_cond_estimate(a: &DMatrix<f64>, lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let d = a.nrows();
    let z = DVector::from_fn(d, |i, _| if (i * 7 + 3) % 5 < 2 { -1.0 } else { 1.0 });
    let ones = DVector::from_element(d, 1.0);
    let mut inv = 0.0f64;
    for v in [z, ones] {
        if let Some(y) = lu.solve(&v) {
            inv = inv.max(y.iter().map(|x| x.abs()).sum::<f64>() / v.iter().map(|x| x.abs()).sum::<f64>());
        } else {
            return f64::INFINITY;
        }
    }
    one_norm(a) * inv
}

impl ModeBlocks {
    /// `border` adds a mean-zero constraint row/column to the m = 0 and
    /// Nyquist blocks (for operators whose kernel contains the constants).
    pub fn assemble(op: &dyn LinearOp, border: bool) -> Result<ModeBlocks> {
        let grid = op.grid().clone();
        let (nt, np) = (grid.n_theta, grid.n_phi);
        let n = grid.len();
        let nc = op.ncomp();
        let mm = grid.nyquist();
        if border && nc != 1 {
            return Err(Error::Unsupported("bordered mode blocks need a scalar operator".into()));
        }
        let par = |m: usize| if m == 0 || m == mm { 1 } else { 2 };
        let mut mats: Vec<DMatrix<f64>> = (0..=mm)
            .map(|m| {
                let d = nc * nt * par(m) + usize::from(border && par(m) == 1);
                DMatrix::zeros(d, d)
            })
            .collect();
        let cos_probe: Vec<f64> =
            grid.phi_nodes.iter().map(|&p| (0..=mm).map(|m| (m as f64 * p).cos()).sum()).collect();
        let sin_probe: Vec<f64> =
            grid.phi_nodes.iter().map(|&p| (1..mm).map(|m| (m as f64 * p).sin()).sum()).collect();
        let mut x = vec![0.0; nc * n];
        for c in 0..nc {
            for j in 0..nt {
                for p in 0..2 {
                    let probe = if p == 0 { &cos_probe } else { &sin_probe };
                    let off = c * n + j * np;
                    x[off..off + np].copy_from_slice(probe);
                    let y = op.apply(&x);
                    x[off..off + np].iter_mut().for_each(|v| *v = 0.0);
                    for c2 in 0..nc {
                        for i in 0..nt {
                            let o = c2 * n + i * np;
                            let (a, b) = row_modes(&grid, &y[o..o + np]);
                            for m in 0..=mm {
                                let pm = par(m);
                                if p >= pm {
                                    continue;
                                }
                                let col = (c * nt + j) * pm + p;
                                let row = (c2 * nt + i) * pm;
                                mats[m][(row, col)] = a[m];
                                if pm == 2 {
                                    mats[m][(row + 1, col)] = b[m];
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut blocks = Vec::with_capacity(mm + 1);
        for (m, mut a) in mats.into_iter().enumerate() {
            let pm = par(m);
            let bordered = border && pm == 1;
            if bordered {
                let d = nt;
                for j in 0..nt {
                    a[(d, j)] = grid.quad_weights[j];
                    a[(j, d)] = grid.quad_weights[j];
                }
            }
            let lu = a.clone().lu();
            if !lu.is_invertible() {
                return Err(Error::Singular(format!("azimuthal block m = {m}")));
            }
            let cond = lu_cond_estimate(&a, &lu);
            blocks.push(Block { parities: pm, bordered, lu, cond });
        }
        Ok(ModeBlocks { grid, ncomp: nc, blocks })
    }

    pub fn cond_estimate(&self) -> f64 {
        self.blocks.iter().map(|b| b.cond).fold(0.0, f64::max)
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let g = &self.grid;
        let (nt, np) = (g.n_theta, g.n_phi);
        let n = g.len();
        let nc = self.ncomp;
        let mm = g.nyquist();
        let mut coef_a = vec![vec![0.0; mm + 1]; nc * nt];
        let mut coef_b = vec![vec![0.0; mm + 1]; nc * nt];
        for c in 0..nc {
            for i in 0..nt {
                let o = c * n + i * np;
                let (a, b) = row_modes(g, &rhs[o..o + np]);
                coef_a[c * nt + i] = a;
                coef_b[c * nt + i] = b;
            }
        }
        let mut sol_a = vec![vec![0.0; mm + 1]; nc * nt];
        let mut sol_b = vec![vec![0.0; mm + 1]; nc * nt];
        for (m, blk) in self.blocks.iter().enumerate() {
            let pm = blk.parities;
            let d = nc * nt * pm + usize::from(blk.bordered);
            let mut v = DVector::zeros(d);
            for r in 0..nc * nt {
                v[r * pm] = coef_a[r][m];
                if pm == 2 {
                    v[r * pm + 1] = coef_b[r][m];
                }
            }
            let y = blk.lu.solve(&v).ok_or_else(|| Error::Singular(format!("mode {m}")))?;
            for r in 0..nc * nt {
                sol_a[r][m] = y[r * pm];
                if pm == 2 {
                    sol_b[r][m] = y[r * pm + 1];
                }
            }
        }
        let mut out = vec![0.0; nc * n];
        for c in 0..nc {
            for i in 0..nt {
                let row = row_synth(g, &sol_a[c * nt + i], &sol_b[c * nt + i]);
                let o = c * n + i * np;
                out[o..o + np].copy_from_slice(&row);
            }
        }
        Ok(out)
    }
}

/// Dense factorization of an arbitrary operator (small grids only).
pub struct DenseLu {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    cond: f64,
}

impl DenseLu {
    pub fn assemble(op: &dyn LinearOp) -> Result<DenseLu> {
        let d = op.dim();
        let mut a = DMatrix::zeros(d, d);
        let mut e = vec![0.0; d];
        for j in 0..d {
            e[j] = 1.0;
            let col = op.apply(&e);
            e[j] = 0.0;
            for (i, v) in col.iter().enumerate() {
                a[(i, j)] = *v;
            }
        }
        let lu = a.clone().lu();
        if !lu.is_invertible() {
            return Err(Error::Singular("dense operator".into()));
        }
        let cond = lu_cond_estimate(&a, &lu);
        Ok(DenseLu { lu, cond })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let v = DVector::from_column_slice(rhs);
        let y = self.lu.solve(&v).ok_or_else(|| Error::Singular("dense solve".into()))?;
        Ok(y.iter().copied().collect())
    }

    pub fn cond_estimate(&self) -> f64 {
        self.cond
    }
}

pub fn residual(op: &dyn LinearOp, x: &[f64], rhs: &[f64]) -> Vec<f64> {
    op.apply(x).iter().zip(rhs).map(|(a, f)| f - a).collect()
}

pub fn relative_residual(op: &dyn LinearOp, x: &[f64], rhs: &[f64]) -> f64 {
    let nf = norm2(rhs);
    let r = norm2(&residual(op, x, rhs));
    if nf == 0.0 {
        r
    } else {
        r / nf
    }
}

/// Solves `op x = rhs`.
///
/// * `axisymmetric`: coefficients are φ-independent, use the mode blocks.
/// * otherwise dense LU when small, else Richardson iteration
///   preconditioned by the mode blocks of `averaged`.
///
/// `x0` seeds the iterative paths; the direct paths refine from it.
pub fn solve(
    op: &dyn LinearOp,
    averaged: Option<&dyn LinearOp>,
    axisymmetric: bool,
    rhs: &[f64],
    x0: Option<&[f64]>,
    opts: &SolveOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    let rn = norm2(rhs);
    if rn == 0.0 {
        return Ok((vec![0.0; rhs.len()], SolveReport { method: "trivial".into(), ..Default::default() }));
    }
    enum Pre {
        Modes(ModeBlocks),
        Dense(DenseLu),
    }
    let (pre, method) = if axisymmetric {
        (Pre::Modes(ModeBlocks::assemble(op, false)?), "mode-block LU")
    } else if op.dim() <= opts.dense_limit {
        (Pre::Dense(DenseLu::assemble(op)?), "dense LU")
    } else {
        let avg = averaged.ok_or_else(|| {
            Error::Unsupported("non-axisymmetric operator on a large grid needs an averaged preconditioner".into())
        })?;
        (Pre::Modes(ModeBlocks::assemble(avg, false)?), "preconditioned Richardson")
    };
    let cond = match &pre {
        Pre::Modes(m) => m.cond_estimate(),
        Pre::Dense(d) => d.cond_estimate(),
    };
    if cond > opts.cond_limit {
        return Err(Error::IllConditioned(cond));
    }
    let psolve = |r: &[f64]| -> Result<Vec<f64>> {
        match &pre {
            Pre::Modes(m) => m.solve(r),
            Pre::Dense(d) => d.solve(r),
        }
    };
    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![0.0; rhs.len()],
    };
    let mut iters = 0;
    let mut rel;
    loop {
        let r = residual(op, &x, rhs);
        rel = norm2(&r) / rn;
        if rel <= opts.tol || iters >= opts.max_iter {
            break;
        }
        let dx = psolve(&r)?;
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        iters += 1;
        if iters >= 3 && method != "preconditioned Richardson" {
            let r = residual(op, &x, rhs);
            rel = norm2(&r) / rn;
            break;
        }
    }
    if !rel.is_finite() {
        return Err(Error::Singular("non-finite residual".into()));
    }
    if method == "preconditioned Richardson" && rel > opts.tol.max(opts.accept_residual) {
        return Err(Error::NonConvergence { iters, last: rel });
    }
    Ok((x, SolveReport { method: method.into(), residual_rel: rel, cond_estimate: cond, iterations: iters }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_roundtrip() {
        let g = SphereGrid::new(3, 10).unwrap();
        let row: Vec<f64> = g.phi_nodes.iter().map(|p| 1.0 + 2.0 * (3.0 * p).cos() - (2.0 * p).sin() + 0.5 * (5.0 * p).cos()).collect();
        let (a, b) = row_modes(&g, &row);
        assert!((a[0] - 1.0).abs() < 1e-14 && (a[3] - 2.0).abs() < 1e-14 && (b[2] + 1.0).abs() < 1e-14);
        assert!((a[5] - 0.5).abs() < 1e-14);
        let back = row_synth(&g, &a, &b);
        for (x, y) in back.iter().zip(&row) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}
