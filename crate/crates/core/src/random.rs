//! Real spherical harmonics and reproducible band-limited random fields.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calculus::{as_vector, grad, otimes_hat_nabla_oneform, star};
use crate::field::{OneForm, ScalarField, SymTF2Field, VectorField};
use crate::grid::SphereGrid;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Orthonormal associated Legendre functions P̄_l^m(cosθ) for l = m..=lmax.
fn legendre_column(m: usize, lmax: usize, x: f64) -> Vec<f64> {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        pmm *= ((2 * k + 1) as f64 / (2 * k) as f64).sqrt() * s;
    }
    let mut out = vec![0.0; lmax + 1];
    if m > lmax {
        return out;
    }
    out[m] = pmm;
    if m + 1 <= lmax {
        out[m + 1] = x * ((2 * m + 3) as f64).sqrt() * pmm;
    }
    for l in m + 2..=lmax {
        let lf = l as f64;
        let mf = m as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lp = lf - 1.0;
        let ap = ((4.0 * lp * lp - 1.0) / (lp * lp - mf * mf)).sqrt();
        out[l] = a * (x * out[l - 1] - out[l - 2] / ap);
    }
    out
}

/// Real orthonormal spherical harmonic: m > 0 uses cos(mφ), m < 0 sin(|m|φ).
pub fn real_ylm(l: usize, m: i64, theta: f64, phi: f64) -> f64 {
    let am = m.unsigned_abs() as usize;
    let p = legendre_column(am, l, theta.cos())[l];
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => p,
        std::cmp::Ordering::Greater => std::f64::consts::SQRT_2 * p * (am as f64 * phi).cos(),
        std::cmp::Ordering::Less => std::f64::consts::SQRT_2 * p * (am as f64 * phi).sin(),
    }
}

pub fn spherical_harmonic(grid: &Arc<SphereGrid>, l: usize, m: i64) -> ScalarField {
    ScalarField::from_scalar_fn(grid, |t, p| real_ylm(l, m, t, p))
}

/// Σ c_lm Y_lm over lmin ≤ l ≤ lmax with c_lm uniform in [−1, 1].
pub fn random_scalar(grid: &Arc<SphereGrid>, r: &mut impl Rng, lmin: usize, lmax: usize) -> ScalarField {
    let mut coeffs = Vec::new();
    for l in lmin..=lmax {
        for m in -(l as i64)..=(l as i64) {
            coeffs.push((l, m, r.gen_range(-1.0..1.0)));
        }
    }
    let n = grid.len();
    let mut data = vec![0.0; n];
    let np = grid.n_phi;
    for (i, &t) in grid.theta_nodes.iter().enumerate() {
        let x = t.cos();
        let cols: Vec<Vec<f64>> = (0..=lmax).map(|m| legendre_column(m, lmax, x)).collect();
        for (j, &p) in grid.phi_nodes.iter().enumerate() {
            let mut v = 0.0;
            for &(l, m, c) in &coeffs {
                let am = m.unsigned_abs() as usize;
                let pl = cols[am][l];
                v += c * match m.cmp(&0) {
                    std::cmp::Ordering::Equal => pl,
                    std::cmp::Ordering::Greater => std::f64::consts::SQRT_2 * pl * (am as f64 * p).cos(),
                    std::cmp::Ordering::Less => std::f64::consts::SQRT_2 * pl * (am as f64 * p).sin(),
                };
            }
            data[i * np + j] = v;
        }
    }
    ScalarField::from_data(grid, data).expect("shape")
}

/// ∇α + *∇β for random band-limited potentials.
pub fn random_oneform(grid: &Arc<SphereGrid>, r: &mut impl Rng, lmax: usize) -> OneForm {
    let a = random_scalar(grid, r, 1, lmax);
    let b = random_scalar(grid, r, 1, lmax);
    &grad(&a) + &star(&grad(&b))
}

pub fn random_vector(grid: &Arc<SphereGrid>, r: &mut impl Rng, lmax: usize) -> VectorField {
    as_vector(&random_oneform(grid, r, lmax))
}

/// ∇̊⊗̂∇α + ∇̊⊗̂(*∇β) for random band-limited potentials.
pub fn random_symtf(grid: &Arc<SphereGrid>, r: &mut impl Rng, lmax: usize) -> SymTF2Field {
    let a = random_scalar(grid, r, 2, lmax);
    let b = random_scalar(grid, r, 2, lmax);
    &otimes_hat_nabla_oneform(&grad(&a)) + &otimes_hat_nabla_oneform(&star(&grad(&b)))
}

/// Dyad (e_θ, e_φ) in ambient Cartesian components.
fn dyad(theta: f64, phi: f64) -> [[f64; 3]; 2] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [[ct * cp, ct * sp, -st], [-sp, cp, 0.0]]
}

/// Restriction of an ambient field whose Cartesian components are random
/// combinations of Y_lm, l ≤ lmax − 1; exact at every node.
pub fn random_oneform_ambient(grid: &Arc<SphereGrid>, r: &mut impl Rng, lmax: usize) -> OneForm {
    let comps: Vec<ScalarField> = (0..3).map(|_| random_scalar(grid, r, 0, lmax.saturating_sub(1))).collect();
    let n = grid.len();
    let mut out = vec![0.0; 2 * n];
    for k in 0..n {
        let e = dyad(grid.theta_nodes[k / grid.n_phi], grid.phi_nodes[k % grid.n_phi]);
        for a in 0..2 {
            out[a * n + k] = (0..3).map(|i| e[a][i] * comps[i].values()[k]).sum();
        }
    }
    OneForm::from_data(grid, out).expect("shape")
}

/// Trace-free restriction of a random ambient symmetric 2-tensor with
/// components of degree l ≤ lmax − 2; exact at every node.
pub fn random_symtf_ambient(grid: &Arc<SphereGrid>, r: &mut impl Rng, lmax: usize) -> SymTF2Field {
    let idx = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    let comps: Vec<ScalarField> = idx.iter().map(|_| random_scalar(grid, r, 0, lmax.saturating_sub(2))).collect();
    let n = grid.len();
    let mut out = vec![0.0; 2 * n];
    for k in 0..n {
        let e = dyad(grid.theta_nodes[k / grid.n_phi], grid.phi_nodes[k % grid.n_phi]);
        let mut m = [[0.0; 3]; 3];
        for (c, &(i, j)) in idx.iter().enumerate() {
            m[i][j] = comps[c].values()[k];
            m[j][i] = m[i][j];
        }
        let q = |a: usize, b: usize| -> f64 {
            (0..3).map(|i| (0..3).map(|j| e[a][i] * m[i][j] * e[b][j]).sum::<f64>()).sum()
        };
        out[k] = 0.5 * (q(0, 0) - q(1, 1));
        out[n + k] = q(0, 1);
    }
    SymTF2Field::from_data(grid, out).expect("shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::integrate_round;

    #[test]
    fn harmonics_are_orthonormal() {
        let g = SphereGrid::new(24, 32).unwrap();
        let list = [(0, 0), (1, 0), (1, 1), (2, -1), (3, 2), (5, -4)];
        for &(l1, m1) in &list {
            for &(l2, m2) in &list {
                let y1 = spherical_harmonic(&g, l1, m1);
                let y2 = spherical_harmonic(&g, l2, m2);
                let ip = integrate_round(&y1.mul(&y2));
                let ex = if (l1, m1) == (l2, m2) { 1.0 } else { 0.0 };
                assert!((ip - ex).abs() < 1e-12, "{l1} {m1} {l2} {m2}: {ip}");
            }
        }
    }
}
