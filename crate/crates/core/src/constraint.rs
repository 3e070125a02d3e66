//! Regular 4-tuples with ĝ = g̊, Ω = 1 and b = b̌ + ∇̊f by Picard iteration
//! on the κ-constraint equation
//!
//!   D − ℒ_b D = ½D² + ¼|∇̂⊗̂b|² − 4κ + 2κD − 2(ℒ_b log Ω)D + 4ℒ_b log Ω,  D = div b.
//!
//! Each step solves (1 − ℒ_{b_{i−1}})D̃ = ½D_{i−1}² + ¼|∇⊗̂b_{i−1}|² − 4κ̃ + 2κ_{i−1}D_{i−1}
//! at κ̃ = 0 and κ̃ = 1, fixes κ_i by ∫D̃ = 0, and recovers f_i from Δ̊f_i = D_i.

use serde::{Deserialize, Serialize};

use crate::calculus::{as_oneform, as_vector, dot_form, dot_symtf, grad, integrate_round};
use crate::elliptic::PoissonSolver;
use crate::error::{Error, Result};
use crate::field::{AnyField, ScalarField, VectorField};
use crate::hprofile::{h_grid, make_h_profile};
use crate::jet::ShiftJet;
use crate::lie::lie_scalar;
use crate::linalg::SolveOptions;
use crate::metric::ConformalMetric;
use crate::norms::{sobolev_norm_tensor, tensor_of};
use crate::seed::SeedData;
use crate::transport::{solve_affine_transport, AffineTransportProblem, HCoeff};
use crate::tuple::{PicardStep, RegularTuple};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PicardOptions {
    /// Stop when ‖D_i − D_{i−1}‖_{H²} ≤ tol.
    pub tol: f64,
    pub max_iter: usize,
    pub solve: SolveOptions,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { tol: 1e-12, max_iter: 200, solve: SolveOptions::default() }
    }
}

fn sobolev_h2(u: &ScalarField) -> f64 {
    sobolev_norm_tensor(&tensor_of(&AnyField::Scalar(u.clone())), 2).expect("order 2")
}

fn scalar_of(a: AnyField) -> ScalarField {
    match a {
        AnyField::Scalar(s) => s,
        _ => unreachable!("scalar transport"),
    }
}

/// Jet of b̌ + ∇̊f: the seed part as supplied, the gradient part from the grid.
pub fn shift_jet(seed_jet: &ShiftJet, f: &ScalarField) -> ShiftJet {
    if f.norm_inf() == 0.0 {
        return seed_jet.clone();
    }
    seed_jet.add(&ShiftJet::from_grid(&as_vector(&grad(f))))
}

pub fn picard_regular_tuple(seed: &SeedData, opts: &PicardOptions) -> Result<RegularTuple> {
    let grid = seed.grid().clone();
    if seed.jet.is_zero() {
        let mut t = RegularTuple::trivial(&grid);
        t.epsilon = seed.epsilon();
        t.gamma = seed.gamma();
        return Ok(t);
    }
    let poisson = PoissonSolver::new(&grid)?;
    let mut d_prev = ScalarField::zeros(&grid);
    let mut kappa_prev = 0.0;
    let mut f = ScalarField::zeros(&grid);
    let mut trace: Vec<PicardStep> = Vec::new();
    let mut converged = false;
    let mut last_inc = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let jet = shift_jet(&seed.jet, &f);
        let def = jet.deformation();
        let r0 = {
            let q = dot_symtf(&def, &def).scale(0.25);
            let dd = d_prev.mul(&d_prev).scale(0.5);
            &(&q + &dd) + &d_prev.scale(2.0 * kappa_prev)
        };
        let r1 = r0.add_const(-4.0);
        let solve = |rhs: &ScalarField| -> Result<(ScalarField, f64, f64)> {
            let p = AffineTransportProblem::with_jet(1.0, jet.scale(-1.0), HCoeff::Zero, AnyField::Scalar(rhs.clone()));
            match solve_affine_transport(&p, &opts.solve) {
                Ok(s) => Ok((scalar_of(s.u), s.smallness_margin, s.residual_rel)),
                Err(Error::Smallness { lhs, bound }) => Err(Error::PicardSmallness {
                    iterate: iter,
                    detail: format!("|grad b| = {lhs:.3e} exceeds 1/4 (bound {bound:.3e})"),
                }),
                Err(e) => Err(e),
            }
        };
        let (dt0, margin, res0) = solve(&r0)?;
        let (dt1, _, res1) = solve(&r1)?;
        let slope = &dt1 - &dt0;
        let mean_slope = integrate_round(&slope) / crate::calculus::round_area(&grid);
        let spread = slope.values().iter().map(|v| (v - mean_slope).abs()).fold(0.0, f64::max);
        let kappa = -integrate_round(&dt0) / integrate_round(&slope);
        let d = dt0.axpy(kappa, &slope);
        f = poisson.solve(&d)?;
        let inc = sobolev_h2(&(&d - &d_prev));
        let contraction = if trace.is_empty() || last_inc == 0.0 { None } else { Some(inc / last_inc) };
        trace.push(PicardStep {
            iter,
            kappa,
            increment_h2: inc,
            contraction,
            kappa_slope_mean: mean_slope,
            kappa_slope_spread: spread,
            smallness_margin: margin,
            solve_residual: res0.max(res1),
        });
        if !kappa.is_finite() || !inc.is_finite() {
            return Err(Error::NonConvergence { iters: iter, last: inc });
        }
        last_inc = inc;
        d_prev = d;
        kappa_prev = kappa;
        if inc <= opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { iters: opts.max_iter, last: last_inc });
    }
    let jet = shift_jet(&seed.jet, &f);
    let b = &seed.b_check + &as_vector(&grad(&f));
    let mut tuple = RegularTuple {
        metric: ConformalMetric::round(&grid),
        b,
        jet,
        kappa: kappa_prev,
        f_potential: f,
        residual: 0.0,
        iteration_trace: trace,
        epsilon: seed.epsilon(),
        gamma: seed.gamma(),
    };
    tuple.residual = verify_kappa_constraint(&tuple).l2_ray;
    Ok(tuple)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// L² residual of the D-form.
    pub l2_ray: f64,
    pub sup_ray: f64,
    /// L² residual of the u-form evaluated at u = −1 (multiplied by u²).
    pub l2_basic: f64,
    pub sup_basic: f64,
    /// sup |r_ray − r_basic|.
    pub form_difference: f64,
}

/// Pointwise residual of the D-form.
pub fn ray_residual(t: &RegularTuple) -> ScalarField {
    let d = t.div_b();
    let ld = lie_scalar(&t.jet, &d);
    let def = t.jet.nabla_hat_otimes(&t.metric);
    let q = t.metric.sq_norm_symtf(&def);
    let lo = t.lie_log_lapse();
    let k = t.kappa;
    let n = d.grid().len();
    let (dv, lv, qv, ov) = (d.values(), ld.values(), q.values(), lo.values());
    let r: Vec<f64> = (0..n)
        .map(|i| {
            dv[i] - lv[i] - 0.5 * dv[i] * dv[i] - 0.25 * qv[i] + 4.0 * k - 2.0 * k * dv[i] + 2.0 * ov[i] * dv[i]
                - 4.0 * ov[i]
        })
        .collect();
    ScalarField::from_data(d.grid(), r).expect("shape")
}

/// Pointwise residual of the u-form
///   (−u)⁻¹D − ℒ_bD − ½D² − ¼|∇̂⊗̂b|² + 4κ/u² − 2κ(−u)⁻¹D − 4(−u)⁻¹ℒ_b log Ω + 2(ℒ_b log Ω)D
/// for the self-similar rescaling b(u) = b/(−u), multiplied by u².
pub fn basic_residual(t: &RegularTuple, u: f64) -> Result<ScalarField> {
    if !(u < 0.0) {
        return Err(Error::Config(format!("u must be negative, got {u}")));
    }
    let s = 1.0 / (-u);
    let jet = t.jet.scale(s);
    let d = jet.div_hat(&t.metric);
    let ld = dot_form(&as_oneform(&jet.b), &grad(&d));
    let def = jet.nabla_hat_otimes(&t.metric);
    let q = dot_symtf(&def, &def).mul(&t.metric.em2phi().mul(&t.metric.em2phi()));
    let lo = dot_form(&as_oneform(&jet.b), &grad(&t.metric.log_lapse));
    let k = t.kappa;
    let uu = u * u;
    let r: Vec<f64> = (0..d.grid().len())
        .map(|i| {
            let (dv, lv, qv, ov) = (d.values()[i], ld.values()[i], q.values()[i], lo.values()[i]);
            uu * (s * dv - lv - 0.5 * dv * dv - 0.25 * qv + 4.0 * k / uu - 2.0 * k * s * dv - 4.0 * s * ov
                + 2.0 * ov * dv)
        })
        .collect();
    ScalarField::from_data(d.grid(), r)
}

pub fn verify_kappa_constraint(t: &RegularTuple) -> ConstraintReport {
    let r1 = ray_residual(t);
    let r2 = basic_residual(t, -1.0).expect("u = -1");
    let l2 = |r: &ScalarField| integrate_round(&r.mul(r)).max(0.0).sqrt();
    ConstraintReport {
        l2_ray: l2(&r1),
        sup_ray: r1.norm_inf(),
        l2_basic: l2(&r2),
        sup_basic: r2.norm_inf(),
        form_difference: r1.max_abs_diff(&r2),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub epsilon: f64,
    pub gamma: f64,
    pub kappa: f64,
    /// ε²/16 · I_grid.
    pub kappa_predicted: f64,
    pub kappa_deviation: f64,
    /// The same prediction with the piecewise-quadrature I.
    pub kappa_predicted_exact_i: f64,
    pub integral_a2_grid: f64,
    pub integral_a2: f64,
    /// sup |div b − ε²a²/2 + ε²I_grid/4|.
    pub div_b_deviation: f64,
    /// min(−div b) + γ²ε² (the lower bound says this is ≥ −Cε^{2.5}).
    pub neg_div_margin: f64,
    /// ‖b − b̌ − ε²h_grid∂_θ‖_{H³}.
    pub e_norm_h3: f64,
    /// The same with the closed-form h.
    pub e_norm_h3_closed_form: f64,
    /// ‖f‖_{H^j} for j = 0..=4.
    pub f_norms: Vec<f64>,
}

pub fn asymptotic_diagnostics(t: &RegularTuple, seed: &SeedData) -> Result<AsymptoticReport> {
    let grid = t.grid().clone();
    let eps = seed.epsilon();
    let gam = seed.gamma();
    let ig = seed.integral_a2_grid;
    let d = t.div_b();
    let a2 = seed.a_profile.mul(&seed.a_profile);
    let pred = a2.map(|v| eps * eps * (0.5 * v - 0.25 * ig));
    let div_b_deviation = d.max_abs_diff(&pred);
    let neg_div_margin = d.values().iter().map(|v| -v).fold(f64::INFINITY, f64::min) + gam * gam * eps * eps;
    let e_of = |h: &ScalarField| -> Result<f64> {
        let r = &t.b - &seed.b_check;
        let mut e = r;
        let hc: Vec<f64> = h.values().iter().map(|v| eps * eps * v).collect();
        for (x, hv) in e.comp_mut(0).iter_mut().zip(&hc) {
            *x -= hv;
        }
        sobolev_norm_tensor(&tensor_of(&AnyField::Vector(e)), 3)
    };
    let hg = h_grid(&grid, seed)?;
    let hp = make_h_profile(seed);
    let f_t = tensor_of(&AnyField::Scalar(t.f_potential.clone()));
    let f_norms = crate::norms::derivative_norms(&f_t, 4)?
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v * v;
            Some(acc.sqrt())
        })
        .collect();
    Ok(AsymptoticReport {
        epsilon: eps,
        gamma: gam,
        kappa: t.kappa,
        kappa_predicted: eps * eps * ig / 16.0,
        kappa_deviation: (t.kappa - eps * eps * ig / 16.0).abs(),
        kappa_predicted_exact_i: eps * eps * seed.integral_a2 / 16.0,
        integral_a2_grid: ig,
        integral_a2: seed.integral_a2,
        div_b_deviation,
        neg_div_margin,
        e_norm_h3: e_of(&hg)?,
        e_norm_h3_closed_form: e_of(&hp.h)?,
        f_norms,
    })
}

/// b̌ + ∇̊f as a vector field.
pub fn shift_from_potential(seed: &SeedData, f: &ScalarField) -> VectorField {
    &seed.b_check + &as_vector(&grad(f))
}
