//! Characteristic data on {u = −1}: η^△, X = Ω⁻¹trχ^△, the v-family
//! Ω⁻¹χ̂^▷ and the outgoing pair (φ^out, ĝ̂^out) in v̂ = (1−2κ)⁻¹v^{1−2κ}.
//!
//! The outgoing system is pointwise in the angles. With g^out = e^{2φ}ĝ̂ and
//! det ĝ̂ = det ĝ it reads
//!
//!   dĝ̂/dv̂ = 2Ω̃²e^{−2φ} tf_ĝ̂ χ,   φ″ + φ′² = −½Ω̃⁴e^{−4φ}|tf_ĝ̂ χ|²_ĝ̂,
//!
//! with φ(0) = 0 and φ′(0) = ½Ω̃²X.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::calculus::{as_oneform, dot_form, grad, nabla, otimes_hat};
use crate::error::{Error, Result};
use crate::field::{AnyField, Field, OneForm, ScalarField, SymTF2Field, Tensor};
use crate::axisym::{seed_model, SeedModel};
use crate::jet::{OneFormJet, ShiftJet};
use crate::linalg::SolveOptions;
use crate::metric::{gauss_curvature, ConformalMetric};
use crate::norms::{sobolev_norm, sobolev_norm_tensor};
use crate::ode::{hermite, locate, pchip_slopes, rk4_step};
use crate::transport::{
    l2_norm, ladder_s, solve_affine_transport, solve_kappa_singular, solve_kappa_singular_evolution,
    AffineTransportProblem, EvolutionFamily, EvolutionOptions, EvolutionSample, HCoeff, KappaOp,
    KappaSingularProblem,
};
use crate::tuple::RegularTuple;

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa >= 0.0 && kappa < 0.5) {
        return Err(Error::KappaRange(kappa));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HatV {
    /// v ↦ v̂
    Forward,
    /// v̂ ↦ v
    Inverse,
}

/// v̂ = (1−2κ)⁻¹v^{1−2κ} and its inverse; dv/dv̂ = v^{2κ}.
pub fn hat_v_transform(kappa: f64, x: f64, dir: HatV) -> Result<f64> {
    check_kappa(kappa)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Config(format!("v must be finite and non-negative, got {x}")));
    }
    let p = 1.0 - 2.0 * kappa;
    Ok(match dir {
        HatV::Forward => x.powf(p) / p,
        HatV::Inverse => (p * x).powf(1.0 / p),
    })
}

fn oneform_of(a: AnyField) -> OneForm {
    match a {
        AnyField::OneForm(w) => w,
        _ => unreachable!("one-form transport"),
    }
}

fn scalar_of(a: AnyField) -> ScalarField {
    match a {
        AnyField::Scalar(s) => s,
        _ => unreachable!("scalar transport"),
    }
}

/// b^c∇_cω_a + ω_c∇_a b^c, written out.
fn lie_oneform_direct(jet: &ShiftJet, w: &OneForm) -> OneForm {
    let g = w.grid();
    let n = g.len();
    let dw = nabla(&Tensor::from_rank1(w));
    let (b1, b2) = (jet.b.comp(0), jet.b.comp(1));
    let mut out = vec![0.0; 2 * n];
    for a in 0..2 {
        for k in 0..n {
            out[a * n + k] = b1[k] * dw.comp(a)[k]
                + b2[k] * dw.comp(2 + a)[k]
                + jet.nabla.comp(2 * a)[k] * w.comp(0)[k]
                + jet.nabla.comp(2 * a + 1)[k] * w.comp(1)[k];
        }
    }
    Field::from_data(g, out).expect("shape")
}

#[derive(Clone, Debug)]
pub struct TransportedField<T> {
    pub value: T,
    /// Re-substituted defect ‖LHS − RHS‖/‖RHS‖ (absolute when RHS = 0).
    pub residual: f64,
    pub solve_residual: f64,
    pub smallness_margin: f64,
}

/// −2∇(ℒ_b log Ω) + div_ĝ(∇̂⊗̂b) − ½∇(div_ĝ b).
pub fn eta_rhs(t: &RegularTuple) -> OneForm {
    let m = &t.metric;
    let mut r = t.jet.div_hat_deformation(m).axpy(-0.5, &t.jet.grad_div_hat(m));
    let lap = t.lie_log_lapse();
    if lap.norm_inf() > 0.0 {
        r = r.axpy(-2.0, &grad(&lap));
    }
    r
}

fn rel(defect: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        defect / scale
    } else {
        defect
    }
}

/// (−2 − div b)η − ℒ_bη − RHS, relative.
pub fn eta_residual(t: &RegularTuple, eta: &OneForm) -> f64 {
    let rhs = eta_rhs(t);
    let lhs = &eta.mul_scalar(&t.div_b().add_const(2.0)).scale(-1.0) - &lie_oneform_direct(&t.jet, eta);
    rel(l2_norm(&AnyField::OneForm(&lhs - &rhs)), l2_norm(&AnyField::OneForm(rhs)))
}

/// (−2 − div b)η^△ − ℒ_bη^△ = −2∇(ℒ_b log Ω̃) + ∇^B(∇̂⊗̂b)_BA − ½∇div b.
pub fn compute_eta_triangle(t: &RegularTuple, opts: &SolveOptions) -> Result<TransportedField<OneForm>> {
    let rhs = eta_rhs(t);
    let h = t.div_b().scale(-1.0);
    let p = AffineTransportProblem::with_jet(-2.0, t.jet.scale(-1.0), HCoeff::Scalar(h), AnyField::OneForm(rhs));
    let s = solve_affine_transport(&p, opts)?;
    let eta = oneform_of(s.u);
    Ok(TransportedField {
        residual: eta_residual(t, &eta),
        value: eta,
        solve_residual: s.residual_rel,
        smallness_margin: s.smallness_margin,
    })
}

/// Derivative data of η^△: the closed-form profile when a seed model is
/// given, with the grid differentiating only η^△ minus that profile.
pub fn eta_jet(eta: &OneForm, model: Option<&SeedModel>) -> OneFormJet {
    match model {
        Some(m) => OneFormJet::with_model(eta, &m.eta(eta.grid())),
        None => OneFormJet::from_grid(eta),
    }
}

/// −2K + 2div η + 2|η|².
pub fn trchi_rhs(t: &RegularTuple, eta: &OneFormJet) -> ScalarField {
    let m = &t.metric;
    let k = gauss_curvature(m).scale(-2.0);
    let d = eta.div_hat(m);
    let q = m.sq_norm_oneform(&eta.w);
    &(&k + &d.scale(2.0)) + &q.scale(2.0)
}

/// div b − 2κ + 2ℒ_b log Ω̃.
pub fn trchi_coefficient(t: &RegularTuple) -> ScalarField {
    t.div_b().add_const(-2.0 * t.kappa).axpy(2.0, &t.lie_log_lapse())
}

pub fn trchi_residual(t: &RegularTuple, eta: &OneFormJet, x: &ScalarField) -> f64 {
    let rhs = trchi_rhs(t, eta);
    let bx = dot_form(&as_oneform(&t.jet.b), &grad(x));
    let lhs = &bx + &x.mul(&trchi_coefficient(t).add_const(-1.0));
    rel(l2_norm(&AnyField::Scalar(&lhs - &rhs)), l2_norm(&AnyField::Scalar(rhs)))
}

/// ℒ_bX + X(−1 + div b − 2κ + 2ℒ_b log Ω̃) = −2K + 2div η^△ + 2|η^△|².
pub fn compute_trchi_triangle(t: &RegularTuple, eta: &OneFormJet, opts: &SolveOptions) -> Result<TransportedField<ScalarField>> {
    let rhs = trchi_rhs(t, eta);
    let p = AffineTransportProblem::with_jet(-1.0, t.jet.clone(), HCoeff::Scalar(trchi_coefficient(t)), AnyField::Scalar(rhs));
    let s = solve_affine_transport(&p, opts)?;
    let x = scalar_of(s.u);
    Ok(TransportedField {
        residual: trchi_residual(t, eta, &x),
        value: x,
        solve_residual: s.residual_rel,
        smallness_margin: s.smallness_margin,
    })
}

/// ∇̂⊗̂η + η⊗̂η − ½X(∇̂⊗̂b).
pub fn chihat_source(t: &RegularTuple, eta: &OneFormJet, trchi: &ScalarField) -> SymTF2Field {
    let m = &t.metric;
    let a = &eta.nabla_hat_otimes(m) + &otimes_hat(&eta.w, &eta.w);
    a.axpy(-0.5, &t.jet.nabla_hat_otimes(m).mul_scalar(trchi))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChihatOptions {
    pub evolution: EvolutionOptions,
    /// Exponent k of the weight (1 + |log(v/v̄)|)^{−k}.
    pub log_weight_k: u32,
    /// Sobolev order of the reported norms.
    pub sobolev_order: usize,
}

impl Default for ChihatOptions {
    fn default() -> Self {
        ChihatOptions { evolution: EvolutionOptions::default(), log_weight_k: 1, sobolev_order: 2 }
    }
}

#[derive(Clone, Debug)]
pub struct ChihatFamily {
    pub family: EvolutionFamily,
    /// Solution of 𝓛f − 2κf + 2(ℒ_b log Ω̃)f = H.
    pub stationary: SymTF2Field,
    pub stationary_residual: f64,
    pub source: SymTF2Field,
    /// ‖f(v)‖_{H^k} at the samples.
    pub norms: Vec<f64>,
    /// ‖v∂_v f(v)‖_{H^k} at the samples.
    pub vdv_norms: Vec<f64>,
    /// ‖f(v) − f_stat‖/‖f_stat‖ at the samples.
    pub stationary_distance: Vec<f64>,
    /// sup_v (1 + |log(v/v̄)|)^{−k}(‖f‖ + ‖v∂_v f‖).
    pub log_weighted_sup: f64,
}

/// The identically vanishing family on the ladder of [v_min, v̄].
pub fn zero_family(t: &RegularTuple, v_bar: f64, v_min: f64) -> EvolutionFamily {
    let g = t.grid();
    let s = ladder_s((v_bar / v_min).ln());
    let last = s.len() - 1;
    let samples = s
        .iter()
        .enumerate()
        .map(|(i, &s)| EvolutionSample {
            v: if i == last { v_min } else { v_bar * (-s).exp() },
            s,
            f: SymTF2Field::zeros(g),
            pde_residual: 0.0,
        })
        .collect();
    EvolutionFamily { v_bar, v_min, kappa: t.kappa, samples, steps: 0, max_pde_residual: 0.0, energy_max_increase: None }
}

/// v∂_v f + 𝓛f − 2κf + 2(ℒ_b log Ω̃)f = H with f(v̄) = 0, marched to v_min.
pub fn compute_chihat_evolution(
    t: &RegularTuple,
    eta: &OneFormJet,
    trchi: &ScalarField,
    v_bar: f64,
    v_min: f64,
    o: &ChihatOptions,
    solve: &SolveOptions,
) -> Result<ChihatFamily> {
    let src = chihat_source(t, eta, trchi);
    let g = t.grid();
    let m = &t.metric;
    let sob = |f: &SymTF2Field| sobolev_norm(&AnyField::SymTF2(f.clone()), o.sobolev_order, m);
    if t.kappa == 0.0 && src.norm_inf() == 0.0 {
        if !(v_min > 0.0 && v_min < v_bar) {
            return Err(Error::Config(format!("need 0 < v_min < v_bar, got v_min = {v_min}, v_bar = {v_bar}")));
        }
        let family = zero_family(t, v_bar, v_min);
        let k = family.samples.len();
        return Ok(ChihatFamily {
            family,
            stationary: SymTF2Field::zeros(g),
            stationary_residual: 0.0,
            source: src,
            norms: vec![0.0; k],
            vdv_norms: vec![0.0; k],
            stationary_distance: vec![0.0; k],
            log_weighted_sup: 0.0,
        });
    }
    let p = KappaSingularProblem { tuple: t.clone(), h: src.clone(), include_lapse_term: true };
    let family = solve_kappa_singular_evolution(&p, &SymTF2Field::zeros(g), v_bar, v_min, &o.evolution)?;
    let stat = solve_kappa_singular(&p, solve)?;
    let op = KappaOp::new(t, true, 0.0);
    let sn = m.l2_symtf(&stat.f).max(1e-300);
    let (mut norms, mut vdv_norms, mut dist) = (Vec::new(), Vec::new(), Vec::new());
    let mut sup = 0.0f64;
    for smp in &family.samples {
        let n0 = sob(&smp.f)?;
        let vdv = &src - &op.apply_field(&smp.f);
        let n1 = sob(&vdv)?;
        let w = (1.0 + smp.s.abs()).powi(-(o.log_weight_k as i32));
        sup = sup.max(w * (n0 + n1));
        norms.push(n0);
        vdv_norms.push(n1);
        dist.push(m.l2_symtf(&(&smp.f - &stat.f)) / sn);
    }
    Ok(ChihatFamily {
        family,
        stationary: stat.f,
        stationary_residual: stat.residual_rel,
        source: src,
        norms,
        vdv_norms,
        stationary_distance: dist,
        log_weighted_sup: sup,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutgoingOptions {
    /// Steps per factor of two in v̂ on the logarithmic segment.
    pub steps_per_octave: usize,
    /// Uniform steps on [0, v̂(v_min)] where χ̂ is held at its v_min value.
    pub initial_steps: usize,
    /// |φ′| beyond this counts as Riccati blow-up.
    pub blowup_limit: f64,
    /// Store every n-th node of the logarithmic segment.
    pub store_every: usize,
    pub sobolev_order: usize,
}

impl Default for OutgoingOptions {
    fn default() -> Self {
        OutgoingOptions { steps_per_octave: 140, initial_steps: 64, blowup_limit: 1e8, store_every: 70, sobolev_order: 2 }
    }
}

#[derive(Clone, Debug)]
pub struct OutgoingSample {
    pub v_hat: f64,
    pub phi: ScalarField,
    pub dphi: ScalarField,
    /// ĝ̂^out in round-dyad components, index 2a + b.
    pub ghat: Tensor,
}

#[derive(Clone, Debug)]
pub struct OutgoingData {
    pub kappa: f64,
    pub v_hat_max: f64,
    pub samples: Vec<OutgoingSample>,
    pub steps: usize,
    /// max |dĝ̂/dv̂ − RHS| and |dφ/dv̂ − φ′| with derivatives by 5-point differences.
    pub ode_residual: f64,
    /// v̂ where `ode_residual` is attained.
    pub ode_residual_at: f64,
    /// max |Θ(v̂) − Θ(0) + Ω̃∫₀^v̂(½Θ² + ¼Ω̃⁻²|tf ∂g|²_g)| with Θ = ½Ω̃⁻¹∂_v̂ log det g^out.
    pub raychaudhuri_residual: f64,
    pub raychaudhuri_residual_at: f64,
    /// max |det ĝ̂/det ĝ − 1|.
    pub volume_deviation: f64,
    /// sup over samples of ‖ĝ̂ − ĝ‖_{H^k}.
    pub ghat_deviation: f64,
    /// sup over samples of ‖φ − log(1 + v̂)‖_{H^k}, the distance from the
    /// profile of the trivial data (X = 2, χ̂ = 0).
    pub phi_deviation: f64,
}

/// χ̂ at any v̂ by monotone cubic interpolation in s = log(v̄/v).
struct ChiSampler {
    kappa: f64,
    v_bar: f64,
    s: Vec<f64>,
    y: Vec<Vec<f64>>,
    d: Vec<Vec<f64>>,
}

impl ChiSampler {
    fn new(fam: &EvolutionFamily) -> ChiSampler {
        let s: Vec<f64> = fam.s_values();
        let y: Vec<Vec<f64>> = fam.samples.iter().map(|x| x.f.data().to_vec()).collect();
        let nd = y[0].len();
        let mut d = vec![vec![0.0; nd]; s.len()];
        let mut col = vec![0.0; s.len()];
        for j in 0..nd {
            for (i, c) in col.iter_mut().enumerate() {
                *c = y[i][j];
            }
            for (i, v) in pchip_slopes(&s, &col).into_iter().enumerate() {
                d[i][j] = v;
            }
        }
        ChiSampler { kappa: fam.kappa, v_bar: fam.v_bar, s, y, d }
    }

    fn at(&self, v_hat: f64) -> Vec<f64> {
        let v = hat_v_transform(self.kappa, v_hat, HatV::Inverse).unwrap_or(0.0);
        let s_last = *self.s.last().unwrap();
        let s = if v > 0.0 { (self.v_bar / v).ln().clamp(0.0, s_last) } else { s_last };
        if self.s.len() == 1 {
            return self.y[0].clone();
        }
        let i = locate(&self.s, s);
        let (x0, x1) = (self.s[i], self.s[i + 1]);
        (0..self.y[0].len())
            .map(|j| hermite(x0, x1, self.y[i][j], self.y[i + 1][j], self.d[i][j], self.d[i + 1][j], s))
            .collect()
    }
}

/// 2×2 symmetric helpers on (g11, g12, g22).
fn inv(g: [f64; 3]) -> [f64; 3] {
    let det = g[0] * g[2] - g[1] * g[1];
    [g[2] / det, -g[1] / det, g[0] / det]
}

/// tr(G⁻¹A) for symmetric A.
fn trace_with(gi: [f64; 3], a: [f64; 3]) -> f64 {
    gi[0] * a[0] + 2.0 * gi[1] * a[1] + gi[2] * a[2]
}

/// tr(G⁻¹AG⁻¹A) for symmetric A.
fn sq_with(gi: [f64; 3], a: [f64; 3]) -> f64 {
    // M = G⁻¹A
    let m00 = gi[0] * a[0] + gi[1] * a[1];
    let m01 = gi[0] * a[1] + gi[1] * a[2];
    let m10 = gi[1] * a[0] + gi[2] * a[1];
    let m11 = gi[1] * a[1] + gi[2] * a[2];
    m00 * m00 + 2.0 * m01 * m10 + m11 * m11
}

fn tf_with(g: [f64; 3], gi: [f64; 3], a: [f64; 3]) -> [f64; 3] {
    let t = 0.5 * trace_with(gi, a);
    [a[0] - t * g[0], a[1] - t * g[1], a[2] - t * g[2]]
}

struct OutgoingRhs<'a> {
    n: usize,
    om2: &'a [f64],
    /// e^{2φ} of ĝ = e^{2φ}g̊, the initial ĝ̂.
    e2: &'a [f64],
}

impl OutgoingRhs<'_> {
    /// ĝ̂ = ĝ + Δ at point k.
    fn metric(&self, y: &[f64], k: usize) -> [f64; 3] {
        let n = self.n;
        [self.e2[k] + y[k], y[n + k], self.e2[k] + y[2 * n + k]]
    }

    /// log(det ĝ̂/det ĝ), accurate when Δ is small.
    fn log_det_ratio(&self, y: &[f64], k: usize) -> f64 {
        let n = self.n;
        let (d11, d12, d22) = (y[k], y[n + k], y[2 * n + k]);
        let e = self.e2[k];
        ((e * (d11 + d22) + d11 * d22 - d12 * d12) / (e * e)).ln_1p()
    }

    /// d/dv̂ of the state [Δ11, Δ12, Δ22, φ, φ′] at every point.
    fn eval(&self, y: &[f64], chi: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; 5 * n];
        for k in 0..n {
            let g = self.metric(y, k);
            let gi = inv(g);
            let (phi, dphi) = (y[3 * n + k], y[4 * n + k]);
            let c = [chi[k], chi[n + k], -chi[k]];
            let t = tf_with(g, gi, c);
            let w = 2.0 * self.om2[k] * (-2.0 * phi).exp();
            out[k] = w * t[0];
            out[n + k] = w * t[1];
            out[2 * n + k] = w * t[2];
            out[3 * n + k] = dphi;
            let o4 = self.om2[k] * self.om2[k] * (-4.0 * phi).exp();
            out[4 * n + k] = -dphi * dphi - 0.5 * o4 * sq_with(gi, t);
        }
        out
    }
}

/// Nodes of one integration segment: σ = v̂ or σ = log v̂, uniform in σ.
#[derive(Clone, Copy)]
struct Segment {
    log: bool,
    s0: f64,
    s1: f64,
    n: usize,
}

impl Segment {
    fn v_hat(&self, sigma: f64) -> f64 {
        if self.log {
            sigma.exp()
        } else {
            sigma
        }
    }
    fn jac(&self, sigma: f64) -> f64 {
        if self.log {
            sigma.exp()
        } else {
            1.0
        }
    }
}

const FD5: [[f64; 5]; 5] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
    [1.0, -8.0, 0.0, 8.0, -1.0],
    [-1.0, 6.0, -18.0, 10.0, 3.0],
    [3.0, -16.0, 36.0, -48.0, 25.0],
];

/// Node data for the integrated Raychaudhuri check.
struct NodeQ {
    v_hat: f64,
    theta: Vec<f64>,
    /// (½Θ² + ¼Ω̃⁻²|tf ∂g|²)·dv̂/dσ
    q: Vec<f64>,
}

struct Checker<'a> {
    n: usize,
    om2: &'a [f64],
    theta0: Vec<f64>,
    ode_res: f64,
    ray_res: f64,
    ode_at: f64,
    ray_at: f64,
    /// cumulative ∫q dσ at the last emitted node
    carry: Vec<f64>,
}

impl Checker<'_> {
    /// Derivatives at window position p (nodes w[0..5], spacing h).
    fn node(&mut self, w: &VecDeque<(f64, Vec<f64>)>, p: usize, h: f64, seg: &Segment, rhs: &OutgoingRhs, chi: &ChiSampler) -> NodeQ {
        let n = self.n;
        let (sigma, y) = (&w[p].0, &w[p].1);
        let vh = seg.v_hat(*sigma);
        let jac = seg.jac(*sigma);
        let deriv = |f: &dyn Fn(&[f64], usize) -> f64, k: usize| -> f64 {
            let mut acc = 0.0;
            for (j, c) in FD5[p].iter().enumerate() {
                acc += c * f(&w[j].1, k);
            }
            acc / (12.0 * h * jac)
        };
        let f = rhs.eval(y, &chi.at(vh));
        let mut theta = vec![0.0; n];
        let mut q = vec![0.0; n];
        for k in 0..n {
            let mut r = 0.0f64;
            for c in 0..3 {
                let d = deriv(&|st, k| st[c * n + k], k);
                r = r.max((d - f[c * n + k]).abs());
            }
            let dphi = deriv(&|st, k| st[3 * n + k], k);
            r = r.max((dphi - y[4 * n + k]).abs());
            if r > self.ode_res {
                self.ode_res = r;
                self.ode_at = vh;
            }

            let om = self.om2[k].sqrt();
            // log det g^out = 4φ + log det ĝ + log(det ĝ̂/det ĝ)
            let ldet = deriv(&|st, k| 4.0 * st[3 * n + k] + rhs.log_det_ratio(st, k), k);
            // ∂(e^{2φ}ĝ̂) = e^{2φ}(2φ′ĝ̂ + ∂Δ), every piece differenced on small data
            let w = (2.0 * y[3 * n + k]).exp();
            let gh = rhs.metric(y, k);
            let dg = [
                w * (2.0 * dphi * gh[0] + deriv(&|st, k| st[k], k)),
                w * (2.0 * dphi * gh[1] + deriv(&|st, k| st[n + k], k)),
                w * (2.0 * dphi * gh[2] + deriv(&|st, k| st[2 * n + k], k)),
            ];
            let g = [w * gh[0], w * gh[1], w * gh[2]];
            let gi = inv(g);
            let tdg = tf_with(g, gi, dg);
            let th = 0.5 * ldet / om;
            theta[k] = th;
            q[k] = (0.5 * th * th + 0.25 / self.om2[k] * sq_with(gi, tdg)) * jac;
        }
        NodeQ { v_hat: vh, theta, q }
    }

    fn emit(&mut self, nq: &NodeQ, integral: &[f64]) {
        for k in 0..self.n {
            let r = (nq.theta[k] - self.theta0[k] + self.om2[k].sqrt() * integral[k]).abs();
            if r > self.ray_res {
                self.ray_res = r;
                self.ray_at = nq.v_hat;
            }
        }
    }
}

/// Cumulative fourth-order quadrature over a stream of equally spaced nodes.
struct Cumulative {
    h: f64,
    qs: VecDeque<NodeQ>,
    /// index of the next node to receive
    next: usize,
    /// value at the last emitted node
    acc: Vec<f64>,
    emitted: usize,
}

impl Cumulative {
    fn push(&mut self, nq: NodeQ, last: bool, ck: &mut Checker) {
        let h = self.h / 24.0;
        self.qs.push_back(nq);
        let j = self.next;
        self.next += 1;
        let n = ck.n;
        let add = |acc: &mut Vec<f64>, w: [f64; 4], qs: &[&NodeQ; 4]| {
            for k in 0..n {
                acc[k] += h * (w[0] * qs[0].q[k] + w[1] * qs[1].q[k] + w[2] * qs[2].q[k] + w[3] * qs[3].q[k]);
            }
        };
        if j == 3 {
            let a = &self.acc.clone();
            ck.emit(&self.qs[0], a);
            let r = [&self.qs[0], &self.qs[1], &self.qs[2], &self.qs[3]];
            let mut acc = self.acc.clone();
            add(&mut acc, [9.0, 19.0, -5.0, 1.0], &r);
            ck.emit(&self.qs[1], &acc);
            add(&mut acc, [-1.0, 13.0, 13.0, -1.0], &r);
            ck.emit(&self.qs[2], &acc);
            self.acc = acc;
            self.emitted = 2;
        } else if j > 3 {
            let len = self.qs.len();
            let r = [&self.qs[len - 4], &self.qs[len - 3], &self.qs[len - 2], &self.qs[len - 1]];
            let mut acc = self.acc.clone();
            add(&mut acc, [-1.0, 13.0, 13.0, -1.0], &r);
            ck.emit(&self.qs[len - 2], &acc);
            self.acc = acc;
            self.emitted = j - 1;
            if self.qs.len() > 4 {
                self.qs.pop_front();
            }
        }
        if last {
            let len = self.qs.len();
            let r = [&self.qs[len - 4], &self.qs[len - 3], &self.qs[len - 2], &self.qs[len - 1]];
            let mut acc = self.acc.clone();
            add(&mut acc, [1.0, -5.0, 19.0, 9.0], &r);
            ck.emit(&self.qs[len - 1], &acc);
            self.acc = acc;
            self.emitted = j;
        }
    }
}

fn sample_of(grid: &std::sync::Arc<crate::grid::SphereGrid>, vh: f64, y: &[f64], e2: &[f64]) -> OutgoingSample {
    let n = grid.len();
    let sf = |c: usize| ScalarField::from_data(grid, y[c * n..(c + 1) * n].to_vec()).expect("shape");
    let g11: Vec<f64> = (0..n).map(|k| e2[k] + y[k]).collect();
    let g22: Vec<f64> = (0..n).map(|k| e2[k] + y[2 * n + k]).collect();
    let g12 = &y[n..2 * n];
    let data = [&g11[..], g12, g12, &g22[..]].concat();
    OutgoingSample { v_hat: vh, phi: sf(3), dphi: sf(4), ghat: Tensor { grid: grid.clone(), rank: 2, data } }
}

/// Integrates the outgoing system on [0, v̂_max].
pub fn build_outgoing_data(
    t: &RegularTuple,
    trchi: &ScalarField,
    chihat: &EvolutionFamily,
    v_hat_max: f64,
    o: &OutgoingOptions,
) -> Result<OutgoingData> {
    let kappa = t.kappa;
    check_kappa(kappa)?;
    let grid = t.grid().clone();
    let n = grid.len();
    let top = hat_v_transform(kappa, chihat.v_bar, HatV::Forward)?;
    if !(v_hat_max > 0.0) || v_hat_max > top * (1.0 + 1e-12) {
        return Err(Error::Coverage(format!("v_hat_max = {v_hat_max:e} outside (0, {top:e}] covered by the family")));
    }
    if o.initial_steps < 8 || o.steps_per_octave < 4 || o.store_every == 0 {
        return Err(Error::Config("outgoing: need initial_steps >= 8, steps_per_octave >= 4, store_every >= 1".into()));
    }
    let lo = hat_v_transform(kappa, chihat.v_min, HatV::Forward)?;
    let mut segs = Vec::new();
    if lo >= v_hat_max {
        segs.push(Segment { log: false, s0: 0.0, s1: v_hat_max, n: o.initial_steps });
    } else {
        segs.push(Segment { log: false, s0: 0.0, s1: lo, n: o.initial_steps });
        let (a, b) = (lo.ln(), v_hat_max.ln());
        let dt = std::f64::consts::LN_2 / o.steps_per_octave as f64;
        let k = ((b - a) / dt).ceil().max(8.0) as usize;
        segs.push(Segment { log: true, s0: a, s1: b, n: k });
    }

    let om2: Vec<f64> = t.metric.log_lapse.values().iter().map(|l| (2.0 * l).exp()).collect();
    let e2: Vec<f64> = t.metric.phi.values().iter().map(|p| (2.0 * p).exp()).collect();
    let mut y = vec![0.0; 5 * n];
    for k in 0..n {
        y[4 * n + k] = 0.5 * om2[k] * trchi.values()[k];
    }
    let chi = ChiSampler::new(chihat);
    let rhs = OutgoingRhs { n, om2: &om2, e2: &e2 };
    let theta0: Vec<f64> = (0..n).map(|k| om2[k].sqrt() * trchi.values()[k]).collect();
    let mut ck = Checker { n, om2: &om2, theta0, ode_res: 0.0, ray_res: 0.0, ode_at: 0.0, ray_at: 0.0, carry: vec![0.0; n] };

    let mut samples = vec![sample_of(&grid, 0.0, &y, &e2)];
    let mut steps = 0usize;
    let mut vol = 0.0f64;
    for seg in &segs {
        let h = (seg.s1 - seg.s0) / seg.n as f64;
        let mut f = |sigma: f64, st: &[f64]| -> Vec<f64> {
            let vh = seg.v_hat(sigma);
            let j = seg.jac(sigma);
            let mut d = rhs.eval(st, &chi.at(vh));
            d.iter_mut().for_each(|v| *v *= j);
            d
        };
        let mut win: VecDeque<(f64, Vec<f64>)> = VecDeque::with_capacity(5);
        win.push_back((seg.s0, y.clone()));
        let mut cum = Cumulative { h, qs: VecDeque::new(), next: 0, acc: ck.carry.clone(), emitted: 0 };
        for i in 0..seg.n {
            let s = seg.s0 + i as f64 * h;
            y = rk4_step(&mut f, s, &y, h);
            steps += 1;
            let s1 = if i + 1 == seg.n { seg.s1 } else { s + h };
            let vh = seg.v_hat(s1);
            for k in 0..n {
                let d = y[4 * n + k];
                let g = rhs.metric(&y, k);
                let det = g[0] * g[2] - g[1] * g[1];
                if !d.is_finite() || d.abs() > o.blowup_limit || !(det > 0.0) {
                    return Err(Error::RiccatiBlowup(vh));
                }
                vol = vol.max(rhs.log_det_ratio(&y, k).exp_m1().abs());
            }
            if win.len() == 5 {
                win.pop_front();
            }
            win.push_back((s1, y.clone()));
            let node = i + 1;
            let last = node == seg.n;
            if node == 4 {
                for p in 0..3 {
                    let nq = ck.node(&win, p, h, seg, &rhs, &chi);
                    cum.push(nq, false, &mut ck);
                }
            } else if node > 4 {
                let nq = ck.node(&win, 2, h, seg, &rhs, &chi);
                cum.push(nq, false, &mut ck);
            }
            if last {
                let nq = ck.node(&win, 3, h, seg, &rhs, &chi);
                cum.push(nq, false, &mut ck);
                let nq = ck.node(&win, 4, h, seg, &rhs, &chi);
                cum.push(nq, true, &mut ck);
            }
            let store = last || (seg.log && node % o.store_every == 0);
            if store {
                samples.push(sample_of(&grid, vh, &y, &e2));
            }
        }
        ck.carry = cum.acc;
    }

    let mut ghat_dev = 0.0f64;
    let mut phi_dev = 0.0f64;
    let g0 = sample_of(&grid, 0.0, &vec![0.0; 5 * n], &e2).ghat;
    for smp in &samples {
        let diff = Tensor {
            grid: grid.clone(),
            rank: 2,
            data: smp.ghat.data.iter().zip(&g0.data).map(|(a, b)| a - b).collect(),
        };
        ghat_dev = ghat_dev.max(sobolev_norm_tensor(&diff, o.sobolev_order)?);
        let d = smp.phi.add_const(-smp.v_hat.ln_1p());
        phi_dev = phi_dev.max(sobolev_norm_tensor(&Tensor::from_scalar(&d), o.sobolev_order)?);
    }
    Ok(OutgoingData {
        kappa,
        v_hat_max,
        samples,
        steps,
        ode_residual: ck.ode_res,
        ode_residual_at: ck.ode_at,
        raychaudhuri_residual: ck.ray_res,
        raychaudhuri_residual_at: ck.ray_at,
        volume_deviation: vol,
        ghat_deviation: ghat_dev,
        phi_deviation: phi_dev,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharDataOptions {
    pub v_bar: f64,
    pub v_min: f64,
    /// Defaults to v̂(v̄).
    pub v_hat_max: Option<f64>,
    pub chihat: ChihatOptions,
    pub outgoing: OutgoingOptions,
    pub solve: SolveOptions,
    /// Use the closed-form axisymmetric profiles of seed-built tuples for
    /// the derivatives of b and η^△.
    pub seed_model: bool,
}

impl Default for CharDataOptions {
    fn default() -> Self {
        CharDataOptions {
            v_bar: 1.0,
            v_min: 1e-6,
            v_hat_max: None,
            chihat: ChihatOptions::default(),
            outgoing: OutgoingOptions::default(),
            solve: SolveOptions::default(),
            seed_model: true,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CharDataReport {
    pub kappa: f64,
    pub seed_model_used: bool,
    pub eta_residual: f64,
    pub trchi_residual: f64,
    pub eta_h2: f64,
    pub trchi_minus_two_h2: f64,
    pub chihat_final_sup: f64,
    pub chihat_pde_residual: f64,
    pub chihat_stationary_residual: f64,
    pub chihat_vmin_distance: f64,
    pub chihat_log_weighted_sup: f64,
    pub outgoing_ode_residual: f64,
    pub raychaudhuri_residual: f64,
    pub volume_deviation: f64,
    pub ghat_deviation: f64,
    pub phi_out_deviation: f64,
}

#[derive(Clone, Debug)]
pub struct CharDataBundle {
    pub kappa: f64,
    pub v_bar: f64,
    pub eta_tri: OneForm,
    pub trchi_tri: ScalarField,
    pub chihat: ChihatFamily,
    pub outgoing: OutgoingData,
    pub report: CharDataReport,
}

impl CharDataBundle {
    /// The v-ladder of the χ̂ family.
    pub fn ladder(&self) -> Vec<f64> {
        self.chihat.family.samples.iter().map(|s| s.v).collect()
    }
}

/// The tuple chardata works with: the seed model's refined jet when enabled
/// and applicable.
pub fn chardata_tuple(t: &RegularTuple, use_model: bool) -> (RegularTuple, Option<SeedModel>) {
    let model = if use_model { seed_model(t) } else { None };
    match &model {
        Some(sm) => (RegularTuple { jet: sm.refined_jet(t), ..t.clone() }, model),
        None => (t.clone(), None),
    }
}

pub fn build_char_data(t: &RegularTuple, o: &CharDataOptions) -> Result<CharDataBundle> {
    let (tr, model) = chardata_tuple(t, o.seed_model);
    let t = &tr;
    let m: &ConformalMetric = &t.metric;
    let eta = compute_eta_triangle(t, &o.solve)?;
    let ej = eta_jet(&eta.value, model.as_ref());
    let x = compute_trchi_triangle(t, &ej, &o.solve)?;
    let ch = compute_chihat_evolution(t, &ej, &x.value, o.v_bar, o.v_min, &o.chihat, &o.solve)?;
    let vmax = match o.v_hat_max {
        Some(v) => v,
        None => hat_v_transform(t.kappa, o.v_bar, HatV::Forward)?,
    };
    let out = build_outgoing_data(t, &x.value, &ch.family, vmax, &o.outgoing)?;
    let order = o.chihat.sobolev_order;
    let report = CharDataReport {
        kappa: t.kappa,
        seed_model_used: model.is_some(),
        eta_residual: eta.residual,
        trchi_residual: x.residual,
        eta_h2: sobolev_norm(&AnyField::OneForm(eta.value.clone()), order, m)?,
        trchi_minus_two_h2: sobolev_norm(&AnyField::Scalar(x.value.add_const(-2.0)), order, m)?,
        chihat_final_sup: ch.family.samples[0].f.norm_inf(),
        chihat_pde_residual: ch.family.max_pde_residual,
        chihat_stationary_residual: ch.stationary_residual,
        chihat_vmin_distance: *ch.stationary_distance.last().unwrap_or(&0.0),
        chihat_log_weighted_sup: ch.log_weighted_sup,
        outgoing_ode_residual: out.ode_residual,
        raychaudhuri_residual: out.raychaudhuri_residual,
        volume_deviation: out.volume_deviation,
        ghat_deviation: out.ghat_deviation,
        phi_out_deviation: out.phi_deviation,
    };
    Ok(CharDataBundle {
        kappa: t.kappa,
        v_bar: o.v_bar,
        eta_tri: eta.value,
        trchi_tri: x.value,
        chihat: ch,
        outgoing: out,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SphereGrid;

    #[test]
    fn hat_v_round_trip() {
        for &k in &[0.0, 1e-4, 0.2] {
            for i in 1..50 {
                let v = i as f64 / 7.0;
                let vh = hat_v_transform(k, v, HatV::Forward).unwrap();
                let back = hat_v_transform(k, vh, HatV::Inverse).unwrap();
                assert!((back - v).abs() <= 1e-14 * v.max(1.0), "{k} {v}");
            }
        }
        assert_eq!(hat_v_transform(0.0, 0.3, HatV::Forward).unwrap(), 0.3);
        assert!(matches!(hat_v_transform(0.5, 1.0, HatV::Forward), Err(Error::KappaRange(_))));
    }

    #[test]
    fn trivial_tuple_gives_trivial_data() {
        let g = SphereGrid::new(12, 16).unwrap();
        let t = RegularTuple::trivial(&g);
        let eta = compute_eta_triangle(&t, &SolveOptions::default()).unwrap();
        assert_eq!(eta.value.norm_inf(), 0.0);
        let x = compute_trchi_triangle(&t, &eta_jet(&eta.value, None), &SolveOptions::default()).unwrap();
        assert!(x.value.add_const(-2.0).norm_inf() < 1e-13);
    }

    #[test]
    fn riccati_exact_without_shear() {
        let g = SphereGrid::new(6, 8).unwrap();
        let t = RegularTuple::trivial(&g);
        let fam = zero_family(&t, 1.0, 1e-6);
        // spatially varying φ′(0) through X
        let x = ScalarField::from_data(&g, g.sample(|th, p| 2.0 + 0.3 * th.cos() + 0.1 * p.sin())).unwrap();
        let out = build_outgoing_data(&t, &x, &fam, 1.0, &OutgoingOptions::default()).unwrap();
        let mut worst = 0.0f64;
        for smp in &out.samples {
            for (k, &xv) in x.values().iter().enumerate() {
                let ex = (0.5 * xv * smp.v_hat).ln_1p();
                worst = worst.max((smp.phi.values()[k] - ex).abs());
            }
            let n = g.len();
            for (c, want) in [1.0, 0.0, 0.0, 1.0].iter().enumerate() {
                assert!(smp.ghat.data[c * n..(c + 1) * n].iter().all(|v| v == want));
            }
        }
        assert!(worst < 1e-10, "{worst}");
        assert!(out.volume_deviation == 0.0);
        assert!(out.raychaudhuri_residual < 1e-7, "{}", out.raychaudhuri_residual);
    }
}
