//! Degenerate transport on S²: the affine operator c·u + ℒ_X u + h·u,
//! the κ-singular operator 𝓛 − 2κ (+ 2ℒ_b log Ω) and its v-evolution.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::rough_laplacian_symtf;
use crate::error::{Error, Result};
use crate::field::{AnyField, Field, FieldKind, ScalarField, SymTF2Field, Tensor};
use crate::grid::SphereGrid;
use crate::jet::ShiftJet;
use crate::lie::{lie_covariant, lie_scalar, lie_vector};
use crate::linalg::{self, LinearOp, SolveOptions, SolveReport};
use crate::metric::ConformalMetric;
use crate::norms::{l2_sq, tensor_of};
use crate::ode::rk4_step;
use crate::tuple::RegularTuple;

/// Zeroth-order bundle map of the affine operator.
#[derive(Clone, Debug)]
pub enum HCoeff {
    Zero,
    Scalar(ScalarField),
    /// h_a^b acting on one-forms and vectors, component index 2a + b.
    Matrix(Tensor),
}

impl HCoeff {
    fn sup(&self) -> f64 {
        match self {
            HCoeff::Zero => 0.0,
            HCoeff::Scalar(s) => s.norm_inf(),
            HCoeff::Matrix(t) => t.sq_norm_pointwise().iter().fold(0.0f64, |m, v| m.max(v.sqrt())),
        }
    }

    fn phi_variation(&self) -> f64 {
        match self {
            HCoeff::Zero => 0.0,
            HCoeff::Scalar(s) => s.phi_variation(),
            HCoeff::Matrix(t) => (0..4).map(|c| t.grid.phi_variation(t.comp(c))).fold(0.0, f64::max),
        }
    }

    fn phi_average(&self) -> HCoeff {
        match self {
            HCoeff::Zero => HCoeff::Zero,
            HCoeff::Scalar(s) => HCoeff::Scalar(s.phi_average()),
            HCoeff::Matrix(t) => {
                let mut a = t.clone();
                for c in 0..4 {
                    let avg = t.grid.phi_average(t.comp(c));
                    a.comp_mut(c).copy_from_slice(&avg);
                }
                HCoeff::Matrix(a)
            }
        }
    }
}

/// Lie derivative of a field of the given kind; for trace-free tensors the
/// trace-free part is kept.
pub fn lie_kind(jet: &ShiftJet, u: &AnyField) -> AnyField {
    match u {
        AnyField::Scalar(s) => AnyField::Scalar(lie_scalar(jet, s)),
        AnyField::Vector(x) => AnyField::Vector(lie_vector(jet, x)),
        AnyField::OneForm(w) => AnyField::OneForm(lie_covariant(jet, &Tensor::from_rank1(w)).to_rank1()),
        AnyField::SymTF2(f) => AnyField::SymTF2(lie_covariant(jet, &Tensor::from_symtf(f)).tf_part()),
    }
}

fn add_scaled(out: &mut [f64], a: f64, x: &[f64]) {
    for (o, v) in out.iter_mut().zip(x) {
        *o += a * v;
    }
}

fn l2_data(grid: &SphereGrid, kind: FieldKind, data: &[f64]) -> f64 {
    let n = grid.len();
    let w = if kind == FieldKind::SymTF2 { 2.0 } else { 1.0 };
    let mut sq = vec![0.0; n];
    for c in 0..kind.ncomp() {
        for (s, v) in sq.iter_mut().zip(&data[c * n..(c + 1) * n]) {
            *s += w * v * v;
        }
    }
    grid.integrate(&sq).max(0.0).sqrt()
}

/// c·u + ℒ_X u + h·u = F.
#[derive(Clone, Debug)]
pub struct AffineTransportProblem {
    pub c: f64,
    pub x: ShiftJet,
    pub h_coeff: HCoeff,
    pub rhs: AnyField,
}

#[derive(Clone, Debug)]
pub struct AffineSolution {
    pub u: AnyField,
    pub report: SolveReport,
    /// ‖K u − F‖_{L²}/‖F‖_{L²}.
    pub residual_rel: f64,
    pub smallness_margin: f64,
}

impl AffineTransportProblem {
    /// X is differentiated on the grid.
    pub fn new(c: f64, x: &crate::field::VectorField, h_coeff: HCoeff, rhs: AnyField) -> Self {
        AffineTransportProblem { c, x: ShiftJet::from_grid(x), h_coeff, rhs }
    }

    pub fn with_jet(c: f64, x: ShiftJet, h_coeff: HCoeff, rhs: AnyField) -> Self {
        AffineTransportProblem { c, x, h_coeff, rhs }
    }

    pub fn kind(&self) -> FieldKind {
        self.rhs.kind()
    }

    /// (‖∇X‖_{L∞} + ‖h‖_{L∞}, |c|/4).
    pub fn smallness(&self) -> (f64, f64) {
        (self.x.max_grad_norm() + self.h_coeff.sup(), self.c.abs() / 4.0)
    }

    fn check(&self) -> Result<()> {
        if !self.x.grid().same_shape(self.rhs.grid()) {
            return Err(Error::GridMismatch("transport: shift and right-hand side grids differ".into()));
        }
        if let HCoeff::Matrix(t) = &self.h_coeff {
            if t.rank != 2 {
                return Err(Error::RankMismatch { expected: "rank-2 matrix coefficient".into(), got: format!("rank {}", t.rank) });
            }
            if self.kind().rank() != 1 {
                return Err(Error::RankMismatch {
                    expected: "one-form or vector unknown for a matrix coefficient".into(),
                    got: self.kind().name().into(),
                });
            }
        }
        Ok(())
    }

    pub fn apply(&self, u: &AnyField) -> AnyField {
        let g = u.grid();
        let n = g.len();
        let mut out = lie_kind(&self.x, u).into_data();
        add_scaled(&mut out, self.c, u.data());
        match &self.h_coeff {
            HCoeff::Zero => {}
            HCoeff::Scalar(s) => {
                for c in 0..u.kind().ncomp() {
                    for k in 0..n {
                        out[c * n + k] += s.values()[k] * u.data()[c * n + k];
                    }
                }
            }
            HCoeff::Matrix(t) => {
                let d = u.data();
                for a in 0..2 {
                    for k in 0..n {
                        out[a * n + k] += t.comp(2 * a)[k] * d[k] + t.comp(2 * a + 1)[k] * d[n + k];
                    }
                }
            }
        }
        AnyField::from_kind_data(u.kind(), g, out).expect("shape")
    }
}

struct AffineOp<'a> {
    p: &'a AffineTransportProblem,
}

impl LinearOp for AffineOp<'_> {
    fn grid(&self) -> &Arc<SphereGrid> {
        self.p.x.grid()
    }
    fn ncomp(&self) -> usize {
        self.p.kind().ncomp()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let u = AnyField::from_kind_data(self.p.kind(), self.grid(), x.to_vec()).expect("shape");
        self.p.apply(&u).into_data()
    }
}

/// Picks the solve path from the azimuthal variation of the coefficients.
fn dispatch(
    op: &dyn LinearOp,
    avg: &dyn LinearOp,
    variation: f64,
    scale: f64,
    rhs: &[f64],
    x0: Option<&[f64]>,
    opts: &SolveOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    if variation == 0.0 {
        linalg::solve(op, None, true, rhs, x0, opts)
    } else if variation <= 1e-6 * scale.max(1e-300) {
        // nearly axisymmetric: the averaged blocks precondition a short Richardson loop
        let o = SolveOptions { dense_limit: 0, ..opts.clone() };
        linalg::solve(op, Some(avg), false, rhs, x0, &o)
    } else {
        linalg::solve(op, Some(avg), false, rhs, x0, opts)
    }
}

pub fn solve_affine_transport(p: &AffineTransportProblem, opts: &SolveOptions) -> Result<AffineSolution> {
    solve_affine_transport_from(p, None, opts)
}

/// As `solve_affine_transport`, starting the iterative paths from `x0`.
pub fn solve_affine_transport_from(
    p: &AffineTransportProblem,
    x0: Option<&AnyField>,
    opts: &SolveOptions,
) -> Result<AffineSolution> {
    p.check()?;
    let (lhs, bound) = p.smallness();
    if !(lhs <= bound) {
        return Err(Error::Smallness { lhs, bound });
    }
    let avg_p = AffineTransportProblem {
        c: p.c,
        x: p.x.phi_average(),
        h_coeff: p.h_coeff.phi_average(),
        rhs: p.rhs.clone(),
    };
    let variation = p.x.phi_variation().max(p.h_coeff.phi_variation());
    let scale = p.x.b.norm_inf().max(p.x.max_grad_norm()).max(p.h_coeff.sup()).max(p.c.abs());
    let op = AffineOp { p };
    let avg = AffineOp { p: &avg_p };
    let (x, report) = dispatch(&op, &avg, variation, scale, p.rhs.data(), x0.map(|u| u.data()), opts)?;
    let g = p.x.grid();
    let r = linalg::residual(&op, &x, p.rhs.data());
    let fnorm = l2_data(g, p.kind(), p.rhs.data());
    let rnorm = l2_data(g, p.kind(), &r);
    let residual_rel = if fnorm == 0.0 { rnorm } else { rnorm / fnorm };
    Ok(AffineSolution {
        u: AnyField::from_kind_data(p.kind(), g, x)?,
        report,
        residual_rel,
        smallness_margin: bound - lhs,
    })
}

/// 𝓛f = ℒ_b f − (∇̂⊗̂b)^C_(A f_B)C − ½(div_ĝ b) f.
///
/// The subtracted term is exactly the ĝ-trace of ℒ_b f, so 𝓛f is the
/// trace-free part of ℒ_b f minus ½(div b) f.
pub struct ScrL {
    jet: ShiftJet,
    half_div: ScalarField,
}

impl ScrL {
    pub fn new(jet: &ShiftJet, metric: &ConformalMetric) -> ScrL {
        ScrL { jet: jet.clone(), half_div: jet.div_hat(metric).scale(0.5) }
    }

    pub fn from_tuple(t: &RegularTuple) -> ScrL {
        ScrL::new(&t.jet, &t.metric)
    }

    pub fn apply(&self, f: &SymTF2Field) -> SymTF2Field {
        let l = lie_covariant(&self.jet, &Tensor::from_symtf(f)).tf_part();
        &l - &f.mul_scalar(&self.half_div)
    }

    pub fn phi_average(&self) -> ScrL {
        ScrL { jet: self.jet.phi_average(), half_div: self.half_div.phi_average() }
    }

    pub fn phi_variation(&self) -> f64 {
        self.jet.phi_variation().max(self.half_div.phi_variation())
    }
}

pub fn apply_scrl(tuple: &RegularTuple, f: &SymTF2Field) -> SymTF2Field {
    ScrL::from_tuple(tuple).apply(f)
}

/// A f = 𝓛f − 2κf + 2(ℒ_b log Ω)f + qΔ̊f.
pub struct KappaOp {
    scrl: ScrL,
    kappa: f64,
    lapse: Option<ScalarField>,
    q: f64,
    grid: Arc<SphereGrid>,
}

impl KappaOp {
    pub fn new(tuple: &RegularTuple, include_lapse_term: bool, q: f64) -> KappaOp {
        let lapse = if include_lapse_term {
            let l = tuple.lie_log_lapse();
            if l.norm_inf() == 0.0 {
                None
            } else {
                Some(l.scale(2.0))
            }
        } else {
            None
        };
        KappaOp { scrl: ScrL::from_tuple(tuple), kappa: tuple.kappa, lapse, q, grid: tuple.grid().clone() }
    }

    pub fn apply_field(&self, f: &SymTF2Field) -> SymTF2Field {
        let mut out = self.scrl.apply(f).axpy(-2.0 * self.kappa, f);
        if let Some(l) = &self.lapse {
            out = &out + &f.mul_scalar(l);
        }
        if self.q != 0.0 {
            out = out.axpy(self.q, &rough_laplacian_symtf(f));
        }
        out
    }

    fn phi_variation(&self) -> f64 {
        self.scrl.phi_variation().max(self.lapse.as_ref().map_or(0.0, |l| l.phi_variation()))
    }

    fn averaged(&self) -> KappaOp {
        KappaOp {
            scrl: self.scrl.phi_average(),
            kappa: self.kappa,
            lapse: self.lapse.as_ref().map(|l| l.phi_average()),
            q: self.q,
            grid: self.grid.clone(),
        }
    }

    fn scale(&self) -> f64 {
        self.scrl.jet.b.norm_inf().max(self.scrl.jet.max_grad_norm()).max(2.0 * self.kappa)
    }
}

impl LinearOp for KappaOp {
    fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }
    fn ncomp(&self) -> usize {
        2
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let f = Field::from_data(&self.grid, x.to_vec()).expect("shape");
        self.apply_field(&f).into_data()
    }
}

/// 𝓛f − 2κf (+ 2(ℒ_b log Ω)f) = H.
#[derive(Clone, Debug)]
pub struct KappaSingularProblem {
    pub tuple: RegularTuple,
    pub h: SymTF2Field,
    pub include_lapse_term: bool,
}

#[derive(Clone, Debug)]
pub struct KappaSolution {
    pub f: SymTF2Field,
    pub report: SolveReport,
    /// ‖A f − H‖_ĝ/‖H‖_ĝ.
    pub residual_rel: f64,
}

fn solve_kappa_op(op: &KappaOp, metric: &ConformalMetric, h: &SymTF2Field, x0: Option<&SymTF2Field>, opts: &SolveOptions) -> Result<KappaSolution> {
    let avg = op.averaged();
    let (x, report) = dispatch(op, &avg, op.phi_variation(), op.scale(), h.data(), x0.map(|f| f.data()), opts)?;
    let f = Field::from_data(&op.grid, x)?;
    let r = &op.apply_field(&f) - h;
    let hn = metric.l2_symtf(h);
    let rn = metric.l2_symtf(&r);
    Ok(KappaSolution { f, report, residual_rel: if hn == 0.0 { rn } else { rn / hn } })
}

pub fn solve_kappa_singular(p: &KappaSingularProblem, opts: &SolveOptions) -> Result<KappaSolution> {
    solve_kappa_singular_q(p, 0.0, None, opts)
}

/// The q-regularized equation 𝓛f − 2κf + qΔ̊f = H (q = 0 is the κ-singular one).
pub fn solve_kappa_singular_q(
    p: &KappaSingularProblem,
    q: f64,
    x0: Option<&SymTF2Field>,
    opts: &SolveOptions,
) -> Result<KappaSolution> {
    if !(p.tuple.kappa > 0.0) {
        return Err(Error::NonPositiveKappa(p.tuple.kappa));
    }
    if q < 0.0 {
        return Err(Error::Config(format!("regularization q must be non-negative, got {q}")));
    }
    p.h.check_grid(&p.tuple.b)?;
    let op = KappaOp::new(&p.tuple, p.include_lapse_term, q);
    solve_kappa_op(&op, &p.tuple.metric, &p.h, x0, opts)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QPathReport {
    pub qs: Vec<f64>,
    /// ‖f_q − f‖/‖f‖ for each q.
    pub distances: Vec<f64>,
    /// Polynomial extrapolation of f_q to q = 0, distance to f.
    pub extrapolated_distance: f64,
    /// |f_q − f_{q/10}|/(q‖f‖) for consecutive pairs (the Cauchy rate).
    pub cauchy_rates: Vec<f64>,
}

/// Solves at every q and extrapolates to q = 0 with the Lagrange weights
/// of the sample points.
pub fn q_path(p: &KappaSingularProblem, qs: &[f64], opts: &SolveOptions) -> Result<(SymTF2Field, QPathReport)> {
    let f0 = solve_kappa_singular(p, opts)?.f;
    let metric = &p.tuple.metric;
    let norm = metric.l2_symtf(&f0).max(1e-300);
    let mut sols = Vec::with_capacity(qs.len());
    for &q in qs {
        sols.push(solve_kappa_singular_q(p, q, None, opts)?.f);
    }
    let mut extrap = SymTF2Field::zeros(p.h.grid());
    for (i, fi) in sols.iter().enumerate() {
        let mut w = 1.0;
        for (j, &qj) in qs.iter().enumerate() {
            if j != i {
                w *= qj / (qj - qs[i]);
            }
        }
        extrap = extrap.axpy(w, fi);
    }
    let distances = sols.iter().map(|s| metric.l2_symtf(&(s - &f0)) / norm).collect();
    let cauchy_rates = sols
        .windows(2)
        .zip(qs.windows(2))
        .map(|(s, q)| metric.l2_symtf(&(&s[0] - &s[1])) / (q[0].abs() * norm))
        .collect();
    let extrapolated_distance = metric.l2_symtf(&(&extrap - &f0)) / norm;
    Ok((extrap, QPathReport { qs: qs.to_vec(), distances, extrapolated_distance, cauchy_rates }))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvolutionOptions {
    /// RK4 steps per factor-of-two interval in v.
    pub steps_per_octave: usize,
    /// Track e^{κs/5}‖f‖²_ĝ step by step (meaningful for H = 0).
    pub track_energy: bool,
}

impl Default for EvolutionOptions {
    fn default() -> Self {
        EvolutionOptions { steps_per_octave: 70, track_energy: false }
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionSample {
    pub v: f64,
    pub s: f64,
    pub f: SymTF2Field,
    /// ‖−∂_s f + A f − H‖_ĝ/(‖H‖_ĝ + ‖f‖_ĝ), ∂_s by a 4th-order difference.
    pub pde_residual: f64,
}

#[derive(Clone, Debug)]
pub struct EvolutionFamily {
    pub v_bar: f64,
    pub v_min: f64,
    pub kappa: f64,
    /// v = v̄, v̄/2, v̄/4, … and finally v_min, in decreasing v.
    pub samples: Vec<EvolutionSample>,
    pub steps: usize,
    pub max_pde_residual: f64,
    /// max over steps of E_{n+1}/E_n − 1 with E = e^{κs/5}‖f‖².
    pub energy_max_increase: Option<f64>,
}

impl EvolutionFamily {
    pub fn s_values(&self) -> Vec<f64> {
        self.samples.iter().map(|x| x.s).collect()
    }
}

fn fd_endpoint(states: &VecDeque<Vec<f64>>, h: f64, forward: bool) -> Vec<f64> {
    let c = [-25.0, 48.0, -36.0, 16.0, -3.0];
    let n = states[0].len();
    let mut d = vec![0.0; n];
    for (j, cj) in c.iter().enumerate() {
        let (st, sg) = if forward { (&states[j], 1.0) } else { (&states[4 - j], -1.0) };
        for k in 0..n {
            d[k] += sg * cj * st[k];
        }
    }
    d.iter_mut().for_each(|v| *v /= 12.0 * h);
    d
}

/// s-values of the ladder v̄, v̄/2, v̄/4, … closed off by s_max = log(v̄/v_min).
pub fn ladder_s(s_max: f64) -> Vec<f64> {
    let oct = std::f64::consts::LN_2;
    let full = (s_max / oct * (1.0 + 1e-14)).floor() as usize;
    let mut bounds: Vec<f64> = (0..=full).map(|k| k as f64 * oct).collect();
    if s_max - bounds[full] > 1e-12 * s_max.max(1.0) {
        bounds.push(s_max);
    } else {
        bounds[full] = s_max;
    }
    bounds
}

/// Marches v∂_v f + A f = H in s = −log(v/v̄) from f(v̄) = final_data.
pub fn solve_kappa_singular_evolution(
    p: &KappaSingularProblem,
    final_data: &SymTF2Field,
    v_bar: f64,
    v_min: f64,
    eopts: &EvolutionOptions,
) -> Result<EvolutionFamily> {
    if !(p.tuple.kappa > 0.0) {
        return Err(Error::NonPositiveKappa(p.tuple.kappa));
    }
    if !(v_min > 0.0 && v_min < v_bar) {
        return Err(Error::Config(format!("need 0 < v_min < v_bar, got v_min = {v_min}, v_bar = {v_bar}")));
    }
    if eopts.steps_per_octave < 4 {
        return Err(Error::Config("steps_per_octave must be at least 4".into()));
    }
    let grid = p.tuple.grid().clone();
    let metric = &p.tuple.metric;
    let op = KappaOp::new(&p.tuple, p.include_lapse_term, 0.0);
    let hdata = p.h.data().to_vec();
    let hnorm = metric.l2_symtf(&p.h);
    let kappa = p.tuple.kappa;
    let s_max = (v_bar / v_min).ln();
    let oct = std::f64::consts::LN_2;
    let bounds = ladder_s(s_max);

    let mut rhs = |_s: f64, y: &[f64]| -> Vec<f64> {
        let mut a = op.apply(y);
        for (x, h) in a.iter_mut().zip(&hdata) {
            *x -= h;
        }
        a
    };
    let residual_at = |y: &[f64], dy: &[f64]| -> f64 {
        let mut r = op.apply(y);
        for k in 0..r.len() {
            r[k] -= hdata[k] + dy[k];
        }
        let rf: SymTF2Field = Field::from_data(&grid, r).expect("shape");
        let yf: SymTF2Field = Field::from_data(&grid, y.to_vec()).expect("shape");
        rf_norm(metric, &rf) / (hnorm + metric.l2_symtf(&yf)).max(1e-300)
    };
    let energy = |s: f64, y: &[f64]| -> f64 {
        let yf: SymTF2Field = Field::from_data(&grid, y.to_vec()).expect("shape");
        (kappa * s / 5.0).exp() * metric.inner_symtf(&yf, &yf)
    };

    let mut y = final_data.data().to_vec();
    let mut samples = Vec::with_capacity(bounds.len());
    let mut steps = 0usize;
    let mut max_res = 0.0f64;
    let mut e_inc: Option<f64> = if eopts.track_energy { Some(f64::NEG_INFINITY) } else { None };
    let mut e_prev = energy(0.0, &y);
    let mut first_residual = None;
    for w in bounds.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        let nsteps = if (s1 - s0 - oct).abs() < 1e-12 {
            eopts.steps_per_octave
        } else {
            (((s1 - s0) / oct) * eopts.steps_per_octave as f64).ceil().max(4.0) as usize
        };
        let h = (s1 - s0) / nsteps as f64;
        if !(h > 1e-12) {
            return Err(Error::StepUnderflow(s0));
        }
        let mut hist: VecDeque<Vec<f64>> = VecDeque::with_capacity(5);
        hist.push_back(y.clone());
        for i in 0..nsteps {
            let s = s0 + i as f64 * h;
            y = rk4_step(&mut rhs, s, &y, h);
            steps += 1;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(v_bar * (-(s + h)).exp()));
            }
            if let Some(inc) = e_inc.as_mut() {
                let e = energy(s + h, &y);
                if e_prev > 0.0 {
                    *inc = inc.max(e / e_prev - 1.0);
                }
                e_prev = e;
            }
            if hist.len() == 5 {
                hist.pop_front();
            }
            hist.push_back(y.clone());
            if first_residual.is_none() && s0 == 0.0 && hist.len() == 5 && i == 3 {
                let d = fd_endpoint(&hist, h, true);
                first_residual = Some(residual_at(&hist[0], &d));
            }
        }
        if samples.is_empty() {
            let r0 = first_residual.unwrap_or(0.0);
            max_res = max_res.max(r0);
            samples.push(EvolutionSample { v: v_bar, s: 0.0, f: final_data.clone(), pde_residual: r0 });
        }
        let d = fd_endpoint(&hist, h, false);
        let r = residual_at(&y, &d);
        max_res = max_res.max(r);
        samples.push(EvolutionSample {
            v: if s1 == s_max { v_min } else { v_bar * (-s1).exp() },
            s: s1,
            f: Field::from_data(&grid, y.clone())?,
            pde_residual: r,
        });
    }
    Ok(EvolutionFamily {
        v_bar,
        v_min,
        kappa,
        samples,
        steps,
        max_pde_residual: max_res,
        energy_max_increase: e_inc,
    })
}

fn rf_norm(metric: &ConformalMetric, f: &SymTF2Field) -> f64 {
    metric.l2_symtf(f)
}

/// L² norm of any field with the round contraction.
pub fn l2_norm(u: &AnyField) -> f64 {
    l2_sq(&tensor_of(u)).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::OneForm;

    #[test]
    fn identity_operator_returns_rhs() {
        let g = SphereGrid::new(12, 16).unwrap();
        let f = ScalarField::from_scalar_fn(&g, |t, p| t.cos() + (t.sin() * p.cos()).powi(2));
        let p = AffineTransportProblem::with_jet(1.0, ShiftJet::zero(&g), HCoeff::Zero, AnyField::Scalar(f.clone()));
        let s = solve_affine_transport(&p, &SolveOptions::default()).unwrap();
        if let AnyField::Scalar(u) = s.u {
            assert!(u.max_abs_diff(&f) < 1e-14);
        } else {
            panic!("kind");
        }
    }

    #[test]
    fn smallness_refused() {
        let g = SphereGrid::new(8, 8).unwrap();
        let x = crate::field::VectorField::from_fn(&g, |t, _| [t.sin(), 0.0]);
        let p = AffineTransportProblem::new(1.0, &x, HCoeff::Zero, AnyField::OneForm(OneForm::zeros(&g)));
        assert!(matches!(solve_affine_transport(&p, &SolveOptions::default()), Err(Error::Smallness { .. })));
    }
}
