//! Acceptance run: one PASS/FAIL line per criterion 1-13.
//!
//! Desk scale is 48x96 unless a criterion states otherwise. Oracles
//! (closed forms, exact ODE solutions, quadratures) are computed here and
//! not taken from the library.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use ksim_core::calculus::laplacian;
use ksim_core::chardata::{
    build_char_data, build_outgoing_data, chardata_tuple, compute_eta_triangle, compute_trchi_triangle, eta_jet,
    zero_family, CharDataBundle, CharDataOptions, OutgoingOptions,
};
use ksim_core::constraint::{asymptotic_diagnostics, picard_regular_tuple, verify_kappa_constraint, AsymptoticReport, ConstraintReport, PicardOptions};
use ksim_core::diagnostics::signature::{corrupt, parse_corpus, CORPUS};
use ksim_core::diagnostics::*;
use ksim_core::fit::loglog_fit;
use ksim_core::hprofile::make_h_profile;
use ksim_core::linalg::SolveOptions;
use ksim_core::metric::gauss_curvature;
use ksim_core::random::{random_oneform, random_scalar, random_symtf, random_symtf_ambient, random_vector, rng};
use ksim_core::seed::{make_seed, Profile, SeedData, SeedParams};
use ksim_core::transport::{
    q_path, solve_kappa_singular, solve_kappa_singular_evolution, EvolutionOptions, KappaOp, KappaSingularProblem,
    ScrL,
};
use ksim_core::tuple::RegularTuple;
use ksim_core::{ConformalMetric, OneForm, ScalarField, SphereGrid, SymTF2Field, VectorField};

const GRID: (usize, usize) = (48, 96);
const SWEEP: [f64; 3] = [4e-3, 2e-3, 1e-3];

// 1
const KAPPA_SLOPE_MIN: f64 = 2.5;
const SWEEP_RUNTIME_MAX: Duration = Duration::from_secs(180);
// 2
const RAY_L2_MAX: f64 = 1e-10;
const BASIC_FORM_AGREEMENT: f64 = 1e-9;
// 3
const DIVB_SLOPE_MIN: f64 = 2.5;
const E_SLOPE_MIN: f64 = 2.5;
// 4
const H_ODE_RESIDUAL: f64 = 1e-10;
const H_POLE_REL: f64 = 0.10;
const H_BOUND_GAMMAS: [f64; 3] = [0.05, 0.1, 0.2];
/// max_γ C_k(γ) / min_γ C_k(γ): a γ-independent constant within this factor.
const H_BOUND_SPREAD: f64 = 2.0;
// 5
const SCRL_ANTISYM: f64 = 1e-9;
const TRIALS: usize = 100;
// 6
const MANUFACTURED: f64 = 1e-8;
const Q_PATH: f64 = 1e-7;
/// Quadratic extrapolation to q = 0 from these regularizations.
const Q_LADDER: [f64; 3] = [1e-6, 1e-7, 1e-8];
// 7
const SEPARABLE: f64 = 1e-9;
const VMIN_STATIONARY_REL: f64 = 0.05;
// 8
const RICCATI_EXACT: f64 = 1e-10;
const RAYCHAUDHURI: f64 = 1e-7;
const VOLUME: f64 = 1e-9;
// 9
const MASS_ZERO: f64 = 1e-12;
const MASS_SLOPE: (f64, f64) = (1.8, 2.2);
// 10
const SHEAR_C: f64 = 1.0;
// 12
const IDENTITY: f64 = 1e-9;
const IDENTITY_GRID: (usize, usize) = (64, 64);
// 13
const GAUSS_BONNET: f64 = 1e-10;
const IBP: f64 = 1e-10;
/// Fixed-order methods give log-log slopes near their order; spectral ones steepen.
const SPECTRAL_SLOPE_MAX: f64 = -6.0;

struct Check {
    what: String,
    pass: bool,
}

fn check(pass: bool, what: impl Into<String>) -> Check {
    Check { what: what.into(), pass }
}

struct Sweep {
    seeds: Vec<SeedData>,
    tuples: Vec<RegularTuple>,
    asym: Vec<AsymptoticReport>,
    cons: Vec<ConstraintReport>,
    mass: Vec<MassReport>,
    shear: Vec<ShearRatio>,
    elapsed: Duration,
}

fn grid() -> Arc<SphereGrid> {
    SphereGrid::new(GRID.0, GRID.1).unwrap()
}

fn tuple_for(g: &Arc<SphereGrid>, eps: f64) -> (SeedData, RegularTuple) {
    let seed = make_seed(g, &SeedParams { epsilon: eps, ..Default::default() }).unwrap();
    let t = picard_regular_tuple(&seed, &PicardOptions::default()).unwrap();
    (seed, t)
}

fn mass_of(t: &RegularTuple) -> MassReport {
    let (tr, model) = chardata_tuple(t, true);
    let so = SolveOptions::default();
    let eta = compute_eta_triangle(&tr, &so).unwrap();
    let x = compute_trchi_triangle(&tr, &eta_jet(&eta.value, model.as_ref()), &so).unwrap();
    hawking_mass_v0(t, &eta.value, &x.value, -1.0).unwrap()
}

fn run_sweep() -> Sweep {
    let g = grid();
    let start = Instant::now();
    let mut s = Sweep { seeds: vec![], tuples: vec![], asym: vec![], cons: vec![], mass: vec![], shear: vec![], elapsed: Duration::ZERO };
    for &eps in &SWEEP {
        let (seed, t) = tuple_for(&g, eps);
        s.asym.push(asymptotic_diagnostics(&t, &seed).unwrap());
        s.cons.push(verify_kappa_constraint(&t));
        s.elapsed = start.elapsed();
        s.mass.push(mass_of(&t));
        s.shear.push(shear_profile_v0(&t, -1.0).unwrap().ratio(&seed).unwrap());
        s.seeds.push(seed);
        s.tuples.push(t);
    }
    s
}

/// Σ_i W_i a(θ_i)², the grid quadrature of ∫a² sinθ dθ.
fn grid_integral_a2(seed: &SeedData) -> f64 {
    let g = seed.grid();
    g.theta_nodes.iter().zip(&g.quad_weights).map(|(t, w)| w * seed.bump.value(*t).powi(2)).sum()
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    loglog_fit(x, y).map_or(f64::NAN, |f| f.slope)
}

fn c01(s: &Sweep) -> Vec<Check> {
    let dev: Vec<f64> = s
        .seeds
        .iter()
        .zip(&s.tuples)
        .map(|(seed, t)| {
            let e = seed.epsilon();
            (t.kappa - e * e / 16.0 * grid_integral_a2(seed)).abs()
        })
        .collect();
    let sl = slope(&SWEEP, &dev);
    let kmin = s.tuples.iter().map(|t| t.kappa).fold(f64::INFINITY, f64::min);
    vec![
        check(sl >= KAPPA_SLOPE_MIN, format!("slope {sl:.3} >= {KAPPA_SLOPE_MIN}")),
        check(kmin > 0.0, format!("min kappa {kmin:.3e} > 0")),
        check(s.elapsed <= SWEEP_RUNTIME_MAX, format!("runtime {:.1}s <= {}s", s.elapsed.as_secs_f64(), SWEEP_RUNTIME_MAX.as_secs())),
    ]
}

fn c02(s: &Sweep) -> Vec<Check> {
    let ray = s.cons.iter().map(|c| c.l2_ray).fold(0.0, f64::max);
    let diff = s.cons.iter().map(|c| c.form_difference.max(c.l2_basic)).fold(0.0, f64::max);
    vec![
        check(ray <= RAY_L2_MAX, format!("L2 residual {ray:.2e} <= {RAY_L2_MAX:.0e}")),
        check(diff <= BASIC_FORM_AGREEMENT, format!("u-form at u=-1 {diff:.2e} <= {BASIC_FORM_AGREEMENT:.0e}")),
    ]
}

fn c03(s: &Sweep) -> Vec<Check> {
    let dev: Vec<f64> = s
        .seeds
        .iter()
        .zip(&s.tuples)
        .map(|(seed, t)| {
            let e2 = seed.epsilon().powi(2);
            let i = grid_integral_a2(seed);
            let g = seed.grid();
            let pred = ScalarField::from_scalar_fn(g, |th, _| e2 * (0.5 * seed.bump.value(th).powi(2) - 0.25 * i));
            t.div_b().max_abs_diff(&pred)
        })
        .collect();
    let e: Vec<f64> = s.asym.iter().map(|a| a.e_norm_h3).collect();
    let (sd, se) = (slope(&SWEEP, &dev), slope(&SWEEP, &e));
    vec![
        check(sd >= DIVB_SLOPE_MIN, format!("div b slope {sd:.3} >= {DIVB_SLOPE_MIN}")),
        check(se >= E_SLOPE_MIN, format!("e H3 slope {se:.3} >= {E_SLOPE_MIN}")),
    ]
}

/// Cumulative composite Simpson of f on [0, π] at 2m panels; entry k is ∫₀^{kπ/m}.
fn cumulative_simpson(f: impl Fn(f64) -> f64, m: usize, sub: usize) -> Vec<f64> {
    let h = PI / (m * sub) as f64;
    let mut out = vec![0.0];
    let mut acc = 0.0;
    for k in 0..m * sub {
        let a = k as f64 * h;
        acc += h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h));
        if (k + 1) % sub == 0 {
            out.push(acc);
        }
    }
    out
}

fn h_seed(gamma: f64) -> SeedData {
    let g = SphereGrid::new(16, 8).unwrap();
    make_seed(&g, &SeedParams { epsilon: 1e-4, gamma, ..Default::default() }).unwrap()
}

fn c04() -> Vec<Check> {
    let seed = h_seed(0.1);
    let hp = make_h_profile(&seed);
    let gam = 0.1;
    let a2s = |t: f64| seed.bump.value(t).powi(2) * t.sin();
    let i_ref = *cumulative_simpson(a2s, 1, 1 << 16).last().unwrap();
    let q = |t: f64| 0.5 * t.sin() * (seed.bump.value(t).powi(2) - 0.5 * hp.integral_a2);
    let m = 64;
    let cum = cumulative_simpson(q, m, 1 << 10);
    let ode = (1..m).map(|k| (hp.sin_h(k as f64 * PI / m as f64) - cum[k]).abs()).fold((hp.integral_a2 - i_ref).abs(), f64::max);
    let zeros = hp.interior_zeros(4000);
    let pole_vanish = hp.value(1e-9).abs().max(hp.value(PI - 1e-9).abs());
    let simple = zeros.len() == 1 && hp.deriv(zeros[0]).abs() > 1e-3 && hp.deriv(1e-6).abs() > 1e-3 && hp.deriv(PI - 1e-6).abs() > 1e-3;
    let th = gam / 10.0;
    let coef = hp.value(th) / th;
    let mut spreads = [0.0f64; 4];
    for k in 0..4 {
        let cs: Vec<f64> = H_BOUND_GAMMAS
            .iter()
            .map(|&g| {
                let p = make_h_profile(&h_seed(g));
                let sup = (1..20000).map(|j| p.sin_h_deriv(k, j as f64 * PI / 20000.0).abs()).fold(0.0, f64::max);
                sup / g.powi(2 - k as i32)
            })
            .collect();
        let (lo, hi) = cs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), c| (a.min(*c), b.max(*c)));
        spreads[k] = hi / lo;
    }
    let worst = spreads.iter().copied().fold(0.0, f64::max);
    vec![
        check(ode <= H_ODE_RESIDUAL, format!("ODE residual {ode:.1e} <= {H_ODE_RESIDUAL:.0e}")),
        check(
            simple && pole_vanish < 1e-8 && (hp.y0 - PI / 2.0).abs() <= gam,
            format!("zeros at 0, {:.4}, pi (interior count {})", hp.y0, zeros.len()),
        ),
        check((coef + 0.25).abs() <= H_POLE_REL * 0.25, format!("pole coefficient {coef:.4} vs -1/4")),
        check(worst <= H_BOUND_SPREAD, format!("C_k spread over gamma {worst:.2} <= {H_BOUND_SPREAD}")),
    ]
}

fn c05(s: &Sweep) -> Vec<Check> {
    // the seed tuple, then a non-round metric with a generic band-limited shift
    let t0 = &s.tuples[0];
    let g = t0.grid().clone();
    let mut r = rng(51);
    let phi = random_scalar(&g, &mut r, 1, 5);
    let phi = phi.scale(0.3 / phi.norm_inf());
    let b = random_vector(&g, &mut r, 5);
    let b = b.scale(0.2 / b.norm_inf());
    let t1 = RegularTuple::from_parts(ConformalMetric::new(phi, ScalarField::zeros(&g)).unwrap(), b, 0.0).unwrap();
    let mut worst = 0.0f64;
    for t in [t0, &t1] {
        let l = ScrL::from_tuple(t);
        let m = &t.metric;
        for _ in 0..TRIALS / 2 {
            let f = random_symtf(&g, &mut r, 8);
            let h = random_symtf(&g, &mut r, 8);
            let sum = m.inner_symtf(&l.apply(&f), &h) + m.inner_symtf(&f, &l.apply(&h));
            worst = worst.max(sum.abs() / (m.l2_symtf(&f) * m.l2_symtf(&h)));
        }
    }
    vec![check(worst <= SCRL_ANTISYM, format!("max |<Lf,g>+<f,Lg>|/|f||g| {worst:.2e} <= {SCRL_ANTISYM:.0e} over {TRIALS} trials"))]
}

/// ∂_φ of dyad components; the dyad is invariant under rotation about the axis.
fn d_phi_symtf(f: &SymTF2Field) -> SymTF2Field {
    let g = f.grid();
    SymTF2Field::from_comps(g, &[g.d_phi(f.comp(0)), g.d_phi(f.comp(1))]).unwrap()
}

fn c06() -> Vec<Check> {
    let g = SphereGrid::new(24, 32).unwrap();
    let kappa = 0.1;
    let so = SolveOptions::default();
    // b = ∂_φ: Killing, so 𝓛 acts as ∂_φ on dyad components
    let rot = VectorField::from_fn(&g, |th, _| [0.0, th.sin()]);
    let t = RegularTuple::from_parts(ConformalMetric::round(&g), rot, kappa).unwrap();
    let mut r = rng(61);
    let f = random_symtf_ambient(&g, &mut r, 6);
    let h = d_phi_symtf(&f).axpy(-2.0 * kappa, &f);
    let p = KappaSingularProblem { tuple: t, h, include_lapse_term: false };
    let e1 = solve_kappa_singular(&p, &so).unwrap().f.max_abs_diff(&f) / f.norm_inf();
    // generic shift, right-hand side from the operator itself
    let b = &VectorField::from_fn(&g, |th, _| [0.0, th.sin()]) + &random_vector(&g, &mut r, 4).scale(0.05);
    let t2 = RegularTuple::from_parts(ConformalMetric::round(&g), b, kappa).unwrap();
    let f2 = random_symtf(&g, &mut r, 6);
    let h2 = KappaOp::new(&t2, false, 0.0).apply_field(&f2);
    let p2 = KappaSingularProblem { tuple: t2, h: h2, include_lapse_term: false };
    let e2 = solve_kappa_singular(&p2, &so).unwrap().f.max_abs_diff(&f2) / f2.norm_inf();
    let mut qd = 0.0f64;
    for prob in [&p, &p2] {
        qd = qd.max(q_path(prob, &Q_LADDER, &so).unwrap().1.extrapolated_distance);
    }
    let e = e1.max(e2);
    vec![
        check(e <= MANUFACTURED, format!("manufactured recovery {e:.2e} <= {MANUFACTURED:.0e}")),
        check(qd <= Q_PATH, format!("q->0 path {qd:.2e} <= {Q_PATH:.0e}")),
    ]
}

fn c07(bundle: &Option<CharDataBundle>) -> Vec<Check> {
    // b = 0: -∂_s f - 2κf = H, so f(s) = (f0 + H/2κ)e^{-2κs} - H/2κ
    let g = SphereGrid::new(12, 16).unwrap();
    let kappa = 0.1;
    let mut r = rng(71);
    let h = random_symtf(&g, &mut r, 4);
    let f0 = random_symtf(&g, &mut r, 4);
    let t = RegularTuple::trivial(&g).with_kappa(kappa);
    let p = KappaSingularProblem { tuple: t, h: h.clone(), include_lapse_term: false };
    let fam = solve_kappa_singular_evolution(&p, &f0, 1.0, 1e-6, &EvolutionOptions::default()).unwrap();
    let c = 0.5 / kappa;
    let sep = fam
        .samples
        .iter()
        .map(|smp| {
            let decay = (-2.0 * kappa * smp.s).exp();
            let exact = (&f0 + &h.scale(c)).scale(decay).axpy(-c, &h);
            smp.f.max_abs_diff(&exact)
        })
        .fold(0.0, f64::max);
    let mut out = vec![check(sep <= SEPARABLE, format!("separable case {sep:.2e} <= {SEPARABLE:.0e}"))];
    match bundle {
        Some(b) => {
            let first = &b.chihat.family.samples[0];
            out.push(check(first.v == b.v_bar && first.f.norm_inf() == 0.0, format!("chihat(v_bar) sup {:.1e}", first.f.norm_inf())));
            let d = b.report.chihat_vmin_distance;
            out.push(check(d <= VMIN_STATIONARY_REL, format!("chihat(v_min) vs stationary {d:.3} <= {VMIN_STATIONARY_REL}")));
        }
        None => out.push(check(false, "chardata bundle failed")),
    }
    out
}

fn c08(bundle: &Option<CharDataBundle>) -> Vec<Check> {
    let g = SphereGrid::new(8, 8).unwrap();
    let t = RegularTuple::trivial(&g);
    let x = ScalarField::from_scalar_fn(&g, |th, p| 2.0 + 0.3 * th.cos() + 0.1 * p.sin());
    let fam = zero_family(&t, 1.0, 1e-6);
    let out = build_outgoing_data(&t, &x, &fam, 1.0, &OutgoingOptions::default()).unwrap();
    // no shear: φ'' + φ'^2 = 0 from φ(0) = 0, φ'(0) = X/2
    let ric = out
        .samples
        .iter()
        .flat_map(|smp| smp.phi.values().iter().zip(x.values()).map(move |(ph, xv)| (ph - (0.5 * xv * smp.v_hat).ln_1p()).abs()))
        .fold(0.0, f64::max);
    let mut c = vec![check(ric <= RICCATI_EXACT, format!("Riccati exact {ric:.2e} <= {RICCATI_EXACT:.0e}"))];
    match bundle {
        Some(b) => {
            let (ray, vol) = (b.report.raychaudhuri_residual, b.report.volume_deviation);
            c.push(check(ray <= RAYCHAUDHURI, format!("Raychaudhuri {ray:.2e} <= {RAYCHAUDHURI:.0e}")));
            c.push(check(vol <= VOLUME, format!("volume form {vol:.2e} <= {VOLUME:.0e}")));
        }
        None => c.push(check(false, "chardata bundle failed")),
    }
    c
}

fn c09(s: &Sweep) -> Vec<Check> {
    let g = grid();
    let (_, t0) = tuple_for(&g, 0.0);
    let m0 = mass_of(&t0);
    let ms: Vec<f64> = s.mass.iter().map(|m| m.mass).collect();
    let sl = slope(&SWEEP, &ms);
    let pos = ms.iter().all(|m| *m > 0.0) && s.tuples.iter().all(|t| t.kappa > 0.0);
    vec![
        check(t0.kappa == 0.0 && m0.mass.abs() <= MASS_ZERO, format!("kappa=0 mass {:.1e}", m0.mass)),
        check(pos, format!("masses {:.3e} {:.3e} {:.3e} > 0", ms[0], ms[1], ms[2])),
        check(sl >= MASS_SLOPE.0 && sl <= MASS_SLOPE.1, format!("mass slope {sl:.3} in [{}, {}]", MASS_SLOPE.0, MASS_SLOPE.1)),
    ]
}

fn c10(s: &Sweep) -> Vec<Check> {
    SWEEP
        .iter()
        .zip(&s.shear)
        .map(|(e, r)| {
            let bound = SHEAR_C * e.sqrt();
            check(r.nodes_checked > 0 && r.max_deviation <= bound, format!("eps {e:.0e}: |ratio-1| {:.2e} <= {bound:.2e}", r.max_deviation))
        })
        .collect()
}

fn c11() -> Vec<Check> {
    let rep = signature_check(&builtin_corpus());
    let total = rep.equations.len();
    // one homogeneity-breaking substitution per family
    let faults = [("4trchi", "om", "omb"), ("4beta", "om", "omb"), ("ren3", "beta", "betab"), ("com1", "chi", "chib"), ("genGauss", "trchib", "trchi")];
    let mut caught = 0;
    for (label, from, to) in faults {
        let bad = signature_check(&parse_corpus(&corrupt(CORPUS, label, from, to)).unwrap());
        if bad.equations.iter().any(|e| e.label == label && !e.pass) && bad.n_pass() == total - 1 {
            caught += 1;
        }
    }
    vec![
        check(rep.all_pass() && total >= 30, format!("{}/{} records homogeneous", rep.n_pass(), total)),
        check(caught == faults.len(), format!("detector fired on {caught}/{} corruptions", faults.len())),
    ]
}

fn c12() -> Vec<Check> {
    let g = SphereGrid::new(IDENTITY_GRID.0, IDENTITY_GRID.1).unwrap();
    let rep = tensor_identity_suite(&g, &IdentityOptions { trials: TRIALS, ..Default::default() });
    let w = rep.max_residual();
    vec![check(w <= IDENTITY, format!("max residual {w:.2e} <= {IDENTITY:.0e} over {} trials", rep.trials))]
}

fn c13() -> Vec<Check> {
    let g = SphereGrid::new(32, 64).unwrap();
    let mut r = rng(131);
    let (mut gb, mut ibp) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let phi = random_scalar(&g, &mut r, 1, 6);
        let m = ConformalMetric::new(phi.scale(0.4 / phi.norm_inf()), ScalarField::zeros(&g)).unwrap();
        gb = gb.max((m.integrate(&gauss_curvature(&m)) - 4.0 * PI).abs());
        let u = random_scalar(&g, &mut r, 0, 6);
        let w: OneForm = random_oneform(&g, &mut r, 6);
        let lhs = m.integrate(&m.dot_oneform(&m.grad(&u), &w));
        let rhs = -m.integrate(&u.mul(&m.div_oneform(&w)));
        ibp = ibp.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300));
    }
    // Δe^x = e^x(1 − x² − 2x) for the coordinate function x = sinθ cosφ
    let errs: Vec<f64> = [8usize, 12, 16]
        .iter()
        .map(|&n| {
            let g = SphereGrid::new(n, 2 * n).unwrap();
            let u = ScalarField::from_scalar_fn(&g, |th, p| (th.sin() * p.cos()).exp());
            let exact = ScalarField::from_scalar_fn(&g, |th, p| {
                let x = th.sin() * p.cos();
                x.exp() * (1.0 - x * x - 2.0 * x)
            });
            laplacian(&u).max_abs_diff(&exact)
        })
        .collect();
    let ns = [8.0, 12.0, 16.0];
    let sl = slope(&ns, &errs);
    let local: Vec<f64> = (0..2).map(|k| (errs[k + 1] / errs[k]).ln() / (ns[k + 1] / ns[k]).ln()).collect();
    let spectral = sl <= SPECTRAL_SLOPE_MAX && local[1] < local[0];
    vec![
        check(gb <= GAUSS_BONNET, format!("Gauss-Bonnet {gb:.1e} <= {GAUSS_BONNET:.0e}")),
        check(ibp <= IBP, format!("integration by parts {ibp:.1e} <= {IBP:.0e}")),
        check(spectral, format!("Laplacian errors {:.1e} {:.1e} {:.1e}, slope {sl:.1} <= {SPECTRAL_SLOPE_MAX}, local {:.1} then {:.1}", errs[0], errs[1], errs[2], local[0], local[1])),
    ]
}

const NAMES: [&str; 13] = [
    "kappa asymptotics",
    "kappa constraint residual",
    "div b profile",
    "h profile",
    "L anti-symmetry",
    "kappa-singular solver",
    "evolution solver",
    "outgoing data",
    "Hawking mass",
    "shear",
    "signature corpus",
    "tensor identities",
    "calculus core",
];

fn main() -> ExitCode {
    let t0 = Instant::now();
    let sweep = run_sweep();
    let bundle = build_char_data(&sweep.tuples[0], &CharDataOptions::default()).ok();
    let results: Vec<Vec<Check>> = vec![
        c01(&sweep),
        c02(&sweep),
        c03(&sweep),
        c04(),
        c05(&sweep),
        c06(),
        c07(&bundle),
        c08(&bundle),
        c09(&sweep),
        c10(&sweep),
        c11(),
        c12(),
        c13(),
    ];
    let mut failed = 0;
    for (i, checks) in results.iter().enumerate() {
        let pass = checks.iter().all(|c| c.pass);
        failed += usize::from(!pass);
        let detail: Vec<String> =
            checks.iter().map(|c| if c.pass { c.what.clone() } else { format!("[x] {}", c.what) }).collect();
        println!("{} {:>2} {}: {}", if pass { "PASS" } else { "FAIL" }, i + 1, NAMES[i], detail.join("; "));
    }
    println!("{}/13 criteria pass ({:.0}s)", 13 - failed, t0.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
