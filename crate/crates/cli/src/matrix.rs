//! Pass/fail matrix over whatever a run produced. Criteria that need data a
//! run did not compute are marked not_evaluated.

use std::collections::BTreeMap;

use crate::pipeline::{CriterionStatus, Report, Status, SubCheck};

pub const KAPPA_SLOPE_MIN: f64 = 2.5;
pub const SWEEP_SECONDS_MAX: f64 = 180.0;
pub const RAY_L2_MAX: f64 = 1e-10;
pub const BASIC_FORM_MAX: f64 = 1e-9;
pub const DIVB_SLOPE_MIN: f64 = 2.5;
pub const E_SLOPE_MIN: f64 = 2.5;
pub const VMIN_STATIONARY_REL: f64 = 0.05;
pub const RAYCHAUDHURI_MAX: f64 = 1e-7;
pub const VOLUME_MAX: f64 = 1e-9;
pub const MASS_ZERO: f64 = 1e-12;
pub const MASS_SLOPE: (f64, f64) = (1.8, 2.2);
pub const SHEAR_C: f64 = 1.0;
pub const IDENTITY_MAX: f64 = 1e-9;

const TITLES: [&str; 13] = [
    "kappa asymptotics",
    "kappa-constraint residual",
    "div b profile",
    "h-profile",
    "antisymmetry of the transport operator",
    "kappa-singular solver",
    "evolution solver",
    "outgoing data",
    "Hawking mass",
    "shear",
    "signature corpus",
    "tensor identities",
    "calculus core",
];

fn sub(name: &str, measured: f64, expected: String, pass: bool) -> SubCheck {
    SubCheck { name: name.into(), measured, expected, pass }
}

fn at_most(name: &str, measured: f64, max: f64) -> SubCheck {
    sub(name, measured, format!("<= {max:e}"), measured <= max)
}

fn at_least(name: &str, measured: f64, min: f64) -> SubCheck {
    sub(name, measured, format!(">= {min}"), measured >= min)
}

fn flag(name: &str, ok: bool) -> SubCheck {
    sub(name, if ok { 1.0 } else { 0.0 }, "1".into(), ok)
}

fn status_of(checks: Vec<SubCheck>, note: Option<&str>, idx: usize) -> CriterionStatus {
    let status = if checks.is_empty() {
        Status::NotEvaluated
    } else if checks.iter().all(|c| c.pass) {
        Status::Pass
    } else {
        Status::Fail
    };
    CriterionStatus { title: TITLES[idx].into(), status, checks, note: note.map(String::from) }
}

fn fit_slope(r: &Report, key: &str) -> Option<f64> {
    let s = r.sweep.as_ref()?;
    if s.rows.len() < 2 {
        return None;
    }
    Some(s.fits.get(key).cloned().flatten().map_or(f64::NAN, |f| f.slope))
}

pub fn evaluate(r: &Report) -> BTreeMap<String, CriterionStatus> {
    let mut c: Vec<Vec<SubCheck>> = vec![Vec::new(); 13];
    let mut notes: Vec<Option<&str>> = vec![None; 13];

    if let Some(sl) = fit_slope(r, "kappa_deviation") {
        c[0].push(at_least("kappa deviation slope", sl, KAPPA_SLOPE_MIN));
        if let Some(t) = r.sweep.as_ref().and_then(|s| s.constraint_seconds) {
            c[0].push(at_most("sweep seconds", t, SWEEP_SECONDS_MAX));
        }
    }
    let kappas: Vec<f64> = r.runs.iter().filter(|x| x.epsilon > 0.0).filter_map(|x| x.constraint.as_ref().map(|c| c.kappa)).collect();
    if !kappas.is_empty() && r.sweep.is_some() {
        c[0].push(sub("min kappa", kappas.iter().cloned().fold(f64::INFINITY, f64::min), "> 0".into(), kappas.iter().all(|k| *k > 0.0)));
    }

    for run in &r.runs {
        if let Some(cs) = &run.constraint {
            c[1].push(at_most("L2 residual", cs.report.l2_ray, RAY_L2_MAX));
            c[1].push(at_most("u-form at u=-1", cs.report.form_difference.max(cs.report.l2_basic), BASIC_FORM_MAX));
        }
    }

    if let Some(sl) = fit_slope(r, "div_b_deviation") {
        c[2].push(at_least("div b slope", sl, DIVB_SLOPE_MIN));
    }
    if let Some(sl) = fit_slope(r, "e_norm_h3") {
        c[2].push(at_least("e H3 slope", sl, E_SLOPE_MIN));
    }

    for run in &r.runs {
        if let Some(cd) = &run.chardata {
            c[6].push(flag("chihat(v_bar) = 0", cd.chihat_final_is_zero));
            c[6].push(at_most("chihat(v_min) vs stationary", cd.report.chihat_vmin_distance, VMIN_STATIONARY_REL));
            c[7].push(at_most("Raychaudhuri residual", cd.report.raychaudhuri_residual, RAYCHAUDHURI_MAX));
            c[7].push(at_most("volume form", cd.report.volume_deviation, VOLUME_MAX));
        }
    }
    notes[6] = Some("separable case in the acceptance test target");
    notes[7] = Some("Riccati-exact case in the acceptance test target");

    for run in &r.runs {
        if let (Some(d), Some(cs)) = (&run.diagnostics, &run.constraint) {
            if cs.kappa == 0.0 {
                c[8].push(at_most("kappa=0 mass", d.mass.mass.abs(), MASS_ZERO));
            } else if r.sweep.is_some() {
                c[8].push(sub("mass", d.mass.mass, "> 0".into(), d.mass.mass > 0.0));
            }
            if let Some(sh) = &d.shear {
                let bound = SHEAR_C * run.epsilon.sqrt();
                c[9].push(sub(
                    &format!("eps {:e} shear deviation", run.epsilon),
                    sh.max_deviation,
                    format!("<= {bound:e}"),
                    sh.nodes_checked > 0 && sh.max_deviation <= bound,
                ));
            }
        }
    }
    if let Some(sl) = fit_slope(r, "mass") {
        c[8].push(sub("mass slope", sl, format!("in [{}, {}]", MASS_SLOPE.0, MASS_SLOPE.1), sl >= MASS_SLOPE.0 && sl <= MASS_SLOPE.1));
    }

    if let Some(s) = &r.signature {
        c[10].push(sub("homogeneous records", s.passing as f64, format!("{}", s.records), s.passing == s.records));
        c[10].push(flag("corruption detected", s.corruption_detected));
    }
    if let Some(id) = &r.identities {
        c[11].push(at_most("max identity residual", id.max_residual(), IDENTITY_MAX));
    }
    for i in [3, 4, 5, 12] {
        notes[i] = Some("acceptance test target");
    }

    c.into_iter()
        .enumerate()
        .map(|(i, checks)| (format!("C{:02}", i + 1), status_of(checks, notes[i], i)))
        .collect()
}
