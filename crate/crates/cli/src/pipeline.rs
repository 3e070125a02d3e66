use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use ksim_core::chardata::{
    build_char_data, chardata_tuple, compute_eta_triangle, compute_trchi_triangle, eta_jet, CharDataBundle,
    CharDataReport,
};
use ksim_core::constraint::{asymptotic_diagnostics, picard_regular_tuple, verify_kappa_constraint, AsymptoticReport, ConstraintReport};
use ksim_core::diagnostics::signature::{corrupt, parse_corpus, CORPUS};
use ksim_core::diagnostics::{
    builtin_corpus, hawking_mass_v0, selfsim_relations, shear_profile_v0, signature_check, tensor_identity_suite,
    IdentityOptions, IdentityReport, MassReport, SelfSimReport, ShearRatio,
};
use ksim_core::fit::{loglog_fit, PowerFit};
use ksim_core::hprofile::make_h_profile;
use ksim_core::io::{self, nan_as_null};
use ksim_core::seed::{make_seed, SeedData, SeedParams};
use ksim_core::tuple::RegularTuple;
use ksim_core::{AnyField, Error, OneForm, ScalarField, SphereGrid};

use crate::config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Stage { stage: &'static str, op: &'static str, context: String, source: Error },
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Stage { stage, op, context, source } => write!(f, "{stage}: {op} failed ({context}): {source}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Stage { source, .. } => match source {
                Error::Config(_) | Error::ParameterOrdering(_) | Error::InvalidSeed(_) | Error::KappaRange(_) => 2,
                Error::Io(_) => 1,
                _ => 3,
            },
            CliError::Io(_) => 1,
        }
    }
}

fn io_err(what: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", what.display()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Seed,
    Constraint,
    CharData,
    Diagnose,
    All,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Seed => "seed",
            Command::Constraint => "constraint",
            Command::CharData => "chardata",
            Command::Diagnose => "diagnose",
            Command::All => "all",
            Command::Sweep => "sweep",
        }
    }

    fn depth(self) -> u8 {
        match self {
            Command::Seed => 0,
            Command::Constraint | Command::Sweep => 1,
            Command::CharData => 2,
            Command::Diagnose => 3,
            Command::All => 4,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedSummary {
    pub params: SeedParams,
    pub integral_a2: f64,
    pub integral_a2_grid: f64,
    pub h_zero: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstraintSummary {
    pub kappa: f64,
    pub iterations: usize,
    pub residual: f64,
    pub report: ConstraintReport,
    pub asymptotic: AsymptoticReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharDataSummary {
    pub report: CharDataReport,
    pub ladder: Vec<f64>,
    pub chihat_final_is_zero: bool,
    /// Set when the outgoing segment was shortened after a Riccati blow-up there.
    pub outgoing_blowup_at: Option<f64>,
    pub v_hat_max: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignatureSummary {
    pub records: usize,
    pub passing: usize,
    pub failing: Vec<String>,
    pub corruption_detected: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    pub mass: MassReport,
    pub shear: Option<ShearRatio>,
    pub selfsim: SelfSimReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub epsilon: f64,
    pub seed: SeedSummary,
    pub constraint: Option<ConstraintSummary>,
    pub chardata: Option<CharDataSummary>,
    pub diagnostics: Option<DiagnosticsSummary>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub kappa: f64,
    pub kappa_deviation: f64,
    pub div_b_deviation: f64,
    pub e_norm_h3: f64,
    pub mass: f64,
    #[serde(with = "nan_as_null")]
    pub shear_deviation: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
    pub fits: BTreeMap<String, Option<PowerFit>>,
    /// Wall time of seed and constraint stages over the sweep; omitted in reference mode.
    pub constraint_seconds: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SubCheck {
    pub name: String,
    #[serde(with = "nan_as_null")]
    pub measured: f64,
    pub expected: String,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotEvaluated,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CriterionStatus {
    pub title: String,
    pub status: Status,
    pub checks: Vec<SubCheck>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub runs: Vec<RunRecord>,
    pub sweep: Option<SweepSummary>,
    pub signature: Option<SignatureSummary>,
    pub identities: Option<IdentityReport>,
    pub acceptance: BTreeMap<String, CriterionStatus>,
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn failed_criteria(&self) -> Vec<String> {
        self.acceptance.iter().filter(|(_, c)| c.status == Status::Fail).map(|(k, _)| k.clone()).collect()
    }
}

struct Writer {
    root: PathBuf,
    csv: bool,
    files: Vec<String>,
}

impl Writer {
    fn dir(&self, sub: &str) -> Result<PathBuf, CliError> {
        let d = self.root.join(sub);
        fs::create_dir_all(&d).map_err(|e| CliError::Io(format!("{}: {e}", d.display())))?;
        Ok(d)
    }

    fn note(&mut self, p: &Path) {
        let rel = p.strip_prefix(&self.root).unwrap_or(p);
        self.files.push(rel.to_string_lossy().replace('\\', "/"));
    }

    fn field(&mut self, sub: &str, name: &str, f: AnyField) -> Result<(), CliError> {
        let d = self.dir(sub)?;
        let p = d.join(format!("{name}.bin"));
        io::write_field(&p, &f).map_err(io_err(&p))?;
        self.note(&p);
        if self.csv {
            let p = d.join(format!("{name}.csv"));
            io::save_field_csv(&p, &f).map_err(io_err(&p))?;
            self.note(&p);
        }
        Ok(())
    }

    fn json<T: Serialize>(&mut self, sub: &str, name: &str, v: &T) -> Result<(), CliError> {
        let p = self.dir(sub)?.join(name);
        io::write_json(&p, v).map_err(io_err(&p))?;
        self.note(&p);
        Ok(())
    }
}

fn stage_ctx(cfg: &RunConfig, eps: f64) -> String {
    format!("epsilon={eps:e}, gamma={}, grid={}x{}", cfg.seed.gamma, cfg.grid.n_theta, cfg.grid.n_phi)
}

fn stage<T>(stage: &'static str, op: &'static str, ctx: &str, r: ksim_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Stage { stage, op, context: ctx.to_string(), source })
}

fn make_grid(cfg: &RunConfig) -> Result<Arc<SphereGrid>, CliError> {
    SphereGrid::new(cfg.grid.n_theta, cfg.grid.n_phi).map_err(|e| CliError::Config(format!("grid: {e}")))
}

fn run_seed(cfg: &RunConfig, g: &Arc<SphereGrid>, eps: f64, w: &mut Writer, sub: &str) -> Result<(SeedData, SeedSummary), CliError> {
    let ctx = stage_ctx(cfg, eps);
    let seed = stage("seed", "make_seed", &ctx, make_seed(g, &cfg.seed_params(eps)))?;
    let hp = make_h_profile(&seed);
    let summary = SeedSummary {
        params: seed.params.clone(),
        integral_a2: seed.integral_a2,
        integral_a2_grid: seed.integral_a2_grid,
        h_zero: hp.y0,
    };
    let dir = format!("{sub}seed");
    w.json(&dir, "seed.json", &summary)?;
    w.field(&dir, "a_profile", AnyField::Scalar(seed.a_profile.clone()))?;
    w.field(&dir, "b_check", AnyField::Vector(seed.b_check.clone()))?;
    if w.csv {
        let p = w.dir(&dir)?.join("profiles.csv");
        let mut wr = csv::Writer::from_path(&p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        let rows = std::iter::once(["theta".to_string(), "a".into(), "b".into(), "h".into()]).chain(
            g.theta_nodes.iter().zip(&seed.b_profile).map(|(t, b)| {
                [t.to_string(), ksim_core::seed::Profile::value(&seed.bump, *t).to_string(), b.to_string(), hp.value(*t).to_string()]
            }),
        );
        for r in rows {
            wr.write_record(&r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        wr.flush().map_err(|e| CliError::Io(e.to_string()))?;
        w.note(&p);
    }
    Ok((seed, summary))
}

fn run_constraint(cfg: &RunConfig, seed: &SeedData, w: &mut Writer, sub: &str) -> Result<(RegularTuple, ConstraintSummary), CliError> {
    let ctx = stage_ctx(cfg, seed.epsilon());
    let t = stage("constraint", "picard_regular_tuple", &ctx, picard_regular_tuple(seed, &cfg.picard_options()))?;
    let report = verify_kappa_constraint(&t);
    let asymptotic = stage("constraint", "asymptotic_diagnostics", &ctx, asymptotic_diagnostics(&t, seed))?;
    let dir = format!("{sub}tuple");
    let d = w.dir(&dir)?;
    io::save_tuple(&d, &t).map_err(io_err(&d))?;
    for f in ["tuple.json", "phi.bin", "log_lapse.bin", "b.bin", "f_potential.bin"] {
        w.note(&d.join(f));
    }
    if w.csv {
        let p = d.join("b.csv");
        io::save_field_csv(&p, &AnyField::Vector(t.b.clone())).map_err(io_err(&p))?;
        w.note(&p);
        let p = d.join("f_potential.csv");
        io::save_field_csv(&p, &AnyField::Scalar(t.f_potential.clone())).map_err(io_err(&p))?;
        w.note(&p);
    }
    w.field(&dir, "div_b", AnyField::Scalar(t.div_b()))?;
    let summary = ConstraintSummary { kappa: t.kappa, iterations: t.iteration_trace.len(), residual: t.residual, report, asymptotic };
    Ok((t, summary))
}

fn run_chardata(cfg: &RunConfig, t: &RegularTuple, w: &mut Writer, sub: &str) -> Result<(CharDataBundle, CharDataSummary), CliError> {
    let ctx = stage_ctx(cfg, t.epsilon);
    let mut opts = cfg.chardata_options();
    let mut blowup = None;
    let bundle = match build_char_data(t, &opts) {
        Err(Error::RiccatiBlowup(vh)) if cfg.chardata.blowup_backoff.is_some() => {
            blowup = Some(vh);
            opts.v_hat_max = Some(cfg.chardata.blowup_backoff.unwrap_or(0.5) * vh);
            stage("chardata", "build_char_data (shortened outgoing segment)", &ctx, build_char_data(t, &opts))?
        }
        r => stage("chardata", "build_char_data", &ctx, r)?,
    };
    let dir = format!("{sub}bundle");
    let d = w.dir(&dir)?;
    let man = io::save_bundle(&d, &bundle).map_err(io_err(&d))?;
    w.note(&d.join("manifest.json"));
    for f in ["eta_tri.bin", "trchi_tri.bin", "chihat/stationary.bin"] {
        w.note(&d.join(f));
    }
    for f in man.chihat_files.iter().chain(man.outgoing_files.iter().flatten()) {
        w.note(&d.join(f));
    }
    if w.csv {
        let last = bundle.chihat.family.samples.last().map(|s| s.f.clone());
        let mut csvs = vec![
            ("eta_tri.csv", AnyField::OneForm(bundle.eta_tri.clone())),
            ("trchi_tri.csv", AnyField::Scalar(bundle.trchi_tri.clone())),
            ("chihat_stationary.csv", AnyField::SymTF2(bundle.chihat.stationary.clone())),
        ];
        if let Some(f) = last {
            csvs.push(("chihat_vmin.csv", AnyField::SymTF2(f)));
        }
        if let Some(s) = bundle.outgoing.samples.last() {
            csvs.push(("phi_out_final.csv", AnyField::Scalar(s.phi.clone())));
        }
        for (name, f) in csvs {
            let p = d.join(name);
            io::save_field_csv(&p, &f).map_err(io_err(&p))?;
            w.note(&p);
        }
    }
    let first = &bundle.chihat.family.samples[0];
    let summary = CharDataSummary {
        report: bundle.report.clone(),
        ladder: bundle.ladder(),
        chihat_final_is_zero: first.v == bundle.v_bar && first.f.norm_inf() == 0.0,
        outgoing_blowup_at: blowup,
        v_hat_max: bundle.outgoing.v_hat_max,
    };
    Ok((bundle, summary))
}

fn triangle(cfg: &RunConfig, t: &RegularTuple) -> Result<(OneForm, ScalarField), CliError> {
    let ctx = stage_ctx(cfg, t.epsilon);
    let (tr, model) = chardata_tuple(t, cfg.chardata.seed_model);
    let so = cfg.solve_options();
    let eta = stage("diagnose", "compute_eta_triangle", &ctx, compute_eta_triangle(&tr, &so))?;
    let x = stage("diagnose", "compute_trchi_triangle", &ctx, compute_trchi_triangle(&tr, &eta_jet(&eta.value, model.as_ref()), &so))?;
    Ok((eta.value, x.value))
}

fn run_diagnose(
    cfg: &RunConfig,
    seed: &SeedData,
    t: &RegularTuple,
    bundle: Option<&CharDataBundle>,
    w: &mut Writer,
    sub: &str,
) -> Result<DiagnosticsSummary, CliError> {
    let ctx = stage_ctx(cfg, t.epsilon);
    let (eta, x) = match bundle {
        Some(b) => (b.eta_tri.clone(), b.trchi_tri.clone()),
        None => triangle(cfg, t)?,
    };
    let mass = stage("diagnose", "hawking_mass_v0", &ctx, hawking_mass_v0(t, &eta, &x, -1.0))?;
    let prof = stage("diagnose", "shear_profile_v0", &ctx, shear_profile_v0(t, -1.0))?;
    let shear = if seed.epsilon() > 0.0 { Some(stage("diagnose", "shear ratio", &ctx, prof.ratio(seed))?) } else { None };
    let selfsim = stage("diagnose", "selfsim_relations", &ctx, selfsim_relations(t, -1.0))?;
    let dir = format!("{sub}diagnostics");
    w.field(&dir, "shear_norm", AnyField::Scalar(prof.norm.clone()))?;
    Ok(DiagnosticsSummary { mass, shear, selfsim })
}

fn run_signature() -> SignatureSummary {
    let rep = signature_check(&builtin_corpus());
    let total = rep.equations.len();
    let bad = parse_corpus(&corrupt(CORPUS, "4beta", "om", "omb")).map(|c| signature_check(&c));
    SignatureSummary {
        records: total,
        passing: rep.n_pass(),
        failing: rep.equations.iter().filter(|e| !e.pass).map(|e| e.label.clone()).collect(),
        corruption_detected: bad.map(|b| b.n_pass() + 1 == total).unwrap_or(false),
    }
}

fn run_identities() -> Result<IdentityReport, CliError> {
    let g = SphereGrid::new(64, 64).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(tensor_identity_suite(&g, &IdentityOptions::default()))
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate(cmd == Command::Sweep).map_err(CliError::Config)?;
    let g = make_grid(cfg)?;
    let root = cfg.output.dir.clone();
    fs::create_dir_all(&root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
    let mut w = Writer { root: root.clone(), csv: cfg.output.csv, files: Vec::new() };
    let mut runs = Vec::new();
    let mut sweep = None;
    if cmd == Command::Sweep && !cfg.sweep.epsilon.is_empty() {
        let start = Instant::now();
        let mut rows = Vec::new();
        for &eps in &cfg.sweep.epsilon {
            let sub = format!("sweep/eps_{eps:e}/");
            let (seed, ss) = run_seed(cfg, &g, eps, &mut w, &sub)?;
            let (t, cs) = run_constraint(cfg, &seed, &mut w, &sub)?;
            let ds = run_diagnose(cfg, &seed, &t, None, &mut w, &sub)?;
            rows.push(SweepRow {
                epsilon: eps,
                kappa: cs.kappa,
                kappa_deviation: cs.asymptotic.kappa_deviation,
                div_b_deviation: cs.asymptotic.div_b_deviation,
                e_norm_h3: cs.asymptotic.e_norm_h3,
                mass: ds.mass.mass,
                shear_deviation: ds.shear.as_ref().map_or(f64::NAN, |s| s.max_deviation),
            });
            runs.push(RunRecord { epsilon: eps, seed: ss, constraint: Some(cs), chardata: None, diagnostics: Some(ds) });
        }
        let secs = start.elapsed().as_secs_f64();
        let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
        let col = |f: fn(&SweepRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
        let mut fits = BTreeMap::new();
        fits.insert("kappa_deviation".to_string(), loglog_fit(&eps, &col(|r| r.kappa_deviation)));
        fits.insert("div_b_deviation".to_string(), loglog_fit(&eps, &col(|r| r.div_b_deviation)));
        fits.insert("e_norm_h3".to_string(), loglog_fit(&eps, &col(|r| r.e_norm_h3)));
        fits.insert("mass".to_string(), loglog_fit(&eps, &col(|r| r.mass)));
        fits.insert("shear_deviation".to_string(), loglog_fit(&eps, &col(|r| r.shear_deviation)));
        let p = root.join("sweep.csv");
        let mut wr = csv::Writer::from_path(&p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        for r in &rows {
            wr.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        wr.flush().map_err(|e| CliError::Io(e.to_string()))?;
        w.note(&p);
        sweep = Some(SweepSummary { rows, fits, constraint_seconds: (!cfg.output.reference_mode).then_some(secs) });
    } else {
        let eps = cfg.seed.epsilon;
        let (seed, ss) = run_seed(cfg, &g, eps, &mut w, "")?;
        let mut rec = RunRecord { epsilon: eps, seed: ss, constraint: None, chardata: None, diagnostics: None };
        // an empty sweep degrades to one run at the configured epsilon
        let single_sweep = cmd == Command::Sweep;
        if cmd.depth() >= 1 {
            let (t, cs) = run_constraint(cfg, &seed, &mut w, "")?;
            rec.constraint = Some(cs);
            let mut bundle = None;
            if cmd.depth() == 2 || cmd == Command::All {
                let (b, s) = run_chardata(cfg, &t, &mut w, "")?;
                rec.chardata = Some(s);
                bundle = Some(b);
            }
            if cmd.depth() >= 3 || single_sweep {
                rec.diagnostics = Some(run_diagnose(cfg, &seed, &t, bundle.as_ref(), &mut w, "")?);
            }
        }
        runs.push(rec);
    }
    let (signature, identities) = if cmd.depth() >= 3 { (Some(run_signature()), Some(run_identities()?)) } else { (None, None) };
    let mut report = Report {
        tool: "ksim".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cmd.name().into(),
        config: cfg.clone(),
        runs,
        sweep,
        signature,
        identities,
        acceptance: BTreeMap::new(),
        artifacts: Vec::new(),
    };
    report.acceptance = crate::matrix::evaluate(&report);
    w.note(&root.join("report.json"));
    report.artifacts = std::mem::take(&mut w.files);
    report.artifacts.sort();
    let p = root.join("report.json");
    io::write_json(&p, &report).map_err(io_err(&p))?;
    Ok(report)
}
