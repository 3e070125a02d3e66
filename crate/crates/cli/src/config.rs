use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ksim_core::chardata::CharDataOptions;
use ksim_core::constraint::PicardOptions;
use ksim_core::linalg::SolveOptions;
use ksim_core::seed::{SeedParams, ZSpec};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n_theta: 48, n_phi: 96 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SeedConfig {
    pub epsilon: f64,
    pub gamma: f64,
    pub r: f64,
    pub z_spec: ZSpec,
    pub order_exponent: f64,
    pub m0: u32,
    pub m1: u32,
}

impl Default for SeedConfig {
    fn default() -> Self {
        let p = SeedParams::default();
        SeedConfig {
            epsilon: p.epsilon,
            gamma: p.gamma,
            r: p.r_const,
            z_spec: p.z_spec,
            order_exponent: p.order_exponent,
            m0: p.m0,
            m1: p.m1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub linear_tol: f64,
    pub linear_max_iter: usize,
    pub accept_residual: f64,
    pub evolution_steps_per_octave: usize,
    pub outgoing_steps_per_octave: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let p = PicardOptions::default();
        let c = CharDataOptions::default();
        SolverConfig {
            picard_tol: p.tol,
            picard_max_iter: p.max_iter,
            linear_tol: p.solve.tol,
            linear_max_iter: p.solve.max_iter,
            accept_residual: p.solve.accept_residual,
            evolution_steps_per_octave: c.chihat.evolution.steps_per_octave,
            outgoing_steps_per_octave: c.outgoing.steps_per_octave,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CharDataConfig {
    pub v_bar: f64,
    pub v_min: f64,
    pub v_hat_max: Option<f64>,
    pub seed_model: bool,
    /// On Riccati blow-up, rerun the outgoing segment up to this fraction of the blow-up point.
    pub blowup_backoff: Option<f64>,
}

impl Default for CharDataConfig {
    fn default() -> Self {
        let c = CharDataOptions::default();
        CharDataConfig { v_bar: c.v_bar, v_min: c.v_min, v_hat_max: c.v_hat_max, seed_model: c.seed_model, blowup_backoff: Some(0.5) }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub epsilon: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { epsilon: vec![4e-3, 2e-3, 1e-3] }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub reference_mode: bool,
    pub csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("ksim_out"), reference_mode: false, csv: true }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub seed: SeedConfig,
    pub solver: SolverConfig,
    pub chardata: CharDataConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub gamma: Option<f64>,
    pub grid: Option<(usize, usize)>,
    pub out: Option<PathBuf>,
    pub sweep_epsilon: Option<Vec<f64>>,
    pub reference_mode: bool,
}

pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("grid must look like NxM, got {s:?}"))?;
    let n = a.trim().parse().map_err(|e| format!("grid n_theta {a:?}: {e}"))?;
    let m = b.trim().parse().map_err(|e| format!("grid n_phi {b:?}: {e}"))?;
    Ok((n, m))
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|v| v.trim().parse::<f64>().map_err(|e| format!("sweep value {v:?}: {e}"))).collect()
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: Option<&Path>) -> Result<RunConfig, String> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
                RunConfig::from_toml(&text).map_err(|e| format!("{}: {e}", p.display()))
            }
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(e) = o.epsilon {
            self.seed.epsilon = e;
        }
        if let Some(g) = o.gamma {
            self.seed.gamma = g;
        }
        if let Some((n, m)) = o.grid {
            self.grid = GridConfig { n_theta: n, n_phi: m };
        }
        if let Some(d) = &o.out {
            self.output.dir = d.clone();
        }
        if let Some(s) = &o.sweep_epsilon {
            self.sweep.epsilon = s.clone();
        }
        if o.reference_mode {
            self.output.reference_mode = true;
        }
    }

    pub fn validate(&self, sweep_mode: bool) -> Result<(), String> {
        let s = &self.solver;
        for (name, v) in [("picard_tol", s.picard_tol), ("linear_tol", s.linear_tol), ("accept_residual", s.accept_residual)] {
            if !(v > 0.0) {
                return Err(format!("solver.{name} must be positive, got {v}"));
            }
        }
        if s.picard_max_iter == 0 || s.linear_max_iter == 0 {
            return Err("solver iteration limits must be positive".into());
        }
        let c = &self.chardata;
        if !(c.v_min > 0.0 && c.v_min < c.v_bar) {
            return Err(format!("chardata needs 0 < v_min < v_bar, got v_min = {}, v_bar = {}", c.v_min, c.v_bar));
        }
        if let Some(v) = c.v_hat_max {
            if !(v > 0.0) {
                return Err(format!("chardata.v_hat_max must be positive, got {v}"));
            }
        }
        if let Some(f) = c.blowup_backoff {
            if !(f > 0.0 && f < 1.0) {
                return Err(format!("chardata.blowup_backoff must lie in (0, 1), got {f}"));
            }
        }
        if sweep_mode {
            if let Some(e) = self.sweep.epsilon.iter().find(|e| !(**e > 0.0)) {
                return Err(format!("sweep values must be positive, got {e}"));
            }
        }
        Ok(())
    }

    pub fn seed_params(&self, epsilon: f64) -> SeedParams {
        let s = &self.seed;
        SeedParams {
            epsilon,
            gamma: s.gamma,
            r_const: s.r,
            z_spec: s.z_spec.clone(),
            order_exponent: s.order_exponent,
            m0: s.m0,
            m1: s.m1,
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.solver.linear_tol,
            max_iter: self.solver.linear_max_iter,
            accept_residual: self.solver.accept_residual,
            ..SolveOptions::default()
        }
    }

    pub fn picard_options(&self) -> PicardOptions {
        PicardOptions { tol: self.solver.picard_tol, max_iter: self.solver.picard_max_iter, solve: self.solve_options() }
    }

    pub fn chardata_options(&self) -> CharDataOptions {
        let mut o = CharDataOptions {
            v_bar: self.chardata.v_bar,
            v_min: self.chardata.v_min,
            v_hat_max: self.chardata.v_hat_max,
            seed_model: self.chardata.seed_model,
            solve: self.solve_options(),
            ..CharDataOptions::default()
        };
        o.chihat.evolution.steps_per_octave = self.solver.evolution_steps_per_octave;
        o.outgoing.steps_per_octave = self.solver.outgoing_steps_per_octave;
        o
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = RunConfig::default();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
        assert_eq!(RunConfig::from_toml("").unwrap(), c);
    }

    #[test]
    fn partial_file_and_overrides() {
        let mut c = RunConfig::from_toml("[seed]\nepsilon = 2e-3\n[grid]\nn_theta = 24\n").unwrap();
        assert_eq!((c.seed.epsilon, c.grid.n_theta, c.grid.n_phi), (2e-3, 24, 96));
        c.apply(&Overrides { gamma: Some(0.2), grid: Some((16, 32)), ..Default::default() });
        assert_eq!((c.seed.gamma, c.grid.n_phi), (0.2, 32));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::from_toml("[seed]\nepsilonn = 1\n").is_err());
        let mut c = RunConfig::default();
        c.solver.picard_tol = 0.0;
        assert!(c.validate(false).is_err());
        let mut c = RunConfig::default();
        c.sweep.epsilon = vec![1e-3, 0.0];
        assert!(c.validate(false).is_ok());
        assert!(c.validate(true).is_err());
    }

    #[test]
    fn flag_parsers() {
        assert_eq!(parse_grid("48x96").unwrap(), (48, 96));
        assert!(parse_grid("48*96").is_err());
        assert_eq!(parse_list("4e-3, 2e-3,1e-3").unwrap(), vec![4e-3, 2e-3, 1e-3]);
        assert!(parse_list("1e-3,,").is_err());
        assert!(parse_list(" ").unwrap().is_empty());
    }
}
