//! TOML configuration: parsing, defaults and validation with key paths.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use okms::harness::SuiteConfig;
use okms::phasefield::InterfaceSpec;
use okms::{Error, SimParams, SphereFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    OkRun,
    MsRun,
    Sweep,
    CheckAll,
    Profile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Defaults to `ε³`.
    pub dt: Option<f64>,
    /// Defaults to the smallest stabilizing value scaled for `ε`.
    pub stabilization: Option<f64>,
}

fn default_eps() -> f64 {
    0.04
}

fn default_t_end() -> f64 {
    0.005
}

impl Default for ParamsSection {
    fn default() -> Self {
        ParamsSection {
            eps: default_eps(),
            lambda: 0.0,
            t_end: default_t_end(),
            dt: None,
            stabilization: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// Radially symmetric states in the unit ball (`space_dim = 1` is the slab).
    Radial,
    /// The unit interval on a cell-centred grid.
    Interval,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    #[serde(default = "default_domain")]
    pub domain: Domain,
    #[serde(default = "default_dim")]
    pub space_dim: usize,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_phase")]
    pub innermost_phase: f64,
    /// Grid nodes per `ε` (radial) or cells per `ε` (interval).
    #[serde(default = "default_per_eps")]
    pub nodes_per_eps: f64,
}

fn default_domain() -> Domain {
    Domain::Radial
}

fn default_dim() -> usize {
    3
}

fn default_radii() -> Vec<f64> {
    vec![0.4, 0.7]
}

fn default_phase() -> f64 {
    -1.0
}

fn default_per_eps() -> f64 {
    8.0
}

impl Default for GeometrySection {
    fn default() -> Self {
        GeometrySection {
            domain: default_domain(),
            space_dim: default_dim(),
            radii: default_radii(),
            innermost_phase: default_phase(),
            nodes_per_eps: default_per_eps(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Steps between records (`ok-run`).
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    /// Records between snapshots (`ok-run`); none when absent.
    pub snapshot_every: Option<usize>,
}

fn default_record_every() -> usize {
    100
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            record_every: default_record_every(),
            snapshot_every: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
    #[serde(default = "default_dt_factor")]
    pub dt_factor: f64,
    #[serde(default = "default_intervals")]
    pub intervals: usize,
}

fn default_eps_list() -> Vec<f64> {
    vec![0.08, 0.04, 0.02, 0.01]
}

fn default_dt_factor() -> f64 {
    0.03
}

fn default_intervals() -> usize {
    64
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            eps_list: default_eps_list(),
            dt_factor: default_dt_factor(),
            intervals: default_intervals(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Optional in the file; the subcommand decides.
    pub experiment: Option<Experiment>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub geometry: GeometrySection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub suite: SuiteConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("invalid config {path}: {source}")]
    Invalid { path: PathBuf, source: Error },
}

impl Config {
    pub fn sim_params(&self) -> Result<SimParams, Error> {
        let p = &self.params;
        let mut sp = SimParams::new(p.eps, p.lambda, p.t_end)?;
        if let Some(dt) = p.dt {
            sp = sp.with_dt(dt);
        }
        if let Some(s) = p.stabilization {
            sp = sp.with_stabilization(s);
        }
        sp.validate()?;
        Ok(sp)
    }

    pub fn family(&self) -> Result<SphereFamily, Error> {
        let g = &self.geometry;
        if g.space_dim == 1 {
            SphereFamily::slab(g.radii.clone(), g.innermost_phase)
        } else {
            SphereFamily::new(g.radii.clone(), g.innermost_phase, g.space_dim)
        }
    }

    pub fn interface_spec(&self) -> Result<InterfaceSpec, Error> {
        InterfaceSpec::new(self.geometry.radii.clone(), self.geometry.innermost_phase)
    }

    /// Every section the experiment uses, checked before anything runs.
    pub fn validate(&self) -> Result<(), Error> {
        let g = &self.geometry;
        if g.radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("geometry.radii", "radii must be strictly ascending"));
        }
        if !(g.nodes_per_eps >= 8.0) {
            return Err(Error::param("geometry.nodes_per_eps", "must be at least 8"));
        }
        if g.space_dim == 0 {
            return Err(Error::param("geometry.space_dim", "must be positive"));
        }
        if g.domain == Domain::Interval && g.space_dim != 1 {
            return Err(Error::param("geometry.space_dim", "the interval domain is one-dimensional"));
        }
        match self.experiment.unwrap_or(Experiment::Profile) {
            Experiment::OkRun => {
                self.sim_params()?;
                self.family()?;
                if self.output.record_every == 0 {
                    return Err(Error::param("output.record_every", "must be positive"));
                }
            }
            Experiment::MsRun => {
                self.sim_params()?;
                self.family()?;
            }
            Experiment::Sweep => {
                self.sim_params()?;
                self.sweep_plan()?.validate()?;
            }
            Experiment::CheckAll => {
                let s = &self.suite;
                if s.eps_list.len() < 2 || s.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
                    return Err(Error::param("suite.eps_list", "needs at least two strictly descending values"));
                }
                s.family()?;
                for &l in &s.lambdas {
                    s.plan(l)?.validate()?;
                }
            }
            Experiment::Profile => {
                self.sim_params()?;
            }
        }
        Ok(())
    }

    pub fn sweep_plan(&self) -> Result<okms::harness::SweepPlan, Error> {
        let mut plan = okms::harness::SweepPlan::new(
            "sweep",
            self.family()?,
            self.params.lambda,
            self.sweep.eps_list.clone(),
            self.params.t_end,
        );
        plan.nodes_per_eps = self.geometry.nodes_per_eps;
        plan.dt_factor = self.sweep.dt_factor;
        plan.intervals = self.sweep.intervals;
        Ok(plan)
    }
}

/// Parses and validates; `command` overrides (and must agree with) the file's
/// `experiment`.
pub fn parse_config_str(text: &str, path: &Path, command: Option<Experiment>) -> Result<Config, ConfigError> {
    let mut cfg: Config = toml::from_str(text).map_err(|e| ConfigError::Schema {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if let Some(cmd) = command {
        if let Some(file) = cfg.experiment {
            if file != cmd {
                return Err(ConfigError::Schema {
                    path: path.to_path_buf(),
                    message: format!("`experiment` is {file:?} but the command is {cmd:?}"),
                });
            }
        }
        cfg.experiment = Some(cmd);
    }
    cfg.validate().map_err(|source| ConfigError::Invalid {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(cfg)
}

pub fn parse_config(path: &Path, command: Option<Experiment>) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text, path, command)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Config, ConfigError> {
        parse_config_str(s, Path::new("test.toml"), None)
    }

    #[test]
    fn minimal_file_fills_defaults() {
        let c = parse("experiment = \"ms-run\"\n").unwrap();
        assert_eq!(c.experiment, Some(Experiment::MsRun));
        assert_eq!(c.geometry.radii, vec![0.4, 0.7]);
        assert_eq!(c.params.eps, 0.04);
        assert_eq!(c.suite.eps_list, vec![0.08, 0.04, 0.02, 0.01]);
    }

    #[test]
    fn negative_eps_names_its_key() {
        let e = parse("experiment = \"ok-run\"\n[params]\neps = -0.1\n").unwrap_err();
        assert!(e.to_string().contains("params.eps"), "{e}");
    }

    #[test]
    fn unordered_radii_name_their_key() {
        let e = parse("experiment = \"ms-run\"\n[geometry]\nradii = [0.7, 0.4]\n").unwrap_err();
        assert!(e.to_string().contains("geometry.radii"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse("experiment = \"ms-run\"\n[params]\nepsilon = 0.1\n").unwrap_err();
        assert!(matches!(e, ConfigError::Schema { .. }));
        assert!(e.to_string().contains("epsilon"), "{e}");
        let e = parse("experiment = \"check-all\"\n[suite.tolerances]\ntransport = 0.5\n").unwrap_err();
        assert!(e.to_string().contains("transport"), "{e}");
    }

    #[test]
    fn command_must_agree_with_the_file() {
        let p = Path::new("x.toml");
        assert!(parse_config_str("experiment = \"ms-run\"\n", p, Some(Experiment::OkRun)).is_err());
        let c = parse_config_str("", p, Some(Experiment::OkRun)).unwrap();
        assert_eq!(c.experiment, Some(Experiment::OkRun));
    }
}
