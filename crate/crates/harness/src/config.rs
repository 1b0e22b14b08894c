//! JSON experiment configuration, parsed and validated before any computation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use deepmix_core::kim::{RhoSpec, SiteStates};
use deepmix_core::tensor::DensityMatrix;
use deepmix_core::Limits;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fig1b,
    Dynamics,
    Selfdual,
    ScroogeCheck,
    GhseCheck,
    McRefCheck,
    ConcentrationScan,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Fig1b,
        ExperimentKind::Dynamics,
        ExperimentKind::Selfdual,
        ExperimentKind::ScroogeCheck,
        ExperimentKind::GhseCheck,
        ExperimentKind::McRefCheck,
        ExperimentKind::ConcentrationScan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Fig1b => "fig1b",
            ExperimentKind::Dynamics => "dynamics",
            ExperimentKind::Selfdual => "selfdual",
            ExperimentKind::ScroogeCheck => "scrooge_check",
            ExperimentKind::GhseCheck => "ghse_check",
            ExperimentKind::McRefCheck => "mc_ref_check",
            ExperimentKind::ConcentrationScan => "concentration_scan",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|k| k.as_str()).collect();
                config_err(format!(
                    "unknown experiment `{s}`, expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

fn default_threads() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

/// Top-level config document. `parameters` is checked against the schema of
/// `experiment` by [`ExperimentConfig::parameters`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub master_seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub parameters: serde_json::Value,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            HarnessError::Config(m) => config_err(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses `parameters` for `experiment` and checks every value and size cap.
    pub fn validate(&self, limits: &Limits) -> Result<Parameters> {
        if self.threads == 0 {
            return Err(config_err("threads: must be positive"));
        }
        let params = Parameters::parse(self.experiment, &self.parameters)?;
        params.validate(limits)?;
        Ok(params)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Couplings {
    pub j: f64,
    pub g: f64,
    pub h: f64,
}

/// Mixed state on `S`. Omitted, it is a full-rank Ginibre draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhoConfig {
    Ginibre {
        #[serde(default)]
        rank: Option<usize>,
    },
    Flat {
        rank: usize,
    },
    Pure,
    Diagonal {
        populations: Vec<f64>,
    },
}

impl RhoConfig {
    pub fn to_spec(&self, s_size: usize) -> Result<RhoSpec> {
        let ds = 1usize << s_size;
        Ok(match self {
            RhoConfig::Ginibre { rank: None } => RhoSpec::Ginibre { rank: ds },
            RhoConfig::Ginibre { rank: Some(r) } => RhoSpec::Ginibre { rank: *r },
            RhoConfig::Flat { rank } => RhoSpec::Flat { rank: *rank },
            RhoConfig::Pure => RhoSpec::Pure,
            RhoConfig::Diagonal { populations } => RhoSpec::Explicit(
                DensityMatrix::diagonal(populations)
                    .map_err(|e| HarnessError::from_check("rho.populations", e))?,
            ),
        })
    }

    /// `None` stands for a full-rank Ginibre state.
    pub fn resolve(cfg: &Option<RhoConfig>, s_size: usize) -> Result<RhoSpec> {
        match cfg {
            Some(c) => c.to_spec(s_size),
            None => Ok(RhoSpec::Ginibre { rank: 1 << s_size }),
        }
    }

    fn validate(&self, key: &str, s_size: usize) -> Result<()> {
        let ds = 1usize << s_size;
        match self {
            RhoConfig::Ginibre { rank: Some(r) } | RhoConfig::Flat { rank: r }
                if *r == 0 || *r > ds =>
            {
                Err(config_err(format!("{key}.rank: {r} outside 1..={ds}")))
            }
            RhoConfig::Diagonal { populations } if populations.len() != ds => {
                Err(config_err(format!(
                    "{key}.populations: {} values for a {ds}-dimensional state",
                    populations.len()
                )))
            }
            _ => self.to_spec(s_size).map(|_| ()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SiteStatesConfig {
    Plus,
    #[default]
    Random,
}

impl SiteStatesConfig {
    pub fn to_spec(self) -> SiteStates {
        match self {
            SiteStatesConfig::Plus => SiteStates::Plus,
            SiteStatesConfig::Random => SiteStates::Random,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig1bParams {
    pub a_size: usize,
    pub b_size: usize,
    pub k_list: Vec<usize>,
    /// Explicit interpolation parameters in `[0, 1]`.
    #[serde(default)]
    pub epsilon_grid: Option<Vec<f64>>,
    /// Evenly spaced grid over `[0, 1]` with this many points.
    #[serde(default)]
    pub epsilon_points: Option<usize>,
}

impl Fig1bParams {
    pub fn epsilons(&self) -> Vec<f64> {
        match (&self.epsilon_grid, self.epsilon_points) {
            (Some(g), _) => g.clone(),
            (None, Some(1)) => vec![0.0],
            (None, Some(n)) => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
            (None, None) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsParams {
    pub couplings: Couplings,
    pub s_size: usize,
    pub a_size: usize,
    pub b_sizes: Vec<usize>,
    pub t_max: usize,
    pub k_list: Vec<usize>,
    pub n_realizations: usize,
    #[serde(default)]
    pub rho_s: Option<RhoConfig>,
    #[serde(default)]
    pub e_states: SiteStatesConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfdualParams {
    pub g: f64,
    pub s_size: usize,
    pub a_size: usize,
    pub b_sizes: Vec<usize>,
    pub t_max: usize,
    pub k_list: Vec<usize>,
    #[serde(default)]
    pub rho_s: Option<RhoConfig>,
    /// Which `rho_S` draw to use.
    #[serde(default)]
    pub realization: u64,
    /// When set, also report distances to a sampled finite-`|B|` reference.
    #[serde(default)]
    pub finite_reference_unitaries: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScroogeCheckParams {
    pub s_size: usize,
    pub a_size: usize,
    pub k_list: Vec<usize>,
    pub n_samples: usize,
    #[serde(default)]
    pub rho0: Option<RhoConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhseCheckParams {
    pub rank_dim: usize,
    pub local_dim: usize,
    pub k_list: Vec<usize>,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McRefCheckParams {
    pub spectrum: Vec<f64>,
    pub a_size: usize,
    pub b_size: usize,
    pub k_list: Vec<usize>,
    pub n_unitaries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationParams {
    pub a_size: usize,
    pub b_sizes: Vec<usize>,
    pub n_samples: usize,
    /// Size of the measured block for the `norm` statistic (last qubits).
    #[serde(default = "default_norm_b_size")]
    pub norm_b_size: usize,
}

fn default_norm_b_size() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq)]
pub enum Parameters {
    Fig1b(Fig1bParams),
    Dynamics(DynamicsParams),
    Selfdual(SelfdualParams),
    ScroogeCheck(ScroogeCheckParams),
    GhseCheck(GhseCheckParams),
    McRefCheck(McRefCheckParams),
    ConcentrationScan(ConcentrationParams),
}

fn parse<T: DeserializeOwned>(kind: ExperimentKind, v: &serde_json::Value) -> Result<T> {
    T::deserialize(v).map_err(|e| config_err(format!("parameters for {kind}: {e}")))
}

fn check_k_list(k_list: &[usize], local_dim: usize, limits: &Limits) -> Result<()> {
    if k_list.is_empty() {
        return Err(config_err("k_list: must not be empty"));
    }
    for &k in k_list {
        if k == 0 {
            return Err(config_err("k_list: moments start at k = 1"));
        }
        limits
            .check_k(k)
            .map_err(|e| HarnessError::from_check("k_list", e))?;
        limits
            .check_power_dim(local_dim, k)
            .map_err(|e| HarnessError::from_check("k_list", e))?;
    }
    Ok(())
}

fn positive(key: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(config_err(format!("{key}: must be positive")));
    }
    Ok(())
}

fn check_chain(s_size: usize, a_size: usize, b_sizes: &[usize], limits: &Limits) -> Result<()> {
    positive("a_size", a_size)?;
    if b_sizes.is_empty() {
        return Err(config_err("b_sizes: must not be empty"));
    }
    for &b in b_sizes {
        positive("b_sizes", b)?;
        if s_size > a_size + b {
            return Err(config_err(format!(
                "s_size: {s_size} exceeds the {}-site chain",
                a_size + b
            )));
        }
        limits
            .check_state_qubits(s_size + a_size + b)
            .map_err(|e| HarnessError::from_check("b_sizes", e))?;
        limits
            .check_measured_qubits(b)
            .map_err(|e| HarnessError::from_check("b_sizes", e))?;
    }
    Ok(())
}

impl Parameters {
    pub fn parse(kind: ExperimentKind, v: &serde_json::Value) -> Result<Self> {
        Ok(match kind {
            ExperimentKind::Fig1b => Parameters::Fig1b(parse(kind, v)?),
            ExperimentKind::Dynamics => Parameters::Dynamics(parse(kind, v)?),
            ExperimentKind::Selfdual => Parameters::Selfdual(parse(kind, v)?),
            ExperimentKind::ScroogeCheck => Parameters::ScroogeCheck(parse(kind, v)?),
            ExperimentKind::GhseCheck => Parameters::GhseCheck(parse(kind, v)?),
            ExperimentKind::McRefCheck => Parameters::McRefCheck(parse(kind, v)?),
            ExperimentKind::ConcentrationScan => Parameters::ConcentrationScan(parse(kind, v)?),
        })
    }

    pub fn validate(&self, limits: &Limits) -> Result<()> {
        match self {
            Parameters::Fig1b(p) => {
                positive("a_size", p.a_size)?;
                limits
                    .check_state_qubits(p.a_size + p.b_size)
                    .map_err(|e| HarnessError::from_check("b_size", e))?;
                check_k_list(&p.k_list, 1 << p.a_size, limits)?;
                match (&p.epsilon_grid, p.epsilon_points) {
                    (Some(_), Some(_)) => {
                        return Err(config_err(
                            "epsilon_grid: give either epsilon_grid or epsilon_points",
                        ))
                    }
                    (None, None) => {
                        return Err(config_err("epsilon_grid: missing (or set epsilon_points)"))
                    }
                    (None, Some(0)) => return Err(config_err("epsilon_points: must be positive")),
                    _ => {}
                }
                if let Some(bad) = p.epsilons().iter().find(|e| !(0.0..=1.0).contains(*e)) {
                    return Err(config_err(format!("epsilon_grid: {bad} outside [0, 1]")));
                }
            }
            Parameters::Dynamics(p) => {
                let c = &p.couplings;
                if ![c.j, c.g, c.h].iter().all(|x| x.is_finite()) {
                    return Err(config_err("couplings: values must be finite"));
                }
                check_chain(p.s_size, p.a_size, &p.b_sizes, limits)?;
                check_k_list(&p.k_list, 1 << p.a_size, limits)?;
                positive("n_realizations", p.n_realizations)?;
                if let Some(r) = &p.rho_s {
                    r.validate("rho_s", p.s_size)?;
                }
            }
            Parameters::Selfdual(p) => {
                if !p.g.is_finite() {
                    return Err(config_err("g: must be finite"));
                }
                let r = p.g / (std::f64::consts::PI / 8.0);
                if (r - r.round()).abs() < 1e-9 {
                    return Err(config_err(format!("g: {} is a multiple of pi/8", p.g)));
                }
                check_chain(p.s_size, p.a_size, &p.b_sizes, limits)?;
                check_k_list(&p.k_list, 1 << p.a_size, limits)?;
                if let Some(r) = &p.rho_s {
                    r.validate("rho_s", p.s_size)?;
                }
                if let Some(n) = p.finite_reference_unitaries {
                    positive("finite_reference_unitaries", n)?;
                }
            }
            Parameters::ScroogeCheck(p) => {
                positive("s_size", p.s_size)?;
                positive("a_size", p.a_size)?;
                positive("n_samples", p.n_samples)?;
                limits
                    .check_power_dim(2, p.s_size + p.a_size)
                    .map_err(|e| HarnessError::from_check("s_size", e))?;
                check_k_list(&p.k_list, 1 << p.a_size, limits)?;
                if let Some(r) = &p.rho0 {
                    r.validate("rho0", p.s_size)?;
                }
            }
            Parameters::GhseCheck(p) => {
                positive("rank_dim", p.rank_dim)?;
                positive("local_dim", p.local_dim)?;
                positive("n_samples", p.n_samples)?;
                limits
                    .check_power_dim(p.rank_dim * p.local_dim, 1)
                    .map_err(|e| HarnessError::from_check("rank_dim", e))?;
                check_k_list(&p.k_list, p.local_dim, limits)?;
            }
            Parameters::McRefCheck(p) => {
                positive("a_size", p.a_size)?;
                positive("b_size", p.b_size)?;
                positive("n_unitaries", p.n_unitaries)?;
                limits
                    .check_state_qubits(p.a_size + p.b_size)
                    .map_err(|e| HarnessError::from_check("b_size", e))?;
                limits
                    .check_measured_qubits(p.b_size)
                    .map_err(|e| HarnessError::from_check("b_size", e))?;
                let s = deepmix_core::tensor::Spectrum::new(p.spectrum.clone())
                    .map_err(|e| HarnessError::from_check("spectrum", e))?;
                if s.len() > 1 << (p.a_size + p.b_size) {
                    return Err(config_err(
                        "spectrum: more levels than the system dimension",
                    ));
                }
                check_k_list(&p.k_list, 1 << p.a_size, limits)?;
            }
            Parameters::ConcentrationScan(p) => {
                positive("a_size", p.a_size)?;
                if p.n_samples < 2 {
                    return Err(config_err("n_samples: need at least 2 for a spread"));
                }
                if p.b_sizes.is_empty() {
                    return Err(config_err("b_sizes: must not be empty"));
                }
                positive("norm_b_size", p.norm_b_size)?;
                for &b in &p.b_sizes {
                    positive("b_sizes", b)?;
                    if p.norm_b_size >= p.a_size + b {
                        return Err(config_err("norm_b_size: must be smaller than every system"));
                    }
                    limits
                        .check_state_qubits(p.a_size + b)
                        .map_err(|e| HarnessError::from_check("b_sizes", e))?;
                    limits
                        .check_measured_qubits(b)
                        .map_err(|e| HarnessError::from_check("b_sizes", e))?;
                }
                check_k_list(&[2], 1 << p.a_size, limits)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: &str, params: &str) -> String {
        format!(r#"{{"experiment":"{kind}","master_seed":7,"parameters":{params}}}"#)
    }

    #[test]
    fn parses_and_validates() {
        let c = ExperimentConfig::from_json(&cfg(
            "fig1b",
            r#"{"a_size":2,"b_size":4,"k_list":[2,3,4],"epsilon_points":20}"#,
        ))
        .unwrap();
        let Parameters::Fig1b(p) = c.validate(&Limits::default()).unwrap() else {
            panic!()
        };
        assert_eq!(p.epsilons().len(), 20);
        assert_eq!(c.threads, 1);
    }

    #[test]
    fn unknown_and_missing_keys_are_named() {
        let e = ExperimentConfig::from_json(&cfg(
            "ghse_check",
            r#"{"rank_dim":2,"local_dim":2,"k_list":[2],"n_samples":5,"bogus":1}"#,
        ))
        .unwrap()
        .validate(&Limits::default())
        .unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        assert_eq!(e.exit_code(), 2);
        let e = ExperimentConfig::from_json(&cfg(
            "ghse_check",
            r#"{"rank_dim":2,"local_dim":2,"n_samples":5}"#,
        ))
        .unwrap()
        .validate(&Limits::default())
        .unwrap_err();
        assert!(e.to_string().contains("k_list"), "{e}");
        let e = ExperimentConfig::from_json(
            r#"{"experiment":"fig1b","master_seed":1,"parameters":{},"extra":0}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("extra"));
    }

    #[test]
    fn caps_are_budget_errors() {
        let e = ExperimentConfig::from_json(&cfg(
            "dynamics",
            r#"{"couplings":{"j":0.8,"g":0.6,"h":0.7},"s_size":3,"a_size":2,"b_sizes":[20],"t_max":2,"k_list":[2],"n_realizations":1}"#,
        ))
        .unwrap()
        .validate(&Limits::default())
        .unwrap_err();
        assert_eq!(e.exit_code(), 3, "{e}");
        let e = ExperimentConfig::from_json(&cfg(
            "ghse_check",
            r#"{"rank_dim":2,"local_dim":2,"k_list":[9],"n_samples":5}"#,
        ))
        .unwrap()
        .validate(&Limits::default())
        .unwrap_err();
        assert_eq!(e.exit_code(), 3, "{e}");
    }

    #[test]
    fn rho_config_variants() {
        let p: SelfdualParams = serde_json::from_str(
            r#"{"g":0.349,"s_size":1,"a_size":2,"b_sizes":[4],"t_max":3,"k_list":[2],
                "rho_s":{"kind":"diagonal","populations":[0.75,0.25]}}"#,
        )
        .unwrap();
        assert!(matches!(
            RhoConfig::resolve(&p.rho_s, 1).unwrap(),
            RhoSpec::Explicit(_)
        ));
        let p: SelfdualParams = serde_json::from_str(
            r#"{"g":0.349,"s_size":1,"a_size":2,"b_sizes":[4],"t_max":3,"k_list":[2]}"#,
        )
        .unwrap();
        assert_eq!(
            RhoConfig::resolve(&p.rho_s, 1).unwrap(),
            RhoSpec::Ginibre { rank: 2 }
        );
        assert!(Parameters::Selfdual(SelfdualParams {
            g: std::f64::consts::PI / 4.0,
            ..p
        })
        .validate(&Limits::default())
        .is_err());
    }
}
