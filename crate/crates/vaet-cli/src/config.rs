//! Run configuration: the TOML file schema and the label/value parsers
//! shared by the config file and the inline CLI flags.
//!
//! A config file needs `schema_version = 1` at the top level and may carry
//! four tables:
//!
//! * `[sweep]`: axis, values, initial state, replicates, master seed;
//! * `[model]`: a full explicit model (otherwise a preset is required);
//! * `[overrides]`: scalar patches applied on top of the preset or model;
//! * `[run]`: horizon, record count and integrator tolerances.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use vaet::model::{presets, CouplingScheme, EnergyScheme, ModelParams};

pub use crate::output::SCHEMA_VERSION;

/// Parameter path a sweep walks over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "epsilon")]
    Epsilon,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "nbar")]
    Nbar,
    #[serde(rename = "gamma_d")]
    GammaD,
    #[serde(rename = "sigma_g")]
    SigmaG,
    #[serde(rename = "sigma_eps")]
    SigmaEps,
    #[serde(rename = "L")]
    SitesPerMonomer,
    #[serde(rename = "n_monomers")]
    NMonomers,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Epsilon => "epsilon",
            Axis::Gamma => "gamma",
            Axis::Nbar => "nbar",
            Axis::GammaD => "gamma_d",
            Axis::SigmaG => "sigma_g",
            Axis::SigmaEps => "sigma_eps",
            Axis::SitesPerMonomer => "L",
            Axis::NMonomers => "n_monomers",
        }
    }

    /// Axes whose values are disorder widths rather than model fields.
    pub fn is_disorder(self) -> bool {
        matches!(self, Axis::SigmaG | Axis::SigmaEps)
    }

    /// Axes whose values must be small positive integers.
    pub fn is_count(self) -> bool {
        matches!(self, Axis::SitesPerMonomer | Axis::NMonomers)
    }
}

impl FromStr for Axis {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "epsilon" => Axis::Epsilon,
            "gamma" => Axis::Gamma,
            "nbar" => Axis::Nbar,
            "gamma_d" => Axis::GammaD,
            "sigma_g" => Axis::SigmaG,
            "sigma_eps" => Axis::SigmaEps,
            "L" | "l" => Axis::SitesPerMonomer,
            "n_monomers" => Axis::NMonomers,
            other => bail!(
                "unknown axis {other:?}; expected one of epsilon, gamma, nbar, gamma_d, \
                 sigma_g, sigma_eps, L, n_monomers"
            ),
        })
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Initial-state label. Non-thermal labels start from the pattern's
/// displaced vacuum; `thermal` uses the donor pattern at the model's nbar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitState {
    Triplet,
    Singlet,
    /// Excitation on one named site, zero-based.
    Product(usize),
    /// Highest-energy donor exciton.
    E1,
    W,
    Thermal,
}

impl FromStr for InitState {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(site) = s.strip_prefix("product-") {
            let site: usize =
                site.parse().with_context(|| format!("bad site index in init state {s:?}"))?;
            return Ok(InitState::Product(site));
        }
        Ok(match s {
            "triplet" => InitState::Triplet,
            "singlet" => InitState::Singlet,
            "E1" | "e1" => InitState::E1,
            "W" | "w" => InitState::W,
            "thermal" => InitState::Thermal,
            other => bail!(
                "unknown init state {other:?}; expected triplet, singlet, product-<site>, \
                 E1, W or thermal"
            ),
        })
    }
}

impl fmt::Display for InitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitState::Triplet => f.write_str("triplet"),
            InitState::Singlet => f.write_str("singlet"),
            InitState::Product(k) => write!(f, "product-{k}"),
            InitState::E1 => f.write_str("E1"),
            InitState::W => f.write_str("W"),
            InitState::Thermal => f.write_str("thermal"),
        }
    }
}

impl Serialize for InitState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for InitState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Sweep values: an explicit list or an inclusive range.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisValues {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl AxisValues {
    /// Expands to the concrete value list, validating finiteness.
    pub fn expand(&self) -> anyhow::Result<Vec<f64>> {
        let values = match self {
            AxisValues::List(v) => v.clone(),
            AxisValues::Range { start, stop, step } => {
                if !(step > &0.0) || !start.is_finite() || !stop.is_finite() {
                    bail!("range needs finite start/stop and step > 0");
                }
                if stop < start {
                    bail!("range stop {stop} below start {start}");
                }
                // Half-step slack keeps the intended endpoint inside the
                // list despite accumulated rounding.
                let n = ((stop - start) / step + 0.5).floor() as usize;
                (0..=n).map(|k| start + step * k as f64).collect()
            }
        };
        if values.is_empty() {
            bail!("axis value list is empty");
        }
        if values.iter().any(|v| !v.is_finite()) {
            bail!("axis values must be finite");
        }
        Ok(values)
    }
}

/// Parses the inline `--values` flag: `start:stop:step` or a comma list.
pub fn parse_values(s: &str) -> anyhow::Result<AxisValues> {
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            bail!("range syntax is start:stop:step, got {s:?}");
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number {p:?}")))
            .collect::<anyhow::Result<_>>()?;
        Ok(AxisValues::Range { start: nums[0], stop: nums[1], step: nums[2] })
    } else {
        let list: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number {p:?}")))
            .collect::<anyhow::Result<_>>()?;
        Ok(AxisValues::List(list))
    }
}

fn default_replicates() -> usize {
    1
}

fn default_init() -> InitState {
    InitState::Triplet
}

/// One sweep or ensemble request.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub preset: Option<String>,
    pub axis: Axis,
    pub values: AxisValues,
    #[serde(default = "default_init")]
    pub init_state: InitState,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub master_seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> anyhow::Result<Vec<f64>> {
        if self.replicates == 0 {
            bail!("replicates must be at least 1");
        }
        let values = self.values.expand()?;
        if self.axis.is_count() {
            for &v in &values {
                if v.fract() != 0.0 || v < 2.0 {
                    bail!("axis {} needs integer values >= 2, got {v}", self.axis);
                }
            }
        }
        if self.axis.is_disorder() {
            if values.iter().any(|&v| v < 0.0) {
                bail!("disorder widths must be non-negative");
            }
        }
        Ok(values)
    }
}

/// Horizon and integrator controls. The horizon is counted in mode
/// periods: `t_final = periods * 2 pi / omega`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub t_final_periods: f64,
    pub n_records: usize,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self { t_final_periods: 100.0, n_records: 128, rtol: 1e-6, atol: 1e-9 }
    }
}

impl RunSettings {
    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.t_final_periods > 0.0) {
            bail!("t_final_periods must be positive");
        }
        // The integral rate estimator needs at least 100 record points.
        if self.n_records < 100 {
            bail!("n_records must be at least 100, got {}", self.n_records);
        }
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            bail!("tolerances must be positive");
        }
        Ok(())
    }

    pub fn t_final(&self, omega: f64) -> f64 {
        self.t_final_periods * 2.0 * std::f64::consts::PI / omega
    }
}

/// Scalar patches applied after preset expansion, covering the quantities
/// the bundled studies vary (the dashed-line variants of the damping scan
/// are expressed through these).
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub g: Option<f64>,
    pub j: Option<f64>,
    pub p: Option<f64>,
    pub gamma: Option<f64>,
    pub nbar: Option<f64>,
    pub gamma_d: Option<f64>,
    pub phonon_cutoff: Option<usize>,
    pub n_monomers: Option<usize>,
    pub sites_per_monomer: Option<usize>,
    pub coolants_per_gap: Option<usize>,
    pub coupling_truncation: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, params: &mut ModelParams<f64>) {
        if let Some(e) = self.epsilon {
            params.epsilon_scheme = EnergyScheme::Symmetric { epsilon: e };
        }
        if let Some(g) = self.g {
            params.g_scheme = CouplingScheme::AlternatingSign { g };
        }
        if let Some(j) = self.j {
            params.j = j;
        }
        if let Some(p) = self.p {
            params.p = p;
        }
        if let Some(gamma) = self.gamma {
            params.gamma = gamma;
        }
        if let Some(nbar) = self.nbar {
            params.nbar = nbar;
        }
        if let Some(gamma_d) = self.gamma_d {
            params.gamma_d = gamma_d;
        }
        if let Some(c) = self.phonon_cutoff {
            params.phonon_cutoff = c;
        }
        if let Some(m) = self.n_monomers {
            params.n_monomers = m;
        }
        if let Some(l) = self.sites_per_monomer {
            params.sites_per_monomer = l;
        }
        if let Some(d) = self.coolants_per_gap {
            params.coolants_per_gap = d;
        }
        if let Some(t) = self.coupling_truncation {
            params.coupling_truncation = Some(t);
        }
    }
}

/// Top-level config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub model: Option<ModelParams<f64>>,
    #[serde(default)]
    pub overrides: Option<Overrides>,
    #[serde(default)]
    pub run: Option<RunSettings>,
}

impl Default for FileConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            sweep: None,
            model: None,
            overrides: None,
            run: None,
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: FileConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            bail!(
                "config schema_version {} not supported; this build expects {}",
                cfg.schema_version,
                SCHEMA_VERSION
            );
        }
        Ok(cfg)
    }
}

/// Resolves the model: explicit `[model]` wins, else the preset named on
/// the command line or in the sweep table; `[overrides]` patch the result.
pub fn resolve_model(
    cfg: &FileConfig,
    preset_flag: Option<&str>,
) -> anyhow::Result<ModelParams<f64>> {
    let mut params = if let Some(model) = &cfg.model {
        model.clone()
    } else {
        let name = preset_flag
            .or(cfg.sweep.as_ref().and_then(|s| s.preset.as_deref()))
            .ok_or_else(|| anyhow::anyhow!("no [model] table and no preset named"))?;
        presets::by_name(name)
            .ok_or_else(|| anyhow::anyhow!("unknown preset {name:?}; expected p1..p4"))?
    };
    if let Some(o) = &cfg.overrides {
        o.apply(&mut params);
    }
    params.validate().map_err(|e| anyhow::anyhow!("resolved model invalid: {e}"))?;
    Ok(params)
}
