//! TOML run configuration and the bundled presets.
//!
//! ```toml
//! [cable]
//! length_L = 70.0
//! wave_speed_a = 67.344        # or tension_T; density_rho defaults to 1
//! dirac_convention = "DiracConsistent"
//!
//! [[cable.supports]]
//! position_xk = 17.5
//! sigma_k = 1.0                # or stiffness_K or beta_k
//!
//! [grid]
//! nx = 561
//! nt = 501
//! horizon = 10.0
//!
//! [initial]
//! phi = "sine_mode:2,0.1"      # zero | sine_mode:k[,amp] | bump:c,w[,amp] | { x = [..], values = [..] }
//! psi = "zero"
//! ```

use serde::{Deserialize, Serialize};

use crate::diagnostics::LossWeights;
use crate::error::{Error, Result};
use crate::galerkin::DEFAULT_M;
use crate::model::{CableConfig, DiracConvention, InitialData, Profile, SamplingGrid};

/// A catalog entry or tabulated samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Catalog(String),
    Table { x: Vec<f64>, values: Vec<f64> },
}

impl ProfileSpec {
    pub fn resolve(&self, length: f64) -> Result<Profile> {
        match self {
            ProfileSpec::Catalog(s) => Profile::from_catalog(s, length),
            ProfileSpec::Table { x, values } => Profile::table(x.clone(), values.clone())
                .map_err(|e| Error::Config(e.to_string())),
        }
    }
}

fn zero_profile() -> ProfileSpec {
    ProfileSpec::Catalog("zero".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub phi: ProfileSpec,
    #[serde(default = "zero_profile")]
    pub psi: ProfileSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GalerkinSettings {
    pub m: usize,
    /// Frequencies reported by the modes subcommand.
    pub modes: usize,
}

impl Default for GalerkinSettings {
    fn default() -> Self {
        Self { m: DEFAULT_M, modes: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdSettings {
    pub cfl: f64,
}

impl Default for FdSettings {
    fn default() -> Self {
        Self { cfl: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesSettings {
    pub n_terms: usize,
    /// Truncation orders for the compatibility sweep.
    pub sweep: Vec<usize>,
    /// Instants at which the h-consistency residual is reported.
    pub residual_times: Vec<f64>,
}

impl Default for SeriesSettings {
    fn default() -> Self {
        Self { n_terms: 256, sweep: vec![256, 512], residual_times: vec![0.0, 2.5, 5.0, 7.5] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSettings {
    /// Instants of the emitted displacement profiles.
    pub profile_times: Vec<f64>,
    /// Positions of emitted time series.
    pub probes: Vec<f64>,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self { profile_times: vec![0.0, 2.5, 5.0, 7.5, 10.0], probes: Vec::new() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InversionSettings {
    /// Measured frequencies in Hz; alternatively `measured_csv`.
    #[serde(default)]
    pub measured_hz: Vec<f64>,
    /// CSV file with one frequency per line, relative to the working directory.
    pub measured_csv: Option<String>,
    /// 1-based mode number of each measured frequency; defaults to `1..=n`.
    #[serde(default)]
    pub mode_indices: Vec<usize>,
    pub bracket: Option<[f64; 2]>,
}

/// Everything one CLI invocation needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub cable: CableConfig,
    pub grid: SamplingGrid,
    pub initial: InitialSpec,
    #[serde(default)]
    pub galerkin: GalerkinSettings,
    #[serde(default)]
    pub fd: FdSettings,
    #[serde(default)]
    pub series: SeriesSettings,
    #[serde(default)]
    pub output: OutputSettings,
    #[serde(default)]
    pub loss: LossWeights,
    pub inversion: Option<InversionSettings>,
}

const PRESET_SIGMA1: &str = r#"
[cable]
length_L = 70.0
wave_speed_a = 67.344
density_rho = 1.0

[[cable.supports]]
position_xk = 17.5
sigma_k = 1.0

[grid]
nx = 561
nt = 501
horizon = 10.0

[initial]
phi = "sine_mode:2,0.1"
psi = "zero"

[galerkin]
m = 512
modes = 10

[output]
probes = [40.0]
"#;

/// Bundled preset names.
pub const PRESET_NAMES: [&str; 4] =
    ["paper-2-4-sigma1", "paper-2-4-sigma0005", "paper-2-4-sigma0", "zero-initial-data"];

fn preset_source(name: &str) -> Option<String> {
    let with_sigma = |s: &str| PRESET_SIGMA1.replace("sigma_k = 1.0", &format!("sigma_k = {s}"));
    match name {
        "paper-2-4-sigma1" => Some(PRESET_SIGMA1.to_string()),
        "paper-2-4-sigma0005" => Some(with_sigma("0.005")),
        "paper-2-4-sigma0" => Some(with_sigma("0.0")),
        "zero-initial-data" => Some(PRESET_SIGMA1.replace("\"sine_mode:2,0.1\"", "\"zero\"")),
        _ => None,
    }
}

impl RunConfig {
    /// Parses and validates a TOML document; errors name the offending line.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(anchor(text, &e)))?;
        cfg.validate().map_err(|e| match e {
            Error::Config(msg) => Error::Config(anchor_key(text, &msg)),
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let src = preset_source(name).ok_or_else(|| {
            Error::Config(format!("unknown preset '{name}'; available: {}", PRESET_NAMES.join(", ")))
        })?;
        Self::from_toml_str(&src)
    }

    /// Checks cross-field conditions not expressible in the schema.
    pub fn validate(&self) -> Result<()> {
        let init = self.initial_data()?;
        if !init.endpoints_vanish(self.cable.length()) {
            return Err(Error::Config(
                "initial: phi and psi must vanish at x = 0 and x = length_L".into(),
            ));
        }
        if self.galerkin.m == 0 {
            return Err(Error::Config("galerkin: m must be at least 1".into()));
        }
        if !(self.fd.cfl > 0.0 && self.fd.cfl <= 1.0) {
            return Err(Error::Config(format!("fd: cfl must lie in (0, 1], got {}", self.fd.cfl)));
        }
        if self.series.n_terms == 0 {
            return Err(Error::Config("series: n_terms must be at least 1".into()));
        }
        let h = self.grid.horizon();
        if let Some(t) = self.output.profile_times.iter().find(|t| !(0.0..=h).contains(*t)) {
            return Err(Error::Config(format!("output: profile time {t} lies outside [0, {h}]")));
        }
        let l = self.cable.length();
        if let Some(x) = self.output.probes.iter().find(|x| !(0.0..=l).contains(*x)) {
            return Err(Error::Config(format!("output: probe {x} lies outside [0, {l}]")));
        }
        Ok(())
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        let l = self.cable.length();
        Ok(InitialData::new(self.initial.phi.resolve(l)?, self.initial.psi.resolve(l)?))
    }

    /// Applies command-line overrides, re-validating the result.
    pub fn with_overrides(
        mut self,
        m: Option<usize>,
        nx: Option<usize>,
        nt: Option<usize>,
        horizon: Option<f64>,
        convention: Option<DiracConvention>,
    ) -> Result<Self> {
        if let Some(m) = m {
            self.galerkin.m = m;
        }
        if nx.is_some() || nt.is_some() || horizon.is_some() {
            self.grid = SamplingGrid::new(
                nx.unwrap_or(self.grid.nx()),
                nt.unwrap_or(self.grid.nt()),
                horizon.unwrap_or(self.grid.horizon()),
            )
            .map_err(|e| Error::Config(e.to_string()))?;
            let h = self.grid.horizon();
            self.output.profile_times.retain(|t| *t <= h);
        }
        if let Some(c) = convention {
            self.cable = self.cable.with_convention(c);
        }
        self.validate()?;
        Ok(self)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Internal(format!("cannot render config: {e}")))
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn anchor(text: &str, e: &toml::de::Error) -> String {
    let msg = e.message().trim().to_string();
    match e.span() {
        Some(span) => format!("line {}: {msg}", line_of_offset(text, span.start)),
        None => msg,
    }
}

/// Prefixes the line of the first key named in `msg` (`section: ...` or a field name).
fn anchor_key(text: &str, msg: &str) -> String {
    let keys = [
        "length_L", "tension_T", "density_rho", "wave_speed_a", "position_xk", "stiffness_K",
        "sigma_k", "beta_k", "nx", "nt", "horizon", "phi", "psi", "cfl", "n_terms", "probes",
        "profile_times",
    ];
    let section = msg.split(':').next().unwrap_or("").trim();
    let wanted: Vec<&str> = keys
        .iter()
        .copied()
        .filter(|k| msg.contains(k))
        .chain(std::iter::once(section).filter(|s| !s.is_empty()))
        .collect();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim_start();
        if wanted.iter().any(|k| trimmed.starts_with(k) || trimmed.starts_with(&format!("[{k}]"))) {
            return format!("line {}: {msg}", i + 1);
        }
    }
    msg.to_string()
}
