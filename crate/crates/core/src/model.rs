//! Physical configuration, sampling grids and initial data.
//!
//! Tension and density are the primary inputs; wave speed and the two
//! normalized support stiffnesses are derived and kept consistent:
//! `a² = T/ρ`, `β_k = K_k/ρ`, `σ_k = K_k/T`, hence `β_k = a²·σ_k`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

const REL_TOL: f64 = 1e-12;
const ENDPOINT_TOL: f64 = 1e-10;

/// `a = sqrt(T/ρ)`.
pub fn derive_wave_speed(tension: f64, density: f64) -> Result<f64> {
    if !(tension > 0.0 && tension.is_finite()) || !(density > 0.0 && density.is_finite()) {
        return domain(format!(
            "wave speed needs positive tension and density, got T={tension}, rho={density}"
        ));
    }
    Ok((tension / density).sqrt())
}

/// `σ = K/T`.
pub fn derive_sigma(stiffness: f64, tension: f64) -> Result<f64> {
    if !(tension > 0.0 && tension.is_finite()) {
        return domain(format!("sigma needs positive tension, got T={tension}"));
    }
    if !(stiffness >= 0.0 && stiffness.is_finite()) {
        return domain(format!("sigma needs nonnegative stiffness, got K={stiffness}"));
    }
    Ok(stiffness / tension)
}

/// How the point-support term enters the bilinear form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DiracConvention {
    /// `β_k u(x_k) v(x_k)`; consistent with the jump condition `σ = K/T`.
    #[default]
    DiracConsistent,
    /// `L·β_k u(x_k) v(x_k)`, the bilinear form as literally printed.
    PaperFactorL,
}

impl DiracConvention {
    /// Multiplier `c` applied to `β_k` in the stiffness matrix.
    pub fn factor(self, length: f64) -> f64 {
        match self {
            DiracConvention::DiracConsistent => 1.0,
            DiracConvention::PaperFactorL => length,
        }
    }
}

/// One interior elastic support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportSpec {
    #[serde(rename = "position_xk")]
    position: f64,
    #[serde(rename = "stiffness_K")]
    stiffness: f64,
    #[serde(rename = "beta_k")]
    beta: f64,
    #[serde(rename = "sigma_k")]
    sigma: f64,
}

impl SupportSpec {
    pub fn position(&self) -> f64 {
        self.position
    }

    /// Spring constant `K_k` in N/m.
    pub fn stiffness(&self) -> f64 {
        self.stiffness
    }

    /// `β_k = K_k/ρ`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `σ_k = K_k/T`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// A fixed-end string of length `L` with interior point springs.
///
/// Supports are sorted by position, strictly inside `(0, L)`, and distinct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCable")]
pub struct CableConfig {
    #[serde(rename = "length_L")]
    length: f64,
    #[serde(rename = "tension_T")]
    tension: f64,
    #[serde(rename = "density_rho")]
    density: f64,
    #[serde(rename = "wave_speed_a")]
    wave_speed: f64,
    supports: Vec<SupportSpec>,
    dirac_convention: DiracConvention,
}

impl CableConfig {
    /// Builds a configuration from tension, density and `(x_k, K_k)` pairs.
    pub fn new(
        length: f64,
        tension: f64,
        density: f64,
        supports: &[(f64, f64)],
        convention: DiracConvention,
    ) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return domain(format!("length must be positive, got {length}"));
        }
        let wave_speed = derive_wave_speed(tension, density)?;
        let mut specs = Vec::with_capacity(supports.len());
        for &(position, stiffness) in supports {
            if !(position > 0.0 && position < length) {
                return domain(format!("support position {position} is not inside (0, {length})"));
            }
            let sigma = derive_sigma(stiffness, tension)?;
            specs.push(SupportSpec { position, stiffness, beta: stiffness / density, sigma });
        }
        if specs.windows(2).any(|w| w[1].position <= w[0].position) {
            return domain("support positions must be strictly increasing");
        }
        Ok(Self { length, tension, density, wave_speed, supports: specs, dirac_convention: convention })
    }

    /// Builds a configuration from wave speed and `(x_k, σ_k)` pairs, with `T = ρa²`.
    pub fn from_wave_speed(
        length: f64,
        wave_speed: f64,
        density: f64,
        supports: &[(f64, f64)],
        convention: DiracConvention,
    ) -> Result<Self> {
        if !(wave_speed > 0.0 && wave_speed.is_finite()) {
            return domain(format!("wave speed must be positive, got {wave_speed}"));
        }
        let tension = density * wave_speed * wave_speed;
        let pairs: Vec<(f64, f64)> = supports.iter().map(|&(x, s)| (x, s * tension)).collect();
        Self::new(length, tension, density, &pairs, convention)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn tension(&self) -> f64 {
        self.tension
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn wave_speed(&self) -> f64 {
        self.wave_speed
    }

    /// `a² = T/ρ`.
    pub fn wave_speed_sq(&self) -> f64 {
        self.tension / self.density
    }

    pub fn supports(&self) -> &[SupportSpec] {
        &self.supports
    }

    pub fn convention(&self) -> DiracConvention {
        self.dirac_convention
    }

    /// The only support, if there is exactly one.
    pub fn single_support(&self) -> Option<&SupportSpec> {
        match self.supports.as_slice() {
            [s] => Some(s),
            _ => None,
        }
    }

    /// Same string and springs under a different tension; `σ_k` and `a` follow.
    pub fn with_tension(&self, tension: f64) -> Result<Self> {
        let pairs: Vec<(f64, f64)> =
            self.supports.iter().map(|s| (s.position, s.stiffness)).collect();
        Self::new(self.length, tension, self.density, &pairs, self.dirac_convention)
    }

    pub fn with_convention(&self, convention: DiracConvention) -> Self {
        Self { dirac_convention: convention, ..self.clone() }
    }

    /// Same string with the springs removed.
    pub fn without_supports(&self) -> Self {
        Self { supports: Vec::new(), ..self.clone() }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSupport {
    position_xk: f64,
    #[serde(rename = "stiffness_K")]
    stiffness: Option<f64>,
    beta_k: Option<f64>,
    sigma_k: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCable {
    #[serde(rename = "length_L")]
    length: f64,
    #[serde(rename = "tension_T")]
    tension: Option<f64>,
    #[serde(rename = "density_rho", default = "unit_density")]
    density: f64,
    #[serde(rename = "wave_speed_a")]
    wave_speed: Option<f64>,
    #[serde(default)]
    supports: Vec<RawSupport>,
    #[serde(default)]
    dirac_convention: DiracConvention,
}

fn unit_density() -> f64 {
    1.0
}

fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs())
}

impl TryFrom<RawCable> for CableConfig {
    type Error = Error;

    fn try_from(raw: RawCable) -> Result<Self> {
        let rho = raw.density;
        let tension = match (raw.tension, raw.wave_speed) {
            (Some(t), Some(a)) => {
                if !agree(a * a, t / rho) {
                    return Err(Error::Config(format!(
                        "wave_speed_a = {a} is inconsistent with tension_T / density_rho = {}",
                        t / rho
                    )));
                }
                t
            }
            (Some(t), None) => t,
            (None, Some(a)) => rho * a * a,
            (None, None) => {
                return Err(Error::Config("either tension_T or wave_speed_a is required".into()))
            }
        };
        let mut pairs = Vec::with_capacity(raw.supports.len());
        for s in &raw.supports {
            let candidates = [
                s.stiffness,
                s.sigma_k.map(|v| v * tension),
                s.beta_k.map(|v| v * rho),
            ];
            let mut given = candidates.iter().flatten();
            let Some(&k) = given.next() else {
                return Err(Error::Config(format!(
                    "support at {} needs one of stiffness_K, sigma_k, beta_k",
                    s.position_xk
                )));
            };
            if given.any(|&other| !agree(k, other)) {
                return Err(Error::Config(format!(
                    "support at {} has inconsistent stiffness_K / sigma_k / beta_k",
                    s.position_xk
                )));
            }
            pairs.push((s.position_xk, k));
        }
        CableConfig::new(raw.length, tension, rho, &pairs, raw.dirac_convention)
            .map_err(|e| Error::Config(e.to_string()))
    }
}

/// Uniform space-time sampling: `nx` nodes on `[0, L]`, `nt` instants on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct SamplingGrid {
    nx: usize,
    nt: usize,
    horizon: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    nx: usize,
    nt: usize,
    horizon: f64,
}

impl TryFrom<RawGrid> for SamplingGrid {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        SamplingGrid::new(raw.nx, raw.nt, raw.horizon).map_err(|e| Error::Config(e.to_string()))
    }
}

impl SamplingGrid {
    pub fn new(nx: usize, nt: usize, horizon: f64) -> Result<Self> {
        if nx < 3 {
            return domain(format!("nx must be at least 3, got {nx}"));
        }
        if nt < 2 {
            return domain(format!("nt must be at least 2, got {nt}"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return domain(format!("horizon must be positive, got {horizon}"));
        }
        Ok(Self { nx, nt, horizon })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dx(&self, length: f64) -> f64 {
        length / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.horizon / (self.nt - 1) as f64
    }

    /// Node `i` of `[0, L]`; the last node is exactly `L`.
    pub fn x(&self, i: usize, length: f64) -> f64 {
        if i == self.nx - 1 {
            length
        } else {
            i as f64 * self.dx(length)
        }
    }

    /// Instant `j`; the last instant is exactly the horizon.
    pub fn t(&self, j: usize) -> f64 {
        if j == self.nt - 1 {
            self.horizon
        } else {
            j as f64 * self.dt()
        }
    }

    pub fn nodes(&self, length: f64) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i, length)).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nt).map(|j| self.t(j)).collect()
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar function on `[0, L]`.
#[derive(Clone)]
pub enum Profile {
    Zero,
    /// `amplitude·sin(kπx/L)`.
    SineMode { mode: u32, amplitude: f64, length: f64 },
    /// Smooth compactly supported bump `A·exp(1 − 1/(1 − r²))`, `r = 2(x − c)/w`.
    Bump { center: f64, width: f64, amplitude: f64 },
    /// Piecewise-linear interpolation of samples; constant beyond the ends.
    Table { xs: Vec<f64>, values: Vec<f64> },
    Custom(ScalarFn),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Zero => write!(f, "Zero"),
            Profile::SineMode { mode, amplitude, length } => {
                write!(f, "SineMode {{ mode: {mode}, amplitude: {amplitude}, length: {length} }}")
            }
            Profile::Bump { center, width, amplitude } => {
                write!(f, "Bump {{ center: {center}, width: {width}, amplitude: {amplitude} }}")
            }
            Profile::Table { xs, .. } => write!(f, "Table {{ {} samples }}", xs.len()),
            Profile::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Profile {
    pub fn sine_mode(mode: u32, amplitude: f64, length: f64) -> Self {
        Profile::SineMode { mode, amplitude, length }
    }

    /// The orthonormal basis function `w_k = sqrt(2/L)·sin(kπx/L)` scaled by `amplitude`.
    pub fn basis_mode(mode: u32, amplitude: f64, length: f64) -> Self {
        Profile::SineMode { mode, amplitude: amplitude * (2.0 / length).sqrt(), length }
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Profile::Custom(Arc::new(f))
    }

    pub fn table(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != values.len() {
            return domain("a table profile needs at least two (x, value) samples of equal count");
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return domain("table abscissae must be strictly increasing");
        }
        Ok(Profile::Table { xs, values })
    }

    /// Parses `zero`, `sine_mode:k[,amplitude]` or `bump:center,width[,amplitude]`.
    pub fn from_catalog(text: &str, length: f64) -> Result<Self> {
        let text = text.trim();
        let (name, args) = text.split_once(':').unwrap_or((text, ""));
        let nums: Vec<f64> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("bad number in profile '{text}': {e}")))?
        };
        match (name.trim(), nums.as_slice()) {
            ("zero", []) => Ok(Profile::Zero),
            ("sine_mode", [k]) | ("sine_mode", [k, _]) => {
                if *k < 1.0 || k.fract() != 0.0 {
                    return Err(Error::Config(format!("sine_mode index must be a positive integer, got {k}")));
                }
                let amplitude = nums.get(1).copied().unwrap_or(1.0);
                Ok(Profile::sine_mode(*k as u32, amplitude, length))
            }
            ("bump", [center, width]) | ("bump", [center, width, _]) => {
                if !(*width > 0.0) {
                    return Err(Error::Config(format!("bump width must be positive, got {width}")));
                }
                let amplitude = nums.get(2).copied().unwrap_or(1.0);
                Ok(Profile::Bump { center: *center, width: *width, amplitude })
            }
            _ => Err(Error::Config(format!(
                "unknown profile '{text}'; expected zero, sine_mode:k[,amp] or bump:center,width[,amp]"
            ))),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Profile::Zero)
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::SineMode { mode, amplitude, length } => {
                amplitude * (*mode as f64 * std::f64::consts::PI * x / length).sin()
            }
            Profile::Bump { center, width, amplitude } => {
                let r = 2.0 * (x - center) / width;
                let s = 1.0 - r * r;
                if s <= 0.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / s).exp()
                }
            }
            Profile::Table { xs, values } => interpolate_table(xs, values, x),
            Profile::Custom(f) => f(x),
        }
    }

    /// First derivative: analytic where known, otherwise a central difference of step `h`.
    pub fn slope(&self, x: f64, h: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::SineMode { mode, amplitude, length } => {
                let k = *mode as f64 * std::f64::consts::PI / length;
                amplitude * k * (k * x).cos()
            }
            Profile::Bump { center, width, amplitude } => {
                let rp = 2.0 / width;
                let r = rp * (x - center);
                let s = 1.0 - r * r;
                if s <= 0.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / s).exp() * (-2.0 * r * rp / (s * s))
                }
            }
            _ => (self.value(x + h) - self.value(x - h)) / (2.0 * h),
        }
    }

    /// Second derivative: analytic where known, otherwise a central difference of step `h`.
    pub fn curvature(&self, x: f64, h: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::SineMode { mode, amplitude, length } => {
                let k = *mode as f64 * std::f64::consts::PI / length;
                -amplitude * k * k * (k * x).sin()
            }
            Profile::Bump { center, width, amplitude } => {
                let rp = 2.0 / width;
                let r = rp * (x - center);
                let s = 1.0 - r * r;
                if s <= 0.0 {
                    0.0
                } else {
                    let g = -2.0 * r * rp / (s * s);
                    let gp = -2.0 * rp * rp / (s * s) - 8.0 * r * r * rp * rp / (s * s * s);
                    amplitude * (1.0 - 1.0 / s).exp() * (g * g + gp)
                }
            }
            _ => (self.value(x + h) - 2.0 * self.value(x) + self.value(x - h)) / (h * h),
        }
    }
}

fn interpolate_table(xs: &[f64], values: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return values[0];
    }
    if x >= xs[n - 1] {
        return values[n - 1];
    }
    let j = xs.partition_point(|&v| v <= x).clamp(1, n - 1);
    let (x0, x1) = (xs[j - 1], xs[j]);
    let w = (x - x0) / (x1 - x0);
    values[j - 1] * (1.0 - w) + values[j] * w
}

/// Initial displacement `φ` and velocity `ψ`, with an optional exact `φ′`.
#[derive(Clone, Debug)]
pub struct InitialData {
    pub phi: Profile,
    pub psi: Profile,
    pub phi_x: Option<Profile>,
}

impl InitialData {
    pub fn new(phi: Profile, psi: Profile) -> Self {
        Self { phi, psi, phi_x: None }
    }

    pub fn zero() -> Self {
        Self::new(Profile::Zero, Profile::Zero)
    }

    pub fn with_phi_derivative(mut self, phi_x: Profile) -> Self {
        self.phi_x = Some(phi_x);
        self
    }

    /// `φ′(x)`, falling back to the profile's own derivative with step `h`.
    pub fn phi_slope(&self, x: f64, h: f64) -> f64 {
        match &self.phi_x {
            Some(d) => d.value(x),
            None => self.phi.slope(x, h),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.phi.is_zero() && self.psi.is_zero()
    }

    /// Whether `φ` and `ψ` vanish at both ends within `1e-10`.
    pub fn endpoints_vanish(&self, length: f64) -> bool {
        [self.phi.value(0.0), self.phi.value(length), self.psi.value(0.0), self.psi.value(length)]
            .iter()
            .all(|v| v.abs() <= ENDPOINT_TOL)
    }
}

/// `φ(x_k)` at one support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportCheck {
    pub position: f64,
    pub phi_value: f64,
    pub phi_vanishes: bool,
}

/// Advisory report on initial data; never rejects.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub supports: Vec<SupportCheck>,
    /// Set when `φ(x_k) ≠ 0` at some support: no globally `C²` solution exists.
    pub piecewise_smooth_only: bool,
    pub endpoints_compatible: bool,
}

pub fn validate_initial_data(cfg: &CableConfig, init: &InitialData) -> ValidationReport {
    let supports: Vec<SupportCheck> = cfg
        .supports()
        .iter()
        .map(|s| {
            let phi_value = init.phi.value(s.position());
            SupportCheck {
                position: s.position(),
                phi_value,
                phi_vanishes: phi_value.abs() <= ENDPOINT_TOL,
            }
        })
        .collect();
    ValidationReport {
        piecewise_smooth_only: supports.iter().any(|s| !s.phi_vanishes),
        endpoints_compatible: init.endpoints_vanish(cfg.length()),
        supports,
    }
}
