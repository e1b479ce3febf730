//! Scenario configuration: schema, presets, overrides and validation.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::feasibility;
use super::mobility::MobilityConfig;
use crate::channel::{thermal_noise_power, AmplitudeLaw, ChannelParams};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, GammaRule, GridSpec};
use crate::geometry::{ArrayConfig, Position};
use crate::spectral::{DEFAULT_GRID_POINTS, DEFAULT_LOADING};

/// Shipped presets as `(name, TOML source)`.
pub const PRESETS: [(&str, &str); 4] = [
    ("ci_1bs", include_str!("../../presets/ci_1bs.toml")),
    ("ci_2bs", include_str!("../../presets/ci_2bs.toml")),
    ("paper_1bs", include_str!("../../presets/paper_1bs.toml")),
    ("paper_2bs", include_str!("../../presets/paper_2bs.toml")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub trials: u64,
    pub master_seed: u64,
    pub duration_s: f64,
    /// Broadcast rate of each BS, Hz.
    pub bs_rate_hz: f64,
    /// Snapshots `N` per observation.
    pub snapshots: usize,
    /// Model order assumed by the estimators.
    pub d_max: usize,
    /// Inclusive range `[lo, hi]` of the actual number of NLOS paths.
    pub path_count: [usize; 2],
    /// Probability that the LOS component is blocked.
    pub p_nlos: f64,
    pub velocity_noise_fraction: f64,
    pub association_tolerance_deg: f64,
    pub estimators: Vec<EstimatorKind>,
    /// Amplitude rule of the single-path estimator.
    #[serde(default)]
    pub single_path_gamma: GammaRule,
    pub true_p0: [f64; 2],
    pub base_stations: Vec<[f64; 2]>,
    #[serde(default)]
    pub mobility: MobilityConfig,
    pub array: ArraySection,
    #[serde(default)]
    pub channel: ChannelSection,
    pub grid: GridSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySection {
    pub elements: usize,
    /// Defaults to `M − S + 1` with `S = ⌈(D_max+1)/2⌉` subarrays.
    #[serde(default)]
    pub subarray_len: Option<usize>,
    /// MUSIC signal-subspace dimension; defaults to `min(D_max+1, P−1)`.
    #[serde(default)]
    pub signal_dim: Option<usize>,
    #[serde(default = "default_carrier")]
    pub carrier_hz: f64,
    #[serde(default = "default_angular_points")]
    pub angular_grid_points: usize,
    #[serde(default = "default_loading")]
    pub loading: f64,
}

fn default_carrier() -> f64 {
    5.9e9
}

fn default_angular_points() -> usize {
    DEFAULT_GRID_POINTS
}

fn default_loading() -> f64 {
    DEFAULT_LOADING
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub path_loss_exponent: f64,
    pub reference_distance_m: f64,
    pub coherence_bandwidth_hz: f64,
    pub doppler_spread_hz: f64,
    pub rms_delay_spread_s: f64,
    pub transmit_power_dbm: f64,
    /// Noise bandwidth `B`; when absent, the bandwidth minimizing the sampling
    /// interval for `roll_off` is used.
    pub noise_bandwidth_hz: Option<f64>,
    pub roll_off: f64,
    pub amplitude_law: AmplitudeLaw,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            path_loss_exponent: 4.0,
            reference_distance_m: 1.0,
            coherence_bandwidth_hz: 250e3,
            doppler_spread_hz: 512.0,
            rms_delay_spread_s: 677e-9,
            transmit_power_dbm: 18.0,
            noise_bandwidth_hz: None,
            roll_off: 0.5,
            amplitude_law: AmplitudeLaw::Sqrt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Defaults to the true initial position.
    #[serde(default)]
    pub center: Option<[f64; 2]>,
    pub half_width_m: f64,
    pub spacing_m: f64,
}

impl ScenarioConfig {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        Self::from_toml_with_overrides::<&str>(src, &[])
    }

    /// Parses `src`, applies `key=value` overrides (dotted keys, TOML values;
    /// bare words are taken as strings) and validates the result.
    pub fn from_toml_with_overrides<S: AsRef<str>>(src: &str, overrides: &[S]) -> Result<Self> {
        let mut value: toml::Value = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o.as_ref())?;
        }
        let cfg: Self = value.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path<S: AsRef<str>>(path: &Path, overrides: &[S]) -> Result<Self> {
        let src = std::fs::read_to_string(path)?;
        Self::from_toml_with_overrides(&src, overrides)
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::preset_with_overrides::<&str>(name, &[])
    }

    pub fn preset_with_overrides<S: AsRef<str>>(name: &str, overrides: &[S]) -> Result<Self> {
        let src = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, s)| *s)
            .ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))?;
        Self::from_toml_with_overrides(src, overrides)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// SHA-256 of the normalized TOML form, hex encoded.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return bad("name must be non-empty and use [A-Za-z0-9_-] only");
        }
        if self.trials < 1 {
            return bad("trials must be at least 1");
        }
        if !(self.duration_s > 0.0) || !self.duration_s.is_finite() {
            return bad("duration_s must be positive");
        }
        if !(self.bs_rate_hz > 0.0) || !self.bs_rate_hz.is_finite() {
            return bad("bs_rate_hz must be positive");
        }
        if self.snapshots < 1 {
            return bad("snapshots must be at least 1");
        }
        if self.path_count[0] > self.path_count[1] {
            return bad("path_count must be [lo, hi] with lo <= hi");
        }
        if !(0.0..=1.0).contains(&self.p_nlos) {
            return bad("p_nlos must lie in [0, 1]");
        }
        if !(self.velocity_noise_fraction >= 0.0) || !self.velocity_noise_fraction.is_finite() {
            return bad("velocity_noise_fraction must be non-negative");
        }
        if !(self.association_tolerance_deg > 0.0) {
            return bad("association_tolerance_deg must be positive");
        }
        if self.base_stations.is_empty() {
            return bad("at least one base station is required");
        }
        let finite = |p: &[f64; 2]| p.iter().all(|v| v.is_finite());
        if !finite(&self.true_p0) || !self.base_stations.iter().all(finite) {
            return bad("positions must be finite");
        }
        if !(self.grid.half_width_m >= 0.0) || !(self.grid.spacing_m > 0.0) {
            return bad("grid needs half_width_m >= 0 and spacing_m > 0");
        }
        if !(0.0..=1.0).contains(&self.channel.roll_off) {
            return bad("channel.roll_off must lie in [0, 1]");
        }
        if self.array.angular_grid_points < 3 {
            return bad("array.angular_grid_points must be at least 3");
        }
        if !(self.array.loading >= 0.0) {
            return bad("array.loading must be non-negative");
        }
        self.mobility.validate()?;
        self.channel_params()?.validate()?;
        let cfg = self.array_config()?;
        let signal_dim = self.signal_dim()?;
        if signal_dim == 0 || signal_dim >= cfg.subarray_len() {
            return Err(Error::NotIdentifiable {
                signal_dim,
                subarray_len: cfg.subarray_len(),
            });
        }
        Ok(())
    }

    pub fn subarray_len(&self) -> Result<usize> {
        if let Some(p) = self.array.subarray_len {
            return Ok(p);
        }
        let s = self.d_max.div_ceil(2).max(1);
        let m = self.array.elements;
        if s >= m {
            return Err(Error::Config(format!("{m} elements cannot host {s} subarrays")));
        }
        Ok(m - s + 1)
    }

    pub fn signal_dim(&self) -> Result<usize> {
        match self.array.signal_dim {
            Some(d) => Ok(d),
            None => Ok((self.d_max + 1).min(self.subarray_len()?.saturating_sub(1))),
        }
    }

    pub fn array_config(&self) -> Result<ArrayConfig<f64>> {
        ArrayConfig::new(self.array.elements, self.subarray_len()?, self.array.carrier_hz)
    }

    pub fn noise_bandwidth(&self) -> Result<f64> {
        match self.channel.noise_bandwidth_hz {
            Some(b) if b > 0.0 => Ok(b),
            Some(b) => Err(Error::Config(format!("noise bandwidth must be positive, got {b}"))),
            None => {
                let ch = self.channel_params_with_noise(0.0);
                let (_, hi) = feasibility::bandwidth_interval(&ch, self.channel.roll_off, feasibility::DEFAULT_MARGIN);
                Ok(hi)
            }
        }
    }

    pub fn channel_params(&self) -> Result<ChannelParams<f64>> {
        Ok(self.channel_params_with_noise(thermal_noise_power(self.noise_bandwidth()?)))
    }

    fn channel_params_with_noise(&self, noise_power: f64) -> ChannelParams<f64> {
        let c = &self.channel;
        ChannelParams {
            path_loss_exponent: c.path_loss_exponent,
            reference_distance: c.reference_distance_m,
            coherence_bandwidth: c.coherence_bandwidth_hz,
            doppler_spread: c.doppler_spread_hz,
            rms_delay_spread: c.rms_delay_spread_s,
            transmit_power_dbm: c.transmit_power_dbm,
            noise_power,
            carrier_hz: self.array.carrier_hz,
            amplitude_law: c.amplitude_law,
        }
    }

    pub fn grid_spec(&self) -> GridSpec<f64> {
        let c = self.grid.center.unwrap_or(self.true_p0);
        GridSpec {
            center: Position::new(c[0], c[1]),
            half_width: self.grid.half_width_m,
            spacing: self.grid.spacing_m,
        }
    }

    pub fn p0(&self) -> Position<f64> {
        Position::new(self.true_p0[0], self.true_p0[1])
    }

    pub fn bs_positions(&self) -> Vec<Position<f64>> {
        self.base_stations.iter().map(|b| Position::new(b[0], b[1])).collect()
    }

    /// Number of broadcast events: `⌊duration·R_BS·N_BS⌋`.
    pub fn event_count(&self) -> usize {
        let n = self.duration_s * self.bs_rate_hz * self.base_stations.len() as f64;
        (n * (1.0 + 1e-12)).floor() as usize
    }

    /// Event `e ≥ 1` happens at `e/(R_BS·N_BS)` and comes from BS `(e−1) mod N_BS`.
    pub fn event(&self, e: usize) -> (f64, usize) {
        let nbs = self.base_stations.len();
        (e as f64 / (self.bs_rate_hz * nbs as f64), (e - 1) % nbs)
    }
}

fn apply_override(root: &mut toml::Value, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{item}' is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("invalid override key '{key}'")));
    }
    let mut node = root;
    for p in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override '{key}': '{p}' is not a table")))?;
        node = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    node.as_table_mut()
        .ok_or_else(|| Error::Config(format!("override '{key}' does not address a table entry")))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
