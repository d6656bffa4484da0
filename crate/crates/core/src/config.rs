//! Scenario configuration: defaults, JSON ingestion and validation.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{invalid, Error, Result};
use crate::geometry::EARTH_RADIUS_KM;

/// Full lobe angle of the ground antennas, 65°.
pub const DEFAULT_THETA_M: f64 = 65.0 * PI / 180.0;
/// Gateway density giving about 100 gateways on the Earth.
pub const DEFAULT_LAMBDA_GW: f64 = 1.96e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Transmitter and receiver placed so that their caps overlap.
    TsrConditioned,
    /// Two independent gateways, single relay.
    TsrAnyPair,
    /// Two independent gateways, routed through inter-satellite links.
    TssrAnyPair,
    /// Single relay when possible, otherwise routed.
    Combined,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::TsrConditioned, Mode::TsrAnyPair, Mode::TssrAnyPair, Mode::Combined];

    pub fn name(&self) -> &'static str {
        match self {
            Mode::TsrConditioned => "tsr_conditioned",
            Mode::TsrAnyPair => "tsr_any_pair",
            Mode::TssrAnyPair => "tssr_any_pair",
            Mode::Combined => "combined",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "tsr" | "tsr_conditioned" => Some(Mode::TsrConditioned),
            "tsr_any_pair" => Some(Mode::TsrAnyPair),
            "tssr" | "tssr_any_pair" => Some(Mode::TssrAnyPair),
            "combined" => Some(Mode::Combined),
            _ => None,
        }
    }

    pub fn is_routed(&self) -> bool {
        matches!(self, Mode::TssrAnyPair | Mode::Combined)
    }
}

/// How fading gains are drawn in trials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingModel {
    /// Degree-10 polynomial fit of the inverse CDF.
    Polynomial,
    /// Exact draws from the gamma-mixture representation.
    Exact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub ns: u64,
    /// Orbital altitude, km.
    pub ds: f64,
    /// Gateways per km².
    pub lambda_gw: f64,
    /// Full lobe angle of the ground antennas (radians). Visibility caps on
    /// the orbital sphere have half-angle `theta_m / 2`.
    pub theta_m: f64,
    /// SNR threshold; `-inf` makes every link pass.
    pub gamma_db: f64,
    pub channel: ChannelParams,
    pub mode: Mode,
    /// Largest inter-satellite hop, km.
    pub d_max: f64,
    pub n_trials: u64,
    pub seed: u64,
    /// Fixed chord between the gateways in conditioned mode, km. When absent
    /// the separation follows the nearest-neighbour law of the gateway field.
    pub ground_separation: Option<f64>,
    pub fading_model: FadingModel,
    /// Apply fading on inter-satellite hops as well.
    pub ss_fading: bool,
    pub max_hops: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            ns: 100_000,
            ds: 550.0,
            lambda_gw: DEFAULT_LAMBDA_GW,
            theta_m: DEFAULT_THETA_M,
            gamma_db: 12.0,
            channel: ChannelParams::table_ii(),
            mode: Mode::TsrConditioned,
            d_max: 2000.0,
            n_trials: 100_000,
            seed: 1,
            ground_separation: None,
            fading_model: FadingModel::Polynomial,
            ss_fading: false,
            max_hops: 200,
        }
    }
}

impl ScenarioConfig {
    pub fn orbit_radius(&self) -> f64 {
        EARTH_RADIUS_KM + self.ds
    }

    pub fn cap_half_angle(&self) -> f64 {
        self.theta_m / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ds > 0.0 && self.ds.is_finite()) {
            return Err(invalid(format!("altitude ds must be positive, got {}", self.ds)));
        }
        if !(self.lambda_gw >= 0.0 && self.lambda_gw.is_finite()) {
            return Err(invalid(format!(
                "gateway density lambda_gw must be finite and non-negative, got {}",
                self.lambda_gw
            )));
        }
        if !(self.theta_m > 0.0 && self.theta_m < PI) {
            return Err(invalid(format!("lobe angle theta_m must lie in (0, 180) degrees, got {} rad", self.theta_m)));
        }
        if self.gamma_db.is_nan() || self.gamma_db == f64::INFINITY {
            return Err(invalid(format!("threshold gamma_db must be finite or -inf, got {}", self.gamma_db)));
        }
        if self.mode.is_routed() && !(self.d_max > 0.0 && self.d_max.is_finite()) {
            return Err(invalid(format!("d_max must be positive for routed modes, got {}", self.d_max)));
        }
        if self.n_trials < 1 {
            return Err(invalid("n_trials must be at least 1"));
        }
        if self.max_hops < 1 {
            return Err(invalid("max_hops must be at least 1"));
        }
        if let Some(d) = self.ground_separation {
            if !(d >= 0.0 && d <= 2.0 * EARTH_RADIUS_KM) {
                return Err(invalid(format!("ground_separation must lie in [0, 2·Re], got {d}")));
            }
            let delta = 2.0 * (d / (2.0 * EARTH_RADIUS_KM)).asin();
            if delta >= self.theta_m {
                return Err(invalid(format!(
                    "ground_separation {d} km puts the gateways {:.2}° apart; their caps overlap only below {:.2}°",
                    delta.to_degrees(),
                    self.theta_m.to_degrees()
                )));
            }
        }
        self.channel.validate()
    }
}

/// Sweep description as written in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub axis: String,
    pub values: Vec<f64>,
    #[serde(default)]
    pub series: Option<SeriesFile>,
    /// Metric names; end-to-end coverage when absent.
    #[serde(default)]
    pub outputs: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesFile {
    pub axis: String,
    pub values: Vec<serde_json::Value>,
}

/// JSON form of a scenario. Angles are in degrees; absent fields take the
/// defaults of [`ScenarioConfig::default`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ns: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ds_km: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_gw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_m_deg: Option<f64>,
    /// A number, or the string "-inf".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_db: Option<GammaValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_max_km: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_separation_km: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fading_model: Option<FadingModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ss_fading: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_hops: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepFile>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaValue {
    Db(f64),
    Text(GammaText),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaText {
    #[serde(rename = "-inf")]
    NegInf,
}

impl GammaValue {
    fn value(self) -> f64 {
        match self {
            GammaValue::Db(v) => v,
            GammaValue::Text(GammaText::NegInf) => f64::NEG_INFINITY,
        }
    }

    fn from_db(v: f64) -> Self {
        if v == f64::NEG_INFINITY {
            GammaValue::Text(GammaText::NegInf)
        } else {
            GammaValue::Db(v)
        }
    }
}

impl ConfigFile {
    pub fn into_scenario(self) -> ScenarioConfig {
        let d = ScenarioConfig::default();
        ScenarioConfig {
            ns: self.ns.unwrap_or(d.ns),
            ds: self.ds_km.unwrap_or(d.ds),
            lambda_gw: self.lambda_gw.unwrap_or(d.lambda_gw),
            theta_m: self.theta_m_deg.map(f64::to_radians).unwrap_or(d.theta_m),
            gamma_db: self.gamma_db.map(GammaValue::value).unwrap_or(d.gamma_db),
            channel: self.channel.unwrap_or(d.channel),
            mode: self.mode.unwrap_or(d.mode),
            d_max: self.d_max_km.unwrap_or(d.d_max),
            n_trials: self.n_trials.unwrap_or(d.n_trials),
            seed: self.seed.unwrap_or(d.seed),
            ground_separation: self.ground_separation_km.or(d.ground_separation),
            fading_model: self.fading_model.unwrap_or(d.fading_model),
            ss_fading: self.ss_fading.unwrap_or(d.ss_fading),
            max_hops: self.max_hops.unwrap_or(d.max_hops),
        }
    }

    /// Every field written out explicitly.
    pub fn from_scenario(cfg: &ScenarioConfig) -> Self {
        Self {
            ns: Some(cfg.ns),
            ds_km: Some(cfg.ds),
            lambda_gw: Some(cfg.lambda_gw),
            theta_m_deg: Some(cfg.theta_m.to_degrees()),
            gamma_db: Some(GammaValue::from_db(cfg.gamma_db)),
            channel: Some(cfg.channel.clone()),
            mode: Some(cfg.mode),
            d_max_km: Some(cfg.d_max),
            n_trials: Some(cfg.n_trials),
            seed: Some(cfg.seed),
            ground_separation_km: cfg.ground_separation,
            fading_model: Some(cfg.fading_model),
            ss_fading: Some(cfg.ss_fading),
            max_hops: Some(cfg.max_hops),
            sweep: None,
        }
    }
}

pub fn parse_config_file(text: &str, path: &Path) -> Result<ConfigFile> {
    let text = if text.trim().is_empty() { "{}" } else { text };
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn read_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_file(&text, path)
}

/// Reads and validates a scenario. An empty document yields the defaults.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let cfg = read_config_file(path)?.into_scenario();
    cfg.validate()?;
    Ok(cfg)
}

/// JSON text of a scenario with every field present.
pub fn config_to_json(cfg: &ScenarioConfig) -> String {
    serde_json::to_string_pretty(&ConfigFile::from_scenario(cfg)).expect("config serializes")
}
