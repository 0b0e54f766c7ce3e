//! Run configuration: one TOML document, units spelled out in key names.
//!
//! Unknown keys are rejected at every level. Defaults follow the reference
//! parameter set (p_fa = 1e-3, t_s = 20 ms, 40 / 23.85 dBm, 7 / 4 dB shadowing,
//! -170 dBm/Hz, L = 2, k = 8).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use oppspec_core::analytics::{Bounds, Closure, Model};
use oppspec_core::linkbudget::noise_mw;
use oppspec_core::occupancy::{Anchors, FitConfig};
use oppspec_core::{ChannelModel, DetectorSpec, ExpMixture, RadioEnv, SnrMode};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output_dir", skip_serializing)]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub synth: SynthConfig,
    #[serde(default)]
    pub calibrate: CalibrateConfig,
    #[serde(default)]
    pub channels: Vec<ChannelRef>,
}

fn default_seed() -> u64 {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub pt_mbs_dbm: f64,
    pub pt_fbs_dbm: f64,
    pub mbs_distance_m: f64,
    pub indoor_distance_m: f64,
    pub carrier_ghz: f64,
    pub shadow_sigma_mbs_db: f64,
    pub shadow_sigma_fbs_db: f64,
    pub noise_density_dbm_per_hz: f64,
    pub bandwidth_hz: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            pt_mbs_dbm: 40.0,
            pt_fbs_dbm: 23.85,
            mbs_distance_m: 100.0,
            indoor_distance_m: 10.0,
            carrier_ghz: 2.65,
            shadow_sigma_mbs_db: 7.0,
            shadow_sigma_fbs_db: 4.0,
            noise_density_dbm_per_hz: -170.0,
            bandwidth_hz: 5e6,
        }
    }
}

impl ScenarioConfig {
    pub fn env(&self) -> RadioEnv {
        RadioEnv {
            pt_mbs: self.pt_mbs_dbm,
            pt_fbs: self.pt_fbs_dbm,
            mbs_distance: self.mbs_distance_m,
            indoor_distance: self.indoor_distance_m,
            carrier: self.carrier_ghz,
            shadow_sigma_mbs: self.shadow_sigma_mbs_db,
            shadow_sigma_fbs: self.shadow_sigma_fbs_db,
            noise_density: self.noise_density_dbm_per_hz,
            bandwidth: self.bandwidth_hz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub target_pfa: f64,
    pub sensing_time_ms: f64,
    /// Prior occupancy; the mean channel duty cycle when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duty_cycle_prior: Option<f64>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            target_pfa: 1e-3,
            sensing_time_ms: 20.0,
            duty_cycle_prior: None,
        }
    }
}

impl DetectorConfig {
    pub fn sensing_time(&self) -> f64 {
        self.sensing_time_ms * 1e-3
    }

    /// Detector with per-sample noise variance equal to the in-band noise power.
    pub fn spec(&self, env: &RadioEnv, prior: f64) -> Result<DetectorSpec, CliError> {
        Ok(DetectorSpec::new(
            self.target_pfa,
            self.sensing_time(),
            env.bandwidth,
            noise_mw(env),
            self.duty_cycle_prior.unwrap_or(prior),
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    /// Sensing period for `simulate`; the optimum when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_ms: Option<f64>,
    pub num_channels: usize,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            period_ms: None,
            num_channels: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub k: usize,
    /// Fixed anchors; all three or none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            k: 8,
            c1_s: None,
            b: None,
            a: None,
        }
    }
}

impl FitSection {
    pub fn config(&self) -> Result<FitConfig, CliError> {
        self.config_with_k(self.k)
    }

    pub fn config_with_k(&self, k: usize) -> Result<FitConfig, CliError> {
        let anchors = match (self.c1_s, self.b, self.a) {
            (None, None, None) => Anchors::Auto,
            (Some(c1), Some(b), Some(a)) => Anchors::Fixed { c1, b, a },
            _ => {
                return Err(CliError::Config(
                    "fit anchors c1_s, b and a must be given together".into(),
                ))
            }
        };
        let cfg = FitConfig { k, anchors };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub snr_mode: SnrMode,
    pub closure: Closure,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max_ms: Option<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            snr_mode: SnrMode::Quadrature,
            closure: Closure::Printed,
            t_min_ms: None,
            t_max_ms: None,
        }
    }
}

impl AnalysisConfig {
    pub fn model(&self) -> Model {
        Model {
            snr: self.snr_mode,
            closure: self.closure,
        }
    }

    pub fn bounds(&self, channels: &[ChannelModel], sensing_time: f64) -> Bounds {
        let d = Bounds::default_for(channels, sensing_time);
        Bounds {
            lo: self.t_min_ms.map_or(d.lo, |v| v * 1e-3),
            hi: self.t_max_ms.map_or(d.hi, |v| v * 1e-3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Sensing cycles per run.
    pub periods: u64,
    /// Longest span between shadowing redraws in the senseless baseline.
    pub senseless_block_ms: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            periods: 100_000,
            senseless_block_ms: 1000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub max_channels: usize,
    /// Horizon of each base trace generated from a model for bootstrapping.
    pub base_horizon_s: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            max_channels: 5,
            base_horizon_s: 100_000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub duration_s: f64,
    pub sweep_period_ms: f64,
    /// Primary-user SNR at the sensing front end while ON.
    pub snr_db: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            duration_s: 14_400.0,
            sweep_period_ms: 30.0,
            snr_db: 16.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateConfig {
    /// Interference-free mean throughput to reach.
    pub target_c0_mbps: f64,
    /// Link-budget α to reach by moving the macro cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_alpha: Option<f64>,
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        Self {
            target_c0_mbps: 100.0,
            target_alpha: None,
        }
    }
}

/// One channel: exactly one of a model file, a power trace, a pair of dwell
/// files or inline mixture parameters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_trace: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_dwells: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub off_dwells: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_w: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_lambda_per_s: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub off_w: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub off_lambda_per_s: Option<Vec<f64>>,
}

/// Parsed form of a [`ChannelRef`].
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSource {
    Model(PathBuf),
    PowerTrace(PathBuf),
    Dwells { on: PathBuf, off: PathBuf },
    Inline(ChannelModel),
}

impl ChannelRef {
    pub fn inline(model: &ChannelModel) -> Self {
        Self {
            on_w: Some(model.on.weights().to_vec()),
            on_lambda_per_s: Some(model.on.rates().to_vec()),
            off_w: Some(model.off.weights().to_vec()),
            off_lambda_per_s: Some(model.off.rates().to_vec()),
            ..Self::default()
        }
    }

    /// Resolves relative paths against `base`.
    pub fn source(&self, base: &Path) -> Result<ChannelSource, CliError> {
        let inline = self.on_w.is_some()
            || self.on_lambda_per_s.is_some()
            || self.off_w.is_some()
            || self.off_lambda_per_s.is_some();
        let dwells = self.on_dwells.is_some() || self.off_dwells.is_some();
        let kinds = [
            self.model.is_some(),
            self.power_trace.is_some(),
            dwells,
            inline,
        ];
        if kinds.iter().filter(|&&k| k).count() != 1 {
            return Err(CliError::Config(
                "each channel needs exactly one of model, power_trace, on_dwells/off_dwells or inline parameters".into(),
            ));
        }
        let at = |p: &PathBuf| {
            if p.is_absolute() {
                p.clone()
            } else {
                base.join(p)
            }
        };
        if let Some(p) = &self.model {
            return Ok(ChannelSource::Model(at(p)));
        }
        if let Some(p) = &self.power_trace {
            return Ok(ChannelSource::PowerTrace(at(p)));
        }
        if dwells {
            return match (&self.on_dwells, &self.off_dwells) {
                (Some(on), Some(off)) => Ok(ChannelSource::Dwells {
                    on: at(on),
                    off: at(off),
                }),
                _ => Err(CliError::Config(
                    "on_dwells and off_dwells must be given together".into(),
                )),
            };
        }
        match (
            &self.on_w,
            &self.on_lambda_per_s,
            &self.off_w,
            &self.off_lambda_per_s,
        ) {
            (Some(ow), Some(ol), Some(fw), Some(fl)) => {
                let on = ExpMixture::new(ow.clone(), ol.clone())?;
                let off = ExpMixture::new(fw.clone(), fl.clone())?;
                Ok(ChannelSource::Inline(ChannelModel::new(on, off)?))
            }
            _ => Err(CliError::Config(
                "inline channels need on_w, on_lambda_per_s, off_w and off_lambda_per_s".into(),
            )),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Canonical TOML echo; `output_dir` is not part of it.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_toml("").expect("empty config uses defaults")
    }
}
