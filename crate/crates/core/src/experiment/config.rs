//! JSON experiment configuration.
//!
//! Every section and key is optional; omitted values take the defaults below.
//! Unknown keys are rejected. `--set a.b=value` overrides are applied to the
//! parsed JSON before it is interpreted, so they can reach any key.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::access::DownlinkScenario;
use crate::channel::{FadingSampler, LinkGain, NoiseModel};
use crate::error::{Error, Result};
use crate::opportunistic::{SolverConfig, UplinkScenario};
use crate::rates::{BitEquivalence, SemanticTextModel};
use crate::region::RegionSweepConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    RateRegion,
    Opportunistic,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::RateRegion => "rate-region",
            ExperimentKind::Opportunistic => "opportunistic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Informational; the subcommand decides what runs.
    pub experiment: Option<ExperimentKind>,
    /// Seeds the fading ensemble.
    pub seed: u64,
    pub output_dir: PathBuf,
    pub semantic: SemanticTextModel,
    pub conversion: BitEquivalence,
    pub downlink: DownlinkConfig,
    pub region: RegionSweepConfig,
    pub uplink: UplinkConfig,
    pub sweep: SweepConfig,
    pub solver: SolverConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            seed: 2024,
            output_dir: PathBuf::from("out"),
            semantic: SemanticTextModel::default(),
            conversion: BitEquivalence::default(),
            downlink: DownlinkConfig::default(),
            region: RegionSweepConfig::default(),
            uplink: UplinkConfig::default(),
            sweep: SweepConfig::default(),
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DownlinkConfig {
    pub total_power: f64,
    pub total_bandwidth: f64,
    /// Noise power spectral density, W/Hz.
    pub noise_psd: f64,
    /// Power gain of the bit user's link.
    pub b_gain: f64,
    /// Semantic-to-bit gain ratios, one channel case each.
    pub case_ratios: Vec<f64>,
}

impl Default for DownlinkConfig {
    fn default() -> Self {
        DownlinkConfig {
            total_power: 1.0,
            total_bandwidth: 1e6,
            noise_psd: 1e-9,
            b_gain: 1.0,
            case_ratios: vec![4.0, 1.0, 0.25],
        }
    }
}

/// One downlink channel case.
#[derive(Debug, Clone, PartialEq)]
pub struct DownlinkCase {
    pub label: String,
    pub ratio: f64,
    pub scenario: DownlinkScenario,
}

impl DownlinkConfig {
    pub fn cases(&self, semantic: &SemanticTextModel) -> Result<Vec<DownlinkCase>> {
        if self.case_ratios.is_empty() {
            return Err(Error::Config("downlink.case_ratios must not be empty".into()));
        }
        let noise = NoiseModel::new(self.noise_psd).map_err(config_err)?;
        let mut cases: Vec<DownlinkCase> = Vec::with_capacity(self.case_ratios.len());
        for &ratio in &self.case_ratios {
            if !(ratio.is_finite() && ratio > 0.0) {
                return Err(Error::Config(format!("case ratio must be > 0, got {ratio}")));
            }
            let label = format!("ratio-{ratio}");
            if cases.iter().any(|c| c.label == label) {
                return Err(Error::Config(format!("duplicate case ratio {ratio}")));
            }
            let scenario = DownlinkScenario::new(
                LinkGain::new(ratio * self.b_gain).map_err(config_err)?,
                LinkGain::new(self.b_gain).map_err(config_err)?,
                self.total_power,
                self.total_bandwidth,
                noise,
                *semantic,
            )
            .map_err(config_err)?;
            cases.push(DownlinkCase {
                label,
                ratio,
                scenario,
            });
        }
        Ok(cases)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UplinkConfig {
    pub primary_power: f64,
    pub bandwidth: f64,
    /// Noise power spectral density, W/Hz.
    pub noise_psd: f64,
    pub p_avg: f64,
    pub p_peak: f64,
    pub ensemble_size: usize,
    /// Mean power gains of the Rayleigh-faded links.
    pub primary_mean_gain: f64,
    pub secondary_mean_gain: f64,
}

impl Default for UplinkConfig {
    fn default() -> Self {
        UplinkConfig {
            primary_power: 1.0,
            bandwidth: 1e6,
            noise_psd: 1e-10,
            p_avg: 0.5,
            p_peak: 1.0,
            ensemble_size: 2000,
            primary_mean_gain: 1.0,
            secondary_mean_gain: 1.0,
        }
    }
}

impl UplinkConfig {
    /// Scenario with `r_req = 0`.
    pub fn scenario(
        &self,
        semantic: &SemanticTextModel,
        conversion: &BitEquivalence,
    ) -> Result<UplinkScenario> {
        let scn = UplinkScenario {
            primary_power: self.primary_power,
            bandwidth: self.bandwidth,
            noise: NoiseModel::new(self.noise_psd).map_err(config_err)?,
            semantic: *semantic,
            conversion: *conversion,
            r_req: 0.0,
            p_avg: self.p_avg,
            p_peak: self.p_peak,
        };
        scn.validate().map_err(config_err)?;
        Ok(scn)
    }

    /// Primary link on stream 0, secondary on stream 1.
    pub fn samplers(&self) -> Result<(FadingSampler, FadingSampler)> {
        if self.ensemble_size == 0 {
            return Err(Error::Config("uplink.ensemble_size must be >= 1".into()));
        }
        Ok((
            FadingSampler::new(self.primary_mean_gain, 0).map_err(config_err)?,
            FadingSampler::new(self.secondary_mean_gain, 1).map_err(config_err)?,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Explicit requirements in bits/s. When absent, `r_req_points` values are
    /// spread evenly over `[0, r_req_max_fraction * R_silent]`, where
    /// `R_silent` is the ergodic primary rate with the secondary silent.
    pub r_req: Option<Vec<f64>>,
    pub r_req_points: usize,
    pub r_req_max_fraction: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            r_req: None,
            r_req_points: 10,
            r_req_max_fraction: 0.95,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        match &self.r_req {
            Some(list) => {
                if list.is_empty() {
                    return Err(Error::Config("sweep.r_req must not be empty".into()));
                }
                if list.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
                    return Err(Error::Config("sweep.r_req values must be finite and >= 0".into()));
                }
                if list.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config("sweep.r_req must be strictly increasing".into()));
                }
            }
            None => {
                if self.r_req_points == 0 {
                    return Err(Error::Config("sweep.r_req_points must be >= 1".into()));
                }
                let f = self.r_req_max_fraction;
                if !(f.is_finite() && f > 0.0) {
                    return Err(Error::Config(format!(
                        "sweep.r_req_max_fraction must be > 0, got {f}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn values(&self, r_silent: f64) -> Vec<f64> {
        match &self.r_req {
            Some(list) => list.clone(),
            None if self.r_req_points == 1 => vec![0.0],
            None => {
                let top = self.r_req_max_fraction * r_silent;
                let n = self.r_req_points - 1;
                (0..=n).map(|i| top * i as f64 / n as f64).collect()
            }
        }
    }
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl ExperimentConfig {
    /// Parses and validates. A run manifest is accepted as well, in which case
    /// its echoed config is used.
    pub fn from_value(mut value: Value) -> Result<Self> {
        if let Some(obj) = value.as_object_mut() {
            if obj.contains_key("outputs") {
                if let Some(cfg) = obj.remove("config") {
                    value = cfg;
                }
            }
        }
        let cfg: ExperimentConfig =
            serde_json::from_value(value).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::load_str(text, &[])
    }

    pub fn load_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("config is not valid JSON: {e}")))?;
        if !value.is_object() {
            return Err(Error::Config("config must be a JSON object".into()));
        }
        // Overrides target the config, so unwrap a manifest first.
        if value.get("outputs").is_some() {
            if let Some(cfg) = value.get_mut("config").map(Value::take) {
                value = cfg;
            }
        }
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::load_str(&text, overrides)
    }

    pub fn validate(&self) -> Result<()> {
        self.semantic.validate().map_err(config_err)?;
        self.conversion.validate().map_err(config_err)?;
        self.downlink.cases(&self.semantic)?;
        self.region.validate()?;
        self.uplink.scenario(&self.semantic, &self.conversion)?;
        self.uplink.samplers()?;
        self.sweep.validate()?;
        self.solver.validate()
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Applies `a.b.c=value`. The value is parsed as JSON when possible and taken
/// as a string otherwise, so `output_dir=runs/x` needs no quoting.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::Config(format!(
            "override `{spec}` has an empty key segment"
        )));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let mut segments = key.split('.').peekable();
    while let Some(seg) = segments.next() {
        let obj = match node {
            Value::Object(m) => m,
            other => {
                if !other.is_null() {
                    return Err(Error::Config(format!(
                        "override `{key}`: `{seg}` is inside a non-object"
                    )));
                }
                *other = Value::Object(Map::new());
                other.as_object_mut().expect("just set")
            }
        };
        if segments.peek().is_none() {
            obj.insert(seg.to_string(), value);
            return Ok(());
        }
        node = obj.entry(seg.to_string()).or_insert(Value::Null);
    }
    unreachable!("key has at least one segment")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        assert_eq!(
            ExperimentConfig::from_json_str("{}").unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in [
            r#"{"sed": 1}"#,
            r#"{"uplink": {"p_average": 0.3}}"#,
            r#"{"solver": {"tolerance": 1}}"#,
        ] {
            assert!(
                matches!(ExperimentConfig::from_json_str(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn physical_values_validated_at_load() {
        for text in [
            r#"{"uplink": {"p_avg": 2.0}}"#,
            r#"{"downlink": {"noise_psd": -1}}"#,
            r#"{"downlink": {"case_ratios": [1, 1]}}"#,
            r#"{"semantic": {"logistic_upper": 1.5}}"#,
            r#"{"region": {"band_grid": 1}}"#,
            r#"{"sweep": {"r_req": [2, 1]}}"#,
            r#"{"solver": {"power_grid": 1}}"#,
            r#"{"uplink": {"ensemble_size": 0}}"#,
        ] {
            assert!(
                matches!(ExperimentConfig::from_json_str(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let cfg = ExperimentConfig::load_str(
            r#"{"uplink": {"p_avg": 0.3}}"#,
            &[
                "uplink.p_avg=0.4".into(),
                "solver.power_grid=51".into(),
                "output_dir=runs/a=b".into(),
                "sweep.r_req=[0, 1e6]".into(),
                "experiment=\"opportunistic\"".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.uplink.p_avg, 0.4);
        assert_eq!(cfg.solver.power_grid, 51);
        assert_eq!(cfg.output_dir, PathBuf::from("runs/a=b"));
        assert_eq!(cfg.sweep.r_req, Some(vec![0.0, 1e6]));
        assert_eq!(cfg.experiment, Some(ExperimentKind::Opportunistic));
        assert!(ExperimentConfig::load_str("{}", &["uplink.bogus=1".into()]).is_err());
        assert!(ExperimentConfig::load_str("{}", &["noequals".into()]).is_err());
        assert!(ExperimentConfig::load_str("{}", &["seed.x=1".into()]).is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let mut cfg = ExperimentConfig::default();
        cfg.sweep.r_req = Some(vec![0.0, 0.1 + 0.2]);
        cfg.uplink.noise_psd = 1.0 / 3.0 * 1e-10;
        let back = ExperimentConfig::from_value(cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn manifest_shape_is_accepted() {
        let cfg = ExperimentConfig {
            seed: 9,
            ..ExperimentConfig::default()
        };
        let manifest = serde_json::json!({ "config": cfg.to_json(), "outputs": [] });
        let text = manifest.to_string();
        let back = ExperimentConfig::load_str(&text, &["seed=10".into()]).unwrap();
        assert_eq!(back.seed, 10);
    }

    #[test]
    fn default_sweep_values() {
        let s = SweepConfig::default();
        let v = s.values(100.0);
        assert_eq!(v.len(), 10);
        assert_eq!(v[0], 0.0);
        assert!((v[9] - 95.0).abs() < 1e-12);
        let one = SweepConfig { r_req_points: 1, ..s };
        assert_eq!(one.values(100.0), vec![0.0]);
    }
}
