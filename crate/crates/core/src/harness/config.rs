//! TOML experiment configuration and JSON scene files.
//!
//! Keys follow the usual symbols: `N`, `f_c`, `L`, `gamma`, `kappa`,
//! `Q_F`, `I_max`, `N_iter`, `tau`. Every key is optional; missing keys take
//! the reference values. Unknown keys are rejected.
//!
//! ```toml
//! [system]
//! N = 64
//! L = 6
//!
//! [dictionary]
//! Q_F = 64
//! Q_N_angles = 64
//! Q_N_rings = 1
//!
//! [estimator]
//! epsilon_scale = 1.0
//!
//! [sweep]
//! snr_db = [0, 5, 10, 15, 20]
//! trials = 200
//! schemes = ["eps-omp-ssigw", "ls"]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::sweep::{Scheme, SweepSpec};
use crate::channel::{PathComponent, Scene, SystemConfig, SPEED_OF_LIGHT};
use crate::dictionary::HybridDictionary;
use crate::estimator::EstimatorParams;
use crate::{CVector, Error, Result, C64};

/// Grid sizes of the hybrid dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionarySpec {
    pub q_far: usize,
    pub q_angle: usize,
    pub n_rings: usize,
}

impl Default for DictionarySpec {
    fn default() -> Self {
        DictionarySpec {
            q_far: 256,
            q_angle: 256,
            n_rings: 1,
        }
    }
}

impl DictionarySpec {
    pub fn build(&self, system: &SystemConfig) -> Result<HybridDictionary> {
        HybridDictionary::build(system, self.q_far, self.q_angle, self.n_rings)
    }
}

/// How the stopping threshold follows the noise level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EpsilonRule {
    /// `ε = scale·σ²`.
    NoiseScaled(f64),
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub dictionary: DictionarySection,
    #[serde(default)]
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub pilot: PilotSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub f_c: Option<f64>,
    /// Element spacing in meters; half a wavelength when absent.
    pub d: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub theta_min: Option<f64>,
    pub theta_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionarySection {
    #[serde(rename = "Q_F")]
    pub q_f: Option<usize>,
    #[serde(rename = "Q_N_angles")]
    pub q_n_angles: Option<usize>,
    #[serde(rename = "Q_N_rings")]
    pub q_n_rings: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    /// Fixed threshold; overrides `epsilon_scale`.
    pub epsilon: Option<f64>,
    /// `ε = epsilon_scale·σ²`, 1 when absent.
    pub epsilon_scale: Option<f64>,
    #[serde(rename = "I_max")]
    pub i_max: Option<usize>,
    #[serde(rename = "N_iter")]
    pub n_iter: Option<usize>,
    pub zeta_theta: Option<f64>,
    pub zeta_rho: Option<f64>,
    pub zeta_th: Option<f64>,
    pub tau_th: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotSection {
    pub tau: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub snr_db: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub schemes: Option<Vec<Scheme>>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub n_train: Option<usize>,
    /// Record runtimes; off gives byte-reproducible output.
    pub timing: Option<bool>,
}

impl ConfigFile {
    /// Builds the system configuration, falling back to the reference
    /// values for absent keys.
    pub fn system_config(&self) -> Result<SystemConfig> {
        let s = &self.system;
        let base = SystemConfig::reference();
        let carrier_freq = s.f_c.unwrap_or(base.carrier_freq);
        if !(carrier_freq > 0.0 && carrier_freq.is_finite()) {
            return Err(Error::InvalidConfig(format!("f_c must be positive, got {carrier_freq}")));
        }
        let mut cfg = SystemConfig::new(s.n.unwrap_or(base.n_antennas), carrier_freq);
        cfg.element_spacing = s.d.unwrap_or(SPEED_OF_LIGHT / carrier_freq / 2.0);
        cfg.n_paths = s.l.unwrap_or(base.n_paths);
        cfg.ff_ratio = s.gamma.unwrap_or(base.ff_ratio);
        cfg.rician_kappa = s.kappa.unwrap_or(base.rician_kappa);
        cfg.distance_range = (s.r_min.unwrap_or(base.distance_range.0), s.r_max.unwrap_or(base.distance_range.1));
        cfg.angle_range = (s.theta_min.unwrap_or(base.angle_range.0), s.theta_max.unwrap_or(base.angle_range.1));
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dictionary_spec(&self) -> DictionarySpec {
        let base = DictionarySpec::default();
        let d = &self.dictionary;
        DictionarySpec {
            q_far: d.q_f.unwrap_or(base.q_far),
            q_angle: d.q_n_angles.unwrap_or(base.q_angle),
            n_rings: d.q_n_rings.unwrap_or(base.n_rings),
        }
    }

    pub fn estimator_params(&self) -> EstimatorParams {
        let base = EstimatorParams::default();
        let e = &self.estimator;
        EstimatorParams {
            epsilon: e.epsilon.unwrap_or(base.epsilon),
            max_outer_iters: e.i_max.unwrap_or(base.max_outer_iters),
            n_refine_iters: e.n_iter.unwrap_or(base.n_refine_iters),
            step_theta: e.zeta_theta.unwrap_or(base.step_theta),
            step_rho: e.zeta_rho.unwrap_or(base.step_rho),
            step_floor: e.zeta_th.unwrap_or(base.step_floor),
            gain_tol: e.tau_th.unwrap_or(base.gain_tol),
        }
    }

    pub fn epsilon_rule(&self) -> EpsilonRule {
        match (self.estimator.epsilon, self.estimator.epsilon_scale) {
            (Some(e), _) => EpsilonRule::Fixed(e),
            (None, scale) => EpsilonRule::NoiseScaled(scale.unwrap_or(1.0)),
        }
    }

    pub fn pilot_length(&self) -> usize {
        self.pilot.tau.unwrap_or(1)
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let base = SweepSpec::reference();
        let s = &self.sweep;
        let spec = SweepSpec {
            system: self.system_config()?,
            dictionary: self.dictionary_spec(),
            estimator_params: self.estimator_params(),
            epsilon_rule: self.epsilon_rule(),
            pilot_length: self.pilot_length(),
            snr_grid_db: s.snr_db.clone().unwrap_or(base.snr_grid_db),
            n_trials: s.trials.unwrap_or(base.n_trials),
            schemes: s.schemes.clone().unwrap_or(base.schemes),
            seed: s.seed.unwrap_or(base.seed),
            output_path: s.output.clone(),
            n_train: s.n_train.unwrap_or(base.n_train),
            record_runtime: s.timing.unwrap_or(base.record_runtime),
        };
        spec.validate()?;
        Ok(spec)
    }
}

pub fn parse_config(text: &str, origin: &Path) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| Error::format(origin, e.message()))
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

/// JSON form of a [`Scene`], with the channel as a list of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub system: SystemConfig,
    pub paths: Vec<PathComponent>,
    pub channel: Vec<C64>,
}

impl From<&Scene> for SceneFile {
    fn from(scene: &Scene) -> Self {
        SceneFile {
            system: scene.config,
            paths: scene.paths.clone(),
            channel: scene.channel.iter().copied().collect(),
        }
    }
}

impl SceneFile {
    pub fn into_scene(self) -> Result<Scene> {
        if self.channel.len() != self.system.n_antennas {
            return Err(Error::DimensionMismatch {
                expected: self.system.n_antennas,
                got: self.channel.len(),
            });
        }
        Ok(Scene {
            paths: self.paths,
            channel: CVector::from_vec(self.channel),
            config: self.system,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::format(path, e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e))
    }
}
