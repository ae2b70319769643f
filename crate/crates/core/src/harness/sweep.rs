//! Monte-Carlo NMSE sweeps over an SNR grid.
//!
//! Every trial draws one scene, reused across all SNR points; every
//! (SNR, trial) pair draws one noise realization shared by all schemes.
//! Seeds come from [`trial_seed`], so results do not depend on scheme order
//! or on how trials are scheduled across threads.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DictionarySpec, EpsilonRule};
use super::results::{SweepResult, SweepRow};
use super::nmse;
use crate::baselines::{covariance_from_channels, ff_omp, hf_omp_gamma, ls_estimate, mmse_estimate, CovarianceModel};
use crate::channel::{sample_scene, Scene, SystemConfig};
use crate::dictionary::HybridDictionary;
use crate::estimator::{estimate, EstimatorParams};
use crate::observation::{average_channel_power, observe, sigma_for_snr, Observation, PilotConfig};
use crate::{CVector, Error, Result};

/// Estimators the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Proposed estimator with refinement.
    EpsOmpSsigw,
    /// Proposed estimator with refinement disabled.
    EpsOmp,
    Ls,
    Mmse,
    /// Angular-only OMP given the true path count.
    FfOmp,
    /// Two-stage hybrid OMP given the true path count and split.
    HfOmpGamma,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::EpsOmpSsigw,
        Scheme::EpsOmp,
        Scheme::Ls,
        Scheme::Mmse,
        Scheme::FfOmp,
        Scheme::HfOmpGamma,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::EpsOmpSsigw => "eps-omp-ssigw",
            Scheme::EpsOmp => "eps-omp",
            Scheme::Ls => "ls",
            Scheme::Mmse => "mmse",
            Scheme::FfOmp => "ff-omp",
            Scheme::HfOmpGamma => "hf-omp-gamma",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

impl Serialize for Scheme {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Scheme {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub system: SystemConfig,
    pub dictionary: DictionarySpec,
    /// `epsilon` is replaced per SNR point according to `epsilon_rule`.
    pub estimator_params: EstimatorParams,
    pub epsilon_rule: EpsilonRule,
    pub pilot_length: usize,
    pub snr_grid_db: Vec<f64>,
    pub n_trials: usize,
    pub schemes: Vec<Scheme>,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    /// Scenes used to estimate the mean channel power and, for MMSE, the
    /// channel covariance. Drawn from a seed stream disjoint from the trials.
    pub n_train: usize,
    /// Record wall-clock runtimes. Disable for byte-reproducible output.
    pub record_runtime: bool,
}

impl SweepSpec {
    /// Reference parameters at full scale.
    pub fn reference() -> Self {
        SweepSpec {
            system: SystemConfig::reference(),
            dictionary: DictionarySpec::default(),
            estimator_params: EstimatorParams::default(),
            epsilon_rule: EpsilonRule::NoiseScaled(1.0),
            pilot_length: 1,
            snr_grid_db: vec![-5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            n_trials: 200,
            schemes: Scheme::ALL.to_vec(),
            seed: 1,
            output_path: None,
            n_train: 1000,
            record_runtime: true,
        }
    }

    /// 64 antennas, 128 atoms, 6 paths, 200 trials.
    pub fn desk() -> Self {
        let system = SystemConfig::desk();
        SweepSpec {
            system,
            dictionary: DictionarySpec {
                q_far: 64,
                q_angle: 64,
                n_rings: 1,
            },
            snr_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            ..SweepSpec::reference()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.n_trials == 0 {
            return Err(Error::InvalidConfig("n_trials must be >= 1".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::InvalidConfig("SNR grid is empty".into()));
        }
        if self.snr_grid_db.iter().any(|s| s.is_nan()) {
            return Err(Error::InvalidConfig("SNR grid contains NaN".into()));
        }
        if self.pilot_length == 0 {
            return Err(Error::InvalidConfig("pilot length must be >= 1".into()));
        }
        if self.n_train == 0 {
            return Err(Error::InvalidConfig("n_train must be >= 1".into()));
        }
        let mut params = self.estimator_params;
        params.epsilon = 0.0;
        params.validate()?;
        match self.epsilon_rule {
            EpsilonRule::NoiseScaled(s) | EpsilonRule::Fixed(s) if !(s >= 0.0 && s.is_finite()) => Err(
                Error::InvalidConfig(format!("epsilon setting must be finite and >= 0, got {s}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn epsilon_for(&self, noise_variance: f64) -> f64 {
        match self.epsilon_rule {
            EpsilonRule::NoiseScaled(s) => s * noise_variance,
            EpsilonRule::Fixed(e) => e,
        }
    }
}

const STREAM_SCENE: u64 = 0;
const STREAM_TRAIN: u64 = 1;
const STREAM_NOISE: u64 = 2;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for item `index` of `stream` under the master seed.
pub fn trial_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix(splitmix(splitmix(master) ^ stream) ^ index)
}

/// Quantities estimated once per sweep from training scenes.
#[derive(Debug, Clone)]
pub struct Calibration {
    /// Mean per-antenna channel power `E‖h‖²/N`.
    pub avg_power: f64,
    pub covariance: Option<CovarianceModel>,
}

/// Draws the training scenes of `spec` and derives the channel power and,
/// when requested, the covariance.
pub fn calibrate(spec: &SweepSpec, with_covariance: bool) -> Result<Calibration> {
    let channels: Vec<CVector> = (0..spec.n_train as u64)
        .into_par_iter()
        .map(|k| sample_scene(&spec.system, trial_seed(spec.seed, STREAM_TRAIN, k)).map(|s| s.channel))
        .collect::<Result<_>>()?;
    let avg_power = average_channel_power(&channels)?;
    let covariance = if with_covariance {
        Some(covariance_from_channels(&channels)?)
    } else {
        None
    };
    Ok(Calibration { avg_power, covariance })
}

/// Outcome of one scheme on one observation.
#[derive(Debug, Clone, Copy)]
struct Outcome {
    nmse: f64,
    iterations: usize,
    runtime: f64,
}

/// Runs a single scheme and returns its channel estimate and iteration count.
pub fn run_scheme(
    scheme: Scheme,
    obs: &Observation,
    dict: &HybridDictionary,
    params: &EstimatorParams,
    system: &SystemConfig,
    covariance: Option<&CovarianceModel>,
) -> Result<(CVector, usize)> {
    match scheme {
        Scheme::EpsOmpSsigw => estimate(obs, dict, params, system).map(|r| (r.h_hat, r.iterations)),
        Scheme::EpsOmp => {
            let plain = EstimatorParams {
                n_refine_iters: 0,
                ..*params
            };
            estimate(obs, dict, &plain, system).map(|r| (r.h_hat, r.iterations))
        }
        Scheme::Ls => Ok((ls_estimate(obs), 0)),
        Scheme::Mmse => {
            let cov = covariance.ok_or_else(|| Error::InvalidConfig("MMSE needs a covariance model".into()))?;
            mmse_estimate(obs, cov).map(|h| (h, 0))
        }
        Scheme::FfOmp => ff_omp(obs, dict, system.n_paths).map(|r| (r.h_hat, r.iterations)),
        Scheme::HfOmpGamma => {
            hf_omp_gamma(obs, dict, system.n_paths, system.ff_ratio).map(|r| (r.h_hat, r.iterations))
        }
    }
}

/// [`run_sweep_with`] on scenes from [`sample_scene`].
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let system = spec.system;
    run_sweep_with(spec, move |seed| sample_scene(&system, seed))
}

/// Runs the sweep with a caller-supplied scene generator, called once per
/// trial with that trial's seed.
///
/// A scheme that errors on a trial is counted in its row's `failures` and
/// left out of the averages; the sweep itself only fails on configuration
/// errors.
pub fn run_sweep_with<F>(spec: &SweepSpec, scenes: F) -> Result<SweepResult>
where
    F: Fn(u64) -> Result<Scene> + Sync,
{
    spec.validate()?;
    let dict = spec.dictionary.build(&spec.system)?;
    let calibration = calibrate(spec, spec.schemes.contains(&Scheme::Mmse))?;
    let noise: Vec<f64> = spec
        .snr_grid_db
        .iter()
        .map(|&snr| sigma_for_snr(snr, spec.pilot_length, calibration.avg_power))
        .collect::<Result<_>>()?;

    // outcomes[trial][snr][scheme]
    let outcomes: Vec<Vec<Vec<Option<Outcome>>>> = (0..spec.n_trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<Vec<Vec<Option<Outcome>>>> {
            let scene = scenes(trial_seed(spec.seed, STREAM_SCENE, trial))?;
            let h = &scene.channel;
            noise
                .iter()
                .enumerate()
                .map(|(k, &sigma2)| {
                    let pilot = PilotConfig::new(spec.pilot_length, sigma2)?;
                    let noise_seed = trial_seed(spec.seed, STREAM_NOISE + k as u64, trial);
                    let obs = observe(h, pilot, noise_seed)?;
                    let params = EstimatorParams {
                        epsilon: spec.epsilon_for(sigma2),
                        ..spec.estimator_params
                    };
                    Ok(spec
                        .schemes
                        .iter()
                        .map(|&scheme| {
                            let start = Instant::now();
                            let run = run_scheme(scheme, &obs, &dict, &params, &spec.system, calibration.covariance.as_ref());
                            let runtime = start.elapsed().as_secs_f64();
                            let (h_hat, iterations) = run.ok()?;
                            let nmse = nmse(&h_hat, h).ok()?;
                            Some(Outcome {
                                nmse,
                                iterations,
                                runtime: if spec.record_runtime { runtime } else { 0.0 },
                            })
                        })
                        .collect())
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(spec.schemes.len() * spec.snr_grid_db.len());
    for (s, &scheme) in spec.schemes.iter().enumerate() {
        for (k, &snr_db) in spec.snr_grid_db.iter().enumerate() {
            let ok: Vec<Outcome> = outcomes.iter().filter_map(|t| t[k][s]).collect();
            let count = ok.len();
            let failures = spec.n_trials - count;
            let mean = |f: fn(&Outcome) -> f64| {
                if count == 0 {
                    f64::NAN
                } else {
                    ok.iter().map(f).sum::<f64>() / count as f64
                }
            };
            let mean_nmse = mean(|o| o.nmse);
            let std_err = if count > 1 {
                let var = ok.iter().map(|o| (o.nmse - mean_nmse).powi(2)).sum::<f64>() / (count - 1) as f64;
                (var / count as f64).sqrt()
            } else {
                0.0
            };
            rows.push(SweepRow {
                scheme: scheme.name().to_string(),
                snr_db,
                mean_nmse,
                mean_iterations: mean(|o| o.iterations as f64),
                mean_runtime_s: mean(|o| o.runtime),
                trials: count,
                nmse_std_err: std_err,
                failures,
            });
        }
    }
    let mut result = SweepResult { rows };
    result.sort();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::PathComponent;
    use crate::dictionary::grid_angle;
    use crate::C64;

    fn tiny(schemes: Vec<Scheme>) -> SweepSpec {
        SweepSpec {
            n_trials: 6,
            n_train: 50,
            snr_grid_db: vec![0.0, 10.0],
            schemes,
            record_runtime: false,
            ..SweepSpec::desk()
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("omp".parse::<Scheme>().is_err());
    }

    #[test]
    fn seeds_are_distinct_across_streams() {
        let a = trial_seed(1, STREAM_SCENE, 0);
        let b = trial_seed(1, STREAM_TRAIN, 0);
        let c = trial_seed(1, STREAM_SCENE, 1);
        let d = trial_seed(2, STREAM_SCENE, 0);
        assert!(a != b && a != c && a != d);
        assert_eq!(a, trial_seed(1, STREAM_SCENE, 0));
    }

    #[test]
    fn noiseless_on_grid_single_path() {
        let spec = SweepSpec {
            n_trials: 1,
            snr_grid_db: vec![f64::INFINITY],
            schemes: vec![Scheme::EpsOmpSsigw],
            epsilon_rule: EpsilonRule::Fixed(1e-12),
            ..tiny(vec![])
        };
        let system = SystemConfig { n_paths: 1, ..spec.system };
        let result = run_sweep_with(&spec, |_| {
            let paths = vec![PathComponent::far(C64::new(0.6, 0.8), grid_angle(21, 64))];
            let channel = crate::channel::synthesize_channel(&paths, &system)?;
            Ok(Scene { paths, channel, config: system })
        })
        .unwrap();
        assert_eq!(result.rows.len(), 1);
        assert!(result.rows[0].mean_nmse < 1e-10);
        assert_eq!(result.rows[0].mean_iterations, 1.0);
    }

    #[test]
    fn sweeps_are_deterministic() {
        let spec = tiny(vec![Scheme::EpsOmpSsigw, Scheme::Ls, Scheme::FfOmp]);
        assert_eq!(run_sweep(&spec).unwrap(), run_sweep(&spec).unwrap());
    }

    #[test]
    fn scheme_order_does_not_matter() {
        let a = run_sweep(&tiny(vec![Scheme::EpsOmpSsigw, Scheme::Ls, Scheme::HfOmpGamma])).unwrap();
        let b = run_sweep(&tiny(vec![Scheme::HfOmpGamma, Scheme::EpsOmpSsigw, Scheme::Ls])).unwrap();
        assert_eq!(a, b);
        let single = run_sweep(&tiny(vec![Scheme::Ls])).unwrap();
        let ls_rows: Vec<_> = a.rows.iter().filter(|r| r.scheme == "ls").cloned().collect();
        assert_eq!(single.rows, ls_rows);
    }

    #[test]
    fn one_row_per_scheme_and_snr() {
        let result = run_sweep(&tiny(vec![Scheme::Mmse, Scheme::EpsOmp])).unwrap();
        assert_eq!(result.rows.len(), 4);
        assert!(result.rows.iter().all(|r| r.mean_nmse >= 0.0 && r.trials == 6 && r.failures == 0));
    }

    #[test]
    fn ls_matches_analytic_expectation() {
        let spec = SweepSpec {
            n_trials: 400,
            n_train: 400,
            snr_grid_db: vec![5.0],
            ..tiny(vec![Scheme::Ls])
        };
        let result = run_sweep(&spec).unwrap();
        let row = &result.rows[0];
        // E[NMSE] = N σ² E[1/‖h‖²] / τ; use the same channels to evaluate it
        let cal = calibrate(&spec, false).unwrap();
        let sigma2 = sigma_for_snr(5.0, 1, cal.avg_power).unwrap();
        let expected: f64 = (0..spec.n_trials as u64)
            .map(|t| {
                let h = sample_scene(&spec.system, trial_seed(spec.seed, STREAM_SCENE, t)).unwrap().channel;
                64.0 * sigma2 / h.norm_squared()
            })
            .sum::<f64>()
            / spec.n_trials as f64;
        assert!((row.mean_nmse - expected).abs() < 3.0 * row.nmse_std_err + 0.02 * expected);
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        // noiseless MMSE with a rank-deficient covariance is singular
        let spec = SweepSpec {
            n_trials: 2,
            n_train: 3,
            snr_grid_db: vec![f64::INFINITY],
            ..tiny(vec![Scheme::Mmse, Scheme::Ls])
        };
        let result = run_sweep(&spec).unwrap();
        let mmse = result.rows.iter().find(|r| r.scheme == "mmse").unwrap();
        assert_eq!((mmse.trials, mmse.failures), (0, 2));
        assert!(mmse.mean_nmse.is_nan());
        let ls = result.rows.iter().find(|r| r.scheme == "ls").unwrap();
        assert_eq!(ls.trials, 2);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(run_sweep(&SweepSpec { n_trials: 0, ..tiny(vec![Scheme::Ls]) }).is_err());
        assert!(run_sweep(&SweepSpec { snr_grid_db: vec![], ..tiny(vec![Scheme::Ls]) }).is_err());
    }
}
