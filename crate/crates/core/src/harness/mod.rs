//! Experiment harness: error metric, Monte-Carlo sweeps, operation-count
//! formulas, configuration files and result persistence.

mod complexity;
mod config;
mod results;
mod sweep;

pub use complexity::{complexity_eval, ComplexityParams, ComplexityScheme};
pub use config::{load_config, parse_config, ConfigFile, DictionarySpec, EpsilonRule, SceneFile};
pub use results::{plot_data_path, read_results, write_results, SweepResult, SweepRow};
pub use sweep::{calibrate, run_scheme, run_sweep, run_sweep_with, trial_seed, Calibration, Scheme, SweepSpec};

use crate::{CVector, Error, Result};

/// `‖ĥ - h‖² / ‖h‖²` for one realization.
pub fn nmse(h_hat: &CVector, h: &CVector) -> Result<f64> {
    if h_hat.len() != h.len() {
        return Err(Error::DimensionMismatch {
            expected: h.len(),
            got: h_hat.len(),
        });
    }
    let energy = h.norm_squared();
    if energy == 0.0 {
        return Err(Error::ZeroChannel);
    }
    Ok((h_hat - h).norm_squared() / energy)
}

/// `10 log10(x)`.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
