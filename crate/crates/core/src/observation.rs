//! Pilot observation model.
//!
//! The user sends an orthogonal pilot of length `τ` (`ΦᴴΦ = τ`); the base
//! station correlates with `Φ/√τ`, which leaves the sufficient statistic
//! `y = √τ·h + n` with `n ~ CN(0, σ² I)`. Only that statistic is simulated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{CVector, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotConfig {
    pub pilot_length: usize,
    pub noise_variance: f64,
}

impl PilotConfig {
    pub fn new(pilot_length: usize, noise_variance: f64) -> Result<Self> {
        let pilot = PilotConfig {
            pilot_length,
            noise_variance,
        };
        pilot.validate()?;
        Ok(pilot)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pilot_length == 0 {
            return Err(Error::InvalidConfig("pilot length must be >= 1".into()));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise variance must be finite and >= 0, got {}",
                self.noise_variance
            )));
        }
        Ok(())
    }

    pub fn sqrt_tau(&self) -> f64 {
        (self.pilot_length as f64).sqrt()
    }
}

/// Correlated pilot vector together with the pilot it was formed with.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub y: CVector,
    pub pilot: PilotConfig,
}

impl Observation {
    /// `y/√τ`, the unbiased channel estimate.
    pub fn descaled(&self) -> CVector {
        let s = 1.0 / self.pilot.sqrt_tau();
        self.y.map(|x| x * s)
    }
}

/// Draws `y = √τ·h + n` with i.i.d. `CN(0, σ²)` noise from a seeded stream.
pub fn observe(h: &CVector, pilot: PilotConfig, seed: u64) -> Result<Observation> {
    pilot.validate()?;
    let sqrt_tau = pilot.sqrt_tau();
    let y = if pilot.noise_variance == 0.0 {
        h.map(|x| x * sqrt_tau)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = (pilot.noise_variance / 2.0).sqrt();
        h.map(|x| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            x * sqrt_tau + C64::new(s * re, s * im)
        })
    };
    Ok(Observation { y, pilot })
}

/// Noise variance giving a per-antenna post-correlation SNR of `snr_db`:
/// `σ² = τ·P / 10^(snr/10)`, `P` the mean per-antenna channel power.
pub fn sigma_for_snr(snr_db: f64, tau: usize, avg_power: f64) -> Result<f64> {
    if !(avg_power > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "average channel power must be positive, got {avg_power}"
        )));
    }
    Ok(tau as f64 * avg_power / 10f64.powf(snr_db / 10.0))
}

/// Empirical `E‖h‖²/N` over a set of channels.
pub fn average_channel_power<'a>(channels: impl IntoIterator<Item = &'a CVector>) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for h in channels {
        total += h.norm_squared() / h.len() as f64;
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyInput("channel set"));
    }
    Ok(total / count as f64)
}
