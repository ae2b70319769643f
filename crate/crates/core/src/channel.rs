//! Ground-truth hybrid-field channel generation.
//!
//! Angles are carried in sine units (`θ = sin φ ∈ [-1, 1]`). Three steering
//! models are provided:
//!
//! - [`far_steering`]: planar wave, element `n` (0-based) is `exp(-jπ n θ)`.
//! - [`near_steering_exact`]: spherical wave over centered element positions
//!   `δ_n = (n - (N-1)/2) d`.
//! - [`near_steering_fresnel`]: the second-order (Fresnel) expansion of the
//!   spherical phase in `(θ, ρ = 1/r)`, also over centered positions.
//!
//! The two near-field models share one sign convention and converge to each
//! other as `r` grows. The planar model uses the opposite orientation of the
//! linear phase term, so `near_steering_fresnel(θ, 0)` equals
//! `far_steering(-θ)` up to a global unit-modulus phase. Cross-model
//! comparisons are only meaningful up to that mirror and phase; see
//! [`fresnel_far_limit_angle`].

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{CVector, Error, Result, C64};

/// Propagation speed used to derive the wavelength from the carrier.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Array, carrier and scene-generation parameters.
///
/// `n_paths`, `ff_ratio` and the sampling ranges only drive synthetic scene
/// generation; no estimator reads them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_antennas: usize,
    pub carrier_freq: f64,
    pub wavelength: f64,
    pub element_spacing: f64,
    pub n_paths: usize,
    pub ff_ratio: f64,
    pub rician_kappa: f64,
    /// `[r_min, r_max]` in meters.
    pub distance_range: (f64, f64),
    /// `[θ_min, θ_max]` in sine units.
    pub angle_range: (f64, f64),
}

impl SystemConfig {
    /// Half-wavelength array at `carrier_freq` with 10 paths, half of them
    /// far-field, no line of sight, distances in `[10, 500]` m and angles
    /// over the full sine domain.
    pub fn new(n_antennas: usize, carrier_freq: f64) -> Self {
        let wavelength = SPEED_OF_LIGHT / carrier_freq;
        SystemConfig {
            n_antennas,
            carrier_freq,
            wavelength,
            element_spacing: wavelength / 2.0,
            n_paths: 10,
            ff_ratio: 0.5,
            rician_kappa: 0.0,
            distance_range: (10.0, 500.0),
            angle_range: (-1.0, 1.0),
        }
    }

    /// Full-scale setup: 256 antennas at 30 GHz.
    pub fn reference() -> Self {
        SystemConfig::new(256, 30.0e9)
    }

    /// Desk-scale setup used for quick sweeps: 64 antennas, 6 paths.
    pub fn desk() -> Self {
        SystemConfig {
            n_paths: 6,
            ..SystemConfig::new(64, 30.0e9)
        }
    }

    /// `2π/λ`, equal to `2πf/c`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Centered position `(n - (N-1)/2)·d` of the 0-based element `n`.
    pub fn element_offset(&self, n: usize) -> f64 {
        (n as f64 - (self.n_antennas as f64 - 1.0) / 2.0) * self.element_spacing
    }

    /// Upper inverse-distance bound `1/r_min`.
    pub fn rho_max(&self) -> f64 {
        1.0 / self.distance_range.0
    }

    /// Number of far-field paths, `round(γ·L)`.
    pub fn far_path_count(&self) -> usize {
        (self.ff_ratio * self.n_paths as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_antennas < 2 {
            return bad(format!("n_antennas must be >= 2, got {}", self.n_antennas));
        }
        if !(self.carrier_freq > 0.0 && self.carrier_freq.is_finite()) {
            return bad(format!("carrier frequency must be positive, got {}", self.carrier_freq));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return bad(format!("wavelength must be positive, got {}", self.wavelength));
        }
        if !(self.element_spacing > 0.0 && self.element_spacing.is_finite()) {
            return bad(format!("element spacing must be positive, got {}", self.element_spacing));
        }
        if self.n_paths < 1 {
            return bad("n_paths must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.ff_ratio) {
            return bad(format!("ff_ratio must lie in [0, 1], got {}", self.ff_ratio));
        }
        if !(self.rician_kappa >= 0.0 && self.rician_kappa.is_finite()) {
            return bad(format!("rician_kappa must be finite and >= 0, got {}", self.rician_kappa));
        }
        let (r_min, r_max) = self.distance_range;
        if !(r_min > 0.0 && r_max >= r_min && r_max.is_finite()) {
            return bad(format!("distance range [{r_min}, {r_max}] must satisfy 0 < r_min <= r_max"));
        }
        let (t_min, t_max) = self.angle_range;
        if !(-1.0 <= t_min && t_min <= t_max && t_max <= 1.0) {
            return bad(format!("angle range [{t_min}, {t_max}] must lie inside [-1, 1]"));
        }
        Ok(())
    }
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig::reference()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathKind {
    FarField,
    NearField,
    LineOfSight,
}

/// One propagation path.
///
/// `gain` is the path's small-scale coefficient before the Rician weights
/// and the `1/√L` normalization are applied; [`synthesize_channel`] applies
/// both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathComponent {
    pub kind: PathKind,
    pub gain: C64,
    pub angle: f64,
    pub distance: Option<f64>,
}

impl PathComponent {
    pub fn far(gain: C64, angle: f64) -> Self {
        PathComponent {
            kind: PathKind::FarField,
            gain,
            angle,
            distance: None,
        }
    }

    pub fn near(gain: C64, angle: f64, distance: f64) -> Self {
        PathComponent {
            kind: PathKind::NearField,
            gain,
            angle,
            distance: Some(distance),
        }
    }

    pub fn line_of_sight(gain: C64, angle: f64, distance: Option<f64>) -> Self {
        PathComponent {
            kind: PathKind::LineOfSight,
            gain,
            angle,
            distance,
        }
    }

    fn validate(&self) -> Result<()> {
        check_angle(self.angle)?;
        match (self.kind, self.distance) {
            (PathKind::NearField, None) => Err(Error::InvalidConfig(
                "near-field path without a distance".into(),
            )),
            (_, Some(r)) if !(r > 0.0) => Err(Error::InvalidDistance(r)),
            _ => Ok(()),
        }
    }

    /// Steering vector of this path under `config`.
    pub fn steering(&self, config: &SystemConfig) -> Result<CVector> {
        match (self.kind, self.distance) {
            (PathKind::FarField, _) => far_steering(self.angle, config.n_antennas),
            (PathKind::NearField, Some(r)) => near_steering_exact(self.angle, r, config),
            (PathKind::LineOfSight, Some(r)) if r < rayleigh_distance(config) => {
                near_steering_exact(self.angle, r, config)
            }
            (PathKind::LineOfSight, _) => far_steering(self.angle, config.n_antennas),
            (PathKind::NearField, None) => Err(Error::InvalidConfig(
                "near-field path without a distance".into(),
            )),
        }
    }
}

/// Ground-truth scene: paths plus the channel they synthesize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub paths: Vec<PathComponent>,
    pub channel: CVector,
    pub config: SystemConfig,
}

impl Scene {
    /// Re-runs [`synthesize_channel`] on the stored paths.
    pub fn resynthesize(&self) -> Result<CVector> {
        synthesize_channel(&self.paths, &self.config)
    }

    pub fn count(&self, kind: PathKind) -> usize {
        self.paths.iter().filter(|p| p.kind == kind).count()
    }
}

fn check_angle(angle: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&angle) {
        Ok(())
    } else {
        Err(Error::InvalidAngle(angle))
    }
}

/// Planar-wave steering vector, element `n` (0-based) `exp(-jπ n θ)`.
/// Unnormalized: the norm is `√N`.
pub fn far_steering(angle: f64, n_antennas: usize) -> Result<CVector> {
    check_angle(angle)?;
    Ok(CVector::from_fn(n_antennas, |n, _| {
        C64::from_polar(1.0, -PI * n as f64 * angle)
    }))
}

/// Spherical-wave steering vector for a source at sine-angle `angle` and
/// range `distance` from the array center.
pub fn near_steering_exact(angle: f64, distance: f64, config: &SystemConfig) -> Result<CVector> {
    check_angle(angle)?;
    if !(distance > 0.0) {
        return Err(Error::InvalidDistance(distance));
    }
    let k = config.wavenumber();
    let r = distance;
    Ok(CVector::from_fn(config.n_antennas, |n, _| {
        let delta = config.element_offset(n);
        // r_n - r rewritten to avoid cancellation when r >> δ.
        let sq = r * r - 2.0 * r * delta * angle + delta * delta;
        let excess = (delta * delta - 2.0 * r * delta * angle) / (sq.sqrt() + r);
        C64::from_polar(1.0, -k * excess)
    }))
}

/// Second-order near-field steering vector in `(θ, ρ = 1/r)`:
/// element phase `-k·r_m`, `r_m = -m d θ + (m d)²/2 · (1 - θ²) · ρ`.
/// `ρ = 0` is the far-field limit.
pub fn near_steering_fresnel(angle: f64, inv_distance: f64, config: &SystemConfig) -> Result<CVector> {
    check_angle(angle)?;
    if !(inv_distance >= 0.0) {
        return Err(Error::InvalidInverseDistance(inv_distance));
    }
    let k = config.wavenumber();
    let curvature = 0.5 * (1.0 - angle * angle) * inv_distance;
    Ok(CVector::from_fn(config.n_antennas, |n, _| {
        let md = config.element_offset(n);
        let path = -md * angle + md * md * curvature;
        C64::from_polar(1.0, -k * path)
    }))
}

/// Far-field angle reproduced (up to a global phase) by a Fresnel atom at
/// `angle` in the `ρ → 0` limit, for half-wavelength spacing.
pub fn fresnel_far_limit_angle(angle: f64) -> f64 {
    -angle
}

/// `2R²/λ` with aperture `R = (N-1)·d`.
pub fn rayleigh_distance(config: &SystemConfig) -> f64 {
    let aperture = config.n_antennas.saturating_sub(1) as f64 * config.element_spacing;
    2.0 * aperture * aperture / config.wavelength
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn complex_normal(rng: &mut ChaCha8Rng, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

/// Draws a random hybrid-field scene.
///
/// `round(γL)` far-field paths are followed by `L - round(γL)` near-field
/// paths whose distances are uniform on `[r_min, min(r_max, D_Rayleigh))`.
/// Path coefficients are `CN(0, 1)`; the Rician weights applied at synthesis
/// make the effective scattered gains `CN(0, 1/(κ+1))`. With `κ > 0` a
/// unit-coefficient line-of-sight path is appended, whose effective
/// amplitude becomes `√(κ/(κ+1))`.
pub fn sample_scene(config: &SystemConfig, seed: u64) -> Result<Scene> {
    config.validate()?;
    let n_far = config.far_path_count();
    let n_near = config.n_paths - n_far;
    let (r_min, r_max) = config.distance_range;
    let nf_upper = r_max.min(rayleigh_distance(config));
    if n_near > 0 && nf_upper <= r_min {
        return Err(Error::EmptyDistanceInterval {
            r_min,
            upper: nf_upper,
        });
    }
    let (t_min, t_max) = config.angle_range;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut paths = Vec::with_capacity(config.n_paths + 1);
    for _ in 0..n_far {
        let angle = uniform(&mut rng, t_min, t_max);
        let gain = complex_normal(&mut rng, 1.0);
        paths.push(PathComponent::far(gain, angle));
    }
    for _ in 0..n_near {
        let angle = uniform(&mut rng, t_min, t_max);
        let distance = uniform(&mut rng, r_min, nf_upper);
        let gain = complex_normal(&mut rng, 1.0);
        paths.push(PathComponent::near(gain, angle, distance));
    }
    if config.rician_kappa > 0.0 {
        let angle = uniform(&mut rng, t_min, t_max);
        let distance = uniform(&mut rng, r_min, r_max);
        paths.push(PathComponent::line_of_sight(C64::new(1.0, 0.0), angle, Some(distance)));
    }
    let channel = synthesize_channel(&paths, config)?;
    Ok(Scene {
        paths,
        channel,
        config: *config,
    })
}

/// Rician superposition
/// `h = √(κ/(κ+1))·Σ_LoS α a + √(1/(κ+1))·√(1/L)·Σ_NLoS α a`,
/// where `L` counts the far- and near-field paths in `paths`.
pub fn synthesize_channel(paths: &[PathComponent], config: &SystemConfig) -> Result<CVector> {
    if paths.is_empty() {
        return Err(Error::EmptyInput("path list"));
    }
    let kappa = config.rician_kappa;
    let los_weight = (kappa / (kappa + 1.0)).sqrt();
    let scattered = paths
        .iter()
        .filter(|p| p.kind != PathKind::LineOfSight)
        .count();
    let nlos_weight = if scattered > 0 {
        (1.0 / (kappa + 1.0)).sqrt() * (1.0 / scattered as f64).sqrt()
    } else {
        0.0
    };
    let mut h = CVector::zeros(config.n_antennas);
    for path in paths {
        path.validate()?;
        let weight = match path.kind {
            PathKind::LineOfSight => los_weight,
            _ => nlos_weight,
        };
        let a = path.steering(config)?;
        h.axpy(path.gain * weight, &a, C64::new(1.0, 0.0));
    }
    Ok(h)
}
