//! Reference estimators: LS, LMMSE with an empirical covariance, and two
//! orthogonal matching pursuits that are told the true sparsity (and, for
//! the hybrid variant, the far/near split).

use std::ops::Range;

use nalgebra::SymmetricEigen;

use crate::channel::Scene;
use crate::dictionary::HybridDictionary;
use crate::estimator::{residual_mse, select_atom_in, EstimateResult, OpCounters, SelectedAtom};
use crate::observation::Observation;
use crate::{CMatrix, CVector, Error, Result, C64};

/// `y/√τ`.
pub fn ls_estimate(obs: &Observation) -> CVector {
    obs.descaled()
}

/// Channel covariance `R_h` with a cached eigendecomposition.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    pub matrix: CMatrix,
    pub n_train: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl CovarianceModel {
    pub fn new(matrix: CMatrix, n_train: usize) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let hermitian = (&matrix + matrix.adjoint()).map(|x| x * 0.5);
        let eig = SymmetricEigen::new(hermitian.clone());
        Ok(CovarianceModel {
            matrix: hermitian,
            n_train,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
}

/// `(1/K) Σ h_k h_kᴴ` over the channels of the given scenes.
pub fn empirical_covariance(scenes: &[Scene]) -> Result<CovarianceModel> {
    covariance_from_channels(scenes.iter().map(|s| &s.channel))
}

pub fn covariance_from_channels<'a>(channels: impl IntoIterator<Item = &'a CVector>) -> Result<CovarianceModel> {
    let mut iter = channels.into_iter().peekable();
    let n = iter.peek().ok_or(Error::EmptyInput("training channels"))?.len();
    let mut acc = CMatrix::zeros(n, n);
    let mut count = 0usize;
    for h in iter {
        if h.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: h.len(),
            });
        }
        acc.gerc(C64::new(1.0, 0.0), h, h, C64::new(1.0, 0.0));
        count += 1;
    }
    acc /= C64::new(count as f64, 0.0);
    CovarianceModel::new(acc, count)
}

/// Linear MMSE estimate `√τ R (τR + σ²I)⁻¹ y`, evaluated in the eigenbasis
/// of `R`.
pub fn mmse_estimate(obs: &Observation, cov: &CovarianceModel) -> Result<CVector> {
    let n = cov.matrix.nrows();
    if obs.y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: obs.y.len(),
        });
    }
    let tau = obs.pilot.pilot_length as f64;
    let sigma2 = obs.pilot.noise_variance;
    let lambda_max = cov.eigenvalues.iter().copied().fold(0.0, f64::max);
    let floor = 1e-12 * lambda_max.max(f64::MIN_POSITIVE);
    let mut coeffs = cov.eigenvectors.ad_mul(&obs.y);
    for (c, &lambda) in coeffs.iter_mut().zip(&cov.eigenvalues) {
        let lambda = lambda.max(0.0);
        let denom = tau * lambda + sigma2;
        if sigma2 == 0.0 && lambda <= floor {
            return Err(Error::Singular);
        }
        *c *= tau.sqrt() * lambda / denom;
    }
    Ok(&cov.eigenvectors * coeffs)
}

/// Dense least squares `argmin_g ‖y - C g‖` via Householder QR.
pub fn ls_solve(columns: &CMatrix, y: &CVector) -> Result<CVector> {
    let (n, k) = columns.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if k == 0 {
        return Ok(CVector::zeros(0));
    }
    if k > n {
        return Err(Error::RankDeficient);
    }
    let qr = columns.clone().qr();
    let r = qr.r();
    let scale = (0..k).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    if (0..k).any(|i| r[(i, i)].norm() <= 1e-10 * scale) || scale == 0.0 {
        return Err(Error::RankDeficient);
    }
    let qty = qr.q().ad_mul(y);
    r.solve_upper_triangular(&qty).ok_or(Error::RankDeficient)
}

/// OMP over a sequence of `(column range, rounds)` stages. Gains are refit
/// over the whole active set after each selection; already chosen columns
/// are skipped.
fn staged_omp(obs: &Observation, dict: &HybridDictionary, stages: &[(Range<usize>, usize)]) -> Result<EstimateResult> {
    let y = obs.descaled();
    if y.len() != dict.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: dict.n_rows(),
            got: y.len(),
        });
    }
    let initial_mse = residual_mse(&y);
    let mut residual = y.clone();
    let mut selected: Vec<usize> = Vec::new();
    let mut gains = CVector::zeros(0);
    let mut history = Vec::new();
    let mut counters = OpCounters::default();
    'stages: for (range, rounds) in stages {
        for _ in 0..*rounds {
            let index = match select_atom_in(dict, &residual, range.clone(), |j| selected.contains(&j)) {
                Ok(j) => j,
                Err(Error::ZeroResidual) => break 'stages,
                Err(Error::EmptyInput(_)) => break,
                Err(e) => return Err(e),
            };
            counters.correlations += 1;
            selected.push(index);
            let active = dict.columns.select_columns(&selected);
            gains = ls_solve(&active, &y)?;
            residual = &y - &active * &gains;
            history.push(residual_mse(&residual));
        }
    }
    let atoms = selected
        .iter()
        .zip(gains.iter())
        .map(|(&j, &g)| {
            let mut atom = SelectedAtom::from_dictionary(dict, j)?;
            atom.gain = g;
            Ok(atom)
        })
        .collect::<Result<Vec<_>>>()?;
    let h_hat = &y - &residual;
    Ok(EstimateResult {
        h_hat,
        iterations: atoms.len(),
        atoms,
        initial_mse,
        residual_mse_history: history,
        op_counters: counters,
    })
}

/// Far-field OMP: `n_paths` rounds over the angular block only.
pub fn ff_omp(obs: &Observation, dict: &HybridDictionary, n_paths: usize) -> Result<EstimateResult> {
    if n_paths == 0 {
        return Err(Error::InvalidConfig("n_paths must be >= 1".into()));
    }
    staged_omp(obs, dict, &[(dict.angular_range(), n_paths)])
}

/// Hybrid OMP with known split: `round(γL)` rounds over the angular block,
/// then the remaining rounds over the polar block.
pub fn hf_omp_gamma(obs: &Observation, dict: &HybridDictionary, n_paths: usize, gamma: f64) -> Result<EstimateResult> {
    if n_paths == 0 {
        return Err(Error::InvalidConfig("n_paths must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidConfig(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    let n_far = (gamma * n_paths as f64).round() as usize;
    staged_omp(
        obs,
        dict,
        &[(dict.angular_range(), n_far), (dict.polar_range(), n_paths - n_far)],
    )
}
