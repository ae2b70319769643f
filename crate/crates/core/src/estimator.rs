//! ε-thresholded pursuit with single-column gridless refinement
//! (ε-OMP-SSIGW).
//!
//! Each outer iteration picks the dictionary atom most correlated with the
//! residual, takes its scalar least-squares gain `âᴴr`, then nudges the
//! atom's angle (and, for polar atoms, inverse distance) along the scalar
//! gradient of the projection cost with a halving step search. The refined
//! contribution is subtracted and the loop stops once the residual power per
//! antenna drops to `ε`. Neither the number of paths nor the far/near split
//! enters the algorithm; the iteration count is the sparsity estimate.

use serde::{Deserialize, Serialize};

use crate::channel::SystemConfig;
use crate::dictionary::{atom_column, Domain, HybridDictionary};
use crate::observation::Observation;
use crate::{CVector, Error, Result, C64};

/// Algorithm inputs other than the observation and dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorParams {
    /// Residual-MSE stopping threshold, normally the noise variance.
    pub epsilon: f64,
    /// Outer-loop bound `I_max`; the loop runs while `i <= I_max`.
    pub max_outer_iters: usize,
    /// Refinement rounds per selected atom.
    pub n_refine_iters: usize,
    pub step_theta: f64,
    pub step_rho: f64,
    /// Step size below which the halving search gives up.
    pub step_floor: f64,
    /// Gain-change threshold that ends refinement early.
    pub gain_tol: f64,
}

impl EstimatorParams {
    /// Reference settings with `ε` set to the given noise variance.
    pub fn with_epsilon(epsilon: f64) -> Self {
        EstimatorParams {
            epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be finite and >= 0");
        }
        if self.n_refine_iters > 0 {
            if !(self.step_theta > 0.0 && self.step_rho > 0.0 && self.step_floor > 0.0) {
                return bad("step sizes must be positive");
            }
            if !(self.step_floor < self.step_theta && self.step_floor < self.step_rho) {
                return bad("step floor must be below both initial step sizes");
            }
            if !(self.gain_tol > 0.0) {
                return bad("gain tolerance must be positive");
            }
        }
        Ok(())
    }
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            epsilon: 0.0,
            max_outer_iters: 20,
            n_refine_iters: 5,
            step_theta: 5e-4,
            step_rho: 5e-4,
            step_floor: 1e-5,
            gain_tol: 1e-1,
        }
    }
}

/// An atom in the active set together with its current gain.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedAtom {
    pub source_index: usize,
    pub domain: Domain,
    pub angle: f64,
    /// Zero for angular atoms.
    pub inv_distance: f64,
    pub gain: C64,
    /// Unit-norm column for `(domain, angle, inv_distance)`.
    pub column: CVector,
}

impl SelectedAtom {
    /// Grid atom `index` of `dict` with zero gain.
    pub fn from_dictionary(dict: &HybridDictionary, index: usize) -> Result<Self> {
        let meta = dict.atom_meta(index)?;
        Ok(SelectedAtom {
            source_index: index,
            domain: meta.domain,
            angle: meta.angle,
            inv_distance: meta.inv_distance,
            gain: C64::new(0.0, 0.0),
            column: dict.column(index),
        })
    }
}

/// Work counters accumulated during one estimation run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    /// Full dictionary correlations `Aᴴr`.
    pub correlations: usize,
    /// Refinement rounds actually executed.
    pub refine_rounds: usize,
    /// Gradient evaluations.
    pub gradients: usize,
    /// Trial atoms built by the step search.
    pub trial_steps: usize,
    /// Trial steps that reduced the residual.
    pub accepted_steps: usize,
}

impl OpCounters {
    fn add(&mut self, other: &OpCounters) {
        self.correlations += other.correlations;
        self.refine_rounds += other.refine_rounds;
        self.gradients += other.gradients;
        self.trial_steps += other.trial_steps;
        self.accepted_steps += other.accepted_steps;
    }

    /// Mean trial steps per parameter search, the `B` of the cost model.
    pub fn mean_backtracks(&self) -> f64 {
        if self.gradients == 0 {
            0.0
        } else {
            self.trial_steps as f64 / self.gradients as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct EstimateResult {
    pub h_hat: CVector,
    pub atoms: Vec<SelectedAtom>,
    /// Outer iterations performed, i.e. the estimated path count.
    pub iterations: usize,
    /// Residual MSE before the first iteration.
    pub initial_mse: f64,
    /// Residual MSE after each outer iteration.
    pub residual_mse_history: Vec<f64>,
    pub op_counters: OpCounters,
}

impl EstimateResult {
    pub fn final_mse(&self) -> f64 {
        self.residual_mse_history.last().copied().unwrap_or(self.initial_mse)
    }
}

/// Refinable atom parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    Theta,
    Rho,
}

/// `‖r‖²/N`.
pub fn residual_mse(residual: &CVector) -> f64 {
    if residual.is_empty() {
        return 0.0;
    }
    residual.norm_squared() / residual.len() as f64
}

fn argmax_correlation(dict: &HybridDictionary, residual: &CVector, skip: impl Fn(usize) -> bool, range: std::ops::Range<usize>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for j in range {
        if skip(j) {
            continue;
        }
        let corr = dict.columns.column(j).dotc(residual).norm_sqr();
        // strict comparison keeps the lowest index on ties
        if best.is_none_or(|(_, b)| corr > b) {
            best = Some((j, corr));
        }
    }
    best.map(|(j, _)| j)
}

/// Index of the column maximizing `|[Aᴴr]_j|²`, lowest index on ties.
pub fn select_atom(dict: &HybridDictionary, residual: &CVector) -> Result<usize> {
    select_atom_in(dict, residual, 0..dict.len(), |_| false)
}

/// [`select_atom`] restricted to a column range, skipping columns for which
/// `skip` returns true.
pub fn select_atom_in(
    dict: &HybridDictionary,
    residual: &CVector,
    range: std::ops::Range<usize>,
    skip: impl Fn(usize) -> bool,
) -> Result<usize> {
    if residual.len() != dict.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: dict.n_rows(),
            got: residual.len(),
        });
    }
    if residual.iter().all(|x| *x == C64::new(0.0, 0.0)) {
        return Err(Error::ZeroResidual);
    }
    argmax_correlation(dict, residual, skip, range).ok_or(Error::EmptyInput("candidate atoms"))
}

fn check_unit(atom: &CVector) -> Result<()> {
    let norm = atom.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitAtom(norm));
    }
    Ok(())
}

/// Scalar least-squares gain `âᴴr` of a unit-norm atom.
pub fn compute_gain(atom: &CVector, residual: &CVector) -> Result<C64> {
    check_unit(atom)?;
    Ok(atom.dotc(residual))
}

/// `(‖r‖² - |âᴴr|², |âᴴr|²)`: the projection cost and the captured energy.
pub fn cost_and_projected_energy(atom: &CVector, residual: &CVector) -> (f64, f64) {
    let energy = atom.dotc(residual).norm_sqr();
    (residual.norm_squared() - energy, energy)
}

/// Derivative of the unit-norm atom with respect to one parameter.
///
/// Angular atoms follow the planar phase `-π n θ` (0-based `n`); polar atoms
/// follow the Fresnel phase `-k(-m d θ + (m d)²(1-θ²)ρ/2)` over centered
/// indices `m`.
pub fn atom_derivative(
    domain: Domain,
    angle: f64,
    inv_distance: f64,
    which: Param,
    config: &SystemConfig,
) -> Result<CVector> {
    let atom = atom_column(domain, angle, inv_distance, config)?;
    derivative_of(&atom, domain, angle, inv_distance, which, config)
}

fn derivative_of(
    atom: &CVector,
    domain: Domain,
    angle: f64,
    inv_distance: f64,
    which: Param,
    config: &SystemConfig,
) -> Result<CVector> {
    let k = config.wavenumber();
    let factor = |n: usize| -> f64 {
        match (domain, which) {
            (Domain::Angular, _) => -std::f64::consts::PI * n as f64,
            (Domain::Polar, Param::Theta) => {
                let md = config.element_offset(n);
                -k * (-md - md * md * angle * inv_distance)
            }
            (Domain::Polar, Param::Rho) => {
                let md = config.element_offset(n);
                -0.5 * k * md * md * (1.0 - angle * angle)
            }
        }
    };
    if domain == Domain::Angular && which == Param::Rho {
        return Err(Error::RhoOnAngularAtom);
    }
    Ok(CVector::from_fn(atom.len(), |n, _| {
        atom[n] * C64::new(0.0, factor(n))
    }))
}

/// `∂L/∂u = -2 Re{z* w}` with `z = aᴴr`, `w = (∂_u a)ᴴr`.
pub fn scalar_gradient(atom: &CVector, d_atom: &CVector, residual: &CVector) -> f64 {
    let z = atom.dotc(residual);
    let w = d_atom.dotc(residual);
    -2.0 * (z.conj() * w).re
}

fn subtract_scaled(residual: &CVector, atom: &CVector, gain: C64) -> CVector {
    let mut out = residual.clone();
    out.axpy(-gain, atom, C64::new(1.0, 0.0));
    out
}

/// Searches one parameter. Returns true if a trial step was accepted.
#[allow(clippy::too_many_arguments)]
fn line_search(
    atom: &mut SelectedAtom,
    which: Param,
    residual: &CVector,
    actual_energy: &mut f64,
    params: &EstimatorParams,
    config: &SystemConfig,
    rho_max: f64,
    counters: &mut OpCounters,
) -> Result<bool> {
    let d_atom = derivative_of(&atom.column, atom.domain, atom.angle, atom.inv_distance, which, config)?;
    let grad = scalar_gradient(&atom.column, &d_atom, residual);
    counters.gradients += 1;
    let mut step = match which {
        Param::Theta => params.step_theta,
        Param::Rho => params.step_rho,
    };
    while step > params.step_floor {
        let (angle, inv_distance) = match which {
            Param::Theta => ((atom.angle - step * grad).clamp(-1.0, 1.0), atom.inv_distance),
            Param::Rho => (atom.angle, (atom.inv_distance - step * grad).clamp(0.0, rho_max)),
        };
        let trial = atom_column(atom.domain, angle, inv_distance, config)?;
        let gain = trial.dotc(residual);
        counters.trial_steps += 1;
        let trial_residual = subtract_scaled(residual, &trial, gain);
        let energy = trial_residual.norm_squared();
        if energy < *actual_energy {
            atom.angle = angle;
            atom.inv_distance = inv_distance;
            atom.column = trial;
            atom.gain = gain;
            *actual_energy = energy;
            counters.accepted_steps += 1;
            return Ok(true);
        }
        step /= 2.0;
    }
    Ok(false)
}

fn refine_counted(
    atom: &SelectedAtom,
    residual: &CVector,
    params: &EstimatorParams,
    config: &SystemConfig,
    counters: &mut OpCounters,
) -> Result<SelectedAtom> {
    let mut refined = atom.clone();
    let mut actual_energy = subtract_scaled(residual, &refined.column, refined.gain).norm_squared();
    let rho_max = config.rho_max();
    let mut gain_prev = C64::new(0.0, 0.0);
    for _ in 0..params.n_refine_iters {
        counters.refine_rounds += 1;
        line_search(&mut refined, Param::Theta, residual, &mut actual_energy, params, config, rho_max, counters)?;
        if refined.domain == Domain::Polar {
            line_search(&mut refined, Param::Rho, residual, &mut actual_energy, params, config, rho_max, counters)?;
        }
        if (refined.gain - gain_prev).norm() < params.gain_tol {
            break;
        }
        gain_prev = refined.gain;
    }
    Ok(refined)
}

/// Refines one atom's parameters against `residual`, the signal with every
/// previously accepted atom removed.
///
/// `atom.gain` must already hold the atom's gain against `residual`. A
/// trial step is accepted only if it lowers `‖r - a·(aᴴr)‖²`; rejected
/// steps are halved until they fall to `step_floor`. Angles stay in
/// `[-1, 1]` and inverse distances in `[0, 1/r_min]`.
pub fn refine_atom(
    atom: &SelectedAtom,
    residual: &CVector,
    params: &EstimatorParams,
    config: &SystemConfig,
) -> Result<SelectedAtom> {
    refine_counted(atom, residual, params, config, &mut OpCounters::default())
}

/// Runs the full estimator on one observation.
///
/// The observation is divided by `√τ` first so the output estimates `h`.
/// Reaching the iteration bound without meeting `ε` is not an error; the
/// result's iteration count and history report it.
pub fn estimate(
    obs: &Observation,
    dict: &HybridDictionary,
    params: &EstimatorParams,
    config: &SystemConfig,
) -> Result<EstimateResult> {
    params.validate()?;
    if obs.y.len() != dict.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: dict.n_rows(),
            got: obs.y.len(),
        });
    }
    if config.n_antennas != dict.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: dict.n_rows(),
            got: config.n_antennas,
        });
    }
    let mut residual = obs.descaled();
    let initial_mse = residual_mse(&residual);
    let mut mse = initial_mse;
    let mut atoms: Vec<SelectedAtom> = Vec::new();
    let mut history = Vec::new();
    let mut counters = OpCounters::default();
    let mut i = 0usize;
    while mse > params.epsilon && i <= params.max_outer_iters {
        let index = match select_atom(dict, &residual) {
            Ok(j) => j,
            Err(Error::ZeroResidual) => break,
            Err(e) => return Err(e),
        };
        i += 1;
        counters.correlations += 1;
        let mut atom = SelectedAtom::from_dictionary(dict, index)?;
        atom.gain = compute_gain(&atom.column, &residual)?;
        let mut local = OpCounters::default();
        let atom = refine_counted(&atom, &residual, params, config, &mut local)?;
        counters.add(&local);
        residual.axpy(-atom.gain, &atom.column, C64::new(1.0, 0.0));
        mse = residual_mse(&residual);
        history.push(mse);
        atoms.push(atom);
    }
    let mut h_hat = CVector::zeros(dict.n_rows());
    for atom in &atoms {
        h_hat.axpy(atom.gain, &atom.column, C64::new(1.0, 0.0));
    }
    Ok(EstimateResult {
        h_hat,
        atoms,
        iterations: i,
        initial_mse,
        residual_mse_history: history,
        op_counters: counters,
    })
}
