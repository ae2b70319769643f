//! Hybrid angular/polar measurement dictionary.
//!
//! Columns `[0, Q_F)` are planar atoms on a cell-centered sine grid; columns
//! `[Q_F, Q_F + Q_N)` are Fresnel atoms on an angle × inverse-distance grid,
//! ordered angle-major. Every column is scaled to unit norm and carries the
//! grid parameters it was built from.

use serde::{Deserialize, Serialize};

use crate::channel::{far_steering, near_steering_fresnel, SystemConfig};
use crate::{CMatrix, CVector, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    Angular,
    Polar,
}

/// Grid parameters behind one dictionary column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomMeta {
    pub domain: Domain,
    pub angle: f64,
    /// `1/r`; zero for angular atoms.
    pub inv_distance: f64,
}

impl AtomMeta {
    /// Rebuilds the unit-norm column these parameters describe.
    pub fn column(&self, config: &SystemConfig) -> Result<CVector> {
        atom_column(self.domain, self.angle, self.inv_distance, config)
    }
}

/// Unit-norm atom for the given parameters: the planar or Fresnel steering
/// vector divided by `√N`.
pub fn atom_column(domain: Domain, angle: f64, inv_distance: f64, config: &SystemConfig) -> Result<CVector> {
    let steering = match domain {
        Domain::Angular => far_steering(angle, config.n_antennas)?,
        Domain::Polar => near_steering_fresnel(angle, inv_distance, config)?,
    };
    Ok(normalize(steering))
}

fn normalize(mut v: CVector) -> CVector {
    let scale = 1.0 / (v.len() as f64).sqrt();
    v.iter_mut().for_each(|x| *x *= scale);
    v
}

/// `q`-th of `count` cell-centered points on `[-1, 1]`.
pub fn grid_angle(q: usize, count: usize) -> f64 {
    -1.0 + (2 * q + 1) as f64 / count as f64
}

/// `s`-th (0-based) of `n_rings` cell-centered points on `[0, rho_max]`.
pub fn ring_inv_distance(s: usize, n_rings: usize, rho_max: f64) -> f64 {
    (s as f64 + 0.5) * rho_max / n_rings as f64
}

fn assemble(n_rows: usize, meta: Vec<AtomMeta>, config: &SystemConfig) -> Result<(CMatrix, Vec<AtomMeta>)> {
    let mut columns = CMatrix::zeros(n_rows, meta.len());
    for (j, m) in meta.iter().enumerate() {
        columns.set_column(j, &m.column(config)?);
    }
    Ok((columns, meta))
}

/// Planar atoms at `q_far` uniformly spaced sine angles. With `q_far = N`
/// the block is a column-permuted, phase-shifted DFT matrix.
pub fn build_angular_dictionary(q_far: usize, config: &SystemConfig) -> Result<(CMatrix, Vec<AtomMeta>)> {
    config.validate()?;
    if q_far == 0 {
        return Err(Error::InvalidConfig("q_far must be >= 1".into()));
    }
    let meta = (0..q_far)
        .map(|q| AtomMeta {
            domain: Domain::Angular,
            angle: grid_angle(q, q_far),
            inv_distance: 0.0,
        })
        .collect();
    assemble(config.n_antennas, meta, config)
}

/// Fresnel atoms on `q_angle` sine angles × `n_rings` inverse distances,
/// the rings uniform in `ρ` over `(0, 1/r_min]`.
pub fn build_polar_dictionary(
    q_angle: usize,
    n_rings: usize,
    config: &SystemConfig,
) -> Result<(CMatrix, Vec<AtomMeta>)> {
    config.validate()?;
    if q_angle == 0 || n_rings == 0 {
        return Err(Error::InvalidConfig("q_angle and n_rings must be >= 1".into()));
    }
    let rho_max = config.rho_max();
    let mut meta = Vec::with_capacity(q_angle * n_rings);
    for q in 0..q_angle {
        let angle = grid_angle(q, q_angle);
        for s in 0..n_rings {
            meta.push(AtomMeta {
                domain: Domain::Polar,
                angle,
                inv_distance: ring_inv_distance(s, n_rings, rho_max),
            });
        }
    }
    assemble(config.n_antennas, meta, config)
}

/// `A = [U, V]` with per-column metadata.
#[derive(Debug, Clone)]
pub struct HybridDictionary {
    pub columns: CMatrix,
    pub meta: Vec<AtomMeta>,
    pub q_far: usize,
    pub q_near: usize,
}

impl HybridDictionary {
    /// Concatenates an angular block with an optional polar block.
    pub fn from_blocks(
        angular: (CMatrix, Vec<AtomMeta>),
        polar: Option<(CMatrix, Vec<AtomMeta>)>,
    ) -> Result<Self> {
        let (u, mut meta) = angular;
        if u.ncols() != meta.len() {
            return Err(Error::DimensionMismatch {
                expected: u.ncols(),
                got: meta.len(),
            });
        }
        let q_far = u.ncols();
        let Some((v, near_meta)) = polar else {
            return Ok(HybridDictionary {
                columns: u,
                meta,
                q_far,
                q_near: 0,
            });
        };
        if v.nrows() != u.nrows() {
            return Err(Error::DimensionMismatch {
                expected: u.nrows(),
                got: v.nrows(),
            });
        }
        if v.ncols() != near_meta.len() {
            return Err(Error::DimensionMismatch {
                expected: v.ncols(),
                got: near_meta.len(),
            });
        }
        let q_near = v.ncols();
        let mut columns = CMatrix::zeros(u.nrows(), q_far + q_near);
        columns.columns_mut(0, q_far).copy_from(&u);
        columns.columns_mut(q_far, q_near).copy_from(&v);
        meta.extend(near_meta);
        Ok(HybridDictionary {
            columns,
            meta,
            q_far,
            q_near,
        })
    }

    /// `Q_F` angular atoms followed by `q_angle · n_rings` polar atoms.
    /// Either polar size may be zero, which yields an angular-only dictionary.
    pub fn build(config: &SystemConfig, q_far: usize, q_angle: usize, n_rings: usize) -> Result<Self> {
        let angular = build_angular_dictionary(q_far, config)?;
        let polar = if q_angle == 0 || n_rings == 0 {
            None
        } else {
            Some(build_polar_dictionary(q_angle, n_rings, config)?)
        };
        Self::from_blocks(angular, polar)
    }

    pub fn angular_only(config: &SystemConfig, q_far: usize) -> Result<Self> {
        Self::from_blocks(build_angular_dictionary(q_far, config)?, None)
    }

    pub fn len(&self) -> usize {
        self.meta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.meta.is_empty()
    }

    pub fn n_rows(&self) -> usize {
        self.columns.nrows()
    }

    pub fn atom_meta(&self, index: usize) -> Result<AtomMeta> {
        self.meta.get(index).copied().ok_or(Error::IndexOutOfRange {
            index,
            len: self.meta.len(),
        })
    }

    pub fn column(&self, index: usize) -> CVector {
        self.columns.column(index).into_owned()
    }

    /// Column range of the angular block.
    pub fn angular_range(&self) -> std::ops::Range<usize> {
        0..self.q_far
    }

    /// Column range of the polar block.
    pub fn polar_range(&self) -> std::ops::Range<usize> {
        self.q_far..self.q_far + self.q_near
    }

    /// Largest `|⟨a_i, a_j⟩|` over distinct columns.
    pub fn mutual_coherence(&self) -> f64 {
        let gram = self.columns.ad_mul(&self.columns);
        let mut worst: f64 = 0.0;
        for i in 0..gram.nrows() {
            for j in (i + 1)..gram.ncols() {
                worst = worst.max(gram[(i, j)].norm());
            }
        }
        worst
    }
}

pub fn build_hybrid_dictionary(
    config: &SystemConfig,
    q_far: usize,
    q_angle: usize,
    n_rings: usize,
) -> Result<HybridDictionary> {
    HybridDictionary::build(config, q_far, q_angle, n_rings)
}

pub fn atom_meta(dict: &HybridDictionary, index: usize) -> Result<AtomMeta> {
    dict.atom_meta(index)
}
