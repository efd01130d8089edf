//! Local subspace of the context window and the geometric cost.
//!
//! The window embeddings are centered and their covariance `(1/k) XᵀX` is
//! eigendecomposed. The leading `r` eigenvectors span the tangent subspace;
//! the full spectrum defines a regularized precision matrix
//! `M = Q diag(1/(λ + ε)) Qᵀ`.
//!
//! Two residuals are available: the Euclidean norm of the deviation left
//! after projecting onto the subspace, and the Mahalanobis norm
//! `sqrt((v - μ)ᵀ M (v - μ))` of the whole deviation.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::config::{CostCoefficients, GeometryConfig, ResidualMode};
use crate::error::{Error, Result};

/// Absolute floor for the precision regularizer.
pub const EPSILON_FLOOR: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SubspaceModel {
    mu: DVector<f64>,
    basis: DMatrix<f64>,
    eigvals: Vec<f64>,
    full_eigvecs: DMatrix<f64>,
    full_eigvals: Vec<f64>,
    precision: DMatrix<f64>,
    epsilon: f64,
}

pub fn fit_subspace(rows: &[Vec<f64>], cfg: &GeometryConfig) -> Result<SubspaceModel> {
    let k = rows.len();
    if k < 2 {
        return Err(Error::DegenerateContext { rows: k });
    }
    let d = rows[0].len();
    if d == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    for row in rows {
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: row.len(),
            });
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "window embedding",
            });
        }
    }

    let x = DMatrix::from_fn(k, d, |i, j| rows[i][j]);
    let mu = DVector::from_fn(d, |j, _| x.column(j).sum() / k as f64);
    let mut centered = x;
    for mut row in centered.row_iter_mut() {
        row -= mu.transpose();
    }
    let mut cov = centered.transpose() * &centered / k as f64;
    // symmetrize away rounding so the eigensolver sees an exactly symmetric input
    cov = (&cov + cov.transpose()) * 0.5;

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let full_eigvals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let full_eigvecs = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);

    let total: f64 = full_eigvals.iter().sum();
    let mut rank = if total > 0.0 {
        let target = cfg.energy_fraction * total;
        let mut acc = 0.0;
        let mut r = d;
        for (i, l) in full_eigvals.iter().enumerate() {
            acc += l;
            if acc >= target * (1.0 - 1e-12) {
                r = i + 1;
                break;
            }
        }
        r
    } else {
        1
    };
    let cap = (k - 1).min(d).min(cfg.max_rank).max(1);
    rank = rank.clamp(1, cap);

    let mean_eig = total / d as f64;
    let epsilon = (cfg.eig_epsilon_rel * mean_eig).max(EPSILON_FLOOR);
    let inv = DVector::from_iterator(d, full_eigvals.iter().map(|l| 1.0 / (l + epsilon)));
    let precision = &full_eigvecs * DMatrix::from_diagonal(&inv) * full_eigvecs.transpose();
    let precision = (&precision + precision.transpose()) * 0.5;

    Ok(SubspaceModel {
        basis: full_eigvecs.columns(0, rank).into_owned(),
        eigvals: full_eigvals[..rank].to_vec(),
        mu,
        full_eigvecs,
        full_eigvals,
        precision,
        epsilon,
    })
}

impl SubspaceModel {
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mu
    }

    /// `d × r`, orthonormal columns.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Leading `r` eigenvalues, nonincreasing.
    pub fn eigvals(&self) -> &[f64] {
        &self.eigvals
    }

    pub fn full_eigvecs(&self) -> &DMatrix<f64> {
        &self.full_eigvecs
    }

    pub fn full_eigvals(&self) -> &[f64] {
        &self.full_eigvals
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn deviation(&self, v: &[f64]) -> Result<DVector<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "step embedding",
            });
        }
        Ok(DVector::from_column_slice(v) - &self.mu)
    }

    /// `(I - U Uᵀ)(v - μ)`.
    pub fn residual_vector(&self, v: &[f64]) -> Result<DVector<f64>> {
        let dev = self.deviation(v)?;
        let coords = self.basis.transpose() * &dev;
        Ok(dev - &self.basis * coords)
    }

    pub fn residual_euclid(&self, v: &[f64]) -> Result<f64> {
        Ok(self.residual_vector(v)?.norm())
    }

    pub fn residual_mahalanobis(&self, v: &[f64]) -> Result<f64> {
        let dev = self.deviation(v)?;
        let q = dev.dot(&(&self.precision * &dev));
        Ok(q.max(0.0).sqrt())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeomCost {
    pub residual_euclid: f64,
    pub residual_mahalanobis: f64,
    pub mode: ResidualMode,
    pub cost: f64,
}

impl GeomCost {
    pub fn selected_residual(&self) -> f64 {
        match self.mode {
            ResidualMode::Euclid => self.residual_euclid,
            ResidualMode::Mahalanobis => self.residual_mahalanobis,
        }
    }
}

/// `alpha_curv * ln(1 + residual)`.
pub fn curv_cost(residual: f64, coeff: &CostCoefficients) -> f64 {
    coeff.alpha_curv * residual.ln_1p()
}

pub fn tau_curv(
    model: &SubspaceModel,
    v: &[f64],
    coeff: &CostCoefficients,
    mode: ResidualMode,
) -> Result<GeomCost> {
    let residual_euclid = model.residual_euclid(v)?;
    let residual_mahalanobis = model.residual_mahalanobis(v)?;
    let mut out = GeomCost {
        residual_euclid,
        residual_mahalanobis,
        mode,
        cost: 0.0,
    };
    out.cost = curv_cost(out.selected_residual(), coeff);
    Ok(out)
}
