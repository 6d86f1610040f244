//! Full Hermitian forms on the product grid `(t_i, theta_l)`.
//!
//! A non-diagonal form gives a Fubini-Study potential that depends on the
//! angle, so fields are sampled on `n_theta` equispaced angles per node.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::form::{checked_cholesky, inverse_quadratic, lse, HermitianForm, SectionBasis};
use crate::error::{Error, Result};
use crate::measure::MeasureField;
use crate::model::ToricModel;

/// Largest tensor power accepted by the angular code paths.
pub const MAX_POLAR_K: u32 = 24;

/// Node values on the `(t, theta)` grid, index `i * n_theta + l`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarField {
    n_theta: usize,
    values: Vec<f64>,
}

impl PolarField {
    pub fn new(model: &ToricModel, n_theta: usize, values: Vec<f64>) -> Result<Self> {
        if n_theta == 0 {
            return Err(Error::InvalidModel("n_theta must be positive".into()));
        }
        if values.len() != model.len() * n_theta {
            return Err(Error::LengthMismatch {
                expected: model.len() * n_theta,
                got: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        Ok(Self { n_theta, values })
    }

    /// Angle-independent field.
    pub fn from_radial(values: &[f64], n_theta: usize) -> Self {
        Self {
            n_theta,
            values: values.iter().flat_map(|&v| std::iter::repeat(v).take(n_theta)).collect(),
        }
    }

    /// Radial measure spread uniformly over the angles.
    pub fn from_radial_measure(mu: &MeasureField, n_theta: usize) -> Self {
        let s = 1.0 / n_theta as f64;
        Self::from_radial(&mu.masses().iter().map(|m| m * s).collect::<Vec<_>>(), n_theta)
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize, l: usize) -> f64 {
        self.values[i * self.n_theta + l]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Average over the angles.
    pub fn angular_mean(&self) -> Vec<f64> {
        self.values
            .chunks(self.n_theta)
            .map(|c| c.iter().sum::<f64>() / self.n_theta as f64)
            .collect()
    }

    /// `sup |a - b|`.
    pub fn sup_distance(&self, other: &PolarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn theta(n_theta: usize, l: usize) -> f64 {
    2.0 * std::f64::consts::PI * l as f64 / n_theta as f64
}

/// Default angular resolution for a section space.
pub fn default_n_theta(basis: &SectionBasis) -> usize {
    4 * basis.len() + 4
}

fn check_polar(basis: &SectionBasis, h: &HermitianForm) -> Result<()> {
    if basis.k() > MAX_POLAR_K {
        return Err(Error::InvalidModel(format!(
            "full Hermitian path is capped at k <= {MAX_POLAR_K}"
        )));
    }
    if h.len() != basis.len() {
        return Err(Error::LengthMismatch {
            expected: basis.len(),
            got: h.len(),
        });
    }
    Ok(())
}

/// How the `H`-orthonormal basis is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orthonormalization {
    Cholesky,
    Eigen,
}

/// `fs_map` on the `(t, theta)` grid.
pub fn fs_map_polar(model: &ToricModel, basis: &SectionBasis, h: &HermitianForm, n_theta: usize) -> Result<PolarField> {
    fs_map_polar_with(model, basis, h, n_theta, Orthonormalization::Cholesky)
}

pub fn fs_map_polar_with(
    model: &ToricModel,
    basis: &SectionBasis,
    h: &HermitianForm,
    n_theta: usize,
    method: Orthonormalization,
) -> Result<PolarField> {
    check_polar(basis, h)?;
    let n = basis.len();
    let kf = basis.k_f64();
    let ln_n = (n as f64).ln();
    let l = h.log_diag();
    let core = h.core().cloned().unwrap_or_else(|| DMatrix::identity(n, n));
    let chol_l = match method {
        Orthonormalization::Cholesky => Some(checked_cholesky(&core)?.l()),
        Orthonormalization::Eigen => None,
    };
    let eig = match method {
        Orthonormalization::Eigen => {
            let e = SymmetricEigen::new(core);
            if e.eigenvalues.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::NotPositiveDefinite);
            }
            Some(e)
        }
        Orthonormalization::Cholesky => None,
    };
    let phases: Vec<Vec<Complex64>> = (0..n_theta)
        .map(|q| (0..n).map(|j| Complex64::from_polar(1.0, j as f64 * theta(n_theta, q))).collect())
        .collect();
    let mut values = Vec::with_capacity(model.len() * n_theta);
    for &t in model.axis() {
        let ex: Vec<f64> = (0..n).map(|j| 0.5 * (j as f64 * t - l[j])).collect();
        let m = ex.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mag: Vec<f64> = ex.iter().map(|e| (e - m).exp()).collect();
        for ph in &phases {
            let w = DVector::from_iterator(n, mag.iter().zip(ph).map(|(a, p)| p * *a));
            let q = match (&chol_l, &eig) {
                (Some(lo), _) => inverse_quadratic(lo, &w),
                (_, Some(e)) => {
                    let c = e.eigenvectors.adjoint() * &w;
                    c.iter().zip(e.eigenvalues.iter()).map(|(z, lam)| z.norm_sqr() / lam).sum()
                }
                _ => unreachable!(),
            };
            values.push((2.0 * m + q.ln() - ln_n) / kf);
        }
    }
    PolarField::new(model, n_theta, values)
}

/// `gram_map` for a measure and a potential sampled on the `(t, theta)` grid:
/// `G_ab = sum nu z^a conj(z^b) e^{-k psi}`.
pub fn gram_map_polar(model: &ToricModel, basis: &SectionBasis, nu: &PolarField, psi: &PolarField) -> Result<HermitianForm> {
    if basis.k() > MAX_POLAR_K {
        return Err(Error::InvalidModel(format!(
            "full Hermitian path is capped at k <= {MAX_POLAR_K}"
        )));
    }
    let nt = nu.n_theta();
    if psi.n_theta() != nt {
        return Err(Error::LengthMismatch {
            expected: nt,
            got: psi.n_theta(),
        });
    }
    let n = basis.len();
    let kf = basis.k_f64();
    let x = model.axis();
    // e_il = log nu_il - k psi_il
    let e: Vec<f64> = nu
        .values()
        .iter()
        .zip(psi.values())
        .map(|(&m, &p)| if m > 0.0 { m.ln() - kf * p } else { f64::NEG_INFINITY })
        .collect();
    if let Some(k) = nu.values().iter().position(|&m| m < 0.0) {
        return Err(Error::NegativeMass {
            node: k / nt,
            value: nu.values()[k],
        });
    }
    let row_lse: Vec<f64> = e.chunks(nt).map(|c| lse(c.iter().copied())).collect();
    let g: Vec<f64> = (0..n)
        .map(|a| lse(x.iter().zip(&row_lse).map(|(t, r)| a as f64 * t + r)))
        .collect();
    check_underflow(&g)?;
    let mut k = DMatrix::<Complex64>::zeros(n, n);
    // Fourier coefficients of the angular profile at each node, for the
    // differences a - b = -(n-1)..(n-1).
    let mut coef = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
    for (i, &t) in x.iter().enumerate() {
        if row_lse[i] == f64::NEG_INFINITY {
            continue;
        }
        let row = &e[i * nt..(i + 1) * nt];
        for (dd, c) in coef.iter_mut().enumerate() {
            let diff = dd as f64 - (n as f64 - 1.0);
            *c = row
                .iter()
                .enumerate()
                .map(|(q, &v)| Complex64::from_polar((v - row_lse[i]).exp(), diff * theta(nt, q)))
                .sum();
        }
        for a in 0..n {
            for b in 0..n {
                let w = ((a + b) as f64 * 0.5 * t - 0.5 * (g[a] + g[b]) + row_lse[i]).exp();
                if w > 0.0 {
                    k[(a, b)] += coef[a + n - 1 - b] * w;
                }
            }
        }
    }
    HermitianForm::from_parts(g, super::form::hermitize(k))
}

pub(crate) fn check_underflow(g: &[f64]) -> Result<()> {
    let floor = 1e-300f64.ln();
    if g.iter().all(|&v| !(v > floor)) {
        return Err(Error::QuadratureUnderflow);
    }
    if let Some(j) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(j));
    }
    Ok(())
}
