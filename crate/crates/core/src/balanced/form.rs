//! Section spaces of `O(dk)` on P1 and Hermitian forms on them.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ToricModel;

/// Largest section space handled by the dense code paths.
pub const MAX_SECTIONS: usize = 512;

/// Monomials `z^j`, `j = 0..dk`, of `H^0(O(dk))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectionBasis {
    k: u32,
    degree: u32,
}

impl SectionBasis {
    pub fn new(model: &ToricModel, k: u32) -> Result<Self> {
        if model.dim() != 1 {
            return Err(Error::OneDimensionalOnly);
        }
        if k == 0 {
            return Err(Error::InvalidModel("tensor power k must be at least 1".into()));
        }
        let basis = Self {
            k,
            degree: model.degree(),
        };
        if basis.len() > MAX_SECTIONS {
            return Err(Error::InvalidModel(format!(
                "N_k = {} exceeds the dense budget {MAX_SECTIONS}",
                basis.len()
            )));
        }
        Ok(basis)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn k_f64(&self) -> f64 {
        self.k as f64
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// `N_k = dk + 1`.
    pub fn len(&self) -> usize {
        (self.degree * self.k) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn exponents(&self) -> impl Iterator<Item = usize> {
        0..self.len()
    }
}

/// `log C(n, j)`.
pub fn ln_choose(n: usize, j: usize) -> f64 {
    let j = j.min(n - j);
    (1..=j).map(|i| ((n - j + i) as f64 / i as f64).ln()).sum()
}

/// `log sum exp`.
pub(crate) fn lse(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Positive Hermitian form `H = D^{1/2} K D^{1/2}` in the monomial basis,
/// where `D = diag(e^{l_j})` carries the scale and `K` has unit diagonal.
/// Radial forms store only `l` (`K = I`).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm {
    log_diag: Vec<f64>,
    core: Option<DMatrix<Complex64>>,
}

impl HermitianForm {
    /// Diagonal form with `H_jj = e^{l_j}`.
    pub fn diagonal(log_diag: Vec<f64>) -> Result<Self> {
        if log_diag.is_empty() {
            return Err(Error::InvalidModel("empty Hermitian form".into()));
        }
        if let Some(j) = log_diag.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(j));
        }
        Ok(Self { log_diag, core: None })
    }

    /// Full form from its matrix entries.
    pub fn from_matrix(h: DMatrix<Complex64>) -> Result<Self> {
        let n = h.nrows();
        if n == 0 || h.ncols() != n {
            return Err(Error::InvalidModel("Hermitian form must be square and non-empty".into()));
        }
        let scale = h.norm().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..n {
                if (h[(i, j)] - h[(j, i)].conj()).norm() > 1e-12 * scale {
                    return Err(Error::InvalidModel("matrix is not Hermitian".into()));
                }
            }
        }
        Self::from_parts(vec![0.0; n], h)
    }

    /// `H = D^{1/2} K D^{1/2}` from `l` and any Hermitian `K`; the diagonal of
    /// `K` is folded into `l`.
    pub fn from_parts(mut log_diag: Vec<f64>, mut k: DMatrix<Complex64>) -> Result<Self> {
        let n = log_diag.len();
        if k.nrows() != n || k.ncols() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: k.nrows(),
            });
        }
        let mut s = vec![0.0; n];
        for i in 0..n {
            let d = k[(i, i)].re;
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite);
            }
            s[i] = d.sqrt();
            log_diag[i] += d.ln();
        }
        for i in 0..n {
            for j in 0..n {
                k[(i, j)] /= s[i] * s[j];
            }
            k[(i, i)] = Complex64::new(1.0, 0.0);
        }
        checked_cholesky(&k)?;
        Self::diagonal(log_diag).map(|f| Self { core: Some(k), ..f })
    }

    /// The standard form of `O(dk)`: `||z^j||^2 = 1 / (N_k C(dk, j))`.
    pub fn binomial(basis: &SectionBasis) -> Self {
        let n = basis.len();
        let ln_n = (n as f64).ln();
        let log_diag = (0..n).map(|j| -ln_n - ln_choose(n - 1, j)).collect();
        Self { log_diag, core: None }
    }

    pub fn len(&self) -> usize {
        self.log_diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_diag.is_empty()
    }

    pub fn is_radial(&self) -> bool {
        self.core.is_none()
    }

    /// `log H_jj`.
    pub fn log_diag(&self) -> &[f64] {
        &self.log_diag
    }

    /// The unit-diagonal core `K`, `None` for radial forms.
    pub fn core(&self) -> Option<&DMatrix<Complex64>> {
        self.core.as_ref()
    }

    /// Drops the off-diagonal part.
    pub fn diagonal_part(&self) -> Self {
        Self {
            log_diag: self.log_diag.clone(),
            core: None,
        }
    }

    /// `c H`.
    pub fn scaled(&self, c: f64) -> Self {
        self.scaled_log(c.ln())
    }

    /// `e^a H`.
    pub fn scaled_log(&self, a: f64) -> Self {
        Self {
            log_diag: self.log_diag.iter().map(|l| l + a).collect(),
            core: self.core.clone(),
        }
    }

    /// Dense matrix entries (may overflow for extreme scales).
    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let n = self.len();
        let s: Vec<f64> = self.log_diag.iter().map(|l| (0.5 * l).exp()).collect();
        DMatrix::from_fn(n, n, |i, j| {
            let kij = match &self.core {
                Some(k) => k[(i, j)],
                None if i == j => Complex64::new(1.0, 0.0),
                None => Complex64::new(0.0, 0.0),
            };
            kij * s[i] * s[j]
        })
    }

    pub(crate) fn core_cholesky(&self) -> Result<Option<Cholesky<Complex64, Dyn>>> {
        match &self.core {
            None => Ok(None),
            Some(k) => checked_cholesky(k).map(Some),
        }
    }

    /// `log det H` from the Cholesky pivots.
    pub fn log_det(&self) -> Result<f64> {
        let mut s: f64 = self.log_diag.iter().sum();
        if let Some(c) = self.core_cholesky()? {
            let l = c.l();
            for i in 0..self.len() {
                s += 2.0 * l[(i, i)].re.ln();
            }
        }
        Ok(s)
    }

    /// `base^{-1/2} H base^{-1/2}` (with `base^{1/2}` its Cholesky factor),
    /// returned with the common scale `e^a` pulled out.
    fn relative(&self, base: &HermitianForm) -> Result<(DMatrix<Complex64>, f64)> {
        let n = self.len();
        let diff: Vec<f64> = self.log_diag.iter().zip(&base.log_diag).map(|(a, b)| a - b).collect();
        let a = diff.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s: Vec<f64> = diff.iter().map(|d| (0.5 * (d - a)).exp()).collect();
        let mut m = DMatrix::from_fn(n, n, |i, j| {
            let kij = match &self.core {
                Some(k) => k[(i, j)],
                None if i == j => Complex64::new(1.0, 0.0),
                None => Complex64::new(0.0, 0.0),
            };
            kij * s[i] * s[j]
        });
        if let Some(c) = base.core_cholesky()? {
            let l = c.l();
            l.solve_lower_triangular_mut(&mut m);
            let mut mt = m.adjoint();
            l.solve_lower_triangular_mut(&mut mt);
            m = mt.adjoint();
        }
        Ok((m, a))
    }

    fn check_same_len(&self, other: &HermitianForm) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(())
    }

    /// Logarithms of the eigenvalues of `base^{-1} H`, ascending.
    pub fn relative_log_eigenvalues(&self, base: &HermitianForm) -> Result<Vec<f64>> {
        self.check_same_len(base)?;
        let mut out = if self.is_radial() && base.is_radial() {
            self.log_diag.iter().zip(&base.log_diag).map(|(a, b)| a - b).collect()
        } else {
            let (m, a) = self.relative(base)?;
            let eig = SymmetricEigen::new(m);
            let mut v = Vec::with_capacity(self.len());
            for &e in eig.eigenvalues.iter() {
                if !(e > 0.0) {
                    return Err(Error::NotPositiveDefinite);
                }
                v.push(e.ln() + a);
            }
            v
        };
        out.sort_by(f64::total_cmp);
        Ok(out)
    }

    /// `log tr(base^{-1} H)`.
    pub fn log_relative_trace(&self, base: &HermitianForm) -> Result<f64> {
        self.check_same_len(base)?;
        if base.is_radial() {
            // K has unit diagonal.
            return Ok(lse(self.log_diag.iter().zip(&base.log_diag).map(|(a, b)| a - b)));
        }
        let (m, a) = self.relative(base)?;
        Ok(m.trace().re.ln() + a)
    }

    /// Scale-invariant distance: spread of the log eigenvalues of
    /// `self^{-1} other`.
    pub fn projective_distance(&self, other: &HermitianForm) -> Result<f64> {
        let e = other.relative_log_eigenvalues(self)?;
        Ok(e[e.len() - 1] - e[0])
    }

    /// Point at time `t` on the geodesic from `self` to `other`:
    /// `H^{1/2} (H^{-1/2} G H^{-1/2})^t H^{1/2}`.
    pub fn geodesic_to(&self, other: &HermitianForm, t: f64) -> Result<HermitianForm> {
        self.check_same_len(other)?;
        if self.is_radial() && other.is_radial() {
            let l = self
                .log_diag
                .iter()
                .zip(&other.log_diag)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect();
            return Self::diagonal(l);
        }
        let (m, a) = other.relative(self)?;
        let eig = SymmetricEigen::new(m);
        let mut pow = eig.eigenvectors.clone();
        for (j, &e) in eig.eigenvalues.iter().enumerate() {
            if !(e > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            let f = e.powf(t);
            for i in 0..pow.nrows() {
                pow[(i, j)] *= f;
            }
        }
        let mut r = pow * eig.eigenvectors.adjoint();
        if let Some(c) = self.core_cholesky()? {
            let l = c.l();
            r = &l * r * l.adjoint();
        }
        let l = self.log_diag.iter().map(|x| x + t * a).collect();
        Self::from_parts(l, hermitize(r))
    }

    /// `H_t` such that `e^{lambda_j t} s_j` is `H_t`-orthonormal, where `s_j`
    /// is the `H`-orthonormal basis obtained from `H` by the unitary `u`
    /// applied to its Cholesky basis (`u = None`: the identity).
    pub fn one_parameter(&self, lambda: &[f64], u: Option<&DMatrix<Complex64>>, t: f64) -> Result<HermitianForm> {
        if lambda.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: lambda.len(),
            });
        }
        if u.is_none() && self.is_radial() {
            let l = self
                .log_diag
                .iter()
                .zip(lambda)
                .map(|(a, la)| a - 2.0 * la * t)
                .collect();
            return Self::diagonal(l);
        }
        let n = self.len();
        let d = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new((-2.0 * lambda[i] * t).exp(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let mut r = match u {
            Some(u) => u * d * u.adjoint(),
            None => d,
        };
        if let Some(c) = self.core_cholesky()? {
            let l = c.l();
            r = &l * r * l.adjoint();
        }
        Self::from_parts(self.log_diag.clone(), hermitize(r))
    }

    /// Squared `self`-norms of the `base`-orthonormal basis obtained from the
    /// Cholesky basis of `base` by the unitary `u` (`None`: the identity).
    pub fn norms_of_orthonormal(&self, base: &HermitianForm, u: Option<&DMatrix<Complex64>>) -> Result<Vec<f64>> {
        self.check_same_len(base)?;
        if u.is_none() && self.is_radial() && base.is_radial() {
            return Ok(self
                .log_diag
                .iter()
                .zip(&base.log_diag)
                .map(|(a, b)| (a - b).exp())
                .collect());
        }
        let (m, a) = self.relative(base)?;
        let m = match u {
            Some(u) => u.adjoint() * m * u,
            None => m,
        };
        Ok((0..self.len()).map(|j| m[(j, j)].re * a.exp()).collect())
    }
}

/// Cholesky factorization that rejects non-positive pivots (complex square
/// roots never fail on their own).
pub(crate) fn checked_cholesky(k: &DMatrix<Complex64>) -> Result<Cholesky<Complex64, Dyn>> {
    let c = k.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = c.l_dirty();
    for i in 0..k.nrows() {
        let p = l[(i, i)];
        if !(p.re > 0.0) || p.im.abs() > 1e-12 * p.re || !p.re.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
    }
    Ok(c)
}

pub(crate) fn hermitize(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let a = m.adjoint();
    (m + a).map(|z| z * 0.5)
}

/// `v^* K^{-1} v` given the lower Cholesky factor of `K`.
pub(crate) fn inverse_quadratic(l: &DMatrix<Complex64>, v: &DVector<Complex64>) -> f64 {
    match l.solve_lower_triangular(v) {
        Some(y) => y.norm_squared(),
        None => f64::INFINITY,
    }
}
