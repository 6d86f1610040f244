//! Balanced metrics on P1: the Fubini-Study map `f_k`, the Gram map `h_k`,
//! the functionals `D_k`, `F_k`, `J_k`, Bergman measures and the fixed-point
//! iteration of `t_k = h_k o f_k`.
//!
//! Radial measures with diagonal forms run entirely in log-space; anything
//! else goes through the angular grid of [`polar`].

pub mod form;
pub mod polar;
pub mod setting;

use serde::{Deserialize, Serialize};

pub use form::{HermitianForm, SectionBasis};
pub use polar::{fs_map_polar, gram_map_polar, Orthonormalization, PolarField};
pub use setting::{make_setting, setting_measure, BalancedSetting, SMinus, SMu, SETTINGS};

use crate::error::{Error, Result};
use crate::functionals::functional_j;
use crate::ma::{monge_ampere, reference_measure};
use crate::measure::MeasureField;
use crate::model::ToricModel;
use crate::potential::Potential;
use form::lse;
use polar::check_underflow;

fn check_basis(model: &ToricModel, basis: &SectionBasis, h: &HermitianForm) -> Result<()> {
    if model.dim() != 1 || model.degree() != basis.degree() {
        return Err(Error::SettingMismatch("section basis built for another model".into()));
    }
    if h.len() != basis.len() {
        return Err(Error::LengthMismatch {
            expected: basis.len(),
            got: h.len(),
        });
    }
    Ok(())
}

/// `f_k(H)`: the potential `(1/k) log((1/N_k) sum_j |s_j|^2)` for an
/// `H`-orthonormal basis. Radial forms only; see [`fs_map_polar`].
pub fn fs_map(model: &ToricModel, basis: &SectionBasis, h: &HermitianForm) -> Result<Potential> {
    check_basis(model, basis, h)?;
    if !h.is_radial() {
        return Err(Error::NotRadial);
    }
    let kf = basis.k_f64();
    let ln_n = (basis.len() as f64).ln();
    let l = h.log_diag();
    let values = model
        .axis()
        .iter()
        .map(|&t| (lse(l.iter().enumerate().map(|(j, lj)| j as f64 * t - lj)) - ln_n) / kf)
        .collect();
    Potential::new(model, values)
}

/// `h_k(mu, psi)` for a radial measure: diagonal, `G_jj = int e^{jt - k psi} dmu`.
pub fn gram_map(model: &ToricModel, basis: &SectionBasis, mu: &MeasureField, psi: &Potential) -> Result<HermitianForm> {
    model.check(mu)?;
    model.check(psi)?;
    let kf = basis.k_f64();
    let x = model.axis();
    let e: Vec<(f64, f64)> = mu
        .masses()
        .iter()
        .zip(psi.values())
        .zip(x)
        .filter(|((m, _), _)| **m > 0.0)
        .map(|((m, p), t)| (*t, m.ln() - kf * p))
        .collect();
    let g: Vec<f64> = basis
        .exponents()
        .map(|j| lse(e.iter().map(|(t, c)| j as f64 * t + c)))
        .collect();
    check_underflow(&g)?;
    HermitianForm::diagonal(g)
}

/// `D_k(H) = -(1/(2k N_k)) log det(base^{-1} H)`.
pub fn dk(basis: &SectionBasis, h: &HermitianForm, base: &HermitianForm) -> Result<f64> {
    if h.len() != basis.len() || base.len() != basis.len() {
        return Err(Error::LengthMismatch {
            expected: basis.len(),
            got: h.len(),
        });
    }
    let n = basis.len() as f64;
    Ok(-(h.log_det()? - base.log_det()?) / (2.0 * basis.k_f64() * n))
}

/// The base point `B_k = h_k(MA(ref), ref)`.
pub fn base_form(model: &ToricModel, basis: &SectionBasis) -> Result<HermitianForm> {
    let r = model.reference();
    gram_map(model, basis, &monge_ampere(model, &r)?, &r)
}

/// Either a radial potential or an angular sample of one.
#[derive(Debug, Clone, PartialEq)]
pub enum FsImage {
    Radial(Potential),
    Polar(PolarField),
}

impl FsImage {
    pub fn radial(&self) -> Option<&Potential> {
        match self {
            FsImage::Radial(p) => Some(p),
            FsImage::Polar(_) => None,
        }
    }
}

/// Evaluation context shared by the functionals and the iteration.
pub struct Balanced<'a> {
    pub setting: &'a dyn BalancedSetting,
    pub model: &'a ToricModel,
    pub basis: SectionBasis,
    pub base: HermitianForm,
    pub n_theta: usize,
    omega: MeasureField,
}

impl<'a> Balanced<'a> {
    pub fn new(setting: &'a dyn BalancedSetting, model: &'a ToricModel, basis: SectionBasis) -> Result<Self> {
        if model.dim() != 1 || model.degree() != basis.degree() {
            return Err(Error::SettingMismatch("section basis built for another model".into()));
        }
        Ok(Self {
            setting,
            model,
            basis,
            base: base_form(model, &basis)?,
            n_theta: polar::default_n_theta(&basis),
            omega: reference_measure(model)?,
        })
    }

    pub fn with_n_theta(mut self, n_theta: usize) -> Self {
        self.n_theta = n_theta;
        self
    }

    fn uses_polar(&self, h: &HermitianForm) -> bool {
        !h.is_radial() || !self.setting.is_radial()
    }

    pub fn fs(&self, h: &HermitianForm) -> Result<FsImage> {
        if self.uses_polar(h) {
            Ok(FsImage::Polar(fs_map_polar(self.model, &self.basis, h, self.n_theta)?))
        } else {
            Ok(FsImage::Radial(fs_map(self.model, &self.basis, h)?))
        }
    }

    /// `L(f_k(H))`.
    pub fn l_of(&self, image: &FsImage) -> Result<f64> {
        match image {
            FsImage::Radial(p) => self.setting.l(self.model, p),
            FsImage::Polar(p) => self.setting.l_polar(self.model, p),
        }
    }

    /// `L_0(f_k(H))`.
    pub fn l0_of(&self, image: &FsImage) -> Result<f64> {
        Ok(match image {
            FsImage::Radial(p) => self.omega.integrate(&p.weight(self.model)),
            FsImage::Polar(p) => {
                setting::polar_pairing(self.model, &PolarField::from_radial_measure(&self.omega, p.n_theta()), p)
            }
        })
    }

    /// `t_k(H) = h_k(f_k(H))`.
    pub fn t_k(&self, h: &HermitianForm) -> Result<HermitianForm> {
        let image = self.fs(h)?;
        self.t_k_of(&image)
    }

    fn t_k_of(&self, image: &FsImage) -> Result<HermitianForm> {
        match image {
            FsImage::Radial(p) => {
                let nu = self.setting.measure(self.model, p)?;
                gram_map(self.model, &self.basis, &nu, p)
            }
            FsImage::Polar(p) => {
                let nu = self.setting.measure_polar(self.model, p)?;
                gram_map_polar(self.model, &self.basis, &nu, p)
            }
        }
    }

    pub fn dk(&self, h: &HermitianForm) -> Result<f64> {
        dk(&self.basis, h, &self.base)
    }

    /// `F_k = D_k - L o f_k`.
    pub fn fk(&self, h: &HermitianForm) -> Result<f64> {
        Ok(self.dk(h)? - self.l_of(&self.fs(h)?)?)
    }

    /// `J_k = L_0 o f_k - D_k`.
    pub fn jk(&self, h: &HermitianForm) -> Result<f64> {
        Ok(self.l0_of(&self.fs(h)?)? - self.dk(h)?)
    }

    /// Observed ratio `J(f_k(H)) / J_k(H)`, with `J` taken against the
    /// reference. `None` off the radial path or when `J_k` vanishes.
    pub fn j_ratio(&self, h: &HermitianForm) -> Result<Option<f64>> {
        let jk = self.jk(h)?;
        match self.fs(h)? {
            FsImage::Radial(p) if jk.abs() > 1e-12 => {
                Ok(Some(functional_j(self.model, &self.model.reference(), &p)? / jk))
            }
            _ => Ok(None),
        }
    }

    /// Trace gauge `tr(base^{-1} H) = N_k`.
    pub fn normalize(&self, h: &HermitianForm) -> Result<HermitianForm> {
        let a = h.log_relative_trace(&self.base)?;
        Ok(h.scaled_log((self.basis.len() as f64).ln() - a))
    }

    /// Squared `t_k(H)`-norms of an `H`-orthonormal, `t_k(H)`-orthogonal
    /// basis, normalized to mean one.
    pub fn balanced_norms(&self, h: &HermitianForm) -> Result<Vec<f64>> {
        let t = self.t_k(h)?;
        let e = t.relative_log_eigenvalues(h)?;
        let mean = lse(e.iter().copied()) - (e.len() as f64).ln();
        Ok(e.iter().map(|v| (v - mean).exp()).collect())
    }

    /// Right-hand side of the derivative identity along the one-parameter
    /// group `lambda` (with optional unitary `u`) through `H`:
    /// `sum lambda_j ||s_j||^2 / sum ||s_j||^2` in the norm of `t_k(H)`.
    pub fn derivative_closed_form(&self, h: &HermitianForm, lambda: &[f64], u: Option<&nalgebra::DMatrix<num_complex::Complex64>>) -> Result<f64> {
        let t = self.t_k(h)?;
        let norms = t.norms_of_orthonormal(h, u)?;
        let total: f64 = norms.iter().sum();
        Ok(norms.iter().zip(lambda).map(|(s, l)| s * l).sum::<f64>() / total)
    }

    /// Central difference of `k L(f_k(H_t))` at `t = 0`.
    pub fn derivative_fd(&self, h: &HermitianForm, lambda: &[f64], u: Option<&nalgebra::DMatrix<num_complex::Complex64>>, step: f64) -> Result<f64> {
        let plus = self.l_of(&self.fs(&h.one_parameter(lambda, u, step)?)?)?;
        let minus = self.l_of(&self.fs(&h.one_parameter(lambda, u, -step)?)?)?;
        Ok(self.basis.k_f64() * (plus - minus) / (2.0 * step))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalancedOptions {
    pub max_iter: usize,
    /// Stop when the projective distance between iterates drops below this.
    pub tol_fp: f64,
    /// Iterations of the damped (geodesic midpoint) fallback.
    pub damped_iter: usize,
    /// Angular resolution of the full path; `0` picks `4 N_k + 4`.
    pub n_theta: usize,
}

impl Default for BalancedOptions {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            tol_fp: 1e-11,
            damped_iter: 20_000,
            n_theta: 0,
        }
    }
}

impl BalancedOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || !(self.tol_fp > 0.0) {
            return Err(Error::InvalidModel("balanced options need max_iter > 0 and tol_fp > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalancedRecord {
    pub iter: usize,
    #[serde(rename = "F_k")]
    pub f_k: f64,
    #[serde(rename = "J_k")]
    pub j_k: f64,
    pub fp_gap: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BalancedTrace {
    pub records: Vec<BalancedRecord>,
    /// Whether the damped fallback ran.
    pub damped: bool,
}

impl BalancedTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,F_k,J_k,fp_gap\n");
        for r in &self.records {
            s.push_str(&format!("{},{:.17e},{:.17e},{:.17e}\n", r.iter, r.f_k, r.j_k, r.fp_gap));
        }
        s
    }

    pub fn final_gap(&self) -> f64 {
        self.records.last().map_or(f64::INFINITY, |r| r.fp_gap)
    }

    /// `F_k` never drops by more than `tol`.
    pub fn is_nondecreasing(&self, tol: f64) -> bool {
        self.records.windows(2).all(|w| w[1].f_k >= w[0].f_k - tol)
    }
}

#[derive(Debug, Clone)]
pub struct BalancedSolution {
    pub form: HermitianForm,
    pub potential: FsImage,
    pub trace: BalancedTrace,
}

/// Fixed point of `t_k` in the trace gauge, starting from `init` (default:
/// the binomial form). Plain iteration first; if it stalls, damped
/// iteration along geodesic midpoints.
pub fn balanced_solve(ctx: &Balanced<'_>, init: Option<&HermitianForm>, opts: &BalancedOptions) -> Result<BalancedSolution> {
    opts.validate()?;
    let start = match init {
        Some(h) => {
            check_basis(ctx.model, &ctx.basis, h)?;
            if ctx.setting.name() == "minus" && !h.is_radial() {
                return Err(Error::SettingMismatch(
                    "S_- fixed points are unique only up to automorphisms of P1; start from a diagonal form".into(),
                ));
            }
            h.clone()
        }
        None => HermitianForm::binomial(&ctx.basis),
    };
    let mut h = ctx.normalize(&start)?;
    let mut trace = BalancedTrace::default();
    let mut iter = 0;
    for damped in [false, true] {
        let budget = if damped { opts.damped_iter } else { opts.max_iter };
        trace.damped = damped;
        let mut best = f64::INFINITY;
        let mut stalled = 0;
        for _ in 0..budget {
            let image = ctx.fs(&h)?;
            let f = ctx.dk(&h)? - ctx.l_of(&image)?;
            let j = ctx.l0_of(&image)? - ctx.dk(&h)?;
            let t = ctx.normalize(&ctx.t_k_of(&image)?)?;
            let gap = h.projective_distance(&t)?;
            trace.records.push(BalancedRecord {
                iter,
                f_k: f,
                j_k: j,
                fp_gap: gap,
            });
            iter += 1;
            h = if damped { h.geodesic_to(&t, 0.5)? } else { t };
            if gap < opts.tol_fp {
                let potential = ctx.fs(&h)?;
                return Ok(BalancedSolution {
                    form: h,
                    potential,
                    trace,
                });
            }
            if !gap.is_finite() {
                break;
            }
            // Give up on the plain iteration once it stops contracting.
            if gap < best * 0.999 {
                best = gap;
                stalled = 0;
            } else {
                stalled += 1;
                if !damped && stalled > 200 {
                    break;
                }
            }
        }
        if !damped {
            h = ctx.normalize(&start)?;
        }
    }
    Err(Error::NoConvergence {
        iterations: iter,
        residual: trace.final_gap(),
    })
}

/// Distortion function, Bergman measure and Bergman projection.
#[derive(Debug, Clone)]
pub struct Bergman {
    /// `rho_k = sum |s_j|^2 e^{-k psi}` for an `h_k(mu0, psi)`-orthonormal basis.
    pub rho: Vec<f64>,
    /// `beta_k = rho_k mu0 / N_k`.
    pub beta: MeasureField,
    /// `P_k psi = f_k(h_k(mu0, psi))`.
    pub projection: Potential,
}

pub fn bergman(model: &ToricModel, basis: &SectionBasis, mu0: &MeasureField, psi: &Potential) -> Result<Bergman> {
    let h = gram_map(model, basis, mu0, psi)?;
    let projection = fs_map(model, basis, &h)?;
    let n = basis.len() as f64;
    let kf = basis.k_f64();
    let rho: Vec<f64> = projection
        .values()
        .iter()
        .zip(psi.values())
        .map(|(p, q)| n * (kf * (p - q)).exp())
        .collect();
    let beta = MeasureField::from_masses(
        model,
        rho.iter().zip(mu0.masses()).map(|(r, m)| r * m / n).collect(),
    )?;
    Ok(Bergman { rho, beta, projection })
}

/// One row of a `k`-sweep summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSweepRow {
    pub k: u32,
    #[serde(rename = "N_k")]
    pub n_k: usize,
    #[serde(rename = "F_k_at_fixed_point")]
    pub f_k_at_fixed_point: f64,
    /// Sup distance modulo constants to the limit potential.
    pub sup_gap_to_limit: Option<f64>,
    #[serde(rename = "l1_gap_of_MA")]
    pub l1_gap_of_ma: Option<f64>,
}

/// Solves for every `k` in `ks` and compares with `limit` when given.
pub fn balanced_sweep(
    setting: &dyn BalancedSetting,
    model: &ToricModel,
    ks: &[u32],
    limit: Option<&Potential>,
    opts: &BalancedOptions,
) -> Result<Vec<(KSweepRow, BalancedSolution)>> {
    if ks.is_empty() {
        return Err(Error::InvalidModel("empty k-list".into()));
    }
    let limit_ma = limit.map(|p| monge_ampere(model, p)).transpose()?;
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        let basis = SectionBasis::new(model, k)?;
        let mut ctx = Balanced::new(setting, model, basis)?;
        if opts.n_theta > 0 {
            ctx = ctx.with_n_theta(opts.n_theta);
        }
        let sol = balanced_solve(&ctx, None, opts)?;
        let f = ctx.fk(&sol.form)?;
        let (sup_gap, l1) = match (limit, &limit_ma, sol.potential.radial()) {
            (Some(lim), Some(lm), Some(p)) => (
                Some(p.sup_distance_mod_constants(lim)),
                Some(monge_ampere(model, p)?.l1_distance(lm)),
            ),
            _ => (None, None),
        };
        out.push((
            KSweepRow {
                k,
                n_k: basis.len(),
                f_k_at_fixed_point: f,
                sup_gap_to_limit: sup_gap,
                l1_gap_of_ma: l1,
            },
            sol,
        ));
    }
    Ok(out)
}
