//! Energy functionals on weights `phi = (psi - psi_FS) / 2`.
//!
//! Every pairing integrates weights, so `E(psi + c) = E(psi) + c / 2`; use
//! [`Potential::shift_weight`] to add a constant to the weight itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use std::sync::OnceLock;

use crate::ma::{check_full_mass, measure_of, mixed_monge_ampere, monge_ampere, polarize, reference_measure};
use crate::measure::MeasureField;
use crate::model::{ToricModel, TOL_MASS};
use crate::potential::Potential;
use crate::solver::{canonical_measure, solve_ma, SolveOptions};

/// Mixed Monge-Ampère measures `MA(a^j, b^{n-j})` for `j = 0..=n`.
pub fn mixed_chain(model: &ToricModel, a: &Potential, b: &Potential) -> Result<Vec<MeasureField>> {
    model.check(a)?;
    model.check(b)?;
    let ma = measure_of(model, a)?;
    let mb = measure_of(model, b)?;
    mixed_chain_with(model, a, b, ma, mb)
}

fn mixed_chain_with(
    model: &ToricModel,
    a: &Potential,
    b: &Potential,
    ma: MeasureField,
    mb: MeasureField,
) -> Result<Vec<MeasureField>> {
    if model.dim() == 1 {
        return Ok(vec![mb, ma]);
    }
    let mix = if a.values() == b.values() {
        ma.clone()
    } else {
        polarize(model, a, b, &ma, &mb)?
    };
    Ok(vec![mb, mix, ma])
}

fn diff_weight(model: &ToricModel, a: &Potential, b: &Potential) -> Vec<f64> {
    a.weight(model)
        .iter()
        .zip(b.weight(model))
        .map(|(x, y)| x - y)
        .collect()
}

/// A full-mass potential with its Monge-Ampère measure and, once asked
/// for, its energy. Lets several functionals share one evaluation.
#[derive(Debug)]
pub struct Evaluated<'a> {
    pub psi: &'a Potential,
    pub ma: MeasureField,
    energy: OnceLock<f64>,
}

impl<'a> Evaluated<'a> {
    pub fn new(model: &ToricModel, psi: &'a Potential) -> Result<Self> {
        model.check(psi)?;
        let ma = check_full_mass(model, psi)?;
        Ok(Self {
            psi,
            ma,
            energy: OnceLock::new(),
        })
    }

    pub fn energy(&self, model: &ToricModel) -> Result<f64> {
        if let Some(e) = self.energy.get() {
            return Ok(*e);
        }
        let e = energy_with(model, self.psi, self.ma.clone())?;
        Ok(*self.energy.get_or_init(|| e))
    }
}

/// Aubin-Mabuchi energy relative to the reference.
pub fn energy(model: &ToricModel, psi: &Potential) -> Result<f64> {
    Evaluated::new(model, psi)?.energy(model)
}

/// Energy without the full-mass check; boundary atoms are integrated
/// against the weight at the window edge.
pub(crate) fn energy_raw(model: &ToricModel, psi: &Potential) -> Result<f64> {
    model.check(psi)?;
    energy_with(model, psi, monge_ampere(model, psi)?)
}

fn energy_with(model: &ToricModel, psi: &Potential, ma: MeasureField) -> Result<f64> {
    let phi = psi.weight(model);
    let chain = mixed_chain_with(model, psi, &model.reference(), ma, reference_measure(model)?)?;
    let n = model.dim() as f64;
    Ok(chain.iter().map(|m| m.integrate(&phi)).sum::<f64>() / (n + 1.0))
}

/// The `n + 1` pairings `int (phi_a - phi_b) MA(a^j, b^{n-j})`, `j = 0..=n`.
/// They are nonincreasing in `j`.
pub fn monotone_chain(model: &ToricModel, a: &Potential, b: &Potential) -> Result<Vec<f64>> {
    let u = diff_weight(model, a, b);
    Ok(mixed_chain(model, a, b)?
        .iter()
        .map(|m| m.integrate(&u))
        .collect())
}

/// [`monotone_chain`] on evaluated potentials.
pub fn monotone_chain_of(model: &ToricModel, a: &Evaluated<'_>, b: &Evaluated<'_>) -> Result<Vec<f64>> {
    let u = diff_weight(model, a.psi, b.psi);
    Ok(mixed_chain_with(model, a.psi, b.psi, a.ma.clone(), b.ma.clone())?
        .iter()
        .map(|m| m.integrate(&u))
        .collect())
}

/// `E(a) - E(b)` through the cocycle formula.
pub fn energy_difference(model: &ToricModel, a: &Potential, b: &Potential) -> Result<f64> {
    let n = model.dim() as f64;
    Ok(monotone_chain(model, a, b)?.iter().sum::<f64>() / (n + 1.0))
}

/// `I(a, b) = int (phi_a - phi_b) (MA(b) - MA(a))`.
pub fn functional_i(model: &ToricModel, a: &Potential, b: &Potential) -> Result<f64> {
    Ok(functional_i_of(model, &Evaluated::new(model, a)?, &Evaluated::new(model, b)?))
}

pub fn functional_i_of(model: &ToricModel, a: &Evaluated<'_>, b: &Evaluated<'_>) -> f64 {
    let u = diff_weight(model, a.psi, b.psi);
    b.ma.integrate(&u) - a.ma.integrate(&u)
}

/// `J_base(phi) = E(base) - E(phi) + int (phi - base) MA(base)`.
pub fn functional_j(model: &ToricModel, base: &Potential, phi: &Potential) -> Result<f64> {
    functional_j_of(model, &Evaluated::new(model, base)?, &Evaluated::new(model, phi)?)
}

pub fn functional_j_of(model: &ToricModel, base: &Evaluated<'_>, phi: &Evaluated<'_>) -> Result<f64> {
    let u = diff_weight(model, phi.psi, base.psi);
    Ok(base.energy(model)? - phi.energy(model)? + base.ma.integrate(&u))
}

/// `J` in gradient form. For `n = 1` this is the Dirichlet sum
/// `(1/d) sum (Delta u)^2 / h` of `u = phi - phi_base`; for `n = 2` the
/// pairings `sum_j (n-j)/(n+1) int u (MA(base, c_j) - MA(phi, c_j))` with
/// `c_0 = base`, `c_1 = phi`.
pub fn functional_j_gradient(model: &ToricModel, base: &Potential, phi: &Potential) -> Result<f64> {
    model.check(base)?;
    model.check(phi)?;
    check_full_mass(model, base)?;
    check_full_mass(model, phi)?;
    let u = diff_weight(model, phi, base);
    if model.dim() == 1 {
        let x = model.axis();
        let d = model.degree_f64();
        let s: f64 = (0..x.len() - 1)
            .map(|i| {
                let du = u[i + 1] - u[i];
                du * du / (x[i + 1] - x[i])
            })
            .sum();
        return Ok(s / d);
    }
    let mbb = monge_ampere(model, base)?;
    let mpp = monge_ampere(model, phi)?;
    let mix = mixed_monge_ampere(model, &[phi, base])?;
    let j0 = mbb.integrate(&u) - mix.integrate(&u);
    let j1 = mix.integrate(&u) - mpp.integrate(&u);
    Ok(2.0 * j0 / 3.0 + j1 / 3.0)
}

/// `L_mu(psi) = int phi dmu`.
pub fn l_mu(model: &ToricModel, mu: &MeasureField, psi: &Potential) -> Result<f64> {
    model.check(mu)?;
    model.check(psi)?;
    mu.check_probability()?;
    mu.check_non_pluripolar()?;
    Ok(mu.integrate(&psi.weight(model)))
}

/// `L_0 = L_{MA(ref)}`.
pub fn l_0(model: &ToricModel, psi: &Potential) -> Result<f64> {
    model.check(psi)?;
    let m0 = reference_measure(model)?;
    Ok(m0.integrate(&psi.weight(model)))
}

/// `F_mu = E - L_mu`.
pub fn f_mu(model: &ToricModel, mu: &MeasureField, psi: &Potential) -> Result<f64> {
    Ok(energy(model, psi)? - l_mu(model, mu, psi)?)
}

/// Electrostatic energy `E*(mu) = E(phi_mu) - L_mu(phi_mu)` through the
/// solution of `MA(phi_mu) = mu`.
pub fn energy_star(model: &ToricModel, mu: &MeasureField) -> Result<(f64, Potential)> {
    energy_star_with(model, mu, &SolveOptions::default())
}

pub fn energy_star_with(model: &ToricModel, mu: &MeasureField, opts: &SolveOptions) -> Result<(f64, Potential)> {
    let (psi, _) = solve_ma(model, mu, opts)?;
    let value = f_mu(model, mu, &psi)?;
    Ok((value, psi))
}

fn require_anticanonical(model: &ToricModel) -> Result<()> {
    if model.dim() != 1 || model.degree() != 2 {
        return Err(Error::WrongDegree);
    }
    Ok(())
}

/// `L_-(psi) = -(1/2) log int e^{-2 phi}` on the anticanonical model.
pub fn l_minus(model: &ToricModel, psi: &Potential) -> Result<f64> {
    require_anticanonical(model)?;
    let nu = canonical_measure(model, psi)?;
    Ok(-0.5 * nu.total().ln())
}

/// `F_- = E - L_-`, invariant under constant shifts.
pub fn f_minus(model: &ToricModel, psi: &Potential) -> Result<f64> {
    Ok(energy(model, psi)? - l_minus(model, psi)?)
}

/// Bundle of functional values with provenance notes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyReport {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "L_mu")]
    pub l_mu: Option<f64>,
    #[serde(rename = "L_0")]
    pub l_0: f64,
    #[serde(rename = "F_mu")]
    pub f_mu: Option<f64>,
    #[serde(rename = "I")]
    pub i: Option<f64>,
    #[serde(rename = "J")]
    pub j: Option<f64>,
    #[serde(rename = "E_star")]
    pub e_star: Option<f64>,
    pub notes: Vec<String>,
}

impl EnergyReport {
    /// Report for `psi`; with `mu`, also `L_mu`, `F_mu` and, when `psi`
    /// solves `MA(psi) = mu`, `E*(mu) = F_mu(psi)`.
    pub fn new(model: &ToricModel, psi: &Potential, mu: Option<&MeasureField>, solved: bool) -> Result<Self> {
        let e = energy(model, psi)?;
        let l0 = l_0(model, psi)?;
        let mut rep = EnergyReport {
            e,
            l_0: l0,
            j: Some(l0 - e),
            i: Some(functional_i(model, psi, &model.reference())?),
            notes: vec![
                model.descriptor(),
                format!("tol_mass={TOL_MASS:e}"),
                "weights phi = (psi - psi_FS)/2".to_string(),
            ],
            ..Default::default()
        };
        if let Some(mu) = mu {
            let lm = l_mu(model, mu, psi)?;
            rep.l_mu = Some(lm);
            rep.f_mu = Some(e - lm);
            if solved {
                rep.e_star = Some(e - lm);
            }
        }
        Ok(rep)
    }

    /// Checks `J <= I <= (n+1) J` and `F_mu = E - L_mu` where present.
    pub fn check_invariants(&self, n: usize) -> bool {
        let mut ok = true;
        if let (Some(i), Some(j)) = (self.i, self.j) {
            ok &= j <= i + TOL_MASS && i <= (n as f64 + 1.0) * j + TOL_MASS;
        }
        if let (Some(f), Some(l)) = (self.f_mu, self.l_mu) {
            ok &= (f - (self.e - l)).abs() <= 1e-12 * (1.0 + f.abs());
        }
        ok
    }
}

/// Sampled `(J, F_mu)` pairs with the least-squares slope of `F_mu` in `J`.
#[derive(Debug, Clone, Serialize)]
pub struct CoercivityReport {
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
}

/// Diagnostic for J-coercivity of `F_mu` on a family of potentials.
pub fn coercivity_diagnostic(model: &ToricModel, mu: &MeasureField, family: &[Potential]) -> Result<CoercivityReport> {
    let mut samples = Vec::with_capacity(family.len());
    for psi in family {
        let j = l_0(model, psi)? - energy(model, psi)?;
        samples.push((j, f_mu(model, mu, psi)?));
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx) * (s.0 - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Ok(CoercivityReport {
        samples,
        slope,
        intercept: my - slope * mx,
    })
}
