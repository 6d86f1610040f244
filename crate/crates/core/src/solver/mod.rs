//! Variational Monge-Ampère solvers and the Fano Kähler-Einstein solver.
//!
//! Solvers implement [`MaSolver`] and are looked up by name through
//! [`ma_solver`]: `direct` (exact cumulative integration, `n = 1`),
//! `ascent` (projected preconditioned ascent of `F_mu`) and `auto`.

mod ascent;
mod direct;
mod ke;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use ascent::{Ascent, Smoother};
pub use direct::Direct;
pub use ke::{canonical_measure, recenter, solve_ke_fano, KeSolution};

use crate::error::{Error, Result};
use crate::functionals::{energy_raw, functional_i, l_0};
use crate::ma::reference_measure;
use crate::measure::MeasureField;
use crate::model::{ToricModel, ATOM_TOL};
use crate::potential::Potential;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Stopping tolerance on `||MA(psi) - mu||_1`.
    pub tol_residual: f64,
    pub step0: f64,
    pub shrink: f64,
    pub max_tries: usize,
    pub seed: u64,
    /// Registered solver name.
    pub method: String,
    /// Screening constant of the smoothing operator.
    pub screening: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iter: 400,
            tol_residual: 1e-9,
            step0: 1.0,
            shrink: 0.5,
            max_tries: 40,
            seed: 0,
            method: "auto".to_string(),
            screening: 1e-7,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_residual > 0.0) {
            return Err(Error::InvalidModel("tol_residual must be positive".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidModel("shrink must lie in (0, 1)".into()));
        }
        if !(self.step0 > 0.0) {
            return Err(Error::InvalidModel("step0 must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub f_mu: f64,
    pub residual_l1: f64,
    pub step: f64,
    pub i_to_final: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolveTrace {
    pub method: String,
    pub records: Vec<TraceRecord>,
}

impl SolveTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,F_mu,residual_l1,step,I_to_final\n");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{:.17e},{:.17e},{:.17e},{:.17e}",
                r.iter, r.f_mu, r.residual_l1, r.step, r.i_to_final
            );
        }
        s
    }

    pub fn final_residual(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.residual_l1)
    }

    /// True when accepted steps never decrease `F_mu`.
    pub fn is_ascending(&self) -> bool {
        self.records.windows(2).all(|w| w[1].f_mu >= w[0].f_mu)
    }
}

/// An algorithm solving `MA(psi) = mu`.
pub trait MaSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(
        &self,
        model: &ToricModel,
        mu: &MeasureField,
        init: Option<&Potential>,
        opts: &SolveOptions,
    ) -> Result<(Potential, SolveTrace)>;
}

pub const MA_SOLVERS: &[&str] = &["auto", "direct", "ascent"];

/// Looks up a solver by name; `auto` picks `direct` for `n = 1`.
pub fn ma_solver(name: &str, dim: usize) -> Result<Box<dyn MaSolver>> {
    match name {
        "direct" => Ok(Box::new(Direct)),
        "ascent" => Ok(Box::new(Ascent)),
        "auto" if dim == 1 => Ok(Box::new(Direct)),
        "auto" => Ok(Box::new(Ascent)),
        _ => Err(Error::Unknown {
            kind: "solver",
            name: name.to_string(),
        }),
    }
}

/// Solves `MA(psi) = mu`, normalized by `L_0(psi) = 0`.
pub fn solve_ma(model: &ToricModel, mu: &MeasureField, opts: &SolveOptions) -> Result<(Potential, SolveTrace)> {
    solve_ma_from(model, mu, None, opts)
}

pub fn solve_ma_from(
    model: &ToricModel,
    mu: &MeasureField,
    init: Option<&Potential>,
    opts: &SolveOptions,
) -> Result<(Potential, SolveTrace)> {
    opts.validate()?;
    ma_solver(&opts.method, model.dim())?.solve(model, mu, init, opts)
}

/// Rejects measures that are not probabilities, or that charge the two
/// outermost node layers of the window.
pub(crate) fn check_solvable(model: &ToricModel, mu: &MeasureField) -> Result<()> {
    model.check(mu)?;
    mu.check_probability()?;
    let m = model.cells();
    let n_axis = m + 1;
    let near = |i: usize| i < 2 || i > m - 2;
    let mut edge = 0.0;
    for k in 0..model.len() {
        let outer = if model.dim() == 1 {
            near(k)
        } else {
            near(k / n_axis) || near(k % n_axis)
        };
        if outer {
            edge += mu.masses()[k];
        }
    }
    if edge > ATOM_TOL {
        return Err(Error::MeasureTouchesBoundary { atoms: edge });
    }
    Ok(())
}

/// `F_mu` without the full-mass and probability checks.
pub(crate) fn f_mu_raw(model: &ToricModel, mu: &MeasureField, psi: &Potential) -> Result<f64> {
    Ok(energy_raw(model, psi)? - mu.integrate(&psi.weight(model)))
}

/// Shifts the weight so that `L_0 = 0`.
pub fn normalize_l0(model: &ToricModel, psi: &Potential) -> Result<Potential> {
    let c = l_0(model, psi)?;
    let total = reference_measure(model)?.total();
    Ok(psi.shift_weight(-c / total))
}

/// Fills the `I_to_final` column.
pub(crate) fn finish_trace(model: &ToricModel, trace: &mut SolveTrace, iterates: &[Potential], last: &Potential) {
    for (rec, psi) in trace.records.iter_mut().zip(iterates) {
        rec.i_to_final = functional_i(model, psi, last).unwrap_or(f64::NAN);
    }
}

/// Outcome of [`maximizing_sequence_diagnostic`].
#[derive(Debug, Clone, Serialize)]
pub struct MaximizingReport {
    pub f_values: Vec<f64>,
    pub i_to_solution: Vec<f64>,
    pub f_max: f64,
    /// `F_mu` nondecreasing along the sequence.
    pub f_increasing: bool,
    /// `I(psi_j, psi*)` nonincreasing on the tail where `F_mu` increases.
    pub i_decreasing_tail: bool,
    pub flags: Vec<String>,
}

/// Evaluates `F_mu(psi_j)` and `I(psi_j, psi*)` along a sequence.
pub fn maximizing_sequence_diagnostic(
    model: &ToricModel,
    mu: &MeasureField,
    sequence: &[Potential],
    opts: &SolveOptions,
) -> Result<MaximizingReport> {
    let (star, _) = solve_ma(model, mu, opts)?;
    let f_max = f_mu_raw(model, mu, &star)?;
    let mut f_values = Vec::new();
    let mut i_to_solution = Vec::new();
    for psi in sequence {
        f_values.push(f_mu_raw(model, mu, psi)?);
        i_to_solution.push(functional_i(model, psi, &star).unwrap_or(f64::NAN));
    }
    let f_increasing = f_values.windows(2).all(|w| w[1] >= w[0] - 1e-14);
    let half = sequence.len() / 2;
    let i_decreasing_tail = i_to_solution[half..]
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-14);
    let mut flags = Vec::new();
    if !f_increasing {
        flags.push("F_mu decreasing along the sequence".to_string());
    }
    if !i_decreasing_tail {
        flags.push("I to the solution not decreasing on the tail".to_string());
    }
    Ok(MaximizingReport {
        f_values,
        i_to_solution,
        f_max,
        f_increasing,
        i_decreasing_tail,
        flags,
    })
}
