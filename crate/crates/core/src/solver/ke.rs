use super::{solve_ma, SolveOptions, SolveTrace, TraceRecord};
use crate::error::{Error, Result};
use crate::functionals::{f_minus, functional_i};
use crate::ma::{monge_ampere, reference_measure};
use crate::measure::MeasureField;
use crate::model::ToricModel;
use crate::potential::Potential;

fn require_anticanonical(model: &ToricModel) -> Result<()> {
    if model.dim() != 1 || model.degree() != 2 {
        return Err(Error::WrongDegree);
    }
    Ok(())
}

/// The measure `w e^{-psi}`, with the Jacobian `w` calibrated so that the
/// reference potential reproduces `MA(ref)` node by node. Not normalized.
pub fn canonical_measure(model: &ToricModel, psi: &Potential) -> Result<MeasureField> {
    require_anticanonical(model)?;
    model.check(psi)?;
    let m0 = reference_measure(model)?;
    let mass = m0
        .masses()
        .iter()
        .zip(model.reference_values())
        .zip(psi.values())
        .map(|((w, r), p)| w * (r - p).exp())
        .collect();
    MeasureField::from_masses(model, mass)
}

/// Translates a measure on the `n = 1` grid so that its mean coordinate is
/// zero. Each node mass moves by the same offset and is split linearly
/// between the two enclosing nodes, which preserves mass and first moment.
pub fn recenter(model: &ToricModel, mu: &MeasureField) -> Result<MeasureField> {
    if model.dim() != 1 {
        return Err(Error::OneDimensionalOnly);
    }
    let x = model.axis();
    let total = mu.total();
    let mean = mu.integrate(x) / total;
    let mut out = vec![0.0; x.len()];
    let mut j = 0;
    for (i, &m) in mu.masses().iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let y = (x[i] - mean).clamp(x[0], x[x.len() - 1]);
        while j > 0 && x[j] > y {
            j -= 1;
        }
        while j + 1 < x.len() - 1 && x[j + 1] <= y {
            j += 1;
        }
        let s = ((y - x[j]) / (x[j + 1] - x[j])).clamp(0.0, 1.0);
        out[j] += (1.0 - s) * m;
        out[j + 1] += s * m;
    }
    MeasureField::from_masses(model, out)
}

#[derive(Debug, Clone)]
pub struct KeSolution {
    pub potential: Potential,
    /// `c = -log(total canonical mass)` at the solution.
    pub c: f64,
    /// `||MA(psi) - normalized canonical measure||_1`.
    pub residual: f64,
    pub trace: SolveTrace,
    /// `F_-` per iteration.
    pub f_minus: Vec<f64>,
}

/// Fixed-point iteration `psi_{m+1} = solve_ma(normalize(e^{-psi_m}))`.
///
/// Automorphisms of P1 (translations in `t`) act on the solution set; each
/// target measure is recentered to mean zero, which selects the solution
/// whose Monge-Ampère measure is centered.
pub fn solve_ke_fano(model: &ToricModel, init: Option<&Potential>, opts: &SolveOptions) -> Result<KeSolution> {
    require_anticanonical(model)?;
    let mut psi = match init {
        Some(p) => {
            model.check(p)?;
            p.clone()
        }
        None => model.reference(),
    };
    let mut trace = SolveTrace {
        method: "ke-fixed-point".to_string(),
        records: Vec::new(),
    };
    let mut iterates = Vec::new();
    let mut fm = Vec::new();
    let tol_i = 1e-15;
    let mut iter = 0;
    loop {
        let nu = canonical_measure(model, &psi)?.normalized();
        let residual = monge_ampere(model, &psi)?.l1_distance(&nu);
        let f = f_minus(model, &psi).unwrap_or(f64::NAN);
        fm.push(f);
        trace.records.push(TraceRecord {
            iter,
            f_mu: f,
            residual_l1: residual,
            step: 1.0,
            i_to_final: f64::NAN,
        });
        iterates.push(psi.clone());
        let target = recenter(model, &nu)?;
        let (next, _) = solve_ma(model, &target, opts)?;
        let gap = functional_i(model, &next, &psi).unwrap_or(f64::INFINITY).abs();
        psi = next;
        iter += 1;
        if gap <= tol_i && residual <= opts.tol_residual {
            break;
        }
        if iter >= opts.max_iter {
            return Err(Error::NoConvergence {
                iterations: iter,
                residual,
            });
        }
    }
    let nu = canonical_measure(model, &psi)?;
    let c = -nu.total().ln();
    let residual = monge_ampere(model, &psi)?.l1_distance(&nu.normalized());
    for (rec, p) in trace.records.iter_mut().zip(&iterates) {
        rec.i_to_final = functional_i(model, p, &psi).unwrap_or(f64::NAN);
    }
    Ok(KeSolution {
        potential: psi,
        c,
        residual,
        trace,
        f_minus: fm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_model;

    #[test]
    fn calibration_reproduces_reference_volume() {
        let m = make_model(1, 2, 20.0, 512).unwrap();
        let nu = canonical_measure(&m, &m.reference()).unwrap();
        let m0 = monge_ampere(&m, &m.reference()).unwrap();
        assert!(nu.l1_distance(&m0) < 1e-14);
        let shifted = canonical_measure(&m, &m.reference().shifted(1.5)).unwrap();
        assert!(shifted.l1_distance(&m0.scaled((-1.5f64).exp())) < 1e-14);
    }

    #[test]
    fn recentering_preserves_mass_and_zeroes_mean() {
        let m = make_model(1, 2, 20.0, 512).unwrap();
        let mu = MeasureField::from_density_hat(&m, |t| (-(t - 1.3) * (t - 1.3)).exp()).unwrap();
        let c = recenter(&m, &mu).unwrap();
        assert!((c.total() - mu.total()).abs() < 1e-14);
        assert!(c.integrate(m.axis()).abs() < 1e-12);
    }
}
