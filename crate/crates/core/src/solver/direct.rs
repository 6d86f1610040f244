use super::{check_solvable, f_mu_raw, normalize_l0, MaSolver, SolveOptions, SolveTrace, TraceRecord};
use crate::error::{Error, Result};
use crate::ma::monge_ampere;
use crate::measure::MeasureField;
use crate::model::ToricModel;
use crate::potential::Potential;

/// Cumulative integration for `n = 1`: the slope on cell `i` is
/// `d * mu([x_0, x_i])`, so node masses are reproduced exactly.
pub struct Direct;

impl MaSolver for Direct {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn solve(
        &self,
        model: &ToricModel,
        mu: &MeasureField,
        _init: Option<&Potential>,
        _opts: &SolveOptions,
    ) -> Result<(Potential, SolveTrace)> {
        if model.dim() != 1 {
            return Err(Error::OneDimensionalOnly);
        }
        check_solvable(model, mu)?;
        let x = model.axis();
        let d = model.degree_f64();
        let m = mu.masses();
        let mut values = Vec::with_capacity(x.len());
        let mut cum = 0.0;
        let mut v = 0.0;
        values.push(v);
        for i in 0..x.len() - 1 {
            cum += m[i];
            let s = (d * cum).min(d);
            v += s * (x[i + 1] - x[i]);
            values.push(v);
        }
        let psi = normalize_l0(model, &Potential::new(model, values)?)?;
        let residual = monge_ampere(model, &psi)?.l1_distance(mu);
        let trace = SolveTrace {
            method: self.name().to_string(),
            records: vec![TraceRecord {
                iter: 0,
                f_mu: f_mu_raw(model, mu, &psi)?,
                residual_l1: residual,
                step: 0.0,
                i_to_final: 0.0,
            }],
        };
        Ok((psi, trace))
    }
}
