//! Logarithmic potentials, equilibrium measures and capacities on P1.
//!
//! All measures are radial. A node mass at `t_j` stands for the uniform
//! measure on the circle `|w| = e^{t_j / 2}`, whose logarithmic potential is
//! `log max(|z|, |w|) = max(t, t_j) / 2`.

use serde::Serialize;

use crate::envelope::{extremal_function, psh_envelope, CompactSet};
use crate::error::{Error, Result};
use crate::functionals::energy;
use crate::ma::{monge_ampere, reference_measure};
use crate::measure::MeasureField;
use crate::model::{ToricModel, ATOM_TOL};
use crate::potential::Potential;

/// `lambda = positive - negative`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedRadialMeasure {
    pub positive: MeasureField,
    pub negative: MeasureField,
}

impl SignedRadialMeasure {
    pub fn new(model: &ToricModel, positive: MeasureField, negative: MeasureField) -> Result<Self> {
        if model.dim() != 1 {
            return Err(Error::OneDimensionalOnly);
        }
        model.check(&positive)?;
        model.check(&negative)?;
        Ok(Self { positive, negative })
    }

    pub fn positive(model: &ToricModel, mu: MeasureField) -> Result<Self> {
        let zero = mu.scaled(0.0);
        Self::new(model, mu, zero)
    }

    /// `mu - omega` with `omega = MA(ref)`.
    pub fn minus_reference(model: &ToricModel, mu: MeasureField) -> Result<Self> {
        let omega = reference_measure(model)?;
        Self::new(model, mu, omega)
    }

    /// Signed node masses.
    pub fn masses(&self) -> Vec<f64> {
        self.positive
            .masses()
            .iter()
            .zip(self.negative.masses())
            .map(|(a, b)| a - b)
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.positive.total() - self.negative.total()
    }

    fn check_compact(&self) -> Result<()> {
        let atoms = self.positive.atom_mass() + self.negative.atom_mass();
        if atoms > ATOM_TOL {
            return Err(Error::NonCompactSupport);
        }
        Ok(())
    }
}

/// `U_lambda` at every node, by prefix sums.
fn potential_at_nodes(model: &ToricModel, lam: &[f64]) -> Vec<f64> {
    let x = model.axis();
    let n = x.len();
    // below[i] = sum_{j <= i} lam_j, above[i] = sum_{j > i} lam_j t_j
    let mut below = vec![0.0; n];
    let mut acc = 0.0;
    for i in 0..n {
        acc += lam[i];
        below[i] = acc;
    }
    let mut above = vec![0.0; n];
    let mut acc = 0.0;
    for i in (0..n).rev() {
        above[i] = acc;
        acc += lam[i] * x[i];
    }
    (0..n).map(|i| 0.5 * (x[i] * below[i] + above[i])).collect()
}

/// Logarithmic potential `U_lambda` at `|z| = e^{t/2}`.
pub fn log_potential(model: &ToricModel, lam: &SignedRadialMeasure, t: f64) -> Result<f64> {
    let tw = model.half_width();
    if !(t.abs() <= tw) {
        return Err(Error::OutsideWindow(t));
    }
    Ok(lam
        .masses()
        .iter()
        .zip(model.axis())
        .map(|(m, tj)| 0.5 * m * t.max(*tj))
        .sum())
}

/// `I(lambda, mu) = -int U_lambda dmu`.
pub fn log_energy_pair(model: &ToricModel, lam: &SignedRadialMeasure, mu: &SignedRadialMeasure) -> Result<f64> {
    lam.check_compact()?;
    mu.check_compact()?;
    let u = potential_at_nodes(model, &lam.masses());
    Ok(-mu.masses().iter().zip(&u).map(|(m, v)| m * v).sum::<f64>())
}

/// `I(lambda) = -int U_lambda dlambda`.
pub fn log_energy(model: &ToricModel, lam: &SignedRadialMeasure) -> Result<f64> {
    log_energy_pair(model, lam, lam)
}

/// A compact set with an external field `v` (weight units) on it.
#[derive(Debug, Clone)]
pub struct WeightedCompact {
    pub k: CompactSet,
    pub v: Vec<f64>,
    pub k_descriptor: String,
    pub v_descriptor: String,
}

impl WeightedCompact {
    pub fn new(model: &ToricModel, k: CompactSet, v: Vec<f64>) -> Result<Self> {
        if v.len() != model.len() {
            return Err(Error::LengthMismatch {
                expected: model.len(),
                got: v.len(),
            });
        }
        if k.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(Self {
            k,
            v,
            k_descriptor: String::from("custom"),
            v_descriptor: String::from("custom"),
        })
    }

    /// The disk `|z| <= R` with `v = 0`.
    pub fn disk(model: &ToricModel, radius: f64) -> Result<Self> {
        let mut w = Self::new(model, CompactSet::disk(model, radius), vec![0.0; model.len()])?;
        w.k_descriptor = format!("disk R={radius}");
        w.v_descriptor = "0".into();
        Ok(w)
    }

    /// The annulus `a <= log|z|^2 <= b` with `v = 0`.
    pub fn annulus(model: &ToricModel, a: f64, b: f64) -> Result<Self> {
        let mut w = Self::new(model, CompactSet::slab(model, a, b), vec![0.0; model.len()])?;
        w.k_descriptor = format!("annulus t in [{a}, {b}]");
        w.v_descriptor = "0".into();
        Ok(w)
    }
}

#[derive(Debug, Clone)]
pub struct Equilibrium {
    /// `P_K v`.
    pub potential: Potential,
    pub measure: MeasureField,
    /// `E(P_K v)`.
    pub energy: f64,
}

/// Equilibrium weight, measure and energy of `(K, v)`.
pub fn equilibrium(model: &ToricModel, kv: &WeightedCompact) -> Result<Equilibrium> {
    let potential = extremal_function(model, &kv.k, &kv.v)?;
    let measure = monge_ampere(model, &potential)?;
    let energy = energy(model, &potential)?;
    Ok(Equilibrium {
        potential,
        measure,
        energy,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityReport {
    #[serde(rename = "K_descriptor")]
    pub k_descriptor: String,
    pub v_descriptor: String,
    #[serde(rename = "C_e")]
    pub c_e: f64,
    #[serde(rename = "T_alex")]
    pub t_alex: f64,
    #[serde(rename = "Cap")]
    pub cap: f64,
    #[serde(rename = "E_eq")]
    pub e_eq: f64,
    #[serde(rename = "sup_PKv")]
    pub sup_pkv: f64,
}

/// Electrostatic capacity `C_e = exp(-((n+1)/n) E_eq)` and Alexander-Taylor
/// capacity `T = exp(-sup (P_K v - V))`.
pub fn capacities(model: &ToricModel, kv: &WeightedCompact) -> Result<(f64, f64)> {
    let eq = equilibrium(model, kv)?;
    let n = model.dim() as f64;
    let c_e = (-(n + 1.0) / n * eq.energy).exp();
    let sup = sup_weight(model, &eq.potential);
    Ok((c_e, (-sup).exp()))
}

/// `sup (psi - ref) / 2`.
pub fn sup_weight(model: &ToricModel, psi: &Potential) -> f64 {
    psi.weight(model).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Full capacity report for `(K, v)`.
pub fn capacity_report(model: &ToricModel, kv: &WeightedCompact) -> Result<CapacityReport> {
    let eq = equilibrium(model, kv)?;
    let n = model.dim() as f64;
    let sup = sup_weight(model, &eq.potential);
    Ok(CapacityReport {
        k_descriptor: kv.k_descriptor.clone(),
        v_descriptor: kv.v_descriptor.clone(),
        c_e: (-(n + 1.0) / n * eq.energy).exp(),
        t_alex: (-sup).exp(),
        cap: ma_capacity(model, &kv.k)?.0,
        e_eq: eq.energy,
        sup_pkv: sup,
    })
}

/// Relative extremal function `h_K`: envelope of the obstacle `V` off `K`
/// and `V - 1` on `K` (weight units).
pub fn relative_extremal(model: &ToricModel, k: &CompactSet) -> Result<Potential> {
    if k.is_empty() {
        return Err(Error::EmptySet);
    }
    let u: Vec<f64> = model
        .reference_values()
        .iter()
        .enumerate()
        .map(|(i, r)| if k.contains(i) { r - 2.0 } else { *r })
        .collect();
    psh_envelope(model, &u)
}

/// Monge-Ampère capacity `Cap(K) = int_K MA(h_K)`, together with the second
/// formula `int (V - h_K) MA(h_K)`.
pub fn ma_capacity(model: &ToricModel, k: &CompactSet) -> Result<(f64, f64)> {
    let h = relative_extremal(model, k)?;
    let ma = monge_ampere(model, &h)?;
    let on_k: f64 = k.indices().iter().map(|&i| ma.masses()[i]).sum();
    let phi = h.weight(model);
    let pairing = -ma.integrate(&phi);
    Ok((on_k, pairing))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_model;

    #[test]
    fn circle_potential() {
        let m = make_model(1, 1, 20.0, 256).unwrap();
        let mut mass = vec![0.0; m.len()];
        let j = m.node_at(0.0).unwrap() + 20;
        mass[j] = 1.0;
        let lam = SignedRadialMeasure::positive(&m, MeasureField::from_masses(&m, mass).unwrap()).unwrap();
        let t = m.axis()[j] + 3.0;
        assert!((log_potential(&m, &lam, t).unwrap() - t / 2.0).abs() < 1e-15);
        assert!(log_potential(&m, &lam, 25.0).is_err());
    }

    #[test]
    fn window_capacity_is_one() {
        let m = make_model(1, 1, 20.0, 512).unwrap();
        let (cap, pairing) = ma_capacity(&m, &CompactSet::whole(&m)).unwrap();
        assert!((cap - 1.0).abs() < 1e-12);
        assert!((pairing - 1.0).abs() < 1e-12);
    }
}
