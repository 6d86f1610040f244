//! Grid samples of convex potentials.
//!
//! A [`Potential`] stores `psi = psi_FS + 2 phi` where `phi` is the invariant
//! weight relative to the reference. The factor 2 comes from the metric
//! convention `e^{-2 phi}`; [`Potential::weight`] recovers `phi`.

use std::ops::{Add, Sub};

use crate::error::{Error, Result};
use crate::model::{ModelId, OnGrid, ToricModel};

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    model_id: ModelId,
    values: Vec<f64>,
}

impl OnGrid for Potential {
    fn model_id(&self) -> ModelId {
        self.model_id
    }
}

impl Potential {
    /// Wraps node values; every value must be finite.
    pub fn new(model: &ToricModel, values: Vec<f64>) -> Result<Self> {
        if values.len() != model.len() {
            return Err(Error::LengthMismatch {
                expected: model.len(),
                got: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        Ok(Self {
            model_id: model.id(),
            values,
        })
    }

    pub(crate) fn from_raw(model_id: ModelId, values: Vec<f64>) -> Self {
        Self { model_id, values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The weight `phi = (psi - psi_FS) / 2` at every node.
    pub fn weight(&self, model: &ToricModel) -> Vec<f64> {
        self.values
            .iter()
            .zip(model.reference_values())
            .map(|(p, r)| 0.5 * (p - r))
            .collect()
    }

    /// Potential whose weight is `phi` (inverse of [`Potential::weight`]).
    pub fn from_weight(model: &ToricModel, phi: &[f64]) -> Result<Self> {
        let values = phi
            .iter()
            .zip(model.reference_values())
            .map(|(f, r)| r + 2.0 * f)
            .collect();
        Self::new(model, values)
    }

    /// Adds `c` to the potential, i.e. `c / 2` to the weight.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            model_id: self.model_id,
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    /// Adds the constant `c` to the weight.
    pub fn shift_weight(&self, c: f64) -> Self {
        self.shifted(2.0 * c)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            model_id: self.model_id,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// `(1 - t) self + t other`, nodewise.
    pub fn lerp(&self, other: &Potential, t: f64) -> Self {
        debug_assert_eq!(self.model_id, other.model_id);
        Self {
            model_id: self.model_id,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            model_id: self.model_id,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn sup_distance(&self, other: &Potential) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Sup distance after removing the best additive constant.
    pub fn sup_distance_mod_constants(&self, other: &Potential) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
                (lo.min(d), hi.max(d))
            });
        0.5 * (hi - lo)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Add<f64> for &Potential {
    type Output = Potential;
    fn add(self, c: f64) -> Potential {
        self.shifted(c)
    }
}

impl Sub<&Potential> for &Potential {
    type Output = Vec<f64>;
    fn sub(self, other: &Potential) -> Vec<f64> {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_model;

    #[test]
    fn weight_round_trip() {
        let m = make_model(1, 1, 20.0, 64).unwrap();
        let psi = m.reference().shifted(3.0);
        let phi = psi.weight(&m);
        assert!(phi.iter().all(|&f| (f - 1.5).abs() < 1e-14));
        let back = Potential::from_weight(&m, &phi).unwrap();
        assert!(back.sup_distance(&psi) < 1e-13);
    }

    #[test]
    fn rejects_non_finite() {
        let m = make_model(1, 1, 20.0, 16).unwrap();
        let mut v = m.reference_values().to_vec();
        v[3] = f64::NAN;
        assert_eq!(Potential::new(&m, v).unwrap_err(), Error::NonFinite(3));
        assert!(matches!(
            Potential::new(&m, vec![0.0; 3]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn distance_mod_constants() {
        let m = make_model(1, 1, 20.0, 16).unwrap();
        let a = m.reference();
        assert!(a.sup_distance_mod_constants(&a.shifted(-7.0)) < 1e-14);
    }
}
