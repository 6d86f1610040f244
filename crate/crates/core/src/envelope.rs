//! Psh envelopes and extremal functions.

use crate::error::{Error, Result};
use crate::hull::{envelope_1d, envelope_2d, Grid2};
use crate::model::ToricModel;
use crate::potential::Potential;

/// A closed union of grid cells, stored as a node mask.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactSet {
    mask: Vec<bool>,
}

impl CompactSet {
    pub fn from_mask(model: &ToricModel, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != model.len() {
            return Err(Error::LengthMismatch {
                expected: model.len(),
                got: mask.len(),
            });
        }
        Ok(Self { mask })
    }

    /// Nodes whose coordinates satisfy `pred`.
    pub fn from_predicate<F: Fn([f64; 2]) -> bool>(model: &ToricModel, pred: F) -> Self {
        Self {
            mask: (0..model.len()).map(|k| pred(model.coords(k))).collect(),
        }
    }

    pub fn whole(model: &ToricModel) -> Self {
        Self {
            mask: vec![true; model.len()],
        }
    }

    /// `{ a <= t <= b }` along the first axis (all of the second axis).
    pub fn slab(model: &ToricModel, a: f64, b: f64) -> Self {
        Self::from_predicate(model, |x| x[0] >= a && x[0] <= b)
    }

    /// The closed disk `|z| <= R` (radial in every coordinate), i.e.
    /// `t <= 2 log R`; for `n = 2` the polydisk.
    pub fn disk(model: &ToricModel, radius: f64) -> Self {
        let r = 2.0 * radius.ln();
        let n = model.dim();
        Self::from_predicate(model, |x| x[0] <= r && (n == 1 || x[1] <= r))
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, k: usize) -> bool {
        self.mask[k]
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_subset_of(&self, other: &CompactSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&k| self.mask[k]).collect()
    }
}

/// Largest potential below `u` (entries may be `+inf`) with convex hull
/// equal to itself and slopes in the polytope.
pub fn psh_envelope(model: &ToricModel, u: &[f64]) -> Result<Potential> {
    if u.len() != model.len() {
        return Err(Error::LengthMismatch {
            expected: model.len(),
            got: u.len(),
        });
    }
    if let Some(k) = u.iter().position(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
        return Err(Error::NonFinite(k));
    }
    let values = if model.dim() == 1 {
        envelope_1d(model.axis(), u, 0.0, model.degree_f64())?
    } else {
        let grid = Grid2 { axis: model.axis() };
        envelope_2d(&grid, u, &model.polytope_vertices())?
    };
    Potential::new(model, values)
}

/// Envelope of a potential (projection onto the psh cone).
pub fn project(model: &ToricModel, psi: &Potential) -> Result<Potential> {
    model.check(psi)?;
    psh_envelope(model, psi.values())
}

/// `P_K v`: envelope of the obstacle equal to the reference plus the weight
/// `v` on `K` (in potential units, `psi = ref + 2 v`) and `+inf` elsewhere.
pub fn extremal_function(model: &ToricModel, k: &CompactSet, v: &[f64]) -> Result<Potential> {
    if k.is_empty() {
        return Err(Error::EmptySet);
    }
    if v.len() != model.len() {
        return Err(Error::LengthMismatch {
            expected: model.len(),
            got: v.len(),
        });
    }
    let r = model.reference_values();
    let mut u = vec![f64::INFINITY; model.len()];
    for i in k.indices() {
        if !v[i].is_finite() {
            return Err(Error::NonFinite(i));
        }
        u[i] = r[i] + 2.0 * v[i];
    }
    psh_envelope(model, &u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_model;

    #[test]
    fn reference_is_fixed() {
        let m = make_model(1, 1, 20.0, 512).unwrap();
        let p = psh_envelope(&m, m.reference_values()).unwrap();
        assert_eq!(p.values(), m.reference_values());
        let m2 = make_model(2, 1, 20.0, 16).unwrap();
        let p2 = psh_envelope(&m2, m2.reference_values()).unwrap();
        assert_eq!(p2.values(), m2.reference_values());
    }

    #[test]
    fn zero_input_gives_zero() {
        let m = make_model(1, 2, 20.0, 64).unwrap();
        let p = psh_envelope(&m, &vec![0.0; m.len()]).unwrap();
        assert!(p.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_set_is_rejected() {
        let m = make_model(1, 1, 20.0, 64).unwrap();
        let k = CompactSet::from_predicate(&m, |_| false);
        assert_eq!(
            extremal_function(&m, &k, &vec![0.0; m.len()]).unwrap_err(),
            Error::EmptySet
        );
    }

    #[test]
    fn whole_window_gives_reference() {
        let m = make_model(1, 1, 20.0, 256).unwrap();
        let p = extremal_function(&m, &CompactSet::whole(&m), &vec![0.0; m.len()]).unwrap();
        assert_eq!(p.values(), m.reference_values());
    }

    #[test]
    fn idempotent() {
        let m = make_model(1, 1, 20.0, 128).unwrap();
        let u: Vec<f64> = m.axis().iter().map(|t| (t * 0.7).sin() + 0.3 * t.abs()).collect();
        let p = psh_envelope(&m, &u).unwrap();
        let q = psh_envelope(&m, p.values()).unwrap();
        assert_eq!(p, q);
    }
}
