//! Nonnegative measures living on the nodes of a model grid.
//!
//! Mass sitting on a window-boundary node stands for mass that escapes the
//! truncated window (slopes outside the sampled range); it is reported as a
//! boundary atom.

use crate::error::{Error, Result};
use crate::model::{ModelId, OnGrid, ToricModel, ATOM_TOL, TOL_MASS};

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureField {
    model_id: ModelId,
    mass: Vec<f64>,
    boundary: Vec<usize>,
}

impl OnGrid for MeasureField {
    fn model_id(&self) -> ModelId {
        self.model_id
    }
}

// 8-point Gauss-Legendre rule on [0, 1].
const GL8_X: [f64; 8] = [
    0.019_855_071_751_231_856,
    0.101_666_761_293_186_63,
    0.237_233_795_041_835_5,
    0.408_282_678_752_175_1,
    0.591_717_321_247_824_9,
    0.762_766_204_958_164_5,
    0.898_333_238_706_813_4,
    0.980_144_928_248_768_2,
];
const GL8_W: [f64; 8] = [
    0.050_614_268_145_188_13,
    0.111_190_517_226_687_24,
    0.156_853_322_938_943_64,
    0.181_341_891_689_180_99,
    0.181_341_891_689_180_99,
    0.156_853_322_938_943_64,
    0.111_190_517_226_687_24,
    0.050_614_268_145_188_13,
];

impl MeasureField {
    /// Wraps per-node masses. Tiny negative masses (> -1e-14) are zeroed.
    pub fn from_masses(model: &ToricModel, mut mass: Vec<f64>) -> Result<Self> {
        if mass.len() != model.len() {
            return Err(Error::LengthMismatch {
                expected: model.len(),
                got: mass.len(),
            });
        }
        for (k, m) in mass.iter_mut().enumerate() {
            if !m.is_finite() {
                return Err(Error::NonFinite(k));
            }
            if *m < 0.0 {
                if *m < -1e-14 {
                    return Err(Error::NegativeMass { node: k, value: *m });
                }
                *m = 0.0;
            }
        }
        Ok(Self {
            model_id: model.id(),
            mass,
            boundary: model.boundary_nodes().to_vec(),
        })
    }

    pub(crate) fn from_raw(model: &ToricModel, mass: Vec<f64>) -> Self {
        Self {
            model_id: model.id(),
            mass,
            boundary: model.boundary_nodes().to_vec(),
        }
    }

    /// Point-quadrature discretization: `rho(x_k) * w_k` at every node.
    pub fn from_density_nodal<F: Fn([f64; 2]) -> f64>(model: &ToricModel, rho: F) -> Result<Self> {
        let mass = (0..model.len())
            .map(|k| rho(model.coords(k)) * model.quad_weights()[k])
            .collect();
        Self::from_masses(model, mass)
    }

    /// Conforming discretization for `n = 1`: node `i` receives
    /// `int hat_i(t) rho(t) dt` where `hat_i` is the piecewise-linear hat
    /// function of node `i`. The discrete Alexandrov solution of
    /// `MA(psi) = mu` then agrees with the continuous one at the nodes.
    pub fn from_density_hat<F: Fn(f64) -> f64>(model: &ToricModel, rho: F) -> Result<Self> {
        if model.dim() != 1 {
            return Err(Error::OneDimensionalOnly);
        }
        let x = model.axis();
        let mut mass = vec![0.0; x.len()];
        for c in 0..x.len() - 1 {
            let (a, b) = (x[c], x[c + 1]);
            let h = b - a;
            let (mut left, mut right) = (0.0, 0.0);
            for (s, w) in GL8_X.iter().zip(GL8_W.iter()) {
                let f = rho(a + s * h) * w * h;
                left += f * (1.0 - s);
                right += f * s;
            }
            mass[c] += left;
            mass[c + 1] += right;
        }
        Self::from_masses(model, mass)
    }

    /// Rescales to total mass one.
    pub fn normalized(&self) -> Self {
        let t = self.total();
        self.scaled(1.0 / t)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            model_id: self.model_id,
            mass: self.mass.iter().map(|m| m * s).collect(),
            boundary: self.boundary.clone(),
        }
    }

    /// Mass per node, boundary atoms included.
    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Mass of an interior node (zero for boundary nodes).
    pub fn cell_mass(&self, k: usize) -> f64 {
        if self.boundary.binary_search(&k).is_ok() {
            0.0
        } else {
            self.mass[k]
        }
    }

    /// `(node, mass)` for every window-boundary node.
    pub fn boundary_atoms(&self) -> Vec<(usize, f64)> {
        self.boundary.iter().map(|&k| (k, self.mass[k])).collect()
    }

    pub fn atom_mass(&self) -> f64 {
        self.boundary.iter().map(|&k| self.mass[k]).sum()
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn interior_total(&self) -> f64 {
        self.total() - self.atom_mass()
    }

    /// `sum_k f_k mu_k`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.mass.iter().zip(f).map(|(m, v)| m * v).sum()
    }

    /// Total variation distance on nodes.
    pub fn l1_distance(&self, other: &MeasureField) -> f64 {
        self.mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.total() - 1.0).abs() <= TOL_MASS
    }

    /// Non-pluripolar in the discrete sense: boundary atoms below `ATOM_TOL`.
    pub fn check_non_pluripolar(&self) -> Result<()> {
        let atoms = self.atom_mass();
        if atoms > ATOM_TOL {
            return Err(Error::MeasureTouchesBoundary { atoms });
        }
        Ok(())
    }

    pub fn check_probability(&self) -> Result<()> {
        if !self.is_probability() {
            return Err(Error::MassNotOne { mass: self.total() });
        }
        Ok(())
    }

    /// Convex combination `(1 - s) self + s other`.
    pub fn mix(&self, other: &MeasureField, s: f64) -> Self {
        Self {
            model_id: self.model_id,
            mass: self
                .mass
                .iter()
                .zip(&other.mass)
                .map(|(a, b)| (1.0 - s) * a + s * b)
                .collect(),
            boundary: self.boundary.clone(),
        }
    }

    /// Nodes carrying mass above `eps`.
    pub fn support(&self, eps: f64) -> Vec<usize> {
        (0..self.mass.len()).filter(|&k| self.mass[k] > eps).collect()
    }
}
