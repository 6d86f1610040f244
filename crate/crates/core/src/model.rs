//! Discretized torus-invariant models of P1 and P2.
//!
//! A point of the open torus orbit is recorded through the logarithmic
//! coordinate `t = log|z|^2` (one per factor). Invariant weights become convex
//! functions of `t`, and their Monge-Ampere measures become Alexandrov
//! measures whose gradient images fill the moment polytope: the interval
//! `[0, d]` for `n = 1` and the simplex `{p >= 0, p1 + p2 <= d}` for `n = 2`.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::potential::Potential;

/// Hull idempotence tolerance.
pub const TOL_HULL: f64 = 1e-10;
/// Mass bookkeeping tolerance.
pub const TOL_MASS: f64 = 1e-8;
/// Largest boundary atom a measure may carry and still count as non-pluripolar.
pub const ATOM_TOL: f64 = 1e-8;
/// Allowed mismatch between reference slopes at the window ends and the polytope.
pub const SLOPE_TOL: f64 = 1e-6;

/// Identifies the grid a potential or measure was sampled on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelId(pub u64);

/// A per-axis quadrature rule, selected by name.
pub trait QuadratureRule: Send + Sync {
    fn name(&self) -> &'static str;
    /// Weights for the nodes of one axis; they must sum to the axis length.
    fn weights(&self, axis: &[f64]) -> Result<Vec<f64>>;
}

struct Trapezoid;

impl QuadratureRule for Trapezoid {
    fn name(&self) -> &'static str {
        "trapezoid"
    }

    fn weights(&self, axis: &[f64]) -> Result<Vec<f64>> {
        let mut w = vec![0.0; axis.len()];
        for i in 0..axis.len() - 1 {
            let h = axis[i + 1] - axis[i];
            w[i] += 0.5 * h;
            w[i + 1] += 0.5 * h;
        }
        Ok(w)
    }
}

struct Simpson;

impl QuadratureRule for Simpson {
    fn name(&self) -> &'static str {
        "simpson"
    }

    fn weights(&self, axis: &[f64]) -> Result<Vec<f64>> {
        let m = axis.len() - 1;
        if m % 2 != 0 {
            return Err(Error::InvalidModel(
                "simpson quadrature needs an even number of cells".into(),
            ));
        }
        let mut w = vec![0.0; axis.len()];
        for pair in (0..m).step_by(2) {
            let (a, b, c) = (axis[pair], axis[pair + 1], axis[pair + 2]);
            // Simpson on a possibly uneven pair of cells.
            let h0 = b - a;
            let h1 = c - b;
            let s = h0 + h1;
            w[pair] += s / 6.0 * (2.0 - h1 / h0);
            w[pair + 1] += s / 6.0 * s * s / (h0 * h1);
            w[pair + 2] += s / 6.0 * (2.0 - h0 / h1);
        }
        Ok(w)
    }
}

/// Looks up a quadrature rule by name.
pub fn quadrature_rule(name: &str) -> Result<Box<dyn QuadratureRule>> {
    match name {
        "trapezoid" => Ok(Box::new(Trapezoid)),
        "simpson" => Ok(Box::new(Simpson)),
        other => Err(Error::Unknown {
            kind: "quadrature rule",
            name: other.to_string(),
        }),
    }
}

/// Names accepted by [`quadrature_rule`].
pub const QUADRATURE_RULES: &[&str] = &["trapezoid", "simpson"];

/// Parameters that fully determine a model.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub dim: usize,
    pub degree: u32,
    pub half_width: f64,
    pub cells: usize,
    #[serde(default = "default_quadrature")]
    pub quadrature: String,
    /// Coordinates that must appear exactly among the grid nodes.
    #[serde(default)]
    pub anchors: Vec<f64>,
}

fn default_quadrature() -> String {
    "trapezoid".to_string()
}

impl ModelSpec {
    pub fn new(dim: usize, degree: u32, half_width: f64, cells: usize) -> Self {
        Self {
            dim,
            degree,
            half_width,
            cells,
            quadrature: default_quadrature(),
            anchors: Vec::new(),
        }
    }

    pub fn with_anchors(mut self, anchors: &[f64]) -> Self {
        self.anchors = anchors.to_vec();
        self
    }

    pub fn build(&self) -> Result<ToricModel> {
        ToricModel::from_spec(self)
    }
}

#[derive(Debug)]
struct ModelData {
    spec: ModelSpec,
    id: ModelId,
    axis: Vec<f64>,
    axis_weights: Vec<f64>,
    quad_weights: Vec<f64>,
    reference: Vec<f64>,
    boundary: Vec<usize>,
    is_boundary: Vec<bool>,
    reference_ma: std::sync::OnceLock<crate::measure::MeasureField>,
}

/// The discretized geometry: grid, quadrature, polytope and reference potential.
///
/// Cheap to clone; the data is shared.
#[derive(Debug, Clone)]
pub struct ToricModel {
    inner: Arc<ModelData>,
}

/// Builds a model with the default trapezoid quadrature.
pub fn make_model(dim: usize, degree: u32, half_width: f64, cells: usize) -> Result<ToricModel> {
    ModelSpec::new(dim, degree, half_width, cells).build()
}

/// Numerically stable `log(1 + e^x)`.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Numerically stable `log(1 + e^a + e^b)`.
pub fn softplus2(a: f64, b: f64) -> f64 {
    let m = 0.0f64.max(a).max(b);
    m + ((-m).exp() + (a - m).exp() + (b - m).exp()).ln()
}

impl ToricModel {
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        if spec.dim != 1 && spec.dim != 2 {
            return Err(Error::InvalidDimension(spec.dim));
        }
        if spec.degree == 0 {
            return Err(Error::InvalidModel("degree must be positive".into()));
        }
        if !(spec.half_width > 0.0) || !spec.half_width.is_finite() {
            return Err(Error::InvalidModel("window half-width must be positive".into()));
        }
        if spec.cells < 16 {
            return Err(Error::InvalidModel("need at least 16 cells per axis".into()));
        }
        let m = spec.cells;
        let tw = spec.half_width;
        let h = 2.0 * tw / m as f64;
        let mut axis: Vec<f64> = (0..=m).map(|i| -tw + h * i as f64).collect();
        axis[m] = tw;
        for &a in &spec.anchors {
            if !(a > -tw && a < tw) {
                return Err(Error::InvalidModel(format!("anchor {a} outside the window")));
            }
            let i = ((a + tw) / h).round() as usize;
            let i = i.clamp(1, m - 1);
            axis[i] = a;
        }
        if axis.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidModel("anchors collide on one cell".into()));
        }
        let rule = quadrature_rule(&spec.quadrature)?;
        let axis_weights = rule.weights(&axis)?;
        let d = spec.degree as f64;
        let n_axis = m + 1;
        let (quad_weights, reference, boundary, is_boundary) = if spec.dim == 1 {
            let reference = axis.iter().map(|&t| d * softplus(t)).collect();
            let mut isb = vec![false; n_axis];
            isb[0] = true;
            isb[m] = true;
            (axis_weights.clone(), reference, vec![0, m], isb)
        } else {
            let mut qw = Vec::with_capacity(n_axis * n_axis);
            let mut reference = Vec::with_capacity(n_axis * n_axis);
            let mut boundary = Vec::new();
            let mut isb = Vec::with_capacity(n_axis * n_axis);
            for i in 0..n_axis {
                for j in 0..n_axis {
                    qw.push(axis_weights[i] * axis_weights[j]);
                    reference.push(d * softplus2(axis[i], axis[j]));
                    let b = i == 0 || j == 0 || i == m || j == m;
                    if b {
                        boundary.push(i * n_axis + j);
                    }
                    isb.push(b);
                }
            }
            (qw, reference, boundary, isb)
        };
        let mut hasher = DefaultHasher::new();
        spec.dim.hash(&mut hasher);
        spec.degree.hash(&mut hasher);
        for a in &axis {
            a.to_bits().hash(&mut hasher);
        }
        spec.quadrature.hash(&mut hasher);
        let model = ToricModel {
            inner: Arc::new(ModelData {
                spec: spec.clone(),
                id: ModelId(hasher.finish()),
                axis,
                axis_weights,
                quad_weights,
                reference,
                boundary,
                is_boundary,
                reference_ma: std::sync::OnceLock::new(),
            }),
        };
        model.check_window()?;
        Ok(model)
    }

    /// Rejects windows whose reference slopes stop short of the polytope.
    fn check_window(&self) -> Result<()> {
        let d = self.degree_f64();
        let r = &self.inner.reference;
        let x = &self.inner.axis;
        let m = self.cells();
        let mut gap: f64 = 0.0;
        if self.dim() == 1 {
            gap = gap.max((r[1] - r[0]) / (x[1] - x[0]));
            gap = gap.max(d - (r[m] - r[m - 1]) / (x[m] - x[m - 1]));
        } else {
            let n = m + 1;
            for j in 0..n {
                // face p1 = 0 along the left edge, p2 = 0 along the bottom edge
                gap = gap.max((r[n + j] - r[j]) / (x[1] - x[0]));
                gap = gap.max((r[j * n + 1] - r[j * n]) / (x[1] - x[0]));
            }
            for j in 1..n {
                // face p1 + p2 = d along the right and top edges, probed diagonally
                let right = m * n + j;
                let top = j * n + m;
                let h = x[m] - x[m - 1];
                gap = gap.max(d - (r[right] - r[right - n - 1]) / h);
                gap = gap.max(d - (r[top] - r[top - n - 1]) / h);
            }
        }
        if gap > SLOPE_TOL {
            return Err(Error::WindowTooSmall { gap, tol: SLOPE_TOL });
        }
        Ok(())
    }

    pub fn id(&self) -> ModelId {
        self.inner.id
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.inner.spec
    }

    pub fn dim(&self) -> usize {
        self.inner.spec.dim
    }

    pub fn degree(&self) -> u32 {
        self.inner.spec.degree
    }

    pub fn degree_f64(&self) -> f64 {
        self.inner.spec.degree as f64
    }

    pub fn half_width(&self) -> f64 {
        self.inner.spec.half_width
    }

    /// Number of cells per axis (`M`); each axis carries `M + 1` nodes.
    pub fn cells(&self) -> usize {
        self.inner.spec.cells
    }

    pub fn axis(&self) -> &[f64] {
        &self.inner.axis
    }

    pub fn axis_weights(&self) -> &[f64] {
        &self.inner.axis_weights
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.inner.quad_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.inner.quad_weights
    }

    /// Coordinates of node `k`; the second entry is zero when `n = 1`.
    pub fn coords(&self, k: usize) -> [f64; 2] {
        let x = &self.inner.axis;
        if self.dim() == 1 {
            [x[k], 0.0]
        } else {
            let n = self.cells() + 1;
            [x[k / n], x[k % n]]
        }
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        self.inner.is_boundary[k]
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.inner.boundary
    }

    /// Volume of the moment polytope (Lebesgue measure in slope space).
    pub fn polytope_volume(&self) -> f64 {
        let d = self.degree_f64();
        if self.dim() == 1 {
            d
        } else {
            0.5 * d * d
        }
    }

    /// Factor turning slope-space volume into Monge-Ampere mass (total 1).
    pub fn mass_normalization(&self) -> f64 {
        1.0 / self.polytope_volume()
    }

    /// Vertices of the polytope, counter-clockwise for `n = 2`.
    pub fn polytope_vertices(&self) -> Vec<[f64; 2]> {
        let d = self.degree_f64();
        if self.dim() == 1 {
            vec![[0.0, 0.0], [d, 0.0]]
        } else {
            vec![[0.0, 0.0], [d, 0.0], [0.0, d]]
        }
    }

    /// Support function of the polytope, `max_{p in P} p.x`.
    pub fn support(&self, x: [f64; 2]) -> f64 {
        let d = self.degree_f64();
        if self.dim() == 1 {
            d * x[0].max(0.0)
        } else {
            d * 0.0f64.max(x[0]).max(x[1])
        }
    }

    /// The Fubini-Study potential `d log(1 + sum e^{t_i})`.
    pub fn reference(&self) -> Potential {
        Potential::from_raw(self.id(), self.inner.reference.clone())
    }

    pub(crate) fn reference_ma_cell(&self) -> &std::sync::OnceLock<crate::measure::MeasureField> {
        &self.inner.reference_ma
    }

    pub fn reference_values(&self) -> &[f64] {
        &self.inner.reference
    }

    /// Closed-form reference potential at an arbitrary point.
    pub fn reference_at(&self, x: [f64; 2]) -> f64 {
        let d = self.degree_f64();
        if self.dim() == 1 {
            d * softplus(x[0])
        } else {
            d * softplus2(x[0], x[1])
        }
    }

    /// Index of the node whose coordinate is exactly `t` (n = 1).
    pub fn node_at(&self, t: f64) -> Option<usize> {
        self.inner.axis.iter().position(|&x| x == t)
    }

    /// Builds a potential on this grid from node values.
    pub fn potential(&self, values: Vec<f64>) -> Result<Potential> {
        Potential::new(self, values)
    }

    /// Builds a potential by sampling `f` at the node coordinates.
    pub fn sample<F: Fn([f64; 2]) -> f64>(&self, f: F) -> Potential {
        let values = (0..self.len()).map(|k| f(self.coords(k))).collect();
        Potential::from_raw(self.id(), values)
    }

    pub fn check<T: OnGrid>(&self, obj: &T) -> Result<()> {
        if obj.model_id() != self.id() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn descriptor(&self) -> String {
        format!(
            "n={} degree={} M={} T={}",
            self.dim(),
            self.degree(),
            self.cells(),
            self.half_width()
        )
    }
}

/// Objects sampled on a specific model grid.
pub trait OnGrid {
    fn model_id(&self) -> ModelId;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_at_origin() {
        let m1 = make_model(1, 1, 20.0, 2048).unwrap();
        let i0 = m1.node_at(0.0).unwrap();
        assert!((m1.reference_values()[i0] - 2f64.ln()).abs() < 1e-15);
        let m2 = make_model(1, 2, 20.0, 2048).unwrap();
        assert!((m2.reference_values()[i0] - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(m2.polytope_vertices(), vec![[0.0, 0.0], [2.0, 0.0]]);
    }

    #[test]
    fn quadrature_sums_to_window_volume() {
        for rule in QUADRATURE_RULES {
            let mut spec = ModelSpec::new(1, 1, 20.0, 512);
            spec.quadrature = rule.to_string();
            let m = spec.build().unwrap();
            let s: f64 = m.quad_weights().iter().sum();
            assert!((s - 40.0).abs() < 1e-10, "{rule}: {s}");
            assert!(m.quad_weights().iter().all(|&w| w > 0.0));
        }
        let m = make_model(2, 1, 20.0, 32).unwrap();
        let s: f64 = m.quad_weights().iter().sum();
        assert!((s - 1600.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(make_model(3, 1, 20.0, 64).unwrap_err(), Error::InvalidDimension(3));
        assert!(matches!(make_model(1, 1, 3.0, 64), Err(Error::WindowTooSmall { .. })));
        assert!(matches!(make_model(2, 1, 4.0, 32), Err(Error::WindowTooSmall { .. })));
        assert!(make_model(1, 1, 20.0, 8).is_err());
    }

    #[test]
    fn anchors_become_nodes() {
        let a = 2.0 * 2f64.ln();
        let m = ModelSpec::new(1, 1, 20.0, 2048).with_anchors(&[a, -a]).build().unwrap();
        assert!(m.node_at(a).is_some());
        assert!(m.node_at(-a).is_some());
        let s: f64 = m.quad_weights().iter().sum();
        assert!((s - 40.0).abs() < 1e-10);
    }

    #[test]
    fn ids_distinguish_grids() {
        let a = make_model(1, 1, 20.0, 256).unwrap();
        let b = make_model(1, 1, 20.0, 512).unwrap();
        let c = make_model(1, 1, 20.0, 256).unwrap();
        assert_ne!(a.id(), b.id());
        assert_eq!(a.id(), c.id());
    }
}
