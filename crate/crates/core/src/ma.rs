//! Alexandrov (subgradient) Monge-Ampère measures.
//!
//! The mass of node `k` is the slope-space volume of the subdifferential of
//! the lower convex hull at `x_k`, intersected with the polytope and scaled
//! by the model's mass normalization. Window-boundary nodes collect every
//! slope the sampled window cannot resolve; that mass is reported as
//! boundary atoms.

use crate::error::{Error, Result};
use crate::hull::{lower_hull_1d, polygon_area, subdifferential_cells, Grid2, Point};
use crate::measure::MeasureField;
use crate::model::{ToricModel, ATOM_TOL, TOL_MASS};
use crate::potential::Potential;

/// Monge-Ampère measure of `psi`, boundary atoms included.
pub fn monge_ampere(model: &ToricModel, psi: &Potential) -> Result<MeasureField> {
    model.check(psi)?;
    let mass = if model.dim() == 1 {
        ma_1d(model, psi.values())
    } else {
        ma_2d(model, psi.values())
    };
    Ok(MeasureField::from_raw(model, mass))
}

/// `MA(ref)`, computed once per model.
pub fn reference_measure(model: &ToricModel) -> Result<MeasureField> {
    if let Some(m) = model.reference_ma_cell().get() {
        return Ok(m.clone());
    }
    let m = monge_ampere(model, &model.reference())?;
    Ok(model.reference_ma_cell().get_or_init(|| m).clone())
}

fn ma_1d(model: &ToricModel, u: &[f64]) -> Vec<f64> {
    let x = model.axis();
    let d = model.degree_f64();
    let hull = lower_hull_1d(x, u);
    let mut mass = vec![0.0; u.len()];
    let clamp = |s: f64| s.clamp(0.0, d);
    for w in 0..hull.len() {
        let k = hull[w];
        let left = if w == 0 {
            0.0
        } else {
            let j = hull[w - 1];
            clamp((u[k] - u[j]) / (x[k] - x[j]))
        };
        let right = if w + 1 == hull.len() {
            d
        } else {
            let j = hull[w + 1];
            clamp((u[j] - u[k]) / (x[j] - x[k]))
        };
        mass[k] = (right - left).max(0.0) / d;
    }
    mass
}

fn ma_2d(model: &ToricModel, u: &[f64]) -> Vec<f64> {
    let grid = Grid2 { axis: model.axis() };
    let domain: Vec<Point> = model.polytope_vertices();
    let norm = model.mass_normalization();
    subdifferential_cells(&grid, u, &domain)
        .iter()
        .map(|cell| polygon_area(cell).max(0.0) * norm)
        .collect()
}

/// Mixed Monge-Ampère measure of `n` potentials. For `n = 2` it is obtained
/// by polarization, `MA(a, b) = (4 MA((a+b)/2) - MA(a) - MA(b)) / 2`.
pub fn mixed_monge_ampere(model: &ToricModel, list: &[&Potential]) -> Result<MeasureField> {
    if list.len() != model.dim() {
        return Err(Error::LengthMismatch {
            expected: model.dim(),
            got: list.len(),
        });
    }
    for p in list {
        model.check(*p)?;
    }
    if model.dim() == 1 {
        return monge_ampere(model, list[0]);
    }
    let (a, b) = (list[0], list[1]);
    if a.values() == b.values() {
        return monge_ampere(model, a);
    }
    let ma = measure_of(model, a)?;
    let mb = measure_of(model, b)?;
    polarize(model, a, b, &ma, &mb)
}

pub(crate) fn measure_of(model: &ToricModel, psi: &Potential) -> Result<MeasureField> {
    if psi.values() == model.reference_values() {
        reference_measure(model)
    } else {
        monge_ampere(model, psi)
    }
}

/// `MA(a, b)` for `n = 2` given `MA(a)` and `MA(b)`.
pub(crate) fn polarize(
    model: &ToricModel,
    a: &Potential,
    b: &Potential,
    ma: &MeasureField,
    mb: &MeasureField,
) -> Result<MeasureField> {
    // Symmetric in (a, b) bit for bit: the midpoint and the sum are commutative.
    let mid_values: Vec<f64> = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| 0.5 * (x + y))
        .collect();
    let mid = Potential::from_raw(model.id(), mid_values);
    let mm = monge_ampere(model, &mid)?;
    let mut mass = Vec::with_capacity(model.len());
    for k in 0..model.len() {
        let v = 2.0 * mm.masses()[k] - 0.5 * (ma.masses()[k] + mb.masses()[k]);
        if v < -TOL_MASS {
            return Err(Error::PolarizationNegativity { node: k, value: v });
        }
        mass.push(v.max(0.0));
    }
    Ok(MeasureField::from_raw(model, mass))
}

/// Errors unless `psi` has full Monge-Ampère mass inside the window.
pub fn check_full_mass(model: &ToricModel, psi: &Potential) -> Result<MeasureField> {
    let ma = monge_ampere(model, psi)?;
    let atoms = ma.atom_mass();
    if atoms > ATOM_TOL {
        return Err(Error::NotFullMass { atoms });
    }
    Ok(ma)
}
