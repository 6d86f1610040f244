//! Geodesics through Legendre transforms (`n = 1`).
//!
//! The Legendre transform of a piecewise-linear convex potential is
//! piecewise linear on the polytope, with breakpoints at the hull slopes.
//! Interpolating the transforms linearly and transforming back is exact on
//! the merged breakpoint set.

use crate::error::{Error, Result};
use crate::hull::lower_hull_1d;
use crate::ma::check_full_mass;
use crate::model::ToricModel;
use crate::potential::Potential;

/// Piecewise-linear convex function on `[0, d]`, stored at its breakpoints.
#[derive(Debug, Clone)]
pub struct Legendre {
    pub slopes: Vec<f64>,
    pub values: Vec<f64>,
}

/// Breakpoints of the Legendre transform: hull slopes clamped to `[0, d]`.
fn breakpoints(x: &[f64], u: &[f64], d: f64) -> Vec<f64> {
    let hull = lower_hull_1d(x, u);
    let mut p = vec![0.0];
    for w in hull.windows(2) {
        let s = (u[w[1]] - u[w[0]]) / (x[w[1]] - x[w[0]]);
        if s > 0.0 && s < d {
            p.push(s);
        }
    }
    p.push(d);
    p
}

/// `u*(p) = max_i (p x_i - u_i)` at increasing slopes `p`.
fn evaluate_transform(x: &[f64], u: &[f64], p: &[f64]) -> Vec<f64> {
    let hull = lower_hull_1d(x, u);
    let mut out = Vec::with_capacity(p.len());
    let mut w = 0;
    for &s in p {
        while w + 1 < hull.len() {
            let (a, b) = (hull[w], hull[w + 1]);
            if s * x[b] - u[b] >= s * x[a] - u[a] {
                w += 1;
            } else {
                break;
            }
        }
        let a = hull[w];
        out.push(s * x[a] - u[a]);
    }
    out
}

fn merge(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = a.iter().chain(b).copied().collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Legendre transform of `psi` restricted to the polytope.
pub fn legendre(model: &ToricModel, psi: &Potential) -> Result<Legendre> {
    if model.dim() != 1 {
        return Err(Error::OneDimensionalOnly);
    }
    let slopes = breakpoints(model.axis(), psi.values(), model.degree_f64());
    let values = evaluate_transform(model.axis(), psi.values(), &slopes);
    Ok(Legendre { slopes, values })
}

/// Back-transform `psi(x_i) = max_p (p x_i - g(p))` at every node.
pub fn inverse_legendre(model: &ToricModel, g: &Legendre) -> Result<Potential> {
    let x = model.axis();
    // Rounding can leave near-duplicate breakpoints that break convexity;
    // the greedy scan below needs the convex minorant.
    let hull = lower_hull_1d(&g.slopes, &g.values);
    let (p, v): (Vec<f64>, Vec<f64>) = hull.iter().map(|&j| (g.slopes[j], g.values[j])).unzip();
    let mut out = Vec::with_capacity(x.len());
    let mut j = 0;
    for &t in x {
        while j + 1 < p.len() && p[j + 1] * t - v[j + 1] >= p[j] * t - v[j] {
            j += 1;
        }
        out.push(p[j] * t - v[j]);
    }
    Potential::new(model, out)
}

/// Point at time `t` of the geodesic from `psi0` to `psi1`.
pub fn geodesic(model: &ToricModel, psi0: &Potential, psi1: &Potential, t: f64) -> Result<Potential> {
    if model.dim() != 1 {
        return Err(Error::OneDimensionalOnly);
    }
    model.check(psi0)?;
    model.check(psi1)?;
    check_full_mass(model, psi0)?;
    check_full_mass(model, psi1)?;
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    if t == 1.0 {
        return Ok(psi1.clone());
    }
    let d = model.degree_f64();
    let x = model.axis();
    let p = merge(
        &breakpoints(x, psi0.values(), d),
        &breakpoints(x, psi1.values(), d),
    );
    let g0 = evaluate_transform(x, psi0.values(), &p);
    let g1 = evaluate_transform(x, psi1.values(), &p);
    let values = g0.iter().zip(&g1).map(|(a, b)| (1.0 - t) * a + t * b).collect();
    inverse_legendre(model, &Legendre { slopes: p, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_model;

    #[test]
    fn round_trip() {
        let m = make_model(1, 1, 20.0, 512).unwrap();
        let r = m.reference();
        let back = inverse_legendre(&m, &legendre(&m, &r).unwrap()).unwrap();
        assert!(back.sup_distance(&r) < 1e-12);
    }

    #[test]
    fn constant_shift_is_linear() {
        let m = make_model(1, 1, 20.0, 512).unwrap();
        let r = m.reference();
        let g = geodesic(&m, &r, &r.shifted(3.0), 0.25).unwrap();
        assert!(g.sup_distance(&r.shifted(0.75)) < 1e-12, "{}", g.sup_distance(&r.shifted(0.75)));
    }

    #[test]
    fn symmetric_midpoint() {
        let m = make_model(1, 1, 20.0, 256).unwrap();
        let a = m.reference();
        let b = m.sample(|x| 0.5 * crate::model::softplus(2.0 * x[0] - 1.0));
        let g1 = geodesic(&m, &a, &b, 0.5).unwrap();
        let g2 = geodesic(&m, &b, &a, 0.5).unwrap();
        assert!(g1.sup_distance(&g2) < 1e-12);
    }
}
