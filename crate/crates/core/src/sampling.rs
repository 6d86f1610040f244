//! Seeded random families of potentials and measures for diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::envelope::psh_envelope;
use crate::error::Result;
use crate::ma::monge_ampere;
use crate::measure::MeasureField;
use crate::model::{softplus, softplus2, ToricModel};
use crate::potential::Potential;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random full-mass potential: a convex combination of rescaled and
/// translated Fubini-Study potentials, plus a constant and a small smooth
/// bump, projected onto the psh cone.
pub fn random_potential<R: Rng>(model: &ToricModel, rng: &mut R) -> Result<Potential> {
    let d = model.degree_f64();
    let parts = rng.gen_range(1..=3);
    let mut comps = Vec::with_capacity(parts);
    let mut total = 0.0;
    for _ in 0..parts {
        let w: f64 = rng.gen_range(0.2..1.0);
        let s: f64 = rng.gen_range(0.55..0.95);
        let b = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
        total += w;
        comps.push((w, s, b));
    }
    let c: f64 = rng.gen_range(-1.0..1.0);
    let amp: f64 = rng.gen_range(-0.05..0.05);
    let center = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
    let dim = model.dim();
    let values: Vec<f64> = (0..model.len())
        .map(|k| {
            let x = model.coords(k);
            let mut v = c;
            for &(w, s, b) in &comps {
                let f = if dim == 1 {
                    softplus((x[0] - b[0]) / s)
                } else {
                    softplus2((x[0] - b[0]) / s, (x[1] - b[1]) / s)
                };
                v += w / total * d * s * f;
            }
            let r2 = (x[0] - center[0]).powi(2) + if dim == 2 { (x[1] - center[1]).powi(2) } else { 0.0 };
            v + amp * (-r2).exp()
        })
        .collect();
    psh_envelope(model, &values)
}

pub fn random_potentials(model: &ToricModel, count: usize, seed: u64) -> Result<Vec<Potential>> {
    let mut r = rng(seed);
    (0..count).map(|_| random_potential(model, &mut r)).collect()
}

/// Random smooth direction `v` (node values, compactly concentrated).
pub fn random_direction<R: Rng>(model: &ToricModel, rng: &mut R) -> Vec<f64> {
    let bumps = rng.gen_range(1..=3);
    let spec: Vec<(f64, [f64; 2], f64)> = (0..bumps)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
                rng.gen_range(0.7..2.0),
            )
        })
        .collect();
    let dim = model.dim();
    (0..model.len())
        .map(|k| {
            let x = model.coords(k);
            spec.iter()
                .map(|&(a, c, w)| {
                    let r2 = (x[0] - c[0]).powi(2) + if dim == 2 { (x[1] - c[1]).powi(2) } else { 0.0 };
                    a * (-r2 / (2.0 * w * w)).exp()
                })
                .sum()
        })
        .collect()
}

/// Random probability measure: the Monge-Ampère measure of a random
/// full-mass potential.
pub fn random_measure<R: Rng>(model: &ToricModel, rng: &mut R) -> Result<MeasureField> {
    let psi = random_potential(model, rng)?;
    Ok(monge_ampere(model, &psi)?.normalized())
}
