//! Inequality suites over seeded random pairs of potentials.

use serde::Serialize;

use crate::error::Result;
use crate::functionals::{functional_i_of, functional_j_of, monotone_chain_of, Evaluated};
use crate::model::{ToricModel, TOL_MASS};
use crate::sampling::{random_potential, rng};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub checks: usize,
    pub violations: usize,
    /// Largest amount by which an inequality failed (0 when none did).
    pub worst: f64,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            checks: 0,
            violations: 0,
            worst: 0.0,
        }
    }

    /// Records `lhs <= rhs` with `TOL_MASS` slack.
    fn le(&mut self, lhs: f64, rhs: f64) {
        self.checks += 1;
        let excess = lhs - rhs;
        if excess > TOL_MASS {
            self.violations += 1;
        }
        self.worst = self.worst.max(excess);
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// `J <= I <= (n+1) J`.
pub fn compare(model: &ToricModel, a: &Evaluated<'_>, b: &Evaluated<'_>, out: &mut SuiteResult) -> Result<()> {
    let n = model.dim() as f64;
    let i = functional_i_of(model, a, b);
    let j = functional_j_of(model, b, a)?;
    out.le(j, i);
    out.le(i, (n + 1.0) * j);
    Ok(())
}

/// `J_b(a) / n <= J_a(b) <= n J_b(a)`.
pub fn quasi_symmetry(model: &ToricModel, a: &Evaluated<'_>, b: &Evaluated<'_>, out: &mut SuiteResult) -> Result<()> {
    let n = model.dim() as f64;
    let jba = functional_j_of(model, b, a)?;
    let jab = functional_j_of(model, a, b)?;
    out.le(jba / n, jab);
    out.le(jab, n * jba);
    Ok(())
}

/// `I(t a + (1-t) b, b) <= n t^2 I(a, b)` for `t = 0.1, ..., 0.9`.
pub fn convex_combination(
    model: &ToricModel,
    a: &Evaluated<'_>,
    b: &Evaluated<'_>,
    out: &mut SuiteResult,
) -> Result<()> {
    let n = model.dim() as f64;
    let full = functional_i_of(model, a, b);
    for s in 1..10 {
        let t = s as f64 / 10.0;
        let mid = b.psi.lerp(a.psi, t);
        let em = Evaluated::new(model, &mid)?;
        out.le(functional_i_of(model, &em, b), n * t * t * full);
    }
    Ok(())
}

/// The mixed pairings of the monotone chain are nonincreasing.
pub fn monotone(model: &ToricModel, a: &Evaluated<'_>, b: &Evaluated<'_>, out: &mut SuiteResult) -> Result<()> {
    let c = monotone_chain_of(model, a, b)?;
    for w in c.windows(2) {
        out.le(w[1], w[0]);
    }
    Ok(())
}

/// Runs all four suites on `pairs` seeded random pairs.
pub fn inequality_suites(model: &ToricModel, pairs: usize, seed: u64) -> Result<Vec<SuiteResult>> {
    let mut r = rng(seed);
    let mut out = vec![
        SuiteResult::new("compare"),
        SuiteResult::new("quasi_symmetry"),
        SuiteResult::new("convex_combination"),
        SuiteResult::new("monotone_chain"),
    ];
    for _ in 0..pairs {
        let pa = random_potential(model, &mut r)?;
        let pb = random_potential(model, &mut r)?;
        let a = Evaluated::new(model, &pa)?;
        let b = Evaluated::new(model, &pb)?;
        compare(model, &a, &b, &mut out[0])?;
        quasi_symmetry(model, &a, &b, &mut out[1])?;
        convex_combination(model, &a, &b, &mut out[2])?;
        monotone(model, &a, &b, &mut out[3])?;
    }
    Ok(out)
}
