use super::{check_solvable, f_mu_raw, finish_trace, normalize_l0, MaSolver, SolveOptions, SolveTrace, TraceRecord};
use crate::envelope::psh_envelope;
use crate::error::{Error, Result};
use crate::ma::monge_ampere;
use crate::measure::MeasureField;
use crate::model::{ToricModel, TOL_HULL};
use crate::potential::Potential;

/// Projected preconditioned ascent `psi <- P(psi + s G(MA(psi) - mu))`
/// with backtracking on `F_mu`.
pub struct Ascent;

impl MaSolver for Ascent {
    fn name(&self) -> &'static str {
        "ascent"
    }

    fn solve(
        &self,
        model: &ToricModel,
        mu: &MeasureField,
        init: Option<&Potential>,
        opts: &SolveOptions,
    ) -> Result<(Potential, SolveTrace)> {
        check_solvable(model, mu)?;
        let smoother = Smoother::new(model, opts.screening);
        let start = match init {
            Some(p) => {
                model.check(p)?;
                p.clone()
            }
            None => model.reference(),
        };
        let mut psi = psh_envelope(model, start.values())?;
        let mut f = f_mu_raw(model, mu, &psi)?;
        let mut trace = SolveTrace {
            method: self.name().to_string(),
            records: Vec::new(),
        };
        let mut iterates = Vec::new();
        let mut residual;
        let mut iter = 0;
        let mut last_step = 0.0;
        loop {
            let ma = monge_ampere(model, &psi)?;
            let r: Vec<f64> = ma.masses().iter().zip(mu.masses()).map(|(a, b)| a - b).collect();
            residual = r.iter().map(|v| v.abs()).sum::<f64>();
            trace.records.push(TraceRecord {
                iter,
                f_mu: f,
                residual_l1: residual,
                step: last_step,
                i_to_final: f64::NAN,
            });
            iterates.push(psi.clone());
            if residual <= opts.tol_residual || iter >= opts.max_iter {
                break;
            }
            let dir = smoother.apply(&r);
            let mut step = opts.step0;
            let mut accepted = None;
            for _ in 0..opts.max_tries {
                let cand: Vec<f64> = psi.values().iter().zip(&dir).map(|(p, g)| p + step * g).collect();
                let cand = psh_envelope(model, &cand)?;
                let fc = f_mu_raw(model, mu, &cand)?;
                if fc > f {
                    accepted = Some((cand, fc));
                    break;
                }
                step *= opts.shrink;
            }
            match accepted {
                Some((cand, fc)) => {
                    psi = cand;
                    f = fc;
                    last_step = step;
                }
                None => break,
            }
            iter += 1;
        }
        if residual > opts.tol_residual {
            return Err(Error::NoConvergence {
                iterations: iter,
                residual,
            });
        }
        let psi = normalize_l0(model, &psi)?;
        finish_trace(model, &mut trace, &iterates, &psi);
        Ok((psi, trace))
    }
}

/// Screened reference-metric Laplacian inverse, mapping a signed node-mass
/// field to a potential increment.
pub struct Smoother {
    dim: usize,
    n_axis: usize,
    // Face coefficients: `east[k]` couples k with its +x1 neighbor,
    // `north[k]` with its +x2 neighbor.
    east: Vec<f64>,
    north: Vec<f64>,
    diag: Vec<f64>,
}

impl Smoother {
    pub fn new(model: &ToricModel, screening: f64) -> Self {
        let norm = model.mass_normalization();
        let x = model.axis();
        let n_axis = x.len();
        let len = model.len();
        let mut east = vec![0.0; len];
        let mut north = vec![0.0; len];
        if model.dim() == 1 {
            for i in 0..n_axis - 1 {
                east[i] = norm / (x[i + 1] - x[i]);
            }
        } else {
            let d = model.degree_f64();
            // Second derivatives of the reference: cofactor weights.
            let second = |a: f64, b: f64| {
                let m = 0.0f64.max(a).max(b);
                let (e0, ea, eb) = ((-m).exp(), (a - m).exp(), (b - m).exp());
                let s = e0 + ea + eb;
                (d * ea * (e0 + eb) / (s * s), d * eb * (e0 + ea) / (s * s))
            };
            for i in 0..n_axis {
                for j in 0..n_axis {
                    let k = i * n_axis + j;
                    if i + 1 < n_axis {
                        let (_, r22a) = second(x[i], x[j]);
                        let (_, r22b) = second(x[i + 1], x[j]);
                        east[k] = norm * 0.5 * (r22a + r22b);
                    }
                    if j + 1 < n_axis {
                        let (r11a, _) = second(x[i], x[j]);
                        let (r11b, _) = second(x[i], x[j + 1]);
                        north[k] = norm * 0.5 * (r11a + r11b);
                    }
                }
            }
        }
        let mut diag = vec![screening; len];
        let east_step = if model.dim() == 1 { 1 } else { n_axis };
        for k in 0..len {
            if east[k] != 0.0 {
                diag[k] += east[k];
                diag[k + east_step] += east[k];
            }
            if north[k] != 0.0 {
                diag[k] += north[k];
                diag[k + 1] += north[k];
            }
        }
        Self {
            dim: model.dim(),
            n_axis,
            east,
            north,
            diag,
        }
    }

    fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let east_step = if self.dim == 1 { 1 } else { self.n_axis };
        let mut out: Vec<f64> = v.iter().zip(&self.diag).map(|(a, b)| a * b).collect();
        for k in 0..v.len() {
            if self.east[k] != 0.0 {
                out[k] -= self.east[k] * v[k + east_step];
                out[k + east_step] -= self.east[k] * v[k];
            }
            if self.north[k] != 0.0 {
                out[k] -= self.north[k] * v[k + 1];
                out[k + 1] -= self.north[k] * v[k];
            }
        }
        out
    }

    /// Solves `(A + eps) g = r`.
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        if self.dim == 1 {
            self.tridiagonal(r)
        } else {
            self.conjugate_gradient(r)
        }
    }

    fn tridiagonal(&self, r: &[f64]) -> Vec<f64> {
        // Thomas algorithm on the symmetric tridiagonal system.
        let n = r.len();
        let mut c = vec![0.0; n];
        let mut g = vec![0.0; n];
        let mut denom = self.diag[0];
        c[0] = -self.east[0] / denom;
        g[0] = r[0] / denom;
        for i in 1..n {
            let a = -self.east[i - 1];
            denom = self.diag[i] - a * c[i - 1];
            c[i] = if i + 1 < n { -self.east[i] / denom } else { 0.0 };
            g[i] = (r[i] - a * g[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            g[i] -= c[i] * g[i + 1];
        }
        g
    }

    fn conjugate_gradient(&self, r: &[f64]) -> Vec<f64> {
        let n = r.len();
        let mut x = vec![0.0; n];
        let mut res = r.to_vec();
        let mut z: Vec<f64> = res.iter().zip(&self.diag).map(|(a, b)| a / b).collect();
        let mut p = z.clone();
        let mut rz: f64 = res.iter().zip(&z).map(|(a, b)| a * b).sum();
        let r0 = rz.abs().sqrt();
        for _ in 0..2000 {
            if rz.abs().sqrt() <= TOL_HULL * r0 || rz == 0.0 {
                break;
            }
            let ap = self.matvec(&p);
            let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
            for i in 0..n {
                x[i] += alpha * p[i];
                res[i] -= alpha * ap[i];
            }
            z = res.iter().zip(&self.diag).map(|(a, b)| a / b).collect();
            let rz_new: f64 = res.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        x
    }
}
