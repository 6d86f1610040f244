//! Named measure specifications: `fs`, `gaussian`, `bump`, `mixture`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ma::reference_measure;
use crate::measure::MeasureField;
use crate::model::ToricModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeasureSpec {
    /// The reference volume `MA(psi_FS)`.
    Fs,
    /// The smooth Fubini-Study density sampled at the nodes.
    #[serde(rename = "fs_nodal")]
    FsNodal,
    /// Normal density in every coordinate `t_i`, truncated to the window.
    Gaussian { mean: f64, sd: f64 },
    /// Smooth compactly supported bump `exp(-1 / (1 - r^2))`, `r = |t - c| / w`.
    Bump { center: f64, width: f64 },
    Mixture { components: Vec<MixtureComponent> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub measure: MeasureSpec,
}

pub const MEASURE_KINDS: &[&str] = &["fs", "fs_nodal", "gaussian", "bump", "mixture"];

fn bump(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r * r)).exp()
    }
}

impl MeasureSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MeasureSpec::Fs => "fs",
            MeasureSpec::FsNodal => "fs_nodal",
            MeasureSpec::Gaussian { .. } => "gaussian",
            MeasureSpec::Bump { .. } => "bump",
            MeasureSpec::Mixture { .. } => "mixture",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            MeasureSpec::Fs | MeasureSpec::FsNodal => Ok(()),
            MeasureSpec::Gaussian { mean, sd } => {
                if !(sd > &0.0) || !mean.is_finite() {
                    return Err(Error::InvalidModel("gaussian needs finite mean and sd > 0".into()));
                }
                Ok(())
            }
            MeasureSpec::Bump { center, width } => {
                if !(width > &0.0) || !center.is_finite() {
                    return Err(Error::InvalidModel("bump needs finite center and width > 0".into()));
                }
                Ok(())
            }
            MeasureSpec::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::InvalidModel("empty mixture".into()));
                }
                for c in components {
                    if !(c.weight > 0.0) {
                        return Err(Error::InvalidModel("mixture weights must be positive".into()));
                    }
                    c.measure.validate()?;
                }
                Ok(())
            }
        }
    }

    /// Unnormalized density in one coordinate, `None` for `fs`.
    fn density_1d(&self, t: f64) -> f64 {
        match *self {
            MeasureSpec::Gaussian { mean, sd } => {
                let z = (t - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
            }
            MeasureSpec::Bump { center, width } => bump((t - center) / width),
            _ => 0.0,
        }
    }

    /// Discretizes the specification on `model`, normalized to mass one.
    /// `n = 1` uses the hat projection; `n = 2` uses nodal quadrature of the
    /// product (gaussian) or radial (bump) density.
    pub fn build(&self, model: &ToricModel) -> Result<MeasureField> {
        self.validate()?;
        let field = match self {
            MeasureSpec::Fs => return reference_measure(model),
            MeasureSpec::FsNodal => MeasureField::from_density_nodal(model, |x| {
                if model.dim() == 1 {
                    let e = (-x[0].abs()).exp();
                    e / (1.0 + e).powi(2)
                } else {
                    let m = 0.0f64.max(x[0]).max(x[1]);
                    let s = (-m).exp() + (x[0] - m).exp() + (x[1] - m).exp();
                    (x[0] + x[1] - 3.0 * m).exp() / s.powi(3)
                }
            })?,
            MeasureSpec::Mixture { components } => {
                let total: f64 = components.iter().map(|c| c.weight).sum();
                let mut mass = vec![0.0; model.len()];
                for c in components {
                    let part = c.measure.build(model)?;
                    for (m, p) in mass.iter_mut().zip(part.masses()) {
                        *m += c.weight / total * p;
                    }
                }
                MeasureField::from_masses(model, mass)?
            }
            spec if model.dim() == 1 => MeasureField::from_density_hat(model, |t| spec.density_1d(t))?,
            MeasureSpec::Gaussian { .. } => {
                MeasureField::from_density_nodal(model, |x| self.density_1d(x[0]) * self.density_1d(x[1]))?
            }
            MeasureSpec::Bump { center, width } => MeasureField::from_density_nodal(model, |x| {
                let r = ((x[0] - center).powi(2) + (x[1] - center).powi(2)).sqrt() / width;
                bump(r)
            })?,
        };
        if !(field.total() > 0.0) {
            return Err(Error::InvalidModel(format!("{} measure has no mass on the grid", self.name())));
        }
        Ok(field.normalized())
    }
}
