//! The settings `S_mu` and `S_-` of the balanced problem.

use super::polar::PolarField;
use crate::error::{Error, Result};
use crate::functionals::{l_minus, l_mu};
use crate::ma::reference_measure;
use crate::measure::MeasureField;
use crate::model::{ToricModel, TOL_MASS};
use crate::potential::Potential;
use crate::solver::canonical_measure;

/// A balanced setting: the measure defining `h_k` and the functional `L`.
pub trait BalancedSetting: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether the setting measure is angle-independent.
    fn is_radial(&self) -> bool {
        true
    }

    fn measure(&self, model: &ToricModel, psi: &Potential) -> Result<MeasureField>;

    fn measure_polar(&self, model: &ToricModel, psi: &PolarField) -> Result<PolarField>;

    fn l(&self, model: &ToricModel, psi: &Potential) -> Result<f64>;

    fn l_polar(&self, model: &ToricModel, psi: &PolarField) -> Result<f64>;
}

pub const SETTINGS: &[&str] = &["mu", "minus"];

/// `S_mu`: a fixed probability measure, radial or sampled on the angular grid.
#[derive(Debug, Clone)]
pub struct SMu {
    radial: Option<MeasureField>,
    polar: Option<PolarField>,
}

impl SMu {
    pub fn new(model: &ToricModel, mu: MeasureField) -> Result<Self> {
        if model.dim() != 1 {
            return Err(Error::OneDimensionalOnly);
        }
        model.check(&mu)?;
        mu.check_probability()?;
        Ok(Self {
            radial: Some(mu),
            polar: None,
        })
    }

    /// A non-radial probability measure given by its masses on the angular grid.
    pub fn polar(model: &ToricModel, mu: PolarField) -> Result<Self> {
        if model.dim() != 1 {
            return Err(Error::OneDimensionalOnly);
        }
        if let Some(k) = mu.values().iter().position(|&m| m < 0.0) {
            return Err(Error::NegativeMass {
                node: k / mu.n_theta(),
                value: mu.values()[k],
            });
        }
        if (mu.total() - 1.0).abs() > TOL_MASS {
            return Err(Error::MassNotOne { mass: mu.total() });
        }
        Ok(Self {
            radial: None,
            polar: Some(mu),
        })
    }
}

impl BalancedSetting for SMu {
    fn name(&self) -> &'static str {
        "mu"
    }

    fn is_radial(&self) -> bool {
        self.radial.is_some()
    }

    fn measure(&self, _model: &ToricModel, _psi: &Potential) -> Result<MeasureField> {
        self.radial.clone().ok_or(Error::NotRadial)
    }

    fn measure_polar(&self, _model: &ToricModel, psi: &PolarField) -> Result<PolarField> {
        match (&self.radial, &self.polar) {
            (Some(mu), _) => Ok(PolarField::from_radial_measure(mu, psi.n_theta())),
            (_, Some(p)) if p.n_theta() == psi.n_theta() => Ok(p.clone()),
            (_, Some(p)) => Err(Error::LengthMismatch {
                expected: p.n_theta(),
                got: psi.n_theta(),
            }),
            _ => unreachable!(),
        }
    }

    fn l(&self, model: &ToricModel, psi: &Potential) -> Result<f64> {
        l_mu(model, self.radial.as_ref().ok_or(Error::NotRadial)?, psi)
    }

    fn l_polar(&self, model: &ToricModel, psi: &PolarField) -> Result<f64> {
        let nu = self.measure_polar(model, psi)?;
        Ok(polar_pairing(model, &nu, psi))
    }
}

/// `S_-` on the anticanonical model: `h_k(e^{-2 phi}, phi)` with
/// `L = L_-`.
#[derive(Debug, Clone, Copy)]
pub struct SMinus;

impl SMinus {
    pub fn new(model: &ToricModel) -> Result<Self> {
        if model.dim() != 1 || model.degree() != 2 {
            return Err(Error::SettingMismatch("S_- needs the degree-2 model of P1".into()));
        }
        Ok(Self)
    }
}

impl BalancedSetting for SMinus {
    fn name(&self) -> &'static str {
        "minus"
    }

    fn measure(&self, model: &ToricModel, psi: &Potential) -> Result<MeasureField> {
        canonical_measure(model, psi)
    }

    fn measure_polar(&self, model: &ToricModel, psi: &PolarField) -> Result<PolarField> {
        let m0 = reference_measure(model)?;
        let nt = psi.n_theta();
        let r = model.reference_values();
        let values = (0..psi.values().len())
            .map(|k| {
                let i = k / nt;
                m0.masses()[i] * (r[i] - psi.values()[k]).exp() / nt as f64
            })
            .collect();
        PolarField::new(model, nt, values)
    }

    fn l(&self, model: &ToricModel, psi: &Potential) -> Result<f64> {
        l_minus(model, psi)
    }

    fn l_polar(&self, model: &ToricModel, psi: &PolarField) -> Result<f64> {
        Ok(-0.5 * self.measure_polar(model, psi)?.total().ln())
    }
}

/// `int (psi - ref) / 2 dnu` on the angular grid.
pub(crate) fn polar_pairing(model: &ToricModel, nu: &PolarField, psi: &PolarField) -> f64 {
    let nt = psi.n_theta();
    let r = model.reference_values();
    nu.values()
        .iter()
        .zip(psi.values())
        .enumerate()
        .map(|(k, (m, p))| m * 0.5 * (p - r[k / nt]))
        .sum()
}

/// Registry lookup. `plus` (the canonically balanced setting) is reserved
/// and always rejected: no model with ample canonical bundle is built.
pub fn make_setting(name: &str, model: &ToricModel, mu: Option<MeasureField>) -> Result<Box<dyn BalancedSetting>> {
    match name {
        "mu" => {
            let mu = mu.ok_or_else(|| Error::SettingMismatch("S_mu needs an input measure".into()))?;
            Ok(Box::new(SMu::new(model, mu)?))
        }
        "minus" => Ok(Box::new(SMinus::new(model)?)),
        "plus" => Err(Error::SettingMismatch(
            "S_+ needs an ample canonical bundle; no such model is built".into(),
        )),
        other => Err(Error::Unknown {
            kind: "balanced setting",
            name: other.into(),
        }),
    }
}

/// The measure of `setting` at `psi`.
pub fn setting_measure(setting: &dyn BalancedSetting, model: &ToricModel, psi: &Potential) -> Result<MeasureField> {
    model.check(psi)?;
    setting.measure(model, psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ma::monge_ampere;
    use crate::model::make_model;

    #[test]
    fn registry() {
        let m = make_model(1, 2, 20.0, 128).unwrap();
        let mu = monge_ampere(&m, &m.reference()).unwrap();
        assert_eq!(make_setting("mu", &m, Some(mu)).unwrap().name(), "mu");
        assert_eq!(make_setting("minus", &m, None).unwrap().name(), "minus");
        assert!(matches!(make_setting("plus", &m, None), Err(Error::SettingMismatch(_))));
        assert!(matches!(make_setting("mu", &m, None), Err(Error::SettingMismatch(_))));
        let m1 = make_model(1, 1, 20.0, 128).unwrap();
        assert!(matches!(make_setting("minus", &m1, None), Err(Error::SettingMismatch(_))));
    }

    #[test]
    fn measures() {
        let m = make_model(1, 2, 20.0, 256).unwrap();
        let omega = monge_ampere(&m, &m.reference()).unwrap();
        let s = SMu::new(&m, omega.clone()).unwrap();
        let a = setting_measure(&s, &m, &m.reference()).unwrap();
        let b = setting_measure(&s, &m, &m.reference().shifted(1.0)).unwrap();
        assert_eq!(a, b);
        let minus = SMinus::new(&m).unwrap();
        let c = setting_measure(&minus, &m, &m.reference()).unwrap();
        assert!(c.l1_distance(&omega) < 1e-15);
        let d = setting_measure(&minus, &m, &m.reference().shifted(0.7)).unwrap();
        assert!((d.total() - (-0.7f64).exp() * c.total()).abs() < 1e-14);
    }
}
