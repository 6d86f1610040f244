//! Columnar text format for potentials and measures.
//!
//! ```text
//! # pluripot v1 potential n=1 degree=1 M=16 T=20
//! -2.0000000000000000e1 1.2345678901234567e0
//! ...
//! ```
//!
//! One line per node: the coordinates (one per dimension) and the value,
//! all with 17 significant digits. The header may carry extra `key=value`
//! tags after the grid description.

use crate::error::{Error, Result};
use crate::measure::MeasureField;
use crate::model::ToricModel;
use crate::potential::Potential;

pub const FORMAT_VERSION: &str = "v1";

fn header(model: &ToricModel, kind: &str) -> String {
    format!("# pluripot {FORMAT_VERSION} {kind} {}", model.descriptor())
}

fn write_columns(model: &ToricModel, kind: &str, values: &[f64], tags: &str) -> String {
    let mut out = header(model, kind);
    if !tags.is_empty() {
        out.push(' ');
        out.push_str(tags);
    }
    out.push('\n');
    for (k, v) in values.iter().enumerate() {
        let x = model.coords(k);
        if model.dim() == 1 {
            out.push_str(&format!("{:.16e} {:.16e}\n", x[0], v));
        } else {
            out.push_str(&format!("{:.16e} {:.16e} {:.16e}\n", x[0], x[1], v));
        }
    }
    out
}

pub fn write_potential(model: &ToricModel, psi: &Potential) -> Result<String> {
    write_potential_tagged(model, psi, "")
}

/// As [`write_potential`], with `tags` (space-separated `key=value`) appended
/// to the header.
pub fn write_potential_tagged(model: &ToricModel, psi: &Potential, tags: &str) -> Result<String> {
    model.check(psi)?;
    Ok(write_columns(model, "potential", psi.values(), tags))
}

pub fn write_measure(model: &ToricModel, mu: &MeasureField) -> Result<String> {
    write_measure_tagged(model, mu, "")
}

pub fn write_measure_tagged(model: &ToricModel, mu: &MeasureField, tags: &str) -> Result<String> {
    model.check(mu)?;
    Ok(write_columns(model, "measure", mu.masses(), tags))
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse(format!("line {line}: {}", msg.into()))
}

fn read_columns(model: &ToricModel, kind: &str, text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let expected = header(model, kind);
    let tags_ok = |rest: &str| rest.split_whitespace().all(|t| t.contains('='));
    let matches = match first.trim_end().strip_prefix(&expected) {
        Some("") => true,
        Some(rest) => rest.starts_with(' ') && tags_ok(rest),
        None => false,
    };
    if !matches {
        return Err(parse_err(1, format!("header `{first}` does not match `{expected}`")));
    }
    let cols = model.dim() + 1;
    let mut values = Vec::with_capacity(model.len());
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|f| f.parse::<f64>().map_err(|e| parse_err(lineno, format!("`{f}`: {e}"))))
            .collect::<Result<_>>()?;
        if fields.len() != cols {
            return Err(parse_err(lineno, format!("expected {cols} columns, got {}", fields.len())));
        }
        let k = values.len();
        if k >= model.len() {
            return Err(parse_err(lineno, "more rows than grid nodes"));
        }
        let x = model.coords(k);
        for d in 0..model.dim() {
            let tol = 1e-12 * (1.0 + x[d].abs());
            if (fields[d] - x[d]).abs() > tol {
                return Err(parse_err(lineno, format!("coordinate {} does not match node {}", fields[d], x[d])));
            }
        }
        values.push(fields[cols - 1]);
    }
    if values.len() != model.len() {
        return Err(Error::LengthMismatch {
            expected: model.len(),
            got: values.len(),
        });
    }
    Ok(values)
}

pub fn read_potential(model: &ToricModel, text: &str) -> Result<Potential> {
    Potential::new(model, read_columns(model, "potential", text)?)
}

pub fn read_measure(model: &ToricModel, text: &str) -> Result<MeasureField> {
    MeasureField::from_masses(model, read_columns(model, "measure", text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ma::monge_ampere;
    use crate::model::make_model;

    #[test]
    fn round_trip_is_lossless() {
        for m in [make_model(1, 2, 20.0, 64).unwrap(), make_model(2, 1, 20.0, 16).unwrap()] {
            let psi = m.sample(|x| (x[0] * 0.37).sin() + 1.0 / 3.0 + x[1].exp().ln_1p());
            let back = read_potential(&m, &write_potential(&m, &psi).unwrap()).unwrap();
            assert_eq!(back, psi);
            let mu = monge_ampere(&m, &m.reference()).unwrap();
            let back = read_measure(&m, &write_measure(&m, &mu).unwrap()).unwrap();
            assert_eq!(back.masses(), mu.masses());
        }
    }

    #[test]
    fn rejects_bad_input() {
        let m = make_model(1, 1, 20.0, 16).unwrap();
        let text = write_potential(&m, &m.reference()).unwrap();
        assert!(matches!(read_measure(&m, &text), Err(Error::Parse(_))));
        let other = make_model(1, 1, 20.0, 32).unwrap();
        assert!(matches!(read_potential(&other, &text), Err(Error::Parse(_))));
        let broken = text.replacen("e0\n", "e0 x\n", 1);
        assert!(matches!(read_potential(&m, &broken), Err(Error::Parse(_))));
        let tagged = write_potential_tagged(&m, &m.reference(), "config=ab12 seed=0").unwrap();
        assert_eq!(read_potential(&m, &tagged).unwrap(), m.reference());
        let bad = tagged.replacen("seed=0", "seed", 1);
        assert!(matches!(read_potential(&m, &bad), Err(Error::Parse(_))));
        let short: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        assert!(matches!(read_potential(&m, &short), Err(Error::LengthMismatch { .. })));
    }
}
