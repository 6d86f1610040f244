use serde::Serialize;

use pluripot::balanced::{balanced_sweep, make_setting, Balanced, KSweepRow, SectionBasis};
use pluripot::electrostatics::{capacity_report, log_energy, CapacityReport, SignedRadialMeasure, WeightedCompact};
use pluripot::envelope::CompactSet;
use pluripot::functionals::EnergyReport;
use pluripot::measures::MeasureSpec;
use pluripot::sampling::{random_potential, rng};
use pluripot::solver::{solve_ke_fano, solve_ma};
use pluripot::suites::{inequality_suites, SuiteResult};
use pluripot::ToricModel;

use crate::config::{BalancedConfig, CapacityConfig, KeConfig, LogEnergyConfig, ReportConfig, SetSpec, SolveMaConfig};
use crate::output::Output;
use crate::Failure;

pub fn solve_ma_cmd(cfg: &SolveMaConfig, model: &ToricModel, out: &Output) -> Result<(), Failure> {
    let mu = cfg.measure.build(model)?;
    let (psi, trace) = solve_ma(model, &mu, &cfg.solver)?;
    out.potential("potential.txt", model, &psi)?;
    out.measure("measure.txt", model, &mu)?;
    out.csv("residual.csv", &trace.to_csv())?;
    out.json("energy.json", &EnergyReport::new(model, &psi, Some(&mu), true)?)
}

#[derive(Serialize)]
struct KeSummary {
    c: f64,
    residual: f64,
    iterations: usize,
    #[serde(rename = "F_minus")]
    f_minus: Vec<f64>,
    /// Smallest and largest slope of the potential between nodes.
    slope_range: [f64; 2],
}

fn slope_range(model: &ToricModel, psi: &pluripot::Potential) -> [f64; 2] {
    let x = model.axis();
    let v = psi.values();
    (1..v.len())
        .map(|i| (v[i] - v[i - 1]) / (x[i] - x[i - 1]))
        .fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], s| [lo.min(s), hi.max(s)])
}

pub fn ke_cmd(cfg: &KeConfig, model: &ToricModel, out: &Output, seed: u64) -> Result<(), Failure> {
    let init = if cfg.random_init {
        Some(random_potential(model, &mut rng(seed))?)
    } else {
        None
    };
    let sol = solve_ke_fano(model, init.as_ref(), &cfg.solver)?;
    out.potential("potential.txt", model, &sol.potential)?;
    out.csv("trace.csv", &sol.trace.to_csv())?;
    out.json(
        "ke.json",
        &KeSummary {
            c: sol.c,
            residual: sol.residual,
            iterations: sol.f_minus.len(),
            slope_range: slope_range(model, &sol.potential),
            f_minus: sol.f_minus,
        },
    )
}

#[derive(Serialize)]
struct SweepSummary {
    setting: String,
    measure: Option<String>,
    limit: &'static str,
    rows: Vec<SweepRow>,
}

#[derive(Serialize)]
struct SweepRow {
    #[serde(flatten)]
    row: KSweepRow,
    iterations: usize,
    damped: bool,
    fp_gap: f64,
    /// `J(f_k(H)) / J_k(H)` at the fixed point.
    j_ratio: Option<f64>,
}

pub fn balanced_cmd(cfg: &BalancedConfig, model: &ToricModel, out: &Output) -> Result<(), Failure> {
    let mu = cfg.measure.as_ref().map(|m| m.build(model)).transpose()?;
    let setting = make_setting(&cfg.setting, model, mu.clone())?;
    // Closed-form limits where the continuum solution is the reference.
    let (limit, how) = match (&cfg.measure, &mu) {
        (Some(MeasureSpec::Fs | MeasureSpec::FsNodal), _) => (model.reference(), "reference"),
        (_, Some(mu)) => (solve_ma(model, mu, &cfg.solver)?.0, "solve_ma"),
        _ => (solve_ke_fano(model, None, &cfg.solver)?.potential, "solve_ke_fano"),
    };
    let sweep = balanced_sweep(setting.as_ref(), model, &cfg.ks, Some(&limit), &cfg.options)?;
    let mut rows = Vec::with_capacity(sweep.len());
    for (row, sol) in sweep {
        let ctx = Balanced::new(setting.as_ref(), model, SectionBasis::new(model, row.k)?)?;
        let j_ratio = ctx.j_ratio(&sol.form)?;
        out.csv(&format!("trace_k{:03}.csv", row.k), &sol.trace.to_csv())?;
        rows.push(SweepRow {
            iterations: sol.trace.records.len(),
            damped: sol.trace.damped,
            fp_gap: sol.trace.final_gap(),
            j_ratio,
            row,
        });
    }
    out.json(
        "sweep.json",
        &SweepSummary {
            setting: cfg.setting.clone(),
            measure: cfg.measure.as_ref().map(|m| m.name().to_string()),
            limit: how,
            rows,
        },
    )
}

/// Grid coordinates that set boundaries must hit exactly.
pub fn capacity_anchors(cfg: &CapacityConfig) -> Vec<f64> {
    let mut anchors = cfg.model.anchors.clone();
    for s in &cfg.sets {
        match *s {
            SetSpec::Disk { radius } => anchors.push(2.0 * radius.ln()),
            SetSpec::Annulus { a, b } => anchors.extend([a, b]),
            SetSpec::Window => {}
        }
    }
    anchors.sort_by(f64::total_cmp);
    anchors.dedup();
    anchors
}

pub fn capacity_cmd(cfg: &CapacityConfig, model: &ToricModel, out: &Output) -> Result<(), Failure> {
    let mut reports: Vec<CapacityReport> = Vec::with_capacity(cfg.sets.len());
    for s in &cfg.sets {
        let kv = match *s {
            SetSpec::Disk { radius } => WeightedCompact::disk(model, radius)?,
            SetSpec::Annulus { a, b } => WeightedCompact::annulus(model, a, b)?,
            SetSpec::Window => {
                let mut w = WeightedCompact::new(model, CompactSet::whole(model), vec![0.0; model.len()])?;
                w.k_descriptor = "window".into();
                w.v_descriptor = "0".into();
                w
            }
        };
        reports.push(capacity_report(model, &kv)?);
    }
    out.json("capacity.json", &reports)
}

#[derive(Serialize)]
struct LogEnergySummary {
    measure: String,
    minus_reference: bool,
    #[serde(rename = "I")]
    i: f64,
}

pub fn logenergy_cmd(cfg: &LogEnergyConfig, model: &ToricModel, out: &Output) -> Result<(), Failure> {
    let mu = cfg.measure.build(model)?;
    let lam = if cfg.minus_reference {
        SignedRadialMeasure::minus_reference(model, mu)?
    } else {
        SignedRadialMeasure::positive(model, mu)?
    };
    out.json(
        "logenergy.json",
        &LogEnergySummary {
            measure: cfg.measure.name().to_string(),
            minus_reference: cfg.minus_reference,
            i: log_energy(model, &lam)?,
        },
    )
}

#[derive(Serialize)]
struct ModelVerdict {
    grid: String,
    pairs: usize,
    suites: Vec<SuiteResult>,
}

#[derive(Serialize)]
struct Verdict {
    passed: bool,
    models: Vec<ModelVerdict>,
}

/// Returns whether every suite passed.
pub fn report_cmd(cfg: &ReportConfig, models: &[ToricModel], out: &Output, seed: u64) -> Result<bool, Failure> {
    let mut verdict = Verdict {
        passed: true,
        models: Vec::with_capacity(models.len()),
    };
    for model in models {
        let suites = inequality_suites(model, cfg.pairs, seed)?;
        verdict.passed &= suites.iter().all(SuiteResult::passed);
        verdict.models.push(ModelVerdict {
            grid: model.descriptor(),
            pairs: cfg.pairs,
            suites,
        });
    }
    out.json("report.json", &verdict)?;
    Ok(verdict.passed)
}
