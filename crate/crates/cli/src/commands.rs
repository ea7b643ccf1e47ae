use ffgas_core::verify::{run_all, Comparison, CriterionReport, VerifySettings};
use ffgas_core::{energy, eos_report, level_observables, Ensemble, EosRecord, Schedule};

use crate::config::RunConfig;
use crate::table::{Cell, Table};
use crate::Failure;

pub const LEVEL_COLUMNS: [&str; 5] = ["t", "n", "E_n", "F_n", "E_ff"];

/// Per-level energy, force and driven energy at each sweep time.
pub fn levels(config: &RunConfig) -> Result<Table, Failure> {
    let conf = config.confinement()?;
    let traj = config.trajectory()?;
    let mut table = Table::new(&LEVEL_COLUMNS);
    for t in traj.sample_times(config.sweep.samples) {
        let k = traj.sample(t)?;
        for n in conf.ground_level()..=config.sweep.n_max {
            let obs = level_observables(&conf, n, &k)?;
            table.push(vec![
                Cell::Float(t),
                Cell::Int(u64::from(n)),
                Cell::Float(energy(&conf, n, k.length)?),
                Cell::Float(obs.force),
                Cell::Float(obs.energy_ff),
            ]);
        }
    }
    Ok(table)
}

/// Equation-of-state records; warnings are returned for stderr.
pub fn eos(config: &RunConfig) -> Result<(Table, Vec<String>), Failure> {
    let gas = config
        .gas
        .as_ref()
        .ok_or_else(|| Failure::Config("the eos command needs a `gas` section".into()))?;
    let conf = config.confinement()?;
    let traj = config.trajectory()?;
    let ens = Ensemble::new(&conf, gas.particles, gas.t0, traj.l0())?;
    let times = traj.sample_times(config.sweep.samples);
    let report = eos_report(&conf, &ens, &traj, &times, gas.regime)?;
    let mut table = Table::new(&EosRecord::COLUMNS);
    for r in &report.records {
        table.push(r.values().iter().map(|&v| Cell::Float(v)).collect());
    }
    Ok((table, report.warnings))
}

pub fn verify_settings(config: &RunConfig) -> VerifySettings {
    VerifySettings {
        tdse_dt: config.tdse.dt,
        tdse_points: config.tdse.points,
        tdse_frame: config.tdse.frame,
        wall_height: config.tdse.wall_height,
        quadrature_points: config.grid.points,
        width_factor: config.grid.x_max_factor,
        ..VerifySettings::default()
    }
}

pub const CHECK_COLUMNS: [&str; 6] = ["criterion", "name", "passed", "measured", "comparison", "threshold"];

pub fn verify(config: &RunConfig) -> Result<Vec<CriterionReport>, Failure> {
    Ok(run_all(&verify_settings(config))?)
}

pub fn check_table(reports: &[CriterionReport]) -> Table {
    let mut table = Table::new(&CHECK_COLUMNS);
    for r in reports {
        for c in &r.checks {
            let op = match c.comparison {
                Comparison::AtMost => "<=",
                Comparison::AtLeast => ">=",
            };
            table.push(vec![
                Cell::Int(u64::from(r.id)),
                Cell::Text(c.name.clone()),
                Cell::Bool(c.passed),
                Cell::Float(c.measured),
                Cell::Text(op.to_string()),
                Cell::Float(c.threshold),
            ]);
        }
    }
    table
}
