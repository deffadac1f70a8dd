//! Single runs and K-sweeps driven by configuration.

use std::path::Path;

use crate::assembly::Discretization;
use crate::config::{ModelKind, RunConfig, SweepConfig};
use crate::diagnostics::{error_table, ErrorTableRow, FieldSeries, Location, RobinRun, RunSeries};
use crate::error::Result;
use crate::initial::make_initial_data;
use crate::model::{energy_limit, energy_robin, Energy};
use crate::output;
use crate::stepper::{LimitState, LimitStepper, RobinState, RobinStepper};

/// One row of the per-step table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub energy: Energy,
    pub mass_bulk: f64,
    pub mass_surf: f64,
    pub newton_iters: usize,
    pub residual: f64,
}

/// Per-step records of a run and its fields at steps `1..=N`. The surface
/// series holds `V` (Robin) or `(U|_Γ − β)/α` (limit).
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub steps: Vec<StepRecord>,
    pub series: RunSeries,
}

impl RunRecord {
    pub fn energies(&self) -> Vec<f64> {
        self.steps.iter().map(|r| r.energy.total).collect()
    }
}

/// Fields handed to the observer after each step, including step 0.
pub struct Frame<'a> {
    pub step: usize,
    pub u: &'a [f64],
    pub v: &'a [f64],
}

/// Runs `config` in memory on `disc`, calling `observe` after every step.
pub fn simulate(
    config: &RunConfig,
    disc: &Discretization,
    mut observe: impl FnMut(&Frame) -> Result<()>,
) -> Result<RunRecord> {
    config.validate()?;
    let params = config.params();
    let transmission = params.transmission;
    let (u0, v0) = make_initial_data(config, &disc.mesh, &transmission)?;
    let mut steps = Vec::with_capacity(config.n_steps + 1);
    let mut u_series = FieldSeries::new(config.tau, Location::Bulk);
    let mut v_series = FieldSeries::new(config.tau, Location::Surface);
    let record = |step: usize, energy: Energy, mass_bulk: f64, mass_surf: f64, iters: usize, residual: f64| StepRecord {
        step,
        time: step as f64 * config.tau,
        energy,
        mass_bulk,
        mass_surf,
        newton_iters: iters,
        residual,
    };

    match config.model {
        ModelKind::Robin => {
            let mut state = RobinState::initial(u0, v0.unwrap_or_default());
            let mut stepper = RobinStepper::new(disc, params.clone(), config.newton)?;
            let energy = energy_robin(&state.u, &state.v, &params, disc)?;
            steps.push(record(0, energy, state.bulk_mass(disc), state.surface_mass(disc), 0, 0.0));
            observe(&Frame {
                step: 0,
                u: &state.u,
                v: &state.v,
            })?;
            for _ in 0..config.n_steps {
                let out = stepper.step(&state)?;
                state = out.state;
                let energy = energy_robin(&state.u, &state.v, &params, disc)?;
                steps.push(record(
                    state.step_index,
                    energy,
                    state.bulk_mass(disc),
                    state.surface_mass(disc),
                    out.newton_iters,
                    out.residual,
                ));
                observe(&Frame {
                    step: state.step_index,
                    u: &state.u,
                    v: &state.v,
                })?;
                u_series.snapshots.push(state.u.clone());
                v_series.snapshots.push(state.v.clone());
            }
        }
        ModelKind::Limit => {
            let mut state = LimitState::initial(u0, disc.n_boundary());
            let mut stepper = LimitStepper::new(disc, params.clone(), config.newton)?;
            let energy = energy_limit(&state.u, &params, disc)?;
            let v = state.surface_phase(disc, params.alpha, params.beta);
            steps.push(record(0, energy, state.bulk_mass(disc), state.surface_mass(disc), 0, 0.0));
            observe(&Frame {
                step: 0,
                u: &state.u,
                v: &v,
            })?;
            for _ in 0..config.n_steps {
                let out = stepper.step(&state)?;
                state = out.state;
                let energy = energy_limit(&state.u, &params, disc)?;
                let v = state.surface_phase(disc, params.alpha, params.beta);
                steps.push(record(
                    state.step_index,
                    energy,
                    state.bulk_mass(disc),
                    state.surface_mass(disc),
                    out.newton_iters,
                    out.residual,
                ));
                observe(&Frame {
                    step: state.step_index,
                    u: &state.u,
                    v: &v,
                })?;
                u_series.snapshots.push(state.u.clone());
                v_series.snapshots.push(v);
            }
        }
    }
    Ok(RunRecord {
        steps,
        series: RunSeries {
            u: u_series,
            v: v_series,
        },
    })
}

/// Runs `config` on `disc`, writing `steps.csv` and the requested
/// snapshots into `dir`.
pub fn run_in_dir(config: &RunConfig, disc: &Discretization, dir: &Path) -> Result<RunRecord> {
    let every = config.snapshot_every;
    let record = simulate(config, disc, |frame| {
        if every > 0 && frame.step % every == 0 {
            output::write_snapshot(dir, frame.step, &disc.mesh, frame.u, frame.v)?;
            if config.vtk {
                output::write_vtk(dir, frame.step, &disc.mesh, frame.u)?;
            }
        }
        Ok(())
    })?;
    output::write_file(&dir.join("steps.csv"), &output::steps_csv(&record.steps))?;
    Ok(record)
}

/// Runs a configuration end to end into its `output_dir`.
pub fn run_simulation(config: &RunConfig) -> Result<RunRecord> {
    config.validate()?;
    let disc = Discretization::unit_square(config.n_cells)?;
    run_in_dir(config, &disc, &config.output_dir)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ErrorTableRow>,
}

fn k_dir_name(k: f64) -> String {
    format!("K_{}", output::format_sci(k, 3))
}

/// Runs the reference once and every penalty in `K_list` once, in order,
/// then writes `sweep.csv` and `sweep_table.txt` into `output_dir`. Each
/// run's `steps.csv` goes into its own subdirectory.
pub fn run_sweep(config: &SweepConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let disc = Discretization::unit_square(config.base.n_cells)?;
    let out = &config.base.output_dir;
    let reference_cfg = config.reference_run();
    let reference = run_in_dir(&reference_cfg, &disc, &out.join("reference"))?;
    let mut runs = Vec::with_capacity(config.k_list.len());
    for &k in &config.k_list {
        let record = run_in_dir(&config.robin_run(k), &disc, &out.join(k_dir_name(k)))?;
        runs.push(RobinRun {
            k,
            series: record.series,
        });
    }
    let rows = error_table(&reference.series, &runs, &config.base.transmission(), &disc)?;
    output::write_file(&out.join("sweep.csv"), &output::sweep_csv(&rows))?;
    output::write_file(&out.join("sweep_table.txt"), &output::display_table(&rows))?;
    Ok(ConvergenceReport { rows })
}
