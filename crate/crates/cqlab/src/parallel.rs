//! Thread-pool drivers for sweeps and seeded property runs. Results never
//! depend on the number of workers: rows are keyed by frequency and every
//! trial draws from its own seeded stream.

use anyhow::{Context, Result};
use cqlab_core::branch::{solve_row, BranchError, BranchRow, BranchTable};
use cqlab_core::functionals::{evaluate, RadialFunction};
use cqlab_core::region::{virial_trial, RegionModel, VirialReport};
use cqlab_core::rescale::{gnh_trial, GnhReport};
use cqlab_core::shooting::{solve_ground_state, ShootingOptions, SolitonProfile};
use rayon::prelude::*;
use rayon::ThreadPool;

/// Pool with `jobs` workers (0 = one per core).
pub fn pool(jobs: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().context("building thread pool")
}

/// Per-frequency result of [`sweep_with`].
pub type SweepItem<T> = (f64, Result<(BranchRow, T), String>);

/// Solve every frequency and assemble the table.
pub fn sweep(pool: &ThreadPool, omegas: &[f64], opts: &ShootingOptions) -> BranchTable {
    let results: Vec<(f64, Result<BranchRow, BranchError>)> =
        pool.install(|| omegas.par_iter().map(|&w| (w, solve_row(w, opts))).collect());
    BranchTable::from_results(results)
}

/// Solve every frequency and apply `f` to each profile and its row.
/// Failed solves are returned as messages.
pub fn sweep_with<T, F>(pool: &ThreadPool, omegas: &[f64], opts: &ShootingOptions, f: F) -> Vec<SweepItem<T>>
where
    T: Send,
    F: Fn(&SolitonProfile, &BranchRow) -> T + Sync,
{
    pool.install(|| {
        omegas
            .par_iter()
            .map(|&omega| {
                let r = solve_ground_state(omega, opts).map_err(|e| e.to_string()).and_then(|p| {
                    let fs = evaluate(&RadialFunction::from(&p)).map_err(|e| e.to_string())?;
                    let row = BranchRow { omega, center_value: p.center_value, tail_constant: p.tail_constant, functionals: fs };
                    let extra = f(&p, &row);
                    Ok((row, extra))
                });
                (omega, r)
            })
            .collect()
    })
}

/// GNH property run over `trials` seeded bumps.
pub fn gnh_run(pool: &ThreadPool, alpha: f64, c_alpha: f64, trials: u64, seed: u64) -> GnhReport {
    let results: Vec<_> = pool.install(|| (0..trials).into_par_iter().map(|i| gnh_trial(alpha, c_alpha, seed, i)).collect());
    GnhReport::from_trials(alpha, c_alpha, seed, results)
}

/// Virial positivity run over `trials` seeded bumps.
pub fn virial_run(pool: &ThreadPool, model: &RegionModel, trials: u64, seed: u64) -> VirialReport {
    let results: Vec<_> = pool.install(|| (0..trials).into_par_iter().map(|i| virial_trial(model, seed, i)).collect());
    VirialReport::from_trials(seed, results)
}
