//! Results must not depend on the number of workers.

use cqlab::parallel::{gnh_run, pool, sweep};
use cqlab_core::shooting::ShootingOptions;

#[test]
fn gnh_run_is_independent_of_workers() {
    let one = gnh_run(&pool(1).unwrap(), 1.0, 0.17, 40, 2718);
    let three = gnh_run(&pool(3).unwrap(), 1.0, 0.17, 40, 2718);
    assert_eq!(one, three);
    let other_seed = gnh_run(&pool(1).unwrap(), 1.0, 0.17, 40, 2719);
    assert_ne!(one.worst_ratio, other_seed.worst_ratio);
}

#[test]
fn sweep_is_independent_of_workers() {
    let omegas = [0.09, 0.02, 0.05, 0.15];
    let opts = ShootingOptions::default();
    let a = sweep(&pool(1).unwrap(), &omegas, &opts);
    let b = sweep(&pool(4).unwrap(), &omegas, &opts);
    assert_eq!(a, b);
    assert!(a.is_ordered());
    assert_eq!(a.rows.len(), 4);
}
