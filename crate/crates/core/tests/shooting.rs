//! Ground-state invariants across the branch.

use cqlab_core::branch::solve_row;
use cqlab_core::shooting::{b0, solve_ground_state, ShootingError, ShootingOptions};

const SAMPLE: [f64; 8] = [1e-3, 0.01, 0.023926, 0.05, 0.1, 0.15, 0.18, 0.186];

#[test]
fn profiles_are_monotone_and_below_the_plateau() {
    let opts = ShootingOptions::default();
    for w in SAMPLE {
        let p = solve_ground_state(w, &opts).unwrap();
        assert!(p.is_monotone(), "omega = {w}");
        // near 3/16 the deficit b0 - P(0) is below one ulp of b0
        assert!(p.center_value <= b0(w), "omega = {w}");
        assert!(w > 0.15 || p.center_value < b0(w), "omega = {w}");
        assert!(p.ode_residual() < 1e-9, "omega = {w}: {}", p.ode_residual());
    }
}

#[test]
fn solves_are_bit_identical() {
    let opts = ShootingOptions::default();
    for w in [0.03, 0.17] {
        let a = solve_ground_state(w, &opts).unwrap();
        let b = solve_ground_state(w, &opts).unwrap();
        assert_eq!(a.center_value.to_bits(), b.center_value.to_bits());
        assert_eq!(a, b);
    }
}

#[test]
fn wall_trajectories_are_classified() {
    // shots ending inside the wall once confused the tail classification here
    let opts = ShootingOptions::default();
    for w in [0.181525, 0.1815, 0.18155] {
        let row = solve_row(w, &opts).unwrap();
        assert!(row.functionals.mass > 0.0);
    }
}

#[test]
fn frequencies_outside_the_range_are_rejected() {
    let opts = ShootingOptions::default();
    for w in [0.0, -0.1, 0.1875, 0.2, f64::NAN] {
        assert!(matches!(solve_ground_state(w, &opts), Err(ShootingError::InvalidOmega(_))), "omega = {w}");
    }
}
