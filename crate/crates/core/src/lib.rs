//! Ground states, functionals, linearization, virial rescalings and radial
//! dynamics for the cubic-quintic NLS
//!
//! ```text
//! i u_t = -Δu - |u|²u + |u|⁴u      on R³
//! ```
//!
//! The crate is `no_std` and needs only `alloc`. Anything touching files,
//! threads or an FFT backend lives in the `cqlab` companion crate.

#![no_std]
#![warn(missing_docs)]
// `!(x > y)` is used on purpose so that NaN takes the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod branch;
pub mod dynamics;
pub mod functionals;
pub mod linearization;
pub mod ode;
pub mod quadrature;
pub mod region;
pub mod roots;
pub mod rescale;
pub mod sampling;
pub mod shooting;

pub use branch::{BranchRow, BranchTable};
pub use dynamics::{RadialField, SineTransform};
pub use functionals::{FunctionalSet, RadialFunction, Tail};
pub use linearization::{DeltaSolution, TerminalBehavior};
pub use region::RegionModel;
pub use rescale::RescaledPoint;
pub use shooting::{ProfileKind, ShootingOptions, ShotOutcome, SolitonProfile};

/// Upper end of the soliton frequency range, 3/16.
pub const OMEGA_MAX: f64 = 3.0 / 16.0;

/// True when `omega` lies strictly inside (0, 3/16).
pub fn omega_in_range(omega: f64) -> bool {
    omega > 0.0 && omega < OMEGA_MAX
}
