//! Simulator for the 1-D transmission wave equation between two elastic
//! materials with generalized (exponentially weighted) Caputo fractional
//! damping.
//!
//! Two media occupy (-L, 0) and (0, L) with densities `rho1`, `rho2` and
//! elastic constants `k1`, `k2`; displacement and elastic flux are continuous
//! at the interface and the ends are clamped. The fractional damping term is
//! realized through its diffusive representation: a family of first-order
//! auxiliary modes `phi(t, xi)` driven by the local velocity, whose
//! quadrature-weighted aggregate is the damping force. Time integration
//! couples a Newmark scheme for the displacement with a Crank-Nicolson update
//! of the modes, solved together through one symmetric tridiagonal system per
//! step; with the default parameters the discrete energy satisfies an exact
//! per-step balance `E_next - E + D = 0` with nonnegative dissipation `D`.
//!
//! Modules:
//! - [`model`]: parameter types, validation, initial-condition presets, and
//!   the flat key-value config format.
//! - [`assembly`]: diagonal mass matrix and symmetric tridiagonal stiffness
//!   matrix with the interface row.
//! - [`fractional`]: diffusive modes, their Crank-Nicolson coefficients, the
//!   damping force, and a direct-convolution oracle used for validation.
//! - [`stepper`]: the coupled implicit integrator and the run driver.
//! - [`analysis`]: discrete energy, dissipation and identity residuals,
//!   decay-rate fitting, and reflection measurement.
//! - [`cli`]: the command-line front end (`run`, `sweep`,
//!   `validate-fractional`, `preset`).
//!
//! ```
//! use fracwave::{cli, stepper};
//!
//! let mut config = cli::preset_config("example1_desk").unwrap();
//! config.time.steps = 5;
//! fracwave::model::validate(&config).unwrap();
//! let summary = stepper::run(&config, &mut stepper::NullObserver).unwrap();
//! assert_eq!(summary.energy.len(), 6);
//! assert!(summary.energy[5].e_raw < summary.energy[0].e_raw);
//! ```

pub mod analysis;
pub mod assembly;
pub mod cli;
pub mod fractional;
pub mod model;
pub mod stepper;
