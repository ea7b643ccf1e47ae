//! Fast-forward expansion of an ideal one-dimensional Fermi gas.
//!
//! A gas of non-interacting spin-½ fermions sits in either a harmonic trap
//! ("soft wall") or a box ("hard wall") whose size `L(t)` is driven by a
//! fast-forward schedule. The added driving potential `−(m/2)(L̈/L)x²` keeps
//! every particle in its instantaneous eigenstate, so the Fermi-Dirac
//! occupations frozen at `t = 0` stay exact and the gas's mean force and
//! internal energy follow in closed form.
//!
//! Modules, bottom-up:
//!
//! * [`trajectory`] – the size schedule `L(t)` and its derivatives.
//! * [`spectra`] – eigenvalues, eigenfunctions and density of states.
//! * [`fastforward`] – the phase `θ`, the driving potential and `ψ_FF`.
//! * [`observables`] – per-level force and energy, grid expectation values.
//! * [`statmech`] – the frozen ensemble, chemical potential and the
//!   equation-of-state report.
//! * [`tdse`] – Crank-Nicolson propagation used as an independent oracle.
//! * [`verify`] – the acceptance checks, shared by the CLI and the tests.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fastforward;
pub mod linalg;
pub mod observables;
pub mod quad;
pub mod spectra;
pub mod statmech;
pub mod tdse;
pub mod trajectory;
pub mod verify;

pub use error::{Error, Result};
pub use fastforward::{
    dynamical_phase, ff_fields, ff_potential, ff_wavefunction, theta_from_integral, theta_phase, FFFields,
    FFWavefunction, ThetaIntegral,
};
pub use num_complex::Complex64;
pub use observables::{
    expectation_energy, expectation_force, force_variational_check, level_energy_ff, level_force, level_observables,
    Expectation, LevelObservables,
};
pub use spectra::{density_of_states, eigenfunction, energy, omega_of_length, Confinement, Grid, ModelKind, Units};
pub use statmech::{
    effective_temperature, eos_report, fermi_energy, fugacity_high_t, mean_energy, mean_force, mu_low_t,
    solve_mu_exact, table_sides, Ensemble, EnsembleMean, EosRecord, EosReport, Regime, TableSides,
};
pub use tdse::{
    default_basis, initial_state, populations, propagate, Boundary, Frame, Populations, PropagationResult,
    PropagatorConfig, TraceSample,
};
pub use trajectory::{CustomSchedule, KinematicSample, Schedule, Trajectory};
