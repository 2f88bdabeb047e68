//! Split-step simulation of the free Schrödinger equation under a periodic
//! train of Kerr kicks, with the stroboscopic soliton family, a fixed-point
//! refiner, and lab-unit conversion.
//!
//! One period of the dynamics is free flight for `eps` followed by the kick
//! `psi -> psi e^{i eps |psi|^2}`.

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod propagator;
pub mod refiner;
pub mod snapshot;
pub mod soliton;
pub mod units;
pub mod wavefunction;

pub use num_complex::Complex64;

pub use diagnostics::{comoving_fidelity, fidelity, fidelity_error_curve, width_curve, ObservableSeries};
pub use error::{Error, Result};
pub use grid::Grid;
pub use propagator::{
    evolve, evolve_with, free_step, kick, kicked_step, KickModel, Protocol, RecordSpec, Sampling,
    Trajectory,
};
pub use refiner::{
    extract_alpha, find_fixed_point, fixed_point_residual, PhaseConvention, Preconditioner,
    RefinerOptions, RefinerReport,
};
pub use soliton::{SolitonParams, ALPHA};
pub use units::{ExperimentalParams, PhysicalParams, Scaling};
pub use wavefunction::{Moments, WaveFunction};
