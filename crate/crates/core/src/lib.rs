//! Phonon maser driven by a stream of longitudinally coupled spins.
//!
//! Each spin is prepared in a chosen state, interacts with the mechanical
//! mode for a time `τ` through `H = b†b - λσ_z(b + b†)`, and is then either
//! post-selected or discarded. The oscillator state evolves under the
//! resulting gain map and thermal damping, either spin by spin or through
//! the coarse-grained master equation, and is compared with the closed-form
//! displaced-thermal solution.

// Negated comparisons are how NaN parameters get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod closed_form;
pub mod config;
pub mod discrete;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod lindblad;
pub mod master;
pub mod observables;
pub mod ode;
pub mod oracle;
pub mod spin;

pub use channel::{
    conditioned_branch_map, gain_map, Branch, ChannelMode, FailureWeighting, GainChannel, GainMap,
    GainOutput,
};
pub use closed_form::{ClosedFormSolution, FpCoefficients};
pub use config::{MaserConfig, RateConvention};
pub use discrete::{run_discrete, spins_to_steady_state, DiscreteRun, InjectionMode};
pub use error::{Error, Result};
pub use fock::{
    displacement, ladder_operators, matrix_exp, thermal_state, DensityMatrix, FockOperator,
    LadderOperators, StateDiagnostics, DEFAULT_CUTOFF,
};
pub use linalg::CMatrix;
pub use lindblad::ThermalBath;
pub use master::{
    integrate_ode, integrate_ode_with, maser_rhs, IntegrationOptions, MasterEquation, TimeSeries,
    Trajectory,
};
pub use num_complex::Complex64;
pub use observables::{
    g2_zero_numeric, mean_phonons, number_distribution, poisson_pmf, total_variation, wigner,
};
pub use ode::{OdeOptions, OdeStats};
pub use oracle::{
    fokker_planck_residual, g2_series_oracle, joint_evolution_oracle, pump_map_power, verify,
    VerifyReport,
};
pub use spin::{spin_overlap_probability, SpinVector};

/// Version of this library, echoed into run summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
