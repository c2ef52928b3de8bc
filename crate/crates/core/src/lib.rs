//! Equilibrium of a suspension bridge deck hanging from a single extensible
//! cable: model parameters, a collocation discretization of the hinged fourth
//! order boundary value problem, the energy functional and the fixed-point
//! machinery for the cable elongation.
//!
//! ```
//! use melan::{solve_full, BridgeParams, LcMode, LoadProfile, ModelVariant, SolverOptions};
//!
//! let report = solve_full(
//!     &BridgeParams::wollmann(),
//!     ModelVariant::Full,
//!     &LoadProfile::on_interval(0.0, 230.0, 30.0),
//!     &SolverOptions::default().with_intervals(400),
//!     LcMode::Exact,
//! )
//! .unwrap();
//! assert!(report.converged);
//! assert!(report.gamma_fix > 0.0);
//! ```

pub mod analysis;
pub mod bridge_model;
pub mod error;
pub mod exec;
pub mod functionals;
pub mod grid;
pub mod solver;

pub use analysis::{
    check_uniqueness_conditions, compare_variants, energy_scan, fixed_point_slope, slope_step, solve_batch,
    sweep_gamma_map, Crossing, EnergyScanRow, GammaMapRow, GammaMapTable, UniquenessReport, VariantComparison,
};
pub use bridge_model::{derive_geometry, nondimensionalize, BridgeParams, CableGeometry, LcMode, ScaledCoefficients};
pub use error::{MelanError, Result};
pub use exec::Execution;
pub use functionals::{energy, energy_directional, gamma, gamma_w, gamma_w_roots, EnergyBreakdown};
pub use grid::{dual_norm, inner_y, norm_y, GridFunction, LoadProfile, Mesh};
pub use solver::{
    contraction_solve, extremum_analysis, solve_full, solve_inner, ContractionReport, Extremum, ExtremumKind,
    ModelVariant, Problem, SolveReport, SolverOptions,
};
