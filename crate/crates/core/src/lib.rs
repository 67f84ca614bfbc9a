//! Numerical toolkit for one-dimensional driftless SDEs `dX = σ(X) dB`.
//!
//! The crate classifies the boundary point 0 via the Feller test and decides
//! the pathwise-uniqueness predicate for monotone coefficients, builds the
//! middle-λ Cantor function and its iterates, runs coupled Euler-Maruyama
//! experiments that measure strong convergence rates for the stability
//! problem `σ_n -> σ`, and checks the forward (Fokker-Planck) equation in
//! weak form by Monte Carlo.
//!
//! Everything is deterministic given a seed: each Monte Carlo path owns a
//! counter-keyed random stream, so results are independent of worker count
//! and scheduling.

pub mod cantor;
pub mod coefficients;
pub mod error;
pub mod feller;
pub mod fokker_planck;
pub mod quad;
pub mod simulate;
pub mod stability;

pub use cantor::{
    build_iterate, holder_lambda, iterate_error_bound, CantorBase, CantorFunction, CantorMode,
};
pub use coefficients::{
    check_regularity, sup_distance, DiffusionSpec, Domain, HolderSpec, Kind, NakaoLeGallSpec,
    Regularity, SamplingPlan,
};
pub use error::{Error, Result};
pub use feller::{
    classify_boundary, mu_integral, nu_integral, BoundaryReport, Classification, FellerConfig,
    LimitClass,
};
pub use fokker_planck::{
    default_test_set, density_estimate, smooth_solution, weak_residual, DensityEstimate,
    PolyGrowth, TestFunction, WeakResidualReport,
};
pub use quad::QuadraturePlan;
pub use simulate::{
    brownian_increments, coupled_error, euler_maruyama, mc_estimate, mc_samples, path_rng,
    CoupledErrorSample, MCEstimate, SimConfig, Statistic,
};
pub use stability::{
    cantor_family, constant_family, fit_log_form, fit_rate, nlg_c_l, power_law_shift_family,
    run_rate_experiment, theoretical_bound, yw_build, yw_sandwich_check, BoundParams, LogFormFit,
    PowerFit, RateExperimentResult, RateFit, RatePoint, RateProblem, Regime, SandwichReport,
    TheoreticalBound, YWFunction,
};
