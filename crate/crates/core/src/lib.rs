//! Principal eigenvalues, model spectra and min-max bounds for drift
//! Laplacians `Delta_V u = Delta u - g(V, grad u)` on geodesic balls.

pub mod comparison;
pub mod disk;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod linalg;
pub mod output;
pub mod quadrature;
pub mod sturm_liouville;
pub mod variational;

pub use error::{Error, Result};
pub use geometry::{
    extra_condition_lhs, make_space_form, radial_sectional_curvature, volume_ratio_theta, DriftProfile,
    ModelBall, WarpingFunction, WarpingKind,
};
pub use sturm_liouville::{
    assemble_spectrum, frobenius_exponent, principal_eigenpair, solve_radial_modes, sphere_eigenvalue,
    weighted_inner_product, RadialMode, RadialSamples, SolverOptions, SpectrumEntry, SpectrumTable,
};
pub use disk::{
    adjoint_principal, assemble_operator, build_model_disk, principal_eigenpair_2d, DiskOperator, DiskProblem,
    EigenPair2D, PolarGrid,
};
pub use variational::{
    barta_bracket, holland_bound, q_functional, rayleigh_minimum_radial, solve_g_v, solve_w_u, BartaBracket,
    HollandReport,
};
pub use comparison::{
    derivative_lambda_eps_2d, derivative_lambda_eps_radial, riccati_uniqueness, run_batch, run_case, sandwich,
    shipped_corpus, ComparisonCase, ComparisonMode, ComparisonOptions, ComparisonVerdict, RiccatiOptions,
    RiccatiReport, Subject,
};
