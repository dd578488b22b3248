//! A finite-truncation white-noise calculus engine.
//!
//! Random variables live in a truncated Wiener chaos: finitely many Hermite
//! basis directions (K), a bounded polynomial degree (N_max), and explicit
//! headroom for operations that raise degree. Within that hard truncation
//! every operation is exact in exact arithmetic, so algebraic identities
//! (Wick versus pointwise products, S-transform factorization, Malliavin
//! duality, integration by parts, Ito/Stratonovich relations) hold to
//! rounding and are enforced by tests at pinned tolerances rather than
//! asymptotically.
//!
//! The modules build on each other in order:
//!
//! - [`index`], [`policy`], [`chaos`]: multi-indices, truncation policies,
//!   and the chaos-vector algebra (Wick/pointwise products, pairing,
//!   S-transform, Wick exponentials, Hida norms).
//! - [`basis`], [`func`]: the Hermite function basis with Gauss quadrature,
//!   and the small closed set of real-line functions used as smoothing
//!   kernels and probe directions.
//! - [`malliavin`]: derivative, directional derivative, translation.
//! - [`grid`], [`gelfand`]: time grids and the weak (pairing-level)
//!   integral of chaos-vector-valued maps, with Fubini, dominated and
//!   Vitali convergence checkers.
//! - [`pathwise`]: white noise as a process, Skorohod/Stratonovich/Ito
//!   integrals, and the identity checkers connecting them.
//! - [`volterra`]: kernel-transformed (Volterra) stochastic integrals.
//! - [`report`], [`tol`], [`fixtures`]: convergence-report rows and rate
//!   fits, shared tolerance defaults, deterministic RNG helpers.

pub mod basis;
pub mod chaos;
pub mod error;
pub mod fixtures;
pub mod func;
pub mod gelfand;
pub mod grid;
pub mod index;
pub mod malliavin;
pub mod pathwise;
pub mod policy;
pub mod report;
pub mod tol;
pub mod volterra;

pub use basis::{build_basis, project, HermiteBasis, Projection, QuadratureSpec, RangePolicy};
pub use chaos::{
    abs_gap, hida_norm, pairing, pointwise_product, rel_gap, s_transform, wick_exp, wick_product,
    ChaosVector,
};
pub use error::{Error, Result};
pub use func::FunctionOnR;
pub use gelfand::{
    dominated_check, fubini_check, gelfand_integrate, gelfand_integrate_par, symdiff_bound_check,
    vitali_check, ChaosOp, ConvergenceReport, MeasureGrid, ProductIntegrand, TestFamily,
    VitaliCertificate, WeakIntegrand,
};
pub use grid::{QuadratureRule, TimeGrid};
pub use index::MultiIndex;
pub use malliavin::{
    directional_derivative, directional_lower, malliavin_at, translate, translate_coeffs,
    translation_derivative_check, DerivativeMode,
};
pub use pathwise::{
    adapted_brownian_steps, duality_check, ibp_check, integrand_stability_check,
    integrator_stability_check, ito_simple_integral, pull_out_constant, raw_noise_process,
    relation_check, skorohod_integral, smoothed_noise_process, smoothed_white_noise,
    stochastic_fubini_check, stratonovich_integral, white_noise, AdaptedProcess, AdaptedStep,
    ChaosProcess, CombineRule, IntegratorSpec, OperandOrder, SmoothingProfile,
};
pub use policy::{OverflowMode, TruncationPolicy};
pub use report::{fit_loglog_slope, ReportRow};
pub use tol::Tolerances;
pub use volterra::{
    dual_path_order_study, kg_apply, volterra_formal_derivative, volterra_ito,
    volterra_stratonovich, DualPathStudy, Kernel, VolterraProcessSpec,
};
