//! One place for every numerical tolerance used by the checkers.
//!
//! Three grades, by how much arithmetic sits between the two compared values:
//! `exact` for identities that hold coefficient-by-coefficient up to float
//! associativity, `identity` for identities routed through products of
//! projected functions, and `quadrature` for anything limited by the
//! quadrature rule rather than by rounding.

/// Tolerance configuration shared by tests, checkers and the CLI.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Max deviation of the basis Gram matrix from the identity; exceeding it
    /// is a hard build error.
    pub gram: f64,
    /// Relative bound for coefficient-level identities (float associativity only).
    pub exact: f64,
    /// Bound for identities that compose several operations or projected inputs.
    pub identity: f64,
    /// Bound for values limited by quadrature resolution.
    pub quadrature: f64,
    /// Threshold for the wick_exp tail-mass precondition (see `wick_exp`).
    pub tail_mass: f64,
    /// Largest |p| accepted for Hida norms in reports.
    pub p_max: i32,
    /// Minimum observed order for second-order finite-difference checks.
    pub fd_order: f64,
    /// Half-width of the accepted window around fitted rate 1.0 for the
    /// harmonic convergence families.
    pub rate_window: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gram: 1e-10,
            exact: 1e-12,
            identity: 1e-10,
            quadrature: 1e-8,
            tail_mass: 1e-12,
            p_max: 3,
            fd_order: 1.9,
            rate_window: 0.1,
        }
    }
}
