use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("eigenvalues ({lambda1}, {lambda2}) are not admissible for the {branch} branch")]
    InadmissibleEigenvalues {
        lambda1: f64,
        lambda2: f64,
        branch: &'static str,
    },
    #[error("no admissible partner eigenvalue: target {target} outside ({lo}, {hi})")]
    NoAdmissiblePartner { target: f64, lo: f64, hi: f64 },
    #[error("three-term coefficients violate c2 != 0, c0*c2 < c1^2: {0}")]
    StructureViolation(String),
    #[error("radial trajectory left the admissible region at r = {r}")]
    AdmissibilityLost { r: f64 },
    #[error("equation constant {c0} is not attainable: {reason}")]
    RangeExceeded { c0: f64, reason: String },
    #[error("point or radius outside the solution domain: {0}")]
    DomainViolation(String),
    #[error("convexity margin violated: {0}")]
    ConvexityMargin(String),
    #[error("gradient-map inversion failed at ({x1}, {x2}): residual {residual}")]
    InversionFailure { x1: f64, x2: f64, residual: f64 },
    #[error("kmax = {kmax} aliases on a grid of {n_theta} angles")]
    Aliasing { kmax: usize, n_theta: usize },
    #[error("tail integral diverges: {0}")]
    TailDivergence(String),
    #[error("decay fit needs at least 6 rings spanning 2 decades, got {rings} rings over {decades:.2} decades")]
    InsufficientRings { rings: usize, decades: f64 },
    #[error("extrapolation not converging: {0}")]
    NotConverging(String),
    #[error("quadrature not converged: doubling the nodes changed {what} by {change:e}")]
    QuadratureStall { what: String, change: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
