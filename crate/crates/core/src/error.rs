use std::path::PathBuf;

/// Errors raised by the library. Numerical failures that still produce a
/// usable result (an unconverged solve, a failed kernel check) are reported
/// in the result types instead.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("unknown kernel id `{0}` (catalog: quartic, cubic, wendland, corollary:<c1>,<c2>, tabulated:<path>)")]
    UnknownKernel(String),

    #[error("kernel `{label}` failed validation: {failed}")]
    KernelInvalid { label: String, failed: String },

    #[error("tabulated kernel {path}: {reason}")]
    Tabulated { path: PathBuf, reason: String },

    #[error("quadrature did not converge within {budget} points: last iterates {previous:e} and {last:e}")]
    QuadratureBudget { budget: usize, previous: f64, last: f64 },

    #[error("kernel `{0}` has zero mass")]
    ZeroMass(String),

    #[error("degenerate shape: {0}")]
    DegenerateShape(String),

    #[error("point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch { what: &'static str, expected: usize, got: usize },

    #[error("horizon {delta} is below twice the cell size {h}")]
    HorizonTooSmall { delta: f64, h: f64 },

    #[error("normalization weight vanishes at {location} node {index}")]
    VanishingWeight { location: &'static str, index: usize },

    #[error("penalty variant `{variant}` {reason}")]
    PenaltyContract { variant: &'static str, reason: String },

    #[error("operator has no quadratic form (p = {0})")]
    NotQuadratic(f64),

    #[error("negative curvature {curvature:e} along conjugate direction {iteration} (norm {direction_norm:e})")]
    Indefinite { iteration: usize, curvature: f64, direction_norm: f64 },

    #[error("mass form is not positive definite: smallest Ritz value {0:e}")]
    MassIndefinite(f64),

    #[error("eigen problem requires a stiffness with zero affine part")]
    AffineStiffness,

    #[error("unknown {what} `{id}`; catalog: {catalog}")]
    UnknownId { what: &'static str, id: String, catalog: String },

    #[error("{0}")]
    Incompatible(String),

    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("csv error on {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used in the CLI's JSON error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument { .. } => "invalid_argument",
            Error::UnknownKernel(_) => "unknown_kernel",
            Error::KernelInvalid { .. } => "kernel_invalid",
            Error::Tabulated { .. } => "tabulated_kernel",
            Error::QuadratureBudget { .. } => "quadrature_budget",
            Error::ZeroMass(_) => "zero_mass",
            Error::DegenerateShape(_) => "degenerate_shape",
            Error::OutsideDomain { .. } => "outside_domain",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::HorizonTooSmall { .. } => "horizon_too_small",
            Error::VanishingWeight { .. } => "vanishing_weight",
            Error::PenaltyContract { .. } => "penalty_contract",
            Error::NotQuadratic(_) => "not_quadratic",
            Error::Indefinite { .. } => "indefinite",
            Error::MassIndefinite(_) => "mass_indefinite",
            Error::AffineStiffness => "affine_stiffness",
            Error::UnknownId { .. } => "unknown_id",
            Error::Incompatible(_) => "incompatible",
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
