use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid potential grid: {0}")]
    InvalidGrid(String),

    #[error("integration overflow at grid index {index} (mu = {mu})")]
    IntegrationOverflow { index: usize, mu: Complex64 },

    #[error("Wronskian defect {defect:.3e} exceeds tolerance {tol:.3e} (mu = {mu})")]
    WronskianViolation { defect: f64, tol: f64, mu: Complex64 },

    #[error("invalid search region: {0}")]
    InvalidRegion(String),

    #[error("degenerate determinant: max |det| on the boundary is {max_abs:.3e}, below floor {floor:.3e}")]
    DegenerateDeterminant { max_abs: f64, floor: f64 },

    #[error("a zero lies within tolerance of the contour near {near}; perturb the region")]
    BoundaryTooClose { near: Complex64 },

    #[error("Newton iteration did not converge in {iterations} steps (last iterate {last}, |det| = {residual:.3e})")]
    NoConvergence {
        last: Complex64,
        iterations: usize,
        residual: f64,
    },

    #[error("invalid target determinant: {0}")]
    InvalidTarget(String),

    #[error("target too large: no N <= {n_max} satisfies the strip bounds (best max|v| = {max_v:.3e}, max|f| = {max_f:.3e}); reduce the scale")]
    TargetTooLarge { n_max: usize, max_v: f64, max_f: f64 },

    #[error("root selection failed at n = {n}: c_n = {c} is outside the disk of radius 1/2 around {center}")]
    RootSelection { n: usize, c: Complex64, center: f64 },

    #[error("construction violated: Re w_{n} = {re:.3e} is not positive")]
    NonPositiveWeight { n: usize, re: f64 },

    #[error("invalid truncation: {0}")]
    Truncation(String),

    #[error("series tail bound {bound:.3e} exceeds tolerance {tol:.3e}; increase truncation_M")]
    TailTooLarge { bound: f64, tol: f64 },

    #[error("Gelfand-Levitan system ill-conditioned at x = {x:.6}: condition estimate {cond:.3e} > {cond_max:.3e}")]
    IllConditioned { x: f64, cond: f64, cond_max: f64 },

    #[error("zero pivot in the Gelfand-Levitan factorization at row {row}")]
    SingularSystem { row: usize },

    #[error("mu = {mu} is too close to an eigenvalue: |Delta| = {abs:.3e} below floor {floor:.3e}")]
    NearEigenvalue { mu: Complex64, abs: f64, floor: f64 },

    #[error("contour encloses {count} zeros (with multiplicity), expected {expected}")]
    Enclosure { count: i64, expected: i64 },

    #[error("contour quadrature unresolved: doubling the points changes the kernel by {change:.3e} at radius {radius:.3e}")]
    ContourResolution { change: f64, radius: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Errors caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::InvalidRegion(_)
                | Error::InvalidTarget(_)
                | Error::Dimension(_)
                | Error::Io(_)
                | Error::Parse(_)
                | Error::Config(_)
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid-grid",
            Error::IntegrationOverflow { .. } => "integration-overflow",
            Error::WronskianViolation { .. } => "wronskian-violation",
            Error::InvalidRegion(_) => "invalid-region",
            Error::DegenerateDeterminant { .. } => "degenerate-determinant",
            Error::BoundaryTooClose { .. } => "boundary-too-close",
            Error::NoConvergence { .. } => "no-convergence",
            Error::InvalidTarget(_) => "invalid-target",
            Error::TargetTooLarge { .. } => "target-too-large",
            Error::RootSelection { .. } => "root-selection",
            Error::NonPositiveWeight { .. } => "non-positive-weight",
            Error::Truncation(_) => "truncation",
            Error::TailTooLarge { .. } => "tail-too-large",
            Error::IllConditioned { .. } => "ill-conditioned",
            Error::SingularSystem { .. } => "singular-system",
            Error::NearEigenvalue { .. } => "near-eigenvalue",
            Error::Enclosure { .. } => "enclosure",
            Error::ContourResolution { .. } => "contour-resolution",
            Error::Dimension(_) => "dimension",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
            Error::Config(_) => "config",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
