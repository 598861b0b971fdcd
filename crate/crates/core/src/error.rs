use thiserror::Error;

/// Errors raised by the curve, theta, section, frame, flow and potential layers.
///
/// Indices carried in the variants are 1-based, matching the labelling used
/// in the JSON formats and CLI output.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("markers {i}, {j}, {l} are collinear (non-nodal singularity)")]
    CollinearPoints { i: usize, j: usize, l: usize },

    #[error("intersection points ({i},{j}) and ({m},{n}) coincide")]
    CoincidentIntersections {
        i: usize,
        j: usize,
        m: usize,
        n: usize,
    },

    #[error("intersection a_{i}{j} = {modulus:e} lies too close to 0 or infinity")]
    IntersectionAtPole { i: usize, j: usize, modulus: f64 },

    #[error("k = {k} exceeds the enumeration limit {limit}")]
    SizeLimit { k: usize, limit: usize },

    #[error("theta function too close to zero at t = {t} (|theta|/scale = {ratio:e})")]
    NearTheta { t: f64, ratio: f64 },

    #[error("divisor point on component {component} hits the node a_{i}{j}")]
    PointAtNode {
        component: usize,
        i: usize,
        j: usize,
    },

    #[error("line bundle lies on the theta divisor ({0})")]
    OnTheta(String),

    #[error("Jacobian point is not real")]
    NotReal,

    #[error("fibre over zeta lies within tolerance of the node a_{i}{j}")]
    FibreCollision { i: usize, j: usize },

    #[error("hermitian form is not positive definite ({0})")]
    NotPositive(String),

    #[error("evaluation matrix at zeta = {zeta} is ill-conditioned (cond = {cond:e})")]
    SingularEvaluation { zeta: String, cond: f64 },

    #[error("matricial polynomial fails the quadraticity check (residual {residual:e})")]
    QuadraticityFailure { residual: f64 },

    #[error("all frame columns vanish at the node a_{m}{n}")]
    AllColumnsVanish { m: usize, n: usize },

    #[error("time grids do not match: {0}")]
    GridMismatch(String),

    #[error("Nahm integration blew up at t = {t} (norm {norm:e})")]
    BlowUp { t: f64, norm: f64 },

    #[error("component {i} has nonzero mass parameter x = {x}")]
    NonzeroMass { i: usize, x: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("{what} has a non-negligible imaginary part {imag:e}")]
    NonRealValue { what: String, imag: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Variant name, as printed by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::CollinearPoints { .. } => "CollinearPoints",
            Error::CoincidentIntersections { .. } => "CoincidentIntersections",
            Error::IntersectionAtPole { .. } => "IntersectionAtPole",
            Error::SizeLimit { .. } => "SizeLimit",
            Error::NearTheta { .. } => "NearTheta",
            Error::PointAtNode { .. } => "PointAtNode",
            Error::OnTheta(_) => "OnTheta",
            Error::NotReal => "NotReal",
            Error::FibreCollision { .. } => "FibreCollision",
            Error::NotPositive(_) => "NotPositive",
            Error::SingularEvaluation { .. } => "SingularEvaluation",
            Error::QuadraticityFailure { .. } => "QuadraticityFailure",
            Error::AllColumnsVanish { .. } => "AllColumnsVanish",
            Error::GridMismatch(_) => "GridMismatch",
            Error::BlowUp { .. } => "BlowUp",
            Error::NonzeroMass { .. } => "NonzeroMass",
            Error::DomainError(_) => "DomainError",
            Error::NonRealValue { .. } => "NonRealValue",
            Error::Io(_) => "Io",
        }
    }

    /// True for failures of the numerics (as opposed to rejected input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NearTheta { .. }
                | Error::OnTheta(_)
                | Error::SingularEvaluation { .. }
                | Error::QuadraticityFailure { .. }
                | Error::AllColumnsVanish { .. }
                | Error::BlowUp { .. }
                | Error::NonRealValue { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidInput(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
