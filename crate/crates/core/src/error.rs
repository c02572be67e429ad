use thiserror::Error;

/// Failure modes shared by every layer of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("node iteration did not converge (node {index} of {n})")]
    ConvergenceFailure { index: usize, n: usize },
    #[error("degenerate mesh: nodes {0} and {1} coincide")]
    DegenerateMesh(usize, usize),
    #[error("kernel has an integrable singularity at s = 0")]
    IntegrableSingularity,
    #[error("Re(lambda) = {re} is outside the Laplace strip (> {bound})")]
    OutOfStrip { re: f64, bound: f64 },
    #[error("mesh and quadrature nodes differ")]
    MeshQuadMismatch,
    #[error("right-hand side produced a non-finite value")]
    NonFiniteRhs,
    #[error("matrix contains non-finite entries")]
    NonFiniteInput,
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("iterate left the Laplace strip")]
    StrayedOutOfStrip,
    #[error("collocation system is singular")]
    SingularCollocation,
    #[error("linear system is singular")]
    SingularSystem,
    #[error("eigenvector head component vanishes")]
    ZeroHeadComponent,
    #[error("Re(lambda) must exceed -rho1")]
    OutOfHalfPlane,
    #[error("Re(mu) must be below 1/2")]
    HalfPlaneViolation,
    #[error("finite p requires delta > 0")]
    InvalidDelta,
    #[error("tail of the error integral is not negligible")]
    TailNotNegligible,
    #[error("continuation step failed at parameter {0}")]
    StepFailure(f64),
    #[error("no Hopf point found for m = {0}")]
    MissingHopf(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
