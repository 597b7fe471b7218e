use thiserror::Error;

use crate::exactalg::linalg::LinsolveError;

/// Every failure mode of the library. Certificate failures that are part of
/// normal reporting (a pencil that is not flat, a WDVV residual) are carried
/// in report types instead; these variants are for operations that cannot
/// produce their output.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("expression outside the quasi-polynomial ring at line {line}, column {column}: {message}")]
    OutOfRing {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Linsolve(#[from] LinsolveError),
    #[error("no valid sample point found after {attempts} attempts")]
    SampleExhausted { attempts: usize },
    #[error("metric is singular: determinant vanishes identically")]
    SingularMetric,
    #[error("internal verification failed: {0}")]
    Verification(String),
    #[error("metric is not flat: {0}")]
    NotFlat(String),
    #[error("no rational degree d satisfies L_E g1 = (d-1) g1: {0}")]
    Inference(String),
    #[error("unity axiom violated: {0}")]
    UnityViolation(String),
    #[error("potential is not quasihomogeneous: {0}")]
    NotQuasihomogeneous(String),
    #[error("charge mismatch: input d = {given}, verified d = {found}")]
    ChargeMismatch { given: String, found: String },
    #[error("second line of the intersection form disagrees at {0}")]
    SecondLineMismatch(String),
    #[error("connection does not solve the Levi-Civita system: {0}")]
    LeviCivitaMismatch(String),
    #[error("coordinates are not flat for g2: {0}")]
    NotFlatCoordinates(String),
    #[error("Euler field is not affine-linear: {0}")]
    NonlinearEuler(String),
    #[error("Hessian of tau does not vanish: {0}")]
    TauHessianNonzero(String),
    #[error("no valid normalization of flat coordinates: {0}")]
    NoValidNormalization(String),
    #[error("pencil is not regular; root subspace V_(-1/2) has dimension {kernel_dim}")]
    NotRegular { kernel_dim: usize },
    #[error("kernel of R is not spanned by d tau")]
    KernelNotDtau,
    #[error("multiplication is not commutative at {0}")]
    Commutativity(String),
    #[error("integrability condition fails at {0}")]
    Integrability(String),
    #[error("reconstructed intersection form differs from g1 at {0}")]
    ClosingIdentity(String),
    #[error("Coxeter rank {0} outside the supported range 1..=4")]
    RankOutOfRange(usize),
    #[error("invariant rewrite failed: {0}")]
    Rewrite(String),
    #[error("graded flat-coordinate solve is inconsistent: {0}")]
    GradingObstruction(String),
    #[error("coordinate transformation failed: {0}")]
    Transform(String),
    #[error("operation requires d != 1")]
    DEqualsOne,
    #[error("coefficient form mismatch: {0}")]
    FormMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
