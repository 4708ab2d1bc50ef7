use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input matrix contains NaN/Inf entries or has inconsistent shape.
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    /// Matrix is singular (or numerically singular) where an inverse is required.
    #[error("singular matrix: smallest singular value {sigma_min:e} below cutoff {cutoff:e}")]
    SingularMatrix { sigma_min: f64, cutoff: f64 },

    /// Unitary logarithm requested at an eigenvalue -1, where the principal
    /// branch is not defined and the exponential is not locally invertible.
    #[error("branch ambiguous: eigenvalue {eigenvalue} within {tol:e} of -1")]
    BranchAmbiguous { eigenvalue: String, tol: f64 },

    /// Rows/columns expected to form an orthonormal frame do not.
    #[error("invalid frame: orthonormality residual {residual:e} exceeds {tol:e}")]
    InvalidFrame { residual: f64, tol: f64 },

    /// A combinatorial size cap (Plücker coordinates) was exceeded.
    #[error("too large: {0} exceeds desk-scale cap")]
    TooLarge(u64),

    /// A rank decision fell within 10x of the singular-value cutoff.
    #[error("rank ambiguous: singular value {sigma:e} within 10x of cutoff {cutoff:e}")]
    RankAmbiguous { sigma: f64, cutoff: f64 },

    /// The C*-polarization parameter gamma = 2n/(ln - 2 delta0) is undefined.
    #[error("parameter singular: l*n = 2*delta0 = {0}")]
    ParameterSingular(i64),

    /// Witness enumeration requested on a model without the needed structure.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// Requested degree cannot be realized by eigenvalues in [-1/2, 1/2].
    #[error("infeasible degree: |{delta0}| out of reach for ell={ell}, n={n}")]
    InfeasibleDegree { delta0: i64, ell: usize, n: usize },

    /// Plane does not sit on the required moment level set.
    #[error("moment mismatch: residual {residual:e} exceeds {tol:e}")]
    MomentMismatch { residual: f64, tol: f64 },

    /// Hecke shift requested with no weight-1/2 block present.
    #[error("nothing to shift: no +1/2 block at point {0}")]
    NothingToShift(usize),

    /// Normalization hit an eigenvalue at the boundary +-1 of the rescaled interval.
    #[error("boundary degenerate: eigenvalue {0} at +-1")]
    BoundaryDegenerate(f64),

    /// Plane composition condition R^p(g^p) + R^q(g^q) = C^n fails.
    #[error("span deficient: projections span only {got} of {need} dimensions")]
    SpanDeficient { got: usize, need: usize },

    /// Plane composition condition g^p \cap C^n \cap g^q = 0 fails.
    #[error("diagonal kernel: common framing vector of dimension {0}")]
    DiagonalKernel(usize),

    /// Mismatched dimensions between operands.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
