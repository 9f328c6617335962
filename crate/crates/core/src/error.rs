use thiserror::Error;

/// Failure modes shared by every module of the core crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument lies on the branch cut of the logarithm")]
    Domain,
    #[error("matrix is not dissipative (smallest eigenvalue of the imaginary part is {min_eig:e})")]
    NotDissipative { min_eig: f64 },
    #[error("matrix is not anti-dissipative (largest eigenvalue of the imaginary part is {max_eig:e})")]
    NotAntiDissipative { max_eig: f64 },
    #[error("matrix is numerically singular (smallest singular value {sigma_min:e})")]
    Singular { sigma_min: f64 },
    #[error("adaptive quadrature exhausted its panel budget of {panels}")]
    QuadratureFailure { panels: usize },
    #[error("eigenvalue {eigenvalue:e} lies inside the exclusion band around zero")]
    NearSingular { eigenvalue: f64 },
    #[error("evaluation point {lambda} is outside the open support")]
    OutOfSupport { lambda: f64 },
    #[error("grid has {nodes} nodes, at least {required} are required")]
    GridTooCoarse { nodes: usize, required: usize },
    #[error("J is not a self-adjoint involution (residual {residual:e})")]
    BadInvolution { residual: f64 },
    #[error("point is within {distance:e} of the spectrum")]
    PoleProximity { distance: f64 },
    #[error("determinant came within {modulus:e} of zero while tracking its argument")]
    ArgTrackingLost { modulus: f64 },
    #[error("function grid does not cover the spectra with margin")]
    SupportTooSmall,
    #[error("an eigenvalue crosses the window edge {edge} at a quadrature node")]
    EigenvalueCrossesWindowEdge { edge: f64 },
    #[error("perturbation has eigenvalue {eigenvalue:e} below the positivity tolerance")]
    FactorizationFailure { eigenvalue: f64 },
    #[error("T(lambda) restricted to ran(V) is not invertible")]
    NotInLambda,
    #[error("Green's function vanishes at the evaluation point")]
    ZeroGreen,
    #[error("no evaluation point lies inside the validity window")]
    WindowEmpty,
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
