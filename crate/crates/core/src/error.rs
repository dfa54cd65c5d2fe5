use thiserror::Error;

/// Errors raised by mesh construction, quadrature, assembly and solves.
#[derive(Debug, Error)]
pub enum BemError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("edge {edge:?} is shared by {count} panels (expected 2)")]
    NonManifoldEdge { edge: [usize; 2], count: usize },

    #[error("panel {panel} is not a planar parallelogram")]
    NonParallelogram { panel: usize },

    #[error("panels {first} and {second} traverse their shared edge in the same direction")]
    InconsistentOrientation { first: usize, second: usize },

    #[error("unsupported Gauss order {0} (supported: 1..=64)")]
    UnsupportedOrder(usize),

    #[error("local basis index {0} out of range (0..4)")]
    LocalIndex(usize),

    #[error("panel pair ({0}, {1}) could not be classified")]
    UnclassifiedPair(usize, usize),

    #[error("matrix is numerically singular at pivot {pivot} (|u| = {magnitude:e})")]
    SingularMatrix { pivot: usize, magnitude: f64 },

    #[error("system of size {size} exceeds the direct-solver budget of {budget} unknowns")]
    TooLarge { size: usize, budget: usize },

    #[error("iterative solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("evaluation point is {distance:e} from the surface, inside the margin {margin:e}")]
    NearSurface { distance: f64, margin: f64 },

    #[error("surface point lies on a panel edge or corner")]
    OnPanelBoundary,

    #[error("kernel evaluated at coincident points")]
    Coincident,

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BemError>;
