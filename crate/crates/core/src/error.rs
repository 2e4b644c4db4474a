use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum KfbiError {
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("interface under-resolved: spacing {spacing:.3e} times max curvature {max_curvature:.3e} exceeds 1")]
    Resolution { spacing: f64, max_curvature: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("index ({i}, {j}) out of range for array of shape {shape:?}")]
    Index {
        i: isize,
        j: isize,
        shape: (usize, usize),
    },

    #[error("correction assembly: {0}")]
    Assembly(String),

    #[error("pressure Schur iteration did not reach {tol:.1e} in {iterations} iterations (last residual {residual:.3e})")]
    SaddleConvergence {
        iterations: usize,
        residual: f64,
        tol: f64,
        history: Vec<f64>,
    },

    #[error("GMRES did not reach {tol:.1e} in {iterations} iterations (last residual {residual:.3e})")]
    GmresConvergence {
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    #[error("boundary data violates the zero-flux condition: net flux {0:.3e}")]
    Compatibility(f64),

    #[error("interpolation stencil: {0}")]
    Extraction(String),

    #[error("normalization: exact-solution norm is zero for {0}")]
    Normalization(&'static str),

    #[error("simulation aborted at t = {time:.4}: {reason}")]
    Simulation { time: f64, reason: String },

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, KfbiError>;
