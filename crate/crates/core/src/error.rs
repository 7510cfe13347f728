//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by geometry loading, discretization, and planning.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("stl parse error at byte {offset}: {message}")]
    StlParse { offset: u64, message: String },

    #[error("stl binary record {record} truncated at byte {offset}")]
    StlTruncated { record: usize, offset: u64 },

    #[error("voxelization failed: inconsistent ray parity along ray at ({y:.6}, {z:.6}) mm; mesh is not watertight")]
    NotWatertight { y: f64, z: f64 },

    #[error("grid frame mismatch: {0}")]
    FrameMismatch(String),

    #[error("pixel size mismatch: {a} vs {b}")]
    PixelSizeMismatch { a: f64, b: f64 },

    #[error("rasters are not on a shared pixel lattice: {0}")]
    LatticeMismatch(String),

    #[error("empty solid: {0}")]
    EmptySolid(String),

    #[error("invalid axis direction (near-zero length)")]
    DegenerateAxis,

    #[error("invalid rigid transform: {0}")]
    InvalidTransform(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("as-turned shape does not contain the turnable closure: {missing} section pixels of the target closure lie outside the workpiece")]
    ClosureViolation { missing: usize },

    #[error("action {0} already applied in this state")]
    ActionAlreadyApplied(usize),

    #[error("no feasible action subset: residual volume {residual_mm3:.6} mm3 exceeds tolerance; residual region z in [{z_min:.3}, {z_max:.3}] mm, r in [{r_min:.3}, {r_max:.3}] mm")]
    Infeasible {
        residual_mm3: f64,
        z_min: f64,
        z_max: f64,
        r_min: f64,
        r_max: f64,
    },

    #[error("pgm parse error in {path}: {message}")]
    PgmParse { path: String, message: String },

    #[error("tool catalog error: {0}")]
    ToolCatalog(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
