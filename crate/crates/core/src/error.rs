//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("operation requires a {required} grid, got {got}")]
    Mode {
        required: &'static str,
        got: &'static str,
    },

    #[error("grid invariant violated: {0}")]
    Grid(String),

    #[error("line-mode data does not decay at the grid edge (edge magnitude {edge:.3e}, scale {scale:.3e}); supply a tail model")]
    NonDecaying { edge: f64, scale: f64 },

    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    Solver { residual: f64, iterations: usize },

    #[error("shooting failed: {0}")]
    Shooting(String),

    #[error("calibration residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    Calibration { residual: f64, tolerance: f64 },

    #[error("radius {radius} exceeds the largest admissible value {max}")]
    Radius { radius: f64, max: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
