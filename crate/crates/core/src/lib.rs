//! Numerical library for the fractional Laplacian `(-Δ)^s` computed by three
//! independent routes — singular-integral quadrature, Fourier multiplier, and
//! the weighted harmonic-extension (Dirichlet-to-Neumann) problem — plus the
//! local machinery the extension enables: fractional Dirichlet problems,
//! energy equivalence, the conjugate equation, frequency monotonicity, and
//! Harnack-type diagnostics.
//!
//! Everything is generic over the scalar type through [`Real`] (`f32` or
//! `f64`); the `*64` aliases at the crate root pin the double-precision
//! versions that the CLI and the verification suite use.

pub mod analysis;
pub mod error;
pub mod extension;
pub mod field;
pub mod grid;
pub mod io;
pub mod order;
pub mod parallel;
pub mod quadrature;
pub mod real;
pub mod singular_integral;
pub mod spectral;
pub mod symbol_ode;
pub mod verify;

pub use error::{Error, Result};
pub use field::{FullPlaneField, HalfPlaneField, SampledFunction};
pub use grid::{GridMode, SpatialGrid, VerticalCoord, VerticalGrid};
pub use order::FracOrder;
pub use real::Real;

/// Double-precision aliases for the main domain types.
pub type FracOrder64 = FracOrder<f64>;
pub type SpatialGrid64 = SpatialGrid<f64>;
pub type VerticalGrid64 = VerticalGrid<f64>;
pub type SampledFunction64 = SampledFunction<f64>;
pub type HalfPlaneField64 = HalfPlaneField<f64>;
pub type FullPlaneField64 = FullPlaneField<f64>;
