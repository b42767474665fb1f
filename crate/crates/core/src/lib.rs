//! Spectral laboratory for the nonlinear Schrödinger equation with combined
//! power nonlinearities `i u_t + Δu = λ₁|u|^{p₁}u + λ₂|u|^{p₂}u` on periodic
//! boxes in one and two dimensions.

pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod fit;
pub mod grid;
pub mod ground;
pub mod snapshot;
pub mod spectral;
pub mod window;

pub use error::{NlsError, Result};
pub use grid::{Field, GridSpec, PhysParams};
