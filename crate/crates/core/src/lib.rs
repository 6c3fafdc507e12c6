//! Pseudospectral toolkit for the nonlinear heat equation
//! `du/dt = Laplace u + B(u, Du) + P(u)` on the d-torus, built around
//! zero-mode norm inflation from rotated Gaussian Fourier series data.

pub mod besov;
pub mod correlation;
pub mod error;
pub mod fft;
pub mod gfs;
pub mod io;
pub mod quadrature;
pub mod solver;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use spectral::{PhysicalField, SpectralField, TorusGrid};
