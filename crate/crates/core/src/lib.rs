//! Spectral simulation of wave-packet revivals in potentials with a quadratic
//! spectrum: the infinite square well, the trigonometric Pöschl–Teller well and
//! the Rosen–Morse (sech²) well.
//!
//! States are evolved exactly in the eigenbasis. The revival identities at
//! quarters of `t_R = 2π/α²` are then available as exact targets, both for
//! fidelity scans and for checking grid-based Schrödinger integrators.

/// Library version, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod error;
pub mod quadrature;
pub mod time;

pub mod spectral_basis;
pub mod wavepacket;
pub mod propagation;
pub mod revival_metrics;
pub mod grid_solver;
pub mod carpet;

pub use carpet::{render_carpet, CarpetRaster, Normalization};
pub use error::{Error, Result};
pub use propagation::{evolve_coefficients, probability_density, sample_wavefunction, SpatialGrid, WaveField};
pub use spectral_basis::{build_basis, EigenBasis, Family, PotentialSpec};
pub use time::{revival_time, TimePoint};
pub use wavepacket::{CoefficientSet, PacketRecipe, PhaseScheme};
