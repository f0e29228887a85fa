//! A desk-scale laboratory for the periodic Lorentz gas with infinite horizon.
//!
//! The crate implements exact specular billiard dynamics among `Z^2`-periodic
//! circular scatterers, enumerates the corridors of the configuration and the
//! geometric constants they induce (the diffusion matrix `Σ²` and the
//! free-flight tail coefficients `c_{L,w}`), and verifies the anomalous
//! `√(n log n)` local-limit and mixing asymptotics by two independent routes:
//!
//! * [`oracle`] — an i.i.d. surrogate walk whose step law carries the same
//!   `c/N³` corridor tails, with exact distributions of `S_n` computed by
//!   characteristic-function exponentiation on an FFT grid;
//! * [`montecarlo`] — large-scale reproducible sampling over the true
//!   billiard dynamics.
//!
//! [`kernels`] holds the closed-form Gaussian kernels and the asymptotic
//! predictors those experiments are compared against. All logarithms are
//! natural; the normalizing sequence is `a_n = √(n ln n)`.

pub mod corridors;
pub mod geometry;
pub mod kernels;
pub mod montecarlo;
pub mod oracle;
pub mod stats;

pub use geometry::{Disk, FlightEvent, GeometryError, PhasePoint, ScattererConfig, TrajectoryState};
