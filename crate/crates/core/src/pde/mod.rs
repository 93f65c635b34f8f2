//! Periodic grids, cell-average fields and the discrete operators the time
//! steppers are built from.

mod field;
mod grid;
pub mod io;
mod operators;
mod spectral;

pub use field::PeriodicField;
pub use grid::PeriodicGrid;
pub use operators::{
    convolve, diffusion_step_implicit, flux_divergence, second_difference_eigenvalue,
    spectral_reference_step, ConvolutionPath, SampledKernel,
};
pub(crate) use operators::{diffusion_step_with, flux_divergence_unchecked};
pub use spectral::FftPlan;
