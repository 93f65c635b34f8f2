//! Nonlocal Fokker-Planck equations on a periodic interval and their
//! Keller-Segel approximations.

pub mod analysis;
pub mod chebfit;
pub mod cli_io;
mod ddouble;
pub mod error;
pub mod kernels;
pub mod pde;
pub mod quadrature;
pub mod solvers;

pub use error::{Error, Result};
