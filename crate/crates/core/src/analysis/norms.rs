use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{Diffusivity, KernelSpec};
use crate::pde::{convolve, ConvolutionPath, PeriodicField, SampledKernel};
use crate::solvers::Trajectory;

/// Distances between two aligned trajectories.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    /// `max_t ||a - b||_{L2}`
    pub sup_t_l2: f64,
    /// `max_t ||a - b||_{H1}`
    pub sup_t_h1: f64,
    /// `(integral_0^T ||a - b||_{H1}^2 dt)^{1/2}`, trapezoid rule over snapshots.
    pub l2_t_h1: f64,
    pub per_snapshot_l2: Vec<f64>,
}

fn h1_norm(f: &PeriodicField) -> f64 {
    let l2 = f.l2_norm();
    let d = f.centered_derivative().l2_norm();
    (l2 * l2 + d * d).sqrt()
}

fn check_aligned(a: &Trajectory, b: &Trajectory) -> Result<()> {
    a.grid
        .check_same(&b.grid)
        .map_err(|e| Error::Misaligned(e.to_string()))?;
    if a.times.len() != b.times.len() {
        return Err(Error::Misaligned(format!(
            "{} vs {} snapshots",
            a.times.len(),
            b.times.len()
        )));
    }
    for (ta, tb) in a.times.iter().zip(&b.times) {
        if (ta - tb).abs() > 1e-12 * ta.abs().max(1.0) {
            return Err(Error::Misaligned(format!("snapshot times {ta} and {tb}")));
        }
    }
    Ok(())
}

/// Trapezoid rule `sqrt(sum dt (f_k^2 + f_{k+1}^2) / 2)`.
fn time_l2(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] * v[0] + v[1] * v[1]))
        .sum::<f64>()
        .sqrt()
}

fn report(times: &[f64], diffs: &[PeriodicField]) -> ErrorReport {
    let l2: Vec<f64> = diffs.iter().map(PeriodicField::l2_norm).collect();
    let h1: Vec<f64> = diffs.iter().map(h1_norm).collect();
    ErrorReport {
        sup_t_l2: l2.iter().copied().fold(0.0, f64::max),
        sup_t_h1: h1.iter().copied().fold(0.0, f64::max),
        l2_t_h1: time_l2(times, &h1),
        per_snapshot_l2: l2,
    }
}

/// Density distance between two runs with identical snapshot times.
pub fn error_norms(a: &Trajectory, b: &Trajectory) -> Result<ErrorReport> {
    check_aligned(a, b)?;
    let diffs = a
        .rho
        .iter()
        .zip(&b.rho)
        .map(|(x, y)| x.sub(y))
        .collect::<Result<Vec<_>>>()?;
    Ok(report(&a.times, &diffs))
}

/// Distance of each auxiliary field of a Keller-Segel run from `k_j * rho`,
/// where `rho` comes from the reference run. Returned in component order.
pub fn aux_error_norms(
    ks: &Trajectory,
    reference: &Trajectory,
    diffusivities: &[Diffusivity],
) -> Result<Vec<ErrorReport>> {
    check_aligned(ks, reference)?;
    let grid = ks.grid;
    let l = grid.half_length();
    diffusivities
        .iter()
        .enumerate()
        .map(|(j, d)| {
            let spec = match d {
                Diffusivity::Finite(d) => KernelSpec::bessel(*d, l)?,
                Diffusivity::Infinite => KernelSpec::constant_limit(l)?,
            };
            let kernel = SampledKernel::from_spec(&spec, grid)?;
            let diffs = ks
                .aux
                .iter()
                .zip(&reference.rho)
                .map(|(aux, rho)| {
                    let v = aux.get(j).ok_or_else(|| {
                        Error::Misaligned(format!("snapshot lacks auxiliary field {j}"))
                    })?;
                    v.sub(&convolve(&kernel, rho, ConvolutionPath::Fft)?)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(report(&ks.times, &diffs))
        })
        .collect()
}
