use num_complex::Complex64;

use super::field::PeriodicField;
use super::grid::PeriodicGrid;
use super::spectral::FftPlan;
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;

/// Which convolution route to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvolutionPath {
    /// `O(N^2)` double loop.
    Direct,
    /// `O(N log N)` through the transform.
    Fft,
}

/// A potential sampled on the offset lattice `i dx`, `i = 0..N`, of a grid.
///
/// Differences of cell centres are whole multiples of `dx`, so these are exactly
/// the values `W(x_i - x_m)` the discrete convolution needs.
#[derive(Clone, Debug)]
pub struct SampledKernel {
    grid: PeriodicGrid,
    offsets: Vec<f64>,
    spectrum: Vec<Complex64>,
}

impl SampledKernel {
    pub fn from_spec(spec: &KernelSpec, grid: PeriodicGrid) -> Result<Self> {
        if spec.half_length() != grid.half_length() {
            return Err(Error::GridMismatch(format!(
                "kernel half-length {} on a grid with half-length {}",
                spec.half_length(),
                grid.half_length()
            )));
        }
        let n = grid.len();
        let dx = grid.dx();
        let offsets = (0..n)
            .map(|i| {
                let k = if i <= n / 2 {
                    i as f64
                } else {
                    i as f64 - n as f64
                };
                spec.eval(k * dx)
            })
            .collect();
        Ok(Self::from_offsets(grid, offsets))
    }

    /// `values[i]` is the potential at offset `i dx` (indices mod `N`).
    pub fn from_field(field: &PeriodicField) -> Self {
        Self::from_offsets(*field.grid(), field.values().to_vec())
    }

    fn from_offsets(grid: PeriodicGrid, offsets: Vec<f64>) -> Self {
        let spectrum = FftPlan::new(grid.len()).forward(&offsets);
        SampledKernel {
            grid,
            offsets,
            spectrum,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Transform of the offset samples (unnormalized, without the `dx` weight).
    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }
}

/// `(W * u)_i = dx sum_m W((i - m) dx) u_m` on the discrete torus.
pub fn convolve(
    kernel: &SampledKernel,
    u: &PeriodicField,
    path: ConvolutionPath,
) -> Result<PeriodicField> {
    kernel.grid.check_same(u.grid())?;
    match path {
        ConvolutionPath::Direct => Ok(convolve_direct(kernel, u)),
        ConvolutionPath::Fft => Ok(convolve_fft(kernel, u, &FftPlan::new(u.grid().len()))),
    }
}

fn convolve_direct(kernel: &SampledKernel, u: &PeriodicField) -> PeriodicField {
    let n = u.grid().len();
    let dx = u.grid().dx();
    let k = &kernel.offsets;
    let v = u.values();
    let values = (0..n)
        .map(|i| {
            // ordered by offset, so a cyclic shift of `u` permutes outputs exactly
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate() {
                acc += kj * v[(i + n - j) % n];
            }
            dx * acc
        })
        .collect();
    PeriodicField::from_vec_unchecked(*u.grid(), values)
}

pub(crate) fn convolve_fft(
    kernel: &SampledKernel,
    u: &PeriodicField,
    plan: &FftPlan,
) -> PeriodicField {
    let dx = u.grid().dx();
    let mut spec = plan.forward(u.values());
    for (s, k) in spec.iter_mut().zip(&kernel.spectrum) {
        *s *= k * dx;
    }
    PeriodicField::from_vec_unchecked(*u.grid(), plan.inverse_real(spec))
}

/// Conservative upwind divergence of the advective flux `rho * d(phi)/dx`.
///
/// Face velocity `u_{i+1/2} = (phi_{i+1} - phi_i) / dx`, face density taken from
/// the upwind cell, result `(F_{i+1/2} - F_{i-1/2}) / dx`.
pub fn flux_divergence(rho: &PeriodicField, phi: &PeriodicField) -> Result<PeriodicField> {
    rho.grid().check_same(phi.grid())?;
    Ok(flux_divergence_unchecked(rho, phi))
}

pub(crate) fn face_fluxes(rho: &[f64], phi: &[f64], dx: f64) -> Vec<f64> {
    let n = rho.len();
    (0..n)
        .map(|i| {
            let j = (i + 1) % n;
            let u = (phi[j] - phi[i]) / dx;
            if u >= 0.0 {
                u * rho[i]
            } else {
                u * rho[j]
            }
        })
        .collect()
}

pub(crate) fn flux_divergence_unchecked(rho: &PeriodicField, phi: &PeriodicField) -> PeriodicField {
    let n = rho.grid().len();
    let dx = rho.grid().dx();
    let f = face_fluxes(rho.values(), phi.values(), dx);
    let values = (0..n).map(|i| (f[i] - f[(i + n - 1) % n]) / dx).collect();
    PeriodicField::from_vec_unchecked(*rho.grid(), values)
}

/// Eigenvalue of `-D^2` (periodic second difference) on transform bin `k`.
pub fn second_difference_eigenvalue(grid: &PeriodicGrid, k: usize) -> f64 {
    let dx = grid.dx();
    let theta = 2.0 * std::f64::consts::PI * k as f64 / grid.len() as f64;
    2.0 / (dx * dx) * (1.0 - theta.cos())
}

/// Solves `(I - coeff D^2) u_new = u` through the circulant diagonalization.
pub fn diffusion_step_implicit(u: &PeriodicField, coeff: f64) -> Result<PeriodicField> {
    if !(coeff >= 0.0 && coeff.is_finite()) {
        return Err(Error::config(
            "coeff",
            format!("diffusion coefficient must be >= 0, got {coeff}"),
        ));
    }
    Ok(diffusion_step_with(u, coeff, &FftPlan::new(u.grid().len())))
}

/// Mean is carried separately so that constants pass through bit for bit.
pub(crate) fn diffusion_step_with(u: &PeriodicField, coeff: f64, plan: &FftPlan) -> PeriodicField {
    if coeff == 0.0 {
        return u.clone();
    }
    apply_multiplier(u, plan, |k| {
        1.0 / (1.0 + coeff * second_difference_eigenvalue(u.grid(), k))
    })
}

/// Exact heat semigroup: bin `k` scaled by `exp(-sigma_k^2 t)`.
pub fn spectral_reference_step(u: &PeriodicField, t: f64) -> Result<PeriodicField> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::config(
            "t",
            format!("duration must be >= 0, got {t}"),
        ));
    }
    let grid = *u.grid();
    let plan = FftPlan::new(grid.len());
    Ok(apply_multiplier(u, &plan, |k| {
        let s = grid.sigma(grid.mode_of_bin(k));
        (-s * s * t).exp()
    }))
}

/// `mean + F^{-1}[m_k F[u - mean]]`, with `m_0` assumed to be one.
fn apply_multiplier(
    u: &PeriodicField,
    plan: &FftPlan,
    multiplier: impl Fn(usize) -> f64,
) -> PeriodicField {
    let mean = u.mean();
    let fluct: Vec<f64> = u.values().iter().map(|v| v - mean).collect();
    let mut spec = plan.forward(&fluct);
    for (k, s) in spec.iter_mut().enumerate().skip(1) {
        *s *= multiplier(k);
    }
    let values = plan
        .inverse_real(spec)
        .into_iter()
        .map(|v| v + mean)
        .collect();
    PeriodicField::from_vec_unchecked(*u.grid(), values)
}
