use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chebfit::{cheb_nodes, cosh_expansion_with_table, lagrange_poly_coeffs, mono_to_cheb};
use crate::error::Result;
use crate::kernels::{kernel_norms, measured_norms, verify_fundamental, Diffusivity, KernelSpec};
use crate::pde::{convolve, ConvolutionPath, PeriodicField, PeriodicGrid, SampledKernel};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn upper(name: &str, measured: f64, tolerance: f64, detail: String) -> Self {
        Check {
            name: name.into(),
            passed: measured <= tolerance,
            measured,
            tolerance,
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: measured {:.3e}, tolerance {:.1e} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance,
            self.detail
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Test hooks for the oracle battery.
#[derive(Clone, Copy, Debug, Default)]
pub struct ValidateOptions {
    /// Perturbs the leading entry of every monomial-to-Chebyshev row.
    pub corrupt_delta: bool,
}

fn cheb_t(j: usize, x: f64) -> f64 {
    (j as f64 * x.clamp(-1.0, 1.0).acos()).cos()
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

pub fn run_validation(opts: ValidateOptions) -> Result<ValidationReport> {
    let table = move |n: usize| {
        let mut row = mono_to_cheb(n);
        if opts.corrupt_delta {
            row[n] *= 1.0 + 1e-6;
        }
        row
    };
    let mut checks = Vec::new();

    let mut l1 = 0.0f64;
    let mut derivs = 0.0f64;
    for d in [0.1, 1.0, 3.0] {
        for l in [1.0, 5.0] {
            let m = measured_norms(d, l, 8192)?;
            let exact = kernel_norms(d, l)?;
            l1 = l1.max((m.l1 - 1.0).abs());
            derivs = derivs
                .max((m.l1_d1 - exact.l1_d1).abs())
                .max((m.sup_d1 - 1.0 / (2.0 * d)).abs());
        }
    }
    checks.push(Check::upper(
        "kernel_l1_norm",
        l1,
        1e-8,
        "max |‖k‖_L1 - 1| over d in {0.1, 1, 3}, L in {1, 5}".into(),
    ));
    checks.push(Check::upper(
        "kernel_derivative_norms",
        derivs,
        1e-8,
        "‖k'‖_L1 against closed form, sup|k'| against 1/(2d)".into(),
    ));

    let residuals = [512, 1024, 2048, 4096]
        .iter()
        .map(|&n| verify_fundamental(Diffusivity::Finite(1.0), 1.0, n))
        .collect::<Result<Vec<_>>>()?;
    let worst = residuals
        .windows(2)
        .map(|w| ((w[0] / w[1]) - 4.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check::upper(
        "fundamental_residual_order",
        worst,
        1.0,
        format!(
            "|ratio - 4| per grid doubling, residuals {}",
            residuals
                .iter()
                .map(|r| format!("{r:.2e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut interp = 0.0f64;
    let (a, b) = (1.0, 2f64.cosh());
    for n in 1..=12 {
        let waves: Vec<(f64, f64, f64)> = (0..4)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.0..2.0),
                    rng.gen_range(0.0..6.3),
                )
            })
            .collect();
        let f = |y: f64| {
            waves
                .iter()
                .map(|(c, w, p)| c * (w * y + p).cos())
                .sum::<f64>()
        };
        let nodes = cheb_nodes(n + 1, a, b)?;
        let samples: Vec<f64> = nodes.iter().map(|&y| f(y)).collect();
        let coeffs = lagrange_poly_coeffs(&samples, n, a, b)?;
        let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (&y, v) in nodes.iter().zip(&samples) {
            interp = interp.max((poly(&coeffs, y) - v).abs() / scale);
        }
    }
    checks.push(Check::upper(
        "interpolation_at_nodes",
        interp,
        1e-9,
        "relative node error of sum b_l y^l, n = 1..12 on [1, cosh 2]".into(),
    ));

    let mut basis = 0.0f64;
    for n in 0..=12 {
        let row = table(n);
        for i in 0..100 {
            let x = -1.0 + 2.0 * i as f64 / 99.0;
            let s: f64 = row.iter().enumerate().map(|(j, d)| d * cheb_t(j, x)).sum();
            basis = basis.max((x.powi(n as i32) - s).abs());
        }
    }
    checks.push(Check::upper(
        "basis_identity",
        basis,
        1e-10,
        "x^n = sum delta_j T_j(x), n <= 12, 100 points".into(),
    ));

    let mut recovery = 0.0f64;
    let l = 2.0;
    for n in 1..=12 {
        let exp = cosh_expansion_with_table(|x: f64| (l - x.abs()).cosh(), n, l, table)?;
        for (j, alpha) in exp.alphas.iter().enumerate() {
            let target = if j == 1 { 1.0 } else { 0.0 };
            recovery = recovery.max((alpha - target).abs());
        }
    }
    checks.push(Check::upper(
        "cosh_basis_recovery",
        recovery,
        1e-9,
        "W = cosh(L - |x|), L = 2, n = 1..12".into(),
    ));

    let grid = PeriodicGrid::new(5.0, 256)?;
    let kernel = SampledKernel::from_spec(&KernelSpec::mexican_hat(0.1, 3.0, 5.0)?, grid)?;
    let u = PeriodicField::from_fn(grid, |x| {
        1.0 + 0.3 * (0.7 * x).sin().powi(3) + 0.1 * (2.0 * x).cos()
    })?;
    let direct = convolve(&kernel, &u, ConvolutionPath::Direct)?;
    let fft = convolve(&kernel, &u, ConvolutionPath::Fft)?;
    let scale = direct.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = direct
        .sub(&fft)?
        .values()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        / scale;
    checks.push(Check::upper(
        "convolution_paths",
        gap,
        1e-12,
        "direct against FFT, relative sup".into(),
    ));

    Ok(ValidationReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_run_passes() {
        let r = run_validation(ValidateOptions::default()).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{}", c.line());
        }
    }

    #[test]
    fn corrupted_table_is_named() {
        let r = run_validation(ValidateOptions {
            corrupt_delta: true,
        })
        .unwrap();
        assert!(!r.passed());
        let failed = r.failures();
        assert!(failed.contains(&"basis_identity"), "{failed:?}");
        assert!(failed.contains(&"cosh_basis_recovery"), "{failed:?}");
        assert!(!failed.contains(&"kernel_l1_norm"));
    }
}
