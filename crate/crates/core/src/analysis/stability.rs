//! Linear stability of the constant state.
//!
//! Perturbing `rho = rho* + xi` and keeping linear terms gives, per Fourier mode
//! `sigma_n = n pi / L`, the growth rate
//!
//! ```text
//! lambda(n) = -sigma_n^2 (1 - sqrt(2L) mu omega_n),   omega_n = (2L)^{-1/2} integral W e^{-i sigma_n x}
//! ```
//!
//! with `mu rho*` folded into `mu` by default. The Keller-Segel systems with one
//! and two auxiliary fields lead to a quadratic and a cubic in `lambda` whose
//! bounded root tends to the same rate as `eps -> 0`.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;

/// Samples used when no closed form of `omega_n` is known.
pub const OMEGA_SAMPLES: usize = 8192;

fn sigma(n: i64, l: f64) -> f64 {
    n as f64 * std::f64::consts::PI / l
}

/// `omega_n` by the trapezoid rule on `samples` offsets `i 2L / samples`.
pub fn fourier_coefficient_numeric(kernel: &KernelSpec, n: i64, samples: usize) -> f64 {
    let l = kernel.half_length();
    let dx = 2.0 * l / samples as f64;
    let s = sigma(n, l);
    let sum: f64 = (0..samples)
        .map(|i| {
            let x = if i <= samples / 2 {
                i as f64 * dx
            } else {
                (i as f64 - samples as f64) * dx
            };
            kernel.eval(x) * (s * x).cos()
        })
        .sum();
    sum * dx / (2.0 * l).sqrt()
}

/// `omega_n`, real because the potentials are even. Closed forms are used for
/// Green's-function sums and the attraction kernel.
pub fn fourier_coefficient(kernel: &KernelSpec, n: i64) -> f64 {
    let l = kernel.half_length();
    match kernel.fourier_transform_closed_form(sigma(n, l)) {
        Some(v) => v / (2.0 * l).sqrt(),
        None => fourier_coefficient_numeric(kernel, n, OMEGA_SAMPLES),
    }
}

/// How the density level enters the linearization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub enum Linearization {
    /// `mu rho*` replaced by `mu`.
    #[default]
    Replaced,
    /// Keeps the factor `rho*`.
    Literal { rho_star: f64 },
}

impl Linearization {
    fn effective_mu(self, mu: f64) -> f64 {
        match self {
            Linearization::Replaced => mu,
            Linearization::Literal { rho_star } => mu * rho_star,
        }
    }
}

/// `lambda(n) = -sigma_n^2 (1 - sqrt(2L) mu omega_n)`.
pub fn dispersion_lambda(kernel: &KernelSpec, n: i64, mu: f64, lin: Linearization) -> f64 {
    let l = kernel.half_length();
    let s = sigma(n, l);
    -s * s * (1.0 - (2.0 * l).sqrt() * lin.effective_mu(mu) * fourier_coefficient(kernel, n))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DispersionCurve {
    pub modes: Vec<i64>,
    pub omegas: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Mode with the largest rate among `n >= 1`.
    pub argmax: i64,
    pub max_lambda: f64,
    /// Modes `n >= 1` with `lambda(n) > 0`.
    pub unstable: Vec<i64>,
}

impl DispersionCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,omega_n,lambda_n\n");
        for ((n, w), l) in self.modes.iter().zip(&self.omegas).zip(&self.lambdas) {
            out.push_str(&format!("{n},{w},{l}\n"));
        }
        out
    }
}

/// Rates for modes `0..=n_max`.
pub fn dispersion_curve(
    kernel: &KernelSpec,
    mu: f64,
    n_max: i64,
    lin: Linearization,
) -> Result<DispersionCurve> {
    if n_max < 1 {
        return Err(Error::config(
            "stability.n_max",
            format!("need at least one nonzero mode, got {n_max}"),
        ));
    }
    if !(mu >= 0.0) {
        return Err(Error::config("model.mu", format!("must be >= 0, got {mu}")));
    }
    let modes: Vec<i64> = (0..=n_max).collect();
    let omegas: Vec<f64> = modes
        .iter()
        .map(|&n| fourier_coefficient(kernel, n))
        .collect();
    let lambdas: Vec<f64> = modes
        .iter()
        .map(|&n| dispersion_lambda(kernel, n, mu, lin))
        .collect();
    let (argmax, max_lambda) =
        modes
            .iter()
            .zip(&lambdas)
            .skip(1)
            .fold((1, f64::NEG_INFINITY), |best, (&n, &l)| {
                if l > best.1 {
                    (n, l)
                } else {
                    best
                }
            });
    let unstable = modes
        .iter()
        .zip(&lambdas)
        .skip(1)
        .filter(|(_, l)| **l > 0.0)
        .map(|(n, _)| *n)
        .collect();
    Ok(DispersionCurve {
        modes,
        omegas,
        lambdas,
        argmax,
        max_lambda,
        unstable,
    })
}

/// Threshold `mu_* = 1 / (sqrt(2L) omega_{n1})`: `lambda(n1) > 0` iff `mu > mu_*`.
pub fn critical_mu(kernel: &KernelSpec, n1: i64) -> Result<f64> {
    let omega = fourier_coefficient(kernel, n1);
    if omega <= 0.0 {
        return Err(Error::NotDestabilizable { n: n1, omega });
    }
    Ok(1.0 / ((2.0 * kernel.half_length()).sqrt() * omega))
}

/// Evaluates `sum_k coeffs[k] z^k`.
fn poly_eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// `|p(z)| / sum_k |c_k| |z|^k`.
pub fn relative_residual(coeffs: &[f64], z: Complex64) -> f64 {
    let scale: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c.abs() * z.norm().powi(k as i32))
        .sum();
    poly_eval(coeffs, z).norm() / scale.max(f64::MIN_POSITIVE)
}

/// Roots of the quadratic for one auxiliary field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoComponentEigs {
    /// Root that stays bounded as `eps -> 0`.
    pub alpha: Complex64,
    /// Root that diverges like `-(d1 sigma^2 + 1) / eps`.
    pub beta: Complex64,
    /// `lim alpha = -sigma^2 (1 - mu / (d1 sigma^2 + 1))`.
    pub alpha_limit: f64,
    /// `P_1` coefficients `[c0, c1, 1]`.
    pub coeffs: [f64; 3],
}

/// `P_1(lambda) = lambda^2 + (C30/eps + C31) lambda + C32/eps` with
/// `C30 = d1 sigma^2 + 1`, `C31 = sigma^2`, `C32 = d1 sigma^4 + sigma^2 - mu sigma^2`.
pub fn two_component_eigs(n: i64, eps: f64, mu: f64, d1: f64, l: f64) -> Result<TwoComponentEigs> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::config(
            "model.eps",
            format!("must be positive, got {eps}"),
        ));
    }
    let s2 = sigma(n, l).powi(2);
    let c30 = d1 * s2 + 1.0;
    let c31 = s2;
    let c32 = d1 * s2 * s2 + s2 - mu * s2;
    // eps P_1 = eps lambda^2 + b lambda + C32
    let b = c30 + eps * c31;
    let root = Complex64::new(b * b - 4.0 * eps * c32, 0.0).sqrt();
    let big = -b - root;
    let alpha = 2.0 * c32 / big;
    let beta = big / (2.0 * eps);
    Ok(TwoComponentEigs {
        alpha,
        beta,
        alpha_limit: -c32 / c30,
        coeffs: [c32 / eps, c30 / eps + c31, 1.0],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThreeComponentEigs {
    pub roots: [Complex64; 3],
    /// Root closest to `lambda0`.
    pub bounded: Complex64,
    /// `-sigma^2 (1 - mu sqrt(2L) omega_n)` for the difference-of-Green's potential.
    pub lambda0: f64,
    /// Monic `P_2` coefficients `[c0, c1, c2, 1]`.
    pub coeffs: [f64; 4],
}

/// Roots of `P_2(lambda) = lambda^3 + (C31 + C33/eps) lambda^2 + (C34/eps^2 + C35/eps) lambda + C36/eps^2`
/// with `C33 = 2 + (d1 + d2) sigma^2`, `C34 = (1 + d1 sigma^2)(1 + d2 sigma^2)`,
/// `C35 = sigma^2 C33`, `C36 = sigma^2 C34 + mu (d1 - d2) sigma^4`.
pub fn three_component_lambda(
    n: i64,
    eps: f64,
    mu: f64,
    d1: f64,
    d2: f64,
    l: f64,
) -> Result<ThreeComponentEigs> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::config(
            "model.eps",
            format!("must be positive, got {eps}"),
        ));
    }
    let s2 = sigma(n, l).powi(2);
    let c31 = s2;
    let c33 = 2.0 + (d1 + d2) * s2;
    let c34 = (1.0 + d1 * s2) * (1.0 + d2 * s2);
    let c35 = s2 * c33;
    let c36 = s2 * c34 + mu * (d1 - d2) * s2 * s2;
    let coeffs = [
        c36 / (eps * eps),
        c34 / (eps * eps) + c35 / eps,
        c31 + c33 / eps,
        1.0,
    ];
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::RootSolver(format!(
            "non-finite cubic coefficients {coeffs:?}"
        )));
    }
    let roots = cubic_roots(&coeffs)?;
    let lambda0 = -s2 * (1.0 - mu * (1.0 / (d1 * s2 + 1.0) - 1.0 / (d2 * s2 + 1.0)));
    let bounded = *roots
        .iter()
        .min_by(|a, b| (**a - lambda0).norm().total_cmp(&(**b - lambda0).norm()))
        .expect("three roots");
    Ok(ThreeComponentEigs {
        roots,
        bounded,
        lambda0,
        coeffs,
    })
}

/// Companion-matrix eigenvalues of a monic cubic, each refined by Newton steps.
fn cubic_roots(c: &[f64; 4]) -> Result<[Complex64; 3]> {
    let m = Matrix3::new(-c[2], -c[1], -c[0], 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    let eig = m.complex_eigenvalues();
    let dp = [c[1], 2.0 * c[2], 3.0];
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    for (slot, z0) in roots.iter_mut().zip(eig.iter()) {
        let mut z = Complex64::new(z0.re, z0.im);
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::RootSolver(format!("eigenvalue solver returned {z}")));
        }
        for _ in 0..8 {
            let d = poly_eval(&dp, z);
            if d.norm() == 0.0 {
                break;
            }
            let next = z - poly_eval(c, z) / d;
            if !(next.re.is_finite() && next.im.is_finite()) {
                break;
            }
            if relative_residual(c, next) > relative_residual(c, z) {
                break;
            }
            z = next;
        }
        *slot = z;
    }
    Ok(roots)
}
