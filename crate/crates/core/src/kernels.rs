//! Interaction potentials on the periodic cell `[-L, L]`.
//!
//! The building block is the periodic Green's function of `-d v'' + v = delta`,
//!
//! ```text
//! k(x) = cosh((L - |x|) / sqrt(d)) / (2 sqrt(d) sinh(L / sqrt(d)))
//! ```
//!
//! which has unit mass, a derivative jump of `-1/d` at the origin and satisfies
//! `k'' = k / d` away from it. [`KernelSpec`] wraps this and the other potential
//! families behind a single evaluation interface.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::simpson;

/// Largest admissible `L / sqrt(d)`; `cosh` overflows double precision a
/// little above 710.
pub const MAX_SCALED_LENGTH: f64 = 700.0;

/// Diffusivity of one auxiliary field. `Infinite` is the exact `d -> inf`
/// limit, whose Green's function is the constant `1/(2L)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiffusivityRepr", into = "DiffusivityRepr")]
pub enum Diffusivity {
    Finite(f64),
    Infinite,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum DiffusivityRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<DiffusivityRepr> for Diffusivity {
    type Error = String;

    fn try_from(value: DiffusivityRepr) -> std::result::Result<Self, Self::Error> {
        match value {
            DiffusivityRepr::Number(d) => Ok(Diffusivity::Finite(d)),
            DiffusivityRepr::Text(s) if s == "inf" || s == "infinite" => Ok(Diffusivity::Infinite),
            DiffusivityRepr::Text(s) => Err(format!("expected a number or \"inf\", got {s:?}")),
        }
    }
}

impl From<Diffusivity> for DiffusivityRepr {
    fn from(value: Diffusivity) -> Self {
        match value {
            Diffusivity::Finite(d) => DiffusivityRepr::Number(d),
            Diffusivity::Infinite => DiffusivityRepr::Text("inf".into()),
        }
    }
}

impl Diffusivity {
    pub fn finite(self) -> Option<f64> {
        match self {
            Diffusivity::Finite(d) => Some(d),
            Diffusivity::Infinite => None,
        }
    }

    /// Fourier multiplier `1 / (d sigma^2 + 1)` of the Green's function; the
    /// infinite limit keeps only the mean.
    pub fn multiplier(self, sigma: f64) -> f64 {
        match self {
            Diffusivity::Finite(d) => 1.0 / (d * sigma * sigma + 1.0),
            Diffusivity::Infinite => {
                if sigma == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for Diffusivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diffusivity::Finite(d) => write!(f, "{d}"),
            Diffusivity::Infinite => f.write_str("inf"),
        }
    }
}

/// One `weight * k_d` term of a linear-sum potential.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedGreen {
    pub weight: f64,
    pub d: Diffusivity,
}

/// One `coef * cos(freq * x)` factor of a [`KernelFamily::GaussianCosine`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosineTerm {
    pub coef: f64,
    pub freq: f64,
}

fn default_cosine_terms() -> Vec<CosineTerm> {
    vec![CosineTerm {
        coef: 1.0,
        freq: 0.0,
    }]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelFamily {
    /// `k_d` itself.
    BesselFund { d: f64 },
    /// The `d -> inf` limit `1/(2L)`.
    ConstantLimit,
    /// `k_{d1} - k_{d2}` with `d1 < d2`.
    MexicanHat { d1: f64, d2: f64 },
    /// `(R0 - |x|)` on `|x| < R0`, zero outside.
    Attract { r0: f64 },
    /// Attraction on `|x| < R0`, repulsion on `R0 <= |x| < R1`.
    AttractRepel { a1: f64, a2: f64, r0: f64, r1: f64 },
    /// `sum_j weight_j k_{d_j}`.
    LinearSum { terms: Vec<WeightedGreen> },
    /// `exp(-decay x^2) * sum_k coef_k cos(freq_k x)`, restricted to the cell.
    GaussianCosine {
        decay: f64,
        #[serde(default = "default_cosine_terms")]
        terms: Vec<CosineTerm>,
    },
    /// Values at offsets `x_i = i * 2L / N`, `i = 0..N`, linearly interpolated.
    Sampled { values: Vec<f64> },
}

/// A validated potential on `[-L, L]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelSpec {
    family: KernelFamily,
    half_length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelNorms {
    /// `||k||_{L1}`
    pub l1: f64,
    /// `||k'||_{L1}`
    pub l1_d1: f64,
    /// `||k''||_{L1}`
    pub l1_d2: f64,
    /// `||k'||_{C}`
    pub sup_d1: f64,
}

/// Wraps `x` into `[-L, L]`. Arguments already inside are returned untouched so
/// that evaluation stays exactly even.
#[inline]
pub fn wrap_position(x: f64, l: f64) -> f64 {
    if (-l..=l).contains(&x) {
        x
    } else {
        (x + l).rem_euclid(2.0 * l) - l
    }
}

fn check_scaled_length(d: f64, l: f64, field: &str) -> Result<()> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::config(
            field,
            format!("diffusivity must be positive and finite, got {d}"),
        ));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::config(
            "grid.half_length",
            format!("half-length must be positive, got {l}"),
        ));
    }
    if l / d.sqrt() > MAX_SCALED_LENGTH {
        return Err(Error::config(
            field,
            format!(
                "L/sqrt(d) = {:.1} exceeds {MAX_SCALED_LENGTH}; diffusivity below the overflow floor {:e}",
                l / d.sqrt(),
                (l / MAX_SCALED_LENGTH).powi(2)
            ),
        ));
    }
    Ok(())
}

/// Normalisation constant `1 / (2 sqrt(d) sinh(L / sqrt(d)))`.
#[inline]
fn green_constant(d: f64, l: f64) -> f64 {
    let s = d.sqrt();
    1.0 / (2.0 * s * (l / s).sinh())
}

#[inline]
fn green_unchecked(x: f64, d: f64, l: f64) -> f64 {
    let x = wrap_position(x, l);
    let s = d.sqrt();
    green_constant(d, l) * ((l - x.abs()) / s).cosh()
}

/// `k'(x)` on the closed half `|x| in [0, L]`, choosing the one-sided branch by
/// `positive_side`. Used where the one-sided limit at the kink is wanted.
#[inline]
fn green_slope_branch(x_abs: f64, d: f64, l: f64, positive_side: bool) -> f64 {
    let s = d.sqrt();
    let v = green_constant(d, l) / s * ((l - x_abs) / s).sinh();
    if positive_side {
        -v
    } else {
        v
    }
}

/// Green's function `k_d(x)` on the periodic cell.
pub fn eval_k(x: f64, d: f64, l: f64) -> Result<f64> {
    check_scaled_length(d, l, "kernel.d")?;
    Ok(green_unchecked(x, d, l))
}

/// Weak derivatives of `k_d`. Orders 1 and 3 are undefined at the kink `x = 0`.
pub fn eval_k_deriv(x: f64, d: f64, l: f64, order: u8) -> Result<f64> {
    check_scaled_length(d, l, "kernel.d")?;
    let x = wrap_position(x, l);
    match order {
        1 | 3 => {
            if x == 0.0 {
                return Err(Error::KinkPoint { x });
            }
            let first = green_slope_branch(x.abs(), d, l, x > 0.0);
            Ok(if order == 1 { first } else { first / d })
        }
        2 => Ok(green_unchecked(x, d, l) / d),
        _ => Err(Error::config(
            "order",
            format!("derivative order must be 1, 2 or 3, got {order}"),
        )),
    }
}

/// Closed-form norms of `k_d` and its derivatives.
pub fn kernel_norms(d: f64, l: f64) -> Result<KernelNorms> {
    check_scaled_length(d, l, "kernel.d")?;
    let s = d.sqrt();
    Ok(KernelNorms {
        l1: 1.0,
        l1_d1: 2.0 * green_constant(d, l) * ((l / s).cosh() - 1.0),
        l1_d2: 1.0 / d,
        sup_d1: 1.0 / (2.0 * d),
    })
}

/// The same norms measured numerically: composite Simpson on each smooth half
/// `[-L, 0]`, `[0, L]` with `n` intervals over the period, and the supremum of
/// `|k'|` over the grid nodes using one-sided values at the kink.
pub fn measured_norms(d: f64, l: f64, n: usize) -> Result<KernelNorms> {
    check_scaled_length(d, l, "kernel.d")?;
    let half = (n / 2).max(2);
    let k = |x: f64| green_unchecked(x, d, l);
    let l1 = simpson(k, -l, 0.0, half) + simpson(k, 0.0, l, half);
    // |k'| is symmetric, so both halves contribute equally.
    let l1_d1 = 2.0 * simpson(|x| green_slope_branch(x, d, l, true).abs(), 0.0, l, half);
    let l1_d2 = l1 / d;
    let h = l / half as f64;
    let sup_d1 = (0..=half)
        .map(|i| green_slope_branch(i as f64 * h, d, l, true).abs())
        .fold(0.0, f64::max);
    Ok(KernelNorms {
        l1,
        l1_d1,
        l1_d2,
        sup_d1,
    })
}

/// Residual of the discrete fundamental-solution identity.
///
/// Samples `k_d` on the node lattice `x_i = i dx` (the kink sits on node 0),
/// applies `-d D2 + I` with periodic second differences and returns the
/// `dx`-weighted L1 distance to the discrete delta `1/dx` at node 0.
pub fn verify_fundamental(d: Diffusivity, l: f64, n: usize) -> Result<f64> {
    let d = match d {
        Diffusivity::Finite(d) => d,
        Diffusivity::Infinite => {
            return Err(Error::config(
                "kernel.family",
                "the constant limit kernel is not the Green's function of an elliptic operator",
            ))
        }
    };
    check_scaled_length(d, l, "kernel.d")?;
    if n < 64 || !n.is_multiple_of(2) {
        return Err(Error::config(
            "grid.cells",
            format!("need an even cell count >= 64, got {n}"),
        ));
    }
    let dx = 2.0 * l / n as f64;
    let samples: Vec<f64> = (0..n)
        .map(|i| green_unchecked(i as f64 * dx, d, l))
        .collect();
    let mut residual = 0.0;
    for i in 0..n {
        let left = samples[(i + n - 1) % n];
        let right = samples[(i + 1) % n];
        let lap = (left - 2.0 * samples[i] + right) / (dx * dx);
        let delta = if i == 0 { 1.0 / dx } else { 0.0 };
        residual += (-d * lap + samples[i] - delta).abs();
    }
    Ok(residual * dx)
}

impl KernelSpec {
    pub fn new(family: KernelFamily, half_length: f64) -> Result<Self> {
        let spec = KernelSpec {
            family,
            half_length,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn bessel(d: f64, half_length: f64) -> Result<Self> {
        Self::new(KernelFamily::BesselFund { d }, half_length)
    }

    pub fn constant_limit(half_length: f64) -> Result<Self> {
        Self::new(KernelFamily::ConstantLimit, half_length)
    }

    pub fn mexican_hat(d1: f64, d2: f64, half_length: f64) -> Result<Self> {
        Self::new(KernelFamily::MexicanHat { d1, d2 }, half_length)
    }

    pub fn attract(r0: f64, half_length: f64) -> Result<Self> {
        Self::new(KernelFamily::Attract { r0 }, half_length)
    }

    pub fn attract_repel(a1: f64, a2: f64, r0: f64, r1: f64, half_length: f64) -> Result<Self> {
        Self::new(KernelFamily::AttractRepel { a1, a2, r0, r1 }, half_length)
    }

    pub fn linear_sum(terms: Vec<WeightedGreen>, half_length: f64) -> Result<Self> {
        Self::new(KernelFamily::LinearSum { terms }, half_length)
    }

    pub fn gaussian_cosine(decay: f64, terms: Vec<CosineTerm>, half_length: f64) -> Result<Self> {
        Self::new(KernelFamily::GaussianCosine { decay, terms }, half_length)
    }

    pub fn sampled(values: Vec<f64>, half_length: f64) -> Result<Self> {
        Self::new(KernelFamily::Sampled { values }, half_length)
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.half_length;
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::config(
                "grid.half_length",
                format!("half-length must be positive, got {l}"),
            ));
        }
        match &self.family {
            KernelFamily::BesselFund { d } => check_scaled_length(*d, l, "kernel.d")?,
            KernelFamily::ConstantLimit => {}
            KernelFamily::MexicanHat { d1, d2 } => {
                check_scaled_length(*d1, l, "kernel.d1")?;
                check_scaled_length(*d2, l, "kernel.d2")?;
                if d1 >= d2 {
                    return Err(Error::config(
                        "kernel.d1",
                        format!("Mexican hat needs d1 < d2, got {d1} >= {d2}"),
                    ));
                }
            }
            KernelFamily::Attract { r0 } => {
                if !(*r0 > 0.0 && *r0 <= l) {
                    return Err(Error::config(
                        "kernel.r0",
                        format!("need 0 < r0 <= L = {l}, got {r0}"),
                    ));
                }
            }
            KernelFamily::AttractRepel { a1, a2, r0, r1 } => {
                if !(*r0 > 0.0 && r0 < r1 && *r1 <= l) {
                    return Err(Error::config(
                        "kernel.r1",
                        format!("need 0 < r0 < r1 <= L = {l}, got r0 = {r0}, r1 = {r1}"),
                    ));
                }
                if !(a1.is_finite() && a2.is_finite()) {
                    return Err(Error::config("kernel.a1", "weights must be finite"));
                }
            }
            KernelFamily::LinearSum { terms } => {
                if terms.is_empty() {
                    return Err(Error::config(
                        "kernel.terms",
                        "linear sum needs at least one term",
                    ));
                }
                for (j, t) in terms.iter().enumerate() {
                    if !t.weight.is_finite() {
                        return Err(Error::config(
                            format!("kernel.terms[{j}].weight"),
                            "weight must be finite",
                        ));
                    }
                    if let Diffusivity::Finite(d) = t.d {
                        check_scaled_length(d, l, &format!("kernel.terms[{j}].d"))?;
                    }
                }
            }
            KernelFamily::GaussianCosine { decay, terms } => {
                if !(*decay >= 0.0 && decay.is_finite()) {
                    return Err(Error::config(
                        "kernel.decay",
                        format!("decay must be >= 0, got {decay}"),
                    ));
                }
                if terms
                    .iter()
                    .any(|t| !(t.coef.is_finite() && t.freq.is_finite()))
                {
                    return Err(Error::config("kernel.terms", "cosine terms must be finite"));
                }
            }
            KernelFamily::Sampled { values } => {
                let n = values.len();
                if n < 2 {
                    return Err(Error::config("kernel.values", "need at least two samples"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::config("kernel.values", "samples must be finite"));
                }
                let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
                for i in 1..n {
                    let diff = (values[i] - values[n - i]).abs();
                    if diff > 1e-12 * scale {
                        return Err(Error::NotEven(format!(
                            "sampled kernel is not even: v[{i}] = {} but v[{}] = {}",
                            values[i],
                            n - i,
                            values[n - i]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Value of the potential at `x` (reduced into the periodic cell).
    pub fn eval(&self, x: f64) -> f64 {
        let l = self.half_length;
        let x = wrap_position(x, l);
        let r = x.abs();
        match &self.family {
            KernelFamily::BesselFund { d } => green_unchecked(x, *d, l),
            KernelFamily::ConstantLimit => 1.0 / (2.0 * l),
            KernelFamily::MexicanHat { d1, d2 } => {
                green_unchecked(x, *d1, l) - green_unchecked(x, *d2, l)
            }
            KernelFamily::Attract { r0 } => {
                if r < *r0 {
                    r0 - r
                } else {
                    0.0
                }
            }
            KernelFamily::AttractRepel { a1, a2, r0, r1 } => {
                if r < *r0 {
                    (a1 + a2) * r0 - a2 * r1 - a1 * r
                } else if r < *r1 {
                    -a2 * (r1 - r)
                } else {
                    0.0
                }
            }
            KernelFamily::LinearSum { terms } => terms
                .iter()
                .map(|t| match t.d {
                    Diffusivity::Finite(d) => t.weight * green_unchecked(x, d, l),
                    Diffusivity::Infinite => t.weight / (2.0 * l),
                })
                .sum(),
            KernelFamily::GaussianCosine { decay, terms } => {
                (-decay * r * r).exp()
                    * terms
                        .iter()
                        .map(|t| t.coef * (t.freq * r).cos())
                        .sum::<f64>()
            }
            KernelFamily::Sampled { values } => {
                let n = values.len();
                let dx = 2.0 * l / n as f64;
                let pos = x.rem_euclid(2.0 * l) / dx;
                let i = (pos.floor() as usize).min(n - 1);
                let frac = pos - i as f64;
                values[i] * (1.0 - frac) + values[(i + 1) % n] * frac
            }
        }
    }

    /// Exact Fourier multiplier `integral W(x) e^{-i sigma x} dx` where a closed
    /// form exists.
    pub fn fourier_transform_closed_form(&self, sigma: f64) -> Option<f64> {
        match &self.family {
            KernelFamily::BesselFund { d } => Some(Diffusivity::Finite(*d).multiplier(sigma)),
            KernelFamily::ConstantLimit => Some(Diffusivity::Infinite.multiplier(sigma)),
            KernelFamily::MexicanHat { d1, d2 } => Some(
                Diffusivity::Finite(*d1).multiplier(sigma)
                    - Diffusivity::Finite(*d2).multiplier(sigma),
            ),
            KernelFamily::LinearSum { terms } => {
                Some(terms.iter().map(|t| t.weight * t.d.multiplier(sigma)).sum())
            }
            KernelFamily::Attract { r0 } => {
                if sigma == 0.0 {
                    Some(r0 * r0)
                } else {
                    Some(2.0 * (1.0 - (r0 * sigma).cos()) / (sigma * sigma))
                }
            }
            _ => None,
        }
    }

    /// True when the potential is a finite sum of Green's functions.
    pub fn as_linear_sum(&self) -> Option<Vec<WeightedGreen>> {
        match &self.family {
            KernelFamily::BesselFund { d } => Some(vec![WeightedGreen {
                weight: 1.0,
                d: Diffusivity::Finite(*d),
            }]),
            KernelFamily::ConstantLimit => Some(vec![WeightedGreen {
                weight: 1.0,
                d: Diffusivity::Infinite,
            }]),
            KernelFamily::MexicanHat { d1, d2 } => Some(vec![
                WeightedGreen {
                    weight: 1.0,
                    d: Diffusivity::Finite(*d1),
                },
                WeightedGreen {
                    weight: -1.0,
                    d: Diffusivity::Finite(*d2),
                },
            ]),
            KernelFamily::LinearSum { terms } => Some(terms.clone()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::periodic_trapezoid;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn green_at_origin() {
        let v = eval_k(0.0, 1.0, 1.0).unwrap();
        assert!(close(v, 1f64.cosh() / (2.0 * 1f64.sinh()), 1e-15));
        assert!(close(v, 0.656518, 1e-6));
    }

    #[test]
    fn constant_limit_is_flat() {
        let k = KernelSpec::constant_limit(2.5).unwrap();
        for x in [-2.5, -1.0, 0.0, 0.3, 2.5, 7.1] {
            assert_eq!(k.eval(x), 1.0 / 5.0);
        }
    }

    #[test]
    fn trapezoid_mass_error_matches_kink_correction() {
        // Nodes include the kink; Euler-Maclaurin on the two smooth halves
        // gives an error of h^2/12 times the slope jump 1/d.
        let (d, l, n) = (1.0, 1.0, 4096);
        let dx = 2.0 * l / n as f64;
        let samples: Vec<f64> = (0..n)
            .map(|i| eval_k(-l + i as f64 * dx, d, l).unwrap())
            .collect();
        let mass = periodic_trapezoid(&samples, 2.0 * l);
        let predicted = dx * dx / (12.0 * d);
        assert!(
            close(mass - 1.0, predicted, 1e-3 * predicted),
            "mass - 1 = {:e}",
            mass - 1.0
        );
        assert!((mass - 1.0).abs() < 1e-7);
    }

    #[test]
    fn trapezoid_mass_converges_at_8192() {
        let (d, l, n) = (1.0, 1.0, 8192);
        let dx = 2.0 * l / n as f64;
        let samples: Vec<f64> = (0..n)
            .map(|i| eval_k(-l + i as f64 * dx, d, l).unwrap())
            .collect();
        assert!((periodic_trapezoid(&samples, 2.0 * l) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn second_derivative_is_the_same_formula() {
        let (d, l) = (0.37, 2.0);
        for i in 0..400 {
            let x = -l + i as f64 * 0.01;
            let lhs = eval_k_deriv(x, d, l, 2).unwrap();
            assert_eq!(lhs, eval_k(x, d, l).unwrap() / d);
        }
    }

    #[test]
    fn odd_derivatives_reject_the_kink() {
        assert!(matches!(
            eval_k_deriv(0.0, 1.0, 1.0, 1),
            Err(Error::KinkPoint { .. })
        ));
        assert!(matches!(
            eval_k_deriv(0.0, 1.0, 1.0, 3),
            Err(Error::KinkPoint { .. })
        ));
        assert!(eval_k_deriv(0.0, 1.0, 1.0, 2).is_ok());
        assert!(eval_k_deriv(0.5, 1.0, 1.0, 4).is_err());
    }

    #[test]
    fn first_derivative_is_odd_and_third_scales() {
        let (d, l) = (0.8, 1.3);
        for x in [0.01, 0.2, 0.9, 1.3] {
            let p = eval_k_deriv(x, d, l, 1).unwrap();
            assert_eq!(eval_k_deriv(-x, d, l, 1).unwrap(), -p);
            assert!(close(eval_k_deriv(x, d, l, 3).unwrap(), p / d, 1e-15));
        }
    }

    #[test]
    fn slope_sup_approaches_half_inverse_d() {
        let (d, l) = (0.3, 2.0);
        let near = eval_k_deriv(1e-12, d, l, 1).unwrap().abs();
        assert!(close(near, 1.0 / (2.0 * d), 1e-10));
    }

    #[test]
    fn central_differences_match_slope_at_second_order() {
        let (d, l) = (0.5, 1.0);
        let x0 = 0.4;
        let err = |h: f64| {
            let fd = (eval_k(x0 + h, d, l).unwrap() - eval_k(x0 - h, d, l).unwrap()) / (2.0 * h);
            (fd - eval_k_deriv(x0, d, l, 1).unwrap()).abs()
        };
        let order = (err(1e-2) / err(5e-3)).log2();
        assert!(order >= 1.9, "observed order {order}");
    }

    #[test]
    fn norms_closed_forms() {
        let n = kernel_norms(1.0, 1.0).unwrap();
        assert_eq!(n.l1, 1.0);
        let c8 = (1f64.cosh() - 1.0) / 1f64.sinh();
        assert!(close(n.l1_d1, c8, 1e-15));
        assert!(close(n.l1_d1, 0.462117, 1e-6));
        for (d, l) in [(0.1, 1.0), (3.0, 5.0), (0.7, 0.2)] {
            let n = kernel_norms(d, l).unwrap();
            assert!(close(n.l1_d2 * d, 1.0, 1e-15));
            assert_eq!(n.sup_d1, 1.0 / (2.0 * d));
        }
    }

    #[test]
    fn measured_norms_agree_with_closed_forms() {
        for (d, l) in [(1.0, 1.0), (0.1, 5.0)] {
            let exact = kernel_norms(d, l).unwrap();
            let meas = measured_norms(d, l, 8192).unwrap();
            assert!(close(meas.l1, exact.l1, 1e-9), "{meas:?}");
            assert!(close(meas.l1_d1, exact.l1_d1, 1e-9), "{meas:?}");
            assert!(close(meas.sup_d1, exact.sup_d1, 1e-12), "{meas:?}");
        }
    }

    #[test]
    fn overflow_floor_is_enforced() {
        assert!(eval_k(0.0, 1e-6, 1.0).is_err());
        assert!(eval_k(0.0, (1.0f64 / 699.0).powi(2), 1.0).is_ok());
        assert!(KernelSpec::bessel(1e-7, 1.0).is_err());
    }

    #[test]
    fn fundamental_residual_rejects_constant_limit() {
        assert!(verify_fundamental(Diffusivity::Infinite, 1.0, 512).is_err());
        assert!(verify_fundamental(Diffusivity::Finite(1.0), 1.0, 32).is_err());
    }

    #[test]
    fn fundamental_residual_converges_at_second_order() {
        // Grid-refinement study: the kink sits on a node, so the L1 residual is
        // O(dx^2) and halves twice per doubling.
        let r: Vec<f64> = [512, 1024, 2048, 4096]
            .iter()
            .map(|&n| verify_fundamental(Diffusivity::Finite(1.0), 1.0, n).unwrap())
            .collect();
        for w in r.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.8..4.2).contains(&ratio), "ratio {ratio}");
        }
        assert!(r[0] < 1e-5);
    }

    #[test]
    fn attract_endpoints_and_continuity() {
        let k = KernelSpec::attract(1.0, 2.0).unwrap();
        assert_eq!(k.eval(0.0), 1.0);
        assert_eq!(k.eval(1.0), 0.0);
        assert_eq!(k.eval(-1.5), 0.0);

        let (a1, a2, r0, r1) = (1.5, 0.7, 0.8, 1.6);
        let inner = (a1 + a2) * r0 - a2 * r1 - a1 * r0;
        let outer = -a2 * (r1 - r0);
        assert!(close(inner, outer, 1e-15));
        let k = KernelSpec::attract_repel(a1, a2, r0, r1, 2.0).unwrap();
        let below = k.eval(r0 - 1e-12);
        let at = k.eval(r0);
        assert!(close(below, at, 1e-11));
        assert!(close(at, outer, 1e-15));
    }

    #[test]
    fn mexican_hat_changes_sign() {
        let k = KernelSpec::mexican_hat(0.1, 3.0, 5.0).unwrap();
        assert!(k.eval(0.0) > 0.0);
        assert!(k.eval(2.0) < 0.0);
        assert!(KernelSpec::mexican_hat(3.0, 0.1, 5.0).is_err());
    }

    #[test]
    fn spec_invariants_are_checked() {
        assert!(KernelSpec::attract(3.0, 2.0).is_err());
        assert!(KernelSpec::attract_repel(1.0, 1.0, 1.0, 0.5, 2.0).is_err());
        assert!(KernelSpec::sampled(vec![1.0, 0.5, 0.2, 0.7], 1.0).is_err());
        assert!(KernelSpec::sampled(vec![1.0, 0.5, 0.2, 0.5], 1.0).is_ok());
    }

    #[test]
    fn sampled_interpolates_linearly() {
        let k = KernelSpec::sampled(vec![1.0, 0.5, 0.2, 0.5], 1.0).unwrap();
        assert!(close(k.eval(0.25), 0.75, 1e-15));
        assert!(close(k.eval(-0.25), 0.75, 1e-15));
        assert!(close(k.eval(1.0), 0.2, 1e-15));
    }

    #[test]
    fn wrapping_reduces_far_offsets() {
        let k = KernelSpec::bessel(0.5, 1.0).unwrap();
        assert!(close(k.eval(0.3 + 4.0), k.eval(0.3), 1e-14));
        assert!(close(k.eval(-0.3 - 2.0), k.eval(-0.3), 1e-14));
    }

    #[test]
    fn diffusivity_serde_accepts_inf() {
        #[derive(Deserialize)]
        struct Wrap {
            d: Diffusivity,
        }
        let w: Wrap = toml::from_str("d = \"inf\"").unwrap();
        assert_eq!(w.d, Diffusivity::Infinite);
        let w: Wrap = toml::from_str("d = 0.25").unwrap();
        assert_eq!(w.d, Diffusivity::Finite(0.25));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn families() -> impl Strategy<Value = KernelSpec> {
            prop_oneof![
                (0.05f64..5.0).prop_map(|d| KernelSpec::bessel(d, 2.0).unwrap()),
                (0.05f64..1.0, 1.5f64..5.0)
                    .prop_map(|(a, b)| KernelSpec::mexican_hat(a, b, 2.0).unwrap()),
                (0.1f64..2.0).prop_map(|r| KernelSpec::attract(r, 2.0).unwrap()),
                (0.1f64..2.0, 0.1f64..2.0, 0.2f64..0.9).prop_map(|(a1, a2, r0)| {
                    KernelSpec::attract_repel(a1, a2, r0, 2.0 * r0, 2.0).unwrap()
                }),
                (0.0f64..8.0, -3.0f64..3.0).prop_map(|(g, c)| KernelSpec::gaussian_cosine(
                    g,
                    vec![CosineTerm { coef: c, freq: 2.0 }],
                    2.0
                )
                .unwrap()),
            ]
        }

        proptest! {
            #[test]
            fn closed_forms_are_exactly_even(k in families(), x in -2.0f64..2.0) {
                prop_assert_eq!(k.eval(x), k.eval(-x));
            }

            #[test]
            fn green_is_positive(x in -3.0f64..3.0, d in 0.01f64..10.0) {
                prop_assert!(eval_k(x, d, 1.5).unwrap() > 0.0);
            }
        }
    }
}
