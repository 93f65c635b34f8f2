//! Explicit-coefficient expansion of an even potential into `cosh(j(L - |x|))`.
//!
//! Pipeline, for degree `n`:
//!
//! 1. `f(y) = W(L - arccosh y)` on `[1, cosh L]`, so that `f(cosh(L - x)) = W(x)`.
//! 2. Lagrange interpolation of `f` at the `n + 1` Chebyshev nodes of that
//!    interval, with monomial coefficients `b_l` obtained in closed form from the
//!    node polynomial (a shifted `T_{n+1}`) by synthetic division.
//! 3. Monomials rewritten in the Chebyshev basis, `y^k = sum_j delta^k_j T_j(y)`,
//!    and `T_j(cosh s) = cosh(j s)` gives `W(x) ~ sum_j alpha_j cosh(j (L - |x|))`.
//!
//! Inputs and outputs are `f64`; the coefficient sums run in double-double.
//! Degrees are capped at [`MAX_DEGREE`].

use serde::{Deserialize, Serialize};

use crate::ddouble::Dd;
use crate::error::{Error, Result};
use crate::kernels::{Diffusivity, KernelSpec, WeightedGreen};

/// Highest supported interpolation degree.
pub const MAX_DEGREE: usize = 30;

fn check_degree(n: usize, field: &str) -> Result<()> {
    if n > MAX_DEGREE {
        return Err(Error::config(
            field,
            format!("degree {n} exceeds the cap {MAX_DEGREE}"),
        ));
    }
    Ok(())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial_int(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn binomial(n: usize, k: usize) -> f64 {
    binomial_int(n, k) as f64
}

/// Coefficients `C^n_k`, `k = 0..=n/2`, with `T_n(x) = sum_k C^n_k x^{n-2k}`.
///
/// `(n/2)(-1)^k (n-k-1)! / (k! (n-2k)!) 2^{n-2k}` is evaluated as the integer
/// `n binom(n-k, k) 2^{n-2k} / (2(n-k))`, so every entry is exact.
pub fn cheb_mono_coeffs(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::config(
            "degree",
            "Chebyshev monomial table starts at n = 1",
        ));
    }
    check_degree(n, "degree")?;
    Ok((0..=n / 2)
        .map(|k| {
            let magnitude =
                n as u128 * binomial_int(n - k, k) * (1u128 << (n - 2 * k)) / (2 * (n - k)) as u128;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * magnitude as f64
        })
        .collect())
}

fn shifted_cheb_coeffs_dd(n: usize, a: f64, b: f64) -> Result<Vec<Dd>> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::config(
            "interval",
            format!("degenerate interval [{a}, {b}]"),
        ));
    }
    if n == 0 {
        return Ok(vec![Dd::ONE]);
    }
    let c = cheb_mono_coeffs(n)?;
    let width = Dd::from(b) - Dd::from(a);
    let scale = Dd::from(2.0) / width;
    let shift = -(Dd::from(b) + Dd::from(a)) * Dd::from(0.5);
    let mut xi = vec![Dd::ZERO; n + 1];
    // C_k (scale (x + shift))^{n-2k}, expanded binomially term by term
    for (k, &ck) in c.iter().enumerate() {
        let p = n - 2 * k;
        let lead = Dd::from(ck) * scale.powi(p as u32);
        for j in 0..=p {
            xi[p - j] = xi[p - j] + lead * Dd::from(binomial(p, j)) * shift.powi(j as u32);
        }
    }
    Ok(xi)
}

/// Monomial coefficients `xi_0..=xi_n` of `T_n((2x - (b + a)) / (b - a))`.
pub fn shifted_cheb_coeffs(n: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    Ok(shifted_cheb_coeffs_dd(n, a, b)?
        .into_iter()
        .map(Dd::to_f64)
        .collect())
}

/// Roots of `T_m` mapped to `[a, b]`, ascending.
pub fn cheb_nodes(m: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::config("degree", "need at least one node"));
    }
    if !(a < b) {
        return Err(Error::config(
            "interval",
            format!("degenerate interval [{a}, {b}]"),
        ));
    }
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    // j = m-1 .. 0 gives ascending order
    Ok((0..m)
        .rev()
        .map(|j| {
            let theta = (2 * j + 1) as f64 * std::f64::consts::PI / (2 * m) as f64;
            mid + half * theta.cos()
        })
        .collect())
}

fn lagrange_poly_coeffs_dd(samples: &[f64], n: usize, a: f64, b: f64) -> Result<Vec<Dd>> {
    check_degree(n, "degree")?;
    if samples.len() != n + 1 {
        return Err(Error::config(
            "samples",
            format!(
                "expected {} samples for degree {n}, got {}",
                n + 1,
                samples.len()
            ),
        ));
    }
    let m = n + 1;
    let nodes = cheb_nodes(m, a, b)?;
    let xi = shifted_cheb_coeffs_dd(m, a, b)?;
    let half_width = (Dd::from(b) - Dd::from(a)) * Dd::from(0.5);
    let norm = Dd::from(0.5f64.powi(n as i32)) * half_width.powi(m as u32);
    let mut coeffs = vec![Dd::ZERO; m];
    for (j, &rj) in nodes.iter().enumerate() {
        let r = Dd::from(rj);
        let denom = nodes
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .fold(Dd::ONE, |acc, (_, &rk)| acc * (r - Dd::from(rk)));
        assert!(denom.to_f64() != 0.0, "duplicate Chebyshev nodes");
        let zeta = Dd::from(samples[j]) / denom;
        // synthetic division of the node polynomial by (x - r_j):
        // beta_l = sum_{k=l}^{n} r_j^{k-l} xi_{k+1}
        let mut beta = Dd::ZERO;
        for l in (0..m).rev() {
            beta = beta * r + xi[l + 1];
            coeffs[l] = coeffs[l] + zeta * beta;
        }
    }
    Ok(coeffs.into_iter().map(|c| c * norm).collect())
}

/// Monomial coefficients `b_0..=b_n` of the degree-`n` interpolant of the
/// `samples` taken at `cheb_nodes(n + 1, a, b)`.
///
/// Intermediate sums carry about 106 bits: the monomial basis on `[1, cosh L]`
/// cancels heavily and plain `f64` loses most of the digits by `n = 9`.
pub fn lagrange_poly_coeffs(samples: &[f64], n: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    Ok(lagrange_poly_coeffs_dd(samples, n, a, b)?
        .into_iter()
        .map(Dd::to_f64)
        .collect())
}

/// `delta^n_j` for `j = 0..=n` with `x^n = sum_j delta^n_j T_j(x)`; entries with
/// `j` of the wrong parity are zero.
pub fn mono_to_cheb(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for j in (n % 2..=n).step_by(2) {
        let c = binomial(n, (n - j) / 2);
        out[j] = if j == 0 {
            c * 0.5f64.powi(n as i32)
        } else {
            c * 0.5f64.powi(n as i32 - 1)
        };
    }
    out
}

/// `arccosh(y)` for `y >= 1`, accurate near `y = 1`.
pub fn arccosh_near_one(y: f64) -> f64 {
    let t = y - 1.0;
    (t + (t * (t + 2.0)).sqrt()).ln_1p()
}

/// `W(x) ~ sum_j alphas[j] cosh(j (L - |x|))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoshExpansion {
    pub half_length: f64,
    pub degree: usize,
    pub alphas: Vec<f64>,
}

impl CoshExpansion {
    pub fn reconstruct(&self, x: f64) -> f64 {
        let s = self.half_length - crate::kernels::wrap_position(x, self.half_length).abs();
        self.alphas
            .iter()
            .enumerate()
            .map(|(j, a)| a * (j as f64 * s).cosh())
            .sum()
    }
}

/// Expands an even potential given through its values on `[0, L]`.
pub fn cosh_expansion(w: impl Fn(f64) -> f64, n: usize, half_length: f64) -> Result<CoshExpansion> {
    cosh_expansion_with_table(w, n, half_length, mono_to_cheb)
}

/// Same as [`cosh_expansion`] with an injectable basis-change table.
pub(crate) fn cosh_expansion_with_table(
    w: impl Fn(f64) -> f64,
    n: usize,
    half_length: f64,
    table: impl Fn(usize) -> Vec<f64>,
) -> Result<CoshExpansion> {
    if n == 0 {
        return Err(Error::config(
            "model.degree",
            "expansion degree must be >= 1",
        ));
    }
    check_degree(n, "model.degree")?;
    let l = half_length;
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::config(
            "grid.half_length",
            "half-length must be positive",
        ));
    }
    let (a, b) = (1.0, l.cosh());
    let nodes = cheb_nodes(n + 1, a, b)?;
    let samples: Vec<f64> = nodes
        .iter()
        .map(|&y| w((l - arccosh_near_one(y)).max(0.0)))
        .collect();
    if let Some(bad) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::config(
            "kernel",
            format!(
                "potential is not finite at x = {}",
                l - arccosh_near_one(nodes[bad])
            ),
        ));
    }
    let bcoef = lagrange_poly_coeffs_dd(&samples, n, a, b)?;
    let mut alphas = vec![Dd::ZERO; n + 1];
    for (k, &bk) in bcoef.iter().enumerate() {
        let delta = table(k);
        for (j, &dj) in delta.iter().enumerate().take(k + 1) {
            alphas[j] = alphas[j] + bk * Dd::from(dj);
        }
    }
    Ok(CoshExpansion {
        half_length: l,
        degree: n,
        alphas: alphas.into_iter().map(Dd::to_f64).collect(),
    })
}

/// Expansion of a kernel spec on its own half-length.
pub fn cosh_expansion_of(kernel: &KernelSpec, n: usize) -> Result<CoshExpansion> {
    cosh_expansion(|x| kernel.eval(x), n, kernel.half_length())
}

/// Sup-norm of `W - reconstruction` over `grid_size + 1` uniform points of `[0, L]`.
pub fn expansion_error(
    w: impl Fn(f64) -> f64,
    exp: &CoshExpansion,
    grid_size: usize,
) -> Result<f64> {
    if grid_size < 1000 {
        return Err(Error::config(
            "grid_size",
            format!("need at least 1000 points, got {grid_size}"),
        ));
    }
    let h = exp.half_length / grid_size as f64;
    Ok((0..=grid_size)
        .map(|i| {
            let x = i as f64 * h;
            (w(x) - exp.reconstruct(x)).abs()
        })
        .fold(0.0, f64::max))
}

/// Estimated interpolation error bound for degree `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorBoundEstimate {
    /// Spectral estimate of `max |f^{(n+1)}|` on `[1, cosh L]`, before the safety factor.
    pub derivative_max: f64,
    pub safety_factor: f64,
    /// `(1 / (2^n (n+1)!)) ((cosh L - 1) / 2)^{n+1} * safety * derivative_max`.
    pub bound: f64,
}

/// Chebyshev-series coefficients of `f` on `[a, b]` from `m` Gauss points.
fn chebyshev_series(f: impl Fn(f64) -> f64, m: usize, a: f64, b: f64) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let pi = std::f64::consts::PI;
    let values: Vec<f64> = (0..m)
        .map(|j| f(mid + half * ((2 * j + 1) as f64 * pi / (2 * m) as f64).cos()))
        .collect();
    (0..m)
        .map(|k| {
            let s: f64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| v * (k as f64 * (2 * j + 1) as f64 * pi / (2 * m) as f64).cos())
                .sum();
            let c = 2.0 * s / m as f64;
            if k == 0 {
                0.5 * c
            } else {
                c
            }
        })
        .collect()
}

/// Coefficients of the derivative series on `[a, b]`.
fn chebyshev_derivative(c: &[f64], a: f64, b: f64) -> Vec<f64> {
    let m = c.len();
    if m < 2 {
        return vec![0.0];
    }
    let mut d = vec![0.0; m];
    for k in (1..m).rev() {
        let next = if k + 1 < m { d[k + 1] } else { 0.0 };
        d[k - 1] = next + 2.0 * k as f64 * c[k];
    }
    d[0] *= 0.5;
    d.truncate(m - 1);
    let scale = 2.0 / (b - a);
    d.iter().map(|v| v * scale).collect()
}

fn clenshaw(c: &[f64], t: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + c.first().copied().unwrap_or(0.0)
}

/// Spectral estimate of the interpolation error bound for `f(y) = W(L - arccosh y)`.
pub fn interpolation_error_bound(
    w: impl Fn(f64) -> f64,
    n: usize,
    half_length: f64,
    safety_factor: f64,
) -> Result<ErrorBoundEstimate> {
    check_degree(n, "model.degree")?;
    let l = half_length;
    let (a, b) = (1.0, l.cosh());
    let f = |y: f64| w((l - arccosh_near_one(y)).max(0.0));
    let mut series = chebyshev_series(f, 96, a, b);
    for _ in 0..=n {
        series = chebyshev_derivative(&series, a, b);
    }
    let samples = 4000;
    let derivative_max = (0..=samples)
        .map(|i| clenshaw(&series, -1.0 + 2.0 * i as f64 / samples as f64).abs())
        .fold(0.0, f64::max);
    let prefactor =
        1.0 / (2f64.powi(n as i32) * factorial(n + 1)) * (0.5 * (b - a)).powi(n as i32 + 1);
    Ok(ErrorBoundEstimate {
        derivative_max,
        safety_factor,
        bound: prefactor * safety_factor * derivative_max,
    })
}

/// How the first (mean-field) auxiliary diffusivity is set. Written as
/// `"exact_limit"` or a number in config files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "D1ModeRepr", into = "D1ModeRepr")]
pub enum D1Mode {
    ExactLimit,
    Finite(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum D1ModeRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<D1ModeRepr> for D1Mode {
    type Error = String;

    fn try_from(value: D1ModeRepr) -> std::result::Result<Self, Self::Error> {
        match value {
            D1ModeRepr::Number(d) => Ok(D1Mode::Finite(d)),
            D1ModeRepr::Text(s) if s == "exact_limit" => Ok(D1Mode::ExactLimit),
            D1ModeRepr::Text(s) => Err(format!("expected a number or \"exact_limit\", got {s:?}")),
        }
    }
}

impl From<D1Mode> for D1ModeRepr {
    fn from(value: D1Mode) -> Self {
        match value {
            D1Mode::Finite(d) => D1ModeRepr::Number(d),
            D1Mode::ExactLimit => D1ModeRepr::Text("exact_limit".into()),
        }
    }
}

/// Parameters of the `(M + 1)`-component Keller-Segel system.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KsParams {
    /// Chemotactic weights `a_1..a_M`.
    pub a: Vec<f64>,
    /// Diffusivities `d_1..d_M`.
    pub d: Vec<Diffusivity>,
    pub eps: f64,
    pub mu: f64,
}

impl KsParams {
    pub fn new(a: Vec<f64>, d: Vec<Diffusivity>, eps: f64, mu: f64) -> Result<Self> {
        let p = KsParams { a, d, eps, mu };
        p.validate()?;
        Ok(p)
    }

    /// Direct representation of a linear-sum potential.
    pub fn from_linear_sum(terms: &[WeightedGreen], eps: f64, mu: f64) -> Result<Self> {
        Self::new(
            terms.iter().map(|t| t.weight).collect(),
            terms.iter().map(|t| t.d).collect(),
            eps,
            mu,
        )
    }

    pub fn components(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::config(
                "model.eps",
                format!("eps must be positive, got {}", self.eps),
            ));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::config(
                "model.mu",
                format!("mu must be >= 0, got {}", self.mu),
            ));
        }
        if self.a.is_empty() || self.a.len() != self.d.len() {
            return Err(Error::config(
                "model.components",
                format!(
                    "need matching non-empty weight/diffusivity lists, got {} and {}",
                    self.a.len(),
                    self.d.len()
                ),
            ));
        }
        for (j, d) in self.d.iter().enumerate() {
            if let Diffusivity::Finite(v) = d {
                if !(*v > 0.0 && v.is_finite()) {
                    return Err(Error::config(
                        format!("model.d[{j}]"),
                        format!("diffusivity must be positive, got {v}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The potential `sum_j a_j k_j` these parameters represent.
    pub fn linear_sum(&self) -> Vec<WeightedGreen> {
        self.a
            .iter()
            .zip(&self.d)
            .map(|(&weight, &d)| WeightedGreen { weight, d })
            .collect()
    }
}

/// Maps an expansion onto Keller-Segel weights and diffusivities:
/// `a_1 = 2L alpha_0`, `a_j = 2 alpha_{j-1} sinh((j-1)L)/(j-1)`, `d_j = 1/(j-1)^2`.
pub fn expansion_to_ks(
    exp: &CoshExpansion,
    eps: f64,
    mu: f64,
    d1_mode: D1Mode,
) -> Result<KsParams> {
    let l = exp.half_length;
    let mut a = Vec::with_capacity(exp.alphas.len());
    let mut d = Vec::with_capacity(exp.alphas.len());
    for (j, alpha) in exp.alphas.iter().enumerate() {
        if j == 0 {
            a.push(2.0 * l * alpha);
            d.push(match d1_mode {
                D1Mode::ExactLimit => Diffusivity::Infinite,
                D1Mode::Finite(v) => Diffusivity::Finite(v),
            });
        } else {
            let jf = j as f64;
            a.push(2.0 * alpha * (jf * l).sinh() / jf);
            d.push(Diffusivity::Finite(1.0 / (jf * jf)));
        }
    }
    KsParams::new(a, d, eps, mu)
}
