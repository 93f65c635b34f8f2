use rayon::prelude::*;
use serde::Serialize;

use super::norms::{aux_error_norms, error_norms};
use crate::chebfit::KsParams;
use crate::error::{Error, Result};
use crate::kernels::Diffusivity;
use crate::solvers::{solve, Model, SimConfig};

/// Ordinary least-squares line through `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square vertical residual.
    pub residual: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::config(
            "fit",
            format!(
                "need at least two paired points, got {} and {}",
                x.len(),
                y.len()
            ),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::config("fit", "abscissae are all equal"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(LineFit {
        slope,
        intercept,
        residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderRow {
    pub eps: f64,
    pub sup_t_l2: f64,
    pub l2_t_h1: f64,
    /// `max_j sup_t ||v_j - k_j * rho||_{L2}`
    pub aux_sup_t_l2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// Sorted by decreasing `eps`.
    pub rows: Vec<LadderRow>,
    /// Fit of `log sup_t_l2` against `log eps`.
    pub fit: LineFit,
}

impl ConvergenceReport {
    pub fn slope(&self) -> f64 {
        self.fit.slope
    }

    pub fn errors_strictly_decrease(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].sup_t_l2 < w[0].sup_t_l2)
    }

    pub fn aux_errors_decrease(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].aux_sup_t_l2 < w[0].aux_sup_t_l2)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,sup_t_l2,l2_t_h1,aux_sup_t_l2\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.eps, r.sup_t_l2, r.l2_t_h1, r.aux_sup_t_l2
            ));
        }
        out
    }
}

/// Checks that a ladder has at least three distinct positive values spanning
/// at least 1.5 decades; returns it sorted by decreasing `eps`.
pub fn validate_ladder(ladder: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = ladder.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidLadder(format!(
            "eps must be positive and finite, got {bad}"
        )));
    }
    let mut sorted = ladder.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    if sorted.windows(2).any(|w| w[1] >= w[0] * (1.0 - 1e-12)) {
        return Err(Error::InvalidLadder("values must be distinct".into()));
    }
    if sorted.len() < 3 {
        return Err(Error::InvalidLadder(format!(
            "need at least 3 values, got {}",
            sorted.len()
        )));
    }
    let span = (sorted[0] / sorted[sorted.len() - 1]).log10();
    if span < 1.5 - 1e-9 {
        return Err(Error::InvalidLadder(format!(
            "values span {span:.2} decades, need at least 1.5"
        )));
    }
    Ok(sorted)
}

/// Runs the nonlocal model of `base` once and its Keller-Segel counterpart
/// with weights `a`, diffusivities `d` for every `eps` of the ladder, then fits
/// the error decay rate.
pub fn convergence_study(
    base: &SimConfig,
    a: &[f64],
    d: &[Diffusivity],
    ladder: &[f64],
) -> Result<ConvergenceReport> {
    let ladder = validate_ladder(ladder)?;
    let mu = match &base.model {
        Model::NonlocalFp { mu, .. } => *mu,
        Model::KellerSegel { .. } => {
            return Err(Error::config(
                "model.type",
                "the convergence study starts from the nonlocal model",
            ))
        }
    };
    // parameters are checked before any run starts
    let configs = ladder
        .iter()
        .map(|&eps| {
            let params = KsParams::new(a.to_vec(), d.to_vec(), eps, mu)?;
            Ok(SimConfig {
                model: Model::KellerSegel { params },
                ..base.clone()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let reference = solve(base)?;
    let rows = ladder
        .par_iter()
        .zip(configs.par_iter())
        .map(|(&eps, cfg)| {
            let wrap = |e: Error| Error::LadderSolve {
                eps,
                source: Box::new(e),
            };
            let traj = solve(cfg).map_err(wrap)?;
            let rho = error_norms(&traj, &reference).map_err(wrap)?;
            let aux = aux_error_norms(&traj, &reference, d).map_err(wrap)?;
            Ok(LadderRow {
                eps,
                sup_t_l2: rho.sup_t_l2,
                l2_t_h1: rho.l2_t_h1,
                aux_sup_t_l2: aux.iter().map(|r| r.sup_t_l2).fold(0.0, f64::max),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.eps.ln()).collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|r| r.sup_t_l2.max(f64::MIN_POSITIVE).ln())
        .collect();
    Ok(ConvergenceReport {
        fit: fit_line(&x, &y)?,
        rows,
    })
}
