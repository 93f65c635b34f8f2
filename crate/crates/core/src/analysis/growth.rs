use num_complex::Complex64;
use serde::Serialize;

use super::convergence::{fit_line, LineFit};
use crate::error::{Error, Result};
use crate::pde::PeriodicField;
use crate::solvers::Trajectory;

/// Perturbations above this fraction of the mean leave the linear regime.
pub const LINEAR_REGIME_CAP: f64 = 1e-2;
/// Mode amplitudes below this are treated as absent.
pub const MODE_FLOOR: f64 = 1e-14;
pub const MIN_FIT_SNAPSHOTS: usize = 8;

/// `|integral (u - mean) e^{-i sigma_n x} dx|` by the midpoint rule.
pub fn mode_amplitude(u: &PeriodicField, n: i64) -> f64 {
    let grid = u.grid();
    let s = grid.sigma(n);
    let mean = u.mean();
    let sum: Complex64 = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| (v - mean) * Complex64::from_polar(1.0, -s * grid.center(i)))
        .sum();
    sum.norm() * grid.dx()
}

/// `max |u - mean| / |mean|`.
pub fn relative_deviation(u: &PeriodicField) -> f64 {
    let mean = u.mean();
    let dev = u
        .values()
        .iter()
        .map(|v| (v - mean).abs())
        .fold(0.0, f64::max);
    dev / mean.abs().max(f64::MIN_POSITIVE)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthFit {
    pub n: i64,
    pub rate: f64,
    pub fit: LineFit,
    pub snapshots: usize,
}

/// Fits `log |rho_hat_n(t)|` against `t` over the snapshots with
/// `t0 <= t <= t1`. Every snapshot in the window must be in the linear regime.
pub fn growth_rate_measure(traj: &Trajectory, n: i64, window: (f64, f64)) -> Result<GrowthFit> {
    let (t0, t1) = window;
    if !(t0 < t1) {
        return Err(Error::config(
            "window",
            format!("empty interval [{t0}, {t1}]"),
        ));
    }
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for (t, rho) in traj.times.iter().zip(&traj.rho) {
        if *t < t0 || *t > t1 {
            continue;
        }
        let deviation = relative_deviation(rho);
        if deviation > LINEAR_REGIME_CAP {
            return Err(Error::NonlinearRegime {
                t: *t,
                deviation,
                cap: LINEAR_REGIME_CAP,
            });
        }
        let amplitude = mode_amplitude(rho, n);
        if amplitude < MODE_FLOOR {
            return Err(Error::ModeAbsent { n, amplitude });
        }
        ts.push(*t);
        logs.push(amplitude.ln());
    }
    if ts.len() < MIN_FIT_SNAPSHOTS {
        return Err(Error::config(
            "window",
            format!(
                "{} snapshots in [{t0}, {t1}], need at least {MIN_FIT_SNAPSHOTS}",
                ts.len()
            ),
        ));
    }
    let fit = fit_line(&ts, &logs)?;
    Ok(GrowthFit {
        n,
        rate: fit.slope,
        fit,
        snapshots: ts.len(),
    })
}

/// Periodic local maxima rising above the mean by more than `threshold` times
/// `max - mean`. A plateau counts once.
pub fn count_peaks(u: &PeriodicField, threshold: f64) -> usize {
    let v = u.values();
    let n = v.len();
    let mean = u.mean();
    let cut = mean + threshold * (u.max() - mean);
    if u.max() <= mean {
        return 0;
    }
    (0..n)
        .filter(|&i| {
            let prev = v[(i + n - 1) % n];
            // walk right past a plateau
            let mut k = 1;
            while k < n && v[(i + k) % n] == v[i] {
                k += 1;
            }
            let next = v[(i + k) % n];
            v[i] > cut && v[i] > prev && v[i] > next
        })
        .count()
}

/// Index of the first snapshot whose relative deviation reaches `level`.
pub fn pattern_onset(traj: &Trajectory, level: f64) -> Option<usize> {
    traj.rho.iter().position(|r| relative_deviation(r) >= level)
}
