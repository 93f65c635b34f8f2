use serde::Serialize;

use crate::pde::{PeriodicField, PeriodicGrid};

/// One macro step of the march.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub substeps: u32,
    pub mass: f64,
}

/// Saved states of one run. `aux[s][j]` is `v_j` at `times[s]` (empty for the
/// nonlocal equation).
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub grid: PeriodicGrid,
    pub times: Vec<f64>,
    pub rho: Vec<PeriodicField>,
    pub aux: Vec<Vec<PeriodicField>>,
    pub steps: Vec<StepRecord>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn initial_mass(&self) -> f64 {
        self.rho[0].mass()
    }

    pub fn final_rho(&self) -> &PeriodicField {
        self.rho.last().expect("trajectory holds the initial state")
    }

    /// Largest `|mass(t) - mass(0)| / |mass(0)|` over the step log.
    pub fn max_relative_mass_drift(&self) -> f64 {
        let m0 = self.initial_mass();
        let scale = m0.abs().max(f64::MIN_POSITIVE);
        self.steps
            .iter()
            .map(|s| (s.mass - m0).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// `(t, mass, min rho, max rho)` per snapshot.
    pub fn summary_rows(&self) -> Vec<(f64, f64, f64, f64)> {
        self.times
            .iter()
            .zip(&self.rho)
            .map(|(t, r)| (*t, r.mass(), r.min(), r.max()))
            .collect()
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("t,mass,min_rho,max_rho\n");
        for (t, m, lo, hi) in self.summary_rows() {
            out.push_str(&format!("{t},{m},{lo},{hi}\n"));
        }
        out
    }
}
