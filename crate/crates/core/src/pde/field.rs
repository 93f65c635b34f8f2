use serde::Serialize;

use super::grid::PeriodicGrid;
use crate::error::{Error, Result};

/// Cell averages on a [`PeriodicGrid`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl PeriodicField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::config(
                "field",
                format!("non-finite value {} in cell {i}", values[i]),
            ));
        }
        Ok(PeriodicField { grid, values })
    }

    /// Used by the time steppers, which check finiteness themselves.
    pub(crate) fn from_vec_unchecked(grid: PeriodicGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        PeriodicField { grid, values }
    }

    pub fn constant(grid: PeriodicGrid, value: f64) -> Self {
        PeriodicField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f` at the cell centres.
    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.centers().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        self.grid.dx() * self.values.iter().sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sqrt(dx sum u_i^2)`
    pub fn l2_norm(&self) -> f64 {
        (self.grid.dx() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Periodic centred difference `(u_{i+1} - u_{i-1}) / (2 dx)`.
    pub fn centered_derivative(&self) -> PeriodicField {
        let n = self.values.len();
        let h = 2.0 * self.grid.dx();
        let values = (0..n)
            .map(|i| (self.values[(i + 1) % n] - self.values[(i + n - 1) % n]) / h)
            .collect();
        PeriodicField {
            grid: self.grid,
            values,
        }
    }

    pub fn sub(&self, other: &PeriodicField) -> Result<PeriodicField> {
        self.grid.check_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(PeriodicField {
            grid: self.grid,
            values,
        })
    }

    pub fn scaled(&self, factor: f64) -> PeriodicField {
        PeriodicField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Cyclic shift by `k` cells: `out[i] = u[i - k]`.
    pub fn shifted(&self, k: usize) -> PeriodicField {
        let n = self.values.len();
        let values = (0..n).map(|i| self.values[(i + n - k % n) % n]).collect();
        PeriodicField {
            grid: self.grid,
            values,
        }
    }

    /// Reflection about `x = 0`, which maps cell `i` to `N - 1 - i`.
    pub fn reflected(&self) -> PeriodicField {
        let mut values = self.values.clone();
        values.reverse();
        PeriodicField {
            grid: self.grid,
            values,
        }
    }
}
