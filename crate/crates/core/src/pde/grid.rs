use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform cell-centred grid on the periodic interval `[-L, L]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct PeriodicGrid {
    half_length: f64,
    cells: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridRepr {
    half_length: f64,
    cells: usize,
}

impl TryFrom<GridRepr> for PeriodicGrid {
    type Error = Error;

    fn try_from(r: GridRepr) -> Result<Self> {
        PeriodicGrid::new(r.half_length, r.cells)
    }
}

impl From<PeriodicGrid> for GridRepr {
    fn from(g: PeriodicGrid) -> Self {
        GridRepr {
            half_length: g.half_length,
            cells: g.cells,
        }
    }
}

impl PeriodicGrid {
    pub const MIN_CELLS: usize = 16;

    pub fn new(half_length: f64, cells: usize) -> Result<Self> {
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::config(
                "grid.half_length",
                format!("must be positive and finite, got {half_length}"),
            ));
        }
        if cells < Self::MIN_CELLS || !cells.is_power_of_two() {
            return Err(Error::config(
                "grid.cells",
                format!("must be a power of two >= {}, got {cells}", Self::MIN_CELLS),
            ));
        }
        Ok(PeriodicGrid { half_length, cells })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.cells
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn period(&self) -> f64 {
        2.0 * self.half_length
    }

    pub fn dx(&self) -> f64 {
        self.period() / self.cells as f64
    }

    /// `x_i = -L + (i + 1/2) dx`
    pub fn center(&self, i: usize) -> f64 {
        -self.half_length + (i as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells).map(|i| self.center(i)).collect()
    }

    /// Wavenumber `sigma_n = n pi / L`.
    pub fn sigma(&self, n: i64) -> f64 {
        n as f64 * PI / self.half_length
    }

    /// Signed mode number stored in transform bin `k`.
    pub fn mode_of_bin(&self, k: usize) -> i64 {
        if k <= self.cells / 2 {
            k as i64
        } else {
            k as i64 - self.cells as i64
        }
    }

    pub(crate) fn check_same(&self, other: &PeriodicGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "(L = {}, N = {}) vs (L = {}, N = {})",
                self.half_length, self.cells, other.half_length, other.cells
            )));
        }
        Ok(())
    }
}
