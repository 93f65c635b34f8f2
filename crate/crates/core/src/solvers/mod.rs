//! Time integration of the nonlocal Fokker-Planck equation
//!
//! ```text
//! rho_t = rho_xx - mu (rho (W * rho)_x)_x
//! ```
//!
//! and of its Keller-Segel approximation, where `W * rho` is replaced by
//! `sum_j a_j v_j` and each `v_j` relaxes on the fast scale `eps` towards
//! `k_j * rho`.
//!
//! Every step is: explicit upwind advection with the potential of the current
//! state, implicit diffusion, then the exact exponential update of the `v_j`.
//! Steps that would break the advective CFL bound are split into equal
//! substeps, so snapshot times depend only on `t_end`, the step size and the
//! stride and line up across runs.

mod init;
mod stepper;
mod trajectory;

pub use init::InitialDatum;
pub use stepper::{paired_run, solve, solve_ks, solve_nonlocal_fp};
pub use trajectory::{StepRecord, Trajectory};

use serde::{Deserialize, Serialize};

use crate::chebfit::KsParams;
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::pde::PeriodicGrid;

/// Advective CFL number used to size substeps.
pub const CFL_NUMBER: f64 = 0.4;
/// `dt` cap in units of `dx^2` when the step is chosen automatically.
pub const AUTO_DT_DX2: f64 = 10.0;
/// Abort once `max rho` exceeds this multiple of its initial value.
pub const BLOW_UP_FACTOR: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Model {
    NonlocalFp { kernel: KernelSpec, mu: f64 },
    KellerSegel { params: KsParams },
}

/// Written as a number or `"auto"` in config files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TimeStepRepr", into = "TimeStepRepr")]
pub enum TimeStep {
    Fixed(f64),
    Auto,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum TimeStepRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<TimeStepRepr> for TimeStep {
    type Error = String;

    fn try_from(value: TimeStepRepr) -> std::result::Result<Self, Self::Error> {
        match value {
            TimeStepRepr::Number(dt) => Ok(TimeStep::Fixed(dt)),
            TimeStepRepr::Text(s) if s == "auto" => Ok(TimeStep::Auto),
            TimeStepRepr::Text(s) => Err(format!("expected a number or \"auto\", got {s:?}")),
        }
    }
}

impl From<TimeStep> for TimeStepRepr {
    fn from(value: TimeStep) -> Self {
        match value {
            TimeStep::Fixed(dt) => TimeStepRepr::Number(dt),
            TimeStep::Auto => TimeStepRepr::Text("auto".into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub grid: PeriodicGrid,
    pub model: Model,
    pub init: InitialDatum,
    pub t_end: f64,
    pub dt: TimeStep,
    /// Snapshot every this many steps; the final state is always kept.
    pub save_every: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::config(
                "time.t_end",
                format!("must be positive, got {}", self.t_end),
            ));
        }
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::config(
                    "time.dt",
                    format!("must be positive, got {dt}"),
                ));
            }
        }
        if self.save_every == 0 {
            return Err(Error::config("time.save_every", "must be >= 1"));
        }
        self.init.validate()?;
        match &self.model {
            Model::NonlocalFp { kernel, mu } => {
                if !(*mu >= 0.0 && mu.is_finite()) {
                    return Err(Error::config("model.mu", format!("must be >= 0, got {mu}")));
                }
                if kernel.half_length() != self.grid.half_length() {
                    return Err(Error::config(
                        "kernel.half_length",
                        format!(
                            "kernel half-length {} differs from grid half-length {}",
                            kernel.half_length(),
                            self.grid.half_length()
                        ),
                    ));
                }
            }
            Model::KellerSegel { params } => params.validate()?,
        }
        Ok(())
    }

    /// Uniform step `t_end / steps` no larger than the requested one.
    pub fn step_plan(&self) -> (usize, f64) {
        let dx = self.grid.dx();
        let target = match self.dt {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Auto => AUTO_DT_DX2 * dx * dx,
        };
        let steps = ((self.t_end / target) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (steps, self.t_end / steps as f64)
    }

    /// Same grid, datum and time settings with another model.
    pub fn with_model(&self, model: Model) -> SimConfig {
        SimConfig {
            model,
            ..self.clone()
        }
    }

    pub fn is_keller_segel(&self) -> bool {
        matches!(self.model, Model::KellerSegel { .. })
    }
}
