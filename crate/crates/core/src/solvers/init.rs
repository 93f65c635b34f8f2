use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::{PeriodicField, PeriodicGrid};

/// Initial density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDatum {
    Constant {
        value: f64,
    },
    /// `base + xi(x)`, where `xi = sum_{n=1}^{N/8} c_n cos(sigma_n x + phi_n)`
    /// with seeded random `c_n`, `phi_n`, rescaled so that `max |xi| = amplitude`.
    Perturbed {
        base: f64,
        amplitude: f64,
        seed: u64,
    },
    /// `base + amplitude * cos(sigma_n x)`.
    Mode {
        base: f64,
        amplitude: f64,
        n: u32,
    },
    /// Explicit cell values.
    Sampled {
        values: Vec<f64>,
    },
}

impl InitialDatum {
    pub fn perturbed(base: f64, amplitude: f64, seed: u64) -> Self {
        InitialDatum::Perturbed {
            base,
            amplitude,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InitialDatum::Constant { value } if !value.is_finite() => {
                Err(Error::config("init.value", "must be finite"))
            }
            InitialDatum::Perturbed {
                base, amplitude, ..
            }
            | InitialDatum::Mode {
                base, amplitude, ..
            } if !(base.is_finite() && amplitude.is_finite() && *amplitude >= 0.0) => Err(
                Error::config("init.amplitude", "base must be finite and amplitude >= 0"),
            ),
            _ => Ok(()),
        }
    }

    /// Replaces the seed of a perturbed datum; other kinds are returned as is.
    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            InitialDatum::Perturbed {
                base, amplitude, ..
            } => InitialDatum::Perturbed {
                base: *base,
                amplitude: *amplitude,
                seed,
            },
            other => other.clone(),
        }
    }

    pub fn realize(&self, grid: PeriodicGrid) -> Result<PeriodicField> {
        self.validate()?;
        match self {
            InitialDatum::Constant { value } => Ok(PeriodicField::constant(grid, *value)),
            InitialDatum::Mode { base, amplitude, n } => {
                let s = grid.sigma(*n as i64);
                PeriodicField::from_fn(grid, |x| base + amplitude * (s * x).cos())
            }
            InitialDatum::Sampled { values } => {
                PeriodicField::new(grid, values.clone()).map_err(|e| match e {
                    Error::GridMismatch(m) => Error::config("init.values", m),
                    other => other,
                })
            }
            InitialDatum::Perturbed {
                base,
                amplitude,
                seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let modes: Vec<(f64, f64, f64)> = (1..=grid.len() / 8)
                    .map(|n| {
                        let c = rng.gen_range(-1.0..1.0);
                        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                        (grid.sigma(n as i64), c, phase)
                    })
                    .collect();
                let xi: Vec<f64> = grid
                    .centers()
                    .iter()
                    .map(|&x| modes.iter().map(|(s, c, p)| c * (s * x + p).cos()).sum())
                    .collect();
                let peak = xi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let scale = if peak > 0.0 { amplitude / peak } else { 0.0 };
                PeriodicField::new(grid, xi.into_iter().map(|v| base + scale * v).collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbation_is_seeded_and_normalized() {
        let g = PeriodicGrid::new(5.0, 256).unwrap();
        let a = InitialDatum::perturbed(1.0, 1e-3, 7).realize(g).unwrap();
        let b = InitialDatum::perturbed(1.0, 1e-3, 7).realize(g).unwrap();
        let c = InitialDatum::perturbed(1.0, 1e-3, 8).realize(g).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let dev = a
            .values()
            .iter()
            .fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
        assert!((dev - 1e-3).abs() < 1e-15);
        // zero-mean perturbation: only modes n >= 1
        assert!((a.mean() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mode_datum() {
        let g = PeriodicGrid::new(1.0, 64).unwrap();
        let f = InitialDatum::Mode {
            base: 1.0,
            amplitude: 0.1,
            n: 1,
        }
        .realize(g)
        .unwrap();
        assert!((f.mass() - 2.0).abs() < 1e-14);
        assert!((f.max() - 1.1).abs() < 1e-3);
    }

    #[test]
    fn sampled_length_is_checked() {
        let g = PeriodicGrid::new(1.0, 16).unwrap();
        let err = InitialDatum::Sampled {
            values: vec![1.0; 3],
        }
        .realize(g)
        .unwrap_err();
        assert!(err.to_string().contains("init.values"));
    }
}
