use num_complex::Complex64;

use super::trajectory::{StepRecord, Trajectory};
use super::{Model, SimConfig, BLOW_UP_FACTOR, CFL_NUMBER};
use crate::error::{Error, Result};
use crate::kernels::{Diffusivity, KernelSpec};
use crate::pde::{
    diffusion_step_with, flux_divergence_unchecked, FftPlan, PeriodicField, PeriodicGrid,
    SampledKernel,
};

/// Real transform multipliers `dx * F[W(i dx)]_k` of a sampled potential.
fn kernel_multipliers(spec: &KernelSpec, grid: PeriodicGrid) -> Result<Vec<f64>> {
    let k = SampledKernel::from_spec(spec, grid)?;
    let dx = grid.dx();
    Ok(k.spectrum().iter().map(|c| c.re * dx).collect())
}

/// Mean and transform of the fluctuation of a field.
struct Split {
    mean: f64,
    spec: Vec<Complex64>,
}

fn split(values: &[f64], plan: &FftPlan) -> Split {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let fluct: Vec<f64> = values.iter().map(|v| v - mean).collect();
    Split {
        mean,
        spec: plan.forward(&fluct),
    }
}

/// One auxiliary field `v_j`, held as its mean plus the transform of the rest.
struct AuxField {
    weight: f64,
    /// `d_j sigma_k^2 + 1` per bin; `None` marks bins the infinite limit kills.
    rates: Vec<Option<f64>>,
    /// Relaxation target multipliers: `v_j -> m_k rho_k`.
    targets: Vec<f64>,
    mean: f64,
    spec: Vec<Complex64>,
}

enum Dynamics {
    Nonlocal {
        mu: f64,
        multipliers: Vec<f64>,
    },
    KellerSegel {
        mu: f64,
        eps: f64,
        fields: Vec<AuxField>,
    },
}

impl Dynamics {
    fn new(model: &Model, grid: PeriodicGrid, rho0: &Split) -> Result<Self> {
        match model {
            Model::NonlocalFp { kernel, mu } => Ok(Dynamics::Nonlocal {
                mu: *mu,
                multipliers: kernel_multipliers(kernel, grid)?,
            }),
            Model::KellerSegel { params } => {
                let l = grid.half_length();
                let fields = params
                    .a
                    .iter()
                    .zip(&params.d)
                    .map(|(&weight, &d)| {
                        let spec = match d {
                            Diffusivity::Finite(d) => KernelSpec::bessel(d, l)?,
                            Diffusivity::Infinite => KernelSpec::constant_limit(l)?,
                        };
                        let mut targets = kernel_multipliers(&spec, grid)?;
                        let rates: Vec<Option<f64>> = (0..grid.len())
                            .map(|k| {
                                let s = grid.sigma(grid.mode_of_bin(k));
                                match d {
                                    Diffusivity::Finite(d) => Some(d * s * s + 1.0),
                                    Diffusivity::Infinite if k == 0 => Some(1.0),
                                    Diffusivity::Infinite => None,
                                }
                            })
                            .collect();
                        for (t, r) in targets.iter_mut().zip(&rates) {
                            if r.is_none() {
                                *t = 0.0;
                            }
                        }
                        // v_j(0) = k_j * rho_0
                        let spec: Vec<Complex64> =
                            rho0.spec.iter().zip(&targets).map(|(r, m)| r * m).collect();
                        let mean = targets[0] * rho0.mean;
                        Ok(AuxField {
                            weight,
                            rates,
                            targets,
                            mean,
                            spec,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Dynamics::KellerSegel {
                    mu: params.mu,
                    eps: params.eps,
                    fields,
                })
            }
        }
    }

    /// Advecting potential (constant part dropped).
    fn potential(&self, rho: &Split, plan: &FftPlan) -> Vec<f64> {
        let spec: Vec<Complex64> = match self {
            Dynamics::Nonlocal { mu, multipliers } => rho
                .spec
                .iter()
                .zip(multipliers)
                .map(|(r, m)| r * (m * mu))
                .collect(),
            Dynamics::KellerSegel { mu, fields, .. } => {
                let mut acc = vec![Complex64::new(0.0, 0.0); rho.spec.len()];
                for f in fields {
                    for (a, v) in acc.iter_mut().zip(&f.spec) {
                        *a += v * (f.weight * mu);
                    }
                }
                acc
            }
        };
        plan.inverse_real(spec)
    }

    /// Exact update of each `v_j` over a step of length `h` during which `rho`
    /// moves linearly from `before` to `after`.
    fn relax(&mut self, before: &Split, after: &Split, h: f64) {
        let Dynamics::KellerSegel { eps, fields, .. } = self else {
            return;
        };
        for f in fields.iter_mut() {
            let update = |v: Complex64, g0: Complex64, g1: Complex64, rate: f64| -> Complex64 {
                let r = rate * h / *eps;
                let one_minus_e = -(-r).exp_m1();
                let e = 1.0 - one_minus_e;
                let ramp = 1.0 - one_minus_e / r;
                v * e + g0 * one_minus_e + (g1 - g0) * ramp
            };
            for k in 0..f.spec.len() {
                f.spec[k] = match f.rates[k] {
                    Some(rate) => {
                        let m = f.targets[k];
                        update(f.spec[k], before.spec[k] * m, after.spec[k] * m, rate)
                    }
                    None => Complex64::new(0.0, 0.0),
                };
            }
            let m0 = f.targets[0];
            let rate0 = f.rates[0].unwrap_or(1.0);
            f.mean = update(
                Complex64::new(f.mean, 0.0),
                Complex64::new(m0 * before.mean, 0.0),
                Complex64::new(m0 * after.mean, 0.0),
                rate0,
            )
            .re;
        }
    }

    fn aux_fields(&self, grid: PeriodicGrid, plan: &FftPlan) -> Vec<PeriodicField> {
        match self {
            Dynamics::Nonlocal { .. } => Vec::new(),
            Dynamics::KellerSegel { fields, .. } => fields
                .iter()
                .map(|f| {
                    let values = plan
                        .inverse_real(f.spec.clone())
                        .into_iter()
                        .map(|v| v + f.mean)
                        .collect();
                    PeriodicField::from_vec_unchecked(grid, values)
                })
                .collect(),
        }
    }
}

fn max_face_speed(phi: &[f64], dx: f64) -> f64 {
    let n = phi.len();
    (0..n)
        .map(|i| (phi[(i + 1) % n] - phi[i]).abs() / dx)
        .fold(0.0, f64::max)
}

/// Runs either model.
pub fn solve(config: &SimConfig) -> Result<Trajectory> {
    config.validate()?;
    let grid = config.grid;
    let dx = grid.dx();
    let plan = FftPlan::new(grid.len());
    let mut rho = config.init.realize(grid)?;
    let limit = BLOW_UP_FACTOR
        * rho
            .values()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1.0);
    let mut rho_split = split(rho.values(), &plan);
    let mut dynamics = Dynamics::new(&config.model, grid, &rho_split)?;

    let (steps, h) = config.step_plan();
    let mut traj = Trajectory {
        grid,
        times: vec![0.0],
        rho: vec![rho.clone()],
        aux: vec![dynamics.aux_fields(grid, &plan)],
        steps: Vec::with_capacity(steps),
    };
    let mut t = 0.0;
    for step in 1..=steps {
        let phi = dynamics.potential(&rho_split, &plan);
        let speed = max_face_speed(&phi, dx);
        let substeps = ((h * speed / (CFL_NUMBER * dx)).ceil() as u32).max(1);
        let hs = h / substeps as f64;
        let mut phi = PeriodicField::from_vec_unchecked(grid, phi);
        for sub in 0..substeps {
            if sub > 0 {
                phi =
                    PeriodicField::from_vec_unchecked(grid, dynamics.potential(&rho_split, &plan));
            }
            let div = flux_divergence_unchecked(&rho, &phi);
            let advected: Vec<f64> = rho
                .values()
                .iter()
                .zip(div.values())
                .map(|(r, d)| r - hs * d)
                .collect();
            let next = diffusion_step_with(
                &PeriodicField::from_vec_unchecked(grid, advected),
                hs,
                &plan,
            );
            let t_sub = t + hs * (sub + 1) as f64;
            let peak = next.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !peak.is_finite() {
                return Err(Error::NonFinite { t: t_sub });
            }
            if peak > limit {
                return Err(Error::BlowUp {
                    t: t_sub,
                    max_rho: peak,
                    limit,
                });
            }
            let next_split = split(next.values(), &plan);
            dynamics.relax(&rho_split, &next_split, hs);
            rho = next;
            rho_split = next_split;
        }
        t = if step == steps {
            config.t_end
        } else {
            step as f64 * h
        };
        traj.steps.push(StepRecord {
            t,
            dt: h,
            substeps,
            mass: rho.mass(),
        });
        if step % config.save_every == 0 || step == steps {
            traj.times.push(t);
            traj.rho.push(rho.clone());
            traj.aux.push(dynamics.aux_fields(grid, &plan));
        }
    }
    Ok(traj)
}

pub fn solve_nonlocal_fp(config: &SimConfig) -> Result<Trajectory> {
    if config.is_keller_segel() {
        return Err(Error::config(
            "model.type",
            "expected the nonlocal Fokker-Planck model",
        ));
    }
    solve(config)
}

pub fn solve_ks(config: &SimConfig) -> Result<Trajectory> {
    if !config.is_keller_segel() {
        return Err(Error::config(
            "model.type",
            "expected the Keller-Segel model",
        ));
    }
    solve(config)
}

/// Runs a nonlocal and a Keller-Segel configuration that share grid, initial
/// datum and time stepping, so that their snapshots line up.
pub fn paired_run(fp: &SimConfig, ks: &SimConfig) -> Result<(Trajectory, Trajectory)> {
    check_pairing(fp, ks)?;
    let (a, b) = rayon::join(|| solve(fp), || solve(ks));
    Ok((a?, b?))
}

fn check_pairing(a: &SimConfig, b: &SimConfig) -> Result<()> {
    let mismatch = |what: &str| Err(Error::Misaligned(format!("paired runs differ in {what}")));
    if a.grid != b.grid {
        return mismatch("grid");
    }
    if a.t_end != b.t_end {
        return mismatch("t_end");
    }
    if a.dt != b.dt {
        return mismatch("dt");
    }
    if a.save_every != b.save_every {
        return mismatch("save_every");
    }
    if a.init != b.init {
        return mismatch("initial datum");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::super::{InitialDatum, TimeStep};
    use super::*;
    use crate::chebfit::KsParams;
    use crate::kernels::WeightedGreen;
    use crate::pde::spectral_reference_step;

    fn fp_config(
        grid: PeriodicGrid,
        kernel: KernelSpec,
        mu: f64,
        init: InitialDatum,
        t_end: f64,
    ) -> SimConfig {
        SimConfig {
            grid,
            model: Model::NonlocalFp { kernel, mu },
            init,
            t_end,
            dt: TimeStep::Auto,
            save_every: 10,
        }
    }

    #[test]
    fn constant_state_is_a_fixed_point_of_both_models() {
        let g = PeriodicGrid::new(1.0, 64).unwrap();
        let fp = SimConfig {
            dt: TimeStep::Fixed(1e-4),
            ..fp_config(
                g,
                KernelSpec::mexican_hat(0.1, 3.0, 1.0).unwrap(),
                5.0,
                InitialDatum::Constant { value: 1.3 },
                1.0,
            )
        };
        let ks = fp.with_model(Model::KellerSegel {
            params: KsParams::new(
                vec![1.0, -1.0, 0.5],
                vec![
                    Diffusivity::Finite(0.1),
                    Diffusivity::Finite(3.0),
                    Diffusivity::Infinite,
                ],
                1e-2,
                5.0,
            )
            .unwrap(),
        });
        for cfg in [fp, ks] {
            let traj = solve(&cfg).unwrap();
            assert_eq!(traj.steps.len(), 10_000);
            for r in &traj.rho {
                assert!(r.values().iter().all(|v| (v - 1.3).abs() <= 1e-13));
            }
            for aux in &traj.aux {
                for v in aux {
                    let first = v.values()[0];
                    assert!(v.values().iter().all(|x| (x - first).abs() <= 1e-13));
                }
            }
        }
    }

    #[test]
    fn zero_coupling_reproduces_heat_flow() {
        let g = PeriodicGrid::new(1.0, 1024).unwrap();
        let init = InitialDatum::Sampled {
            values: g
                .centers()
                .iter()
                .map(|x| 1.0 + 0.5 * (PI * x).cos() + 0.2 * (3.0 * PI * x).sin())
                .collect(),
        };
        let cfg = SimConfig {
            dt: TimeStep::Fixed(1e-5),
            save_every: 5000,
            ..fp_config(
                g,
                KernelSpec::bessel(1.0, 1.0).unwrap(),
                0.0,
                init.clone(),
                0.05,
            )
        };
        let traj = solve_nonlocal_fp(&cfg).unwrap();
        let exact = spectral_reference_step(&init.realize(g).unwrap(), 0.05).unwrap();
        let err = traj.final_rho().sub(&exact).unwrap();
        assert!(err.values().iter().all(|v| v.abs() < 1e-3));
    }

    #[test]
    fn mass_is_conserved_and_positivity_kept() {
        let g = PeriodicGrid::new(5.0, 256).unwrap();
        let cfg = fp_config(
            g,
            KernelSpec::mexican_hat(0.1, 3.0, 5.0).unwrap(),
            5.0,
            InitialDatum::perturbed(1.0, 1e-2, 3),
            2.0,
        );
        let traj = solve(&cfg).unwrap();
        assert!(traj.max_relative_mass_drift() <= 1e-11);
        assert!(traj.rho.iter().all(|r| r.min() >= -1e-12));
    }

    #[test]
    fn even_data_stay_even() {
        let g = PeriodicGrid::new(1.0, 128).unwrap();
        let init = InitialDatum::Mode {
            base: 1.0,
            amplitude: 0.3,
            n: 2,
        };
        let cfg = fp_config(g, KernelSpec::attract(0.5, 1.0).unwrap(), 4.0, init, 0.2);
        let traj = solve(&cfg).unwrap();
        // the initial cosine is even about x = 0, i.e. under cell reflection
        for r in &traj.rho {
            for (a, b) in r.values().iter().zip(r.reflected().values()) {
                assert!((a - b).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let g = PeriodicGrid::new(1.0, 64).unwrap();
        let cfg = fp_config(
            g,
            KernelSpec::bessel(0.01, 1.0).unwrap(),
            1e4,
            InitialDatum::Mode {
                base: 1.0,
                amplitude: 0.5,
                n: 1,
            },
            5.0,
        );
        let err = solve(&cfg).unwrap_err();
        assert!(
            matches!(err, Error::BlowUp { .. } | Error::NonFinite { .. }),
            "{err}"
        );
    }

    #[test]
    fn frozen_density_relaxes_each_mode_exactly() {
        let g = PeriodicGrid::new(1.0, 32).unwrap();
        let plan = FftPlan::new(32);
        let rho = PeriodicField::from_fn(g, |x| 1.0 + 0.2 * (PI * x).cos()).unwrap();
        let rho_split = split(rho.values(), &plan);
        let params = KsParams::new(vec![1.0], vec![Diffusivity::Finite(0.5)], 0.01, 1.0).unwrap();
        let mut dynamics = Dynamics::new(&Model::KellerSegel { params }, g, &rho_split).unwrap();
        // push v away from its target, then relax against the same rho
        if let Dynamics::KellerSegel { fields, .. } = &mut dynamics {
            fields[0].spec[1] += Complex64::new(0.3, -0.1);
            fields[0].spec[3] += Complex64::new(-0.2, 0.0);
        }
        let before: Vec<Complex64> = match &dynamics {
            Dynamics::KellerSegel { fields, .. } => fields[0].spec.clone(),
            _ => unreachable!(),
        };
        let h = 1e-3;
        dynamics.relax(&rho_split, &rho_split, h);
        let Dynamics::KellerSegel { fields, .. } = &dynamics else {
            unreachable!()
        };
        for k in [1usize, 3] {
            let s = g.sigma(k as i64);
            let factor = (-(0.5 * s * s + 1.0) * h / 0.01).exp();
            let target = rho_split.spec[k] * fields[0].targets[k];
            let got = (fields[0].spec[k] - target) / (before[k] - target);
            assert!(
                (got.re - factor).abs() < 1e-12 && got.im.abs() < 1e-12,
                "bin {k}"
            );
        }
    }

    #[test]
    fn decoupled_aux_field_tracks_its_target() {
        let g = PeriodicGrid::new(1.0, 128).unwrap();
        let base = fp_config(
            g,
            KernelSpec::bessel(1.0, 1.0).unwrap(),
            0.0,
            InitialDatum::Mode {
                base: 1.0,
                amplitude: 0.5,
                n: 1,
            },
            0.05,
        );
        let heat = solve(&base).unwrap();
        let ks = SimConfig {
            init: InitialDatum::Mode {
                base: 1.0,
                amplitude: 0.5,
                n: 1,
            },
            ..base.with_model(Model::KellerSegel {
                params: KsParams::new(vec![0.0], vec![Diffusivity::Finite(0.2)], 1e-3, 5.0)
                    .unwrap(),
            })
        };
        let traj = solve_ks(&ks).unwrap();
        for (a, b) in heat.rho.iter().zip(&traj.rho) {
            assert!(a.sub(b).unwrap().l2_norm() < 1e-13);
        }
        // after many relaxation times v_1 sits near k * rho
        let k = SampledKernel::from_spec(&KernelSpec::bessel(0.2, 1.0).unwrap(), g).unwrap();
        let target =
            crate::pde::convolve(&k, traj.final_rho(), crate::pde::ConvolutionPath::Fft).unwrap();
        let v = &traj.aux.last().unwrap()[0];
        assert!(v.sub(&target).unwrap().l2_norm() < 1e-2 * target.l2_norm());
    }

    #[test]
    fn paired_runs_line_up_and_self_comparison_is_exact() {
        let g = PeriodicGrid::new(1.0, 64).unwrap();
        let fp = fp_config(
            g,
            KernelSpec::linear_sum(
                vec![
                    WeightedGreen {
                        weight: 1.0,
                        d: Diffusivity::Finite(0.1),
                    },
                    WeightedGreen {
                        weight: -1.0,
                        d: Diffusivity::Finite(3.0),
                    },
                ],
                1.0,
            )
            .unwrap(),
            1.0,
            InitialDatum::Mode {
                base: 1.0,
                amplitude: 0.1,
                n: 1,
            },
            0.1,
        );
        let ks = fp.with_model(Model::KellerSegel {
            params: KsParams::new(
                vec![1.0, -1.0],
                vec![Diffusivity::Finite(0.1), Diffusivity::Finite(3.0)],
                1e-2,
                1.0,
            )
            .unwrap(),
        });
        let (a, b) = paired_run(&fp, &ks).unwrap();
        assert_eq!(a.times, b.times);
        let (c, d) = paired_run(&fp, &fp).unwrap();
        assert_eq!(c, d);
        let mut other = ks.clone();
        other.save_every = 3;
        assert!(matches!(paired_run(&fp, &other), Err(Error::Misaligned(_))));
    }
}
