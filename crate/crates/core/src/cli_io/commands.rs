use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::config::{ModelKind, OutputFormat, RunConfig};
use super::svg::{Plot, Series, Style};
use crate::analysis::{
    convergence_study, count_peaks, critical_mu, dispersion_curve, error_norms, ConvergenceReport,
    DispersionCurve, ErrorReport,
};
use crate::chebfit::{
    cosh_expansion_of, expansion_error, expansion_to_ks, interpolation_error_bound,
    ErrorBoundEstimate,
};
use crate::error::{Error, Result};
use crate::kernels::Diffusivity;
use crate::pde::io::{field_to_csv, write_snapshot};
use crate::pde::PeriodicField;
use crate::solvers::{paired_run, solve, Model, Trajectory};

/// Peaks are counted above `mean + PEAK_THRESHOLD (max - mean)`.
pub const PEAK_THRESHOLD: f64 = 0.25;

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(path, &text)
}

fn metadata(command: &str, cfg: &RunConfig, extra: serde_json::Value) -> serde_json::Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "result": extra,
    })
}

fn profile_plot(title: &str, fields: &[(&str, &PeriodicField)]) -> Plot {
    let mut plot = Plot::new(title, "x", "value");
    for (label, f) in fields {
        let pts = f
            .grid()
            .centers()
            .into_iter()
            .zip(f.values().iter().copied())
            .collect();
        plot.push(Series::line(*label, pts));
    }
    plot
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulateReport {
    pub model: ModelKind,
    pub snapshots: usize,
    pub steps: usize,
    pub final_time: f64,
    pub max_relative_mass_drift: f64,
    pub final_min: f64,
    pub final_max: f64,
    pub final_peaks: usize,
    /// Distance to the nonlocal run when `model.compare` is set.
    pub comparison: Option<ErrorReport>,
    pub files: Vec<PathBuf>,
}

fn persist_trajectory(
    cfg: &RunConfig,
    traj: &Trajectory,
    out: &Path,
    prefix: &str,
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let summary = out.join(format!("{prefix}summary.csv"));
    write(&summary, &traj.summary_csv())?;
    files.push(summary);
    let snaps = out.join("snapshots");
    for (s, (t, rho)) in traj.times.iter().zip(&traj.rho).enumerate() {
        let mut named: Vec<(String, &PeriodicField)> = vec![(format!("{prefix}rho"), rho)];
        for (j, v) in traj.aux.get(s).into_iter().flatten().enumerate() {
            named.push((format!("{prefix}v{}", j + 1), v));
        }
        for (name, field) in &named {
            if cfg.output.wants(OutputFormat::Bin) {
                let path = snaps.join(format!("{name}_{s:05}.bin"));
                fs::create_dir_all(&snaps)?;
                let mut w = BufWriter::new(fs::File::create(&path)?);
                write_snapshot(&mut w, field, *t)?;
                w.flush()?;
                files.push(path);
            }
            if cfg.output.wants(OutputFormat::Csv) {
                let path = snaps.join(format!("{name}_{s:05}.csv"));
                write(&path, &field_to_csv(field))?;
                files.push(path);
            }
        }
    }
    if cfg.output.wants(OutputFormat::Svg) {
        let stride = cfg
            .output
            .plot_every
            .unwrap_or_else(|| traj.len().div_ceil(8).max(1));
        let last = traj.len() - 1;
        for s in (0..traj.len()).filter(|s| s % stride == 0 || *s == last) {
            let mut fields: Vec<(String, &PeriodicField)> = vec![("rho".into(), &traj.rho[s])];
            for (j, v) in traj.aux[s].iter().enumerate() {
                fields.push((format!("v{}", j + 1), v));
            }
            let refs: Vec<(&str, &PeriodicField)> =
                fields.iter().map(|(n, f)| (n.as_str(), *f)).collect();
            let path = out
                .join("plots")
                .join(format!("{prefix}profile_{s:05}.svg"));
            write(
                &path,
                &profile_plot(&format!("t = {:.4}", traj.times[s]), &refs).to_svg(),
            )?;
            files.push(path);
        }
    }
    Ok(files)
}

/// Runs the configured model and writes metadata, summary and snapshots under `out`.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<SimulateReport> {
    let sim = cfg.sim_config()?;
    let (traj, reference) = if cfg.model.kind == ModelKind::KellerSegel && cfg.model.compare {
        let (fp, ks) = paired_run(&cfg.fp_sim_config()?, &sim)?;
        (ks, Some(fp))
    } else {
        (solve(&sim)?, None)
    };
    fs::create_dir_all(out)?;
    let mut files = persist_trajectory(cfg, &traj, out, "")?;
    let comparison = match &reference {
        Some(fp) => {
            files.extend(persist_trajectory(cfg, fp, out, "fp_")?);
            let errors = error_norms(&traj, fp)?;
            let path = out.join("comparison.json");
            write_json(&path, &errors)?;
            files.push(path);
            if cfg.output.wants(OutputFormat::Svg) {
                let mut plot = profile_plot(
                    &format!("t = {:.4}", traj.times[traj.len() - 1]),
                    &[
                        ("Keller-Segel rho", traj.final_rho()),
                        ("nonlocal rho", fp.final_rho()),
                    ],
                );
                plot.series[1].style = Style::Dashed;
                let path = out.join("plots").join("final_overlay.svg");
                write(&path, &plot.to_svg())?;
                files.push(path);
            }
            Some(errors)
        }
        None => None,
    };
    let final_rho = traj.final_rho();
    let report = SimulateReport {
        model: cfg.model.kind,
        snapshots: traj.len(),
        steps: traj.steps.len(),
        final_time: *traj.times.last().expect("nonempty"),
        max_relative_mass_drift: traj.max_relative_mass_drift(),
        final_min: final_rho.min(),
        final_max: final_rho.max(),
        final_peaks: count_peaks(final_rho, PEAK_THRESHOLD),
        comparison,
        files: files
            .iter()
            .map(|f| f.strip_prefix(out).unwrap_or(f).to_path_buf())
            .collect(),
    };
    let ks = match &sim.model {
        Model::KellerSegel { params } => Some(params.clone()),
        Model::NonlocalFp { .. } => None,
    };
    let (steps, dt) = sim.step_plan();
    let meta = metadata(
        "simulate",
        cfg,
        json!({
            "macro_steps": steps,
            "dt": dt,
            "keller_segel": ks,
            "times": traj.times,
            "report": report,
        }),
    );
    write_json(&out.join("metadata.json"), &meta)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionRow {
    pub degree: usize,
    pub alphas: Vec<f64>,
    pub a: Vec<f64>,
    pub d: Vec<Diffusivity>,
    pub sup_error: f64,
    pub bound: ErrorBoundEstimate,
}

/// Expansion tables, error estimates and overlays for each configured degree.
pub fn cmd_expand(cfg: &RunConfig, out: &Path) -> Result<Vec<ExpansionRow>> {
    let kernel = cfg.kernel_spec()?;
    let l = kernel.half_length();
    let w = |x: f64| kernel.eval(x);
    let mut rows = Vec::new();
    fs::create_dir_all(out)?;
    let mut overlay = Plot::new("potential and cosh expansions", "x", "W(x)");
    let dense: Vec<f64> = (0..=800).map(|i| -l + 2.0 * l * i as f64 / 800.0).collect();
    overlay.push(Series::line(
        "W",
        dense.iter().map(|&x| (x, w(x))).collect(),
    ));
    for n in cfg.expansion_degrees() {
        let exp = cosh_expansion_of(&kernel, n)?;
        let ks = expansion_to_ks(
            &exp,
            cfg.model.eps.unwrap_or(1.0),
            cfg.model.mu,
            cfg.model.d1_mode,
        )?;
        let sup_error = expansion_error(w, &exp, cfg.expand.error_grid)?;
        let bound = interpolation_error_bound(w, n, l, cfg.expand.safety_factor)?;

        let mut alpha_csv = String::from("j,alpha\n");
        for (j, a) in exp.alphas.iter().enumerate() {
            alpha_csv.push_str(&format!("{j},{a}\n"));
        }
        write(&out.join(format!("alpha_n{n}.csv")), &alpha_csv)?;
        let mut ks_csv = String::from("j,a_j,d_j\n");
        for (j, (a, d)) in ks.a.iter().zip(&ks.d).enumerate() {
            let d = match d {
                Diffusivity::Finite(v) => v.to_string(),
                Diffusivity::Infinite => "inf".into(),
            };
            ks_csv.push_str(&format!("{},{a},{d}\n", j + 1));
        }
        write(&out.join(format!("ks_n{n}.csv")), &ks_csv)?;

        let mut alpha_plot = Plot::new(format!("expansion coefficients, n = {n}"), "j", "alpha_j");
        alpha_plot.push(
            Series::line(
                "alpha",
                exp.alphas
                    .iter()
                    .enumerate()
                    .map(|(j, a)| (j as f64, *a))
                    .collect(),
            )
            .with_style(Style::Stem),
        );
        write(&out.join(format!("alpha_n{n}.svg")), &alpha_plot.to_svg())?;
        overlay.push(
            Series::line(
                format!("n = {n}"),
                dense.iter().map(|&x| (x, exp.reconstruct(x))).collect(),
            )
            .with_style(Style::Dashed),
        );
        rows.push(ExpansionRow {
            degree: n,
            alphas: exp.alphas.clone(),
            a: ks.a,
            d: ks.d,
            sup_error,
            bound,
        });
    }
    write(&out.join("overlay.svg"), &overlay.to_svg())?;
    write_json(
        &out.join("metadata.json"),
        &metadata("expand", cfg, json!({ "expansions": rows })),
    )?;
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub curve: DispersionCurve,
    /// `None` when `omega_{n1} <= 0`.
    pub critical_mu: Option<f64>,
    pub n1: i64,
}

pub fn cmd_stability(cfg: &RunConfig, out: &Path) -> Result<StabilityReport> {
    let kernel = cfg.kernel_spec()?;
    let s = &cfg.stability;
    let curve = dispersion_curve(&kernel, cfg.model.mu, s.n_max, s.linearization())?;
    let critical_mu = match critical_mu(&kernel, s.n1) {
        Ok(v) => Some(v),
        Err(Error::NotDestabilizable { .. }) => None,
        Err(e) => return Err(e),
    };
    fs::create_dir_all(out)?;
    write(&out.join("dispersion.csv"), &curve.to_csv())?;
    let mut plot = Plot::new(
        format!("growth rates, mu = {}", cfg.model.mu),
        "n",
        "lambda(n)",
    );
    plot.push(
        Series::line(
            "lambda",
            curve
                .modes
                .iter()
                .zip(&curve.lambdas)
                .map(|(n, l)| (*n as f64, *l))
                .collect(),
        )
        .with_style(Style::Stem),
    );
    write(&out.join("dispersion.svg"), &plot.to_svg())?;
    let report = StabilityReport {
        curve,
        critical_mu,
        n1: s.n1,
    };
    write_json(
        &out.join("metadata.json"),
        &metadata(
            "stability",
            cfg,
            json!({
                "argmax": report.curve.argmax,
                "max_lambda": report.curve.max_lambda,
                "unstable": report.curve.unstable,
                "critical_mu": report.critical_mu,
                "n1": report.n1,
            }),
        ),
    )?;
    Ok(report)
}

/// Ladder of Keller-Segel runs against the nonlocal run of the same document.
pub fn cmd_converge(cfg: &RunConfig, out: &Path) -> Result<ConvergenceReport> {
    let base = cfg.fp_sim_config()?;
    let eps0 = cfg.converge.ladder.first().copied().unwrap_or(1.0);
    let params = cfg.ks_params_at(eps0)?;
    let report = convergence_study(&base, &params.a, &params.d, &cfg.converge.ladder)?;
    fs::create_dir_all(out)?;
    write(&out.join("converge.csv"), &report.to_csv())?;
    let mut plot = Plot::new(
        format!("slope {:.3}", report.slope()),
        "log10 eps",
        "log10 error",
    );
    plot.push(Series::line(
        "sup_t L2",
        report
            .rows
            .iter()
            .map(|r| (r.eps.log10(), r.sup_t_l2.log10()))
            .collect(),
    ));
    plot.push(
        Series::line(
            "L2_t H1",
            report
                .rows
                .iter()
                .map(|r| (r.eps.log10(), r.l2_t_h1.log10()))
                .collect(),
        )
        .with_style(Style::Dashed),
    );
    write(&out.join("converge.svg"), &plot.to_svg())?;
    write_json(
        &out.join("converge.json"),
        &json!({
            "slope": report.fit.slope,
            "intercept": report.fit.intercept,
            "residual": report.fit.residual,
            "errors_strictly_decrease": report.errors_strictly_decrease(),
            "aux_errors_decrease": report.aux_errors_decrease(),
        }),
    )?;
    write_json(
        &out.join("metadata.json"),
        &metadata("converge", cfg, json!({ "report": report })),
    )?;
    Ok(report)
}
