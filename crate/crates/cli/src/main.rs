use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ksfp::cli_io::{
    cmd_converge, cmd_expand, cmd_simulate, cmd_stability, preset, run_validation, RunConfig,
    ValidateOptions,
};
use ksfp::Error;

#[derive(Parser)]
#[command(
    name = "ksfp",
    version,
    about = "Nonlocal Fokker-Planck and Keller-Segel simulations on a periodic interval"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Suppress the summary printed on success.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Args)]
struct Source {
    /// Run document (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Bundled figure recipe: fig1 .. fig6.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for perturbed initial data; overrides `init.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured model and persist the trajectory.
    Simulate(Source),
    /// Cosh expansion tables, error estimates and overlays.
    Expand(Source),
    /// Growth rates of the constant state.
    Stability(Source),
    /// Keller-Segel runs over an eps ladder against the nonlocal run.
    Converge(Source),
    /// Built-in oracle checks.
    Validate {
        #[arg(long, hide = true)]
        corrupt_delta: bool,
    },
}

impl Source {
    fn load(&self) -> Result<(RunConfig, PathBuf), Error> {
        let cfg = match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(name)) => preset(name)?,
            (None, None) => unreachable!("clap requires one source"),
        };
        let cfg = match self.seed {
            Some(seed) => cfg.with_seed(seed),
            None => cfg,
        };
        let out = self
            .out
            .clone()
            .or_else(|| cfg.output.directory.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok((cfg, out))
    }
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let say = |line: String| {
        if !cli.quiet {
            println!("{line}");
        }
    };
    match &cli.command {
        Command::Simulate(src) => {
            let (cfg, out) = src.load()?;
            let r = cmd_simulate(&cfg, &out)?;
            say(format!(
                "simulated to t = {} in {} steps, {} snapshots",
                r.final_time, r.steps, r.snapshots
            ));
            say(format!(
                "mass drift {:.2e}, final range [{:.6}, {:.6}], {} peaks",
                r.max_relative_mass_drift, r.final_min, r.final_max, r.final_peaks
            ));
            if let Some(c) = &r.comparison {
                say(format!(
                    "distance to nonlocal run: sup_t L2 {:.3e}, L2_t H1 {:.3e}",
                    c.sup_t_l2, c.l2_t_h1
                ));
            }
            say(format!("wrote {}", out.display()));
        }
        Command::Expand(src) => {
            let (cfg, out) = src.load()?;
            for row in cmd_expand(&cfg, &out)? {
                say(format!(
                    "n = {:2}: sup error {:.3e}, bound {:.3e}",
                    row.degree, row.sup_error, row.bound.bound
                ));
                let alphas: Vec<String> = row.alphas.iter().map(|a| format!("{a:.6e}")).collect();
                say(format!("  alpha = [{}]", alphas.join(", ")));
            }
            say(format!("wrote {}", out.display()));
        }
        Command::Stability(src) => {
            let (cfg, out) = src.load()?;
            let r = cmd_stability(&cfg, &out)?;
            say(format!(
                "argmax n = {}, lambda = {:.6}",
                r.curve.argmax, r.curve.max_lambda
            ));
            say(format!("unstable modes: {:?}", r.curve.unstable));
            match r.critical_mu {
                Some(mu) => say(format!("critical mu for n = {}: {mu:.6}", r.n1)),
                None => say(format!("mode {} cannot be destabilized", r.n1)),
            }
            say(format!("wrote {}", out.display()));
        }
        Command::Converge(src) => {
            let (cfg, out) = src.load()?;
            let r = cmd_converge(&cfg, &out)?;
            for row in &r.rows {
                say(format!(
                    "eps {:.1e}: sup_t L2 {:.3e}, L2_t H1 {:.3e}",
                    row.eps, row.sup_t_l2, row.l2_t_h1
                ));
            }
            say(format!("slope {:.4}", r.slope()));
            say(format!("wrote {}", out.display()));
        }
        Command::Validate { corrupt_delta } => {
            let r = run_validation(ValidateOptions {
                corrupt_delta: *corrupt_delta,
            })?;
            for c in &r.checks {
                // failures are reported even with --quiet
                if !c.passed || !cli.quiet {
                    println!("{}", c.line());
                }
            }
            return Ok(r.passed());
        }
    }
    Ok(true)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. }
        | Error::Parse { .. }
        | Error::NotEven(_)
        | Error::InvalidLadder(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
