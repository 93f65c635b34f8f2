use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::Linearization;
use crate::chebfit::{cosh_expansion_of, expansion_to_ks, D1Mode, KsParams};
use crate::error::{Error, Result};
use crate::kernels::{Diffusivity, KernelFamily, KernelSpec};
use crate::pde::PeriodicGrid;
use crate::solvers::{InitialDatum, Model, SimConfig, TimeStep};

/// A run document. Unknown keys are rejected at every level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub kernel: KernelFamily,
    pub model: ModelSection,
    #[serde(default = "default_init")]
    pub init: InitialDatum,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub stability: StabilitySection,
    #[serde(default)]
    pub expand: ExpandSection,
    #[serde(default)]
    pub converge: ConvergeSection,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(alias = "L")]
    pub half_length: f64,
    #[serde(alias = "N")]
    pub cells: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    NonlocalFp,
    KellerSegel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(rename = "type")]
    pub kind: ModelKind,
    pub mu: f64,
    #[serde(default)]
    pub eps: Option<f64>,
    /// Number of auxiliary fields; checked against `a` and `d` when given.
    #[serde(default, alias = "M")]
    pub components: Option<usize>,
    #[serde(default)]
    pub a: Option<Vec<f64>>,
    #[serde(default)]
    pub d: Option<Vec<Diffusivity>>,
    /// Expansion degree used when `a` and `d` are not given.
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default = "default_d1_mode")]
    pub d1_mode: D1Mode,
    /// Keller-Segel runs also solve the nonlocal equation with the same
    /// potential and report the distance.
    #[serde(default)]
    pub compare: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: TimeStep,
    #[serde(default = "default_save_every")]
    pub save_every: usize,
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection {
            t_end: 1.0,
            dt: default_dt(),
            save_every: default_save_every(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    /// Per-snapshot `x,value` tables.
    Csv,
    /// Per-snapshot binary fields.
    Bin,
    Svg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub directory: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
    /// Snapshot stride of the profile plots; by default about eight plots.
    #[serde(default)]
    pub plot_every: Option<usize>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: None,
            formats: default_formats(),
            plot_every: None,
        }
    }
}

impl OutputSection {
    pub fn wants(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySection {
    #[serde(default = "default_n_max")]
    pub n_max: i64,
    /// Mode whose threshold `mu_*` is reported.
    #[serde(default = "default_n1")]
    pub n1: i64,
    /// Keeps the `rho*` factor when set; otherwise `mu rho*` is replaced by `mu`.
    #[serde(default)]
    pub rho_star: Option<f64>,
}

impl Default for StabilitySection {
    fn default() -> Self {
        StabilitySection {
            n_max: default_n_max(),
            n1: default_n1(),
            rho_star: None,
        }
    }
}

impl StabilitySection {
    pub fn linearization(&self) -> Linearization {
        match self.rho_star {
            Some(rho_star) => Linearization::Literal { rho_star },
            None => Linearization::Replaced,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandSection {
    /// Degrees to expand at; empty means `model.degree`, or 9.
    #[serde(default)]
    pub degrees: Vec<usize>,
    #[serde(default = "default_safety")]
    pub safety_factor: f64,
    #[serde(default = "default_error_grid")]
    pub error_grid: usize,
}

impl Default for ExpandSection {
    fn default() -> Self {
        ExpandSection {
            degrees: Vec::new(),
            safety_factor: default_safety(),
            error_grid: default_error_grid(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSection {
    #[serde(default = "default_ladder")]
    pub ladder: Vec<f64>,
}

impl Default for ConvergeSection {
    fn default() -> Self {
        ConvergeSection {
            ladder: default_ladder(),
        }
    }
}

fn default_init() -> InitialDatum {
    InitialDatum::Constant { value: 1.0 }
}
fn default_d1_mode() -> D1Mode {
    D1Mode::ExactLimit
}
fn default_dt() -> TimeStep {
    TimeStep::Auto
}
fn default_save_every() -> usize {
    1
}
fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Bin]
}
fn default_n_max() -> i64 {
    64
}
fn default_n1() -> i64 {
    1
}
fn default_safety() -> f64 {
    4.0
}
fn default_error_grid() -> usize {
    4000
}
fn default_ladder() -> Vec<f64> {
    vec![1e-1, 3e-2, 1e-2, 3e-3]
}

impl RunConfig {
    /// Parses and validates a document; `origin` names it in diagnostics.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<PeriodicGrid> {
        PeriodicGrid::new(self.grid.half_length, self.grid.cells)
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        KernelSpec::new(self.kernel.clone(), self.grid.half_length)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        RunConfig {
            init: self.init.with_seed(seed),
            ..self.clone()
        }
    }

    /// Keller-Segel parameters at the configured `eps`. Weights come from
    /// `a`/`d`, else from an expansion of degree `model.degree`, else from the
    /// kernel's own Green's-function form.
    pub fn ks_params(&self) -> Result<KsParams> {
        let eps = self
            .model
            .eps
            .ok_or_else(|| Error::config("model.eps", "required for keller_segel"))?;
        self.ks_params_at(eps)
    }

    pub fn ks_params_at(&self, eps: f64) -> Result<KsParams> {
        let m = &self.model;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::config(
                "model.eps",
                format!("must be positive, got {eps}"),
            ));
        }
        let params = match (&m.a, &m.d) {
            (Some(a), Some(d)) => KsParams::new(a.clone(), d.clone(), eps, m.mu)?,
            (Some(_), None) => return Err(Error::config("model.d", "given `a` without `d`")),
            (None, Some(_)) => return Err(Error::config("model.a", "given `d` without `a`")),
            (None, None) => {
                let kernel = self.kernel_spec()?;
                match (m.degree, kernel.as_linear_sum()) {
                    (Some(n), _) => {
                        expansion_to_ks(&cosh_expansion_of(&kernel, n)?, eps, m.mu, m.d1_mode)?
                    }
                    (None, Some(terms)) => KsParams::from_linear_sum(&terms, eps, m.mu)?,
                    (None, None) => return Err(Error::config(
                        "model.degree",
                        "kernel is not a sum of Green's functions; give a degree or explicit a/d",
                    )),
                }
            }
        };
        if let Some(count) = m.components {
            if count != params.components() {
                return Err(Error::config(
                    "model.components",
                    format!(
                        "says {count} fields but the weights define {}",
                        params.components()
                    ),
                ));
            }
        }
        Ok(params)
    }

    /// The nonlocal run on this document's grid, datum and time settings.
    pub fn fp_sim_config(&self) -> Result<SimConfig> {
        let cfg = SimConfig {
            grid: self.grid()?,
            model: Model::NonlocalFp {
                kernel: self.kernel_spec()?,
                mu: self.model.mu,
            },
            init: self.init.clone(),
            t_end: self.time.t_end,
            dt: self.time.dt,
            save_every: self.time.save_every,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The run selected by `model.type`.
    pub fn sim_config(&self) -> Result<SimConfig> {
        let fp = self.fp_sim_config()?;
        match self.model.kind {
            ModelKind::NonlocalFp => Ok(fp),
            ModelKind::KellerSegel => {
                let cfg = fp.with_model(Model::KellerSegel {
                    params: self.ks_params()?,
                });
                cfg.validate()?;
                Ok(cfg)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if !(m.mu >= 0.0 && m.mu.is_finite()) {
            return Err(Error::config(
                "model.mu",
                format!("must be >= 0, got {}", m.mu),
            ));
        }
        if let Some(eps) = m.eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::config(
                    "model.eps",
                    format!("must be positive, got {eps}"),
                ));
            }
        }
        self.sim_config()?;
        if self.stability.n_max < 1 {
            return Err(Error::config("stability.n_max", "must be >= 1"));
        }
        if let Some(r) = self.stability.rho_star {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::config(
                    "stability.rho_star",
                    format!("must be positive, got {r}"),
                ));
            }
        }
        if !(self.expand.safety_factor >= 1.0) {
            return Err(Error::config("expand.safety_factor", "must be >= 1"));
        }
        if self.expand.error_grid < 1000 {
            return Err(Error::config(
                "expand.error_grid",
                "need at least 1000 points",
            ));
        }
        if self.output.plot_every == Some(0) {
            return Err(Error::config("output.plot_every", "must be >= 1"));
        }
        Ok(())
    }

    /// Degrees for the expansion command.
    pub fn expansion_degrees(&self) -> Vec<usize> {
        if !self.expand.degrees.is_empty() {
            self.expand.degrees.clone()
        } else {
            vec![self.model.degree.unwrap_or(9)]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[grid]
half_length = 1.0
cells = 64

[kernel]
family = "mexican_hat"
d1 = 0.1
d2 = 3.0

[model]
type = "keller_segel"
mu = 1.0
eps = 0.01

[init]
kind = "perturbed"
base = 1.0
amplitude = 1e-3
seed = 4

[time]
t_end = 0.1
dt = "auto"
save_every = 5
"#;

    #[test]
    fn parses_and_resolves_defaults() {
        let cfg = RunConfig::from_toml_str(BASE, "base").unwrap();
        assert_eq!(
            cfg.output.formats,
            vec![OutputFormat::Csv, OutputFormat::Bin]
        );
        assert_eq!(cfg.stability.n_max, 64);
        assert_eq!(cfg.model.d1_mode, D1Mode::ExactLimit);
        let p = cfg.ks_params().unwrap();
        assert_eq!(p.a, vec![1.0, -1.0]);
        assert_eq!(
            p.d,
            vec![Diffusivity::Finite(0.1), Diffusivity::Finite(3.0)]
        );
        // the echo parses back to the same document
        let again = RunConfig::from_toml_str(&cfg.to_toml_string(), "echo").unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn field_paths_in_errors() {
        let neg = BASE.replace("eps = 0.01", "eps = -0.01");
        match RunConfig::from_toml_str(&neg, "x") {
            Err(Error::Config { field, .. }) => assert_eq!(field, "model.eps"),
            other => panic!("{other:?}"),
        }
        let neg_mu = BASE.replace("mu = 1.0", "mu = -1.0");
        assert!(
            matches!(RunConfig::from_toml_str(&neg_mu, "x"), Err(Error::Config { field, .. }) if field == "model.mu")
        );
        let bad_dt = BASE.replace("dt = \"auto\"", "dt = -1.0");
        assert!(
            matches!(RunConfig::from_toml_str(&bad_dt, "x"), Err(Error::Config { field, .. }) if field == "time.dt")
        );
        let m = BASE.replace("eps = 0.01", "eps = 0.01\ncomponents = 3");
        assert!(
            matches!(RunConfig::from_toml_str(&m, "x"), Err(Error::Config { field, .. }) if field == "model.components")
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for (from, to) in [
            ("seed = 4", "seed = 4\ncolour = 1"),
            ("d2 = 3.0", "d2 = 3.0\nd3 = 1.0"),
            ("save_every = 5", "save_every = 5\n[extra]\nx = 1"),
        ] {
            let text = BASE.replace(from, to);
            match RunConfig::from_toml_str(&text, "doc.toml") {
                Err(Error::Parse { path, message }) => {
                    assert_eq!(path, std::path::Path::new("doc.toml"));
                    assert!(message.contains("unknown"), "{message}");
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn explicit_weights_and_aliases() {
        let text = BASE
            .replace("half_length = 1.0", "L = 1.0")
            .replace("cells = 64", "N = 64")
            .replace(
                "eps = 0.01",
                "eps = 0.01\na = [1.0, 0.5]\nd = [\"inf\", 2.0]",
            );
        let cfg = RunConfig::from_toml_str(&text, "x").unwrap();
        assert_eq!(cfg.grid.cells, 64);
        assert_eq!(cfg.ks_params().unwrap().d[0], Diffusivity::Infinite);
        let half = BASE.replace("eps = 0.01", "eps = 0.01\na = [1.0]");
        assert!(
            matches!(RunConfig::from_toml_str(&half, "x"), Err(Error::Config { field, .. }) if field == "model.d")
        );
    }

    #[test]
    fn attraction_kernel_needs_a_degree() {
        let text = BASE.replace(
            "family = \"mexican_hat\"\nd1 = 0.1\nd2 = 3.0",
            "family = \"attract\"\nr0 = 0.5",
        );
        assert!(
            matches!(RunConfig::from_toml_str(&text, "x"), Err(Error::Config { field, .. }) if field == "model.degree")
        );
        let with = text.replace("eps = 0.01", "eps = 0.01\ndegree = 6\nd1_mode = 1e6");
        let cfg = RunConfig::from_toml_str(&with, "x").unwrap();
        let p = cfg.ks_params().unwrap();
        assert_eq!(p.components(), 7);
        assert_eq!(p.d[0], Diffusivity::Finite(1e6));
    }

    #[test]
    fn seed_override() {
        let cfg = RunConfig::from_toml_str(BASE, "x").unwrap().with_seed(99);
        assert!(matches!(cfg.init, InitialDatum::Perturbed { seed: 99, .. }));
    }
}
