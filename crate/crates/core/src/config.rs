//! Experiment configuration files and run manifests.
//!
//! A config is a JSON document:
//!
//! ```json
//! {
//!   "system": { "a": [[-1.0]], "b": [[1.0]] },
//!   "systems": { "diag": { "a": [[1.0, 0.0], [0.0, -1.0]], "b": [[0.0, 1.0]] } },
//!   "data": {
//!     "toy-sin": { "u0": ["sin(x)"], "g": ["-sin(t)"] },
//!     "diag-decay": { "system": "diag", "u0": ["exp(-x)", "exp(-x)"], "g": ["exp(-t)"] }
//!   },
//!   "run": ["toy-sin"],
//!   "s_grid": [0.4, 0.5, 1.0],
//!   "levels": 4,
//!   "gamma": [1.0, 2.0, 4.0, 8.0],
//!   "seed": 7
//! }
//! ```
//!
//! Every other section (`solve`, `sweep`, `lifting`, `estimate`, `norms`,
//! `random_corpus`, `output`) has defaults. `random_corpus` appends
//! entries `random-000`, `random-001`, ... drawn from `seed`, all posed on
//! the transport toy registered as system `toy`.
//!
//! Expressions use the grammar of [`Expr::parse`] with `x` (or `t`) as the
//! variable.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::compat::{DataFn, DataTriple};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::harness::{random_toy_corpus, EstimateKind, SweepConfig};
use crate::solver::{SolveConfig, SolveMode};
use crate::system::{matrix_from_rows, ForcingSpec, SystemSpec};

/// The top-level system is registered under this name.
pub const DEFAULT_SYSTEM: &str = "default";
/// System used by `random_corpus` entries: `u_t + u_x = 0`, `u(0, t) = g`.
pub const RANDOM_SYSTEM: &str = "toy";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDesc {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    /// Higher time derivatives of `A` and `B` at `t = 0`, starting at order 1.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub a_dt: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub b_dt: Vec<Vec<Vec<f64>>>,
}

impl SystemDesc {
    pub fn build(&self) -> Result<SystemSpec> {
        let q = self.a.len();
        let a = matrix_from_rows(&self.a, q)?;
        let b = matrix_from_rows(&self.b, q)?;
        let mut at = vec![a.clone()];
        for m in &self.a_dt {
            at.push(matrix_from_rows(m, q)?);
        }
        let mut bt = vec![b.clone()];
        for m in &self.b_dt {
            bt.push(matrix_from_rows(m, q)?);
        }
        SystemSpec::with_taylor(a, b, at, bt)
    }

    pub fn toy() -> Self {
        SystemDesc {
            a: vec![vec![-1.0]],
            b: vec![vec![1.0]],
            a_dt: vec![],
            b_dt: vec![],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataDesc {
    /// Name of an entry in `systems`; the top-level system when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    pub u0: Vec<Expr>,
    pub g: Vec<Expr>,
    #[serde(default, skip_serializing_if = "ForcingSpec::is_zero")]
    pub f: ForcingSpec,
}

impl DataDesc {
    pub fn triple(&self) -> DataTriple {
        DataTriple {
            u0: DataFn::Closed(self.u0.clone()),
            g: DataFn::Closed(self.g.clone()),
            f: self.f.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveParams {
    pub nx: usize,
    pub nt: usize,
    pub x_extent: f64,
    pub t_extent: f64,
    pub duhamel_steps: usize,
    pub mode: SolveMode,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            nx: 256,
            nt: 256,
            x_extent: 2.0,
            t_extent: 2.0,
            duhamel_steps: 16,
            mode: SolveMode::ExactCharacteristics,
        }
    }
}

impl SolveParams {
    pub fn to_config(&self) -> SolveConfig {
        let mut c = SolveConfig::new(self.nx, self.nt, self.x_extent, self.t_extent);
        c.duhamel_steps = self.duhamel_steps;
        c.mode = self.mode;
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LiftParams {
    pub m: usize,
    pub lambda: f64,
    /// Norm index reported for `R_m g`.
    pub s: f64,
    /// Half-width and intervals of the sampled `g` window on the line.
    pub window: f64,
    pub points: usize,
    /// Synthesis: keep orders up to `k`, enforce up to `m`.
    pub k: usize,
    /// Also run the corner lift of `(u0, g)` at index `theta`.
    pub corner: bool,
    pub theta: f64,
}

impl Default for LiftParams {
    fn default() -> Self {
        LiftParams {
            m: 1,
            lambda: 2.0,
            s: 1.5,
            window: 8.0,
            points: 512,
            k: 1,
            corner: false,
            theta: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateParams {
    pub kind: EstimateKind,
    /// Derivative order for the weighted kind.
    pub s: usize,
}

impl Default for EstimateParams {
    fn default() -> Self {
        EstimateParams {
            kind: EstimateKind::Semigroup,
            s: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormParams {
    /// Half-line samples `[0, extent]` with `points` intervals.
    pub extent: f64,
    pub points: usize,
}

impl Default for NormParams {
    fn default() -> Self {
        NormParams {
            extent: 4.0,
            points: 1024,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputParams {
    pub dir: Option<PathBuf>,
    /// Also write fields as CSV next to the binary dump.
    pub field_csv: bool,
}

fn default_s_grid() -> Vec<f64> {
    crate::harness::STANDARD_S_GRID.to_vec()
}

fn default_levels() -> usize {
    4
}

fn default_gamma() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0]
}

fn default_s_max() -> f64 {
    3.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "SystemDesc::toy")]
    pub system: SystemDesc,
    #[serde(default)]
    pub systems: BTreeMap<String, SystemDesc>,
    pub data: BTreeMap<String, DataDesc>,
    /// Data entries to process, in order. All of them when empty.
    #[serde(default)]
    pub run: Vec<String>,
    #[serde(default = "default_s_grid")]
    pub s_grid: Vec<f64>,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_gamma")]
    pub gamma: Vec<f64>,
    #[serde(default = "default_s_max")]
    pub s_max: f64,
    #[serde(default)]
    pub solve: SolveParams,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub lifting: LiftParams,
    #[serde(default)]
    pub estimate: EstimateParams,
    #[serde(default)]
    pub norms: NormParams,
    #[serde(default)]
    pub output: OutputParams,
    #[serde(default)]
    pub random_corpus: Option<RandomCorpusParams>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomCorpusParams {
    pub count: usize,
    #[serde(default = "default_degree")]
    pub degree: usize,
}

fn default_degree() -> usize {
    5
}

/// A data entry with its system resolved.
#[derive(Clone, Debug)]
pub struct Case {
    pub name: String,
    pub system_name: String,
    pub spec: SystemSpec,
    pub data: DataTriple,
}

impl ExperimentConfig {
    /// Parses JSON text. Syntax and schema errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_with_seed(text, None)
    }

    /// As `from_json`, with `seed` replacing the configured seed before the
    /// random corpus is drawn.
    pub fn from_json_with_seed(text: &str, seed: Option<u64>) -> Result<Self> {
        let mut cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {} column {}: {e}", e.line(), e.column())))?;
        if let Some(s) = seed {
            cfg.seed = s;
        }
        if let Some(rc) = &cfg.random_corpus {
            match cfg.systems.get(RANDOM_SYSTEM) {
                Some(d) if *d != SystemDesc::toy() => {
                    return Err(Error::Config(format!(
                        "field `systems.{RANDOM_SYSTEM}`: must be the transport toy when `random_corpus` is set"
                    )))
                }
                _ => {
                    cfg.systems.insert(RANDOM_SYSTEM.to_string(), SystemDesc::toy());
                }
            }
            for (i, case) in random_toy_corpus(cfg.seed, rc.count, rc.degree).into_iter().enumerate() {
                let name = format!("random-{i:03}");
                if cfg.data.contains_key(&name) {
                    return Err(Error::Config(format!("field `data.{name}`: reserved for the random corpus")));
                }
                let (DataFn::Closed(u0), DataFn::Closed(g)) = (case.data.u0, case.data.g) else {
                    unreachable!("random corpus is closed-form")
                };
                cfg.data.insert(
                    name,
                    DataDesc {
                        system: Some(RANDOM_SYSTEM.to_string()),
                        u0,
                        g,
                        f: ForcingSpec::zero(),
                    },
                );
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, seed: Option<u64>) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg = Self::from_json_with_seed(&text, seed).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        Ok((cfg, text))
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.is_empty() {
            return Err(Error::Config("field `data`: at least one entry is required".into()));
        }
        if self.systems.contains_key(DEFAULT_SYSTEM) {
            return Err(Error::Config(format!("field `systems`: `{DEFAULT_SYSTEM}` is reserved")));
        }
        for (name, d) in &self.data {
            if let Some(s) = &d.system {
                if s != DEFAULT_SYSTEM && !self.systems.contains_key(s) {
                    return Err(Error::Config(format!("field `data.{name}.system`: unknown system `{s}`")));
                }
            }
        }
        for r in &self.run {
            if !self.data.contains_key(r) {
                return Err(Error::Config(format!("field `run`: unknown data entry `{r}`")));
            }
        }
        if self.levels < 1 {
            return Err(Error::Config("field `levels`: must be positive".into()));
        }
        if self.gamma.iter().any(|g| !(*g > 0.0)) {
            return Err(Error::Config("field `gamma`: entries must be positive".into()));
        }
        if self.s_grid.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::Config("field `s_grid`: entries must be nonnegative".into()));
        }
        Ok(())
    }

    fn system(&self, name: Option<&str>) -> Result<(String, SystemSpec)> {
        match name {
            None | Some(DEFAULT_SYSTEM) => {
                let spec = self
                    .system
                    .build()
                    .map_err(|e| Error::Config(format!("field `system`: {e}")))?;
                Ok((DEFAULT_SYSTEM.to_string(), spec))
            }
            Some(n) => {
                let desc = self
                    .systems
                    .get(n)
                    .ok_or_else(|| Error::Config(format!("unknown system `{n}`")))?;
                let spec = desc.build().map_err(|e| Error::Config(format!("field `systems.{n}`: {e}")))?;
                Ok((n.to_string(), spec))
            }
        }
    }

    /// The entries named in `run` (or all, sorted by name) with resolved
    /// systems and component counts checked.
    pub fn cases(&self) -> Result<Vec<Case>> {
        let names: Vec<&String> = if self.run.is_empty() {
            self.data.keys().collect()
        } else {
            self.run.iter().collect()
        };
        names
            .into_iter()
            .map(|n| {
                let d = self
                    .data
                    .get(n)
                    .ok_or_else(|| Error::Config(format!("field `run`: unknown data entry `{n}`")))?;
                let (system_name, spec) = self.system(d.system.as_deref())?;
                let data = d.triple();
                data.check(&spec).map_err(|e| Error::Config(format!("field `data.{n}`: {e}")))?;
                Ok(Case {
                    name: n.clone(),
                    system_name,
                    spec,
                    data,
                })
            })
            .collect()
    }
}

/// Hex SHA-256 of the raw config text.
pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub started: String,
    pub finished: String,
    pub tolerances: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config_text: &str, seed: u64) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_hash: config_hash(config_text),
            seed,
            started: chrono::Utc::now().to_rfc3339(),
            finished: String::new(),
            tolerances: tolerances(),
            outputs: vec![],
        }
    }

    pub fn finish(&mut self) {
        self.finished = chrono::Utc::now().to_rfc3339();
    }
}

/// Every tolerance the library applies, by name.
pub fn tolerances() -> BTreeMap<String, f64> {
    use crate::{compat, harness, lifting, system, verdict};
    [
        ("cc_exact_rel", compat::TOL_CC_EXACT),
        ("cc_sampled_h2_factor", compat::TOL_CC_SAMPLED),
        ("cluster", system::CLUSTER_TOL),
        ("characteristic", system::CHAR_TOL),
        ("lopatinskii_cond_max", system::LOPATINSKII_COND_MAX),
        ("verdict_finite_below", verdict::FINITE_BELOW),
        ("verdict_divergent_above", verdict::DIVERGENT_ABOVE),
        ("verdict_converged_rel", verdict::CONVERGED_REL),
        ("lift_window", lifting::LIFT_WINDOW_TOL),
        ("estimate_anomaly", harness::ANOMALY_TOL),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}
