//! Experiment-grid configuration: a single JSON document describing the
//! problem axis, the solver axis, seeds, and run settings.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use saddlebench_core::core::{SaddleProblem, SolverConfig, SomOption};
use saddlebench_core::problems::{
    BenchmarkInstance, BilinearInstance, ProblemError, QuadraticInstance,
};

use crate::CliError;

fn default_workers() -> usize {
    0
}

fn default_grad_tol() -> f64 {
    1e-6
}

fn default_checkpoints() -> Vec<usize> {
    vec![10, 50, 100, 500, 1000]
}

/// Grid definition. `seeds` is the replication axis; each problem entry may
/// carry its own base seed which is added to the grid seed.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub problems: Vec<ProblemSpec>,
    pub solvers: Vec<SolverEntry>,
    /// Iteration cap T per run.
    pub max_iters: usize,
    /// Relative stopping threshold on `‖F(z_t)‖ / ‖F(z₁)‖`.
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub probes: ProbeSettings,
    /// Checkpoints for theorem-bound reports.
    #[serde(default = "default_checkpoints")]
    pub checkpoints: Vec<usize>,
    /// Worker threads for grid cells (0 = all cores).
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Record per-iteration invariant flags (forced on by verify).
    #[serde(default)]
    pub check_invariants: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ProbeSettings {
    pub count: usize,
    pub seed: u64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self { count: 64, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    /// Cubic-regularized benchmark on `z ∈ ℝ^d` (`d = 2n` even).
    Benchmark {
        d: usize,
        l2: f64,
        #[serde(default)]
        seed: u64,
    },
    Bilinear {
        n: usize,
        #[serde(default)]
        seed: u64,
    },
    Quadratic {
        m: usize,
        n: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn fmt_scale(v: f64) -> String {
    let s = format!("{v}");
    s.replace('.', "p").replace('-', "m")
}

impl ProblemSpec {
    pub fn id(&self) -> String {
        match self {
            ProblemSpec::Benchmark { d, l2, .. } => {
                format!("benchmark-d{d}-l2{}", fmt_scale(*l2))
            }
            ProblemSpec::Bilinear { n, .. } => format!("bilinear-n{n}"),
            ProblemSpec::Quadratic { m, n, .. } => format!("quadratic-m{m}-n{n}"),
        }
    }

    pub fn base_seed(&self) -> u64 {
        match self {
            ProblemSpec::Benchmark { seed, .. }
            | ProblemSpec::Bilinear { seed, .. }
            | ProblemSpec::Quadratic { seed, .. } => *seed,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            ProblemSpec::Benchmark { d, l2, .. } => {
                if *d < 2 || d % 2 != 0 {
                    return Err(CliError::Config(format!(
                        "benchmark dimension d must be even and >= 2, got {d}"
                    )));
                }
                if *l2 <= 0.0 || l2.is_nan() {
                    return Err(CliError::Config(format!(
                        "benchmark needs l2 > 0, got {l2}"
                    )));
                }
            }
            ProblemSpec::Bilinear { n, .. } => {
                if *n < 1 {
                    return Err(CliError::Config("bilinear needs n >= 1".into()));
                }
            }
            ProblemSpec::Quadratic { m, n, .. } => {
                if *m < 1 || *n < 1 {
                    return Err(CliError::Config("quadratic needs m, n >= 1".into()));
                }
            }
        }
        Ok(())
    }

    /// Builds the instance for an effective seed, returning the problem, its
    /// archival JSON, and the coupling operator norm (benchmark only, used
    /// for the effective-L₁ diagnostic).
    pub fn instantiate(
        &self,
        eff_seed: u64,
    ) -> Result<(SaddleProblem, String, Option<f64>), ProblemError> {
        match self {
            ProblemSpec::Benchmark { d, l2, .. } => {
                let inst = BenchmarkInstance::generate(d / 2, *l2, eff_seed);
                let opnorm = saddlebench_core::core::linalg::spectral_norm_power(inst.a(), 300);
                Ok((inst.to_problem()?, inst.to_json()?, Some(opnorm)))
            }
            ProblemSpec::Bilinear { n, .. } => {
                let inst = BilinearInstance::generate(*n, eff_seed);
                Ok((inst.to_problem(), inst.to_json()?, None))
            }
            ProblemSpec::Quadratic { m, n, .. } => {
                let inst = QuadraticInstance::generate(*m, *n, eff_seed);
                Ok((inst.to_problem()?, inst.to_json()?, None))
            }
        }
    }
}

/// λ selection for the adaptive options: an absolute value, or a multiple of
/// the instance's curvature scale (L₂ when positive, else L₁ when known,
/// else 1).
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum LambdaRule {
    Fixed(f64),
    Scaled(f64),
}

impl LambdaRule {
    pub fn resolve(&self, problem: &SaddleProblem) -> f64 {
        match self {
            LambdaRule::Fixed(v) => *v,
            LambdaRule::Scaled(c) => {
                let l2 = problem.lipschitz_hessian();
                let base = if l2 > 0.0 {
                    l2
                } else {
                    problem.lipschitz_gradient().unwrap_or(1.0)
                };
                c * base
            }
        }
    }
}

fn default_alpha() -> f64 {
    0.25
}

fn default_som1_lambda() -> LambdaRule {
    LambdaRule::Scaled(1.0)
}

fn default_som2_lambda() -> LambdaRule {
    LambdaRule::Scaled(0.1)
}

fn default_alpha_ls() -> f64 {
    0.5
}

fn default_beta() -> f64 {
    0.5
}

fn default_eta_init() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SolverEntry {
    pub name: String,
    #[serde(flatten)]
    pub kind: SolverKind,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum SolverKind {
    #[serde(rename = "adaptive_som_1")]
    AdaptiveSom1 {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_som1_lambda")]
        lambda: LambdaRule,
    },
    #[serde(rename = "adaptive_som_2")]
    AdaptiveSom2 {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_som2_lambda")]
        lambda: LambdaRule,
    },
    Extragradient {
        #[serde(default)]
        gamma: Option<f64>,
    },
    Ogda {
        #[serde(default)]
        gamma: Option<f64>,
    },
    LinesearchSom {
        #[serde(default = "default_alpha_ls")]
        alpha_ls: f64,
        #[serde(default = "default_beta")]
        beta: f64,
        #[serde(default = "default_eta_init")]
        eta_init: f64,
    },
}

impl SolverKind {
    /// Resolves the adaptive options into a core solver configuration.
    pub fn som_config(
        &self,
        problem: &SaddleProblem,
        max_iters: usize,
        grad_tol: f64,
        check_invariants: bool,
    ) -> Option<SolverConfig> {
        let (option, alpha, lambda) = match self {
            SolverKind::AdaptiveSom1 { alpha, lambda } => {
                (SomOption::OptionI, *alpha, lambda.resolve(problem))
            }
            SolverKind::AdaptiveSom2 { alpha, lambda } => {
                (SomOption::OptionII, *alpha, lambda.resolve(problem))
            }
            _ => return None,
        };
        Some(
            SolverConfig::new(option, alpha, lambda, max_iters)
                .with_grad_tol(grad_tol)
                .with_invariants(check_invariants),
        )
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.problems.is_empty() {
            return Err(CliError::Config("problem list is empty".into()));
        }
        if self.solvers.is_empty() {
            return Err(CliError::Config("solver list is empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(CliError::Config("seed list is empty".into()));
        }
        if self.max_iters == 0 {
            return Err(CliError::Config("max_iters must be >= 1".into()));
        }
        if self.probes.count < 8 {
            return Err(CliError::Config("probe count must be >= 8".into()));
        }
        for p in &self.problems {
            p.validate()?;
        }
        let mut names: Vec<&str> = self.solvers.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.solvers.len() {
            return Err(CliError::Config("solver names must be unique".into()));
        }
        for s in &self.solvers {
            if s.name.is_empty()
                || !s
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
            {
                return Err(CliError::Config(format!(
                    "solver name '{}' must be nonempty [A-Za-z0-9_-]",
                    s.name
                )));
            }
        }
        Ok(())
    }

    /// Canonical JSON used for the config hash and the index echo: the
    /// output directory is not part of the experiment's identity.
    pub fn canonical(&self) -> ExperimentConfig {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        c
    }

    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(&self.canonical()).expect("config serializes");
        format!("{:016x}", crate::io::fnv1a64(json.as_bytes()))
    }

    pub fn add_seed_offset(&mut self, offset: u64) {
        for s in &mut self.seeds {
            *s = s.wrapping_add(offset);
        }
    }

    /// The desk-scale default grid: four benchmark cells crossed with the
    /// two adaptive options, the line-search baseline, and extragradient.
    pub fn default_grid() -> Self {
        ExperimentConfig {
            problems: vec![
                ProblemSpec::Benchmark {
                    d: 20,
                    l2: 1.0,
                    seed: 0,
                },
                ProblemSpec::Benchmark {
                    d: 20,
                    l2: 100.0,
                    seed: 0,
                },
                ProblemSpec::Benchmark {
                    d: 100,
                    l2: 1.0,
                    seed: 0,
                },
                ProblemSpec::Benchmark {
                    d: 100,
                    l2: 100.0,
                    seed: 0,
                },
            ],
            solvers: vec![
                SolverEntry {
                    name: "adaptive-som-1".into(),
                    kind: SolverKind::AdaptiveSom1 {
                        alpha: 0.25,
                        lambda: LambdaRule::Scaled(1.0),
                    },
                },
                SolverEntry {
                    name: "adaptive-som-2".into(),
                    kind: SolverKind::AdaptiveSom2 {
                        alpha: 0.25,
                        lambda: LambdaRule::Scaled(0.1),
                    },
                },
                SolverEntry {
                    name: "som-linesearch".into(),
                    kind: SolverKind::LinesearchSom {
                        alpha_ls: 0.5,
                        beta: 0.5,
                        eta_init: 1.0,
                    },
                },
                SolverEntry {
                    name: "extragradient".into(),
                    kind: SolverKind::Extragradient { gamma: None },
                },
            ],
            max_iters: 2000,
            grad_tol: 1e-6,
            seeds: vec![0, 1, 2],
            output_dir: PathBuf::from("results"),
            probes: ProbeSettings::default(),
            checkpoints: default_checkpoints(),
            workers: 0,
            check_invariants: false,
        }
    }

    /// Loads a config from JSON text after applying `key=value` overrides
    /// (dotted paths into the document; values parsed as JSON, falling back
    /// to strings).
    pub fn from_json_with_overrides(json: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut value: serde_json::Value = serde_json::from_str(json)
            .map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
        for ov in overrides {
            apply_override(&mut value, ov)?;
        }
        let config: ExperimentConfig = serde_json::from_value(value)
            .map_err(|e| CliError::Config(format!("config shape error: {e}")))?;
        config.validate()?;
        Ok(config)
    }
}

fn apply_override(value: &mut serde_json::Value, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override '{spec}' is not key=value")))?;
    let parsed: serde_json::Value =
        serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut cursor = value;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        if let Ok(idx) = part.parse::<usize>() {
            let arr = cursor.as_array_mut().ok_or_else(|| {
                CliError::Config(format!(
                    "override '{path}': '{part}' is not an array index here"
                ))
            })?;
            if idx >= arr.len() {
                return Err(CliError::Config(format!(
                    "override '{path}': index {idx} out of range"
                )));
            }
            if last {
                arr[idx] = parsed;
                return Ok(());
            }
            cursor = &mut arr[idx];
        } else {
            let obj = cursor.as_object_mut().ok_or_else(|| {
                CliError::Config(format!("override '{path}': '{part}' is not an object here"))
            })?;
            if last {
                obj.insert(part.to_string(), parsed);
                return Ok(());
            }
            cursor = obj
                .entry(part.to_string())
                .or_insert(serde_json::Value::Object(Default::default()));
        }
    }
    Ok(())
}
