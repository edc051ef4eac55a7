//! Layered experiment configuration: a TOML file with `[problem]`, `[solver]`
//! and `[experiment]` tables, then `--key value` overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use geomopt_core::linalg::{parse_matrix, parse_vector};
use geomopt_core::solver::{SolverConfig, StepPolicy};
use geomopt_core::{EnsembleKind, Matrix};
use toml::Value;

use crate::error::{CliError, CliResult};

pub const SECTIONS: [(&str, &[&str]); 3] = [
    (
        "problem",
        &[
            "n",
            "d",
            "dims",
            "s",
            "ensemble",
            "ensembles",
            "rho",
            "eta_policy",
            "eta",
            "eta_multiplier",
            "noise",
            "normalized",
            "smooth_kind",
            "reg_kind",
            "matrix",
            "targets",
            "q",
            "linear",
            "features",
            "labels",
            "c_cap",
            "alpha",
            "eq_matrix",
            "eq_rhs",
            "ineq_matrix",
            "ineq_rhs",
        ],
    ),
    ("solver", &["max_iter", "gradmap_tol", "step", "record_every"]),
    (
        "experiment",
        &[
            "experiment",
            "trials",
            "seed",
            "out",
            "restriction",
            "n_samples",
            "size_cap",
        ],
    ),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    HoffmanScaling,
    Trajectory,
    Svm,
    Solve,
    Constants,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::HoffmanScaling,
        Experiment::Trajectory,
        Experiment::Svm,
        Experiment::Solve,
        Experiment::Constants,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::HoffmanScaling => "hoffman_scaling",
            Experiment::Trajectory => "trajectory",
            Experiment::Svm => "svm",
            Experiment::Solve => "solve",
            Experiment::Constants => "constants",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::bad("experiment", format!("unknown experiment `{s}`")))
    }
}

/// How the ℓ1 weight is chosen for synthetic instances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EtaPolicy {
    Fixed(f64),
    /// `multiplier · ‖∇f(β*)‖_∞` at the planted coefficients.
    DualCondition(f64),
}

/// Raw key/value store keyed by `(section, key)`.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    values: BTreeMap<(String, String), Value>,
    base_dir: Option<PathBuf>,
}

fn sections_with(key: &str) -> Vec<&'static str> {
    SECTIONS
        .iter()
        .filter(|(_, keys)| keys.contains(&key))
        .map(|(s, _)| *s)
        .collect()
}

fn parse_override_value(raw: &str) -> Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

impl RawConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let mut cfg = RawConfig::default();
        for (section, body) in table {
            let Some((_, keys)) = SECTIONS.iter().find(|(s, _)| *s == section) else {
                return Err(CliError::UnknownKey(section));
            };
            let Value::Table(body) = body else {
                return Err(CliError::bad(&section, "expected a table"));
            };
            for (key, value) in body {
                if !keys.contains(&key.as_str()) {
                    return Err(CliError::UnknownKey(format!("{section}.{key}")));
                }
                cfg.values.insert((section.clone(), key), value);
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Sets `key` (either `section.key` or a key unique to one section).
    pub fn set_override(&mut self, key: &str, raw: &str) -> CliResult<()> {
        let (section, name) = match key.split_once('.') {
            Some((section, name)) => {
                let ok = SECTIONS
                    .iter()
                    .any(|(s, keys)| *s == section && keys.contains(&name));
                if !ok {
                    return Err(CliError::UnknownKey(key.to_string()));
                }
                (section.to_string(), name.to_string())
            }
            None => match sections_with(key).as_slice() {
                [] => return Err(CliError::UnknownKey(key.to_string())),
                [one] => (one.to_string(), key.to_string()),
                many => {
                    return Err(CliError::AmbiguousKey {
                        key: key.to_string(),
                        sections: many.join(", "),
                    })
                }
            },
        };
        self.values.insert((section, name), parse_override_value(raw));
        Ok(())
    }

    /// Applies `--key value` pairs.
    pub fn apply_args(&mut self, args: &[String]) -> CliResult<()> {
        let mut it = args.iter();
        while let Some(flag) = it.next() {
            let Some(key) = flag.strip_prefix("--") else {
                return Err(CliError::Config(format!("expected `--key value`, got `{flag}`")));
            };
            let (key, value) = match key.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = it
                        .next()
                        .ok_or_else(|| CliError::bad(key, "missing value"))?;
                    (key.to_string(), v.clone())
                }
            };
            self.set_override(&key, &value)?;
        }
        Ok(())
    }

    fn lookup(&self, key: &str) -> Option<&Value> {
        let section = sections_with(key)[0];
        self.values.get(&(section.to_string(), key.to_string()))
    }

    pub fn has(&self, key: &str) -> bool {
        self.lookup(key).is_some()
    }

    pub fn f64(&self, key: &str) -> CliResult<Option<f64>> {
        self.lookup(key).map(|v| as_f64(key, v)).transpose()
    }

    pub fn usize(&self, key: &str) -> CliResult<Option<usize>> {
        self.lookup(key)
            .map(|v| match v {
                Value::Integer(i) if *i >= 0 => Ok(*i as usize),
                Value::String(s) => s.trim().parse().map_err(|_| CliError::bad(key, "expected a count")),
                _ => Err(CliError::bad(key, "expected a nonnegative integer")),
            })
            .transpose()
    }

    pub fn u64(&self, key: &str) -> CliResult<Option<u64>> {
        self.lookup(key)
            .map(|v| match v {
                Value::Integer(i) if *i >= 0 => Ok(*i as u64),
                Value::String(s) => s.trim().parse().map_err(|_| CliError::bad(key, "expected an unsigned integer")),
                _ => Err(CliError::bad(key, "expected an unsigned integer")),
            })
            .transpose()
    }

    pub fn bool(&self, key: &str) -> CliResult<Option<bool>> {
        self.lookup(key)
            .map(|v| match v {
                Value::Boolean(b) => Ok(*b),
                Value::String(s) => s.parse().map_err(|_| CliError::bad(key, "expected true or false")),
                _ => Err(CliError::bad(key, "expected true or false")),
            })
            .transpose()
    }

    pub fn string(&self, key: &str) -> CliResult<Option<String>> {
        self.lookup(key)
            .map(|v| match v {
                Value::String(s) => Ok(s.clone()),
                _ => Err(CliError::bad(key, "expected a string")),
            })
            .transpose()
    }

    /// A TOML array or a comma separated string.
    pub fn list(&self, key: &str) -> CliResult<Option<Vec<Value>>> {
        self.lookup(key)
            .map(|v| match v {
                Value::Array(a) => Ok(a.clone()),
                Value::String(s) => Ok(s
                    .split(',')
                    .map(str::trim)
                    .filter(|p| !p.is_empty())
                    .map(parse_override_value)
                    .collect()),
                other => Ok(vec![other.clone()]),
            })
            .transpose()
    }

    fn resolve(&self, file: &str) -> PathBuf {
        let p = PathBuf::from(file);
        match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p,
        }
    }

    fn read(&self, key: &str, file: &str) -> CliResult<String> {
        let path = self.resolve(file);
        std::fs::read_to_string(&path)
            .map_err(|e| CliError::bad(key, format!("{}: {e}", path.display())))
    }

    /// Inline array of rows, or a path to a matrix text file.
    pub fn matrix(&self, key: &str) -> CliResult<Option<Matrix>> {
        let Some(v) = self.lookup(key) else {
            return Ok(None);
        };
        match v {
            Value::String(file) => {
                let text = self.read(key, file)?;
                Ok(Some(parse_matrix(&text)?))
            }
            Value::Array(rows) => {
                let rows: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|r| match r {
                        Value::Array(r) => r.iter().map(|x| as_f64(key, x)).collect(),
                        _ => Err(CliError::bad(key, "expected an array of rows")),
                    })
                    .collect::<CliResult<_>>()?;
                Ok(Some(Matrix::from_rows(&rows)?))
            }
            _ => Err(CliError::bad(key, "expected a file name or an array of rows")),
        }
    }

    /// Inline array, or a path to a vector text file.
    pub fn vector(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        let Some(v) = self.lookup(key) else {
            return Ok(None);
        };
        match v {
            Value::String(file) => {
                let text = self.read(key, file)?;
                Ok(Some(parse_vector(&text)?))
            }
            Value::Array(a) => Ok(Some(a.iter().map(|x| as_f64(key, x)).collect::<CliResult<_>>()?)),
            _ => Err(CliError::bad(key, "expected a file name or an array")),
        }
    }
}

fn as_f64(key: &str, v: &Value) -> CliResult<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        Value::String(s) => s.trim().parse().map_err(|_| CliError::bad(key, format!("`{s}` is not a number"))),
        _ => Err(CliError::bad(key, "expected a number")),
    }
}

fn parse_eta_policy(raw: &RawConfig) -> CliResult<EtaPolicy> {
    let policy = raw.string("eta_policy")?;
    let eta = raw.f64("eta")?;
    let mult = raw.f64("eta_multiplier")?;
    let (kind, inline) = match &policy {
        Some(p) => match p.split_once('(') {
            Some((k, rest)) => {
                let v = rest
                    .strip_suffix(')')
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .ok_or_else(|| CliError::bad("eta_policy", format!("cannot parse `{p}`")))?;
                (k.trim().to_string(), Some(v))
            }
            None => (p.trim().to_string(), None),
        },
        None if eta.is_some() => ("fixed".to_string(), None),
        None => ("dual_condition".to_string(), None),
    };
    match kind.as_str() {
        "fixed" => {
            let v = inline
                .or(eta)
                .ok_or_else(|| CliError::bad("eta", "fixed eta policy needs a value"))?;
            if !(v > 0.0) {
                return Err(CliError::bad("eta", "must be positive"));
            }
            Ok(EtaPolicy::Fixed(v))
        }
        "dual_condition" => {
            let m = inline.or(mult).unwrap_or(2.5);
            if !(m >= 2.0) {
                return Err(CliError::bad("eta_multiplier", "must be at least 2"));
            }
            Ok(EtaPolicy::DualCondition(m))
        }
        other => Err(CliError::bad("eta_policy", format!("unknown policy `{other}`"))),
    }
}

fn parse_ensemble(key: &str, v: &Value) -> CliResult<EnsembleKind> {
    match v {
        Value::String(s) => s.parse().map_err(|e: geomopt_core::Error| CliError::bad(key, e.to_string())),
        _ => Err(CliError::bad(key, "expected an ensemble name")),
    }
}

/// Resolved configuration with per-experiment defaults filled in.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub d: usize,
    pub dims: Vec<usize>,
    pub s: usize,
    pub ensembles: Vec<EnsembleKind>,
    pub rho: f64,
    pub eta_policy: EtaPolicy,
    pub noise: f64,
    pub normalized: bool,
    pub c_cap: f64,
    pub trials: usize,
    pub seed: u64,
    pub solver: SolverConfig<f64>,
    pub out: PathBuf,
    pub restrictions: Vec<String>,
    pub n_samples: usize,
    pub size_cap: usize,
    pub raw: RawConfig,
}

impl ExperimentConfig {
    pub fn resolve(experiment: Option<Experiment>, raw: RawConfig) -> CliResult<Self> {
        let experiment = match (experiment, raw.string("experiment")?) {
            (Some(e), _) => e,
            (None, Some(name)) => name.parse()?,
            (None, None) => return Err(CliError::bad("experiment", "no experiment given")),
        };
        let (n_def, d_def, s_def, trials_def) = match experiment {
            Experiment::HoffmanScaling => (50, 100, 5, 10),
            Experiment::Svm => (40, 2, 1, 1),
            _ => (100, 200, 5, 1),
        };
        let n = raw.usize("n")?.unwrap_or(n_def);
        let d = raw.usize("d")?.unwrap_or(d_def);
        let dims = match raw.list("dims")? {
            Some(list) => list
                .iter()
                .map(|v| match v {
                    Value::Integer(i) if *i > 0 => Ok(*i as usize),
                    _ => Err(CliError::bad("dims", "expected positive integers")),
                })
                .collect::<CliResult<Vec<_>>>()?,
            None if experiment == Experiment::HoffmanScaling && !raw.has("d") => vec![100, 200, 400, 800],
            None => vec![d],
        };
        let s = raw.usize("s")?.unwrap_or(s_def);
        let mut ensembles = match raw.list("ensembles")? {
            Some(list) => list
                .iter()
                .map(|v| parse_ensemble("ensembles", v))
                .collect::<CliResult<Vec<_>>>()?,
            None => Vec::new(),
        };
        if let Some(e) = raw.string("ensemble")? {
            if ensembles.is_empty() {
                ensembles.push(parse_ensemble("ensemble", &Value::String(e))?);
            }
        }
        if ensembles.is_empty() {
            ensembles.push(EnsembleKind::Gaussian);
        }
        let rho = raw.f64("rho")?.unwrap_or(0.8);
        let noise = raw.f64("noise")?.unwrap_or(0.1);
        let defaults = SolverConfig::<f64>::default();
        let step_policy = match raw.f64("step")? {
            Some(s) => StepPolicy::Fixed(s),
            None => StepPolicy::GlobalL,
        };
        let solver = SolverConfig {
            step_policy,
            max_iter: raw.usize("max_iter")?.unwrap_or(defaults.max_iter),
            gradmap_tol: raw.f64("gradmap_tol")?.unwrap_or(defaults.gradmap_tol),
            record_every: raw.usize("record_every")?.unwrap_or(1),
        };
        solver
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let restrictions = match raw.list("restriction")? {
            Some(list) => list
                .iter()
                .map(|v| match v {
                    Value::String(s) if s == "global" || s == "support" => Ok(s.clone()),
                    _ => Err(CliError::bad("restriction", "expected `global` or `support`")),
                })
                .collect::<CliResult<Vec<_>>>()?,
            None => vec!["global".into(), "support".into()],
        };
        let cfg = ExperimentConfig {
            experiment,
            n,
            d,
            dims,
            s,
            ensembles,
            rho,
            eta_policy: parse_eta_policy(&raw)?,
            noise,
            normalized: raw.bool("normalized")?.unwrap_or(false),
            c_cap: raw.f64("c_cap")?.unwrap_or(1.0),
            trials: raw.usize("trials")?.unwrap_or(trials_def),
            seed: raw.u64("seed")?.unwrap_or(0),
            solver,
            out: PathBuf::from(
                raw.string("out")?
                    .unwrap_or_else(|| format!("{}.csv", experiment.name())),
            ),
            restrictions,
            n_samples: raw.usize("n_samples")?.unwrap_or(2000),
            size_cap: raw.usize("size_cap")?.unwrap_or(18),
            raw,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        if self.trials == 0 {
            return Err(CliError::bad("trials", "must be at least 1"));
        }
        if self.n == 0 || self.dims.is_empty() {
            return Err(CliError::bad("n", "dimensions must be positive"));
        }
        let min_dim = self.dims.iter().copied().min().unwrap_or(0);
        if self.experiment != Experiment::Svm && self.s > self.n.min(min_dim) {
            return Err(CliError::bad("s", format!("must not exceed min(n, d) = {}", self.n.min(min_dim))));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(CliError::bad("rho", "must lie in [0, 1)"));
        }
        if !(self.noise >= 0.0) {
            return Err(CliError::bad("noise", "must be nonnegative"));
        }
        if !(self.c_cap > 0.0) {
            return Err(CliError::bad("c_cap", "must be positive"));
        }
        Ok(())
    }

    /// The single ambient dimension for one-instance experiments.
    pub fn dim(&self) -> usize {
        self.dims[0]
    }
}
