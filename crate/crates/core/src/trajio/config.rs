//! Run and sweep configurations.
//!
//! ```json
//! {
//!   "problem": "biquadratic",
//!   "params": {"m": 1, "gamma": 1, "h": 0.01, "t0": 0},
//!   "initial": {"u0": [3, 2], "v0": {"lambda": 1}},
//!   "stop": {"max_steps": 1000000, "crit_tol": 1e-6, "vel_tol": 1e-6},
//!   "scheme": "imog",
//!   "seed": 0,
//!   "outputs": {"csv": "trajectory.csv", "report": "report.json", "plot": "trajectory.gp"}
//! }
//! ```
//!
//! Only `problem` and `initial.u0` are required. A sweep wraps a run
//! configuration as its `template`:
//!
//! ```json
//! {"template": {...}, "n_runs": 100, "box": {"min": [-4, -4], "max": [4, 4]},
//!  "velocity": "zero", "parallelism": 4}
//! ```
//!
//! Validation collects every violation before failing.

use std::path::{Component as PathComponent, Path, PathBuf};

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::{Map, Value};

use super::plot::PlotKind;
use super::{ConfigIssue, TrajioError};
use crate::dynamics::{DynParams, Scheme, StopRule};
use crate::objectives::{builtin_problem, load_problem_file, ObjectiveError, VectorObjective};

#[derive(Debug, Clone, PartialEq)]
pub enum VelocitySpec {
    Zero,
    Explicit(Vec<f64>),
    /// `v0 = λ s(u0)`.
    Lambda(f64),
}

impl Serialize for VelocitySpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            VelocitySpec::Zero => s.serialize_str("zero"),
            VelocitySpec::Explicit(v) => v.serialize(s),
            VelocitySpec::Lambda(l) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("lambda", l)?;
                m.end()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialSpec {
    /// Absent only in sweep templates, where starts are sampled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u0: Option<Vec<f64>>,
    pub v0: VelocitySpec,
}

/// Output file names, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outputs {
    pub csv: PathBuf,
    pub report: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot_kind: Option<PlotKind>,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            csv: "trajectory.csv".into(),
            report: "report.json".into(),
            plot: None,
            plot_kind: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Builtin problem name or path to a problem file.
    pub problem: String,
    /// Directory that relative problem paths resolve against.
    pub base_dir: Option<PathBuf>,
    pub params: DynParams,
    pub initial: InitialSpec,
    pub stop: StopRule,
    pub scheme: Scheme,
    pub seed: u64,
    pub outputs: Outputs,
}

impl RunConfig {
    /// The configuration in file form; `parse_run_config` reads it back.
    pub fn to_value(&self) -> Value {
        let mut v = serde_json::json!({
            "problem": self.problem,
            "params": {
                "m": self.params.mass,
                "gamma": self.params.damping,
                "h": self.params.step,
                "t0": self.params.t0,
            },
            "initial": &self.initial,
            "stop": self.stop,
            "scheme": self.scheme,
            "seed": self.seed,
            "outputs": &self.outputs,
        });
        if self.initial.u0.is_none() {
            v["initial"].as_object_mut().map(|m| m.remove("u0"));
        }
        v
    }

    pub fn load_problem(&self) -> Result<VectorObjective, ObjectiveError> {
        match builtin_problem(&self.problem) {
            Err(ObjectiveError::NotFound(_)) => {
                let path = Path::new(&self.problem);
                let path = match &self.base_dir {
                    Some(base) if path.is_relative() => base.join(path),
                    _ => path.to_path_buf(),
                };
                if path.exists() {
                    load_problem_file(&path)
                } else {
                    Err(ObjectiveError::NotFound(self.problem.clone()))
                }
            }
            other => other,
        }
    }
}

/// Per-coordinate sampling bounds for sweep starts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl SampleBox {
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self {
            min: vec![lo; dim],
            max: vec![hi; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub template: RunConfig,
    pub n_runs: usize,
    /// Defaults to `[-4, 4]^d` once the problem dimension is known.
    pub sample_box: Option<SampleBox>,
    /// Overrides the template's `initial.v0` when present.
    pub velocity: Option<VelocitySpec>,
    pub parallelism: usize,
}

struct Checker {
    issues: Vec<ConfigIssue>,
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

impl Checker {
    fn issue(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            path: path.into(),
            message: message.into(),
        });
    }

    fn object<'a>(
        &mut self,
        v: &'a Value,
        path: &str,
        allowed: &[&str],
    ) -> Option<&'a Map<String, Value>> {
        let Some(map) = v.as_object() else {
            self.issue(
                if path.is_empty() { "<root>" } else { path },
                "expected an object",
            );
            return None;
        };
        for key in map.keys() {
            if !allowed.contains(&key.as_str()) {
                self.issue(join(path, key), "unknown key");
            }
        }
        Some(map)
    }

    fn number(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.issue(path, "expected a finite number");
                None
            }
        }
    }

    fn positive(&mut self, v: &Value, path: &str) -> Option<f64> {
        let x = self.number(v, path)?;
        if x > 0.0 {
            Some(x)
        } else {
            self.issue(path, format!("must be positive, got {x}"));
            None
        }
    }

    fn nonnegative(&mut self, v: &Value, path: &str) -> Option<f64> {
        let x = self.number(v, path)?;
        if x >= 0.0 {
            Some(x)
        } else {
            self.issue(path, format!("must be nonnegative, got {x}"));
            None
        }
    }

    fn count(&mut self, v: &Value, path: &str, min: u64) -> Option<u64> {
        match v.as_u64() {
            Some(n) if n >= min => Some(n),
            _ => {
                self.issue(path, format!("expected an integer >= {min}"));
                None
            }
        }
    }

    fn vector(&mut self, v: &Value, path: &str) -> Option<Vec<f64>> {
        let Some(items) = v.as_array() else {
            self.issue(path, "expected a list of numbers");
            return None;
        };
        if items.is_empty() {
            self.issue(path, "must not be empty");
            return None;
        }
        let mut out = Vec::with_capacity(items.len());
        let mut ok = true;
        for (k, x) in items.iter().enumerate() {
            match self.number(x, &format!("{path}[{k}]")) {
                Some(x) => out.push(x),
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn string<'a>(&mut self, v: &'a Value, path: &str) -> Option<&'a str> {
        let s = v.as_str();
        if s.is_none() {
            self.issue(path, "expected a string");
        }
        s
    }

    fn relative_path(&mut self, v: &Value, path: &str) -> Option<PathBuf> {
        let s = self.string(v, path)?;
        let p = PathBuf::from(s);
        let escapes = p
            .components()
            .any(|c| !matches!(c, PathComponent::Normal(_) | PathComponent::CurDir));
        if s.is_empty() || escapes {
            self.issue(path, "must be a relative path inside the output directory");
            return None;
        }
        Some(p)
    }

    fn lambda(&mut self, v: &Value, path: &str, gamma: Option<f64>) -> Option<f64> {
        let map = self.object(v, path, &["lambda"])?;
        let lpath = join(path, "lambda");
        let Some(raw) = map.get("lambda") else {
            self.issue(lpath, "missing");
            return None;
        };
        let lambda = self.number(raw, &lpath)?;
        let gamma = gamma?;
        let hi = 1.0 / gamma;
        if !(0.0..=hi).contains(&lambda) {
            self.issue(
                lpath,
                format!(
                    "lambda = {lambda} is outside the admissible interval [0, {hi}] = [0, 1/gamma]"
                ),
            );
            return None;
        }
        Some(lambda)
    }

    fn velocity(&mut self, v: &Value, path: &str, gamma: Option<f64>) -> Option<VelocitySpec> {
        match v {
            Value::String(s) if s == "zero" => Some(VelocitySpec::Zero),
            Value::Array(_) => self.vector(v, path).map(VelocitySpec::Explicit),
            Value::Object(_) => self.lambda(v, path, gamma).map(VelocitySpec::Lambda),
            _ => {
                self.issue(
                    path,
                    "expected a list of numbers, {\"lambda\": number} or \"zero\"",
                );
                None
            }
        }
    }

    fn run(&mut self, v: &Value, prefix: &str, require_u0: bool) -> Option<RunConfig> {
        let root = self.object(
            v,
            prefix,
            &[
                "problem", "params", "initial", "stop", "scheme", "seed", "outputs",
            ],
        )?;
        let before = self.issues.len();
        let at = |key: &str| join(prefix, key);

        let problem = match root.get("problem") {
            Some(p) => self.string(p, &at("problem")).map(str::to_string),
            None => {
                self.issue(at("problem"), "missing");
                None
            }
        };

        let mut params = DynParams {
            mass: 1.0,
            damping: 1.0,
            step: 0.01,
            t0: 0.0,
        };
        let mut gamma_ok = true;
        if let Some(pv) = root.get("params") {
            let pp = at("params");
            if let Some(m) = self.object(pv, &pp, &["m", "gamma", "h", "t0"]) {
                if let Some(x) = m.get("m") {
                    params.mass = self.positive(x, &join(&pp, "m")).unwrap_or(params.mass);
                }
                if let Some(x) = m.get("gamma") {
                    match self.positive(x, &join(&pp, "gamma")) {
                        Some(g) => params.damping = g,
                        None => gamma_ok = false,
                    }
                }
                if let Some(x) = m.get("h") {
                    params.step = self.positive(x, &join(&pp, "h")).unwrap_or(params.step);
                }
                if let Some(x) = m.get("t0") {
                    params.t0 = self.number(x, &join(&pp, "t0")).unwrap_or(params.t0);
                }
            }
        }
        let gamma = gamma_ok.then_some(params.damping);

        let mut initial = InitialSpec {
            u0: None,
            v0: VelocitySpec::Zero,
        };
        let ip = at("initial");
        match root.get("initial") {
            Some(iv) => {
                if let Some(m) = self.object(iv, &ip, &["u0", "v0"]) {
                    match m.get("u0") {
                        Some(u) => initial.u0 = self.vector(u, &join(&ip, "u0")),
                        None if require_u0 => self.issue(join(&ip, "u0"), "missing"),
                        None => {}
                    }
                    if let Some(v) = m.get("v0") {
                        let vp = join(&ip, "v0");
                        if let Some(spec) = self.velocity(v, &vp, gamma) {
                            if let (VelocitySpec::Explicit(v0), Some(u0)) = (&spec, &initial.u0) {
                                if v0.len() != u0.len() {
                                    self.issue(
                                        vp,
                                        format!("has {} entries but u0 has {}", v0.len(), u0.len()),
                                    );
                                }
                            }
                            initial.v0 = spec;
                        }
                    }
                }
            }
            None if require_u0 => self.issue(join(&ip, "u0"), "missing"),
            None => {}
        }

        let mut stop = StopRule::default();
        if let Some(sv) = root.get("stop") {
            let sp = at("stop");
            if let Some(m) = self.object(sv, &sp, &["max_steps", "crit_tol", "vel_tol"]) {
                if let Some(x) = m.get("max_steps") {
                    if let Some(n) = self.count(x, &join(&sp, "max_steps"), 1) {
                        stop.max_steps = n as usize;
                    }
                }
                if let Some(x) = m.get("crit_tol") {
                    stop.crit_tol = self
                        .positive(x, &join(&sp, "crit_tol"))
                        .unwrap_or(stop.crit_tol);
                }
                if let Some(x) = m.get("vel_tol") {
                    stop.vel_tol = self
                        .nonnegative(x, &join(&sp, "vel_tol"))
                        .unwrap_or(stop.vel_tol);
                }
            }
        }

        let mut scheme = Scheme::Imog;
        if let Some(x) = root.get("scheme") {
            match x.as_str() {
                Some("imog") => scheme = Scheme::Imog,
                Some("mog") => scheme = Scheme::Mog,
                _ => self.issue(at("scheme"), "expected \"imog\" or \"mog\""),
            }
        }

        let mut seed = 0;
        if let Some(x) = root.get("seed") {
            seed = self.count(x, &at("seed"), 0).unwrap_or(0);
        }

        let mut outputs = Outputs::default();
        if let Some(ov) = root.get("outputs") {
            let op = at("outputs");
            if let Some(m) = self.object(ov, &op, &["csv", "report", "plot", "plot_kind"]) {
                if let Some(x) = m.get("csv") {
                    outputs.csv = self
                        .relative_path(x, &join(&op, "csv"))
                        .unwrap_or(outputs.csv);
                }
                if let Some(x) = m.get("report") {
                    outputs.report = self
                        .relative_path(x, &join(&op, "report"))
                        .unwrap_or(outputs.report);
                }
                if let Some(x) = m.get("plot") {
                    outputs.plot = self.relative_path(x, &join(&op, "plot"));
                }
                if let Some(x) = m.get("plot_kind") {
                    let kp = join(&op, "plot_kind");
                    match self.string(x, &kp).map(str::parse::<PlotKind>) {
                        Some(Ok(k)) => outputs.plot_kind = Some(k),
                        Some(Err(e)) => self.issue(kp, e),
                        None => {}
                    }
                }
            }
        }

        if self.issues.len() > before {
            return None;
        }
        Some(RunConfig {
            problem: problem?,
            base_dir: None,
            params,
            initial,
            stop,
            scheme,
            seed,
            outputs,
        })
    }

    fn sweep(&mut self, v: &Value) -> Option<SweepConfig> {
        let root = self.object(
            v,
            "",
            &["template", "n_runs", "box", "velocity", "parallelism"],
        )?;
        let before = self.issues.len();
        let template = match root.get("template") {
            Some(t) => self.run(t, "template", false),
            None => {
                self.issue("template", "missing");
                None
            }
        };
        let n_runs = match root.get("n_runs") {
            Some(x) => self.count(x, "n_runs", 1).unwrap_or(1) as usize,
            None => 1,
        };
        let parallelism = match root.get("parallelism") {
            Some(x) => self.count(x, "parallelism", 1).unwrap_or(1) as usize,
            None => 1,
        };
        let mut sample_box = None;
        if let Some(bv) = root.get("box") {
            if let Some(m) = self.object(bv, "box", &["min", "max"]) {
                let min = m.get("min").and_then(|x| self.vector(x, "box.min"));
                let max = m.get("max").and_then(|x| self.vector(x, "box.max"));
                for key in ["min", "max"] {
                    if !m.contains_key(key) {
                        self.issue(format!("box.{key}"), "missing");
                    }
                }
                if let (Some(min), Some(max)) = (min, max) {
                    if min.len() != max.len() {
                        self.issue(
                            "box",
                            format!("min has {} entries, max has {}", min.len(), max.len()),
                        );
                    } else if let Some(k) = (0..min.len()).find(|&k| min[k] > max[k]) {
                        self.issue(
                            format!("box.min[{k}]"),
                            format!("{} exceeds box.max[{k}] = {}", min[k], max[k]),
                        );
                    } else {
                        sample_box = Some(SampleBox { min, max });
                    }
                }
            }
        }
        let gamma = match &template {
            Some(t) => Some(t.params.damping),
            None => match v.pointer("/template/params/gamma") {
                None => Some(1.0),
                Some(g) => g.as_f64().filter(|g| *g > 0.0 && g.is_finite()),
            },
        };
        let velocity = match root.get("velocity") {
            Some(Value::Array(_)) => {
                self.issue("velocity", "expected \"zero\" or {\"lambda\": number}");
                None
            }
            Some(x) => self.velocity(x, "velocity", gamma),
            None => None,
        };
        if self.issues.len() > before {
            return None;
        }
        Some(SweepConfig {
            template: template?,
            n_runs,
            sample_box,
            velocity,
            parallelism,
        })
    }
}

fn finish<T>(checker: Checker, out: Option<T>) -> Result<T, TrajioError> {
    match out {
        Some(v) if checker.issues.is_empty() => Ok(v),
        _ => Err(TrajioError::Invalid {
            issues: checker.issues,
        }),
    }
}

pub fn parse_run_config(value: &Value) -> Result<RunConfig, TrajioError> {
    let mut c = Checker { issues: Vec::new() };
    let out = c.run(value, "", true);
    finish(c, out)
}

/// Like [`parse_run_config`] but `initial.u0` may be absent.
pub fn parse_run_template(value: &Value) -> Result<RunConfig, TrajioError> {
    let mut c = Checker { issues: Vec::new() };
    let out = c.run(value, "", false);
    finish(c, out)
}

pub fn parse_sweep_config(value: &Value) -> Result<SweepConfig, TrajioError> {
    let mut c = Checker { issues: Vec::new() };
    let out = c.sweep(value);
    finish(c, out)
}

/// Reads a JSON document, reporting syntax errors with line and column.
pub fn read_json(path: &Path) -> Result<Value, TrajioError> {
    let text = std::fs::read_to_string(path).map_err(|e| TrajioError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| TrajioError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn base_dir_of(path: &Path) -> Option<PathBuf> {
    path.parent().map(Path::to_path_buf)
}

pub fn read_run_config(path: &Path) -> Result<RunConfig, TrajioError> {
    let mut cfg = parse_run_config(&read_json(path)?)?;
    cfg.base_dir = base_dir_of(path);
    Ok(cfg)
}

pub fn read_sweep_config(path: &Path) -> Result<SweepConfig, TrajioError> {
    let mut cfg = parse_sweep_config(&read_json(path)?)?;
    cfg.template.base_dir = base_dir_of(path);
    Ok(cfg)
}
