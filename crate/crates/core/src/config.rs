//! Experiment configuration: strict TOML schema with full error collection.
//!
//! A config file is the archival record of an experiment, so parsing is
//! strict: unknown keys are rejected, every value is type- and
//! range-checked, and validation collects *all* problems with their key
//! paths instead of stopping at the first. The parsed [`ExperimentConfig`]
//! echoes into every report, including the seed, so a report alone is enough
//! to reproduce a run.
//!
//! Top-level schema (TOML):
//!
//! ```toml
//! mode = "solve"            # solve | verify | probe | gram
//! seed = 42                 # defaults to 0
//! gamma = 1.0               # or: gamma_schedule = { max_exp = 40 }
//!
//! [kernel]                  # family, width, degree, offset, input_dim
//! [[functionals]]           # type, point, atoms, weights,
//!                           # signal_grid, signal_values, eval_point
//! [regularizer]             # kind, profile, p, radius, knots, values,
//!                           # weights, center
//! [loss]                    # kind, targets, labels, f
//! [verify]                  # dim, trials, levels
//! [probe]                   # kind, x, y, n, level, samples, trials,
//!                           # functionals, targets, f, gamma_max_exp
//! [output]                  # json, csv
//! [tolerances]              # tol_eval, tol_check, tol_psd_per_dim
//! ```

use crate::extreal::ExtReal;
use crate::functional::{DiscreteMeasure, LinearFunctional, SampledSignal};
use crate::reduce::{LossDescriptor, ScalarLoss};
use crate::regularizer::{RadialProfile, Regularizer};
use crate::rkhs::Kernel;
use crate::{Error, Result};
use serde::Serialize;
use std::fmt;
use toml::Value;

/// A single validation problem, with the key path it was found at.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Solve,
    Verify,
    Probe,
    Gram,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Verify => "verify",
            Mode::Probe => "probe",
            Mode::Gram => "gram",
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct KernelSpec {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    pub input_dim: usize,
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel> {
        match self.family.as_str() {
            "gaussian" => Kernel::gaussian(
                self.width.ok_or(Error::InvalidParameter {
                    name: "width",
                    reason: "gaussian kernel requires width".into(),
                })?,
                self.input_dim,
            ),
            "polynomial" => Kernel::polynomial(
                self.degree.ok_or(Error::InvalidParameter {
                    name: "degree",
                    reason: "polynomial kernel requires degree".into(),
                })?,
                self.offset.unwrap_or(0.0),
                self.input_dim,
            ),
            "linear" => Kernel::linear(self.input_dim),
            other => Err(Error::InvalidParameter {
                name: "family",
                reason: format!("unknown kernel family {other:?}"),
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FunctionalSpec {
    PointEval {
        point: Vec<f64>,
    },
    Expectation {
        atoms: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
    Convolution {
        signal_grid: Vec<f64>,
        signal_values: Vec<f64>,
        eval_point: Vec<f64>,
    },
}

impl FunctionalSpec {
    pub fn build(&self, kernel: Kernel) -> Result<LinearFunctional> {
        match self {
            FunctionalSpec::PointEval { point } => {
                LinearFunctional::point_eval(kernel, point.clone())
            }
            FunctionalSpec::Expectation { atoms, weights } => LinearFunctional::expectation(
                kernel,
                DiscreteMeasure::new(atoms.clone(), weights.clone())?,
            ),
            FunctionalSpec::Convolution {
                signal_grid,
                signal_values,
                eval_point,
            } => LinearFunctional::convolution(
                kernel,
                SampledSignal::new(signal_grid.clone(), signal_values.clone())?,
                eval_point.clone(),
            ),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RegularizerSpec {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<ExtReal>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
}

impl RegularizerSpec {
    pub fn build_profile(&self) -> Result<RadialProfile> {
        match self.profile.as_deref() {
            Some("square") => Ok(RadialProfile::Square),
            Some("power") => RadialProfile::power(self.p.ok_or(Error::InvalidParameter {
                name: "p",
                reason: "power profile requires p".into(),
            })?),
            Some("indicator_ball") => {
                RadialProfile::indicator_ball(self.radius.ok_or(Error::InvalidParameter {
                    name: "radius",
                    reason: "indicator_ball profile requires radius".into(),
                })?)
            }
            Some("monotone_table") => {
                let knots = self.knots.clone().ok_or(Error::InvalidParameter {
                    name: "knots",
                    reason: "monotone_table profile requires knots".into(),
                })?;
                let values = self.values.clone().ok_or(Error::InvalidParameter {
                    name: "values",
                    reason: "monotone_table profile requires values".into(),
                })?;
                RadialProfile::monotone_table(knots, values)
            }
            Some(other) => Err(Error::InvalidParameter {
                name: "profile",
                reason: format!("unknown profile {other:?}"),
            }),
            None => Err(Error::InvalidParameter {
                name: "profile",
                reason: "radial regularizer requires a profile".into(),
            }),
        }
    }

    pub fn build(&self) -> Result<Regularizer> {
        match self.kind.as_str() {
            "radial" => Ok(Regularizer::Radial(self.build_profile()?)),
            "anisotropic_quadratic" => Regularizer::anisotropic_quadratic(
                self.weights.clone().ok_or(Error::InvalidParameter {
                    name: "weights",
                    reason: "anisotropic_quadratic requires weights".into(),
                })?,
            ),
            "shifted_norm" => {
                Regularizer::shifted_norm(self.center.clone().ok_or(Error::InvalidParameter {
                    name: "center",
                    reason: "shifted_norm requires center".into(),
                })?)
            }
            other => Err(Error::InvalidParameter {
                name: "kind",
                reason: format!("unknown regularizer kind {other:?}"),
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LossSpec {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
}

impl LossSpec {
    pub fn build(&self) -> Result<(LossDescriptor, Option<Vec<f64>>)> {
        match self.kind.as_str() {
            "squared" => Ok((LossDescriptor::Squared, self.targets.clone())),
            "hinge" => Ok((
                LossDescriptor::Hinge {
                    labels: self.labels.clone().ok_or(Error::InvalidParameter {
                        name: "labels",
                        reason: "hinge loss requires labels".into(),
                    })?,
                },
                None,
            )),
            "kpca" => Ok((LossDescriptor::KpcaVarianceConstraint, None)),
            "scalar" => Ok((
                LossDescriptor::ScalarF {
                    f: scalar_loss_by_name(self.f.as_deref().unwrap_or("square_at_one"))?,
                },
                None,
            )),
            other => Err(Error::InvalidParameter {
                name: "kind",
                reason: format!("unknown loss kind {other:?}"),
            }),
        }
    }
}

pub fn scalar_loss_by_name(name: &str) -> Result<ScalarLoss> {
    match name {
        "square_at_one" => Ok(ScalarLoss::SquareAtOne),
        "hinge_pair" => Ok(ScalarLoss::HingePair),
        other => Err(Error::InvalidParameter {
            name: "f",
            reason: format!("unknown scalar loss {other:?}"),
        }),
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct VerifySpec {
    pub dim: usize,
    pub trials: usize,
    pub levels: Vec<f64>,
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec {
            dim: 3,
            trials: 10_000,
            levels: vec![0.5, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ProbeSpec {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functionals: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_max_exp: Option<u32>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Default)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub json: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ToleranceSpec {
    pub tol_eval: f64,
    pub tol_check: f64,
    pub tol_psd_per_dim: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        ToleranceSpec {
            tol_eval: crate::TOL_EVAL,
            tol_check: crate::TOL_CHECK,
            tol_psd_per_dim: crate::TOL_PSD_PER_DIM,
        }
    }
}

/// A fully validated experiment configuration.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_schedule_max_exp: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub functionals: Vec<FunctionalSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regularizer: Option<RegularizerSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossSpec>,
    pub verify: VerifySpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSpec>,
    pub output: OutputSpec,
    pub tolerances: ToleranceSpec,
}

// ---------------------------------------------------------------------------
// Strict TOML walking

struct Walker<'a> {
    issues: &'a mut Vec<ConfigIssue>,
}

impl<'a> Walker<'a> {
    fn issue(&mut self, path: &str, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn check_keys(&mut self, table: &toml::map::Map<String, Value>, path: &str, allowed: &[&str]) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                let where_ = if path.is_empty() {
                    key.clone()
                } else {
                    format!("{path}.{key}")
                };
                self.issue(&where_, format!("unknown key (allowed: {})", allowed.join(", ")));
            }
        }
    }

    fn f64_value(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.issue(path, "expected a number");
                None
            }
        }
    }

    fn get_f64(&mut self, t: &toml::map::Map<String, Value>, path: &str, key: &str) -> Option<f64> {
        t.get(key)
            .cloned()
            .and_then(|v| self.f64_value(&v, &format!("{path}.{key}")))
    }

    fn get_usize(
        &mut self,
        t: &toml::map::Map<String, Value>,
        path: &str,
        key: &str,
    ) -> Option<usize> {
        match t.get(key) {
            Some(Value::Integer(i)) if *i >= 0 => Some(*i as usize),
            Some(_) => {
                self.issue(&format!("{path}.{key}"), "expected a nonnegative integer");
                None
            }
            None => None,
        }
    }

    fn get_string(
        &mut self,
        t: &toml::map::Map<String, Value>,
        path: &str,
        key: &str,
    ) -> Option<String> {
        match t.get(key) {
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => {
                self.issue(&format!("{path}.{key}"), "expected a string");
                None
            }
            None => None,
        }
    }

    fn vec_f64(&mut self, v: &Value, path: &str) -> Option<Vec<f64>> {
        match v {
            Value::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    out.push(self.f64_value(item, &format!("{path}[{i}]"))?);
                }
                Some(out)
            }
            _ => {
                self.issue(path, "expected an array of numbers");
                None
            }
        }
    }

    fn get_vec_f64(
        &mut self,
        t: &toml::map::Map<String, Value>,
        path: &str,
        key: &str,
    ) -> Option<Vec<f64>> {
        t.get(key)
            .cloned()
            .and_then(|v| self.vec_f64(&v, &format!("{path}.{key}")))
    }

    fn get_vec_vec_f64(
        &mut self,
        t: &toml::map::Map<String, Value>,
        path: &str,
        key: &str,
    ) -> Option<Vec<Vec<f64>>> {
        match t.get(key) {
            Some(Value::Array(items)) => {
                let items = items.clone();
                let mut out = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    out.push(self.vec_f64(item, &format!("{path}.{key}[{i}]"))?);
                }
                Some(out)
            }
            Some(_) => {
                self.issue(&format!("{path}.{key}"), "expected an array of arrays");
                None
            }
            None => None,
        }
    }
}

/// Attaches a build error to its section, using the parameter name from
/// [`Error::InvalidParameter`] for the key path when available.
fn issue_from_error(issues: &mut Vec<ConfigIssue>, section: &str, err: Error) {
    let (path, message) = match &err {
        Error::InvalidParameter { name, reason } => (format!("{section}.{name}"), reason.clone()),
        other => (section.to_string(), other.to_string()),
    };
    issues.push(ConfigIssue { path, message });
}

/// Parses and validates a config from TOML text. On failure, returns every
/// problem found, each with its key path.
pub fn validate_config(text: &str) -> std::result::Result<ExperimentConfig, Vec<ConfigIssue>> {
    let mut issues = Vec::new();
    let root: Value = match text.parse() {
        Ok(v) => v,
        Err(e) => {
            return Err(vec![ConfigIssue {
                path: String::new(),
                message: format!("TOML syntax error: {e}"),
            }]);
        }
    };
    let table = match root.as_table() {
        Some(t) => t.clone(),
        None => {
            return Err(vec![ConfigIssue {
                path: String::new(),
                message: "config root must be a table".into(),
            }]);
        }
    };
    let mut w = Walker { issues: &mut issues };
    w.check_keys(
        &table,
        "",
        &[
            "mode",
            "seed",
            "gamma",
            "gamma_schedule",
            "kernel",
            "functionals",
            "regularizer",
            "loss",
            "verify",
            "probe",
            "output",
            "tolerances",
        ],
    );

    let mode = match w.get_string(&table, "", "mode") {
        Some(s) => match s.as_str() {
            "solve" => Some(Mode::Solve),
            "verify" => Some(Mode::Verify),
            "probe" => Some(Mode::Probe),
            "gram" => Some(Mode::Gram),
            other => {
                w.issue("mode", format!("unknown mode {other:?}"));
                None
            }
        },
        None => {
            if !table.contains_key("mode") {
                w.issue("mode", "missing (one of solve, verify, probe, gram)");
            }
            None
        }
    };

    let seed = match table.get("seed") {
        Some(Value::Integer(i)) if *i >= 0 => *i as u64,
        Some(_) => {
            w.issue("seed", "expected a nonnegative integer");
            0
        }
        None => 0,
    };

    let gamma = match table.get("gamma").cloned() {
        Some(v) => {
            let g = w.f64_value(&v, "gamma");
            if let Some(g) = g {
                if g < 0.0 || !g.is_finite() {
                    w.issue("gamma", format!("must be a finite nonnegative real, got {g}"));
                }
            }
            g
        }
        None => None,
    };

    let gamma_schedule_max_exp = match table.get("gamma_schedule") {
        Some(Value::Table(t)) => {
            let t = t.clone();
            w.check_keys(&t, "gamma_schedule", &["max_exp"]);
            let exp = w.get_usize(&t, "gamma_schedule", "max_exp");
            if exp.is_none() && !t.contains_key("max_exp") {
                w.issue("gamma_schedule.max_exp", "missing");
            }
            exp.map(|e| e as u32)
        }
        Some(_) => {
            w.issue("gamma_schedule", "expected a table { max_exp = ... }");
            None
        }
        None => None,
    };

    let kernel = match table.get("kernel") {
        Some(Value::Table(t)) => parse_kernel(&mut w, &t.clone()),
        Some(_) => {
            w.issue("kernel", "expected a table");
            None
        }
        None => None,
    };

    let functionals = match table.get("functionals") {
        Some(Value::Array(items)) => {
            let items = items.clone();
            let mut out = Vec::new();
            for (i, item) in items.iter().enumerate() {
                let path = format!("functionals[{i}]");
                match item.as_table() {
                    Some(t) => {
                        if let Some(spec) = parse_functional(&mut w, t, &path) {
                            out.push(spec);
                        }
                    }
                    None => w.issue(&path, "expected a table"),
                }
            }
            out
        }
        Some(_) => {
            w.issue("functionals", "expected an array of tables");
            Vec::new()
        }
        None => Vec::new(),
    };

    let regularizer = match table.get("regularizer") {
        Some(Value::Table(t)) => parse_regularizer(&mut w, &t.clone()),
        Some(_) => {
            w.issue("regularizer", "expected a table");
            None
        }
        None => None,
    };

    let loss = match table.get("loss") {
        Some(Value::Table(t)) => parse_loss(&mut w, &t.clone()),
        Some(_) => {
            w.issue("loss", "expected a table");
            None
        }
        None => None,
    };

    let verify = match table.get("verify") {
        Some(Value::Table(t)) => parse_verify(&mut w, &t.clone()),
        Some(_) => {
            w.issue("verify", "expected a table");
            VerifySpec::default()
        }
        None => VerifySpec::default(),
    };

    let probe = match table.get("probe") {
        Some(Value::Table(t)) => parse_probe(&mut w, &t.clone()),
        Some(_) => {
            w.issue("probe", "expected a table");
            None
        }
        None => None,
    };

    let output = match table.get("output") {
        Some(Value::Table(t)) => {
            let t = t.clone();
            w.check_keys(&t, "output", &["json", "csv"]);
            OutputSpec {
                json: w.get_string(&t, "output", "json"),
                csv: w.get_string(&t, "output", "csv"),
            }
        }
        Some(_) => {
            w.issue("output", "expected a table");
            OutputSpec::default()
        }
        None => OutputSpec::default(),
    };

    let tolerances = match table.get("tolerances") {
        Some(Value::Table(t)) => {
            let t = t.clone();
            w.check_keys(&t, "tolerances", &["tol_eval", "tol_check", "tol_psd_per_dim"]);
            let defaults = ToleranceSpec::default();
            let spec = ToleranceSpec {
                tol_eval: w
                    .get_f64(&t, "tolerances", "tol_eval")
                    .unwrap_or(defaults.tol_eval),
                tol_check: w
                    .get_f64(&t, "tolerances", "tol_check")
                    .unwrap_or(defaults.tol_check),
                tol_psd_per_dim: w
                    .get_f64(&t, "tolerances", "tol_psd_per_dim")
                    .unwrap_or(defaults.tol_psd_per_dim),
            };
            for (name, value) in [
                ("tol_eval", spec.tol_eval),
                ("tol_check", spec.tol_check),
                ("tol_psd_per_dim", spec.tol_psd_per_dim),
            ] {
                if value <= 0.0 || !value.is_finite() {
                    w.issue(&format!("tolerances.{name}"), "must be a positive real");
                }
            }
            spec
        }
        Some(_) => {
            w.issue("tolerances", "expected a table");
            ToleranceSpec::default()
        }
        None => ToleranceSpec::default(),
    };

    // Mode-specific requirements.
    if let Some(mode) = mode {
        match mode {
            Mode::Solve => {
                if kernel.is_none() {
                    w.issue("kernel", "required for mode = \"solve\"");
                }
                if functionals.is_empty() {
                    w.issue("functionals", "required for mode = \"solve\"");
                }
                if loss.is_none() {
                    w.issue("loss", "required for mode = \"solve\"");
                }
                match &regularizer {
                    None => w.issue("regularizer", "required for mode = \"solve\""),
                    Some(r) if r.kind != "radial" => w.issue(
                        "regularizer.kind",
                        "solve mode reduces through the representers and needs a radial regularizer",
                    ),
                    _ => {}
                }
                if gamma.is_none() {
                    w.issue("gamma", "required for mode = \"solve\"");
                }
            }
            Mode::Gram => {
                if kernel.is_none() {
                    w.issue("kernel", "required for mode = \"gram\"");
                }
                if functionals.is_empty() {
                    w.issue("functionals", "required for mode = \"gram\"");
                }
            }
            Mode::Verify => {
                if regularizer.is_none() {
                    w.issue("regularizer", "required for mode = \"verify\"");
                }
            }
            Mode::Probe => match &probe {
                None => w.issue("probe", "required for mode = \"probe\""),
                Some(p) => {
                    let needs_regularizer = matches!(
                        p.kind.as_str(),
                        "chain" | "sublevel" | "necessity" | "span" | "orthogonality" | "ray"
                    );
                    if needs_regularizer && regularizer.is_none() {
                        w.issue("regularizer", format!("required for probe kind {:?}", p.kind));
                    }
                }
            },
        }
    }

    // Cross-checks through the actual constructors, so every semantic rule
    // lives in one place.
    if let Some(spec) = &kernel {
        match spec.build() {
            Err(e) => issue_from_error(w.issues, "kernel", e),
            Ok(k) => {
                for (i, f) in functionals.iter().enumerate() {
                    if let Err(e) = f.build(k) {
                        issue_from_error(w.issues, &format!("functionals[{i}]"), e);
                    }
                }
            }
        }
    }
    if let Some(spec) = &regularizer {
        if let Err(e) = spec.build() {
            issue_from_error(w.issues, "regularizer", e);
        }
    }
    if let Some(spec) = &loss {
        if let Err(e) = spec.build() {
            issue_from_error(w.issues, "loss", e);
        }
    }

    if issues.is_empty() {
        Ok(ExperimentConfig {
            mode: mode.expect("mode validated above"),
            seed,
            gamma,
            gamma_schedule_max_exp,
            kernel,
            functionals,
            regularizer,
            loss,
            verify,
            probe,
            output,
            tolerances,
        })
    } else {
        Err(issues)
    }
}

fn parse_kernel(w: &mut Walker, t: &toml::map::Map<String, Value>) -> Option<KernelSpec> {
    w.check_keys(t, "kernel", &["family", "width", "degree", "offset", "input_dim"]);
    let family = match w.get_string(t, "kernel", "family") {
        Some(f) => f,
        None => {
            if !t.contains_key("family") {
                w.issue("kernel.family", "missing (gaussian, polynomial, or linear)");
            }
            return None;
        }
    };
    let input_dim = match w.get_usize(t, "kernel", "input_dim") {
        Some(d) => d,
        None => {
            if !t.contains_key("input_dim") {
                w.issue("kernel.input_dim", "missing");
            }
            return None;
        }
    };
    let degree = match t.get("degree") {
        Some(Value::Integer(i)) if *i > 0 => Some(*i as u32),
        Some(_) => {
            w.issue("kernel.degree", "expected a positive integer");
            None
        }
        None => None,
    };
    Some(KernelSpec {
        family,
        width: w.get_f64(t, "kernel", "width"),
        degree,
        offset: w.get_f64(t, "kernel", "offset"),
        input_dim,
    })
}

fn parse_functional(
    w: &mut Walker,
    t: &toml::map::Map<String, Value>,
    path: &str,
) -> Option<FunctionalSpec> {
    let kind = match w.get_string(t, path, "type") {
        Some(k) => k,
        None => {
            if !t.contains_key("type") {
                w.issue(
                    &format!("{path}.type"),
                    "missing (point_eval, expectation, or convolution)",
                );
            }
            return None;
        }
    };
    match kind.as_str() {
        "point_eval" => {
            w.check_keys(t, path, &["type", "point"]);
            let point = match w.get_vec_f64(t, path, "point") {
                Some(p) => p,
                None => {
                    if !t.contains_key("point") {
                        w.issue(&format!("{path}.point"), "missing");
                    }
                    return None;
                }
            };
            Some(FunctionalSpec::PointEval { point })
        }
        "expectation" => {
            w.check_keys(t, path, &["type", "atoms", "weights"]);
            let atoms = match w.get_vec_vec_f64(t, path, "atoms") {
                Some(a) => a,
                None => {
                    if !t.contains_key("atoms") {
                        w.issue(&format!("{path}.atoms"), "missing");
                    }
                    return None;
                }
            };
            let weights = match w.get_vec_f64(t, path, "weights") {
                Some(ws) => ws,
                None => {
                    if !t.contains_key("weights") {
                        w.issue(&format!("{path}.weights"), "missing");
                    }
                    return None;
                }
            };
            Some(FunctionalSpec::Expectation { atoms, weights })
        }
        "convolution" => {
            w.check_keys(t, path, &["type", "signal_grid", "signal_values", "eval_point"]);
            let signal_grid = w.get_vec_f64(t, path, "signal_grid");
            let signal_values = w.get_vec_f64(t, path, "signal_values");
            let eval_point = w.get_vec_f64(t, path, "eval_point");
            for (key, present) in [
                ("signal_grid", signal_grid.is_some() || t.contains_key("signal_grid")),
                (
                    "signal_values",
                    signal_values.is_some() || t.contains_key("signal_values"),
                ),
                ("eval_point", eval_point.is_some() || t.contains_key("eval_point")),
            ] {
                if !present {
                    w.issue(&format!("{path}.{key}"), "missing");
                }
            }
            Some(FunctionalSpec::Convolution {
                signal_grid: signal_grid?,
                signal_values: signal_values?,
                eval_point: eval_point?,
            })
        }
        other => {
            w.issue(&format!("{path}.type"), format!("unknown functional type {other:?}"));
            None
        }
    }
}

fn parse_regularizer(w: &mut Walker, t: &toml::map::Map<String, Value>) -> Option<RegularizerSpec> {
    w.check_keys(
        t,
        "regularizer",
        &["kind", "profile", "p", "radius", "knots", "values", "weights", "center"],
    );
    let kind = match w.get_string(t, "regularizer", "kind") {
        Some(k) => k,
        None => {
            if !t.contains_key("kind") {
                w.issue(
                    "regularizer.kind",
                    "missing (radial, anisotropic_quadratic, or shifted_norm)",
                );
            }
            return None;
        }
    };
    let values = match t.get("values").cloned() {
        Some(Value::Array(items)) => {
            let mut out = Vec::with_capacity(items.len());
            let mut ok = true;
            for (i, item) in items.iter().enumerate() {
                // +∞ is written either as TOML's `inf` literal or as the
                // string "inf" (the JSON-compatible echo form).
                if matches!(item, Value::String(s) if s == "inf" || s == "+inf") {
                    out.push(ExtReal::PosInf);
                    continue;
                }
                match w.f64_value(item, &format!("regularizer.values[{i}]")) {
                    Some(x) if x == f64::INFINITY => out.push(ExtReal::PosInf),
                    Some(x) if x.is_finite() => out.push(ExtReal::Finite(x)),
                    Some(_) => {
                        w.issue(&format!("regularizer.values[{i}]"), "must be finite or +inf");
                        ok = false;
                    }
                    None => ok = false,
                }
            }
            if ok {
                Some(out)
            } else {
                None
            }
        }
        Some(_) => {
            w.issue("regularizer.values", "expected an array of numbers");
            None
        }
        None => None,
    };
    Some(RegularizerSpec {
        kind,
        profile: w.get_string(t, "regularizer", "profile"),
        p: w.get_f64(t, "regularizer", "p"),
        radius: w.get_f64(t, "regularizer", "radius"),
        knots: w.get_vec_f64(t, "regularizer", "knots"),
        values,
        weights: w.get_vec_f64(t, "regularizer", "weights"),
        center: w.get_vec_f64(t, "regularizer", "center"),
    })
}

fn parse_loss(w: &mut Walker, t: &toml::map::Map<String, Value>) -> Option<LossSpec> {
    w.check_keys(t, "loss", &["kind", "targets", "labels", "f"]);
    let kind = match w.get_string(t, "loss", "kind") {
        Some(k) => k,
        None => {
            if !t.contains_key("kind") {
                w.issue("loss.kind", "missing (squared, hinge, kpca, or scalar)");
            }
            return None;
        }
    };
    Some(LossSpec {
        kind,
        targets: w.get_vec_f64(t, "loss", "targets"),
        labels: w.get_vec_f64(t, "loss", "labels"),
        f: w.get_string(t, "loss", "f"),
    })
}

fn parse_verify(w: &mut Walker, t: &toml::map::Map<String, Value>) -> VerifySpec {
    w.check_keys(t, "verify", &["dim", "trials", "levels"]);
    let defaults = VerifySpec::default();
    let dim = w.get_usize(t, "verify", "dim").unwrap_or(defaults.dim);
    if dim < 2 {
        w.issue("verify.dim", "model dimension must be at least 2");
    }
    VerifySpec {
        dim,
        trials: w.get_usize(t, "verify", "trials").unwrap_or(defaults.trials),
        levels: w.get_vec_f64(t, "verify", "levels").unwrap_or(defaults.levels),
    }
}

fn parse_probe(w: &mut Walker, t: &toml::map::Map<String, Value>) -> Option<ProbeSpec> {
    w.check_keys(
        t,
        "probe",
        &[
            "kind",
            "x",
            "y",
            "n",
            "level",
            "samples",
            "trials",
            "functionals",
            "targets",
            "f",
            "gamma_max_exp",
        ],
    );
    let kind = match w.get_string(t, "probe", "kind") {
        Some(k) => k,
        None => {
            if !t.contains_key("kind") {
                w.issue(
                    "probe.kind",
                    "missing (rotation_path, min_n, chain, sublevel, span, necessity, orthogonality, ray)",
                );
            }
            return None;
        }
    };
    const KINDS: &[&str] = &[
        "rotation_path",
        "min_n",
        "chain",
        "sublevel",
        "span",
        "necessity",
        "orthogonality",
        "ray",
    ];
    if !KINDS.contains(&kind.as_str()) {
        w.issue("probe.kind", format!("unknown probe kind {kind:?}"));
        return None;
    }
    match kind.as_str() {
        "rotation_path" | "min_n" | "chain" => {
            for key in ["x", "y"] {
                if !t.contains_key(key) {
                    w.issue(&format!("probe.{key}"), format!("required for probe kind {kind:?}"));
                }
            }
        }
        "necessity" => {
            if !t.contains_key("x") {
                w.issue("probe.x", "required for the necessity probe");
            }
        }
        "span" if !t.contains_key("functionals") => {
            w.issue("probe.functionals", "required for the span probe");
        }
        _ => {}
    }
    let gamma_max_exp = match t.get("gamma_max_exp") {
        Some(Value::Integer(i)) if (0..=60).contains(i) => Some(*i as u32),
        Some(_) => {
            w.issue("probe.gamma_max_exp", "expected an integer in 0..=60");
            None
        }
        None => None,
    };
    Some(ProbeSpec {
        kind,
        x: w.get_vec_f64(t, "probe", "x"),
        y: w.get_vec_f64(t, "probe", "y"),
        n: w.get_usize(t, "probe", "n"),
        level: w.get_f64(t, "probe", "level"),
        samples: w.get_usize(t, "probe", "samples"),
        trials: w.get_usize(t, "probe", "trials"),
        functionals: w.get_vec_vec_f64(t, "probe", "functionals"),
        targets: w.get_vec_f64(t, "probe", "targets"),
        f: w.get_string(t, "probe", "f"),
        gamma_max_exp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_reports_missing_mode() {
        let err = validate_config("").unwrap_err();
        assert!(err.iter().any(|i| i.path == "mode" && i.message.contains("missing")));
    }

    #[test]
    fn negative_gaussian_width_is_located_at_kernel_width() {
        let text = r#"
mode = "gram"
[kernel]
family = "gaussian"
width = -1.0
input_dim = 1
[[functionals]]
type = "point_eval"
point = [0.0]
"#;
        let err = validate_config(text).unwrap_err();
        assert!(err.iter().any(|i| i.path == "kernel.width"), "issues: {err:?}");
    }

    #[test]
    fn minimal_solve_config_parses_with_defaults() {
        let text = r#"
mode = "solve"
gamma = 1.0
[kernel]
family = "gaussian"
width = 1.0
input_dim = 1
[[functionals]]
type = "point_eval"
point = [0.0]
[regularizer]
kind = "radial"
profile = "square"
[loss]
kind = "squared"
targets = [1.0]
"#;
        let config = validate_config(text).unwrap();
        assert_eq!(config.mode, Mode::Solve);
        assert_eq!(config.seed, 0);
        assert_eq!(config.verify, VerifySpec::default());
        assert_eq!(config.tolerances.tol_eval, crate::TOL_EVAL);
    }

    #[test]
    fn unknown_keys_are_rejected_with_paths() {
        let text = r#"
mode = "verify"
typo_key = 1
[regularizer]
kind = "radial"
profile = "square"
extra = true
"#;
        let err = validate_config(text).unwrap_err();
        assert!(err.iter().any(|i| i.path == "typo_key"));
        assert!(err.iter().any(|i| i.path == "regularizer.extra"));
    }

    #[test]
    fn multiple_errors_are_collected_in_one_pass() {
        let text = r#"
mode = "solve"
gamma = -2.0
[kernel]
family = "gaussian"
width = -1.0
input_dim = 1
[[functionals]]
type = "point_eval"
point = [0.0]
[regularizer]
kind = "radial"
profile = "power"
p = -3.0
[loss]
kind = "squared"
targets = [1.0]
"#;
        let err = validate_config(text).unwrap_err();
        assert!(err.len() >= 3, "expected ≥ 3 issues, got {err:?}");
        assert!(err.iter().any(|i| i.path == "gamma"));
        assert!(err.iter().any(|i| i.path == "kernel.width"));
        assert!(err.iter().any(|i| i.path == "regularizer.p"));
    }

    #[test]
    fn monotone_table_values_accept_inf() {
        let text = r#"
mode = "verify"
[regularizer]
kind = "radial"
profile = "monotone_table"
knots = [0.0, 1.0]
values = [0.0, inf]
"#;
        let config = validate_config(text).unwrap();
        let spec = config.regularizer.as_ref().unwrap();
        assert_eq!(spec.values.as_ref().unwrap()[1], ExtReal::PosInf);
        let built = spec.build().unwrap();
        assert!(matches!(built, Regularizer::Radial(_)));
        // +∞ survives the echo round trip (string form in the echo).
        let echoed = toml::to_string(&config).unwrap();
        let reparsed = validate_config(&echoed).unwrap();
        assert_eq!(config, reparsed);
    }

    #[test]
    fn solve_mode_rejects_non_radial_regularizers() {
        let text = r#"
mode = "solve"
gamma = 1.0
[kernel]
family = "linear"
input_dim = 2
[[functionals]]
type = "point_eval"
point = [1.0, 0.0]
[regularizer]
kind = "anisotropic_quadratic"
weights = [1.0, 4.0]
[loss]
kind = "squared"
targets = [1.0]
"#;
        let err = validate_config(text).unwrap_err();
        assert!(err.iter().any(|i| i.path == "regularizer.kind"));
    }

    #[test]
    fn round_trip_parse_of_serialized_config_is_equal() {
        let text = r#"
mode = "probe"
seed = 9
[regularizer]
kind = "shifted_norm"
center = [1.0, 0.0]
[probe]
kind = "sublevel"
level = 0.5
samples = 128
"#;
        let config = validate_config(text).unwrap();
        // Serialize the echo back to TOML and re-validate: must parse equal.
        let echoed = toml::to_string(&config).unwrap();
        let reparsed = validate_config(&echoed).unwrap();
        assert_eq!(config, reparsed);
    }

    #[test]
    fn bad_probe_kind_is_rejected() {
        let text = r#"
mode = "probe"
[probe]
kind = "warp_drive"
"#;
        let err = validate_config(text).unwrap_err();
        assert!(err.iter().any(|i| i.path == "probe.kind"));
    }
}
