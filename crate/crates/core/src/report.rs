//! Run reports: JSON for machines, flat CSV for per-trial inspection.
//!
//! All numerical content of a report is a pure function of the config, so two
//! runs of the same config produce byte-identical JSON except for the
//! `timing_ms` field, which is the one field excluded from the determinism
//! contract. [`RunReport::deterministic_json`] serializes with timing
//! stripped for exactly that comparison.

use crate::config::{ExperimentConfig, Mode};
use crate::extreal::ExtReal;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: "kernelreg",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// One named pass/fail line.
#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckLine {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        CheckLine {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// Mode-specific structured results.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeResults {
    Gram {
        matrix: Vec<Vec<f64>>,
        min_eigenvalue: f64,
        max_asymmetry: f64,
    },
    Solve {
        solver: String,
        coefficients: Vec<f64>,
        objective: ExtReal,
        feasibility_residual: f64,
        iterations: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        jitter: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
    Verify {
        regularizer: String,
        orthogonal_monotonicity: bool,
        ray_monotonicity: bool,
        equal_norm_invariance: bool,
        radial_nondecreasing: bool,
        sublevel: Vec<SublevelSummary>,
        chain_holds: bool,
        necessity: NecessitySummary,
    },
    Probe {
        probe: String,
        #[serde(flatten)]
        body: ProbeResults,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct SublevelSummary {
    pub level: f64,
    pub inside: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_in: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_out: Option<f64>,
    pub ball_like: bool,
    pub star_shaped: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NecessitySummary {
    pub omega_sum: ExtReal,
    pub omega_origin: ExtReal,
    pub trivially_satisfied: bool,
    pub lambda_last: f64,
    pub lambda_trend_to_one: bool,
    pub bounds_all_ok: bool,
    pub liminf_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case", untagged)]
pub enum ProbeResults {
    RotationPath {
        theta: f64,
        lambda: f64,
        lambda_squared_closed_form: f64,
        max_recursion_residual: f64,
        max_orthogonality_residual: f64,
        alignment_residual: f64,
    },
    MinN {
        n_star: usize,
        lambda_squared_at_n_star: f64,
        lambda_squared_before: f64,
    },
    Chain {
        steps: usize,
        violations: usize,
        endpoint_ok: bool,
        holds: bool,
    },
    Sublevel(SublevelSummary),
    Span {
        span_distance: f64,
        j_at_min: ExtReal,
        j_at_projection: ExtReal,
        minimizer: Vec<f64>,
        oracle_converged: bool,
    },
    Necessity(NecessitySummary),
    ConditionCheck {
        condition: String,
        holds: bool,
        violations: usize,
        trials: usize,
    },
}

/// The complete output of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: ToolInfo,
    pub mode: Mode,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub results: ModeResults,
    pub checks: Vec<CheckLine>,
    pub all_pass: bool,
    /// Wall-clock duration; excluded from the determinism contract.
    pub timing_ms: u64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    /// JSON with the timing field removed: two runs of the same config must
    /// agree on this byte for byte.
    pub fn deterministic_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serialization is infallible");
        if let Some(map) = value.as_object_mut() {
            map.remove("timing_ms");
        }
        serde_json::to_string_pretty(&value).expect("value serialization is infallible")
    }
}

/// A flat CSV table of per-trial rows.
#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Plain comma-separated rendering. Fields are numbers, identifiers, or
    /// "inf"; none need quoting.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}
