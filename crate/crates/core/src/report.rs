//! Run reports: the canonical machine-readable output of every command.
//!
//! A report carries the tool version, the command that produced it, the
//! input digest, a status token, named scalar values, optional structured
//! certificate and oracle sections, stage timings and free-form messages.
//! All keys are camelCase. JSON cannot represent non-finite numbers, so
//! helpers route any NaN or infinity into a string representation rather
//! than failing to serialize.

use crate::dual::DualCertificate;
use crate::oracle::{InfeasibilityReport, OracleResult};
use crate::solver::SolveReport;
use crate::sos::SosCertificate;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;

/// One command's structured output.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub tool_version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_digest: Option<String>,
    pub status: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Value>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub timings_ms: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub messages: Vec<String>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            input_digest: None,
            status: "pending".to_string(),
            values: BTreeMap::new(),
            certificate: None,
            oracle: None,
            timings_ms: BTreeMap::new(),
            messages: Vec::new(),
        }
    }

    /// Record a named scalar; non-finite values go to `messages` instead
    /// so the report always serializes.
    pub fn put_value(&mut self, key: &str, v: f64) {
        if v.is_finite() {
            self.values.insert(key.to_string(), v);
        } else {
            self.messages.push(format!("value {key} is non-finite: {v}"));
        }
    }

    pub fn put_timing(&mut self, stage: &str, ms: f64) {
        if ms.is_finite() {
            self.timings_ms.insert(stage.to_string(), ms);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite numbers")
    }
}

/// A float as a JSON value, falling back to a string for non-finite
/// inputs (JSON has no NaN or infinity).
pub fn finite_or_string(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

fn vec_json(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| finite_or_string(*x)).collect())
}

fn matrix_json(m: &nalgebra::DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| finite_or_string(m[(i, j)])).collect()))
            .collect(),
    )
}

/// Structured view of a dual multiplier certificate.
pub fn dual_certificate_json(cert: &DualCertificate) -> Value {
    json!({
        "mu": finite_or_string(cert.mu),
        "delta": vec_json(&cert.delta),
        "lambda": vec_json(&cert.lambda),
        "gramBasis": cert
            .gram_basis
            .iter()
            .map(|m| m.exponents().to_vec())
            .collect::<Vec<_>>(),
        "gram": matrix_json(&cert.gram),
        "identityResidual": finite_or_string(cert.identity_residual),
        "gramMinEigenvalue": finite_or_string(cert.gram_min_eigenvalue),
    })
}

/// Structured view of a sum-of-squares Gram certificate.
pub fn sos_certificate_json(cert: &SosCertificate) -> Value {
    json!({
        "basis": cert
            .basis
            .iter()
            .map(|m| m.exponents().to_vec())
            .collect::<Vec<_>>(),
        "gram": matrix_json(&cert.gram),
        "minEigenvalue": finite_or_string(cert.min_eigenvalue),
        "residual": finite_or_string(cert.residual),
    })
}

/// Structured view of an oracle solution.
pub fn oracle_result_json(r: &OracleResult) -> Value {
    json!({
        "value": finite_or_string(r.value),
        "minimizer": vec_json(&r.minimizer),
        "activeSet": r.active_set,
        "feasibilityResidual": finite_or_string(r.feasibility_residual),
        "boundaryFlag": r.boundary_flag,
        "lowerBound": finite_or_string(r.lower_bound),
        "converged": r.converged,
        "iterations": r.iterations,
    })
}

/// Structured view of an oracle infeasibility verdict.
pub fn infeasibility_json(r: &InfeasibilityReport) -> Value {
    json!({
        "infeasible": true,
        "minViolation": finite_or_string(r.min_violation),
        "witness": vec_json(&r.witness),
    })
}

/// Structured view of a raw conic solve (status, value, residuals).
pub fn solve_report_json(r: &SolveReport) -> Value {
    json!({
        "status": r.status,
        "value": r.value.map(finite_or_string),
        "iterations": r.iterations,
        "residuals": {
            "primal": finite_or_string(r.residuals.primal),
            "dual": finite_or_string(r.residuals.dual),
            "gap": finite_or_string(r.residuals.gap),
        },
        "message": r.message,
    })
}
