//! Problem files: the on-disk JSON description of minimax, rational and
//! robust programs.
//!
//! A file carries a `kind` discriminator, the ambient `dimension`,
//! polynomials as lists of `{c, p}` term records (coefficient plus
//! exponent vector), and an optional `box` of per-coordinate bounds for
//! the primal oracle. Parsing is strict: unknown fields, fields that do
//! not belong to the declared kind, dimension mismatches and non-finite
//! coefficients are all rejected. The canonical re-serialization (terms
//! merged, ordered and zero-pruned) underlies the input digest quoted in
//! run reports, so two files describing the same problem hash alike.

use crate::dual::{
    DualError, MinimaxProblem, RationalMinimaxProblem, RobustMode, RobustProblem,
};
use crate::poly::{PolyError, Polynomial, TermRecord};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProbfileError {
    #[error("malformed problem file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid problem file: {0}")]
    Invalid(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Dual(#[from] DualError),
}

/// Problem family discriminator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ProblemKind {
    Minimax,
    Rational,
    Robust,
}

/// JSON schema of a problem file. Which fields must be present depends on
/// `kind`; see [`ProblemFile::to_problem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ProblemFile {
    pub kind: ProblemKind,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objectives: Vec<Vec<TermRecord>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<Vec<TermRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denominator: Option<Vec<TermRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<RobustMode>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_scenarios: Vec<Vec<TermRecord>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraint_scenarios: Vec<Vec<Vec<TermRecord>>>,
    #[serde(
        default,
        rename = "box",
        skip_serializing_if = "Option::is_none"
    )]
    pub box_bounds: Option<Vec<(f64, f64)>>,
}

/// A problem file resolved into typed problem data.
#[derive(Debug, Clone)]
pub enum LoadedProblem {
    Minimax(MinimaxProblem),
    Rational(RationalMinimaxProblem),
    Robust(RobustProblem),
}

impl LoadedProblem {
    pub fn dim(&self) -> usize {
        match self {
            LoadedProblem::Minimax(p) => p.dim,
            LoadedProblem::Rational(p) => p.base.dim,
            LoadedProblem::Robust(p) => p.dim,
        }
    }
}

fn parse_polys(
    dim: usize,
    what: &str,
    records: &[Vec<TermRecord>],
) -> Result<Vec<Polynomial>, ProbfileError> {
    records
        .iter()
        .enumerate()
        .map(|(i, terms)| {
            for t in terms {
                if !t.c.is_finite() {
                    return Err(ProbfileError::Invalid(format!(
                        "{what} {i} has a non-finite coefficient {}",
                        t.c
                    )));
                }
            }
            Polynomial::from_records(dim, terms).map_err(ProbfileError::from)
        })
        .collect()
}

fn records_of(polys: &[Polynomial]) -> Vec<Vec<TermRecord>> {
    polys.iter().map(|p| p.to_records()).collect()
}

impl ProblemFile {
    /// Parse and structurally validate a problem file.
    pub fn parse(text: &str) -> Result<Self, ProbfileError> {
        let file: ProblemFile = serde_json::from_str(text)?;
        file.to_problem()?; // full validation
        Ok(file)
    }

    /// Resolve into typed problem data, enforcing that exactly the fields
    /// belonging to `kind` are present.
    pub fn to_problem(&self) -> Result<LoadedProblem, ProbfileError> {
        if self.dimension == 0 {
            return Err(ProbfileError::Invalid("dimension must be at least 1".into()));
        }
        if let Some(bounds) = &self.box_bounds {
            if bounds.len() != self.dimension {
                return Err(ProbfileError::Invalid(format!(
                    "box has {} ranges, dimension is {}",
                    bounds.len(),
                    self.dimension
                )));
            }
            for (lo, hi) in bounds {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(ProbfileError::Invalid(format!(
                        "box range [{lo}, {hi}] must be finite with lo < hi"
                    )));
                }
            }
        }
        let forbid = |cond: bool, field: &str, kind: &str| {
            if cond {
                Err(ProbfileError::Invalid(format!(
                    "field `{field}` does not belong to kind `{kind}`"
                )))
            } else {
                Ok(())
            }
        };
        match self.kind {
            ProblemKind::Minimax => {
                forbid(self.denominator.is_some(), "denominator", "minimax")?;
                forbid(self.mode.is_some(), "mode", "minimax")?;
                forbid(
                    !self.objective_scenarios.is_empty(),
                    "objectiveScenarios",
                    "minimax",
                )?;
                forbid(
                    !self.constraint_scenarios.is_empty(),
                    "constraintScenarios",
                    "minimax",
                )?;
                let objectives = parse_polys(self.dimension, "objective", &self.objectives)?;
                let constraints = parse_polys(self.dimension, "constraint", &self.constraints)?;
                Ok(LoadedProblem::Minimax(MinimaxProblem::new(
                    self.dimension,
                    objectives,
                    constraints,
                )?))
            }
            ProblemKind::Rational => {
                forbid(self.mode.is_some(), "mode", "rational")?;
                forbid(
                    !self.objective_scenarios.is_empty(),
                    "objectiveScenarios",
                    "rational",
                )?;
                forbid(
                    !self.constraint_scenarios.is_empty(),
                    "constraintScenarios",
                    "rational",
                )?;
                let den_records = self.denominator.as_ref().ok_or_else(|| {
                    ProbfileError::Invalid("rational problems need a denominator".into())
                })?;
                let objectives = parse_polys(self.dimension, "objective", &self.objectives)?;
                let constraints = parse_polys(self.dimension, "constraint", &self.constraints)?;
                let denominator = parse_polys(
                    self.dimension,
                    "denominator",
                    std::slice::from_ref(den_records),
                )?
                .pop()
                .expect("one denominator parsed");
                let base = MinimaxProblem::new(self.dimension, objectives, constraints)?;
                Ok(LoadedProblem::Rational(RationalMinimaxProblem::new(
                    base,
                    denominator,
                )?))
            }
            ProblemKind::Robust => {
                forbid(!self.objectives.is_empty(), "objectives", "robust")?;
                forbid(!self.constraints.is_empty(), "constraints", "robust")?;
                forbid(self.denominator.is_some(), "denominator", "robust")?;
                let mode = self.mode.ok_or_else(|| {
                    ProbfileError::Invalid("robust problems need a mode".into())
                })?;
                let objective_scenarios = parse_polys(
                    self.dimension,
                    "objective scenario",
                    &self.objective_scenarios,
                )?;
                let mut constraint_scenarios = Vec::with_capacity(self.constraint_scenarios.len());
                for (i, group) in self.constraint_scenarios.iter().enumerate() {
                    if group.is_empty() {
                        return Err(ProbfileError::Invalid(format!(
                            "constraint {i} has no scenario realizations"
                        )));
                    }
                    constraint_scenarios.push(parse_polys(
                        self.dimension,
                        "constraint scenario",
                        group,
                    )?);
                }
                let problem = RobustProblem {
                    dim: self.dimension,
                    mode,
                    objective_scenarios,
                    constraint_scenarios,
                };
                problem.counterpart()?; // validates dimensions and shapes
                Ok(LoadedProblem::Robust(problem))
            }
        }
    }

    pub fn from_minimax(p: &MinimaxProblem, box_bounds: Option<Vec<(f64, f64)>>) -> Self {
        ProblemFile {
            kind: ProblemKind::Minimax,
            dimension: p.dim,
            objectives: records_of(&p.objectives),
            constraints: records_of(&p.constraints),
            denominator: None,
            mode: None,
            objective_scenarios: Vec::new(),
            constraint_scenarios: Vec::new(),
            box_bounds,
        }
    }

    pub fn from_rational(
        p: &RationalMinimaxProblem,
        box_bounds: Option<Vec<(f64, f64)>>,
    ) -> Self {
        ProblemFile {
            kind: ProblemKind::Rational,
            dimension: p.base.dim,
            objectives: records_of(&p.base.objectives),
            constraints: records_of(&p.base.constraints),
            denominator: Some(p.denominator.to_records()),
            mode: None,
            objective_scenarios: Vec::new(),
            constraint_scenarios: Vec::new(),
            box_bounds,
        }
    }

    pub fn from_robust(p: &RobustProblem, box_bounds: Option<Vec<(f64, f64)>>) -> Self {
        ProblemFile {
            kind: ProblemKind::Robust,
            dimension: p.dim,
            objectives: Vec::new(),
            constraints: Vec::new(),
            denominator: None,
            mode: Some(p.mode),
            objective_scenarios: records_of(&p.objective_scenarios),
            constraint_scenarios: p
                .constraint_scenarios
                .iter()
                .map(|g| records_of(g))
                .collect(),
            box_bounds,
        }
    }

    pub fn from_loaded(p: &LoadedProblem, box_bounds: Option<Vec<(f64, f64)>>) -> Self {
        match p {
            LoadedProblem::Minimax(p) => Self::from_minimax(p, box_bounds),
            LoadedProblem::Rational(p) => Self::from_rational(p, box_bounds),
            LoadedProblem::Robust(p) => Self::from_robust(p, box_bounds),
        }
    }

    /// The canonical form: terms merged, graded-ordered and zero-pruned by
    /// a round trip through the typed representation.
    pub fn canonicalize(&self) -> Result<ProblemFile, ProbfileError> {
        let loaded = self.to_problem()?;
        Ok(Self::from_loaded(&loaded, self.box_bounds.clone()))
    }

    /// Compact canonical JSON (input to the digest).
    pub fn canonical_json(&self) -> Result<String, ProbfileError> {
        Ok(serde_json::to_string(&self.canonicalize()?)?)
    }

    /// Hex SHA-256 of the canonical JSON; files describing the same
    /// problem digest identically regardless of term order or formatting.
    pub fn digest(&self) -> Result<String, ProbfileError> {
        let canon = self.canonical_json()?;
        let mut h = Sha256::new();
        h.update(canon.as_bytes());
        Ok(h.finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>())
    }
}
