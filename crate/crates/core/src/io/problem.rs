//! JSON problem files.
//!
//! ```json
//! {
//!   "n": 3, "k": 2, "l": null, "beta": 1.0,
//!   "box": { "lo": 0.0, "hi": [1.0, 1.0, 1.0], "m": 17 },
//!   "psi": { "kind": "constant", "value": 12.0 },
//!   "phi": { "kind": "expression", "expr": "0.5 + 0.5*((x1-0.5)^2 + (x2-0.5)^2 + (x3-0.5)^2)" },
//!   "schedule": { "step": 0.1, "min_step": 0.00390625 }
//! }
//! ```
//!
//! A `"grid"` source lists one value per node (`"values": [...]`,
//! lexicographic with x1 fastest) or names an `HNF1` field dump
//! (`"path": "psi.bin"`, relative to the problem file).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::binary::read_field;
use super::expr::Expr;
use crate::error::{Error, Result};
use crate::operator::OperatorSpec;
use crate::solver::{BoxGrid, ProblemSpec, ScalarField, Schedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Scalar(f64),
    PerAxis(Vec<f64>),
}

impl Bound {
    fn expand(&self, n: usize) -> Vec<f64> {
        match self {
            Bound::Scalar(v) => vec![*v; n],
            Bound::PerAxis(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Bound,
    pub hi: Bound,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldSource {
    Constant { value: f64 },
    Expression { expr: String },
    Grid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
    },
}

impl FieldSource {
    /// Samples the source on `grid`; `field` names it in errors and `base`
    /// resolves relative dump paths.
    pub fn sample(&self, grid: &BoxGrid, field: &str, base: &Path) -> Result<ScalarField> {
        let field_err = |msg: String| Error::validation(field, msg);
        let sampled = match self {
            FieldSource::Constant { value } => ScalarField::constant(grid, *value),
            FieldSource::Expression { expr } => {
                let e = Expr::parse(expr).map_err(|err| match err {
                    Error::Parse { position, message } => Error::Parse {
                        position: format!("{field}.expr {position}"),
                        message,
                    },
                    other => other,
                })?;
                if e.arity() > grid.n() {
                    return Err(field_err(format!(
                        "expression uses x{} but n = {}",
                        e.arity(),
                        grid.n()
                    )));
                }
                ScalarField::from_fn(grid, |x| e.eval(x))?
            }
            FieldSource::Grid { values, path } => {
                let values = match (values, path) {
                    (Some(v), None) => v.clone(),
                    (None, Some(p)) => {
                        let dump = read_field(&base.join(p))?;
                        if dump.grid_n != grid.n() || dump.grid_m != grid.m() {
                            return Err(field_err(format!(
                                "dump is {}-dimensional with m = {}, problem grid has n = {}, m = {}",
                                dump.grid_n,
                                dump.grid_m,
                                grid.n(),
                                grid.m()
                            )));
                        }
                        dump.values
                    }
                    _ => return Err(field_err("grid source needs exactly one of values, path".into())),
                };
                if values.len() != grid.len() {
                    return Err(field_err(format!(
                        "expected {} grid values, got {}",
                        grid.len(),
                        values.len()
                    )));
                }
                ScalarField::new(grid.clone(), values)?
            }
        };
        if let Some((node, v)) = sampled
            .values()
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite())
        {
            return Err(field_err(format!("non-finite value {v} at node {node}")));
        }
        Ok(sampled)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    pub beta: f64,
    #[serde(rename = "box")]
    pub domain: BoxSpec,
    pub psi: FieldSource,
    pub phi: FieldSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            position: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn grid(&self) -> Result<BoxGrid> {
        BoxGrid::new(
            self.n,
            self.domain.lo.expand(self.n),
            self.domain.hi.expand(self.n),
            self.domain.m,
        )
    }

    pub fn schedule(&self) -> Result<Schedule> {
        let s = self.schedule.unwrap_or_default();
        s.validate()?;
        Ok(s)
    }

    /// Validates every field and samples ψ, φ; relative dump paths are
    /// resolved against `base`.
    pub fn to_spec(&self, base: &Path) -> Result<ProblemSpec> {
        let op = OperatorSpec::new(self.n, self.k, self.l)?;
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::validation(
                "beta",
                format!("must be a positive constant, got {}", self.beta),
            ));
        }
        let grid = self.grid()?;
        self.schedule()?;
        let psi = self.psi.sample(&grid, "psi", base)?;
        let phi = self.phi.sample(&grid, "phi", base)?;
        ProblemSpec::new(op, self.beta, psi, phi)
    }
}
