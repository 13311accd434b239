//! JSON bundle format for experiment inputs.
//!
//! One file can carry an Orlicz function, a weight, a scalar parameter,
//! and any number of named functions (step functions or sequences); the
//! eval command picks pieces out by name. Parse and shape errors surface
//! with the offending field so a malformed bundle is diagnosable.

use olk_core::{OrliczFn64, Seq64, StepFn64, Weight64};
use serde::Deserialize;

use crate::CliError;

/// Top-level bundle. Every field is optional; each functional states which
/// pieces it needs and errors by name when one is missing.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Bundle {
    pub phi: Option<PhiSpec>,
    pub weight: Option<WeightSpec>,
    #[serde(default)]
    pub functions: Vec<FnSpec>,
    /// Scalar argument for the fundamental functions, `dist`, `conjugate`.
    pub t: Option<f64>,
    /// Solver tolerance override carried with the bundle.
    pub tol: Option<f64>,
    /// Explicit `(s1, s2, t1, t2)` point for the exchange suite.
    pub exchange: Option<[f64; 4]>,
}

/// Orlicz function constructors reachable from JSON.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhiSpec {
    /// `u^p`, or `u^p / p` when `normalized` is set.
    Power {
        p: f64,
        #[serde(default)]
        normalized: bool,
    },
    ScaledPower { p: f64, scale: f64 },
    Expm1,
    Pwl { points: Vec<(f64, f64)> },
}

/// Depth the catalog weights use when a bundle leaves `kmax` out.
fn default_kmax() -> usize {
    8
}

/// Weight constructors reachable from JSON.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    #[serde(alias = "constant")]
    Const { c: f64 },
    Power { gamma: f64 },
    Step {
        #[serde(alias = "breakpoints")]
        breaks: Vec<Endpoint>,
        values: Vec<f64>,
    },
    Example314 {
        #[serde(default = "default_kmax")]
        kmax: usize,
    },
    Example415 {
        #[serde(default = "default_kmax")]
        kmax: usize,
    },
}

/// One breakpoint coordinate: a number, or the token `"inf"` for an
/// unbounded final cell.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Endpoint {
    Num(f64),
    Token(EndpointToken),
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub enum EndpointToken {
    #[serde(rename = "inf")]
    Inf,
}

impl Endpoint {
    fn as_f64(self) -> f64 {
        match self {
            Endpoint::Num(x) => x,
            Endpoint::Token(EndpointToken::Inf) => f64::INFINITY,
        }
    }
}

fn endpoint_f64s(breaks: &[Endpoint]) -> Vec<f64> {
    breaks.iter().map(|b| b.as_f64()).collect()
}

/// A named function: either a sequence (`seq`) or a step function
/// (`breakpoints` + `values`, with `breaks` accepted as a short spelling),
/// not both.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FnSpec {
    pub name: Option<String>,
    pub seq: Option<Vec<f64>>,
    #[serde(alias = "breakpoints")]
    pub breaks: Option<Vec<Endpoint>>,
    pub values: Option<Vec<f64>>,
}

/// A function materialized from a bundle entry.
#[derive(Debug, Clone)]
pub enum Fun {
    Seq(Seq64),
    Step(StepFn64),
}

impl Fun {
    /// Step-function view: sequences land on unit cells.
    pub fn to_step(&self) -> StepFn64 {
        match self {
            Fun::Seq(x) => x.to_step(),
            Fun::Step(f) => f.clone(),
        }
    }
}

fn user(msg: String) -> CliError {
    CliError::User(msg)
}

impl Bundle {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            user(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
        })
    }

    pub fn phi(&self) -> Result<OrliczFn64, CliError> {
        let spec = self
            .phi
            .as_ref()
            .ok_or_else(|| user("bundle is missing the \"phi\" field".into()))?;
        let phi = match spec {
            PhiSpec::Power { p, normalized: false } => OrliczFn64::power(*p),
            PhiSpec::Power { p, normalized: true } => OrliczFn64::scaled_power(*p, 1.0 / *p),
            PhiSpec::ScaledPower { p, scale } => OrliczFn64::scaled_power(*p, *scale),
            PhiSpec::Expm1 => Ok(OrliczFn64::expm1()),
            PhiSpec::Pwl { points } => OrliczFn64::pwl(points.clone()),
        };
        phi.map_err(|e| user(format!("bundle field \"phi\": {e}")))
    }

    pub fn weight(&self) -> Result<Weight64, CliError> {
        let spec = self
            .weight
            .as_ref()
            .ok_or_else(|| user("bundle is missing the \"weight\" field".into()))?;
        let w = match spec {
            WeightSpec::Const { c } => Weight64::constant(*c),
            WeightSpec::Power { gamma } => Weight64::power(*gamma),
            WeightSpec::Step { breaks, values } => {
                StepFn64::new(endpoint_f64s(breaks), values.clone()).and_then(Weight64::step)
            }
            WeightSpec::Example314 { kmax } => Weight64::example314(*kmax),
            WeightSpec::Example415 { kmax } => Weight64::example415(*kmax),
        };
        w.map_err(|e| user(format!("bundle field \"weight\": {e}")))
    }

    /// Function lookup by name. The primary input (no explicit name given)
    /// falls back to an entry named `f`, then `x`, then the first entry.
    pub fn function(&self, name: Option<&str>) -> Result<Fun, CliError> {
        let spec = match name {
            Some(n) => self
                .functions
                .iter()
                .find(|s| s.name.as_deref() == Some(n))
                .ok_or_else(|| user(format!("bundle has no function named \"{n}\"")))?,
            None => self
                .functions
                .iter()
                .find(|s| matches!(s.name.as_deref(), Some("f") | Some("x")))
                .or_else(|| self.functions.first())
                .ok_or_else(|| user("bundle has no functions".into()))?,
        };
        materialize(spec)
    }

    /// Optional lookup that distinguishes "absent" from "malformed".
    pub fn function_opt(&self, name: &str) -> Result<Option<Fun>, CliError> {
        match self.functions.iter().find(|s| s.name.as_deref() == Some(name)) {
            Some(spec) => materialize(spec).map(Some),
            None => Ok(None),
        }
    }
}

fn materialize(spec: &FnSpec) -> Result<Fun, CliError> {
    let label = spec.name.as_deref().unwrap_or("<unnamed>");
    match (&spec.seq, &spec.breaks, &spec.values) {
        (Some(entries), None, None) => Seq64::new(entries.clone())
            .map(Fun::Seq)
            .map_err(|e| user(format!("function \"{label}\": {e}"))),
        (None, Some(b), Some(v)) => StepFn64::new(endpoint_f64s(b), v.clone())
            .map(Fun::Step)
            .map_err(|e| user(format!("function \"{label}\": {e}"))),
        _ => Err(user(format!(
            "function \"{label}\" needs either \"seq\" or \"breaks\" + \"values\""
        ))),
    }
}
