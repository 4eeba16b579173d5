//! Problem files: JSON documents describing a perturbed Lagrangian, candidate
//! generators, an optional solver ansatz and an optional simulation setup.

use std::collections::BTreeMap;
use std::path::Path;

use noether_core::expr::parse;
use noether_core::{AnsatzSpec, ApproximateGenerator, Context, Expr, GeneratorOrder, Metric, ParamValue, PerturbedLagrangian};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    pub dimension: usize,
    pub coordinates: Vec<String>,
    #[serde(default = "default_time")]
    pub time: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
    pub metric: Vec<Vec<String>>,
    #[serde(default)]
    pub h: Option<Vec<Vec<String>>>,
    #[serde(rename = "V0")]
    pub v0: String,
    #[serde(rename = "V1", default = "default_zero")]
    pub v1: String,
    pub order: usize,
    #[serde(default)]
    pub candidates: Vec<CandidateFile>,
    #[serde(default)]
    pub ansatz: Option<AnsatzFile>,
    #[serde(default)]
    pub simulation: Option<SimulationFile>,
}

fn default_time() -> String {
    "t".into()
}

fn default_zero() -> String {
    "0".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateFile {
    pub name: String,
    pub xi: Vec<String>,
    pub eta: Vec<Vec<String>>,
    #[serde(default)]
    pub f: Option<Vec<String>>,
    /// Expected leading term of the first integral, with ε written `eps`.
    #[serde(default)]
    pub integral: Option<String>,
    #[serde(default)]
    pub quarantine: bool,
    #[serde(default)]
    pub source: Option<String>,
    #[serde(default)]
    pub note: Option<String>,
    /// The listing this candidate corrects or replaces, kept verbatim.
    #[serde(default)]
    pub original: Option<Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzFile {
    pub time_basis: Vec<String>,
    pub spatial_degree: u32,
    #[serde(default)]
    pub inverse_powers: Vec<String>,
    /// Parameter values substituted before solving.
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationFile {
    pub initial: Vec<f64>,
    #[serde(default)]
    pub t_start: f64,
    #[serde(default)]
    pub t_end: Option<f64>,
    pub dt: f64,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    /// Candidate names whose integrals are tracked; all verified ones when absent.
    #[serde(default)]
    pub integrals: Option<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub name: String,
    pub generator: Option<ApproximateGenerator>,
    pub integral: Option<Expr>,
    pub quarantine: bool,
    pub source: Option<String>,
    pub note: Option<String>,
    pub original: Option<Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuarantineEntry {
    pub name: String,
    pub source: Option<String>,
    pub note: Option<String>,
    pub original: Option<Value>,
}

impl Candidate {
    pub fn quarantine_entry(&self) -> QuarantineEntry {
        QuarantineEntry {
            name: self.name.clone(),
            source: self.source.clone(),
            note: self.note.clone(),
            original: self.original.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub lagrangian: PerturbedLagrangian,
    pub candidates: Vec<Candidate>,
    pub ansatz: Option<AnsatzSpec>,
    pub simulation: Option<SimulationFile>,
    pub warnings: Vec<String>,
}

fn shape(path: impl Into<String>, msg: impl std::fmt::Display) -> CliError {
    CliError::Shape {
        path: path.into(),
        message: msg.to_string(),
    }
}

/// `"symbolic"`, an integer, a decimal or a `"p/q"` string.
pub fn param_value(path: &str, v: &Value) -> Result<ParamValue, CliError> {
    match v {
        Value::String(s) if s == "symbolic" => Ok(ParamValue::Symbolic),
        Value::String(s) => noether_core::rational::parse(s)
            .map(ParamValue::Rational)
            .ok_or_else(|| shape(path, format!("`{s}` is neither a number nor \"symbolic\""))),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(ParamValue::Rational(noether_core::rational::int(i)))
            } else {
                n.as_f64().map(ParamValue::Float).ok_or_else(|| shape(path, "number out of range"))
            }
        }
        _ => Err(shape(path, "expected a number or \"symbolic\"")),
    }
}

/// Parses `NAME=VALUE` from the command line.
pub fn parse_assignment(text: &str) -> Result<(String, ParamValue), CliError> {
    let (name, value) = text.split_once('=').ok_or_else(|| shape("--set", format!("`{text}` is not NAME=VALUE")))?;
    let value = value.trim();
    let v = if value == "symbolic" {
        ParamValue::Symbolic
    } else if let Some(r) = noether_core::rational::parse(value) {
        ParamValue::Rational(r)
    } else {
        return Err(shape("--set", format!("`{value}` is not a number")));
    };
    Ok((name.trim().to_string(), v))
}

pub fn read(path: &Path) -> Result<ProblemFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.display().to_string(),
        source,
    })
}

fn located(path: impl Into<String>) -> impl FnOnce(noether_core::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Located { path, source }
}

fn expr(path: &str, text: &str, ctx: &Context) -> Result<Expr, CliError> {
    parse(text, ctx).map_err(located(path))
}

fn tensor(path: &str, rows: &[Vec<String>], ctx: &Context) -> Result<Metric, CliError> {
    let mut parsed = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut r = Vec::new();
        for (j, e) in row.iter().enumerate() {
            r.push(expr(&format!("{path}[{i}][{j}]"), e, ctx)?);
        }
        parsed.push(r);
    }
    Metric::new(parsed, ctx).map_err(located(path))
}

impl ProblemFile {
    /// Builds the problem with `overrides` applied on top of the declared parameters.
    pub fn build(&self, fallback_name: &str, overrides: &[(String, ParamValue)]) -> Result<Problem, CliError> {
        let n = self.dimension;
        if self.coordinates.len() != n {
            return Err(shape("coordinates", format!("{} names for dimension {n}", self.coordinates.len())));
        }
        if self.order == 0 {
            return Err(shape("order", "order must be at least 1"));
        }
        let mut params = BTreeMap::new();
        for (k, v) in &self.parameters {
            params.insert(k.clone(), param_value(&format!("parameters.{k}"), v)?);
        }
        for (k, v) in overrides {
            if !params.contains_key(k) {
                return Err(shape("--set", format!("unknown parameter `{k}`")));
            }
            params.insert(k.clone(), v.clone());
        }
        let ctx = Context::new(self.coordinates.clone(), self.time.clone(), params).map_err(located("coordinates"))?;
        if self.metric.len() != n {
            return Err(shape("metric", format!("{} rows for dimension {n}", self.metric.len())));
        }
        let g = tensor("metric", &self.metric, &ctx)?;
        let h = match &self.h {
            Some(rows) => tensor("h", rows, &ctx)?,
            None => Metric::zero(n),
        };
        let v0 = expr("V0", &self.v0, &ctx)?;
        let v1 = expr("V1", &self.v1, &ctx)?;
        let mut warnings: Vec<String> = g.warnings().iter().map(|w| format!("metric: {w}")).collect();
        let l = PerturbedLagrangian::new(ctx.clone(), g, h, v0, v1, self.order).map_err(located("V0"))?;
        let lctx = l.ctx().clone();

        let mut candidates = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for (k, c) in self.candidates.iter().enumerate() {
            let base = format!("candidates[{k}]");
            if !seen.insert(c.name.clone()) {
                return Err(shape(&base, format!("duplicate candidate name `{}`", c.name)));
            }
            let generator = if c.quarantine { None } else { Some(candidate(&base, c, &lctx, n, self.order)?) };
            let integral = match (&c.integral, c.quarantine) {
                (Some(text), false) => Some(parse(text, &lctx).map_err(located(format!("{base}.integral")))?),
                _ => None,
            };
            if let Some(g) = &generator {
                g.check_shape(&l).map_err(located(base.clone()))?;
            }
            candidates.push(Candidate {
                name: c.name.clone(),
                generator,
                integral,
                quarantine: c.quarantine,
                source: c.source.clone(),
                note: c.note.clone(),
                original: c.original.clone(),
            });
        }

        let ansatz = match &self.ansatz {
            Some(a) => {
                let mut basis = Vec::new();
                for (k, e) in a.time_basis.iter().enumerate() {
                    basis.push(expr(&format!("ansatz.time_basis[{k}]"), e, &lctx)?);
                }
                let mut spec = AnsatzSpec::new(basis, a.spatial_degree);
                for (k, e) in a.inverse_powers.iter().enumerate() {
                    spec.inverse_powers.push(expr(&format!("ansatz.inverse_powers[{k}]"), e, &lctx)?);
                }
                Some(spec)
            }
            None => None,
        };
        if let Some(s) = &self.simulation {
            if s.initial.len() != 2 * n {
                return Err(shape("simulation.initial", format!("{} entries, expected {}", s.initial.len(), 2 * n)));
            }
        }
        if l.v1().is_zero_literal() && l.h_is_zero() {
            warnings.push("the perturbation vanishes; every order above zero decouples".into());
        }
        Ok(Problem {
            name: self.name.clone().unwrap_or_else(|| fallback_name.to_string()),
            lagrangian: l,
            candidates,
            ansatz,
            simulation: self.simulation.clone(),
            warnings,
        })
    }

    /// Parameter values declared by the ansatz block.
    pub fn ansatz_parameters(&self) -> Result<Vec<(String, ParamValue)>, CliError> {
        let Some(a) = &self.ansatz else { return Ok(Vec::new()) };
        a.parameters
            .iter()
            .map(|(k, v)| Ok((k.clone(), param_value(&format!("ansatz.parameters.{k}"), v)?)))
            .collect()
    }
}

fn candidate(base: &str, c: &CandidateFile, ctx: &Context, n: usize, order: usize) -> Result<ApproximateGenerator, CliError> {
    if c.xi.len() != order + 1 {
        return Err(shape(format!("{base}.xi"), format!("{} entries, expected {}", c.xi.len(), order + 1)));
    }
    if c.eta.len() != order + 1 {
        return Err(shape(format!("{base}.eta"), format!("{} entries, expected {}", c.eta.len(), order + 1)));
    }
    let mut orders = Vec::new();
    for a in 0..=order {
        let xi = expr(&format!("{base}.xi[{a}]"), &c.xi[a], ctx)?;
        if c.eta[a].len() != n {
            return Err(shape(format!("{base}.eta[{a}]"), format!("{} components, expected {n}", c.eta[a].len())));
        }
        let eta = c.eta[a]
            .iter()
            .enumerate()
            .map(|(i, e)| expr(&format!("{base}.eta[{a}][{i}]"), e, ctx))
            .collect::<Result<_, _>>()?;
        orders.push(GeneratorOrder { xi, eta });
    }
    let boundary = match &c.f {
        Some(f) => {
            if f.len() != order + 1 {
                return Err(shape(format!("{base}.f"), format!("{} entries, expected {}", f.len(), order + 1)));
            }
            Some(
                f.iter()
                    .enumerate()
                    .map(|(a, e)| expr(&format!("{base}.f[{a}]"), e, ctx))
                    .collect::<Result<_, _>>()?,
            )
        }
        None => None,
    };
    Ok(ApproximateGenerator::new(c.name.clone(), orders, boundary))
}

pub fn load(path: &Path, overrides: &[(String, ParamValue)]) -> Result<(ProblemFile, Problem), CliError> {
    let file = read(path)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("problem").to_string();
    let problem = file.build(&stem, overrides)?;
    Ok((file, problem))
}
