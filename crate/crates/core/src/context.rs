//! Symbol tables: coordinates, their velocities, time and named parameters.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name reserved for the formal perturbation parameter in numeric mode.
pub const EPSILON: &str = "eps";
/// Built-in constant recognised by the parser and the evaluator.
pub const PI: &str = "pi";

const FUNCTION_NAMES: [&str; 4] = ["sin", "cos", "exp", "ln"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParamValue {
    Rational(#[serde(with = "crate::rational::serde_rational")] BigRational),
    Float(f64),
    Symbolic,
}

impl ParamValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Rational(r) => Some(crate::rational::to_f64(r)),
            ParamValue::Float(f) => Some(*f),
            ParamValue::Symbolic => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    coordinates: Vec<String>,
    velocities: Vec<String>,
    time: String,
    parameters: BTreeMap<String, ParamValue>,
}

impl Context {
    pub fn new<S: Into<String>>(
        coordinates: Vec<S>,
        time: impl Into<String>,
        parameters: BTreeMap<String, ParamValue>,
    ) -> Result<Self> {
        let coordinates: Vec<String> = coordinates.into_iter().map(Into::into).collect();
        if coordinates.is_empty() {
            return Err(Error::InvalidContext("dimension must be at least 1".into()));
        }
        let velocities = coordinates.iter().map(|c| format!("{c}dot")).collect::<Vec<_>>();
        let time = time.into();

        let mut seen = BTreeSet::new();
        let names = coordinates
            .iter()
            .chain(velocities.iter())
            .chain(std::iter::once(&time))
            .chain(parameters.keys());
        for name in names {
            if !is_identifier(name) {
                return Err(Error::InvalidContext(format!("`{name}` is not an identifier")));
            }
            if FUNCTION_NAMES.contains(&name.as_str()) || name == EPSILON || name == PI {
                return Err(Error::InvalidContext(format!("`{name}` is reserved")));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::InvalidContext(format!("duplicate identifier `{name}`")));
            }
        }
        Ok(Context {
            coordinates,
            velocities,
            time,
            parameters,
        })
    }

    /// Context with coordinates `coords`, time `t` and no parameters.
    pub fn simple(coords: &[&str]) -> Self {
        Context::new(coords.to_vec(), "t", BTreeMap::new()).expect("valid simple context")
    }

    pub fn dimension(&self) -> usize {
        self.coordinates.len()
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coordinates
    }

    pub fn velocities(&self) -> &[String] {
        &self.velocities
    }

    pub fn time(&self) -> &str {
        &self.time
    }

    pub fn parameters(&self) -> &BTreeMap<String, ParamValue> {
        &self.parameters
    }

    pub fn with_parameter(mut self, name: &str, value: ParamValue) -> Result<Self> {
        if !self.parameters.contains_key(name) {
            return Err(Error::InvalidContext(format!("no parameter named `{name}`")));
        }
        self.parameters.insert(name.to_string(), value);
        Ok(self)
    }

    pub fn is_coordinate(&self, name: &str) -> bool {
        self.coordinates.iter().any(|c| c == name)
    }

    pub fn is_velocity(&self, name: &str) -> bool {
        self.velocities.iter().any(|c| c == name)
    }

    pub fn symbolic_parameters(&self) -> Vec<String> {
        self.parameters
            .iter()
            .filter(|(_, v)| matches!(v, ParamValue::Symbolic))
            .map(|(k, _)| k.clone())
            .collect()
    }

    /// Exact values of rational parameters, for substitution before symbolic work.
    pub fn rational_bindings(&self) -> BTreeMap<String, crate::expr::Expr> {
        self.parameters
            .iter()
            .filter_map(|(k, v)| match v {
                ParamValue::Rational(r) => Some((k.clone(), crate::expr::Expr::num(r.clone()))),
                _ => None,
            })
            .collect()
    }

    /// Numeric values of all parameters; fails if any is symbolic.
    pub fn numeric_values(&self) -> Result<BTreeMap<String, f64>> {
        self.parameters
            .iter()
            .map(|(k, v)| {
                v.as_f64()
                    .map(|f| (k.clone(), f))
                    .ok_or_else(|| Error::Unbound(format!("parameter `{k}` is symbolic; a numeric value is required")))
            })
            .collect()
    }

    /// Whether `name` resolves in this context (including the reserved constants).
    pub fn resolves(&self, name: &str) -> bool {
        name == self.time
            || name == PI
            || name == EPSILON
            || self.is_coordinate(name)
            || self.is_velocity(name)
            || self.parameters.contains_key(name)
    }

    /// Spatial arguments (time first) on which generator components may depend.
    pub fn configuration_symbols(&self) -> Vec<String> {
        std::iter::once(self.time.clone())
            .chain(self.coordinates.iter().cloned())
            .collect()
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
