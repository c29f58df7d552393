//! Run configuration: parsing, defaults, validation and hashing.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::contexts::CategoryOptions;
use crate::error::{Error, Result};
use crate::interp::Delta0Rule;
use crate::linalg::{make_oscillator, ComplexMatrix, HermitianOperator, Tolerances};
use crate::twogroup::CategorySpec;

/// A matrix entry: a JSON number or a decimal string (for bit-exact
/// exchange).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    fn value(&self) -> std::result::Result<f64, String> {
        match self {
            Self::Float(x) => Ok(*x),
            Self::Text(s) => s.trim().parse().map_err(|_| format!("{s:?} is not a number")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub re: Vec<Vec<Number>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<Number>>>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorSpec {
    pub builtin: BuiltinKind,
    #[serde(rename = "N")]
    pub levels: usize,
    #[serde(default = "one")]
    pub m: f64,
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default = "one")]
    pub hbar: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinKind {
    Oscillator,
}

/// Which operators of a custom system play momentum and position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    #[serde(default = "default_p")]
    pub p: String,
    #[serde(default = "default_x")]
    pub x: String,
    #[serde(default = "one")]
    pub m: f64,
    #[serde(default = "one")]
    pub omega: f64,
}

fn default_p() -> String {
    "P".into()
}

fn default_x() -> String {
    "X".into()
}

impl Default for PairSpec {
    fn default() -> Self {
        Self {
            p: default_p(),
            x: default_x(),
            m: 1.0,
            omega: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSpec {
    pub dim: usize,
    pub operators: BTreeMap<String, MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SystemSpec {
    Oscillator(OscillatorSpec),
    Custom(CustomSpec),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoGroupSpec {
    /// Additional finite categories, by name.
    pub categories: BTreeMap<String, CategorySpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub tolerances: Tolerances,
    pub category: CategoryOptions,
    pub delta0_rule: Delta0Rule,
    pub seed: u64,
    pub twogroup: TwoGroupSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    system: serde_json::Value,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    category: CategoryOptions,
    #[serde(default)]
    delta0_rule: Delta0Rule,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    twogroup: TwoGroupSpec,
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } | Segment::Enum { variant: key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Unknown => out.push_str("/?"),
        }
    }
    out
}

fn typed<T: DeserializeOwned>(value: serde_json::Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let pointer = format!("{prefix}{}", pointer_of(e.path()));
        schema(pointer, e.into_inner().to_string())
    })
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let raw: RawConfig = typed(value, "")?;
        let system = if raw.system.get("builtin").is_some() {
            SystemSpec::Oscillator(typed(raw.system, "/system")?)
        } else {
            SystemSpec::Custom(typed(raw.system, "/system")?)
        };
        let config = Self {
            system,
            tolerances: raw.tolerances,
            category: raw.category,
            delta0_rule: raw.delta0_rule,
            seed: raw.seed,
            twogroup: raw.twogroup,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<()> {
        self.tolerances
            .validate()
            .map_err(|e| schema("/tolerances", e.to_string()))?;
        if self.category.max_contexts == 0 {
            return Err(schema("/category/max_contexts", "must be positive"));
        }
        match &self.system {
            SystemSpec::Oscillator(o) => {
                if o.levels < 2 {
                    return Err(schema("/system/N", "at least two levels are required"));
                }
                for (name, v) in [("m", o.m), ("omega", o.omega), ("hbar", o.hbar)] {
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(schema(format!("/system/{name}"), "must be positive"));
                    }
                }
            }
            SystemSpec::Custom(c) => {
                if c.dim == 0 {
                    return Err(schema("/system/dim", "must be positive"));
                }
                if c.operators.is_empty() {
                    return Err(schema("/system/operators", "at least one operator is required"));
                }
                if let Some(pair) = &c.pair {
                    for (field, label) in [("p", &pair.p), ("x", &pair.x)] {
                        if !c.operators.contains_key(label) {
                            return Err(schema(
                                format!("/system/pair/{field}"),
                                format!("no operator named {label}"),
                            ));
                        }
                    }
                    for (name, v) in [("m", pair.m), ("omega", pair.omega)] {
                        if !(v > 0.0 && v.is_finite()) {
                            return Err(schema(format!("/system/pair/{name}"), "must be positive"));
                        }
                    }
                }
            }
        }
        for (name, spec) in &self.twogroup.categories {
            crate::twogroup::FiniteCategory::from_spec(spec)
                .map_err(|e| schema(format!("/twogroup/categories/{name}"), e.to_string()))?;
        }
        self.system()?;
        Ok(())
    }

    /// SHA-256 of the canonical (key-sorted, compact) JSON form.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let bytes = serde_json::to_vec(&value).expect("value serializes");
        crate::contexts::hex_digest(&bytes)
    }

    /// The operators of the system, in label order, with the momentum/position
    /// designation if there is one.
    pub fn system(&self) -> Result<System> {
        match &self.system {
            SystemSpec::Oscillator(o) => {
                let osc = make_oscillator(o.levels, o.m, o.omega, o.hbar)?;
                Ok(System {
                    dim: o.levels,
                    operators: vec![osc.x.clone(), osc.p.clone(), osc.h.clone()],
                    pair: Some(PairSpec {
                        p: "P".into(),
                        x: "X".into(),
                        m: o.m,
                        omega: o.omega,
                    }),
                    builtin: true,
                })
            }
            SystemSpec::Custom(c) => {
                let mut operators = Vec::with_capacity(c.operators.len());
                for (label, spec) in &c.operators {
                    let pointer = format!("/system/operators/{label}");
                    let grid = |rows: &[Vec<Number>]| -> Result<Vec<Vec<f64>>> {
                        rows.iter()
                            .map(|r| r.iter().map(|x| x.value().map_err(|m| schema(&pointer, m))).collect())
                            .collect()
                    };
                    let re = grid(&spec.re)?;
                    let im = spec.im.as_deref().map(grid).transpose()?;
                    let m =
                        ComplexMatrix::from_parts(&re, im.as_deref()).map_err(|e| schema(&pointer, e.to_string()))?;
                    if m.dim() != c.dim {
                        return Err(schema(
                            &pointer,
                            format!("operator {label} has dimension {} instead of {}", m.dim(), c.dim),
                        ));
                    }
                    let op = HermitianOperator::labelled(m, label.clone(), &self.tolerances)
                        .map_err(|e| schema(&pointer, e.to_string()))?;
                    operators.push(op);
                }
                let pair = c.pair.clone().or_else(|| {
                    (c.operators.contains_key("P") && c.operators.contains_key("X")).then(PairSpec::default)
                });
                Ok(System {
                    dim: c.dim,
                    operators,
                    pair,
                    builtin: false,
                })
            }
        }
    }
}

/// Operators ready for analysis.
#[derive(Clone, Debug)]
pub struct System {
    pub dim: usize,
    pub operators: Vec<HermitianOperator>,
    pub pair: Option<PairSpec>,
    pub builtin: bool,
}

impl System {
    pub fn operator(&self, label: &str) -> Option<&HermitianOperator> {
        self.operators.iter().find(|o| o.label() == Some(label))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_oscillator() {
        let c = RunConfig::from_json(r#"{"system":{"builtin":"oscillator","N":3}}"#).unwrap();
        assert_eq!(c.tolerances, Tolerances::default());
        assert_eq!(c.delta0_rule, Delta0Rule::JointAtom);
        assert_eq!(c.seed, 0);
        let SystemSpec::Oscillator(o) = &c.system else { panic!() };
        assert_eq!((o.levels, o.m, o.omega, o.hbar), (3, 1.0, 1.0, 1.0));
        assert_eq!(c.system().unwrap().operators.len(), 3);
    }

    #[test]
    fn qubit_operators() {
        let c = RunConfig::from_json(
            r#"{"system":{"dim":2,"operators":{
                "Z":{"re":[[1,0],[0,-1]]},
                "X":{"re":[["1.0000000000000000e+00", 0],[1,0]], "im":[[0,0],[0,0]]}}}}"#,
        );
        assert!(
            matches!(c, Err(Error::Schema { ref pointer, ref message }) if pointer == "/system/operators/X" && message.contains("X"))
        );
        let c = RunConfig::from_json(
            r#"{"system":{"dim":2,"operators":{"Z":{"re":[[1,0],[0,-1]]},"X":{"re":[[0,1],[1,0]]}}}}"#,
        )
        .unwrap();
        let s = c.system().unwrap();
        assert_eq!(s.operators.len(), 2);
        assert!(s.pair.is_none());
    }

    #[test]
    fn errors_carry_pointers() {
        assert!(matches!(RunConfig::from_json("{"), Err(Error::Parse(_))));
        let e = RunConfig::from_json(r#"{"system":{"builtin":"oscillator","N":3},"tolerances":{"num":"x"}}"#);
        assert!(matches!(e, Err(Error::Schema { pointer, .. }) if pointer == "/tolerances/num"));
        let e = RunConfig::from_json(r#"{"system":{"builtin":"oscillator","N":1}}"#);
        assert!(matches!(e, Err(Error::Schema { pointer, .. }) if pointer == "/system/N"));
        let e = RunConfig::from_json(r#"{"system":{"builtin":"oscillator","N":3},"extra":1}"#);
        assert!(matches!(e, Err(Error::Schema { .. })));
    }

    #[test]
    fn hash_is_stable() {
        let a = RunConfig::from_json(r#"{"system":{"builtin":"oscillator","N":3}}"#).unwrap();
        let b = RunConfig::from_json(r#"{"seed":0,"system":{"N":3,"builtin":"oscillator","m":1}}"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::from_json(r#"{"system":{"builtin":"oscillator","N":3},"seed":1}"#).unwrap();
        assert_ne!(a.hash(), c.hash());
    }
}
