//! Run configuration: flat `key = value` text or a JSON object, both
//! canonicalized to the same sorted key set.

use std::collections::BTreeMap;

use serde_json::{Map, Number, Value};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("duplicate key `{0}`")]
    Duplicate(String),
    #[error("missing key `{0}`")]
    Missing(String),
    #[error("key `{key}`: {message}")]
    Value { key: String, message: String },
    #[error("json: {0}")]
    Json(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Convexity,
    DualCheck,
    Barrier,
    Counterexample,
    SumsProbe,
    Catalog,
}

impl Command {
    pub fn parse(s: &str) -> Option<Command> {
        Some(match s {
            "solve" => Command::Solve,
            "convexity" => Command::Convexity,
            "dual-check" => Command::DualCheck,
            "barrier" => Command::Barrier,
            "counterexample" => Command::Counterexample,
            "sums-probe" => Command::SumsProbe,
            "catalog" => Command::Catalog,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Convexity => "convexity",
            Command::DualCheck => "dual-check",
            Command::Barrier => "barrier",
            Command::Counterexample => "counterexample",
            Command::SumsProbe => "sums-probe",
            Command::Catalog => "catalog",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub subequation: Option<String>,
    pub metric: Option<String>,
    /// Defining function `ρ`, domain `{ρ < 0}`.
    pub domain: Option<String>,
    /// `lo:hi` per axis.
    pub bbox: Option<Vec<(f64, f64)>>,
    /// Nodes per axis.
    pub resolution: Option<usize>,
    pub boundary: Option<String>,
    pub lambdas: Option<Vec<f64>>,
    pub tol_iter: Option<f64>,
    pub tol_residual: Option<f64>,
    pub max_sweeps: Option<usize>,
    pub relaxation: Option<f64>,
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub samples: Option<usize>,
    pub x0: Option<Vec<f64>>,
    pub c: Option<f64>,
    pub h: Option<f64>,
    pub epsilons: Option<Vec<f64>>,
    pub u: Option<String>,
    pub v: Option<String>,
}

pub const KEYS: &[&str] = &[
    "boundary",
    "box",
    "c",
    "command",
    "domain",
    "epsilons",
    "h",
    "lambdas",
    "max_sweeps",
    "metric",
    "mode",
    "out",
    "relaxation",
    "resolution",
    "samples",
    "seed",
    "subequation",
    "tol_iter",
    "tol_residual",
    "u",
    "v",
    "x0",
];

const LIST_KEYS: &[&str] = &["epsilons", "lambdas", "x0"];
const NUM_KEYS: &[&str] = &["c", "h", "max_sweeps", "relaxation", "resolution", "samples", "seed", "tol_iter", "tol_residual"];

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            subequation: None,
            metric: None,
            domain: None,
            bbox: None,
            resolution: None,
            boundary: None,
            lambdas: None,
            tol_iter: None,
            tol_residual: None,
            max_sweeps: None,
            relaxation: None,
            mode: None,
            seed: None,
            out: None,
            samples: None,
            x0: None,
            c: None,
            h: None,
            epsilons: None,
            u: None,
            v: None,
        }
    }

    /// Canonical string form of every set key.
    pub fn to_map(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("command", self.command.as_str().to_string());
        let mut put = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k, v);
            }
        };
        put("subequation", self.subequation.clone());
        put("metric", self.metric.clone());
        put("domain", self.domain.clone());
        put("box", self.bbox.as_ref().map(|b| b.iter().map(|(l, h)| format!("{}:{}", num(*l), num(*h))).collect::<Vec<_>>().join(",")));
        put("resolution", self.resolution.map(|v| v.to_string()));
        put("boundary", self.boundary.clone());
        put("lambdas", self.lambdas.as_deref().map(list));
        put("tol_iter", self.tol_iter.map(num));
        put("tol_residual", self.tol_residual.map(num));
        put("max_sweeps", self.max_sweeps.map(|v| v.to_string()));
        put("relaxation", self.relaxation.map(num));
        put("mode", self.mode.clone());
        put("seed", self.seed.map(|v| v.to_string()));
        put("out", self.out.clone());
        put("samples", self.samples.map(|v| v.to_string()));
        put("x0", self.x0.as_deref().map(list));
        put("c", self.c.map(num));
        put("h", self.h.map(num));
        put("epsilons", self.epsilons.as_deref().map(list));
        put("u", self.u.clone());
        put("v", self.v.clone());
        m
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        for k in map.keys() {
            if !KEYS.contains(&k.as_str()) {
                return Err(ConfigError::UnknownKey(k.clone()));
            }
        }
        let get = |k: &str| map.get(k).map(|s| s.trim().to_string());
        let err = |k: &str, m: String| ConfigError::Value { key: k.to_string(), message: m };
        let f64_of = |k: &str| -> Result<Option<f64>, ConfigError> {
            get(k).map(|s| s.parse::<f64>().map_err(|_| err(k, format!("`{s}` is not a number")))).transpose()
        };
        let usize_of = |k: &str| -> Result<Option<usize>, ConfigError> {
            get(k).map(|s| s.parse::<usize>().map_err(|_| err(k, format!("`{s}` is not a nonnegative integer")))).transpose()
        };
        let list_of = |k: &str| -> Result<Option<Vec<f64>>, ConfigError> {
            get(k)
                .map(|s| {
                    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| err(k, format!("`{t}` is not a number")))).collect()
                })
                .transpose()
        };
        let cmd = get("command").ok_or_else(|| ConfigError::Missing("command".into()))?;
        let command = Command::parse(&cmd).ok_or_else(|| err("command", format!("unknown command `{cmd}`")))?;
        let bbox = get("box")
            .map(|s| {
                s.split(',')
                    .map(|axis| {
                        let (l, h) = axis.split_once(':').ok_or_else(|| err("box", format!("expected lo:hi, got `{axis}`")))?;
                        let p = |t: &str| t.trim().parse::<f64>().map_err(|_| err("box", format!("`{t}` is not a number")));
                        Ok((p(l)?, p(h)?))
                    })
                    .collect::<Result<Vec<_>, ConfigError>>()
            })
            .transpose()?;
        let seed = get("seed").map(|s| s.parse::<u64>().map_err(|_| err("seed", format!("`{s}` is not a u64")))).transpose()?;
        Ok(RunConfig {
            command,
            subequation: get("subequation"),
            metric: get("metric"),
            domain: get("domain"),
            bbox,
            resolution: usize_of("resolution")?,
            boundary: get("boundary"),
            lambdas: list_of("lambdas")?,
            tol_iter: f64_of("tol_iter")?,
            tol_residual: f64_of("tol_residual")?,
            max_sweeps: usize_of("max_sweeps")?,
            relaxation: f64_of("relaxation")?,
            mode: get("mode"),
            seed,
            out: get("out"),
            samples: usize_of("samples")?,
            x0: list_of("x0")?,
            c: f64_of("c")?,
            h: f64_of("h")?,
            epsilons: list_of("epsilons")?,
            u: get("u"),
            v: get("v"),
        })
    }

    /// `key = value` lines, `#` comments and blank lines ignored.
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Line { line: i + 1, message: "expected `key = value`".into() })?;
            let k = k.trim().to_string();
            if map.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(ConfigError::Duplicate(k));
            }
        }
        RunConfig::from_map(&map)
    }

    pub fn to_text(&self) -> String {
        self.to_map().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
        let obj = value.as_object().ok_or_else(|| ConfigError::Json("top level must be an object".into()))?;
        let mut map = BTreeMap::new();
        for (k, v) in obj {
            let s = match v {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                Value::Array(items) => items
                    .iter()
                    .map(|it| match it {
                        Value::Number(n) => Ok(n.to_string()),
                        Value::String(s) => Ok(s.clone()),
                        _ => Err(ConfigError::Value { key: k.clone(), message: "list entries must be numbers".into() }),
                    })
                    .collect::<Result<Vec<_>, _>>()?
                    .join(","),
                _ => return Err(ConfigError::Value { key: k.clone(), message: "expected a string, number or list".into() }),
            };
            map.insert(k.clone(), s);
        }
        RunConfig::from_map(&map)
    }

    pub fn to_json(&self) -> String {
        let mut obj = Map::new();
        for (k, v) in self.to_map() {
            let val = if LIST_KEYS.contains(&k) {
                Value::Array(v.split(',').map(|t| json_num(t).unwrap_or_else(|| Value::String(t.to_string()))).collect())
            } else if NUM_KEYS.contains(&k) {
                json_num(&v).unwrap_or(Value::String(v))
            } else {
                Value::String(v)
            };
            obj.insert(k.to_string(), val);
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("config serializes");
        s.push('\n');
        s
    }

    /// JSON when the text starts with `{`, flat text otherwise.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        if text.trim_start().starts_with('{') {
            RunConfig::from_json(text)
        } else {
            RunConfig::from_text(text)
        }
    }
}

fn json_num(t: &str) -> Option<Value> {
    if let Ok(i) = t.parse::<u64>() {
        return Some(Value::Number(i.into()));
    }
    t.parse::<f64>().ok().and_then(Number::from_f64).map(Value::Number)
}
