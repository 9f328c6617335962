//! Scenario files: TOML with a top-level `kind`, an optional `seed` and
//! `output_dir`, and one section named after the kind.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use toml::{Table, Value};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Finite,
    Averaging,
    Continuum,
    Schrodinger,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::Finite, Kind::Averaging, Kind::Continuum, Kind::Schrodinger];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Finite => "finite",
            Kind::Averaging => "averaging",
            Kind::Continuum => "continuum",
            Kind::Schrodinger => "schrodinger",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown kind `{s}` (expected finite, averaging, continuum or schrodinger)"))
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: Kind,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Directory of the scenario file, for resolving relative paths.
    pub base_dir: PathBuf,
    params: Table,
    tolerances: Table,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("<file>", format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base_dir: PathBuf) -> Result<Self, ConfigError> {
        let root: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::new("<syntax>", e.message().to_string()))?;
        let kind = match root.get("kind") {
            Some(Value::String(s)) => s.parse::<Kind>().map_err(|e| ConfigError::new("kind", e))?,
            Some(_) => return Err(ConfigError::new("kind", "must be a string")),
            None => return Err(ConfigError::new("kind", "missing")),
        };
        let seed = match root.get("seed") {
            None => 0,
            Some(Value::Integer(i)) if *i >= 0 => *i as u64,
            Some(_) => return Err(ConfigError::new("seed", "must be a non-negative integer")),
        };
        let output_dir = match root.get("output_dir") {
            None => PathBuf::from("xikit-out"),
            Some(Value::String(s)) => PathBuf::from(s),
            Some(_) => return Err(ConfigError::new("output_dir", "must be a string")),
        };
        let params = match root.get(kind.name()) {
            None => Table::new(),
            Some(Value::Table(t)) => t.clone(),
            Some(_) => return Err(ConfigError::new(kind.name(), "must be a table")),
        };
        let tolerances = match root.get("tolerances") {
            None => Table::new(),
            Some(Value::Table(t)) => t.clone(),
            Some(_) => return Err(ConfigError::new("tolerances", "must be a table")),
        };
        for key in root.keys() {
            if !matches!(key.as_str(), "kind" | "seed" | "output_dir" | "tolerances") && key != kind.name() {
                return Err(ConfigError::new(key, format!("unexpected top-level key for kind `{kind}`")));
            }
        }
        Ok(Self { kind, seed, output_dir, base_dir, params, tolerances })
    }

    fn section_key(&self, key: &str) -> String {
        format!("{}.{key}", self.kind)
    }

    /// Looks up a dotted key inside the kind's section.
    fn lookup(&self, key: &str) -> Option<&Value> {
        let mut parts = key.split('.');
        let mut cur = self.params.get(parts.next()?)?;
        for p in parts {
            cur = cur.as_table()?.get(p)?;
        }
        Some(cur)
    }

    pub fn has(&self, key: &str) -> bool {
        self.lookup(key).is_some()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.lookup(key) {
            None => Ok(default),
            Some(Value::Float(x)) if x.is_finite() => Ok(*x),
            Some(Value::Integer(i)) => Ok(*i as f64),
            Some(_) => Err(ConfigError::new(self.section_key(key), "must be a finite number")),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.lookup(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(_) => Err(ConfigError::new(self.section_key(key), "must be a non-negative integer")),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.lookup(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(*b),
            Some(_) => Err(ConfigError::new(self.section_key(key), "must be a boolean")),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> Result<&'a str, ConfigError> {
        match self.lookup(key) {
            None => Ok(default),
            Some(Value::String(s)) => Ok(s),
            Some(_) => Err(ConfigError::new(self.section_key(key), "must be a string")),
        }
    }

    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.lookup(key) {
            None => Ok(default.to_vec()),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Float(x) if x.is_finite() => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    _ => Err(ConfigError::new(self.section_key(key), "must be a list of numbers")),
                })
                .collect(),
            Some(_) => Err(ConfigError::new(self.section_key(key), "must be a list of numbers")),
        }
    }

    /// Checks `lo < hi` for the pair of keys `<prefix>.a`, `<prefix>.b`.
    pub fn interval_or(&self, prefix: &str, default: (f64, f64)) -> Result<(f64, f64), ConfigError> {
        let a = self.f64_or(&format!("{prefix}.a"), default.0)?;
        let b = self.f64_or(&format!("{prefix}.b"), default.1)?;
        if !(a < b) {
            return Err(ConfigError::new(self.section_key(&format!("{prefix}.a")), format!("must be below {prefix}.b ({a} >= {b})")));
        }
        Ok((a, b))
    }

    pub fn positive(&self, key: &str, value: f64) -> Result<f64, ConfigError> {
        if value > 0.0 {
            Ok(value)
        } else {
            Err(ConfigError::new(self.section_key(key), "must be positive"))
        }
    }

    pub fn at_least(&self, key: &str, value: usize, min: usize) -> Result<usize, ConfigError> {
        if value >= min {
            Ok(value)
        } else {
            Err(ConfigError::new(self.section_key(key), format!("must be at least {min}")))
        }
    }

    pub fn invalid(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::new(self.section_key(key), reason)
    }

    /// Tolerance override from `[tolerances]`, else the default.
    pub fn tolerance(&self, check: &str, default: f64) -> Result<f64, ConfigError> {
        match self.tolerances.get(check) {
            None => Ok(default),
            Some(Value::Float(x)) if *x > 0.0 => Ok(*x),
            Some(Value::Integer(i)) if *i > 0 => Ok(*i as f64),
            Some(_) => Err(ConfigError::new(format!("tolerances.{check}"), "must be a positive number")),
        }
    }

    pub fn potential_value(&self, key: &str) -> Option<&Value> {
        self.lookup(key)
    }
}
