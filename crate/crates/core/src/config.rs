//! Run configuration: a TOML file flattened into dotted keys
//! (`state.beta_C`, `sweep.axis1.name`, ...) plus `key=value` overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Str(String),
    Bool(bool),
}

impl Value {
    /// Parses an override value: number, then boolean, else string.
    pub fn parse(s: &str) -> Value {
        let s = s.trim();
        if let Ok(x) = s.parse::<f64>() {
            return Value::Num(x);
        }
        match s {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            _ => Value::Str(s.trim_matches('"').to_string()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(x) => write!(f, "{x:?}"),
            Value::Str(s) => write!(f, "\"{s}\""),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Flat key-value configuration. Keys keep insertion-independent order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, Value>,
}

fn flatten(prefix: &str, v: &toml::Value, out: &mut BTreeMap<String, Value>) -> Result<()> {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        toml::Value::Table(t) => {
            for (k, v) in t {
                flatten(&key(k), v, out)?;
            }
        }
        toml::Value::Float(x) => {
            out.insert(prefix.to_string(), Value::Num(*x));
        }
        toml::Value::Integer(x) => {
            out.insert(prefix.to_string(), Value::Num(*x as f64));
        }
        toml::Value::Boolean(b) => {
            out.insert(prefix.to_string(), Value::Bool(*b));
        }
        toml::Value::String(s) => {
            out.insert(prefix.to_string(), Value::Str(s.clone()));
        }
        toml::Value::Array(items) => {
            let parts: Result<Vec<String>> = items
                .iter()
                .map(|x| match x {
                    toml::Value::Float(f) => Ok(format!("{f:?}")),
                    toml::Value::Integer(i) => Ok(i.to_string()),
                    toml::Value::String(s) => Ok(s.clone()),
                    _ => Err(Error::Config(format!("{prefix}: arrays may hold numbers or strings only"))),
                })
                .collect();
            out.insert(prefix.to_string(), Value::Str(parts?.join(",")));
        }
        toml::Value::Datetime(_) => {
            return Err(Error::Config(format!("{prefix}: datetimes are not supported")));
        }
    }
    Ok(())
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut entries = BTreeMap::new();
        flatten("", &toml::Value::Table(table), &mut entries)?;
        Ok(Config { entries })
    }

    pub fn from_file(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.entries.insert(key.to_string(), value);
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Config(format!("override '{assignment}' has an empty key")));
        }
        self.set(k, Value::parse(v));
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn num(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Num(x)) => Ok(Some(*x)),
            Some(v) => Err(Error::Config(format!("{key} must be a number, got {v}"))),
        }
    }

    pub fn str(&self, key: &str) -> Result<Option<&str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Str(s)) => Ok(Some(s)),
            Some(v) => Err(Error::Config(format!("{key} must be a string, got {v}"))),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Entries whose key starts with `prefix.`, with the prefix removed.
    pub fn section(&self, prefix: &str) -> Vec<(&str, &Value)> {
        let p = format!("{prefix}.");
        self.entries
            .iter()
            .filter_map(|(k, v)| k.strip_prefix(&p).map(|rest| (rest, v)))
            .collect()
    }

    /// `key = value` lines in key order.
    pub fn to_lines(&self) -> Vec<String> {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}")).collect()
    }
}
