//! Parameter resolution: command-line flags override an optional `--params`
//! JSON object, and every value actually read is recorded for the report.

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{Map, Value};
use std::path::Path;

#[derive(Debug, Default)]
pub struct Params {
    given: Map<String, Value>,
    resolved: Map<String, Value>,
}

impl Params {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading params file {}", path.display()))?;
        match serde_json::from_str(&text).with_context(|| format!("malformed params JSON in {}", path.display()))? {
            Value::Object(given) => Ok(Self { given, resolved: Map::new() }),
            _ => bail!("params file {} must hold a JSON object", path.display()),
        }
    }

    pub fn resolved(&self) -> &Map<String, Value> {
        &self.resolved
    }

    fn lookup<T>(&mut self, key: &str, flag: Option<T>, parse: impl Fn(&Value) -> Option<T>) -> Result<Option<T>>
    where
        T: Into<Value> + Clone,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.given.get(key) {
                None | Some(Value::Null) => None,
                Some(raw) => Some(parse(raw).ok_or_else(|| anyhow!("parameter `{key}` has the wrong type: {raw}"))?),
            },
        };
        if let Some(v) = &v {
            self.resolved.insert(key.to_string(), v.clone().into());
        }
        Ok(v)
    }

    pub fn opt_f64(&mut self, key: &str, flag: Option<f64>) -> Result<Option<f64>> {
        self.lookup(key, flag, Value::as_f64)
    }

    pub fn f64(&mut self, key: &str, flag: Option<f64>) -> Result<f64> {
        self.opt_f64(key, flag)?.ok_or_else(|| missing(key))
    }

    pub fn f64_or(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64> {
        let v = self.opt_f64(key, flag)?.unwrap_or(default);
        self.resolved.insert(key.to_string(), v.into());
        Ok(v)
    }

    pub fn opt_u64(&mut self, key: &str, flag: Option<u64>) -> Result<Option<u64>> {
        self.lookup(key, flag, Value::as_u64)
    }

    pub fn u64_or(&mut self, key: &str, flag: Option<u64>, default: u64) -> Result<u64> {
        let v = self.lookup(key, flag, Value::as_u64)?.unwrap_or(default);
        self.resolved.insert(key.to_string(), v.into());
        Ok(v)
    }

    pub fn opt_str(&mut self, key: &str, flag: Option<String>) -> Result<Option<String>> {
        self.lookup(key, flag, |v| v.as_str().map(str::to_string))
    }

    pub fn str(&mut self, key: &str, flag: Option<String>) -> Result<String> {
        self.opt_str(key, flag)?.ok_or_else(|| missing(key))
    }

    pub fn str_or(&mut self, key: &str, flag: Option<String>, default: &str) -> Result<String> {
        let v = self.opt_str(key, flag)?.unwrap_or_else(|| default.to_string());
        self.resolved.insert(key.to_string(), v.clone().into());
        Ok(v)
    }

    pub fn flag(&mut self, key: &str, flag: bool) -> Result<bool> {
        let v = if flag { true } else { self.lookup(key, None, Value::as_bool)?.unwrap_or(false) };
        self.resolved.insert(key.to_string(), v.into());
        Ok(v)
    }

    /// A list of sample sizes, given as `--n 10,100` or a JSON array.
    pub fn n_list(&mut self, key: &str, flag: Option<Vec<u64>>) -> Result<Vec<u64>> {
        let flag = flag.filter(|v| !v.is_empty());
        let v = self
            .lookup(key, flag, |v| v.as_array()?.iter().map(Value::as_u64).collect())?
            .ok_or_else(|| missing(key))?;
        if v.is_empty() || v.contains(&0) {
            bail!("parameter `{key}` must be a nonempty list of positive integers");
        }
        Ok(v)
    }
}

fn missing(key: &str) -> anyhow::Error {
    anyhow!("missing required parameter `{key}` (pass --{} or set it in --params)", key.replace('_', "-"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let mut p = Params::default();
        p.given.insert("eps".into(), 0.2.into());
        assert_eq!(p.f64("eps", Some(0.1)).unwrap(), 0.1);
        assert_eq!(p.f64("eps", None).unwrap(), 0.2);
        assert_eq!(p.resolved()["eps"], Value::from(0.2));
        assert!(p.f64("eta", None).is_err());
    }

    #[test]
    fn wrong_type_is_rejected() {
        let mut p = Params::default();
        p.given.insert("n".into(), "ten".into());
        assert!(p.n_list("n", None).is_err());
    }
}
