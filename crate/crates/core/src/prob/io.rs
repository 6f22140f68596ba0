use super::{Alphabet, JointDist, MassFunction, Var};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct VarEntry {
    name: String,
    symbols: Vec<String>,
}

/// On-disk distribution: variables, row-major pmf, and an optional eve variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistFile {
    variables: Vec<VarEntry>,
    pmf: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eve: Option<String>,
}

impl DistFile {
    pub fn from_dist(j: &JointDist, eve: Option<&str>) -> Self {
        Self {
            variables: j
                .vars()
                .iter()
                .map(|v| VarEntry { name: v.name.clone(), symbols: v.alphabet.symbols().to_vec() })
                .collect(),
            pmf: j.pmf().to_vec(),
            eve: eve.map(str::to_string),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn eve(&self) -> Option<&str> {
        self.eve.as_deref()
    }

    /// Validated distribution; the eve variable, if named, must exist.
    pub fn dist(&self) -> Result<JointDist> {
        let vars = self
            .variables
            .iter()
            .map(|v| Ok(Var::new(v.name.clone(), Alphabet::new(v.symbols.clone())?)))
            .collect::<Result<Vec<_>>>()?;
        let j = JointDist::new(vars, self.pmf.clone())?;
        if let Some(e) = &self.eve {
            if j.var_index(e).is_err() {
                return Err(Error::Malformed(format!("eve variable `{e}` not among variables")));
            }
        }
        Ok(j)
    }
}
