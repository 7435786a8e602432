use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Threads {
    Count(usize),
    Named(String),
}

/// Flat key/value config file. Every key is optional; command-line flags
/// override whatever is set here.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub parity: Option<OneOrMany<String>>,
    pub i: Option<OneOrMany<u32>>,
    pub j: Option<OneOrMany<u32>>,
    pub r: Option<OneOrMany<f64>>,
    pub eta: Option<OneOrMany<f64>>,
    pub ij: Option<OneOrMany<String>>,
    pub lambda: Option<f64>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    #[serde(alias = "lambda_steps")]
    pub lambda_count: Option<usize>,
    pub lambda_spacing: Option<String>,
    pub outputs: Option<OneOrMany<String>>,
    pub tol: Option<f64>,
    pub n_cap: Option<usize>,
    pub format: Option<String>,
    pub out: Option<String>,
    pub threads: Option<Threads>,
    pub re_min: Option<f64>,
    pub re_max: Option<f64>,
    pub im_min: Option<f64>,
    pub im_max: Option<f64>,
    pub step: Option<f64>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Parses `"1:0"` into (1, 0).
pub fn parse_ij(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::InvalidParameter(format!("expected i:j, got `{s}`"));
    let (i, j) = s.trim().split_once(':').ok_or_else(bad)?;
    Ok((i.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?))
}
