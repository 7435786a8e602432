use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nlfunc::{NonlinearSpec, Parity};
use crate::observables::stats;
use crate::state::{build_state, StateParams, DEFAULT_N_CAP, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            other => Err(Error::InvalidParameter(format!("unknown spacing `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid {
            min: 0.0,
            max: 50.0,
            count: 500,
            spacing: Spacing::Linear,
        }
    }
}

impl LambdaGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min < 0.0 {
            return Err(Error::InvalidParameter("lambda grid needs finite min >= 0".into()));
        }
        if self.max < self.min {
            return Err(Error::InvalidParameter("lambda max is below lambda min".into()));
        }
        if self.count < 2 {
            return Err(Error::InvalidParameter("lambda grid needs at least 2 points".into()));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(Error::InvalidParameter("log spacing needs lambda min > 0".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    return self.max;
                }
                let t = k as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + t * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + t * (self.max / self.min).ln()).exp(),
                }
            })
            .collect()
    }
}

/// Observable columns a sweep can emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputField {
    G2,
    Q,
    D1_1,
    D2_1,
    D1_2,
    D2_2,
    MeanN,
}

impl OutputField {
    pub const ALL: [OutputField; 7] = [
        OutputField::G2,
        OutputField::Q,
        OutputField::D1_1,
        OutputField::D2_1,
        OutputField::D1_2,
        OutputField::D2_2,
        OutputField::MeanN,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OutputField::G2 => "g2",
            OutputField::Q => "q",
            OutputField::D1_1 => "d1_1",
            OutputField::D2_1 => "d2_1",
            OutputField::D1_2 => "d1_2",
            OutputField::D2_2 => "d2_2",
            OutputField::MeanN => "mean_n",
        }
    }
}

impl fmt::Display for OutputField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OutputField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        OutputField::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown output `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub nonlinear: Vec<NonlinearSpec>,
    pub parities: Vec<Parity>,
    pub lambda_grid: LambdaGrid,
    pub outputs: Vec<OutputField>,
    pub tol: f64,
    pub n_cap: usize,
}

impl SweepConfig {
    /// Both parities, all outputs, default grid and controls.
    pub fn new(nonlinear: Vec<NonlinearSpec>) -> Self {
        SweepConfig {
            nonlinear,
            parities: vec![Parity::Even, Parity::Odd],
            lambda_grid: LambdaGrid::default(),
            outputs: OutputField::ALL.to_vec(),
            tol: DEFAULT_TOL,
            n_cap: DEFAULT_N_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.lambda_grid.validate()?;
        if self.nonlinear.is_empty() || self.parities.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one spec and parity".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one output".into()));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-6) {
            return Err(Error::InvalidParameter(format!("tol must lie in (0, 1e-6], got {}", self.tol)));
        }
        if self.n_cap < 1 {
            return Err(Error::InvalidParameter("n_cap must be at least 1".into()));
        }
        for s in &self.nonlinear {
            NonlinearSpec::new(s.i, s.j, s.r, s.eta)?;
        }
        Ok(())
    }

    pub fn row_count(&self) -> usize {
        self.parities.len() * self.nonlinear.len() * self.lambda_grid.count
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowStatus {
    #[serde(rename = "ok")]
    Ok,
    #[serde(rename = "vacuum-skip")]
    VacuumSkip,
    #[serde(rename = "not-converged")]
    NotConverged,
    #[serde(rename = "singular-f")]
    SingularF,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::VacuumSkip => "vacuum-skip",
            RowStatus::NotConverged => "not-converged",
            RowStatus::SingularF => "singular-f",
        }
    }
}

impl FromStr for RowStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(RowStatus::Ok),
            "vacuum-skip" => Ok(RowStatus::VacuumSkip),
            "not-converged" => Ok(RowStatus::NotConverged),
            "singular-f" => Ok(RowStatus::SingularF),
            other => Err(Error::InvalidParameter(format!("unknown status `{other}`"))),
        }
    }
}

/// One sweep point. Observable cells are `None` when undefined or not
/// requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub parity: Parity,
    pub i: u32,
    pub j: u32,
    pub r: f64,
    pub eta: f64,
    pub lambda_abs: f64,
    pub g2: Option<f64>,
    pub q: Option<f64>,
    pub d1_1: Option<f64>,
    pub d2_1: Option<f64>,
    pub d1_2: Option<f64>,
    pub d2_2: Option<f64>,
    pub mean_n: Option<f64>,
    pub n_max: Option<usize>,
    pub tail_bound: Option<f64>,
    pub status: RowStatus,
}

impl ResultRow {
    pub fn output(&self, field: OutputField) -> Option<f64> {
        match field {
            OutputField::G2 => self.g2,
            OutputField::Q => self.q,
            OutputField::D1_1 => self.d1_1,
            OutputField::D2_1 => self.d2_1,
            OutputField::D1_2 => self.d1_2,
            OutputField::D2_2 => self.d2_2,
            OutputField::MeanN => self.mean_n,
        }
    }

    pub fn output_mut(&mut self, field: OutputField) -> &mut Option<f64> {
        match field {
            OutputField::G2 => &mut self.g2,
            OutputField::Q => &mut self.q,
            OutputField::D1_1 => &mut self.d1_1,
            OutputField::D2_1 => &mut self.d2_1,
            OutputField::D1_2 => &mut self.d1_2,
            OutputField::D2_2 => &mut self.d2_2,
            OutputField::MeanN => &mut self.mean_n,
        }
    }

    fn empty(parity: Parity, spec: &NonlinearSpec, lambda: f64, status: RowStatus) -> Self {
        ResultRow {
            parity,
            i: spec.i,
            j: spec.j,
            r: spec.r,
            eta: spec.eta,
            lambda_abs: lambda,
            g2: None,
            q: None,
            d1_1: None,
            d2_1: None,
            d1_2: None,
            d2_2: None,
            mean_n: None,
            n_max: None,
            tail_bound: None,
            status,
        }
    }
}

/// Computes one row. Per-point failures become status codes.
pub fn compute_row(
    spec: &NonlinearSpec,
    parity: Parity,
    lambda: f64,
    outputs: &[OutputField],
    tol: f64,
    n_cap: usize,
) -> ResultRow {
    let table = match build_state(spec, StateParams::real(parity, lambda), tol, n_cap) {
        Ok(t) => t,
        Err(Error::NotConverged { achieved_tail, .. }) => {
            let mut row = ResultRow::empty(parity, spec, lambda, RowStatus::NotConverged);
            row.tail_bound = Some(achieved_tail);
            return row;
        }
        Err(_) => return ResultRow::empty(parity, spec, lambda, RowStatus::SingularF),
    };
    let s = stats(&table);
    let status = if s.g2.is_none() {
        RowStatus::VacuumSkip
    } else {
        RowStatus::Ok
    };
    let mut row = ResultRow::empty(parity, spec, lambda, status);
    let all = ResultRow {
        g2: s.g2,
        q: s.q,
        d1_1: Some(s.d1_1),
        d2_1: Some(s.d2_1),
        d1_2: Some(s.d1_2),
        d2_2: Some(s.d2_2),
        mean_n: Some(s.mean_n),
        ..row.clone()
    };
    for &o in outputs {
        *row.output_mut(o) = all.output(o);
    }
    row.n_max = Some(s.n_max);
    row.tail_bound = Some(s.tail_bound);
    row
}

/// One row per (parity × spec × λ), ordered parity-major, then spec list
/// order, then λ index. Points run in parallel on the current rayon pool.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let lambdas = config.lambda_grid.values();
    let mut points = Vec::with_capacity(config.row_count());
    for &parity in &config.parities {
        for spec in &config.nonlinear {
            for &lambda in &lambdas {
                points.push((parity, *spec, lambda));
            }
        }
    }
    Ok(points
        .par_iter()
        .map(|(parity, spec, lambda)| {
            compute_row(spec, *parity, *lambda, &config.outputs, config.tol, config.n_cap)
        })
        .collect())
}

/// Runs `f` on a pool with `threads` workers (`None` for the rayon default).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::InvalidParameter("thread count must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
