use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::wigner_job::{with_converged_table, WIGNER_DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::nlfunc::{NonlinearSpec, Parity};
use crate::observables::{moments, MomentSet};
use crate::oracle::exact::laguerre_exact;
use crate::oracle::{
    oracle_moments, oracle_state_closed_form, oracle_wigner_point, FockVector,
    CLOSED_FORM_MAX_SLOTS,
};
use crate::specfun::laguerre;
use crate::state::{build_state, CoefficientTable, StateParams, DEFAULT_N_CAP, DEFAULT_TOL};
use crate::wigner::{wigner_point, PhasePoint};

pub const MOMENT_TOL: f64 = 1e-10;
pub const STATE_TOL: f64 = 1e-12;
pub const WIGNER_TOL: f64 = 1e-8;
pub const LAGUERRE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Quick,
    Full,
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quick" => Ok(Scope::Quick),
            "full" => Ok(Scope::Full),
            other => Err(Error::InvalidParameter(format!("unknown scope `{other}`"))),
        }
    }
}

/// Deliberate corruption of a production value, used to prove that the
/// suites can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Flip the sign of the production ⟨a²⟩.
    A2Sign,
}

impl FromStr for Fault {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Fault::None),
            "a2-sign" => Ok(Fault::A2Sign),
            other => Err(Error::InvalidParameter(format!("unknown fault `{other}`"))),
        }
    }
}

/// Parameter grid shared by the suites.
#[derive(Debug, Clone, PartialEq)]
pub struct TestGrid {
    pub parities: Vec<Parity>,
    pub r: Vec<f64>,
    pub eta: Vec<f64>,
    pub ij: Vec<(u32, u32)>,
    pub lambda: Vec<f64>,
}

impl TestGrid {
    /// parities × r ∈ {0.5, 1, 1.5, 2} × η ∈ {0.0001, 0.4, 0.8} ×
    /// (i, j) ∈ {(0,0), (1,0), (2,1)} × |λ| ∈ {0.1, 1, 10, 50}.
    pub fn full() -> Self {
        TestGrid {
            parities: vec![Parity::Even, Parity::Odd],
            r: vec![0.5, 1.0, 1.5, 2.0],
            eta: vec![0.0001, 0.4, 0.8],
            ij: vec![(0, 0), (1, 0), (2, 1)],
            lambda: vec![0.1, 1.0, 10.0, 50.0],
        }
    }

    pub fn quick() -> Self {
        TestGrid {
            parities: vec![Parity::Even, Parity::Odd],
            r: vec![0.5, 2.0],
            eta: vec![0.4],
            ij: vec![(0, 0), (1, 0), (2, 1)],
            lambda: vec![0.1, 1.0, 10.0],
        }
    }

    pub fn for_scope(scope: Scope) -> Self {
        match scope {
            Scope::Quick => Self::quick(),
            Scope::Full => Self::full(),
        }
    }

    /// Same grid with |λ| restricted to `max`.
    pub fn lambda_at_most(&self, max: f64) -> Self {
        TestGrid {
            lambda: self.lambda.iter().copied().filter(|l| *l <= max).collect(),
            ..self.clone()
        }
    }

    pub fn cases(&self) -> Vec<(NonlinearSpec, StateParams)> {
        let mut out = Vec::new();
        for &parity in &self.parities {
            for &(i, j) in &self.ij {
                for &r in &self.r {
                    for &eta in &self.eta {
                        let spec = NonlinearSpec::new(i, j, r, eta).expect("grid values are valid");
                        for &lambda in &self.lambda {
                            out.push((spec, StateParams::real(parity, lambda)));
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn describe(spec: &NonlinearSpec, params: &StateParams) -> String {
    format!(
        "parity={} i={} j={} r={} eta={} lambda={}",
        params.parity, spec.i, spec.j, spec.r, spec.eta, params.lambda.re
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub tolerance: f64,
    pub cases: usize,
    /// States that could not be built (not normalizable or singular).
    pub skipped: usize,
    /// Cases outside the oracle's own accuracy range (round-off estimate
    /// above the comparison tolerance).
    pub oracle_limited: usize,
    pub max_dev: f64,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidateReport {
    pub scope: Scope,
    pub checks: Vec<CheckReport>,
}

impl ValidateReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckReport::passed)
    }

    /// Machine-readable report with a `passed` flag per check.
    pub fn render_json(&self) -> String {
        let checks: Vec<serde_json::Value> = self
            .checks
            .iter()
            .map(|c| {
                let mut v = serde_json::to_value(c).expect("report serializes");
                v["passed"] = c.passed().into();
                v
            })
            .collect();
        serde_json::json!({
            "scope": self.scope,
            "passed": self.passed(),
            "checks": checks,
        })
        .to_string()
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<12} {:<4} cases={:<5} skipped={:<4} oracle_limited={:<4} max_dev={:.3e} tol={:.0e}",
                c.name,
                if c.passed() { "PASS" } else { "FAIL" },
                c.cases,
                c.skipped,
                c.oracle_limited,
                c.max_dev,
                c.tolerance
            );
            for f in &c.failures {
                let _ = writeln!(s, "  FAIL {} {}", c.name, f);
            }
        }
        s
    }
}

enum Outcome {
    Skipped,
    OracleLimited,
    Compared { dev: f64, failure: Option<String> },
}

fn collect(name: &str, tolerance: f64, outcomes: Vec<Outcome>) -> CheckReport {
    let mut report = CheckReport {
        name: name.to_string(),
        tolerance,
        cases: outcomes.len(),
        skipped: 0,
        oracle_limited: 0,
        max_dev: 0.0,
        failures: Vec::new(),
    };
    for o in outcomes {
        match o {
            Outcome::Skipped => report.skipped += 1,
            Outcome::OracleLimited => report.oracle_limited += 1,
            Outcome::Compared { dev, failure } => {
                report.max_dev = report.max_dev.max(dev);
                report.failures.extend(failure);
            }
        }
    }
    report
}

fn rel_dev(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn rel_dev_c(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// Largest relative deviation across the fields of two moment sets, with
/// the name of the worst field.
pub fn moment_deviation(prod: &MomentSet, oracle: &MomentSet) -> (f64, &'static str) {
    [
        ("mean_n", rel_dev(prod.mean_n, oracle.mean_n)),
        ("mean_aa", rel_dev(prod.mean_aa, oracle.mean_aa)),
        ("mean_a2", rel_dev_c(prod.mean_a2, oracle.mean_a2)),
        ("mean_a4", rel_dev_c(prod.mean_a4, oracle.mean_a4)),
        ("mean_a2ad2", rel_dev(prod.mean_a2ad2, oracle.mean_a2ad2)),
        ("mean_a", rel_dev_c(prod.mean_a, oracle.mean_a)),
    ]
    .into_iter()
    .map(|(n, d)| (d, n))
    .fold((0.0, "mean_n"), |acc, x| if x.0 > acc.0 { x } else { acc })
}

fn build(spec: &NonlinearSpec, params: StateParams, tol: f64) -> Option<CoefficientTable> {
    build_state(spec, params, tol, DEFAULT_N_CAP).ok()
}

pub fn check_moments(grid: &TestGrid, fault: Fault) -> CheckReport {
    let outcomes = grid
        .lambda_at_most(10.0)
        .cases()
        .par_iter()
        .map(|(spec, params)| {
            let Some(table) = build(spec, *params, DEFAULT_TOL) else {
                return Outcome::Skipped;
            };
            let mut prod = moments(&table);
            if fault == Fault::A2Sign {
                prod.mean_a2 = -prod.mean_a2;
            }
            let oracle = match oracle_moments(&FockVector::embed(&table)) {
                Ok(m) => m,
                Err(e) => {
                    return Outcome::Compared {
                        dev: f64::INFINITY,
                        failure: Some(format!("{} oracle: {e}", describe(spec, params))),
                    }
                }
            };
            let (dev, field) = moment_deviation(&prod, &oracle);
            Outcome::Compared {
                dev,
                failure: (dev > MOMENT_TOL)
                    .then(|| format!("{} field={field} dev={dev:.3e}", describe(spec, params))),
            }
        })
        .collect();
    collect("moments", MOMENT_TOL, outcomes)
}

pub fn check_closed_form(grid: &TestGrid) -> CheckReport {
    let outcomes = grid
        .lambda_at_most(10.0)
        .cases()
        .par_iter()
        .map(|(spec, params)| {
            let Some(table) = build(spec, *params, DEFAULT_TOL) else {
                return Outcome::Skipped;
            };
            if table.n_max() > CLOSED_FORM_MAX_SLOTS {
                return Outcome::Skipped;
            }
            let oracle = match oracle_state_closed_form(spec, *params, table.n_max()) {
                Ok(t) => t,
                Err(e) => {
                    return Outcome::Compared {
                        dev: f64::INFINITY,
                        failure: Some(format!("{} oracle: {e}", describe(spec, params))),
                    }
                }
            };
            let dev = table
                .amps()
                .iter()
                .zip(oracle.amps())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            Outcome::Compared {
                dev,
                failure: (dev > STATE_TOL).then(|| format!("{} dev={dev:.3e}", describe(spec, params))),
            }
        })
        .collect();
    collect("closed-form", STATE_TOL, outcomes)
}

pub fn wigner_sample_points(scope: Scope) -> Vec<PhasePoint> {
    let all = [
        (0.0, 0.0),
        (0.5, 0.0),
        (0.0, -0.7),
        (1.2, 0.9),
        (-2.1, 1.5),
        (3.0, 0.0),
        (0.0, -3.0),
        (2.1, -2.1),
    ];
    let take = match scope {
        Scope::Quick => 3,
        Scope::Full => all.len(),
    };
    all[..take].iter().map(|&(re, im)| PhasePoint::new(re, im)).collect()
}

pub fn check_wigner(grid: &TestGrid, points: &[PhasePoint]) -> CheckReport {
    let cases: Vec<(NonlinearSpec, StateParams, PhasePoint)> = grid
        .lambda_at_most(1.0)
        .cases()
        .into_iter()
        .flat_map(|(s, p)| points.iter().map(move |a| (s, p, *a)))
        .collect();
    let outcomes = cases
        .par_iter()
        .map(|(spec, params, alpha)| {
            let label = || format!("{} alpha=({},{})", describe(spec, params), alpha.re, alpha.im);
            let evaluated = with_converged_table(spec, *params, WIGNER_DEFAULT_TOL, DEFAULT_N_CAP, |t| {
                wigner_point(t, *alpha).map(|w| (w, oracle_wigner_point(t, *alpha)))
            });
            match evaluated {
                Err(Error::NotConverged { .. } | Error::SingularFunction { .. }) => Outcome::Skipped,
                Err(e) => Outcome::Compared {
                    dev: f64::INFINITY,
                    failure: Some(format!("{} production: {e}", label())),
                },
                Ok(((_, Err(Error::InsufficientHeadroom(_))), _)) => Outcome::OracleLimited,
                Ok(((_, Err(e)), _)) => Outcome::Compared {
                    dev: f64::INFINITY,
                    failure: Some(format!("{} oracle: {e}", label())),
                },
                Ok(((prod, Ok(oracle)), _)) => {
                    let dev = (prod - oracle).abs();
                    Outcome::Compared {
                        dev,
                        failure: (dev > WIGNER_TOL).then(|| format!("{} dev={dev:.3e}", label())),
                    }
                }
            }
        })
        .collect();
    collect("wigner", WIGNER_TOL, outcomes)
}

pub fn check_laguerre(scope: Scope) -> CheckReport {
    let xs = [0.0001f64 * 0.0001, 0.04, 0.16, 0.36, 0.64, 1.0];
    let step = match scope {
        Scope::Quick => 10,
        Scope::Full => 1,
    };
    let mut cases = Vec::new();
    for m in 0..=3u32 {
        for &x in &xs {
            for n in (0..=200u64).step_by(step) {
                cases.push((n, m, x));
            }
        }
    }
    let outcomes = cases
        .par_iter()
        .map(|&(n, m, x)| {
            let exact = laguerre_exact(n, u64::from(m), x);
            let got = laguerre(n, m, x).to_f64().value;
            let dev = rel_dev(got, exact);
            Outcome::Compared {
                dev,
                failure: (dev > LAGUERRE_TOL).then(|| format!("n={n} m={m} x={x} dev={dev:.3e}")),
            }
        })
        .collect();
    collect("laguerre", LAGUERRE_TOL, outcomes)
}

/// Runs every oracle-equivalence suite for the scope.
pub fn run_validate(scope: Scope, fault: Fault) -> ValidateReport {
    let grid = TestGrid::for_scope(scope);
    ValidateReport {
        scope,
        checks: vec![
            check_laguerre(scope),
            check_closed_form(&grid),
            check_moments(&grid, fault),
            check_wigner(&grid, &wigner_sample_points(scope)),
        ],
    }
}
