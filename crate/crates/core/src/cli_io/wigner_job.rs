use std::io::Write;

use serde_json::{Map, Value};

use super::format::{fmt_sci, round_sig};
use super::table::TableFormat;
use crate::error::{Error, Result};
use crate::nlfunc::NonlinearSpec;
use crate::state::{build_state, CoefficientTable, StateParams, DEFAULT_N_CAP};
use crate::wigner::{wigner_grid, GridGeometry, WignerGrid};

/// Starting state tolerance for Wigner jobs. The shell test of the double sum
/// needs the outermost amplitudes far below the 10⁻¹⁰ threshold, so tables
/// are built much tighter than for moment sweeps.
pub const WIGNER_DEFAULT_TOL: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerJob {
    pub spec: NonlinearSpec,
    pub params: StateParams,
    pub geometry: GridGeometry,
    pub tol: f64,
    pub n_cap: usize,
}

impl WignerJob {
    pub fn new(spec: NonlinearSpec, params: StateParams, geometry: GridGeometry) -> Self {
        WignerJob {
            spec,
            params,
            geometry,
            tol: WIGNER_DEFAULT_TOL,
            n_cap: DEFAULT_N_CAP,
        }
    }
}

/// Factor applied to the tolerance after an unconverged Wigner sum.
pub const TOL_TIGHTEN: f64 = 1e-4;
/// Tightening stops below this tolerance.
pub const TOL_FLOOR: f64 = 1e-120;

/// Builds the table at `tol` and runs `eval` on it. Each time `eval` reports
/// [`Error::WignerNotConverged`] the table is rebuilt with the tolerance
/// multiplied by [`TOL_TIGHTEN`], down to [`TOL_FLOOR`]. Returns the result
/// and the tolerance that produced it.
pub fn with_converged_table<T>(
    spec: &NonlinearSpec,
    params: StateParams,
    tol: f64,
    n_cap: usize,
    eval: impl Fn(&CoefficientTable) -> Result<T>,
) -> Result<(T, f64)> {
    let mut tol = tol;
    loop {
        let table = build_state(spec, params, tol, n_cap)?;
        match eval(&table) {
            Err(Error::WignerNotConverged { .. }) if tol * TOL_TIGHTEN >= TOL_FLOOR => {
                tol *= TOL_TIGHTEN;
            }
            other => return other.map(|v| (v, tol)),
        }
    }
}

/// A computed grid and the state tolerance it needed.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerOutput {
    pub grid: WignerGrid,
    pub tol: f64,
}

/// Builds the state, evaluates the grid on the current rayon pool and
/// returns it, tightening the state tolerance as needed.
pub fn compute_wigner_job(job: &WignerJob) -> Result<WignerOutput> {
    let (grid, tol) = with_converged_table(&job.spec, job.params, job.tol, job.n_cap, |t| {
        wigner_grid(t, job.geometry)
    })?;
    Ok(WignerOutput { grid, tol })
}

fn metadata(job: &WignerJob, output: &WignerOutput) -> Vec<(&'static str, String)> {
    let grid = &output.grid;
    let g = &grid.geometry;
    let lambda = job.params.lambda;
    vec![
        ("parity", job.params.parity.as_str().to_string()),
        ("i", job.spec.i.to_string()),
        ("j", job.spec.j.to_string()),
        ("r", fmt_sci(job.spec.r)),
        ("eta", fmt_sci(job.spec.eta)),
        ("lambda_re", fmt_sci(lambda.re)),
        ("lambda_im", fmt_sci(lambda.im)),
        ("tol", fmt_sci(output.tol)),
        ("n_max", grid.n_max.to_string()),
        ("tail_bound", fmt_sci(grid.tail_bound)),
        ("re_min", fmt_sci(g.re_min)),
        ("re_max", fmt_sci(g.re_max)),
        ("im_min", fmt_sci(g.im_min)),
        ("im_max", fmt_sci(g.im_max)),
        ("step", fmt_sci(g.step)),
        ("n_re", grid.n_re().to_string()),
        ("n_im", grid.n_im().to_string()),
        ("w_min", fmt_sci(grid.min())),
        ("w_max", fmt_sci(grid.max())),
        ("riemann_sum", fmt_sci(grid.riemann_sum())),
        ("max_imag_residue", fmt_sci(grid.max_imag_residue)),
    ]
}

/// Writes a computed grid. CSV: `# key: value` metadata lines, then a
/// `re,im,w` header and one record per point with Im α as the outer loop.
/// JSON: an object with `metadata` and `points`.
pub fn write_wigner_grid<W: Write>(
    job: &WignerJob,
    output: &WignerOutput,
    format: TableFormat,
    mut out: W,
) -> Result<()> {
    let meta = metadata(job, output);
    let grid = &output.grid;
    let g = &grid.geometry;
    match format {
        TableFormat::Csv => {
            let mut buf = String::new();
            for (k, v) in &meta {
                buf.push_str(&format!("# {k}: {v}\n"));
            }
            buf.push_str("re,im,w\n");
            for row in 0..grid.n_im() {
                let im = fmt_sci(g.im_at(row));
                for col in 0..grid.n_re() {
                    buf.push_str(&format!(
                        "{},{},{}\n",
                        fmt_sci(g.re_at(col)),
                        im,
                        fmt_sci(grid.value(row, col))
                    ));
                }
            }
            out.write_all(buf.as_bytes())?;
        }
        TableFormat::Json => {
            let mut m = Map::new();
            for (k, v) in &meta {
                let value = if *k == "parity" {
                    Value::from(v.clone())
                } else if let Ok(n) = v.parse::<u64>() {
                    Value::from(n)
                } else {
                    v.parse::<f64>().map(Value::from).unwrap_or_else(|_| Value::from(v.clone()))
                };
                m.insert((*k).to_string(), value);
            }
            let points: Vec<Value> = (0..grid.n_im())
                .flat_map(|row| (0..grid.n_re()).map(move |col| (row, col)))
                .map(|(row, col)| {
                    let mut p = Map::new();
                    p.insert("re".into(), Value::from(round_sig(g.re_at(col))));
                    p.insert("im".into(), Value::from(round_sig(g.im_at(row))));
                    p.insert("w".into(), Value::from(round_sig(grid.value(row, col))));
                    Value::Object(p)
                })
                .collect();
            let mut doc = Map::new();
            doc.insert("metadata".into(), Value::Object(m));
            doc.insert("points".into(), Value::Array(points));
            serde_json::to_writer(&mut out, &Value::Object(doc))?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// [`compute_wigner_job`] followed by [`write_wigner_grid`].
pub fn run_wigner_job<W: Write>(job: &WignerJob, format: TableFormat, out: W) -> Result<WignerOutput> {
    let output = compute_wigner_job(job)?;
    write_wigner_grid(job, &output, format, out)?;
    Ok(output)
}
