use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::sweep::{run_sweep, LambdaGrid, OutputField, SweepConfig};
use super::table::{emit_table, TableFormat};
use super::wigner_job::{run_wigner_job, WignerJob};
use crate::error::{Error, Result};
use crate::nlfunc::{NonlinearSpec, Parity};
use crate::state::StateParams;
use crate::wigner::GridGeometry;

/// r values of the i = j presets. 1.0 fills the gap between the values
/// named for the curves.
pub const DEGENERATE_R: [f64; 4] = [0.5, 1.0, 1.5, 2.0];
/// Lamb–Dicke values of the (i, j) = (1, 0) presets.
pub const ETA_PRESET: [f64; 5] = [0.0001, 0.2, 0.4, 0.6, 0.8];
/// Default (i, j) combinations for the mixed-index presets.
pub const DEFAULT_IJ: [(u32, u32); 4] = [(1, 0), (2, 0), (2, 1), (3, 1)];
/// Lamb–Dicke values of the mixed-index presets.
pub const MIXED_ETA: [f64; 2] = [0.0001, 0.8];
pub const WIGNER_ETA: [f64; 3] = [0.2, 0.4, 0.6];
pub const WIGNER_LAMBDA: f64 = 0.1;
pub const WIGNER_HALF_WIDTH: f64 = 3.0;
pub const WIGNER_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig1,
    Fig2,
    Figx1,
    Fig3,
    Figx2,
    Fig5,
    Fig4,
    Figx3,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig1,
        FigureId::Fig2,
        FigureId::Figx1,
        FigureId::Fig3,
        FigureId::Figx2,
        FigureId::Fig5,
        FigureId::Fig4,
        FigureId::Figx3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Figx1 => "figx1",
            FigureId::Fig3 => "fig3",
            FigureId::Figx2 => "figx2",
            FigureId::Fig5 => "fig5",
            FigureId::Fig4 => "fig4",
            FigureId::Figx3 => "figx3",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::UnknownFigure(s.to_string()))
    }
}

/// Overrides applied on top of a preset.
#[derive(Debug, Clone, Default)]
pub struct PresetOptions {
    pub lambda_grid: Option<LambdaGrid>,
    pub ij: Option<Vec<(u32, u32)>>,
    pub tol: Option<f64>,
    pub n_cap: Option<usize>,
}

pub enum Preset {
    Sweep(SweepConfig),
    Wigner(Vec<(String, WignerJob)>),
}

fn specs(ij: &[(u32, u32)], r: &[f64], eta: &[f64]) -> Vec<NonlinearSpec> {
    let mut out = Vec::new();
    for &(i, j) in ij {
        for &r in r {
            for &eta in eta {
                out.push(NonlinearSpec::new(i, j, r, eta).expect("preset values are valid"));
            }
        }
    }
    out
}

pub fn preset(figure: FigureId, opts: &PresetOptions) -> Preset {
    use OutputField::*;
    let squeezing = vec![D1_1, D2_1, D1_2, D2_2];
    let (nonlinear, outputs) = match figure {
        FigureId::Fig1 => (specs(&[(0, 0)], &DEGENERATE_R, &[0.0]), vec![G2, Q, MeanN]),
        FigureId::Fig2 => (specs(&[(0, 0)], &DEGENERATE_R, &[0.0]), vec![Q]),
        FigureId::Figx1 => (specs(&[(0, 0)], &DEGENERATE_R, &[0.0]), squeezing),
        FigureId::Fig3 => (specs(&[(1, 0)], &[1.0], &ETA_PRESET), vec![Q]),
        FigureId::Figx2 => (specs(&[(1, 0)], &[1.0], &ETA_PRESET), squeezing),
        FigureId::Fig4 | FigureId::Figx3 => {
            let ij = opts.ij.clone().unwrap_or_else(|| DEFAULT_IJ.to_vec());
            let outputs = if figure == FigureId::Fig4 { vec![Q] } else { vec![D2_1] };
            (specs(&ij, &[1.0], &MIXED_ETA), outputs)
        }
        FigureId::Fig5 => {
            let mut jobs = Vec::new();
            for parity in [Parity::Even, Parity::Odd] {
                for eta in WIGNER_ETA {
                    let spec = NonlinearSpec::new(1, 0, 1.0, eta).expect("preset values are valid");
                    let mut job = WignerJob::new(
                        spec,
                        StateParams::real(parity, WIGNER_LAMBDA),
                        GridGeometry::square(WIGNER_HALF_WIDTH, WIGNER_STEP),
                    );
                    if let Some(tol) = opts.tol {
                        job.tol = tol;
                    }
                    if let Some(n_cap) = opts.n_cap {
                        job.n_cap = n_cap;
                    }
                    jobs.push((format!("fig5_{parity}_eta{eta}"), job));
                }
            }
            return Preset::Wigner(jobs);
        }
    };
    let mut config = SweepConfig::new(nonlinear);
    config.outputs = outputs;
    if let Some(g) = opts.lambda_grid {
        config.lambda_grid = g;
    }
    if let Some(tol) = opts.tol {
        config.tol = tol;
    }
    if let Some(n_cap) = opts.n_cap {
        config.n_cap = n_cap;
    }
    Preset::Sweep(config)
}

/// Writes the files of one figure preset into `dir` and returns their paths.
pub fn run_reproduce(
    figure: FigureId,
    dir: &Path,
    format: TableFormat,
    opts: &PresetOptions,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    match preset(figure, opts) {
        Preset::Sweep(config) => {
            let rows = run_sweep(&config)?;
            let path = dir.join(format!("{}.{}", figure.name(), format.extension()));
            let out = BufWriter::new(File::create(&path)?);
            emit_table(&rows, &config.outputs, format, out)?;
            Ok(vec![path])
        }
        Preset::Wigner(jobs) => {
            let mut paths = Vec::new();
            for (name, job) in jobs {
                let path = dir.join(format!("{name}.{}", format.extension()));
                let out = BufWriter::new(File::create(&path)?);
                run_wigner_job(&job, format, out)?;
                paths.push(path);
            }
            Ok(paths)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_ids() {
        assert_eq!("FIG5".parse::<FigureId>().unwrap(), FigureId::Fig5);
        assert!(matches!("fig9".parse::<FigureId>(), Err(Error::UnknownFigure(_))));
    }

    #[test]
    fn preset_shapes() {
        let opts = PresetOptions::default();
        match preset(FigureId::Fig5, &opts) {
            Preset::Wigner(jobs) => {
                assert_eq!(jobs.len(), 6);
                assert!(jobs.iter().all(|(_, j)| j.params.lambda.re == 0.1));
            }
            Preset::Sweep(_) => panic!("fig5 is a grid preset"),
        }
        match preset(FigureId::Fig3, &opts) {
            Preset::Sweep(c) => {
                assert_eq!(c.nonlinear.len(), 5);
                assert_eq!(c.parities.len(), 2);
                assert_eq!(c.outputs, vec![OutputField::Q]);
            }
            Preset::Wigner(_) => panic!(),
        }
        match preset(FigureId::Fig4, &PresetOptions { ij: Some(vec![(1, 0)]), ..opts }) {
            Preset::Sweep(c) => assert_eq!(c.nonlinear.len(), 2),
            Preset::Wigner(_) => panic!(),
        }
    }
}
