use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use nlcs_core::cli_io::config::Threads;
use nlcs_core::cli_io::{
    compute_row, emit_table, parse_ij, run_reproduce, run_sweep, run_validate, run_wigner_job,
    with_threads, Fault, FigureId, FileConfig, LambdaGrid, OutputField, PresetOptions, RowStatus,
    Scope, Spacing, SweepConfig, TableFormat, WignerJob, WIGNER_DEFAULT_TOL,
};
use nlcs_core::state::{DEFAULT_N_CAP, DEFAULT_TOL};
use nlcs_core::{Error, GridGeometry, NonlinearSpec, Parity, StateParams};

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;

/// Even and odd nonlinear coherent states: photon statistics, squeezing and
/// Wigner functions.
///
/// Settings are resolved as built-in defaults, then the `--config` file, then
/// command-line flags.
#[derive(Debug, Parser)]
#[command(name = "nlcs", version)]
struct Cli {
    /// TOML file with flat keys named like the long flags (underscores for dashes).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Every observable for one state.
    Point(Common),
    /// Observables over a |λ| grid for each parity and nonlinear function.
    Sweep(SweepArgs),
    /// Wigner function on a rectangular grid.
    Wigner(WignerArgs),
    /// Compare the production code against the brute-force oracles.
    Validate(ValidateArgs),
    /// Write the data files behind one of the figure presets.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args, Clone, Default)]
struct Common {
    /// even, odd, or a comma list.
    #[arg(long, value_delimiter = ',')]
    parity: Option<Vec<String>>,
    /// |λ| for point and wigner.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    i: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    j: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// (i, j) pairs such as 1:0,2:1; overrides --i/--j.
    #[arg(long, value_delimiter = ',')]
    ij: Option<Vec<String>>,
    /// Truncation tolerance on the summed magnitude of the discarded amplitudes.
    #[arg(long)]
    tol: Option<f64>,
    /// Maximum number of superposition slots.
    #[arg(long)]
    n_cap: Option<usize>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file (stdout when omitted); a directory for `reproduce`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, or `auto`.
    #[arg(long)]
    threads: Option<String>,
}

#[derive(Debug, Args)]
struct LambdaArgs {
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    lambda_steps: Option<usize>,
    /// linear or log.
    #[arg(long)]
    lambda_spacing: Option<String>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    lambda: LambdaArgs,
    /// Comma list from g2,q,d1_1,d2_1,d1_2,d2_2,mean_n.
    #[arg(long, value_delimiter = ',')]
    outputs: Option<Vec<String>>,
}

#[derive(Debug, Args)]
struct WignerArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    re_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    re_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    im_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    im_max: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// quick or full.
    #[arg(long, default_value = "quick")]
    scope: String,
    /// text or json.
    #[arg(long, default_value = "text")]
    format: String,
    #[arg(long)]
    threads: Option<String>,
    #[arg(long, hide = true, default_value = "none")]
    inject_fault: String,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    /// fig1, fig2, figx1, fig3, figx2, fig5, fig4 or figx3.
    figure: String,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    lambda: LambdaArgs,
}

/// Flags merged over the config file.
struct Resolved {
    file: FileConfig,
    common: Common,
}

impl Resolved {
    fn new(path: Option<&PathBuf>, common: Common) -> Result<Self> {
        let file = match path {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        Ok(Resolved { file, common })
    }

    fn parities(&self, default: &[Parity]) -> Result<Vec<Parity>> {
        let names = self
            .common
            .parity
            .clone()
            .or_else(|| self.file.parity.as_ref().map(|p| p.to_vec()));
        match names {
            Some(list) => list.iter().map(|s| Ok(s.parse()?)).collect(),
            None => Ok(default.to_vec()),
        }
    }

    fn specs(&self) -> Result<Vec<NonlinearSpec>> {
        let pairs = match self
            .common
            .ij
            .clone()
            .or_else(|| self.file.ij.as_ref().map(|v| v.to_vec()))
        {
            Some(list) => list.iter().map(|s| Ok(parse_ij(s)?)).collect::<Result<Vec<_>>>()?,
            None => {
                let is = self.common.i.clone().or_else(|| self.file.i.as_ref().map(|v| v.to_vec()));
                let js = self.common.j.clone().or_else(|| self.file.j.as_ref().map(|v| v.to_vec()));
                let is = is.unwrap_or_else(|| vec![0]);
                let js = js.unwrap_or_else(|| vec![0]);
                is.iter().flat_map(|&i| js.iter().map(move |&j| (i, j))).collect()
            }
        };
        let rs = self
            .common
            .r
            .clone()
            .or_else(|| self.file.r.as_ref().map(|v| v.to_vec()))
            .unwrap_or_else(|| vec![1.0]);
        let etas = self
            .common
            .eta
            .clone()
            .or_else(|| self.file.eta.as_ref().map(|v| v.to_vec()))
            .unwrap_or_else(|| vec![0.0]);
        let mut out = Vec::new();
        for &(i, j) in &pairs {
            for &r in &rs {
                for &eta in &etas {
                    out.push(NonlinearSpec::new(i, j, r, eta)?);
                }
            }
        }
        Ok(out)
    }

    fn single_spec(&self) -> Result<NonlinearSpec> {
        let specs = self.specs()?;
        if specs.len() != 1 {
            bail!(Error::InvalidParameter("this command takes a single (i, j, r, eta)".into()));
        }
        Ok(specs[0])
    }

    fn single_parity(&self) -> Result<Parity> {
        let p = self.parities(&[Parity::Even])?;
        if p.len() != 1 {
            bail!(Error::InvalidParameter("this command takes a single parity".into()));
        }
        Ok(p[0])
    }

    fn lambda(&self) -> Result<f64> {
        self.common
            .lambda
            .or(self.file.lambda)
            .ok_or_else(|| anyhow!(Error::InvalidParameter("--lambda is required".into())))
    }

    fn tol(&self, default: f64) -> f64 {
        self.common.tol.or(self.file.tol).unwrap_or(default)
    }

    fn n_cap(&self) -> usize {
        self.common.n_cap.or(self.file.n_cap).unwrap_or(DEFAULT_N_CAP)
    }

    fn format(&self) -> Result<TableFormat> {
        match self.common.format.clone().or_else(|| self.file.format.clone()) {
            Some(f) => Ok(f.parse()?),
            None => Ok(TableFormat::Csv),
        }
    }

    fn out(&self) -> Option<PathBuf> {
        self.common
            .out
            .clone()
            .or_else(|| self.file.out.as_ref().map(PathBuf::from))
    }

    fn threads(&self) -> Result<Option<usize>> {
        let raw = match (&self.common.threads, &self.file.threads) {
            (Some(s), _) => Threads::Named(s.clone()),
            (None, Some(t)) => t.clone(),
            (None, None) => return Ok(None),
        };
        parse_threads(&raw)
    }

    fn lambda_grid(&self, args: &LambdaArgs) -> Result<Option<LambdaGrid>> {
        let f = &self.file;
        let min = args.lambda_min.or(f.lambda_min);
        let max = args.lambda_max.or(f.lambda_max);
        let count = args.lambda_steps.or(f.lambda_count);
        let spacing = args.lambda_spacing.clone().or_else(|| f.lambda_spacing.clone());
        if min.is_none() && max.is_none() && count.is_none() && spacing.is_none() {
            return Ok(None);
        }
        let d = LambdaGrid::default();
        Ok(Some(LambdaGrid {
            min: min.unwrap_or(d.min),
            max: max.unwrap_or(d.max),
            count: count.unwrap_or(d.count),
            spacing: match spacing {
                Some(s) => s.parse::<Spacing>()?,
                None => d.spacing,
            },
        }))
    }
}

fn parse_threads(t: &Threads) -> Result<Option<usize>> {
    match t {
        Threads::Count(0) => bail!(Error::InvalidParameter("--threads must be positive".into())),
        Threads::Count(n) => Ok(Some(*n)),
        Threads::Named(s) if s.eq_ignore_ascii_case("auto") => Ok(None),
        Threads::Named(s) => match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => bail!(Error::InvalidParameter(format!("--threads expects a positive integer or auto, got `{s}`"))),
        },
    }
}

fn open_out(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_point(cfg: Option<&PathBuf>, common: Common) -> Result<()> {
    let r = Resolved::new(cfg, common)?;
    let spec = r.single_spec()?;
    let parity = r.single_parity()?;
    let lambda = r.lambda()?;
    let format = r.format()?;
    let row = compute_row(&spec, parity, lambda, &OutputField::ALL, r.tol(DEFAULT_TOL), r.n_cap());
    // surface the underlying construction error for the exit status
    match row.status {
        RowStatus::NotConverged | RowStatus::SingularF => {
            let err = nlcs_core::build_state(&spec, StateParams::real(parity, lambda), r.tol(DEFAULT_TOL), r.n_cap())
                .err()
                .unwrap_or_else(|| Error::InvalidParameter("state construction failed".into()));
            return Err(err.into());
        }
        RowStatus::Ok | RowStatus::VacuumSkip => {}
    }
    let mut out = open_out(r.out().as_ref())?;
    emit_table(&[row], &OutputField::ALL, format, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_sweep(cfg: Option<&PathBuf>, args: SweepArgs) -> Result<()> {
    let r = Resolved::new(cfg, args.common)?;
    let mut config = SweepConfig::new(r.specs()?);
    config.parities = r.parities(&[Parity::Even, Parity::Odd])?;
    if let Some(g) = r.lambda_grid(&args.lambda)? {
        config.lambda_grid = g;
    }
    let outputs = args
        .outputs
        .clone()
        .or_else(|| r.file.outputs.as_ref().map(|o| o.to_vec()));
    if let Some(list) = outputs {
        config.outputs = list.iter().map(|s| Ok(s.parse()?)).collect::<Result<_>>()?;
    }
    config.tol = r.tol(DEFAULT_TOL);
    config.n_cap = r.n_cap();
    let format = r.format()?;
    let rows = with_threads(r.threads()?, || run_sweep(&config))??;
    let mut out = open_out(r.out().as_ref())?;
    emit_table(&rows, &config.outputs, format, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_wigner(cfg: Option<&PathBuf>, args: WignerArgs) -> Result<()> {
    let r = Resolved::new(cfg, args.common)?;
    let f = &r.file;
    let d = GridGeometry::square(3.0, 0.05);
    let geometry = GridGeometry {
        re_min: args.re_min.or(f.re_min).unwrap_or(d.re_min),
        re_max: args.re_max.or(f.re_max).unwrap_or(d.re_max),
        im_min: args.im_min.or(f.im_min).unwrap_or(d.im_min),
        im_max: args.im_max.or(f.im_max).unwrap_or(d.im_max),
        step: args.step.or(f.step).unwrap_or(d.step),
    };
    geometry.validate()?;
    let mut job = WignerJob::new(
        r.single_spec()?,
        StateParams::real(r.single_parity()?, r.lambda()?),
        geometry,
    );
    job.tol = r.tol(WIGNER_DEFAULT_TOL);
    job.n_cap = r.n_cap();
    let format = r.format()?;
    let mut buf = Vec::new();
    with_threads(r.threads()?, || run_wigner_job(&job, format, &mut buf))??;
    let mut out = open_out(r.out().as_ref())?;
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<bool> {
    let scope: Scope = args.scope.parse()?;
    let fault: Fault = args.inject_fault.parse()?;
    let threads = match &args.threads {
        Some(t) => parse_threads(&Threads::Named(t.clone()))?,
        None => None,
    };
    let report = with_threads(threads, || run_validate(scope, fault))?;
    let mut out = io::stdout().lock();
    match args.format.as_str() {
        "text" => out.write_all(report.render_text().as_bytes())?,
        "json" => writeln!(out, "{}", report.render_json())?,
        other => bail!(Error::InvalidParameter(format!("unknown report format `{other}`"))),
    }
    out.flush()?;
    Ok(report.passed())
}

fn cmd_reproduce(cfg: Option<&PathBuf>, args: ReproduceArgs) -> Result<()> {
    let figure: FigureId = args.figure.parse()?;
    let r = Resolved::new(cfg, args.common)?;
    let ij = match r.common.ij.clone().or_else(|| r.file.ij.as_ref().map(|v| v.to_vec())) {
        Some(list) => Some(list.iter().map(|s| Ok(parse_ij(s)?)).collect::<Result<Vec<_>>>()?),
        None => None,
    };
    let opts = PresetOptions {
        lambda_grid: r.lambda_grid(&args.lambda)?,
        ij,
        tol: r.common.tol.or(r.file.tol),
        n_cap: r.common.n_cap.or(r.file.n_cap),
    };
    let dir = r.out().unwrap_or_else(|| PathBuf::from("."));
    let format = r.format()?;
    let paths = with_threads(r.threads()?, || run_reproduce(figure, &dir, format, &opts))??;
    let mut out = io::stdout().lock();
    for p in paths {
        writeln!(out, "{}", p.display())?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::NotConverged { .. }
            | Error::WignerNotConverged { .. }
            | Error::SingularFunction { .. },
        ) => EXIT_CONVERGENCE,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = cli.config.as_ref();
    let result = match cli.command {
        Command::Point(c) => cmd_point(cfg, c),
        Command::Sweep(a) => cmd_sweep(cfg, a),
        Command::Wigner(a) => cmd_wigner(cfg, a),
        Command::Reproduce(a) => cmd_reproduce(cfg, a),
        Command::Validate(a) => match cmd_validate(a) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(EXIT_VALIDATION),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
