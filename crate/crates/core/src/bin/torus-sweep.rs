use clap::Parser;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use torus_spectrum::sweep::{
    emit, parse_curvature, parse_solvers, parse_variants, run_sweep, to_csv, to_plotdata, ConfigOverrides,
    OutputFormat, SweepConfig,
};
use torus_spectrum::{Error, Result};

/// Ground-state energy of an electron on an elliptical torus, swept over the
/// axial flux parameter gamma.
#[derive(Debug, Parser)]
#[command(name = "torus-sweep", version)]
struct Args {
    /// Horizontal minor radius over the major radius.
    #[arg(long)]
    alpha: Option<f64>,
    /// Vertical minor radius over the major radius.
    #[arg(long)]
    beta: Option<f64>,
    /// First flux value.
    #[arg(long, allow_hyphen_values = true)]
    gamma_min: Option<f64>,
    /// Last flux value.
    #[arg(long, allow_hyphen_values = true)]
    gamma_max: Option<f64>,
    /// Number of gamma points, endpoints included.
    #[arg(long)]
    gamma_steps: Option<usize>,
    /// Minimize over nu in [-nu-max, nu-max].
    #[arg(long)]
    nu_max: Option<u32>,
    /// Use this nu instead of minimizing.
    #[arg(long, allow_hyphen_values = true)]
    fixed_nu: Option<i32>,
    /// on, off or both.
    #[arg(long)]
    curvature: Option<String>,
    /// printed or rederived; repeat or comma-separate for several.
    #[arg(long)]
    variant: Vec<String>,
    /// torus, ring or ribbon; repeat or comma-separate for several.
    #[arg(long)]
    solver: Vec<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or plotdata.
    #[arg(long)]
    format: Option<String>,
    /// key = value file read before the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Relative integration tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Eigenvalue tolerance.
    #[arg(long)]
    root_tol: Option<f64>,
}

impl Args {
    fn overrides(&self) -> Result<ConfigOverrides> {
        let joined = |v: &[String]| (!v.is_empty()).then(|| v.join(","));
        Ok(ConfigOverrides {
            alpha: self.alpha,
            beta: self.beta,
            gamma_min: self.gamma_min,
            gamma_max: self.gamma_max,
            gamma_steps: self.gamma_steps,
            nu_max: self.nu_max,
            fixed_nu: self.fixed_nu,
            curvature: self.curvature.as_deref().map(parse_curvature).transpose()?,
            variants: joined(&self.variant).as_deref().map(parse_variants).transpose()?,
            solvers: joined(&self.solver).as_deref().map(parse_solvers).transpose()?,
            output: self.out.clone(),
            format: self.format.as_deref().map(OutputFormat::from_label).transpose()?,
            tol: self.tol,
            root_tol: self.root_tol,
        })
    }
}

fn run(args: &Args) -> Result<()> {
    let mut cfg = SweepConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.clone(), source })?;
        ConfigOverrides::parse(&text)?.apply(&mut cfg);
    }
    args.overrides()?.apply(&mut cfg);

    let table = run_sweep(&cfg)?;
    for msg in &table.failures {
        eprintln!("warning: {msg}");
    }
    match &cfg.output {
        Some(path) => emit(&table, cfg.format, path),
        None => {
            let text = match cfg.format {
                OutputFormat::Csv => to_csv(&table)?,
                OutputFormat::Plotdata => to_plotdata(&table)?,
            };
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|source| Error::Io { path: PathBuf::from("<stdout>"), source })
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("torus-sweep: {e}");
            ExitCode::FAILURE
        }
    }
}
