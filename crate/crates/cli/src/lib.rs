//! Command-line runner for the percolation experiments. Every run writes
//! JSON-Lines records; `report` turns record files into CSV and plot data.

use std::io::{BufReader, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use perc_core::parallel::with_workers;
use perc_core::PercError;

pub mod commands;
pub mod params;
pub mod record;
pub mod report;

use params::Params;
use record::Recorder;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
    Core(PercError),
}

impl From<PercError> for CliError {
    fn from(e: PercError) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    /// 2 for bad input, 3 when the computation cannot finish as asked.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                PercError::NonConvergence { .. } | PercError::TooLarge { .. } => 3,
                PercError::InvalidSpec(_)
                | PercError::InvalidArgument(_)
                | PercError::InfeasibleTarget { .. }
                | PercError::CoordinateOverflow(_) => 2,
                PercError::DegenerateFit(_) | PercError::EmptyConditioning { .. } => 1,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "perc",
    version,
    about = "Bond percolation experiments on tori and lattices"
)]
pub struct Cli {
    /// JSON parameter document, or a record to replay. Flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed. Precedence: this flag, then PERC_SEED, then the config, then 0.
    #[arg(long, global = true, env = "PERC_SEED")]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write the bond reveals of the first coupled replicate as JSON lines,
    /// to `<out>.trace.jsonl` or standard error.
    #[arg(long, global = true)]
    pub trace: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact enumeration on a small torus.
    Exact(Params),
    /// Susceptibility on the torus or the lattice.
    Chi(Params),
    /// Two-point function at a point.
    Tau(Params),
    /// Correlation length from the axis profile.
    Xi(Params),
    /// Wrap-around two-point mass.
    Tildechi(Params),
    /// Largest-cluster distribution.
    Cmax(Params),
    /// Internal critical point, with optional subcritical checks.
    Pc(Params),
    /// Scaling-window probabilities across volumes.
    Window(Params),
    /// Susceptibility exponent below a reference critical point.
    Gamma(Params),
    /// Two-stage coupling invariants and marginal law.
    CouplingCheck(Params),
    /// Correlation inequalities or the torus lower bound.
    Ineq(Params),
    /// Erdős–Rényi largest-component scaling.
    Er(Params),
    /// Boundary-condition experiments.
    Boundary(Params),
    /// Summarize record files into CSV and plot data.
    Report(ReportArgs),
}

#[derive(Debug, clap::Args)]
pub struct ReportArgs {
    /// JSON-Lines record files.
    pub inputs: Vec<PathBuf>,
    /// Directory for the plot files; defaults to the directory of --out, or the current one.
    #[arg(long)]
    pub plots: Option<PathBuf>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Exact(_) => "exact",
            Command::Chi(_) => "chi",
            Command::Tau(_) => "tau",
            Command::Xi(_) => "xi",
            Command::Tildechi(_) => "tildechi",
            Command::Cmax(_) => "cmax",
            Command::Pc(_) => "pc",
            Command::Window(_) => "window",
            Command::Gamma(_) => "gamma",
            Command::CouplingCheck(_) => "coupling-check",
            Command::Ineq(_) => "ineq",
            Command::Er(_) => "er",
            Command::Boundary(_) => "boundary",
            Command::Report(_) => "report",
        }
    }
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(path) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn report(cli: &Cli, args: &ReportArgs) -> Result<(), CliError> {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for path in &args.inputs {
        let file = std::fs::File::open(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        records.extend(report::read_records(
            BufReader::new(file),
            &path.display().to_string(),
            &mut errors,
        )?);
    }
    for e in &errors {
        eprintln!("skipped {e}");
    }
    report::write_csv(&records, open_out(&cli.out)?)?;
    let dir = match (&args.plots, &cli.out) {
        (Some(d), _) => d.clone(),
        (None, Some(out)) => out.parent().map(PathBuf::from).unwrap_or_default(),
        (None, None) => PathBuf::from("."),
    };
    report::write_plots(
        &records,
        if dir.as_os_str().is_empty() {
            ".".as_ref()
        } else {
            &dir
        },
    )
}

fn experiment(cli: &Cli, given: &Params) -> Result<(), CliError> {
    let name = cli.command.name();
    let params = match &cli.config {
        Some(path) => params::load_config(path)?.overlay(given),
        None => given.clone(),
    };
    if let Some(c) = &params.command {
        if c != name {
            return Err(CliError::Validation(format!(
                "field `command`: config is for `{c}`, not `{name}`"
            )));
        }
    }
    let seed = cli.seed.or(params.seed).unwrap_or(0);
    let mut sink = open_out(&cli.out)?;
    let mut trace: Option<Box<dyn Write>> = match (cli.trace, &cli.out) {
        (false, _) => None,
        (true, Some(out)) => {
            let mut path = out.clone().into_os_string();
            path.push(".trace.jsonl");
            Some(open_out(&Some(path.into()))?)
        }
        (true, None) => Some(Box::new(std::io::stderr().lock())),
    };
    let mut rec = Recorder::new(name, params.to_record_value(), seed, &mut *sink);
    match &cli.command {
        Command::Exact(_) => commands::exact(&params, &mut rec),
        Command::Chi(_) => commands::chi(&params, &mut rec),
        Command::Tau(_) => commands::tau(&params, &mut rec),
        Command::Xi(_) => commands::xi(&params, &mut rec),
        Command::Tildechi(_) => commands::tildechi(&params, &mut rec),
        Command::Cmax(_) => commands::cmax(&params, &mut rec),
        Command::Pc(_) => commands::pc(&params, &mut rec),
        Command::Window(_) => commands::window(&params, &mut rec),
        Command::Gamma(_) => commands::gamma(&params, &mut rec),
        Command::CouplingCheck(_) => commands::coupling_check(
            &params,
            trace.as_mut().map(|t| &mut **t as &mut dyn Write),
            &mut rec,
        ),
        Command::Ineq(_) => commands::ineq(&params, &mut rec),
        Command::Er(_) => commands::er(&params, &mut rec),
        Command::Boundary(_) => commands::boundary(&params, &mut rec),
        Command::Report(_) => unreachable!(),
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let go = || match &cli.command {
        Command::Report(args) => report(cli, args),
        Command::Exact(p)
        | Command::Chi(p)
        | Command::Tau(p)
        | Command::Xi(p)
        | Command::Tildechi(p)
        | Command::Cmax(p)
        | Command::Pc(p)
        | Command::Window(p)
        | Command::Gamma(p)
        | Command::CouplingCheck(p)
        | Command::Ineq(p)
        | Command::Er(p)
        | Command::Boundary(p) => experiment(cli, p),
    };
    match cli.workers {
        Some(0) => Err(CliError::Validation(
            "field `workers`: must be at least 1".into(),
        )),
        Some(w) => with_workers(w, go),
        None => go(),
    }
}
