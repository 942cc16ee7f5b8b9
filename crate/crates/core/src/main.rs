use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pdex::app::{self, AppError, Table};
use pdex::closed_form::Evaluator;
use pdex::config::{parse_config, Engine, OutputFormat, Query, RunConfig};
use pdex::exactnum::{parse_rational, Rational};
use pdex::models::{HeatParams, RandomWalkParams};
use pdex::oracle::Region;

#[derive(Parser)]
#[command(
    name = "pdex",
    version,
    about = "Exact solutions of linear partial difference equations"
)]
struct Cli {
    /// Evaluate tridiagonal equations with the uncorrected exponent `c^(j-n)`.
    #[arg(long = "literal-theorem-2-1", global = true)]
    literal: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the query of a config and write a value table.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Compare the closed form with direct iteration on the query.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Replace the query's last time.
        #[arg(long)]
        tmax: Option<usize>,
    },
    /// Built-in models.
    Demo {
        #[command(subcommand)]
        model: Demo,
    },
    /// List the coefficients of a power of the stencil symbol.
    Expand {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        power: u32,
    },
}

#[derive(Subcommand)]
enum Demo {
    RandomWalk {
        #[arg(long, value_parser = rational)]
        p: Rational,
        #[arg(long, value_parser = rational)]
        d: Rational,
        #[arg(long, value_parser = rational)]
        q: Rational,
        #[arg(long)]
        steps: usize,
    },
    Heat {
        #[arg(long, value_parser = rational)]
        r: Rational,
        #[arg(long)]
        steps: usize,
    },
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Mismatch,
}

impl From<AppError> for Failure {
    fn from(e: AppError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn load(path: &Path, literal: bool) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = parse_config(&text).map_err(|e| Failure::Usage(e.to_string()))?;
    if literal {
        cfg.evaluator = Evaluator::TridiagonalLiteral;
    }
    if cfg.unstable {
        eprintln!("warning: r > 1/2, the heat scheme is unstable");
    }
    Ok(cfg)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(table: &Table, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => app::render_csv(table),
        OutputFormat::Json => app::render_json(table),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve {
            config,
            out,
            format,
        } => {
            let cfg = load(&config, cli.literal)?;
            let format = match format {
                Some(Format::Csv) => OutputFormat::Csv,
                Some(Format::Json) => OutputFormat::Json,
                None => cfg.format,
            };
            let out = out.or_else(|| cfg.output_path.clone());
            let table = app::solve(&cfg, cfg.engine)?;
            emit(&render(&table, format), out.as_deref())?;
            if cfg.engine == Engine::Verify {
                let report = app::verify(&cfg)?;
                if !report.passed() {
                    eprint!("{}", app::render_report(&report));
                    return Err(Failure::Mismatch);
                }
            }
            Ok(())
        }
        Command::Verify { config, tmax } => {
            let mut cfg = load(&config, cli.literal)?;
            if let Some(t_max) = tmax {
                cfg.query = match cfg.query {
                    Query::Region(r) => Query::Region(Region {
                        t_min: r.t_min.min(t_max),
                        t_max,
                        bounds: pdex::config::default_bounds(&cfg.spec, &cfg.initial, t_max)
                            .map_err(|e| Failure::Usage(e.to_string()))?
                            .union(&r.bounds),
                    }),
                    Query::Points(pts) => {
                        Query::Points(pts.into_iter().filter(|(_, t)| *t <= t_max).collect())
                    }
                };
                if cfg.query.pairs().is_empty() {
                    return Err(Failure::Usage("no query points at or below --tmax".into()));
                }
            }
            let report = app::verify(&cfg)?;
            print!("{}", app::render_report(&report));
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Mismatch)
            }
        }
        Command::Demo { model } => {
            let table = match model {
                Demo::RandomWalk { p, d, q, steps } => {
                    let params = RandomWalkParams::new(p, d, q)
                        .map_err(|e| Failure::Usage(e.to_string()))?;
                    app::random_walk_table(&params, steps)?
                }
                Demo::Heat { r, steps } => {
                    let params = HeatParams::new(r).map_err(|e| Failure::Usage(e.to_string()))?;
                    if !params.is_stable() {
                        eprintln!("warning: r > 1/2, the heat scheme is unstable");
                    }
                    app::heat_table(&params, steps)?
                }
            };
            emit(&app::render_csv(&table), None)
        }
        Command::Expand { config, power } => {
            let cfg = load(&config, cli.literal)?;
            emit(&app::render_expansion(&cfg.spec, &cfg.initial, power), None)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
