use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bcoh_core::eightmodel::{GeometryParams, ModelGeometry, Point, TransformationElement};
use bcoh_core::induce::{Induction, Integrator};
use bcoh_lab::config::read_json;
use bcoh_lab::experiments::{self, ConvergenceRow};
use bcoh_lab::report::{write_csv, Report};
use bcoh_lab::{CochainDescriptor, ExperimentConfig, LabError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "bcoh", version, about = "Induced bounded cochains on finger-pushing transformations")]
struct Cli {
    /// Geometry JSON; the default model when omitted.
    #[arg(long, global = true)]
    geometry: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the measurable cocycle at one point or a CSV batch of `element,x,y`.
    Gamma {
        #[arg(long, required_unless_present = "batch")]
        element: Option<TransformationElement>,
        #[arg(long, value_parser = parse_point, required_unless_present = "batch")]
        point: Option<Point>,
        #[arg(long, conflicts_with_all = ["element", "point"])]
        batch: Option<PathBuf>,
    },
    /// Induce a cochain on a tuple of elements.
    Induce {
        /// Cochain descriptor JSON.
        #[arg(long)]
        cochain: PathBuf,
        /// Comma-separated words, `e` for the identity.
        #[arg(long, value_delimiter = ',', required = true)]
        tuple: Vec<TransformationElement>,
        #[arg(long, value_enum, default_value = "regions")]
        mode: CliMode,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Required in `mc` mode.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Induced quasimorphism values for the configured words.
    Qm(ConfigArgs),
    /// Sweep the epsilon ladder and emit the convergence table.
    Converge {
        #[command(flatten)]
        run: ConfigArgs,
        /// CSV destination; the config `output`, else stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Weighted simplex-volume decomposition of an induced volume cocycle.
    Volume {
        #[command(flatten)]
        run: ConfigArgs,
        #[arg(long, value_delimiter = ',')]
        tuple: Option<Vec<TransformationElement>>,
    },
    /// Region measures of the geometry.
    Regions {
        /// Comma-separated values of epsilon; the geometry's own when omitted.
        #[arg(long, value_delimiter = ',')]
        epsilon: Vec<f64>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the integrator seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Writes a JSON report embedding the resolved config.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMode {
    Regions,
    Mc,
}

#[derive(Serialize, Deserialize)]
struct GammaRecord {
    element: TransformationElement,
    x: f64,
    y: f64,
    region: String,
    word: String,
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let x: f64 = x.trim().parse().map_err(|e| format!("{e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("{e}"))?;
    Ok(Point::new(x, y))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bcoh: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn geometry(path: Option<&Path>) -> Result<ModelGeometry, LabError> {
    let params: GeometryParams = match path {
        Some(p) => read_json(p)?,
        None => GeometryParams::default(),
    };
    Ok(ModelGeometry::new(params)?)
}

fn load_config(args: &ConfigArgs, geometry: Option<&Path>) -> Result<ExperimentConfig, LabError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(g) = geometry {
        cfg.geometry = bcoh_lab::GeometrySource::Inline(read_json(g)?);
    }
    if let Some(seed) = args.seed {
        cfg.integrator.seed = seed;
    }
    Ok(cfg)
}

fn print_json<T: Serialize>(value: &T) -> Result<(), LabError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| LabError::Config(e.to_string()))?;
    writeln!(io::stdout(), "{text}")?;
    Ok(())
}

fn write_report<T: Serialize + serde::de::DeserializeOwned + Clone>(
    args: &ConfigArgs,
    cfg: &ExperimentConfig,
    results: &T,
) -> Result<(), LabError> {
    let report = Report::new(cfg.clone(), results.clone());
    match &args.report {
        Some(path) => report.write(path),
        None => print_json(&report),
    }
}

fn run(cli: Cli) -> Result<(), LabError> {
    let geom_path = cli.geometry.as_deref();
    match cli.command {
        Command::Gamma { element, point, batch } => {
            let ind = Induction::new(geometry(geom_path)?)?;
            let record = |g: TransformationElement, p: Point| -> Result<GammaRecord, LabError> {
                let word = ind.gamma(&g, p)?;
                Ok(GammaRecord {
                    element: g,
                    x: p.x,
                    y: p.y,
                    region: ind.geometry().classify_region(p).to_string(),
                    word: word.to_string(),
                })
            };
            match (batch, element, point) {
                (Some(path), _, _) => {
                    let file = File::open(&path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
                    let inputs: Vec<(TransformationElement, f64, f64)> = csv::Reader::from_reader(file)
                        .deserialize()
                        .collect::<Result<_, _>>()
                        .map_err(|e| LabError::Config(format!("csv: {e}")))?;
                    let rows = inputs
                        .into_iter()
                        .map(|(g, x, y)| record(g, Point::new(x, y)))
                        .collect::<Result<Vec<_>, _>>()?;
                    write_csv(io::stdout().lock(), &rows)
                }
                (None, Some(g), Some(p)) => print_json(&record(g, p)?),
                _ => Err(LabError::Config("gamma needs --element and --point, or --batch".into())),
            }
        }
        Command::Induce {
            cochain,
            tuple,
            mode,
            samples,
            seed,
        } => {
            let descriptor: CochainDescriptor = read_json(&cochain)?;
            let integ = match (mode, seed) {
                (CliMode::Mc, None) => return Err(LabError::Config("--seed is required in mc mode".into())),
                (CliMode::Mc, Some(s)) => Integrator::monte_carlo(samples, s),
                (CliMode::Regions, s) => Integrator::regions(samples, s.unwrap_or(0)),
            };
            let c = descriptor.build()?;
            let ind = Induction::new(geometry(geom_path)?)?;
            print_json(&ind.induce(&*c, &tuple, &integ)?)
        }
        Command::Qm(args) => {
            let cfg = load_config(&args, geom_path)?;
            let rows = experiments::qm_table(&cfg)?;
            write_report(&args, &cfg, &rows)
        }
        Command::Converge { run, csv } => {
            let cfg = load_config(&run, geom_path)?;
            let rows = experiments::converge_sweep(&cfg)?;
            match csv.or_else(|| cfg.output.clone()) {
                Some(path) => write_csv(File::create(path)?, &rows)?,
                None => write_csv(io::stdout().lock(), &rows)?,
            }
            if run.report.is_some() {
                write_report(&run, &cfg, &rows)?;
            }
            let failed: Vec<&ConvergenceRow> = rows.iter().filter(|r| !r.holds()).collect();
            if let Some(r) = failed.first() {
                return Err(LabError::Invariant(format!(
                    "{} row(s) exceed the collar bound, first at word {} epsilon {}",
                    failed.len(),
                    r.word,
                    r.epsilon
                )));
            }
            Ok(())
        }
        Command::Volume { run, tuple } => {
            let cfg = load_config(&run, geom_path)?;
            let tuple = tuple
                .or_else(|| cfg.tuple.clone())
                .ok_or_else(|| LabError::Config("volume needs a tuple in the config or on the command line".into()))?;
            let report = experiments::volume_class_eval(&cfg, &tuple)?;
            write_report(&run, &cfg, &report)?;
            let area = cfg.model()?.area();
            if !report.within_volume_bound(area) {
                return Err(LabError::Invariant(format!("total {} exceeds the ideal-simplex bound", report.total)));
            }
            if !report.agrees_with_monte_carlo() {
                return Err(LabError::Invariant(format!(
                    "weighted total {} and Monte Carlo {} differ by more than 3σ",
                    report.total, report.monte_carlo.value
                )));
            }
            Ok(())
        }
        Command::Regions { epsilon } => {
            let geom = geometry(geom_path)?;
            let eps = if epsilon.is_empty() { vec![geom.epsilon()] } else { epsilon };
            let rows = experiments::regions_table(&geom, &eps)?;
            write_csv(io::stdout().lock(), &rows)
        }
    }
}
