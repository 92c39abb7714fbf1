use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cubepersist::diagram::PersistenceDiagram;
use cubepersist::estimator::{block_average, Bandwidth};
use cubepersist::grid::{GridSpec, ScalarField};
use cubepersist::harness::{emit_report, run, ExperimentConfig, ExperimentKind, ExperimentReport};
use cubepersist::metrics::{bottleneck, bottleneck_all_degrees};
use cubepersist::persistence::{compute_pairs, write_cell_dump, CubicalFiltration, Strategy};
use cubepersist::rng::{purpose, SeedStream};
use cubepersist::signals::{NoiseModel, SignalSpec};
use cubepersist::{Error, Result};

#[derive(Parser)]
#[command(name = "cubepersist", version, about = "Persistence diagrams of noisy grid signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Persistence diagram of a field stored in CPF format.
    Diagram {
        #[arg(long)]
        field: PathBuf,
        /// Average over blocks of this many samples per axis first.
        #[arg(long)]
        block: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Also write every cell with its value and partner.
        #[arg(long)]
        debug_cells: Option<PathBuf>,
    },
    /// Bottleneck distance between two diagram CSV files.
    Bottleneck {
        a: PathBuf,
        b: PathBuf,
        /// Restrict to one homological degree.
        #[arg(long)]
        degree: Option<usize>,
    },
    /// KL and separation sweep for the lower-bound families.
    Lowerbound {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo tail of the block noise statistic.
    NoiseTail {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Raster check of the sublevel-set inclusions.
    Sandwich {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a signal on a grid, optionally with noise, into a CPF file.
    Sample {
        /// Signal spec as a JSON file.
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { config, out } => experiment(&config, None, out),
        Command::Lowerbound { config, out } => experiment(&config, Some(ExperimentKind::LowerBoundKl), out),
        Command::NoiseTail { config, out } => experiment(&config, Some(ExperimentKind::NoiseTail), out),
        Command::Sandwich { config, out } => experiment(&config, Some(ExperimentKind::Sandwich), out),
        Command::Diagram { field, block, out, debug_cells } => diagram(&field, block, &out, debug_cells.as_deref()),
        Command::Bottleneck { a, b, degree } => {
            let da = PersistenceDiagram::read_csv_file(&a)?;
            let db = PersistenceDiagram::read_csv_file(&b)?;
            let dist = match degree {
                Some(s) => bottleneck(&da, &db, s),
                None => bottleneck_all_degrees(&da, &db),
            };
            println!("{}", fmt_significant(dist, 12));
            Ok(())
        }
        Command::Sample { signal, n, sigma, seed, out } => {
            let text = std::fs::read_to_string(&signal)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", signal.display())))?;
            let spec = SignalSpec::from_json(&text)?;
            let clean = spec.sample_on_grid(GridSpec::new(spec.dim(), n)?)?;
            let stream = SeedStream::new(seed).derive(&[purpose::NOISE]);
            let obs = NoiseModel::new(sigma)?.add_noise(&clean, &mut stream.rng());
            obs.write_cpf(&out)
        }
    }
}

fn load_config(path: &Path, kind: Option<ExperimentKind>) -> Result<ExperimentConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    if let (Some(kind), Some(obj)) = (kind, value.as_object_mut()) {
        obj.insert("kind".into(), serde_json::to_value(kind)?);
    }
    ExperimentConfig::from_json(&value.to_string())
}

fn experiment(path: &Path, kind: Option<ExperimentKind>, out: Option<PathBuf>) -> Result<()> {
    let cfg = load_config(path, kind)?;
    let dir = out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("cubepersist-out").join(cfg.kind.as_str()));
    let report = run(&cfg)?;
    emit_report(&report, &dir)?;
    print_checks(&report);
    println!("wrote {}", dir.display());
    Ok(())
}

fn print_checks(report: &ExperimentReport) {
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
}

fn diagram(field: &Path, block: Option<usize>, out: &Path, debug: Option<&Path>) -> Result<()> {
    let field = ScalarField::read_cpf(field)?;
    let filt = match block {
        Some(b) => CubicalFiltration::from_blocks(&block_average(&field, Bandwidth::new(b, field.grid().side())?)?)?,
        None => CubicalFiltration::from_field(&field)?,
    };
    let pairing = compute_pairs(&filt, Strategy::UnionFind);
    pairing.diagram(&filt).sorted().write_csv_file(out)?;
    if let Some(path) = debug {
        write_cell_dump(&filt, &pairing, BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

/// Decimal with `digits` significant digits; `inf` for infinity.
fn fmt_significant(v: f64, digits: usize) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}
