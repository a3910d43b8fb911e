use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spinspectra::analysis::cosine_similarity;
use spinspectra::cluster::GrowthRule;
use spinspectra::io::{
    read_molecule, read_spectrum, spectrum_to_csv, spectrum_to_json, spectrum_to_svg,
};
use spinspectra::study::{self, OutputFormat, RunConfig};
use spinspectra::{Error, Spectrum};

#[derive(Parser)]
#[command(
    name = "spinspectra",
    version,
    about = "Liquid-state NMR spectra from spin Hamiltonians"
)]
struct Cli {
    /// Worker threads (default: hardware parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one spectrum.
    Simulate {
        molecule: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Force exact diagonalisation regardless of size.
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Also write an SVG plot.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Output file (default: standard output).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// ε of each cluster size against the exact (or largest) spectrum.
    Converge {
        molecule: PathBuf,
        /// Cluster sizes, e.g. 1..8.
        #[arg(long, value_parser = parse_range)]
        sizes: RangeInclusive<usize>,
        /// `all` or a comma list of FIELD[:BROADENING] presets, with FIELD in
        /// high/low/very-low and BROADENING in high/low.
        #[arg(long, default_value = "all")]
        presets: String,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write every computed spectrum as CSV into this directory.
        #[arg(long)]
        spectra_dir: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Cosine similarity of two spectrum files.
    Compare { a: PathBuf, b: PathBuf },
    /// Cluster-solver timing and memory estimates per cluster size.
    Bench {
        molecule: PathBuf,
        #[arg(long, value_parser = parse_range)]
        sizes: RangeInclusive<usize>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[command(flatten)]
        run: RunArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 400.0)]
    field_mhz: f64,
    /// Lorentzian full width at half maximum.
    #[arg(long, default_value_t = 1.0)]
    fwhm_hz: f64,
    #[arg(long, default_value_t = 12)]
    max_cluster: usize,
    /// Sample points (default 2000, or 20000 for FWHM ≤ 0.1 Hz).
    #[arg(long)]
    points: Option<usize>,
    /// Only nuclei of this isotope contribute signal (e.g. 1H).
    #[arg(long)]
    detect_isotope: Option<String>,
    /// Regulariser of the cluster importance metric, rad/s.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Largest Hilbert-space dimension any diagonalisation may use.
    #[arg(long, default_value_t = spinspectra::spin::DEFAULT_MAX_DIMENSION)]
    max_dimension: usize,
    #[arg(long, value_enum, default_value_t = Growth::MaxOverMembers)]
    growth: Growth,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Growth {
    MaxOverMembers,
    DirectOnly,
}

impl RunArgs {
    fn config(&self, threads: Option<usize>) -> RunConfig {
        RunConfig {
            field_mhz: self.field_mhz,
            fwhm_hz: self.fwhm_hz,
            max_cluster: self.max_cluster,
            points: self.points,
            detect_isotope: self.detect_isotope.clone(),
            epsilon: self.epsilon,
            exact: false,
            threads,
            format: OutputFormat::Csv,
            max_dimension: self.max_dimension,
            growth: match self.growth {
                Growth::MaxOverMembers => GrowthRule::MaxOverMembers,
                Growth::DirectOnly => GrowthRule::DirectOnly,
            },
        }
    }
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: usize = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok(a..=b)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse(_) | Error::AxisMismatch(..) => 2,
        Error::DimensionCap { .. } => 3,
        _ => 1,
    }
}

fn hint(err: &Error) -> Option<&'static str> {
    match err {
        Error::DimensionCap { .. } => {
            Some("lower --max-cluster, drop --exact, or raise --max-dimension")
        }
        _ => None,
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Error> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn render(spectrum: &Spectrum, format: Format) -> Result<String, Error> {
    match format {
        Format::Csv => spectrum_to_csv(spectrum),
        Format::Json => Ok(spectrum_to_json(spectrum)),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    study::init_runtime(cli.threads)?;
    match cli.command {
        Command::Simulate {
            molecule,
            run,
            exact,
            format,
            svg,
            output,
        } => {
            let system = read_molecule(&molecule)?;
            let config = RunConfig {
                exact,
                ..run.config(cli.threads)
            };
            let sim = study::simulate(&system, &config)?;
            log::info!(
                "{:?}: {} sticks, {} active nuclei, {:.3} s",
                sim.method,
                sim.sticks.len(),
                sim.active_nuclei,
                sim.seconds
            );
            let text = render(&sim.spectrum, format)?;
            if let Some(path) = svg {
                std::fs::write(
                    path,
                    spectrum_to_svg(&sim.spectrum, &molecule.display().to_string()),
                )?;
            }
            emit(output.as_deref(), &text)
        }
        Command::Converge {
            molecule,
            sizes,
            presets,
            run,
            format,
            spectra_dir,
            output,
        } => {
            let system = read_molecule(&molecule)?;
            let regimes = study::parse_regimes(&presets)?;
            let config = run.config(cli.threads);
            let report = study::converge(&system, sizes, &regimes, &config, spectra_dir.is_some())?;
            if let Some(dir) = spectra_dir {
                std::fs::create_dir_all(&dir)?;
                for (regime, size, spectrum) in &report.spectra {
                    let size = size.map_or("exact".to_string(), |m| m.to_string());
                    let name = format!("{}MHz_{}Hz_{}.csv", regime.field_mhz, regime.fwhm_hz, size);
                    std::fs::write(dir.join(name), spectrum_to_csv(spectrum)?)?;
                }
            }
            let text = match format {
                Format::Csv => report.to_csv(),
                Format::Json => serde_json::to_string_pretty(&report.rows)? + "\n",
            };
            emit(output.as_deref(), &text)
        }
        Command::Compare { a, b } => {
            let (a, b) = (read_spectrum(a)?, read_spectrum(b)?);
            let report = cosine_similarity(&a, &b)?;
            println!("cos_theta,epsilon");
            println!("{},{}", report.cosine, report.epsilon);
            Ok(())
        }
        Command::Bench {
            molecule,
            sizes,
            repeats,
            run,
            output,
        } => {
            let system = read_molecule(&molecule)?;
            let rows = study::bench(&system, sizes, repeats, &run.config(cli.threads))?;
            emit(output.as_deref(), &study::bench_to_csv(&rows))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if let Some(h) = hint(&err) {
                eprintln!("hint: {h}");
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
