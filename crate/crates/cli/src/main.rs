use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use skewca::report::{BowkerReport, ScanReport};
use skewca::{
    read_table, run_analyze, run_matched, scan_lambda, AnalysisConfig, Error, LambdaGrid, Metric,
    OutputFormat, Result, SCHEMA_VERSION,
};

const CONFIG_ENV: &str = "SKEWCA_CONFIG";

#[derive(Parser)]
#[command(name = "skewca", version, about = "Asymmetry analysis of square contingency tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure, decomposition, coordinates and confidence circles for one table
    Analyze {
        table: PathBuf,
        #[command(flatten)]
        opts: Options,
    },
    /// Sum and difference decomposition of two matched tables
    Matched {
        first: PathBuf,
        second: PathBuf,
        #[command(flatten)]
        opts: Options,
    },
    /// Bowker's test of symmetry
    Bowker {
        table: PathBuf,
        #[command(flatten)]
        opts: Options,
    },
    /// Leading contribution ratio over a grid of lambda values
    Scan {
        table: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        start: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        end: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[command(flatten)]
        opts: Options,
    },
}

#[derive(Args)]
struct Options {
    /// Divergence parameter: a number > -1 or hellinger, kl, cressie-read, pearson
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Significance level for confidence circles
    #[arg(long)]
    alpha: Option<String>,
    /// Coordinate metric: averaged or identity
    #[arg(long)]
    metric: Option<String>,
    /// Pair of principal axes to plot, e.g. "1,2"
    #[arg(long)]
    dims: Option<String>,
    /// Report format: json or csv
    #[arg(long)]
    format: Option<String>,
    /// Write an SVG plot to this path
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Categories to plot: rows, columns or both
    #[arg(long)]
    axes: Option<String>,
    /// key=value config file (defaults to $SKEWCA_CONFIG)
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Options {
    fn resolve(&self) -> Result<AnalysisConfig> {
        let path = self
            .config
            .clone()
            .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
        let mut config = match path {
            Some(p) => AnalysisConfig::load(&p)?,
            None => AnalysisConfig::default(),
        };
        let flags = [
            ("lambda", &self.lambda),
            ("alpha", &self.alpha),
            ("metric", &self.metric),
            ("dims", &self.dims),
            ("format", &self.format),
            ("axes", &self.axes),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        if let Some(svg) = &self.svg {
            config.svg_path = Some(svg.clone());
        }
        config.validate()?;
        Ok(config)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "plot".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}-{suffix}.svg"))
}

fn emit(
    config: &AnalysisConfig,
    json: impl FnOnce() -> String,
    csv: impl FnOnce() -> String,
) -> Result<()> {
    let text = match config.output_format {
        OutputFormat::Json => json(),
        OutputFormat::Csv => csv(),
    };
    let mut out = io::stdout().lock();
    let written = out.write_all(text.as_bytes()).and_then(|()| {
        if text.ends_with('\n') {
            Ok(())
        } else {
            out.write_all(b"\n")
        }
    });
    // a closed pipe downstream (e.g. `| head`) is not an error
    match written.and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Error::Io(e.to_string())),
        _ => Ok(()),
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Analyze { table, opts } => {
            let config = opts.resolve()?;
            let t = read_table(&table)?;
            let report = run_analyze(&config, &t)?;
            if let Some(path) = &config.svg_path {
                write_file(path, &report.to_svg(&config)?)?;
            }
            emit(&config, || report.to_json(), || report.to_csv())?;
        }
        Command::Matched { first, second, opts } => {
            let config = opts.resolve()?;
            let t1 = read_table(&first)?;
            let t2 = read_table(&second)?;
            let report = run_matched(&config, &t1, &t2)?;
            if let Some(path) = &config.svg_path {
                let (sum, difference) = report.to_svgs(&config)?;
                write_file(&with_suffix(path, "sum"), &sum)?;
                write_file(&with_suffix(path, "difference"), &difference)?;
            }
            emit(&config, || report.to_json(), || report.to_csv())?;
        }
        Command::Bowker { table, opts } => {
            let config = opts.resolve()?;
            let report = BowkerReport::new(&read_table(&table)?);
            emit(&config, || report.to_json(), || report.to_csv())?;
        }
        Command::Scan { table, start, end, step, opts } => {
            let config = opts.resolve()?;
            let default = LambdaGrid::default();
            let grid = LambdaGrid::new(
                start.unwrap_or(default.start),
                end.unwrap_or(default.end),
                step.unwrap_or(default.step),
            )?;
            let metric = config.metric.unwrap_or(Metric::Averaged);
            let scan = scan_lambda(&read_table(&table)?, &grid, metric)?;
            let report = ScanReport {
                schema_version: SCHEMA_VERSION,
                metric,
                scan,
            };
            emit(&config, || report.to_json(), || report.to_csv())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("skewca: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
