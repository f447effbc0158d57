use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand};
use sonobeam::BeamformerKind;
use sonobeam_cli::commands;
use sonobeam_cli::config::{parse_override, RunConfig};
use sonobeam_cli::{CliError, CliResult};

/// Linear-array ultrasound reconstruction pipeline.
#[derive(Parser)]
#[command(name = "sonobeam", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// key = value run configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key; repeatable, applied after the file
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn load(&self, flags: &[(&str, Option<String>)]) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        for s in &self.set {
            let (k, v) = parse_override(s)?;
            cfg.apply(&k, &v)?;
        }
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.apply(k, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn algo_parser() -> impl TypedValueParser<Value = BeamformerKind> {
    PossibleValuesParser::new(BeamformerKind::ALL.map(|k| k.name()))
        .map(|s| s.parse::<BeamformerKind>().unwrap())
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize an RF frame and write it as a URF1 container
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Target channel SNR in dB, or "off"
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Beamform an RF container into a UIM1 envelope image
    Beamform {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        rf: Option<PathBuf>,
        #[arg(long, value_parser = algo_parser())]
        algo: Option<BeamformerKind>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Operation-count report; defaults to <out>.ops.txt
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate the metrics listed in a regions file
    Metrics {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        regions: PathBuf,
        /// Defaults to standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a log-compressed grayscale PGM
    Render {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value_t = 70.0)]
        dynamic_range: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the lateral profile at a depth as CSV
    Profile {
        #[arg(long)]
        image: PathBuf,
        /// Depth in mm
        #[arg(long)]
        depth: f64,
        /// Floor of the dB profile
        #[arg(long, default_value_t = commands::ANALYSIS_FLOOR_DB)]
        dynamic_range: f64,
        /// Defaults to standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn required(path: Option<PathBuf>, what: &str) -> CliResult<PathBuf> {
    path.ok_or_else(|| CliError::Usage(format!("no {what} given (flag or config key)")))
}

fn emit(text: &str, out: Option<PathBuf>) -> CliResult<()> {
    match out {
        Some(p) => sonobeam_cli::container::write_atomic(&p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate {
            cfg,
            seed,
            snr,
            out,
        } => {
            let cfg = cfg.load(&[("seed", seed.map(|s| s.to_string())), ("snr_db", snr)])?;
            let out = required(
                out.or(cfg.rf_path.clone()),
                "output path (--out or rf_path)",
            )?;
            let summary = commands::simulate(&cfg, &out)?;
            println!("{summary}");
        }
        Command::Beamform {
            cfg,
            rf,
            algo,
            out,
            report,
        } => {
            let cfg = cfg.load(&[("algo", algo.map(|a| a.name().to_string()))])?;
            let rf = required(rf.or(cfg.rf_path.clone()), "RF input (--rf or rf_path)")?;
            let out = required(
                out.or(cfg.image_path.clone()),
                "image output (--out or image_path)",
            )?;
            let report = report.unwrap_or_else(|| {
                let mut s = out.clone().into_os_string();
                s.push(".ops.txt");
                s.into()
            });
            let summary = commands::beamform(&cfg, &rf, &out, &report)?;
            print!("{}", summary.report());
        }
        Command::Metrics {
            image,
            regions,
            out,
        } => emit(&commands::metrics(&image, &regions)?, out)?,
        Command::Render {
            image,
            dynamic_range,
            out,
        } => commands::render(&image, dynamic_range, &out)?,
        Command::Profile {
            image,
            depth,
            dynamic_range,
            out,
        } => emit(
            &commands::profile(&image, depth * 1e-3, dynamic_range)?,
            out,
        )?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sonobeam: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
