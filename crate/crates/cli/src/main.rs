//! `p2v`: run scenarios, plot traces, exercise the PSM codec.
//!
//! Exit status: 0 success, 1 runtime error, 2 configuration error.

mod overrides;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{ArgGroup, Args, Parser, Subcommand};
use p2v_core::psm_codec::{self, CodecError};
use p2v_core::render::{render_geojson, render_svg, RenderStyle, Scene};
use p2v_core::sim::{self, RunSummary, ScenarioConfig, SimError};
use p2v_core::trace;

#[derive(Parser)]
#[command(
    name = "p2v",
    version,
    about = "Pedestrian-to-vehicle collision warning toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its per-tick trace as CSV.
    Run(RunArgs),
    /// Render a trace as SVG, with a GeoJSON sidecar next to it.
    Plot(PlotArgs),
    /// Encode or decode a single PSM frame.
    #[command(subcommand)]
    Codec(CodecCommand),
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["default", "config"])))]
struct RunArgs {
    /// Use the built-in T-intersection scenario.
    #[arg(long)]
    default: bool,
    /// Scenario config file (JSON).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Trace output path.
    #[arg(long, value_name = "PATH", default_value = "trace.csv")]
    out: PathBuf,
    /// Replace a config value, e.g. `channel.seed=7`. Repeatable.
    #[arg(long = "override", value_name = "K=V")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long, value_name = "PATH")]
    trace: PathBuf,
    /// SVG output path; the GeoJSON goes to the same path with a .geojson extension.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Scenario used for origin and obstructions. Defaults to the sidecar
    /// written by `run`, then to the built-in scenario.
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CodecCommand {
    /// Encode `field=value` pairs; unspecified fields take their defaults.
    Encode { fields: Vec<String> },
    /// Decode a 40-character hex frame.
    Decode { hex: String },
}

enum Failure {
    Runtime(String),
    Config(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(format!("{e:#}"))
    }
}

/// Scenario sidecar path for a trace: `trace.csv` -> `trace.scenario.json`.
fn scenario_sidecar(trace_path: &Path) -> PathBuf {
    trace_path.with_extension("scenario.json")
}

fn load_config(args: &RunArgs) -> Result<ScenarioConfig, Failure> {
    let mut doc = if args.default {
        serde_json::to_value(sim::default_scenario()).expect("config serializes")
    } else {
        let path = args.config.as_ref().expect("clap enforces a source");
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
    };
    for o in &args.overrides {
        overrides::apply(&mut doc, o).map_err(Failure::Config)?;
    }
    let config: ScenarioConfig =
        serde_json::from_value(doc).map_err(|e| Failure::Config(format!("config: {e}")))?;
    config
        .validate()
        .map_err(|e| Failure::Config(e.to_string()))?;
    Ok(config)
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let config = load_config(args)?;
    let records = sim::run_scenario(&config).map_err(|e| match e {
        SimError::ConfigInvalid(_) => Failure::Config(e.to_string()),
        SimError::Runtime { .. } => Failure::Runtime(e.to_string()),
    })?;
    let file =
        fs::File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    trace::write_records(std::io::BufWriter::new(file), &records)
        .with_context(|| format!("writing {}", args.out.display()))?;
    let sidecar = scenario_sidecar(&args.out);
    let json = serde_json::to_string_pretty(&config).expect("config serializes");
    fs::write(&sidecar, json + "\n").with_context(|| format!("writing {}", sidecar.display()))?;
    println!("{}", RunSummary::from_records(&records));
    Ok(())
}

fn cmd_plot(args: &PlotArgs) -> Result<(), Failure> {
    let file =
        fs::File::open(&args.trace).with_context(|| format!("opening {}", args.trace.display()))?;
    let rows = trace::read_trace(std::io::BufReader::new(file))
        .with_context(|| format!("reading {}", args.trace.display()))?;

    let scenario_path = args
        .scenario
        .clone()
        .or_else(|| Some(scenario_sidecar(&args.trace)).filter(|p| p.exists()));
    let config = match scenario_path {
        Some(p) => {
            let text =
                fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => sim::default_scenario(),
    };
    let scene = Scene::from(&config);
    let style = RenderStyle::default();

    let svg = render_svg(&rows, &scene, &style).context("rendering")?;
    let geojson = render_geojson(&rows, &scene, &style).context("rendering")?;
    fs::write(&args.out, svg).with_context(|| format!("writing {}", args.out.display()))?;
    let gj_path = args.out.with_extension("geojson");
    fs::write(&gj_path, geojson.to_string() + "\n")
        .with_context(|| format!("writing {}", gj_path.display()))?;
    Ok(())
}

fn codec_failure(e: CodecError) -> Failure {
    // the message already starts with the error name
    Failure::Runtime(e.to_string())
}

fn cmd_codec(cmd: &CodecCommand) -> Result<(), Failure> {
    match cmd {
        CodecCommand::Encode { fields } => {
            let msg = psm_codec::from_field_pairs(fields.iter().map(String::as_str))
                .map_err(|e| Failure::Runtime(format!("InvalidField: {e}")))?;
            let frame = psm_codec::encode_psm(&msg).map_err(codec_failure)?;
            println!("{}", frame.to_hex());
        }
        CodecCommand::Decode { hex } => {
            let msg = psm_codec::decode_hex(hex).map_err(codec_failure)?;
            print!("{}", psm_codec::to_field_lines(&msg));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Plot(a) => cmd_plot(a),
        Command::Codec(c) => cmd_codec(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Runtime(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
