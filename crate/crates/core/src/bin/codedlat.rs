use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use codedlat::experiments::{preset, Command, Experiment, ExperimentManifest, PRESET_NAMES};
use codedlat::montecarlo::DEFAULT_TRIALS;
use codedlat::plot::plot_csv;
use codedlat::validate::{run_validation, ValidationSettings, DEFAULT_VALIDATION_TRIALS};
use codedlat::ParamsDocument;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "codedlat",
    version,
    about = "Latency and reliability analysis of coded distributed matrix-vector multiplication"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Bounds on the expected run-time (and the exact chain value when k = m).
    Bounds(RunArgs),
    /// Upper-bound-optimal code rate, with Monte Carlo run-times.
    Ratedesign(RunArgs),
    /// Success probability and latency under a retransmission cap.
    Reliability(RunArgs),
    /// Optimal (k, gamma) designs over an erasure grid.
    Optimize(RunArgs),
    /// Cross-check the engines against each other.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Parameter document, experiment description or run manifest (JSON).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials [default: 100000].
    #[arg(long)]
    trials: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_VALIDATION_TRIALS)]
    trials: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

/// A problem with the user's input rather than with the computation.
#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

struct Resolved {
    experiment: Experiment,
    preset: Option<String>,
    stem: String,
    seed: u64,
    trials: u64,
    assumed: Vec<String>,
}

fn resolve(command: Command, args: &RunArgs) -> anyhow::Result<Resolved> {
    let mut seed = 0;
    let mut trials = DEFAULT_TRIALS;
    let (experiment, preset_name, stem, assumed) = match (&args.preset, &args.config) {
        (Some(name), _) => {
            let p = preset(name).ok_or_else(|| config_error(format!("unknown preset {name}")))?;
            (
                p.experiment.clone(),
                Some(name.clone()),
                p.stem().to_string(),
                p.assumed.iter().map(|s| s.to_string()).collect(),
            )
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
            if let Ok(m) = serde_json::from_str::<ExperimentManifest>(&text) {
                seed = m.seed;
                trials = m.trials;
                (m.experiment, m.preset, m.stem, m.assumed)
            } else if let Ok(e) = serde_json::from_str::<Experiment>(&text) {
                (e, None, stem_of(path), Vec::new())
            } else {
                let doc = ParamsDocument::from_json(&text).map_err(|e| {
                    config_error(format!(
                        "{}: not a manifest, experiment or parameter document: {e}",
                        path.display()
                    ))
                })?;
                (
                    Experiment::from_params(command, &doc)?,
                    None,
                    stem_of(path),
                    Vec::new(),
                )
            }
        }
        (None, None) => return Err(config_error("one of --config or --preset is required")),
    };
    if experiment.command() != command {
        return Err(config_error(format!(
            "this configuration belongs to the {} command",
            experiment.command().name()
        )));
    }
    Ok(Resolved {
        experiment,
        preset: preset_name,
        stem,
        seed: args.seed.unwrap_or(seed),
        trials: args.trials.unwrap_or(trials),
        assumed,
    })
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("run")
        .to_string()
}

fn run_experiment(command: Command, args: &RunArgs) -> anyhow::Result<u8> {
    let r = resolve(command, args)?;
    let output = r.experiment.run(&r.stem, r.trials, r.seed)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut outputs = Vec::new();
    for table in &output.tables {
        let csv_path = args.out.join(format!("{}.csv", table.stem));
        fs::write(&csv_path, &table.csv)
            .with_context(|| format!("writing {}", csv_path.display()))?;
        let svg_path = args.out.join(format!("{}.svg", table.stem));
        plot_csv(&csv_path, &svg_path, &table.chart)?;
        println!("wrote {}", csv_path.display());
        println!("wrote {}", svg_path.display());
        outputs.push(format!("{}.csv", table.stem));
        outputs.push(format!("{}.svg", table.stem));
    }
    let stochastic = r.experiment.is_stochastic();
    let manifest = ExperimentManifest {
        command,
        preset: r.preset,
        stem: r.stem.clone(),
        experiment: r.experiment,
        seed: r.seed,
        trials: r.trials,
        output_dir: args.out.display().to_string(),
        assumed: r.assumed,
        outputs,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let manifest_path = args.out.join(format!("{}.manifest.json", r.stem));
    fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    println!("wrote {}", manifest_path.display());
    if !stochastic {
        println!("(deterministic run: seed and trials unused)");
    }
    if output.infeasible {
        eprintln!("no feasible design at any grid point");
        return Ok(EXIT_INFEASIBLE);
    }
    Ok(0)
}

fn run_validate(args: &ValidateArgs) -> anyhow::Result<u8> {
    let settings = ValidationSettings {
        trials: args.trials,
        seed: args.seed,
        inject_fault: args.inject_fault,
    };
    let report = run_validation(&settings)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let csv_path = args.out.join("validation.csv");
    report.write_csv(fs::File::create(&csv_path)?)?;
    let json_path = args.out.join("validation.json");
    fs::write(&json_path, serde_json::to_string_pretty(&report)? + "\n")?;
    for (check, pass, fail) in report.summary() {
        println!(
            "{:<8} {check} ({pass} passed, {fail} failed)",
            if fail == 0 { "PASS" } else { "FAIL" }
        );
    }
    for f in report.failures() {
        println!(
            "  failed {}: {} observed {} outside [{}, {}]",
            f.check, f.case, f.observed, f.expected_low, f.expected_high
        );
    }
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    Ok(if report.passed() { 0 } else { EXIT_VALIDATION })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    match err.downcast_ref::<codedlat::Error>() {
        Some(
            codedlat::Error::Range { .. }
            | codedlat::Error::Divisibility { .. }
            | codedlat::Error::Precondition(_)
            | codedlat::Error::Json(_),
        ) => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Sub::Bounds(a) => run_experiment(Command::Bounds, a),
        Sub::Ratedesign(a) => run_experiment(Command::Ratedesign, a),
        Sub::Reliability(a) => run_experiment(Command::Reliability, a),
        Sub::Optimize(a) => run_experiment(Command::Optimize, a),
        Sub::Validate(a) => run_validate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
