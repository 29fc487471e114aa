use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use reconlab::config::{parse_kv, ExperimentConfig};
use reconlab::error::Error;
use reconlab::scenario::{run_scenario_to_dir, scenario_defaults, scenario_names};

/// Security-game simulation lab: runs named scenarios against seeded Monte
/// Carlo estimators and exact enumeration oracles, writing a manifest and
/// CSV results per run.
#[derive(Debug, Parser)]
#[command(name = "reconlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write its outputs.
    Run {
        /// Scenario name (see `reconlab list`), or `custom` with game.* keys.
        #[arg(long)]
        scenario: Option<String>,

        /// Config file (key = value lines); flags override file values. A
        /// previously written manifest works here too.
        #[arg(long)]
        config: Option<PathBuf>,

        /// Master seed; every trial derives its own streams from it.
        #[arg(long)]
        seed: Option<u64>,

        /// Trial count override for the scenario's main games.
        #[arg(long)]
        trials: Option<u64>,

        /// Worker threads; results are identical for any value.
        #[arg(long)]
        workers: Option<usize>,

        /// Output root; outputs land in <out-dir>/<scenario>/<label>/.
        #[arg(long)]
        out_dir: Option<PathBuf>,

        /// Output subdirectory label (defaults to a timestamp).
        #[arg(long)]
        label: Option<String>,

        /// Scenario parameter override, repeatable: --set gamma=1/25
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// List scenarios and their default parameters.
    List,
}

#[allow(clippy::too_many_arguments)]
fn build_config(
    scenario: Option<String>,
    config: Option<PathBuf>,
    seed: Option<u64>,
    trials: Option<u64>,
    workers: Option<usize>,
    out_dir: Option<PathBuf>,
    label: Option<String>,
    set: Vec<String>,
) -> Result<ExperimentConfig, Error> {
    let mut cfg = match config {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_kv(&parse_kv(&text)?)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = scenario {
        cfg.scenario = s;
    }
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(t) = trials {
        cfg.trials = Some(t);
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    if let Some(o) = out_dir {
        cfg.out_dir = o;
    }
    if let Some(l) = label {
        cfg.label = Some(l);
    }
    for entry in set {
        let (k, v) = entry
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set needs KEY=VALUE, got {entry:?}")))?;
        cfg.overrides.insert(k.trim().to_string(), v.trim().to_string());
    }
    if cfg.scenario.is_empty() {
        return Err(Error::Config("no scenario given (use --scenario or a config file)".into()));
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for name in scenario_names() {
                let defaults = scenario_defaults(name).expect("registered scenario");
                let rendered: Vec<String> =
                    defaults.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!("{name}: {}", rendered.join(" "));
            }
            ExitCode::SUCCESS
        }
        Command::Run { scenario, config, seed, trials, workers, out_dir, label, set } => {
            let cfg = match build_config(scenario, config, seed, trials, workers, out_dir, label, set)
            {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            match run_scenario_to_dir(&cfg) {
                Ok((manifest, dir)) => {
                    for row in &manifest.rows {
                        println!(
                            "{} {}/{}: lhs={} rhs={} verdict={} expected={} [{}]",
                            if row.met { "ok " } else { "FAIL" },
                            row.scenario,
                            row.game,
                            reconlab::report::fmt_float(row.lhs),
                            reconlab::report::fmt_float(row.rhs),
                            row.verdict,
                            row.expected,
                            if row.met { "met" } else { "not met" },
                        );
                    }
                    println!("outputs: {}", dir.display());
                    if manifest.all_met() {
                        ExitCode::SUCCESS
                    } else {
                        eprintln!("error: scenario expectations not met");
                        ExitCode::from(2)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
