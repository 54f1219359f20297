use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::Rng;

use ghz_vote::adversary;
use ghz_vote::coincidence::{self, ChannelMap, StreamConfig};
use ghz_vote::family::{self, SourceStrategy};
use ghz_vote::harness::experiment::render_summary;
use ghz_vote::harness::properties::verify_properties;
use ghz_vote::harness::{run_experiment, write_outputs, ExperimentConfig, ExperimentSummary, Mode};
use ghz_vote::protocol::{Basis, Intent};
use ghz_vote::seed;

#[derive(Parser)]
#[command(name = "ghz-vote", version, about = "Anonymous quantum voting over GHZ-family states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config file.
    Run { config: PathBuf },
    /// Run one election.
    Elect(ElectArgs),
    /// Run an attack scenario with its anonymity audit.
    Attack(AttackArgs),
    /// Run the invariant and property suite.
    VerifyProperties {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Samples per parity-sampling check.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Generate or filter timestamp streams.
    #[command(subcommand)]
    Coincidence(CoincidenceCommand),
    /// Render a summary JSON written by `run`, `elect` or `attack`.
    Report { summary: PathBuf },
}

#[derive(Args)]
struct Outputs {
    /// JSON-lines transcript path.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Summary JSON path.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct ElectArgs {
    /// Intents, one letter per agent, e.g. `EFEE`.
    #[arg(long, default_value = "EEEE")]
    intents: String,
    /// `ideal`, `werner:<fidelity>`, `werner-p:<p>` or `dephasing:<sigma>`.
    #[arg(long, default_value = "ideal")]
    source: String,
    #[arg(long, default_value_t = 7)]
    m: u32,
    #[arg(long, default_value_t = 0.05)]
    tau: f64,
    #[arg(long, default_value_t = 10_000)]
    rounds: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Plant the rounds in a synthetic timestamp stream and recover them
    /// through the coincidence pipeline (four agents only).
    #[arg(long)]
    via_stream: bool,
    #[arg(long, default_value_t = 0.0)]
    dark_hz: f64,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Args)]
struct AttackArgs {
    /// Scenario name; `list` prints the catalog.
    scenario: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Anonymity-audit trials.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 10_000)]
    rounds: u64,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Args)]
struct StreamArgs {
    #[arg(long, default_value_t = 1_000)]
    window_ps: u64,
    #[arg(long, default_value_t = 300.0)]
    dark_hz: f64,
    #[arg(long, default_value_t = 10.0)]
    duration_s: f64,
    #[arg(long, default_value_t = 0.3)]
    fourfold_hz: f64,
    #[arg(long, default_value_t = 76e6)]
    pulse_hz: f64,
    #[arg(long, default_value_t = 50.0)]
    jitter_ps: f64,
}

#[derive(Subcommand)]
enum CoincidenceCommand {
    /// Write a synthetic stream with planted fourfolds and dark counts.
    Generate {
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth fourfolds as JSON lines.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        stream: StreamArgs,
    },
    /// Veto-filter a stream file and list its fourfolds.
    Filter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1_000)]
        window_ps: u64,
        /// Fourfolds as JSON lines.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1 << 16)]
        chunk: usize,
    },
}

fn parse_source(spec: &str, n: usize) -> anyhow::Result<SourceStrategy> {
    let (kind, value) = spec.split_once(':').unwrap_or((spec, ""));
    let number = || value.parse::<f64>().with_context(|| format!("bad number in `{spec}`"));
    Ok(match kind {
        "ideal" => SourceStrategy::Ideal,
        "werner" => SourceStrategy::WernerEnsemble { p: family::werner_p_for_fidelity(number()?, n) },
        "werner-p" => SourceStrategy::WernerEnsemble { p: number()? },
        "dephasing" => SourceStrategy::DephasingEnsemble { sigma: number()? },
        _ => bail!("unknown source `{spec}`"),
    })
}

fn finish(config: ExperimentConfig) -> anyhow::Result<ExitCode> {
    let result = run_experiment(&config)?;
    write_outputs(&result)?;
    print!("{}", render_summary(&result.summary));
    Ok(if result.summary.all_invariants_hold { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { config } => finish(ExperimentConfig::load(&config)?),
        Command::Elect(a) => {
            let intents = a.intents.chars().map(|c| c.to_string().parse::<Intent>()).collect::<Result<Vec<_>, _>>()?;
            let mut cfg = ExperimentConfig::new(a.seed);
            cfg.agents = intents.len();
            cfg.source = parse_source(&a.source, intents.len())?;
            cfg.intents = intents;
            cfg.params.m = a.m;
            cfg.params.tau = a.tau;
            cfg.params.rounds = a.rounds;
            if a.via_stream {
                cfg.mode = Mode::CoincidencePipeline;
                cfg.stream.dark_rate_hz = a.dark_hz;
            }
            cfg.output.transcript = a.outputs.transcript;
            cfg.output.summary = a.outputs.summary;
            finish(cfg)
        }
        Command::Attack(a) => {
            if a.scenario == "list" {
                for name in adversary::CATALOG {
                    println!("{name}");
                }
                return Ok(ExitCode::SUCCESS);
            }
            let mut cfg = ExperimentConfig::new(a.seed);
            cfg.mode = Mode::Attack;
            cfg.scenario = Some(a.scenario);
            cfg.trials = a.trials;
            cfg.params.rounds = a.rounds;
            cfg.output.transcript = a.outputs.transcript;
            cfg.output.summary = a.outputs.summary;
            finish(cfg)
        }
        Command::VerifyProperties { seed, samples } => {
            let checks = verify_properties(seed, samples)?;
            for c in &checks {
                println!("{} {} ({})", if c.holds { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if checks.iter().all(|c| c.holds) { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Coincidence(CoincidenceCommand::Generate { out, truth, seed: master, stream }) => {
            let cfg = StreamConfig {
                pulse_rate_hz: stream.pulse_hz,
                fourfold_rate_hz: stream.fourfold_hz,
                dark_rate_hz: stream.dark_hz,
                jitter_ps: stream.jitter_ps,
                window_ps: stream.window_ps,
                duration_s: stream.duration_s,
            };
            let mut rng = seed::rng_for(master, "cli-detections", 0);
            let planted = coincidence::plan_fourfolds(&cfg, master, |_| {
                std::array::from_fn(|_| {
                    let basis = if rng.random_bool(0.5) { Basis::Hadamard } else { Basis::Computational };
                    (basis, u8::from(rng.random_bool(0.5)))
                })
            })?;
            let map = ChannelMap::agent_major();
            let g = coincidence::generate_stream(&cfg, &map, &planted, master)?;
            coincidence::write_stream(BufWriter::new(fs::File::create(&out)?), &map, &g.events)?;
            if let Some(path) = truth {
                write_json_lines(&path, &g.truth)?;
            }
            println!(
                "wrote {} events ({} dark, {} planted fourfolds) to {}",
                g.events.len(),
                g.dark_counts,
                g.truth.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Coincidence(CoincidenceCommand::Filter { input, window_ps, out, chunk }) => {
            let started = Instant::now();
            let (map, events) = coincidence::read_stream(BufReader::new(fs::File::open(&input)?))?;
            let found = coincidence::process_stream(&events, window_ps, &map, chunk)?;
            if let Some(path) = out {
                write_json_lines(&path, &found)?;
            }
            println!(
                "{} events -> {} fourfolds (window {window_ps} ps) in {:.3} s",
                events.len(),
                found.len(),
                started.elapsed().as_secs_f64()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { summary } => {
            let s: ExperimentSummary = serde_json::from_str(&fs::read_to_string(&summary)?)?;
            print!("{}", render_summary(&s));
            Ok(if s.all_invariants_hold { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn write_json_lines<T: serde::Serialize>(path: &PathBuf, items: &[T]) -> anyhow::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
