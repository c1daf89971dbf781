use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use chrono::NaiveDateTime;
use clap::{Args, Parser, Subcommand};

use crisis_pulse::pipeline::{
    artifacts, run_pipeline, run_stages, ClassifierMode, PipelineConfig, PipelineError, Stage, StageOutcome,
};
use crisis_pulse::synop::{fetch_ogimet, OgimetQuery, OGIMET_GETSYNOP};

#[derive(Parser)]
#[command(name = "crisis-pulse", version, about = "Disaster message analysis aligned with SYNOP weather observations")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// baseline | remote=URL | remote=URL,fallback
    #[arg(long, global = true)]
    classifier: Option<String>,
    /// Activity bucket width, e.g. 1h, 30m, 1d
    #[arg(long, global = true)]
    bucket: Option<String>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated WMO station ids
    #[arg(long, global = true)]
    stations: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Read messages, preprocess them and build the dictionary
    Ingest,
    /// Classify messages and build the filtered sets
    Filter,
    /// Term frequencies, bigrams and LDA topics
    Topics,
    /// Behavioral indicator profiles
    Behave,
    /// SYNOP decoding and download
    #[command(subcommand)]
    Synop(SynopCommand),
    /// Bucket activity and align it with the climate frame
    Align,
    /// Write the run report from existing artifacts
    Report,
    /// Every stage in order
    Run,
}

#[derive(Subcommand)]
enum SynopCommand {
    /// Decode SYNOP text into the climate frame
    Decode {
        /// Overrides the configured SYNOP input
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Download SYNOP reports for a WMO block from OGIMET
    Fetch {
        /// Two-digit WMO block, or a full five-digit station id
        #[arg(long)]
        block: String,
        /// Start time, YYYY-MM-DDTHH:MM (UTC)
        #[arg(long, value_parser = utc_minute)]
        begin: NaiveDateTime,
        /// End time, YYYY-MM-DDTHH:MM (UTC)
        #[arg(long, value_parser = utc_minute)]
        end: NaiveDateTime,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = OGIMET_GETSYNOP)]
        base_url: String,
        #[arg(long, default_value_t = 60)]
        timeout_secs: u64,
    },
}

fn utc_minute(s: &str) -> Result<NaiveDateTime, String> {
    ["%Y-%m-%dT%H:%M", "%Y-%m-%dT%H:%M:%S", "%Y%m%d%H%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .ok_or_else(|| format!("expected YYYY-MM-DDTHH:MM, got {s:?}"))
}

fn config(g: &Global) -> Result<PipelineConfig, PipelineError> {
    let mut c = match &g.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = g.seed {
        c.seed = Some(s);
    }
    if let Some(m) = &g.classifier {
        c.classifier = ClassifierMode::parse(m)?;
    }
    if let Some(b) = &g.bucket {
        c.set("bucket", b)?;
    }
    if let Some(o) = &g.out {
        c.out = o.clone();
    }
    if let Some(s) = &g.stations {
        c.set("stations", s)?;
    }
    Ok(c)
}

fn stages(cfg: &PipelineConfig, which: &[Stage]) -> Result<(), PipelineError> {
    for (stage, outcome) in run_stages(cfg, which)? {
        match outcome {
            StageOutcome::Done => eprintln!("{stage}: done"),
            StageOutcome::Skipped(why) => eprintln!("{stage}: skipped ({why})"),
            StageOutcome::Failed(e) => eprintln!("{stage}: failed: {e}"),
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    if let Command::Synop(SynopCommand::Fetch { block, begin, end, output, base_url, timeout_secs }) = &cli.command {
        let text = fetch_ogimet(base_url, &OgimetQuery { block: block.clone(), begin: *begin, end: *end }, Duration::from_secs(*timeout_secs))?;
        std::fs::write(output, text)?;
        eprintln!("wrote {}", output.display());
        return Ok(());
    }

    let mut cfg = config(&cli.global)?;
    match cli.command {
        Command::Ingest => stages(&cfg, &[Stage::Ingest])?,
        Command::Filter => stages(&cfg, &[Stage::Filter])?,
        Command::Topics => stages(&cfg, &[Stage::Topics])?,
        Command::Behave => stages(&cfg, &[Stage::Behave])?,
        Command::Synop(SynopCommand::Decode { input }) => {
            if let Some(i) = input {
                cfg.synop = Some(i);
            }
            stages(&cfg, &[Stage::Synop])?
        }
        Command::Synop(SynopCommand::Fetch { .. }) => unreachable!(),
        Command::Align => stages(&cfg, &[Stage::Align])?,
        Command::Report => {
            stages(&cfg, &[Stage::Report])?;
            print!("{}", std::fs::read_to_string(cfg.out.join(artifacts::REPORT))?);
        }
        Command::Run => print!("{}", run_pipeline(&cfg)?.render()),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
