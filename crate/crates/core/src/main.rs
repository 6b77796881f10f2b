use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hqids::pipeline::{
    cmd_baseline, cmd_preprocess, cmd_quantum, cmd_report, cmd_small_sample, cmd_verify_manifest,
    render_comparison_text, ExperimentConfig, ExperimentOutcome, PipelineError,
};

/// Hybrid quantum-classical intrusion detection experiments.
#[derive(Debug, Parser)]
#[command(name = "hqids", version)]
struct Cli {
    /// key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Per-key override, repeatable: `--set svm_c=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode, scale and persist the train/test CSVs.
    Preprocess,
    /// Classical models on the full split.
    Baseline,
    /// Classical models on the seeded small-sample subset.
    SmallSample,
    /// Circuit embeddings of the small-sample subset plus an SVM.
    Quantum,
    /// Merge available reports into one comparison table.
    Report,
    /// Re-hash every artifact listed in the manifest.
    VerifyManifest,
    /// preprocess, baseline, small-sample, quantum and report in sequence.
    All,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, PipelineError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::parse(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    for kv in &cli.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| PipelineError::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim()).map_err(PipelineError::Config)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate().map_err(PipelineError::Config)?;
    Ok(cfg)
}

fn print_outcome(stage: &str, o: &ExperimentOutcome) {
    println!("{stage}: train n={} test n={}", o.train_size, o.test_size);
    for (model, r) in &o.reports {
        println!("  {model:<11} accuracy {:.4}", r.accuracy);
    }
    for model in &o.unconverged {
        println!("  warning: {model} stopped on the SMO iteration budget");
    }
}

fn run(cli: &Cli) -> Result<(), PipelineError> {
    let cfg = load_config(cli)?;
    let preprocess = || -> Result<(), PipelineError> {
        let s = cmd_preprocess(&cfg)?;
        println!("preprocess: {} train rows, {} test rows", s.train_rows, s.test_rows);
        Ok(())
    };
    let report = || -> Result<(), PipelineError> {
        let c = cmd_report(&cfg)?;
        print!("{}", render_comparison_text(&c.rows, &c.missing, cfg.decimals));
        Ok(())
    };
    match cli.command {
        Command::Preprocess => preprocess()?,
        Command::Baseline => print_outcome("baseline", &cmd_baseline(&cfg)?),
        Command::SmallSample => print_outcome("small-sample", &cmd_small_sample(&cfg)?),
        Command::Quantum => print_outcome("quantum", &cmd_quantum(&cfg)?),
        Command::Report => report()?,
        Command::VerifyManifest => {
            let n = cmd_verify_manifest(&cfg.out_dir)?;
            println!("manifest ok: {n} artifacts verified");
        }
        Command::All => {
            preprocess()?;
            print_outcome("baseline", &cmd_baseline(&cfg)?);
            print_outcome("small-sample", &cmd_small_sample(&cfg)?);
            print_outcome("quantum", &cmd_quantum(&cfg)?);
            report()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
