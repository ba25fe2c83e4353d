use std::io::{ErrorKind, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ttrnn_core::pipeline::{self, PipelineError, RunConfig};
use ttrnn_core::{Execution, Truncation};

/// TT-RNN forecasting runs on synthetic or CSV market data.
#[derive(Parser)]
#[command(name = "ttrnn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic instrument panel (CSVs plus manifest).
    Synth(RunArgs),
    /// Dump the raw per-day features for auditing.
    Features(RunArgs),
    /// Train a TT-RNN and write checkpoint, logs and run manifest.
    Train {
        #[command(flatten)]
        run: RunArgs,
        /// Disable data-parallel gradient evaluation.
        #[arg(long)]
        sequential: bool,
    },
    /// Evaluate a checkpoint on the test split.
    Backtest {
        #[command(flatten)]
        run: RunArgs,
        /// Defaults to `<output>/checkpoint.txt`.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Rank TT cores by aggregate normalized change.
    ReportCores {
        /// Core-change CSV written by `train`.
        #[arg(long)]
        log: PathBuf,
        /// Defaults to the log's directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// TT-SVD of a tensor stored in the text tensor format.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Cap every inner rank.
        #[arg(long, conflicts_with = "tolerance")]
        max_rank: Option<usize>,
        /// Relative Frobenius error budget.
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Config file with `key = value` lines.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// `synth` or a manifest CSV path.
    #[arg(long)]
    data: Option<String>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, PipelineError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| PipelineError::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(d) = &self.data {
            cfg.set("data", d)?;
        }
        if let Some(o) = &self.output {
            cfg.output = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(e) = self.epochs {
            cfg.epochs = e;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli, out: &mut impl Write) -> Result<(), PipelineError> {
    match cli.command {
        Command::Synth(args) => {
            let manifest = pipeline::cmd_synth(&args.resolve()?)?;
            writeln!(out, "wrote {}", manifest.display())?;
        }
        Command::Features(args) => {
            let path = pipeline::cmd_features(&args.resolve()?)?;
            writeln!(out, "wrote {}", path.display())?;
        }
        Command::Train { run, sequential } => {
            let cfg = run.resolve()?;
            let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
            let report = pipeline::cmd_train_with(&cfg, exec)?;
            writeln!(out, "{}", report.parameters)?;
            writeln!(out, "samples: {} train, {} test", report.train_samples, report.test_samples)?;
            for (e, loss) in report.epoch_losses.iter().enumerate() {
                writeln!(out, "epoch {:>3}  train loss {loss:.6}", e + 1)?;
            }
            writeln!(out, "wrote {}", report.output.display())?;
        }
        Command::Backtest { run, checkpoint } => {
            let cfg = run.resolve()?;
            let ck = checkpoint.unwrap_or_else(|| cfg.output.join(pipeline::CHECKPOINT_FILE));
            let report = pipeline::cmd_backtest(&cfg, &ck)?;
            let fmt = |s: Option<f64>| s.map_or("undefined".to_string(), |v| format!("{v:.3}"));
            writeln!(
                out,
                "strategy: sharpe {}  total return {:.4}  accuracy {:.2}%",
                fmt(report.strategy.sharpe),
                report.strategy.total_return,
                100.0 * report.accuracy.unwrap_or(f64::NAN)
            )?;
            writeln!(
                out,
                "buy-and-hold: sharpe {}  total return {:.4}",
                fmt(report.baseline.sharpe),
                report.baseline.total_return
            )?;
        }
        Command::ReportCores { log, output } => {
            let dir = output.unwrap_or_else(|| log.parent().map(PathBuf::from).unwrap_or_default());
            for (k, r) in pipeline::cmd_report_cores(&log, &dir)?.iter().enumerate() {
                writeln!(out, "{:>2}. core {} ({})  {:.6e}", k + 1, r.core, r.mode, r.aggregate_change)?;
            }
        }
        Command::Decompose {
            input,
            output,
            max_rank,
            tolerance,
        } => {
            let truncation = match (max_rank, tolerance) {
                (Some(r), _) => Truncation::MaxRank(r),
                (None, Some(eps)) => Truncation::Tolerance(eps),
                (None, None) => Truncation::Full,
            };
            let rep = pipeline::cmd_decompose(&input, &output, &truncation)?;
            writeln!(
                out,
                "ranks {:?}: {} parameters (dense {}), relative error {:.3e}",
                rep.ranks, rep.tt_params, rep.dense_params, rep.relative_error
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let stdout = std::io::stdout();
    match run(Cli::parse(), &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        // output closed early, e.g. piped into `head`
        Err(PipelineError::Io(e)) if e.kind() == ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
