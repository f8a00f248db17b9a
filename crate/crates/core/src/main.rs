use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use monk::datagen::load_splice;
use monk::experiment::{run_experiment1, run_experiment2, write_csv, ExperimentConfig};
use monk::{AggregatedGram, BcdConfig, Estimator, Kernel, Method, MonkError, Sample};

#[derive(Parser)]
#[command(name = "monk", version, about = "Median-of-means kernel MMD estimators and experiments")]
struct Cli {
    /// Allow block counts that do not divide the sample size.
    #[arg(long, global = true)]
    drop_remainder: bool,

    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthetic-data accuracy sweep.
    Exp1 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Two-sample tests on the splice-junction data.
    Dna {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the MMD between two single-column CSV samples.
    Estimate {
        #[arg(long)]
        estimator: String,
        #[arg(long)]
        kernel: String,
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, default_value_t = 1)]
        q: usize,
        #[arg(long, default_value_t = 100)]
        t: usize,
    },
}

enum Failure {
    Config(String),
    Data(String),
    Other(String),
}

impl From<MonkError> for Failure {
    fn from(e: MonkError) -> Self {
        match e {
            MonkError::Config(_)
            | MonkError::Parse(_)
            | MonkError::InvalidParameter { .. }
            | MonkError::NotDivisible { .. } => Failure::Config(e.to_string()),
            MonkError::Io(_)
            | MonkError::Csv(_)
            | MonkError::Data(_)
            | MonkError::Empty(_)
            | MonkError::DomainMismatch { .. }
            | MonkError::DimensionMismatch { .. }
            | MonkError::TooFewSamples { .. } => Failure::Data(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

fn load_config(cli: &Cli, path: &PathBuf) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.drop_remainder |= cli.drop_remainder;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(out: &PathBuf) -> Result<BufWriter<File>, Failure> {
    File::create(out)
        .map(BufWriter::new)
        .map_err(|e| Failure::Data(format!("cannot write {}: {e}", out.display())))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Exp1 { config, out } => {
            let cfg = load_config(cli, config)?;
            let rows = run_experiment1(&cfg)?;
            let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
            write_csv(create(out)?, &rows)?;
            if failed > 0 {
                eprintln!("{failed} of {} rows failed; see the error column", rows.len());
            }
        }
        Command::Dna { data, config, out } => {
            let mut cfg = load_config(cli, config)?;
            cfg.data = Some(data.clone());
            let splice = load_splice(data).map_err(|e| Failure::Data(format!("{}: {e}", data.display())))?;
            for d in &splice.diagnostics {
                eprintln!("{}:{}: {}", data.display(), d.line, d.message);
            }
            let counts: Vec<String> = splice
                .class_counts()
                .iter()
                .map(|(label, n)| format!("{label}={n}"))
                .collect();
            eprintln!("loaded {} records ({})", splice.records.len(), counts.join(", "));
            let rows = run_experiment2(&cfg, &splice)?;
            write_csv(create(out)?, &rows)?;
        }
        Command::Estimate {
            estimator,
            kernel,
            x,
            y,
            q,
            t,
        } => {
            let method: Method = estimator.parse().map_err(|e: MonkError| Failure::Config(e.to_string()))?;
            let kernel: Kernel = kernel.parse().map_err(|e: MonkError| Failure::Config(e.to_string()))?;
            let read = |p: &PathBuf| {
                Sample::read_csv(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))
            };
            let (xs, ys) = (read(x)?, read(y)?);
            let cfg = BcdConfig::new(*q, *t).with_drop_remainder(cli.drop_remainder);
            let g = AggregatedGram::new(&kernel, &xs, &ys)?;
            let e = Estimator::from_method(method, cfg).estimate(&g, cli.seed.unwrap_or(0))?;
            println!("{}", e.value);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
