//! `ric`: runs one experiment, writes its JSON report and appends a CSV
//! summary row.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};

use ric_core::experiment::{
    self, AssignmentChoice, ChannelConfig, ExperimentConfig, InputConfig, Task,
};
use ric_core::par::Execution;
use ric_core::protocol::Mode;
use ric_core::RicError;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TaskArg {
    Teleclone,
    Ric,
    EndToEnd,
    Analyze,
    Search,
    Verify,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Teleclone => Task::Teleclone,
            TaskArg::Ric => Task::Ric,
            TaskArg::EndToEnd => Task::EndToEnd,
            TaskArg::Analyze => Task::Analyze,
            TaskArg::Search => Task::Search,
            TaskArg::Verify => Task::Verify,
        }
    }
}

/// Remote information concentration experiments for qudits.
///
/// Flags override the matching fields of `--config`.
#[derive(Debug, Parser)]
#[command(name = "ric", version)]
struct Cli {
    /// Experiment configuration as JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Qudit dimension (2 to 7).
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_enum)]
    task: Option<TaskArg>,
    /// Channel definition as JSON, e.g. {"kind": "ghz", "c": 0}.
    #[arg(long)]
    channel_file: Option<PathBuf>,
    /// fig1, fig2, fig3, or a JSON holder map.
    #[arg(long)]
    assignment: Option<String>,
    /// Clone asymmetry; q defaults to 1 - p.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Seed for sampling and for searches.
    #[arg(long)]
    seed: Option<u64>,
    /// Sample this many branches instead of enumerating.
    #[arg(long, conflicts_with = "enumerate")]
    samples: Option<usize>,
    /// Enumerate every branch.
    #[arg(long)]
    enumerate: bool,
    /// Seed of the Haar-random input state.
    #[arg(long)]
    input_seed: Option<u64>,
    /// Dimensions for the verify task, comma separated.
    #[arg(long, value_delimiter = ',')]
    verify_dims: Option<Vec<usize>>,
    /// Output directory.
    #[arg(long, env = "RIC_OUT_DIR")]
    out: Option<PathBuf>,
    /// Run every loop on the calling thread.
    #[arg(long)]
    sequential: bool,
}

const DEFAULT_OUT: &str = "ric-out";

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, RicError> {
    Ok(serde_json::from_str(text)?)
}

fn build_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => json(&read(path)?).with_context(|| format!("parsing {}", path.display()))?,
        None => {
            let dim = cli.dim.context("--dim is required without --config")?;
            let task = cli.task.context("--task is required without --config")?;
            ExperimentConfig::new(dim, task.into())
        }
    };
    if let Some(d) = cli.dim {
        cfg.dim = d;
    }
    if let Some(t) = cli.task {
        cfg.task = t.into();
    }
    if let Some(path) = &cli.channel_file {
        let spec = json::<ChannelConfig>(&read(path)?)
            .with_context(|| format!("parsing channel {}", path.display()))?;
        cfg.channel = Some(spec);
    }
    if let Some(a) = &cli.assignment {
        cfg.assignment = if a.trim_start().starts_with('{') {
            AssignmentChoice::Custom(json(a).context("parsing --assignment")?)
        } else {
            AssignmentChoice::Preset(a.clone())
        };
    }
    if let Some(p) = cli.p {
        cfg.p = p;
        if cli.q.is_none() {
            cfg.q = None;
        }
    }
    if cli.q.is_some() {
        cfg.q = cli.q;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.samples {
        cfg.samples = n;
        cfg.mode = Some(Mode::Sample {
            samples: n,
            seed: cfg.seed,
        });
    }
    if cli.enumerate {
        cfg.mode = Some(Mode::Enumerate);
    }
    if let Some(s) = cli.input_seed {
        cfg.input = InputConfig::Seeded { seed: s };
    }
    if let Some(ds) = &cli.verify_dims {
        cfg.verify_dims = Some(ds.clone());
    }
    Ok(cfg)
}

fn file_stem(summary: &experiment::Summary) -> String {
    let raw = format!(
        "{}_d{}_{}_{}_seed{}",
        summary.task, summary.d, summary.channel_tag, summary.assignment, summary.seed
    );
    raw.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' {
                c
            } else {
                '-'
            }
        })
        .collect()
}

fn execute(cli: &Cli) -> anyhow::Result<()> {
    let mut cfg = build_config(cli)?;
    // the destination is not part of the experiment, so it stays out of the report
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out.take().map(PathBuf::from))
        .unwrap_or_else(|| DEFAULT_OUT.into());
    cfg.out = None;
    cfg.validate()?;
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let report = experiment::run(&cfg, exec)?;
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let json_path = out.join(format!("{}.json", file_stem(&report.summary)));
    std::fs::write(&json_path, report.to_json()? + "\n")
        .with_context(|| format!("writing {}", json_path.display()))?;
    experiment::append_csv(&out.join("summary.csv"), &report.summary)?;
    let s = &report.summary;
    println!(
        "{} d={} channel={} assignment={} branches={} min_fidelity={:.12} mean_fidelity={:.12}",
        s.task, s.d, s.channel_tag, s.assignment, s.branches, s.min_fidelity, s.mean_fidelity
    );
    if let Some(ledger) = &report.ledger {
        for c in ledger {
            println!(
                "  [{}] d={} {} ({:.3e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.d,
                c.name,
                c.value
            );
        }
    }
    println!("report: {}", json_path.display());
    Ok(())
}

fn error_json(err: &anyhow::Error) -> serde_json::Value {
    let kind = err
        .chain()
        .find_map(|e| e.downcast_ref::<RicError>())
        .map_or("error", RicError::kind);
    let context: Vec<String> = err.chain().map(|e| e.to_string()).collect();
    serde_json::json!({ "error": { "kind": kind, "message": err.to_string(), "chain": context } })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::FAILURE
        }
    }
}
