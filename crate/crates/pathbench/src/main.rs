//! Command-line entry point: configure a dataset and a solver matrix, run
//! the lambda path, write CSV or JSON reports (plus a trace table when
//! requested).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Parser;

use pathbench::{
    emit_report, emit_trace_csv, run_path, DataSpec, ModelSpec, PathConfig, ReportFormat,
    SynthSpec, Variant,
};

#[derive(Parser, Debug)]
#[command(
    name = "pathbench",
    about = "Regularization-path benchmarks for l1-regularized GLM solvers with extrapolated duality-gap certificates"
)]
struct Cli {
    /// LIBSVM-format input file.
    #[arg(long, conflicts_with = "synth")]
    data: Option<PathBuf>,

    /// Synthetic dataset: n,p,density,support,snr (snr may be `inf`).
    #[arg(long)]
    synth: Option<String>,

    /// Model: lasso | logreg | mtl.
    #[arg(long, default_value = "lasso")]
    model: String,

    /// Dense multitask target matrix (rows = samples, whitespace separated);
    /// required for `--model mtl` with `--data`.
    #[arg(long)]
    targets: Option<PathBuf>,

    /// Number of tasks for synthetic multitask data.
    #[arg(long, default_value_t = 5)]
    tasks: usize,

    /// Number of lambda values on the geometric grid.
    #[arg(long, default_value_t = 10)]
    grid: usize,

    /// Grid spans lambda_max down to lambda_max / div.
    #[arg(long, default_value_t = 100.0)]
    div: f64,

    /// Comma-separated stopping tolerances (fractions of F(0)).
    #[arg(long, default_value = "1e-4,1e-6")]
    eps: String,

    /// Comma-separated solver variants: cd, cd+screen, cd+screen+extr,
    /// celer, celer_no_extr, pn, pn_no_extr.
    #[arg(long, default_value = "cd,cd+screen,cd+screen+extr,celer,celer_no_extr")]
    variants: String,

    /// Seed for synthetic data.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Sparse features with fewer nonzeros are removed.
    #[arg(long, default_value_t = 4)]
    min_nnz: usize,

    /// Output path (stdout when omitted). With --trace, a companion
    /// `<out>.trace.csv` is written for CSV output.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Report format: csv | json.
    #[arg(long, default_value = "csv")]
    format: String,

    /// Record gap histories (per check: primal, rescaled/extrapolated/used
    /// dual objectives, sign-change flag).
    #[arg(long)]
    trace: bool,
}

fn main() -> Result<()> {
    let cli = Cli::parse();

    let data = match (&cli.data, &cli.synth) {
        (Some(path), None) => DataSpec::File {
            path: path.clone(),
            targets: cli.targets.clone(),
        },
        (None, Some(spec)) => DataSpec::Synth(SynthSpec::parse(spec)?),
        (None, None) => bail!("one of --data or --synth is required"),
        (Some(_), Some(_)) => unreachable!("clap forbids both"),
    };

    let cfg = PathConfig {
        data,
        model: ModelSpec::parse(&cli.model)?,
        grid: cli.grid,
        divisor: cli.div,
        epsilons: cli
            .eps
            .split(',')
            .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad tolerance `{t}`")))
            .collect::<Result<_>>()?,
        variants: cli
            .variants
            .split(',')
            .map(|t| Variant::parse(t.trim()))
            .collect::<Result<_>>()?,
        seed: cli.seed,
        tasks: cli.tasks,
        min_nnz: cli.min_nnz,
        warm_start: true,
        trace: cli.trace,
    };
    let format = ReportFormat::parse(&cli.format)?;

    let result = run_path(&cfg)?;

    match &cli.out {
        Some(path) => {
            let mut sink = BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            );
            emit_report(&result, format, &mut sink)?;
            sink.flush()?;
            if cfg.trace && format == ReportFormat::Csv {
                let trace_path = path.with_extension(match path.extension() {
                    Some(e) => format!("{}.trace.csv", e.to_string_lossy()),
                    None => "trace.csv".to_string(),
                });
                let mut tsink = BufWriter::new(
                    File::create(&trace_path)
                        .with_context(|| format!("creating {}", trace_path.display()))?,
                );
                emit_trace_csv(&result.traces, &mut tsink)?;
                tsink.flush()?;
            }
        }
        None => {
            let stdout = io::stdout();
            let mut sink = stdout.lock();
            emit_report(&result, format, &mut sink)?;
            if cfg.trace && format == ReportFormat::Csv {
                emit_trace_csv(&result.traces, &mut sink)?;
            }
        }
    }
    Ok(())
}
