//! Regularization-path benchmark harness: loads or synthesizes a dataset,
//! applies the standard preprocessing (rare-feature pruning, unit-norm
//! columns), then walks a geometric lambda grid from lambda_max downwards
//! with warm starts, timing each solver variant at each tolerance.
//!
//! Results are emitted as CSV with a fixed schema or as JSON mirroring it;
//! gap-history traces can be captured for single-solver runs.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use dualex::celer::{celer_solve, support_size, CelerParams, InnerSolver};
use dualex::datafit::{lambda_max, primal_at_zero, primal_value, ModelKind};
use dualex::dataset::{
    normalize_columns, parse_libsvm, prune_rare_features, synth_gaussian, synth_logistic,
    synth_multitask, DataSource, Dataset, LabelMode, Targets,
};
use dualex::solvers::{solve, Algorithm, SolveReport, SolverParams};

/// Solver configuration under benchmark. Names are stable CLI/report
/// identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Plain coordinate descent (block variant for multitask).
    Cd,
    /// CD with Gap Safe screening on rescaled certificates.
    CdScreen,
    /// CD with Gap Safe screening on extrapolated certificates.
    CdScreenExtr,
    /// Working-set solver with dual extrapolation.
    Celer,
    /// Working-set solver without extrapolation.
    CelerNoExtr,
    /// Working-set solver with the prox-Newton inner solver (logistic).
    Pn,
    /// Prox-Newton working sets without dual extrapolation.
    PnNoExtr,
}

pub const ALL_VARIANTS: [Variant; 7] = [
    Variant::Cd,
    Variant::CdScreen,
    Variant::CdScreenExtr,
    Variant::Celer,
    Variant::CelerNoExtr,
    Variant::Pn,
    Variant::PnNoExtr,
];

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Cd => "cd",
            Variant::CdScreen => "cd+screen",
            Variant::CdScreenExtr => "cd+screen+extr",
            Variant::Celer => "celer",
            Variant::CelerNoExtr => "celer_no_extr",
            Variant::Pn => "pn",
            Variant::PnNoExtr => "pn_no_extr",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        ALL_VARIANTS
            .into_iter()
            .find(|v| v.name() == s)
            .with_context(|| format!("unknown variant `{s}`"))
    }

    pub fn applies_to(self, kind: ModelKind) -> bool {
        match self {
            Variant::Pn | Variant::PnNoExtr => kind == ModelKind::Logistic,
            _ => true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelSpec {
    Lasso,
    Logreg,
    Mtl,
}

impl ModelSpec {
    pub fn kind(self) -> ModelKind {
        match self {
            ModelSpec::Lasso => ModelKind::Quadratic,
            ModelSpec::Logreg => ModelKind::Logistic,
            ModelSpec::Mtl => ModelKind::MultitaskQuadratic,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelSpec::Lasso => "lasso",
            ModelSpec::Logreg => "logreg",
            ModelSpec::Mtl => "mtl",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lasso" => Ok(ModelSpec::Lasso),
            "logreg" => Ok(ModelSpec::Logreg),
            "mtl" => Ok(ModelSpec::Mtl),
            other => bail!("unknown model `{other}` (expected lasso|logreg|mtl)"),
        }
    }
}

/// Synthetic generator parameters (the `--synth n,p,density,support,snr`
/// CLI argument).
#[derive(Clone, Copy, Debug)]
pub struct SynthSpec {
    pub n: usize,
    pub p: usize,
    pub density: f64,
    pub support: usize,
    pub snr: f64,
}

impl SynthSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 5 {
            bail!("--synth expects n,p,density,support,snr");
        }
        Ok(SynthSpec {
            n: parts[0].parse().context("synth n")?,
            p: parts[1].parse().context("synth p")?,
            density: parts[2].parse().context("synth density")?,
            support: parts[3].parse().context("synth support")?,
            snr: if parts[4] == "inf" {
                f64::INFINITY
            } else {
                parts[4].parse().context("synth snr")?
            },
        })
    }
}

#[derive(Clone, Debug)]
pub enum DataSpec {
    File {
        path: PathBuf,
        /// Dense multitask target matrix (rows = samples, whitespace
        /// separated); required for mtl file input.
        targets: Option<PathBuf>,
    },
    Synth(SynthSpec),
}

#[derive(Clone, Debug)]
pub struct PathConfig {
    pub data: DataSpec,
    pub model: ModelSpec,
    /// Number of lambda values, geometrically spaced.
    pub grid: usize,
    /// Grid endpoint ratio: the last lambda is lambda_max / divisor.
    pub divisor: f64,
    pub epsilons: Vec<f64>,
    pub variants: Vec<Variant>,
    pub seed: u64,
    /// Tasks for synthetic multitask data.
    pub tasks: usize,
    /// Sparse columns with fewer nonzeros are pruned before solving.
    pub min_nnz: usize,
    pub warm_start: bool,
    /// Capture per-check gap histories.
    pub trace: bool,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig {
            data: DataSpec::Synth(SynthSpec {
                n: 100,
                p: 500,
                density: 1.0,
                support: 20,
                snr: 5.0,
            }),
            model: ModelSpec::Lasso,
            grid: 10,
            divisor: 100.0,
            epsilons: vec![1e-4, 1e-6],
            variants: vec![
                Variant::Cd,
                Variant::CdScreen,
                Variant::CdScreenExtr,
                Variant::Celer,
                Variant::CelerNoExtr,
            ],
            seed: 0,
            tasks: 5,
            min_nnz: 4,
            warm_start: true,
            trace: false,
        }
    }
}

/// One (variant, epsilon, lambda) cell of the benchmark matrix. The field
/// order matches the CSV schema.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathRecord {
    pub variant: String,
    pub model: String,
    pub lambda_idx: usize,
    pub lambda: f64,
    pub epsilon: f64,
    pub seconds: f64,
    /// Work in full-width update passes: plain solvers report their epoch
    /// count; working-set solvers report subproblem epochs weighted by
    /// subproblem width plus two full passes per outer certificate
    /// evaluation, so the column stays comparable across variants.
    pub epochs: usize,
    pub gap: f64,
    pub support: usize,
    pub screened: usize,
    /// Final primal objective; kept out of the serialized schema, used by
    /// verification suites.
    #[serde(skip)]
    pub objective: f64,
}

/// One gap evaluation of a traced run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceRecord {
    pub variant: String,
    pub lambda_idx: usize,
    pub epsilon: f64,
    pub epoch: usize,
    pub primal: f64,
    pub dual_rescaled: f64,
    pub dual_accel: Option<f64>,
    pub dual_used: f64,
    pub sign_changed: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PathResult {
    pub records: Vec<PathRecord>,
    pub traces: Vec<TraceRecord>,
}

/// Loads (or generates) the dataset and applies the protocol
/// preprocessing: prune rare features on sparse data, normalize columns to
/// unit norm. Targets are left untouched.
pub fn prepare_dataset(cfg: &PathConfig) -> Result<Dataset> {
    let ds = match &cfg.data {
        DataSpec::Synth(s) => match cfg.model {
            ModelSpec::Lasso => {
                synth_gaussian(s.n, s.p, s.density, s.support, s.snr, cfg.seed)?
            }
            ModelSpec::Logreg => {
                synth_logistic(s.n, s.p, s.density, s.support, s.snr, cfg.seed)?
            }
            ModelSpec::Mtl => {
                synth_multitask(s.n, s.p, s.density, s.support, s.snr, cfg.tasks, cfg.seed)?
            }
        },
        DataSpec::File { path, targets } => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let mode = match cfg.model {
                ModelSpec::Logreg => LabelMode::Classification,
                _ => LabelMode::Regression,
            };
            let mut ds = parse_libsvm(&text, mode, None)?;
            ds.source = DataSource::File(path.display().to_string());
            if cfg.model == ModelSpec::Mtl {
                let tpath = targets
                    .as_ref()
                    .context("multitask file input needs --targets <matrix file>")?;
                let (rows, tasks, values) = load_dense_matrix(tpath)?;
                if rows != ds.n() {
                    bail!(
                        "target matrix has {rows} rows but the design has {} samples",
                        ds.n()
                    );
                }
                ds.targets = Targets::Multitask { tasks, values };
            }
            ds
        }
    };
    let (ds, _) = if ds.x.is_sparse() {
        prune_rare_features(ds, cfg.min_nnz)
    } else {
        let p = ds.p();
        (ds, (0..p).collect())
    };
    let (ds, _scales) = normalize_columns(ds);
    Ok(ds)
}

/// Whitespace-separated dense matrix, one sample per row.
pub fn load_dense_matrix(path: &PathBuf) -> Result<(usize, usize, Vec<f64>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut values = Vec::new();
    let mut tasks = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().with_context(|| format!("line {}: bad number `{t}`", i + 1)))
            .collect::<Result<_>>()?;
        if row.is_empty() {
            continue;
        }
        match tasks {
            None => tasks = Some(row.len()),
            Some(q) if q != row.len() => {
                bail!("line {}: expected {q} columns, got {}", i + 1, row.len())
            }
            _ => {}
        }
        values.extend(row);
        rows += 1;
    }
    let tasks = tasks.context("target matrix is empty")?;
    Ok((rows, tasks, values))
}

/// lambda_k = lambda_max * divisor^(-k / (grid - 1)), endpoints inclusive.
pub fn lambda_grid(lambda_max: f64, grid: usize, divisor: f64) -> Vec<f64> {
    if grid == 1 {
        return vec![lambda_max];
    }
    (0..grid)
        .map(|k| lambda_max * divisor.powf(-(k as f64) / (grid as f64 - 1.0)))
        .collect()
}

fn run_variant(
    variant: Variant,
    kind: ModelKind,
    ds: &Dataset,
    lambda: f64,
    beta0: &[f64],
    tol: f64,
) -> Result<SolveReport> {
    let algorithm = if kind.is_multitask() {
        Algorithm::Bcd
    } else {
        Algorithm::Cd
    };
    let report = match variant {
        Variant::Cd | Variant::CdScreen | Variant::CdScreenExtr => {
            let params = SolverParams {
                algorithm,
                tol,
                screening: matches!(variant, Variant::CdScreen | Variant::CdScreenExtr),
                extrapolation: matches!(variant, Variant::CdScreenExtr),
                max_epochs: 1_000_000,
                ..SolverParams::default()
            };
            solve(kind, &ds.x, &ds.targets, lambda, beta0, &params)?
        }
        Variant::Celer | Variant::CelerNoExtr | Variant::Pn | Variant::PnNoExtr => {
            let params = CelerParams {
                tol,
                inner: if matches!(variant, Variant::Pn | Variant::PnNoExtr) {
                    InnerSolver::ProxNewton
                } else {
                    InnerSolver::Cd
                },
                extrapolation: matches!(variant, Variant::Celer | Variant::Pn),
                max_ws_iters: 200,
                ..CelerParams::default()
            };
            celer_solve(kind, &ds.x, &ds.targets, lambda, beta0, &params)?
        }
    };
    Ok(report)
}

/// Comparable work measure in full-width passes. Subproblem epochs are
/// scaled by the fraction of features they touch; each outer certificate
/// evaluation costs about two passes over the full matrix (rescaled dual
/// plus feature scores), as do the support-restricted extrapolation passes
/// of the prox-Newton path.
fn equivalent_epochs(variant: Variant, p: usize, report: &SolveReport, k: usize) -> usize {
    match variant {
        Variant::Cd | Variant::CdScreen | Variant::CdScreenExtr => report.epochs_run,
        _ => {
            let outer = report.gap_history.len();
            let mut work = 2.0 * outer as f64;
            for w in &report.ws_history {
                work += w.inner_epochs as f64 * w.size as f64 / p as f64;
            }
            if matches!(variant, Variant::Pn | Variant::PnNoExtr) {
                for w in &report.ws_history {
                    work += k as f64 * w.size as f64 / p as f64;
                }
            }
            work.ceil() as usize
        }
    }
}

/// Runs the full benchmark matrix: for every variant and tolerance, walks
/// the lambda grid in decreasing order, warm-starting each solve from the
/// previous solution. Deterministic apart from the timing fields.
pub fn run_path(cfg: &PathConfig) -> Result<PathResult> {
    let kind = cfg.model.kind();
    for v in &cfg.variants {
        if !v.applies_to(kind) {
            bail!("variant `{}` does not apply to model `{}`", v.name(), cfg.model.name());
        }
    }
    if cfg.grid < 1 || cfg.divisor <= 1.0 {
        bail!("grid must be >= 1 and divisor > 1");
    }
    if cfg.epsilons.iter().any(|&e| e <= 0.0) {
        bail!("tolerances must be positive");
    }
    let ds = prepare_dataset(cfg)?;
    let tasks = ds.targets.tasks();
    let p = ds.p();

    let lmax_start = Instant::now();
    let lmax = lambda_max(kind, &ds.x, &ds.targets);
    let lmax_seconds = lmax_start.elapsed().as_secs_f64();
    let grid = lambda_grid(lmax, cfg.grid, cfg.divisor);
    let f0 = primal_at_zero(kind, &ds.targets);

    let mut result = PathResult::default();
    for &variant in &cfg.variants {
        for &eps in &cfg.epsilons {
            let mut beta = vec![0.0; p * tasks];
            for (k, &lambda) in grid.iter().enumerate() {
                let t0 = Instant::now();
                let report = run_variant(variant, kind, &ds, lambda, &beta, eps * f0)?;
                // the one-off lambda_max computation is charged to the
                // first grid point so totals stay comparable
                let seconds = t0.elapsed().as_secs_f64()
                    + if k == 0 { lmax_seconds } else { 0.0 };
                let xbeta = ds.x.mul_flat(&report.beta, tasks);
                let objective =
                    primal_value(kind, &ds.targets, &report.beta, &xbeta, lambda);
                if cfg.trace {
                    for rec in &report.gap_history {
                        result.traces.push(TraceRecord {
                            variant: variant.name().to_string(),
                            lambda_idx: k,
                            epsilon: eps,
                            epoch: rec.epoch,
                            primal: rec.primal,
                            dual_rescaled: rec.dual_rescaled,
                            dual_accel: rec.dual_accel,
                            dual_used: rec.dual_used,
                            sign_changed: rec.sign_changed,
                        });
                    }
                }
                result.records.push(PathRecord {
                    variant: variant.name().to_string(),
                    model: cfg.model.name().to_string(),
                    lambda_idx: k,
                    lambda,
                    epsilon: eps,
                    seconds,
                    epochs: equivalent_epochs(variant, p, &report, 5),
                    gap: report.final_gap,
                    support: support_size(&report.beta, tasks),
                    screened: report.screened.len(),
                    objective,
                });
                if cfg.warm_start {
                    beta = report.beta;
                }
            }
        }
    }
    Ok(result)
}

/// Gap-history table for a single-solver, single-lambda configuration.
pub fn trace_gaps(cfg: &PathConfig) -> Result<Vec<TraceRecord>> {
    if cfg.variants.len() != 1 || cfg.grid != 1 || cfg.epsilons.len() != 1 {
        bail!("trace_gaps expects exactly one variant, one lambda and one tolerance");
    }
    let mut cfg = cfg.clone();
    cfg.trace = true;
    Ok(run_path(&cfg)?.traces)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => bail!("unknown format `{other}` (expected csv|json)"),
        }
    }
}

pub const CSV_HEADER: &str =
    "variant,model,lambda_idx,lambda,epsilon,seconds,epochs,gap,support,screened";

/// 17 significant digits, enough to reproduce any f64 exactly.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the benchmark records in the fixed CSV schema or as JSON
/// mirroring it.
pub fn emit_report(res: &PathResult, format: ReportFormat, sink: &mut dyn Write) -> Result<()> {
    match format {
        ReportFormat::Csv => {
            writeln!(sink, "{CSV_HEADER}")?;
            for r in &res.records {
                writeln!(
                    sink,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.variant,
                    r.model,
                    r.lambda_idx,
                    fmt17(r.lambda),
                    fmt17(r.epsilon),
                    fmt17(r.seconds),
                    r.epochs,
                    fmt17(r.gap),
                    r.support,
                    r.screened
                )?;
            }
        }
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *sink, res)?;
            writeln!(sink)?;
        }
    }
    Ok(())
}

/// Companion trace table (CSV only; JSON reports embed the traces).
pub fn emit_trace_csv(traces: &[TraceRecord], sink: &mut dyn Write) -> Result<()> {
    writeln!(
        sink,
        "variant,lambda_idx,epsilon,epoch,primal,dual_rescaled,dual_accel,dual_used,sign_changed"
    )?;
    for t in traces {
        writeln!(
            sink,
            "{},{},{},{},{},{},{},{},{}",
            t.variant,
            t.lambda_idx,
            fmt17(t.epsilon),
            t.epoch,
            fmt17(t.primal),
            fmt17(t.dual_rescaled),
            t.dual_accel.map_or(String::new(), fmt17),
            fmt17(t.dual_used),
            t.sign_changed
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_inclusive() {
        let g = lambda_grid(100.0, 10, 100.0);
        assert_eq!(g.len(), 10);
        assert!((g[0] - 100.0).abs() < 1e-12);
        assert!((g[9] - 1.0).abs() < 1e-12);
        for w in g.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert_eq!(lambda_grid(5.0, 1, 100.0), vec![5.0]);
    }

    #[test]
    fn variant_names_round_trip() {
        for v in ALL_VARIANTS {
            assert_eq!(Variant::parse(v.name()).unwrap(), v);
        }
        assert!(Variant::parse("nope").is_err());
    }

    #[test]
    fn synth_spec_parsing() {
        let s = SynthSpec::parse("100,2000,1.0,20,5").unwrap();
        assert_eq!((s.n, s.p, s.support), (100, 2000, 20));
        assert_eq!(s.density, 1.0);
        let inf = SynthSpec::parse("10,10,0.5,2,inf").unwrap();
        assert!(inf.snr.is_infinite());
        assert!(SynthSpec::parse("10,10").is_err());
    }

    #[test]
    fn empty_result_is_header_only() {
        let mut out = Vec::new();
        emit_report(&PathResult::default(), ReportFormat::Csv, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn json_round_trips_a_record() {
        let res = PathResult {
            records: vec![PathRecord {
                variant: "cd".into(),
                model: "lasso".into(),
                lambda_idx: 3,
                lambda: 0.125,
                epsilon: 1e-6,
                seconds: 0.5,
                epochs: 120,
                gap: 3.5e-7,
                support: 17,
                screened: 42,
                objective: 1.25,
            }],
            traces: Vec::new(),
        };
        let mut out = Vec::new();
        emit_report(&res, ReportFormat::Json, &mut out).unwrap();
        let back: PathResult = serde_json::from_slice(&out).unwrap();
        let (a, b) = (&res.records[0], &back.records[0]);
        assert_eq!(a.variant, b.variant);
        assert_eq!(a.lambda_idx, b.lambda_idx);
        assert_eq!(a.lambda, b.lambda);
        assert_eq!(a.gap, b.gap);
        assert_eq!(a.screened, b.screened);
    }

    #[test]
    fn pn_variant_rejected_for_lasso() {
        let cfg = PathConfig {
            variants: vec![Variant::Pn],
            grid: 2,
            ..PathConfig::default()
        };
        assert!(run_path(&cfg).is_err());
    }
}
