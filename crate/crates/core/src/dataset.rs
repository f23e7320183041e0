//! Datasets: targets, LIBSVM text parsing/serialization, synthetic
//! generators, column preprocessing and the spectral bound used by proximal
//! gradient.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::float::sqrt;
use crate::matrix::{DesignMatrix, MatrixError};

/// Response data paired with a design matrix.
#[derive(Clone, Debug)]
pub enum Targets {
    Regression(Vec<f64>),
    /// Entries restricted to {-1, +1}.
    Classification(Vec<f64>),
    /// Row-major n x q matrix, one row of responses per sample.
    Multitask { tasks: usize, values: Vec<f64> },
}

impl Targets {
    pub fn n(&self) -> usize {
        match self {
            Targets::Regression(y) | Targets::Classification(y) => y.len(),
            Targets::Multitask { tasks, values } => values.len() / (*tasks).max(1),
        }
    }

    /// Number of tasks (1 unless multitask).
    pub fn tasks(&self) -> usize {
        match self {
            Targets::Multitask { tasks, .. } => *tasks,
            _ => 1,
        }
    }
}

/// Where a dataset came from; carried along for reporting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DataSource {
    Memory,
    File(String),
    Synthetic { seed: u64 },
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub x: DesignMatrix,
    pub targets: Targets,
    pub source: DataSource,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DatasetError {
    /// Targets and design matrix disagree on the sample count, or a
    /// multitask matrix is ragged.
    DimensionMismatch(String),
    Matrix(MatrixError),
    /// Bad generator arguments (density outside (0, 1], support > p, ...).
    InvalidArgument(String),
    /// LIBSVM text could not be parsed; carries the 1-based line number.
    Parse { line: usize, reason: String },
    /// Input held no samples at all.
    Empty,
    /// Operation undefined for this target type (e.g. serializing a
    /// multitask dataset to LIBSVM text).
    Unsupported(String),
}

impl core::fmt::Display for DatasetError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DatasetError::DimensionMismatch(m) => write!(f, "dimension mismatch: {m}"),
            DatasetError::Matrix(e) => write!(f, "{e}"),
            DatasetError::InvalidArgument(m) => write!(f, "invalid argument: {m}"),
            DatasetError::Parse { line, reason } => {
                write!(f, "parse error on line {line}: {reason}")
            }
            DatasetError::Empty => write!(f, "empty input"),
            DatasetError::Unsupported(m) => write!(f, "unsupported: {m}"),
        }
    }
}

impl core::error::Error for DatasetError {}

impl From<MatrixError> for DatasetError {
    fn from(e: MatrixError) -> Self {
        DatasetError::Matrix(e)
    }
}

impl Dataset {
    pub fn new(x: DesignMatrix, targets: Targets, source: DataSource) -> Result<Self, DatasetError> {
        if targets.n() != x.n() {
            return Err(DatasetError::DimensionMismatch(format!(
                "matrix has {} rows, targets have {}",
                x.n(),
                targets.n()
            )));
        }
        if let Targets::Multitask { tasks, values } = &targets {
            if *tasks == 0 || values.len() != tasks * x.n() {
                return Err(DatasetError::DimensionMismatch(
                    "multitask target matrix is ragged".to_string(),
                ));
            }
        }
        Ok(Dataset { x, targets, source })
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn p(&self) -> usize {
        self.x.p()
    }
}

/// How parsed labels are interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelMode {
    Regression,
    /// Labels must be exactly +1 or -1.
    Classification,
}

/// Parses LIBSVM sparse text: one sample per line, `label idx:val ...`,
/// 1-based nondecreasing feature indices. `min_features` can raise the
/// inferred feature count (it is never lowered below the largest index
/// seen).
pub fn parse_libsvm(
    text: &str,
    mode: LabelMode,
    min_features: Option<usize>,
) -> Result<Dataset, DatasetError> {
    let mut labels: Vec<f64> = Vec::new();
    // entries per column; rows arrive in increasing order by construction
    let mut cols: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut max_index = min_features.unwrap_or(0);

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let mut tokens = raw.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue; // blank line
        };
        let label: f64 = label_tok.parse().map_err(|_| DatasetError::Parse {
            line,
            reason: format!("label `{label_tok}` is not a number"),
        })?;
        if mode == LabelMode::Classification && label != 1.0 && label != -1.0 {
            return Err(DatasetError::Parse {
                line,
                reason: format!("classification label must be +1 or -1, got {label}"),
            });
        }
        let row = labels.len();
        labels.push(label);

        let mut prev_idx = 0usize; // indices are 1-based, so 0 = none yet
        for tok in tokens {
            let Some((idx_s, val_s)) = tok.split_once(':') else {
                return Err(DatasetError::Parse {
                    line,
                    reason: format!("expected `index:value`, got `{tok}`"),
                });
            };
            let idx: usize = idx_s.parse().map_err(|_| DatasetError::Parse {
                line,
                reason: format!("feature index `{idx_s}` is not a positive integer"),
            })?;
            if idx == 0 {
                return Err(DatasetError::Parse {
                    line,
                    reason: "feature indices are 1-based".to_string(),
                });
            }
            let val: f64 = val_s.parse().map_err(|_| DatasetError::Parse {
                line,
                reason: format!("value `{val_s}` is not a number"),
            })?;
            if idx < prev_idx {
                return Err(DatasetError::Parse {
                    line,
                    reason: format!("feature indices decrease at {idx}"),
                });
            }
            max_index = max_index.max(idx);
            if cols.len() < idx {
                cols.resize_with(idx, Vec::new);
            }
            let col = &mut cols[idx - 1];
            if idx == prev_idx {
                // duplicate index on one line: accumulate
                col.last_mut().expect("duplicate implies prior entry").1 += val;
            } else {
                col.push((row, val));
            }
            prev_idx = idx;
        }
    }

    let n = labels.len();
    if n == 0 {
        return Err(DatasetError::Empty);
    }
    let p = max_index;
    cols.resize_with(p, Vec::new);

    let mut col_ptr = Vec::with_capacity(p + 1);
    let mut row_idx = Vec::new();
    let mut values = Vec::new();
    col_ptr.push(0);
    for col in &cols {
        for &(i, v) in col {
            if v != 0.0 {
                row_idx.push(i);
                values.push(v);
            }
        }
        col_ptr.push(row_idx.len());
    }
    let x = DesignMatrix::from_sparse(n, p, col_ptr, row_idx, values)?;
    let targets = match mode {
        LabelMode::Regression => Targets::Regression(labels),
        LabelMode::Classification => Targets::Classification(labels),
    };
    Dataset::new(x, targets, DataSource::Memory)
}

/// Serializes a single-task dataset back to LIBSVM text. Values use the
/// shortest round-trippable decimal form, so parse(to_libsvm(ds)) rebuilds
/// the identical structure.
pub fn to_libsvm(ds: &Dataset) -> Result<String, DatasetError> {
    let labels = match &ds.targets {
        Targets::Regression(y) | Targets::Classification(y) => y,
        Targets::Multitask { .. } => {
            return Err(DatasetError::Unsupported(
                "multitask targets have no LIBSVM form".to_string(),
            ))
        }
    };
    // gather row-wise from the column storage
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ds.n()];
    for j in 0..ds.p() {
        if let crate::matrix::Col::Sparse { rows: r, values } = ds.x.col(j) {
            for (&i, &v) in r.iter().zip(values) {
                rows[i].push((j, v));
            }
        } else if let crate::matrix::Col::Dense(c) = ds.x.col(j) {
            for (i, &v) in c.iter().enumerate() {
                if v != 0.0 {
                    rows[i].push((j, v));
                }
            }
        }
    }
    let mut out = String::new();
    for (i, label) in labels.iter().enumerate() {
        out.push_str(&format!("{label}"));
        for &(j, v) in &rows[i] {
            out.push_str(&format!(" {}:{}", j + 1, v));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Divides every nonzero column by its norm; returns the original norms as
/// scales (0 marks a column left untouched).
pub fn normalize_columns(mut ds: Dataset) -> (Dataset, Vec<f64>) {
    let p = ds.p();
    let mut scales = vec![0.0; p];
    for j in 0..p {
        let norm = ds.x.column_norms()[j];
        if norm > 0.0 {
            ds.x.scale_column(j, 1.0 / norm);
            scales[j] = norm;
        }
    }
    (ds, scales)
}

/// Drops sparse columns with fewer than `min_nnz` nonzeros; `kept[new] = old`
/// maps surviving columns back. Dense matrices pass through unchanged.
pub fn prune_rare_features(ds: Dataset, min_nnz: usize) -> (Dataset, Vec<usize>) {
    if !ds.x.is_sparse() {
        let kept = (0..ds.p()).collect();
        return (ds, kept);
    }
    let kept: Vec<usize> = (0..ds.p())
        .filter(|&j| ds.x.col(j).nnz() >= min_nnz)
        .collect();
    if kept.len() == ds.p() {
        return (ds, kept);
    }
    let x = ds.x.select_columns(&kept);
    (
        Dataset {
            x,
            targets: ds.targets,
            source: ds.source,
        },
        kept,
    )
}

fn validate_synth(n: usize, p: usize, density: f64, support_size: usize) -> Result<(), DatasetError> {
    if n == 0 || p == 0 {
        return Err(DatasetError::InvalidArgument("n and p must be positive".to_string()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(DatasetError::InvalidArgument(format!(
            "density must lie in (0, 1], got {density}"
        )));
    }
    if support_size > p {
        return Err(DatasetError::InvalidArgument(format!(
            "support size {support_size} exceeds p = {p}"
        )));
    }
    Ok(())
}

/// Gaussian design (dense when density = 1, sparse otherwise) and hidden
/// coefficients on a random support. Returns the design, the clean scores
/// X * beta (row-major n x q) and the rng for noise generation.
fn synth_design(
    n: usize,
    p: usize,
    density: f64,
    support_size: usize,
    tasks: usize,
    seed: u64,
) -> (DesignMatrix, Vec<f64>, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let x = if density >= 1.0 {
        let values: Vec<f64> = (0..n * p).map(|_| normal.sample(&mut rng)).collect();
        DesignMatrix::from_dense(n, p, values).expect("generated shape is consistent")
    } else {
        let mut col_ptr = vec![0usize; p + 1];
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        for j in 0..p {
            for i in 0..n {
                if rng.gen::<f64>() < density {
                    row_idx.push(i);
                    values.push(normal.sample(&mut rng));
                }
            }
            col_ptr[j + 1] = row_idx.len();
        }
        DesignMatrix::from_sparse(n, p, col_ptr, row_idx, values)
            .expect("generated structure is consistent")
    };
    // random support via partial Fisher-Yates
    let mut order: Vec<usize> = (0..p).collect();
    for k in 0..support_size.min(p) {
        let swap = rng.gen_range(k..p);
        order.swap(k, swap);
    }
    let mut beta = vec![0.0; p * tasks];
    for &j in order.iter().take(support_size) {
        for t in 0..tasks {
            beta[j * tasks + t] = normal.sample(&mut rng);
        }
    }
    let clean = x.mul_flat(&beta, tasks);
    (x, clean, rng)
}

/// Adds Gaussian noise scaled so that ||clean|| / ||noise|| = snr; an
/// infinite snr keeps the clean scores exactly.
fn add_noise(clean: &mut [f64], snr: f64, rng: &mut ChaCha8Rng) {
    if snr.is_infinite() {
        return;
    }
    let normal = StandardNormal;
    let noise: Vec<f64> = (0..clean.len()).map(|_| normal.sample(rng)).collect();
    let clean_norm = sqrt(clean.iter().map(|x| x * x).sum());
    let noise_norm = sqrt(noise.iter().map(|x: &f64| x * x).sum());
    if noise_norm == 0.0 {
        return;
    }
    let scale = if clean_norm > 0.0 {
        clean_norm / (snr * noise_norm)
    } else {
        1.0
    };
    for (c, e) in clean.iter_mut().zip(&noise) {
        *c += scale * e;
    }
}

/// Synthetic regression dataset y = X beta + noise, deterministic in `seed`.
pub fn synth_gaussian(
    n: usize,
    p: usize,
    density: f64,
    support_size: usize,
    snr: f64,
    seed: u64,
) -> Result<Dataset, DatasetError> {
    validate_synth(n, p, density, support_size)?;
    let (x, mut y, mut rng) = synth_design(n, p, density, support_size, 1, seed);
    add_noise(&mut y, snr, &mut rng);
    Dataset::new(x, Targets::Regression(y), DataSource::Synthetic { seed })
}

/// Synthetic binary classification: labels are the signs of noisy scores
/// (ties broken towards +1).
pub fn synth_logistic(
    n: usize,
    p: usize,
    density: f64,
    support_size: usize,
    snr: f64,
    seed: u64,
) -> Result<Dataset, DatasetError> {
    validate_synth(n, p, density, support_size)?;
    let (x, mut scores, mut rng) = synth_design(n, p, density, support_size, 1, seed);
    add_noise(&mut scores, snr, &mut rng);
    let y = scores
        .iter()
        .map(|&s| if s < 0.0 { -1.0 } else { 1.0 })
        .collect();
    Dataset::new(x, Targets::Classification(y), DataSource::Synthetic { seed })
}

/// Synthetic multitask regression Y = X B + noise with a shared row support.
pub fn synth_multitask(
    n: usize,
    p: usize,
    density: f64,
    support_size: usize,
    snr: f64,
    tasks: usize,
    seed: u64,
) -> Result<Dataset, DatasetError> {
    validate_synth(n, p, density, support_size)?;
    if tasks == 0 {
        return Err(DatasetError::InvalidArgument("tasks must be positive".to_string()));
    }
    let (x, mut values, mut rng) = synth_design(n, p, density, support_size, tasks, seed);
    add_noise(&mut values, snr, &mut rng);
    Dataset::new(
        x,
        Targets::Multitask { tasks, values },
        DataSource::Synthetic { seed },
    )
}

pub const SPECTRAL_TOL: f64 = 1e-6;
pub const SPECTRAL_MAX_ITER: usize = 1000;

/// Largest eigenvalue of X^T X by power iteration (deterministic all-ones
/// start), i.e. the Lipschitz constant of the quadratic data fit. Returns 0
/// for a zero matrix.
pub fn spectral_norm_sq(x: &DesignMatrix, tol: f64, max_iter: usize) -> f64 {
    let p = x.p();
    let mut v = vec![1.0 / sqrt(p as f64); p];
    let mut eig = 0.0f64;
    for _ in 0..max_iter {
        let xv = x.mul_vec(&v);
        let mut xtxv = vec![0.0; p];
        for (j, out) in xtxv.iter_mut().enumerate() {
            *out = x.col(j).dot(&xv);
        }
        let new_eig: f64 = v.iter().zip(&xtxv).map(|(a, b)| a * b).sum();
        let norm = sqrt(xtxv.iter().map(|a| a * a).sum());
        if norm == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&xtxv) {
            *vi = wi / norm;
        }
        if (new_eig - eig).abs() <= tol * new_eig.abs() {
            return new_eig;
        }
        eig = new_eig;
    }
    eig
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn datasets_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Dataset>();
        assert_send_sync::<crate::matrix::DesignMatrix>();
    }

    #[test]
    fn parse_two_lines() {
        let ds = parse_libsvm("1 1:1.0 3:2.0\n-1 2:0.5\n", LabelMode::Classification, None)
            .unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.p(), 3);
        assert_eq!(ds.x.nnz(), 3);
        match &ds.targets {
            Targets::Classification(y) => assert_eq!(y, &[1.0, -1.0]),
            _ => panic!("wrong target kind"),
        }
    }

    #[test]
    fn parse_drops_explicit_zero_but_counts_index() {
        let ds = parse_libsvm("1 2:0.0\n", LabelMode::Regression, None).unwrap();
        assert_eq!(ds.p(), 2);
        assert_eq!(ds.x.nnz(), 0);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_libsvm("", LabelMode::Regression, None),
            Err(DatasetError::Empty)
        ));
        assert!(matches!(
            parse_libsvm("abc 1:2\n", LabelMode::Regression, None),
            Err(DatasetError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_libsvm("1 0:2\n", LabelMode::Regression, None),
            Err(DatasetError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_libsvm("1 1:1\n1 3:1 2:1\n", LabelMode::Regression, None),
            Err(DatasetError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_libsvm("2 1:1\n", LabelMode::Classification, None),
            Err(DatasetError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn parse_respects_min_features() {
        let ds = parse_libsvm("1 2:1.5\n", LabelMode::Regression, Some(10)).unwrap();
        assert_eq!(ds.p(), 10);
        let ds = parse_libsvm("1 2:1.5\n", LabelMode::Regression, Some(1)).unwrap();
        assert_eq!(ds.p(), 2);
    }

    #[test]
    fn normalize_345_column() {
        let x = DesignMatrix::from_dense(2, 1, vec![3.0, 4.0]).unwrap();
        let ds = Dataset::new(x, Targets::Regression(vec![0.0, 0.0]), DataSource::Memory).unwrap();
        let (ds, scales) = normalize_columns(ds);
        assert_eq!(scales, vec![5.0]);
        match ds.x.col(0) {
            crate::matrix::Col::Dense(c) => {
                assert!((c[0] - 0.6).abs() < 1e-15 && (c[1] - 0.8).abs() < 1e-15)
            }
            _ => panic!("dense expected"),
        }
    }

    #[test]
    fn normalize_leaves_zero_columns() {
        let x = DesignMatrix::from_sparse(2, 2, vec![0, 0, 1], vec![0], vec![2.0]).unwrap();
        let ds = Dataset::new(x, Targets::Regression(vec![0.0; 2]), DataSource::Memory).unwrap();
        let (ds, scales) = normalize_columns(ds);
        assert_eq!(scales, vec![0.0, 2.0]);
        assert_eq!(ds.x.column_norms()[0], 0.0);
        assert_eq!(ds.x.column_norms()[1], 1.0);
    }

    #[test]
    fn normalize_identity_is_noop() {
        let x = DesignMatrix::from_dense(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let ds = Dataset::new(x, Targets::Regression(vec![0.0; 2]), DataSource::Memory).unwrap();
        let (_, scales) = normalize_columns(ds);
        assert_eq!(scales, vec![1.0, 1.0]);
    }

    #[test]
    fn prune_boundary() {
        // column 0 has 3 nonzeros, column 1 has 4
        let text = "0 1:1 2:1\n0 1:1 2:1\n0 1:1 2:1\n0 2:1\n";
        let ds = parse_libsvm(text, LabelMode::Regression, None).unwrap();
        let (pruned, kept) = prune_rare_features(ds.clone(), 4);
        assert_eq!(kept, vec![1]);
        assert_eq!(pruned.p(), 1);
        let (same, kept) = prune_rare_features(ds, 0);
        assert_eq!(kept, vec![0, 1]);
        assert_eq!(same.p(), 2);
    }

    #[test]
    fn synth_is_deterministic() {
        let a = synth_gaussian(20, 50, 1.0, 5, 10.0, 0).unwrap();
        let b = synth_gaussian(20, 50, 1.0, 5, 10.0, 0).unwrap();
        match (&a.targets, &b.targets) {
            (Targets::Regression(ya), Targets::Regression(yb)) => assert_eq!(ya, yb),
            _ => panic!(),
        }
        assert!(!a.x.is_sparse());
        let c = synth_gaussian(20, 50, 0.3, 5, 10.0, 0).unwrap();
        assert!(c.x.is_sparse());
    }

    #[test]
    fn synth_infinite_snr_adds_no_noise() {
        // with an empty support the clean scores are exactly zero, so an
        // infinite snr must yield an exactly zero response
        let ds = synth_gaussian(15, 10, 1.0, 0, f64::INFINITY, 5).unwrap();
        match &ds.targets {
            Targets::Regression(y) => assert!(y.iter().all(|&v| v == 0.0)),
            _ => panic!(),
        }
        // a finite snr on the same degenerate support falls back to raw noise
        let noisy = synth_gaussian(15, 10, 1.0, 0, 10.0, 5).unwrap();
        match &noisy.targets {
            Targets::Regression(y) => assert!(y.iter().any(|&v| v != 0.0)),
            _ => panic!(),
        }
    }

    #[test]
    fn synth_rejects_bad_arguments() {
        assert!(synth_gaussian(10, 10, 0.0, 2, 1.0, 0).is_err());
        assert!(synth_gaussian(10, 10, 1.5, 2, 1.0, 0).is_err());
        assert!(synth_gaussian(10, 10, 1.0, 11, 1.0, 0).is_err());
    }

    #[test]
    fn spectral_norm_closed_forms() {
        let eye = DesignMatrix::from_dense(3, 3, {
            let mut v = vec![0.0; 9];
            v[0] = 1.0;
            v[4] = 1.0;
            v[8] = 1.0;
            v
        })
        .unwrap();
        assert!((spectral_norm_sq(&eye, 1e-10, 1000) - 1.0).abs() < 1e-9);
        let diag = DesignMatrix::from_dense(2, 2, vec![1.0, 0.0, 0.0, 2.0]).unwrap();
        assert!((spectral_norm_sq(&diag, 1e-10, 1000) - 4.0).abs() < 1e-8);
        let zero = DesignMatrix::from_dense(2, 2, vec![0.0; 4]).unwrap();
        assert_eq!(spectral_norm_sq(&zero, 1e-6, 100), 0.0);
    }
}
