//! First-order primal solvers (cyclic coordinate descent, proximal
//! gradient, cyclic block coordinate descent) with periodic dual-certificate
//! construction, duality-gap stopping and optional Gap Safe screening.
//!
//! Coordinates are always visited in increasing index order: the
//! extrapolation theory relies on the per-epoch update map being fixed.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::datafit::{
    grad_f, primal_value, rescale_dual, sigmoid, DualCertificate, ModelKind, Provenance,
};
use crate::dataset::{spectral_norm_sq, Targets, SPECTRAL_MAX_ITER, SPECTRAL_TOL};
use crate::extrapolation::{accel_dual_point, best_dual, ResidualBuffer};
use crate::float::sqrt;
use crate::matrix::DesignMatrix;

/// Primal update scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    /// Cyclic proximal coordinate descent (single-task models).
    Cd,
    /// Proximal gradient with the spectral step size (single-task models).
    Pg,
    /// Cyclic proximal block coordinate descent (multitask model).
    Bcd,
}

#[derive(Clone, Debug)]
pub struct SolverParams {
    pub algorithm: Algorithm,
    /// Extrapolation order (number of combined residuals).
    pub k: usize,
    /// Epochs between gap evaluations.
    pub freq: usize,
    pub max_epochs: usize,
    /// Absolute gap tolerance; callers scale by F(0) for the protocol rule.
    pub tol: f64,
    pub screening: bool,
    /// Build extrapolated dual points; with this off the stopping and
    /// screening certificates come from residual rescaling only.
    pub extrapolation: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            algorithm: Algorithm::Cd,
            k: 5,
            freq: 10,
            max_epochs: 100_000,
            tol: 1e-6,
            screening: false,
            extrapolation: true,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.freq < 1 {
            return Err(SolveError::InvalidParams(String::from("freq must be >= 1")));
        }
        if self.k < 1 {
            return Err(SolveError::InvalidParams(String::from("k must be >= 1")));
        }
        if !(self.tol > 0.0) {
            return Err(SolveError::InvalidParams(String::from("tol must be > 0")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveError {
    InvalidParams(String),
    /// Model kind, targets, algorithm or buffer lengths disagree.
    Mismatch(String),
    /// A certificate produced a gap below the -1e-10 numerical floor.
    NegativeGap(f64),
    /// Proximal gradient needs a positive spectral bound.
    NonPositiveBound,
}

impl core::fmt::Display for SolveError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SolveError::InvalidParams(m) => write!(f, "invalid parameters: {m}"),
            SolveError::Mismatch(m) => write!(f, "mismatch: {m}"),
            SolveError::NegativeGap(g) => write!(f, "duality gap {g:e} below the numerical floor"),
            SolveError::NonPositiveBound => write!(f, "spectral bound must be positive"),
        }
    }
}

impl core::error::Error for SolveError {}

/// Mask of features still in play; screened features keep beta_j = 0 and
/// are never updated again.
#[derive(Clone, Debug)]
pub struct ActiveSet {
    mask: Vec<bool>,
    remaining: usize,
}

impl ActiveSet {
    pub fn all(p: usize) -> Self {
        ActiveSet {
            mask: vec![true; p],
            remaining: p,
        }
    }

    /// Active set holding exactly the given features.
    pub fn from_indices(p: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut mask = vec![false; p];
        let mut remaining = 0;
        for j in indices {
            if !mask[j] {
                mask[j] = true;
                remaining += 1;
            }
        }
        ActiveSet { mask, remaining }
    }

    #[inline]
    pub fn is_active(&self, j: usize) -> bool {
        self.mask[j]
    }

    pub fn screen_out(&mut self, j: usize) {
        if self.mask[j] {
            self.mask[j] = false;
            self.remaining -= 1;
        }
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }
}

/// One gap evaluation: primal value and the dual objectives of the
/// competing certificates, plus whether the sign pattern (row support for
/// multitask) moved since the previous evaluation.
#[derive(Clone, Debug)]
pub struct GapRecord {
    pub epoch: usize,
    pub primal: f64,
    pub dual_rescaled: f64,
    pub dual_accel: Option<f64>,
    pub dual_used: f64,
    pub sign_changed: bool,
}

/// One outer iteration of the working-set solver.
#[derive(Clone, Copy, Debug)]
pub struct WsRecord {
    pub iteration: usize,
    /// Features in the subproblem.
    pub size: usize,
    /// Epochs the inner solver spent on those features.
    pub inner_epochs: usize,
}

/// Everything a solver run produced.
#[derive(Clone, Debug)]
pub struct SolveReport {
    /// Final coefficients (row-major p x q for multitask).
    pub beta: Vec<f64>,
    pub tasks: usize,
    pub theta: DualCertificate,
    pub gap_history: Vec<GapRecord>,
    /// (epoch, active features remaining) after each screening pass.
    pub screened_history: Vec<(usize, usize)>,
    /// Features eliminated by Gap Safe screening, ascending.
    pub screened: Vec<usize>,
    /// Working-set trace; filled by the working-set solver, empty
    /// otherwise.
    pub ws_history: Vec<WsRecord>,
    pub epochs_run: usize,
    pub converged: bool,
    pub final_gap: f64,
}

/// sign(x) max(|x| - nu, 0).
#[inline]
pub fn soft_threshold(x: f64, nu: f64) -> f64 {
    if x > nu {
        x - nu
    } else if x < -nu {
        x + nu
    } else {
        0.0
    }
}

/// One cyclic pass of proximal coordinate descent over the active features.
/// `xbeta` is updated incrementally after every coordinate move.
pub fn cd_epoch(
    kind: ModelKind,
    x: &DesignMatrix,
    targets: &Targets,
    lambda: f64,
    beta: &mut [f64],
    xbeta: &mut [f64],
    active: &ActiveSet,
) {
    let gamma = kind.gamma();
    let norms = x.column_norms();
    match (kind, targets) {
        (ModelKind::Quadratic, Targets::Regression(y)) => {
            for j in 0..x.p() {
                if !active.is_active(j) || norms[j] == 0.0 {
                    continue;
                }
                let nrm2 = norms[j] * norms[j];
                let col = x.col(j);
                let g = col.dot_with(|i| xbeta[i] - y[i]);
                let new = soft_threshold(beta[j] - gamma * g / nrm2, gamma * lambda / nrm2);
                if new != beta[j] {
                    col.axpy(new - beta[j], xbeta);
                    beta[j] = new;
                }
            }
        }
        (ModelKind::Logistic, Targets::Classification(y)) => {
            for j in 0..x.p() {
                if !active.is_active(j) || norms[j] == 0.0 {
                    continue;
                }
                let nrm2 = norms[j] * norms[j];
                let col = x.col(j);
                let g = col.dot_with(|i| -y[i] * sigmoid(-y[i] * xbeta[i]));
                let new = soft_threshold(beta[j] - gamma * g / nrm2, gamma * lambda / nrm2);
                if new != beta[j] {
                    col.axpy(new - beta[j], xbeta);
                    beta[j] = new;
                }
            }
        }
        _ => panic!("cd_epoch requires a single-task model"),
    }
}

/// One proximal gradient step with step size gamma / ||X^T X||_2; `xbeta`
/// is recomputed from scratch afterwards.
pub fn pg_epoch(
    kind: ModelKind,
    x: &DesignMatrix,
    targets: &Targets,
    lambda: f64,
    beta: &mut [f64],
    xbeta: &mut Vec<f64>,
    spectral_bound: f64,
    active: &ActiveSet,
) -> Result<(), SolveError> {
    if !(spectral_bound > 0.0) {
        return Err(SolveError::NonPositiveBound);
    }
    let step = kind.gamma() / spectral_bound;
    let grad = grad_f(kind, targets, xbeta);
    for j in 0..x.p() {
        if !active.is_active(j) {
            continue;
        }
        let g = x.col(j).dot(&grad);
        beta[j] = soft_threshold(beta[j] - step * g, lambda * step);
    }
    *xbeta = x.mul_vec(beta);
    Ok(())
}

/// One cyclic pass of proximal block coordinate descent for the multitask
/// model: each coefficient row is block soft-thresholded.
pub fn bcd_epoch(
    x: &DesignMatrix,
    targets: &Targets,
    lambda: f64,
    beta: &mut [f64],
    xbeta: &mut [f64],
    active: &ActiveSet,
) {
    let Targets::Multitask { tasks, values: y } = targets else {
        panic!("bcd_epoch requires multitask targets");
    };
    let q = *tasks;
    let norms = x.column_norms();
    let mut phi = vec![0.0; q];
    let mut delta = vec![0.0; q];
    for j in 0..x.p() {
        if !active.is_active(j) || norms[j] == 0.0 {
            continue;
        }
        let nrm2 = norms[j] * norms[j];
        let col = x.col(j);
        col.block_dot_residual(y, xbeta, q, &mut phi);
        let row = &mut beta[j * q..(j + 1) * q];
        for (ph, b) in phi.iter_mut().zip(row.iter()) {
            *ph = b + *ph / nrm2;
        }
        let phi_norm = sqrt(phi.iter().map(|v| v * v).sum());
        let threshold = lambda / nrm2;
        let scale = if phi_norm > threshold {
            1.0 - threshold / phi_norm
        } else {
            0.0
        };
        let mut moved = false;
        for t in 0..q {
            delta[t] = scale * phi[t] - row[t];
            if delta[t] != 0.0 {
                moved = true;
            }
            row[t] = scale * phi[t];
        }
        if moved {
            col.block_axpy(&delta, xbeta, q);
        }
    }
}

/// Gap Safe rule: any active feature whose scaled dual correlation slack
/// exceeds the gap radius is certified out of the solution and removed for
/// good (its coefficient is zeroed and `xbeta` adjusted). Returns how many
/// features were screened. Small negative gaps are clamped to zero; gaps
/// below -1e-10 are rejected.
pub fn gap_safe_screen(
    kind: ModelKind,
    x: &DesignMatrix,
    cert: &DualCertificate,
    gap: f64,
    lambda: f64,
    beta: &mut [f64],
    xbeta: &mut [f64],
    active: &mut ActiveSet,
    tasks: usize,
) -> Result<usize, SolveError> {
    if gap < -1e-10 {
        return Err(SolveError::NegativeGap(gap));
    }
    let radius = sqrt(2.0 * gap.max(0.0) / (kind.gamma() * lambda * lambda));
    let norms = x.column_norms();
    let mut buf = vec![0.0; tasks];
    let mut screened = 0;
    for j in 0..x.p() {
        if !active.is_active(j) {
            continue;
        }
        let col = x.col(j);
        let corr = if kind.is_multitask() {
            col.block_dot(&cert.theta, tasks, &mut buf);
            sqrt(buf.iter().map(|v| v * v).sum())
        } else {
            col.dot(&cert.theta).abs()
        };
        // zero-norm columns give +inf and are screened immediately
        let d_j = (1.0 - corr) / norms[j];
        if d_j > radius {
            let row = &mut beta[j * tasks..(j + 1) * tasks];
            if row.iter().any(|&v| v != 0.0) {
                if kind.is_multitask() {
                    for (d, b) in buf.iter_mut().zip(row.iter()) {
                        *d = -b;
                    }
                    col.block_axpy(&buf, xbeta, tasks);
                } else {
                    col.axpy(-row[0], xbeta);
                }
                row.fill(0.0);
            }
            active.screen_out(j);
            screened += 1;
        }
    }
    Ok(screened)
}

/// Sign pattern used to detect identification: per-coordinate signs for
/// single-task models, row-support indicators for multitask.
fn sign_pattern(beta: &[f64], tasks: usize) -> Vec<i8> {
    if tasks == 1 {
        beta.iter()
            .map(|&b| {
                if b > 0.0 {
                    1
                } else if b < 0.0 {
                    -1
                } else {
                    0
                }
            })
            .collect()
    } else {
        beta.chunks_exact(tasks)
            .map(|row| i8::from(row.iter().any(|&v| v != 0.0)))
            .collect()
    }
}

/// Residual vector pushed to the extrapolation buffer: y - X beta for the
/// quadratic models, the raw scores X beta for logistic regression.
fn buffer_capture(kind: ModelKind, grad: &[f64], xbeta: &[f64]) -> Vec<f64> {
    match kind {
        ModelKind::Quadratic | ModelKind::MultitaskQuadratic => {
            grad.iter().map(|g| -g).collect()
        }
        ModelKind::Logistic => xbeta.to_vec(),
    }
}

fn check_problem(
    kind: ModelKind,
    x: &DesignMatrix,
    targets: &Targets,
    lambda: f64,
    beta0: &[f64],
    algorithm: Algorithm,
) -> Result<(), SolveError> {
    if !kind.accepts(targets) {
        return Err(SolveError::Mismatch(String::from(
            "model kind does not match the targets variant",
        )));
    }
    if targets.n() != x.n() {
        return Err(SolveError::Mismatch(String::from(
            "targets and design matrix disagree on n",
        )));
    }
    if !(lambda > 0.0) {
        return Err(SolveError::InvalidParams(String::from("lambda must be > 0")));
    }
    if beta0.len() != x.p() * targets.tasks() {
        return Err(SolveError::Mismatch(String::from("beta0 has the wrong length")));
    }
    match (algorithm, kind.is_multitask()) {
        (Algorithm::Bcd, true) | (Algorithm::Cd, false) | (Algorithm::Pg, false) => Ok(()),
        _ => Err(SolveError::Mismatch(String::from(
            "algorithm does not apply to this model kind",
        ))),
    }
}

struct GapState {
    prev_cert: Option<DualCertificate>,
    prev_signs: Option<Vec<i8>>,
    last_used: Option<DualCertificate>,
    gap_history: Vec<GapRecord>,
    screened_history: Vec<(usize, usize)>,
}

/// One certificate evaluation: refresh the cached product, build the
/// rescaled and extrapolated dual points, select robustly against the
/// previous one, record the trace and screen if enabled. Returns the gap.
#[allow(clippy::too_many_arguments)]
fn gap_event(
    kind: ModelKind,
    x: &DesignMatrix,
    targets: &Targets,
    lambda: f64,
    params: &SolverParams,
    beta: &mut [f64],
    xbeta: &mut Vec<f64>,
    active: &mut ActiveSet,
    buffer: &mut ResidualBuffer,
    state: &mut GapState,
    epoch: usize,
) -> Result<f64, SolveError> {
    let tasks = targets.tasks();
    // rebuild the cached product so certificate math never drifts
    *xbeta = x.mul_flat(beta, tasks);
    let grad = grad_f(kind, targets, xbeta);
    let theta_res = rescale_dual(kind, targets, x, &grad, lambda);
    let accel = if params.extrapolation {
        let r = buffer_capture(kind, &grad, xbeta);
        buffer.push(&r).expect("capture dimension is fixed");
        let ex = buffer.extrapolate().expect("buffer just received a push");
        Some(accel_dual_point(kind, targets, x, &ex.r_acc, lambda))
    } else {
        None
    };

    let mut candidates = Vec::with_capacity(3);
    if let Some(prev) = state.prev_cert.take() {
        candidates.push(prev);
    }
    let dual_accel = accel.as_ref().map(|c| c.dual_value);
    if let Some(acc) = accel {
        candidates.push(acc);
    }
    let dual_rescaled = theta_res.dual_value;
    candidates.push(theta_res);
    let used = best_dual(candidates).expect("at least the rescaled point");

    let primal = primal_value(kind, targets, beta, xbeta, lambda);
    let gap = primal - used.dual_value;

    let signs = sign_pattern(beta, tasks);
    let sign_changed = state.prev_signs.as_ref().is_some_and(|s| s != &signs);
    state.prev_signs = Some(signs);
    state.gap_history.push(GapRecord {
        epoch,
        primal,
        dual_rescaled,
        dual_accel,
        dual_used: used.dual_value,
        sign_changed,
    });

    if params.screening && gap > params.tol {
        gap_safe_screen(kind, x, &used, gap, lambda, beta, xbeta, active, tasks)?;
        state.screened_history.push((epoch, active.remaining()));
    }
    let mut kept = used.clone();
    kept.provenance = Provenance::Previous;
    state.prev_cert = Some(kept);
    state.last_used = Some(used);
    Ok(gap)
}

/// Runs the chosen algorithm from `beta0`, evaluating certificates and the
/// duality gap every `freq` epochs (robust selection over the previous,
/// extrapolated and rescaled points), screening if enabled, and stopping
/// once the gap falls to `tol`. The entry point is certified too, but the
/// first stopping decision is taken after `freq` epochs.
pub fn solve(
    kind: ModelKind,
    x: &DesignMatrix,
    targets: &Targets,
    lambda: f64,
    beta0: &[f64],
    params: &SolverParams,
) -> Result<SolveReport, SolveError> {
    params.validate()?;
    check_problem(kind, x, targets, lambda, beta0, params.algorithm)?;

    let tasks = targets.tasks();
    let mut beta = beta0.to_vec();
    let mut xbeta = x.mul_flat(&beta, tasks);
    let mut active = ActiveSet::all(x.p());
    let mut buffer = ResidualBuffer::new(x.n() * tasks, params.k);
    let spectral = if params.algorithm == Algorithm::Pg {
        spectral_norm_sq(x, SPECTRAL_TOL, SPECTRAL_MAX_ITER)
    } else {
        0.0
    };

    let mut state = GapState {
        prev_cert: None,
        prev_signs: None,
        last_used: None,
        gap_history: Vec::new(),
        screened_history: Vec::new(),
    };
    let mut converged = false;
    let mut epoch = 0usize;

    // entry certificate and gap record; stopping checks only happen after
    // real epochs, so a subproblem can never return without doing work
    let mut final_gap = gap_event(
        kind, x, targets, lambda, params, &mut beta, &mut xbeta, &mut active, &mut buffer,
        &mut state, 0,
    )?;

    while epoch < params.max_epochs {
        match params.algorithm {
            Algorithm::Cd => cd_epoch(kind, x, targets, lambda, &mut beta, &mut xbeta, &active),
            Algorithm::Pg => pg_epoch(
                kind, x, targets, lambda, &mut beta, &mut xbeta, spectral, &active,
            )?,
            Algorithm::Bcd => bcd_epoch(x, targets, lambda, &mut beta, &mut xbeta, &active),
        }
        epoch += 1;
        if epoch % params.freq == 0 {
            final_gap = gap_event(
                kind, x, targets, lambda, params, &mut beta, &mut xbeta, &mut active,
                &mut buffer, &mut state, epoch,
            )?;
            if final_gap <= params.tol {
                converged = true;
                break;
            }
        }
    }

    let theta = state.last_used.expect("the entry gap evaluation always runs");
    let screened = (0..x.p()).filter(|&j| !active.is_active(j)).collect();
    Ok(SolveReport {
        beta,
        tasks,
        theta,
        gap_history: state.gap_history,
        screened_history: state.screened_history,
        screened,
        ws_history: Vec::new(),
        epochs_run: epoch,
        converged,
        final_gap,
    })
}
