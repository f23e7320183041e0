//! Working-set outer loop: rank features by their dual score, solve a
//! growing sequence of restricted subproblems, and pass dual certificates
//! between scales.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::datafit::{
    dual_objective, grad_f, primal_value, rescale_dual, DualCertificate, ModelKind, Provenance,
};
use crate::dataset::Targets;
use crate::extrapolation::best_dual;
use crate::float::sqrt;
use crate::matrix::DesignMatrix;
use crate::proxnewton::{pn_solve, support_cd_extrapolation, PNParams};
use crate::solvers::{solve, Algorithm, GapRecord, SolveError, SolveReport, SolverParams, WsRecord};

/// Features selected for one subproblem, with the gap target handed to the
/// inner solver.
#[derive(Clone, Debug)]
pub struct WorkingSet {
    /// Ascending feature indices into the full problem.
    pub indices: Vec<usize>,
    pub epsilon_inner: f64,
}

impl WorkingSet {
    pub fn size(&self) -> usize {
        self.indices.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerSolver {
    /// Coordinate descent (block variant for multitask).
    Cd,
    /// Prox-Newton; logistic regression only.
    ProxNewton,
}

#[derive(Clone, Debug)]
pub struct CelerParams {
    /// First working-set size on a cold start.
    pub p1: usize,
    /// Subproblems are solved to this fraction of the global gap.
    pub rho: f64,
    pub max_ws_iters: usize,
    /// Absolute global gap tolerance.
    pub tol: f64,
    pub inner: InnerSolver,
    /// Extrapolation order.
    pub k: usize,
    /// Hand extrapolated dual points to stopping/selection. Off reproduces
    /// the plain working-set baseline.
    pub extrapolation: bool,
    /// The working set already plays the screening role, so inner solves
    /// screen only when asked.
    pub inner_screening: bool,
    pub max_inner_epochs: usize,
}

impl Default for CelerParams {
    fn default() -> Self {
        CelerParams {
            p1: 100,
            rho: 0.3,
            max_ws_iters: 50,
            tol: 1e-6,
            inner: InnerSolver::Cd,
            k: 5,
            extrapolation: true,
            inner_screening: false,
            max_inner_epochs: 50_000,
        }
    }
}

impl CelerParams {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(SolveError::InvalidParams(String::from("rho must lie in (0, 1)")));
        }
        if self.p1 < 1 {
            return Err(SolveError::InvalidParams(String::from("p1 must be >= 1")));
        }
        if !(self.tol > 0.0) {
            return Err(SolveError::InvalidParams(String::from("tol must be > 0")));
        }
        if self.k < 1 {
            return Err(SolveError::InvalidParams(String::from("k must be >= 1")));
        }
        Ok(())
    }
}

/// Number of nonzero coefficients (nonzero rows for multitask).
pub fn support_size(beta: &[f64], tasks: usize) -> usize {
    beta.chunks_exact(tasks)
        .filter(|row| row.iter().any(|&v| v != 0.0))
        .count()
}

/// Dual score of every feature: -1 on the current support (those must stay
/// in the working set), the scaled slack (1 - |x_j^T theta|) / ||x_j|| off
/// it, +inf for zero-norm columns so they are never selected.
pub fn feature_scores(
    kind: ModelKind,
    x: &DesignMatrix,
    cert: &DualCertificate,
    beta: &[f64],
    tasks: usize,
) -> Vec<f64> {
    let norms = x.column_norms();
    let mut buf = vec![0.0; tasks];
    (0..x.p())
        .map(|j| {
            let row = &beta[j * tasks..(j + 1) * tasks];
            if row.iter().any(|&v| v != 0.0) {
                return -1.0;
            }
            if norms[j] == 0.0 {
                return f64::INFINITY;
            }
            let corr = if kind.is_multitask() {
                let col = x.col(j);
                col.block_dot(&cert.theta, tasks, &mut buf);
                sqrt(buf.iter().map(|v| v * v).sum())
            } else {
                x.col(j).dot(&cert.theta).abs()
            };
            (1.0 - corr) / norms[j]
        })
        .collect()
}

/// Picks the p^(t) smallest scores (ties to the lowest index): the first
/// working set uses `first_size`, later ones grow as twice the current
/// support, capped at p. `min_size` floors the size; the outer loop raises
/// it when an iteration made no progress, so a stalled run escalates to the
/// full problem instead of rebuilding the same set forever. The inner
/// tolerance is the rho fraction of the global gap.
pub fn create_working_set(
    scores: &[f64],
    support: usize,
    first_size: usize,
    global_gap: f64,
    t: usize,
    rho: f64,
    min_size: usize,
) -> WorkingSet {
    let p = scores.len();
    let size = if t <= 1 || support == 0 {
        first_size.clamp(1, p)
    } else {
        (2 * support).min(p)
    }
    .max(min_size.min(p));

    let mut order: Vec<usize> = (0..p).collect();
    if size < p {
        // partial selection; ties at the cutoff resolved by smaller index
        order.select_nth_unstable_by(size - 1, |&a, &b| {
            scores[a]
                .partial_cmp(&scores[b])
                .expect("scores are never NaN")
                .then(a.cmp(&b))
        });
        order.truncate(size);
    }
    order.sort_unstable();
    WorkingSet {
        indices: order,
        epsilon_inner: rho * global_gap,
    }
}

/// Restriction of (row-major) coefficients to the selected features.
fn restrict_rows(beta: &[f64], indices: &[usize], tasks: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(indices.len() * tasks);
    for &j in indices {
        out.extend_from_slice(&beta[j * tasks..(j + 1) * tasks]);
    }
    out
}

/// Re-rescale an inner certificate against the full design so it is
/// globally feasible again.
fn lift_inner_cert(
    kind: ModelKind,
    targets: &Targets,
    x: &DesignMatrix,
    mut cert: DualCertificate,
    lambda: f64,
) -> DualCertificate {
    let norm = if kind.is_multitask() {
        x.max_rownorm_xt(&cert.theta, targets.tasks())
    } else {
        x.max_abs_xt(&cert.theta)
    };
    let denom = norm.max(1.0);
    if denom > 1.0 {
        for th in &mut cert.theta {
            *th /= denom;
        }
    }
    cert.dual_value = dual_objective(kind, targets, &cert.theta, lambda);
    cert.provenance = Provenance::Inner;
    cert
}

/// Working-set solver: alternates global gap certification with subproblem
/// solves on the highest-priority features, warm-starting each subproblem
/// from the embedded previous solution.
pub fn celer_solve(
    kind: ModelKind,
    x: &DesignMatrix,
    targets: &Targets,
    lambda: f64,
    beta0: &[f64],
    params: &CelerParams,
) -> Result<SolveReport, SolveError> {
    params.validate()?;
    if params.inner == InnerSolver::ProxNewton && kind != ModelKind::Logistic {
        return Err(SolveError::Mismatch(String::from(
            "the prox-Newton inner solver supports only logistic regression",
        )));
    }
    let tasks = targets.tasks();
    if !kind.accepts(targets) || beta0.len() != x.p() * tasks {
        return Err(SolveError::Mismatch(String::from(
            "model kind, targets and beta0 must be consistent",
        )));
    }
    if !(lambda > 0.0) {
        return Err(SolveError::InvalidParams(String::from("lambda must be > 0")));
    }

    let mut beta = beta0.to_vec();
    let mut xbeta = x.mul_flat(&beta, tasks);
    // warm start: begin from the support of the supplied point
    let warm_support = support_size(&beta, tasks);
    let first_size = if warm_support > 0 { warm_support } else { params.p1 };

    let mut prev_cert: Option<DualCertificate> = None;
    let mut inner_cert: Option<DualCertificate> = None;
    let mut last_used: Option<DualCertificate> = None;
    let mut gap_history: Vec<GapRecord> = Vec::new();
    let mut ws_history = Vec::new();
    let mut total_epochs = 0usize;
    let mut converged = false;
    let mut final_gap = f64::INFINITY;
    let mut prev_gap = f64::INFINITY;
    let mut prev_ws_size = 0usize;

    for t in 1..=params.max_ws_iters {
        if params.inner == InnerSolver::ProxNewton && params.extrapolation {
            // prox-Newton steps do not produce extrapolatable iterates, so
            // run K support-restricted CD passes to manufacture them
            let cert = support_cd_extrapolation(kind, x, targets, lambda, &mut beta, &mut xbeta, params.k);
            total_epochs += params.k;
            let merged = match inner_cert.take() {
                Some(old) => best_dual(vec![old, cert]).expect("two candidates"),
                None => cert,
            };
            inner_cert = Some(merged);
        }

        xbeta = x.mul_flat(&beta, tasks);
        let grad = grad_f(kind, targets, &xbeta);
        let theta_res = rescale_dual(kind, targets, x, &grad, lambda);
        let dual_rescaled = theta_res.dual_value;

        let mut candidates = Vec::with_capacity(3);
        if let Some(prev) = prev_cert.take() {
            candidates.push(prev);
        }
        let dual_accel = inner_cert.as_ref().map(|c| c.dual_value);
        if let Some(inner) = inner_cert.clone() {
            candidates.push(inner);
        }
        candidates.push(theta_res);
        let used = best_dual(candidates).expect("at least the rescaled point");

        let primal = primal_value(kind, targets, &beta, &xbeta, lambda);
        let gap = primal - used.dual_value;
        final_gap = gap;
        gap_history.push(GapRecord {
            epoch: total_epochs,
            primal,
            dual_rescaled,
            dual_accel,
            dual_used: used.dual_value,
            sign_changed: false,
        });

        if gap <= params.tol {
            converged = true;
            last_used = Some(used);
            break;
        }

        // an iteration that failed to shrink the gap means every certificate
        // source stagnated; force the next working set to grow anyway
        let stalled = gap > prev_gap * (1.0 - 1e-10);
        let min_size = if stalled { 2 * prev_ws_size } else { 0 };
        prev_gap = gap;

        let scores = feature_scores(kind, x, &used, &beta, tasks);
        let ws = create_working_set(
            &scores,
            support_size(&beta, tasks),
            first_size,
            gap,
            t,
            params.rho,
            min_size,
        );
        prev_ws_size = ws.size();

        let sub_x = x.select_columns(&ws.indices);
        let sub_beta0 = restrict_rows(&beta, &ws.indices, tasks);
        let (sub_beta, sub_cert, inner_epochs) = match params.inner {
            InnerSolver::Cd => {
                let sub_params = SolverParams {
                    algorithm: if kind.is_multitask() {
                        Algorithm::Bcd
                    } else {
                        Algorithm::Cd
                    },
                    k: params.k,
                    freq: 10,
                    max_epochs: params.max_inner_epochs,
                    tol: ws.epsilon_inner,
                    screening: params.inner_screening,
                    extrapolation: params.extrapolation,
                };
                let rep = solve(kind, &sub_x, targets, lambda, &sub_beta0, &sub_params)?;
                (rep.beta, rep.theta, rep.epochs_run)
            }
            InnerSolver::ProxNewton => {
                let pn_params = PNParams {
                    k: params.k,
                    tol: ws.epsilon_inner,
                    ..PNParams::default()
                };
                let res = pn_solve(&sub_x, targets, lambda, &sub_beta0, &pn_params)?;
                (res.beta, res.cert, res.cd_passes.max(res.iterations))
            }
        };
        total_epochs += inner_epochs;
        ws_history.push(WsRecord {
            iteration: t,
            size: ws.size(),
            inner_epochs,
        });

        // embed the subproblem solution back into the full vector
        beta.fill(0.0);
        for (slot, &j) in ws.indices.iter().enumerate() {
            beta[j * tasks..(j + 1) * tasks]
                .copy_from_slice(&sub_beta[slot * tasks..(slot + 1) * tasks]);
        }
        xbeta = x.mul_flat(&beta, tasks);

        inner_cert = Some(lift_inner_cert(kind, targets, x, sub_cert, lambda));
        let mut kept = used;
        kept.provenance = Provenance::Previous;
        last_used = Some(kept.clone());
        prev_cert = Some(kept);
    }

    let theta = last_used.expect("the first outer iteration always evaluates a certificate");
    Ok(SolveReport {
        beta,
        tasks,
        theta,
        gap_history,
        screened_history: Vec::new(),
        screened: Vec::new(),
        ws_history,
        epochs_run: total_epochs,
        converged,
        final_gap,
    })
}
