//! Per-model data-fitting terms: primal and dual objectives, gradients,
//! curvature, residual rescaling and the critical regularization level.
//!
//! Conventions: the primal is sum_i f_i(x_i^T beta) + lambda * ||beta||_1
//! (Frobenius fit with a row-wise l2,1 penalty for multitask), the dual is
//! D(theta) = -sum_i f_i*(-lambda theta_i) over the feasible polytope
//! {theta : ||X^T theta||_inf <= 1}.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::Targets;
use crate::float::{exp, ln, log1p, sqrt, LN_2};
use crate::matrix::DesignMatrix;

/// Which generalized linear model is being fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// Lasso: f_i(t) = (y_i - t)^2 / 2.
    Quadratic,
    /// Sparse logistic regression: f_i(t) = log(1 + exp(-y_i t)).
    Logistic,
    /// Multitask Lasso: Frobenius fit with row-wise l2,1 penalty.
    MultitaskQuadratic,
}

impl ModelKind {
    /// Inverse gradient-Lipschitz constant of the f_i (f_i'' <= 1/gamma).
    pub fn gamma(self) -> f64 {
        match self {
            ModelKind::Quadratic | ModelKind::MultitaskQuadratic => 1.0,
            ModelKind::Logistic => 4.0,
        }
    }

    pub fn is_multitask(self) -> bool {
        self == ModelKind::MultitaskQuadratic
    }

    /// Checks that the targets variant matches this model.
    pub fn accepts(self, targets: &Targets) -> bool {
        matches!(
            (self, targets),
            (ModelKind::Quadratic, Targets::Regression(_))
                | (ModelKind::Logistic, Targets::Classification(_))
                | (ModelKind::MultitaskQuadratic, Targets::Multitask { .. })
        )
    }
}

/// How a dual feasible point was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    Rescaled,
    Extrapolated,
    /// Returned by a subproblem solver and rescaled against the full matrix.
    Inner,
    /// Carried over from an earlier gap evaluation.
    Previous,
}

/// A dual feasible point theta (flattened n x q for multitask) with its
/// objective value. Instances are only built by constructors that rescale
/// into the feasible set, so feasibility holds up to roundoff.
#[derive(Clone, Debug)]
pub struct DualCertificate {
    pub theta: Vec<f64>,
    pub dual_value: f64,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DatafitError {
    /// Model kind and targets variant disagree, or vector lengths are off.
    Mismatch(String),
    /// The operation is undefined for this model kind.
    Unsupported(String),
    /// A raw dual point failed the feasibility check.
    Infeasible { excess: f64 },
}

impl core::fmt::Display for DatafitError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DatafitError::Mismatch(m) => write!(f, "mismatch: {m}"),
            DatafitError::Unsupported(m) => write!(f, "unsupported: {m}"),
            DatafitError::Infeasible { excess } => {
                write!(f, "dual point infeasible: ||X^T theta|| exceeds 1 by {excess:e}")
            }
        }
    }
}

impl core::error::Error for DatafitError {}

/// Primal iterate with its cached product X * beta (both flattened for
/// multitask).
#[derive(Clone, Debug)]
pub struct PrimalPoint {
    pub beta: Vec<f64>,
    pub xbeta: Vec<f64>,
}

impl PrimalPoint {
    pub fn new(x: &DesignMatrix, beta: Vec<f64>, tasks: usize) -> Self {
        let xbeta = x.mul_flat(&beta, tasks);
        PrimalPoint { beta, xbeta }
    }

    /// Recomputes the cached product from scratch.
    pub fn refresh(&mut self, x: &DesignMatrix, tasks: usize) {
        self.xbeta = x.mul_flat(&self.beta, tasks);
    }
}

/// Diagonal of the data-fit Hessian at the current scores, entries in
/// [0, 1/gamma].
#[derive(Clone, Debug)]
pub struct CurvatureDiag(pub Vec<f64>);

/// Numerically safe sigmoid.
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// log(1 + exp(x)) without overflow.
fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + log1p(exp(-x))
    } else {
        log1p(exp(x))
    }
}

/// Penalty part: lambda * l1 norm, or lambda * sum of row norms.
pub fn penalty(kind: ModelKind, beta: &[f64], tasks: usize, lambda: f64) -> f64 {
    if kind.is_multitask() {
        let mut s = 0.0;
        for row in beta.chunks_exact(tasks) {
            s += sqrt(row.iter().map(|x| x * x).sum());
        }
        lambda * s
    } else {
        lambda * beta.iter().map(|x| x.abs()).sum::<f64>()
    }
}

/// Data-fit term F(X beta).
pub fn data_fit(kind: ModelKind, targets: &Targets, xbeta: &[f64]) -> f64 {
    match (kind, targets) {
        (ModelKind::Quadratic, Targets::Regression(y)) => {
            0.5 * y.iter().zip(xbeta).map(|(yi, t)| (yi - t) * (yi - t)).sum::<f64>()
        }
        (ModelKind::Logistic, Targets::Classification(y)) => y
            .iter()
            .zip(xbeta)
            .map(|(yi, t)| log1p_exp(-yi * t))
            .sum(),
        (ModelKind::MultitaskQuadratic, Targets::Multitask { values, .. }) => {
            0.5 * values.iter().zip(xbeta).map(|(yi, t)| (yi - t) * (yi - t)).sum::<f64>()
        }
        _ => panic!("model kind does not match targets"),
    }
}

/// F(0), the primal objective of the zero vector; used to scale stopping
/// tolerances.
pub fn primal_at_zero(kind: ModelKind, targets: &Targets) -> f64 {
    match (kind, targets) {
        (ModelKind::Logistic, Targets::Classification(y)) => y.len() as f64 * LN_2,
        (ModelKind::Quadratic, Targets::Regression(y)) => {
            0.5 * y.iter().map(|v| v * v).sum::<f64>()
        }
        (ModelKind::MultitaskQuadratic, Targets::Multitask { values, .. }) => {
            0.5 * values.iter().map(|v| v * v).sum::<f64>()
        }
        _ => panic!("model kind does not match targets"),
    }
}

/// Full primal objective P(beta).
pub fn primal_value(
    kind: ModelKind,
    targets: &Targets,
    beta: &[f64],
    xbeta: &[f64],
    lambda: f64,
) -> f64 {
    data_fit(kind, targets, xbeta) + penalty(kind, beta, targets.tasks(), lambda)
}

/// Gradient of F at the scores: component i is f_i'((X beta)_i) (entry-wise
/// over the flattened matrix for multitask).
pub fn grad_f(kind: ModelKind, targets: &Targets, xbeta: &[f64]) -> Vec<f64> {
    match (kind, targets) {
        (ModelKind::Quadratic, Targets::Regression(y)) => {
            xbeta.iter().zip(y).map(|(t, yi)| t - yi).collect()
        }
        (ModelKind::Logistic, Targets::Classification(y)) => xbeta
            .iter()
            .zip(y)
            .map(|(t, yi)| -yi * sigmoid(-yi * t))
            .collect(),
        (ModelKind::MultitaskQuadratic, Targets::Multitask { values, .. }) => {
            xbeta.iter().zip(values).map(|(t, yi)| t - yi).collect()
        }
        _ => panic!("model kind does not match targets"),
    }
}

/// Dual objective D(theta) = -sum_i f_i*(-lambda theta_i). For the logistic
/// model the conjugate has bounded domain; points outside it yield -inf (the
/// certificate constructors always rescale into the domain first).
pub fn dual_objective(kind: ModelKind, targets: &Targets, theta: &[f64], lambda: f64) -> f64 {
    match (kind, targets) {
        (ModelKind::Quadratic, Targets::Regression(y)) => {
            let half_y_sq: f64 = 0.5 * y.iter().map(|v| v * v).sum::<f64>();
            let dist: f64 = y
                .iter()
                .zip(theta)
                .map(|(yi, th)| {
                    let d = yi / lambda - th;
                    d * d
                })
                .sum();
            half_y_sq - 0.5 * lambda * lambda * dist
        }
        (ModelKind::Logistic, Targets::Classification(y)) => {
            // -f_i*(-lambda theta_i) is the binary entropy of u = lambda y_i theta_i
            let mut total = 0.0;
            for (yi, th) in y.iter().zip(theta) {
                let u = lambda * yi * th;
                if !(0.0..=1.0).contains(&u) {
                    return f64::NEG_INFINITY;
                }
                total += entropy(u);
            }
            total
        }
        (ModelKind::MultitaskQuadratic, Targets::Multitask { values, .. }) => {
            let half_y_sq: f64 = 0.5 * values.iter().map(|v| v * v).sum::<f64>();
            let dist: f64 = values
                .iter()
                .zip(theta)
                .map(|(yi, th)| {
                    let d = yi / lambda - th;
                    d * d
                })
                .sum();
            half_y_sq - 0.5 * lambda * lambda * dist
        }
        _ => panic!("model kind does not match targets"),
    }
}

/// -u ln u - (1-u) ln(1-u) with the 0 log 0 = 0 convention.
fn entropy(u: f64) -> f64 {
    let mut h = 0.0;
    if u > 0.0 {
        h -= u * ln(u);
    }
    if u < 1.0 {
        h -= (1.0 - u) * ln(1.0 - u);
    }
    h
}

/// P(beta) - D(theta). Weak duality keeps this nonnegative up to roundoff
/// (never below -1e-10 for certificates built by this crate).
pub fn duality_gap(
    kind: ModelKind,
    targets: &Targets,
    pt: &PrimalPoint,
    cert: &DualCertificate,
    lambda: f64,
) -> f64 {
    debug_assert!(
        (cert.dual_value - dual_objective(kind, targets, &cert.theta, lambda)).abs()
            <= 1e-12 * (1.0 + cert.dual_value.abs())
    );
    primal_value(kind, targets, &pt.beta, &pt.xbeta, lambda) - cert.dual_value
}

/// Scale factor that pushes -grad into the dual feasible set.
fn rescale_denominator(kind: ModelKind, x: &DesignMatrix, grad: &[f64], tasks: usize, lambda: f64) -> f64 {
    let dual_norm = if kind.is_multitask() {
        x.max_rownorm_xt(grad, tasks)
    } else {
        x.max_abs_xt(grad)
    };
    lambda.max(dual_norm)
}

/// Residuals rescaling: theta = -grad / max(lambda, ||X^T grad||_inf),
/// feasible by construction.
pub fn rescale_dual(
    kind: ModelKind,
    targets: &Targets,
    x: &DesignMatrix,
    grad: &[f64],
    lambda: f64,
) -> DualCertificate {
    let denom = rescale_denominator(kind, x, grad, targets.tasks(), lambda);
    let theta: Vec<f64> = grad.iter().map(|g| -g / denom).collect();
    let dual_value = dual_objective(kind, targets, &theta, lambda);
    DualCertificate {
        theta,
        dual_value,
        provenance: Provenance::Rescaled,
    }
}

impl DualCertificate {
    /// Validates a raw dual point (feasibility within 1e-12) and computes
    /// its objective value.
    pub fn from_theta(
        kind: ModelKind,
        targets: &Targets,
        x: &DesignMatrix,
        theta: Vec<f64>,
        lambda: f64,
        provenance: Provenance,
    ) -> Result<Self, DatafitError> {
        let norm = if kind.is_multitask() {
            x.max_rownorm_xt(&theta, targets.tasks())
        } else {
            x.max_abs_xt(&theta)
        };
        if norm > 1.0 + 1e-12 {
            return Err(DatafitError::Infeasible { excess: norm - 1.0 });
        }
        let dual_value = dual_objective(kind, targets, &theta, lambda);
        Ok(DualCertificate {
            theta,
            dual_value,
            provenance,
        })
    }

    /// ||X^T theta||_inf - 1 (row-norm version for multitask); <= 0 means
    /// feasible. Exposed for verification suites.
    pub fn feasibility_excess(&self, kind: ModelKind, x: &DesignMatrix, tasks: usize) -> f64 {
        let norm = if kind.is_multitask() {
            x.max_rownorm_xt(&self.theta, tasks)
        } else {
            x.max_abs_xt(&self.theta)
        };
        norm - 1.0
    }
}

/// Smallest regularization level with an all-zero solution.
pub fn lambda_max(kind: ModelKind, x: &DesignMatrix, targets: &Targets) -> f64 {
    match (kind, targets) {
        (ModelKind::Quadratic, Targets::Regression(y)) => x.max_abs_xt(y),
        (ModelKind::Logistic, Targets::Classification(y)) => x.max_abs_xt(y) / 2.0,
        (ModelKind::MultitaskQuadratic, Targets::Multitask { tasks, values }) => {
            x.max_rownorm_xt(values, *tasks)
        }
        _ => panic!("model kind does not match targets"),
    }
}

/// Diagonal second derivatives f_i''((X beta)_i). All ones for the
/// quadratic fit; undefined for multitask.
pub fn hessian_diag(
    kind: ModelKind,
    targets: &Targets,
    xbeta: &[f64],
) -> Result<CurvatureDiag, DatafitError> {
    match (kind, targets) {
        (ModelKind::Quadratic, Targets::Regression(_)) => {
            Ok(CurvatureDiag(vec![1.0; xbeta.len()]))
        }
        (ModelKind::Logistic, Targets::Classification(y)) => Ok(CurvatureDiag(
            xbeta
                .iter()
                .zip(y)
                .map(|(t, yi)| {
                    let s = sigmoid(yi * t);
                    s * (1.0 - s)
                })
                .collect(),
        )),
        (ModelKind::MultitaskQuadratic, _) => Err(DatafitError::Unsupported(
            "curvature diagonal is not defined for the multitask model".to_string(),
        )),
        _ => Err(DatafitError::Mismatch(
            "model kind does not match targets".to_string(),
        )),
    }
}
