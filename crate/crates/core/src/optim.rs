//! Convex solvers for the layer output matrices.
//!
//! Layer 0 uses ridge regression; every later layer solves least squares over
//! the Frobenius ball `‖O‖_F² ≤ ε` with ADMM:
//!
//! ```text
//! O ← argmin ‖T − O·Y‖_F² + (μ/2)‖O − Z + Λ‖_F²
//! Z ← Π_ε(O + Λ)
//! Λ ← Λ + O − Z
//! ```
//!
//! starting from `O = Z = Λ = 0` and running exactly `k_max` iterations.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmmConfig {
    pub mu: f64,
    pub k_max: usize,
    /// Squared radius of the Frobenius ball.
    pub epsilon: f64,
}

impl AdmmConfig {
    pub fn new(mu: f64, k_max: usize, epsilon: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
        }
        if k_max == 0 {
            return Err(Error::InvalidParameter("k_max must be at least 1".into()));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(AdmmConfig { mu, k_max, epsilon })
    }

    /// Radius `ε = 2·α·Q` for `Q` classes.
    pub fn for_classes(mu: f64, k_max: usize, alpha: f64, q: usize) -> Result<Self> {
        if alpha < 1.0 {
            return Err(Error::InvalidParameter(format!("alpha must be >= 1, got {alpha}")));
        }
        AdmmConfig::new(mu, k_max, 2.0 * alpha * q as f64)
    }
}

fn check_pair(y: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<()> {
    if y.ncols() != t.ncols() {
        return Err(Error::dim(format!(
            "features have {} samples, targets {}",
            y.ncols(),
            t.ncols()
        )));
    }
    if y.iter().chain(t.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite value in features or targets".into()));
    }
    Ok(())
}

/// `Y·Yᵀ` for samples stored as columns.
pub(crate) fn gram(y: &DMatrix<f64>) -> DMatrix<f64> {
    let yt = y.transpose();
    y * yt
}

/// Minimizer of `‖T − O·Y‖_F² + λ‖O‖_F²`, i.e. `O = T·Yᵀ·(Y·Yᵀ + λI)⁻¹`.
///
/// Uses a Cholesky factorization; if the system is singular (only possible
/// for `λ = 0`) it falls back to the SVD pseudo-inverse, which yields the
/// minimum-norm solution.
pub fn ridge_solve(y: &DMatrix<f64>, t: &DMatrix<f64>, lambda0: f64) -> Result<DMatrix<f64>> {
    check_pair(y, t)?;
    if !(lambda0 >= 0.0 && lambda0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda0 must be non-negative, got {lambda0}"
        )));
    }
    let n = y.nrows();
    let mut a = gram(y);
    for i in 0..n {
        a[(i, i)] += lambda0;
    }
    let yt_t = y * t.transpose(); // n × Q
    let solved = match a.clone().cholesky() {
        Some(chol) if lambda0 > 0.0 || well_conditioned(&chol) => chol.solve(&yt_t),
        _ => {
            let svd = a.svd(true, true);
            let tol = svd.singular_values.max() * n as f64 * f64::EPSILON;
            svd.solve(&yt_t, tol).map_err(|e| Error::Numeric(e.into()))?
        }
    };
    if solved.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("ridge solve produced non-finite values".into()));
    }
    Ok(solved.transpose())
}

// Cholesky of a nearly singular Gram matrix succeeds with tiny pivots; treat
// those as singular so the minimum-norm path is used.
fn well_conditioned(chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>) -> bool {
    let l = chol.l_dirty();
    let diag: Vec<f64> = (0..l.nrows()).map(|i| l[(i, i)]).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    min > max * 1e-7
}

/// Euclidean projection onto `{M : ‖M‖_F² ≤ ε}`, up to a relative slack of 1e-12.
pub fn project_frobenius_ball(m: &DMatrix<f64>, epsilon: f64) -> DMatrix<f64> {
    let mut out = m.clone();
    project_in_place(&mut out, epsilon);
    out
}

// Rescaling lands within a few ulps of the sphere; the slack keeps a second
// projection from moving the result again.
const BALL_SLACK: f64 = 1e-12;

fn project_in_place(m: &mut DMatrix<f64>, epsilon: f64) {
    let sq = m.norm_squared();
    if sq > epsilon * (1.0 + BALL_SLACK) {
        *m *= (epsilon / sq).sqrt();
    }
}

/// ADMM for `min ‖T − O·Y‖_F²` subject to `‖O‖_F² ≤ ε`.
///
/// The returned matrix is the final `O` iterate projected onto the ball, so
/// it is always feasible.
pub fn admm_constrained_ls(
    y: &DMatrix<f64>,
    t: &DMatrix<f64>,
    cfg: &AdmmConfig,
) -> Result<DMatrix<f64>> {
    check_pair(y, t)?;
    let cfg = AdmmConfig::new(cfg.mu, cfg.k_max, cfg.epsilon)?;
    let n = y.nrows();
    let q = t.nrows();

    // Work with transposes (n × Q) so each O-update is one SPD solve.
    let mut a = gram(y) * 2.0;
    for i in 0..n {
        a[(i, i)] += cfg.mu;
    }
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::Numeric("ADMM system matrix is not positive definite".into()))?;
    let rhs0 = (y * t.transpose()) * 2.0;

    let mut o = DMatrix::zeros(n, q);
    let mut z = DMatrix::zeros(n, q);
    let mut dual = DMatrix::zeros(n, q);
    for k in 0..cfg.k_max {
        let mut rhs = &z - &dual;
        rhs *= cfg.mu;
        rhs += &rhs0;
        chol.solve_mut(&mut rhs);
        o = rhs;
        z.copy_from(&o);
        z += &dual;
        project_in_place(&mut z, cfg.epsilon);
        dual += &o;
        dual -= &z;
        if o.iter().chain(dual.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("ADMM diverged at iteration {}", k + 1)));
        }
    }
    project_in_place(&mut o, cfg.epsilon);
    Ok(o.transpose())
}

/// `C = (1/J)·‖T − O·Y‖_F²`.
pub fn training_cost(o: &DMatrix<f64>, y: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<f64> {
    if o.ncols() != y.nrows() || o.nrows() != t.nrows() || y.ncols() != t.ncols() {
        return Err(Error::dim(format!(
            "cost of {}x{} output matrix on {}x{} features and {}x{} targets",
            o.nrows(),
            o.ncols(),
            y.nrows(),
            y.ncols(),
            t.nrows(),
            t.ncols()
        )));
    }
    let j = y.ncols();
    if j == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let residual = t - o * y;
    Ok(residual.norm_squared() / j as f64)
}
