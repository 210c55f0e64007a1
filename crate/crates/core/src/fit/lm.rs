//! Levenberg–Marquardt with Marquardt's diagonal scaling.
//!
//! Every accepted step lowers the sum of squares, up to rounding. The damping is shrunk after
//! an accepted step and grown after a rejected one; the iteration schedule is
//! fixed, so identical inputs give identical outputs.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// A nonlinear least-squares problem: minimize Σ rᵢ(x)².
pub trait LeastSquares {
    fn residual_count(&self) -> usize;
    fn residuals(&self, params: &DVector<f64>, out: &mut DVector<f64>);
    /// ∂rᵢ/∂xⱼ, shaped residual_count × params.len().
    fn jacobian(&self, params: &DVector<f64>, out: &mut DMatrix<f64>);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmSettings {
    pub max_iterations: usize,
    /// Converged once ‖δ‖ ≤ tol·(‖x‖ + tol).
    pub step_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        Self { max_iterations: 500, step_tolerance: 1e-10, initial_damping: 1e-3 }
    }
}

const MAX_FLAT_ACCEPTS: usize = 3;

/// Eigenvalue ratio of the normalized information matrix below which a
/// direction counts as unidentifiable.
pub const FLAT_DIRECTION_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub params: DVector<f64>,
    /// Σ rᵢ² at `params`.
    pub sum_squares: f64,
    pub iterations: usize,
    pub converged: bool,
    /// (JᵀJ)⁻¹ scaled by the residual variance Σrᵢ²/(n − p) (or by 1 when
    /// there are no spare degrees of freedom).
    pub covariance: DMatrix<f64>,
    /// Smallest / largest eigenvalue of JᵀJ after unit-diagonal scaling.
    pub conditioning: f64,
}

impl LmOutcome {
    pub fn flat_direction(&self) -> bool {
        self.conditioning < FLAT_DIRECTION_THRESHOLD
    }

    pub fn std_error(&self, i: usize) -> f64 {
        self.covariance[(i, i)].max(0.0).sqrt()
    }
}

fn sum_squares(r: &DVector<f64>) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Runs Levenberg–Marquardt from `x0`.
///
/// Returns the best point reached even without convergence; check
/// [`LmOutcome::converged`].
pub fn levenberg_marquardt<P: LeastSquares>(problem: &P, x0: DVector<f64>, settings: &LmSettings) -> LmOutcome {
    let n = problem.residual_count();
    let p = x0.len();
    let mut x = x0;
    let mut r = DVector::zeros(n);
    let mut r_trial = DVector::zeros(n);
    let mut jac = DMatrix::zeros(n, p);
    problem.residuals(&x, &mut r);
    let mut cost = sum_squares(&r);
    let mut lambda = settings.initial_damping;
    let mut converged = cost == 0.0 || p == 0;
    let mut iterations = 0;
    let mut need_jacobian = true;
    let mut jtj = DMatrix::zeros(p, p);
    let mut grad = DVector::zeros(p);
    let mut flat_accepts = 0;

    while !converged && iterations < settings.max_iterations && cost.is_finite() {
        iterations += 1;
        if need_jacobian {
            problem.jacobian(&x, &mut jac);
            jtj = jac.tr_mul(&jac);
            grad = jac.tr_mul(&r);
            need_jacobian = false;
        }
        let mut a = jtj.clone();
        for i in 0..p {
            let d = jtj[(i, i)];
            a[(i, i)] += lambda * if d > 0.0 { d } else { 1.0 };
        }
        let Some(chol) = a.cholesky() else {
            lambda *= 10.0;
            continue;
        };
        let step = -chol.solve(&grad);
        let x_trial = &x + &step;
        problem.residuals(&x_trial, &mut r_trial);
        let trial_cost = sum_squares(&r_trial);
        let small_step = step.norm() <= settings.step_tolerance * (x.norm() + settings.step_tolerance);

        // A cost change at rounding level carries no information about
        // direction; accept it a few times so the final point is the
        // Gauss–Newton optimum rather than wherever the noise stopped us.
        let within_rounding = trial_cost.is_finite()
            && trial_cost <= cost * (1.0 + 64.0 * f64::EPSILON)
            && flat_accepts < MAX_FLAT_ACCEPTS;
        if within_rounding && trial_cost >= cost {
            flat_accepts += 1;
        }
        if trial_cost.is_finite() && (trial_cost < cost || within_rounding) {
            x = x_trial;
            core::mem::swap(&mut r, &mut r_trial);
            cost = trial_cost;
            lambda = (lambda / 3.0).max(1e-15);
            need_jacobian = true;
            if small_step || cost == 0.0 {
                converged = true;
            }
        } else {
            // No descent is possible at a resolution finer than the tolerance.
            if small_step {
                converged = true;
            }
            lambda *= 4.0;
            if lambda > 1e16 {
                converged = small_step;
                break;
            }
        }
    }

    problem.jacobian(&x, &mut jac);
    let jtj = jac.tr_mul(&jac);
    let (inverse, conditioning) = regularized_inverse(&jtj);
    let dof = n.saturating_sub(p);
    let variance = if dof > 0 { cost / dof as f64 } else { 1.0 };
    LmOutcome { params: x, sum_squares: cost, iterations, converged, covariance: inverse * variance, conditioning }
}

/// Inverse of a symmetric positive semidefinite matrix through its
/// eigendecomposition after unit-diagonal scaling. Eigenvalues below
/// `1e-15·λ_max` are floored there, which inflates (rather than drops) the
/// variance along flat directions.
pub fn regularized_inverse(m: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let p = m.nrows();
    if p == 0 {
        return (DMatrix::zeros(0, 0), 1.0);
    }
    let scale: Vec<f64> = (0..p)
        .map(|i| {
            let d = m[(i, i)];
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let normalized = DMatrix::from_fn(p, p, |i, j| m[(i, j)] * scale[i] * scale[j]);
    let eig = SymmetricEigen::new(normalized);
    let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let conditioning = if max > 0.0 { (min / max).max(0.0) } else { 0.0 };
    let floor = (max * 1e-15).max(f64::MIN_POSITIVE);
    let inv_values = eig.eigenvalues.map(|l| 1.0 / l.max(floor));
    let inv = &eig.eigenvectors * DMatrix::from_diagonal(&inv_values) * eig.eigenvectors.transpose();
    (DMatrix::from_fn(p, p, |i, j| inv[(i, j)] * scale[i] * scale[j]), conditioning)
}
