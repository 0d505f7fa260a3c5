//! Levenberg-Marquardt with Marquardt diagonal scaling and a forward
//! difference Jacobian.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub initial_lambda: f64,
    /// Multiplier applied to lambda on a rejected step (and divisor on an
    /// accepted one).
    pub lambda_factor: f64,
    pub fd_relative_step: f64,
    pub fd_absolute_step: f64,
    pub step_tolerance: f64,
    pub cost_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            initial_lambda: 1e-3,
            lambda_factor: 10.0,
            fd_relative_step: 1e-6,
            fd_absolute_step: 1e-10,
            step_tolerance: 1e-10,
            cost_tolerance: 1e-12,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ZeroResidual,
    ZeroGradient,
    StepTolerance,
    CostTolerance,
    /// No damped step reduced the cost even at the largest admissible lambda.
    Stalled,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmReport {
    pub theta: Vec<f64>,
    pub residual_norm: f64,
    /// Accepted steps.
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub termination: Termination,
}

const MAX_LAMBDA: f64 = 1e16;

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn all_finite(r: &[f64]) -> bool {
    r.iter().all(|v| v.is_finite())
}

/// Forward-difference Jacobian of `residual` at `theta`, given `r0 =
/// residual(theta)`. Column `j` uses step `max(rel |theta_j|, abs)`; a
/// column whose perturbed residual is not finite is returned as zeros.
pub fn forward_jacobian<F>(
    residual: &mut F,
    theta: &[f64],
    r0: &[f64],
    relative_step: f64,
    absolute_step: f64,
) -> DMatrix<f64>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let m = r0.len();
    let p = theta.len();
    let mut jac = DMatrix::zeros(m, p);
    let mut probe = theta.to_vec();
    for j in 0..p {
        let h = (relative_step * theta[j].abs()).max(absolute_step);
        probe[j] = theta[j] + h;
        let step = probe[j] - theta[j];
        let r = residual(&probe);
        probe[j] = theta[j];
        if r.len() != m || !all_finite(&r) {
            continue;
        }
        for i in 0..m {
            jac[(i, j)] = (r[i] - r0[i]) / step;
        }
    }
    jac
}

fn solve_damped(jtj: &DMatrix<f64>, g: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let p = jtj.nrows();
    let dmax = (0..p).map(|i| jtj[(i, i)]).fold(0.0, f64::max);
    let floor = dmax * 1e-15 + f64::MIN_POSITIVE;
    let mut a = jtj.clone();
    for i in 0..p {
        a[(i, i)] += lambda * jtj[(i, i)].max(floor);
    }
    if let Some(ch) = a.clone().cholesky() {
        return Some(ch.solve(g));
    }
    a.lu().solve(g)
}

/// Minimizes `|residual(theta)|^2` from `theta0`.
///
/// Steps are `(J'J + lambda diag(J'J))^-1 J' r`; lambda is divided by
/// [`LmOptions::lambda_factor`] after an accepted step and multiplied by it
/// after a rejected one. Non-finite trial residuals count as rejections.
pub fn levenberg_marquardt<F>(mut residual: F, theta0: &[f64], opts: &LmOptions) -> Result<LmReport>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    if theta0.is_empty() {
        return Err(invalid("parameter vector is empty"));
    }
    let mut theta = theta0.to_vec();
    let mut r = residual(&theta);
    let mut evaluations = 1;
    if r.is_empty() || !all_finite(&r) {
        return Err(invalid("residual is not finite at the initial parameters"));
    }
    let mut cost = sum_sq(&r);
    let mut lambda = opts.initial_lambda;
    let mut iterations = 0;

    let finish = |theta: Vec<f64>, cost: f64, iterations, evaluations, termination| LmReport {
        theta,
        residual_norm: cost.sqrt(),
        iterations,
        evaluations,
        converged: termination != Termination::MaxIterations,
        termination,
    };

    if cost == 0.0 {
        return Ok(finish(
            theta,
            cost,
            0,
            evaluations,
            Termination::ZeroResidual,
        ));
    }

    while iterations < opts.max_iterations {
        let jac = forward_jacobian(
            &mut residual,
            &theta,
            &r,
            opts.fd_relative_step,
            opts.fd_absolute_step,
        );
        evaluations += theta.len();
        let rv = DVector::from_column_slice(&r);
        let g = jac.transpose() * &rv;
        if g.iter().all(|v| *v == 0.0) {
            return Ok(finish(
                theta,
                cost,
                iterations,
                evaluations,
                Termination::ZeroGradient,
            ));
        }
        let jtj = jac.transpose() * &jac;

        let accepted = loop {
            if lambda > MAX_LAMBDA {
                break None;
            }
            let Some(delta) = solve_damped(&jtj, &g, lambda) else {
                lambda *= opts.lambda_factor;
                continue;
            };
            let trial: Vec<f64> = theta.iter().zip(delta.iter()).map(|(t, d)| t - d).collect();
            if !all_finite(&trial) {
                lambda *= opts.lambda_factor;
                continue;
            }
            let r_trial = residual(&trial);
            evaluations += 1;
            let c_trial = if r_trial.len() == r.len() && all_finite(&r_trial) {
                sum_sq(&r_trial)
            } else {
                f64::INFINITY
            };
            if c_trial < cost {
                lambda /= opts.lambda_factor;
                break Some((trial, r_trial, c_trial, delta));
            }
            lambda *= opts.lambda_factor;
        };

        let Some((trial, r_trial, c_trial, delta)) = accepted else {
            return Ok(finish(
                theta,
                cost,
                iterations,
                evaluations,
                Termination::Stalled,
            ));
        };
        iterations += 1;
        let step_norm = delta.norm();
        let theta_norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
        let decrease = (cost - c_trial) / cost;
        theta = trial;
        r = r_trial;
        cost = c_trial;

        if cost == 0.0 {
            return Ok(finish(
                theta,
                cost,
                iterations,
                evaluations,
                Termination::ZeroResidual,
            ));
        }
        if step_norm < opts.step_tolerance * (theta_norm + opts.step_tolerance) {
            return Ok(finish(
                theta,
                cost,
                iterations,
                evaluations,
                Termination::StepTolerance,
            ));
        }
        if decrease < opts.cost_tolerance {
            return Ok(finish(
                theta,
                cost,
                iterations,
                evaluations,
                Termination::CostTolerance,
            ));
        }
    }
    Ok(finish(
        theta,
        cost,
        iterations,
        evaluations,
        Termination::MaxIterations,
    ))
}
