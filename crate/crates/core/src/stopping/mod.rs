//! Discounted optimal stopping of the hidden chain under noise-free
//! observation, posed on the filter:
//!
//! ```text
//! minimize  J(mu, tau) = E[ e^{-a tau} Pi_tau g + int_0^tau e^{-a s} Pi_s l ds ]
//! ```
//!
//! The value on the effective simplex is computed by value iteration of a
//! single-jump operator on a barycentric grid ([`BellmanOperator`]); the
//! value for a general initial law mixes face values ([`value_general`]).

mod bellman;
mod grid;
mod policy;

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

pub use bellman::{BellmanOperator, Solution, TimeMesh, VariationalReport, CURVATURE_TOL, MAX_ITERATIONS, TAIL_TOL};
pub use grid::{FaceGrid, Stencil, ValueFunction};
pub use policy::{
    cost_along_filter, evaluate_policy_mc, first_entry, policy_cost_sample, stopping_rule, ContactRule, McEstimate,
    NeverStop, ObstacleThreshold, Policy, StopImmediately, COST_STEP, ENTRY_TIME_TOL, SCAN_STEP,
};

use crate::chain::{Distribution, Model, RateMatrix};
use crate::error::{Error, Result};

/// Stopping cost `g`, running cost `l` and discount rate `alpha > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingProblem {
    g: Vec<f64>,
    l: Vec<f64>,
    alpha: f64,
}

impl StoppingProblem {
    pub fn new(stopping_cost: Vec<f64>, running_cost: Vec<f64>, discount: f64) -> Result<Self> {
        if !(discount > 0.0) || !discount.is_finite() {
            return Err(Error::InvalidParameter("discount must be positive and finite"));
        }
        if stopping_cost.len() != running_cost.len() {
            return Err(Error::DimensionMismatch {
                expected: stopping_cost.len(),
                got: running_cost.len(),
            });
        }
        if stopping_cost.iter().chain(&running_cost).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("costs must be finite"));
        }
        Ok(Self {
            g: stopping_cost,
            l: running_cost,
            alpha: discount,
        })
    }

    pub fn stopping_cost(&self) -> &[f64] {
        &self.g
    }

    pub fn running_cost(&self) -> &[f64] {
        &self.l
    }

    pub fn discount(&self) -> f64 {
        self.alpha
    }

    pub fn n_states(&self) -> usize {
        self.g.len()
    }

    /// Bias bound from censoring at `horizon`: `e^{-a H} (max|g| + max|l| / a)`.
    pub fn truncation_bound(&self, horizon: f64) -> f64 {
        let gmax = self.g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let lmax = self.l.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        libm::exp(-self.alpha * horizon) * (gmax + lmax / self.alpha)
    }

    pub(crate) fn check_model(&self, model: &Model) -> Result<()> {
        if self.g.len() != model.n_states() {
            return Err(Error::DimensionMismatch {
                expected: model.n_states(),
                got: self.g.len(),
            });
        }
        Ok(())
    }
}

/// Builds the grid and operator with the default mesh and runs value
/// iteration from the obstacle.
pub fn solve_value(model: &Model, prob: &StoppingProblem, resolution: u32, tol: f64) -> Result<(BellmanOperator, Solution)> {
    let grid = Arc::new(FaceGrid::new(model.observation(), resolution)?);
    let op = BellmanOperator::new(model, prob, grid, TimeMesh::for_problem(model, prob))?;
    let sol = op.solve(tol)?;
    Ok((op, sol))
}

/// `V(mu) = sum_a mu(h^{-1}(a)) v(H_a[mu])`.
pub fn value_general(model: &Model, mu: &Distribution, v: &ValueFunction) -> Result<f64> {
    if mu.len() != model.n_states() {
        return Err(Error::DimensionMismatch {
            expected: model.n_states(),
            got: mu.len(),
        });
    }
    let mut total = 0.0;
    for label in model.observation().labels() {
        let mass: f64 = model.face(label).iter().map(|&i| mu.weights()[i]).sum();
        if mass > 0.0 {
            let point = model.restrict_normalize(mu.weights(), label)?.point;
            total += mass * v.evaluate(&point);
        }
    }
    Ok(total)
}

/// Stopping values of the fully observed chain,
/// `v_i = min(g_i, (l_i + sum_{j != i} lambda_ij v_j) / (a + q_i))`,
/// by value iteration from `g`.
pub fn classical_values(generator: &RateMatrix, prob: &StoppingProblem, tol: f64) -> Result<Vec<f64>> {
    let n = generator.n();
    if prob.n_states() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: prob.n_states(),
        });
    }
    let mut v = prob.stopping_cost().to_vec();
    let mut next = vec![0.0; n];
    for _ in 0..MAX_ITERATIONS {
        for i in 0..n {
            let inflow: f64 = (0..n).filter(|&j| j != i).map(|j| generator.rate(i, j) * v[j]).sum();
            let cont = (prob.running_cost()[i] + inflow) / (prob.discount() + generator.exit_rate(i));
            next[i] = prob.stopping_cost()[i].min(cont);
        }
        let change = crate::linalg::sup_dist(&v, &next);
        core::mem::swap(&mut v, &mut next);
        if change < tol {
            return Ok(v);
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        change: crate::linalg::sup_dist(&v, &next),
    })
}

#[cfg(test)]
mod tests;
