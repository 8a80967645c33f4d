//! Stopping rules on the effective simplex, first-entry times along filter
//! trajectories, the cost functional and Monte Carlo policy evaluation.

use alloc::vec::Vec;

use super::grid::ValueFunction;
use super::StoppingProblem;
use crate::chain::{Distribution, Model};
use crate::error::{Error, Result};
use crate::filter::{FacePoint, FilterTrajectory};
use crate::rng::RandomSource;

/// Time resolution of the bisection locating a first entry.
pub const ENTRY_TIME_TOL: f64 = 1e-8;

/// Scan step used to bracket first entries along a flow segment.
pub const SCAN_STEP: f64 = 0.01;

/// Quadrature step for the running cost along a segment.
pub const COST_STEP: f64 = 0.01;

/// A stopping region given by `margin(nu) <= 0`. The margin should be
/// continuous along the flow so that entries can be bracketed.
pub trait Policy {
    fn margin(&self, nu: &FacePoint) -> f64;

    fn stops(&self, nu: &FacePoint) -> bool {
        self.margin(nu) <= 0.0
    }
}

/// Relaxed contact set `{nu : nu g <= v(nu) + eps}`.
#[derive(Debug, Clone)]
pub struct ContactRule {
    pub value: ValueFunction,
    pub stopping_cost: Vec<f64>,
    pub epsilon: f64,
}

impl Policy for ContactRule {
    fn margin(&self, nu: &FacePoint) -> f64 {
        nu.pair(&self.stopping_cost) - self.value.evaluate(nu) - self.epsilon
    }
}

/// `stopping_rule(v, eps)`.
pub fn stopping_rule(v: &ValueFunction, prob: &StoppingProblem, epsilon: f64) -> ContactRule {
    ContactRule {
        value: v.clone(),
        stopping_cost: prob.stopping_cost().to_vec(),
        epsilon,
    }
}

/// Stop as soon as the expected stopping cost `nu g` is at most `threshold`.
#[derive(Debug, Clone)]
pub struct ObstacleThreshold {
    pub stopping_cost: Vec<f64>,
    pub threshold: f64,
}

impl Policy for ObstacleThreshold {
    fn margin(&self, nu: &FacePoint) -> f64 {
        nu.pair(&self.stopping_cost) - self.threshold
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StopImmediately;

impl Policy for StopImmediately {
    fn margin(&self, _: &FacePoint) -> f64 {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NeverStop;

impl Policy for NeverStop {
    fn margin(&self, _: &FacePoint) -> f64 {
        1.0
    }
}

fn is_rest_point(model: &Model, nu: &FacePoint) -> bool {
    model.vector_field(nu).iter().all(|x| x.abs() < 1e-14)
}

/// First time in `[0, horizon)` at which the filter is in the stopping
/// region, or `None`.
pub fn first_entry<P: Policy + ?Sized>(model: &Model, traj: &FilterTrajectory, policy: &P) -> Option<f64> {
    for (k, seg) in traj.segments.iter().enumerate() {
        let start = seg.start_time;
        let end = traj.segment_end(k);
        if policy.stops(&seg.start) {
            return Some(start);
        }
        if is_rest_point(model, &seg.start) {
            continue;
        }
        let at = |s: f64| -> FacePoint {
            model
                .flow(s, &seg.start)
                .expect("face mass stays positive along the flow")
        };
        let len = end - start;
        let n = libm::ceil(len / SCAN_STEP).max(1.0) as usize;
        let mut lo = 0.0;
        for i in 1..=n {
            // The right end belongs to the next segment.
            let hi = if i == n {
                len * (1.0 - 1e-12)
            } else {
                len * i as f64 / n as f64
            };
            if policy.stops(&at(hi)) {
                let (mut a, mut b) = (lo, hi);
                while b - a > ENTRY_TIME_TOL {
                    let mid = 0.5 * (a + b);
                    if policy.stops(&at(mid)) {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                return Some(start + b);
            }
            lo = hi;
        }
    }
    None
}

/// `J = e^{-a tau} Pi_tau g + int_0^tau e^{-a s} Pi_s l ds` along a filter
/// trajectory. `tau = None` means never stopping, in which case the integral
/// runs to the trajectory horizon and the stopping term is dropped.
pub fn cost_along_filter(model: &Model, traj: &FilterTrajectory, tau: Option<f64>, prob: &StoppingProblem) -> Result<f64> {
    if let Some(t) = tau {
        if !(t >= 0.0) || t > traj.horizon * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter("stopping time must lie in [0, horizon]"));
        }
    }
    let alpha = prob.discount();
    let l = prob.running_cost();
    let end_time = tau.unwrap_or(traj.horizon).min(traj.horizon);
    let mut total = 0.0;
    for (k, seg) in traj.segments.iter().enumerate() {
        let a = seg.start_time;
        if a >= end_time {
            break;
        }
        let b = traj.segment_end(k).min(end_time);
        if is_rest_point(model, &seg.start) {
            total += seg.start.pair(l) * (libm::exp(-alpha * a) - libm::exp(-alpha * b)) / alpha;
            continue;
        }
        let face = model.face(seg.start.label());
        let l_face: Vec<f64> = face.iter().map(|&i| l[i]).collect();
        let n = (libm::ceil((b - a) / (2.0 * COST_STEP)).max(1.0) as usize) * 2;
        let h = (b - a) / n as f64;
        let prop = model.face_generator(seg.start.label()).scaled(h).expm();
        let mut u = seg.start.face_coords(model.observation());
        let mut acc = 0.0;
        for j in 0..=n {
            let mass: f64 = u.iter().sum();
            let val = libm::exp(-alpha * (a + j as f64 * h)) * crate::linalg::dot(&u, &l_face) / mass;
            acc += crate::quad::simpson_weight(j, n) * val;
            if j < n {
                u = prop.left_mul(&u);
            }
        }
        total += acc * h / 3.0;
    }
    if let Some(t) = tau {
        total += libm::exp(-alpha * t) * traj.evaluate(model, t).pair(prob.stopping_cost());
    }
    Ok(total)
}

/// Sample mean, standard error and the horizon truncation bound
/// `e^{-a H} (max|g| + max|l| / a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub truncation_bound: f64,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64], prob: &StoppingProblem, horizon: f64) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            stderr: libm::sqrt(var / n as f64),
            n,
            truncation_bound: prob.truncation_bound(horizon),
        }
    }
}

/// Cost of one replication: simulate the chain, filter its observations
/// and stop at the first entry into the policy region.
pub fn policy_cost_sample<P: Policy + ?Sized>(
    model: &Model,
    mu: &Distribution,
    policy: &P,
    prob: &StoppingProblem,
    horizon: f64,
    source: &RandomSource,
) -> Result<f64> {
    let path = model.sample_chain(mu, horizon, source);
    let traj = model.run_filter(&model.observe(&path), mu)?;
    let tau = first_entry(model, &traj, policy);
    cost_along_filter(model, &traj, tau, prob)
}

/// Serial Monte Carlo estimate of `J(mu, tau_policy)`; replication `r` uses
/// stream `r` of `source`'s seed.
pub fn evaluate_policy_mc<P: Policy + ?Sized>(
    model: &Model,
    mu: &Distribution,
    policy: &P,
    prob: &StoppingProblem,
    n_sims: usize,
    horizon: f64,
    source: &RandomSource,
) -> Result<McEstimate> {
    if n_sims == 0 {
        return Err(Error::InvalidParameter("need at least one simulation"));
    }
    let samples = (0..n_sims as u64)
        .map(|r| policy_cost_sample(model, mu, policy, prob, horizon, &source.substream(r)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(McEstimate::from_samples(&samples, prob, horizon))
}
