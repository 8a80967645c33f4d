//! Parallel Monte Carlo over replications. Replication `r` always draws
//! from stream `r` of the run seed, and results are reduced in replication
//! order, so estimates do not depend on the thread count.

use pdfilter_core::stopping::{policy_cost_sample, McEstimate, Policy, StoppingProblem};
use pdfilter_core::{Distribution, Model, RandomSource};
use rayon::prelude::*;

use crate::Result;

/// Runs `f(r)` for `r in 0..n` in parallel, keeping replication order.
pub fn replicate<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..n as u64).into_par_iter().map(f).collect()
}

/// Parallel counterpart of `pdfilter_core::stopping::evaluate_policy_mc`;
/// gives identical samples.
pub fn evaluate_policy<P: Policy + Sync + ?Sized>(
    model: &Model,
    mu: &Distribution,
    policy: &P,
    prob: &StoppingProblem,
    n_sims: usize,
    horizon: f64,
    seed: u64,
) -> Result<McEstimate> {
    if n_sims == 0 {
        return Err(crate::Error::Config("need at least one simulation".into()));
    }
    let source = RandomSource::new(seed, 0);
    let samples = replicate(n_sims, |r| {
        Ok(policy_cost_sample(model, mu, policy, prob, horizon, &source.substream(r))?)
    })?;
    Ok(McEstimate::from_samples(&samples, prob, horizon))
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
