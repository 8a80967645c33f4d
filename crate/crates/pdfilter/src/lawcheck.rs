//! First-jump law of the filter three ways: from chain paths run through
//! the filter, from direct PDP simulation, and from the closed-form
//! survival and jump-time density.

use pdfilter_core::{FacePoint, Label, Model, RandomSource};
use serde::Serialize;

use crate::montecarlo::replicate;
use crate::Result;

/// Streams at or above this offset are used for direct PDP runs.
pub const PDP_STREAM_OFFSET: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LawCheckConfig {
    pub n_sims: usize,
    pub horizon: f64,
    pub seed: u64,
    /// Survival is compared on this many equally spaced times in
    /// `(0, horizon]`.
    pub n_times: usize,
    /// Bins of the first face coordinate of the pre-jump filter.
    pub n_bins: usize,
    /// Bins with fewer samples are not tested.
    pub min_bin_count: usize,
    /// Pass threshold in standard errors.
    pub sigmas: f64,
    /// Sup-deviation bound for empirical vs analytic survival.
    pub survival_tol: f64,
}

impl Default for LawCheckConfig {
    fn default() -> Self {
        Self {
            n_sims: 20_000,
            horizon: 5.0,
            seed: 0,
            n_times: 8,
            n_bins: 5,
            min_bin_count: 50,
            sigmas: 4.0,
            survival_tol: 0.01,
        }
    }
}

/// First observation jump before the horizon: time, post-jump label and
/// the filter just before the jump.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstJump {
    pub time: f64,
    pub target: Label,
    pub pre: FacePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Statistic {
    pub statistic: String,
    pub empirical: f64,
    pub analytic: f64,
    pub stderr: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawCheckReport {
    pub start: Vec<f64>,
    pub config: LawCheckConfig,
    pub survival_sup_deviation_chain: f64,
    pub survival_sup_deviation_pdp: f64,
    pub statistics: Vec<Statistic>,
    pub pass: bool,
}

/// Chain started from `nu0`, observed, filtered up to its first jump.
pub fn chain_first_jumps(model: &Model, nu0: &FacePoint, n: usize, horizon: f64, seed: u64) -> Result<Vec<Option<FirstJump>>> {
    let mu = nu0.to_distribution();
    replicate(n, |r| {
        let path = model.sample_chain(&mu, horizon, &RandomSource::new(seed, r));
        let obs = model.observe(&path);
        Ok(match obs.first_jump() {
            Some((time, target)) => Some(FirstJump {
                time,
                target,
                pre: model.flow(time, nu0)?,
            }),
            None => None,
        })
    })
}

/// Direct PDP simulation from `nu0`.
pub fn pdp_first_jumps(model: &Model, nu0: &FacePoint, n: usize, horizon: f64, seed: u64) -> Result<Vec<Option<FirstJump>>> {
    replicate(n, |r| {
        let jump = model.first_pdp_jump(nu0, horizon, &RandomSource::new(seed, PDP_STREAM_OFFSET + r))?;
        Ok(jump.map(|j| FirstJump {
            time: j.time,
            target: j.post.label(),
            pre: j.pre,
        }))
    })
}

/// `sup_t |P_emp(T_1 > t) - S(t)|` over `n_grid + 1` equally spaced times in
/// `[0, horizon]`.
pub fn survival_sup_deviation(model: &Model, nu0: &FacePoint, jumps: &[Option<FirstJump>], horizon: f64, n_grid: usize) -> f64 {
    let mut times: Vec<f64> = jumps.iter().flatten().map(|j| j.time).collect();
    times.sort_by(f64::total_cmp);
    let n = jumps.len() as f64;
    (0..=n_grid)
        .map(|k| {
            let t = horizon * k as f64 / n_grid as f64;
            let below = times.partition_point(|&x| x <= t) as f64;
            let emp = 1.0 - below / n;
            (emp - model.sojourn_survival(nu0, t)).abs()
        })
        .fold(0.0, f64::max)
}

fn binomial_stat(name: String, hits: usize, n: usize, p: f64, sigmas: f64) -> Statistic {
    let emp = hits as f64 / n as f64;
    let stderr = ((p * (1.0 - p)).max(0.0) / n as f64).sqrt();
    Statistic {
        statistic: name,
        empirical: emp,
        analytic: p,
        stderr,
        pass: (emp - p).abs() <= sigmas * stderr + 1e-12,
    }
}

fn survival_stats(model: &Model, nu0: &FacePoint, jumps: &[Option<FirstJump>], cfg: &LawCheckConfig, tag: &str) -> Vec<Statistic> {
    (1..=cfg.n_times)
        .map(|k| {
            let t = cfg.horizon * k as f64 / cfg.n_times as f64;
            let survived = jumps.iter().filter(|j| j.as_ref().is_none_or(|j| j.time > t)).count();
            binomial_stat(
                format!("{tag}_survival(t={t})"),
                survived,
                jumps.len(),
                model.sojourn_survival(nu0, t),
                cfg.sigmas,
            )
        })
        .collect()
}

fn target_stats(model: &Model, nu0: &FacePoint, jumps: &[Option<FirstJump>], cfg: &LawCheckConfig, tag: &str) -> Result<Vec<Statistic>> {
    let mut out = Vec::new();
    for b in model.observation().labels() {
        if b == nu0.label() {
            continue;
        }
        let p = model.jump_target_probability(nu0, b, cfg.horizon, 2000)?;
        let hits = jumps.iter().flatten().filter(|j| j.target == b).count();
        out.push(binomial_stat(format!("{tag}_target(label={})", b.0), hits, jumps.len(), p, cfg.sigmas));
    }
    Ok(out)
}

/// Target frequencies given the pre-jump position, binned by the first
/// face coordinate, against the mean of `q(pre, b)` in the bin.
pub fn binned_target_stats(model: &Model, jumps: &[Option<FirstJump>], cfg: &LawCheckConfig, tag: &str) -> Vec<Statistic> {
    let mut out = Vec::new();
    let jumped: Vec<&FirstJump> = jumps.iter().flatten().collect();
    let Some(first) = jumped.first() else {
        return out;
    };
    let label = first.pre.label();
    let lead = model.face(label)[0];
    for bin in 0..cfg.n_bins {
        let lo = bin as f64 / cfg.n_bins as f64;
        let hi = (bin + 1) as f64 / cfg.n_bins as f64;
        let members: Vec<&&FirstJump> = jumped
            .iter()
            .filter(|j| {
                let x = j.pre.weights()[lead];
                x >= lo && (x < hi || (bin + 1 == cfg.n_bins && x <= hi))
            })
            .collect();
        if members.len() < cfg.min_bin_count {
            continue;
        }
        let n = members.len() as f64;
        for b in model.observation().labels() {
            if b == label {
                continue;
            }
            let qs: Vec<f64> = members.iter().map(|j| model.jump_probability(&j.pre, b)).collect();
            let expected = qs.iter().sum::<f64>() / n;
            let stderr = qs.iter().map(|q| (q * (1.0 - q)).max(0.0)).sum::<f64>().sqrt() / n;
            let emp = members.iter().filter(|j| j.target == b).count() as f64 / n;
            out.push(Statistic {
                statistic: format!("{tag}_q(bin=[{lo},{hi}],label={})", b.0),
                empirical: emp,
                analytic: expected,
                stderr,
                pass: (emp - expected).abs() <= cfg.sigmas * stderr + 1e-12,
            });
        }
    }
    out
}

/// Two-sample comparisons of survival and target frequencies between the
/// chain-driven and PDP samples. `analytic` holds the PDP value.
fn two_sample_stats(model: &Model, nu0: &FacePoint, chain: &[Option<FirstJump>], pdp: &[Option<FirstJump>], cfg: &LawCheckConfig) -> Vec<Statistic> {
    let frac = |xs: &[Option<FirstJump>], pred: &dyn Fn(&Option<FirstJump>) -> bool| {
        xs.iter().filter(|x| pred(x)).count() as f64 / xs.len() as f64
    };
    let compare = |name: String, pred: &dyn Fn(&Option<FirstJump>) -> bool| {
        let a = frac(chain, pred);
        let b = frac(pdp, pred);
        let stderr = ((a * (1.0 - a) / chain.len() as f64 + b * (1.0 - b) / pdp.len() as f64).max(0.0)).sqrt();
        Statistic {
            statistic: name,
            empirical: a,
            analytic: b,
            stderr,
            pass: (a - b).abs() <= cfg.sigmas * stderr + 1e-12,
        }
    };
    let mut out = Vec::new();
    for k in 1..=cfg.n_times {
        let t = cfg.horizon * k as f64 / cfg.n_times as f64;
        out.push(compare(format!("chain_vs_pdp_survival(t={t})"), &|j| {
            j.as_ref().is_none_or(|j| j.time > t)
        }));
    }
    for b in model.observation().labels() {
        if b == nu0.label() {
            continue;
        }
        out.push(compare(format!("chain_vs_pdp_target(label={})", b.0), &|j| {
            j.as_ref().is_some_and(|j| j.target == b)
        }));
    }
    out
}

pub fn law_check(model: &Model, nu0: &FacePoint, cfg: &LawCheckConfig) -> Result<LawCheckReport> {
    let chain = chain_first_jumps(model, nu0, cfg.n_sims, cfg.horizon, cfg.seed)?;
    let pdp = pdp_first_jumps(model, nu0, cfg.n_sims, cfg.horizon, cfg.seed)?;
    let sup_chain = survival_sup_deviation(model, nu0, &chain, cfg.horizon, 200);
    let sup_pdp = survival_sup_deviation(model, nu0, &pdp, cfg.horizon, 200);

    let mut stats = Vec::new();
    stats.extend(survival_stats(model, nu0, &chain, cfg, "chain"));
    stats.extend(survival_stats(model, nu0, &pdp, cfg, "pdp"));
    stats.extend(target_stats(model, nu0, &chain, cfg, "chain")?);
    stats.extend(target_stats(model, nu0, &pdp, cfg, "pdp")?);
    stats.extend(binned_target_stats(model, &chain, cfg, "chain"));
    stats.extend(binned_target_stats(model, &pdp, cfg, "pdp"));
    stats.extend(two_sample_stats(model, nu0, &chain, &pdp, cfg));

    let pass = stats.iter().all(|s| s.pass) && sup_chain < cfg.survival_tol && sup_pdp < cfg.survival_tol;
    Ok(LawCheckReport {
        start: nu0.weights().to_vec(),
        config: *cfg,
        survival_sup_deviation_chain: sup_chain,
        survival_sup_deviation_pdp: sup_pdp,
        statistics: stats,
        pass,
    })
}
