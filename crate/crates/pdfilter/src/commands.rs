//! The experiment commands. Each one reads a validated model and a fully
//! resolved [`ExperimentConfig`], writes its artifacts into an output
//! directory and returns a JSON summary.

use std::path::Path;

use pdfilter_core::pdp::exit_survival_curve;
use pdfilter_core::stopping::{classical_values, solve_value, stopping_rule, value_general};
use pdfilter_core::{Distribution, FacePoint, Label, RandomSource};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::export::{self, write_json};
use crate::lawcheck::{law_check, LawCheckConfig};
use crate::manifest::Manifest;
use crate::{montecarlo, Error, LoadedModel, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Validate,
    Simulate,
    Filter,
    ExitTime,
    PdpCheck,
    Stop,
    Stability,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Validate => "validate",
            CommandKind::Simulate => "simulate",
            CommandKind::Filter => "filter",
            CommandKind::ExitTime => "exit-time",
            CommandKind::PdpCheck => "pdp-check",
            CommandKind::Stop => "stop",
            CommandKind::Stability => "stability",
        }
    }
}

/// Resolved parameters of one run. Fields a command does not use are
/// `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub seed: u64,
    pub horizon: Option<f64>,
    pub sims: Option<usize>,
    pub grid: Option<u32>,
    pub tol: Option<f64>,
    pub step: Option<f64>,
    pub subset: Option<Vec<String>>,
    pub start: Option<String>,
    pub mu: Option<Vec<f64>>,
    pub rho: Option<Vec<f64>>,
}

/// Optional user overrides, as given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub horizon: Option<f64>,
    pub sims: Option<usize>,
    pub grid: Option<u32>,
    pub tol: Option<f64>,
    pub step: Option<f64>,
    pub subset: Option<Vec<String>>,
    pub start: Option<String>,
    pub mu: Option<Vec<f64>>,
    pub rho: Option<Vec<f64>>,
}

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_GRID: u32 = 64;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_SIMS: usize = 20_000;

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {x}")))
    }
}

fn distribution(lm: &LoadedModel, name: &str, w: &[f64]) -> Result<Distribution> {
    if w.len() != lm.n_states() {
        return Err(Error::Config(format!("{name} needs {} weights", lm.n_states())));
    }
    Distribution::new(w.to_vec()).map_err(|e| Error::Config(format!("{name}: {e}")))
}

impl ExperimentConfig {
    /// Fills in per-command defaults and validates the result against the
    /// model.
    pub fn resolve(command: CommandKind, o: Overrides, lm: &LoadedModel) -> Result<Self> {
        use CommandKind::*;
        let file = &lm.file;
        let first_face = |lm: &LoadedModel| -> Vec<String> {
            let label = lm.model.observation().label_of(0);
            lm.model.face(label).iter().map(|&s| lm.state_names[s].clone()).collect()
        };
        let mut c = ExperimentConfig {
            command,
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            horizon: None,
            sims: None,
            grid: None,
            tol: None,
            step: None,
            subset: None,
            start: None,
            mu: None,
            rho: None,
        };
        match command {
            Validate => {}
            Simulate | Filter => {
                c.horizon = Some(o.horizon.unwrap_or(10.0));
                c.mu = Some(o.mu.unwrap_or_else(|| lm.initial().into_weights()));
                if command == Filter {
                    c.step = Some(o.step.unwrap_or(0.1));
                }
            }
            ExitTime => {
                c.horizon = Some(o.horizon.unwrap_or(5.0));
                c.step = Some(o.step.unwrap_or(0.01));
                let subset = o.subset.unwrap_or_else(|| first_face(lm));
                c.start = Some(o.start.unwrap_or_else(|| subset[0].clone()));
                c.subset = Some(subset);
            }
            PdpCheck => {
                c.horizon = Some(o.horizon.unwrap_or(5.0));
                c.sims = Some(o.sims.unwrap_or(DEFAULT_SIMS));
                match o.start {
                    Some(s) => c.start = Some(s),
                    None => c.mu = Some(o.mu.unwrap_or_else(|| lm.initial().into_weights())),
                }
            }
            Stop => {
                let prob = lm
                    .stopping_problem()?
                    .ok_or_else(|| Error::Config("model file has no stopping problem (g, alpha)".into()))?;
                c.grid = Some(o.grid.or(file.grid_resolution).unwrap_or(DEFAULT_GRID));
                c.tol = Some(o.tol.or(file.tol).unwrap_or(DEFAULT_TOL));
                c.sims = Some(o.sims.unwrap_or(DEFAULT_SIMS));
                // Censoring bias e^{-alpha H}(...) below 1e-6 of the cost scale.
                c.horizon = Some(o.horizon.unwrap_or_else(|| (1e6f64.ln() / prob.discount()).ceil()));
                c.mu = Some(o.mu.unwrap_or_else(|| lm.initial().into_weights()));
            }
            Stability => {
                c.horizon = Some(o.horizon.unwrap_or(50.0));
                c.step = Some(o.step.unwrap_or(0.1));
                let n = lm.n_states();
                c.mu = Some(o.mu.unwrap_or_else(|| Distribution::dirac(n, 0).into_weights()));
                c.rho = Some(o.rho.unwrap_or_else(|| {
                    let label = lm.model.observation().label_of(0);
                    Distribution::uniform_on(n, lm.model.face(label)).into_weights()
                }));
            }
        }
        c.validate(lm)?;
        Ok(c)
    }

    pub fn validate(&self, lm: &LoadedModel) -> Result<()> {
        if let Some(h) = self.horizon {
            positive("horizon", h)?;
        }
        if let Some(s) = self.step {
            positive("step", s)?;
        }
        if let Some(t) = self.tol {
            positive("tol", t)?;
        }
        if self.grid == Some(0) {
            return Err(Error::Config("grid resolution must be >= 1".into()));
        }
        if let Some(mu) = &self.mu {
            distribution(lm, "mu", mu)?;
        }
        if let Some(rho) = &self.rho {
            distribution(lm, "rho", rho)?;
        }
        if let Some(s) = &self.subset {
            for name in s {
                lm.state_index(name)?;
            }
        }
        if let Some(s) = &self.start {
            lm.state_index(s)?;
        }
        Ok(())
    }
}

fn need<T: Copy>(x: Option<T>, name: &str) -> Result<T> {
    x.ok_or_else(|| Error::Config(format!("missing {name}")))
}

/// Result of a command: its JSON summary and whether its checks passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Value,
    pub ok: bool,
}

/// Runs `cfg` against `lm`, writing artifacts and the manifest into `out`.
pub fn run(lm: &LoadedModel, cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    cfg.validate(lm)?;
    std::fs::create_dir_all(out).map_err(|e| Error::Io(out.display().to_string(), e))?;
    Manifest::new(cfg.clone(), lm.file.clone()).write(out)?;
    let outcome = match cfg.command {
        CommandKind::Validate => validate(lm),
        CommandKind::Simulate => simulate(lm, cfg, out),
        CommandKind::Filter => filter(lm, cfg, out),
        CommandKind::ExitTime => exit_time(lm, cfg, out),
        CommandKind::PdpCheck => pdp_check(lm, cfg, out),
        CommandKind::Stop => stop(lm, cfg, out),
        CommandKind::Stability => stability(lm, cfg, out),
    }?;
    write_json(&out.join("summary.json"), &outcome.summary)?;
    Ok(outcome)
}

fn validate(lm: &LoadedModel) -> Result<Outcome> {
    let prob = lm.stopping_problem()?;
    Ok(Outcome {
        summary: json!({
            "valid": true,
            "states": lm.state_names,
            "labels": lm.label_names,
            "level_sets": lm.model.observation().labels()
                .map(|a| lm.model.face(a).iter().map(|&s| lm.state_names[s].clone()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "max_exit_rate": lm.model.generator().max_exit_rate(),
            "injective_observation": lm.model.observation().is_injective(),
            "stopping_problem": prob.is_some(),
        }),
        ok: true,
    })
}

fn simulate(lm: &LoadedModel, cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let mu = distribution(lm, "mu", cfg.mu.as_deref().unwrap_or_default())?;
    let horizon = need(cfg.horizon, "horizon")?;
    let path = lm.model.sample_chain(&mu, horizon, &RandomSource::new(cfg.seed, 0));
    let obs = lm.model.observe(&path);
    export::write_path(&out.join("chain_path.csv"), &path, export::state_name(lm))?;
    export::write_path(&out.join("observation_path.csv"), &obs, export::label_name(lm))?;
    Ok(Outcome {
        summary: json!({
            "chain_jumps": path.jumps.len(),
            "observation_jumps": obs.jumps.len(),
            "final_state": lm.state_names[path.value_at(horizon)],
        }),
        ok: true,
    })
}

fn filter(lm: &LoadedModel, cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let mu = distribution(lm, "mu", cfg.mu.as_deref().unwrap_or_default())?;
    let horizon = need(cfg.horizon, "horizon")?;
    let step = need(cfg.step, "step")?;
    let path = lm.model.sample_chain(&mu, horizon, &RandomSource::new(cfg.seed, 0));
    let obs = lm.model.observe(&path);
    let traj = lm.model.run_filter(&obs, &mu)?;
    let rows = export::filter_rows(&lm.model, &traj, step);

    // Every exported row must sit on the face of the observation it carries.
    let mut face_invariant = true;
    let mut max_mass_error: f64 = 0.0;
    for r in &rows {
        let label = r.point.label();
        for (i, &w) in r.point.weights().iter().enumerate() {
            if lm.model.observation().label_of(i) != label && w != 0.0 {
                face_invariant = false;
            }
        }
        max_mass_error = max_mass_error.max((r.point.weights().iter().sum::<f64>() - 1.0).abs());
    }
    let label_matches = traj
        .segments
        .iter()
        .all(|s| s.start.label() == obs.value_at(s.start_time));

    export::write_path(&out.join("chain_path.csv"), &path, export::state_name(lm))?;
    export::write_path(&out.join("observation_path.csv"), &obs, export::label_name(lm))?;
    export::write_filter(&out.join("filter.csv"), lm, &rows)?;
    let ok = face_invariant && label_matches;
    Ok(Outcome {
        summary: json!({
            "rows": rows.len(),
            "observation_jumps": obs.jumps.len(),
            "degenerate_start": traj.degenerate_start,
            "face_invariant": face_invariant,
            "labels_match_observation": label_matches,
            "max_mass_error": max_mass_error,
        }),
        ok,
    })
}

fn exit_time(lm: &LoadedModel, cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let horizon = need(cfg.horizon, "horizon")?;
    let step = need(cfg.step, "step")?;
    let subset: Vec<usize> = cfg
        .subset
        .as_ref()
        .ok_or_else(|| Error::Config("missing subset".into()))?
        .iter()
        .map(|s| lm.state_index(s))
        .collect::<Result<_>>()?;
    let start = lm.state_index(cfg.start.as_deref().ok_or_else(|| Error::Config("missing start".into()))?)?;
    let n = (horizon / step + 1e-9).floor() as usize;
    let times: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
    let g = lm.model.generator();
    let nonlinear = exit_survival_curve(g, &subset, start, &times)?;
    let oracle: Vec<f64> = times
        .iter()
        .map(|&t| g.exit_survival_oracle(&subset, start, t))
        .collect::<std::result::Result<_, _>>()?;
    export::write_exit_curve(&out.join("exit_curve.csv"), &times, &nonlinear, &oracle)?;
    let max_diff = nonlinear
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(Outcome {
        summary: json!({ "points": times.len(), "max_abs_diff": max_diff }),
        ok: max_diff < 1e-6,
    })
}

fn pdp_start(lm: &LoadedModel, cfg: &ExperimentConfig) -> Result<FacePoint> {
    if let Some(s) = &cfg.start {
        return Ok(FacePoint::vertex(lm.model.observation(), lm.state_index(s)?));
    }
    let mu = distribution(lm, "mu", cfg.mu.as_deref().unwrap_or_default())?;
    // The label carrying most of mu's mass; ties go to the smaller index.
    let label = lm
        .model
        .observation()
        .labels()
        .map(|a| (a, lm.model.face(a).iter().map(|&i| mu.weights()[i]).sum::<f64>()))
        .fold((Label(0), f64::NEG_INFINITY), |best, x| if x.1 > best.1 { x } else { best })
        .0;
    Ok(lm.model.restrict_normalize(mu.weights(), label)?.point)
}

fn pdp_check(lm: &LoadedModel, cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let nu0 = pdp_start(lm, cfg)?;
    let lc = LawCheckConfig {
        n_sims: need(cfg.sims, "sims")?,
        horizon: need(cfg.horizon, "horizon")?,
        seed: cfg.seed,
        ..LawCheckConfig::default()
    };
    let report = law_check(&lm.model, &nu0, &lc)?;
    write_json(&out.join("pdp_check.json"), &report)?;
    let failed: Vec<&str> = report
        .statistics
        .iter()
        .filter(|s| !s.pass)
        .map(|s| s.statistic.as_str())
        .collect();
    Ok(Outcome {
        summary: json!({
            "pass": report.pass,
            "statistics": report.statistics.len(),
            "failed": failed,
            "survival_sup_deviation_chain": report.survival_sup_deviation_chain,
            "survival_sup_deviation_pdp": report.survival_sup_deviation_pdp,
        }),
        ok: report.pass,
    })
}

/// Stream used for the contraction witness; Monte Carlo uses streams from 0.
const WITNESS_STREAM: u64 = u64::MAX;

fn stop(lm: &LoadedModel, cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let prob = lm
        .stopping_problem()?
        .ok_or_else(|| Error::Config("model file has no stopping problem (g, alpha)".into()))?;
    let grid = need(cfg.grid, "grid")?;
    let tol = need(cfg.tol, "tol")?;
    let sims = need(cfg.sims, "sims")?;
    let horizon = need(cfg.horizon, "horizon")?;
    let mu = distribution(lm, "mu", cfg.mu.as_deref().unwrap_or_default())?;
    let model = &lm.model;

    let (op, sol) = solve_value(model, &prob, grid, tol)?;
    let epsilon = 2.0 * tol;
    let v_mu = value_general(model, &mu, &sol.value)?;
    let checks: Vec<f64> = (0..=op.mesh().n_steps).map(|k| op.mesh().time(k)).collect();
    let var = op.verify_variational(&sol.value, &checks, 5.0 * tol);
    let beta = op.contraction_witness(20, &RandomSource::new(cfg.seed, WITNESS_STREAM));
    let bound = op.contraction_bound();
    export::write_value(&out.join("value.csv"), lm, &op, &sol.value, epsilon)?;

    let policy = if sims > 0 {
        let rule = stopping_rule(&sol.value, &prob, epsilon);
        let est = montecarlo::evaluate_policy(model, &mu, &rule, &prob, sims, horizon, cfg.seed)?;
        let lo = v_mu - 3.0 * est.stderr - est.truncation_bound;
        let hi = v_mu + 3.0 * est.stderr + epsilon + est.truncation_bound;
        json!({
            "mean": est.mean,
            "stderr": est.stderr,
            "n": est.n,
            "truncation_bound": est.truncation_bound,
            "consistent_with_value": est.mean >= lo && est.mean <= hi,
        })
    } else {
        Value::Null
    };

    let classical = if model.observation().is_injective() {
        let c = classical_values(model.generator(), &prob, 1e-12)?;
        let grid_vals: Vec<f64> = (0..model.n_states())
            .map(|s| sol.value.values()[op.grid().vertex_index(model.observation(), s)])
            .collect();
        let diff = c.iter().zip(&grid_vals).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        json!({ "classical": c, "grid": grid_vals, "max_abs_diff": diff })
    } else {
        Value::Null
    };

    let policy_ok = policy.get("consistent_with_value").and_then(Value::as_bool).unwrap_or(true);
    let ok = sol.residual < tol && beta < 1.0 && policy_ok;
    let report = json!({
        "V_of_mu": v_mu,
        "residual": sol.residual,
        "iterations": sol.iterations,
        "beta_witness": beta,
        "contraction_bound": bound,
        "grid_points": op.grid().len(),
        "time_step": op.mesh().step,
        "t_max": op.mesh().t_max(),
        "contact_epsilon": epsilon,
        "variational": {
            "tol": var.tol,
            "pass": var.pass,
            "max_obstacle_violation": var.max_obstacle_violation,
            "max_inequality_violation": var.max_inequality_violation,
            "max_jump_probability": var.max_jump_probability,
            "maximality_checked": var.maximality_checked,
        },
        "policy_mc": policy,
        "full_observation": classical,
    });
    write_json(&out.join("stop.json"), &report)?;
    Ok(Outcome { summary: report, ok })
}

fn stability(lm: &LoadedModel, cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let horizon = need(cfg.horizon, "horizon")?;
    let step = need(cfg.step, "step")?;
    let mu = distribution(lm, "mu", cfg.mu.as_deref().unwrap_or_default())?;
    let rho = distribution(lm, "rho", cfg.rho.as_deref().unwrap_or_default())?;
    let path = lm.model.sample_chain(&mu, horizon, &RandomSource::new(cfg.seed, 0));
    let obs = lm.model.observe(&path);
    let a = lm.model.run_filter(&obs, &mu)?;
    let b = lm.model.run_filter(&obs, &rho)?;
    let n = (horizon / step + 1e-9).floor() as usize;
    let mut rows = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = k as f64 * step;
        let d = pdfilter_core::linalg::l1_dist(a.evaluate(&lm.model, t).weights(), b.evaluate(&lm.model, t).weights());
        rows.push((t, d));
    }
    export::write_series(&out.join("stability.csv"), ["t", "l1_distance"], &rows)?;
    let min = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    Ok(Outcome {
        summary: json!({
            "observation_jumps": obs.jumps.len(),
            "min_distance": min,
            "final_distance": rows.last().map(|r| r.1),
            "degenerate_start": b.degenerate_start || a.degenerate_start,
        }),
        ok: true,
    })
}
