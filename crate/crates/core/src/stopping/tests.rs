use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::chain::fixtures::cycle_model;
use crate::chain::{Label, ObservationModel, PiecewisePath};
use crate::filter::FacePoint;
use crate::rng::RandomSource;

const TOL: f64 = 1e-6;

fn single_state() -> Model {
    Model::new(RateMatrix::from_rows(&[[0.0]]).unwrap(), ObservationModel::constant(1)).unwrap()
}

fn three_state_full() -> Model {
    let g = RateMatrix::from_rows(&[[-1.0, 0.7, 0.3], [0.5, -1.5, 1.0], [0.2, 0.8, -1.0]]).unwrap();
    Model::new(g, ObservationModel::injective(3)).unwrap()
}

/// Three hidden states, two of them sharing a label, with a moving flow.
fn mixed_model() -> Model {
    let g = RateMatrix::from_rows(&[[-1.0, 0.6, 0.4], [0.3, -0.8, 0.5], [0.9, 0.6, -1.5]]).unwrap();
    Model::new(g, ObservationModel::new(vec![0, 0, 1], 2).unwrap()).unwrap()
}

fn cycle_problem() -> StoppingProblem {
    StoppingProblem::new(vec![2.0, -1.0, 0.5, 1.0], vec![0.2, 0.1, 0.3, 0.2], 0.5).unwrap()
}

#[test]
fn problem_rejects_nonpositive_discount() {
    assert!(StoppingProblem::new(vec![0.0], vec![0.0], 0.0).is_err());
    assert!(StoppingProblem::new(vec![0.0], vec![0.0], -1.0).is_err());
    assert!(StoppingProblem::new(vec![0.0], vec![0.0, 1.0], 1.0).is_err());
}

#[test]
fn single_state_fixed_point() {
    let m = single_state();
    for &(g, l, a) in &[(3.0, 1.0, 0.5), (1.0, 1.0, 0.5), (-0.5, 2.0, 1.0), (5.0, -1.0, 2.0)] {
        let prob = StoppingProblem::new(vec![g], vec![l], a).unwrap();
        let (_, sol) = solve_value(&m, &prob, 4, TOL).unwrap();
        let expected = f64::min(g, l / a);
        assert!((sol.value.values()[0] - expected).abs() < 1e-3, "{g} {l} {a}: {:?}", sol.value.values());
        assert!(sol.residual < TOL);
    }
}

#[test]
fn zero_data_is_a_fixed_point() {
    let m = mixed_model();
    let prob = StoppingProblem::new(vec![0.0; 3], vec![0.0; 3], 1.0).unwrap();
    let grid = Arc::new(FaceGrid::new(m.observation(), 8).unwrap());
    let op = BellmanOperator::new(&m, &prob, grid.clone(), TimeMesh::for_problem(&m, &prob)).unwrap();
    let zero = ValueFunction::from_fn(grid, |_| 0.0);
    assert!(op.apply(&zero).values().iter().all(|&x| x == 0.0));
}

#[test]
fn large_stopping_cost_never_stops() {
    let m = mixed_model();
    let prob = StoppingProblem::new(vec![50.0; 3], vec![0.0; 3], 1.0).unwrap();
    let grid = Arc::new(FaceGrid::new(m.observation(), 8).unwrap());
    let op = BellmanOperator::new(&m, &prob, grid.clone(), TimeMesh::for_problem(&m, &prob)).unwrap();
    let zero = ValueFunction::from_fn(grid, |_| 0.0);
    assert!(op.apply(&zero).values().iter().all(|&x| x.abs() < 1e-12));
}

#[test]
fn zero_stopping_cost_stops_at_once() {
    let m = mixed_model();
    let prob = StoppingProblem::new(vec![0.0; 3], vec![0.5, 0.0, 1.0], 1.0).unwrap();
    let (_, sol) = solve_value(&m, &prob, 8, TOL).unwrap();
    assert!(sol.value.values().iter().all(|&x| x == 0.0));
    let rule = stopping_rule(&sol.value, &prob, 2.0 * TOL);
    for p in sol.value.grid().points() {
        assert!(rule.stops(&p));
    }
    let mu = Distribution::uniform(3);
    assert_eq!(value_general(&m, &mu, &sol.value).unwrap(), 0.0);
}

#[test]
fn negative_constant_cost_is_obstacle() {
    let m = mixed_model();
    let prob = StoppingProblem::new(vec![-2.0; 3], vec![0.0; 3], 0.7).unwrap();
    let (op, sol) = solve_value(&m, &prob, 8, TOL).unwrap();
    assert_eq!(sol.value.values(), op.obstacle());
    let rule = stopping_rule(&sol.value, &prob, 0.0);
    assert!(sol.value.grid().points().all(|p| rule.stops(&p)));
}

#[test]
fn full_observation_matches_classical_values() {
    let m = three_state_full();
    let prob = StoppingProblem::new(vec![1.0, -0.5, 2.0], vec![0.3, 0.8, -0.2], 0.4).unwrap();
    let (op, sol) = solve_value(&m, &prob, 1, TOL).unwrap();
    let classical = classical_values(m.generator(), &prob, 1e-12).unwrap();
    for s in 0..3 {
        let idx = op.grid().vertex_index(m.observation(), s);
        assert!((sol.value.values()[idx] - classical[s]).abs() < 1e-3, "{s}");
    }
    assert!(sol.residual < TOL);
}

#[test]
fn iterates_are_nonincreasing_and_below_obstacle() {
    let m = mixed_model();
    let prob = StoppingProblem::new(vec![1.0, -0.3, 0.8], vec![0.4, 0.1, 0.2], 0.8).unwrap();
    let grid = Arc::new(FaceGrid::new(m.observation(), 10).unwrap());
    let op = BellmanOperator::new(&m, &prob, grid.clone(), TimeMesh::for_problem(&m, &prob)).unwrap();
    let mut v = ValueFunction::new(grid, op.obstacle().to_vec()).unwrap();
    for _ in 0..15 {
        let next = op.apply(&v);
        for (a, b) in next.values().iter().zip(v.values()) {
            assert!(a <= b);
        }
        v = next;
    }
}

#[test]
fn contraction_witness_below_bound() {
    let m = mixed_model();
    let prob = StoppingProblem::new(vec![1.0, -0.3, 0.8], vec![0.4, 0.1, 0.2], 0.8).unwrap();
    let grid = Arc::new(FaceGrid::new(m.observation(), 6).unwrap());
    let op = BellmanOperator::new(&m, &prob, grid, TimeMesh::for_problem(&m, &prob)).unwrap();
    let beta = op.contraction_witness(20, &RandomSource::new(3, 0));
    let bound = op.contraction_bound();
    assert!(beta > 0.0 && beta <= bound + 1e-12, "{beta} {bound}");
    assert!(bound < 1.0);
}

fn all_nodes(op: &BellmanOperator) -> Vec<f64> {
    (0..=op.mesh().n_steps).map(|k| op.mesh().time(k)).collect()
}

#[test]
fn variational_check_on_cycle_model() {
    let m = cycle_model();
    let prob = cycle_problem();
    let (op, sol) = solve_value(&m, &prob, 16, TOL).unwrap();
    let checks = all_nodes(&op);
    let rep = op.verify_variational(&sol.value, &checks, 5.0 * TOL);
    assert!(rep.max_obstacle_violation <= 0.0);
    assert!(rep.pass, "{} {}", rep.max_obstacle_violation, rep.max_inequality_violation);
    assert!(!rep.maximality_checked);

    let plus = ValueFunction::from_fn(op.grid().clone(), |p| p.pair(prob.stopping_cost()) + 1.0);
    let rep = op.verify_variational(&plus, &checks, 5.0 * TOL);
    assert!(!rep.pass);
    assert!(rep.worst.iter().all(|&w| w >= 1.0 - 1e-12));

    let shifted: Vec<f64> = sol.value.values().iter().map(|x| x - 1.0).collect();
    let minus = ValueFunction::new(op.grid().clone(), shifted).unwrap();
    assert!(op.verify_variational(&minus, &checks, 5.0 * TOL).pass);
}

#[test]
fn variational_violation_shrinks_with_refinement() {
    // With a moving flow the interpolated value at phi_t differs from the
    // grid solution by the interpolation error, which is O(1/m) near the
    // contact boundary.
    let m = mixed_model();
    let prob = StoppingProblem::new(vec![1.0, -0.3, 0.8], vec![0.4, 0.1, 0.2], 0.8).unwrap();
    let viol = |res: u32| {
        let (op, sol) = solve_value(&m, &prob, res, 1e-8).unwrap();
        let rep = op.verify_variational(&sol.value, &all_nodes(&op), 5.0 * TOL);
        assert!(rep.max_obstacle_violation <= 0.0);
        rep.max_inequality_violation
    };
    let coarse = viol(8);
    let fine = viol(64);
    assert!(fine < 0.2 * coarse, "{coarse} {fine}");
    assert!(fine < 2e-3);

    let (op, sol) = solve_value(&m, &prob, 16, TOL).unwrap();
    let shifted: Vec<f64> = sol.value.values().iter().map(|x| x - 1.0).collect();
    let minus = ValueFunction::new(op.grid().clone(), shifted).unwrap();
    assert!(op.verify_variational(&minus, &all_nodes(&op), 5.0 * TOL).pass);
}

#[test]
fn value_general_mixes_faces() {
    let m = cycle_model();
    let prob = cycle_problem();
    let (_, sol) = solve_value(&m, &prob, 16, TOL).unwrap();
    let v = &sol.value;
    let mu = Distribution::uniform(4);
    let a = FacePoint::new(m.observation(), Label(1), vec![0.5, 0.0, 0.5, 0.0]).unwrap();
    let b = FacePoint::new(m.observation(), Label(0), vec![0.0, 0.5, 0.0, 0.5]).unwrap();
    let expected = 0.5 * v.evaluate(&a) + 0.5 * v.evaluate(&b);
    assert!((value_general(&m, &mu, v).unwrap() - expected).abs() < 1e-14);

    let on_face = Distribution::new(vec![0.3, 0.0, 0.7, 0.0]).unwrap();
    let p = FacePoint::new(m.observation(), Label(1), on_face.weights().to_vec()).unwrap();
    assert!((value_general(&m, &on_face, v).unwrap() - v.evaluate(&p)).abs() < 1e-14);

    let c = ValueFunction::from_fn(v.grid().clone(), |_| 2.5);
    let mu = Distribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    assert!((value_general(&m, &mu, &c).unwrap() - 2.5).abs() < 1e-14);
}

fn mixed_trajectory(m: &Model) -> crate::filter::FilterTrajectory {
    let obs = PiecewisePath {
        initial: Label(0),
        jumps: vec![(0.7, Label(1)), (1.9, Label(0))],
        horizon: 4.0,
    };
    m.run_filter(&obs, &Distribution::uniform(3)).unwrap()
}

#[test]
fn cost_examples() {
    let m = mixed_model();
    let traj = mixed_trajectory(&m);
    let prob = StoppingProblem::new(vec![1.0, -0.3, 0.8], vec![0.4, 0.1, 0.2], 0.8).unwrap();
    let at0 = cost_along_filter(&m, &traj, Some(0.0), &prob).unwrap();
    assert!((at0 - traj.segments[0].start.pair(prob.stopping_cost())).abs() < 1e-15);

    let no_run = StoppingProblem::new(vec![1.0, -0.3, 0.8], vec![0.0; 3], 0.8).unwrap();
    assert_eq!(cost_along_filter(&m, &traj, None, &no_run).unwrap(), 0.0);

    let unit = StoppingProblem::new(vec![0.0; 3], vec![1.0; 3], 0.8).unwrap();
    let c = cost_along_filter(&m, &traj, None, &unit).unwrap();
    assert!((c - (1.0 - libm::exp(-0.8 * 4.0)) / 0.8).abs() < 1e-10);

    assert!(cost_along_filter(&m, &traj, Some(5.0), &prob).is_err());
}

#[test]
fn cost_matches_fine_riemann_sum() {
    let m = mixed_model();
    let traj = mixed_trajectory(&m);
    let prob = StoppingProblem::new(vec![1.0, -0.3, 0.8], vec![0.4, 0.1, 0.2], 0.8).unwrap();
    let tau = 2.5;
    let n = 20_000;
    let h = tau / n as f64;
    let mut acc = 0.0;
    for k in 0..n {
        let s = (k as f64 + 0.5) * h;
        acc += libm::exp(-0.8 * s) * traj.evaluate(&m, s).pair(prob.running_cost()) * h;
    }
    acc += libm::exp(-0.8 * tau) * traj.evaluate(&m, tau).pair(prob.stopping_cost());
    let c = cost_along_filter(&m, &traj, Some(tau), &prob).unwrap();
    assert!((c - acc).abs() < 1e-7, "{c} {acc}");
}

#[test]
fn first_entry_brackets_crossing() {
    let m = mixed_model();
    let traj = mixed_trajectory(&m);
    let g = vec![1.0, 0.0, 0.0];
    let start = traj.segments[0].start.pair(&g);
    let later = traj.evaluate(&m, 0.6).pair(&g);
    let theta = 0.5 * (start + later);
    let policy = ObstacleThreshold {
        stopping_cost: g.clone(),
        threshold: theta,
    };
    let tau = first_entry(&m, &traj, &policy).unwrap();
    assert!(tau > 0.0 && tau < 0.6);
    let before = traj.evaluate(&m, tau - 2.0 * ENTRY_TIME_TOL).pair(&g);
    let at = traj.evaluate(&m, tau).pair(&g);
    assert!((at - theta) * (before - theta) <= 0.0);
    assert_eq!(first_entry(&m, &traj, &StopImmediately), Some(0.0));
    assert_eq!(first_entry(&m, &traj, &NeverStop), None);
}

#[test]
fn stop_immediately_estimates_initial_obstacle() {
    let m = mixed_model();
    let prob = StoppingProblem::new(vec![1.0, -0.3, 0.8], vec![0.4, 0.1, 0.2], 0.8).unwrap();
    let mu = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
    let est = evaluate_policy_mc(&m, &mu, &StopImmediately, &prob, 4000, 10.0, &RandomSource::new(5, 0)).unwrap();
    // E[Pi_0 g] = mu g.
    let exact = mu.pair(prob.stopping_cost());
    assert!((est.mean - exact).abs() < 4.0 * est.stderr, "{est:?} {exact}");
}

#[test]
fn never_stop_running_unit_cost() {
    let m = mixed_model();
    let prob = StoppingProblem::new(vec![3.0, 1.0, -2.0], vec![1.0; 3], 0.8).unwrap();
    let mu = Distribution::uniform(3);
    let est = evaluate_policy_mc(&m, &mu, &NeverStop, &prob, 200, 6.0, &RandomSource::new(6, 0)).unwrap();
    let exact = (1.0 - libm::exp(-0.8 * 6.0)) / 0.8;
    assert!((est.mean - exact).abs() < 1e-9 && est.stderr < 1e-9);
    assert!((est.truncation_bound - libm::exp(-4.8) * (3.0 + 1.0 / 0.8)).abs() < 1e-15);
}

#[test]
fn policy_mc_is_reproducible() {
    let m = mixed_model();
    let prob = StoppingProblem::new(vec![1.0, -0.3, 0.8], vec![0.4, 0.1, 0.2], 0.8).unwrap();
    let (_, sol) = solve_value(&m, &prob, 8, TOL).unwrap();
    let rule = stopping_rule(&sol.value, &prob, 2.0 * TOL);
    let mu = Distribution::uniform(3);
    let a = evaluate_policy_mc(&m, &mu, &rule, &prob, 50, 10.0, &RandomSource::new(9, 0)).unwrap();
    let b = evaluate_policy_mc(&m, &mu, &rule, &prob, 50, 10.0, &RandomSource::new(9, 0)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn mesh_meets_tail_and_curvature() {
    let m = cycle_model();
    let prob = cycle_problem();
    let mesh = TimeMesh::for_problem(&m, &prob);
    assert!(libm::exp(-prob.discount() * mesh.t_max()) < TAIL_TOL);
    let rate = m.generator().max_exit_rate() + prob.discount();
    assert!((rate * mesh.step).powi(2) <= CURVATURE_TOL * (1.0 + 1e-12));
}
