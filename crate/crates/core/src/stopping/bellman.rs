//! Single-jump dynamic-programming operator on a face grid.
//!
//! For a grid point `nu` on face `A` with unnormalized flow `u_s = nu_A e^{s Lambda_A}`:
//!
//! ```text
//! (Tv)(nu) = min_k  C_k + e^{-a t_k} (u_{t_k} g)          (stop at t_k)
//!            or     C_K + e^{-a T} |u_T| v(phi_T)          (continue past T)
//! C_k = int_0^{t_k} e^{-a s} [u_s l + sum_b (u_s Lambda 1_b) v(H_b[u_s Lambda])] ds
//! ```
//!
//! The time integral uses the trapezoid rule on a uniform mesh, so a mesh
//! shift of the start point composes exactly with the cumulative sums.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::grid::{apply_stencil, FaceGrid, Stencil, ValueFunction};
use super::StoppingProblem;
use crate::chain::{Label, Model};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::RandomSource;

/// Iteration cap for [`BellmanOperator::solve`].
pub const MAX_ITERATIONS: usize = 10_000;

/// Discount tail below which the continuation branch is truncated.
pub const TAIL_TOL: f64 = 1e-6;

/// Bound on `(rate * step)^2`, the per-step flow curvature.
pub const CURVATURE_TOL: f64 = 1e-3;

/// Uniform mesh `{0, step, ..., n_steps * step}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeMesh {
    pub step: f64,
    pub n_steps: usize,
}

impl TimeMesh {
    pub fn new(step: f64, t_max: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !(t_max >= step) || !t_max.is_finite() {
            return Err(Error::InvalidParameter("need 0 < step <= t_max < inf"));
        }
        let n_steps = libm::ceil(t_max / step - 1e-9) as usize;
        Ok(Self { step, n_steps })
    }

    /// Step `sqrt(CURVATURE_TOL) / (q_max + alpha)`, horizon with
    /// `e^{-alpha T} < TAIL_TOL`.
    pub fn for_problem(model: &Model, prob: &StoppingProblem) -> Self {
        let rate = model.generator().max_exit_rate() + prob.discount();
        let step = libm::sqrt(CURVATURE_TOL) / rate;
        let t_max = libm::log(1.0 / TAIL_TOL) / prob.discount();
        let n_steps = libm::floor(t_max / step) as usize + 1;
        Self { step, n_steps }
    }

    pub fn t_max(&self) -> f64 {
        self.n_steps as f64 * self.step
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    /// Index of the mesh node nearest to `t`, clamped to the mesh.
    pub fn nearest(&self, t: f64) -> usize {
        (libm::round(t / self.step).max(0.0) as usize).min(self.n_steps)
    }
}

#[derive(Debug, Clone)]
struct PointKernel {
    /// `e^{-a t_k} u_k l`.
    run: Vec<f64>,
    /// `e^{-a t_k} u_k g`.
    stop: Vec<f64>,
    /// Offsets into `terms` per node (length `n_steps + 2`).
    offsets: Vec<u32>,
    /// Jump contributions `(grid index, coefficient)`; coefficients include
    /// the discount, the label flux and the interpolation weight.
    terms: Vec<(u32, f64)>,
    tail_weight: f64,
    tail: Stencil,
}

impl PointKernel {
    fn integrand(&self, k: usize, v: &[f64]) -> f64 {
        let lo = self.offsets[k] as usize;
        let hi = self.offsets[k + 1] as usize;
        self.run[k]
            + self.terms[lo..hi]
                .iter()
                .map(|&(i, c)| c * v[i as usize])
                .sum::<f64>()
    }

    /// Jump intensity part of the integrand, with `v = 1`.
    fn jump_weight(&self, k: usize) -> f64 {
        let lo = self.offsets[k] as usize;
        let hi = self.offsets[k + 1] as usize;
        self.terms[lo..hi].iter().map(|&(_, c)| c).sum()
    }
}

/// Precomputed single-jump operator for one problem and grid.
#[derive(Debug, Clone)]
pub struct BellmanOperator {
    grid: Arc<FaceGrid>,
    mesh: TimeMesh,
    discount: f64,
    obstacle: Vec<f64>,
    /// `e^{step Lambda_A}` per label.
    propagators: Vec<Matrix>,
    kernels: Vec<PointKernel>,
    model: Model,
}

/// Output of value iteration.
#[derive(Debug, Clone)]
pub struct Solution {
    pub value: ValueFunction,
    pub iterations: usize,
    /// `|Tv - v|_inf` for the returned `v`.
    pub residual: f64,
    /// Sup-norm change of the last iteration.
    pub last_change: f64,
}

/// Per-point check of `u <= psi` and `u <= K_t u` on the mesh.
#[derive(Debug, Clone)]
pub struct VariationalReport {
    /// Worst violation per grid point (positive means violated).
    pub worst: Vec<f64>,
    pub max_obstacle_violation: f64,
    pub max_inequality_violation: f64,
    /// Largest probability of an observation jump before the last checked
    /// time; the check stops at the first jump rather than at `t`.
    pub max_jump_probability: f64,
    pub tol: f64,
    pub pass: bool,
    /// Always false: the check cannot certify maximality.
    pub maximality_checked: bool,
}

impl BellmanOperator {
    pub fn new(model: &Model, prob: &StoppingProblem, grid: Arc<FaceGrid>, mesh: TimeMesh) -> Result<Self> {
        prob.check_model(model)?;
        if grid.n_labels() != model.n_labels() || grid.n_states() != model.n_states() {
            return Err(Error::DimensionMismatch {
                expected: model.n_labels(),
                got: grid.n_labels(),
            });
        }
        let n_labels = model.n_labels();
        let lambda = model.generator().matrix();
        let propagators: Vec<Matrix> = model
            .observation()
            .labels()
            .map(|a| model.face_generator(a).scaled(mesh.step).expm())
            .collect();
        // Label flux per face state: rates into each other label.
        let fluxes: Vec<Vec<Vec<f64>>> = model
            .observation()
            .labels()
            .map(|a| {
                model
                    .face(a)
                    .iter()
                    .map(|&i| {
                        let mut r = vec![0.0; n_labels];
                        for j in 0..model.n_states() {
                            let b = model.observation().label_of(j);
                            if b != a {
                                r[b.0] += lambda[(i, j)];
                            }
                        }
                        r
                    })
                    .collect()
            })
            .collect();

        let g = prob.stopping_cost();
        let l = prob.running_cost();
        let n = mesh.n_steps;
        let mut kernels = Vec::with_capacity(grid.len());
        let mut scratch = vec![0.0; model.n_states()];
        for p in 0..grid.len() {
            let point = grid.point(p);
            let a = point.label();
            let face = model.face(a);
            let mut u = point.face_coords(model.observation());
            let mut run = Vec::with_capacity(n + 1);
            let mut stop = Vec::with_capacity(n + 1);
            let mut offsets = Vec::with_capacity(n + 2);
            let mut terms = Vec::new();
            offsets.push(0u32);
            let mut tail_weight = 0.0;
            let mut tail = Vec::new();
            for k in 0..=n {
                let disc = libm::exp(-prob.discount() * mesh.time(k));
                run.push(disc * face.iter().zip(&u).map(|(&i, ui)| ui * l[i]).sum::<f64>());
                stop.push(disc * face.iter().zip(&u).map(|(&i, ui)| ui * g[i]).sum::<f64>());
                for b in model.observation().labels() {
                    if b == a {
                        continue;
                    }
                    let flux: f64 = u.iter().zip(&fluxes[a.0]).map(|(ui, r)| ui * r[b.0]).sum();
                    if !(flux > 0.0) {
                        continue;
                    }
                    for &j in model.face(b) {
                        scratch[j] = face.iter().zip(&u).map(|(&i, ui)| ui * lambda[(i, j)]).sum();
                    }
                    for (idx, w) in grid.stencil(b, &scratch) {
                        terms.push((idx as u32, disc * flux * w));
                    }
                }
                offsets.push(terms.len() as u32);
                if k == n {
                    let mass: f64 = u.iter().sum();
                    tail_weight = disc * mass;
                    if mass > 0.0 {
                        for (&i, ui) in face.iter().zip(&u) {
                            scratch[i] = *ui;
                        }
                        tail = grid.stencil(a, &scratch);
                    }
                } else {
                    u = propagators[a.0].left_mul(&u);
                }
            }
            kernels.push(PointKernel {
                run,
                stop,
                offsets,
                terms,
                tail_weight,
                tail,
            });
        }
        let obstacle = grid.points().map(|p| p.pair(g)).collect();
        Ok(Self {
            grid,
            mesh,
            discount: prob.discount(),
            obstacle,
            propagators,
            kernels,
            model: model.clone(),
        })
    }

    pub fn grid(&self) -> &Arc<FaceGrid> {
        &self.grid
    }

    pub fn mesh(&self) -> TimeMesh {
        self.mesh
    }

    /// `psi` at the grid points.
    pub fn obstacle(&self) -> &[f64] {
        &self.obstacle
    }

    /// `(Tv)` at grid point `p`, with the index of the minimizing mesh node
    /// (`n_steps + 1` for the continuation branch). Ties go to the smaller
    /// time.
    pub fn apply_at(&self, p: usize, v: &[f64]) -> (f64, usize) {
        let ker = &self.kernels[p];
        let h = self.mesh.step;
        let mut best = ker.stop[0];
        let mut arg = 0;
        let mut cum = 0.0;
        let mut f_prev = ker.integrand(0, v);
        for k in 1..=self.mesh.n_steps {
            let f = ker.integrand(k, v);
            cum += 0.5 * h * (f_prev + f);
            f_prev = f;
            let cand = cum + ker.stop[k];
            if cand < best {
                best = cand;
                arg = k;
            }
        }
        let cont = cum + ker.tail_weight * apply_stencil(&ker.tail, v);
        if cont < best {
            best = cont;
            arg = self.mesh.n_steps + 1;
        }
        (best, arg)
    }

    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        for (p, o) in out.iter_mut().enumerate() {
            *o = self.apply_at(p, v).0;
        }
    }

    pub fn apply(&self, v: &ValueFunction) -> ValueFunction {
        let mut out = vec![0.0; self.grid.len()];
        self.apply_into(v.values(), &mut out);
        ValueFunction::new(self.grid.clone(), out).expect("same grid")
    }

    /// Value iteration from `psi` until the sup-norm change drops below
    /// `tol`.
    pub fn solve(&self, tol: f64) -> Result<Solution> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive"));
        }
        let mut v = self.obstacle.clone();
        let mut next = vec![0.0; v.len()];
        let mut change = f64::INFINITY;
        for it in 1..=MAX_ITERATIONS {
            self.apply_into(&v, &mut next);
            change = crate::linalg::sup_dist(&v, &next);
            core::mem::swap(&mut v, &mut next);
            if change < tol {
                self.apply_into(&v, &mut next);
                let residual = crate::linalg::sup_dist(&v, &next);
                return Ok(Solution {
                    value: ValueFunction::new(self.grid.clone(), v)?,
                    iterations: it,
                    residual,
                    last_change: change,
                });
            }
        }
        Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            change,
        })
    }

    /// Lipschitz modulus of `T` in sup norm implied by the quadrature
    /// weights: the largest total weight on `v` over all branches.
    pub fn contraction_bound(&self) -> f64 {
        let h = self.mesh.step;
        let mut worst: f64 = 0.0;
        for ker in &self.kernels {
            let mut cum = 0.0;
            let mut prev = ker.jump_weight(0);
            for k in 1..=self.mesh.n_steps {
                let f = ker.jump_weight(k);
                cum += 0.5 * h * (prev + f);
                prev = f;
            }
            worst = worst.max(cum + ker.tail_weight);
        }
        worst
    }

    /// Largest observed ratio `|Tv1 - Tv2| / |v1 - v2|` over random pairs.
    pub fn contraction_witness(&self, pairs: usize, source: &RandomSource) -> f64 {
        let mut rng = source.rng();
        let scale = 1.0
            + self.obstacle.iter().fold(0.0f64, |m, x| m.max(x.abs()))
            + self.kernels.iter().fold(0.0f64, |m, k| m.max(k.run[0].abs())) / self.discount;
        let n = self.grid.len();
        let mut t1 = vec![0.0; n];
        let mut t2 = vec![0.0; n];
        let mut beta: f64 = 0.0;
        for _ in 0..pairs {
            let v1: Vec<f64> = (0..n).map(|_| scale * (2.0 * rng.uniform() - 1.0)).collect();
            let v2: Vec<f64> = (0..n).map(|_| scale * (2.0 * rng.uniform() - 1.0)).collect();
            self.apply_into(&v1, &mut t1);
            self.apply_into(&v2, &mut t2);
            let d = crate::linalg::sup_dist(&v1, &v2);
            if d > 0.0 {
                beta = beta.max(crate::linalg::sup_dist(&t1, &t2) / d);
            }
        }
        beta
    }

    /// Checks `u <= psi` and `u(nu) <= C_t(u) + e^{-a t} |u_t| u(phi_t)` at
    /// the mesh nodes nearest to `t_checks`.
    pub fn verify_variational(&self, u: &ValueFunction, t_checks: &[f64], tol: f64) -> VariationalReport {
        let n = self.mesh.n_steps;
        let mut check = vec![false; n + 1];
        for &t in t_checks {
            check[self.mesh.nearest(t)] = true;
        }
        let last_check = check.iter().rposition(|&c| c).unwrap_or(0);
        let v = u.values();
        let h = self.mesh.step;
        let obs = self.model.observation();
        let mut worst = Vec::with_capacity(v.len());
        let mut max_obst = f64::NEG_INFINITY;
        let mut max_ineq = f64::NEG_INFINITY;
        let mut max_jump: f64 = 0.0;
        let mut scratch = vec![0.0; self.model.n_states()];
        for (p, ker) in self.kernels.iter().enumerate() {
            let point = self.grid.point(p);
            let a = point.label();
            let face = self.model.face(a);
            let mut w = point.face_coords(obs);
            let obst = v[p] - self.obstacle[p];
            let mut ineq = f64::NEG_INFINITY;
            let mut cum = 0.0;
            let mut f_prev = ker.integrand(0, v);
            for k in 0..=last_check {
                if k > 0 {
                    w = self.propagators[a.0].left_mul(&w);
                    let f = ker.integrand(k, v);
                    cum += 0.5 * h * (f_prev + f);
                    f_prev = f;
                }
                if check[k] {
                    let mass: f64 = w.iter().sum();
                    let rhs = if mass > 0.0 {
                        for (&i, wi) in face.iter().zip(&w) {
                            scratch[i] = *wi;
                        }
                        let disc = libm::exp(-self.discount * self.mesh.time(k));
                        cum + disc * mass * apply_stencil(&self.grid.stencil(a, &scratch), v)
                    } else {
                        cum
                    };
                    ineq = ineq.max(v[p] - rhs);
                    if k == last_check {
                        max_jump = max_jump.max(1.0 - mass);
                    }
                }
            }
            max_obst = max_obst.max(obst);
            max_ineq = max_ineq.max(ineq);
            worst.push(obst.max(ineq));
        }
        let pass = worst.iter().all(|&x| x < tol);
        VariationalReport {
            worst,
            max_obstacle_violation: max_obst,
            max_inequality_violation: max_ineq,
            max_jump_probability: max_jump,
            tol,
            pass,
            maximality_checked: false,
        }
    }

    /// Labels of the grid points, in grid order.
    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.grid.len()).map(|p| self.grid.label_of(p))
    }
}
