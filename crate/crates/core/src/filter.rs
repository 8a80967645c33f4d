//! The filtering process on the effective simplex.
//!
//! A belief supported on the level set `A = h^{-1}(a)` is a [`FacePoint`].
//! Between observation jumps it follows the flow
//!
//! ```text
//! y' = 1_A * (y Lambda) - (y Lambda 1_A) y
//! ```
//!
//! whose solution is the normalization of `x_A e^{t Lambda_A}`; the closed
//! form is what [`Model::flow`] computes, and [`Model::flow_ode`] integrates
//! the nonlinear field directly as an independent check. At an observation
//! jump to label `b` the belief is re-conditioned:
//! `Pi_T = H_b[Pi_{T-} Lambda]`.

use alloc::vec;
use alloc::vec::Vec;

use crate::chain::{Distribution, Label, Model, ObservationModel, PiecewisePath, MASS_TOL};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::DEG_TOL;

/// A probability vector supported on one level set of `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct FacePoint {
    label: Label,
    weights: Vec<f64>,
}

impl FacePoint {
    /// Validates support and normalization.
    pub fn new(obs: &ObservationModel, label: Label, weights: Vec<f64>) -> Result<Self> {
        if label.0 >= obs.n_labels() {
            return Err(Error::LabelOutOfRange { label: label.0 });
        }
        if weights.len() != obs.n_states() {
            return Err(Error::DimensionMismatch {
                expected: obs.n_states(),
                got: weights.len(),
            });
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidDistribution {
                    reason: "weights must be finite and nonnegative",
                });
            }
            if w != 0.0 && obs.label_of(i) != label {
                return Err(Error::InvalidDistribution {
                    reason: "weight outside the face",
                });
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution {
                reason: "weights must sum to one",
            });
        }
        Ok(Self { label, weights })
    }

    /// Point mass at `state`.
    pub fn vertex(obs: &ObservationModel, state: usize) -> Self {
        let mut weights = vec![0.0; obs.n_states()];
        weights[state] = 1.0;
        Self {
            label: obs.label_of(state),
            weights,
        }
    }

    /// Uniform on the face of `label`.
    pub fn barycenter(obs: &ObservationModel, label: Label) -> Self {
        let face = obs.level_set(label);
        let mut weights = vec![0.0; obs.n_states()];
        for &i in face {
            weights[i] = 1.0 / face.len() as f64;
        }
        Self { label, weights }
    }

    /// Builds a point from coordinates on the face (in level-set order),
    /// normalizing them. Used internally where support holds by construction.
    pub(crate) fn from_face_coords(obs: &ObservationModel, label: Label, coords: &[f64]) -> Self {
        let total: f64 = coords.iter().sum();
        let mut weights = vec![0.0; obs.n_states()];
        for (&i, &c) in obs.level_set(label).iter().zip(coords) {
            weights[i] = (c / total).max(0.0);
        }
        Self { label, weights }
    }

    /// Wraps weights whose support and normalization hold by construction.
    pub(crate) fn from_parts(label: Label, weights: Vec<f64>) -> Self {
        Self { label, weights }
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Coordinates on the face, in level-set order.
    pub fn face_coords(&self, obs: &ObservationModel) -> Vec<f64> {
        obs.level_set(self.label).iter().map(|&i| self.weights[i]).collect()
    }

    pub fn pair(&self, f: &[f64]) -> f64 {
        dot(&self.weights, f)
    }

    pub fn to_distribution(&self) -> Distribution {
        Distribution::new(self.weights.clone()).expect("face points are probability vectors")
    }
}

/// Result of `H_a[mu]`: the conditioned point and whether the fallback
/// measure (uniform on the face) had to be used.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditioned {
    pub point: FacePoint,
    pub degenerate: bool,
}

/// One flow segment of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start_time: f64,
    pub start: FacePoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpRecord {
    pub time: f64,
    pub pre: FacePoint,
    pub post: FacePoint,
}

/// A piecewise-deterministic path on the effective simplex: flow segments
/// separated by jumps. Only segment starts are stored; intermediate values
/// are recomputed from the closed-form flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterTrajectory {
    pub segments: Vec<Segment>,
    pub jumps: Vec<JumpRecord>,
    pub horizon: f64,
    /// The initial conditioning used the fallback measure.
    pub degenerate_start: bool,
}

impl FilterTrajectory {
    /// Index of the segment containing `t` (right-continuous).
    pub fn segment_index(&self, t: f64) -> usize {
        self.segments
            .partition_point(|s| s.start_time <= t)
            .saturating_sub(1)
    }

    /// End time of segment `k` (next jump time or the horizon).
    pub fn segment_end(&self, k: usize) -> f64 {
        self.segments
            .get(k + 1)
            .map_or(self.horizon, |s| s.start_time)
    }

    pub fn evaluate(&self, model: &Model, t: f64) -> FacePoint {
        let seg = &self.segments[self.segment_index(t)];
        model
            .flow(t - seg.start_time, &seg.start)
            .expect("face mass stays positive along the flow")
    }

    pub fn label_at(&self, t: f64) -> Label {
        self.segments[self.segment_index(t)].start.label()
    }

    /// First jump time and post-jump label, if any.
    pub fn first_jump(&self) -> Option<(f64, Label)> {
        self.jumps.first().map(|j| (j.time, j.post.label()))
    }
}

/// Face coordinates of a full-length vector.
pub(crate) fn gather(v: &[f64], face: &[usize]) -> Vec<f64> {
    face.iter().map(|&i| v[i]).collect()
}

impl Model {
    /// `H_a[mu]`: restricts `mu` to `h^{-1}(a)` and renormalizes.
    ///
    /// Only the entries on the face are read; they must be nonnegative.
    /// Entries off the face may have any sign, which lets the jump step pass
    /// `Pi_{T-} Lambda` directly. If the face mass is below [`DEG_TOL`] the
    /// uniform measure on the face is returned with `degenerate = true`.
    pub fn restrict_normalize(&self, mu: &[f64], label: Label) -> Result<Conditioned> {
        if mu.len() != self.n_states() {
            return Err(Error::DimensionMismatch {
                expected: self.n_states(),
                got: mu.len(),
            });
        }
        if label.0 >= self.n_labels() {
            return Err(Error::LabelOutOfRange { label: label.0 });
        }
        let face = self.face(label);
        let mut mass = 0.0;
        for &i in face {
            if mu[i] < 0.0 || !mu[i].is_finite() {
                return Err(Error::NegativeMass {
                    state: i,
                    value: mu[i],
                });
            }
            mass += mu[i];
        }
        if mass < DEG_TOL {
            return Ok(Conditioned {
                point: FacePoint::barycenter(self.observation(), label),
                degenerate: true,
            });
        }
        let mut weights = vec![0.0; self.n_states()];
        for &i in face {
            weights[i] = mu[i] / mass;
        }
        Ok(Conditioned {
            point: FacePoint { label, weights },
            degenerate: false,
        })
    }

    /// `F_a(y) = 1_A * (y Lambda) - (y Lambda 1_A) y`.
    pub fn vector_field(&self, y: &FacePoint) -> Vec<f64> {
        self.field(y.label, &y.weights)
    }

    fn field(&self, label: Label, y: &[f64]) -> Vec<f64> {
        let y_lambda = self.generator().matrix().left_mul(y);
        let face = self.face(label);
        let outflow: f64 = face.iter().map(|&i| y_lambda[i]).sum();
        let mut out = vec![0.0; y.len()];
        for &i in face {
            out[i] = y_lambda[i] - outflow * y[i];
        }
        out
    }

    /// Unnormalized flow `x_A e^{t Lambda_A}` in face coordinates. Its total
    /// mass is the probability of no observation jump on `[0, t]`.
    pub fn unnormalized_flow(&self, t: f64, x: &FacePoint) -> Vec<f64> {
        let coords = x.face_coords(self.observation());
        if t == 0.0 {
            return coords;
        }
        self.face_generator(x.label)
            .scaled(t)
            .expm()
            .left_mul(&coords)
    }

    /// `phi_a(t, x)`, the normalized closed-form flow.
    pub fn flow(&self, t: f64, x: &FacePoint) -> Result<FacePoint> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter("flow time must be finite and >= 0"));
        }
        if t == 0.0 {
            return Ok(x.clone());
        }
        let u = self.unnormalized_flow(t, x);
        let mass: f64 = u.iter().sum();
        if !(mass > 0.0) {
            return Err(Error::FaceMassVanished);
        }
        Ok(FacePoint::from_face_coords(self.observation(), x.label, &u))
    }

    /// Fixed-step RK4 integration of the nonlinear field, without any
    /// renormalization. The result stays on the face exactly; its total mass
    /// drifts from one only by the integration error.
    pub fn integrate_field(&self, t: f64, x: &FacePoint, step: f64) -> Vec<f64> {
        let mut y = x.weights.clone();
        if t == 0.0 {
            return y;
        }
        let n = libm::ceil(t / step).max(1.0) as usize;
        let h = t / n as f64;
        let label = x.label;
        let axpy = |a: &[f64], k: &[f64], s: f64| -> Vec<f64> {
            a.iter().zip(k).map(|(ai, ki)| ai + s * ki).collect()
        };
        for _ in 0..n {
            let k1 = self.field(label, &y);
            let k2 = self.field(label, &axpy(&y, &k1, h / 2.0));
            let k3 = self.field(label, &axpy(&y, &k2, h / 2.0));
            let k4 = self.field(label, &axpy(&y, &k3, h));
            for i in 0..y.len() {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        y
    }

    /// RK4 solution of the flow, projected back onto the face.
    pub fn flow_ode(&self, t: f64, x: &FacePoint, step: f64) -> Result<FacePoint> {
        if !(t >= 0.0) || !(step > 0.0) {
            return Err(Error::InvalidParameter("need t >= 0 and step > 0"));
        }
        if t == 0.0 {
            return Ok(x.clone());
        }
        let y = self.integrate_field(t, x, step);
        let coords: Vec<f64> = gather(&y, self.face(x.label))
            .into_iter()
            .map(|c| c.max(0.0))
            .collect();
        if !(coords.iter().sum::<f64>() > 0.0) {
            return Err(Error::FaceMassVanished);
        }
        Ok(FacePoint::from_face_coords(self.observation(), x.label, &coords))
    }

    /// Jump step `Pi_T = H_b[Pi_{T-} Lambda]`, with the denominator
    /// `Pi_{T-} Lambda 1_{h^{-1}(b)}` returned alongside.
    pub fn jump_update(&self, pre: &FacePoint, target: Label) -> Result<(FacePoint, f64)> {
        let v = self.generator().matrix().left_mul(&pre.weights);
        let denom: f64 = self.face(target).iter().map(|&i| v[i]).sum();
        let c = self.restrict_normalize(&v, target)?;
        Ok((c.point, denom))
    }

    /// Runs the filter along an observation path.
    pub fn run_filter(&self, obs: &PiecewisePath<Label>, mu: &Distribution) -> Result<FilterTrajectory> {
        obs.validate()?;
        if mu.len() != self.n_states() {
            return Err(Error::DimensionMismatch {
                expected: self.n_states(),
                got: mu.len(),
            });
        }
        for label in core::iter::once(obs.initial).chain(obs.jumps.iter().map(|j| j.1)) {
            if label.0 >= self.n_labels() {
                return Err(Error::LabelOutOfRange { label: label.0 });
            }
        }
        let start = self.restrict_normalize(mu.weights(), obs.initial)?;
        let mut segments = vec![Segment {
            start_time: 0.0,
            start: start.point,
        }];
        let mut jumps = Vec::with_capacity(obs.jumps.len());
        for &(time, label) in &obs.jumps {
            let last = segments.last().expect("at least one segment");
            let pre = self.flow(time - last.start_time, &last.start)?;
            let (post, denom) = self.jump_update(&pre, label)?;
            if !(denom > DEG_TOL) {
                return Err(Error::DegenerateJump {
                    time,
                    denominator: denom,
                });
            }
            segments.push(Segment {
                start_time: time,
                start: post.clone(),
            });
            jumps.push(JumpRecord { time, pre, post });
        }
        Ok(FilterTrajectory {
            segments,
            jumps,
            horizon: obs.horizon,
            degenerate_start: start.degenerate,
        })
    }

    /// Discrete-time filter on the grid `k * dt`:
    /// `Pi_0 = H_{Y_0}[mu]`, `Pi_k = H_{Y_k}[Pi_{k-1} e^{dt Lambda}]`.
    pub fn discrete_filter(&self, mu: &Distribution, dt: f64, samples: &[Label]) -> Result<Vec<FacePoint>> {
        let (&first, rest) = samples
            .split_first()
            .ok_or(Error::InvalidParameter("need at least one observation sample"))?;
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter("time step must be positive"));
        }
        let p = self.generator().transition_semigroup(dt)?;
        let mut out = Vec::with_capacity(samples.len());
        out.push(self.restrict_normalize(mu.weights(), first)?.point);
        let mut buf = vec![0.0; self.n_states()];
        for &label in rest {
            p.left_mul_into(out.last().expect("nonempty").weights(), &mut buf);
            out.push(self.restrict_normalize(&buf, label)?.point);
        }
        Ok(out)
    }

    /// Law of `X_{t+s}` given the observations up to `t`: `Pi_t e^{s Lambda}`.
    pub fn predict(&self, pi: &FacePoint, s: f64) -> Result<Distribution> {
        let p = self.generator().transition_semigroup(s)?;
        let mut w = p.left_mul(pi.weights());
        let total: f64 = w.iter().sum();
        for x in &mut w {
            *x = x.max(0.0) / total;
        }
        Distribution::new(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::fixtures::*;
    use crate::chain::RateMatrix;
    use crate::linalg::{sup_dist, Matrix};
    use crate::rng::RandomSource;

    fn random_face_point(model: &Model, label: Label, rng: &mut crate::rng::Rng) -> FacePoint {
        let face = model.face(label);
        let coords: Vec<f64> = face.iter().map(|_| rng.uniform_open0()).collect();
        FacePoint::from_face_coords(model.observation(), label, &coords)
    }

    #[test]
    fn restrict_uniform_to_odd_states() {
        let m = cycle_model();
        let c = m.restrict_normalize(&[0.25; 4], Label(1)).unwrap();
        assert_eq!(c.point.weights(), &[0.5, 0.0, 0.5, 0.0]);
        assert!(!c.degenerate);
    }

    #[test]
    fn restrict_dirac_on_own_face() {
        let m = cycle_model();
        let c = m.restrict_normalize(&[0.0, 0.0, 1.0, 0.0], Label(1)).unwrap();
        assert_eq!(c.point.weights(), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn restrict_jump_vector() {
        // delta_1 Lambda = (-1, 1, 0, 0) conditioned on {h = 0} = {2, 4}.
        let m = cycle_model();
        let c = m.restrict_normalize(&[-1.0, 1.0, 0.0, 0.0], Label(0)).unwrap();
        assert_eq!(c.point.weights(), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn restrict_rejects_negative_mass_on_face() {
        let m = cycle_model();
        let err = m.restrict_normalize(&[-1.0, 1.0, 0.0, 0.0], Label(1)).unwrap_err();
        assert!(matches!(err, Error::NegativeMass { state: 0, .. }));
    }

    #[test]
    fn restrict_falls_back_to_uniform() {
        let m = cycle_model();
        let c = m.restrict_normalize(&[1.0, 0.0, 0.0, 0.0], Label(0)).unwrap();
        assert!(c.degenerate);
        assert_eq!(c.point.weights(), &[0.0, 0.5, 0.0, 0.5]);
    }

    #[test]
    fn face_point_validation() {
        let obs = cycle_model().observation().clone();
        assert!(FacePoint::new(&obs, Label(1), vec![0.5, 0.0, 0.5, 0.0]).is_ok());
        assert!(FacePoint::new(&obs, Label(1), vec![0.5, 0.5, 0.0, 0.0]).is_err());
        assert!(FacePoint::new(&obs, Label(1), vec![0.5, 0.0, 0.4, 0.0]).is_err());
    }

    #[test]
    fn field_vanishes_at_cycle_vertex() {
        let m = cycle_model();
        let y = FacePoint::vertex(m.observation(), 0);
        assert!(m.vector_field(&y).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn field_sums_to_zero() {
        let mut rng = RandomSource::new(2, 0).rng();
        for _ in 0..50 {
            let g = random_generator(5, 3.0, 0.3, &mut rng);
            let h = random_observation(5, 2, &mut rng);
            let m = Model::new(g, h).unwrap();
            let y = random_face_point(&m, Label(0), &mut rng);
            let f = m.vector_field(&y);
            assert!(f.iter().sum::<f64>().abs() < 1e-12);
            for (i, &fi) in f.iter().enumerate() {
                if m.observation().label_of(i) != Label(0) {
                    assert_eq!(fi, 0.0);
                }
            }
        }
    }

    #[test]
    fn zero_generator_field_is_zero() {
        let g = RateMatrix::new(Matrix::zeros(3, 3)).unwrap();
        let m = Model::new(g, ObservationModel::new(vec![0, 0, 1], 2).unwrap()).unwrap();
        let y = FacePoint::barycenter(m.observation(), Label(0));
        assert!(m.vector_field(&y).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn cycle_flow_is_stationary() {
        let m = cycle_model();
        let x = FacePoint::vertex(m.observation(), 0);
        let u = FacePoint::barycenter(m.observation(), Label(1));
        for &t in &[0.0, 0.5, 3.0] {
            assert_eq!(m.flow(t, &x).unwrap(), x);
            assert!(sup_dist(m.flow(t, &u).unwrap().weights(), u.weights()) < 1e-15);
        }
    }

    #[test]
    fn flow_is_a_semigroup() {
        let mut rng = RandomSource::new(3, 0).rng();
        for _ in 0..30 {
            let g = random_generator(5, 3.0, 0.2, &mut rng);
            let h = random_observation(5, 2, &mut rng);
            let m = Model::new(g, h).unwrap();
            let x = random_face_point(&m, Label(1), &mut rng);
            let s = rng.uniform() * 3.0;
            let t = rng.uniform() * 3.0;
            let a = m.flow(t, &m.flow(s, &x).unwrap()).unwrap();
            let b = m.flow(t + s, &x).unwrap();
            assert!(sup_dist(a.weights(), b.weights()) < 1e-9);
            assert!((b.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rk4_tracks_closed_form() {
        let mut rng = RandomSource::new(4, 0).rng();
        let g = random_generator(4, 2.0, 0.0, &mut rng);
        let m = Model::new(g, ObservationModel::new(vec![0, 0, 0, 1], 2).unwrap()).unwrap();
        let x = random_face_point(&m, Label(0), &mut rng);
        let a = m.flow(2.0, &x).unwrap();
        let b = m.flow_ode(2.0, &x, 1e-3).unwrap();
        assert!(sup_dist(a.weights(), b.weights()) < 1e-9);
        let raw = m.integrate_field(2.0, &x, 1e-3);
        assert!((raw.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        assert_eq!(m.flow_ode(0.0, &x, 1e-3).unwrap(), x);
    }

    #[test]
    fn injective_filter_is_one_hot() {
        let g = symmetric_pair();
        let m = Model::new(g, ObservationModel::injective(2)).unwrap();
        let mu = Distribution::new(vec![0.3, 0.7]).unwrap();
        for r in 0..20 {
            let x = m.sample_chain(&mu, 5.0, &RandomSource::new(8, r));
            let y = m.observe(&x);
            let traj = m.run_filter(&y, &mu).unwrap();
            for k in 0..50 {
                let t = k as f64 * 0.1;
                let pi = traj.evaluate(&m, t);
                assert_eq!(pi.weights()[x.value_at(t)], 1.0);
            }
        }
    }

    #[test]
    fn constant_observation_gives_forward_equation() {
        let mut rng = RandomSource::new(6, 0).rng();
        let g = random_generator(4, 2.0, 0.0, &mut rng);
        let m = Model::new(g.clone(), ObservationModel::constant(4)).unwrap();
        let mu = Distribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let obs = PiecewisePath::constant(Label(0), 5.0);
        let traj = m.run_filter(&obs, &mu).unwrap();
        for &t in &[0.0, 0.5, 2.0, 4.9] {
            let expected = g.transition_semigroup(t).unwrap().left_mul(mu.weights());
            assert!(sup_dist(traj.evaluate(&m, t).weights(), &expected) < 1e-12);
        }
    }

    #[test]
    fn cycle_filter_single_jump() {
        let m = cycle_model();
        let obs = PiecewisePath {
            initial: Label(1),
            jumps: vec![(0.8, Label(0))],
            horizon: 2.0,
        };
        let traj = m.run_filter(&obs, &Distribution::dirac(4, 0)).unwrap();
        assert_eq!(traj.evaluate(&m, 0.5).weights(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(traj.jumps[0].pre.weights(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(traj.evaluate(&m, 0.8).weights(), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(traj.label_at(1.5), Label(0));
    }

    #[test]
    fn inconsistent_observation_is_degenerate() {
        // From delta_1 the chain can only move to state 2; a jump straight
        // into a label whose face is unreachable is rejected.
        let g = RateMatrix::from_rows(&[[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0], [1.0, 0.0, -1.0]]).unwrap();
        let m = Model::new(g, ObservationModel::injective(3)).unwrap();
        let obs = PiecewisePath {
            initial: Label(0),
            jumps: vec![(0.5, Label(2))],
            horizon: 1.0,
        };
        let err = m.run_filter(&obs, &Distribution::dirac(3, 0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateJump { .. }));
    }

    #[test]
    fn discrete_filter_basics() {
        let m = Model::new(symmetric_pair(), ObservationModel::injective(2)).unwrap();
        let mu = Distribution::uniform(2);
        let out = m
            .discrete_filter(&mu, 0.1, &[Label(0), Label(1), Label(1), Label(0)])
            .unwrap();
        let states: Vec<f64> = out.iter().map(|p| p.weights()[0]).collect();
        assert_eq!(states, vec![1.0, 0.0, 0.0, 1.0]);

        let cm = cycle_model();
        let single = cm.discrete_filter(&mu_of(&[0.4, 0.1, 0.3, 0.2]), 0.1, &[Label(1)]).unwrap();
        let expected = cm.restrict_normalize(&[0.4, 0.1, 0.3, 0.2], Label(1)).unwrap().point;
        assert_eq!(single, vec![expected]);
        assert!(cm.discrete_filter(&mu, 0.1, &[]).is_err());
    }

    fn mu_of(w: &[f64]) -> Distribution {
        Distribution::new(w.to_vec()).unwrap()
    }

    #[test]
    fn predict_examples() {
        let m = cycle_model();
        let x = FacePoint::vertex(m.observation(), 2);
        assert_eq!(m.predict(&x, 0.0).unwrap().weights(), x.weights());
        let p = m.generator().transition_semigroup(1.3).unwrap();
        let pred = m.predict(&x, 1.3).unwrap();
        assert!(sup_dist(pred.weights(), p.row(2)) < 1e-15);
    }

    #[test]
    fn trajectory_segment_lookup() {
        let m = cycle_model();
        let obs = PiecewisePath {
            initial: Label(1),
            jumps: vec![(0.5, Label(0)), (1.5, Label(1))],
            horizon: 3.0,
        };
        let traj = m.run_filter(&obs, &Distribution::uniform(4)).unwrap();
        assert_eq!(traj.segment_index(0.0), 0);
        assert_eq!(traj.segment_index(0.5), 1);
        assert_eq!(traj.segment_index(2.9), 2);
        assert_eq!(traj.segment_end(1), 1.5);
        assert_eq!(traj.segment_end(2), 3.0);
    }
}
