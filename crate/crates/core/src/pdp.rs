//! The filter as a piecewise-deterministic Markov process.
//!
//! Characteristics on the effective simplex:
//!
//! * flow `phi`: [`Model::flow`];
//! * jump rate `lambda(nu) = -nu Lambda 1_{h^{-1}(a)}`;
//! * transition measure `Q(nu, .)` with atoms `H_b[nu Lambda]` of mass
//!   `q(nu, b) = nu Lambda 1_{h^{-1}(b)} / lambda(nu)` for `b != a`.
//!
//! The sojourn survival `exp(-int_0^t lambda(phi(s, nu)) ds)` equals the mass
//! of the unnormalized flow `nu_A e^{t Lambda_A} 1`, which is how it is
//! evaluated here; [`Model::sojourn_survival_quadrature`] integrates the rate
//! along the flow instead.

use alloc::vec;
use alloc::vec::Vec;

use crate::chain::{Label, Model, RateMatrix};
use crate::error::{Error, Result};
use crate::filter::{FacePoint, FilterTrajectory, Segment, JumpRecord};
use crate::quad::simpson;
use crate::rng::{RandomSource, Rng};
use crate::DEG_TOL;

/// PDP sample paths have the same shape as filter trajectories.
pub type PdpTrajectory = FilterTrajectory;

/// Bisection iteration cap for inverse-transform sampling.
const BISECTION_MAX_ITER: usize = 80;
/// Time resolution of inverse-transform sampling.
const BISECTION_TIME_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct JumpAtom {
    pub target: FacePoint,
    pub mass: f64,
}

/// `Q(nu, .)`: a finitely supported law on faces other than `nu`'s.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpLaw {
    pub source: FacePoint,
    pub atoms: Vec<JumpAtom>,
    /// The rate was below [`DEG_TOL`] and the fallback law (uniform over the
    /// other labels) was used.
    pub degenerate: bool,
}

impl JumpLaw {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn mass_of(&self, label: Label) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.target.label() == label)
            .map(|a| a.mass)
            .sum()
    }

    pub fn sample(&self, rng: &mut Rng) -> &FacePoint {
        let masses: Vec<f64> = self.atoms.iter().map(|a| a.mass).collect();
        let k = rng.categorical(&masses).unwrap_or(0);
        &self.atoms[k].target
    }
}

/// Outcome of a sojourn draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sojourn {
    At(f64),
    /// No jump before the horizon (includes an identically zero rate).
    Censored,
}

impl Model {
    /// Probability flux `nu Lambda 1_{h^{-1}(b)}` into every label `b`.
    /// Entries for `b != a` are nonnegative sums of off-diagonal rates.
    pub fn label_flux(&self, nu: &FacePoint) -> Vec<f64> {
        let v = self.generator().matrix().left_mul(nu.weights());
        let mut flux = vec![0.0; self.n_labels()];
        for (state, x) in v.into_iter().enumerate() {
            flux[self.observation().label_of(state).0] += x;
        }
        flux
    }

    /// `lambda(nu) = -nu Lambda 1_{h^{-1}(a)}`.
    ///
    /// Evaluated as the total flux out of the face, `sum_{i in A, j notin A}
    /// nu_i lambda_ij`, which is the same number because `Lambda 1 = 0` and
    /// is nonnegative without rounding.
    pub fn jump_rate(&self, nu: &FacePoint) -> f64 {
        let face = self.face(nu.label());
        let g = self.generator();
        let mut rate = 0.0;
        for &i in face {
            let w = nu.weights()[i];
            if w == 0.0 {
                continue;
            }
            for j in 0..self.n_states() {
                if self.observation().label_of(j) != nu.label() {
                    rate += w * g.rate(i, j);
                }
            }
        }
        rate
    }

    /// `q(nu, b)`; falls back to uniform over the other labels when the
    /// jump rate vanishes.
    pub fn jump_probability(&self, nu: &FacePoint, b: Label) -> f64 {
        if b == nu.label() {
            return 0.0;
        }
        let rate = self.jump_rate(nu);
        if rate < DEG_TOL {
            return 1.0 / (self.n_labels() - 1) as f64;
        }
        self.label_flux(nu)[b.0] / rate
    }

    /// The transition measure `Q(nu, .)`.
    pub fn jump_measure(&self, nu: &FacePoint) -> Result<JumpLaw> {
        if self.n_labels() < 2 {
            return Err(Error::TrivialObservation);
        }
        let v = self.generator().matrix().left_mul(nu.weights());
        let rate = self.jump_rate(nu);
        let flux = self.label_flux(nu);
        let degenerate = rate < DEG_TOL;
        let others = (self.n_labels() - 1) as f64;
        let mut atoms = Vec::with_capacity(self.n_labels() - 1);
        for b in self.observation().labels() {
            if b == nu.label() {
                continue;
            }
            let mass = if degenerate { 1.0 / others } else { flux[b.0] / rate };
            let target = self.restrict_normalize(&v, b)?.point;
            atoms.push(JumpAtom { target, mass });
        }
        Ok(JumpLaw {
            source: nu.clone(),
            atoms,
            degenerate,
        })
    }

    /// `P(S > t)` for the sojourn started at `nu`, as `nu_A e^{t Lambda_A} 1`.
    pub fn sojourn_survival(&self, nu: &FacePoint, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        self.unnormalized_flow(t, nu)
            .iter()
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// `exp(-int_0^t lambda(phi(s, nu)) ds)` by composite Simpson.
    pub fn sojourn_survival_quadrature(&self, nu: &FacePoint, t: f64, panels: usize) -> f64 {
        let integral = simpson(
            |s| {
                let y = self.flow(s, nu).expect("flow stays on the face");
                self.jump_rate(&y)
            },
            0.0,
            t,
            panels,
        );
        libm::exp(-integral)
    }

    /// Density of the next jump time at `t` jointly with landing in label
    /// `b`: `S(t, nu) q(phi(t, nu), b) lambda(phi(t, nu))`, which reduces to
    /// `nu_A e^{t Lambda_A} Lambda_{A, h^{-1}(b)} 1`.
    pub fn jump_time_density(&self, nu: &FacePoint, t: f64, b: Label) -> Result<f64> {
        if b == nu.label() {
            return Err(Error::LabelEqualsSource);
        }
        if b.0 >= self.n_labels() {
            return Err(Error::LabelOutOfRange { label: b.0 });
        }
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter("time must be >= 0"));
        }
        let u = self.unnormalized_flow(t, nu);
        let g = self.generator();
        let target = self.face(b);
        let mut d = 0.0;
        for (&i, &ui) in self.face(nu.label()).iter().zip(&u) {
            for &j in target {
                d += ui * g.rate(i, j);
            }
        }
        Ok(d.max(0.0))
    }

    /// `P(T_1 <= horizon, Y_{T_1} = b)`: the jump-time density integrated
    /// over `[0, horizon]` by composite Simpson.
    pub fn jump_target_probability(&self, nu: &FacePoint, b: Label, horizon: f64, panels: usize) -> Result<f64> {
        self.jump_time_density(nu, 0.0, b)?;
        Ok(simpson(
            |t| self.jump_time_density(nu, t, b).expect("arguments checked"),
            0.0,
            horizon,
            panels,
        ))
    }

    /// Inverse-transform sojourn for a given uniform `u`: the smallest `t`
    /// with `S(t) <= u`, resolved by bisection on `[0, horizon]`.
    pub fn sojourn_from_uniform(&self, nu: &FacePoint, horizon: f64, u: f64) -> Sojourn {
        if self.sojourn_survival(nu, horizon) > u {
            return Sojourn::Censored;
        }
        let (mut lo, mut hi) = (0.0, horizon);
        for _ in 0..BISECTION_MAX_ITER {
            if hi - lo <= BISECTION_TIME_TOL {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.sojourn_survival(nu, mid) > u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Sojourn::At(hi)
    }

    pub fn sample_sojourn(&self, nu: &FacePoint, horizon: f64, rng: &mut Rng) -> Sojourn {
        let u = rng.uniform_open0();
        self.sojourn_from_uniform(nu, horizon, u)
    }

    /// Simulates the PDP `(phi, lambda, Q)` from `nu0` on `[0, horizon]`.
    pub fn simulate_pdp(&self, nu0: &FacePoint, horizon: f64, source: &RandomSource) -> Result<PdpTrajectory> {
        self.simulate_pdp_with(nu0, horizon, &mut source.rng())
    }

    pub fn simulate_pdp_with(&self, nu0: &FacePoint, horizon: f64, rng: &mut Rng) -> Result<PdpTrajectory> {
        self.simulate_pdp_until(nu0, horizon, usize::MAX, rng)
    }

    /// First jump of the PDP from `nu0`, if it happens before `horizon`.
    /// Draws the same randomness as the start of [`Model::simulate_pdp`].
    pub fn first_pdp_jump(&self, nu0: &FacePoint, horizon: f64, source: &RandomSource) -> Result<Option<JumpRecord>> {
        let traj = self.simulate_pdp_until(nu0, horizon, 1, &mut source.rng())?;
        Ok(traj.jumps.into_iter().next())
    }

    fn simulate_pdp_until(&self, nu0: &FacePoint, horizon: f64, max_jumps: usize, rng: &mut Rng) -> Result<PdpTrajectory> {
        if self.n_labels() < 2 {
            return Err(Error::TrivialObservation);
        }
        if !(horizon > 0.0) {
            return Err(Error::InvalidParameter("horizon must be positive"));
        }
        let mut segments = vec![Segment {
            start_time: 0.0,
            start: nu0.clone(),
        }];
        let mut jumps = Vec::new();
        let mut now = 0.0;
        while jumps.len() < max_jumps {
            let start = &segments.last().expect("nonempty").start;
            let s = match self.sample_sojourn(start, horizon - now, rng) {
                Sojourn::Censored => break,
                Sojourn::At(s) => s,
            };
            let time = now + s;
            if !(time < horizon) || !(time > now) {
                break;
            }
            let pre = self.flow(s, start)?;
            let law = self.jump_measure(&pre)?;
            let post = law.sample(rng).clone();
            segments.push(Segment {
                start_time: time,
                start: post.clone(),
            });
            jumps.push(JumpRecord { time, pre, post });
            now = time;
        }
        Ok(FilterTrajectory {
            segments,
            jumps,
            horizon,
            degenerate_start: false,
        })
    }
}

/// Exit-time survival `P_i(tau_A > t)` through the nonlinear normalized
/// system on `A`:
///
/// ```text
/// y'(j) = sum_{k in A} y(k) lambda_kj - (sum_{k,h in A} y(k) lambda_kh) y(j),  y(0) = delta_i
/// P_i(tau > t) = exp( int_0^t sum_{k,h in A} y(s,k) lambda_kh ds )
/// ```
///
/// integrated by RK4 together with the exponent.
pub fn exit_survival_nonlinear(generator: &RateMatrix, subset: &[usize], state: usize, t: f64) -> Result<f64> {
    Ok(exit_survival_curve(generator, subset, state, &[t])?[0])
}

/// [`exit_survival_nonlinear`] on a nondecreasing list of times, integrating
/// once along the list.
pub fn exit_survival_curve(generator: &RateMatrix, subset: &[usize], state: usize, times: &[f64]) -> Result<Vec<f64>> {
    let sub = generator.sub_generator(subset)?;
    let pos = subset
        .iter()
        .position(|&s| s == state)
        .ok_or(Error::StateNotInSubset { state })?;
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidParameter("times must be finite and >= 0"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("times must be nondecreasing"));
    }
    let k = subset.len();
    let max_rate = (0..k).map(|p| -sub[(p, p)]).fold(1.0, f64::max);
    let h_max = (1e-3f64).min(0.05 / max_rate);

    // State: y on A followed by the accumulated exponent.
    let rhs = |z: &[f64], out: &mut [f64]| {
        let y = &z[..k];
        let y_sub = sub.left_mul(y);
        let outflow: f64 = y_sub.iter().sum();
        for j in 0..k {
            out[j] = y_sub[j] - outflow * y[j];
        }
        out[k] = outflow;
    };
    let mut z = vec![0.0; k + 1];
    z[pos] = 1.0;
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; k + 1], vec![0.0; k + 1], vec![0.0; k + 1], vec![0.0; k + 1]);
    let mut tmp = vec![0.0; k + 1];
    for &t in times {
        let span = t - now;
        if span > 0.0 {
            let n = libm::ceil(span / h_max).max(1.0) as usize;
            let h = span / n as f64;
            for _ in 0..n {
                rhs(&z, &mut k1);
                for j in 0..=k {
                    tmp[j] = z[j] + 0.5 * h * k1[j];
                }
                rhs(&tmp, &mut k2);
                for j in 0..=k {
                    tmp[j] = z[j] + 0.5 * h * k2[j];
                }
                rhs(&tmp, &mut k3);
                for j in 0..=k {
                    tmp[j] = z[j] + h * k3[j];
                }
                rhs(&tmp, &mut k4);
                for j in 0..=k {
                    z[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                }
            }
            now = t;
        }
        out.push(libm::exp(z[k]).clamp(0.0, 1.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::fixtures::*;
    use crate::chain::{Distribution, ObservationModel};
    use crate::linalg::{sup_dist, Matrix};

    fn random_point(model: &Model, label: Label, rng: &mut Rng) -> FacePoint {
        let coords: Vec<f64> = model.face(label).iter().map(|_| rng.uniform_open0()).collect();
        FacePoint::from_face_coords(model.observation(), label, &coords)
    }

    fn random_model(rng: &mut Rng, n: usize, labels: usize) -> Model {
        let g = random_generator(n, 3.0, 0.3, rng);
        let h = random_observation(n, labels, rng);
        Model::new(g, h).unwrap()
    }

    #[test]
    fn cycle_jump_rates() {
        let m = cycle_model();
        let v = FacePoint::vertex(m.observation(), 0);
        assert_eq!(m.jump_rate(&v), 1.0);
        let u = FacePoint::barycenter(m.observation(), Label(1));
        assert_eq!(m.jump_rate(&u), 1.0);
    }

    #[test]
    fn zero_generator_has_zero_rate() {
        let g = RateMatrix::new(Matrix::zeros(3, 3)).unwrap();
        let m = Model::new(g, ObservationModel::new(vec![0, 1, 1], 2).unwrap()).unwrap();
        let u = FacePoint::barycenter(m.observation(), Label(1));
        assert_eq!(m.jump_rate(&u), 0.0);
        let law = m.jump_measure(&u).unwrap();
        assert!(law.degenerate);
        assert_eq!(law.total_mass(), 1.0);
        let mut rng = RandomSource::new(1, 0).rng();
        assert_eq!(m.sample_sojourn(&u, 10.0, &mut rng), Sojourn::Censored);
        let traj = m.simulate_pdp(&u, 10.0, &RandomSource::new(1, 1)).unwrap();
        assert!(traj.jumps.is_empty());
    }

    #[test]
    fn rate_matches_definition() {
        let mut rng = RandomSource::new(12, 0).rng();
        for _ in 0..100 {
            let m = random_model(&mut rng, 5, 3);
            let a = Label((rng.uniform() * 3.0) as usize);
            let nu = random_point(&m, a, &mut rng);
            let direct = -m.label_flux(&nu)[a.0];
            assert!((m.jump_rate(&nu) - direct).abs() < 1e-12);
            assert!(m.jump_rate(&nu) >= 0.0);
        }
    }

    #[test]
    fn cycle_jump_measure_is_single_atom() {
        let m = cycle_model();
        let law = m.jump_measure(&FacePoint::vertex(m.observation(), 0)).unwrap();
        assert_eq!(law.atoms.len(), 1);
        assert_eq!(law.atoms[0].mass, 1.0);
        assert_eq!(law.atoms[0].target.weights(), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn jump_masses_and_cancellation_identity() {
        let mut rng = RandomSource::new(13, 0).rng();
        for _ in 0..100 {
            let m = random_model(&mut rng, 6, 3);
            let a = Label((rng.uniform() * 3.0) as usize);
            let nu = random_point(&m, a, &mut rng);
            let rate = m.jump_rate(&nu);
            if rate <= DEG_TOL {
                continue;
            }
            let law = m.jump_measure(&nu).unwrap();
            assert!((law.total_mass() - 1.0).abs() < 1e-10);
            let flux = m.label_flux(&nu);
            for atom in &law.atoms {
                assert_ne!(atom.target.label(), a);
                let b = atom.target.label();
                assert!((rate * atom.mass - flux[b.0]).abs() < 1e-12);
                assert!((m.jump_probability(&nu, b) - atom.mass).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cycle_sojourn_is_unit_exponential() {
        let m = cycle_model();
        let v = FacePoint::vertex(m.observation(), 0);
        assert_eq!(m.sojourn_survival(&v, 0.0), 1.0);
        for &t in &[0.2, 1.0, 3.0] {
            assert!((m.sojourn_survival(&v, t) - libm::exp(-t)).abs() < 1e-14);
            let oracle = m.generator().exit_survival_oracle(&[0, 2], 0, t).unwrap();
            assert!((m.sojourn_survival(&v, t) - oracle).abs() < 1e-14);
            assert!((m.jump_time_density(&v, t, Label(0)).unwrap() - libm::exp(-t)).abs() < 1e-14);
        }
    }

    #[test]
    fn survival_closed_form_matches_quadrature() {
        let mut rng = RandomSource::new(14, 0).rng();
        for _ in 0..100 {
            let m = random_model(&mut rng, 5, 2);
            let nu = random_point(&m, Label(0), &mut rng);
            let t = rng.uniform() * 3.0;
            let a = m.sojourn_survival(&nu, t);
            let b = m.sojourn_survival_quadrature(&nu, t, 200);
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn density_rejects_own_label() {
        let m = cycle_model();
        let v = FacePoint::vertex(m.observation(), 0);
        assert_eq!(m.jump_time_density(&v, 1.0, Label(1)), Err(Error::LabelEqualsSource));
    }

    #[test]
    fn density_integrates_to_jump_probability() {
        let mut rng = RandomSource::new(15, 0).rng();
        for _ in 0..10 {
            let m = random_model(&mut rng, 5, 3);
            let nu = random_point(&m, Label(2), &mut rng);
            let mut total = 0.0;
            for b in [Label(0), Label(1)] {
                total += m.jump_target_probability(&nu, b, 10.0, 2000).unwrap();
            }
            total += m.sojourn_survival(&nu, 10.0);
            assert!((total - 1.0).abs() < 1e-6, "total {total}");
        }
    }

    #[test]
    fn unreachable_label_has_zero_density() {
        // Face {0, 1} only feeds label of state 2; state 3's label gets nothing.
        let g = RateMatrix::from_rows(&[
            [-1.0, 0.5, 0.5, 0.0],
            [0.2, -0.7, 0.5, 0.0],
            [0.0, 0.0, -1.0, 1.0],
            [1.0, 0.0, 0.0, -1.0],
        ])
        .unwrap();
        let m = Model::new(g, ObservationModel::new(vec![0, 0, 1, 2], 3).unwrap()).unwrap();
        let nu = FacePoint::barycenter(m.observation(), Label(0));
        for &t in &[0.0, 0.5, 2.0] {
            assert_eq!(m.jump_time_density(&nu, t, Label(2)).unwrap(), 0.0);
        }
    }

    #[test]
    fn sojourn_inverse_is_monotone() {
        let mut rng = RandomSource::new(16, 0).rng();
        let m = random_model(&mut rng, 4, 2);
        let nu = random_point(&m, Label(0), &mut rng);
        let mut last = f64::INFINITY;
        for k in 1..20 {
            let u = k as f64 / 20.0;
            if let Sojourn::At(t) = m.sojourn_from_uniform(&nu, 50.0, u) {
                assert!(t <= last);
                assert!((m.sojourn_survival(&nu, t) - u).abs() < 1e-8);
                last = t;
            }
        }
    }

    #[test]
    fn cycle_sojourn_sample_mean() {
        let m = cycle_model();
        let v = FacePoint::vertex(m.observation(), 0);
        let n = 100_000u64;
        let (mut s, mut s2) = (0.0, 0.0);
        for r in 0..n {
            let mut rng = RandomSource::new(17, r).rng();
            let t = match m.sample_sojourn(&v, 40.0, &mut rng) {
                Sojourn::At(t) => t,
                Sojourn::Censored => 40.0,
            };
            s += t;
            s2 += t * t;
        }
        let n = n as f64;
        let mean = s / n;
        let se = libm::sqrt((s2 / n - mean * mean) / n);
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn pdp_first_jump_survival() {
        let mut rng = RandomSource::new(18, 0).rng();
        let m = random_model(&mut rng, 4, 2);
        let nu = FacePoint::barycenter(m.observation(), Label(0));
        let n = 20_000u64;
        let mut firsts: Vec<f64> = (0..n)
            .map(|r| {
                let traj = m.simulate_pdp(&nu, 5.0, &RandomSource::new(19, r)).unwrap();
                traj.first_jump().map_or(f64::INFINITY, |j| j.0)
            })
            .collect();
        firsts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut worst = 0.0f64;
        for k in 0..=50 {
            let t = 0.1 * k as f64;
            let survived = firsts.len() - firsts.partition_point(|&x| x <= t);
            let emp = survived as f64 / n as f64;
            worst = worst.max((emp - m.sojourn_survival(&nu, t)).abs());
        }
        assert!(worst < 0.015, "sup deviation {worst}");
    }

    #[test]
    fn pdp_trajectories_are_consistent() {
        let mut rng = RandomSource::new(20, 0).rng();
        let m = random_model(&mut rng, 5, 3);
        let nu = FacePoint::barycenter(m.observation(), Label(1));
        for r in 0..50 {
            let traj = m.simulate_pdp(&nu, 4.0, &RandomSource::new(21, r)).unwrap();
            for (k, j) in traj.jumps.iter().enumerate() {
                assert_ne!(j.pre.label(), j.post.label());
                let seg = &traj.segments[k];
                let recomputed = m.flow(j.time - seg.start_time, &seg.start).unwrap();
                assert!(sup_dist(recomputed.weights(), j.pre.weights()) < 1e-12);
            }
        }
    }

    #[test]
    fn pdp_requires_two_labels() {
        let m = Model::new(symmetric_pair(), ObservationModel::constant(2)).unwrap();
        let nu = FacePoint::barycenter(m.observation(), Label(0));
        assert_eq!(
            m.simulate_pdp(&nu, 1.0, &RandomSource::new(0, 0)),
            Err(Error::TrivialObservation)
        );
    }

    #[test]
    fn nonlinear_exit_matches_cycle_closed_form() {
        let g = cycle_model().generator().clone();
        assert_eq!(exit_survival_nonlinear(&g, &[0, 2], 0, 0.0).unwrap(), 1.0);
        let s = exit_survival_nonlinear(&g, &[0, 2], 0, 1.0).unwrap();
        assert!((s - libm::exp(-1.0)).abs() < 1e-6);
        assert_eq!(
            exit_survival_nonlinear(&g, &[0, 2], 3, 1.0),
            Err(Error::StateNotInSubset { state: 3 })
        );
    }

    #[test]
    fn nonlinear_exit_matches_oracle_on_random_models() {
        let mut rng = RandomSource::new(22, 0).rng();
        for _ in 0..10 {
            let g = random_generator(5, 4.0, 0.2, &mut rng);
            let subset = [0usize, 2, 3];
            let times: Vec<f64> = (0..=50).map(|k| 0.1 * k as f64).collect();
            let curve = exit_survival_curve(&g, &subset, 2, &times).unwrap();
            for (t, s) in times.iter().zip(&curve) {
                let o = g.exit_survival_oracle(&subset, 2, *t).unwrap();
                assert!((s - o).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn pdp_matches_chain_on_first_jump() {
        // Smoke version of the law-equivalence check: mean first jump time.
        let m = cycle_model();
        let mu = Distribution::dirac(4, 0);
        let nu = FacePoint::vertex(m.observation(), 0);
        let n = 5_000u64;
        let mut a = 0.0;
        let mut b = 0.0;
        for r in 0..n {
            let x = m.sample_chain(&mu, 30.0, &RandomSource::new(23, r));
            a += m.observe(&x).first_jump().map_or(30.0, |j| j.0);
            let p = m.simulate_pdp(&nu, 30.0, &RandomSource::new(24, r)).unwrap();
            b += p.first_jump().map_or(30.0, |j| j.0);
        }
        let n = n as f64;
        // Both Exp(1): difference of means has sd sqrt(2/n).
        assert!(((a - b) / n).abs() < 4.0 * libm::sqrt(2.0 / n));
    }

    #[test]
    fn first_jump_matches_full_simulation() {
        let m = cycle_model();
        let nu = FacePoint::barycenter(m.observation(), Label(1));
        for r in 0..20 {
            let src = RandomSource::new(3, r);
            let full = m.simulate_pdp(&nu, 4.0, &src).unwrap();
            assert_eq!(m.first_pdp_jump(&nu, 4.0, &src).unwrap(), full.jumps.first().cloned());
        }
    }
}
