//! The hidden chain `X`, its noise-free observation `Y = h(X)`, and the
//! matrix-exponential utilities built on the generator.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::rng::{RandomSource, Rng};

/// Absolute tolerance on generator row sums.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Absolute tolerance on distribution mass.
pub const MASS_TOL: f64 = 1e-10;

/// Index of an observation label in `0..n_labels`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub usize);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A validated Q-matrix: nonnegative off-diagonal rates, zero row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    matrix: Matrix,
}

impl RateMatrix {
    /// Validates `m` as a generator.
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let n = m.rows();
        if n == 0 {
            return Err(Error::EmptySubset);
        }
        for i in 0..n {
            for j in 0..n {
                if !m[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if i != j && m[(i, j)] < 0.0 {
                    return Err(Error::NegativeOffDiagonal { row: i, col: j });
                }
            }
            let sum: f64 = m.row(i).iter().sum();
            if sum.abs() > ROW_SUM_TOL {
                return Err(Error::RowSumNonzero { row: i, sum });
            }
        }
        Ok(Self { matrix: m })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// Total exit rate `-lambda_ii` of state `i`.
    pub fn exit_rate(&self, i: usize) -> f64 {
        -self.matrix[(i, i)]
    }

    pub fn max_exit_rate(&self) -> f64 {
        (0..self.n()).map(|i| self.exit_rate(i)).fold(0.0, f64::max)
    }

    /// `e^{t Lambda}`. Entries are nonnegative by construction of
    /// [`Matrix::expm`]; rows sum to one up to rounding.
    pub fn transition_semigroup(&self, t: f64) -> Result<Matrix> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter("time must be finite and >= 0"));
        }
        if t == 0.0 {
            return Ok(Matrix::identity(self.n()));
        }
        Ok(self.matrix.scaled(t).expm())
    }

    /// Restriction `Lambda_A` to the rows and columns in `subset`.
    pub fn sub_generator(&self, subset: &[usize]) -> Result<Matrix> {
        check_subset(self.n(), subset)?;
        Ok(self.matrix.principal_submatrix(subset))
    }

    /// `P_i(tau_A > t) = (delta_i e^{t Lambda_A}) 1`, the classical
    /// sub-generator formula for the first exit time from `subset`.
    pub fn exit_survival_oracle(&self, subset: &[usize], state: usize, t: f64) -> Result<f64> {
        let sub = self.sub_generator(subset)?;
        let pos = subset
            .iter()
            .position(|&s| s == state)
            .ok_or(Error::StateNotInSubset { state })?;
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter("time must be >= 0"));
        }
        let e = sub.scaled(t).expm();
        Ok(e.row(pos).iter().sum::<f64>().clamp(0.0, 1.0))
    }

    /// Draws a state path on `[0, horizon]` started from `initial`.
    pub fn sample_path(&self, initial: &Distribution, horizon: f64, rng: &mut Rng) -> PiecewisePath<usize> {
        let start = rng
            .categorical(initial.weights())
            .expect("distribution has positive mass");
        let mut path = PiecewisePath::constant(start, horizon);
        let mut t = 0.0;
        let mut state = start;
        loop {
            let rate = self.exit_rate(state);
            // States with zero exit rate are absorbing: the holding time is
            // infinite and the path is censored at the horizon.
            t += rng.exponential(rate);
            if !(t < horizon) {
                break;
            }
            let row = self.matrix.row(state);
            let weights: Vec<f64> = row
                .iter()
                .enumerate()
                .map(|(j, &r)| if j == state { 0.0 } else { r })
                .collect();
            let next = rng.categorical(&weights).expect("positive exit rate");
            path.jumps.push((t, next));
            state = next;
        }
        path
    }
}

fn check_subset(n: usize, subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    for (k, &s) in subset.iter().enumerate() {
        if s >= n {
            return Err(Error::StateOutOfRange { state: s });
        }
        if subset[..k].contains(&s) {
            return Err(Error::InvalidParameter("subset contains duplicates"));
        }
    }
    Ok(())
}

/// The observation map `h: I -> O` with its level sets.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationModel {
    assignment: Vec<Label>,
    level_sets: Vec<Vec<usize>>,
}

impl ObservationModel {
    /// `assignment[i]` is `h(i)`; every label in `0..n_labels` must be hit.
    pub fn new(assignment: Vec<usize>, n_labels: usize) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut level_sets = vec![Vec::new(); n_labels];
        for (state, &label) in assignment.iter().enumerate() {
            if label >= n_labels {
                return Err(Error::LabelOutOfRange { label });
            }
            level_sets[label].push(state);
        }
        if let Some(label) = level_sets.iter().position(|s| s.is_empty()) {
            return Err(Error::NotSurjective { label });
        }
        Ok(Self {
            assignment: assignment.into_iter().map(Label).collect(),
            level_sets,
        })
    }

    /// Each state observed as itself.
    pub fn injective(n: usize) -> Self {
        Self::new((0..n).collect(), n).expect("identity map is surjective")
    }

    /// All states observed as one label.
    pub fn constant(n: usize) -> Self {
        Self::new(vec![0; n], 1).expect("constant map is surjective")
    }

    pub fn n_states(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_labels(&self) -> usize {
        self.level_sets.len()
    }

    pub fn label_of(&self, state: usize) -> Label {
        self.assignment[state]
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.n_labels()).map(Label)
    }

    /// `h^{-1}(a)`, in increasing state order.
    pub fn level_set(&self, label: Label) -> &[usize] {
        &self.level_sets[label.0]
    }

    /// `1_{h^{-1}(a)}` as a column vector.
    pub fn indicator(&self, label: Label) -> Vec<f64> {
        let mut v = vec![0.0; self.n_states()];
        for &i in self.level_set(label) {
            v[i] = 1.0;
        }
        v
    }

    pub fn is_injective(&self) -> bool {
        self.level_sets.iter().all(|s| s.len() == 1)
    }

    /// Maps a state path to its observation path, keeping only the jumps
    /// where the observed label actually changes.
    pub fn observe(&self, path: &PiecewisePath<usize>) -> PiecewisePath<Label> {
        let mut out = PiecewisePath::constant(self.label_of(path.initial), path.horizon);
        let mut current = out.initial;
        for &(t, s) in &path.jumps {
            let label = self.label_of(s);
            if label != current {
                out.jumps.push((t, label));
                current = label;
            }
        }
        out
    }
}

/// A probability vector on the state space (row-vector convention).
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution { reason: "empty" });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution {
                reason: "weights must be finite and nonnegative",
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution {
                reason: "weights must sum to one",
            });
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn dirac(n: usize, state: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[state] = 1.0;
        Self { weights }
    }

    /// Uniform on the given states.
    pub fn uniform_on(n: usize, states: &[usize]) -> Self {
        let mut weights = vec![0.0; n];
        for &s in states {
            weights[s] = 1.0 / states.len() as f64;
        }
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Pairing `mu f` with a function given as a column vector.
    pub fn pair(&self, f: &[f64]) -> f64 {
        dot(&self.weights, f)
    }

    /// Pointwise product `f * mu` (not normalized).
    pub fn pointwise(&self, f: &[f64]) -> Vec<f64> {
        self.weights.iter().zip(f).map(|(m, g)| m * g).collect()
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}

/// A right-continuous path with finitely many jumps on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePath<T> {
    pub initial: T,
    /// `(time, new value)`, strictly increasing times in `(0, horizon)`.
    pub jumps: Vec<(f64, T)>,
    pub horizon: f64,
}

impl<T: Copy + PartialEq> PiecewisePath<T> {
    pub fn constant(value: T, horizon: f64) -> Self {
        Self {
            initial: value,
            jumps: Vec::new(),
            horizon,
        }
    }

    /// Checks the path invariants: increasing times below the horizon and
    /// genuine jumps only.
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) {
            return Err(Error::InvalidPath {
                reason: "horizon must be positive",
            });
        }
        let mut prev_t = 0.0;
        let mut prev_v = self.initial;
        for (k, &(t, v)) in self.jumps.iter().enumerate() {
            if !(t > prev_t || (k == 0 && t > 0.0)) || !(t < self.horizon) {
                return Err(Error::InvalidPath {
                    reason: "jump times must increase strictly inside (0, horizon)",
                });
            }
            if v == prev_v {
                return Err(Error::InvalidPath {
                    reason: "consecutive values must differ",
                });
            }
            prev_t = t;
            prev_v = v;
        }
        Ok(())
    }

    /// Value at time `t` (right-continuous).
    pub fn value_at(&self, t: f64) -> T {
        let k = self.jumps.partition_point(|&(s, _)| s <= t);
        if k == 0 {
            self.initial
        } else {
            self.jumps[k - 1].1
        }
    }

    pub fn jump_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.jumps.iter().map(|&(t, _)| t)
    }

    pub fn first_jump(&self) -> Option<(f64, T)> {
        self.jumps.first().copied()
    }

    /// Number of jumps in `(0, t]`.
    pub fn jumps_until(&self, t: f64) -> usize {
        self.jumps.partition_point(|&(s, _)| s <= t)
    }
}

/// A generator together with its observation map, with the per-label
/// sub-generators cached.
#[derive(Debug, Clone)]
pub struct Model {
    generator: RateMatrix,
    observation: ObservationModel,
    face_generators: Vec<Matrix>,
}

impl Model {
    pub fn new(generator: RateMatrix, observation: ObservationModel) -> Result<Self> {
        if generator.n() != observation.n_states() {
            return Err(Error::DimensionMismatch {
                expected: generator.n(),
                got: observation.n_states(),
            });
        }
        let face_generators = observation
            .labels()
            .map(|a| generator.matrix().principal_submatrix(observation.level_set(a)))
            .collect();
        Ok(Self {
            generator,
            observation,
            face_generators,
        })
    }

    pub fn generator(&self) -> &RateMatrix {
        &self.generator
    }

    pub fn observation(&self) -> &ObservationModel {
        &self.observation
    }

    pub fn n_states(&self) -> usize {
        self.generator.n()
    }

    pub fn n_labels(&self) -> usize {
        self.observation.n_labels()
    }

    pub fn face(&self, label: Label) -> &[usize] {
        self.observation.level_set(label)
    }

    /// `Lambda_A` for `A = h^{-1}(label)`.
    pub fn face_generator(&self, label: Label) -> &Matrix {
        &self.face_generators[label.0]
    }

    pub fn sample_chain(&self, initial: &Distribution, horizon: f64, source: &RandomSource) -> PiecewisePath<usize> {
        self.generator.sample_path(initial, horizon, &mut source.rng())
    }

    pub fn observe(&self, path: &PiecewisePath<usize>) -> PiecewisePath<Label> {
        self.observation.observe(path)
    }
}
