#![allow(dead_code)]

use pdfilter_core::rng::Rng;
use pdfilter_core::{FacePoint, Label, Matrix, Model, ObservationModel, RateMatrix};

/// Four-state unit-rate cycle observed as `h = (1, 0, 1, 0)`.
pub fn cycle_model() -> Model {
    let g = RateMatrix::from_rows(&[
        [-1.0, 1.0, 0.0, 0.0],
        [0.0, -1.0, 1.0, 0.0],
        [0.0, 0.0, -1.0, 1.0],
        [1.0, 0.0, 0.0, -1.0],
    ])
    .unwrap();
    Model::new(g, ObservationModel::new(vec![1, 0, 1, 0], 2).unwrap()).unwrap()
}

pub fn random_generator(n: usize, max_rate: f64, rng: &mut Rng) -> RateMatrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        let mut sum = 0.0;
        for j in 0..n {
            if i != j && rng.uniform() < 0.7 {
                let r = rng.uniform() * max_rate;
                m[(i, j)] = r;
                sum += r;
            }
        }
        m[(i, i)] = -sum;
    }
    RateMatrix::new(m).unwrap()
}

pub fn random_model(n: usize, n_labels: usize, rng: &mut Rng) -> Model {
    let mut assignment: Vec<usize> = (0..n).map(|i| i % n_labels).collect();
    for i in (1..n).rev() {
        let j = (rng.uniform() * (i + 1) as f64) as usize;
        assignment.swap(i, j);
    }
    let obs = ObservationModel::new(assignment, n_labels).unwrap();
    Model::new(random_generator(n, 2.0, rng), obs).unwrap()
}

pub fn random_face_point(model: &Model, rng: &mut Rng) -> FacePoint {
    let label = Label((rng.uniform() * model.n_labels() as f64) as usize);
    let mut w = vec![0.0; model.n_states()];
    for &i in model.face(label) {
        w[i] = -rng.uniform_open0().ln();
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    FacePoint::new(model.observation(), label, w).unwrap()
}

/// Transient law by uniformization: `x e^{tQ} = sum_k Poisson(k; qt) x P^k`
/// with `P = I + Q/q`. Independent of the scaling-and-squaring exponential.
pub fn uniformized(q: &Matrix, x: &[f64], t: f64) -> Vec<f64> {
    let n = x.len();
    let rate = (0..n).map(|i| -q[(i, i)]).fold(0.0, f64::max).max(1e-300);
    let mut p = q.scaled(1.0 / rate);
    for i in 0..n {
        p[(i, i)] += 1.0;
    }
    let lt = rate * t;
    let mut term = x.to_vec();
    let mut weight = (-lt).exp();
    let mut out: Vec<f64> = term.iter().map(|v| v * weight).collect();
    let kmax = (lt + 12.0 * lt.sqrt() + 40.0) as usize;
    for k in 1..=kmax {
        term = p.left_mul(&term);
        weight *= lt / k as f64;
        for i in 0..n {
            out[i] += weight * term[i];
        }
    }
    out
}
