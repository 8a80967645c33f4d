//! Barycentric grids on the faces of the effective simplex and piecewise
//! linear interpolation over their Freudenthal (Kuhn) triangulation.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::chain::{Label, ObservationModel};
use crate::error::{Error, Result};
use crate::filter::FacePoint;

/// Grid points on one face: all compositions of `m` into `|A|` parts, in
/// lexicographic order.
#[derive(Debug, Clone)]
struct FaceLattice {
    states: Vec<usize>,
    offset: usize,
    points: Vec<Vec<u32>>,
}

#[derive(Debug, Clone)]
pub struct FaceGrid {
    resolution: u32,
    n_states: usize,
    faces: Vec<FaceLattice>,
    len: usize,
}

/// Interpolation weights over grid indices; weights are nonnegative and sum
/// to one.
pub type Stencil = Vec<(usize, f64)>;

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn compositions(m: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(rem: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(rem);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=rem {
            prefix.push(v);
            rec(rem - v, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// Lexicographic rank of a composition of `m`.
fn rank(x: &[u32], m: u32) -> usize {
    let k = x.len();
    let mut rem = m as u64;
    let mut r = 0u64;
    for (j, &xj) in x.iter().enumerate().take(k.saturating_sub(1)) {
        let p = (k - j - 1) as u64;
        r += binomial(rem + p, p) - binomial(rem - xj as u64 + p, p);
        rem -= xj as u64;
    }
    r as usize
}

impl FaceGrid {
    /// Grid of resolution `m` on every face of `obs`.
    pub fn new(obs: &ObservationModel, resolution: u32) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::InvalidParameter("grid resolution must be >= 1"));
        }
        let mut faces = Vec::with_capacity(obs.n_labels());
        let mut offset = 0;
        for label in obs.labels() {
            let states = obs.level_set(label).to_vec();
            let points = compositions(resolution, states.len());
            let count = points.len();
            faces.push(FaceLattice {
                states,
                offset,
                points,
            });
            offset += count;
        }
        Ok(Self {
            resolution,
            n_states: obs.n_states(),
            faces,
            len: offset,
        })
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn n_labels(&self) -> usize {
        self.faces.len()
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Global index range of the points on `label`'s face.
    pub fn face_range(&self, label: Label) -> core::ops::Range<usize> {
        let f = &self.faces[label.0];
        f.offset..f.offset + f.points.len()
    }

    pub fn label_of(&self, index: usize) -> Label {
        let k = self.faces.partition_point(|f| f.offset <= index) - 1;
        Label(k)
    }

    /// The grid point with global index `index`.
    pub fn point(&self, index: usize) -> FacePoint {
        let label = self.label_of(index);
        let face = &self.faces[label.0];
        let comp = &face.points[index - face.offset];
        let m = self.resolution as f64;
        let mut weights = vec![0.0; self.n_states];
        for (&s, &c) in face.states.iter().zip(comp) {
            weights[s] = c as f64 / m;
        }
        FacePoint::from_parts(label, weights)
    }

    pub fn points(&self) -> impl Iterator<Item = FacePoint> + '_ {
        (0..self.len).map(|i| self.point(i))
    }

    /// Global index of the vertex `delta_state`.
    pub fn vertex_index(&self, obs: &ObservationModel, state: usize) -> usize {
        let label = obs.label_of(state);
        let face = &self.faces[label.0];
        let pos = face.states.iter().position(|&s| s == state).expect("state on its face");
        let mut comp = vec![0u32; face.states.len()];
        comp[pos] = self.resolution;
        face.offset + rank(&comp, self.resolution)
    }

    /// Interpolation stencil for `weights` on `label`'s face (weights off
    /// the face are ignored).
    pub fn stencil(&self, label: Label, weights: &[f64]) -> Stencil {
        let face = &self.faces[label.0];
        let k = face.states.len();
        if k == 1 {
            return vec![(face.offset, 1.0)];
        }
        let d = k - 1;
        let m = self.resolution;
        let mf = m as f64;
        let total: f64 = face.states.iter().map(|&s| weights[s]).sum();

        // Cumulative coordinates 0 <= y_0 <= ... <= y_{d-1} <= m.
        let mut base = vec![0u32; d];
        let mut frac = vec![0.0f64; d];
        let mut acc = 0.0;
        for j in 0..d {
            acc += weights[face.states[j]] / total * mf;
            let mut y = acc.clamp(0.0, mf);
            let r = libm::round(y);
            if (y - r).abs() < 1e-9 {
                y = r;
            }
            if j > 0 {
                let prev = base[j - 1] as f64 + frac[j - 1];
                y = y.max(prev);
            }
            let b = (libm::floor(y) as u32).min(m - 1);
            base[j] = b;
            frac[j] = y - b as f64;
        }

        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| frac[b].partial_cmp(&frac[a]).unwrap().then(b.cmp(&a)));

        let mut stencil = Vec::with_capacity(k);
        let mut z = base;
        let push = |z: &[u32], w: f64, stencil: &mut Stencil| {
            if w <= 0.0 {
                return;
            }
            let mut comp = Vec::with_capacity(k);
            comp.push(z[0]);
            for j in 1..d {
                comp.push(z[j] - z[j - 1]);
            }
            comp.push(m - z[d - 1]);
            stencil.push((face.offset + rank(&comp, m), w));
        };
        push(&z, 1.0 - frac[order[0]], &mut stencil);
        for r in 0..d {
            z[order[r]] += 1;
            let next = if r + 1 < d { frac[order[r + 1]] } else { 0.0 };
            push(&z, frac[order[r]] - next, &mut stencil);
        }
        stencil
    }

    pub fn locate(&self, point: &FacePoint) -> Stencil {
        self.stencil(point.label(), point.weights())
    }
}

/// Values on a [`FaceGrid`] with piecewise-linear interpolation.
#[derive(Debug, Clone)]
pub struct ValueFunction {
    grid: Arc<FaceGrid>,
    values: Vec<f64>,
}

impl ValueFunction {
    pub fn new(grid: Arc<FaceGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: FnMut(&FacePoint) -> f64>(grid: Arc<FaceGrid>, mut f: F) -> Self {
        let values = grid.points().map(|p| f(&p)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<FaceGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn evaluate(&self, point: &FacePoint) -> f64 {
        apply_stencil(&self.grid.locate(point), &self.values)
    }

    pub fn sup_distance(&self, other: &ValueFunction) -> f64 {
        crate::linalg::sup_dist(&self.values, &other.values)
    }
}

pub(crate) fn apply_stencil(stencil: &[(usize, f64)], values: &[f64]) -> f64 {
    stencil.iter().map(|&(i, w)| w * values[i]).sum()
}
