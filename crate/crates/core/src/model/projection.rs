use rand::Rng;

use crate::linalg::{dot, DenseMatrix};
use crate::{Error, Real, Result};

/// A linear map `Σ_i μ_i p_i q_iᵀ` stored as `m` weighted rank-1 factors.
///
/// The rank of the map can never exceed the number of factors, whatever
/// values the factors take during training.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankProjection {
    dim: usize,
    weights: Vec<Real>,
    /// `m × d`, row `i` is `p_i`.
    left: Vec<Real>,
    /// `m × d`, row `i` is `q_i`.
    right: Vec<Real>,
}

impl LowRankProjection {
    pub fn new(dim: usize, weights: Vec<Real>, left: Vec<Real>, right: Vec<Real>) -> Result<Self> {
        let m = weights.len();
        if left.len() != m * dim || right.len() != m * dim {
            return Err(Error::InvalidArgument(format!(
                "factor matrices must be {m}x{dim}"
            )));
        }
        Ok(Self {
            dim,
            weights,
            left,
            right,
        })
    }

    /// Zero-valued projection with `rank` factors, used as a gradient buffer.
    pub fn zeros(dim: usize, rank: usize) -> Self {
        Self {
            dim,
            weights: vec![0.0; rank],
            left: vec![0.0; rank * dim],
            right: vec![0.0; rank * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::axes(dim, &(0..dim).collect::<Vec<_>>())
    }

    /// `Σ_{k in axes} e_k e_kᵀ`.
    pub fn axes(dim: usize, axes: &[usize]) -> Self {
        let mut p = Self::zeros(dim, axes.len());
        for (i, &axis) in axes.iter().enumerate() {
            p.weights[i] = 1.0;
            p.left[i * dim + axis] = 1.0;
            p.right[i * dim + axis] = 1.0;
        }
        p
    }

    /// Writes a dense square matrix as `Σ_j (M e_j) e_jᵀ`.
    pub fn from_dense(matrix: &DenseMatrix) -> Self {
        let dim = matrix.rows();
        assert_eq!(dim, matrix.cols(), "projection must be square");
        let mut p = Self::identity(dim);
        for j in 0..dim {
            for i in 0..dim {
                p.left[j * dim + i] = matrix[(i, j)];
            }
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank_bound(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Real] {
        &self.weights
    }

    pub fn left_factor(&self, i: usize) -> &[Real] {
        &self.left[i * self.dim..(i + 1) * self.dim]
    }

    pub fn right_factor(&self, i: usize) -> &[Real] {
        &self.right[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [Real] {
        &mut self.weights
    }

    pub(crate) fn left_factor_mut(&mut self, i: usize) -> &mut [Real] {
        &mut self.left[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn right_factor_mut(&mut self, i: usize) -> &mut [Real] {
        &mut self.right[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn slices(&self) -> [&[Real]; 3] {
        [&self.weights, &self.left, &self.right]
    }

    pub(crate) fn slices_mut(&mut self) -> [&mut [Real]; 3] {
        [&mut self.weights, &mut self.left, &mut self.right]
    }

    /// `(q_i · v)` for every factor.
    pub(crate) fn right_coords(&self, v: &[Real]) -> Vec<Real> {
        (0..self.rank_bound()).map(|i| dot(self.right_factor(i), v)).collect()
    }

    /// Applies the map in `O(m·d)` without forming the matrix.
    pub fn apply(&self, v: &[Real]) -> Vec<Real> {
        let mut out = vec![0.0; self.dim];
        self.apply_into(v, &mut out);
        out
    }

    pub fn apply_into(&self, v: &[Real], out: &mut [Real]) {
        assert_eq!(v.len(), self.dim, "dimension mismatch in projection");
        assert_eq!(out.len(), self.dim, "dimension mismatch in projection");
        out.fill(0.0);
        for i in 0..self.rank_bound() {
            let coeff = self.weights[i] * dot(self.right_factor(i), v);
            crate::linalg::axpy(coeff, self.left_factor(i), out);
        }
    }

    /// Applies the transposed map, `Σ_i μ_i (p_i · v) q_i`.
    pub fn apply_transpose(&self, v: &[Real]) -> Vec<Real> {
        assert_eq!(v.len(), self.dim, "dimension mismatch in projection");
        let mut out = vec![0.0; self.dim];
        for i in 0..self.rank_bound() {
            let coeff = self.weights[i] * dot(self.left_factor(i), v);
            crate::linalg::axpy(coeff, self.right_factor(i), &mut out);
        }
        out
    }

    /// Dense `d × d` matrix `Σ_i μ_i p_i q_iᵀ`.
    pub fn materialize(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.dim, self.dim);
        for i in 0..self.rank_bound() {
            m.add_outer(self.weights[i], self.left_factor(i), self.right_factor(i));
        }
        m
    }
}

/// Diagonal 0/1 projection with `rank` ones on uniformly chosen axes.
pub fn init_projection<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<LowRankProjection> {
    if rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!(
            "projection rank {rank} must lie in [1, {dim}]"
        )));
    }
    let mut axes = rand::seq::index::sample(rng, dim, rank).into_vec();
    axes.sort_unstable();
    Ok(LowRankProjection::axes(dim, &axes))
}

#[cfg(not(feature = "f32"))]
const UNIT_TOLERANCE: f64 = 1e-10;
#[cfg(feature = "f32")]
const UNIT_TOLERANCE: f64 = 1e-5;

/// Rewrites a hyperplane normal as the equivalent pair of rank `d-1`
/// projections onto the hyperplane.
///
/// The factors are an orthonormal basis of the complement of `normal`,
/// taken from the columns of a Householder reflection that maps `normal`
/// onto a coordinate axis.
pub fn transh_to_projectnet(normal: &[Real]) -> Result<(LowRankProjection, LowRankProjection)> {
    let dim = normal.len();
    if dim < 2 {
        return Err(Error::InvalidArgument("hyperplane needs dimension >= 2".into()));
    }
    let n = crate::linalg::norm(normal);
    if ((n - 1.0) as f64).abs() > UNIT_TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "hyperplane normal must have unit length, got {n}"
        )));
    }
    let pivot = (0..dim)
        .max_by(|&a, &b| normal[a].abs().total_cmp(&normal[b].abs()))
        .unwrap_or(0);
    let mut v = normal.to_vec();
    v[pivot] += normal[pivot].signum();
    let vv = dot(&v, &v);

    let mut proj = LowRankProjection::zeros(dim, dim - 1);
    for (i, column) in (0..dim).filter(|&j| j != pivot).enumerate() {
        // Column `column` of I - 2 v vᵀ / (vᵀ v).
        let scale = 2.0 * v[column] / vv;
        let basis: Vec<Real> = (0..dim)
            .map(|r| if r == column { 1.0 - scale * v[r] } else { -scale * v[r] })
            .collect();
        proj.weights[i] = 1.0;
        proj.left_factor_mut(i).copy_from_slice(&basis);
        proj.right_factor_mut(i).copy_from_slice(&basis);
    }
    Ok((proj.clone(), proj))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn single(mu: Real, p: &[Real], q: &[Real]) -> LowRankProjection {
        LowRankProjection::new(p.len(), vec![mu], p.to_vec(), q.to_vec()).unwrap()
    }

    #[test]
    fn identity_on_two_axes() {
        assert_eq!(LowRankProjection::identity(2).apply(&[3.0, 4.0]), vec![3.0, 4.0]);
    }

    #[test]
    fn weighted_single_factor() {
        assert_eq!(single(2.0, &[1.0, 0.0], &[1.0, 0.0]).apply(&[3.0, 4.0]), vec![6.0, 0.0]);
        assert_eq!(single(1.0, &[1.0, 0.0], &[0.0, 1.0]).apply(&[3.0, 4.0]), vec![4.0, 0.0]);
    }

    #[test]
    fn materialize_outer_product() {
        let m = single(1.0, &[1.0, 1.0], &[1.0, 0.0]).materialize();
        assert_eq!(m.as_slice(), &[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(LowRankProjection::identity(3).materialize(), DenseMatrix::identity(3));
    }

    #[test]
    fn init_is_diagonal_with_trace_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = init_projection(4, 2, &mut rng).unwrap().materialize();
        let mut trace = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let x = m[(i, j)];
                assert!(x == 0.0 || (i == j && x == 1.0));
            }
            trace += m[(i, i)];
        }
        assert_eq!(trace, 2.0);
        assert_eq!(init_projection(3, 3, &mut rng).unwrap().materialize(), DenseMatrix::identity(3));
    }

    #[test]
    fn init_rejects_rank_above_dim() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(init_projection(3, 4, &mut rng).is_err());
        assert!(init_projection(3, 0, &mut rng).is_err());
    }

    #[test]
    fn transh_conversion_axis_normal() {
        let (left, right) = transh_to_projectnet(&[1.0, 0.0]).unwrap();
        assert_eq!(left, right);
        assert_eq!(left.rank_bound(), 1);
        let m = left.materialize();
        for (got, want) in m.as_slice().iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        let v = left.apply(&[3.0, 4.0]);
        assert!((v[0] - 0.0).abs() < 1e-15 && (v[1] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn transh_conversion_rejects_non_unit() {
        assert!(transh_to_projectnet(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn transposed_apply_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dim = 5;
        let rand_vec = |rng: &mut ChaCha8Rng, n: usize| -> Vec<Real> {
            (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
        };
        let p = LowRankProjection::new(dim, rand_vec(&mut rng, 2), rand_vec(&mut rng, 2 * dim), rand_vec(&mut rng, 2 * dim)).unwrap();
        let v = rand_vec(&mut rng, dim);
        let dense = p.materialize().transpose_mul_vec(&v);
        for (a, b) in p.apply_transpose(&v).iter().zip(dense) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
