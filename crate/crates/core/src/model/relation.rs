use rand::Rng;

use super::projection::{init_projection, LowRankProjection};
use super::{ModelConfig, Variant};
use crate::linalg::{axpy, dot, norm, DenseMatrix};
use crate::{Real, Result};

/// Per-relation parameters beyond the translation vector.
#[derive(Debug, Clone, PartialEq)]
pub enum RelationParams {
    /// Separate rank-bounded maps for heads and tails.
    ProjectNet {
        head: LowRankProjection,
        tail: LowRankProjection,
    },
    /// Plain translation, no extra parameters.
    RNet,
    /// Unit normal of the relation hyperplane.
    TransH { normal: Vec<Real> },
    /// Unconstrained head and tail matrices; the score has no translation.
    SE {
        head: DenseMatrix,
        tail: DenseMatrix,
    },
    /// One unconstrained matrix shared by head and tail.
    TransR { matrix: DenseMatrix },
}

impl RelationParams {
    /// Fresh parameters for one relation.
    ///
    /// ProjectNet starts from random diagonal 0/1 projections, TransH from a
    /// random unit normal, SE and TransR from identity matrices.
    pub fn init<R: Rng + ?Sized>(config: &ModelConfig, rng: &mut R) -> Result<Self> {
        let d = config.dim;
        Ok(match config.variant {
            Variant::ProjectNet => RelationParams::ProjectNet {
                head: init_projection(d, config.left_rank, rng)?,
                tail: init_projection(d, config.right_rank, rng)?,
            },
            Variant::RNet => RelationParams::RNet,
            Variant::TransH => {
                let mut normal: Vec<Real> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                normalize(&mut normal);
                RelationParams::TransH { normal }
            }
            Variant::SE => RelationParams::SE {
                head: DenseMatrix::identity(d),
                tail: DenseMatrix::identity(d),
            },
            Variant::TransR => RelationParams::TransR {
                matrix: DenseMatrix::identity(d),
            },
        })
    }

    /// All-zero parameters shaped for `config`.
    pub fn zeros(config: &ModelConfig) -> Self {
        let d = config.dim;
        match config.variant {
            Variant::ProjectNet => RelationParams::ProjectNet {
                head: LowRankProjection::zeros(d, config.left_rank),
                tail: LowRankProjection::zeros(d, config.right_rank),
            },
            Variant::RNet => RelationParams::RNet,
            Variant::TransH => RelationParams::TransH { normal: vec![0.0; d] },
            Variant::SE => RelationParams::SE {
                head: DenseMatrix::zeros(d, d),
                tail: DenseMatrix::zeros(d, d),
            },
            Variant::TransR => RelationParams::TransR {
                matrix: DenseMatrix::zeros(d, d),
            },
        }
    }

    pub fn variant(&self) -> Variant {
        match self {
            RelationParams::ProjectNet { .. } => Variant::ProjectNet,
            RelationParams::RNet => Variant::RNet,
            RelationParams::TransH { .. } => Variant::TransH,
            RelationParams::SE { .. } => Variant::SE,
            RelationParams::TransR { .. } => Variant::TransR,
        }
    }

    /// Same shape, all zeros. Used to hold gradients.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for s in z.slices_mut() {
            s.fill(0.0);
        }
        z
    }

    /// Every trainable value, in a fixed layout.
    pub fn slices(&self) -> Vec<&[Real]> {
        match self {
            RelationParams::ProjectNet { head, tail } => {
                head.slices().into_iter().chain(tail.slices()).collect()
            }
            RelationParams::RNet => Vec::new(),
            RelationParams::TransH { normal } => vec![normal.as_slice()],
            RelationParams::SE { head, tail } => vec![head.as_slice(), tail.as_slice()],
            RelationParams::TransR { matrix } => vec![matrix.as_slice()],
        }
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [Real]> {
        match self {
            RelationParams::ProjectNet { head, tail } => {
                head.slices_mut().into_iter().chain(tail.slices_mut()).collect()
            }
            RelationParams::RNet => Vec::new(),
            RelationParams::TransH { normal } => vec![normal.as_mut_slice()],
            RelationParams::SE { head, tail } => vec![head.as_mut_slice(), tail.as_mut_slice()],
            RelationParams::TransR { matrix } => vec![matrix.as_mut_slice()],
        }
    }

    pub fn param_count(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn flatten(&self) -> Vec<Real> {
        self.slices().concat()
    }

    /// Overwrites every value from a buffer laid out like [`Self::flatten`].
    pub fn load_flat(&mut self, flat: &[Real]) {
        assert_eq!(flat.len(), self.param_count(), "flat parameter length mismatch");
        let mut offset = 0;
        for s in self.slices_mut() {
            s.copy_from_slice(&flat[offset..offset + s.len()]);
            offset += s.len();
        }
    }

    /// `self += alpha * other` over matching layouts.
    pub fn add_scaled(&mut self, alpha: Real, other: &RelationParams) {
        for (dst, src) in self.slices_mut().into_iter().zip(other.slices()) {
            axpy(alpha, src, dst);
        }
    }

    /// Restores constraints after an update (unit TransH normal).
    pub fn project_constraints(&mut self) {
        if let RelationParams::TransH { normal } = self {
            normalize(normal);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.slices().iter().all(|s| crate::linalg::all_finite(s))
    }

    /// Maps a head entity vector into the comparison space.
    pub fn project_head(&self, v: &[Real]) -> Vec<Real> {
        match self {
            RelationParams::ProjectNet { head, .. } => head.apply(v),
            RelationParams::RNet => v.to_vec(),
            RelationParams::TransH { normal } => hyperplane(normal, v),
            RelationParams::SE { head, .. } => head.mul_vec(v),
            RelationParams::TransR { matrix } => matrix.mul_vec(v),
        }
    }

    /// Maps a tail entity vector into the comparison space.
    pub fn project_tail(&self, v: &[Real]) -> Vec<Real> {
        match self {
            RelationParams::ProjectNet { tail, .. } => tail.apply(v),
            RelationParams::RNet => v.to_vec(),
            RelationParams::TransH { normal } => hyperplane(normal, v),
            RelationParams::SE { tail, .. } => tail.mul_vec(v),
            RelationParams::TransR { matrix } => matrix.mul_vec(v),
        }
    }
}

/// `v - (w·v) w`
pub(crate) fn hyperplane(normal: &[Real], v: &[Real]) -> Vec<Real> {
    let a = dot(normal, v);
    v.iter().zip(normal).map(|(x, w)| x - a * w).collect()
}

fn normalize(v: &mut [Real]) {
    let n = norm(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn config(variant: Variant) -> ModelConfig {
        ModelConfig {
            variant,
            dim: 6,
            left_rank: 2,
            right_rank: 4,
            margin: 1.0,
        }
    }

    #[test]
    fn flatten_round_trip_every_variant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for variant in Variant::ALL {
            let p = RelationParams::init(&config(variant), &mut rng).unwrap();
            let flat = p.flatten();
            assert_eq!(flat.len(), p.param_count());
            let mut q = p.zeros_like();
            q.load_flat(&flat);
            assert_eq!(p, q);
        }
    }

    #[test]
    fn projectnet_param_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = RelationParams::init(&config(Variant::ProjectNet), &mut rng).unwrap();
        // (1 + 2d) values per factor, m_L + m_R factors.
        assert_eq!(p.param_count(), (1 + 2 * 6) * (2 + 4));
    }

    #[test]
    fn transh_normal_is_renormalized() {
        let mut p = RelationParams::TransH {
            normal: vec![3.0, 4.0],
        };
        p.project_constraints();
        let RelationParams::TransH { normal } = &p else { unreachable!() };
        assert!((norm(normal) - 1.0).abs() < 1e-15);
    }
}
