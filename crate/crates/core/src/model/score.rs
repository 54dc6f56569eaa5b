use super::relation::{hyperplane, RelationParams};
use crate::linalg::{all_finite, axpy, dot, l1_norm, squared_norm};
use crate::{Error, Real, Result};

/// Borrowed inputs of one triple score.
#[derive(Debug, Clone, Copy)]
pub struct TripleVectors<'a> {
    pub params: &'a RelationParams,
    pub head: &'a [Real],
    pub relation: &'a [Real],
    pub tail: &'a [Real],
}

/// Gradient of a triple score (or of a loss through it) with respect to
/// every participating parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleGrad {
    pub head: Vec<Real>,
    pub relation: Vec<Real>,
    pub tail: Vec<Real>,
    pub params: RelationParams,
}

impl TripleGrad {
    fn zeros(params: &RelationParams, dim: usize) -> Self {
        Self {
            head: vec![0.0; dim],
            relation: vec![0.0; dim],
            tail: vec![0.0; dim],
            params: params.zeros_like(),
        }
    }

    fn negate(&mut self) {
        for v in [&mut self.head, &mut self.relation, &mut self.tail] {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        for s in self.params.slices_mut() {
            s.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Plausibility score of a triple; lower is more plausible.
///
/// Squared L2 distance between the projected head plus translation and the
/// projected tail, except SE which uses the L1 distance and no
/// translation.
pub fn score_triple(
    params: &RelationParams,
    head: &[Real],
    relation: &[Real],
    tail: &[Real],
) -> Result<Real> {
    if !(all_finite(head) && all_finite(relation) && all_finite(tail) && params.all_finite()) {
        return Err(Error::NonFinite("triple score inputs".into()));
    }
    let h = params.project_head(head);
    let t = params.project_tail(tail);
    let score = match params {
        RelationParams::SE { .. } => {
            let diff: Vec<Real> = h.iter().zip(&t).map(|(a, b)| a - b).collect();
            l1_norm(&diff)
        }
        _ => {
            let diff: Vec<Real> = h
                .iter()
                .zip(relation)
                .zip(&t)
                .map(|((a, r), b)| a + r - b)
                .collect();
            squared_norm(&diff)
        }
    };
    if score.is_finite() {
        Ok(score)
    } else {
        Err(Error::NonFinite("triple score".into()))
    }
}

/// Score and its analytic gradient.
pub fn score_with_grad(x: &TripleVectors) -> (Real, TripleGrad) {
    let dim = x.head.len();
    let mut g = TripleGrad::zeros(x.params, dim);
    let score = match x.params {
        RelationParams::ProjectNet { head, tail } => {
            let head_coords = head.right_coords(x.head);
            let tail_coords = tail.right_coords(x.tail);
            let mut e = x.relation.to_vec();
            for (i, &c) in head_coords.iter().enumerate() {
                axpy(head.weights()[i] * c, head.left_factor(i), &mut e);
            }
            for (j, &c) in tail_coords.iter().enumerate() {
                axpy(-tail.weights()[j] * c, tail.left_factor(j), &mut e);
            }

            let RelationParams::ProjectNet { head: gh, tail: gt } = &mut g.params else {
                unreachable!()
            };
            for (i, &c) in head_coords.iter().enumerate() {
                let mu = head.weights()[i];
                let pe = dot(head.left_factor(i), &e);
                axpy(2.0 * mu * pe, head.right_factor(i), &mut g.head);
                gh.weights_mut()[i] = 2.0 * c * pe;
                axpy(2.0 * mu * c, &e, gh.left_factor_mut(i));
                axpy(2.0 * mu * pe, x.head, gh.right_factor_mut(i));
            }
            for (j, &c) in tail_coords.iter().enumerate() {
                let zeta = tail.weights()[j];
                let oe = dot(tail.left_factor(j), &e);
                axpy(-2.0 * zeta * oe, tail.right_factor(j), &mut g.tail);
                gt.weights_mut()[j] = -2.0 * c * oe;
                axpy(-2.0 * zeta * c, &e, gt.left_factor_mut(j));
                axpy(-2.0 * zeta * oe, x.tail, gt.right_factor_mut(j));
            }
            axpy(2.0, &e, &mut g.relation);
            squared_norm(&e)
        }
        RelationParams::RNet => {
            let e: Vec<Real> = (0..dim).map(|k| x.head[k] + x.relation[k] - x.tail[k]).collect();
            axpy(2.0, &e, &mut g.head);
            axpy(2.0, &e, &mut g.relation);
            axpy(-2.0, &e, &mut g.tail);
            squared_norm(&e)
        }
        RelationParams::TransH { normal } => {
            let u: Vec<Real> = (0..dim).map(|k| x.head[k] - x.tail[k]).collect();
            let a = dot(normal, &u);
            let e: Vec<Real> = (0..dim).map(|k| u[k] - a * normal[k] + x.relation[k]).collect();
            let pe = hyperplane(normal, &e);
            axpy(2.0, &pe, &mut g.head);
            axpy(-2.0, &pe, &mut g.tail);
            axpy(2.0, &e, &mut g.relation);
            let RelationParams::TransH { normal: gw } = &mut g.params else {
                unreachable!()
            };
            let we = dot(normal, &e);
            axpy(-2.0 * we, &u, gw);
            axpy(-2.0 * a, &e, gw);
            squared_norm(&e)
        }
        RelationParams::SE { head, tail } => {
            let lh = head.mul_vec(x.head);
            let rt = tail.mul_vec(x.tail);
            let e: Vec<Real> = lh.iter().zip(&rt).map(|(a, b)| a - b).collect();
            let sign: Vec<Real> = e.iter().map(|&v| sign(v)).collect();
            g.head = head.transpose_mul_vec(&sign);
            g.tail = tail.transpose_mul_vec(&sign).into_iter().map(|v| -v).collect();
            let RelationParams::SE { head: gl, tail: gr } = &mut g.params else {
                unreachable!()
            };
            gl.add_outer(1.0, &sign, x.head);
            gr.add_outer(-1.0, &sign, x.tail);
            l1_norm(&e)
        }
        RelationParams::TransR { matrix } => {
            let u: Vec<Real> = (0..dim).map(|k| x.head[k] - x.tail[k]).collect();
            let mut e = matrix.mul_vec(&u);
            axpy(1.0, x.relation, &mut e);
            let mte = matrix.transpose_mul_vec(&e);
            axpy(2.0, &mte, &mut g.head);
            axpy(-2.0, &mte, &mut g.tail);
            axpy(2.0, &e, &mut g.relation);
            let RelationParams::TransR { matrix: gm } = &mut g.params else {
                unreachable!()
            };
            gm.add_outer(2.0, &e, &u);
            squared_norm(&e)
        }
    };
    (score, g)
}

/// Subgradient of `|x|`, taking 0 at the kink.
fn sign(x: Real) -> Real {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Margin ranking loss of a golden triple against one corruption and its
/// gradients.
#[derive(Debug, Clone)]
pub struct KnowledgeGrad {
    /// `[margin - f(corrupted) + f(golden)]₊`
    pub loss: Real,
    pub golden_score: Real,
    pub corrupted_score: Real,
    /// Whether the hinge is active; all gradients are zero when it is not.
    pub active: bool,
    pub golden: TripleGrad,
    pub corrupted: TripleGrad,
}

pub fn knowledge_loss_grad(
    margin: Real,
    golden: &TripleVectors,
    corrupted: &TripleVectors,
) -> Result<KnowledgeGrad> {
    if margin <= 0.0 {
        return Err(Error::InvalidArgument(format!("margin {margin} must be positive")));
    }
    let (fg, mut gg) = score_with_grad(golden);
    let (fc, mut gc) = score_with_grad(corrupted);
    if !(fg.is_finite() && fc.is_finite()) {
        return Err(Error::NonFinite("knowledge loss".into()));
    }
    let raw = margin - fc + fg;
    let active = raw > 0.0;
    if active {
        gc.negate();
    } else {
        let dim = golden.head.len();
        gg = TripleGrad::zeros(golden.params, dim);
        gc = TripleGrad::zeros(corrupted.params, dim);
    }
    Ok(KnowledgeGrad {
        loss: raw.max(0.0),
        golden_score: fg,
        corrupted_score: fc,
        active,
        golden: gg,
        corrupted: gc,
    })
}
