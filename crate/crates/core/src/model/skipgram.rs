use crate::linalg::{axpy, dot};
use crate::Real;

/// Logistic inputs are clamped to this magnitude before exponentiation.
pub const LOGIT_CLAMP: Real = 30.0;

#[inline]
fn clamp(x: Real) -> Real {
    x.clamp(-LOGIT_CLAMP, LOGIT_CLAMP)
}

#[inline]
pub fn sigmoid(x: Real) -> Real {
    1.0 / (1.0 + (-clamp(x)).exp())
}

/// `-ln σ(x)`
#[inline]
fn neg_log_sigmoid(x: Real) -> Real {
    (-clamp(x)).exp().ln_1p()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramGrad {
    pub loss: Real,
    pub center: Vec<Real>,
    pub context: Vec<Real>,
    pub negatives: Vec<Vec<Real>>,
}

/// Negative-sampling loss for one (center, context) pair,
/// `-ln σ(w'_O·w_I) - Σ_k ln σ(-w'_k·w_I)`, with gradients for the center
/// input vector, the context output vector and every negative output vector.
pub fn skipgram_ns_loss_grad(
    center: &[Real],
    context: &[Real],
    negatives: &[&[Real]],
) -> SkipGramGrad {
    assert!(!negatives.is_empty(), "at least one negative is required");
    let dim = center.len();
    let mut grad_center = vec![0.0; dim];

    let pos = dot(context, center);
    let mut loss = neg_log_sigmoid(pos);
    let g = sigmoid(pos) - 1.0;
    axpy(g, context, &mut grad_center);
    let grad_context: Vec<Real> = center.iter().map(|c| g * c).collect();

    let grad_negatives = negatives
        .iter()
        .map(|neg| {
            let s = dot(neg, center);
            loss += neg_log_sigmoid(-s);
            let g = sigmoid(s);
            axpy(g, neg, &mut grad_center);
            center.iter().map(|c| g * c).collect()
        })
        .collect();

    SkipGramGrad {
        loss,
        center: grad_center,
        context: grad_context,
        negatives: grad_negatives,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_vectors_give_two_log_two() {
        let z = [0.0; 3];
        let g = skipgram_ns_loss_grad(&z, &z, &[&z]);
        assert!((g.loss - 2.0 * (2.0 as Real).ln()).abs() < 1e-15);
        assert!((g.loss - 1.3863).abs() < 1e-4);
    }

    #[test]
    fn aligned_pair_closed_form() {
        let g = skipgram_ns_loss_grad(&[1.0, 0.0], &[1.0, 0.0], &[&[-1.0, 0.0]]);
        let expected = -2.0 * sigmoid(1.0).ln();
        assert!((g.loss - expected).abs() < 1e-15);
        assert!((g.loss - 0.6265).abs() < 1e-4);
    }

    #[test]
    fn saturated_logits_stay_finite() {
        let big = [1e4, 1e4];
        let g = skipgram_ns_loss_grad(&big, &[-1e4, -1e4], &[&big]);
        assert!(g.loss.is_finite());
        assert!(g.center.iter().all(|v| v.is_finite()));
    }
}
