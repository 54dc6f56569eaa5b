use rand::Rng;

use super::{Triple, TripleSet};
use crate::{Error, Result};

pub const MAX_CORRUPTION_ATTEMPTS: usize = 100;

/// Which slot of a golden triple gets replaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptionMode {
    Head,
    Tail,
    /// Head or tail with equal probability, chosen per attempt.
    Either,
    /// Head, tail or relation with equal probability. The relation slot is
    /// only used when the set has at least two relations.
    AnySlot,
}

/// Replaces exactly one slot of `triple` with a uniformly drawn entity (or
/// relation, under [`CorruptionMode::AnySlot`]), resampling while the result
/// is a known fact.
pub fn corrupt_triple<R: Rng + ?Sized>(
    triple: Triple,
    set: &TripleSet,
    mode: CorruptionMode,
    rng: &mut R,
) -> Result<Triple> {
    let entities = set.num_entities();
    if entities < 2 {
        return Err(Error::InvalidArgument(
            "corruption needs at least two entities".into(),
        ));
    }
    let relations = set.num_relations();
    for _ in 0..MAX_CORRUPTION_ATTEMPTS {
        let slot = match mode {
            CorruptionMode::Head => 0,
            CorruptionMode::Tail => 1,
            CorruptionMode::Either => rng.random_range(0..2),
            CorruptionMode::AnySlot if relations >= 2 => rng.random_range(0..3),
            CorruptionMode::AnySlot => rng.random_range(0..2),
        };
        let mut candidate = triple;
        match slot {
            0 => candidate.head = rng.random_range(0..entities),
            1 => candidate.tail = rng.random_range(0..entities),
            _ => candidate.relation = rng.random_range(0..relations),
        }
        if candidate != triple && !set.contains(&candidate) {
            return Ok(candidate);
        }
    }
    Err(Error::CorruptionExhausted {
        attempts: MAX_CORRUPTION_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn only_legal_head_corruption() {
        let mut set = TripleSet::new();
        set.insert("a", "r", "b");
        let golden = set.triples()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let c = corrupt_triple(golden, &set, CorruptionMode::Head, &mut rng).unwrap();
            assert_eq!(c, Triple::new(1, 0, 1));
        }
    }

    #[test]
    fn exhausted_when_every_combination_is_true() {
        let mut set = TripleSet::new();
        for h in ["a", "b"] {
            for t in ["a", "b"] {
                set.insert(h, "r", t);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let err = corrupt_triple(set.triples()[0], &set, CorruptionMode::Either, &mut rng);
        assert!(matches!(err, Err(Error::CorruptionExhausted { attempts: 100 })));
    }

    #[test]
    fn differs_in_exactly_one_slot() {
        let mut set = TripleSet::new();
        for i in 0..10 {
            set.insert(&format!("e{i}"), if i % 2 == 0 { "r" } else { "s" }, &format!("e{}", (i + 3) % 10));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for &golden in set.triples() {
            for mode in [CorruptionMode::Head, CorruptionMode::Tail, CorruptionMode::Either, CorruptionMode::AnySlot] {
                let c = corrupt_triple(golden, &set, mode, &mut rng).unwrap();
                let changed = (c.head != golden.head) as u8
                    + (c.tail != golden.tail) as u8
                    + (c.relation != golden.relation) as u8;
                assert_eq!(changed, 1);
                assert!(!set.contains(&c));
                match mode {
                    CorruptionMode::Head => assert_ne!(c.head, golden.head),
                    CorruptionMode::Tail => assert_ne!(c.tail, golden.tail),
                    CorruptionMode::Either => assert_eq!(c.relation, golden.relation),
                    CorruptionMode::AnySlot => {}
                }
            }
        }
    }

    #[test]
    fn needs_two_entities() {
        let mut set = TripleSet::new();
        set.insert("a", "r", "a");
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(corrupt_triple(set.triples()[0], &set, CorruptionMode::Head, &mut rng).is_err());
    }
}
