//! Distances in the space of marked groups, measured against the free group.
//!
//! Two words of length `<= n` name the same vertex of a marked Cayley ball
//! iff their quotient, of length `<= 2n`, is trivial. So the radius-`n` ball
//! of a marked tuple is taken to match the free ball when no nontrivial
//! reduced word of length `<= 2n` is a relation. This criterion decides the vertex set exactly; an extra edge between two vertices of
//! the sphere would need a relation of length `2n + 1`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::free_approx::{shortest_relation, trivial_words};
use crate::pl::PlMap;
use crate::word::Word;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSpectrum {
    pub cutoff: usize,
    pub trivial_words: Vec<Word>,
}

impl RelationSpectrum {
    pub fn is_empty(&self) -> bool {
        self.trivial_words.is_empty()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.trivial_words.binary_search(w).is_ok()
    }

    pub fn shortest(&self) -> Option<&Word> {
        self.trivial_words.first()
    }
}

/// Every nontrivial reduced word of length `<= cutoff` that evaluates to the identity.
pub fn relation_spectrum(tuple: &[PlMap], cutoff: usize) -> RelationSpectrum {
    RelationSpectrum { cutoff, trivial_words: trivial_words(tuple, cutoff) }
}

pub fn ball_isomorphic_to_free(tuple: &[PlMap], n: usize) -> bool {
    shortest_relation(tuple, 2 * n).is_none()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    /// Largest radius (up to the cutoff) at which the ball is free.
    pub n: usize,
    /// False when the search stopped at the cutoff: the true radius is `>= n`.
    pub exact: bool,
    pub cutoff: usize,
    pub relation: Option<Word>,
    /// `e^-n`, or an upper bound on the distance when censored.
    pub distance: f64,
}

/// Radius of agreement with the free ball of the same rank.
pub fn distance_to_free(tuple: &[PlMap], cutoff: usize) -> DistanceReport {
    for r in 1..=cutoff {
        if let Some(w) = shortest_relation(tuple, 2 * r) {
            let n = r - 1;
            return DistanceReport { n, exact: true, cutoff, relation: Some(w), distance: (-(n as f64)).exp() };
        }
    }
    DistanceReport { n: cutoff, exact: false, cutoff, relation: None, distance: (-(cutoff as f64)).exp() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceEntry {
    pub bundle_n: usize,
    pub report: DistanceReport,
    pub elapsed_ms: f64,
}

/// Distance reports for a sequence of markings, each searched up to `cutoff(n)`.
pub fn distance_sequence(markings: &[(usize, [PlMap; 2])], cutoff: impl Fn(usize) -> usize) -> Vec<SequenceEntry> {
    markings
        .iter()
        .map(|(n, tuple)| {
            let start = Instant::now();
            let report = distance_to_free(tuple, cutoff(*n));
            SequenceEntry { bundle_n: *n, report, elapsed_ms: start.elapsed().as_secs_f64() * 1e3 }
        })
        .collect()
}

/// Whether the reported radii never decrease along the sequence.
pub fn is_nondecreasing(entries: &[SequenceEntry]) -> bool {
    entries.windows(2).all(|w| w[0].report.n <= w[1].report.n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thompson::{generator_f1, generator_f2};

    #[test]
    fn translation_spectrum_empty() {
        assert!(relation_spectrum(&[generator_f1()], 12).is_empty());
    }

    #[test]
    fn identity_spectrum() {
        let s = relation_spectrum(&[PlMap::identity()], 3);
        assert!(s.contains(&Word::letter(1, 0, 1)));
        assert_eq!(s.shortest(), Some(&Word::letter(1, 0, 1)));
    }

    #[test]
    fn thompson_spectrum_at_ten() {
        let s = relation_spectrum(&[generator_f1(), generator_f2()], 10);
        let rel = Word::commutator(&Word::parse("f1 f2^-1", 2).unwrap(), &Word::parse("f1^-1 f2 f1", 2).unwrap());
        assert!(s.contains(&rel));
        assert!(s.trivial_words.iter().all(|w| w.len() == 10));
        for w in &s.trivial_words {
            assert!(s.contains(&w.inverse()));
            for r in w.rotations() {
                if r.is_reduced() && r.len() == w.len() {
                    assert!(s.contains(&r));
                }
            }
        }
    }

    #[test]
    fn ball_criterion() {
        let f = [generator_f1(), generator_f2()];
        assert!(!ball_isomorphic_to_free(&f, 5));
        assert!(ball_isomorphic_to_free(&f, 4));
        assert!(ball_isomorphic_to_free(&[PlMap::identity()], 0));
    }

    #[test]
    fn thompson_distance() {
        let d = distance_to_free(&[generator_f1(), generator_f2()], 8);
        assert_eq!((d.n, d.exact), (4, true));
        let w = d.relation.unwrap();
        assert_eq!(w.len(), 10);
        assert!(w.eval(&[generator_f1(), generator_f2()]).unwrap().is_identity());
    }

    #[test]
    fn degenerate_tuple_is_maximally_far() {
        let d = distance_to_free(&[PlMap::identity(), PlMap::identity()], 3);
        assert_eq!((d.n, d.exact), (0, true));
        assert_eq!(d.distance, 1.0);
    }

    #[test]
    fn censored_when_no_relation() {
        let d = distance_to_free(&[generator_f1()], 4);
        assert_eq!((d.n, d.exact, d.relation), (4, false, None));
    }
}
