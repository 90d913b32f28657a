//! Thompson's group F in two models: PL homeomorphisms of the line
//! generated by `f1`, `f2`, and dyadic PL homeomorphisms of `[0,1]`.

mod brown;
mod tree;

use std::sync::OnceLock;

use thiserror::Error;

use crate::pl::{Affine, PlError, PlMap};
use crate::rational::Rational;
use crate::word::{Word, WordError};

pub use brown::{brown_backward, brown_forward, transport_from_unit, transport_to_unit};
pub use tree::{normal_form, tree_pair_of, NormalForm, Tree, TreePair};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ThompsonError {
    #[error("not an element of F: {0}")]
    NotThompson(String),
    #[error("not a unit-model element: {0}")]
    NotUnitModel(String),
    #[error("value {0} is not dyadic")]
    NonDyadic(Rational),
    #[error("slope {0} is not a power of two")]
    NonDyadicSlope(Rational),
    #[error("tree refinement exceeded depth {depth}")]
    DepthExceeded { depth: u32 },
    #[error("{0} is not strictly between 0 and 1")]
    OutsideUnit(Rational),
    #[error("malformed tree {0:?}")]
    BadTree(String),
    #[error("trees have {domain} and {range} leaves")]
    LeafCountMismatch { domain: usize, range: usize },
    #[error(transparent)]
    Pl(#[from] PlError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// `t -> t + 1`.
pub fn generator_f1() -> PlMap {
    PlMap::translation(1)
}

/// `t` on `(-inf, 0]`, `2t` on `[0, 1]`, `t + 1` on `[1, inf)`.
pub fn generator_f2() -> PlMap {
    PlMap::new(
        vec![(Rational::zero(), Rational::zero()), (Rational::one(), Rational::from_int(2))],
        Affine::identity(),
        Affine::translation(Rational::one()),
    )
    .expect("f2 data is valid")
}

pub fn generators() -> [PlMap; 2] {
    [generator_f1(), generator_f2()]
}

/// Evaluates a word over `(f1, f2)`.
pub fn eval_on_generators(w: &Word) -> Result<PlMap, WordError> {
    w.eval(&generators())
}

/// A word over `(f1, f2)` representing `f`.
pub fn express_word(f: &PlMap) -> Result<Word, ThompsonError> {
    if !f.is_thompson_element() {
        return Err(ThompsonError::NotThompson(non_membership_reason(f)));
    }
    let unit = transport_to_unit(f)?;
    let tp = tree_pair_of(&unit)?;
    Ok(normal_form(&tp).to_x01_word())
}

fn non_membership_reason(f: &PlMap) -> String {
    let tail = |a: &Affine| a.slope.is_one() && a.offset.is_integer();
    if !tail(f.left()) {
        return format!("left tail {:?} is not an integer translation", f.left());
    }
    if !tail(f.right()) {
        return format!("right tail {:?} is not an integer translation", f.right());
    }
    if let Some(p) = f.breaks().iter().find(|p| !p.0.is_dyadic() || !p.1.is_dyadic()) {
        return format!("breakpoint ({}, {}) is not dyadic", p.0, p.1);
    }
    match f.all_slopes().find(|s| s.log2_exact().is_none()) {
        Some(s) => format!("slope {s} is not a power of two"),
        None => "unknown".into(),
    }
}

/// The subgroup of F fixing the complement of `[0,1]`: its two standard
/// generators, as maps and as words over `(f1, f2)`.
#[derive(Clone, Debug)]
pub struct F2Generators {
    pub u: Word,
    pub v: Word,
    pub u_pl: PlMap,
    pub v_pl: PlMap,
}

pub fn f2_subgroup_generators() -> &'static F2Generators {
    static CELL: OnceLock<F2Generators> = OnceLock::new();
    CELL.get_or_init(|| {
        let u_pl = transport_to_unit(&generator_f1()).expect("f1 transports");
        let v_pl = transport_to_unit(&generator_f2()).expect("f2 transports");
        let u = express_word(&u_pl).expect("unit generator lies in F");
        let v = express_word(&v_pl).expect("unit generator lies in F");
        F2Generators { u, v, u_pl, v_pl }
    })
}

/// Support closure is a compact subset of `(0,1)`.
#[allow(non_snake_case)]
pub fn is_in_F2_derived(f: &PlMap) -> bool {
    f.support().compactly_within(&Rational::zero(), &Rational::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn generator_values() {
        assert_eq!(generator_f1().eval(&q(0, 1)), q(1, 1));
        let f2 = generator_f2();
        assert_eq!(f2.eval(&q(0, 1)), q(0, 1));
        assert_eq!(f2.eval(&q(-5, 1)), q(-5, 1));
        assert_eq!(f2.eval(&q(1, 1)), q(2, 1));
        assert_eq!(f2.eval(&q(1, 2)), q(1, 1));
        assert_eq!(f2.eval(&q(3, 1)), q(4, 1));
    }

    #[test]
    fn word_evaluation() {
        assert!(eval_on_generators(&Word::identity(2)).unwrap().is_identity());
        let w = Word::parse("f1 f2", 2).unwrap();
        assert_eq!(eval_on_generators(&w).unwrap().eval(&q(0, 1)), q(2, 1));
        let w = Word::from_letters(2, &[0, 1]);
        assert!(eval_on_generators(&w).unwrap().is_identity());
        assert!(Word::parse("f1", 2).unwrap().eval(&[generator_f1()]).is_err());
    }

    #[test]
    fn classical_relation_holds() {
        let w = Word::parse("f1 f2^-1", 2).unwrap();
        let c = Word::parse("f1^-1 f2 f1", 2).unwrap();
        let rel = Word::commutator(&w, &c);
        assert_eq!(rel.len(), 10);
        assert!(eval_on_generators(&rel).unwrap().is_identity());
    }

    #[test]
    fn express_generators() {
        assert!(express_word(&PlMap::identity()).unwrap().is_empty());
        assert_eq!(express_word(&generator_f1()).unwrap().to_string(), "f1");
        assert_eq!(express_word(&generator_f2()).unwrap().to_string(), "f2");
    }

    #[test]
    fn express_rejects_non_members() {
        let f = PlMap::affine(Affine::translation(q(1, 2)));
        assert!(matches!(express_word(&f), Err(ThompsonError::NotThompson(_))));
    }

    #[test]
    fn f2_generators_contract() {
        let g = f2_subgroup_generators();
        for (w, pl) in [(&g.u, &g.u_pl), (&g.v, &g.v_pl)] {
            assert!(pl.support().within(&q(0, 1), &q(1, 1)));
            assert_eq!(&eval_on_generators(w).unwrap(), pl);
        }
        assert!(!is_in_F2_derived(&g.u_pl));
        assert!(!is_in_F2_derived(&g.v_pl));
        assert!(is_in_F2_derived(&PlMap::identity()));
        assert!(is_in_F2_derived(&g.u_pl.commutator(&g.v_pl)));
    }

    #[test]
    fn normal_form_survives_relation() {
        let a = Word::parse("f1 f2 f1^-1 f2^-1 f1^2", 2).unwrap();
        let rel = Word::commutator(&Word::parse("f1 f2^-1", 2).unwrap(), &Word::parse("f1^-1 f2 f1", 2).unwrap());
        let b = a.concat(&rel);
        let nf = |w: &Word| {
            normal_form(&tree_pair_of(&transport_to_unit(&eval_on_generators(w).unwrap()).unwrap()).unwrap())
        };
        assert_eq!(nf(&a), nf(&b));
    }
}
