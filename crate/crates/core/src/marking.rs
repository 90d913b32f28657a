//! Markings `(g_n, h_n)` of F: blockwise copies of a free pair pushed far to
//! the right and multiplied into the standard generators.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::free_approx::{
    check_no_relations, free_pair, FreeApproxError, FreePairCertificate, RelationCheck, SearchBudget,
};
use crate::pl::{PlError, PlMap};
use crate::rational::Rational;
use crate::slp::{SlpBuilder, SlpError, SlpWord};
use crate::thompson::{
    f2_subgroup_generators, generator_f1, generator_f2, is_in_F2_derived, normal_form, tree_pair_of, ThompsonError,
};
use crate::word::{commutator_decomposition, Word, WordError};

#[derive(Debug, Error)]
pub enum MarkingError {
    #[error(transparent)]
    FreeApprox(#[from] FreeApproxError),
    #[error("bundle invariant failed: {0}")]
    Invariant(String),
    #[error("witness stage {stage} failed: {detail}")]
    Witness { stage: &'static str, detail: String },
    #[error("displacement precondition failed: {0}")]
    Displacement(String),
    #[error(transparent)]
    Pl(#[from] PlError),
    #[error(transparent)]
    Thompson(#[from] ThompsonError),
    #[error(transparent)]
    Slp(#[from] SlpError),
    #[error(transparent)]
    Word(#[from] WordError),
}

fn witness_err(stage: &'static str, detail: impl Into<String>) -> MarkingError {
    MarkingError::Witness { stage, detail: detail.into() }
}

/// Maps of the prefixes `u_1 ... u_i`, `i >= 1`, over `(f1, f2)`.
fn prefix_maps(w: &Word) -> Vec<PlMap> {
    let gens = [generator_f1(), generator_f2()];
    let inv = [gens[0].inverse(), gens[1].inverse()];
    let mut acc = PlMap::identity();
    w.letters()
        .map(|l| {
            let g = if l & 1 == 1 { &inv[(l / 2) as usize] } else { &gens[(l / 2) as usize] };
            acc = acc.then(g);
            acc.clone()
        })
        .collect()
}

/// Whether every prefix `P` of `U` and `V` keeps `[m-1, inf)` off `[0,2]` and `[0,2]` off `[m-1, inf)`.
pub fn m_conditions_hold(u: &Word, v: &Word, m: i64) -> bool {
    let two = Rational::from_int(2);
    let edge = Rational::from_int(m - 1);
    prefix_maps(u).iter().chain(prefix_maps(v).iter()).all(|p| p.eval(&edge) > two && p.eval(&two) < edge)
}

/// Least integer `m` satisfying [`m_conditions_hold`].
pub fn choose_m(u: &Word, v: &Word) -> i64 {
    let two = Rational::from_int(2);
    let bound = prefix_maps(u)
        .iter()
        .chain(prefix_maps(v).iter())
        .map(|p| std::cmp::max(p.eval(&two), p.eval_inverse(&two)))
        .max()
        .expect("U and V are nonempty");
    bound.floor_i64() + 2
}

/// Acts as the translate of `e` on each `[k, k+1]` with `c <= k < d`; identity elsewhere.
pub fn block_product(e: &PlMap, c: i64, d: i64) -> Result<PlMap, MarkingError> {
    let (zero, one) = (Rational::zero(), Rational::one());
    if c >= d {
        return Err(PlError::BadInterval(format!("[{c}, {d}]")).into());
    }
    if !e.support().within(&zero, &one) {
        return Err(PlError::SupportNotInUnit.into());
    }
    if e.is_identity() {
        return Ok(PlMap::identity());
    }
    let mut pts: Vec<(Rational, Rational)> = Vec::with_capacity((d - c) as usize * (e.breakpoint_count() + 2));
    for k in c..d {
        let kq = Rational::from_int(k);
        let shift = |p: &Rational| p + &kq;
        let local = std::iter::once((zero.clone(), zero.clone()))
            .chain(e.breaks().iter().cloned())
            .chain(std::iter::once((one.clone(), one.clone())));
        for (x, y) in local {
            let p = (shift(&x), shift(&y));
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
    }
    Ok(PlMap::from_points_fixing_outside(pts)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkingBundle {
    pub n: usize,
    pub m: i64,
    pub interval: (i64, i64),
    pub seed: u64,
    pub a: PlMap,
    pub b: PlMap,
    pub p: PlMap,
    pub q: PlMap,
    pub g: PlMap,
    pub h: PlMap,
    pub u: Word,
    pub v: Word,
    pub certificate: FreePairCertificate,
}

/// The marking for radius `n`, built from a free pair certified at radius `2n`.
pub fn build_marking(n: usize, seed: u64, budget: SearchBudget) -> Result<MarkingBundle, MarkingError> {
    if n == 0 {
        return Err(MarkingError::FreeApprox(FreeApproxError::BadRadius));
    }
    let certificate = free_pair(2 * n, seed, budget)?;
    let (a, b) = certificate.pair.clone();
    let gens = f2_subgroup_generators();
    let m = choose_m(&gens.u, &gens.v);
    let (c, d) = (m, m + 2 * n as i64 + 1);
    let p = block_product(&a, c, d)?;
    let q = block_product(&b, c, d)?;
    let g = p.then(&generator_f1());
    let h = q.then(&generator_f2());
    Ok(MarkingBundle {
        n,
        m,
        interval: (c, d),
        seed,
        a,
        b,
        p,
        q,
        g,
        h,
        u: gens.u.clone(),
        v: gens.v.clone(),
        certificate,
    })
}

impl MarkingBundle {
    pub fn generators(&self) -> [PlMap; 2] {
        [self.g.clone(), self.h.clone()]
    }

    /// Re-checks every structural invariant exactly.
    pub fn validate(&self) -> Result<(), MarkingError> {
        let fail = |s: &str| Err(MarkingError::Invariant(s.to_string()));
        let (c, d) = self.interval;
        if c != self.m || d != self.m + 2 * self.n as i64 + 1 {
            return fail("interval is not [m, m+2n+1]");
        }
        if self.certificate.pair != (self.a.clone(), self.b.clone()) {
            return fail("certificate pair differs from (a, b)");
        }
        if !is_in_F2_derived(&self.a) || !is_in_F2_derived(&self.b) {
            return fail("a or b is not in the derived subgroup");
        }
        if self.p != block_product(&self.a, c, d)? || self.q != block_product(&self.b, c, d)? {
            return fail("p or q is not the block product over the interval");
        }
        let (lo, hi) = (Rational::from_int(c), Rational::from_int(d));
        if !self.p.support().within(&lo, &hi) || !self.q.support().within(&lo, &hi) {
            return fail("support of p or q leaves the interval");
        }
        if self.g != self.p.then(&generator_f1()) || self.h != self.q.then(&generator_f2()) {
            return fail("g != p f1 or h != q f2");
        }
        let gens = f2_subgroup_generators();
        if self.u.eval(&[generator_f1(), generator_f2()])? != gens.u_pl
            || self.v.eval(&[generator_f1(), generator_f2()])? != gens.v_pl
        {
            return fail("U or V does not evaluate to the subgroup generators");
        }
        if self.u.is_empty() || self.v.is_empty() || !m_conditions_hold(&self.u, &self.v, self.m) {
            return fail("m violates the prefix conditions");
        }
        Ok(())
    }
}

/// Exhaustive relation check of `(g, h)` at word length `2 * radius`.
pub fn verify_free_ball(bundle: &MarkingBundle, radius: usize) -> RelationCheck {
    check_no_relations(&bundle.generators(), 2 * radius)
}

/// What `w(g, h)` should do on the middle block `[m+n, m+n+1]`.
pub fn middle_block_shadow(bundle: &MarkingBundle, w: &Word) -> Result<PlMap, MarkingError> {
    let inner = w.eval(&[bundle.a.clone(), bundle.b.clone()])?;
    let shift = bundle.m + bundle.n as i64;
    let sigma: i64 = (0..2).map(|g| w.exponent_sum(g)).sum();
    Ok(inner.conjugate(&PlMap::translation(shift)).then(&PlMap::translation(sigma)))
}

/// Compares `w(g, h)` with its shadow on the middle block.
pub fn shadow_check(bundle: &MarkingBundle, w: &Word) -> Result<bool, MarkingError> {
    let actual = w.eval(&bundle.generators())?;
    let expect = middle_block_shadow(bundle, w)?;
    let lo = Rational::from_int(bundle.m + bundle.n as i64);
    let hi = &lo + &Rational::one();
    Ok(actual.agrees_on(&expect, &lo, &hi))
}

/// `g^-1 h g`, checked to fix `(-inf, 1]` and move every point of `(1, inf)` up.
pub fn alpha_of(bundle: &MarkingBundle) -> Result<PlMap, MarkingError> {
    let alpha = bundle.h.conjugate(&bundle.g);
    let one = Rational::one();
    if !alpha.fixes_interval(&Rational::zero(), &one) {
        return Err(witness_err("alpha", "alpha is not the identity on [0,1]"));
    }
    if !alpha.is_special(&one, &one) {
        return Err(witness_err("alpha", "alpha does not fix (-inf,1] and move (1,inf) up"));
    }
    Ok(alpha)
}

/// Least `k >= 0` with `inf(K) * mover^k > target_sup`.
pub fn displacement_power(mover: &PlMap, k_lo: &Rational, target_sup: &Rational) -> Result<u64, MarkingError> {
    if k_lo > target_sup {
        return Ok(0);
    }
    let moving = mover.support().components.into_iter().find(|c| c.contains(k_lo));
    let covers = moving.as_ref().is_some_and(|c| c.hi.as_ref().is_none_or(|hi| hi > target_sup));
    if !covers || mover.eval(k_lo) <= *k_lo {
        return Err(MarkingError::Displacement(format!("mover does not push [{k_lo}, {target_sup}] upward")));
    }
    let mut x = k_lo.clone();
    let mut k = 0;
    while x <= *target_sup {
        x = mover.eval(&x);
        k += 1;
    }
    Ok(k)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementWitness {
    pub slp: SlpWord,
    /// `h^s` conjugates the element into the derived subgroup of F on `[0,1]`.
    pub s: u64,
    pub k_values: Vec<u64>,
    pub unit_word_len: u64,
    pub commutators: usize,
    pub expanded_len: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationWitness {
    pub n: usize,
    pub seed: u64,
    pub p: ElementWitness,
    pub q: ElementWitness,
}

impl GenerationWitness {
    /// Exact re-evaluation of both programs over `(g, h)`.
    pub fn verify(&self, bundle: &MarkingBundle) -> Result<bool, MarkingError> {
        let gens = bundle.generators();
        Ok(self.p.slp.eval(&gens)? == bundle.p && self.q.slp.eval(&gens)? == bundle.q)
    }
}

/// Limit on the conjugation search for `s`.
const MAX_S: u64 = 100_000;

struct Lift<'a> {
    bundle: &'a MarkingBundle,
    alpha: PlMap,
    u1: PlMap,
    v1: PlMap,
}

impl Lift<'_> {
    fn witness(&self, target: &PlMap) -> Result<ElementWitness, MarkingError> {
        let h_inv = self.bundle.h.inverse();
        let mut z = target.clone();
        let mut s = 0u64;
        while !is_in_F2_derived(&z) {
            s += 1;
            if s > MAX_S {
                return Err(witness_err("conjugate", format!("no power of h up to {MAX_S} works")));
            }
            z = z.conjugate(&h_inv);
        }
        let unit = f2_subgroup_generators();
        let zw = normal_form(&tree_pair_of(&z)?).to_x01_word();
        if zw.eval(&[unit.u_pl.clone(), unit.v_pl.clone()])? != z {
            return Err(witness_err("express", "unit word does not evaluate to the conjugated element"));
        }
        let pairs = commutator_decomposition(&zw).map_err(|e| witness_err("decompose", e.to_string()))?;

        let mut b = SlpBuilder::new(2);
        let g = b.letter(0, 1);
        let h = b.letter(1, 1);
        let g_inv = b.letter(0, -1);
        let u1 = b.word_over(&self.bundle.u, &[g, h]);
        let v1 = b.word_over(&self.bundle.v, &[g, h]);
        let alpha = b.concat(vec![g_inv, h, g]);
        let one = Rational::one();
        let lifted = [self.u1.clone(), self.v1.clone()];
        let mut factors = Vec::with_capacity(pairs.len());
        let mut k_values = Vec::with_capacity(pairs.len());
        for (c, d) in &pairs {
            let l1 = c.eval(&lifted)?;
            let l2 = d.eval(&lifted)?;
            let k = match (l1.support().hull_right_of(&one), l2.support().hull_right_of(&one)) {
                (Some((lo1, _)), Some((_, hi2))) => displacement_power(&self.alpha, &lo1, &hi2)?,
                _ => 0,
            };
            k_values.push(k);
            let cn = b.word_over(c, &[u1, v1]);
            let dn = b.word_over(d, &[u1, v1]);
            let moved = if k == 0 {
                cn
            } else {
                let ak = b.power(alpha, k as i64);
                let ak_inv = b.power(alpha, -(k as i64));
                b.concat(vec![ak_inv, cn, ak])
            };
            let moved_inv = b.inverse(moved);
            let dn_inv = b.inverse(dn);
            factors.push(b.concat(vec![moved_inv, dn_inv, moved, dn]));
        }
        let product = b.concat(factors);
        let root = if s == 0 {
            product
        } else {
            let hs = b.power(h, s as i64);
            let hs_inv = b.power(h, -(s as i64));
            b.concat(vec![hs_inv, product, hs])
        };
        let slp = b.finish(root)?;
        if slp.eval(&self.bundle.generators())? != *target {
            return Err(witness_err("assemble", "program does not evaluate to the target"));
        }
        Ok(ElementWitness {
            expanded_len: slp.expanded_len(),
            slp,
            s,
            k_values,
            unit_word_len: zw.len(),
            commutators: pairs.len(),
        })
    }
}

/// Programs over `(g, h)` evaluating exactly to `p` and `q`.
pub fn generation_witness(bundle: &MarkingBundle) -> Result<GenerationWitness, MarkingError> {
    let alpha = alpha_of(bundle)?;
    let gens = bundle.generators();
    let lift = Lift { bundle, alpha, u1: bundle.u.eval(&gens)?, v1: bundle.v.eval(&gens)? };
    Ok(GenerationWitness { n: bundle.n, seed: bundle.seed, p: lift.witness(&bundle.p)?, q: lift.witness(&bundle.q)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn m_for_translation_words() {
        let f1 = Word::parse("f1", 2).unwrap();
        assert_eq!(choose_m(&f1, &f1), 5);
        assert!(m_conditions_hold(&f1, &f1, 5));
        assert!(!m_conditions_hold(&f1, &f1, 4));
        assert!((5..12).all(|m| m_conditions_hold(&f1, &f1, m)));
    }

    #[test]
    fn block_product_basics() {
        assert!(block_product(&PlMap::identity(), 3, 6).unwrap().is_identity());
        let e = PlMap::from_points_fixing_outside(vec![(q(1, 4), q(1, 4)), (q(1, 2), q(5, 8)), (q(3, 4), q(3, 4))])
            .unwrap();
        let p = block_product(&e, 3, 6).unwrap();
        assert!(p.support().within(&q(3, 1), &q(6, 1)));
        let product = (3..6).fold(PlMap::identity(), |acc, k| acc.then(&e.conjugate(&PlMap::translation(k))));
        assert_eq!(p, product);
        assert!(block_product(&generator_f2(), 0, 2).is_err());
        assert!(block_product(&e, 2, 2).is_err());
    }

    #[test]
    fn displacement_examples() {
        let f1 = generator_f1();
        assert_eq!(displacement_power(&f1, &q(12, 1), &q(10, 1)).unwrap(), 0);
        assert_eq!(displacement_power(&f1, &q(3, 1), &q(10, 1)).unwrap(), 8);
        assert!(f1.pow(7).eval(&q(3, 1)) <= q(10, 1));
        assert!(displacement_power(&f1.inverse(), &q(3, 1), &q(10, 1)).is_err());
        assert!(displacement_power(&generator_f2(), &q(-3, 1), &q(10, 1)).is_err());
    }
}
