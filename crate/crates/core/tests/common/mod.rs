#![allow(dead_code)]

use fmark::free_approx::{free_pair, BlockPlacement, FreePairCertificate, SearchBudget};
use fmark::marked_space::{distance_to_free, relation_spectrum};
use fmark::marking::{alpha_of, shadow_check, MarkingBundle};
use fmark::thompson::{eval_on_generators, f2_subgroup_generators, generator_f1, generator_f2};
use fmark::{Affine, PlMap, Rational, Word};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};

pub fn word(max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0u32..4, 0..=max_len).prop_map(|l| Word::from_letters(2, &l))
}

pub fn thompson_element(max_len: usize) -> impl Strategy<Value = PlMap> {
    word(max_len).prop_map(|w| eval_on_generators(&w).unwrap())
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-40i64..40, 1i64..7).prop_map(|(n, d)| Rational::new(n, d))
}

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..9, 1i64..9).prop_map(|(n, d)| Rational::new(n, d))
}

/// Arbitrary PL homeomorphisms with rational data (not necessarily in F).
pub fn pl_map() -> impl Strategy<Value = PlMap> {
    (
        small_rational(),
        small_rational(),
        prop::collection::vec((positive_rational(), positive_rational()), 0..6),
        positive_rational(),
        positive_rational(),
    )
        .prop_map(|(x0, y0, steps, sl, sr)| {
            if steps.is_empty() && sl == sr {
                return PlMap::affine(Affine::new(sl.clone(), &y0 - &(&sl * &x0)));
            }
            let mut pts = vec![(x0, y0)];
            for (dx, dy) in steps {
                let (x, y) = pts.last().unwrap().clone();
                pts.push((&x + &dx, &y + &dy));
            }
            let (fx, fy) = pts[0].clone();
            let (lx, ly) = pts.last().unwrap().clone();
            let left = Affine::new(sl.clone(), &fy - &(&sl * &fx));
            let right = Affine::new(sr.clone(), &ly - &(&sr * &lx));
            PlMap::new(pts, left, right).unwrap()
        })
}

pub fn rational() -> impl Strategy<Value = Rational> {
    (-400i64..400, 1i64..33).prop_map(|(n, d)| Rational::new(n, d))
}

pub fn right_action(f: &PlMap, g: &PlMap, x: &Rational) -> Result<(), TestCaseError> {
    prop_assert_eq!(f.then(g).eval(x), g.eval(&f.eval(x)));
    prop_assert_eq!(fmark::compose(f, g).eval(x), g.eval(&f.eval(x)));
    Ok(())
}

pub fn group_axioms(f: &PlMap, g: &PlMap, h: &PlMap) -> Result<(), TestCaseError> {
    prop_assert_eq!(f.then(g).then(h), f.then(&g.then(h)));
    prop_assert_eq!(&f.then(&PlMap::identity()), f);
    prop_assert_eq!(&PlMap::identity().then(f), f);
    prop_assert!(f.then(&f.inverse()).is_identity());
    prop_assert!(f.inverse().then(f).is_identity());
    prop_assert_eq!(f.then(g).inverse(), g.inverse().then(&f.inverse()));
    Ok(())
}

pub fn canonicality(f: &PlMap) -> Result<(), TestCaseError> {
    let slopes: Vec<&Rational> = f.all_slopes().collect();
    if f.breakpoint_count() == 0 {
        prop_assert_eq!(f.left(), f.right());
    } else {
        prop_assert!(slopes.windows(2).all(|w| w[0] != w[1]), "adjacent pieces share a slope");
    }
    // inserting points on the graph does not change the canonical form
    let mut pts: Vec<(Rational, Rational)> = Vec::new();
    let xs: Vec<Rational> = f.breaks().iter().map(|p| p.0.clone()).collect();
    let first = xs.first().cloned().unwrap_or_else(Rational::zero);
    pts.push((&first - &Rational::one(), f.eval(&(&first - &Rational::one()))));
    for w in xs.windows(2) {
        pts.push((w[0].clone(), f.eval(&w[0])));
        let mid = &(&w[0] + &w[1]) / &Rational::from_int(2);
        pts.push((mid.clone(), f.eval(&mid)));
    }
    if let Some(last) = xs.last() {
        pts.push((last.clone(), f.eval(last)));
        pts.push((last + &Rational::one(), f.eval(&(last + &Rational::one()))));
    }
    let g = PlMap::new(pts, f.left().clone(), f.right().clone()).unwrap();
    prop_assert_eq!(&g, f);
    let text = serde_json::to_string(f).unwrap();
    prop_assert_eq!(&serde_json::from_str::<PlMap>(&text).unwrap(), f);
    Ok(())
}

pub fn support_transport(f: &PlMap, g: &PlMap) -> Result<(), TestCaseError> {
    prop_assert_eq!(f.conjugate(g).support(), f.support().image(g));
    for c in &f.support().components {
        if let (Some(lo), Some(hi)) = (&c.lo, &c.hi) {
            let mid = &(lo + hi) / &Rational::from_int(2);
            prop_assert!(f.eval(&mid) != mid);
            prop_assert_eq!(f.eval(lo), lo.clone());
        }
    }
    Ok(())
}

pub fn breakpoint_bound(f: &PlMap, g: &PlMap) -> Result<(), TestCaseError> {
    prop_assert!(f.then(g).breakpoint_count() <= f.breakpoint_count() + g.breakpoint_count());
    Ok(())
}

pub fn closure(f: &PlMap, g: &PlMap) -> Result<(), TestCaseError> {
    prop_assert!(f.is_thompson_element() && g.is_thompson_element());
    prop_assert!(f.then(g).is_thompson_element());
    prop_assert!(f.inverse().is_thompson_element());
    Ok(())
}

/// Parses a candidate label `[w1,w2],[w3,w4]` back into the placed pair.
pub fn candidate_maps(block: &BlockPlacement) -> (PlMap, PlMap) {
    let gens = f2_subgroup_generators();
    let unit = [gens.u_pl.clone(), gens.v_pl.clone()];
    let body = block.candidate.trim_start_matches('[').trim_end_matches(']');
    let ws: Vec<Word> =
        body.split("],[").flat_map(|pair| pair.split(',')).map(|t| Word::parse(t, 2).unwrap()).collect();
    assert_eq!(ws.len(), 4);
    let ev = |w: &Word| w.eval(&unit).unwrap();
    (ev(&ws[0]).commutator(&ev(&ws[1])), ev(&ws[2]).commutator(&ev(&ws[3])))
}

pub fn block_disjointness(cert: &FreePairCertificate) -> Result<(), TestCaseError> {
    let blocks = &cert.block_layout;
    for w in blocks.windows(2) {
        prop_assert!(w[0].hi <= w[1].lo, "blocks overlap");
    }
    let (a, b) = &cert.pair;
    for blk in blocks {
        let (x, y) = candidate_maps(blk);
        let scale = &blk.hi - &blk.lo;
        let place = |e: &PlMap| e.affine_conjugate_into(&scale, &blk.lo).unwrap();
        prop_assert_eq!(a.restrict_to(&blk.lo, &blk.hi).unwrap(), place(&x));
        prop_assert_eq!(b.restrict_to(&blk.lo, &blk.hi).unwrap(), place(&y));
    }
    let (one, zero) = (Rational::one(), Rational::zero());
    let lo = blocks.first().map(|b| b.lo.clone()).unwrap_or(zero);
    let hi = blocks.last().map(|b| b.hi.clone()).unwrap_or(one);
    prop_assert!(a.support().within(&lo, &hi) && b.support().within(&lo, &hi));
    Ok(())
}

pub fn certified_words_nontrivial(cert: &FreePairCertificate, words: &[Word]) -> Result<(), TestCaseError> {
    let pair = [cert.pair.0.clone(), cert.pair.1.clone()];
    for w in words {
        let r = w.reduced();
        if r.is_empty() || r.len() as usize > cert.n {
            continue;
        }
        prop_assert!(!r.eval(&pair).unwrap().is_identity(), "certified word {} is trivial", r);
    }
    Ok(())
}

pub fn free_pair_determinism(n: usize, seed: u64) -> Result<(), TestCaseError> {
    let a = free_pair(n, seed, SearchBudget::default()).unwrap();
    let b = free_pair(n, seed, SearchBudget::default()).unwrap();
    prop_assert_eq!(a, b);
    Ok(())
}

/// Structural facts about a marking that do not depend on a word.
pub fn marking_structure(bundle: &MarkingBundle) -> Result<(), TestCaseError> {
    let (c, d) = bundle.interval;
    let one = Rational::one();
    for k in c..d {
        let lo = Rational::from_int(k);
        let hi = &lo + &one;
        prop_assert_eq!(bundle.p.restrict_to(&lo, &hi).unwrap(), bundle.a.affine_conjugate_into(&one, &lo).unwrap());
        prop_assert_eq!(bundle.q.restrict_to(&lo, &hi).unwrap(), bundle.b.affine_conjugate_into(&one, &lo).unwrap());
    }
    let (lo, hi) = (Rational::from_int(c), Rational::from_int(d));
    prop_assert!(bundle.g.agrees_on(&generator_f1(), &Rational::from_int(-1000), &lo));
    prop_assert!(bundle.g.agrees_on(&generator_f1(), &hi, &Rational::from_int(1000)));
    prop_assert!(bundle.h.agrees_on(&generator_f2(), &Rational::from_int(-1000), &lo));
    prop_assert!(bundle.h.agrees_on(&generator_f2(), &hi, &Rational::from_int(1000)));
    prop_assert!(bundle.g.is_thompson_element() && bundle.h.is_thompson_element());
    // U and V over (g, h) still act as the subgroup generators near [0, 2]
    let gens = f2_subgroup_generators();
    let (zero, two) = (Rational::zero(), Rational::from_int(2));
    let marked = bundle.generators();
    prop_assert!(bundle.u.eval(&marked).unwrap().agrees_on(&gens.u_pl, &zero, &two));
    prop_assert!(bundle.v.eval(&marked).unwrap().agrees_on(&gens.v_pl, &zero, &two));
    prop_assert!(generator_f2().is_special(&zero, &one));
    prop_assert!(alpha_of(bundle).is_ok());
    Ok(())
}

/// Words of length `<= n` over `(g, h)` act on the middle block as their `(a, b)` shadow.
pub fn marking_shadow(bundle: &MarkingBundle, w: &Word) -> Result<(), TestCaseError> {
    let r = w.reduced();
    if r.len() as usize <= bundle.n {
        prop_assert!(shadow_check(bundle, &r).unwrap(), "shadow mismatch for {}", r);
    }
    Ok(())
}

/// Elements of `<U1, V1>` are supported in `[0, 1]` together with a compact `J` with `inf(J) > 2`.
pub fn substitution_locality(bundle: &MarkingBundle, w: &Word) -> Result<(), TestCaseError> {
    let marked = bundle.generators();
    let sub = [bundle.u.eval(&marked).unwrap(), bundle.v.eval(&marked).unwrap()];
    let e = w.eval(&sub).unwrap();
    let (zero, one, two) = (Rational::zero(), Rational::one(), Rational::from_int(2));
    let mut j: Option<(Rational, Rational)> = None;
    for c in &e.support().components {
        let (Some(lo), Some(hi)) = (&c.lo, &c.hi) else {
            return Err(TestCaseError::fail(format!("unbounded support component for {w}")));
        };
        if *lo >= zero && *hi <= one {
            continue;
        }
        prop_assert!(*lo > two, "support component [{}, {}] meets [1, 2]", lo, hi);
        j = Some(match j {
            None => (lo.clone(), hi.clone()),
            Some((a, b)) => (std::cmp::min(a, lo.clone()), std::cmp::max(b, hi.clone())),
        });
    }
    if let Some((lo, _)) = j {
        prop_assert!(lo > two);
    }
    Ok(())
}

/// Spectra grow with the cutoff and the measured radius never shrinks.
pub fn spectrum_nesting(tuple: &[PlMap]) -> Result<(), TestCaseError> {
    let small = relation_spectrum(tuple, 4);
    let large = relation_spectrum(tuple, 6);
    for w in &small.trivial_words {
        prop_assert!(large.contains(w));
        prop_assert!(large.contains(&w.inverse()));
    }
    prop_assert!(large.trivial_words.iter().filter(|w| w.len() <= 4).eq(small.trivial_words.iter()));
    let (d2, d3) = (distance_to_free(tuple, 2), distance_to_free(tuple, 3));
    prop_assert!(d2.n <= d3.n);
    if d2.exact {
        prop_assert_eq!((d2.n, d2.exact, &d2.relation), (d3.n, d3.exact, &d3.relation));
    }
    Ok(())
}

/// Runs `strategy`/`test` with a fixed RNG seed; returns the failure message if any.
pub fn run_seeded<S: Strategy>(
    seed: u64,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config { cases, rng_seed: RngSeed::Fixed(seed), failure_persistence: None, ..Config::default() };
    TestRunner::new(config).run(&strategy, test).map_err(|e| e.to_string())
}
