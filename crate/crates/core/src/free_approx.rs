//! Exhaustive checks of short relations, and a seeded search for pairs in
//! the derived subgroup of the unit-interval copy of F whose balls are free.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pl::PlMap;
use crate::rational::Rational;
use crate::thompson::{f2_subgroup_generators, is_in_F2_derived};
use crate::word::{letter_inverse, Letter, Word};

/// All freely reduced words of length `<= max_len`, in shortlex order.
pub fn enumerate_reduced_words(rank: usize, max_len: usize) -> ReducedWords {
    assert!(rank >= 1, "rank must be positive");
    ReducedWords { rank, max_len, current: None }
}

pub struct ReducedWords {
    rank: usize,
    max_len: usize,
    current: Option<Vec<Letter>>,
}

impl ReducedWords {
    fn smallest_after(prev: Option<Letter>) -> Letter {
        if prev == Some(1) {
            1
        } else {
            0
        }
    }

    // next reduced word of the same length, or None on overflow
    fn advance(&self, w: &mut [Letter]) -> bool {
        let top = 2 * self.rank as Letter;
        let mut i = w.len();
        while i > 0 {
            i -= 1;
            let prev = if i == 0 { None } else { Some(w[i - 1]) };
            let mut c = w[i] + 1;
            if Some(letter_inverse(c)) == prev {
                c += 1;
            }
            if c < top {
                w[i] = c;
                for j in i + 1..w.len() {
                    w[j] = Self::smallest_after(Some(w[j - 1]));
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for ReducedWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let next = match self.current.take() {
            None => Vec::new(),
            Some(mut w) => {
                if self.advance(&mut w) {
                    w
                } else if w.len() < self.max_len {
                    vec![0; w.len() + 1]
                } else {
                    self.current = Some(w);
                    return None;
                }
            }
        };
        if self.current.is_none() && next.len() > self.max_len {
            return None;
        }
        let word = Word::from_letters(self.rank, &next);
        self.current = Some(next);
        Some(word)
    }
}

/// Number of nontrivial reduced words of length `<= n` in rank 2.
pub fn nontrivial_count(n: usize) -> u64 {
    2 * 3u64.pow(n as u32) - 2
}

/// Generators and inverses indexed by letter code.
fn letter_maps(tuple: &[PlMap]) -> Vec<PlMap> {
    tuple.iter().flat_map(|g| [g.clone(), g.inverse()]).collect()
}

/// Depth-first walk of the reduced-word tree below `prefix`, composing
/// incrementally. `visit` sees each nontrivial word and returns whether to
/// descend further.
fn walk<F>(maps: &[PlMap], max_len: usize, letters: &mut Vec<Letter>, value: &PlMap, visit: &mut F)
where
    F: FnMut(&[Letter], &PlMap) -> bool,
{
    if !visit(letters, value) || letters.len() >= max_len {
        return;
    }
    let last = *letters.last().expect("walk starts below a letter");
    for c in 0..maps.len() as Letter {
        if c == letter_inverse(last) {
            continue;
        }
        let next = value.then(&maps[c as usize]);
        letters.push(c);
        walk(maps, max_len, letters, &next, visit);
        letters.pop();
    }
}

/// Result of an exhaustive search for relations among a tuple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelationCheck {
    Free { rank: usize, max_len: usize, checked_words: u64 },
    Relation(Word),
}

impl RelationCheck {
    pub fn is_free(&self) -> bool {
        matches!(self, RelationCheck::Free { .. })
    }
}

/// Shortest nontrivial reduced word of length `<= max_len` that evaluates to
/// the identity, ties broken by lexicographic order of letter codes.
pub fn shortest_relation(tuple: &[PlMap], max_len: usize) -> Option<Word> {
    if max_len == 0 || tuple.is_empty() {
        return None;
    }
    let maps = letter_maps(tuple);
    let rank = tuple.len();
    let global = AtomicU64::new(u64::MAX);
    let results: Vec<Option<Vec<Letter>>> = (0..maps.len() as Letter)
        .into_par_iter()
        .map(|c| {
            let mut best: Option<Vec<Letter>> = None;
            let mut letters = vec![c];
            walk(&maps, max_len, &mut letters, &maps[c as usize].clone(), &mut |w, v| {
                let len = w.len() as u64;
                let local = best.as_ref().map_or(u64::MAX, |b| b.len() as u64);
                // equal-length words from earlier subtrees are lexicographically
                // smaller, so only strictly longer ones are pruned globally
                if len >= local || len > global.load(Ordering::Relaxed) {
                    return false;
                }
                if v.is_identity() {
                    best = Some(w.to_vec());
                    global.fetch_min(len, Ordering::Relaxed);
                    return false;
                }
                true
            });
            best
        })
        .collect();
    results.into_iter().flatten().map(|l| Word::from_letters(rank, &l)).min()
}

/// Evaluates every nontrivial reduced word of length `<= max_len`.
pub fn check_no_relations(tuple: &[PlMap], max_len: usize) -> RelationCheck {
    match shortest_relation(tuple, max_len) {
        Some(w) => RelationCheck::Relation(w),
        None => {
            let k = 2 * tuple.len() as u64;
            let mut count = 0u64;
            let mut level = k;
            for _ in 0..max_len {
                count += level;
                level *= k - 1;
            }
            RelationCheck::Free { rank: tuple.len(), max_len, checked_words: if tuple.is_empty() { 0 } else { count } }
        }
    }
}

/// All nontrivial reduced words of length `<= max_len` that evaluate to the identity, sorted.
pub fn trivial_words(tuple: &[PlMap], max_len: usize) -> Vec<Word> {
    if max_len == 0 || tuple.is_empty() {
        return Vec::new();
    }
    let maps = letter_maps(tuple);
    let rank = tuple.len();
    let mut found: Vec<Word> = (0..maps.len() as Letter)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut out = Vec::new();
            let mut letters = vec![c];
            walk(&maps, max_len, &mut letters, &maps[c as usize].clone(), &mut |w, v| {
                if v.is_identity() {
                    out.push(Word::from_letters(rank, w));
                }
                true
            });
            out
        })
        .collect();
    found.sort();
    found
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreeApproxError {
    #[error("radius must be at least 1")]
    BadRadius,
    #[error("candidate budget exhausted with {} surviving words", survivors.len())]
    BudgetExhausted { survivors: Vec<Word> },
    #[error("assembled pair has a relation {0}")]
    Relation(Word),
}

/// One placed candidate: `(x, y) = ([w1, w2], [w3, w4])` over the unit generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPlacement {
    pub lo: Rational,
    pub hi: Rational,
    pub candidate_id: u64,
    pub candidate: String,
    pub killed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreePairCertificate {
    pub n: usize,
    pub seed: u64,
    pub pair: (PlMap, PlMap),
    pub checked_words: u64,
    pub block_layout: Vec<BlockPlacement>,
    pub verified: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub candidates: u64,
    pub per_round: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { candidates: 4096, per_round: 16 }
    }
}

struct Candidate {
    id: u64,
    text: String,
    x: PlMap,
    y: PlMap,
}

fn random_word(rng: &mut ChaCha8Rng) -> Word {
    let len = rng.gen_range(1..=3);
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let c = rng.gen_range(0..4);
        if letters.last().is_some_and(|&p| p == letter_inverse(c)) {
            continue;
        }
        letters.push(c);
    }
    Word::from_letters(2, &letters)
}

fn draw_candidate(rng: &mut ChaCha8Rng, id: u64, unit: &[PlMap; 2]) -> Candidate {
    let ws: Vec<Word> = (0..4).map(|_| random_word(rng)).collect();
    let ev = |w: &Word| w.eval(unit).expect("rank 2");
    let x = ev(&ws[0]).commutator(&ev(&ws[1]));
    let y = ev(&ws[2]).commutator(&ev(&ws[3]));
    let t = |w: &Word| w.to_text("u");
    let text = format!("[{},{}],[{},{}]", t(&ws[0]), t(&ws[1]), t(&ws[2]), t(&ws[3]));
    Candidate { id, text, x, y }
}

/// Preorder layout of the nontrivial reduced words of length `<= n` in rank 2.
struct WordTree {
    n: usize,
    // subtree size of a node at depth d, index d
    sizes: Vec<u64>,
}

impl WordTree {
    fn new(n: usize) -> Self {
        let sizes =
            (0..=n + 1).map(|d| if d == 0 || d > n { 0 } else { (3u64.pow((n - d + 1) as u32) - 1) / 2 }).collect();
        WordTree { n, sizes }
    }

    fn total(&self) -> u64 {
        4 * self.sizes[1]
    }

    fn word_at(&self, mut idx: u64) -> Vec<Letter> {
        let mut letters: Vec<Letter> = Vec::new();
        let mut d = 1;
        loop {
            let prev = letters.last().copied();
            let mut c = 0;
            loop {
                if Some(letter_inverse(c)) == prev {
                    c += 1;
                    continue;
                }
                if idx < self.sizes[d] {
                    break;
                }
                idx -= self.sizes[d];
                c += 1;
            }
            letters.push(c);
            if idx == 0 {
                return letters;
            }
            idx -= 1;
            d += 1;
        }
    }
}

/// Indices (in preorder) of the still-alive words that are nontrivial on `(x, y)`.
fn killed_by(tree: &WordTree, alive_prefix: &[u64], x: &PlMap, y: &PlMap) -> Vec<u64> {
    let maps = letter_maps(&[x.clone(), y.clone()]);
    let alive_in = |lo: u64, len: u64| alive_prefix[(lo + len) as usize] > alive_prefix[lo as usize];
    let mut out = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn go(
        tree: &WordTree,
        maps: &[PlMap],
        alive_in: &dyn Fn(u64, u64) -> bool,
        idx: u64,
        depth: usize,
        last: Letter,
        value: &PlMap,
        out: &mut Vec<u64>,
    ) {
        if alive_in(idx, 1) && !value.is_identity() {
            out.push(idx);
        }
        if depth == tree.n {
            return;
        }
        let mut child = idx + 1;
        let size = tree.sizes[depth + 1];
        for c in 0..4 {
            if c == letter_inverse(last) {
                continue;
            }
            if alive_in(child, size) {
                go(tree, maps, alive_in, child, depth + 1, c, &value.then(&maps[c as usize]), out);
            }
            child += size;
        }
    }
    let size = tree.sizes[1];
    for c in 0..4u32 {
        let lo = c as u64 * size;
        if alive_in(lo, size) {
            go(tree, &maps, &alive_in, lo, 1, c, &maps[c as usize], &mut out);
        }
    }
    out
}

/// Block `j >= 1` of `(0,1)`: `(1 - 2^-j, 1 - 2^-j-1)`.
pub fn block_interval(j: u32) -> (Rational, Rational) {
    let one = Rational::one();
    (&one - &Rational::pow2(-(j as i64)), &one - &Rational::pow2(-(j as i64) - 1))
}

/// A pair in the derived subgroup of the unit copy of F whose radius-`n`
/// ball is free, with an exhaustive certificate.
pub fn free_pair(n: usize, seed: u64, budget: SearchBudget) -> Result<FreePairCertificate, FreeApproxError> {
    if n == 0 {
        return Err(FreeApproxError::BadRadius);
    }
    let gens = f2_subgroup_generators();
    let unit = [gens.u_pl.clone(), gens.v_pl.clone()];
    let tree = WordTree::new(n);
    let total = tree.total() as usize;
    let mut alive = vec![true; total];
    let mut remaining = total as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drawn = 0u64;
    let mut blocks: Vec<(BlockPlacement, PlMap, PlMap)> = Vec::new();
    while remaining > 0 {
        if drawn >= budget.candidates {
            let survivors = (0..total as u64)
                .filter(|&i| alive[i as usize])
                .map(|i| Word::from_letters(2, &tree.word_at(i)))
                .collect();
            return Err(FreeApproxError::BudgetExhausted { survivors });
        }
        let round = budget.per_round.min(budget.candidates - drawn).max(1);
        let cands: Vec<Candidate> = (0..round).map(|i| draw_candidate(&mut rng, drawn + i, &unit)).collect();
        drawn += round;
        let mut prefix = Vec::with_capacity(total + 1);
        prefix.push(0u64);
        for &a in &alive {
            prefix.push(prefix.last().unwrap() + a as u64);
        }
        let scored: Vec<Vec<u64>> = cands.par_iter().map(|c| killed_by(&tree, &prefix, &c.x, &c.y)).collect();
        let best = (0..cands.len())
            .filter(|&i| !scored[i].is_empty())
            .min_by(|&i, &j| scored[j].len().cmp(&scored[i].len()).then_with(|| cands[i].text.cmp(&cands[j].text)));
        let Some(b) = best else { continue };
        for &i in &scored[b] {
            alive[i as usize] = false;
        }
        remaining -= scored[b].len() as u64;
        let j = blocks.len() as u32 + 1;
        let (lo, hi) = block_interval(j);
        let scale = Rational::pow2(-(j as i64) - 1);
        let place = |e: &PlMap| e.affine_conjugate_into(&scale, &lo).expect("candidate supported in (0,1)");
        let c = &cands[b];
        let (x, y) = (place(&c.x), place(&c.y));
        blocks.push((
            BlockPlacement { lo, hi, candidate_id: c.id, candidate: c.text.clone(), killed: scored[b].len() as u64 },
            x,
            y,
        ));
    }
    let a = blocks.iter().fold(PlMap::identity(), |acc, blk| acc.then(&blk.1));
    let b = blocks.iter().fold(PlMap::identity(), |acc, blk| acc.then(&blk.2));
    debug_assert!(is_in_F2_derived(&a) && is_in_F2_derived(&b));
    let check = check_no_relations(&[a.clone(), b.clone()], n);
    let checked_words = match check {
        RelationCheck::Free { checked_words, .. } => checked_words,
        RelationCheck::Relation(w) => return Err(FreeApproxError::Relation(w)),
    };
    Ok(FreePairCertificate {
        n,
        seed,
        pair: (a, b),
        checked_words,
        block_layout: blocks.into_iter().map(|b| b.0).collect(),
        verified: true,
    })
}
