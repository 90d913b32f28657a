//! Reduced tree pairs and the leaf-exponent normal form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::pl::PlMap;
use crate::rational::Rational;
use crate::word::Word;

use super::brown::check_unit_model;
use super::ThompsonError;

/// A finite rooted binary tree; leaves are the standard dyadic intervals of a subdivision of `[0,1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Tree {
    Leaf,
    Caret(Box<Tree>, Box<Tree>),
}

impl Tree {
    pub fn caret(l: Tree, r: Tree) -> Tree {
        Tree::Caret(Box::new(l), Box::new(r))
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Tree::Leaf => 1,
            Tree::Caret(l, r) => l.leaf_count() + r.leaf_count(),
        }
    }

    /// Leaves as `(numerator, depth)`: the interval `[a/2^d, (a+1)/2^d]`.
    pub fn leaves(&self) -> Vec<(u128, u32)> {
        fn go(t: &Tree, a: u128, d: u32, out: &mut Vec<(u128, u32)>) {
            match t {
                Tree::Leaf => out.push((a, d)),
                Tree::Caret(l, r) => {
                    go(l, 2 * a, d + 1, out);
                    go(r, 2 * a + 1, d + 1, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, 0, 0, &mut out);
        out
    }

    /// Rebuilds the tree whose leaves are the given subdivision.
    pub fn from_leaves(leaves: &[(u128, u32)]) -> Option<Tree> {
        fn go(a: u128, d: u32, leaves: &[(u128, u32)]) -> Option<Tree> {
            match leaves {
                [] => None,
                [(la, ld)] if *la == a && *ld == d => Some(Tree::Leaf),
                _ => {
                    let split = leaves.iter().position(|&(la, ld)| ld > d && la >> (ld - d - 1) == 2 * a + 1)?;
                    let (l, r) = leaves.split_at(split);
                    Some(Tree::caret(go(2 * a, d + 1, l)?, go(2 * a + 1, d + 1, r)?))
                }
            }
        }
        go(0, 0, leaves)
    }

    /// Leaf exponents: the number of left edges climbing from each leaf,
    /// stopping at the right spine.
    pub fn leaf_exponents(&self) -> Vec<u64> {
        fn go(t: &Tree, run: u64, on_spine: bool, out: &mut Vec<u64>) {
            match t {
                Tree::Leaf => out.push(run),
                Tree::Caret(l, r) => {
                    go(l, if on_spine { 0 } else { run + 1 }, false, out);
                    go(r, 0, on_spine, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, 0, true, &mut out);
        out
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf => f.write_str("."),
            Tree::Caret(l, r) => write!(f, "({l}{r})"),
        }
    }
}

impl FromStr for Tree {
    type Err = ThompsonError;

    fn from_str(s: &str) -> Result<Tree, ThompsonError> {
        fn parse(b: &[u8], pos: &mut usize) -> Option<Tree> {
            match b.get(*pos)? {
                b'.' => {
                    *pos += 1;
                    Some(Tree::Leaf)
                }
                b'(' => {
                    *pos += 1;
                    let l = parse(b, pos)?;
                    let r = parse(b, pos)?;
                    if b.get(*pos) != Some(&b')') {
                        return None;
                    }
                    *pos += 1;
                    Some(Tree::caret(l, r))
                }
                _ => None,
            }
        }
        let bytes = s.trim().as_bytes();
        let mut pos = 0;
        match parse(bytes, &mut pos) {
            Some(t) if pos == bytes.len() => Ok(t),
            _ => Err(ThompsonError::BadTree(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TreePairJson", into = "TreePairJson")]
pub struct TreePair {
    domain: Tree,
    range: Tree,
}

#[derive(Serialize, Deserialize)]
struct TreePairJson {
    domain: String,
    range: String,
}

impl From<TreePair> for TreePairJson {
    fn from(tp: TreePair) -> Self {
        TreePairJson { domain: tp.domain.to_string(), range: tp.range.to_string() }
    }
}

impl TryFrom<TreePairJson> for TreePair {
    type Error = ThompsonError;
    fn try_from(j: TreePairJson) -> Result<Self, ThompsonError> {
        TreePair::new(j.domain.parse()?, j.range.parse()?)
    }
}

fn is_sibling_pair(a: (u128, u32), b: (u128, u32)) -> bool {
    a.1 == b.1 && a.1 > 0 && a.0.is_multiple_of(2) && b.0 == a.0 + 1
}

fn endpoint(a: u128, d: u32) -> Rational {
    Rational::from_bigs(a.into(), num_bigint::BigInt::from(1u8) << d)
}

impl TreePair {
    pub fn new(domain: Tree, range: Tree) -> Result<Self, ThompsonError> {
        if domain.leaf_count() != range.leaf_count() {
            return Err(ThompsonError::LeafCountMismatch { domain: domain.leaf_count(), range: range.leaf_count() });
        }
        Ok(TreePair { domain, range })
    }

    pub fn trivial() -> Self {
        TreePair { domain: Tree::Leaf, range: Tree::Leaf }
    }

    pub fn domain(&self) -> &Tree {
        &self.domain
    }

    pub fn range(&self) -> &Tree {
        &self.range
    }

    pub fn leaf_count(&self) -> usize {
        self.domain.leaf_count()
    }

    /// Removes carets that sit over the same leaf pair in both trees.
    pub fn reduce(&self) -> TreePair {
        let mut d = self.domain.leaves();
        let mut r = self.range.leaves();
        let mut i = 0;
        while i + 1 < d.len() {
            if is_sibling_pair(d[i], d[i + 1]) && is_sibling_pair(r[i], r[i + 1]) {
                d[i] = (d[i].0 / 2, d[i].1 - 1);
                r[i] = (r[i].0 / 2, r[i].1 - 1);
                d.remove(i + 1);
                r.remove(i + 1);
                i = i.saturating_sub(1);
            } else {
                i += 1;
            }
        }
        TreePair {
            domain: Tree::from_leaves(&d).expect("merging siblings keeps a subdivision"),
            range: Tree::from_leaves(&r).expect("merging siblings keeps a subdivision"),
        }
    }

    pub fn is_reduced(&self) -> bool {
        let d = self.domain.leaves();
        let r = self.range.leaves();
        !(0..d.len().saturating_sub(1)).any(|i| is_sibling_pair(d[i], d[i + 1]) && is_sibling_pair(r[i], r[i + 1]))
    }

    /// The element mapping each domain leaf affinely onto the matching range leaf.
    pub fn to_plmap(&self) -> PlMap {
        let d = self.domain.leaves();
        let r = self.range.leaves();
        let mut pts = vec![(Rational::zero(), Rational::zero())];
        for (a, b) in d.iter().zip(&r) {
            pts.push((endpoint(a.0 + 1, a.1), endpoint(b.0 + 1, b.1)));
        }
        PlMap::from_points_fixing_outside(pts).expect("leaf endpoints increase")
    }
}

impl fmt::Display for TreePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.domain, self.range)
    }
}

/// Depth at which every interval is a leaf: `E + max(0, s) + 2`, with `E` the
/// largest denominator exponent and `s` the largest slope exponent.
fn depth_bound(g: &PlMap) -> Result<u32, ThompsonError> {
    let mut e = 0u64;
    for (x, y) in g.breaks() {
        for v in [x, y] {
            let d = v.dyadic_depth().ok_or_else(|| ThompsonError::NonDyadic(v.clone()))?;
            e = e.max(d);
        }
    }
    let mut s = 0i64;
    for slope in g.all_slopes() {
        let k = slope.log2_exact().ok_or_else(|| ThompsonError::NonDyadicSlope(slope.clone()))?;
        s = s.max(k);
    }
    Ok((e + s as u64 + 2) as u32)
}

/// The reduced tree pair of a dyadic element acting on `[0,1]`.
pub fn tree_pair_of(g: &PlMap) -> Result<TreePair, ThompsonError> {
    check_unit_model(g)?;
    let bound = depth_bound(g)?;
    if bound >= 120 {
        return Err(ThompsonError::DepthExceeded { depth: bound });
    }
    let xs: Vec<&Rational> = g.breaks().iter().map(|p| &p.0).collect();
    let mut dom = Vec::new();
    let mut ran = Vec::new();
    // explicit stack, right child pushed first so leaves come out in order
    let mut stack = vec![(0u128, 0u32)];
    while let Some((a, d)) = stack.pop() {
        let lo = endpoint(a, d);
        let hi = endpoint(a + 1, d);
        let first_inside = xs.partition_point(|x| **x <= lo);
        let affine = xs.get(first_inside).is_none_or(|x| **x >= hi);
        if affine {
            let (glo, ghi) = (g.eval(&lo), g.eval(&hi));
            let len = &ghi - &glo;
            if let Some(k) = len.log2_exact() {
                if k <= 0 {
                    let depth = (-k) as u32;
                    let scaled = &glo * &Rational::pow2(depth as i64);
                    if scaled.is_integer() {
                        let num = scaled.to_i64().filter(|&n| n >= 0).expect("image inside [0,1]") as u128;
                        dom.push((a, d));
                        ran.push((num, depth));
                        continue;
                    }
                }
            }
        }
        if d >= bound {
            return Err(ThompsonError::DepthExceeded { depth: bound });
        }
        stack.push((2 * a + 1, d + 1));
        stack.push((2 * a, d + 1));
    }
    let domain = Tree::from_leaves(&dom).expect("top-down leaves form a subdivision");
    let range =
        Tree::from_leaves(&ran).ok_or_else(|| ThompsonError::NotUnitModel("image leaves do not form a tree".into()))?;
    Ok(TreePair { domain, range }.reduce())
}

/// `x_0^{a_0} ... x_n^{a_n} x_n^{-b_n} ... x_0^{-b_0}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormalForm {
    pub positive: Vec<u64>,
    pub negative: Vec<u64>,
}

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

pub fn normal_form(tp: &TreePair) -> NormalForm {
    NormalForm { positive: trim(tp.domain.leaf_exponents()), negative: trim(tp.range.leaf_exponents()) }
}

impl NormalForm {
    pub fn is_identity(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty()
    }

    /// The word over `(x_0, x_1)`, using `x_n = x_0^{-(n-1)} x_1 x_0^{n-1}`.
    pub fn to_x01_word(&self) -> Word {
        let syllable = |i: usize, e: i64| -> Word {
            if i == 0 {
                Word::letter(2, 0, e)
            } else {
                let c = (i - 1) as i64;
                Word::letter(2, 0, -c).concat(&Word::letter(2, 1, e)).concat(&Word::letter(2, 0, c))
            }
        };
        let mut w = Word::identity(2);
        for (i, &a) in self.positive.iter().enumerate() {
            if a > 0 {
                w = w.concat(&syllable(i, a as i64));
            }
        }
        for (i, &b) in self.negative.iter().enumerate().rev() {
            if b > 0 {
                w = w.concat(&syllable(i, -(b as i64)));
            }
        }
        w
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, &a) in self.positive.iter().enumerate().filter(|p| *p.1 > 0) {
            parts.push(if a == 1 { format!("x{i}") } else { format!("x{i}^{a}") });
        }
        for (i, &b) in self.negative.iter().enumerate().rev().filter(|p| *p.1 > 0) {
            parts.push(format!("x{i}^-{b}"));
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}
