//! Words over a finite ranked alphabet with inverses.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pl::PlMap;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("assignment has {got} maps but the word has rank {rank}")]
    RankMismatch { rank: usize, got: usize },
    #[error("generator {gen} out of range for rank {rank}")]
    GeneratorOutOfRange { gen: usize, rank: usize },
    #[error("cannot parse word token `{0}`")]
    Parse(String),
    #[error("exponent sum of generator {gen} is {sum}, expected 0")]
    NonzeroExponentSum { gen: usize, sum: i64 },
}

/// A word as a sequence of syllables `(generator, exponent)`.
///
/// Construction does not reduce; [`Word::reduced`] returns the freely reduced
/// form. Ordering is shortlex over unit letters, with letters ordered
/// `x0 < x0^-1 < x1 < x1^-1 < ...`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Word {
    rank: usize,
    syllables: Vec<(usize, i64)>,
}

/// Unit letter code: `2 * generator + (1 if inverted)`.
pub type Letter = u32;

pub fn letter_code(gen: usize, inverse: bool) -> Letter {
    (2 * gen + inverse as usize) as Letter
}

pub fn letter_inverse(l: Letter) -> Letter {
    l ^ 1
}

impl Word {
    pub fn identity(rank: usize) -> Self {
        Word { rank, syllables: Vec::new() }
    }

    pub fn new(rank: usize, syllables: Vec<(usize, i64)>) -> Result<Self, WordError> {
        if let Some(&(gen, _)) = syllables.iter().find(|(g, _)| *g >= rank) {
            return Err(WordError::GeneratorOutOfRange { gen, rank });
        }
        Ok(Word { rank, syllables: syllables.into_iter().filter(|(_, e)| *e != 0).collect() })
    }

    pub fn letter(rank: usize, gen: usize, exp: i64) -> Self {
        Self::new(rank, vec![(gen, exp)]).expect("generator in range")
    }

    pub fn from_letters(rank: usize, letters: &[Letter]) -> Self {
        let mut w = Word::identity(rank);
        for &l in letters {
            let gen = (l / 2) as usize;
            let e = if l & 1 == 1 { -1 } else { 1 };
            w.push(gen, e);
        }
        w
    }

    // appends without reducing across the boundary beyond merging equal generators
    fn push(&mut self, gen: usize, exp: i64) {
        if exp == 0 {
            return;
        }
        if let Some(last) = self.syllables.last_mut() {
            if last.0 == gen {
                last.1 += exp;
                if last.1 == 0 {
                    self.syllables.pop();
                }
                return;
            }
        }
        self.syllables.push((gen, exp));
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn syllables(&self) -> &[(usize, i64)] {
        &self.syllables
    }

    pub fn len(&self) -> u64 {
        self.syllables.iter().map(|(_, e)| e.unsigned_abs()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.syllables.iter().flat_map(|&(g, e)| std::iter::repeat_n(letter_code(g, e < 0), e.unsigned_abs() as usize))
    }

    /// Freely reduced form: adjacent syllables on one generator merged, zero exponents removed.
    pub fn reduced(&self) -> Word {
        let mut out = Word::identity(self.rank);
        for &(g, e) in &self.syllables {
            out.push(g, e);
        }
        out
    }

    pub fn is_reduced(&self) -> bool {
        self.syllables.windows(2).all(|w| w[0].0 != w[1].0) && self.syllables.iter().all(|(_, e)| *e != 0)
    }

    pub fn inverse(&self) -> Word {
        Word { rank: self.rank, syllables: self.syllables.iter().rev().map(|&(g, e)| (g, -e)).collect() }
    }

    /// Concatenation followed by free reduction at the seam.
    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.clone();
        for &(g, e) in &other.syllables {
            out.push(g, e);
        }
        out
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity(self.rank);
        for _ in 0..k.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    /// `[a, b] = a^-1 b^-1 a b`.
    pub fn commutator(a: &Word, b: &Word) -> Word {
        a.inverse().concat(&b.inverse()).concat(a).concat(b)
    }

    pub fn exponent_sum(&self, gen: usize) -> i64 {
        self.syllables.iter().filter(|(g, _)| *g == gen).map(|(_, e)| e).sum()
    }

    /// Replace generator `i` by `images[i]`.
    pub fn substitute(&self, images: &[Word]) -> Result<Word, WordError> {
        if images.len() != self.rank {
            return Err(WordError::RankMismatch { rank: self.rank, got: images.len() });
        }
        let rank = images.first().map_or(0, |w| w.rank);
        let mut out = Word::identity(rank);
        for &(g, e) in &self.syllables {
            out = out.concat(&images[g].pow(e));
        }
        Ok(out)
    }

    /// Evaluate in right-action order: the first letter acts first.
    pub fn eval(&self, assignment: &[PlMap]) -> Result<PlMap, WordError> {
        if assignment.len() != self.rank {
            return Err(WordError::RankMismatch { rank: self.rank, got: assignment.len() });
        }
        let mut acc = PlMap::identity();
        for &(g, e) in &self.syllables {
            acc = acc.then(&assignment[g].pow(e));
        }
        Ok(acc)
    }

    /// All cyclic rotations of the letter sequence.
    pub fn rotations(&self) -> Vec<Word> {
        let letters: Vec<Letter> = self.letters().collect();
        (0..letters.len())
            .map(|i| {
                let rotated: Vec<Letter> = letters[i..].iter().chain(letters[..i].iter()).copied().collect();
                Word::from_letters(self.rank, &rotated)
            })
            .collect()
    }

    /// Text form with the given generator prefix, e.g. `f1 f2^-1 f1^2`.
    pub fn to_text(&self, prefix: &str) -> String {
        self.syllables
            .iter()
            .map(|&(g, e)| if e == 1 { format!("{prefix}{}", g + 1) } else { format!("{prefix}{}^{e}", g + 1) })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses text such as `f1 f2^-1 f1^2` over an alphabet of the given rank.
    /// Any alphabetic prefix is accepted; generator indices are 1-based.
    pub fn parse(text: &str, rank: usize) -> Result<Word, WordError> {
        let mut syllables = Vec::new();
        for tok in text.split_whitespace() {
            let bad = || WordError::Parse(tok.to_string());
            let body = tok.trim_start_matches(|c: char| c.is_ascii_alphabetic() || c == '_');
            if body.len() == tok.len() {
                return Err(bad());
            }
            let (idx, exp) = match body.split_once('^') {
                Some((i, e)) => (i, e.parse::<i64>().map_err(|_| bad())?),
                None => (body, 1),
            };
            let idx: usize = idx.parse().map_err(|_| bad())?;
            if idx == 0 {
                return Err(bad());
            }
            syllables.push((idx - 1, exp));
        }
        Word::new(rank, syllables)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.letters().cmp(other.letters())).then(self.rank.cmp(&other.rank))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        write!(f, "{}", self.to_text("f"))
    }
}

impl FromStr for Word {
    type Err = WordError;

    /// Rank is inferred from the largest generator index that appears.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let w = Word::parse(s, usize::MAX)?;
        let rank = w.syllables.iter().map(|(g, _)| g + 1).max().unwrap_or(0);
        Ok(Word { rank, syllables: w.syllables })
    }
}

#[derive(Serialize, Deserialize)]
struct WordJson {
    rank: usize,
    text: String,
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        WordJson { rank: self.rank, text: self.to_text("f") }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = WordJson::deserialize(d)?;
        Word::parse(&raw.text, raw.rank).map_err(serde::de::Error::custom)
    }
}

/// Product-of-commutators decomposition of a word with zero exponent sums.
///
/// Returns pairs `(c_i, d_i)` with `w` freely equal to `[c_1, d_1] ... [c_r, d_r]`.
/// Each step peels the first letter `a` together with its first later
/// inverse: `a B a^-1 C = [a^-1, B^-1] (B C)`.
pub fn commutator_decomposition(w: &Word) -> Result<Vec<(Word, Word)>, WordError> {
    for gen in 0..w.rank() {
        let sum = w.exponent_sum(gen);
        if sum != 0 {
            return Err(WordError::NonzeroExponentSum { gen, sum });
        }
    }
    let rank = w.rank();
    let mut rest: Vec<Letter> = w.reduced().letters().collect();
    let mut out = Vec::new();
    while !rest.is_empty() {
        let a = rest[0];
        let pos = rest
            .iter()
            .position(|&l| l == letter_inverse(a))
            .expect("zero exponent sum guarantees a matching inverse letter");
        let b = &rest[1..pos];
        let bw = Word::from_letters(rank, b);
        out.push((Word::from_letters(rank, &[letter_inverse(a)]), bw.inverse()));
        let mut next: Vec<Letter> = b.to_vec();
        next.extend_from_slice(&rest[pos + 1..]);
        rest = Word::from_letters(rank, &next).letters().collect();
    }
    Ok(out)
}
