//! Straight-line programs: DAG-compressed words.
//!
//! Each node refers only to earlier nodes, so node order is a topological
//! order. Evaluation walks the nodes once and memoizes every reachable value;
//! the literal expansion is never built unless asked for.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pl::PlMap;
use crate::word::{Word, WordError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum SlpNode {
    Letter { gen: usize, exp: i64 },
    Concat { parts: Vec<usize> },
    Inverse { of: usize },
    Power { of: usize, exp: i64 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SlpError {
    #[error("node {node} refers to node {target}, which is not earlier")]
    ForwardReference { node: usize, target: usize },
    #[error("node {node} uses generator {gen} outside rank {rank}")]
    GeneratorOutOfRange { node: usize, gen: usize, rank: usize },
    #[error("root {root} out of range for {len} nodes")]
    BadRoot { root: usize, len: usize },
    #[error("expansion has {len} letters, above the limit {limit}")]
    TooLong { len: u128, limit: u128 },
    #[error(transparent)]
    Word(#[from] WordError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SlpJson", into = "SlpJson")]
pub struct SlpWord {
    rank: usize,
    nodes: Vec<SlpNode>,
    root: usize,
}

#[derive(Clone, Serialize, Deserialize)]
struct SlpJson {
    rank: usize,
    nodes: Vec<SlpNode>,
    root: usize,
}

impl From<SlpWord> for SlpJson {
    fn from(s: SlpWord) -> Self {
        SlpJson { rank: s.rank, nodes: s.nodes, root: s.root }
    }
}

impl TryFrom<SlpJson> for SlpWord {
    type Error = SlpError;
    fn try_from(j: SlpJson) -> Result<Self, SlpError> {
        SlpWord::new(j.rank, j.nodes, j.root)
    }
}

/// Incremental construction of an [`SlpWord`].
#[derive(Clone, Debug, Default)]
pub struct SlpBuilder {
    rank: usize,
    nodes: Vec<SlpNode>,
}

impl SlpBuilder {
    pub fn new(rank: usize) -> Self {
        SlpBuilder { rank, nodes: Vec::new() }
    }

    fn push(&mut self, node: SlpNode) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn letter(&mut self, gen: usize, exp: i64) -> usize {
        assert!(gen < self.rank, "generator out of range");
        self.push(SlpNode::Letter { gen, exp })
    }

    pub fn concat(&mut self, parts: Vec<usize>) -> usize {
        self.push(SlpNode::Concat { parts })
    }

    pub fn inverse(&mut self, of: usize) -> usize {
        self.push(SlpNode::Inverse { of })
    }

    pub fn power(&mut self, of: usize, exp: i64) -> usize {
        self.push(SlpNode::Power { of, exp })
    }

    /// A plain word whose generator `i` is interpreted as node `images[i]`.
    pub fn word_over(&mut self, w: &Word, images: &[usize]) -> usize {
        let parts =
            w.syllables().iter().map(|&(g, e)| if e == 1 { images[g] } else { self.power(images[g], e) }).collect();
        self.concat(parts)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn finish(self, root: usize) -> Result<SlpWord, SlpError> {
        SlpWord::new(self.rank, self.nodes, root)
    }
}

impl SlpWord {
    pub fn new(rank: usize, nodes: Vec<SlpNode>, root: usize) -> Result<Self, SlpError> {
        if root >= nodes.len() {
            return Err(SlpError::BadRoot { root, len: nodes.len() });
        }
        for (i, n) in nodes.iter().enumerate() {
            let refs: Vec<usize> = match n {
                SlpNode::Letter { gen, .. } => {
                    if *gen >= rank {
                        return Err(SlpError::GeneratorOutOfRange { node: i, gen: *gen, rank });
                    }
                    Vec::new()
                }
                SlpNode::Concat { parts } => parts.clone(),
                SlpNode::Inverse { of } | SlpNode::Power { of, .. } => vec![*of],
            };
            if let Some(&t) = refs.iter().find(|&&t| t >= i) {
                return Err(SlpError::ForwardReference { node: i, target: t });
            }
        }
        Ok(SlpWord { rank, nodes, root })
    }

    pub fn from_word(w: &Word) -> Self {
        let mut b = SlpBuilder::new(w.rank());
        let gens: Vec<usize> = (0..w.rank()).map(|g| b.letter(g, 1)).collect();
        let root = b.word_over(w, &gens);
        b.finish(root).expect("well-formed by construction")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn nodes(&self) -> &[SlpNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut seen[i], true) {
                continue;
            }
            match &self.nodes[i] {
                SlpNode::Letter { .. } => {}
                SlpNode::Concat { parts } => stack.extend(parts.iter().copied()),
                SlpNode::Inverse { of } | SlpNode::Power { of, .. } => stack.push(*of),
            }
        }
        seen
    }

    /// Evaluates the root under `assignment`, composing in right-action order.
    pub fn eval(&self, assignment: &[PlMap]) -> Result<PlMap, SlpError> {
        if assignment.len() != self.rank {
            return Err(WordError::RankMismatch { rank: self.rank, got: assignment.len() }.into());
        }
        let live = self.reachable();
        let mut values: Vec<Option<PlMap>> = vec![None; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if !live[i] {
                continue;
            }
            let get = |j: usize| values[j].as_ref().expect("earlier reachable node evaluated");
            let v = match node {
                SlpNode::Letter { gen, exp } => assignment[*gen].pow(*exp),
                SlpNode::Concat { parts } => parts.iter().fold(PlMap::identity(), |acc, &p| acc.then(get(p))),
                SlpNode::Inverse { of } => get(*of).inverse(),
                SlpNode::Power { of, exp } => get(*of).pow(*exp),
            };
            values[i] = Some(v);
        }
        Ok(values[self.root].take().expect("root evaluated"))
    }

    /// Number of letters of the literal expansion (saturating).
    pub fn expanded_len(&self) -> u128 {
        let mut lens: Vec<u128> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let l = match node {
                SlpNode::Letter { exp, .. } => exp.unsigned_abs() as u128,
                SlpNode::Concat { parts } => parts.iter().fold(0u128, |a, &p| a.saturating_add(lens[p])),
                SlpNode::Inverse { of } => lens[*of],
                SlpNode::Power { of, exp } => lens[*of].saturating_mul(exp.unsigned_abs() as u128),
            };
            lens.push(l);
        }
        lens[self.root]
    }

    /// Literal expansion, refused above `limit` letters.
    pub fn expand(&self, limit: u128) -> Result<Word, SlpError> {
        let len = self.expanded_len();
        if len > limit {
            return Err(SlpError::TooLong { len, limit });
        }
        let live = self.reachable();
        let mut words: Vec<Option<Word>> = vec![None; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if !live[i] {
                continue;
            }
            let get = |j: usize| words[j].as_ref().expect("earlier reachable node expanded");
            let w = match node {
                SlpNode::Letter { gen, exp } => Word::letter(self.rank, *gen, *exp),
                SlpNode::Concat { parts } => parts.iter().fold(Word::identity(self.rank), |acc, &p| acc.concat(get(p))),
                SlpNode::Inverse { of } => get(*of).inverse(),
                SlpNode::Power { of, exp } => get(*of).pow(*exp),
            };
            words[i] = Some(w);
        }
        Ok(words[self.root].take().expect("root expanded"))
    }
}
