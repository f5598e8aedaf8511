//! Byte-pair encoding over base token streams.
//!
//! Merges never span records: a stream is cut after every midpoint flag and
//! around `BOS`, `EOS` and `PAD`, and pairs are only counted and merged
//! inside a piece.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use super::{token_class, TokenClass, BASE_VOCAB, MAX_VOCAB};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BpeError {
    #[error("token id {0} is not in the vocabulary")]
    UnknownId(u32),
    #[error("vocabulary size {0} is outside {BASE_VOCAB}..={MAX_VOCAB}")]
    BadTarget(usize),
    #[error("merge table line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Base vocabulary plus an ordered merge table. Merge `i` creates id
/// `BASE_VOCAB + i` from the pair it lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    merges: Vec<(u32, u32)>,
}

impl Vocabulary {
    pub fn from_merges(merges: Vec<(u32, u32)>) -> Result<Self, BpeError> {
        for (i, &(a, b)) in merges.iter().enumerate() {
            let new = BASE_VOCAB + i as u32;
            if a >= new || b >= new {
                return Err(BpeError::Parse {
                    line: i + 1,
                    message: format!("merge ({a}, {b}) references an id not defined before {new}"),
                });
            }
        }
        if BASE_VOCAB as usize + merges.len() > MAX_VOCAB as usize {
            return Err(BpeError::BadTarget(BASE_VOCAB as usize + merges.len()));
        }
        Ok(Vocabulary { merges })
    }

    pub fn merges(&self) -> &[(u32, u32)] {
        &self.merges
    }

    pub fn size(&self) -> usize {
        BASE_VOCAB as usize + self.merges.len()
    }

    /// One merge per line: `left right new`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, (a, b)) in self.merges.iter().enumerate() {
            let _ = writeln!(out, "{a} {b} {}", BASE_VOCAB as usize + i);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, BpeError> {
        let mut merges = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| BpeError::Parse { line: ln + 1, message };
            let nums: Vec<u32> =
                line.split_whitespace().map(|t| t.parse().map_err(|_| bad(format!("bad number {t:?}")))).collect::<Result<_, _>>()?;
            let [a, b, new] = nums[..] else {
                return Err(bad("expected `left right new`".into()));
            };
            let want = BASE_VOCAB + merges.len() as u32;
            if new != want {
                return Err(bad(format!("new id {new}, expected {want}")));
            }
            merges.push((a, b));
        }
        Self::from_merges(merges)
    }

    fn ranks(&self) -> HashMap<(u32, u32), u32> {
        self.merges.iter().enumerate().map(|(i, &p)| (p, BASE_VOCAB + i as u32)).collect()
    }
}

/// Splits a base stream into the pieces BPE works on. Control tokens form
/// pieces of their own.
pub fn records(tokens: &[u32]) -> Vec<&[u32]> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, &t) in tokens.iter().enumerate() {
        match token_class(t) {
            Some(TokenClass::Bos | TokenClass::Eos | TokenClass::Pad) => {
                if start < i {
                    out.push(&tokens[start..i]);
                }
                out.push(&tokens[i..i + 1]);
                start = i + 1;
            }
            Some(TokenClass::Midpoint) => {
                out.push(&tokens[start..=i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if start < tokens.len() {
        out.push(&tokens[start..]);
    }
    out
}

fn is_control(piece: &[u32]) -> bool {
    piece.len() == 1 && matches!(token_class(piece[0]), Some(TokenClass::Bos | TokenClass::Eos | TokenClass::Pad))
}

/// Replaces every non-overlapping occurrence of `(a, b)`, left to right.
fn merge_word(word: &[u32], a: u32, b: u32, new: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(word.len());
    let mut i = 0;
    while i < word.len() {
        if i + 1 < word.len() && word[i] == a && word[i + 1] == b {
            out.push(new);
            i += 2;
        } else {
            out.push(word[i]);
            i += 1;
        }
    }
    out
}

/// Learns merges until the vocabulary has `target` entries or no adjacent
/// pair occurs at least twice. The most frequent pair wins; ties go to the
/// smaller `(left, right)`.
pub fn bpe_train(corpus: &[Vec<u32>], target: usize) -> Result<Vocabulary, BpeError> {
    if !(BASE_VOCAB as usize..=MAX_VOCAB as usize).contains(&target) {
        return Err(BpeError::BadTarget(target));
    }
    let mut word_index: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut words: Vec<Vec<u32>> = Vec::new();
    let mut freq: Vec<i64> = Vec::new();
    for stream in corpus {
        for piece in records(stream) {
            if piece.len() < 2 || is_control(piece) {
                continue;
            }
            let id = *word_index.entry(piece.to_vec()).or_insert_with(|| {
                words.push(piece.to_vec());
                freq.push(0);
                words.len() - 1
            });
            freq[id] += 1;
        }
    }
    drop(word_index);

    let mut counts: HashMap<(u32, u32), i64> = HashMap::new();
    let mut holders: HashMap<(u32, u32), HashSet<usize>> = HashMap::new();
    for (w, word) in words.iter().enumerate() {
        for p in word.windows(2) {
            let pair = (p[0], p[1]);
            *counts.entry(pair).or_insert(0) += freq[w];
            holders.entry(pair).or_default().insert(w);
        }
    }
    let mut heap: BinaryHeap<(i64, Reverse<(u32, u32)>)> = counts.iter().map(|(&p, &c)| (c, Reverse(p))).collect();

    let mut merges = Vec::new();
    while BASE_VOCAB as usize + merges.len() < target {
        let Some((c, Reverse(pair))) = heap.pop() else { break };
        if counts.get(&pair).copied() != Some(c) {
            continue;
        }
        if c < 2 {
            break;
        }
        let new = BASE_VOCAB + merges.len() as u32;
        merges.push(pair);

        let mut affected: Vec<usize> = holders.remove(&pair).unwrap_or_default().into_iter().collect();
        affected.sort_unstable();
        let mut delta: HashMap<(u32, u32), i64> = HashMap::new();
        for w in affected {
            let old = &words[w];
            if !old.windows(2).any(|p| (p[0], p[1]) == pair) {
                continue;
            }
            let merged = merge_word(old, pair.0, pair.1, new);
            for p in old.windows(2) {
                *delta.entry((p[0], p[1])).or_insert(0) -= freq[w];
            }
            for p in merged.windows(2) {
                let q = (p[0], p[1]);
                *delta.entry(q).or_insert(0) += freq[w];
                holders.entry(q).or_default().insert(w);
            }
            words[w] = merged;
        }
        let mut changed: Vec<((u32, u32), i64)> = delta.into_iter().filter(|&(_, d)| d != 0).collect();
        changed.sort_unstable();
        for (q, d) in changed {
            let e = counts.entry(q).or_insert(0);
            *e += d;
            if *e > 0 {
                heap.push((*e, Reverse(q)));
            } else {
                counts.remove(&q);
            }
        }
        counts.remove(&pair);
    }
    Ok(Vocabulary { merges })
}

/// Compresses a base stream, merging within pieces in merge-table order.
pub fn bpe_apply(tokens: &[u32], vocab: &Vocabulary) -> Result<Vec<u32>, BpeError> {
    if let Some(&bad) = tokens.iter().find(|&&t| t >= BASE_VOCAB) {
        return Err(BpeError::UnknownId(bad));
    }
    let ranks = vocab.ranks();
    let mut out = Vec::with_capacity(tokens.len());
    for piece in records(tokens) {
        let mut word = piece.to_vec();
        loop {
            let best = word.windows(2).filter_map(|p| ranks.get(&(p[0], p[1])).map(|&r| (r, (p[0], p[1])))).min();
            let Some((new, (a, b))) = best else { break };
            word = merge_word(&word, a, b, new);
        }
        out.extend(word);
    }
    Ok(out)
}

/// Expands merged ids back to base tokens.
pub fn bpe_decode(tokens: &[u32], vocab: &Vocabulary) -> Result<Vec<u32>, BpeError> {
    let mut out = Vec::with_capacity(tokens.len() * 2);
    let mut stack = Vec::new();
    for &t in tokens {
        if t as usize >= vocab.size() {
            return Err(BpeError::UnknownId(t));
        }
        stack.push(t);
        while let Some(x) = stack.pop() {
            if x < BASE_VOCAB {
                out.push(x);
            } else {
                let (a, b) = vocab.merges[(x - BASE_VOCAB) as usize];
                stack.push(b);
                stack.push(a);
            }
        }
    }
    Ok(out)
}
