use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::complex::SimplicialComplex;
use crate::psc::Psc;
use crate::Point;

use super::{DecodeState, TokenError, EOS};

/// Next-token scorer. Higher scores are tried first.
pub trait Scorer {
    /// Fills `scores[i]` for `candidates[i]`, given the tokens so far.
    fn score(&mut self, prefix: &[u32], candidates: &[u32], scores: &mut Vec<f64>) -> Result<(), String>;
}

/// Scores every candidate equally, so the sampling noise alone orders them.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformScorer;

impl Scorer for UniformScorer {
    fn score(&mut self, _prefix: &[u32], candidates: &[u32], scores: &mut Vec<f64>) -> Result<(), String> {
        scores.clear();
        scores.resize(candidates.len(), 0.0);
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error("scorer failed: {0}")]
    Scorer(String),
    #[error("scorer returned a non-finite score for token {0}")]
    NonFiniteScore(u32),
    #[error("no valid continuation exists")]
    Exhausted,
    #[error(transparent)]
    Token(#[from] TokenError),
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub tokens: Vec<u32>,
    pub psc: Psc,
    pub complex: SimplicialComplex,
    /// Number of times the search undid a token.
    pub backtracks: usize,
}

/// Samples a token stream with a depth-first search over oracle-admitted
/// tokens.
///
/// At each position the admissible tokens are ordered by score plus Gumbel
/// noise (so the first is a softmax sample and the order is a sample without
/// replacement) and tried in that order. A position with no admissible
/// token left is undone and the search resumes at its parent. After
/// `max_splits` records only `EOS` is offered. The root is the origin.
pub fn constrained_generate(scorer: &mut dyn Scorer, seed: u64, max_splits: usize) -> Result<Generated, GenerateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = DecodeState::new(Point::origin());
    let mut frames: Vec<Vec<u32>> = Vec::new();
    let mut scores = Vec::new();
    let mut backtracks = 0;

    while !state.finished() {
        let mut cands = state.admissible();
        if state.at_record_boundary() && state.splits().len() >= max_splits && !state.tokens().is_empty() {
            cands.retain(|&t| t == EOS);
        }
        scorer.score(state.tokens(), &cands, &mut scores).map_err(GenerateError::Scorer)?;
        if scores.len() != cands.len() {
            return Err(GenerateError::Scorer(format!("{} scores for {} candidates", scores.len(), cands.len())));
        }
        let mut keyed: Vec<(f64, u32)> = Vec::with_capacity(cands.len());
        for (&t, &s) in cands.iter().zip(&scores) {
            if !s.is_finite() {
                return Err(GenerateError::NonFiniteScore(t));
            }
            let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
            keyed.push((s - (-u.ln()).ln(), t));
        }
        // best last, so candidates pop off the end
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
        frames.push(keyed.into_iter().map(|(_, t)| t).collect());

        loop {
            let Some(frame) = frames.last_mut() else {
                return Err(GenerateError::Exhausted);
            };
            if let Some(t) = frame.pop() {
                debug_assert!(state.admits(t));
                state.push(t)?;
                break;
            }
            frames.pop();
            if frames.is_empty() {
                return Err(GenerateError::Exhausted);
            }
            state.pop();
            backtracks += 1;
        }
    }
    Ok(Generated {
        tokens: state.tokens().to_vec(),
        psc: Psc { root: Point::origin(), splits: state.splits().to_vec() },
        complex: state.complex().clone(),
        backtracks,
    })
}
