//! Token layout for vertex splits, BPE compression, the validity oracle
//! and constrained generation.
//!
//! One split is the record
//!
//! ```text
//! vsid hi, vsid lo            0..=255
//! offset x hi, y hi, z hi,    256 + byte  (binary16 bytes)
//! offset x lo, y lo, z lo
//! vertex label                512..=513   (V0, V1)
//! triangle labels             514..=516   (F0..F2), ascending triangle id
//! edge labels                 517..=520   (E0..E3), ascending edge id
//! midpoint flag               521 (false) or 522 (true)
//! ```
//!
//! A stream is `BOS record* EOS`, optionally followed by `PAD`s. The root
//! position is not part of the stream.

mod bpe;
mod file;
mod generate;
mod phi;

use std::fmt;

use half::f16;
use thiserror::Error;

use crate::complex::SimplicialComplex;
use crate::psc::{apply_vsplit, check_rules, Psc, RuleError, StarLayout, TopoLabel, VertexSplit};
use crate::{Point, Vector};

pub use bpe::{bpe_apply, bpe_decode, bpe_train, records, BpeError, Vocabulary};
pub use file::{read_tokens, write_tokens, TokenFileError};
pub use generate::{constrained_generate, GenerateError, Generated, Scorer, UniformScorer};
pub use phi::DecodeState;

pub const INDEX_BASE: u32 = 0;
pub const OFFSET_BASE: u32 = 256;
pub const VERTEX_BASE: u32 = 512;
pub const FACE_BASE: u32 = 514;
pub const EDGE_BASE: u32 = 517;
pub const MIDPOINT_FALSE: u32 = 521;
pub const MIDPOINT_TRUE: u32 = 522;
pub const BOS: u32 = 523;
pub const EOS: u32 = 524;
pub const PAD: u32 = 525;
pub const BASE_VOCAB: u32 = 526;
pub const MAX_VOCAB: u32 = 16_384;
/// Two index bytes address at most this many vertices.
pub const MAX_TOKEN_VERTICES: usize = 65_536;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenClass {
    Index,
    Offset,
    Vertex,
    Face,
    Edge,
    Midpoint,
    Bos,
    Eos,
    Pad,
}

impl fmt::Display for TokenClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenClass::Index => "index byte",
            TokenClass::Offset => "offset byte",
            TokenClass::Vertex => "vertex label",
            TokenClass::Face => "triangle label",
            TokenClass::Edge => "edge label",
            TokenClass::Midpoint => "midpoint flag",
            TokenClass::Bos => "BOS",
            TokenClass::Eos => "EOS",
            TokenClass::Pad => "PAD",
        };
        f.write_str(s)
    }
}

/// Class of a base token id, or `None` for ids outside the base vocabulary.
pub fn token_class(id: u32) -> Option<TokenClass> {
    Some(match id {
        0..=255 => TokenClass::Index,
        256..=511 => TokenClass::Offset,
        512..=513 => TokenClass::Vertex,
        514..=516 => TokenClass::Face,
        517..=520 => TokenClass::Edge,
        521..=522 => TokenClass::Midpoint,
        BOS => TokenClass::Bos,
        EOS => TokenClass::Eos,
        PAD => TokenClass::Pad,
        _ => return None,
    })
}

pub fn label_token(l: TopoLabel) -> u32 {
    let c = l.code() as u32;
    match l {
        TopoLabel::V0 | TopoLabel::V1 => VERTEX_BASE + c,
        TopoLabel::E0 | TopoLabel::E1 | TopoLabel::E2 | TopoLabel::E3 => EDGE_BASE + c - 2,
        _ => FACE_BASE + c - 6,
    }
}

pub fn token_label(id: u32) -> Option<TopoLabel> {
    match token_class(id)? {
        TokenClass::Vertex => TopoLabel::from_code((id - VERTEX_BASE) as u8),
        TokenClass::Edge => TopoLabel::from_code((id - EDGE_BASE) as u8 + 2),
        TokenClass::Face => TopoLabel::from_code((id - FACE_BASE) as u8 + 6),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TokenErrorKind {
    #[error("{expected} expected, got {got} (token {id})")]
    ClassMismatch { expected: TokenClass, got: String, id: u32 },
    #[error("stream ended inside a record")]
    PrematureEnd,
    #[error("vertex index {0} does not fit in two bytes")]
    VsidOverflow(u32),
    #[error("vertex {vsid} does not exist ({vertex_count} vertices)")]
    VsidOutOfRange { vsid: u32, vertex_count: usize },
    #[error("complex would exceed {MAX_TOKEN_VERTICES} vertices")]
    TooManyVertices,
    #[error("offset is not finite in binary16")]
    NonFiniteOffset,
    #[error("expected {expected} labels for this star, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error(transparent)]
    Rules(#[from] RuleError),
    #[error("token {0} rejected by the validity oracle")]
    Rejected(u32),
    #[error("tokens after EOS")]
    TrailingTokens,
    #[error("stream is not terminated by EOS")]
    MissingEos,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("token {position}: {kind}")]
pub struct TokenError {
    pub position: usize,
    pub kind: TokenErrorKind,
}

fn class_name(id: u32) -> String {
    token_class(id).map_or_else(|| format!("unknown id {id}"), |c| c.to_string())
}

/// Binary16 bytes of an offset, high bytes (x, y, z) then low bytes.
pub fn offset_bytes(offset: &Vector) -> Result<[u8; 6], TokenErrorKind> {
    let mut out = [0u8; 6];
    for k in 0..3 {
        let h = f16::from_f64(offset[k]);
        if !h.is_finite() {
            return Err(TokenErrorKind::NonFiniteOffset);
        }
        let [lo, hi] = h.to_bits().to_le_bytes();
        out[k] = hi;
        out[3 + k] = lo;
    }
    Ok(out)
}

pub fn offset_from_bytes(b: &[u8; 6]) -> Vector {
    Vector::from_fn(|k, _| f16::from_bits(u16::from_le_bytes([b[3 + k], b[k]])).to_f64())
}

/// Tokens of one split record. `layout` is the star of `vs.vsid` in the
/// complex the split applies to. Offsets are rounded to binary16.
pub fn encode_vsplit(vs: &VertexSplit, layout: &StarLayout) -> Result<Vec<u32>, TokenErrorKind> {
    if vs.vsid as usize >= MAX_TOKEN_VERTICES {
        return Err(TokenErrorKind::VsidOverflow(vs.vsid));
    }
    if vs.labels.len() != layout.label_count() {
        return Err(TokenErrorKind::LabelCount { expected: layout.label_count(), got: vs.labels.len() });
    }
    check_rules(&vs.labels, layout)?;
    let mut out = Vec::with_capacity(10 + vs.labels.len());
    out.push(INDEX_BASE + (vs.vsid >> 8));
    out.push(INDEX_BASE + (vs.vsid & 0xff));
    out.extend(offset_bytes(&vs.offset)?.iter().map(|&b| OFFSET_BASE + b as u32));
    out.extend(vs.labels.iter().map(|&l| label_token(l)));
    out.push(if vs.midpoint { MIDPOINT_TRUE } else { MIDPOINT_FALSE });
    Ok(out)
}

/// Parses one record from the front of `tokens` for a split applied to `c`.
/// Returns the split and the number of tokens consumed. Error positions are
/// relative to `tokens`.
pub fn decode_vsplit(tokens: &[u32], c: &SimplicialComplex) -> Result<(VertexSplit, usize), TokenError> {
    let mut pos = 0;
    let mut next = |expected: TokenClass| -> Result<u32, TokenError> {
        let at = pos;
        let id = *tokens.get(at).ok_or(TokenError { position: at, kind: TokenErrorKind::PrematureEnd })?;
        pos += 1;
        if token_class(id) != Some(expected) {
            return Err(TokenError { position: at, kind: TokenErrorKind::ClassMismatch { expected, got: class_name(id), id } });
        }
        Ok(id)
    };
    let hi = next(TokenClass::Index)? - INDEX_BASE;
    let lo = next(TokenClass::Index)? - INDEX_BASE;
    let vsid = (hi << 8) | lo;
    if vsid as usize >= c.vertex_count() {
        return Err(TokenError { position: 1, kind: TokenErrorKind::VsidOutOfRange { vsid, vertex_count: c.vertex_count() } });
    }
    let mut bytes = [0u8; 6];
    for b in &mut bytes {
        *b = (next(TokenClass::Offset)? - OFFSET_BASE) as u8;
    }
    let offset = offset_from_bytes(&bytes);
    if !offset.iter().all(|x| x.is_finite()) {
        return Err(TokenError { position: 2, kind: TokenErrorKind::NonFiniteOffset });
    }
    let layout = StarLayout::of(c, vsid);
    let mut labels = Vec::with_capacity(layout.label_count());
    labels.push(token_label(next(TokenClass::Vertex)?).unwrap());
    for _ in 0..layout.triangles.len() {
        labels.push(token_label(next(TokenClass::Face)?).unwrap());
    }
    for _ in 0..layout.edges.len() {
        labels.push(token_label(next(TokenClass::Edge)?).unwrap());
    }
    let midpoint = next(TokenClass::Midpoint)? == MIDPOINT_TRUE;
    check_rules(&labels, &layout).map_err(|e| TokenError { position: 8, kind: e.into() })?;
    Ok((VertexSplit { vsid, midpoint, offset, labels }, pos))
}

/// `BOS`, one record per split, `EOS`. Offsets are rounded to binary16.
pub fn tokenize(psc: &Psc) -> Result<Vec<u32>, TokenError> {
    if psc.vertex_count() > MAX_TOKEN_VERTICES {
        return Err(TokenError { position: 0, kind: TokenErrorKind::TooManyVertices });
    }
    let mut c = SimplicialComplex::single_point(psc.root);
    let mut out = vec![BOS];
    for vs in &psc.splits {
        let at = out.len();
        let err = |kind| TokenError { position: at, kind };
        if vs.vsid as usize >= c.vertex_count() {
            return Err(err(TokenErrorKind::VsidOutOfRange { vsid: vs.vsid, vertex_count: c.vertex_count() }));
        }
        let layout = StarLayout::of(&c, vs.vsid);
        out.extend(encode_vsplit(vs, &layout).map_err(err)?);
        apply_vsplit(&mut c, vs).map_err(|e| {
            err(match e {
                crate::psc::SplitError::Rules(r) => TokenErrorKind::Rules(r),
                _ => TokenErrorKind::NonFiniteOffset,
            })
        })?;
    }
    out.push(EOS);
    Ok(out)
}

/// Inverse of [`tokenize`]: parses `BOS record* EOS PAD*` into a PSC rooted
/// at `root`.
pub fn detokenize(tokens: &[u32], root: Point) -> Result<Psc, TokenError> {
    let err = |position, kind| TokenError { position, kind };
    match tokens.first() {
        Some(&BOS) => {}
        Some(&id) => return Err(err(0, TokenErrorKind::ClassMismatch { expected: TokenClass::Bos, got: class_name(id), id })),
        None => return Err(err(0, TokenErrorKind::PrematureEnd)),
    }
    let mut c = SimplicialComplex::single_point(root);
    let mut splits = Vec::new();
    let mut pos = 1;
    loop {
        match tokens.get(pos) {
            None => return Err(err(pos, TokenErrorKind::MissingEos)),
            Some(&EOS) => {
                pos += 1;
                break;
            }
            Some(_) => {}
        }
        if c.vertex_count() >= MAX_TOKEN_VERTICES {
            return Err(err(pos, TokenErrorKind::TooManyVertices));
        }
        let (vs, used) = decode_vsplit(&tokens[pos..], &c).map_err(|e| err(pos + e.position, e.kind))?;
        apply_vsplit(&mut c, &vs).expect("decoded split passed rule checks");
        splits.push(vs);
        pos += used;
    }
    if tokens[pos..].iter().any(|&t| t != PAD) {
        return Err(err(pos, TokenErrorKind::TrailingTokens));
    }
    Ok(Psc { root, splits })
}

/// Base tokens one record of this split takes: `10 + |F| + |E|`.
pub fn record_len(layout: &StarLayout) -> usize {
    10 + layout.triangles.len() + layout.edges.len()
}
