use crate::complex::SimplicialComplex;
use crate::psc::{apply_vsplit, StarLayout, TopoLabel, VertexSplit};
use crate::Point;

use super::{
    offset_from_bytes, token_label, TokenError, TokenErrorKind, BASE_VOCAB, BOS, EDGE_BASE, EOS, FACE_BASE, MAX_TOKEN_VERTICES,
    MIDPOINT_FALSE, MIDPOINT_TRUE, OFFSET_BASE, PAD, VERTEX_BASE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Start,
    RecordStart,
    IndexLo,
    /// Offset byte `k` of 6.
    Offset(u8),
    Vertex,
    Face(usize),
    Edge(usize),
    Midpoint,
    Done,
}

const WORDS: usize = (BASE_VOCAB as usize).div_ceil(64);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Mask([u64; WORDS]);

impl Mask {
    fn empty() -> Self {
        Mask([0; WORDS])
    }

    fn set(&mut self, id: u32) {
        self.0[id as usize / 64] |= 1 << (id % 64);
    }

    fn set_range(&mut self, lo: u32, hi: u32) {
        let mut id = lo;
        while id < hi {
            let (w, b) = (id as usize / 64, id % 64);
            let n = (hi - id).min(64 - b);
            let bits = if n == 64 { u64::MAX } else { ((1u64 << n) - 1) << b };
            self.0[w] |= bits;
            id += n;
        }
    }

    fn push_ids(&self, out: &mut Vec<u32>) {
        for (w, &word) in self.0.iter().enumerate() {
            let mut rest = word;
            while rest != 0 {
                out.push(w as u32 * 64 + rest.trailing_zeros());
                rest &= rest - 1;
            }
        }
    }

    fn get(&self, id: u32) -> bool {
        id < BASE_VOCAB && self.0[id as usize / 64] & (1 << (id % 64)) != 0
    }
}

/// Edge labels still allowed (bit `k` for `E{k}`) given the vertex label and
/// the label of one triangle containing the edge.
fn edge_bits_for_face(face: TopoLabel) -> u8 {
    match face {
        TopoLabel::F0 => 0b1101,
        TopoLabel::F1 => 0b1110,
        _ => 0b1100,
    }
}

/// Incremental parser for `BOS record* EOS PAD*` that knows which token may
/// come next.
///
/// The state holds the complex reconstructed from the complete records so
/// far. [`DecodeState::admits`] is the validity oracle: it accepts a token iff
/// the extended prefix can still be completed to a valid stream. Because an
/// edge label `E2` is compatible with every vertex and triangle label, no
/// admitted prefix is a dead end.
#[derive(Debug, Clone)]
pub struct DecodeState {
    complex: SimplicialComplex,
    phase: Phase,
    tokens: Vec<u32>,
    record_start: usize,
    /// Complex before each record, for [`DecodeState::pop`].
    checkpoints: Vec<SimplicialComplex>,
    splits: Vec<VertexSplit>,
    vsid: u32,
    offset: [u8; 6],
    midpoint: bool,
    layout: StarLayout,
    edge_triangles: Vec<Vec<usize>>,
    labels: Vec<TopoLabel>,
    mask: Option<Mask>,
}

impl DecodeState {
    /// State before `BOS`, reconstructing from a single point at `root`.
    pub fn new(root: Point) -> Self {
        DecodeState {
            complex: SimplicialComplex::single_point(root),
            phase: Phase::Start,
            tokens: Vec::new(),
            record_start: 0,
            checkpoints: Vec::new(),
            splits: Vec::new(),
            vsid: 0,
            offset: [0; 6],
            midpoint: false,
            layout: StarLayout::default(),
            edge_triangles: Vec::new(),
            labels: Vec::new(),
            mask: None,
        }
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn tokens(&self) -> &[u32] {
        &self.tokens
    }

    pub fn splits(&self) -> &[VertexSplit] {
        &self.splits
    }

    /// Between records (or before `BOS`), where a whole number of splits has
    /// been decoded.
    pub fn at_record_boundary(&self) -> bool {
        matches!(self.phase, Phase::Start | Phase::RecordStart | Phase::Done)
    }

    pub fn finished(&self) -> bool {
        self.phase == Phase::Done
    }

    fn compute_mask(&self) -> Mask {
        let mut m = Mask::empty();
        let n = self.complex.vertex_count() as u32;
        match self.phase {
            Phase::Start => m.set(BOS),
            Phase::RecordStart => {
                m.set(EOS);
                if (n as usize) < MAX_TOKEN_VERTICES {
                    m.set_range(0, (n - 1) / 256 + 1);
                }
            }
            Phase::IndexLo => {
                let hi = self.vsid << 8;
                m.set_range(0, (n - hi).min(256));
            }
            Phase::Offset(k) if k < 3 => {
                // exponent bits all ones would be infinity or NaN
                for b in (0..256u32).step_by(4) {
                    if b & 0x7C != 0x7C {
                        m.set_range(OFFSET_BASE + b, OFFSET_BASE + b + 4);
                    }
                }
            }
            Phase::Offset(_) => m.set_range(OFFSET_BASE, OFFSET_BASE + 256),
            Phase::Vertex => m.set_range(VERTEX_BASE, VERTEX_BASE + 2),
            Phase::Face(_) => m.set_range(FACE_BASE, FACE_BASE + 3),
            Phase::Edge(j) => {
                let mut bits: u8 = if self.labels[0] == TopoLabel::V0 { 0b0111 } else { 0b1111 };
                for &i in &self.edge_triangles[j] {
                    bits &= edge_bits_for_face(self.labels[1 + i]);
                }
                for k in 0..4 {
                    if bits & (1 << k) != 0 {
                        m.set(EDGE_BASE + k);
                    }
                }
            }
            Phase::Midpoint => {
                m.set(MIDPOINT_FALSE);
                m.set(MIDPOINT_TRUE);
            }
            Phase::Done => m.set(PAD),
        }
        m
    }

    fn mask(&mut self) -> Mask {
        if let Some(m) = self.mask {
            return m;
        }
        let m = self.compute_mask();
        self.mask = Some(m);
        m
    }

    /// The validity oracle: may `id` come next?
    pub fn admits(&mut self, id: u32) -> bool {
        self.mask().get(id)
    }

    /// All admissible next tokens, ascending.
    pub fn admissible(&mut self) -> Vec<u32> {
        let m = self.mask();
        let mut out = Vec::with_capacity(m.0.iter().map(|w| w.count_ones() as usize).sum());
        m.push_ids(&mut out);
        out
    }

    fn after_labels_phase(&self, next_face: usize) -> Phase {
        if next_face < self.layout.triangles.len() {
            Phase::Face(next_face)
        } else if !self.layout.edges.is_empty() {
            Phase::Edge(0)
        } else {
            Phase::Midpoint
        }
    }

    /// Appends `id` if the oracle admits it.
    pub fn push(&mut self, id: u32) -> Result<(), TokenError> {
        if !self.admits(id) {
            return Err(TokenError { position: self.tokens.len(), kind: TokenErrorKind::Rejected(id) });
        }
        self.mask = None;
        self.tokens.push(id);
        self.phase = match self.phase {
            Phase::Start => Phase::RecordStart,
            Phase::RecordStart if id == EOS => Phase::Done,
            Phase::RecordStart => {
                self.checkpoints.push(self.complex.clone());
                self.record_start = self.tokens.len() - 1;
                self.vsid = id;
                Phase::IndexLo
            }
            Phase::IndexLo => {
                self.vsid = (self.vsid << 8) | id;
                Phase::Offset(0)
            }
            Phase::Offset(k) => {
                self.offset[k as usize] = (id - OFFSET_BASE) as u8;
                if k < 5 {
                    Phase::Offset(k + 1)
                } else {
                    self.layout = StarLayout::of(&self.complex, self.vsid);
                    self.edge_triangles = vec![Vec::new(); self.layout.edges.len()];
                    for (i, pair) in self.layout.triangle_edges.iter().enumerate() {
                        for &j in pair {
                            self.edge_triangles[j].push(i);
                        }
                    }
                    self.labels.clear();
                    Phase::Vertex
                }
            }
            Phase::Vertex => {
                self.labels.push(token_label(id).unwrap());
                self.after_labels_phase(0)
            }
            Phase::Face(i) => {
                self.labels.push(token_label(id).unwrap());
                self.after_labels_phase(i + 1)
            }
            Phase::Edge(j) => {
                self.labels.push(token_label(id).unwrap());
                if j + 1 < self.layout.edges.len() {
                    Phase::Edge(j + 1)
                } else {
                    Phase::Midpoint
                }
            }
            Phase::Midpoint => {
                self.midpoint = id == MIDPOINT_TRUE;
                let vs = VertexSplit {
                    vsid: self.vsid,
                    midpoint: self.midpoint,
                    offset: offset_from_bytes(&self.offset),
                    labels: std::mem::take(&mut self.labels),
                };
                apply_vsplit(&mut self.complex, &vs).expect("oracle admitted an invalid split");
                self.splits.push(vs);
                Phase::RecordStart
            }
            Phase::Done => Phase::Done,
        };
        Ok(())
    }

    /// Removes the last token, restoring the previous state.
    pub fn pop(&mut self) -> Option<u32> {
        let last = *self.tokens.last()?;
        let mut replay: Vec<u32>;
        match self.phase {
            Phase::Start => return None,
            Phase::Done if last == EOS => {
                self.tokens.pop();
                self.phase = Phase::RecordStart;
                self.mask = None;
                return Some(last);
            }
            Phase::Done => {
                self.tokens.pop();
                self.mask = None;
                return Some(last);
            }
            Phase::RecordStart if last == BOS => {
                self.tokens.clear();
                self.phase = Phase::Start;
                self.mask = None;
                return Some(last);
            }
            Phase::RecordStart => {
                // undo a completed record
                let len = self.record_len_of_last();
                self.splits.pop();
                self.complex = self.checkpoints.pop().expect("checkpoint per record");
                replay = self.tokens.split_off(self.tokens.len() - len);
            }
            _ => {
                self.complex = self.checkpoints.pop().expect("checkpoint per record");
                replay = self.tokens.split_off(self.record_start);
            }
        }
        replay.pop();
        self.phase = Phase::RecordStart;
        self.mask = None;
        self.labels.clear();
        self.record_start = self.tokens.len();
        for id in replay {
            self.push(id).expect("replaying an admitted prefix");
        }
        Some(last)
    }

    fn record_len_of_last(&self) -> usize {
        let c = self.checkpoints.last().expect("checkpoint per record");
        let vs = self.splits.last().expect("completed record");
        let layout = StarLayout::of(c, vs.vsid);
        super::record_len(&layout)
    }
}
