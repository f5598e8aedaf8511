//! PSC binary format, version 1. Little-endian throughout.
//!
//! ```text
//! header   "PSC1" | version u16 = 1 | flags u16 (bit 0: binary16 offsets)
//!          | vertex count u32 | root 3 x f64                    (36 bytes)
//! record   vsid u32 | flags u8 (bit 0: midpoint)
//!          | offset 3 x (f16 or f64) | label count u16 | labels u8...
//! ```
//! There are `vertex count - 1` records.

use half::f16;
use thiserror::Error;

use super::{Psc, TopoLabel, VertexSplit};
use crate::{Point, Vector};

const MAGIC: &[u8; 4] = b"PSC1";
const VERSION: u16 = 1;
const FLAG_BINARY16: u16 = 1;
const FLAG_MIDPOINT: u8 = 1;
pub const HEADER_LEN: usize = 36;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatErrorKind {
    #[error("bad magic")]
    BadMagic,
    #[error("unexpected end of data")]
    Truncated,
    #[error("unsupported version {0}")]
    UnknownVersion(u16),
    #[error("unknown flag bits {0:#x}")]
    UnknownFlags(u16),
    #[error("label byte {0} is not in 0..=8")]
    BadLabel(u8),
    #[error("vertex count must be at least 1")]
    NoVertices,
    #[error("vsid {vsid} refers to a vertex that does not exist yet ({vertex_count} so far)")]
    VsidOutOfRange { vsid: u32, vertex_count: usize },
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
    #[error("non-finite coordinate")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("byte {offset}: {kind}")]
pub struct FormatError {
    pub offset: usize,
    pub kind: FormatErrorKind,
}

/// Serializes a PSC. With `quantized`, offsets are stored as binary16 (and
/// therefore rounded).
pub fn write_psc(psc: &Psc, quantized: bool) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + psc.splits.len() * 40);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(if quantized { FLAG_BINARY16 } else { 0 }).to_le_bytes());
    out.extend_from_slice(&(psc.vertex_count() as u32).to_le_bytes());
    for x in psc.root.iter() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for s in &psc.splits {
        out.extend_from_slice(&s.vsid.to_le_bytes());
        out.push(if s.midpoint { FLAG_MIDPOINT } else { 0 });
        for x in s.offset.iter() {
            if quantized {
                out.extend_from_slice(&f16::from_f64(*x).to_bits().to_le_bytes());
            } else {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out.extend_from_slice(&(s.labels.len() as u16).to_le_bytes());
        out.extend(s.labels.iter().map(|l| l.code()));
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, kind: FormatErrorKind) -> FormatError {
        FormatError { offset: self.pos, kind }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.bytes.len() - self.pos < n {
            return Err(self.err(FormatErrorKind::Truncated));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, FormatError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, FormatError> {
        let at = self.pos;
        let x = f64::from_le_bytes(self.take(8)?.try_into().unwrap());
        finite(x, at)
    }

    fn f16(&mut self) -> Result<f64, FormatError> {
        let at = self.pos;
        let x = f16::from_bits(self.u16()?).to_f64();
        finite(x, at)
    }
}

fn finite(x: f64, at: usize) -> Result<f64, FormatError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(FormatError { offset: at, kind: FormatErrorKind::NonFinite })
    }
}

/// Parses a PSC. Structure is checked (magic, version, label codes, vsid
/// below the running vertex count); rules are checked only on replay.
pub fn read_psc(bytes: &[u8]) -> Result<Psc, FormatError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(FormatError { offset: 0, kind: FormatErrorKind::BadMagic });
    }
    let at = r.pos;
    let version = r.u16()?;
    if version != VERSION {
        return Err(FormatError { offset: at, kind: FormatErrorKind::UnknownVersion(version) });
    }
    let at = r.pos;
    let flags = r.u16()?;
    if flags & !FLAG_BINARY16 != 0 {
        return Err(FormatError { offset: at, kind: FormatErrorKind::UnknownFlags(flags) });
    }
    let quantized = flags & FLAG_BINARY16 != 0;
    let at = r.pos;
    let n = r.u32()? as usize;
    if n == 0 {
        return Err(FormatError { offset: at, kind: FormatErrorKind::NoVertices });
    }
    let root = Point::new(r.f64()?, r.f64()?, r.f64()?);
    let mut splits = Vec::with_capacity((n - 1).min(bytes.len() / 10));
    for i in 0..n - 1 {
        let at = r.pos;
        let vsid = r.u32()?;
        if vsid as usize > i {
            return Err(FormatError { offset: at, kind: FormatErrorKind::VsidOutOfRange { vsid, vertex_count: i + 1 } });
        }
        let at = r.pos;
        let f = r.u8()?;
        if f & !FLAG_MIDPOINT != 0 {
            return Err(FormatError { offset: at, kind: FormatErrorKind::UnknownFlags(f as u16) });
        }
        let mut o = [0.0; 3];
        for x in &mut o {
            *x = if quantized { r.f16()? } else { r.f64()? };
        }
        let count = r.u16()? as usize;
        let mut labels = Vec::with_capacity(count);
        for _ in 0..count {
            let at = r.pos;
            let b = r.u8()?;
            labels.push(TopoLabel::from_code(b).ok_or(FormatError { offset: at, kind: FormatErrorKind::BadLabel(b) })?);
        }
        splits.push(VertexSplit { vsid, midpoint: f & FLAG_MIDPOINT != 0, offset: Vector::from(o), labels });
    }
    if r.pos != bytes.len() {
        return Err(r.err(FormatErrorKind::TrailingBytes(bytes.len() - r.pos)));
    }
    Ok(Psc { root, splits })
}
