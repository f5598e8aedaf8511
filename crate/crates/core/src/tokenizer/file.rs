//! Token files: `"PSCT"`, version u16 = 1, base vocabulary u16 = 526, token
//! count u64, then the ids as u32. Little-endian.

use thiserror::Error;

use super::BASE_VOCAB;

const MAGIC: &[u8; 4] = b"PSCT";
const VERSION: u16 = 1;
const HEADER_LEN: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TokenFileError {
    #[error("byte 0: bad magic")]
    BadMagic,
    #[error("byte 4: unsupported version {0}")]
    UnknownVersion(u16),
    #[error("byte 6: base vocabulary {0}, expected {BASE_VOCAB}")]
    BaseVocab(u16),
    #[error("byte {offset}: unexpected end of data")]
    Truncated { offset: usize },
    #[error("byte {offset}: {extra} trailing bytes")]
    TrailingBytes { offset: usize, extra: usize },
}

pub fn write_tokens(ids: &[u32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * ids.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(BASE_VOCAB as u16).to_le_bytes());
    out.extend_from_slice(&(ids.len() as u64).to_le_bytes());
    for id in ids {
        out.extend_from_slice(&id.to_le_bytes());
    }
    out
}

pub fn read_tokens(bytes: &[u8]) -> Result<Vec<u32>, TokenFileError> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && &bytes[..4] != MAGIC {
            return Err(TokenFileError::BadMagic);
        }
        return Err(TokenFileError::Truncated { offset: bytes.len() });
    }
    if &bytes[..4] != MAGIC {
        return Err(TokenFileError::BadMagic);
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(TokenFileError::UnknownVersion(version));
    }
    let base = u16::from_le_bytes([bytes[6], bytes[7]]);
    if base as u32 != BASE_VOCAB {
        return Err(TokenFileError::BaseVocab(base));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let body = &bytes[HEADER_LEN..];
    let need = count.checked_mul(4).filter(|&n| n <= body.len() as u64);
    let Some(need) = need else {
        return Err(TokenFileError::Truncated { offset: HEADER_LEN + body.len() / 4 * 4 });
    };
    let need = need as usize;
    if body.len() > need {
        return Err(TokenFileError::TrailingBytes { offset: HEADER_LEN + need, extra: body.len() - need });
    }
    Ok(body.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let ids = vec![523, 0, 0, 316, 16_383, 524];
        let bytes = write_tokens(&ids);
        assert_eq!(bytes.len(), 16 + 24);
        assert_eq!(&bytes[..8], b"PSCT\x01\x00\x0e\x02");
        assert_eq!(read_tokens(&bytes).unwrap(), ids);
        assert_eq!(read_tokens(&write_tokens(&[])).unwrap(), Vec::<u32>::new());
    }

    #[test]
    fn errors() {
        let bytes = write_tokens(&[1, 2, 3]);
        assert_eq!(read_tokens(&bytes[..bytes.len() - 2]), Err(TokenFileError::Truncated { offset: 24 }));
        let mut long = bytes.clone();
        long.push(0);
        assert_eq!(read_tokens(&long), Err(TokenFileError::TrailingBytes { offset: 28, extra: 1 }));
        let mut bad = bytes.clone();
        bad[0] = b'Q';
        assert_eq!(read_tokens(&bad), Err(TokenFileError::BadMagic));
        let mut bad = bytes;
        bad[6] = 0;
        assert!(matches!(read_tokens(&bad), Err(TokenFileError::BaseVocab(_))));
    }
}
