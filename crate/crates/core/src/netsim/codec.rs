use alloc::vec::Vec;

/// Datagram magic, ASCII "WAVE".
pub const MAGIC: [u8; 4] = *b"WAVE";
pub const VERSION: u8 = 1;
/// Maximum number of `f64` values in one packet.
pub const MAX_VALUES: usize = 64;
/// Bytes before the payload.
pub const HEADER_LEN: usize = 22;
const CRC_LEN: usize = 4;

/// Flag bit marking control-plane traffic (mode changes, fault events).
pub const FLAG_CONTROL: u16 = 1;

/// One datagram. Magic, version, value count and checksum are implied by the encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub channel_id: u8,
    pub flags: u16,
    pub seq: u32,
    pub stamp_ns: u64,
    pub payload: Vec<f64>,
}

impl Packet {
    pub fn new(channel_id: u8, seq: u32, stamp_ns: u64, payload: Vec<f64>) -> Self {
        Self {
            channel_id,
            flags: 0,
            seq,
            stamp_ns,
            payload,
        }
    }

    pub fn is_control(&self) -> bool {
        self.flags & FLAG_CONTROL != 0
    }

    /// Size of the encoded datagram.
    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + 8 * self.payload.len() + CRC_LEN
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("checksum mismatch: header says {expected:08x}, computed {computed:08x}")]
    BadCrc { expected: u32, computed: u32 },
    #[error("datagram truncated: need {needed} bytes, have {found}")]
    Truncated { needed: usize, found: usize },
    #[error("value count {0} exceeds {MAX_VALUES}")]
    BadCount(usize),
    #[error("{0} trailing bytes after the checksum")]
    TrailingBytes(usize),
}

pub fn encode_packet(p: &Packet) -> Result<Vec<u8>, CodecError> {
    if p.payload.len() > MAX_VALUES {
        return Err(CodecError::BadCount(p.payload.len()));
    }
    let mut out = Vec::with_capacity(p.encoded_len());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(p.channel_id);
    out.extend_from_slice(&p.flags.to_le_bytes());
    out.extend_from_slice(&p.seq.to_le_bytes());
    out.extend_from_slice(&p.stamp_ns.to_le_bytes());
    out.extend_from_slice(&(p.payload.len() as u16).to_le_bytes());
    for v in &p.payload {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

fn take<const N: usize>(bytes: &[u8], at: usize) -> [u8; N] {
    let mut buf = [0u8; N];
    buf.copy_from_slice(&bytes[at..at + N]);
    buf
}

/// Parses and validates one datagram. Never reads outside `bytes`.
pub fn decode_packet(bytes: &[u8]) -> Result<Packet, CodecError> {
    let truncated = |needed| CodecError::Truncated {
        needed,
        found: bytes.len(),
    };
    if bytes.len() < MAGIC.len() {
        return Err(truncated(HEADER_LEN + CRC_LEN));
    }
    let magic = take::<4>(bytes, 0);
    if magic != MAGIC {
        return Err(CodecError::BadMagic(magic));
    }
    if bytes.len() < 5 {
        return Err(truncated(HEADER_LEN + CRC_LEN));
    }
    if bytes[4] != VERSION {
        return Err(CodecError::BadVersion(bytes[4]));
    }
    if bytes.len() < HEADER_LEN {
        return Err(truncated(HEADER_LEN + CRC_LEN));
    }
    let count = u16::from_le_bytes(take(bytes, 20)) as usize;
    if count > MAX_VALUES {
        return Err(CodecError::BadCount(count));
    }
    let body = HEADER_LEN + 8 * count;
    let total = body + CRC_LEN;
    if bytes.len() < total {
        return Err(truncated(total));
    }
    if bytes.len() > total {
        return Err(CodecError::TrailingBytes(bytes.len() - total));
    }
    let expected = u32::from_le_bytes(take(bytes, body));
    let computed = crc32fast::hash(&bytes[..body]);
    if expected != computed {
        return Err(CodecError::BadCrc { expected, computed });
    }
    Ok(Packet {
        channel_id: bytes[5],
        flags: u16::from_le_bytes(take(bytes, 6)),
        seq: u32::from_le_bytes(take(bytes, 8)),
        stamp_ns: u64::from_le_bytes(take(bytes, 12)),
        payload: (0..count)
            .map(|i| f64::from_le_bytes(take(bytes, HEADER_LEN + 8 * i)))
            .collect(),
    })
}
