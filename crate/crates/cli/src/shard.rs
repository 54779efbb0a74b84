//! On-disk shard format.
//!
//! A shard is a 42-byte header followed, for each stripe, by the node's `α`
//! symbols, each written big-endian in `⌈m/8⌉` bytes.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "MSRC"
//!      4     1  version (1)
//!      5     1  m
//!      6     4  field modulus
//!     10     1  q
//!     11     1  t
//!     12     2  r
//!     14     6  n, k, d
//!     20     2  node id
//!     22     8  stripe count
//!     30     8  payload length in bytes
//!     38     4  CRC-32 of bytes 0..38
//! ```
//!
//! All integers are big-endian.

use std::io::{Read, Write};

use msr_core::{CodeParams, Field, Gf, MsrCode};

pub const MAGIC: &[u8; 4] = b"MSRC";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShardHeader {
    pub m: u8,
    pub modulus: u32,
    pub q: u8,
    pub t: u8,
    pub r: u16,
    pub n: u16,
    pub k: u16,
    pub d: u16,
    pub node_id: u16,
    pub stripe_count: u64,
    pub payload_len: u64,
}

impl ShardHeader {
    pub fn for_code(code: &MsrCode, node_id: usize, stripe_count: u64, payload_len: u64) -> Self {
        let p = code.params();
        ShardHeader {
            m: p.m as u8,
            modulus: code.field().modulus(),
            q: p.q as u8,
            t: p.t as u8,
            r: p.r as u16,
            n: p.n as u16,
            k: p.k as u16,
            d: p.d as u16,
            node_id: node_id as u16,
            stripe_count,
            payload_len,
        }
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(MAGIC);
        b[4] = VERSION;
        b[5] = self.m;
        b[6..10].copy_from_slice(&self.modulus.to_be_bytes());
        b[10] = self.q;
        b[11] = self.t;
        b[12..14].copy_from_slice(&self.r.to_be_bytes());
        b[14..16].copy_from_slice(&self.n.to_be_bytes());
        b[16..18].copy_from_slice(&self.k.to_be_bytes());
        b[18..20].copy_from_slice(&self.d.to_be_bytes());
        b[20..22].copy_from_slice(&self.node_id.to_be_bytes());
        b[22..30].copy_from_slice(&self.stripe_count.to_be_bytes());
        b[30..38].copy_from_slice(&self.payload_len.to_be_bytes());
        let crc = crc32fast::hash(&b[..38]);
        b[38..42].copy_from_slice(&crc.to_be_bytes());
        b
    }

    /// Parses and validates a header: magic, version, CRC, and agreement of
    /// the stored `q, t, r`, `m` and modulus with those derived from `(n, k, d)`.
    pub fn from_bytes(b: &[u8; HEADER_LEN]) -> Result<Self, String> {
        if &b[0..4] != MAGIC {
            return Err("not a shard file (bad magic)".into());
        }
        if b[4] != VERSION {
            return Err(format!("unsupported shard version {}", b[4]));
        }
        let stored = u32::from_be_bytes(b[38..42].try_into().unwrap());
        let crc = crc32fast::hash(&b[..38]);
        if stored != crc {
            return Err(format!(
                "header CRC mismatch (stored {stored:08x}, computed {crc:08x})"
            ));
        }
        let u16_at = |i: usize| u16::from_be_bytes([b[i], b[i + 1]]);
        let u64_at = |i: usize| u64::from_be_bytes(b[i..i + 8].try_into().unwrap());
        let h = ShardHeader {
            m: b[5],
            modulus: u32::from_be_bytes(b[6..10].try_into().unwrap()),
            q: b[10],
            t: b[11],
            r: u16_at(12),
            n: u16_at(14),
            k: u16_at(16),
            d: u16_at(18),
            node_id: u16_at(20),
            stripe_count: u64_at(22),
            payload_len: u64_at(30),
        };
        let p = h.params().map_err(|e| format!("header parameters: {e}"))?;
        if (p.q, p.t, p.r) != (h.q as usize, h.t as usize, h.r as usize) {
            return Err(format!(
                "header q={} t={} r={} disagree with (n,k,d) = ({},{},{})",
                h.q, h.t, h.r, h.n, h.k, h.d
            ));
        }
        if p.m != h.m as u32 {
            return Err(format!("header m={} but (n,k,d) selects m={}", h.m, p.m));
        }
        let field = Field::new(p.m).map_err(|e| e.to_string())?;
        if field.modulus() != h.modulus {
            return Err(format!(
                "header modulus {:#x} differs from {:#x}",
                h.modulus,
                field.modulus()
            ));
        }
        if h.node_id >= h.n {
            return Err(format!("node id {} out of range for n={}", h.node_id, h.n));
        }
        Ok(h)
    }

    pub fn params(&self) -> msr_core::Result<CodeParams> {
        CodeParams::derive(self.n as usize, self.k as usize, self.d as usize)
    }

    /// True when both headers describe the same encoded file.
    pub fn same_stripe_set(&self, other: &ShardHeader) -> bool {
        ShardHeader {
            node_id: 0,
            ..*self
        } == ShardHeader {
            node_id: 0,
            ..*other
        }
    }

    pub fn read_from(mut r: impl Read) -> std::io::Result<Result<Self, String>> {
        let mut b = [0u8; HEADER_LEN];
        match r.read_exact(&mut b) {
            Ok(()) => Ok(Self::from_bytes(&b)),
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
                Ok(Err("truncated header".into()))
            }
            Err(e) => Err(e),
        }
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(&self.to_bytes())
    }
}

/// Byte offset of `(stripe, plane)` in a shard.
pub fn symbol_offset(params: &CodeParams, symbol_bytes: usize, stripe: u64, plane: usize) -> u64 {
    HEADER_LEN as u64 + (stripe * params.alpha as u64 + plane as u64) * symbol_bytes as u64
}

pub fn write_symbol(out: &mut Vec<u8>, v: Gf, symbol_bytes: usize) {
    let be = v.0.to_be_bytes();
    out.extend_from_slice(&be[2 - symbol_bytes..]);
}

pub fn read_symbol(b: &[u8]) -> Gf {
    Gf(b.iter().fold(0u16, |acc, &x| (acc << 8) | x as u16))
}

/// Cuts `data`, read as a big-endian bit stream, into `m`-bit symbols; the
/// last symbol is zero-padded on the right.
pub fn pack_symbols(data: &[u8], m: u32) -> Vec<Gf> {
    let count = (data.len() * 8).div_ceil(m as usize);
    let mut out = Vec::with_capacity(count);
    let (mut acc, mut bits) = (0u32, 0u32);
    for &byte in data {
        acc = (acc << 8) | byte as u32;
        bits += 8;
        while bits >= m {
            bits -= m;
            out.push(Gf(((acc >> bits) & ((1 << m) - 1)) as u16));
        }
        acc &= (1 << bits) - 1;
    }
    if bits > 0 {
        out.push(Gf(((acc << (m - bits)) & ((1 << m) - 1)) as u16));
    }
    out
}

/// Inverse of [`pack_symbols`], keeping the first `len` bytes.
pub fn unpack_symbols(symbols: &[Gf], m: u32, len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len);
    let (mut acc, mut bits) = (0u32, 0u32);
    for s in symbols {
        acc = (acc << m) | s.0 as u32;
        bits += m;
        while bits >= 8 && out.len() < len {
            bits -= 8;
            out.push((acc >> bits) as u8);
        }
        acc &= (1 << bits) - 1;
        if out.len() == len {
            break;
        }
    }
    out
}
