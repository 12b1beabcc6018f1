//! Binary model files.
//!
//! ```text
//! "AFGM"                      4 bytes magic
//! version                     u8 (= 1)
//! vocab_size                  u32 LE
//! embed_dim                   u32 LE
//! hidden_dim                  u32 LE
//! attention_dim               u32 LE
//! head kind                   u32 LE (0 regression, 1 classification)
//! head outputs                u32 LE
//! max_sequence_length         u32 LE
//! seed                        u64 LE
//! weights                     f32 LE, blocks in `Block::ALL` order, row-major
//! checksum                    u64 LE, FNV-1a 64 of every preceding byte
//! ```

use std::io::{Read, Write};

use super::params::ModelParams;
use super::{EncoderConfig, Head, NnError, Result};

pub const MODEL_MAGIC: [u8; 4] = *b"AFGM";
pub const MODEL_VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 7 * 4 + 8;

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| NnError::Config(format!("{what} = {v} does not fit in u32")))
}

/// Serializes weights and configuration.
pub fn save_model<W: Write>(params: &ModelParams, mut writer: W) -> Result<()> {
    let cfg = params.config();
    let mut buf = Vec::with_capacity(HEADER_LEN + params.data().len() * 4 + 8);
    buf.extend_from_slice(&MODEL_MAGIC);
    buf.push(MODEL_VERSION);
    let (kind, outputs) = match cfg.head {
        Head::Regression => (0u32, 1usize),
        Head::Classification { n_classes } => (1, n_classes),
    };
    for (v, what) in [
        (cfg.vocab_size, "vocab_size"),
        (cfg.embed_dim, "embed_dim"),
        (cfg.hidden_dim, "hidden_dim"),
        (cfg.attention_dim, "attention_dim"),
    ] {
        buf.extend_from_slice(&to_u32(v, what)?.to_le_bytes());
    }
    buf.extend_from_slice(&kind.to_le_bytes());
    buf.extend_from_slice(&to_u32(outputs, "head outputs")?.to_le_bytes());
    buf.extend_from_slice(&to_u32(cfg.max_sequence_length, "max_sequence_length")?.to_le_bytes());
    buf.extend_from_slice(&cfg.seed.to_le_bytes());
    for w in params.data() {
        buf.extend_from_slice(&w.to_le_bytes());
    }
    let sum = fnv1a64(&buf);
    buf.extend_from_slice(&sum.to_le_bytes());
    writer.write_all(&buf)?;
    Ok(())
}

pub fn load_model<R: Read>(mut reader: R) -> Result<ModelParams> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() < 4 {
        return Err(NnError::Corrupt(format!("only {} bytes", bytes.len())));
    }
    if bytes[..4] != MODEL_MAGIC {
        return Err(NnError::BadMagic);
    }
    if bytes.len() < 5 {
        return Err(NnError::Corrupt("missing version byte".into()));
    }
    if bytes[4] != MODEL_VERSION {
        return Err(NnError::UnsupportedVersion(bytes[4]));
    }
    if bytes.len() < HEADER_LEN {
        return Err(NnError::Corrupt("truncated configuration block".into()));
    }
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as usize;
    let kind = u32_at(21);
    let outputs = u32_at(25);
    let head = match (kind, outputs) {
        (0, 1) => Head::Regression,
        (1, n) => Head::Classification { n_classes: n },
        (k, n) => {
            return Err(NnError::ShapeMismatch(format!(
                "head kind {k} with {n} outputs"
            )))
        }
    };
    let config = EncoderConfig {
        vocab_size: u32_at(5),
        embed_dim: u32_at(9),
        hidden_dim: u32_at(13),
        attention_dim: u32_at(17),
        head,
        max_sequence_length: u32_at(29),
        seed: u64::from_le_bytes(bytes[33..41].try_into().unwrap()),
    };
    config
        .validate()
        .map_err(|e| NnError::ShapeMismatch(e.to_string()))?;
    let n_weights = super::Layout::new(&config).total();
    let expected = HEADER_LEN + n_weights * 4 + 8;
    if bytes.len() < expected {
        return Err(NnError::Corrupt(format!(
            "truncated: expected {expected} bytes, found {}",
            bytes.len()
        )));
    }
    if bytes.len() > expected {
        return Err(NnError::ShapeMismatch(format!(
            "{} bytes beyond the {n_weights} weights implied by the configuration",
            bytes.len() - expected
        )));
    }
    let payload_end = expected - 8;
    let stored = u64::from_le_bytes(bytes[payload_end..].try_into().unwrap());
    if stored != fnv1a64(&bytes[..payload_end]) {
        return Err(NnError::Corrupt("checksum mismatch".into()));
    }
    let data = bytes[HEADER_LEN..payload_end]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ModelParams::from_parts(config, data)
}
