//! Debug snapshots of a model state.
//!
//! Layout (little-endian): `"DPMS"`, version `u32`, `C`, `M`, `D`, rank and
//! flags as `u32` (bit 0 adapter enabled, bit 1 shared context), step `u64`,
//! then `f32` payloads for ctx_pos, ctx_neg, class tokens, `A` and `B`.
//! Parameters are held in `f64` in memory, so a snapshot is exact only up to
//! `f32` rounding.

use std::fs;
use std::path::Path;

use super::{ModelShape, ModelState, Polarity, PromptBank, VisualAdapter};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"DPMS";
pub const CHECKPOINT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 * 6 + 8;

impl ModelState {
    pub fn to_checkpoint_bytes(&self) -> Vec<u8> {
        let shape = self.shape();
        let mut out = Vec::new();
        out.extend_from_slice(CHECKPOINT_MAGIC);
        let flags = u32::from(shape.adapter_enabled) | (u32::from(shape.shared_ctx) << 1);
        for v in [
            CHECKPOINT_VERSION,
            shape.num_classes as u32,
            shape.context_len as u32,
            shape.dim as u32,
            shape.adapter_rank as u32,
            flags,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.step().to_le_bytes());
        for block in [
            self.bank().ctx(Polarity::Positive),
            self.bank().ctx(Polarity::Negative),
            self.bank().cls_tokens(),
            self.adapter().a(),
            self.adapter().b(),
        ] {
            for &v in block {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        out
    }

    pub fn from_checkpoint_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN || &bytes[..4] != CHECKPOINT_MAGIC {
            return Err(Error::Format("not a model checkpoint".into()));
        }
        let word =
            |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
        if word(0) != CHECKPOINT_VERSION as usize {
            return Err(Error::Format(format!(
                "unsupported checkpoint version {}",
                word(0)
            )));
        }
        let flags = word(5);
        let shape = ModelShape {
            num_classes: word(1),
            context_len: word(2),
            dim: word(3),
            adapter_rank: word(4),
            adapter_enabled: flags & 1 != 0,
            shared_ctx: flags & 2 != 0,
        };
        shape.validate().map_err(|e| Error::Format(e.to_string()))?;
        let step = u64::from_le_bytes(bytes[28..36].try_into().unwrap());

        let (c, d, r) = (shape.num_classes, shape.dim, shape.adapter_rank);
        let ctx_len = shape.context_groups() * shape.context_len * d;
        let sizes = [ctx_len, ctx_len, c * d, d * r, r * d];
        let needed = HEADER_LEN + 4 * sizes.iter().sum::<usize>();
        if bytes.len() != needed {
            return Err(Error::Format(format!(
                "checkpoint has {} bytes, expected {needed}",
                bytes.len()
            )));
        }
        let mut cursor = HEADER_LEN;
        let mut blocks = sizes.iter().map(|&n| {
            let block: Vec<f64> = bytes[cursor..cursor + 4 * n]
                .chunks_exact(4)
                .map(|w| f64::from(f32::from_le_bytes(w.try_into().unwrap())))
                .collect();
            cursor += 4 * n;
            block
        });
        let ctx_pos = blocks.next().unwrap();
        let ctx_neg = blocks.next().unwrap();
        let cls_tokens = blocks.next().unwrap();
        let a = blocks.next().unwrap();
        let b = blocks.next().unwrap();
        Ok(ModelState {
            bank: PromptBank {
                shape,
                ctx_pos,
                ctx_neg,
                cls_tokens,
            },
            adapter: VisualAdapter {
                dim: d,
                rank: r,
                enabled: shape.adapter_enabled,
                a,
                b,
            },
            step,
        })
    }
}

pub fn save_checkpoint(state: &ModelState, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, state.to_checkpoint_bytes())?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelState> {
    ModelState::from_checkpoint_bytes(&fs::read(path)?)
}
