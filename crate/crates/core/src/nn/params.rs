use std::ops::Range;

use super::{EncoderConfig, Result};
use crate::rng::SplitMix64;

/// Named weight blocks, in storage and file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    /// `[vocab_size × embed_dim]`
    Embedding,
    /// `[4·hidden × embed]`, gate rows ordered input, forget, cell, output
    ForwardInput,
    /// `[4·hidden × hidden]`
    ForwardRecurrent,
    /// `[4·hidden]`
    ForwardBias,
    BackwardInput,
    BackwardRecurrent,
    BackwardBias,
    /// `[attention × 2·hidden]`
    AttentionProjection,
    /// `[attention]`
    AttentionContext,
    /// `[outputs × 2·hidden]`
    HeadWeight,
    /// `[outputs]`
    HeadBias,
}

impl Block {
    pub const ALL: [Block; 11] = [
        Block::Embedding,
        Block::ForwardInput,
        Block::ForwardRecurrent,
        Block::ForwardBias,
        Block::BackwardInput,
        Block::BackwardRecurrent,
        Block::BackwardBias,
        Block::AttentionProjection,
        Block::AttentionContext,
        Block::HeadWeight,
        Block::HeadBias,
    ];

    pub fn is_bias(self) -> bool {
        matches!(self, Block::ForwardBias | Block::BackwardBias | Block::HeadBias)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    /// `(block, rows, cols, range)`; vectors have `cols == 1`.
    entries: Vec<(Block, usize, usize, Range<usize>)>,
}

impl Layout {
    pub fn new(config: &EncoderConfig) -> Self {
        let (v, e, h, a, k) = (
            config.vocab_size,
            config.embed_dim,
            config.hidden_dim,
            config.attention_dim,
            config.head.outputs(),
        );
        let shapes = [
            (v, e),
            (4 * h, e),
            (4 * h, h),
            (4 * h, 1),
            (4 * h, e),
            (4 * h, h),
            (4 * h, 1),
            (a, 2 * h),
            (a, 1),
            (k, 2 * h),
            (k, 1),
        ];
        let mut offset = 0;
        let entries = Block::ALL
            .iter()
            .zip(shapes)
            .map(|(&b, (rows, cols))| {
                let r = offset..offset + rows * cols;
                offset = r.end;
                (b, rows, cols, r)
            })
            .collect();
        Self { entries }
    }

    pub fn range(&self, block: Block) -> Range<usize> {
        self.entry(block).3.clone()
    }

    pub fn shape(&self, block: Block) -> (usize, usize) {
        let e = self.entry(block);
        (e.1, e.2)
    }

    pub fn total(&self) -> usize {
        self.entries.last().map_or(0, |e| e.3.end)
    }

    pub fn block_of(&self, index: usize) -> Option<Block> {
        self.entries.iter().find(|e| e.3.contains(&index)).map(|e| e.0)
    }

    fn entry(&self, block: Block) -> &(Block, usize, usize, Range<usize>) {
        self.entries
            .iter()
            .find(|e| e.0 == block)
            .expect("every block has an entry")
    }
}

/// All trainable weights of one encoder plus its head.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    config: EncoderConfig,
    layout: Layout,
    data: Vec<f32>,
}

impl ModelParams {
    pub(crate) fn from_parts(config: EncoderConfig, data: Vec<f32>) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        if data.len() != layout.total() {
            return Err(super::NnError::ShapeMismatch(format!(
                "expected {} weights, got {}",
                layout.total(),
                data.len()
            )));
        }
        Ok(Self {
            config,
            layout,
            data,
        })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn block(&self, block: Block) -> &[f32] {
        &self.data[self.layout.range(block)]
    }

    pub fn block_mut(&mut self, block: Block) -> &mut [f32] {
        let r = self.layout.range(block);
        &mut self.data[r]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|w| w.is_finite())
    }

    /// Sets the head weights and bias to zero.
    pub fn zero_head(&mut self) {
        self.block_mut(Block::HeadWeight).fill(0.0);
        self.block_mut(Block::HeadBias).fill(0.0);
    }

    /// Replaces the head with a freshly initialized one for `head`, keeping
    /// the encoder weights.
    pub fn with_head(&self, head: super::Head, seed: u64) -> Result<Self> {
        let mut config = self.config.clone();
        config.head = head;
        let mut fresh = init_params(&EncoderConfig { seed, ..config.clone() })?;
        fresh.config = config;
        for b in Block::ALL {
            if !matches!(b, Block::HeadWeight | Block::HeadBias) {
                fresh.block_mut(b).copy_from_slice(self.block(b));
            }
        }
        Ok(fresh)
    }
}

/// Glorot-uniform weights `U[−s, s]`, `s = √(6/(fan_in + fan_out))`, and
/// zero biases. Each block draws from its own stream derived from the seed.
pub fn init_params(config: &EncoderConfig) -> Result<ModelParams> {
    config.validate()?;
    let layout = Layout::new(config);
    let mut data = vec![0.0f32; layout.total()];
    for (k, block) in Block::ALL.iter().enumerate() {
        if block.is_bias() {
            continue;
        }
        let (rows, cols) = layout.shape(*block);
        // matrices are [fan_out × fan_in]; the context vector maps attention → 1
        let (fan_in, fan_out) = match block {
            Block::Embedding => (rows, cols),
            Block::AttentionContext => (rows, 1),
            _ => (cols, rows),
        };
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let mut rng = SplitMix64::derive(config.seed, k as u64 + 1);
        for w in &mut data[layout.range(*block)] {
            *w = rng.symmetric(bound) as f32;
        }
    }
    Ok(ModelParams {
        config: config.clone(),
        layout,
        data,
    })
}
