use std::ops::Range;

use super::params::{Block, Layout, ModelParams};
use super::{EncoderConfig, Head, NnError, Result};
use crate::textproc::{TokenSequence, Vocabulary};

/// Weight element readable as `f64`; lets one code path run over stored
/// `f32` weights and over perturbed `f64` copies in the gradient check.
pub(crate) trait Weight: Copy + Into<f64> + Send + Sync {}
impl Weight for f32 {}
impl Weight for f64 {}

/// `out += M·x` for row-major `M` of shape `[out.len() × x.len()]`.
fn gemv_acc<W: Weight>(out: &mut [f64], m: &[W], x: &[f64]) {
    let cols = x.len();
    for (r, o) in out.iter_mut().enumerate() {
        let row = &m[r * cols..(r + 1) * cols];
        let mut s = 0.0;
        for (w, xv) in row.iter().zip(x) {
            s += (*w).into() * xv;
        }
        *o += s;
    }
}

/// `out += Mᵀ·y` for row-major `M` of shape `[y.len() × out.len()]`.
fn gemv_t_acc<W: Weight>(out: &mut [f64], m: &[W], y: &[f64]) {
    let cols = out.len();
    for (r, yv) in y.iter().enumerate() {
        if *yv == 0.0 {
            continue;
        }
        let row = &m[r * cols..(r + 1) * cols];
        for (o, w) in out.iter_mut().zip(row) {
            *o += (*w).into() * yv;
        }
    }
}

/// `g += y ⊗ x`
fn outer_acc(g: &mut [f64], y: &[f64], x: &[f64]) {
    let cols = x.len();
    for (r, yv) in y.iter().enumerate() {
        if *yv == 0.0 {
            continue;
        }
        let row = &mut g[r * cols..(r + 1) * cols];
        for (gv, xv) in row.iter_mut().zip(x) {
            *gv += yv * xv;
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

struct DirectionRanges {
    input: Range<usize>,
    recurrent: Range<usize>,
    bias: Range<usize>,
}

/// Per-direction activations, indexed by processing step.
struct LstmTrace {
    /// activated gates `[i, f, g, o]`, `4H` per step
    gates: Vec<f64>,
    cell: Vec<f64>,
    cell_tanh: Vec<f64>,
    hidden: Vec<f64>,
}

/// Everything the backward pass needs from one forward pass.
pub(crate) struct Trace {
    tokens: Vec<u32>,
    fwd: LstmTrace,
    bwd: LstmTrace,
    /// concatenated states `[h_fwd; h_bwd]` per position, `2H` each
    states: Vec<f64>,
    /// `tanh(W·h_i)` per position
    proj: Vec<f64>,
    pub attention: Vec<f64>,
    pub context: Vec<f64>,
    pub logits: Vec<f64>,
}

/// Read-only view of the network over a flat weight slice.
pub(crate) struct Net<'a, W> {
    cfg: &'a EncoderConfig,
    layout: &'a Layout,
    w: &'a [W],
}

impl<'a, W: Weight> Net<'a, W> {
    pub(crate) fn new(cfg: &'a EncoderConfig, layout: &'a Layout, w: &'a [W]) -> Self {
        debug_assert_eq!(w.len(), layout.total());
        Self { cfg, layout, w }
    }

    fn block(&self, b: Block) -> &'a [W] {
        &self.w[self.layout.range(b)]
    }

    fn direction(&self, backward: bool) -> DirectionRanges {
        let (i, r, b) = if backward {
            (Block::BackwardInput, Block::BackwardRecurrent, Block::BackwardBias)
        } else {
            (Block::ForwardInput, Block::ForwardRecurrent, Block::ForwardBias)
        };
        DirectionRanges {
            input: self.layout.range(i),
            recurrent: self.layout.range(r),
            bias: self.layout.range(b),
        }
    }

    fn embedding_row(&self, token: u32) -> Vec<f64> {
        let e = self.cfg.embed_dim;
        let start = self.layout.range(Block::Embedding).start + token as usize * e;
        self.w[start..start + e].iter().map(|&v| v.into()).collect()
    }

    fn lstm_forward(&self, tokens: &[u32], backward: bool) -> LstmTrace {
        let h = self.cfg.hidden_dim;
        let n = tokens.len();
        let d = self.direction(backward);
        let (wx, wh, bias) = (&self.w[d.input], &self.w[d.recurrent], &self.w[d.bias]);
        let mut tr = LstmTrace {
            gates: vec![0.0; n * 4 * h],
            cell: vec![0.0; n * h],
            cell_tanh: vec![0.0; n * h],
            hidden: vec![0.0; n * h],
        };
        let zeros = vec![0.0; h];
        for s in 0..n {
            let pos = if backward { n - 1 - s } else { s };
            let x = self.embedding_row(tokens[pos]);
            let mut z: Vec<f64> = bias.iter().map(|&b| b.into()).collect();
            gemv_acc(&mut z, wx, &x);
            let (h_prev, c_prev) = if s == 0 {
                (zeros.clone(), zeros.clone())
            } else {
                (
                    tr.hidden[(s - 1) * h..s * h].to_vec(),
                    tr.cell[(s - 1) * h..s * h].to_vec(),
                )
            };
            gemv_acc(&mut z, wh, &h_prev);
            let g = &mut tr.gates[s * 4 * h..(s + 1) * 4 * h];
            for k in 0..h {
                g[k] = sigmoid(z[k]);
                g[h + k] = sigmoid(z[h + k]);
                g[2 * h + k] = z[2 * h + k].tanh();
                g[3 * h + k] = sigmoid(z[3 * h + k]);
            }
            for k in 0..h {
                let c = g[h + k] * c_prev[k] + g[k] * g[2 * h + k];
                let ct = c.tanh();
                tr.cell[s * h + k] = c;
                tr.cell_tanh[s * h + k] = ct;
                tr.hidden[s * h + k] = g[3 * h + k] * ct;
            }
        }
        tr
    }

    pub(crate) fn forward(&self, tokens: &[u32]) -> Trace {
        let n = tokens.len();
        let h = self.cfg.hidden_dim;
        let a = self.cfg.attention_dim;
        let fwd = self.lstm_forward(tokens, false);
        let bwd = self.lstm_forward(tokens, true);

        let mut states = vec![0.0; n * 2 * h];
        for pos in 0..n {
            let s_b = n - 1 - pos;
            states[pos * 2 * h..pos * 2 * h + h].copy_from_slice(&fwd.hidden[pos * h..(pos + 1) * h]);
            states[pos * 2 * h + h..(pos + 1) * 2 * h]
                .copy_from_slice(&bwd.hidden[s_b * h..(s_b + 1) * h]);
        }

        let proj_w = self.block(Block::AttentionProjection);
        let ctx_v = self.block(Block::AttentionContext);
        let mut proj = vec![0.0; n * a];
        let mut scores = vec![0.0; n];
        for pos in 0..n {
            let u = &mut proj[pos * a..(pos + 1) * a];
            gemv_acc(u, proj_w, &states[pos * 2 * h..(pos + 1) * 2 * h]);
            let mut s = 0.0;
            for (uk, vk) in u.iter_mut().zip(ctx_v) {
                *uk = uk.tanh();
                s += *uk * (*vk).into();
            }
            scores[pos] = s;
        }
        let attention = softmax(&scores);

        let mut context = vec![0.0; 2 * h];
        for pos in 0..n {
            let st = &states[pos * 2 * h..(pos + 1) * 2 * h];
            for (c, sv) in context.iter_mut().zip(st) {
                *c += attention[pos] * sv;
            }
        }

        let mut logits: Vec<f64> = self.block(Block::HeadBias).iter().map(|&b| b.into()).collect();
        gemv_acc(&mut logits, self.block(Block::HeadWeight), &context);

        Trace {
            tokens: tokens.to_vec(),
            fwd,
            bwd,
            states,
            proj,
            attention,
            context,
            logits,
        }
    }

    fn lstm_backward(&self, tr: &LstmTrace, tokens: &[u32], backward: bool, dh_ext: &[f64], grad: &mut [f64]) {
        let h = self.cfg.hidden_dim;
        let e = self.cfg.embed_dim;
        let n = tokens.len();
        let d = self.direction(backward);
        let (wx, wh) = (&self.w[d.input.clone()], &self.w[d.recurrent.clone()]);
        let emb_start = self.layout.range(Block::Embedding).start;

        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut dz = vec![0.0; 4 * h];
        let zeros = vec![0.0; h];
        for s in (0..n).rev() {
            let pos = if backward { n - 1 - s } else { s };
            let g = &tr.gates[s * 4 * h..(s + 1) * 4 * h];
            let ct = &tr.cell_tanh[s * h..(s + 1) * h];
            let (c_prev, h_prev) = if s == 0 {
                (&zeros[..], &zeros[..])
            } else {
                (&tr.cell[(s - 1) * h..s * h], &tr.hidden[(s - 1) * h..s * h])
            };
            for k in 0..h {
                let (i, f, gg, o) = (g[k], g[h + k], g[2 * h + k], g[3 * h + k]);
                let dh = dh_ext[s * h + k] + dh_next[k];
                let d_o = dh * ct[k];
                let dc = dh * o * (1.0 - ct[k] * ct[k]) + dc_next[k];
                dz[k] = dc * gg * i * (1.0 - i);
                dz[h + k] = dc * c_prev[k] * f * (1.0 - f);
                dz[2 * h + k] = dc * i * (1.0 - gg * gg);
                dz[3 * h + k] = d_o * o * (1.0 - o);
                dc_next[k] = dc * f;
            }
            let x = self.embedding_row(tokens[pos]);
            outer_acc(&mut grad[d.input.clone()], &dz, &x);
            outer_acc(&mut grad[d.recurrent.clone()], &dz, h_prev);
            for (gb, dzv) in grad[d.bias.clone()].iter_mut().zip(&dz) {
                *gb += dzv;
            }
            let row = emb_start + tokens[pos] as usize * e;
            gemv_t_acc(&mut grad[row..row + e], wx, &dz);
            dh_next.fill(0.0);
            gemv_t_acc(&mut dh_next, wh, &dz);
        }
    }

    /// Accumulates into `grad` the gradient of the loss given `d_logits`.
    pub(crate) fn backward(&self, tr: &Trace, d_logits: &[f64], grad: &mut [f64]) {
        let n = tr.tokens.len();
        let h = self.cfg.hidden_dim;
        let a = self.cfg.attention_dim;

        outer_acc(&mut grad[self.layout.range(Block::HeadWeight)], d_logits, &tr.context);
        for (g, d) in grad[self.layout.range(Block::HeadBias)].iter_mut().zip(d_logits) {
            *g += d;
        }
        let mut d_context = vec![0.0; 2 * h];
        gemv_t_acc(&mut d_context, self.block(Block::HeadWeight), d_logits);

        let mut d_states = vec![0.0; n * 2 * h];
        let mut d_alpha = vec![0.0; n];
        for pos in 0..n {
            let st = &tr.states[pos * 2 * h..(pos + 1) * 2 * h];
            d_alpha[pos] = st.iter().zip(&d_context).map(|(s, d)| s * d).sum();
            for (ds, dc) in d_states[pos * 2 * h..(pos + 1) * 2 * h].iter_mut().zip(&d_context) {
                *ds = tr.attention[pos] * dc;
            }
        }
        let mean_d: f64 = tr.attention.iter().zip(&d_alpha).map(|(al, da)| al * da).sum();

        let ctx_v = self.block(Block::AttentionContext);
        let proj_w = self.block(Block::AttentionProjection);
        let ctx_range = self.layout.range(Block::AttentionContext);
        let proj_range = self.layout.range(Block::AttentionProjection);
        let mut d_pre = vec![0.0; a];
        for pos in 0..n {
            let d_score = tr.attention[pos] * (d_alpha[pos] - mean_d);
            let u = &tr.proj[pos * a..(pos + 1) * a];
            for k in 0..a {
                grad[ctx_range.start + k] += d_score * u[k];
                let v: f64 = ctx_v[k].into();
                d_pre[k] = d_score * v * (1.0 - u[k] * u[k]);
            }
            let st = &tr.states[pos * 2 * h..(pos + 1) * 2 * h];
            outer_acc(&mut grad[proj_range.clone()], &d_pre, st);
            gemv_t_acc(&mut d_states[pos * 2 * h..(pos + 1) * 2 * h], proj_w, &d_pre);
        }

        let mut dh_fwd = vec![0.0; n * h];
        let mut dh_bwd = vec![0.0; n * h];
        for pos in 0..n {
            let s_b = n - 1 - pos;
            dh_fwd[pos * h..(pos + 1) * h].copy_from_slice(&d_states[pos * 2 * h..pos * 2 * h + h]);
            dh_bwd[s_b * h..(s_b + 1) * h].copy_from_slice(&d_states[pos * 2 * h + h..(pos + 1) * 2 * h]);
        }
        self.lstm_backward(&tr.fwd, &tr.tokens, false, &dh_fwd, grad);
        self.lstm_backward(&tr.bwd, &tr.tokens, true, &dh_bwd, grad);
    }
}

/// Output of [`encode`]: the pooled context vector and the attention
/// weights it was pooled with.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    pub context: Vec<f64>,
    pub attention: Vec<f64>,
}

pub(crate) fn check_tokens(tokens: &[u32], cfg: &EncoderConfig) -> Result<()> {
    if tokens.is_empty() {
        return Err(NnError::Argument("empty token sequence".into()));
    }
    if let Some(&bad) = tokens.iter().find(|&&t| t as usize >= cfg.vocab_size) {
        return Err(NnError::Argument(format!(
            "token id {bad} outside vocabulary of {}",
            cfg.vocab_size
        )));
    }
    Ok(())
}

pub(crate) fn truncate(ids: &[u32], max: usize) -> &[u32] {
    if ids.len() > max {
        log::warn!("sequence of {} pieces truncated to {max}", ids.len());
        &ids[..max]
    } else {
        ids
    }
}

/// Pools a token sequence into a `2·hidden_dim` context vector.
pub fn encode(tokens: &TokenSequence, params: &ModelParams) -> Result<Encoding> {
    let cfg = params.config();
    let ids = truncate(&tokens.ids, cfg.max_sequence_length);
    check_tokens(ids, cfg)?;
    let tr = Net::new(cfg, params.layout(), params.data()).forward(ids);
    Ok(Encoding {
        context: tr.context,
        attention: tr.attention,
    })
}

fn logits_for(text: &str, params: &ModelParams, vocab: &Vocabulary) -> Result<Vec<f64>> {
    let tokens = vocab.tokenize(text);
    if tokens.is_empty() {
        return Err(NnError::Argument("empty text".into()));
    }
    let cfg = params.config();
    let ids = truncate(&tokens.ids, cfg.max_sequence_length);
    check_tokens(ids, cfg)?;
    Ok(Net::new(cfg, params.layout(), params.data()).forward(ids).logits)
}

/// Sigmoid score in `(0, 1)` from a regression head.
pub fn predict_score(text: &str, params: &ModelParams, vocab: &Vocabulary) -> Result<f64> {
    if params.config().head != Head::Regression {
        return Err(NnError::Argument("model has no regression head".into()));
    }
    Ok(sigmoid(logits_for(text, params, vocab)?[0]))
}

/// Class probabilities from a classification head.
pub fn classify_sentence(sentence: &str, params: &ModelParams, vocab: &Vocabulary) -> Result<Vec<f64>> {
    if !matches!(params.config().head, Head::Classification { .. }) {
        return Err(NnError::Argument("model has no classification head".into()));
    }
    Ok(softmax(&logits_for(sentence, params, vocab)?))
}

/// Trained weights together with the vocabulary they were trained on.
#[derive(Debug, Clone)]
pub struct TextModel {
    pub params: ModelParams,
    pub vocab: Vocabulary,
}

impl TextModel {
    pub fn new(params: ModelParams, vocab: Vocabulary) -> Result<Self> {
        if params.config().vocab_size != vocab.len() {
            return Err(NnError::ShapeMismatch(format!(
                "model expects {} tokens, vocabulary has {}",
                params.config().vocab_size,
                vocab.len()
            )));
        }
        Ok(Self { params, vocab })
    }

    pub fn predict_score(&self, text: &str) -> Result<f64> {
        predict_score(text, &self.params, &self.vocab)
    }

    pub fn classify_sentence(&self, sentence: &str) -> Result<Vec<f64>> {
        classify_sentence(sentence, &self.params, &self.vocab)
    }
}
