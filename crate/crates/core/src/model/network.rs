use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{
    lstm_cell, read_checkpoint, write_checkpoint, AutodiffError, Axis, Gradients, Graph, LstmWeights, ParamId, ParamStore, Real, Tensor, Var,
};
use crate::corpus::{SegmentationInstance, Vocabulary, BOS, EOS, PAD};
use crate::trans_repr::{ClsStrategy, TranslationProjector};

use super::{translation_width, Arch, Batch, ModelConfig, ModelError, Strategy, TranslationData};

#[derive(Debug, Clone, Copy)]
struct LayerIds {
    w_ih: ParamId,
    w_hh: ParamId,
    bias: ParamId,
}

#[derive(Debug, Clone, Copy)]
struct ProjIds {
    w_trans: ParamId,
    w_cls: Option<ParamId>,
}

#[derive(Debug, Clone)]
struct Weights {
    src_emb: ParamId,
    tgt_emb: ParamId,
    enc: Vec<Vec<LayerIds>>,
    dec: Vec<LayerIds>,
    bridge: Option<[(ParamId, ParamId); 2]>,
    attn_k: ParamId,
    attn_q: ParamId,
    attn_bq: ParamId,
    attn_v: ParamId,
    out_w: ParamId,
    out_b: ParamId,
    pgen: Option<(ParamId, ParamId)>,
    enc_proj: Option<ProjIds>,
    dec_proj: Option<ProjIds>,
}

/// Test hooks that override parts of the decoder.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Intervention {
    /// Replaces the generation probability of a pointer-generator.
    pub force_p_gen: Option<f64>,
    /// At step `t` attend only to source position `t`, clamped to the last.
    pub diagonal_attention: bool,
}

/// Graph handles produced by [`SegModel::encode`].
#[derive(Debug, Clone)]
pub struct EncoderOutput {
    /// `positions * B x H_enc`, position-major.
    pub states: Var,
    pub positions: usize,
    /// Row-major `B x positions`; false for PAD and the Init-Char slot.
    pub attn_mask: Vec<bool>,
    /// Offset of the first real character (1 under Init-Char).
    pub offset: usize,
    /// Decoder initial state derived from the encoder.
    pub final_h: Var,
    pub final_c: Var,
    /// Tiled translation vector used as the encoder's initial state.
    pub init_state: Option<Var>,
    /// LSTM input at each position of the first layer.
    pub inputs: Vec<Var>,
    /// Translation vector for the decoder side.
    pub dec_translation: Option<Var>,
    keys: Var,
}

/// Values from one decoder step.
#[derive(Debug, Clone)]
pub struct DecoderStep<T> {
    pub logits: Tensor<T>,
    pub vocab_dist: Tensor<T>,
    pub attn_dist: Tensor<T>,
    pub p_gen: Option<Tensor<T>>,
    pub final_dist: Tensor<T>,
}

struct StepVars {
    logits: Var,
    vocab: Var,
    attn: Var,
    p_gen: Option<Var>,
    final_dist: Var,
}

/// A segmenter with its vocabularies and parameters.
#[derive(Debug, Clone)]
pub struct SegModel<T: Real> {
    config: ModelConfig,
    source: Vocabulary,
    target: Vocabulary,
    params: ParamStore<T>,
    w: Weights,
}

impl<T: Real> SegModel<T> {
    pub fn new(config: ModelConfig, source: Vocabulary, target: Vocabulary, seed: u64) -> Result<Self, ModelError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = ParamStore::new();
        let k = 1.0 / (config.hid as f64).sqrt();
        let (emb, hid) = (config.emb, config.hid);
        let dirs = if config.bidirectional_encoder { 2 } else { 1 };
        let h_enc = dirs * hid;

        let layer = |p: &mut ParamStore<T>, name: String, input: usize, rng: &mut ChaCha8Rng| -> Result<LayerIds, AutodiffError> {
            Ok(LayerIds {
                w_ih: p.add_uniform(format!("{name}.w_ih"), input, 4 * hid, k, rng)?,
                w_hh: p.add_uniform(format!("{name}.w_hh"), hid, 4 * hid, k, rng)?,
                bias: p.add_zeros(format!("{name}.bias"), 1, 4 * hid)?,
            })
        };
        let char_width = |s: Strategy| if s == Strategy::ConcatHalf { emb / 2 } else { emb };
        let input_width = |s: Strategy| match s {
            Strategy::Concat => 2 * emb,
            _ => emb,
        };

        let src_emb = p.add_uniform("src_emb", source.len(), char_width(config.enc_strategy), k, &mut rng)?;
        let tgt_emb = p.add_uniform("tgt_emb", target.len(), char_width(config.dec_strategy), k, &mut rng)?;
        let mut enc = Vec::new();
        for l in 0..config.enc_layers {
            let input = if l == 0 { input_width(config.enc_strategy) } else { h_enc };
            let mut per_dir = vec![layer(&mut p, format!("enc.l{l}.fwd"), input, &mut rng)?];
            if dirs == 2 {
                per_dir.push(layer(&mut p, format!("enc.l{l}.bwd"), input, &mut rng)?);
            }
            enc.push(per_dir);
        }
        let dec_in = input_width(config.dec_strategy);
        let mut dec = Vec::new();
        for l in 0..config.dec_layers {
            dec.push(layer(&mut p, format!("dec.l{l}"), if l == 0 { dec_in } else { hid }, &mut rng)?);
        }
        let bridge = if dirs == 2 {
            let mut pair = |name: &str| -> Result<(ParamId, ParamId), AutodiffError> {
                Ok((
                    p.add_uniform(format!("bridge.{name}.w"), h_enc, hid, k, &mut rng)?,
                    p.add_zeros(format!("bridge.{name}.b"), 1, hid)?,
                ))
            };
            Some([pair("h")?, pair("c")?])
        } else {
            None
        };
        let attn_k = p.add_uniform("attn.w_k", h_enc, hid, k, &mut rng)?;
        let attn_q = p.add_uniform("attn.w_q", hid, hid, k, &mut rng)?;
        let attn_bq = p.add_zeros("attn.b_q", 1, hid)?;
        let attn_v = p.add_uniform("attn.v", 1, hid, k, &mut rng)?;
        let out_w = p.add_uniform("out.w", hid + h_enc, target.len(), k, &mut rng)?;
        let out_b = p.add_zeros("out.b", 1, target.len())?;
        let pgen = if config.arch == Arch::PointerGenerator {
            Some((
                p.add_uniform("pgen.w", h_enc + hid + dec_in, 1, k, &mut rng)?,
                p.add_zeros("pgen.b", 1, 1)?,
            ))
        } else {
            None
        };
        let mut proj = |p: &mut ParamStore<T>, side: &str, s: Strategy| -> Result<Option<ProjIds>, ModelError> {
            if s == Strategy::None {
                return Ok(None);
            }
            let ((r, c), cls) = TranslationProjector::shapes(config.cls_strategy, config.trans_dim, translation_width(s, emb))?;
            let w_trans = p.add_uniform(format!("proj.{side}.w_trans"), r, c, k, &mut rng)?;
            let w_cls = match cls {
                Some((r, c)) => Some(p.add_uniform(format!("proj.{side}.w_cls"), r, c, k, &mut rng)?),
                None => None,
            };
            Ok(Some(ProjIds { w_trans, w_cls }))
        };
        let enc_proj = proj(&mut p, "enc", config.enc_strategy)?;
        let dec_proj = proj(&mut p, "dec", config.dec_strategy)?;
        Ok(Self {
            config,
            source,
            target,
            params: p,
            w: Weights {
                src_emb,
                tgt_emb,
                enc,
                dec,
                bridge,
                attn_k,
                attn_q,
                attn_bq,
                attn_v,
                out_w,
                out_b,
                pgen,
                enc_proj,
                dec_proj,
            },
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn source_vocab(&self) -> &Vocabulary {
        &self.source
    }

    pub fn target_vocab(&self) -> &Vocabulary {
        &self.target
    }

    pub fn params(&self) -> &ParamStore<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore<T> {
        &mut self.params
    }

    pub fn graph(&self, training: bool, seed: u64) -> Graph<'_, T> {
        Graph::new(&self.params, training, seed)
    }

    /// Source ids with EOS appended, and the target id each position copies as.
    pub fn encode_surface(&self, surface: &str) -> (Vec<usize>, Vec<usize>) {
        let mut src = self.source.encode(surface);
        let mut copy = self.target.encode(surface);
        src.push(EOS);
        copy.push(EOS);
        (src, copy)
    }

    /// Builds a batch from instances. Targets are included when `with_targets`.
    pub fn batch(&self, instances: &[&SegmentationInstance], translations: Option<&TranslationData>, with_targets: bool) -> Result<Batch, ModelError> {
        let (sources, copies): (Vec<_>, Vec<_>) = instances.iter().map(|i| self.encode_surface(&i.surface)).unzip();
        let targets: Vec<Vec<usize>> = instances.iter().map(|i| self.target.encode(&i.canonical)).collect();
        let pooled = if self.config.uses_translation() {
            let data = translations.ok_or_else(|| ModelError::MissingTranslation(instances.first().map(|i| i.sentence_id.clone()).unwrap_or_default()))?;
            let v = instances
                .iter()
                .map(|i| data.pooled(&i.sentence_id, i.word_index, self.config.cls_strategy))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(p) = v.iter().find(|p| p.primary.len() != self.config.trans_dim) {
                return Err(ModelError::DimError {
                    expected: self.config.trans_dim,
                    found: p.primary.len(),
                });
            }
            Some(v)
        } else {
            None
        };
        let max_len = instances.iter().map(|i| 2 * i.surface.chars().count() + 10).collect();
        Batch::new(&sources, &copies, with_targets.then_some(targets.as_slice()), pooled, max_len)
    }

    fn lstm(&self, g: &mut Graph<'_, T>, ids: LayerIds) -> LstmWeights {
        LstmWeights {
            w_ih: g.param(ids.w_ih),
            w_hh: g.param(ids.w_hh),
            bias: g.param(ids.bias),
        }
    }

    fn project(&self, g: &mut Graph<'_, T>, ids: Option<ProjIds>, batch: &Batch) -> Result<Option<Var>, ModelError> {
        let Some(ids) = ids else { return Ok(None) };
        let pooled = batch
            .translations
            .as_ref()
            .ok_or_else(|| ModelError::MissingTranslation(String::new()))?;
        let h = self.config.trans_dim;
        let primary: Vec<&[f64]> = pooled.iter().map(|p| p.primary.as_slice()).collect();
        let primary = g.input(batch.size, h, stack(&primary, h)?)?;
        let w = g.param(ids.w_trans);
        let mut v = g.matmul(primary, w)?;
        if let Some(w_cls) = ids.w_cls {
            let cls = pooled
                .iter()
                .map(|p| p.cls.as_deref().ok_or_else(|| ModelError::MissingTranslation(String::new())))
                .collect::<Result<Vec<_>, _>>()?;
            let cls = g.input(batch.size, h, stack(&cls, h)?)?;
            let w = g.param(w_cls);
            let c = g.matmul(cls, w)?;
            v = g.concat(&[v, c], Axis::Cols)?;
        }
        Ok(Some(v))
    }

    fn tile(&self, g: &mut Graph<'_, T>, v: Var) -> Result<Var, ModelError> {
        let z = self.config.hid / g.shape(v).1;
        Ok(if z == 1 { v } else { g.concat(&vec![v; z], Axis::Cols)? })
    }

    pub fn encode(&self, g: &mut Graph<'_, T>, batch: &Batch) -> Result<EncoderOutput, ModelError> {
        let cfg = &self.config;
        let b = batch.size;
        let v_enc = self.project(g, self.w.enc_proj, batch)?;
        let v_dec = self.project(g, self.w.dec_proj, batch)?;

        let table = g.param(self.w.src_emb);
        let embedded = g.embedding(table, &batch.src_ids)?;
        let embedded = g.dropout(embedded, cfg.dropout);
        let mut inputs = Vec::with_capacity(batch.src_steps + 1);
        for t in 0..batch.src_steps {
            let x = g.slice(embedded, Axis::Rows, t * b, b)?;
            inputs.push(match (cfg.enc_strategy, v_enc) {
                (Strategy::Concat | Strategy::ConcatHalf, Some(v)) => g.concat(&[x, v], Axis::Cols)?,
                _ => x,
            });
        }
        let offset = match (cfg.enc_strategy, v_enc) {
            (Strategy::InitChar, Some(v)) => {
                inputs.insert(0, v);
                1
            }
            _ => 0,
        };
        let steps = inputs.len();
        let live: Vec<Vec<bool>> = (0..steps)
            .map(|t| batch.src_len.iter().map(|&n| t < offset + n).collect())
            .collect();
        let init_state = match (cfg.enc_strategy, v_enc) {
            (Strategy::InitState, Some(v)) => Some(self.tile(g, v)?),
            _ => None,
        };
        let zeros = g.zeros(b, cfg.hid);
        let start = init_state.unwrap_or(zeros);

        let first_inputs = inputs.clone();
        let mut finals = Vec::new();
        for (l, dirs) in self.w.enc.iter().enumerate() {
            let mut outs: Vec<Vec<Var>> = Vec::new();
            finals.clear();
            for (d, &ids) in dirs.iter().enumerate() {
                let w = self.lstm(g, ids);
                let (mut h, mut c) = (start, start);
                let mut out = vec![h; steps];
                let order: Box<dyn Iterator<Item = usize>> = if d == 0 { Box::new(0..steps) } else { Box::new((0..steps).rev()) };
                for t in order {
                    let (nh, nc) = lstm_cell(g, inputs[t], h, c, &w)?;
                    h = g.blend_rows(nh, h, &live[t])?;
                    c = g.blend_rows(nc, c, &live[t])?;
                    out[t] = h;
                }
                finals.push((h, c));
                outs.push(out);
            }
            let last = l + 1 == self.w.enc.len();
            inputs = (0..steps)
                .map(|t| {
                    let x = if outs.len() == 2 {
                        g.concat(&[outs[0][t], outs[1][t]], Axis::Cols)?
                    } else {
                        outs[0][t]
                    };
                    Ok(if last { x } else { g.dropout(x, cfg.dropout) })
                })
                .collect::<Result<_, AutodiffError>>()?;
        }
        let states = g.concat(&inputs, Axis::Rows)?;
        let (final_h, final_c) = match self.w.bridge {
            Some([(wh, bh), (wc, bc)]) => {
                let hs = g.concat(&[finals[0].0, finals[1].0], Axis::Cols)?;
                let cs = g.concat(&[finals[0].1, finals[1].1], Axis::Cols)?;
                let (wh, bh, wc, bc) = (g.param(wh), g.param(bh), g.param(wc), g.param(bc));
                let h = g.matmul(hs, wh)?;
                let h = g.add_row(h, bh)?;
                let c = g.matmul(cs, wc)?;
                let c = g.add_row(c, bc)?;
                (h, c)
            }
            None => finals[0],
        };
        let wk = g.param(self.w.attn_k);
        let keys = g.matmul(states, wk)?;
        let attn_mask = (0..b)
            .flat_map(|row| {
                let n = batch.src_len[row];
                (0..steps).map(move |t| t >= offset && t < offset + n)
            })
            .collect();
        Ok(EncoderOutput {
            states,
            positions: steps,
            attn_mask,
            offset,
            final_h,
            final_c,
            init_state,
            inputs: first_inputs,
            dec_translation: v_dec,
            keys,
        })
    }

    fn initial_decoder_state(&self, g: &mut Graph<'_, T>, enc: &EncoderOutput) -> Result<Vec<(Var, Var)>, ModelError> {
        let s = match (self.config.dec_strategy, enc.dec_translation) {
            (Strategy::InitState, Some(v)) => {
                let t = self.tile(g, v)?;
                (t, t)
            }
            _ => (enc.final_h, enc.final_c),
        };
        Ok(vec![s; self.config.dec_layers])
    }

    #[allow(clippy::too_many_arguments)]
    fn step(
        &self,
        g: &mut Graph<'_, T>,
        batch: &Batch,
        enc: &EncoderOutput,
        state: &mut [(Var, Var)],
        prev: &[usize],
        t: usize,
        iv: Intervention,
    ) -> Result<StepVars, ModelError> {
        let cfg = &self.config;
        let b = batch.size;
        let table = g.param(self.w.tgt_emb);
        let x = g.embedding(table, prev)?;
        let x = g.dropout(x, cfg.dropout);
        let x = match (cfg.dec_strategy, enc.dec_translation) {
            (Strategy::Concat | Strategy::ConcatHalf, Some(v)) => g.concat(&[x, v], Axis::Cols)?,
            _ => x,
        };
        let mut inp = x;
        for (l, &ids) in self.w.dec.iter().enumerate() {
            let w = self.lstm(g, ids);
            let (h, c) = lstm_cell(g, inp, state[l].0, state[l].1, &w)?;
            state[l] = (h, c);
            inp = if l + 1 < self.w.dec.len() { g.dropout(h, cfg.dropout) } else { h };
        }
        let s = inp;
        let attn = if iv.diagonal_attention {
            let mut data = vec![T::zero(); b * enc.positions];
            for row in 0..b {
                let pos = enc.offset + t.min(batch.src_len[row] - 1);
                data[row * enc.positions + pos] = T::one();
            }
            g.input(b, enc.positions, data)?
        } else {
            let (wq, bq, va) = (g.param(self.w.attn_q), g.param(self.w.attn_bq), g.param(self.w.attn_v));
            let q = g.matmul(s, wq)?;
            let q = g.add_row(q, bq)?;
            let scores = g.attn_scores(enc.keys, q, va)?;
            g.softmax_masked(scores, Axis::Cols, Some(&enc.attn_mask))
        };
        let ctx = g.attn_context(attn, enc.states)?;
        let sc = g.concat(&[s, ctx], Axis::Cols)?;
        let (ow, ob) = (g.param(self.w.out_w), g.param(self.w.out_b));
        let logits = g.matmul(sc, ow)?;
        let logits = g.add_row(logits, ob)?;
        let vocab = g.softmax(logits, Axis::Cols);
        let (p_gen, final_dist) = match self.w.pgen {
            Some((pw, pb)) => {
                let p_gen = match iv.force_p_gen {
                    Some(p) => g.input(b, 1, vec![T::of(p); b])?,
                    None => {
                        let feats = g.concat(&[ctx, s, x], Axis::Cols)?;
                        let (pw, pb) = (g.param(pw), g.param(pb));
                        let z = g.matmul(feats, pw)?;
                        let z = g.add_row(z, pb)?;
                        g.sigmoid(z)
                    }
                };
                let ids = self.copy_ids(batch, enc);
                (Some(p_gen), g.pointer_mix(vocab, attn, p_gen, &ids)?)
            }
            None => (None, vocab),
        };
        Ok(StepVars {
            logits,
            vocab,
            attn,
            p_gen,
            final_dist,
        })
    }

    fn copy_ids(&self, batch: &Batch, enc: &EncoderOutput) -> Vec<usize> {
        let mut ids = Vec::with_capacity(batch.size * enc.positions);
        for row in &batch.copy_ids {
            ids.extend(std::iter::repeat_n(PAD, enc.offset));
            ids.extend_from_slice(row);
        }
        ids
    }

    fn teacher_forced(&self, g: &mut Graph<'_, T>, batch: &Batch, iv: Intervention) -> Result<Vec<StepVars>, ModelError> {
        if !batch.has_targets() {
            return Err(ModelError::EmptyBatch);
        }
        let enc = self.encode(g, batch)?;
        let mut state = self.initial_decoder_state(g, &enc)?;
        let b = batch.size;
        (0..batch.tgt_steps)
            .map(|t| self.step(g, batch, &enc, &mut state, &batch.tgt_in[t * b..(t + 1) * b], t, iv))
            .collect()
    }

    /// Mean negative log-likelihood of the gold characters.
    pub fn loss(&self, g: &mut Graph<'_, T>, batch: &Batch, iv: Intervention) -> Result<Var, ModelError> {
        let steps = self.teacher_forced(g, batch, iv)?;
        Ok(match self.config.arch {
            Arch::PointerGenerator => {
                let rows: Vec<Var> = steps.iter().map(|s| s.final_dist).collect();
                let all = g.concat(&rows, Axis::Rows)?;
                g.nll(all, &batch.tgt_out, &batch.tgt_mask)?
            }
            Arch::AttentiveLstm => {
                let rows: Vec<Var> = steps.iter().map(|s| s.logits).collect();
                let all = g.concat(&rows, Axis::Rows)?;
                g.cross_entropy(all, &batch.tgt_out, &batch.tgt_mask)?
            }
        })
    }

    /// Loss value and parameter gradients for one batch.
    pub fn loss_and_grads(&self, batch: &Batch, training: bool, seed: u64) -> Result<(f64, Gradients<T>), ModelError> {
        let mut g = self.graph(training, seed);
        let loss = self.loss(&mut g, batch, Intervention::default())?;
        let grads = g.backward(loss)?;
        Ok((g.scalar(loss).as_f64(), grads))
    }

    /// Teacher-forced decoder values in evaluation mode.
    pub fn decoder_steps(&self, batch: &Batch, iv: Intervention) -> Result<Vec<DecoderStep<T>>, ModelError> {
        let mut g = self.graph(false, 0);
        let steps = self.teacher_forced(&mut g, batch, iv)?;
        Ok(steps
            .into_iter()
            .map(|s| DecoderStep {
                logits: g.tensor(s.logits),
                vocab_dist: g.tensor(s.vocab),
                attn_dist: g.tensor(s.attn),
                p_gen: s.p_gen.map(|p| g.tensor(p)),
                final_dist: g.tensor(s.final_dist),
            })
            .collect())
    }

    /// Greedy decoding to target ids, stopping at EOS or each row's length cap.
    pub fn greedy_ids(&self, batch: &Batch, iv: Intervention) -> Result<Vec<Vec<usize>>, ModelError> {
        let mut g = self.graph(false, 0);
        let enc = self.encode(&mut g, batch)?;
        let mut state = self.initial_decoder_state(&mut g, &enc)?;
        let b = batch.size;
        let v = self.target.len();
        let mut prev = vec![BOS; b];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); b];
        let mut done: Vec<bool> = batch.max_len.iter().map(|&m| m == 0).collect();
        let horizon = batch.max_len.iter().copied().max().unwrap_or(0);
        for t in 0..horizon {
            if done.iter().all(|&d| d) {
                break;
            }
            let sv = self.step(&mut g, batch, &enc, &mut state, &prev, t, iv)?;
            let dist = g.value(sv.final_dist);
            for row in 0..b {
                let r = &dist[row * v..(row + 1) * v];
                let mut best = 0;
                for (j, &p) in r.iter().enumerate() {
                    if p > r[best] {
                        best = j;
                    }
                }
                prev[row] = best;
                if done[row] {
                    continue;
                }
                if best == EOS {
                    done[row] = true;
                } else {
                    out[row].push(best);
                    done[row] = out[row].len() >= batch.max_len[row];
                }
            }
        }
        Ok(out)
    }

    pub fn greedy_decode(&self, batch: &Batch, iv: Intervention) -> Result<Vec<String>, ModelError> {
        Ok(self.greedy_ids(batch, iv)?.iter().map(|ids| self.target.decode(ids)).collect())
    }

    /// Serialized parameters with the config and vocabularies in the header.
    pub fn to_checkpoint(&self, extra: &[(String, String)]) -> String {
        let mut meta = self.config.to_pairs();
        let chars = |v: &Vocabulary| serde_json::Value::from(v.chars().iter().collect::<String>()).to_string();
        meta.push(("vocab.source".into(), chars(&self.source)));
        meta.push(("vocab.target".into(), chars(&self.target)));
        meta.extend(extra.iter().cloned());
        write_checkpoint(&self.params, &meta)
    }

    pub fn from_checkpoint(text: &str) -> Result<(Self, Vec<(String, String)>), ModelError> {
        let ck = read_checkpoint::<T>(text)?;
        let config = ModelConfig::from_pairs(ck.meta.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        let vocab = |key: &str| -> Result<Vocabulary, ModelError> {
            let raw = ck.meta_value(key).ok_or_else(|| AutodiffError::Checkpoint(format!("missing {key}")))?;
            let s: String = serde_json::from_str(raw).map_err(|e| AutodiffError::Checkpoint(e.to_string()))?;
            Ok(Vocabulary::from_chars(s.chars()))
        };
        let mut model = Self::new(config, vocab("vocab.source")?, vocab("vocab.target")?, 0)?;
        model.params.load_values(&ck.params)?;
        Ok((model, ck.meta))
    }

    /// The CLS strategy of the translation projector, when one exists.
    pub fn cls_strategy(&self) -> Option<ClsStrategy> {
        self.config.uses_translation().then_some(self.config.cls_strategy)
    }
}

fn stack<T: Real>(rows: &[&[f64]], width: usize) -> Result<Vec<T>, ModelError> {
    let mut out = Vec::with_capacity(rows.len() * width);
    for r in rows {
        if r.len() != width {
            return Err(ModelError::DimError {
                expected: width,
                found: r.len(),
            });
        }
        out.extend(r.iter().map(|&x| T::of(x)));
    }
    Ok(out)
}
