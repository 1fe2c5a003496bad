use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transeg::autodiff::{lstm_cell, AutodiffError, Axis, Graph, LstmWeights, ParamId, ParamStore, Tensor, Var};
use transeg::corpus::{build_vocab, SegmentationInstance};
use transeg::model::{Arch, Intervention, ModelConfig, SegModel, Strategy, TranslationData};
use transeg::trans_repr::{ClsStrategy, TranslationEmbeddings};
use transeg::alignment::SentenceAlignment;

pub const STEP: f64 = 1e-4;

/// Relative error with a small absolute floor for near-zero gradients.
pub fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Loss value and per-parameter gradients.
pub type LossFn<'a> = dyn Fn(&ParamStore<f64>) -> Result<(f64, Vec<(ParamId, Vec<f64>)>), AutodiffError> + 'a;

/// Largest relative error between backprop and five-point central
/// differences over every element of every parameter.
pub fn max_rel_error(store: &ParamStore<f64>, loss: &LossFn<'_>) -> f64 {
    let (_, grads) = loss(store).unwrap();
    let mut worst = 0.0f64;
    let mut probe = store.clone();
    for id in store.ids() {
        let analytic = grads.iter().find(|(g, _)| *g == id).map(|(_, v)| v.clone()).unwrap_or_else(|| vec![0.0; store.get(id).value.data().len()]);
        for (k, &a) in analytic.iter().enumerate() {
            let orig = store.get(id).value.data()[k];
            let mut at = |x: f64| {
                probe.get_mut(id).value.data_mut()[k] = x;
                loss(&probe).unwrap().0
            };
            let numeric = (-at(orig + 2.0 * STEP) + 8.0 * at(orig + STEP) - 8.0 * at(orig - STEP) + at(orig - 2.0 * STEP)) / (12.0 * STEP);
            probe.get_mut(id).value.data_mut()[k] = orig;
            worst = worst.max(rel_error(a, numeric));
        }
    }
    worst
}

type Build = Box<dyn Fn(&mut Graph<'_, f64>, &[Var]) -> Result<Var, AutodiffError>>;

/// One op under test: parameter shapes and a graph from parameters to a
/// non-scalar output.
pub struct OpCase {
    pub name: &'static str,
    pub shapes: Vec<(usize, usize)>,
    pub positive: bool,
    pub training: bool,
    pub build: Build,
}

fn case(name: &'static str, shapes: &[(usize, usize)], build: impl Fn(&mut Graph<'_, f64>, &[Var]) -> Result<Var, AutodiffError> + 'static) -> OpCase {
    OpCase {
        name,
        shapes: shapes.to_vec(),
        positive: false,
        training: false,
        build: Box::new(build),
    }
}

/// Every differentiable graph op, plus an LSTM cell.
pub fn op_cases() -> Vec<OpCase> {
    let mut cases = vec![
        case("matmul", &[(2, 3), (3, 4)], |g, p| g.matmul(p[0], p[1])),
        case("add", &[(2, 3), (2, 3)], |g, p| g.add(p[0], p[1])),
        case("mul", &[(2, 3), (2, 3)], |g, p| g.mul(p[0], p[1])),
        case("add_row", &[(3, 4), (1, 4)], |g, p| g.add_row(p[0], p[1])),
        case("mul_col", &[(3, 4), (3, 1)], |g, p| g.mul_col(p[0], p[1])),
        case("affine", &[(2, 3)], |g, p| Ok(g.affine(p[0], -1.7, 0.3))),
        case("sigmoid", &[(2, 3)], |g, p| Ok(g.sigmoid(p[0]))),
        case("tanh", &[(2, 3)], |g, p| Ok(g.tanh(p[0]))),
        case("softmax_cols", &[(2, 4)], |g, p| Ok(g.softmax(p[0], Axis::Cols))),
        case("softmax_rows", &[(4, 2)], |g, p| Ok(g.softmax(p[0], Axis::Rows))),
        case("softmax_masked", &[(2, 4)], |g, p| Ok(g.softmax_masked(p[0], Axis::Cols, Some(&[true, false, true, true, false, true, true, true])))),
        case("concat_rows", &[(1, 3), (2, 3)], |g, p| g.concat(&[p[0], p[1]], Axis::Rows)),
        case("concat_cols", &[(2, 1), (2, 3)], |g, p| g.concat(&[p[0], p[1]], Axis::Cols)),
        case("slice_rows", &[(4, 3)], |g, p| g.slice(p[0], Axis::Rows, 1, 2)),
        case("slice_cols", &[(3, 5)], |g, p| g.slice(p[0], Axis::Cols, 2, 3)),
        case("embedding", &[(5, 3)], |g, p| g.embedding(p[0], &[4, 0, 4, 2])),
        case("blend_rows", &[(3, 2), (3, 2)], |g, p| g.blend_rows(p[0], p[1], &[true, false, true])),
        case("sum", &[(2, 3)], |g, p| Ok(g.sum(p[0]))),
        case("cross_entropy", &[(3, 4)], |g, p| g.cross_entropy(p[0], &[1, 3, 0], &[true, true, false])),
        case("nll", &[(3, 4)], |g, p| {
            let probs = g.softmax(p[0], Axis::Cols);
            g.nll(probs, &[2, 0, 1], &[true, false, true])
        }),
        case("attn_scores", &[(6, 4), (2, 4), (1, 4)], |g, p| g.attn_scores(p[0], p[1], p[2])),
        case("attn_context", &[(2, 3), (6, 4)], |g, p| {
            let w = g.softmax(p[0], Axis::Cols);
            g.attn_context(w, p[1])
        }),
        case("pointer_mix", &[(2, 5), (2, 3), (2, 1)], |g, p| {
            let v = g.softmax(p[0], Axis::Cols);
            let a = g.softmax(p[1], Axis::Cols);
            let pg = g.sigmoid(p[2]);
            g.pointer_mix(v, a, pg, &[1, 4, 1, 0, 2, 2])
        }),
        case("lstm_cell", &[(2, 3), (2, 4), (2, 4), (3, 16), (4, 16), (1, 16)], |g, p| {
            let w = LstmWeights {
                w_ih: p[3],
                w_hh: p[4],
                bias: p[5],
            };
            let (h, c) = lstm_cell(g, p[0], p[1], p[2], &w)?;
            g.concat(&[h, c], Axis::Cols)
        }),
    ];
    let mut log = case("log", &[(2, 3)], |g, p| Ok(g.log(p[0])));
    log.positive = true;
    cases.push(log);
    let mut drop = case("dropout", &[(3, 4)], |g, p| Ok(g.dropout(p[0], 0.4)));
    drop.training = true;
    cases.push(drop);
    cases
}

/// Max relative error of one op, reduced to a scalar by a fixed random
/// weighting of its output.
pub fn check_op(c: &OpCase, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new();
    let ids: Vec<ParamId> = c
        .shapes
        .iter()
        .enumerate()
        .map(|(i, &(r, k))| {
            let data = (0..r * k).map(|_| if c.positive { rng.random_range(0.5..2.0) } else { rng.random_range(-1.0..1.0) }).collect();
            store.add(format!("p{i}"), Tensor::from_vec(r, k, data).unwrap()).unwrap()
        })
        .collect();
    let weights: Vec<f64> = (0..256).map(|_| rng.random_range(-1.0..1.0)).collect();
    let loss = |s: &ParamStore<f64>| {
        let mut g = Graph::new(s, c.training, 5);
        let vars: Vec<Var> = ids.iter().map(|&id| g.param(id)).collect();
        let out = (c.build)(&mut g, &vars)?;
        let (r, k) = g.shape(out);
        let w = g.input(r, k, weights[..r * k].to_vec())?;
        let weighted = g.mul(out, w)?;
        let l = g.sum(weighted);
        let grads = g.backward(l)?;
        let pairs = ids.iter().filter_map(|&id| grads.get(id).map(|v| (id, v.to_vec()))).collect();
        Ok((g.scalar(l), pairs))
    };
    max_rel_error(&store, &loss)
}

/// Two instances from different sentences with hand-made translation
/// vectors and alignments.
pub fn tiny_batch_data() -> (Vec<SegmentationInstance>, TranslationData) {
    let inst = vec![SegmentationInstance::new("kats", "kat-s", "s0", 1), SegmentationInstance::new("dog", "dog", "s1", 0)];
    let emb = |id: &str, seed: u64, n: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = || (0..6).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
        TranslationEmbeddings {
            sentence_id: id.into(),
            dim: 6,
            cls: v(),
            words: (0..n).map(|_| v()).collect(),
        }
    };
    let table = [emb("s0", 1, 3), emb("s1", 2, 2)].into_iter().map(|e| (e.sentence_id.clone(), e)).collect();
    let aligns = [SentenceAlignment::new("s0", [(1, 0), (1, 2)]), SentenceAlignment::new("s1", [(0, 1)])];
    (inst, TranslationData::new(table, aligns))
}

/// Model configurations whose full loss is checked: each architecture and
/// every incorporation strategy on at least one side.
pub fn model_configs() -> Vec<ModelConfig> {
    let base = |arch| ModelConfig {
        arch,
        emb: 4,
        hid: 4,
        enc_layers: 1,
        dec_layers: 1,
        dropout: 0.0,
        trans_dim: 6,
        ..ModelConfig::pointer_generator(4, 4)
    };
    vec![
        base(Arch::PointerGenerator).with_strategies(Strategy::InitState, Strategy::ConcatHalf, ClsStrategy::Concat),
        base(Arch::PointerGenerator).with_strategies(Strategy::InitChar, Strategy::Concat, ClsStrategy::Avg),
        ModelConfig { enc_layers: 2, dec_layers: 2, ..base(Arch::PointerGenerator) }.with_strategies(Strategy::Concat, Strategy::InitState, ClsStrategy::Only),
        base(Arch::AttentiveLstm).with_strategies(Strategy::ConcatHalf, Strategy::None, ClsStrategy::None),
        base(Arch::PointerGenerator),
    ]
}

/// Max relative error of the full teacher-forced loss on a 2-instance batch.
pub fn check_model(cfg: ModelConfig) -> f64 {
    let (inst, tr) = tiny_batch_data();
    let (src, tgt) = build_vocab(&inst).unwrap();
    let model = SegModel::<f64>::new(cfg, src, tgt, 9).unwrap();
    let refs: Vec<&SegmentationInstance> = inst.iter().collect();
    let batch = model.batch(&refs, Some(&tr), true).unwrap();
    let loss = |s: &ParamStore<f64>| {
        let mut m = model.clone();
        m.params_mut().load_values(s)?;
        let mut g = m.graph(false, 0);
        let l = m.loss(&mut g, &batch, Intervention::default()).map_err(|e| match e {
            transeg::model::ModelError::Autodiff(a) => a,
            other => panic!("{other}"),
        })?;
        let grads = g.backward(l)?;
        let pairs = s.ids().filter_map(|id| grads.get(id).map(|v| (id, v.to_vec()))).collect();
        Ok((g.scalar(l), pairs))
    };
    max_rel_error(model.params(), &loss)
}
