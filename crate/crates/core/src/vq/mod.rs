//! Vector-quantized tokenizer: partitioned codebooks, masked-atom
//! reconstruction training and checkpoints.
//!
//! One GIN encoder feeds two codebooks. Atom nodes are quantized into the
//! atom codebook (partitioned by element class) and decoded to an atom-type
//! one-hot; motif supernodes are quantized into the motif codebook and
//! decoded to an atom-count bucket. The graph supernode is not quantized.

mod adam;
mod codebook;
mod loss;

pub use adam::Adam;
pub use codebook::{atom_class, Codebook, CodebookLevel, Quantization, ATOM_CLASSES};
pub use loss::{reconstruction_loss, Decoder, LossConfig, LossGrads, LossOutput};

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::archive::{Archive, ArchiveError};
use crate::chem::Molecule;
use crate::encoder::{
    gin_backward, gin_forward, gin_forward_cached, EncoderInput, EncoderParams, DEFAULT_HIDDEN,
    DEFAULT_LAYERS,
};
use crate::hier::{HierGraph, NodeKind};

/// Elements with their own slot in the atom-type target; everything else
/// falls into the final "other" slot.
pub const ATOM_TARGET_ELEMENTS: [u8; 10] = [6, 7, 8, 9, 15, 16, 17, 35, 53, 5];
pub const ATOM_TARGET_DIM: usize = ATOM_TARGET_ELEMENTS.len() + 1;
/// Motif sizes 1..=32; larger motifs share the last bucket.
pub const MOTIF_BUCKETS: usize = 32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VqError {
    #[error("unknown code class {0}")]
    UnknownClass(usize),
    #[error("codebook partition does not tile the codebook")]
    BadPartition,
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("loss became non-finite at step {step}")]
    Diverged { step: usize, trace: Vec<LossTerms> },
    #[error("training corpus is empty")]
    EmptyCorpus,
}

pub fn atom_target(element: u8) -> Array2<f64> {
    let mut t = Array2::zeros((1, ATOM_TARGET_DIM));
    let slot = ATOM_TARGET_ELEMENTS
        .iter()
        .position(|&e| e == element)
        .unwrap_or(ATOM_TARGET_DIM - 1);
    t[[0, slot]] = 1.0;
    t
}

pub fn motif_target(atoms: usize) -> Array2<f64> {
    let mut t = Array2::zeros((1, MOTIF_BUCKETS));
    t[[0, atoms.clamp(1, MOTIF_BUCKETS) - 1]] = 1.0;
    t
}

/// Picks `⌈rate·n⌉` distinct atoms, returned in ascending order.
pub fn mask_atoms(mol: &Molecule, rate: f64, rng: &mut impl Rng) -> Vec<usize> {
    let n = mol.atom_count();
    // the small slack keeps e.g. 0.15 × 20 from rounding up to 4
    let count = ((rate * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n);
    let mut picked = rand::seq::index::sample(rng, n, count).into_vec();
    picked.sort_unstable();
    picked
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub gamma: f64,
    pub beta: f64,
    pub mask_rate: f64,
    pub steps: usize,
    pub step_size: f64,
    pub seed: u64,
    pub batch_size: usize,
    pub hidden: usize,
    pub layers: usize,
    pub atom_codes_per_class: usize,
    pub motif_codes: usize,
    pub normalize_commitment: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 2.0,
            beta: 0.25,
            mask_rate: 0.15,
            steps: 200,
            step_size: 1e-3,
            seed: 0,
            batch_size: 16,
            hidden: DEFAULT_HIDDEN,
            layers: DEFAULT_LAYERS,
            atom_codes_per_class: 128,
            motif_codes: 128,
            normalize_commitment: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), VqError> {
        let bad = |m: &str| Err(VqError::Config(m.to_string()));
        if !(self.gamma.is_finite() && self.gamma >= 1.0) {
            return bad("gamma must be finite and at least 1");
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return bad("beta must be finite and positive");
        }
        if !(self.mask_rate > 0.0 && self.mask_rate < 1.0) {
            return bad("mask_rate must lie in (0, 1)");
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return bad("step_size must be finite and positive");
        }
        if self.batch_size == 0 || self.hidden == 0 || self.layers == 0 {
            return bad("batch_size, hidden and layers must be positive");
        }
        if self.atom_codes_per_class == 0 || self.motif_codes == 0 {
            return bad("codebooks must be non-empty");
        }
        Ok(())
    }

    pub fn loss(&self) -> LossConfig {
        LossConfig {
            gamma: self.gamma,
            beta: self.beta,
            normalize_commitment: self.normalize_commitment,
        }
    }
}

/// Loss values for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossTerms {
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
}

impl LossTerms {
    pub fn total(&self) -> f64 {
        self.term1 + self.term2 + self.term3
    }

    fn add(&mut self, o: &LossOutput) {
        self.term1 += o.term1;
        self.term2 += o.term2;
        self.term3 += o.term3;
    }
}

/// Encoder, both codebooks and both decoders.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenizerModel {
    pub encoder: EncoderParams,
    pub atom_codebook: Codebook,
    pub motif_codebook: Codebook,
    pub atom_decoder: Decoder,
    pub motif_decoder: Decoder,
}

impl TokenizerModel {
    pub fn init(cfg: &TrainConfig) -> Self {
        let encoder = EncoderParams::init(cfg.hidden, cfg.layers, cfg.seed);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_c0de);
        TokenizerModel {
            encoder,
            atom_codebook: Codebook::atom(cfg.atom_codes_per_class, cfg.hidden, &mut rng),
            motif_codebook: Codebook::motif(cfg.motif_codes, cfg.hidden, &mut rng),
            atom_decoder: Decoder::init(cfg.hidden, ATOM_TARGET_DIM, &mut rng),
            motif_decoder: Decoder::init(cfg.hidden, MOTIF_BUCKETS, &mut rng),
        }
    }

    pub fn tensors(&self) -> Vec<(String, &Array2<f64>)> {
        let mut out = self.encoder.tensors();
        out.push(("atom_codebook.embeddings".into(), &self.atom_codebook.embeddings));
        out.push(("motif_codebook.embeddings".into(), &self.motif_codebook.embeddings));
        out.push(("atom_decoder.w".into(), &self.atom_decoder.w));
        out.push(("atom_decoder.b".into(), &self.atom_decoder.b));
        out.push(("motif_decoder.w".into(), &self.motif_decoder.w));
        out.push(("motif_decoder.b".into(), &self.motif_decoder.b));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, &mut Array2<f64>)> {
        let mut out = self.encoder.tensors_mut();
        out.push(("atom_codebook.embeddings".into(), &mut self.atom_codebook.embeddings));
        out.push(("motif_codebook.embeddings".into(), &mut self.motif_codebook.embeddings));
        out.push(("atom_decoder.w".into(), &mut self.atom_decoder.w));
        out.push(("atom_decoder.b".into(), &mut self.atom_decoder.b));
        out.push(("motif_decoder.w".into(), &mut self.motif_decoder.w));
        out.push(("motif_decoder.b".into(), &mut self.motif_decoder.b));
        out
    }

    pub fn to_archive(&self) -> Archive {
        let mut a = Archive::new();
        for (name, t) in self.tensors() {
            a.push(name, t.clone()).expect("tensor names are unique");
        }
        for (prefix, cb) in [("atom_codebook", &self.atom_codebook), ("motif_codebook", &self.motif_codebook)] {
            let ranges = cb.partition();
            let p = Array2::from_shape_fn((ranges.len(), 2), |(i, j)| {
                if j == 0 {
                    ranges[i].1.start as f64
                } else {
                    ranges[i].1.end as f64
                }
            });
            a.push(format!("{prefix}.partition"), p).expect("tensor names are unique");
        }
        a
    }

    pub fn from_archive(a: &Archive) -> Result<Self, CheckpointError> {
        let encoder = EncoderParams::from_archive(a)?;
        let codebook = |prefix: &str, level: CodebookLevel| -> Result<Codebook, CheckpointError> {
            let rows = a
                .get(&format!("{prefix}.embeddings"))
                .ok_or_else(|| ArchiveError::Missing(format!("{prefix}.embeddings")))?
                .clone();
            let p = a
                .get(&format!("{prefix}.partition"))
                .ok_or_else(|| ArchiveError::Missing(format!("{prefix}.partition")))?;
            let names: Vec<String> = match level {
                CodebookLevel::Atom => ATOM_CLASSES.iter().map(|s| s.to_string()).collect(),
                CodebookLevel::Motif => vec!["motif".into()],
            };
            if p.nrows() != names.len() || p.ncols() != 2 {
                return Err(VqError::BadPartition.into());
            }
            let partition = names
                .into_iter()
                .enumerate()
                .map(|(i, n)| (n, p[[i, 0]] as usize..p[[i, 1]] as usize))
                .collect();
            Ok(Codebook::from_parts(level, rows, partition)?)
        };
        let decoder = |prefix: &str| -> Result<Decoder, ArchiveError> {
            let w = a
                .get(&format!("{prefix}.w"))
                .ok_or_else(|| ArchiveError::Missing(format!("{prefix}.w")))?
                .clone();
            let b = a.take(&format!("{prefix}.b"), (1, w.ncols()))?;
            Ok(Decoder { w, b })
        };
        Ok(TokenizerModel {
            encoder,
            atom_codebook: codebook("atom_codebook", CodebookLevel::Atom)?,
            motif_codebook: codebook("motif_codebook", CodebookLevel::Motif)?,
            atom_decoder: decoder("atom_decoder")?,
            motif_decoder: decoder("motif_decoder")?,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error(transparent)]
    Vq(#[from] VqError),
}

/// Code assignment for one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeCode {
    /// Node index within the hierarchy.
    pub node: usize,
    pub level: CodebookLevel,
    pub class: usize,
    pub quantization: Quantization,
}

/// Quantizes the atom and motif nodes of every graph in a batch given the
/// batch's final embeddings.
fn assign_codes(model: &TokenizerModel, graphs: &[&HierGraph], offsets: &[usize], h: &Array2<f64>) -> Vec<Vec<NodeCode>> {
    graphs
        .iter()
        .zip(offsets)
        .map(|(g, &offset)| {
            g.nodes()
                .iter()
                .enumerate()
                .filter_map(|(i, node)| {
                    let (cb, level, class) = match node.kind {
                        NodeKind::Atom => (
                            &model.atom_codebook,
                            CodebookLevel::Atom,
                            atom_class(g.base().atom(node.reference).element),
                        ),
                        NodeKind::MotifSuper => (&model.motif_codebook, CodebookLevel::Motif, 0),
                        NodeKind::GraphSuper => return None,
                    };
                    let q = cb.quantize(h.row(offset + i), class).expect("class exists in partition");
                    Some(NodeCode {
                        node: i,
                        level,
                        class,
                        quantization: q,
                    })
                })
                .collect()
        })
        .collect()
}

/// Unmasked quantization of every atom and motif node of `hier`.
pub fn quantize_graph(model: &TokenizerModel, hier: &HierGraph) -> Vec<NodeCode> {
    let input = EncoderInput::from_hier(hier, &[]);
    let h = gin_forward(&input, &model.encoder).matrix;
    assign_codes(model, &[hier], &[0], &h).remove(0)
}

struct BatchResult {
    terms: LossTerms,
    grads: Option<Vec<Array2<f64>>>,
}

/// Loss (and optionally gradients, in `tensors()` order) for one batch.
fn batch_step(
    model: &TokenizerModel,
    graphs: &[&HierGraph],
    masks: &[Vec<usize>],
    loss_cfg: &LossConfig,
    with_grads: bool,
) -> BatchResult {
    let inputs: Vec<EncoderInput> = graphs
        .iter()
        .zip(masks)
        .map(|(g, m)| EncoderInput::from_hier(g, m))
        .collect();
    let batch = EncoderInput::batch(&inputs);
    let (emb, cache) = gin_forward_cached(&batch, &model.encoder);
    let h = emb.matrix;
    let codes = assign_codes(model, graphs, &batch.offsets, &h);

    let mut rows = [Vec::new(), Vec::new()];
    let mut idx = [Vec::new(), Vec::new()];
    let mut targets = [Vec::new(), Vec::new()];
    for ((g, &offset), gc) in graphs.iter().zip(&batch.offsets).zip(&codes) {
        for c in gc {
            let node = g.nodes()[c.node];
            let (slot, target) = match c.level {
                CodebookLevel::Atom => (0, atom_target(g.base().atom(node.reference).element)),
                CodebookLevel::Motif => (1, motif_target(g.motifs()[node.reference - 1].atoms.len())),
            };
            rows[slot].push(offset + c.node);
            idx[slot].push(c.quantization.index);
            targets[slot].push(target);
        }
    }

    let mut terms = LossTerms::default();
    let mut d_h = Array2::zeros(h.dim());
    let mut outputs = Vec::new();
    for slot in 0..2 {
        let (cb, dec, width) = if slot == 0 {
            (&model.atom_codebook, &model.atom_decoder, ATOM_TARGET_DIM)
        } else {
            (&model.motif_codebook, &model.motif_decoder, MOTIF_BUCKETS)
        };
        let hs = h.select(Axis(0), &rows[slot]);
        let views: Vec<_> = targets[slot].iter().map(|t| t.view()).collect();
        let tg = if views.is_empty() {
            Array2::zeros((0, width))
        } else {
            ndarray::concatenate(Axis(0), &views).expect("targets share a width")
        };
        let out = reconstruction_loss(&hs, &idx[slot], &tg, cb, dec, loss_cfg);
        terms.add(&out);
        if with_grads {
            let gh = out.grads.h();
            for (k, &r) in rows[slot].iter().enumerate() {
                let mut row = d_h.row_mut(r);
                row += &gh.row(k);
            }
        }
        outputs.push(out);
    }
    if !with_grads {
        return BatchResult { terms, grads: None };
    }
    let enc = gin_backward(&batch, &model.encoder, &cache, &d_h);
    let mut grads: Vec<Array2<f64>> = enc.tensors().into_iter().map(|(_, t)| t.clone()).collect();
    grads.push(outputs[0].grads.codebook());
    grads.push(outputs[1].grads.codebook());
    grads.push(outputs[0].grads.decoder.w.clone());
    grads.push(outputs[0].grads.decoder.b.clone());
    grads.push(outputs[1].grads.decoder.w.clone());
    grads.push(outputs[1].grads.decoder.b.clone());
    BatchResult {
        terms,
        grads: Some(grads),
    }
}

/// Loss over the whole corpus in a single batch, with masks drawn from
/// `mask_seed`.
pub fn evaluate_loss(model: &TokenizerModel, corpus: &[HierGraph], cfg: &TrainConfig, mask_seed: u64) -> LossTerms {
    let mut rng = ChaCha8Rng::seed_from_u64(mask_seed);
    let masks: Vec<Vec<usize>> = corpus
        .iter()
        .map(|g| mask_atoms(g.base(), cfg.mask_rate, &mut rng))
        .collect();
    let graphs: Vec<&HierGraph> = corpus.iter().collect();
    batch_step(model, &graphs, &masks, &cfg.loss(), false).terms
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: TokenizerModel,
    /// One entry per step: the loss of that step's batch before the update.
    pub trace: Vec<LossTerms>,
}

/// Trains from a seeded initialization. Each step draws `batch_size`
/// molecules from a seeded shuffle of the corpus, masks atoms, and applies
/// one Adam update.
pub fn train(corpus: &[HierGraph], cfg: &TrainConfig) -> Result<TrainOutcome, VqError> {
    train_from(TokenizerModel::init(cfg), corpus, cfg)
}

pub fn train_from(mut model: TokenizerModel, corpus: &[HierGraph], cfg: &TrainConfig) -> Result<TrainOutcome, VqError> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(VqError::EmptyCorpus);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut rng);
    let shapes: Vec<(usize, usize)> = model.tensors().iter().map(|(_, t)| t.dim()).collect();
    let mut adam = Adam::new(cfg.step_size, &shapes);
    let loss_cfg = cfg.loss();
    let mut cursor = 0;
    let mut trace = Vec::with_capacity(cfg.steps);
    for step in 0..cfg.steps {
        let mut graphs = Vec::with_capacity(cfg.batch_size);
        for _ in 0..cfg.batch_size {
            if cursor == order.len() {
                order.shuffle(&mut rng);
                cursor = 0;
            }
            graphs.push(&corpus[order[cursor]]);
            cursor += 1;
        }
        let masks: Vec<Vec<usize>> = graphs
            .iter()
            .map(|g| mask_atoms(g.base(), cfg.mask_rate, &mut rng))
            .collect();
        let result = batch_step(&model, &graphs, &masks, &loss_cfg, true);
        trace.push(result.terms);
        if !result.terms.total().is_finite() {
            return Err(VqError::Diverged { step, trace });
        }
        let grads = result.grads.expect("gradients requested");
        let params: Vec<&mut Array2<f64>> = model.tensors_mut().into_iter().map(|(_, t)| t).collect();
        adam.step(params, grads.iter().collect());
    }
    Ok(TrainOutcome { model, trace })
}
