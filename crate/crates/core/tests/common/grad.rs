//! Central finite-difference checks for every trained parameter group.
//!
//! Code assignments are computed once and held fixed, so each scalar is a
//! smooth function of the parameters being perturbed.

use ndarray::Array2;

use molhier::brics::fragment;
use molhier::chem::parse_smiles;
use molhier::encoder::{gin_backward, gin_forward, gin_forward_cached, EncoderInput, EncoderParams};
use molhier::hier::{build_hier, HierGraph, NodeKind};
use molhier::tokens::{Adapter, TokenKind};
use molhier::vq::{
    atom_target, motif_target, quantize_graph, reconstruction_loss, Codebook, CodebookLevel, Decoder,
    LossConfig, LossOutput, TokenizerModel, TrainConfig,
};

pub const STEP: f64 = 1e-6;
pub const TOLERANCE: f64 = 1e-4;

pub fn rel_err(fd: f64, an: f64) -> f64 {
    (fd - an).abs() / fd.abs().max(an.abs()).max(1e-6)
}

/// Largest relative error over up to `probes` entries of `grad`.
fn max_err(base: &Array2<f64>, grad: &Array2<f64>, probes: usize, f: impl Fn(&Array2<f64>) -> f64) -> f64 {
    let n = base.len();
    let stride = (n / probes).max(1);
    let mut worst: f64 = 0.0;
    for idx in (0..n).step_by(stride) {
        let at = (idx / base.ncols(), idx % base.ncols());
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[at] += STEP;
        minus[at] -= STEP;
        let fd = (f(&plus) - f(&minus)) / (2.0 * STEP);
        worst = worst.max(rel_err(fd, grad[at]));
    }
    worst
}

pub struct Setup {
    pub model: TokenizerModel,
    pub hier: HierGraph,
    pub cfg: LossConfig,
    /// Node indices, fixed codes and targets per level.
    pub atom: (Vec<usize>, Vec<usize>, Array2<f64>),
    pub motif: (Vec<usize>, Vec<usize>, Array2<f64>),
}

pub fn setup(smiles: &str, seed: u64) -> Setup {
    let train = TrainConfig {
        hidden: 6,
        layers: 2,
        atom_codes_per_class: 3,
        motif_codes: 4,
        seed,
        ..TrainConfig::default()
    };
    let mut model = TokenizerModel::init(&train);
    model.encoder.eps[[0, 0]] = 0.3;
    model.encoder.eps[[0, 1]] = -0.2;
    let mol = parse_smiles(smiles).unwrap();
    let hier = build_hier(&mol, &fragment(&mol)).unwrap();
    let codes = quantize_graph(&model, &hier);
    let mut atom = (Vec::new(), Vec::new(), Vec::new());
    let mut motif = (Vec::new(), Vec::new(), Vec::new());
    for c in &codes {
        let node = hier.nodes()[c.node];
        let (slot, target) = match c.level {
            CodebookLevel::Atom => (&mut atom, atom_target(mol.atom(node.reference).element)),
            CodebookLevel::Motif => {
                assert_eq!(node.kind, NodeKind::MotifSuper);
                (&mut motif, motif_target(hier.motifs()[node.reference - 1].atoms.len()))
            }
        };
        slot.0.push(c.node);
        slot.1.push(c.quantization.index);
        slot.2.push(target);
    }
    let stack = |rows: Vec<Array2<f64>>| {
        let views: Vec<_> = rows.iter().map(|r| r.view()).collect();
        ndarray::concatenate(ndarray::Axis(0), &views).unwrap()
    };
    Setup {
        model,
        hier,
        cfg: LossConfig {
            gamma: 2.0,
            beta: 0.25,
            normalize_commitment: false,
        },
        atom: (atom.0, atom.1, stack(atom.2)),
        motif: (motif.0, motif.1, stack(motif.2)),
    }
}

impl Setup {
    fn input(&self) -> EncoderInput {
        EncoderInput::from_hier(&self.hier, &[])
    }

    fn level(
        &self,
        h: &Array2<f64>,
        motif: bool,
        codebook: Option<&Codebook>,
        decoder: Option<&Decoder>,
    ) -> LossOutput {
        let (rows, codes, targets) = if motif { &self.motif } else { &self.atom };
        let (cb, dec) = if motif {
            (&self.model.motif_codebook, &self.model.motif_decoder)
        } else {
            (&self.model.atom_codebook, &self.model.atom_decoder)
        };
        reconstruction_loss(
            &h.select(ndarray::Axis(0), rows),
            codes,
            targets,
            codebook.unwrap_or(cb),
            decoder.unwrap_or(dec),
            &self.cfg,
        )
    }

    fn h(&self, params: &EncoderParams) -> Array2<f64> {
        gin_forward(&self.input(), params).matrix
    }

    /// Encoder parameters against term3 of both levels.
    pub fn encoder_error(&self) -> f64 {
        let x = self.input();
        let (emb, cache) = gin_forward_cached(&x, &self.model.encoder);
        let mut d_out = Array2::zeros(emb.matrix.dim());
        for motif in [false, true] {
            let out = self.level(&emb.matrix, motif, None, None);
            let rows = if motif { &self.motif.0 } else { &self.atom.0 };
            for (i, &r) in rows.iter().enumerate() {
                let mut row = d_out.row_mut(r);
                row += &out.grads.h_term3.row(i);
            }
        }
        let grads = gin_backward(&x, &self.model.encoder, &cache, &d_out);
        let term3 = |p: &EncoderParams| {
            let h = self.h(p);
            self.level(&h, false, None, None).term3 + self.level(&h, true, None, None).term3
        };
        let mut worst: f64 = 0.0;
        for (name, g) in grads.tensors() {
            let base = self
                .model
                .encoder
                .tensors()
                .into_iter()
                .find(|(n, _)| *n == name)
                .unwrap()
                .1
                .clone();
            let err = max_err(&base, g, 12, |t| {
                let mut p = self.model.encoder.clone();
                *p.tensors_mut().into_iter().find(|(n, _)| *n == name).unwrap().1 = t.clone();
                term3(&p)
            });
            worst = worst.max(err);
        }
        worst
    }

    /// Decoder weights and bias against term1.
    pub fn decoder_error(&self) -> f64 {
        let h = self.h(&self.model.encoder);
        let mut worst: f64 = 0.0;
        for motif in [false, true] {
            let dec = if motif { &self.model.motif_decoder } else { &self.model.atom_decoder };
            let g = self.level(&h, motif, None, None).grads.decoder;
            let w = max_err(&dec.w, &g.w, 40, |w| {
                let d = Decoder { w: w.clone(), b: dec.b.clone() };
                self.level(&h, motif, None, Some(&d)).term1
            });
            let b = max_err(&dec.b, &g.b, 40, |b| {
                let d = Decoder { w: dec.w.clone(), b: b.clone() };
                self.level(&h, motif, None, Some(&d)).term1
            });
            worst = worst.max(w).max(b);
        }
        worst
    }

    /// Codebook rows against term1 + term2.
    pub fn codebook_error(&self) -> f64 {
        let h = self.h(&self.model.encoder);
        let mut worst: f64 = 0.0;
        for motif in [false, true] {
            let cb = if motif { &self.model.motif_codebook } else { &self.model.atom_codebook };
            let g = self.level(&h, motif, None, None).grads.codebook();
            let err = max_err(&cb.embeddings, &g, 60, |e| {
                let c = Codebook::from_parts(cb.level(), e.clone(), cb.partition().to_vec()).unwrap();
                let out = self.level(&h, motif, Some(&c), None);
                out.term1 + out.term2
            });
            worst = worst.max(err);
        }
        worst
    }
}

/// Adapter weights, bias and inputs against a fixed linear functional of
/// the outputs.
pub fn adapter_error(seed: u64) -> f64 {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let ad = Adapter::init(TokenKind::Motif, 7, 4, &mut rng);
    let x = Array2::from_shape_fn((3, 7), |(i, j)| ((i * 7 + j * 3) as f64 + 1.0).sin());
    let wts = Array2::from_shape_fn((3, 4), |(i, j)| ((i + 2 * j) as f64 + 0.5).cos());
    let f = |a: &Adapter, x: &Array2<f64>| (a.apply(x.view()).unwrap() * &wts).sum();
    let (dw, db, dx) = ad.backward(x.view(), wts.view());
    let w = max_err(&ad.w, &dw, 100, |w| f(&Adapter { w: w.clone(), ..ad.clone() }, &x));
    let b = max_err(&ad.b, &db, 100, |b| f(&Adapter { b: b.clone(), ..ad.clone() }, &x));
    let xe = max_err(&x, &dx, 100, |x| f(&ad, x));
    w.max(b).max(xe)
}
