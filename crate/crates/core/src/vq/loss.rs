//! Reconstruction loss with per-term gradient routing.
//!
//! For n quantized nodes with embeddings h_i, codes e_i = e_{z_i}, targets
//! v_i and decoded predictions v̂_i = e_i W + b:
//!
//! ```text
//! term1 = (1/n) Σ (1 − cos(v_i, v̂_i))^γ
//! term2 = (1/n) Σ ‖sg[h_i] − e_i‖²
//! term3 = (β/2) Σ ‖sg[e_i] − h_i‖²          (× 1/n when normalized)
//! ```
//!
//! term1 trains the decoder and the codebook; its gradient on e_i is also
//! copied to h_i (straight-through). term2 trains the codebook, term3 the
//! encoder.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::Rng;

use super::Codebook;

/// Single linear layer from code embeddings to attribute predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoder {
    /// `hidden × outputs`
    pub w: Array2<f64>,
    /// `1 × outputs`
    pub b: Array2<f64>,
}

impl Decoder {
    pub fn init(hidden: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        Decoder {
            w: Array2::from_shape_simple_fn((hidden, outputs), || rng.gen_range(-bound..=bound)),
            b: Array2::zeros((1, outputs)),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Decoder {
            w: Array2::zeros(self.w.dim()),
            b: Array2::zeros(self.b.dim()),
        }
    }

    pub fn outputs(&self) -> usize {
        self.w.ncols()
    }

    pub fn decode(&self, codes: &Array2<f64>) -> Array2<f64> {
        codes.dot(&self.w) + &self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub gamma: f64,
    pub beta: f64,
    /// Divide term3 by n like the other two terms.
    pub normalize_commitment: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            gamma: 2.0,
            beta: 0.25,
            normalize_commitment: false,
        }
    }
}

/// Gradients of each term with respect to what that term trains.
#[derive(Debug, Clone)]
pub struct LossGrads {
    pub decoder: Decoder,
    /// Rows for the whole codebook, from term1.
    pub codebook_term1: Array2<f64>,
    /// Rows for the whole codebook, from term2.
    pub codebook_term2: Array2<f64>,
    /// Straight-through copy of term1's gradient on the selected codes.
    pub h_term1: Array2<f64>,
    pub h_term3: Array2<f64>,
}

impl LossGrads {
    pub fn codebook(&self) -> Array2<f64> {
        &self.codebook_term1 + &self.codebook_term2
    }

    pub fn h(&self) -> Array2<f64> {
        &self.h_term1 + &self.h_term3
    }
}

#[derive(Debug, Clone)]
pub struct LossOutput {
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
    pub grads: LossGrads,
}

impl LossOutput {
    pub fn total(&self) -> f64 {
        self.term1 + self.term2 + self.term3
    }
}

/// Cosine term for one node and its gradient with respect to the prediction.
/// A zero-norm vector makes the term 1 with zero gradient.
fn cosine_term(v: ArrayView1<f64>, pred: ArrayView1<f64>, gamma: f64) -> (f64, Array1<f64>) {
    let nv = v.dot(&v).sqrt();
    let np = pred.dot(&pred).sqrt();
    if nv == 0.0 || np == 0.0 {
        return (1.0, Array1::zeros(pred.len()));
    }
    let cos = v.dot(&pred) / (nv * np);
    let gap = (1.0 - cos).max(0.0);
    let value = gap.powf(gamma);
    let d_cos = if gamma == 1.0 {
        -1.0
    } else {
        -gamma * gap.powf(gamma - 1.0)
    };
    let d_pred = (&v / (nv * np) - &pred * (cos / (np * np))) * d_cos;
    (value, d_pred)
}

/// Evaluates the three terms and their routed gradients. `h` holds one row
/// per quantized node, `codes` the selected codebook rows and `targets` the
/// attribute vectors.
pub fn reconstruction_loss(
    h: &Array2<f64>,
    codes: &[usize],
    targets: &Array2<f64>,
    codebook: &Codebook,
    decoder: &Decoder,
    cfg: &LossConfig,
) -> LossOutput {
    let n = codes.len();
    let mut grads = LossGrads {
        decoder: decoder.zeros_like(),
        codebook_term1: Array2::zeros(codebook.embeddings.dim()),
        codebook_term2: Array2::zeros(codebook.embeddings.dim()),
        h_term1: Array2::zeros(h.dim()),
        h_term3: Array2::zeros(h.dim()),
    };
    if n == 0 {
        return LossOutput {
            term1: 0.0,
            term2: 0.0,
            term3: 0.0,
            grads,
        };
    }
    let e = codebook.embeddings.select(Axis(0), codes);
    let pred = decoder.decode(&e);
    let inv_n = 1.0 / n as f64;
    let commit_scale = if cfg.normalize_commitment { inv_n } else { 1.0 };

    let (mut term1, mut term2, mut term3) = (0.0, 0.0, 0.0);
    let mut d_pred = Array2::zeros(pred.dim());
    for i in 0..n {
        let (value, g) = cosine_term(targets.row(i), pred.row(i), cfg.gamma);
        term1 += value * inv_n;
        d_pred.row_mut(i).assign(&(g * inv_n));

        let diff = &h.row(i) - &e.row(i);
        let sq = diff.dot(&diff);
        term2 += sq * inv_n;
        term3 += 0.5 * cfg.beta * commit_scale * sq;
        let mut cb = grads.codebook_term2.row_mut(codes[i]);
        cb.scaled_add(-2.0 * inv_n, &diff);
        grads.h_term3.row_mut(i).assign(&(&diff * (cfg.beta * commit_scale)));
    }
    grads.decoder.w = e.t().dot(&d_pred);
    grads.decoder.b = d_pred.sum_axis(Axis(0)).insert_axis(Axis(0));
    let d_e = d_pred.dot(&decoder.w.t());
    for (i, &z) in codes.iter().enumerate() {
        let mut row = grads.codebook_term1.row_mut(z);
        row += &d_e.row(i);
    }
    grads.h_term1 = d_e;
    LossOutput {
        term1,
        term2,
        term3,
        grads,
    }
}
