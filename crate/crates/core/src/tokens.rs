//! Token streams for a language model: node-centric (one token per atom)
//! and hierarchical (atoms, then motifs, then the whole graph), each token
//! passed through the adapter of its kind.
//!
//! Every adapter input is the final encoder embedding concatenated with the
//! node's Laplacian positional encoding.

use std::fmt::Write as _;

use ndarray::{concatenate, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::archive::{Archive, ArchiveError};
use crate::chem::Molecule;
use crate::encoder::{gin_forward, EncoderInput, EncoderParams};
use crate::hier::{laplacian_eigenpairs, laplacian_pe, HierGraph, NodeKind, SpectralError, PE_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Node,
    Motif,
    Graph,
}

impl TokenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TokenKind::Node => "node",
            TokenKind::Motif => "motif",
            TokenKind::Graph => "graph",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "node" => Some(TokenKind::Node),
            "motif" => Some(TokenKind::Motif),
            "graph" => Some(TokenKind::Graph),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TokenError {
    #[error("adapter expects {expected} inputs but receives {got}")]
    Width { expected: usize, got: usize },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// A single linear layer `x W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Adapter {
    pub kind: TokenKind,
    /// `d_in × d_out`
    pub w: Array2<f64>,
    /// `1 × d_out`
    pub b: Array2<f64>,
}

impl Adapter {
    pub fn identity(kind: TokenKind, dim: usize) -> Self {
        Adapter {
            kind,
            w: Array2::eye(dim),
            b: Array2::zeros((1, dim)),
        }
    }

    pub fn zeros(kind: TokenKind, d_in: usize, d_out: usize) -> Self {
        Adapter {
            kind,
            w: Array2::zeros((d_in, d_out)),
            b: Array2::zeros((1, d_out)),
        }
    }

    /// Uniform in `[-1/√d_in, 1/√d_in]`.
    pub fn init(kind: TokenKind, d_in: usize, d_out: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (d_in as f64).sqrt();
        Adapter {
            kind,
            w: Array2::from_shape_simple_fn((d_in, d_out), || rng.gen_range(-bound..=bound)),
            b: Array2::from_shape_simple_fn((1, d_out), || rng.gen_range(-bound..=bound)),
        }
    }

    pub fn d_in(&self) -> usize {
        self.w.nrows()
    }

    pub fn d_out(&self) -> usize {
        self.w.ncols()
    }

    pub fn apply(&self, x: ArrayView2<f64>) -> Result<Array2<f64>, TokenError> {
        if x.ncols() != self.d_in() {
            return Err(TokenError::Width {
                expected: self.d_in(),
                got: x.ncols(),
            });
        }
        Ok(x.dot(&self.w) + &self.b)
    }

    /// Gradients `(dW, db, dx)` of a scalar given its gradient `d_y` with
    /// respect to the adapter output for inputs `x`.
    pub fn backward(&self, x: ArrayView2<f64>, d_y: ArrayView2<f64>) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
        let dw = x.t().dot(&d_y);
        let db = d_y.sum_axis(Axis(0)).insert_axis(Axis(0));
        let dx = d_y.dot(&self.w.t());
        (dw, db, dx)
    }
}

/// One adapter per token kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Adapters {
    pub node: Adapter,
    pub motif: Adapter,
    pub graph: Adapter,
}

impl Adapters {
    pub fn identity(dim: usize) -> Self {
        Adapters {
            node: Adapter::identity(TokenKind::Node, dim),
            motif: Adapter::identity(TokenKind::Motif, dim),
            graph: Adapter::identity(TokenKind::Graph, dim),
        }
    }

    pub fn init(d_in: usize, d_out: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Adapters {
            node: Adapter::init(TokenKind::Node, d_in, d_out, &mut rng),
            motif: Adapter::init(TokenKind::Motif, d_in, d_out, &mut rng),
            graph: Adapter::init(TokenKind::Graph, d_in, d_out, &mut rng),
        }
    }

    pub fn get(&self, kind: TokenKind) -> &Adapter {
        match kind {
            TokenKind::Node => &self.node,
            TokenKind::Motif => &self.motif,
            TokenKind::Graph => &self.graph,
        }
    }

    pub fn to_archive(&self) -> Archive {
        let mut a = Archive::new();
        for ad in [&self.node, &self.motif, &self.graph] {
            let k = ad.kind.as_str();
            a.push(format!("adapter.{k}.w"), ad.w.clone()).expect("unique names");
            a.push(format!("adapter.{k}.b"), ad.b.clone()).expect("unique names");
        }
        a
    }

    pub fn from_archive(a: &Archive) -> Result<Self, ArchiveError> {
        let one = |kind: TokenKind| -> Result<Adapter, ArchiveError> {
            let k = kind.as_str();
            let w = a
                .get(&format!("adapter.{k}.w"))
                .ok_or_else(|| ArchiveError::Missing(format!("adapter.{k}.w")))?
                .clone();
            let b = a.take(&format!("adapter.{k}.b"), (1, w.ncols()))?;
            Ok(Adapter { kind, w, b })
        };
        Ok(Adapters {
            node: one(TokenKind::Node)?,
            motif: one(TokenKind::Motif)?,
            graph: one(TokenKind::Graph)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Atom index for node tokens, motif id for motif and graph tokens.
    pub src: usize,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenStream {
    pub mol: usize,
    pub tokens: Vec<Token>,
}

impl TokenStream {
    pub fn kinds(&self) -> Vec<TokenKind> {
        self.tokens.iter().map(|t| t.kind).collect()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Embedding ‖ positional encoding, one row per node.
pub fn adapter_inputs(embeddings: &Array2<f64>, pe: &Array2<f64>) -> Array2<f64> {
    concatenate(Axis(1), &[embeddings.view(), pe.view()]).expect("row counts agree")
}

/// Positional encodings over the plain molecular graph.
pub fn molecule_pe(mol: &Molecule, dim: usize) -> Result<Array2<f64>, SpectralError> {
    let edges: Vec<(usize, usize)> = mol.bonds().iter().map(|b| (b.a, b.b)).collect();
    let pairs = laplacian_eigenpairs(mol.atom_count(), &edges, dim)?;
    let mut pe = Array2::zeros((mol.atom_count(), dim));
    pe.slice_mut(ndarray::s![.., ..pairs.values.len()]).assign(&pairs.vectors);
    Ok(pe)
}

/// One token per atom from the plain molecular graph.
pub fn node_centric_stream(
    mol: &Molecule,
    mol_id: usize,
    params: &EncoderParams,
    adapter: &Adapter,
) -> Result<TokenStream, TokenError> {
    let h = gin_forward(&EncoderInput::from_molecule(mol), params).matrix;
    let x = adapter_inputs(&h, &molecule_pe(mol, PE_DIM)?);
    let y = adapter.apply(x.view())?;
    let tokens = y
        .outer_iter()
        .enumerate()
        .map(|(i, row)| Token {
            kind: TokenKind::Node,
            src: i,
            v: row.to_vec(),
        })
        .collect();
    Ok(TokenStream { mol: mol_id, tokens })
}

/// Atom tokens, then motif tokens by id, then the graph token. Uses the
/// stored positional encoding when present.
pub fn hight_stream(
    hier: &HierGraph,
    mol_id: usize,
    params: &EncoderParams,
    adapters: &Adapters,
) -> Result<TokenStream, TokenError> {
    let h = gin_forward(&EncoderInput::from_hier(hier, &[]), params).matrix;
    let pe = match hier.pe() {
        Some(pe) => pe.clone(),
        None => laplacian_pe(hier, PE_DIM)?,
    };
    let x = adapter_inputs(&h, &pe);
    let mut tokens = Vec::with_capacity(hier.node_count());
    // node order in the hierarchy already matches token order
    for (i, node) in hier.nodes().iter().enumerate() {
        let kind = match node.kind {
            NodeKind::Atom => TokenKind::Node,
            NodeKind::MotifSuper => TokenKind::Motif,
            NodeKind::GraphSuper => TokenKind::Graph,
        };
        let y = adapters.get(kind).apply(x.slice(ndarray::s![i..i + 1, ..]))?;
        tokens.push(Token {
            kind,
            src: node.reference,
            v: y.row(0).to_vec(),
        });
    }
    Ok(TokenStream { mol: mol_id, tokens })
}

/// JSON Lines, one token per line, reals with 17 significant digits.
pub fn serialize(stream: &TokenStream) -> String {
    let mut out = String::new();
    for (i, t) in stream.tokens.iter().enumerate() {
        write!(
            out,
            "{{\"mol\":{},\"i\":{},\"kind\":\"{}\",\"src\":{},\"v\":[",
            stream.mol,
            i,
            t.kind.as_str(),
            t.src
        )
        .unwrap();
        for (j, x) in t.v.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{x:.16e}").unwrap();
        }
        out.push_str("]}\n");
    }
    out
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("token line {line}: {reason}")]
pub struct StreamParseError {
    pub line: usize,
    pub reason: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TokenLine {
    mol: usize,
    i: usize,
    kind: String,
    src: usize,
    v: Vec<f64>,
}

/// Parses JSON Lines back into streams; consecutive lines with the same
/// `mol` form one stream and must number their tokens from 0.
pub fn deserialize(text: &str) -> Result<Vec<TokenStream>, StreamParseError> {
    let mut streams: Vec<TokenStream> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let err = |reason: String| StreamParseError { line, reason };
        let parsed: TokenLine = serde_json::from_str(raw).map_err(|e| err(e.to_string()))?;
        let kind = TokenKind::parse(&parsed.kind).ok_or_else(|| err(format!("unknown kind `{}`", parsed.kind)))?;
        let continues = streams.last().is_some_and(|s| s.mol == parsed.mol && parsed.i != 0);
        if !continues {
            streams.push(TokenStream {
                mol: parsed.mol,
                tokens: Vec::new(),
            });
        }
        let stream = streams.last_mut().expect("just pushed");
        if parsed.i != stream.tokens.len() {
            return Err(err(format!("expected position {}, found {}", stream.tokens.len(), parsed.i)));
        }
        stream.tokens.push(Token {
            kind,
            src: parsed.src,
            v: parsed.v,
        });
    }
    Ok(streams)
}
