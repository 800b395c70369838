//! GIN message passing over supernode-augmented graphs, with a hand-written
//! reverse pass.
//!
//! Layer update for node `u`:
//!
//! ```text
//! a_u = (1 + ε) h_u + Σ_{v ∈ N(u)} (h_v + edge[kind(u, v)])
//! h'_u = W2 · relu(W1 · a_u + b1) + b2
//! ```
//!
//! Several graphs are batched by concatenating their nodes; edges never
//! cross graph boundaries.

mod params;

pub use params::{
    EncoderParams, ATOM_TYPES, CHARGE_CLASSES, DEFAULT_HIDDEN, DEFAULT_LAYERS, EDGE_KINDS,
    NODE_KINDS,
};

use ndarray::{Array1, Array2, Axis};

use crate::chem::{BondOrder, Molecule};
use crate::hier::{EdgeKind, HierGraph, NodeKind};

pub const KIND_ATOM: usize = 0;
pub const KIND_MOTIF: usize = 1;
pub const KIND_GRAPH: usize = 2;
pub const KIND_MASK: usize = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EncoderError {
    #[error("readout over an empty node subset")]
    EmptySubset,
    #[error("node {node} out of range for {nodes} nodes")]
    NodeOutOfRange { node: usize, nodes: usize },
}

/// Maps an element to its atom-type row; anything outside the table goes to
/// the unknown bucket 0.
pub fn atom_type_index(element: u8) -> usize {
    let z = element as usize;
    if (1..ATOM_TYPES).contains(&z) {
        z
    } else {
        0
    }
}

pub fn charge_class(charge: i8) -> usize {
    (charge.clamp(-2, 2) + 2) as usize
}

fn edge_kind_index(order: Option<BondOrder>) -> usize {
    match order {
        Some(BondOrder::Single) => 0,
        Some(BondOrder::Double) => 1,
        Some(BondOrder::Triple) => 2,
        Some(BondOrder::Aromatic) => 3,
        None => 4,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeFeature {
    pub kind: usize,
    /// `(atom type row, charge class)`; `None` for supernodes and masked atoms.
    pub atom: Option<(usize, usize)>,
}

/// Encoder-ready features and adjacency for one graph or a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderInput {
    pub nodes: Vec<NodeFeature>,
    /// `(neighbour, edge kind)` in ascending neighbour order.
    pub adjacency: Vec<Vec<(usize, usize)>>,
    /// Start offset of each graph; a trailing entry holds the node total.
    pub offsets: Vec<usize>,
}

impl EncoderInput {
    /// Features for `hier`; atoms listed in `masked` keep only the mask
    /// node-kind embedding.
    pub fn from_hier(hier: &HierGraph, masked: &[usize]) -> Self {
        let mol = hier.base();
        let nodes = hier
            .nodes()
            .iter()
            .map(|node| match node.kind {
                NodeKind::Atom if masked.contains(&node.reference) => NodeFeature {
                    kind: KIND_MASK,
                    atom: None,
                },
                NodeKind::Atom => {
                    let atom = mol.atom(node.reference);
                    NodeFeature {
                        kind: KIND_ATOM,
                        atom: Some((atom_type_index(atom.element), charge_class(atom.formal_charge))),
                    }
                }
                NodeKind::MotifSuper => NodeFeature {
                    kind: KIND_MOTIF,
                    atom: None,
                },
                NodeKind::GraphSuper => NodeFeature {
                    kind: KIND_GRAPH,
                    atom: None,
                },
            })
            .collect::<Vec<_>>();
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for e in hier.edges() {
            let kind = match e.kind {
                EdgeKind::Chemical => edge_kind_index(e.bond.map(|b| mol.bonds()[b].order)),
                EdgeKind::Super => edge_kind_index(None),
            };
            adjacency[e.a].push((e.b, kind));
            adjacency[e.b].push((e.a, kind));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let total = nodes.len();
        EncoderInput {
            nodes,
            adjacency,
            offsets: vec![0, total],
        }
    }

    /// Features for the plain molecular graph, without supernodes.
    pub fn from_molecule(mol: &Molecule) -> Self {
        let nodes = mol
            .atoms()
            .iter()
            .map(|a| NodeFeature {
                kind: KIND_ATOM,
                atom: Some((atom_type_index(a.element), charge_class(a.formal_charge))),
            })
            .collect::<Vec<_>>();
        let adjacency = (0..mol.atom_count())
            .map(|i| {
                mol.neighbors(i)
                    .iter()
                    .map(|&(v, b)| (v, edge_kind_index(Some(mol.bonds()[b].order))))
                    .collect()
            })
            .collect();
        let total = nodes.len();
        EncoderInput {
            nodes,
            adjacency,
            offsets: vec![0, total],
        }
    }

    /// Concatenates inputs into one block-diagonal batch.
    pub fn batch(inputs: &[EncoderInput]) -> Self {
        let mut out = EncoderInput {
            nodes: Vec::new(),
            adjacency: Vec::new(),
            offsets: vec![0],
        };
        for input in inputs {
            let base = out.nodes.len();
            out.nodes.extend_from_slice(&input.nodes);
            out.adjacency.extend(
                input
                    .adjacency
                    .iter()
                    .map(|l| l.iter().map(|&(v, k)| (v + base, k)).collect::<Vec<_>>()),
            );
            for &o in &input.offsets[1..] {
                out.offsets.push(base + o);
            }
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn graph_count(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// Node embeddings together with the layer that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeEmbeddings {
    pub matrix: Array2<f64>,
    pub layer: usize,
}

/// Layer-0 features: atom type + charge class + node kind for atoms, node
/// kind alone for supernodes and masked atoms.
pub fn embed_features(input: &EncoderInput, params: &EncoderParams) -> NodeEmbeddings {
    let mut h = Array2::zeros((input.node_count(), params.hidden()));
    for (u, node) in input.nodes.iter().enumerate() {
        let mut row = h.row_mut(u);
        row.assign(&params.node_kind.row(node.kind));
        if let Some((t, c)) = node.atom {
            row += &params.atom_type.row(t);
            row += &params.charge.row(c);
        }
    }
    NodeEmbeddings { matrix: h, layer: 0 }
}

struct LayerCache {
    input: Array2<f64>,
    aggregated: Array2<f64>,
    pre: Array2<f64>,
    hidden: Array2<f64>,
}

/// Intermediate values kept for the reverse pass.
pub struct ForwardCache {
    layers: Vec<LayerCache>,
}

fn aggregate(input: &EncoderInput, h: &Array2<f64>, eps: f64, edge: &Array2<f64>) -> Array2<f64> {
    let mut agg = h * (1.0 + eps);
    for (u, neighbours) in input.adjacency.iter().enumerate() {
        let mut row = agg.row_mut(u);
        for &(v, kind) in neighbours {
            row += &h.row(v);
            row += &edge.row(kind);
        }
    }
    agg
}

/// Runs all layers and keeps what the reverse pass needs.
pub fn gin_forward_cached(input: &EncoderInput, params: &EncoderParams) -> (NodeEmbeddings, ForwardCache) {
    let mut h = embed_features(input, params).matrix;
    let mut layers = Vec::with_capacity(params.layers());
    for l in 0..params.layers() {
        let aggregated = aggregate(input, &h, params.eps[[0, l]], &params.edge[l]);
        let pre = aggregated.dot(&params.w1[l]) + &params.b1[l];
        let hidden = pre.mapv(|x| x.max(0.0));
        let out = hidden.dot(&params.w2[l]) + &params.b2[l];
        layers.push(LayerCache {
            input: std::mem::replace(&mut h, out),
            aggregated,
            pre,
            hidden,
        });
    }
    (
        NodeEmbeddings {
            matrix: h,
            layer: params.layers(),
        },
        ForwardCache { layers },
    )
}

pub fn gin_forward(input: &EncoderInput, params: &EncoderParams) -> NodeEmbeddings {
    gin_forward_cached(input, params).0
}

/// Gradients of a scalar with respect to every parameter, given the
/// gradient `d_out` of that scalar with respect to the final embeddings.
pub fn gin_backward(
    input: &EncoderInput,
    params: &EncoderParams,
    cache: &ForwardCache,
    d_out: &Array2<f64>,
) -> EncoderParams {
    let mut grads = params.zeros_like();
    let mut d_h = d_out.clone();
    for l in (0..params.layers()).rev() {
        let c = &cache.layers[l];
        grads.w2[l] = c.hidden.t().dot(&d_h);
        grads.b2[l] = d_h.sum_axis(Axis(0)).insert_axis(Axis(0));
        let mut d_pre = d_h.dot(&params.w2[l].t());
        ndarray::Zip::from(&mut d_pre)
            .and(&c.pre)
            .for_each(|d, &p| {
                if p <= 0.0 {
                    *d = 0.0
                }
            });
        grads.w1[l] = c.aggregated.t().dot(&d_pre);
        grads.b1[l] = d_pre.sum_axis(Axis(0)).insert_axis(Axis(0));
        let d_agg = d_pre.dot(&params.w1[l].t());

        let eps = params.eps[[0, l]];
        grads.eps[[0, l]] = (&d_agg * &c.input).sum();
        let mut d_in = &d_agg * (1.0 + eps);
        let mut d_edge = Array2::zeros(params.edge[l].dim());
        for (u, neighbours) in input.adjacency.iter().enumerate() {
            let g = d_agg.row(u);
            for &(v, kind) in neighbours {
                let mut r = d_in.row_mut(v);
                r += &g;
                let mut e = d_edge.row_mut(kind);
                e += &g;
            }
        }
        grads.edge[l] = d_edge;
        d_h = d_in;
    }
    for (u, node) in input.nodes.iter().enumerate() {
        let g = d_h.row(u);
        let mut k = grads.node_kind.row_mut(node.kind);
        k += &g;
        if let Some((t, c)) = node.atom {
            let mut r = grads.atom_type.row_mut(t);
            r += &g;
            let mut r = grads.charge.row_mut(c);
            r += &g;
        }
    }
    grads
}

/// Mean of the selected rows.
pub fn readout(embeddings: &Array2<f64>, subset: &[usize]) -> Result<Array1<f64>, EncoderError> {
    if subset.is_empty() {
        return Err(EncoderError::EmptySubset);
    }
    let mut sum = Array1::zeros(embeddings.ncols());
    for &i in subset {
        if i >= embeddings.nrows() {
            return Err(EncoderError::NodeOutOfRange {
                node: i,
                nodes: embeddings.nrows(),
            });
        }
        sum += &embeddings.row(i);
    }
    Ok(sum / subset.len() as f64)
}
