use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::archive::{Archive, ArchiveError};

/// Rows of the atom-type table: index 0 is the unknown-element bucket,
/// index `z` is element `z`.
pub const ATOM_TYPES: usize = 119;
/// Formal-charge classes: ≤ −2, −1, 0, +1, ≥ +2.
pub const CHARGE_CLASSES: usize = 5;
/// Node kinds: atom, motif supernode, graph supernode, masked atom.
pub const NODE_KINDS: usize = 4;
/// Edge kinds: single, double, triple, aromatic, super.
pub const EDGE_KINDS: usize = 5;

pub const DEFAULT_HIDDEN: usize = 300;
pub const DEFAULT_LAYERS: usize = 5;

/// Parameters of the GIN encoder. The same type holds gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub atom_type: Array2<f64>,
    pub charge: Array2<f64>,
    pub node_kind: Array2<f64>,
    /// Per-layer edge-kind embeddings, `EDGE_KINDS × hidden`.
    pub edge: Vec<Array2<f64>>,
    /// `1 × layers`
    pub eps: Array2<f64>,
    pub w1: Vec<Array2<f64>>,
    /// `1 × hidden` each
    pub b1: Vec<Array2<f64>>,
    pub w2: Vec<Array2<f64>>,
    pub b2: Vec<Array2<f64>>,
}

impl EncoderParams {
    pub fn zeros(hidden: usize, layers: usize) -> Self {
        let sq = || Array2::zeros((hidden, hidden));
        let row = || Array2::zeros((1, hidden));
        EncoderParams {
            atom_type: Array2::zeros((ATOM_TYPES, hidden)),
            charge: Array2::zeros((CHARGE_CLASSES, hidden)),
            node_kind: Array2::zeros((NODE_KINDS, hidden)),
            edge: (0..layers).map(|_| Array2::zeros((EDGE_KINDS, hidden))).collect(),
            eps: Array2::zeros((1, layers)),
            w1: (0..layers).map(|_| sq()).collect(),
            b1: (0..layers).map(|_| row()).collect(),
            w2: (0..layers).map(|_| sq()).collect(),
            b2: (0..layers).map(|_| row()).collect(),
        }
    }

    /// Uniform in `[-1/√hidden, 1/√hidden]` from a seeded generator; every
    /// ε starts at zero.
    pub fn init(hidden: usize, layers: usize, seed: u64) -> Self {
        let mut p = Self::zeros(hidden, layers);
        let bound = 1.0 / (hidden as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (name, t) in p.tensors_mut() {
            if name == "encoder.eps" {
                continue;
            }
            t.mapv_inplace(|_| rng.gen_range(-bound..=bound));
        }
        p
    }

    pub fn hidden(&self) -> usize {
        self.atom_type.ncols()
    }

    pub fn layers(&self) -> usize {
        self.w1.len()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.hidden(), self.layers())
    }

    /// Every tensor with a stable name, in a fixed order.
    pub fn tensors(&self) -> Vec<(String, &Array2<f64>)> {
        let mut out: Vec<(String, &Array2<f64>)> = vec![
            ("encoder.atom_type".into(), &self.atom_type),
            ("encoder.charge".into(), &self.charge),
            ("encoder.node_kind".into(), &self.node_kind),
            ("encoder.eps".into(), &self.eps),
        ];
        for l in 0..self.layers() {
            out.push((format!("encoder.layer{l}.edge"), &self.edge[l]));
            out.push((format!("encoder.layer{l}.w1"), &self.w1[l]));
            out.push((format!("encoder.layer{l}.b1"), &self.b1[l]));
            out.push((format!("encoder.layer{l}.w2"), &self.w2[l]));
            out.push((format!("encoder.layer{l}.b2"), &self.b2[l]));
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, &mut Array2<f64>)> {
        let mut out: Vec<(String, &mut Array2<f64>)> = vec![
            ("encoder.atom_type".into(), &mut self.atom_type),
            ("encoder.charge".into(), &mut self.charge),
            ("encoder.node_kind".into(), &mut self.node_kind),
            ("encoder.eps".into(), &mut self.eps),
        ];
        let layers = self
            .edge
            .iter_mut()
            .zip(self.w1.iter_mut())
            .zip(self.b1.iter_mut())
            .zip(self.w2.iter_mut())
            .zip(self.b2.iter_mut());
        for (l, ((((e, w1), b1), w2), b2)) in layers.enumerate() {
            out.push((format!("encoder.layer{l}.edge"), e));
            out.push((format!("encoder.layer{l}.w1"), w1));
            out.push((format!("encoder.layer{l}.b1"), b1));
            out.push((format!("encoder.layer{l}.w2"), w2));
            out.push((format!("encoder.layer{l}.b2"), b2));
        }
        out
    }

    pub fn to_archive(&self) -> Archive {
        let mut a = Archive::new();
        for (name, t) in self.tensors() {
            a.push(name, t.clone()).expect("tensor names are unique");
        }
        a
    }

    /// Reads encoder tensors from an archive; the widths are taken from the
    /// atom-type table and the ε row.
    pub fn from_archive(a: &Archive) -> Result<Self, ArchiveError> {
        let atom = a
            .get("encoder.atom_type")
            .ok_or_else(|| ArchiveError::Missing("encoder.atom_type".into()))?;
        let eps = a
            .get("encoder.eps")
            .ok_or_else(|| ArchiveError::Missing("encoder.eps".into()))?;
        let mut p = Self::zeros(atom.ncols(), eps.ncols());
        for (name, t) in p.tensors_mut() {
            *t = a.take(&name, t.dim())?;
        }
        Ok(p)
    }

    /// `self += scale * other`, tensor by tensor.
    pub fn add_scaled(&mut self, other: &EncoderParams, scale: f64) {
        for ((_, t), (_, o)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            t.scaled_add(scale, o);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_init_range() {
        let p = EncoderParams::init(300, 5, 7);
        assert_eq!(p.hidden(), 300);
        assert_eq!(p.layers(), 5);
        assert_eq!(p.w1[4].dim(), (300, 300));
        assert_eq!(p.edge[0].dim(), (EDGE_KINDS, 300));
        assert!(p.eps.iter().all(|&e| e == 0.0));
        let bound = 1.0 / 300f64.sqrt();
        assert!(p.w2[2].iter().all(|x| x.abs() <= bound));
        assert_eq!(p, EncoderParams::init(300, 5, 7));
        assert_ne!(p, EncoderParams::init(300, 5, 8));
    }

    #[test]
    fn archive_round_trip_is_exact() {
        let p = EncoderParams::init(16, 3, 1);
        let bytes = p.to_archive().to_bytes();
        let q = EncoderParams::from_archive(&Archive::from_bytes(&bytes).unwrap()).unwrap();
        assert_eq!(p, q);
        assert_eq!(q.to_archive().to_bytes(), bytes);
    }
}
