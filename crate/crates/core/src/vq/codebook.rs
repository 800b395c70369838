use std::ops::Range;

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use rand_distr::StandardNormal;

use super::VqError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodebookLevel {
    Atom,
    Motif,
}

/// Atom-level code classes, in partition order.
pub const ATOM_CLASSES: [&str; 4] = ["carbon", "nitrogen", "oxygen", "other"];

/// Partition class of an element in the atom-level codebook.
pub fn atom_class(element: u8) -> usize {
    match element {
        6 => 0,
        7 => 1,
        8 => 2,
        _ => 3,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub embeddings: Array2<f64>,
    partition: Vec<(String, Range<usize>)>,
    level: CodebookLevel,
}

/// Nearest code for one embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantization {
    pub index: usize,
    pub distance: f64,
}

impl Codebook {
    /// Builds a codebook with one contiguous block of `sizes[i]` rows per
    /// class, rows drawn from a normal distribution scaled by `1/√hidden`.
    pub fn new(
        level: CodebookLevel,
        classes: &[(&str, usize)],
        hidden: usize,
        rng: &mut impl Rng,
    ) -> Self {
        let mut partition = Vec::new();
        let mut start = 0;
        for &(name, size) in classes {
            partition.push((name.to_string(), start..start + size));
            start += size;
        }
        let scale = 1.0 / (hidden as f64).sqrt();
        let embeddings =
            Array2::from_shape_simple_fn((start, hidden), || rng.sample::<f64, _>(StandardNormal) * scale);
        Codebook {
            embeddings,
            partition,
            level,
        }
    }

    /// Four equal classes: carbon, nitrogen, oxygen, other.
    pub fn atom(per_class: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let classes: Vec<(&str, usize)> = ATOM_CLASSES.iter().map(|&c| (c, per_class)).collect();
        Self::new(CodebookLevel::Atom, &classes, hidden, rng)
    }

    pub fn motif(size: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        Self::new(CodebookLevel::Motif, &[("motif", size)], hidden, rng)
    }

    /// Rebuilds a codebook from stored rows and `(start, end)` class ranges.
    pub fn from_parts(
        level: CodebookLevel,
        embeddings: Array2<f64>,
        partition: Vec<(String, Range<usize>)>,
    ) -> Result<Self, VqError> {
        let mut next = 0;
        for (_, r) in &partition {
            if r.start != next || r.end < r.start {
                return Err(VqError::BadPartition);
            }
            next = r.end;
        }
        if next != embeddings.nrows() {
            return Err(VqError::BadPartition);
        }
        Ok(Codebook {
            embeddings,
            partition,
            level,
        })
    }

    pub fn level(&self) -> CodebookLevel {
        self.level
    }

    pub fn size(&self) -> usize {
        self.embeddings.nrows()
    }

    pub fn partition(&self) -> &[(String, Range<usize>)] {
        &self.partition
    }

    pub fn class_range(&self, class: usize) -> Result<Range<usize>, VqError> {
        self.partition
            .get(class)
            .map(|(_, r)| r.clone())
            .ok_or(VqError::UnknownClass(class))
    }

    /// Nearest row of `class` to `h` in Euclidean distance; ties go to the
    /// lowest index.
    pub fn quantize(&self, h: ArrayView1<f64>, class: usize) -> Result<Quantization, VqError> {
        let range = self.class_range(class)?;
        if range.is_empty() {
            return Err(VqError::UnknownClass(class));
        }
        let mut best = Quantization {
            index: range.start,
            distance: f64::INFINITY,
        };
        for i in range {
            let d2: f64 = self
                .embeddings
                .row(i)
                .iter()
                .zip(h.iter())
                .map(|(e, x)| (x - e) * (x - e))
                .sum();
            if d2 < best.distance {
                best = Quantization {
                    index: i,
                    distance: d2,
                };
            }
        }
        best.distance = best.distance.sqrt();
        Ok(best)
    }

    /// How often each code appears in `indices`.
    pub fn usage(&self, indices: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.size()];
        for &i in indices {
            counts[i] += 1;
        }
        counts
    }
}
