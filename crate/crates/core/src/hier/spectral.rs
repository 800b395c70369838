//! Normalized-Laplacian spectra and positional encodings.

use std::cmp::Ordering;

use ndarray::{Array1, Array2};

use super::HierGraph;

/// Eigenvalues at or below this are treated as zero.
pub const ZERO_EIGENVALUE: f64 = 1e-9;
/// Eigenvalues closer than this share a multiplicity block.
const DEGENERATE: f64 = 1e-8;
/// Largest acceptable ‖Lv − λv‖₂ for a returned pair.
const MAX_RESIDUAL: f64 = 1e-8;
const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:.3e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },
    #[error("eigenpair {index} (λ = {value:.6}) has residual {residual:.3e}")]
    Residual {
        index: usize,
        value: f64,
        residual: f64,
    },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}

/// Eigenvalues in ascending order with eigenvectors as matching columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigen(matrix: &Array2<f64>) -> Result<Eigenpairs, SpectralError> {
    let (rows, cols) = matrix.dim();
    if rows != cols {
        return Err(SpectralError::NotSquare { rows, cols });
    }
    let n = rows;
    let mut a = matrix.clone();
    let mut v = Array2::<f64>::eye(n);
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);

    let off = |a: &Array2<f64>| {
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += a[[i, j]] * a[[i, j]];
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off(&a) <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[[p, q]];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[[k, p]], a[[k, q]]);
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[[p, k]], a[[q, k]]);
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                a[[p, q]] = 0.0;
                a[[q, p]] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged && off(&a) > 1e-15 * scale {
        return Err(SpectralError::NoConvergence {
            sweeps: MAX_SWEEPS,
            off_diagonal: off(&a),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[i, i]].total_cmp(&a[[j, j]]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[[i, i]]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        vectors.column_mut(col).assign(&v.column(i));
    }
    Ok(Eigenpairs { values, vectors })
}

/// `I − D^{-1/2} A D^{-1/2}` for an unweighted undirected graph. An
/// isolated node gets a diagonal entry of 1.
pub fn normalized_laplacian(n: usize, edges: &[(usize, usize)]) -> Array2<f64> {
    let mut adj = Array2::<f64>::zeros((n, n));
    for &(a, b) in edges {
        adj[[a, b]] += 1.0;
        adj[[b, a]] += 1.0;
    }
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| {
            let d = adj.row(i).sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut l = Array2::<f64>::eye(n);
    for i in 0..n {
        for j in 0..n {
            if adj[[i, j]] != 0.0 {
                l[[i, j]] -= adj[[i, j]] * inv_sqrt[i] * inv_sqrt[j];
            }
        }
    }
    l
}

fn fix_sign(v: &mut Array1<f64>) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(lead) = v.iter().position(|x| x.abs() >= max - 1e-12) {
        if v[lead] < 0.0 {
            v.mapv_inplace(|x| -x);
        }
    }
}

fn lexicographic(a: &Array1<f64>, b: &Array1<f64>) -> Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// The `dim` smallest strictly positive eigenpairs of the normalized
/// Laplacian, with deterministic signs and ordering.
pub fn laplacian_eigenpairs(
    n: usize,
    edges: &[(usize, usize)],
    dim: usize,
) -> Result<Eigenpairs, SpectralError> {
    let l = normalized_laplacian(n, edges);
    let full = symmetric_eigen(&l)?;
    let mut pairs: Vec<(f64, Array1<f64>)> = full
        .values
        .iter()
        .enumerate()
        .filter(|(_, &val)| val > ZERO_EIGENVALUE)
        .map(|(i, &val)| {
            let mut vec = full.vectors.column(i).to_owned();
            fix_sign(&mut vec);
            (val, vec)
        })
        .collect();

    // order within each multiplicity block by the sign-fixed vectors
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[end].0 - pairs[end - 1].0 <= DEGENERATE {
            end += 1;
        }
        pairs[start..end].sort_by(|x, y| lexicographic(&x.1, &y.1));
        start = end;
    }
    pairs.truncate(dim);

    let mut vectors = Array2::zeros((n, pairs.len()));
    for (col, (val, vec)) in pairs.iter().enumerate() {
        let residual = (l.dot(vec) - vec * *val).mapv(|x| x * x).sum().sqrt();
        if residual > MAX_RESIDUAL {
            return Err(SpectralError::Residual {
                index: col,
                value: *val,
                residual,
            });
        }
        vectors.column_mut(col).assign(vec);
    }
    Ok(Eigenpairs {
        values: pairs.iter().map(|p| p.0).collect(),
        vectors,
    })
}

/// Per-node positional encodings of width `dim`, zero-padded when the graph
/// has fewer than `dim` positive eigenvalues.
pub fn laplacian_pe(hier: &HierGraph, dim: usize) -> Result<Array2<f64>, SpectralError> {
    let n = hier.node_count();
    let pairs = laplacian_eigenpairs(n, &hier.edge_pairs(), dim)?;
    let mut pe = Array2::zeros((n, dim));
    pe.slice_mut(ndarray::s![.., ..pairs.values.len()])
        .assign(&pairs.vectors);
    Ok(pe)
}
