//! Normalized Laplacian eigenpairs of a small graph.

use molhier::hier::{laplacian_eigenpairs, normalized_laplacian};

fn main() {
    // a hub with five leaves: positive spectrum 1, 1, 1, 1, 2
    let edges: Vec<(usize, usize)> = (1..6).map(|i| (0, i)).collect();
    let l = normalized_laplacian(6, &edges);
    let e = laplacian_eigenpairs(6, &edges, 6).expect("converges");
    for (j, val) in e.values.iter().enumerate() {
        let v = e.vectors.column(j);
        let residual = (l.dot(&v) - &v * *val).mapv(|x| x * x).sum().sqrt();
        println!("lambda = {val:.12}  residual {residual:.1e}");
    }
}
