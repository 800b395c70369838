//! Split a molecule at its BRICS bonds.

use molhier::brics::{brics_cleavable_bonds, fragment};
use molhier::chem::parse_smiles;

fn main() {
    let smiles = std::env::args().nth(1).unwrap_or_else(|| "CCOC(=O)c1ccc(N)cc1".to_string());
    let mol = parse_smiles(&smiles).expect("valid SMILES");
    for b in brics_cleavable_bonds(&mol) {
        println!("cut bond {} ({}-{}) environments {:?}", b.bond, b.atoms.0, b.atoms.1, b.labels);
    }
    for m in fragment(&mol) {
        let tag = if m.is_graph_motif { "graph" } else { "motif" };
        println!("{tag} {}: {:?}", m.id, m.atoms);
    }
}
