//! Build the atom/motif/graph hierarchy and its positional encodings.

use molhier::brics::fragment;
use molhier::chem::parse_smiles;
use molhier::hier::{build_hier, EdgeKind, PE_DIM};

fn main() {
    let smiles = std::env::args().nth(1).unwrap_or_else(|| "CCOC(=O)CC".to_string());
    let mol = parse_smiles(&smiles).expect("valid SMILES");
    let mut h = build_hier(&mol, &fragment(&mol)).expect("motifs cover the molecule");
    let supers = h.edges().iter().filter(|e| e.kind == EdgeKind::Super).count();
    println!(
        "{} atoms, {} motifs -> {} nodes; {} chemical + {} super edges",
        h.atom_count(),
        h.motif_count(),
        h.node_count(),
        h.edges().len() - supers,
        supers
    );
    let pe = h.compute_pe(PE_DIM).expect("eigensolver converges").clone();
    for (node, row) in h.nodes().iter().zip(pe.outer_iter()) {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:+.3}")).collect();
        println!("{:>5} {:>2} [{}]", node.kind.as_str(), node.reference, cells.join(" "));
    }
}
