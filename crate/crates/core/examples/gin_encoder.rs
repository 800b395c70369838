//! Run the graph encoder and pool node embeddings.

use molhier::brics::fragment;
use molhier::chem::parse_smiles;
use molhier::encoder::{gin_forward, readout, EncoderInput, EncoderParams};
use molhier::hier::build_hier;

fn main() {
    let mol = parse_smiles("c1ccccc1C(=O)O").unwrap();
    let hier = build_hier(&mol, &fragment(&mol)).unwrap();
    let params = EncoderParams::init(32, 5, 0);

    let plain = gin_forward(&EncoderInput::from_molecule(&mol), &params);
    let atoms: Vec<usize> = (0..mol.atom_count()).collect();
    let g = readout(&plain.matrix, &atoms).unwrap();
    println!("plain graph: {} x {}, readout norm {:.4}", plain.matrix.nrows(), plain.matrix.ncols(), g.dot(&g).sqrt());

    let h = gin_forward(&EncoderInput::from_hier(&hier, &[]), &params);
    let graph_node = hier.node_count() - 1;
    let row = h.matrix.row(graph_node);
    println!("hierarchy: {} nodes, graph supernode norm {:.4}", h.matrix.nrows(), row.dot(&row).sqrt());
}
