//! Node-centric and hierarchical token streams, serialized as JSON Lines.

use molhier::brics::fragment;
use molhier::chem::parse_smiles;
use molhier::encoder::EncoderParams;
use molhier::hier::{build_hier, PE_DIM};
use molhier::tokens::{deserialize, hight_stream, node_centric_stream, serialize, Adapters};

fn main() {
    let mol = parse_smiles("CCO").unwrap();
    let hier = build_hier(&mol, &fragment(&mol)).unwrap();
    let params = EncoderParams::init(16, 2, 0);
    let adapters = Adapters::init(16 + PE_DIM, 4, 0);

    let node = node_centric_stream(&mol, 0, &params, &adapters.node).unwrap();
    let hight = hight_stream(&hier, 0, &params, &adapters).unwrap();
    println!("node-centric kinds: {:?}", node.kinds());
    println!("hierarchical kinds: {:?}", hight.kinds());

    let text = serialize(&hight);
    print!("{text}");
    assert_eq!(deserialize(&text).unwrap()[0], hight);
}
