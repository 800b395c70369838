//! Count functional groups with the built-in registry.
//!
//! cargo run --example functional_groups -- 'CC(=O)OC(CC(=O)[O-])C[N+](C)(C)C'

use molhier::chem::parse_smiles;
use molhier::smarts::{detect_functional_groups, find_matches, parse_smarts, FunctionalGroupRegistry};

fn main() {
    let smiles = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "CC(=O)OC(CC(=O)[O-])C[N+](C)(C)C".to_string());
    let mol = parse_smiles(&smiles).expect("valid SMILES");
    let registry = FunctionalGroupRegistry::builtin();
    let counts = detect_functional_groups(&mol, &registry);
    if counts.is_empty() {
        println!("no functional groups");
    }
    for (name, n) in counts.iter() {
        println!("{name}: {n}");
    }

    // patterns can also be matched one at a time
    let acid = parse_smarts("C(=O)[O;H1,-1]").unwrap();
    println!("acid carbon/oxygen sets: {:?}", find_matches(&mol, &acid));
}
