//! Parse a SMILES string and print its atoms and bonds.
//!
//! cargo run --example parse_smiles -- 'c1ccccc1C(=O)O'

use molhier::chem::{elements, parse_smiles};

fn main() {
    let smiles = std::env::args().nth(1).unwrap_or_else(|| "CC(=O)Nc1ccc(O)cc1".to_string());
    let mol = match parse_smiles(&smiles) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{smiles}: {e}");
            std::process::exit(1);
        }
    };
    println!("{} atoms, {} bonds", mol.atom_count(), mol.bond_count());
    for a in mol.atoms() {
        println!(
            "  {:>2} {:<2} charge {:+} H{} {}{}",
            a.index,
            elements::symbol(a.element).unwrap_or("*"),
            a.formal_charge,
            mol.hydrogen_count(a.index),
            if a.aromatic { "aromatic " } else { "" },
            if a.in_ring { "ring" } else { "" },
        );
    }
    for b in mol.bonds() {
        println!("  {}-{} {}{}", b.a, b.b, b.order.as_str(), if b.in_ring { " ring" } else { "" });
    }
}
