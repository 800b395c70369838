//! Prefix captions with functional-group sentences.

use molhier::chem::read_corpus;
use molhier::datagen::{augment_corpus, DEFAULT_K_NEG};
use molhier::smarts::FunctionalGroupRegistry;

fn main() {
    let corpus = read_corpus(
        "CC(=O)OC(CC(=O)[O-])C[N+](C)(C)C\tThis molecule is an O-acylcarnitine.\n\
         CCCCCC\tThis molecule is an alkane.\n",
    );
    let registry = FunctionalGroupRegistry::builtin();
    for r in augment_corpus("demo.smi", &corpus, &registry, DEFAULT_K_NEG, 0).unwrap() {
        println!("{}\n  {}\n", r.smiles, r.augmented);
    }
}
