//! Train the two-level VQ tokenizer on the bundled toy corpus and save a
//! checkpoint.
//!
//! cargo run --release --example train_tokenizer -- [steps] [checkpoint]

use std::path::PathBuf;

use molhier::brics::fragment;
use molhier::chem::{parse_smiles, read_corpus};
use molhier::hier::{build_hier, HierGraph};
use molhier::vq::{evaluate_loss, quantize_graph, train, CodebookLevel, TrainConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let steps: usize = args.next().map_or(50, |s| s.parse().expect("step count"));
    let out = args.next().map(PathBuf::from);

    let corpus: Vec<HierGraph> = read_corpus(include_str!("../data/toy_corpus.smi"))
        .iter()
        .map(|e| {
            let mol = parse_smiles(&e.smiles).unwrap();
            build_hier(&mol, &fragment(&mol)).unwrap()
        })
        .collect();
    let cfg = TrainConfig {
        steps,
        hidden: 64,
        layers: 3,
        ..TrainConfig::default()
    };
    let outcome = train(&corpus, &cfg).expect("training converges");
    for (i, t) in outcome.trace.iter().enumerate().step_by((steps / 10).max(1)) {
        println!("step {:>4}  total {:.4}  (term1 {:.4}, term2 {:.4}, term3 {:.4})", i + 1, t.total(), t.term1, t.term2, t.term3);
    }
    println!("loss under a fresh mask {:.4}", evaluate_loss(&outcome.model, &corpus, &cfg, 1).total());

    let codes = quantize_graph(&outcome.model, &corpus[0]);
    let atoms: Vec<usize> = codes.iter().filter(|c| c.level == CodebookLevel::Atom).map(|c| c.quantization.index).collect();
    let motifs: Vec<usize> = codes.iter().filter(|c| c.level == CodebookLevel::Motif).map(|c| c.quantization.index).collect();
    println!("{}: atom codes {atoms:?}, motif codes {motifs:?}", corpus[0].base().source());

    if let Some(path) = out {
        outcome.model.to_archive().save(&path).expect("writable checkpoint");
        println!("saved {}", path.display());
    }
}
