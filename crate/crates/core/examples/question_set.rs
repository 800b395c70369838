//! Generate yes/no functional-group questions and score a naive answerer.

use molhier::chem::read_corpus;
use molhier::datagen::{gen_motifhallu, Answer};
use molhier::eval::{score, Prediction};
use molhier::smarts::FunctionalGroupRegistry;

fn main() {
    let corpus = read_corpus("CC(=O)O\nc1ccccc1N\nCCS\n");
    let registry = FunctionalGroupRegistry::builtin();
    let items = gen_motifhallu("demo.smi", &corpus, &registry, 7).unwrap();
    for it in items.iter().take(8) {
        println!("{}  {:<24} {:?}", it.id, it.question, it.answer);
    }

    // a model that always says yes
    let yes: Vec<Prediction> = items
        .iter()
        .map(|it| Prediction {
            id: it.id.clone(),
            answer: Answer::Yes,
            score: None,
        })
        .collect();
    println!("{}", score(&yes, &items).unwrap());
}
