//! End-to-end runs of the command line.

mod common;

use std::fs;

use common::run_cli;

fn corpus(dir: &tempfile::TempDir, text: &str) -> String {
    let p = dir.path().join("in.smi");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn hierarchical_tokenization_of_ethanol() {
    let dir = tempfile::tempdir().unwrap();
    let input = corpus(&dir, "CCO\n");
    let (code, out, _) = run_cli(&["tokenize", &input, "--mode", "hight", "--set", "hidden=16"]);
    assert_eq!(code, 0);
    let streams = molhier::tokens::deserialize(&out).unwrap();
    assert_eq!(streams[0].len(), 5);
    let (_, node, _) = run_cli(&["tokenize", &input, "--mode", "node", "--set", "hidden=16"]);
    assert_eq!(node.lines().count(), 3);
}

#[test]
fn detects_carboxylic_acid() {
    let dir = tempfile::tempdir().unwrap();
    let input = corpus(&dir, "CC(=O)OC(CC(=O)[O-])C[N+](C)(C)C\n");
    let (code, out, _) = run_cli(&["detect-fg", &input]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
    assert_eq!(v["groups"]["carboxylic acids"], 1);
}

#[test]
fn all_yes_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let input = corpus(&dir, "CCO\nc1ccccc1C(=O)O\n");
    let gold = dir.path().join("gold.jsonl");
    let (code, _, _) = run_cli(&["gen-motifhallu", &input, "--out", gold.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(dir.path().join("gold.jsonl.config").exists());
    let items = molhier::eval::parse_gold(&fs::read_to_string(&gold).unwrap()).unwrap();
    let preds: String = items
        .iter()
        .map(|i| format!("{{\"id\":{},\"answer\":\"Yes\"}}\n", serde_json::to_string(&i.id).unwrap()))
        .collect();
    let pred_path = dir.path().join("pred.jsonl");
    fs::write(&pred_path, preds).unwrap();
    let (code, out, _) = run_cli(&["eval-hallu", "--gold", gold.to_str().unwrap(), "--predictions", pred_path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let report: molhier::eval::MetricsReport = serde_json::from_str(out.lines().last().unwrap()).unwrap();
    assert_eq!(report.yes_ratio, 100.0);
    assert_eq!(report.f1_neg, 0.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = corpus(&dir, "CCO\nC1CC\n");
    let (code, _, err) = run_cli(&["parse", &bad]);
    assert_eq!(code, 1);
    assert!(err.contains("in.smi:2"), "{err}");
    let good = corpus(&dir, "CCO\n");
    let (code, _, err) = run_cli(&["train-tokenizer", &good]);
    assert_eq!(code, 1, "{err}");
    let (code, _, _) = run_cli(&["train-tokenizer", &good, "--out", dir.path().join("m.ckpt").to_str().unwrap(), "--set", "step_size=nan"]);
    assert_eq!(code, 1);
    let (code, _, err) = run_cli(&[
        "train-tokenizer",
        &good,
        "--out",
        dir.path().join("m.ckpt").to_str().unwrap(),
        "--set",
        "step_size=1e300",
        "--set",
        "hidden=8",
        "--set",
        "layers=1",
        "--steps",
        "20",
    ]);
    assert_eq!(code, 2, "{err}");
    assert!(dir.path().join("m.ckpt.loss.csv").exists());
}

#[test]
fn trained_checkpoint_feeds_tokenizer() {
    let dir = tempfile::tempdir().unwrap();
    let input = corpus(&dir, "CCO\nCC(=O)Nc1ccccc1\n");
    let ckpt = dir.path().join("tok.ckpt");
    let args = ["--set", "hidden=8", "--set", "layers=2", "--set", "atom_codes_per_class=4", "--set", "motif_codes=4"];
    let mut train = vec!["train-tokenizer", &input, "--steps", "3", "--out", ckpt.to_str().unwrap()];
    train.extend(args);
    let (code, _, err) = run_cli(&train);
    assert_eq!(code, 0, "{err}");
    let trace = fs::read_to_string(dir.path().join("tok.ckpt.loss.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("step,term1,term2,term3,total"));
    assert_eq!(trace.lines().count(), 4);
    let (code, out, err) = run_cli(&["tokenize", &input, "--checkpoint", ckpt.to_str().unwrap(), "--adapter-dim", "4"]);
    assert_eq!(code, 0, "{err}");
    let streams = molhier::tokens::deserialize(&out).unwrap();
    assert_eq!(streams.len(), 2);
    assert!(streams.iter().flat_map(|s| &s.tokens).all(|t| t.v.len() == 4));
}
