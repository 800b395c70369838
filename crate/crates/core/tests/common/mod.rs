//! Shared helpers for integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

pub mod brute;
pub mod grad;

use proptest::prelude::*;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
pub struct FixtureAtom {
    pub z: u8,
    pub charge: i8,
    pub aromatic: bool,
    pub h: u8,
    pub ring: bool,
}

#[derive(Debug, Deserialize)]
pub struct FixtureBond {
    pub a: usize,
    pub b: usize,
    pub order: String,
    pub ring: bool,
}

/// One molecule with reference results from an independent toolkit.
#[derive(Debug, Deserialize)]
pub struct Fixture {
    pub smiles: String,
    pub atoms: Vec<FixtureAtom>,
    pub bonds: Vec<FixtureBond>,
    pub fg: BTreeMap<String, usize>,
    pub brics_bonds: Vec<[usize; 2]>,
    pub brics_frags: Vec<Vec<usize>>,
}

pub fn fixtures() -> Vec<Fixture> {
    include_str!("../fixtures/rdkit_oracle.jsonl")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).expect("fixture line parses"))
        .collect()
}

/// Acyclic and monocyclic molecules built from a small fragment alphabet.
/// Every output parses.
pub fn smiles_strategy() -> impl Strategy<Value = String> {
    let atom = prop::sample::select(vec!["C", "N", "O", "S", "Cl", "F", "[NH3+]", "[O-]", "c1ccccc1"]);
    let bond = prop::sample::select(vec!["", "", "", "="]);
    (
        prop::collection::vec((atom, bond, any::<bool>()), 1..10),
        any::<bool>(),
    )
        .prop_map(|(parts, ring)| {
            let mut s = String::from("C");
            let mut opened = false;
            if ring {
                s.push('9');
                opened = true;
            }
            for (i, (atom, bond, branch)) in parts.iter().enumerate() {
                let terminal = matches!(*atom, "Cl" | "F" | "[NH3+]" | "[O-]");
                let bond = if terminal || *atom == "c1ccccc1" { "" } else { bond };
                if *branch || terminal {
                    s.push('(');
                    s.push_str(atom);
                    s.push(')');
                    s.push('C');
                } else {
                    s.push_str(bond);
                    s.push_str(atom);
                    if *atom == "O" || *atom == "S" {
                        s.push('C');
                    }
                }
                if opened && i >= 1 && i + 1 == parts.len() {
                    s.push('C');
                    s.push('9');
                    opened = false;
                }
            }
            if opened {
                s.push_str("CC9");
            }
            s
        })
}

/// `count` SMILES: the reference corpus first, then generated molecules from
/// a fixed-seed runner.
pub fn random_smiles(count: usize) -> Vec<String> {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut out: Vec<String> = fixtures().into_iter().map(|f| f.smiles).take(count).collect();
    let mut runner = TestRunner::deterministic();
    let strategy = smiles_strategy();
    while out.len() < count {
        out.push(strategy.new_tree(&mut runner).expect("strategy yields").current());
    }
    out
}

/// A permutation of `0..n` drawn from `seed`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
    p
}

/// Runs the command line in-process; returns exit code, stdout and stderr.
pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("molhier").chain(args.iter().copied());
    let code = molhier::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}
