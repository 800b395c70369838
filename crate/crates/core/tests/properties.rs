//! Structural invariants over generated molecules.

mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use molhier::brics::fragment;
use molhier::chem::parse_smiles;
use molhier::datagen::{motifhallu_items, parse_question, Answer, NEGATIVES_PER_MOLECULE};
use molhier::encoder::{gin_forward, readout, EncoderInput, EncoderParams};
use molhier::hier::{build_hier, laplacian_eigenpairs, EdgeKind, NodeKind};
use molhier::smarts::{detect_functional_groups, FunctionalGroupRegistry};
use molhier::tokens::{deserialize, hight_stream, serialize, Adapters, Token, TokenKind, TokenStream};

fn registry() -> &'static FunctionalGroupRegistry {
    static R: std::sync::OnceLock<FunctionalGroupRegistry> = std::sync::OnceLock::new();
    R.get_or_init(FunctionalGroupRegistry::builtin)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hierarchy_counts(smiles in common::smiles_strategy()) {
        let mol = parse_smiles(&smiles).unwrap();
        let motifs = fragment(&mol);
        let h = build_hier(&mol, &motifs).unwrap();
        let (n, m, k) = (mol.atom_count(), mol.bond_count(), motifs.len() - 1);
        prop_assert_eq!(h.node_count(), n + k + 1);
        let member_sum: usize = motifs.iter().filter(|mo| !mo.is_graph_motif).map(|mo| mo.atoms.len()).sum();
        prop_assert_eq!(h.edges().len(), m + member_sum + n);
        prop_assert_eq!(h.edges().iter().filter(|e| e.kind == EdgeKind::Chemical).count(), m);
        // motifs partition the atoms
        let mut seen = vec![false; n];
        for mo in motifs.iter().filter(|mo| !mo.is_graph_motif) {
            for &a in &mo.atoms {
                prop_assert!(!std::mem::replace(&mut seen[a], true));
            }
        }
        prop_assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn question_counts(smiles in common::smiles_strategy(), seed in any::<u64>()) {
        let mol = parse_smiles(&smiles).unwrap();
        let counts = detect_functional_groups(&mol, registry());
        let items = motifhallu_items("m:1", &smiles, &counts, registry(), seed, 0);
        let total = registry().group_names().len();
        prop_assert_eq!(items.len(), counts.len() + NEGATIVES_PER_MOLECULE.min(total - counts.len()));
        let mut names = HashSet::new();
        for item in &items {
            prop_assert!(names.insert(item.fg.clone()));
            prop_assert_eq!(parse_question(&item.question), Some(item.fg.as_str()));
            prop_assert_eq!(item.answer == Answer::Yes, counts.contains(&item.fg));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn group_counts_ignore_atom_order(smiles in common::smiles_strategy(), seed in any::<u64>()) {
        let mol = parse_smiles(&smiles).unwrap();
        let moved = mol.permuted(&common::permutation(mol.atom_count(), seed)).unwrap();
        prop_assert_eq!(detect_functional_groups(&mol, registry()), detect_functional_groups(&moved, registry()));
    }

    #[test]
    fn encoder_is_equivariant(smiles in common::smiles_strategy(), seed in any::<u64>()) {
        let params = EncoderParams::init(16, 3, 7);
        let mol = parse_smiles(&smiles).unwrap();
        let perm = common::permutation(mol.atom_count(), seed);
        let moved = mol.permuted(&perm).unwrap();
        let a = gin_forward(&EncoderInput::from_molecule(&mol), &params).matrix;
        let b = gin_forward(&EncoderInput::from_molecule(&moved), &params).matrix;
        for (old, &new) in perm.iter().enumerate() {
            for (x, y) in a.row(old).iter().zip(b.row(new)) {
                prop_assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0));
            }
        }
        let all: Vec<usize> = (0..mol.atom_count()).collect();
        let (ra, rb) = (readout(&a, &all).unwrap(), readout(&b, &all).unwrap());
        for (x, y) in ra.iter().zip(&rb) {
            prop_assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0));
        }
    }

    #[test]
    fn positional_encoding_is_equivariant(smiles in common::smiles_strategy(), seed in any::<u64>()) {
        let mol = parse_smiles(&smiles).unwrap();
        let n = mol.atom_count();
        let perm = common::permutation(n, seed);
        let edges: Vec<(usize, usize)> = mol.bonds().iter().map(|b| (b.a, b.b)).collect();
        let moved: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        let p = laplacian_eigenpairs(n, &edges, n).unwrap();
        let q = laplacian_eigenpairs(n, &moved, n).unwrap();
        prop_assert_eq!(p.values.len(), q.values.len());
        for (x, y) in p.values.iter().zip(&q.values) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        // simple eigenvalues fix their vectors up to sign
        for j in 0..p.values.len() {
            let isolated = p.values.iter().enumerate().all(|(i, v)| i == j || (v - p.values[j]).abs() > 1e-6);
            if !isolated {
                continue;
            }
            let dot: f64 = (0..n).map(|i| p.vectors[[i, j]] * q.vectors[[perm[i], j]]).sum();
            prop_assert!((dot.abs() - 1.0).abs() < 1e-8, "eigenvalue {} dot {}", p.values[j], dot);
        }
    }

    #[test]
    fn hierarchical_stream_layout(smiles in common::smiles_strategy()) {
        let params = EncoderParams::init(8, 2, 1);
        let mol = parse_smiles(&smiles).unwrap();
        let h = build_hier(&mol, &fragment(&mol)).unwrap();
        let s = hight_stream(&h, 0, &params, &Adapters::identity(16)).unwrap();
        let k = h.motif_count();
        prop_assert_eq!(s.len(), mol.atom_count() + k + 1);
        let kinds = s.kinds();
        let n = mol.atom_count();
        prop_assert!(kinds[..n].iter().all(|&t| t == TokenKind::Node));
        prop_assert!(kinds[n..n + k].iter().all(|&t| t == TokenKind::Motif));
        prop_assert_eq!(kinds[n + k], TokenKind::Graph);
        for (t, node) in s.tokens.iter().zip(h.nodes()) {
            prop_assert_eq!(t.src, node.reference);
            prop_assert_eq!(t.kind == TokenKind::Graph, node.kind == NodeKind::GraphSuper);
        }
    }

    #[test]
    fn serialization_is_bitwise(values in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 0..20), mol in 0usize..1000, src in 0usize..50) {
        let stream = TokenStream {
            mol,
            tokens: vec![
                Token { kind: TokenKind::Node, src, v: values.clone() },
                Token { kind: TokenKind::Graph, src: src + 1, v: values.iter().rev().copied().collect() },
            ],
        };
        let back = deserialize(&serialize(&stream)).unwrap();
        prop_assert_eq!(back.len(), 1);
        for (a, b) in stream.tokens.iter().zip(&back[0].tokens) {
            prop_assert_eq!(a.kind, b.kind);
            prop_assert_eq!(a.src, b.src);
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&a.v), bits(&b.v));
        }
    }
}
