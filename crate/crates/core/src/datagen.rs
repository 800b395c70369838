//! Functional-group question sets and caption augmentation.
//!
//! Each molecule gets its own generator seeded with `seed ^ ordinal`, so the
//! output does not depend on how molecules are scheduled across threads.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chem::{parse_smiles, CorpusEntry, SmilesError};
use crate::smarts::{detect_functional_groups, FunctionalGroupRegistry, GroupCounts};

/// Negative questions per molecule.
pub const NEGATIVES_PER_MOLECULE: usize = 6;
pub const DEFAULT_K_NEG: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    Yes,
    No,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaItem {
    pub id: String,
    pub smiles: String,
    pub fg: String,
    pub question: String,
    pub answer: Answer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionRecord {
    pub smiles: String,
    pub caption: String,
    pub augmented: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{source_name}:{line}: {error}")]
pub struct DatagenError {
    pub source_name: String,
    pub line: usize,
    pub error: SmilesError,
}

pub fn question(fg_name: &str) -> String {
    format!("Is there a {fg_name} in the molecule?")
}

/// Recovers the group name from a templated question.
pub fn parse_question(text: &str) -> Option<&str> {
    let name = text.strip_prefix("Is there a ")?.strip_suffix(" in the molecule?")?;
    (!name.is_empty()).then_some(name)
}

fn molecule_rng(seed: u64, ordinal: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ ordinal as u64)
}

fn undetected<'a>(registry: &'a FunctionalGroupRegistry, counts: &GroupCounts) -> Vec<&'a str> {
    registry
        .group_names()
        .iter()
        .map(String::as_str)
        .filter(|n| !counts.contains(n))
        .collect()
}

/// Items for one molecule: a positive per detected group in registry order,
/// then up to six sampled negatives.
pub fn motifhallu_items(
    id_prefix: &str,
    smiles: &str,
    counts: &GroupCounts,
    registry: &FunctionalGroupRegistry,
    seed: u64,
    ordinal: usize,
) -> Vec<QaItem> {
    let mut rng = molecule_rng(seed, ordinal);
    let pool = undetected(registry, counts);
    let negatives = pool.choose_multiple(&mut rng, NEGATIVES_PER_MOLECULE.min(pool.len()));
    counts
        .names()
        .map(|n| (n, Answer::Yes))
        .chain(negatives.map(|&n| (n, Answer::No)))
        .enumerate()
        .map(|(j, (fg, answer))| QaItem {
            id: format!("{id_prefix}#{j}"),
            smiles: smiles.to_string(),
            fg: fg.to_string(),
            question: question(fg),
            answer,
        })
        .collect()
}

fn parse_all(
    source_name: &str,
    entries: &[CorpusEntry],
    registry: &FunctionalGroupRegistry,
) -> Result<Vec<GroupCounts>, DatagenError> {
    entries
        .par_iter()
        .map(|e| {
            parse_smiles(&e.smiles)
                .map(|mol| detect_functional_groups(&mol, registry))
                .map_err(|error| DatagenError {
                    source_name: source_name.to_string(),
                    line: e.line,
                    error,
                })
        })
        .collect()
}

/// Question set for a corpus; ids are `<source>:<line>#<j>`.
pub fn gen_motifhallu(
    source_name: &str,
    entries: &[CorpusEntry],
    registry: &FunctionalGroupRegistry,
    seed: u64,
) -> Result<Vec<QaItem>, DatagenError> {
    let counts = parse_all(source_name, entries, registry)?;
    Ok(entries
        .par_iter()
        .zip(&counts)
        .enumerate()
        .flat_map_iter(|(ordinal, (e, c))| {
            let prefix = format!("{source_name}:{}", e.line);
            motifhallu_items(&prefix, &e.smiles, c, registry, seed, ordinal)
        })
        .collect())
}

/// `a`, `a or b`, `a, or b or c`, as in the reference captions.
fn join_names(names: &[&str]) -> String {
    match names {
        [] => String::new(),
        [one] => one.to_string(),
        [rest @ .., last] => format!("{} or {last}", rest.join(", or ")),
    }
}

/// Functional-group sentences for one molecule, without the caption.
pub fn augmentation(
    counts: &GroupCounts,
    registry: &FunctionalGroupRegistry,
    k_neg: usize,
    seed: u64,
    ordinal: usize,
) -> String {
    if counts.is_empty() {
        return "This molecule has 0 functional groups.".to_string();
    }
    let mut sentences: Vec<String> = counts
        .iter()
        .map(|(name, n)| {
            let noun = if n == 1 { "group" } else { "groups" };
            format!("This molecule has {n} {name} functional {noun}.")
        })
        .collect();
    let mut rng = molecule_rng(seed, ordinal);
    let pool = undetected(registry, counts);
    let negatives: Vec<&str> = pool.choose_multiple(&mut rng, k_neg.min(pool.len())).copied().collect();
    if !negatives.is_empty() {
        sentences.push(format!("This molecule has no {} groups.", join_names(&negatives)));
    }
    sentences.join(" ")
}

pub fn augment_caption(
    smiles: &str,
    caption: &str,
    counts: &GroupCounts,
    registry: &FunctionalGroupRegistry,
    k_neg: usize,
    seed: u64,
    ordinal: usize,
) -> CaptionRecord {
    let prefix = augmentation(counts, registry, k_neg, seed, ordinal);
    let augmented = if caption.is_empty() {
        prefix
    } else {
        format!("{prefix} {caption}")
    };
    CaptionRecord {
        smiles: smiles.to_string(),
        caption: caption.to_string(),
        augmented,
    }
}

/// Augments every entry; a missing caption is treated as empty.
pub fn augment_corpus(
    source_name: &str,
    entries: &[CorpusEntry],
    registry: &FunctionalGroupRegistry,
    k_neg: usize,
    seed: u64,
) -> Result<Vec<CaptionRecord>, DatagenError> {
    let counts = parse_all(source_name, entries, registry)?;
    Ok(entries
        .par_iter()
        .zip(&counts)
        .enumerate()
        .map(|(ordinal, (e, c))| {
            augment_caption(&e.smiles, e.caption.as_deref().unwrap_or(""), c, registry, k_neg, seed, ordinal)
        })
        .collect())
}
