//! Line-oriented molecule corpora: one SMILES per line, optionally followed
//! by a tab and a caption. Blank lines and lines starting with `#` are
//! skipped.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    /// 1-based line number in the source text.
    pub line: usize,
    pub smiles: String,
    pub caption: Option<String>,
}

pub fn read_corpus(text: &str) -> Vec<CorpusEntry> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                return None;
            }
            let (smiles, caption) = match line.split_once('\t') {
                Some((s, c)) => (s, Some(c.to_string())),
                None => (line, None),
            };
            Some(CorpusEntry {
                line: i + 1,
                smiles: smiles.trim().to_string(),
                caption,
            })
        })
        .collect()
}
