//! Yes/No scoring for functional-group questions.
//!
//! All rates are percentages. `Yes` is the positive label; micro F1 pools
//! the single binary task and therefore equals `f1_pos`, it is kept as its
//! own column so reports line up with published tables.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::datagen::{Answer, QaItem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prediction {
    pub id: String,
    pub answer: Answer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// The same counts with `No` as the positive label.
    pub fn swapped(&self) -> Confusion {
        Confusion {
            tp: self.tn,
            fp: self.fn_,
            tn: self.tp,
            fn_: self.fp,
        }
    }

    pub fn merge(&self, other: &Confusion) -> Confusion {
        Confusion {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            tn: self.tn + other.tn,
            fn_: self.fn_ + other.fn_,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub f1_pos: f64,
    pub f1_neg: f64,
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub accuracy: f64,
    pub yes_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auroc: Option<f64>,
    pub confusion: Confusion,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("no prediction for gold id `{0}`")]
    Missing(String),
    #[error("more than one prediction for id `{0}`")]
    Duplicate(String),
    #[error("prediction id `{0}` is not in the gold set")]
    Unknown(String),
    #[error("gold id `{0}` appears more than once")]
    DuplicateGold(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// F1 with positive counts `tp`, `fp`, `fn_`. No predicted and no actual
/// positives scores 100.
pub fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        100.0
    } else {
        100.0 * (2 * tp) as f64 / denom as f64
    }
}

/// Area under the ROC curve from the rank-sum statistic with average ranks
/// for ties. `None` when one class is absent.
pub fn auroc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += order[i..=j].iter().filter(|&&k| positive[k]).count() as f64 * avg;
        i = j + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(100.0 * u / (n_pos * n_neg) as f64)
}

pub fn report(confusion: Confusion, auroc: Option<f64>) -> MetricsReport {
    let c = confusion;
    let total = c.total().max(1) as f64;
    let f1_pos = f1(c.tp, c.fp, c.fn_);
    let f1_neg = f1(c.tn, c.fn_, c.fp);
    MetricsReport {
        f1_pos,
        f1_neg,
        macro_f1: (f1_pos + f1_neg) / 2.0,
        micro_f1: f1_pos,
        accuracy: 100.0 * (c.tp + c.tn) as f64 / total,
        yes_ratio: 100.0 * (c.tp + c.fp) as f64 / total,
        auroc,
        confusion,
    }
}

/// Scores predictions against gold items; every gold id needs exactly one
/// prediction.
pub fn score(predictions: &[Prediction], gold: &[QaItem]) -> Result<MetricsReport, EvalError> {
    let mut truth: HashMap<&str, Answer> = HashMap::with_capacity(gold.len());
    for g in gold {
        if truth.insert(&g.id, g.answer).is_some() {
            return Err(EvalError::DuplicateGold(g.id.clone()));
        }
    }
    let mut seen: HashSet<&str> = HashSet::with_capacity(predictions.len());
    let mut c = Confusion::default();
    let mut scored = Vec::new();
    for p in predictions {
        let actual = *truth.get(p.id.as_str()).ok_or_else(|| EvalError::Unknown(p.id.clone()))?;
        if !seen.insert(&p.id) {
            return Err(EvalError::Duplicate(p.id.clone()));
        }
        match (p.answer, actual) {
            (Answer::Yes, Answer::Yes) => c.tp += 1,
            (Answer::Yes, Answer::No) => c.fp += 1,
            (Answer::No, Answer::No) => c.tn += 1,
            (Answer::No, Answer::Yes) => c.fn_ += 1,
        }
        scored.push((p.score, actual == Answer::Yes));
    }
    if let Some(g) = gold.iter().find(|g| !seen.contains(g.id.as_str())) {
        return Err(EvalError::Missing(g.id.clone()));
    }
    let area = if scored.iter().all(|(s, _)| s.is_some()) {
        // sort by id so the result does not depend on file order
        let mut rows: Vec<(&str, f64, bool)> = predictions
            .iter()
            .zip(&scored)
            .map(|(p, &(s, y))| (p.id.as_str(), s.unwrap(), y))
            .collect();
        rows.sort_by(|a, b| a.0.cmp(b.0));
        let scores: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let labels: Vec<bool> = rows.iter().map(|r| r.2).collect();
        auroc(&scores, &labels)
    } else {
        None
    };
    Ok(report(c, area))
}

fn parse_jsonl<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, EvalError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| EvalError::Parse {
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

pub fn parse_predictions(text: &str) -> Result<Vec<Prediction>, EvalError> {
    parse_jsonl(text)
}

pub fn parse_gold(text: &str) -> Result<Vec<QaItem>, EvalError> {
    parse_jsonl(text)
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let auroc = self.auroc.map_or("-".to_string(), |a| format!("{a:.2}"));
        writeln!(
            f,
            "{:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
            "Macro F1", "F1 (pos)", "F1 (neg)", "Micro F1", "AUROC", "Acc", "Yes Ratio"
        )?;
        writeln!(
            f,
            "{:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9} {:>9.2} {:>9.2}",
            self.macro_f1, self.f1_pos, self.f1_neg, self.micro_f1, auroc, self.accuracy, self.yes_ratio
        )?;
        let c = &self.confusion;
        write!(f, "tp={} fp={} tn={} fn={}", c.tp, c.fp, c.tn, c.fn_)
    }
}
