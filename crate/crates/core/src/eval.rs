//! Detector evaluation metrics.
//!
//! Predictions and gold examples are aligned by position. Precision, recall
//! or F1 with a zero denominator are reported as 0; the raw counts travel
//! alongside in [`Prf`] and [`EvalReport::counts`] so the two cases can be
//! told apart.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::detect::Detection;
use crate::dialogue::{Label, LabeledExample};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("nothing to evaluate")]
    Empty,
    #[error("{preds} prediction(s) but {gold} gold item(s)")]
    LengthMismatch { preds: usize, gold: usize },
    #[error("prediction {position} has no evidence set (strict metrics need the structured detector)")]
    MissingEvidence { position: usize },
    #[error("position {position}: prediction is for utterance {pred} but gold is for {gold}")]
    Misaligned { position: usize, pred: usize, gold: usize },
    #[error("AUC is undefined without both positive and negative labels")]
    SingleClass,
    #[error("score {value} at {position} is not finite")]
    NonFinite { position: usize, value: f64 },
    #[error("need at least 2 points for a correlation, got {0}")]
    TooFewPoints(usize),
    #[error("correlation is undefined when one side has zero variance")]
    ZeroVariance,
}

fn aligned(preds: usize, gold: usize) -> Result<(), EvalError> {
    if preds != gold {
        return Err(EvalError::LengthMismatch { preds, gold });
    }
    if preds == 0 {
        return Err(EvalError::Empty);
    }
    Ok(())
}

/// Precision, recall and F1 with the counts they came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl Prf {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        Self {
            precision,
            recall,
            f1: harmonic(precision, recall),
            tp,
            fp,
            fn_,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Pool utterance-level decisions over all examples.
    #[default]
    Micro,
    /// Average per-example precision, recall and F1.
    Macro,
}

pub fn accuracy(preds: &[Detection], gold: &[LabeledExample]) -> Result<f64, EvalError> {
    aligned(preds.len(), gold.len())?;
    let hits = preds.iter().zip(gold).filter(|(p, g)| p.label == g.label).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Label must match, and for gold contradictions the predicted evidence must
/// equal the gold evidence exactly. Gold non-contradictions are judged on the
/// label alone.
pub fn strict_accuracy(preds: &[Detection], gold: &[LabeledExample]) -> Result<f64, EvalError> {
    aligned(preds.len(), gold.len())?;
    let mut hits = 0;
    for (position, (p, g)) in preds.iter().zip(gold).enumerate() {
        let evidence = p.evidence.as_ref().ok_or(EvalError::MissingEvidence { position })?;
        let correct = p.label == g.label && (g.label == Label::NonContradiction || *evidence == g.evidence);
        hits += usize::from(correct);
    }
    Ok(hits as f64 / preds.len() as f64)
}

/// Supporting-evidence precision/recall/F1 over gold-contradiction examples.
pub fn evidence_prf(preds: &[Detection], gold: &[LabeledExample], averaging: Averaging) -> Result<Prf, EvalError> {
    aligned(preds.len(), gold.len())?;
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    let mut per_example = Vec::new();
    for (position, (p, g)) in preds.iter().zip(gold).enumerate() {
        if !g.label.is_contradiction() {
            continue;
        }
        let predicted = p.evidence.as_ref().ok_or(EvalError::MissingEvidence { position })?;
        let counts = set_counts(predicted, &g.evidence);
        tp += counts.0;
        fp += counts.1;
        fn_ += counts.2;
        per_example.push(Prf::from_counts(counts.0, counts.1, counts.2));
    }
    let micro = Prf::from_counts(tp, fp, fn_);
    Ok(match averaging {
        Averaging::Micro => micro,
        Averaging::Macro if per_example.is_empty() => micro,
        Averaging::Macro => {
            let k = per_example.len() as f64;
            Prf {
                precision: per_example.iter().map(|x| x.precision).sum::<f64>() / k,
                recall: per_example.iter().map(|x| x.recall).sum::<f64>() / k,
                f1: per_example.iter().map(|x| x.f1).sum::<f64>() / k,
                ..micro
            }
        }
    })
}

fn set_counts(pred: &BTreeSet<usize>, gold: &BTreeSet<usize>) -> (usize, usize, usize) {
    let tp = pred.intersection(gold).count();
    (tp, pred.len() - tp, gold.len() - tp)
}

/// Binary P/R/F1 of fired detections against gold contradiction flags, one
/// entry per target utterance.
pub fn stream_prf(detections: &[(usize, Detection)], gold: &[(usize, bool)]) -> Result<Prf, EvalError> {
    aligned(detections.len(), gold.len())?;
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (position, ((pi, det), (gi, flag))) in detections.iter().zip(gold).enumerate() {
        if pi != gi {
            return Err(EvalError::Misaligned {
                position,
                pred: *pi,
                gold: *gi,
            });
        }
        match (det.fired(), *flag) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(Prf::from_counts(tp, fp, fn_))
}

/// Area under the ROC curve as the Mann-Whitney statistic: the fraction of
/// positive/negative pairs where the positive scores higher, ties counting
/// one half. Computed from mid-ranks in `O(n log n)`.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64, EvalError> {
    aligned(scores.len(), labels.len())?;
    if let Some((position, &value)) = scores.iter().enumerate().find(|(_, s)| !s.is_finite()) {
        return Err(EvalError::NonFinite { position, value });
    }
    let positives = labels.iter().filter(|&&l| l).count() as u128;
    let negatives = labels.len() as u128 - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Twice the rank sum of the positives keeps mid-ranks integral.
    let mut doubled_rank_sum: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // 1-based ranks start+1..=end share the mid-rank (start + 1 + end) / 2
        let doubled_mid = (start + 1 + end) as u128;
        let pos_in_group = order[start..end].iter().filter(|&&i| labels[i]).count() as u128;
        doubled_rank_sum += doubled_mid * pos_in_group;
        start = end;
    }
    let doubled_u = doubled_rank_sum - positives * (positives + 1);
    Ok(doubled_u as f64 / (2 * positives * negatives) as f64)
}

/// Fraction of fired detections per category. Empty categories are left out.
pub fn fire_rates(by_category: &BTreeMap<String, Vec<Detection>>) -> BTreeMap<String, f64> {
    by_category
        .iter()
        .filter(|(_, dets)| !dets.is_empty())
        .map(|(cat, dets)| {
            let fired = dets.iter().filter(|d| d.fired()).count();
            (cat.clone(), fired as f64 / dets.len() as f64)
        })
        .collect()
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, EvalError> {
    if xs.len() != ys.len() {
        return Err(EvalError::LengthMismatch {
            preds: xs.len(),
            gold: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(EvalError::TooFewPoints(xs.len()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Gold annotation for one scored utterance in stream evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamFlag {
    pub id: String,
    pub index: usize,
    pub contradiction: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bot_type: Option<String>,
}

impl StreamFlag {
    /// Explicit category if given, else `bot@N` for contradictions marked by
    /// `N` annotators, `bot_marked` without an agreement count, and
    /// `bot_unmarked` otherwise.
    pub fn category(&self) -> String {
        if let Some(c) = &self.category {
            return c.clone();
        }
        match (self.contradiction, self.agreement) {
            (true, Some(n)) => format!("bot@{n}"),
            (true, None) => "bot_marked".into(),
            (false, _) => "bot_unmarked".into(),
        }
    }
}

/// Fire-rate category of a labeled example.
pub fn example_category(example: &LabeledExample) -> String {
    match (example.label, example.agreement) {
        (Label::Contradiction, Some(n)) => format!("contradiction@{n}"),
        (Label::Contradiction, None) => "contradiction".into(),
        (Label::NonContradiction, _) => "non_contradiction".into(),
    }
}

/// Aggregate evaluation output. Metrics that do not apply to a mode, or are
/// undefined for the data, are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: Option<f64>,
    pub strict_accuracy: Option<f64>,
    pub se_precision: Option<f64>,
    pub se_recall: Option<f64>,
    pub se_f1: Option<f64>,
    pub stream_precision: Option<f64>,
    pub stream_recall: Option<f64>,
    pub stream_f1: Option<f64>,
    pub auc: Option<f64>,
    pub fire_rates: BTreeMap<String, f64>,
    pub pearson_r: Option<f64>,
    pub counts: BTreeMap<String, usize>,
}

impl EvalReport {
    fn set_auc(&mut self, scores: &[f64], labels: &[bool]) -> Result<(), EvalError> {
        let positives = labels.iter().filter(|&&l| l).count();
        self.counts.insert("auc_positives".into(), positives);
        self.counts.insert("auc_negatives".into(), labels.len() - positives);
        self.auc = match roc_auc(scores, labels) {
            Ok(v) => Some(v),
            Err(EvalError::SingleClass) => None,
            Err(e) => return Err(e),
        };
        Ok(())
    }

    fn set_prf(&mut self, prefix: &str, prf: &Prf) {
        self.counts.insert(format!("{prefix}_tp"), prf.tp);
        self.counts.insert(format!("{prefix}_fp"), prf.fp);
        self.counts.insert(format!("{prefix}_fn"), prf.fn_);
        self.counts.insert(format!("{prefix}_precision_denominator"), prf.tp + prf.fp);
        self.counts.insert(format!("{prefix}_recall_denominator"), prf.tp + prf.fn_);
    }
}

/// Pearson r between each group's gold contradiction rate and its mean
/// detector score. `None` with fewer than two groups or no variance.
pub fn group_correlation<'a>(rows: impl IntoIterator<Item = (&'a str, bool, f64)>) -> Option<f64> {
    let mut groups: BTreeMap<&str, (usize, usize, f64)> = BTreeMap::new();
    for (group, gold, score) in rows {
        let g = groups.entry(group).or_default();
        g.0 += 1;
        g.1 += usize::from(gold);
        g.2 += score;
    }
    let (rates, means): (Vec<f64>, Vec<f64>) = groups
        .values()
        .map(|&(n, hits, total)| (hits as f64 / n as f64, total / n as f64))
        .unzip();
    pearson(&rates, &means).ok()
}

/// Label accuracy, AUC, fire rates per gold category and the per-bot-type
/// correlation.
pub fn balanced_report(preds: &[Detection], gold: &[LabeledExample]) -> Result<EvalReport, EvalError> {
    let mut report = EvalReport {
        accuracy: Some(accuracy(preds, gold)?),
        ..EvalReport::default()
    };
    report.counts.insert("examples".into(), preds.len());
    let scores: Vec<f64> = preds.iter().map(|p| p.score).collect();
    let labels: Vec<bool> = gold.iter().map(|g| g.label.is_contradiction()).collect();
    report.set_auc(&scores, &labels)?;

    let mut by_category: BTreeMap<String, Vec<Detection>> = BTreeMap::new();
    for (p, g) in preds.iter().zip(gold) {
        by_category.entry(example_category(g)).or_default().push(p.clone());
    }
    for (cat, dets) in &by_category {
        report.counts.insert(format!("fire_rate_{cat}"), dets.len());
    }
    report.fire_rates = fire_rates(&by_category);
    report.pearson_r = group_correlation(
        preds
            .iter()
            .zip(gold)
            .filter_map(|(p, g)| Some((g.bot_type.as_deref()?, g.label.is_contradiction(), p.score))),
    );
    Ok(report)
}

/// Everything in [`balanced_report`] plus strict accuracy and evidence P/R/F1.
pub fn strict_report(preds: &[Detection], gold: &[LabeledExample], averaging: Averaging) -> Result<EvalReport, EvalError> {
    let mut report = balanced_report(preds, gold)?;
    report.strict_accuracy = Some(strict_accuracy(preds, gold)?);
    let se = evidence_prf(preds, gold, averaging)?;
    report.se_precision = Some(se.precision);
    report.se_recall = Some(se.recall);
    report.se_f1 = Some(se.f1);
    report.set_prf("se", &se);
    report.counts.insert(
        "se_examples".into(),
        gold.iter().filter(|g| g.label.is_contradiction()).count(),
    );
    Ok(report)
}

/// Stream P/R/F1, AUC, fire rates per [`StreamFlag::category`] and the
/// per-bot-type correlation. `detections[i]` must belong to the same
/// dialogue and utterance as `gold[i]`.
pub fn stream_report(detections: &[(String, usize, Detection)], gold: &[StreamFlag]) -> Result<EvalReport, EvalError> {
    aligned(detections.len(), gold.len())?;
    for (position, ((id, index, _), flag)) in detections.iter().zip(gold).enumerate() {
        if id != &flag.id || *index != flag.index {
            return Err(EvalError::Misaligned {
                position,
                pred: *index,
                gold: flag.index,
            });
        }
    }
    let pairs: Vec<(usize, Detection)> = detections.iter().map(|(_, k, d)| (*k, d.clone())).collect();
    let flags: Vec<(usize, bool)> = gold.iter().map(|f| (f.index, f.contradiction)).collect();
    let prf = stream_prf(&pairs, &flags)?;
    let mut report = EvalReport {
        stream_precision: Some(prf.precision),
        stream_recall: Some(prf.recall),
        stream_f1: Some(prf.f1),
        ..EvalReport::default()
    };
    report.set_prf("stream", &prf);
    report.counts.insert("utterances".into(), pairs.len());

    let scores: Vec<f64> = pairs.iter().map(|(_, d)| d.score).collect();
    let labels: Vec<bool> = flags.iter().map(|(_, f)| *f).collect();
    report.set_auc(&scores, &labels)?;

    let mut by_category: BTreeMap<String, Vec<Detection>> = BTreeMap::new();
    for ((_, d), f) in pairs.iter().zip(gold) {
        by_category.entry(f.category()).or_default().push(d.clone());
    }
    for (cat, dets) in &by_category {
        report.counts.insert(format!("fire_rate_{cat}"), dets.len());
    }
    report.fire_rates = fire_rates(&by_category);
    report.pearson_r = group_correlation(
        pairs
            .iter()
            .zip(gold)
            .filter_map(|((_, d), f)| Some((f.bot_type.as_deref()?, f.contradiction, d.score))),
    );
    Ok(report)
}
