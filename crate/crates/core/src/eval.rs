//! Scoring of predicted CoNLL-U files against gold, and paired
//! permutation tests between two prediction files.
//!
//! Gold and predictions must have the same sentences, the same number of
//! words per sentence and identical forms. Every aligned word is scored,
//! punctuation included.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::conllu::{Sentence, Token};
use crate::convert::sentence_label;
use crate::error::{Error, Result};
use crate::standardize::MORPH_FEATURES;

/// Label used for "no value" in per-value scores.
pub const NONE: &str = "None";

/// Features that can be scored individually.
pub fn scored_features() -> impl Iterator<Item = &'static str> {
    std::iter::once("UPOS").chain(MORPH_FEATURES)
}

fn check_feature(feature: &str) -> Result<()> {
    if scored_features().any(|f| f == feature) {
        Ok(())
    } else {
        Err(Error::Config(format!("unknown feature {feature:?}")))
    }
}

fn value_of(token: &Token, feature: &str) -> String {
    if feature == "UPOS" {
        return if token.upos == "_" { NONE.to_string() } else { token.upos.clone() };
    }
    token.feats.joined(feature).unwrap_or_else(|| NONE.to_string())
}

/// Sorted `Name=Value` string over the eight morphological features, with
/// UPOS prepended when asked for.
pub fn feature_string(token: &Token, include_upos: bool) -> String {
    let mut parts: Vec<String> = MORPH_FEATURES
        .iter()
        .filter_map(|f| token.feats.joined(f).map(|v| format!("{f}={v}")))
        .collect();
    if include_upos {
        parts.insert(0, format!("UPOS={}", token.upos));
    }
    parts.join("|")
}

pub fn check_alignment(gold: &[Sentence], pred: &[Sentence]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::Alignment(format!(
            "gold has {} sentences, prediction has {}",
            gold.len(),
            pred.len()
        )));
    }
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        let label = sentence_label(g, i);
        if g.token_count() != p.token_count() {
            return Err(Error::Alignment(format!(
                "sentence {label}: gold has {} words, prediction has {}",
                g.token_count(),
                p.token_count()
            )));
        }
        for (k, (tg, tp)) in g.tokens().zip(p.tokens()).enumerate() {
            if tg.form != tp.form {
                return Err(Error::Alignment(format!(
                    "sentence {label}, word {}: gold form {:?}, predicted form {:?}",
                    k + 1,
                    tg.form,
                    tp.form
                )));
            }
        }
    }
    Ok(())
}

fn pairs<'a>(gold: &'a [Sentence], pred: &'a [Sentence]) -> impl Iterator<Item = (&'a Token, &'a Token)> {
    gold.iter().zip(pred).flat_map(|(g, p)| g.tokens().zip(p.tokens()))
}

/// Fraction of words whose whole feature string matches gold.
pub fn whole_string_accuracy(gold: &[Sentence], pred: &[Sentence], include_upos: bool) -> Result<f64> {
    check_alignment(gold, pred)?;
    let (mut right, mut total) = (0u64, 0u64);
    for (g, p) in pairs(gold, pred) {
        total += 1;
        right += (feature_string(g, include_upos) == feature_string(p, include_upos)) as u64;
    }
    Ok(if total == 0 { 0.0 } else { right as f64 / total as f64 })
}

/// Precision, recall and F1 of one value against the rest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueScore {
    pub feature: String,
    pub value: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold occurrences.
    pub support: u64,
    /// Set when the value occurs in neither gold nor prediction.
    pub zero_support: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    tp: u64,
    fp: u64,
    fn_: u64,
}

fn f1(c: Counts) -> f64 {
    let d = 2 * c.tp + c.fp + c.fn_;
    if d == 0 { 0.0 } else { 2.0 * c.tp as f64 / d as f64 }
}

fn ratio(n: u64, d: u64) -> f64 {
    if d == 0 { 0.0 } else { n as f64 / d as f64 }
}

fn class_counts(gold: &[Sentence], pred: &[Sentence], feature: &str) -> BTreeMap<String, Counts> {
    let mut out: BTreeMap<String, Counts> = BTreeMap::new();
    for (g, p) in pairs(gold, pred) {
        let (vg, vp) = (value_of(g, feature), value_of(p, feature));
        if vg == vp {
            out.entry(vg).or_default().tp += 1;
        } else {
            out.entry(vg).or_default().fn_ += 1;
            out.entry(vp).or_default().fp += 1;
        }
    }
    out
}

/// Unweighted mean of per-value F1 over the values seen in gold or
/// prediction, `None` included when it occurs.
pub fn macro_f1(gold: &[Sentence], pred: &[Sentence], feature: &str) -> Result<f64> {
    check_feature(feature)?;
    check_alignment(gold, pred)?;
    let counts = class_counts(gold, pred, feature);
    if counts.is_empty() {
        return Ok(0.0);
    }
    Ok(counts.values().map(|&c| f1(c)).sum::<f64>() / counts.len() as f64)
}

pub fn per_value_f1(gold: &[Sentence], pred: &[Sentence], feature: &str, value: &str) -> Result<ValueScore> {
    check_feature(feature)?;
    check_alignment(gold, pred)?;
    let c = class_counts(gold, pred, feature)
        .get(value)
        .copied()
        .unwrap_or_default();
    Ok(score(feature, value, c))
}

fn score(feature: &str, value: &str, c: Counts) -> ValueScore {
    ValueScore {
        feature: feature.to_string(),
        value: value.to_string(),
        precision: ratio(c.tp, c.tp + c.fp),
        recall: ratio(c.tp, c.tp + c.fn_),
        f1: f1(c),
        support: c.tp + c.fn_,
        zero_support: c == Counts::default(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub tokens: u64,
    pub morph_accuracy: f64,
    pub upos_accuracy: f64,
    /// Whole-string accuracy with UPOS included in the string.
    pub full_accuracy: f64,
    pub macro_f1: BTreeMap<String, f64>,
    pub per_value: Vec<ValueScore>,
}

pub fn evaluate(gold: &[Sentence], pred: &[Sentence]) -> Result<EvalReport> {
    check_alignment(gold, pred)?;
    let tokens = pairs(gold, pred).count() as u64;
    let upos_right = pairs(gold, pred).filter(|(g, p)| g.upos == p.upos).count() as u64;
    let mut macro_scores = BTreeMap::new();
    let mut per_value = Vec::new();
    for f in scored_features() {
        let counts = class_counts(gold, pred, f);
        let mean = if counts.is_empty() {
            0.0
        } else {
            counts.values().map(|&c| f1(c)).sum::<f64>() / counts.len() as f64
        };
        macro_scores.insert(f.to_string(), mean);
        per_value.extend(counts.iter().map(|(v, &c)| score(f, v, c)));
    }
    Ok(EvalReport {
        tokens,
        morph_accuracy: whole_string_accuracy(gold, pred, false)?,
        upos_accuracy: ratio(upos_right, tokens),
        full_accuracy: whole_string_accuracy(gold, pred, true)?,
        macro_f1: macro_scores,
        per_value,
    })
}

impl EvalReport {
    /// Human-readable TSV: one `metric` block and one `value` block.
    pub fn write_table<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "kind\tfeature\tvalue\tprecision\trecall\tf1\tsupport")?;
        writeln!(out, "accuracy\tmorph\t_\t_\t_\t{:.4}\t{}", self.morph_accuracy, self.tokens)?;
        writeln!(out, "accuracy\tUPOS\t_\t_\t_\t{:.4}\t{}", self.upos_accuracy, self.tokens)?;
        writeln!(out, "accuracy\tmorph+UPOS\t_\t_\t_\t{:.4}\t{}", self.full_accuracy, self.tokens)?;
        for (f, v) in &self.macro_f1 {
            writeln!(out, "macro_f1\t{f}\t_\t_\t_\t{v:.4}\t{}", self.tokens)?;
        }
        for s in &self.per_value {
            writeln!(
                out,
                "value_f1\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{}",
                s.feature, s.value, s.precision, s.recall, s.f1, s.support
            )?;
        }
        Ok(())
    }
}

/// Metric compared by the permutation test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(into = "String")]
pub enum Metric {
    /// Whole-string accuracy over the morphological features.
    MorphAccuracy,
    UposAccuracy,
    MacroF1(String),
    ValueF1 { feature: String, value: String },
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::MorphAccuracy => f.write_str("morph-acc"),
            Metric::UposAccuracy => f.write_str("upos-acc"),
            Metric::MacroF1(feat) => write!(f, "macro-f1:{feat}"),
            Metric::ValueF1 { feature, value } => write!(f, "f1:{feature}={value}"),
        }
    }
}

impl From<Metric> for String {
    fn from(m: Metric) -> String {
        m.to_string()
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let m = match s {
            "morph-acc" => Metric::MorphAccuracy,
            "upos-acc" => Metric::UposAccuracy,
            _ => {
                if let Some(f) = s.strip_prefix("macro-f1:") {
                    Metric::MacroF1(f.to_string())
                } else if let Some((f, v)) = s.strip_prefix("f1:").and_then(|r| r.split_once('=')) {
                    Metric::ValueF1 {
                        feature: f.to_string(),
                        value: v.to_string(),
                    }
                } else {
                    return Err(Error::Config(format!(
                        "unknown metric {s:?}; expected morph-acc, upos-acc, macro-f1:<Feature> or f1:<Feature>=<Value>"
                    )));
                }
            }
        };
        match &m {
            Metric::MacroF1(f) | Metric::ValueF1 { feature: f, .. } => check_feature(f)?,
            _ => {}
        }
        Ok(m)
    }
}

/// Per-sentence sufficient statistics of a metric: sums of these vectors
/// over any subset of sentences determine the metric on that subset.
struct Stats {
    dim: usize,
    eval: Box<dyn Fn(&[i64]) -> f64 + Send + Sync>,
}

fn stats_for(metric: &Metric, gold: &[Sentence], preds: [&[Sentence]; 2]) -> (Stats, [Vec<Vec<i64>>; 2]) {
    match metric {
        Metric::MorphAccuracy | Metric::UposAccuracy => {
            let upos = matches!(metric, Metric::UposAccuracy);
            let per = |pred: &[Sentence]| -> Vec<Vec<i64>> {
                gold.iter()
                    .zip(pred)
                    .map(|(g, p)| {
                        let right = g
                            .tokens()
                            .zip(p.tokens())
                            .filter(|(a, b)| {
                                if upos {
                                    a.upos == b.upos
                                } else {
                                    feature_string(a, false) == feature_string(b, false)
                                }
                            })
                            .count();
                        vec![right as i64, g.token_count() as i64]
                    })
                    .collect()
            };
            let stats = Stats {
                dim: 2,
                eval: Box::new(|v| if v[1] == 0 { 0.0 } else { v[0] as f64 / v[1] as f64 }),
            };
            (stats, [per(preds[0]), per(preds[1])])
        }
        Metric::MacroF1(feature) | Metric::ValueF1 { feature, .. } => {
            let mut classes: BTreeSet<String> = BTreeSet::new();
            for s in [gold, preds[0], preds[1]] {
                for t in s.iter().flat_map(|s| s.tokens()) {
                    classes.insert(value_of(t, feature));
                }
            }
            let target = match metric {
                Metric::ValueF1 { value, .. } => Some(value.clone()),
                _ => None,
            };
            if let Some(v) = &target {
                classes.insert(v.clone());
            }
            let index: HashMap<String, usize> =
                classes.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
            let n = classes.len();
            let per = |pred: &[Sentence]| -> Vec<Vec<i64>> {
                gold.iter()
                    .zip(pred)
                    .map(|(g, p)| {
                        // [tp, fp, fn] per class.
                        let mut v = vec![0i64; 3 * n];
                        for (a, b) in g.tokens().zip(p.tokens()) {
                            let (ca, cb) = (index[&value_of(a, feature)], index[&value_of(b, feature)]);
                            if ca == cb {
                                v[3 * ca] += 1;
                            } else {
                                v[3 * ca + 2] += 1;
                                v[3 * cb + 1] += 1;
                            }
                        }
                        v
                    })
                    .collect()
            };
            let class_f1 = |v: &[i64], c: usize| -> Option<f64> {
                let (tp, fp, fn_) = (v[3 * c], v[3 * c + 1], v[3 * c + 2]);
                let d = 2 * tp + fp + fn_;
                (d > 0).then(|| 2.0 * tp as f64 / d as f64)
            };
            let eval: Box<dyn Fn(&[i64]) -> f64 + Send + Sync> = match target {
                Some(v) => {
                    let c = index[&v];
                    Box::new(move |s| class_f1(s, c).unwrap_or(0.0))
                }
                None => Box::new(move |s| {
                    let scores: Vec<f64> = (0..n).filter_map(|c| class_f1(s, c)).collect();
                    if scores.is_empty() {
                        0.0
                    } else {
                        scores.iter().sum::<f64>() / scores.len() as f64
                    }
                }),
            };
            (Stats { dim: 3 * n, eval }, [per(preds[0]), per(preds[1])])
        }
    }
}

/// Metric value of a prediction file, computed through the same
/// statistics the permutation test uses.
pub fn metric_value(metric: &Metric, gold: &[Sentence], pred: &[Sentence]) -> Result<f64> {
    check_alignment(gold, pred)?;
    let (stats, [a, _]) = stats_for(metric, gold, [pred, pred]);
    let mut total = vec![0i64; stats.dim];
    for s in &a {
        for (t, x) in total.iter_mut().zip(s) {
            *t += x;
        }
    }
    Ok((stats.eval)(&total))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermutationResult {
    pub metric: Metric,
    pub metric_a: f64,
    pub metric_b: f64,
    pub observed: f64,
    /// Simulated differences at least as large as the observed one.
    pub at_least_as_extreme: u64,
    pub p_value: f64,
    pub iterations: u64,
    pub seed: u64,
}

impl PermutationResult {
    /// The p-value as text; a zero count is reported as an upper bound of
    /// 3 / iterations.
    pub fn p_display(&self) -> String {
        if self.at_least_as_extreme == 0 {
            format!("< {:.4}", 3.0 / self.iterations as f64)
        } else {
            format!("{:.4}", self.p_value)
        }
    }
}

/// Tolerance used when comparing a simulated difference with the observed
/// one, so that ties are not lost to rounding.
pub const TIE_EPSILON: f64 = 1e-12;

/// Paired permutation test. In every iteration each sentence's two
/// predictions are swapped with probability one half, and the absolute
/// metric difference over the whole shuffled set is recorded. Iteration
/// `i` draws from its own stream of a generator seeded with `seed`, so the
/// result does not depend on `jobs`.
pub fn permutation_test(
    gold: &[Sentence],
    pred_a: &[Sentence],
    pred_b: &[Sentence],
    metric: &Metric,
    iterations: u64,
    seed: u64,
    jobs: usize,
) -> Result<PermutationResult> {
    if iterations < 1 {
        return Err(Error::Config("permutation test needs at least one iteration".into()));
    }
    check_alignment(gold, pred_a)?;
    check_alignment(gold, pred_b)?;
    let (stats, [sa, sb]) = stats_for(metric, gold, [pred_a, pred_b]);
    let dim = stats.dim;
    let sum = |v: &[Vec<i64>]| -> Vec<i64> {
        let mut t = vec![0i64; dim];
        for s in v {
            for (x, y) in t.iter_mut().zip(s) {
                *x += y;
            }
        }
        t
    };
    let (total_a, total_b) = (sum(&sa), sum(&sb));
    let metric_a = (stats.eval)(&total_a);
    let metric_b = (stats.eval)(&total_b);
    let observed = (metric_a - metric_b).abs();
    // Swapping sentence s moves delta[s] from B's total to A's.
    let delta: Vec<Vec<i64>> = sa
        .iter()
        .zip(&sb)
        .map(|(a, b)| b.iter().zip(a).map(|(x, y)| x - y).collect())
        .collect();

    let one = |i: u64| -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i);
        let mut a = total_a.clone();
        let mut b = total_b.clone();
        let mut bits = 0u64;
        for (k, d) in delta.iter().enumerate() {
            if k % 64 == 0 {
                bits = rng.next_u64();
            }
            if bits & 1 == 1 {
                for ((x, y), z) in a.iter_mut().zip(b.iter_mut()).zip(d) {
                    *x += z;
                    *y -= z;
                }
            }
            bits >>= 1;
        }
        ((stats.eval)(&a) - (stats.eval)(&b)).abs() >= observed - TIE_EPSILON
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let hits: u64 = pool.install(|| (0..iterations).into_par_iter().filter(|&i| one(i)).count() as u64);
    Ok(PermutationResult {
        metric: metric.clone(),
        metric_a,
        metric_b,
        observed,
        at_least_as_extreme: hits,
        p_value: hits as f64 / iterations as f64,
        iterations,
        seed,
    })
}

/// A deliberately simple suffix-rule tagger, used to exercise the scoring
/// code end to end. It keeps ids, forms and lemmas and replaces UPOS and
/// FEATS.
pub fn dummy_predict(sentences: &[Sentence]) -> Vec<Sentence> {
    let rules: &[(&str, &str, &str)] = &[
        ("ntur", "VERB", "Mood=Ind|Number=Plur|Person=3|Tense=Pres|Voice=Pass"),
        ("tur", "VERB", "Mood=Ind|Number=Sing|Person=3|Tense=Pres|Voice=Pass"),
        ("nt", "VERB", "Mood=Ind|Number=Plur|Person=3|Tense=Pres|Voice=Act"),
        ("re", "VERB", "Mood=Inf|Tense=Pres|Voice=Act"),
        ("que", "CCONJ", ""),
        ("orum", "NOUN", "Case=Gen|Gender=Masc|Number=Plur"),
        ("arum", "NOUN", "Case=Gen|Gender=Fem|Number=Plur"),
        ("ae", "NOUN", "Case=Gen|Gender=Fem|Number=Sing"),
        ("am", "NOUN", "Case=Acc|Gender=Fem|Number=Sing"),
        ("um", "NOUN", "Case=Acc|Gender=Masc|Number=Sing"),
        ("us", "NOUN", "Case=Nom|Gender=Masc|Number=Sing"),
        ("is", "NOUN", "Case=Abl|Number=Plur"),
        ("t", "VERB", "Mood=Ind|Number=Sing|Person=3|Tense=Pres|Voice=Act"),
        ("a", "NOUN", "Case=Nom|Gender=Fem|Number=Sing"),
        ("o", "NOUN", "Case=Abl|Number=Sing"),
    ];
    let mut out = sentences.to_vec();
    for s in &mut out {
        for t in s.tokens_mut() {
            let form = t.form.to_lowercase();
            let (upos, feats) = if crate::normalize::is_punctuation(&form) {
                ("PUNCT", "")
            } else {
                rules
                    .iter()
                    .find(|(suffix, _, _)| form.ends_with(suffix) && form.len() > suffix.len())
                    .map_or(("ADV", ""), |&(_, u, f)| (u, f))
            };
            t.upos = upos.to_string();
            t.feats = if feats.is_empty() {
                Default::default()
            } else {
                feats.parse().expect("rule features are well formed")
            };
        }
    }
    out
}
