//! Cross-corpus duplicate sentence detection.
//!
//! Candidates share a normalized prefix or suffix, measured either in
//! characters or in tokens. Each candidate is confirmed by aligning the two
//! token sequences on their longest common contiguous run. Pairs are then
//! chosen greedily so that every sentence is used at most once.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conllu::Sentence;
use crate::convert::sentence_label;
use crate::error::{Error, Result};
use crate::metadata::MetadataTable;
use crate::normalize::{matching_key, MatchingKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinOverlap {
    /// Minimum shared prefix/suffix length in characters of the normalized
    /// string.
    pub chars: usize,
    /// Minimum shared prefix/suffix length in normalized tokens.
    pub tokens: usize,
}

impl Default for MinOverlap {
    fn default() -> Self {
        MinOverlap { chars: 20, tokens: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchBasis {
    CharPrefix,
    CharSuffix,
    TokenPrefix,
    TokenSuffix,
}

impl MatchBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchBasis::CharPrefix => "char-prefix",
            MatchBasis::CharSuffix => "char-suffix",
            MatchBasis::TokenPrefix => "token-prefix",
            MatchBasis::TokenSuffix => "token-suffix",
        }
    }
}

impl fmt::Display for MatchBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MatchBasis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            MatchBasis::CharPrefix,
            MatchBasis::CharSuffix,
            MatchBasis::TokenPrefix,
            MatchBasis::TokenSuffix,
        ]
        .into_iter()
        .find(|b| b.as_str() == s)
        .ok_or_else(|| Error::Config(format!("unknown match basis {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SentenceRef {
    /// Position of the sentence in its corpus.
    pub index: usize,
    pub sent_id: String,
    pub work_id: Option<String>,
}

impl SentenceRef {
    fn of(sentence: &Sentence, index: usize) -> Self {
        SentenceRef {
            index,
            sent_id: sentence_label(sentence, index),
            work_id: sentence.work_id().map(str::to_string),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DuplicatePair {
    pub a: SentenceRef,
    pub b: SentenceRef,
    pub basis: MatchBasis,
    /// Aligned positions in the two normalized token lists (see
    /// [`MatchingKey::forms`]).
    pub alignment: Vec<(usize, usize)>,
}

impl DuplicatePair {
    /// Aligned positions mapped back to `Sentence::tokens()` indices.
    pub fn token_pairs(&self, key_a: &MatchingKey, key_b: &MatchingKey) -> Vec<(usize, usize)> {
        self.alignment
            .iter()
            .map(|&(i, j)| (key_a.positions[i], key_b.positions[j]))
            .collect()
    }
}

/// Longest common contiguous run of equal tokens. Among runs of maximal
/// length the one starting earliest in `a`, then earliest in `b`, wins.
pub fn align_tokens<T: PartialEq>(a: &[T], b: &[T]) -> Vec<(usize, usize)> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // prev[j + 1] = length of the common run ending at a[i - 1], b[j].
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    let mut best = (0usize, 0usize, 0usize); // (len, start_a, start_b)
    for i in 0..a.len() {
        for j in 0..b.len() {
            cur[j + 1] = if a[i] == b[j] { prev[j] + 1 } else { 0 };
            let len = cur[j + 1];
            if len == 0 {
                continue;
            }
            let (sa, sb) = (i + 1 - len, j + 1 - len);
            if len > best.0 || (len == best.0 && (sa, sb) < (best.1, best.2)) {
                best = (len, sa, sb);
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let (len, sa, sb) = best;
    (0..len).map(|k| (sa + k, sb + k)).collect()
}

fn char_prefix(s: &str, n: usize) -> Option<&str> {
    match s.char_indices().nth(n) {
        Some((end, _)) => Some(&s[..end]),
        None if s.chars().count() == n => Some(s),
        None => None,
    }
}

fn char_suffix(s: &str, n: usize) -> Option<&str> {
    let count = s.chars().count();
    if count < n {
        return None;
    }
    let start = s.char_indices().nth(count - n).map_or(s.len(), |(i, _)| i);
    Some(&s[start..])
}

fn token_prefix(forms: &[String], n: usize) -> Option<&[String]> {
    (n > 0 && forms.len() >= n).then(|| &forms[..n])
}

fn token_suffix(forms: &[String], n: usize) -> Option<&[String]> {
    (n > 0 && forms.len() >= n).then(|| &forms[forms.len() - n..])
}

/// Which criterion, if any, admits `a` and `b` as a candidate pair.
pub fn match_basis(a: &MatchingKey, b: &MatchingKey, min: MinOverlap) -> Option<MatchBasis> {
    let chars = |f: fn(&str, usize) -> Option<&str>| {
        min.chars > 0
            && matches!((f(&a.chars, min.chars), f(&b.chars, min.chars)), (Some(x), Some(y)) if x == y)
    };
    let toks = |f: fn(&[String], usize) -> Option<&[String]>| {
        matches!((f(&a.forms, min.tokens), f(&b.forms, min.tokens)), (Some(x), Some(y)) if x == y)
    };
    if chars(char_prefix) {
        Some(MatchBasis::CharPrefix)
    } else if chars(char_suffix) {
        Some(MatchBasis::CharSuffix)
    } else if toks(token_prefix) {
        Some(MatchBasis::TokenPrefix)
    } else if toks(token_suffix) {
        Some(MatchBasis::TokenSuffix)
    } else {
        None
    }
}

struct Index {
    map: HashMap<(u8, String), Vec<usize>>,
}

impl Index {
    fn probes(key: &MatchingKey, min: MinOverlap) -> Vec<(u8, String)> {
        let mut out = Vec::with_capacity(4);
        if min.chars > 0 {
            if let Some(p) = char_prefix(&key.chars, min.chars) {
                out.push((0, p.to_string()));
            }
            if let Some(p) = char_suffix(&key.chars, min.chars) {
                out.push((1, p.to_string()));
            }
        }
        if let Some(p) = token_prefix(&key.forms, min.tokens) {
            out.push((2, p.join("\u{1f}")));
        }
        if let Some(p) = token_suffix(&key.forms, min.tokens) {
            out.push((3, p.join("\u{1f}")));
        }
        out
    }

    fn build(keys: &[MatchingKey], min: MinOverlap) -> Self {
        let mut map: HashMap<(u8, String), Vec<usize>> = HashMap::new();
        for (i, k) in keys.iter().enumerate() {
            for p in Self::probes(k, min) {
                map.entry(p).or_default().push(i);
            }
        }
        Index { map }
    }

    fn candidates(&self, key: &MatchingKey, min: MinOverlap) -> Vec<usize> {
        let mut out: Vec<usize> = Self::probes(key, min)
            .iter()
            .filter_map(|p| self.map.get(p))
            .flatten()
            .copied()
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Finds duplicate sentences between two corpora.
pub fn find_duplicates(a: &[Sentence], b: &[Sentence], min: MinOverlap) -> Vec<DuplicatePair> {
    let keys_a: Vec<MatchingKey> = a.par_iter().map(matching_key).collect();
    let keys_b: Vec<MatchingKey> = b.par_iter().map(matching_key).collect();
    find_duplicates_keyed(a, &keys_a, b, &keys_b, min)
}

pub fn find_duplicates_keyed(
    a: &[Sentence],
    keys_a: &[MatchingKey],
    b: &[Sentence],
    keys_b: &[MatchingKey],
    min: MinOverlap,
) -> Vec<DuplicatePair> {
    let index = Index::build(keys_b, min);
    let mut confirmed: Vec<DuplicatePair> = keys_a
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, ka)| {
            index
                .candidates(ka, min)
                .into_iter()
                .filter_map(|j| {
                    let kb = &keys_b[j];
                    let basis = match_basis(ka, kb, min)?;
                    let alignment = align_tokens(&ka.forms, &kb.forms);
                    (!alignment.is_empty()).then(|| DuplicatePair {
                        a: SentenceRef::of(&a[i], i),
                        b: SentenceRef::of(&b[j], j),
                        basis,
                        alignment,
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect();

    // Longest alignment first, then by sentence ids. The ordering does not
    // depend on which corpus is called A.
    confirmed.sort_by(|x, y| {
        let kx = order_key(x);
        let ky = order_key(y);
        ky.0.cmp(&kx.0).then_with(|| kx.1.cmp(&ky.1))
    });
    let mut used_a = HashSet::new();
    let mut used_b = HashSet::new();
    let mut out = Vec::new();
    for p in confirmed {
        if used_a.contains(&p.a.index) || used_b.contains(&p.b.index) {
            continue;
        }
        used_a.insert(p.a.index);
        used_b.insert(p.b.index);
        out.push(p);
    }
    out.sort_by(|x, y| (x.a.index, x.b.index).cmp(&(y.a.index, y.b.index)));
    out
}

fn order_key(p: &DuplicatePair) -> (usize, (String, String)) {
    let (x, y) = (p.a.sent_id.clone(), p.b.sent_id.clone());
    (p.alignment.len(), if x <= y { (x, y) } else { (y, x) })
}

/// Duplicate sentences per work of corpus A.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorkDuplicates {
    pub author: String,
    pub work_id: String,
    pub count: usize,
}

/// Counts duplicates per work. Every work of `corpus_a` gets a row, so works
/// without duplicates show up with zero.
pub fn duplicate_report(
    pairs: &[DuplicatePair],
    corpus_a: &[Sentence],
    metadata: Option<&MetadataTable>,
) -> Vec<WorkDuplicates> {
    let mut counts: BTreeMap<String, usize> = corpus_a
        .iter()
        .map(|s| (s.work_id().unwrap_or("-").to_string(), 0))
        .collect();
    for p in pairs {
        *counts
            .entry(p.a.work_id.clone().unwrap_or_else(|| "-".into()))
            .or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(work_id, count)| WorkDuplicates {
            author: metadata
                .and_then(|m| m.find_work(&work_id))
                .map_or_else(|| "-".to_string(), |r| r.author.clone()),
            work_id,
            count,
        })
        .collect()
}

/// One row of a duplicate manifest file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub sent_a: String,
    pub sent_b: String,
    pub basis: MatchBasis,
    pub length: usize,
}

pub const MANIFEST_HEADER: &str = "sent_a\tsent_b\tbasis\talignment_length";

pub fn manifest_rows(pairs: &[DuplicatePair]) -> Vec<ManifestRow> {
    pairs
        .iter()
        .map(|p| ManifestRow {
            sent_a: p.a.sent_id.clone(),
            sent_b: p.b.sent_id.clone(),
            basis: p.basis,
            length: p.alignment.len(),
        })
        .collect()
}

/// Writes the manifest body (header plus rows). Callers append the
/// provenance trailer.
pub fn write_manifest<W: Write>(out: &mut W, rows: &[ManifestRow]) -> std::io::Result<()> {
    writeln!(out, "{MANIFEST_HEADER}")?;
    for r in rows {
        writeln!(out, "{}\t{}\t{}\t{}", r.sent_a, r.sent_b, r.basis, r.length)?;
    }
    Ok(())
}

pub fn read_manifest<R: BufRead>(reader: R) -> Result<Vec<ManifestRow>> {
    let mut rows = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() || (n == 0 && line == MANIFEST_HEADER) {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let bad = || Error::Config(format!("duplicate manifest line {}: {line:?}", n + 1));
        if cols.len() != 4 {
            return Err(bad());
        }
        rows.push(ManifestRow {
            sent_a: cols[0].to_string(),
            sent_b: cols[1].to_string(),
            basis: cols[2].parse().map_err(|_| bad())?,
            length: cols[3].parse().map_err(|_| bad())?,
        });
    }
    Ok(rows)
}
