//! Time-period train/dev/test splits.
//!
//! Works are assigned whole to train or test. Dev sentences are sampled
//! from each train work, skipping LASLA and any UD sentence that also
//! occurs in LASLA. The Classical period has two manifests: UD only, and
//! UD plus all of LASLA in train; both share dev and test.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conllu::Sentence;
use crate::convert::sentence_label;
use crate::error::{Error, Result};
use crate::metadata::{assign_time_period, MetadataTable, TimePeriod};

pub const WORK_ATOMICITY: &str = "work_atomicity";
pub const TEST_MIN_SIZE: &str = "test_min_size";
pub const TEST_UD_ONLY: &str = "test_ud_only";
pub const SHARED_WORKS_IN_TRAIN: &str = "shared_works_in_train";
pub const DEV_SOURCES: &str = "dev_sources";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            _ => Err(Error::Config(format!("unknown split {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SplitPeriod {
    #[serde(rename = "Classical-UD")]
    ClassicalUd,
    #[serde(rename = "Classical-UD+LASLA")]
    ClassicalUdLasla,
    Bible,
    PostClassical,
}

impl SplitPeriod {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitPeriod::ClassicalUd => "Classical-UD",
            SplitPeriod::ClassicalUdLasla => "Classical-UD+LASLA",
            SplitPeriod::Bible => "Bible",
            SplitPeriod::PostClassical => "PostClassical",
        }
    }

    pub fn time_period(self) -> TimePeriod {
        match self {
            SplitPeriod::ClassicalUd | SplitPeriod::ClassicalUdLasla => TimePeriod::Classical,
            SplitPeriod::Bible => TimePeriod::Bible,
            SplitPeriod::PostClassical => TimePeriod::PostClassical,
        }
    }
}

impl fmt::Display for SplitPeriod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn parse_time_period(s: &str) -> Result<TimePeriod> {
    match s {
        "Classical" => Ok(TimePeriod::Classical),
        "Bible" => Ok(TimePeriod::Bible),
        "PostClassical" => Ok(TimePeriod::PostClassical),
        _ => Err(Error::Config(format!("unknown time period {s:?}"))),
    }
}

/// The sentences of one work in one source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkSentences {
    pub work_id: String,
    pub lasla: bool,
    pub sentence_ids: Vec<String>,
}

/// Groups a corpus by work, keeping first-appearance order.
pub fn works_from_corpus(sentences: &[Sentence], lasla: bool) -> Result<Vec<WorkSentences>> {
    let mut order: Vec<WorkSentences> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, s) in sentences.iter().enumerate() {
        let label = sentence_label(s, i);
        let work = s.work_id().ok_or_else(|| {
            Error::Config(format!("sentence {label} has no work_id or newdoc id comment"))
        })?;
        let slot = *index.entry(work.to_string()).or_insert_with(|| {
            order.push(WorkSentences {
                work_id: work.to_string(),
                lasla,
                sentence_ids: Vec::new(),
            });
            order.len() - 1
        });
        order[slot].sentence_ids.push(label);
    }
    Ok(order)
}

#[derive(Debug, Clone, Default)]
pub struct SplitInput {
    pub works: Vec<WorkSentences>,
    /// Ids of UD sentences that also occur in LASLA.
    pub duplicates: HashSet<String>,
}

impl SplitInput {
    /// UD works with at least one sentence shared with LASLA.
    pub fn shared_works(&self) -> HashSet<&str> {
        self.works
            .iter()
            .filter(|w| !w.lasla && w.sentence_ids.iter().any(|id| self.duplicates.contains(id)))
            .map(|w| w.work_id.as_str())
            .collect()
    }

    fn ud_work(&self, work_id: &str) -> Option<&WorkSentences> {
        self.works.iter().find(|w| !w.lasla && w.work_id == work_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublishedRow {
    pub period: TimePeriod,
    pub work_id: String,
    pub split: Split,
    pub sentences: u64,
}

const SHIPPED_ASSIGNMENT: &str = include_str!("../data/published_assignment.tsv");

/// The published work-level assignment, with UD sentence counts per work.
pub fn published_assignment() -> Vec<PublishedRow> {
    parse_assignment(SHIPPED_ASSIGNMENT).expect("shipped assignment parses")
}

pub fn parse_assignment(text: &str) -> Result<Vec<PublishedRow>> {
    let mut rows = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).skip(1) {
        let cols: Vec<&str> = line.split('\t').collect();
        let [period, work, split, n] = cols[..] else {
            return Err(Error::Config(format!("assignment row {line:?} needs 4 columns")));
        };
        rows.push(PublishedRow {
            period: parse_time_period(period)?,
            work_id: work.to_string(),
            split: split.parse()?,
            sentences: n
                .parse()
                .map_err(|_| Error::Config(format!("bad sentence count {n:?}")))?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssignmentSource {
    /// Published assignment when it covers every UD work, greedy otherwise.
    #[default]
    Auto,
    Published,
    Greedy,
}

/// How the dev fraction of a work is turned into a sentence count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DevRounding {
    /// Nearest integer, halves up.
    #[default]
    Round,
    /// Rounded down, but at least one sentence.
    FloorMin1,
}

impl DevRounding {
    pub fn count(self, fraction: f64, n: usize) -> usize {
        let x = fraction * n as f64;
        match self {
            DevRounding::Round => (x + 0.5).floor() as usize,
            DevRounding::FloorMin1 if n == 0 => 0,
            DevRounding::FloorMin1 => (x.floor() as usize).max(1),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitOptions {
    pub seed: u64,
    pub dev_fraction: f64,
    pub dev_rounding: DevRounding,
    pub min_test: u64,
    pub assignment: AssignmentSource,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions {
            seed: 0,
            dev_fraction: 0.03,
            dev_rounding: DevRounding::Round,
            min_test: 1000,
            assignment: AssignmentSource::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkAssignment {
    pub work_id: String,
    pub split: Split,
    pub sentences: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: u64,
    pub dev: u64,
    pub test: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintResult {
    pub constraint: String,
    pub passed: bool,
    pub counterexamples: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub period: SplitPeriod,
    pub seed: u64,
    /// UD works only; LASLA works are listed in `lasla_train_works`.
    pub assignments: Vec<WorkAssignment>,
    #[serde(default)]
    pub lasla_train_works: Vec<String>,
    pub dev_sentences: Vec<String>,
    pub sizes: SplitSizes,
    #[serde(default)]
    pub audit: Vec<ConstraintResult>,
}

impl SplitManifest {
    pub fn split_of(&self, work_id: &str) -> Option<Split> {
        self.assignments
            .iter()
            .find(|a| a.work_id == work_id)
            .map(|a| a.split)
    }

    pub fn passed(&self) -> bool {
        self.audit.iter().all(|c| c.passed)
    }
}

fn period_of_works(
    input: &SplitInput,
    metadata: Option<&MetadataTable>,
    published: Option<&HashMap<&str, &PublishedRow>>,
) -> Result<BTreeMap<TimePeriod, Vec<usize>>> {
    let mut out: BTreeMap<TimePeriod, Vec<usize>> = BTreeMap::new();
    for (i, w) in input.works.iter().enumerate().filter(|(_, w)| !w.lasla) {
        let period = match published.and_then(|p| p.get(w.work_id.as_str())) {
            Some(row) => row.period,
            None => {
                let meta = metadata
                    .and_then(|m| m.find_work(&w.work_id))
                    .ok_or_else(|| Error::Config(format!("no metadata for work {:?}", w.work_id)))?;
                assign_time_period(meta)?
            }
        };
        out.entry(period).or_default().push(i);
    }
    Ok(out)
}

fn greedy_assignment(
    period: TimePeriod,
    works: &[&WorkSentences],
    shared: &HashSet<&str>,
    min_test: u64,
) -> Result<HashMap<String, Split>> {
    let total: u64 = works.iter().map(|w| w.sentence_ids.len() as u64).sum();
    let mut candidates: Vec<&&WorkSentences> = works
        .iter()
        .filter(|w| !shared.contains(w.work_id.as_str()))
        .collect();
    candidates.sort_by(|a, b| {
        b.sentence_ids
            .len()
            .cmp(&a.sentence_ids.len())
            .then_with(|| a.work_id.cmp(&b.work_id))
    });
    let mut out: HashMap<String, Split> = works.iter().map(|w| (w.work_id.clone(), Split::Train)).collect();
    let mut test = 0u64;
    for w in candidates {
        if test >= min_test {
            break;
        }
        let n = w.sentence_ids.len() as u64;
        // Never let test grow past half of the period.
        if 2 * (test + n) <= total {
            test += n;
            out.insert(w.work_id.clone(), Split::Test);
        }
    }
    if test < min_test {
        let available: u64 = works
            .iter()
            .filter(|w| !shared.contains(w.work_id.as_str()))
            .map(|w| w.sentence_ids.len() as u64)
            .sum();
        return Err(Error::Infeasible {
            period: period.to_string(),
            constraint: TEST_MIN_SIZE,
            detail: format!(
                "reached {test} test sentences; {available} of {total} UD sentences are in works not shared with LASLA, at most half may be used, {min_test} are required"
            ),
        });
    }
    Ok(out)
}

fn sample_dev(
    works: &[&WorkSentences],
    assignment: &HashMap<String, Split>,
    duplicates: &HashSet<String>,
    opts: &SplitOptions,
    stream: u64,
) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream);
    let mut train: Vec<&&WorkSentences> = works
        .iter()
        .filter(|w| assignment.get(&w.work_id) == Some(&Split::Train))
        .collect();
    train.sort_by(|a, b| a.work_id.cmp(&b.work_id));
    let mut dev = Vec::new();
    for w in train {
        let eligible: Vec<&String> = w
            .sentence_ids
            .iter()
            .filter(|id| !duplicates.contains(*id))
            .collect();
        let k = opts
            .dev_rounding
            .count(opts.dev_fraction, w.sentence_ids.len())
            .min(eligible.len());
        let mut picked = rand::seq::index::sample(&mut rng, eligible.len(), k).into_vec();
        picked.sort_unstable();
        dev.extend(picked.into_iter().map(|i| eligible[i].clone()));
    }
    dev
}

/// Builds the four manifests (Classical UD, Classical UD+LASLA, Bible,
/// post-classical). Periods without UD works are skipped.
pub fn build_splits(
    input: &SplitInput,
    metadata: Option<&MetadataTable>,
    opts: &SplitOptions,
) -> Result<Vec<SplitManifest>> {
    if !(0.0..=1.0).contains(&opts.dev_fraction) {
        return Err(Error::Config(format!("dev fraction {} outside [0, 1]", opts.dev_fraction)));
    }
    let published_rows = published_assignment();
    let published: HashMap<&str, &PublishedRow> =
        published_rows.iter().map(|r| (r.work_id.as_str(), r)).collect();
    let ud_works: Vec<&WorkSentences> = input.works.iter().filter(|w| !w.lasla).collect();
    let covered = ud_works.iter().all(|w| published.contains_key(w.work_id.as_str()));
    let use_published = match opts.assignment {
        AssignmentSource::Published if !covered => {
            let missing: Vec<&str> = ud_works
                .iter()
                .filter(|w| !published.contains_key(w.work_id.as_str()))
                .map(|w| w.work_id.as_str())
                .take(5)
                .collect();
            return Err(Error::Config(format!(
                "published assignment does not cover works {missing:?}"
            )));
        }
        AssignmentSource::Published => true,
        AssignmentSource::Auto => covered && !ud_works.is_empty(),
        AssignmentSource::Greedy => false,
    };
    let periods = period_of_works(input, metadata, use_published.then_some(&published))?;
    let shared = input.shared_works();
    let lasla_works: Vec<&WorkSentences> = input.works.iter().filter(|w| w.lasla).collect();

    let mut manifests = Vec::new();
    for (stream, (period, idx)) in periods.iter().enumerate() {
        let works: Vec<&WorkSentences> = idx.iter().map(|&i| &input.works[i]).collect();
        let assignment: HashMap<String, Split> = if use_published {
            works
                .iter()
                .map(|w| (w.work_id.clone(), published[w.work_id.as_str()].split))
                .collect()
        } else {
            greedy_assignment(*period, &works, &shared, opts.min_test)?
        };
        let dev = sample_dev(&works, &assignment, &input.duplicates, opts, stream as u64);
        let mut assignments: Vec<WorkAssignment> = works
            .iter()
            .map(|w| WorkAssignment {
                work_id: w.work_id.clone(),
                split: assignment[&w.work_id],
                sentences: w.sentence_ids.len() as u64,
            })
            .collect();
        assignments.sort_by(|a, b| (a.split, &a.work_id).cmp(&(b.split, &b.work_id)));
        let sum = |s: Split| -> u64 {
            assignments.iter().filter(|a| a.split == s).map(|a| a.sentences).sum()
        };
        let sizes = SplitSizes {
            train: sum(Split::Train) - dev.len() as u64,
            dev: dev.len() as u64,
            test: sum(Split::Test),
        };
        let base = SplitManifest {
            period: match period {
                TimePeriod::Classical => SplitPeriod::ClassicalUd,
                TimePeriod::Bible => SplitPeriod::Bible,
                TimePeriod::PostClassical => SplitPeriod::PostClassical,
            },
            seed: opts.seed,
            assignments,
            lasla_train_works: Vec::new(),
            dev_sentences: dev,
            sizes,
            audit: Vec::new(),
        };
        if *period == TimePeriod::Classical && !lasla_works.is_empty() {
            let mut with_lasla = base.clone();
            with_lasla.period = SplitPeriod::ClassicalUdLasla;
            let mut names: Vec<String> = lasla_works.iter().map(|w| w.work_id.clone()).collect();
            names.sort();
            names.dedup();
            with_lasla.lasla_train_works = names;
            with_lasla.sizes.train += lasla_works.iter().map(|w| w.sentence_ids.len() as u64).sum::<u64>();
            manifests.push(base);
            manifests.push(with_lasla);
        } else {
            manifests.push(base);
        }
    }
    for m in &mut manifests {
        m.audit = audit_splits(m, input, opts.min_test);
    }
    Ok(manifests)
}

fn result(constraint: &str, counterexamples: Vec<String>) -> ConstraintResult {
    ConstraintResult {
        constraint: constraint.to_string(),
        passed: counterexamples.is_empty(),
        counterexamples,
    }
}

/// Re-checks a manifest against the corpora, independently of how it was
/// built.
pub fn audit_splits(manifest: &SplitManifest, input: &SplitInput, min_test: u64) -> Vec<ConstraintResult> {
    let mut atomicity = Vec::new();
    let mut seen: HashMap<&str, Split> = HashMap::new();
    for a in &manifest.assignments {
        if a.split == Split::Dev {
            atomicity.push(format!("{} is assigned to dev as a whole work", a.work_id));
        }
        if let Some(prev) = seen.insert(&a.work_id, a.split) {
            atomicity.push(format!("{} is assigned to both {} and {}", a.work_id, prev, a.split));
        }
    }

    let test_works: Vec<&WorkAssignment> = manifest
        .assignments
        .iter()
        .filter(|a| a.split == Split::Test)
        .collect();
    let test_size: u64 = test_works
        .iter()
        .map(|a| input.ud_work(&a.work_id).map_or(a.sentences, |w| w.sentence_ids.len() as u64))
        .sum();
    let size = if test_size < min_test {
        vec![format!("test has {test_size} sentences, fewer than {min_test}")]
    } else {
        Vec::new()
    };

    let lasla_ids: HashSet<&str> = input.works.iter().filter(|w| w.lasla).map(|w| w.work_id.as_str()).collect();
    let ud_only: Vec<String> = test_works
        .iter()
        .filter(|a| input.ud_work(&a.work_id).is_none() || manifest.lasla_train_works.contains(&a.work_id))
        .map(|a| {
            if lasla_ids.contains(a.work_id.as_str()) {
                format!("{} is a LASLA work", a.work_id)
            } else {
                format!("{} is not a UD work in the corpora", a.work_id)
            }
        })
        .collect();

    let shared = input.shared_works();
    let mut shared_bad: Vec<String> = Vec::new();
    for w in &shared {
        match manifest.split_of(w) {
            Some(Split::Train) => {}
            Some(s) => shared_bad.push(format!("{w} shares sentences with LASLA but is in {s}")),
            None if manifest.period.time_period() == TimePeriod::Classical => {
                shared_bad.push(format!("{w} shares sentences with LASLA but is not in this manifest"))
            }
            None => {}
        }
    }
    shared_bad.sort();

    let mut owner: HashMap<&str, (&WorkSentences, bool)> = HashMap::new();
    for w in &input.works {
        for id in &w.sentence_ids {
            owner.insert(id.as_str(), (w, w.lasla));
        }
    }
    let mut dev_bad = Vec::new();
    for id in &manifest.dev_sentences {
        match owner.get(id.as_str()) {
            None => dev_bad.push(format!("dev sentence {id} is not in the corpora")),
            Some((_, true)) => dev_bad.push(format!("dev sentence {id} comes from LASLA")),
            Some((w, false)) => {
                if input.duplicates.contains(id) {
                    dev_bad.push(format!("dev sentence {id} also occurs in LASLA"));
                } else if manifest.split_of(&w.work_id) != Some(Split::Train) {
                    dev_bad.push(format!("dev sentence {id} belongs to {}, not a train work", w.work_id));
                }
            }
        }
    }

    vec![
        result(WORK_ATOMICITY, atomicity),
        result(TEST_MIN_SIZE, size),
        result(TEST_UD_ONLY, ud_only),
        result(SHARED_WORKS_IN_TRAIN, shared_bad),
        result(DEV_SOURCES, dev_bad),
    ]
}

#[derive(Debug, Clone, Default)]
pub struct SplitData {
    pub train: Vec<Sentence>,
    pub dev: Vec<Sentence>,
    pub test: Vec<Sentence>,
}

/// Sentences of each split, in corpus order. `ud` and `lasla` are the
/// corpora the manifest was built from.
pub fn materialize(manifest: &SplitManifest, ud: &[Sentence], lasla: &[Sentence]) -> SplitData {
    let dev: HashSet<&str> = manifest.dev_sentences.iter().map(String::as_str).collect();
    let mut out = SplitData::default();
    for (i, s) in ud.iter().enumerate() {
        let Some(split) = s.work_id().and_then(|w| manifest.split_of(w)) else {
            continue;
        };
        match split {
            Split::Test => out.test.push(s.clone()),
            _ if dev.contains(sentence_label(s, i).as_str()) => out.dev.push(s.clone()),
            _ => out.train.push(s.clone()),
        }
    }
    if !manifest.lasla_train_works.is_empty() {
        out.train.extend(
            lasla
                .iter()
                .filter(|s| s.work_id().is_some_and(|w| manifest.lasla_train_works.iter().any(|x| x == w)))
                .cloned(),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn work(id: &str, n: usize, lasla: bool) -> WorkSentences {
        WorkSentences {
            work_id: id.into(),
            lasla,
            sentence_ids: (0..n).map(|i| format!("{id}-{i}")).collect(),
        }
    }

    #[test]
    fn rounding_rules() {
        assert_eq!(DevRounding::Round.count(0.03, 1445), 43);
        assert_eq!(DevRounding::Round.count(0.03, 50), 2); // 1.5 rounds up
        assert_eq!(DevRounding::Round.count(0.03, 16), 0);
        assert_eq!(DevRounding::FloorMin1.count(0.03, 16), 1);
        assert_eq!(DevRounding::FloorMin1.count(0.03, 0), 0);
    }

    #[test]
    fn shipped_assignment_totals() {
        let rows = published_assignment();
        let total = |p: TimePeriod, s: Split| -> u64 {
            rows.iter().filter(|r| r.period == p && r.split == s).map(|r| r.sentences).sum()
        };
        assert_eq!(total(TimePeriod::Classical, Split::Train), 6725);
        assert_eq!(total(TimePeriod::Classical, Split::Test), 1041);
        assert_eq!(total(TimePeriod::Bible, Split::Train), 10773);
        assert_eq!(total(TimePeriod::Bible, Split::Test), 1021);
        assert_eq!(total(TimePeriod::PostClassical, Split::Train), 33671);
        assert_eq!(total(TimePeriod::PostClassical, Split::Test), 5003);
    }

    #[test]
    fn greedy_keeps_shared_work_in_train() {
        let works = [work("shared", 900, false), work("a", 700, false), work("b", 600, false)];
        let refs: Vec<&WorkSentences> = works.iter().collect();
        let shared = HashSet::from(["shared"]);
        let err = greedy_assignment(TimePeriod::Classical, &refs, &shared, 1000).unwrap_err();
        assert!(matches!(err, Error::Infeasible { constraint: TEST_MIN_SIZE, .. }));
        let a = greedy_assignment(TimePeriod::Classical, &refs, &shared, 500).unwrap();
        assert_eq!(a["shared"], Split::Train);
        assert_eq!(a["a"], Split::Test);
        assert_eq!(a["b"], Split::Train);
    }

    #[test]
    fn dev_skips_duplicates() {
        let works = [work("w", 100, false)];
        let refs: Vec<&WorkSentences> = works.iter().collect();
        let assignment = HashMap::from([("w".to_string(), Split::Train)]);
        let dups: HashSet<String> = (0..99).map(|i| format!("w-{i}")).collect();
        let dev = sample_dev(&refs, &assignment, &dups, &SplitOptions::default(), 0);
        assert_eq!(dev, ["w-99"]);
    }
}
