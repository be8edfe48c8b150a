//! Cross-treebank consistency rules applied to standardized records.
//!
//! Rules run in a fixed order: the UPOS collapse first, then the
//! arbitrary-value rules. Every rewrite is reported by rule id so a corpus
//! run can be audited.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::conllu::Sentence;
use crate::normalize::normalize_form;
use crate::standardize::{Mood, Person, StandardRecord, Upos, Voice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleId {
    /// INTJ becomes PART.
    IntjToPart,
    /// Gerunds, infinitives and supines have no Number.
    NonFiniteNumber,
    /// Gerunds, infinitives and supines have no Gender.
    NonFiniteGender,
    /// Gerunds, gerundives and supines have no Tense.
    NonFiniteTense,
    /// AUX is active (unless a mood-specific voice rule applies).
    AuxVoice,
    GerundVoice,
    GerundiveVoice,
    /// Supines are active, or passive when construed with `iri`.
    SupineVoice,
    /// Person filled in on personal pronouns from a lemma list.
    PronounPerson,
}

impl RuleId {
    pub fn code(self) -> &'static str {
        match self {
            RuleId::IntjToPart => "INTJ_TO_PART",
            RuleId::NonFiniteNumber => "NONFINITE_NUMBER_NONE",
            RuleId::NonFiniteGender => "NONFINITE_GENDER_NONE",
            RuleId::NonFiniteTense => "NONFINITE_TENSE_NONE",
            RuleId::AuxVoice => "AUX_VOICE_ACT",
            RuleId::GerundVoice => "GERUND_VOICE_ACT",
            RuleId::GerundiveVoice => "GERUNDIVE_VOICE_PASS",
            RuleId::SupineVoice => "SUPINE_VOICE",
            RuleId::PronounPerson => "PRONOUN_PERSON",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

pub fn collapse_upos(record: &mut StandardRecord) -> Option<RuleId> {
    (record.upos == Upos::Intj).then(|| {
        record.upos = Upos::Part;
        RuleId::IntjToPart
    })
}

fn non_finite_number(r: &mut StandardRecord, _: bool) -> bool {
    matches!(r.mood, Some(Mood::Ger | Mood::Inf | Mood::Sup)) && r.number.take().is_some()
}

fn non_finite_gender(r: &mut StandardRecord, _: bool) -> bool {
    if matches!(r.mood, Some(Mood::Ger | Mood::Inf | Mood::Sup)) && !r.gender.is_empty() {
        r.gender.clear();
        return true;
    }
    false
}

fn non_finite_tense(r: &mut StandardRecord, _: bool) -> bool {
    matches!(r.mood, Some(Mood::Ger | Mood::Gdv | Mood::Sup)) && r.tense.take().is_some()
}

fn set_voice(r: &mut StandardRecord, applies: bool, voice: Voice) -> bool {
    if applies && r.voice != Some(voice) {
        r.voice = Some(voice);
        return true;
    }
    false
}

// Mood-specific voice rules take precedence over the AUX rule, so an AUX
// gerundive stays passive.
fn aux_voice(r: &mut StandardRecord, _: bool) -> bool {
    let applies = r.upos == Upos::Aux && !matches!(r.mood, Some(Mood::Ger | Mood::Gdv | Mood::Sup));
    set_voice(r, applies, Voice::Act)
}

fn gerund_voice(r: &mut StandardRecord, _: bool) -> bool {
    set_voice(r, r.mood == Some(Mood::Ger), Voice::Act)
}

fn gerundive_voice(r: &mut StandardRecord, _: bool) -> bool {
    set_voice(r, r.mood == Some(Mood::Gdv), Voice::Pass)
}

fn supine_voice(r: &mut StandardRecord, iri: bool) -> bool {
    set_voice(r, r.mood == Some(Mood::Sup), if iri { Voice::Pass } else { Voice::Act })
}

pub type Rule = fn(&mut StandardRecord, bool) -> bool;

/// The arbitrary-value rules in application order. None of them reads a
/// field another one writes, so any order gives the same result.
pub const ARBITRARY_VALUE_RULES: [(RuleId, Rule); 7] = [
    (RuleId::NonFiniteNumber, non_finite_number),
    (RuleId::NonFiniteGender, non_finite_gender),
    (RuleId::NonFiniteTense, non_finite_tense),
    (RuleId::AuxVoice, aux_voice),
    (RuleId::GerundVoice, gerund_voice),
    (RuleId::GerundiveVoice, gerundive_voice),
    (RuleId::SupineVoice, supine_voice),
];

/// Applies the arbitrary-value rules in place and returns the ids of the
/// rules that changed something. `iri` marks a supine construed with `iri`.
pub fn enforce_arbitrary_values(record: &mut StandardRecord, iri: bool) -> Vec<RuleId> {
    ARBITRARY_VALUE_RULES
        .iter()
        .filter_map(|(id, rule)| rule(record, iri).then_some(*id))
        .collect()
}

/// Rules a record currently breaks, without changing it.
pub fn violations(record: &StandardRecord, iri: bool) -> Vec<RuleId> {
    let mut probe = record.clone();
    let mut out = Vec::new();
    if record.upos == Upos::Intj {
        out.push(RuleId::IntjToPart);
    }
    out.extend(enforce_arbitrary_values(&mut probe, iri));
    out
}

/// How far from a supine an `iri` may stand. `None` means anywhere in the
/// same sentence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IriWindow(pub Option<usize>);

/// True when a token spelled `iri` occurs within `window` words of the word
/// at `index` (an index into `Sentence::tokens()`).
pub fn detect_iri_construction(sentence: &Sentence, index: usize, window: IriWindow) -> bool {
    sentence.tokens().enumerate().any(|(i, t)| {
        i != index
            && window.0.is_none_or(|w| i.abs_diff(index) <= w)
            && normalize_form(&t.form) == "iri"
    })
}

/// Optional Person repair for personal pronouns that lack it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PronounPersons {
    pub lemmas: HashMap<String, Person>,
}

impl PronounPersons {
    /// First- and second-person pronoun lemmas in both spellings.
    pub fn latin_default() -> Self {
        let mut lemmas = HashMap::new();
        for l in ["ego", "nos"] {
            lemmas.insert(l.to_string(), Person::First);
        }
        for l in ["tu", "vos", "uos"] {
            lemmas.insert(l.to_string(), Person::Second);
        }
        PronounPersons { lemmas }
    }

    pub fn repair(&self, lemma: &str, record: &mut StandardRecord) -> Option<RuleId> {
        if record.upos != Upos::Pron || record.person.is_some() {
            return None;
        }
        let person = *self.lemmas.get(&normalize_form(lemma))
            .or_else(|| self.lemmas.get(&lemma.to_lowercase()))?;
        record.person = Some(person);
        Some(RuleId::PronounPerson)
    }
}

/// Per-rule rewrite counts for one corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AuditLog {
    pub counts: BTreeMap<RuleId, usize>,
}

impl AuditLog {
    pub fn record(&mut self, rules: impl IntoIterator<Item = RuleId>) {
        for r in rules {
            *self.counts.entry(r).or_default() += 1;
        }
    }

    pub fn merge(&mut self, other: &AuditLog) {
        for (r, n) in &other.counts {
            *self.counts.entry(*r).or_default() += n;
        }
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}
