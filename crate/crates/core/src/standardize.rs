//! Conversion of UD-style and LASLA-style annotations into the nine-feature
//! standard Latin grammar record.
//!
//! The record keeps UPOS plus Person, Number, Tense, Mood, Voice, Gender,
//! Case and Degree. Tense uses the six traditional tenses and Mood folds the
//! non-finite verb forms (infinitive, participle, gerund, gerundive, supine)
//! in with the finite moods.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::conllu::{FeatureBundle, Token};
use crate::error::{Error, Result};

macro_rules! tagset {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(Error::Feature(format!("{}={}", stringify!($name), s))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

tagset!(
    /// Universal part-of-speech tags. `Missing` is the `_` placeholder.
    Upos {
        Adj => "ADJ", Adp => "ADP", Adv => "ADV", Aux => "AUX", Cconj => "CCONJ",
        Det => "DET", Intj => "INTJ", Noun => "NOUN", Num => "NUM", Part => "PART",
        Pron => "PRON", Propn => "PROPN", Punct => "PUNCT", Sconj => "SCONJ",
        Sym => "SYM", Verb => "VERB", X => "X", Missing => "_",
    }
);

tagset!(Person { First => "1", Second => "2", Third => "3" });
tagset!(Number { Sing => "Sing", Plur => "Plur" });
tagset!(
    /// The six traditional tenses.
    Tense {
        Pres => "Pres", Imp => "Imp", Perf => "Perf", Fut => "Fut", Pqp => "Pqp", FutP => "FutP",
    }
);
tagset!(
    /// Finite moods plus the non-finite forms traditionally counted as moods.
    Mood {
        Ind => "Ind", Sub => "Sub", Imp => "Imp", Inf => "Inf", Part => "Part",
        Ger => "Ger", Gdv => "Gdv", Sup => "Sup",
    }
);
tagset!(Voice { Act => "Act", Pass => "Pass" });
tagset!(Gender { Fem => "Fem", Masc => "Masc", Neut => "Neut" });
tagset!(Case { Nom => "Nom", Gen => "Gen", Dat => "Dat", Acc => "Acc", Abl => "Abl", Voc => "Voc", Loc => "Loc" });
tagset!(Degree { Cmp => "Cmp", Abs => "Abs" });

tagset!(
    /// UD `Tense` values accepted by the tense table.
    UdTense { Pres => "Pres", Past => "Past", Fut => "Fut", Pqp => "Pqp" }
);
tagset!(
    /// UD `Aspect` values accepted by the tense table.
    UdAspect { Imp => "Imp", Perf => "Perf", Prosp => "Prosp", Inch => "Inch" }
);

impl Mood {
    pub fn is_finite(self) -> bool {
        matches!(self, Mood::Ind | Mood::Sub | Mood::Imp)
    }
}

/// The nine standardized features of a token. `None` means the feature has
/// no value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StandardRecord {
    pub upos: Upos,
    pub person: Option<Person>,
    pub number: Option<Number>,
    pub tense: Option<Tense>,
    pub mood: Option<Mood>,
    pub voice: Option<Voice>,
    /// Sorted; empty means None. LASLA tokens may carry several genders.
    pub gender: Vec<Gender>,
    pub case: Option<Case>,
    pub degree: Option<Degree>,
}

/// Names of the eight morphological features, in serialization order.
pub const MORPH_FEATURES: [&str; 8] = [
    "Case", "Degree", "Gender", "Mood", "Number", "Person", "Tense", "Voice",
];

impl StandardRecord {
    pub fn empty(upos: Upos) -> Self {
        StandardRecord {
            upos,
            person: None,
            number: None,
            tense: None,
            mood: None,
            voice: None,
            gender: Vec::new(),
            case: None,
            degree: None,
        }
    }

    /// The value of one morphological feature as it appears in FEATS.
    pub fn feature(&self, name: &str) -> Option<String> {
        fn s<T: fmt::Display>(v: Option<T>) -> Option<String> {
            v.map(|v| v.to_string())
        }
        match name {
            "Case" => s(self.case),
            "Degree" => s(self.degree),
            "Gender" => (!self.gender.is_empty()).then(|| {
                self.gender
                    .iter()
                    .map(|g| g.as_str())
                    .collect::<Vec<_>>()
                    .join(",")
            }),
            "Mood" => s(self.mood),
            "Number" => s(self.number),
            "Person" => s(self.person),
            "Tense" => s(self.tense),
            "Voice" => s(self.voice),
            "UPOS" => Some(self.upos.to_string()),
            _ => None,
        }
    }

    pub fn to_features(&self) -> FeatureBundle {
        let mut f = FeatureBundle::new();
        for name in MORPH_FEATURES {
            if let Some(v) = self.feature(name) {
                f.set(name, v.split(',')).expect("tagset values are valid");
            }
        }
        f
    }

    /// Reads a record back from a standardized token. Features outside the
    /// nine are ignored; values outside the inventories are errors.
    pub fn from_token(token: &Token) -> Result<Self> {
        Self::from_parts(&token.upos, &token.feats)
    }

    pub fn from_parts(upos: &str, feats: &FeatureBundle) -> Result<Self> {
        fn one<T: FromStr<Err = Error>>(f: &FeatureBundle, name: &str) -> Result<Option<T>> {
            match f.get(name) {
                None => Ok(None),
                Some([v]) => v.parse().map(Some),
                Some(vs) => Err(Error::Feature(format!("{}={}", name, vs.join(",")))),
            }
        }
        let gender = feats
            .get("Gender")
            .unwrap_or_default()
            .iter()
            .map(|g| g.parse())
            .collect::<Result<Vec<Gender>>>()?;
        Ok(StandardRecord {
            upos: upos.parse()?,
            person: one(feats, "Person")?,
            number: one(feats, "Number")?,
            tense: one(feats, "Tense")?,
            mood: one(feats, "Mood")?,
            voice: one(feats, "Voice")?,
            gender,
            case: one(feats, "Case")?,
            degree: one(feats, "Degree")?,
        })
    }
}

/// Total map from (UD Tense, UD Aspect) to a traditional tense.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TenseAspectTable {
    // [tense index or 4 for None][aspect index or 4 for None]
    cells: [[Option<Tense>; 5]; 5],
}

fn tense_slot(t: Option<UdTense>) -> usize {
    t.map_or(4, |t| t as usize)
}

fn aspect_slot(a: Option<UdAspect>) -> usize {
    a.map_or(4, |a| a as usize)
}

impl Default for TenseAspectTable {
    fn default() -> Self {
        let mut cells = [[None; 5]; 5];
        for aspect in 0..5 {
            cells[UdTense::Pres as usize][aspect] = Some(Tense::Pres);
            cells[UdTense::Past as usize][aspect] = Some(Tense::Perf);
            cells[UdTense::Pqp as usize][aspect] = Some(Tense::Pqp);
            cells[UdTense::Fut as usize][aspect] = Some(Tense::Fut);
        }
        cells[UdTense::Past as usize][UdAspect::Imp as usize] = Some(Tense::Imp);
        cells[UdTense::Fut as usize][UdAspect::Perf as usize] = Some(Tense::FutP);
        TenseAspectTable { cells }
    }
}

impl TenseAspectTable {
    pub fn lookup(&self, tense: Option<UdTense>, aspect: Option<UdAspect>) -> Option<Tense> {
        self.cells[tense_slot(tense)][aspect_slot(aspect)]
    }

    pub fn set(&mut self, tense: Option<UdTense>, aspect: Option<UdAspect>, value: Option<Tense>) {
        self.cells[tense_slot(tense)][aspect_slot(aspect)] = value;
    }

    /// Applies overrides written as `"Tense,Aspect" = "Result"`, where any
    /// position may be `None`.
    pub fn with_overrides<'a, I>(mut self, overrides: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        fn opt<T: FromStr<Err = Error>>(s: &str) -> Result<Option<T>> {
            match s.trim() {
                "None" | "_" | "" => Ok(None),
                v => v.parse().map(Some),
            }
        }
        for (key, value) in overrides {
            let (t, a) = key
                .split_once(',')
                .ok_or_else(|| Error::Config(format!("tense table key {key:?} is not \"Tense,Aspect\"")))?;
            let bad = |e: Error| Error::Config(format!("tense table entry {key:?}: {e}"));
            self.set(opt(t).map_err(bad)?, opt(a).map_err(bad)?, opt(value).map_err(bad)?);
        }
        Ok(self)
    }
}

/// Problems found while standardizing a token. The token is still
/// converted; affected fields are left as None.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Anomaly {
    /// A verbal-only annotation (TraditionalMood) on a non-verbal UPOS.
    VerbalFeatureOnNonVerb,
    /// Both a finite Mood and a non-finite VerbForm; the finite Mood wins.
    MoodVerbFormConflict,
    /// A value the standard inventories do not know.
    UnknownValue { feature: String, value: String },
}

impl Anomaly {
    pub fn code(&self) -> String {
        match self {
            Anomaly::VerbalFeatureOnNonVerb => "VERBAL_FEATURE_ON_NON_VERB".into(),
            Anomaly::MoodVerbFormConflict => "MOOD_VERBFORM_CONFLICT".into(),
            Anomaly::UnknownValue { feature, value } => format!("UNKNOWN_VALUE:{feature}={value}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Standardized {
    pub record: StandardRecord,
    pub anomalies: Vec<Anomaly>,
}

/// Source annotation convention of a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// Harmonized UD treebanks.
    Ud,
    Lasla,
    /// Already standardized; the nine features are read back as they are.
    Standard,
}

impl FromStr for Flavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ud" => Ok(Flavor::Ud),
            "lasla" => Ok(Flavor::Lasla),
            "standard" | "std" => Ok(Flavor::Standard),
            _ => Err(Error::Config(format!("unknown flavor {s:?}"))),
        }
    }
}

fn traditional_tense(value: &str) -> Option<Tense> {
    Some(match value.to_ascii_lowercase().as_str() {
        "pres" | "praesens" => Tense::Pres,
        "imp" | "impf" | "imperfectum" => Tense::Imp,
        "perf" | "perfectum" => Tense::Perf,
        "pqp" | "plusquamperfectum" => Tense::Pqp,
        "fut" | "futurum" => Tense::Fut,
        "futp" | "futperf" | "futurum_exactum" | "futurumexactum" => Tense::FutP,
        _ => return None,
    })
}

fn traditional_mood(value: &str) -> Option<Mood> {
    Some(match value.to_ascii_lowercase().as_str() {
        "ind" | "indicativus" => Mood::Ind,
        "sub" | "subiunctivus" | "subjunctivus" | "coniunctivus" => Mood::Sub,
        "imp" | "imperativus" => Mood::Imp,
        "inf" | "infinitivus" => Mood::Inf,
        "part" | "participium" => Mood::Part,
        "ger" | "gerundium" => Mood::Ger,
        "gdv" | "gerundivum" => Mood::Gdv,
        "sup" | "supinum" => Mood::Sup,
        _ => return None,
    })
}

/// Reads a TraditionalTense/TraditionalMood key from MISC, falling back to
/// FEATS.
fn traditional<'a>(token: &'a Token, key: &str) -> Option<&'a str> {
    token.misc.get(key).or_else(|| token.feats.single(key))
}

struct Reader<'a> {
    feats: &'a FeatureBundle,
    anomalies: Vec<Anomaly>,
}

impl<'a> Reader<'a> {
    fn unknown(&mut self, feature: &str, value: &str) {
        self.anomalies.push(Anomaly::UnknownValue {
            feature: feature.to_string(),
            value: value.to_string(),
        });
    }

    fn parsed<T: FromStr>(&mut self, name: &str) -> Option<T> {
        let values = self.feats.get(name)?;
        match values {
            [v] => match v.parse() {
                Ok(x) => Some(x),
                Err(_) => {
                    self.unknown(name, v);
                    None
                }
            },
            _ => {
                self.unknown(name, &values.join(","));
                None
            }
        }
    }

    fn degree(&mut self) -> Option<Degree> {
        match self.feats.single("Degree") {
            Some("Pos") | Some("Dim") => None,
            _ => self.parsed("Degree"),
        }
    }

    fn gender(&mut self) -> Vec<Gender> {
        let mut out = Vec::new();
        for v in self.feats.get("Gender").unwrap_or_default() {
            match v.parse() {
                Ok(g) => out.push(g),
                Err(_) => self.unknown("Gender", v),
            }
        }
        out.sort();
        out
    }

    fn upos(&mut self, upos: &str) -> Upos {
        match upos.parse() {
            Ok(u) => u,
            Err(_) => {
                self.unknown("UPOS", upos);
                Upos::X
            }
        }
    }

    /// The seven features copied across unchanged (all but Tense and Mood).
    fn base(&mut self, upos: &str) -> StandardRecord {
        let mut r = StandardRecord::empty(self.upos(upos));
        r.person = self.parsed("Person");
        r.number = self.parsed("Number");
        r.voice = self.parsed("Voice");
        r.gender = self.gender();
        r.case = self.parsed("Case");
        r.degree = self.degree();
        r
    }

    fn non_finite_mood(&mut self, verbform: &str, ud: bool) -> Option<Mood> {
        match verbform {
            "Fin" => None,
            "Inf" => Some(Mood::Inf),
            "Ger" => Some(Mood::Ger),
            "Gdv" => Some(Mood::Gdv),
            "Sup" => Some(Mood::Sup),
            // Harmonized UD spells gerunds and supines with generic forms and
            // gerundives as prospective passive participles.
            "Vnoun" if ud => Some(Mood::Ger),
            "Conv" if ud => Some(Mood::Sup),
            "Part" => {
                let gerundive = ud
                    && self.feats.single("Aspect") == Some("Prosp")
                    && self.feats.single("Voice") == Some("Pass");
                Some(if gerundive { Mood::Gdv } else { Mood::Part })
            }
            other => {
                self.unknown("VerbForm", other);
                None
            }
        }
    }

    /// Mood from the finite Mood feature, else from VerbForm.
    fn composed_mood(&mut self, ud: bool) -> Option<Mood> {
        let finite: Option<Mood> = self.parsed("Mood");
        let non_finite = match self.feats.single("VerbForm") {
            Some(vf) => self.non_finite_mood(vf, ud),
            None => None,
        };
        match (finite, non_finite) {
            (Some(m), Some(_)) => {
                self.anomalies.push(Anomaly::MoodVerbFormConflict);
                Some(m)
            }
            (m, n) => m.or(n),
        }
    }

    fn table_tense(&mut self, table: &TenseAspectTable) -> Option<Tense> {
        let tense: Option<UdTense> = self.parsed("Tense");
        let aspect: Option<UdAspect> = self.parsed("Aspect");
        table.lookup(tense, aspect)
    }
}

fn is_verbal(upos: Upos) -> bool {
    matches!(upos, Upos::Verb | Upos::Aux)
}

/// Converts a token from a harmonized UD treebank.
pub fn standardize_ud(token: &Token, table: &TenseAspectTable) -> Standardized {
    let mut rd = Reader {
        feats: &token.feats,
        anomalies: Vec::new(),
    };
    let mut record = rd.base(&token.upos);
    let aspect = token.feats.single("Aspect");
    let is_inf = token.feats.single("VerbForm") == Some("Inf");

    record.tense = match traditional(token, "TraditionalTense") {
        Some(raw) => match traditional_tense(raw) {
            Some(Tense::Fut) if aspect == Some("Perf") => Some(Tense::FutP),
            Some(t) => Some(t),
            None => {
                rd.unknown("TraditionalTense", raw);
                None
            }
        },
        None if is_inf => match aspect {
            Some("Imp") => Some(Tense::Pres),
            Some("Perf") => Some(Tense::Perf),
            Some("Prosp") => Some(Tense::Fut),
            _ => rd.table_tense(table),
        },
        None => rd.table_tense(table),
    };

    let trad_mood = traditional(token, "TraditionalMood");
    record.mood = match trad_mood {
        Some(raw) => match traditional_mood(raw) {
            Some(m) => Some(m),
            None => {
                rd.unknown("TraditionalMood", raw);
                rd.composed_mood(true)
            }
        },
        None => rd.composed_mood(true),
    };

    if trad_mood.is_some() && !is_verbal(record.upos) {
        rd.anomalies.push(Anomaly::VerbalFeatureOnNonVerb);
        record.tense = None;
        record.mood = None;
    }

    Standardized {
        record,
        anomalies: rd.anomalies,
    }
}

/// Converts a token produced by the LASLA adapter.
pub fn standardize_lasla(token: &Token, table: &TenseAspectTable) -> Standardized {
    let mut rd = Reader {
        feats: &token.feats,
        anomalies: Vec::new(),
    };
    let mut record = rd.base(&token.upos);
    record.mood = rd.composed_mood(false);
    record.tense = rd.table_tense(table);
    Standardized {
        record,
        anomalies: rd.anomalies,
    }
}

/// Reads an already standardized token; unknown values become anomalies.
pub fn standardize_standard(token: &Token) -> Standardized {
    let mut rd = Reader {
        feats: &token.feats,
        anomalies: Vec::new(),
    };
    let mut record = rd.base(&token.upos);
    record.tense = rd.parsed("Tense");
    record.mood = rd.parsed("Mood");
    Standardized {
        record,
        anomalies: rd.anomalies,
    }
}

pub fn standardize(token: &Token, flavor: Flavor, table: &TenseAspectTable) -> Standardized {
    match flavor {
        Flavor::Ud => standardize_ud(token, table),
        Flavor::Lasla => standardize_lasla(token, table),
        Flavor::Standard => standardize_standard(token),
    }
}

/// Grammar rules a standardized record can break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Violation {
    /// A subordinating conjunction with Gender, Number or Case.
    SconjHasNominalFeats,
    /// A pronoun without Case or without Number.
    PronMissingNominalFeats,
    /// A verb with a tense but no mood.
    VerbTenseWithoutMood,
    /// A finite mood without Person.
    FiniteVerbMissingPerson,
    /// Tense, Mood or Voice on a noun-like UPOS.
    NominalHasVerbalFeats,
}

impl Violation {
    pub const ALL: [Violation; 5] = [
        Violation::SconjHasNominalFeats,
        Violation::PronMissingNominalFeats,
        Violation::VerbTenseWithoutMood,
        Violation::FiniteVerbMissingPerson,
        Violation::NominalHasVerbalFeats,
    ];

    pub const DEFAULT: [Violation; 3] = [
        Violation::SconjHasNominalFeats,
        Violation::PronMissingNominalFeats,
        Violation::VerbTenseWithoutMood,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Violation::SconjHasNominalFeats => "SCONJ_HAS_NOMINAL_FEATS",
            Violation::PronMissingNominalFeats => "PRON_MISSING_NOMINAL_FEATS",
            Violation::VerbTenseWithoutMood => "VERB_TENSE_WITHOUT_MOOD",
            Violation::FiniteVerbMissingPerson => "FINITE_VERB_MISSING_PERSON",
            Violation::NominalHasVerbalFeats => "NOMINAL_HAS_VERBAL_FEATS",
        }
    }

    fn holds(self, r: &StandardRecord) -> bool {
        match self {
            Violation::SconjHasNominalFeats => {
                r.upos == Upos::Sconj && (!r.gender.is_empty() || r.number.is_some() || r.case.is_some())
            }
            Violation::PronMissingNominalFeats => {
                r.upos == Upos::Pron && (r.case.is_none() || r.number.is_none())
            }
            Violation::VerbTenseWithoutMood => {
                r.upos == Upos::Verb && r.tense.is_some() && r.mood.is_none()
            }
            Violation::FiniteVerbMissingPerson => {
                r.mood.is_some_and(Mood::is_finite) && r.person.is_none()
            }
            Violation::NominalHasVerbalFeats => {
                matches!(r.upos, Upos::Noun | Upos::Propn | Upos::Pron)
                    && (r.tense.is_some() || r.mood.is_some() || r.voice.is_some())
            }
        }
    }
}

impl FromStr for Violation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Violation::ALL
            .into_iter()
            .find(|v| v.code() == s)
            .ok_or_else(|| Error::Config(format!("unknown lint rule {s:?}")))
    }
}

/// Checks a record against `rules`; an empty result means the record is legal.
pub fn legality_check(record: &StandardRecord, rules: &[Violation]) -> Vec<Violation> {
    rules.iter().copied().filter(|v| v.holds(record)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn token(upos: &str, feats: &str) -> Token {
        let mut t = Token::new(1, "x");
        t.upos = upos.into();
        t.feats = feats.parse().unwrap();
        t
    }

    fn ud(upos: &str, feats: &str) -> Standardized {
        standardize_ud(&token(upos, feats), &TenseAspectTable::default())
    }

    fn lasla(upos: &str, feats: &str) -> Standardized {
        standardize_lasla(&token(upos, feats), &TenseAspectTable::default())
    }

    #[test]
    fn future_perfect_from_aspect() {
        let s = ud("VERB", "Aspect=Perf|Mood=Ind|Number=Sing|Person=3|Tense=Fut|Voice=Act");
        let r = s.record;
        assert_eq!(r.tense, Some(Tense::FutP));
        assert_eq!(r.mood, Some(Mood::Ind));
        assert_eq!(r.voice, Some(Voice::Act));
        assert_eq!(r.person, Some(Person::Third));
        assert_eq!(r.number, Some(Number::Sing));
        assert!(s.anomalies.is_empty());
    }

    #[test]
    fn traditional_tense_future_split_by_aspect() {
        let mut t = token("VERB", "Aspect=Perf|Mood=Ind|Tense=Fut|VerbForm=Fin");
        t.misc.set("TraditionalTense", "Futurum");
        t.misc.set("TraditionalMood", "Indicativus");
        let r = standardize_ud(&t, &TenseAspectTable::default()).record;
        assert_eq!(r.tense, Some(Tense::FutP));
        assert_eq!(r.mood, Some(Mood::Ind));

        // The traditional field wins over Tense/Aspect otherwise.
        let mut t = token("VERB", "Aspect=Perf|Mood=Ind|Tense=Past|VerbForm=Fin");
        t.misc.set("TraditionalTense", "Imperfectum");
        assert_eq!(standardize_ud(&t, &TenseAspectTable::default()).record.tense, Some(Tense::Imp));
    }

    #[test]
    fn traditional_fields_may_sit_in_feats() {
        let t = token("VERB", "Mood=Sub|TraditionalMood=Subiunctivus|TraditionalTense=Plusquamperfectum");
        let r = standardize_ud(&t, &TenseAspectTable::default()).record;
        assert_eq!((r.tense, r.mood), (Some(Tense::Pqp), Some(Mood::Sub)));
    }

    #[test]
    fn infinitive_tense_from_aspect() {
        let r = ud("VERB", "Aspect=Perf|VerbForm=Inf|Voice=Act").record;
        assert_eq!((r.mood, r.tense), (Some(Mood::Inf), Some(Tense::Perf)));
        let r = ud("VERB", "Aspect=Imp|VerbForm=Inf|Voice=Pass").record;
        assert_eq!(r.tense, Some(Tense::Pres));
        let r = ud("VERB", "Aspect=Prosp|VerbForm=Inf").record;
        assert_eq!(r.tense, Some(Tense::Fut));
    }

    #[test]
    fn noun_keeps_nominal_features_only() {
        let s = ud("NOUN", "Case=Abl|Gender=Fem|Number=Sing");
        let r = s.record;
        assert_eq!(r.upos, Upos::Noun);
        assert_eq!(r.case, Some(Case::Abl));
        assert_eq!(r.gender, [Gender::Fem]);
        assert_eq!(r.number, Some(Number::Sing));
        assert_eq!((r.tense, r.mood, r.voice, r.person, r.degree), (None, None, None, None, None));
        assert!(s.anomalies.is_empty());
    }

    #[test]
    fn traditional_mood_on_noun_is_flagged() {
        let mut t = token("NOUN", "Case=Nom|Tense=Pres");
        t.misc.set("TraditionalMood", "Infinitivus");
        let s = standardize_ud(&t, &TenseAspectTable::default());
        assert_eq!(s.anomalies, [Anomaly::VerbalFeatureOnNonVerb]);
        assert_eq!((s.record.mood, s.record.tense), (None, None));
        assert_eq!(s.record.case, Some(Case::Nom));
    }

    #[test]
    fn ud_non_finite_forms() {
        assert_eq!(ud("VERB", "VerbForm=Vnoun|Case=Abl").record.mood, Some(Mood::Ger));
        assert_eq!(ud("VERB", "VerbForm=Conv|Aspect=Prosp").record.mood, Some(Mood::Sup));
        assert_eq!(
            ud("VERB", "Aspect=Prosp|VerbForm=Part|Voice=Pass").record.mood,
            Some(Mood::Gdv)
        );
        assert_eq!(
            ud("VERB", "Aspect=Prosp|VerbForm=Part|Voice=Act").record.mood,
            Some(Mood::Part)
        );
    }

    #[test]
    fn lasla_tense_from_table() {
        let r = lasla("VERB", "Aspect=Imp|Mood=Ind|Tense=Past").record;
        assert_eq!((r.tense, r.mood), (Some(Tense::Imp), Some(Mood::Ind)));
    }

    #[test]
    fn lasla_gerundive_routes_nominal_features() {
        let r = lasla("VERB", "Case=Acc|Gender=Neut|Number=Plur|VerbForm=Gdv").record;
        assert_eq!(r.mood, Some(Mood::Gdv));
        assert_eq!(r.case, Some(Case::Acc));
        assert_eq!(r.gender, [Gender::Neut]);
        assert_eq!(r.number, Some(Number::Plur));
    }

    #[test]
    fn lasla_multi_gender_and_positive_degree() {
        let r = lasla("ADJ", "Case=Nom|Degree=Pos|Gender=Fem,Masc,Neut").record;
        assert_eq!(r.degree, None);
        assert_eq!(r.gender, [Gender::Fem, Gender::Masc, Gender::Neut]);
        assert_eq!(r.feature("Gender").as_deref(), Some("Fem,Masc,Neut"));
        assert_eq!(ud("ADJ", "Degree=Dim").record.degree, None);
        assert_eq!(ud("ADJ", "Degree=Cmp").record.degree, Some(Degree::Cmp));
    }

    #[test]
    fn lasla_mood_conflict_prefers_finite() {
        let s = lasla("VERB", "Mood=Sub|VerbForm=Inf");
        assert_eq!(s.record.mood, Some(Mood::Sub));
        assert_eq!(s.anomalies, [Anomaly::MoodVerbFormConflict]);
    }

    #[test]
    fn unknown_values_are_reported() {
        let s = lasla("NOUN", "Case=Ins|Number=Plural");
        assert_eq!(s.record.case, None);
        assert_eq!(s.anomalies.len(), 2);
        assert_eq!(s.anomalies[0].code(), "UNKNOWN_VALUE:Number=Plural");
    }

    #[test]
    fn table_spot_checks_and_exhaustiveness() {
        let t = TenseAspectTable::default();
        assert_eq!(t.lookup(Some(UdTense::Fut), Some(UdAspect::Perf)), Some(Tense::FutP));
        assert_eq!(t.lookup(Some(UdTense::Past), Some(UdAspect::Imp)), Some(Tense::Imp));
        assert_eq!(t.lookup(Some(UdTense::Past), None), Some(Tense::Perf));
        assert_eq!(t.lookup(Some(UdTense::Past), Some(UdAspect::Inch)), Some(Tense::Perf));
        assert_eq!(t.lookup(Some(UdTense::Pqp), Some(UdAspect::Imp)), Some(Tense::Pqp));
        assert_eq!(t.lookup(Some(UdTense::Fut), Some(UdAspect::Inch)), Some(Tense::Fut));
        assert_eq!(t.lookup(None, Some(UdAspect::Perf)), None);
    }

    #[test]
    fn table_overrides() {
        let t = TenseAspectTable::default()
            .with_overrides([("Past,Prosp", "Fut"), ("None,Perf", "Perf")])
            .unwrap();
        assert_eq!(t.lookup(Some(UdTense::Past), Some(UdAspect::Prosp)), Some(Tense::Fut));
        assert_eq!(t.lookup(None, Some(UdAspect::Perf)), Some(Tense::Perf));
        assert!(TenseAspectTable::default().with_overrides([("Past", "Fut")]).is_err());
        assert!(TenseAspectTable::default().with_overrides([("Past,Imp", "Aorist")]).is_err());
    }

    #[test]
    fn legality_examples() {
        let mut r = StandardRecord::empty(Upos::Sconj);
        r.gender = vec![Gender::Neut];
        r.number = Some(Number::Sing);
        assert_eq!(legality_check(&r, &Violation::DEFAULT), [Violation::SconjHasNominalFeats]);

        let r = StandardRecord::empty(Upos::Pron);
        assert_eq!(legality_check(&r, &Violation::DEFAULT), [Violation::PronMissingNominalFeats]);

        assert!(legality_check(&StandardRecord::empty(Upos::Part), &Violation::ALL).is_empty());

        let mut r = StandardRecord::empty(Upos::Verb);
        r.tense = Some(Tense::Pres);
        assert_eq!(legality_check(&r, &Violation::DEFAULT), [Violation::VerbTenseWithoutMood]);
        assert_eq!(Violation::DEFAULT[0].code().parse::<Violation>().unwrap(), Violation::DEFAULT[0]);
    }

    #[test]
    fn mood_and_tense_imp_are_distinct() {
        let r = StandardRecord::from_parts("VERB", &"Mood=Imp|Tense=Imp".parse().unwrap()).unwrap();
        assert_eq!(r.mood, Some(Mood::Imp));
        assert_eq!(r.tense, Some(Tense::Imp));
        assert_eq!(r.to_features().to_string(), "Mood=Imp|Tense=Imp");
    }
}
