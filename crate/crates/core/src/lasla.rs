//! Ingestion of LASLA exports.
//!
//! LASLA has no single published file layout, so ingestion is driven by a
//! [`ColumnMapping`]. The default mapping reads a CoNLL-U-like export; other
//! delimited layouts only need a different mapping file.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conllu::{FeatureBundle, Sentence, Token};
use crate::error::{Error, Result};

/// Where each internal field comes from in a LASLA row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMapping {
    /// Field separator; a tab unless configured otherwise.
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    /// Column holding the token index. Tokens are numbered 1.. when absent.
    #[serde(default)]
    pub id: Option<usize>,
    pub form: Option<usize>,
    pub lemma: Option<usize>,
    pub upos: Option<usize>,
    #[serde(default)]
    pub xpos: Option<usize>,
    pub feats: Option<usize>,
    /// Column whose value changes at every sentence boundary. When absent,
    /// sentences are separated by blank lines.
    #[serde(default)]
    pub sentence: Option<usize>,
    /// Feature name renames, e.g. a source-specific name to the UD one.
    #[serde(default)]
    pub feature_renames: BTreeMap<String, String>,
    /// Per-feature value renames, keyed by the (renamed) feature name.
    #[serde(default)]
    pub value_renames: BTreeMap<String, BTreeMap<String, String>>,
    /// Known values per feature. Values outside this set (and not renamed)
    /// are passed through and counted as warnings. Features not listed
    /// here are not checked.
    #[serde(default = "default_known_values")]
    pub known_values: BTreeMap<String, BTreeSet<String>>,
}

fn default_delimiter() -> char {
    '\t'
}

fn default_known_values() -> BTreeMap<String, BTreeSet<String>> {
    let table: &[(&str, &[&str])] = &[
        ("Aspect", &["Imp", "Perf", "Prosp", "Inch"]),
        ("Case", &["Nom", "Gen", "Dat", "Acc", "Abl", "Voc", "Loc"]),
        ("Degree", &["Pos", "Cmp", "Abs", "Dim"]),
        ("Gender", &["Masc", "Fem", "Neut"]),
        ("Mood", &["Ind", "Sub", "Imp"]),
        ("Number", &["Sing", "Plur"]),
        ("Person", &["1", "2", "3"]),
        ("Tense", &["Pres", "Past", "Fut", "Pqp"]),
        ("VerbForm", &["Fin", "Inf", "Part", "Ger", "Gdv", "Sup"]),
        ("Voice", &["Act", "Pass"]),
    ];
    table
        .iter()
        .map(|(f, vs)| (f.to_string(), vs.iter().map(|v| v.to_string()).collect()))
        .collect()
}

impl Default for ColumnMapping {
    fn default() -> Self {
        let mut value_renames = BTreeMap::new();
        value_renames.insert(
            "Number".to_string(),
            BTreeMap::from([("Plural".to_string(), "Plur".to_string())]),
        );
        ColumnMapping {
            delimiter: '\t',
            id: Some(0),
            form: Some(1),
            lemma: Some(2),
            upos: Some(3),
            xpos: Some(4),
            feats: Some(5),
            sentence: None,
            feature_renames: BTreeMap::new(),
            value_renames,
            known_values: default_known_values(),
        }
    }
}

impl ColumnMapping {
    pub fn from_toml(text: &str) -> Result<Self> {
        let m: ColumnMapping =
            toml::from_str(text).map_err(|e| Error::Config(format!("LASLA mapping: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        Self::from_toml(&text).map_err(|e| e.in_file(path))
    }

    pub fn validate(&self) -> Result<()> {
        let mandatory = [
            ("form", self.form),
            ("lemma", self.lemma),
            ("upos", self.upos),
            ("feats", self.feats),
        ];
        let mut seen = HashMap::new();
        for (name, col) in mandatory {
            let col = col.ok_or_else(|| Error::Config(format!("LASLA mapping: no column for {name}")))?;
            if let Some(other) = seen.insert(col, name) {
                return Err(Error::Config(format!(
                    "LASLA mapping: column {col} assigned to both {other} and {name}"
                )));
            }
        }
        let mut targets = HashMap::new();
        for (from, to) in &self.feature_renames {
            if let Some(prev) = targets.insert(to, from) {
                return Err(Error::Config(format!(
                    "LASLA mapping: features {prev:?} and {from:?} both renamed to {to:?}"
                )));
            }
        }
        for (feature, table) in &self.value_renames {
            let mut targets = HashMap::new();
            for (from, to) in table {
                if let Some(prev) = targets.insert(to, from) {
                    return Err(Error::Config(format!(
                        "LASLA mapping: {feature} values {prev:?} and {from:?} both renamed to {to:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn width(&self) -> usize {
        [self.id, self.form, self.lemma, self.upos, self.xpos, self.feats, self.sentence]
            .into_iter()
            .flatten()
            .max()
            .map_or(0, |m| m + 1)
    }
}

/// An unknown value seen while ingesting one file, with its frequency.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ValueWarning {
    pub feature: String,
    pub value: String,
    pub count: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub sentences: Vec<Sentence>,
    pub warnings: Vec<ValueWarning>,
}

struct State<'m> {
    mapping: &'m ColumnMapping,
    work_id: &'m str,
    sentences: Vec<Sentence>,
    current: Sentence,
    pending_comments: Vec<String>,
    next_id: u32,
    sentence_key: Option<String>,
    unknown: BTreeMap<(String, String), usize>,
}

impl State<'_> {
    fn flush(&mut self) {
        if self.current.nodes.is_empty() {
            return;
        }
        let mut s = std::mem::take(&mut self.current);
        let mut comments = std::mem::take(&mut self.pending_comments);
        comments.append(&mut s.comments);
        s.comments = comments;
        if s.sent_id().is_none() {
            let n = self.sentences.len() + 1;
            s.set_meta("sent_id", &format!("{}-{}", self.work_id, n));
        }
        if s.meta("work_id").is_none() {
            s.set_meta("work_id", self.work_id);
        }
        self.sentences.push(s);
        self.next_id = 1;
    }

    fn features(&mut self, cell: &str, line: usize) -> Result<FeatureBundle> {
        let mut out = FeatureBundle::new();
        let cell = cell.trim();
        if cell.is_empty() || cell == "_" {
            return Ok(out);
        }
        let raw: FeatureBundle = cell.parse().map_err(|_| Error::Malformed {
            location: crate::error::Location { line, sent_id: None },
            field: "FEATS",
            value: cell.to_string(),
        })?;
        for (name, values) in raw.iter() {
            let name = self
                .mapping
                .feature_renames
                .get(name)
                .map_or(name, String::as_str);
            let renames = self.mapping.value_renames.get(name);
            let known = self.mapping.known_values.get(name);
            let mut mapped = Vec::with_capacity(values.len());
            for v in values {
                let v = match renames.and_then(|r| r.get(v)) {
                    Some(to) => to.clone(),
                    None => {
                        if known.is_some_and(|k| !k.contains(v)) {
                            *self
                                .unknown
                                .entry((name.to_string(), v.clone()))
                                .or_default() += 1;
                        }
                        v.clone()
                    }
                };
                mapped.push(v);
            }
            let mut all = out.get(name).map(<[String]>::to_vec).unwrap_or_default();
            all.extend(mapped);
            out.set(name, all)?;
        }
        Ok(out)
    }
}

fn cell<'a>(cols: &[&'a str], idx: Option<usize>) -> Option<&'a str> {
    idx.and_then(|i| cols.get(i).copied())
        .map(str::trim)
        .filter(|c| !c.is_empty() && *c != "_")
}

/// Reads one LASLA file. `work_id` records provenance on every sentence
/// that does not carry its own `work_id` comment.
pub fn ingest_lasla<R: BufRead>(reader: R, mapping: &ColumnMapping, work_id: &str) -> Result<Ingested> {
    mapping.validate()?;
    let width = mapping.width();
    let mut st = State {
        mapping,
        work_id,
        sentences: Vec::new(),
        current: Sentence::new(),
        pending_comments: Vec::new(),
        next_id: 1,
        sentence_key: None,
        unknown: BTreeMap::new(),
    };
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        let lineno = n + 1;
        if line.trim().is_empty() {
            if mapping.sentence.is_none() {
                st.flush();
            }
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if mapping.sentence.is_none() {
                st.current.comments.push(c.to_string());
            } else {
                st.pending_comments.push(c.to_string());
            }
            continue;
        }
        let cols: Vec<&str> = line.split(mapping.delimiter).collect();
        if cols.len() < width {
            return Err(Error::ColumnCount {
                location: crate::error::Location { line: lineno, sent_id: None },
                found: cols.len(),
            });
        }
        if let Some(key_col) = mapping.sentence {
            let key = cols[key_col].trim().to_string();
            if st.sentence_key.as_ref() != Some(&key) {
                st.flush();
                st.sentence_key = Some(key);
            }
        }
        // Ranges and empty nodes have no place in LASLA data.
        if let Some(raw_id) = cell(&cols, mapping.id) {
            if raw_id.contains(['-', '.']) {
                continue;
            }
        }
        let id = st.next_id;
        st.next_id += 1;
        let mut token = Token::new(id, cols[mapping.form.unwrap_or(0)].trim());
        token.lemma = cell(&cols, mapping.lemma).unwrap_or("_").to_string();
        token.upos = cell(&cols, mapping.upos).unwrap_or("_").to_string();
        token.xpos = cell(&cols, mapping.xpos).map(str::to_string);
        token.feats = st.features(cell(&cols, mapping.feats).unwrap_or("_"), lineno)?;
        st.current.push(token);
    }
    st.flush();
    let warnings = st
        .unknown
        .into_iter()
        .map(|((feature, value), count)| ValueWarning { feature, value, count })
        .collect();
    Ok(Ingested {
        sentences: st.sentences,
        warnings,
    })
}

/// Reads a LASLA file, using the file stem as the work id.
pub fn ingest_lasla_file(path: &Path, mapping: &ColumnMapping) -> Result<Ingested> {
    let work_id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("lasla")
        .to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    ingest_lasla(std::io::BufReader::new(file), mapping, &work_id).map_err(|e| e.in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ingest(text: &str) -> Ingested {
        ingest_lasla(text.as_bytes(), &ColumnMapping::default(), "Caes_BG").unwrap()
    }

    #[test]
    fn multi_gender_and_renamed_number() {
        let out = ingest(
            "1\tomnes\tomnis\tADJ\t_\tCase=Nom|Gender=Fem,Masc,Neut|Number=Plural\n2\tGalli\tGallus\tPROPN\t_\t_\n\n",
        );
        let t: Vec<_> = out.sentences[0].tokens().collect();
        assert_eq!(t[0].feats.get("Gender").unwrap(), ["Fem", "Masc", "Neut"]);
        assert_eq!(t[0].feats.single("Number"), Some("Plur"));
        assert!(t[1].feats.is_empty());
        assert!(out.warnings.is_empty());
        assert_eq!(out.sentences[0].work_id(), Some("Caes_BG"));
        assert_eq!(out.sentences[0].sent_id(), Some("Caes_BG-1"));
        assert_eq!(t[0].head, None);
    }

    #[test]
    fn keeps_latin_verbforms_and_counts_unknown_values() {
        let out = ingest(
            "1\tamandi\tamo\tVERB\t_\tCase=Gen|VerbForm=Ger\n2\tx\tx\tNOUN\t_\tCase=Ins\n\n1\ty\ty\tNOUN\t_\tCase=Ins\n",
        );
        assert_eq!(out.sentences.len(), 2);
        assert_eq!(out.sentences[0].tokens().next().unwrap().feats.single("VerbForm"), Some("Ger"));
        assert_eq!(
            out.warnings,
            [ValueWarning { feature: "Case".into(), value: "Ins".into(), count: 2 }]
        );
        // Unknown values are passed through.
        assert_eq!(out.sentences[1].tokens().next().unwrap().feats.single("Case"), Some("Ins"));
    }

    #[test]
    fn columnar_variant_with_sentence_column() {
        let mapping = ColumnMapping::from_toml(
            r#"
            delimiter = ","
            sentence = 0
            form = 1
            lemma = 2
            upos = 3
            feats = 4
            [feature_renames]
            Genus = "Gender"
            [value_renames.Gender]
            F = "Fem"
            M = "Masc"
            "#,
        )
        .unwrap();
        let out = ingest_lasla(
            "s1,Arma,arma,NOUN,Case=Acc|Genus=F\ns1,uirum,uir,NOUN,Genus=M\ns2,cano,cano,VERB,_\n".as_bytes(),
            &mapping,
            "Verg_Aen",
        )
        .unwrap();
        assert_eq!(out.sentences.len(), 2);
        let t: Vec<_> = out.sentences[0].tokens().collect();
        assert_eq!(t[0].feats.to_string(), "Case=Acc|Gender=Fem");
        assert_eq!(t[1].id, 2);
        assert_eq!(out.sentences[1].tokens().next().unwrap().id, 1);
    }

    #[test]
    fn mapping_validation() {
        let mut m = ColumnMapping::default();
        m.lemma = None;
        assert!(matches!(m.validate(), Err(Error::Config(_))));
        let mut m = ColumnMapping::default();
        m.lemma = m.form;
        assert!(m.validate().is_err());
        let mut m = ColumnMapping::default();
        m.value_renames.insert(
            "Gender".into(),
            BTreeMap::from([("F".into(), "Fem".into()), ("f".into(), "Fem".into())]),
        );
        assert!(m.validate().is_err());
        assert!(ColumnMapping::from_toml("form = 0\nlemma = 1\nupos = 2\n").is_err());
    }
}
