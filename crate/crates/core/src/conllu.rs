//! CoNLL-U reading and writing.
//!
//! The model is deliberately thin: columns that this toolkit never interprets
//! (XPOS, HEAD, DEPREL, DEPS) are carried as opaque strings, multiword-token
//! ranges and empty nodes are kept verbatim, and comments are stored as
//! written. Only FEATS and MISC are parsed, because the rest of the pipeline
//! needs to address individual features and MISC keys.

use std::cmp::Ordering;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Location, Result};

fn name_order(a: &str, b: &str) -> Ordering {
    a.to_lowercase()
        .cmp(&b.to_lowercase())
        .then_with(|| a.cmp(b))
}

/// Morphological features of one token.
///
/// Names are kept in case-insensitive order and every name carries a sorted,
/// de-duplicated, non-empty list of values. A feature that is absent has the
/// value "None" in the terminology of the metrics.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FeatureBundle {
    entries: Vec<(String, Vec<String>)>,
}

impl FeatureBundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    fn position(&self, name: &str) -> std::result::Result<usize, usize> {
        self.entries
            .binary_search_by(|(n, _)| name_order(n, name))
    }

    pub fn get(&self, name: &str) -> Option<&[String]> {
        self.position(name)
            .ok()
            .map(|i| self.entries[i].1.as_slice())
    }

    /// The single value of `name`, or `None` if the feature is absent or
    /// carries more than one value.
    pub fn single(&self, name: &str) -> Option<&str> {
        match self.get(name) {
            Some([v]) => Some(v.as_str()),
            _ => None,
        }
    }

    /// All values joined with commas, as they appear in the FEATS column.
    pub fn joined(&self, name: &str) -> Option<String> {
        self.get(name).map(|vs| vs.join(","))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_ok()
    }

    /// Sets `name` to the given values, replacing any previous ones.
    /// An empty value list removes the feature.
    pub fn set<I, S>(&mut self, name: &str, values: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if name.is_empty() || name.contains(['=', '|', '\t']) {
            return Err(Error::Feature(name.to_string()));
        }
        let mut values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values
            .iter()
            .any(|v| v.is_empty() || v.contains([',', '|', '=', '\t']))
        {
            return Err(Error::Feature(format!("{}={}", name, values.join(","))));
        }
        values.sort_by(|a, b| name_order(a, b));
        values.dedup();
        match (self.position(name), values.is_empty()) {
            (Ok(i), true) => {
                self.entries.remove(i);
            }
            (Ok(i), false) => self.entries[i].1 = values,
            (Err(_), true) => {}
            (Err(i), false) => self.entries.insert(i, (name.to_string(), values)),
        }
        Ok(())
    }

    pub fn insert(&mut self, name: &str, value: &str) -> Result<()> {
        self.set(name, [value])
    }

    pub fn remove(&mut self, name: &str) -> Option<Vec<String>> {
        self.position(name).ok().map(|i| self.entries.remove(i).1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.entries
            .iter()
            .map(|(n, v)| (n.as_str(), v.as_slice()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }
}

impl FromStr for FeatureBundle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bundle = FeatureBundle::new();
        if s == "_" || s.is_empty() {
            return Ok(bundle);
        }
        for part in s.split('|') {
            let (name, values) = part
                .split_once('=')
                .ok_or_else(|| Error::Feature(s.to_string()))?;
            if name.is_empty() || values.is_empty() || bundle.contains(name) {
                return Err(Error::Feature(s.to_string()));
            }
            bundle.set(name, values.split(','))?;
        }
        Ok(bundle)
    }
}

impl fmt::Display for FeatureBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("_");
        }
        for (i, (name, values)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{}={}", name, values.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MiscEntry {
    Pair(String, String),
    /// A fragment without `key=value` shape, kept for round-tripping.
    Opaque(String),
}

/// The MISC column: ordered, duplicate-free key/value pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Misc {
    entries: Vec<MiscEntry>,
}

impl Misc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find_map(|e| match e {
            MiscEntry::Pair(k, v) if k == key => Some(v.as_str()),
            _ => None,
        })
    }

    /// Replaces the value of `key` in place or appends it.
    pub fn set(&mut self, key: &str, value: &str) {
        for e in &mut self.entries {
            if let MiscEntry::Pair(k, v) = e {
                if k == key {
                    *v = value.to_string();
                    return;
                }
            }
        }
        self.entries
            .push(MiscEntry::Pair(key.to_string(), value.to_string()));
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        let i = self
            .entries
            .iter()
            .position(|e| matches!(e, MiscEntry::Pair(k, _) if k == key))?;
        match self.entries.remove(i) {
            MiscEntry::Pair(_, v) => Some(v),
            MiscEntry::Opaque(_) => unreachable!(),
        }
    }

    pub fn entries(&self) -> &[MiscEntry] {
        &self.entries
    }

    fn parse(s: &str, location: impl Fn() -> Location) -> Result<Self> {
        let mut misc = Misc::new();
        if s == "_" || s.is_empty() {
            return Ok(misc);
        }
        for part in s.split('|') {
            match part.split_once('=') {
                Some((k, v)) if !k.is_empty() => {
                    if misc.get(k).is_some() {
                        return Err(Error::DuplicateMiscKey {
                            location: location(),
                            key: k.to_string(),
                        });
                    }
                    misc.entries
                        .push(MiscEntry::Pair(k.to_string(), v.to_string()));
                }
                _ => misc.entries.push(MiscEntry::Opaque(part.to_string())),
            }
        }
        Ok(misc)
    }
}

impl fmt::Display for Misc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("_");
        }
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            match e {
                MiscEntry::Pair(k, v) => write!(f, "{}={}", k, v)?,
                MiscEntry::Opaque(s) => f.write_str(s)?,
            }
        }
        Ok(())
    }
}

/// One syntactic word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub id: u32,
    pub form: String,
    pub lemma: String,
    /// UPOS tag, `_` when unannotated.
    pub upos: String,
    pub xpos: Option<String>,
    pub feats: FeatureBundle,
    pub head: Option<String>,
    pub deprel: Option<String>,
    pub deps: Option<String>,
    pub misc: Misc,
}

impl Token {
    pub fn new(id: u32, form: impl Into<String>) -> Self {
        Token {
            id,
            form: form.into(),
            lemma: "_".to_string(),
            upos: "_".to_string(),
            xpos: None,
            feats: FeatureBundle::new(),
            head: None,
            deprel: None,
            deps: None,
            misc: Misc::new(),
        }
    }
}

/// A line of a sentence body.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Word(Token),
    /// Multiword-token range such as `3-4`, kept verbatim.
    Multiword(String),
    /// Empty node such as `3.1`, kept verbatim.
    Empty(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Sentence {
    /// Comment lines without the leading `#`.
    pub comments: Vec<String>,
    pub nodes: Vec<Node>,
}

fn comment_value<'a>(comment: &'a str, key: &str) -> Option<&'a str> {
    let (k, v) = comment.split_once('=')?;
    (k.trim() == key).then(|| v.trim())
}

impl Sentence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Value of a `# key = value` comment.
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.comments.iter().find_map(|c| comment_value(c, key))
    }

    /// Sets a `# key = value` comment, replacing an existing one in place.
    pub fn set_meta(&mut self, key: &str, value: &str) {
        let line = format!(" {} = {}", key, value);
        match self
            .comments
            .iter()
            .position(|c| comment_value(c, key).is_some())
        {
            Some(i) => self.comments[i] = line,
            None => self.comments.push(line),
        }
    }

    pub fn sent_id(&self) -> Option<&str> {
        self.meta("sent_id")
    }

    pub fn text(&self) -> Option<&str> {
        self.meta("text")
    }

    pub fn doc_id(&self) -> Option<&str> {
        self.meta("newdoc id").or_else(|| self.meta("doc_id"))
    }

    /// The work this sentence belongs to: an explicit `work_id` comment,
    /// falling back to the document id.
    pub fn work_id(&self) -> Option<&str> {
        self.meta("work_id").or_else(|| self.doc_id())
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Word(t) => Some(t),
            _ => None,
        })
    }

    pub fn tokens_mut(&mut self) -> impl Iterator<Item = &mut Token> {
        self.nodes.iter_mut().filter_map(|n| match n {
            Node::Word(t) => Some(t),
            _ => None,
        })
    }

    pub fn token_count(&self) -> usize {
        self.tokens().count()
    }

    pub fn push(&mut self, token: Token) {
        self.nodes.push(Node::Word(token));
    }
}

fn opt(col: &str) -> Option<String> {
    (col != "_").then(|| col.to_string())
}

fn parse_word(cols: &[&str], location: &dyn Fn() -> Location) -> Result<Token> {
    let id = cols[0].parse::<u32>().ok().filter(|&i| i >= 1).ok_or_else(|| {
        Error::Malformed {
            location: location(),
            field: "ID",
            value: cols[0].to_string(),
        }
    })?;
    let feats = cols[5].parse::<FeatureBundle>().map_err(|_| Error::Malformed {
        location: location(),
        field: "FEATS",
        value: cols[5].to_string(),
    })?;
    Ok(Token {
        id,
        form: cols[1].to_string(),
        lemma: cols[2].to_string(),
        upos: cols[3].to_string(),
        xpos: opt(cols[4]),
        feats,
        head: opt(cols[6]),
        deprel: opt(cols[7]),
        deps: opt(cols[8]),
        misc: Misc::parse(cols[9], location)?,
    })
}

fn is_range(id: &str) -> bool {
    matches!(id.split_once('-'), Some((a, b)) if a.parse::<u32>().is_ok() && b.parse::<u32>().is_ok())
}

fn is_empty_node(id: &str) -> bool {
    matches!(id.split_once('.'), Some((a, b)) if a.parse::<u32>().is_ok() && b.parse::<u32>().is_ok())
}

struct Builder {
    sentences: Vec<Sentence>,
    current: Sentence,
    last_id: u32,
    started: bool,
}

impl Builder {
    fn flush(&mut self) {
        if self.started {
            self.sentences.push(std::mem::take(&mut self.current));
        }
        self.started = false;
        self.last_id = 0;
    }
}

/// Parses a CoNLL-U stream.
pub fn parse_conllu<R: BufRead>(reader: R) -> Result<Vec<Sentence>> {
    let mut b = Builder {
        sentences: Vec::new(),
        current: Sentence::new(),
        last_id: 0,
        started: false,
    };
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        let lineno = n + 1;
        if line.trim().is_empty() {
            b.flush();
            continue;
        }
        b.started = true;
        if let Some(comment) = line.strip_prefix('#') {
            b.current.comments.push(comment.to_string());
            continue;
        }
        let sent_id = b.current.sent_id().map(str::to_string);
        let location = || Location {
            line: lineno,
            sent_id: sent_id.clone(),
        };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::ColumnCount {
                location: location(),
                found: cols.len(),
            });
        }
        if is_range(cols[0]) {
            b.current.nodes.push(Node::Multiword(line.to_string()));
        } else if is_empty_node(cols[0]) {
            b.current.nodes.push(Node::Empty(line.to_string()));
        } else {
            let token = parse_word(&cols, &location)?;
            if token.id <= b.last_id {
                return Err(Error::NonMonotonicId {
                    location: location(),
                    id: token.id,
                    previous: b.last_id,
                });
            }
            b.last_id = token.id;
            b.current.nodes.push(Node::Word(token));
        }
    }
    b.flush();
    Ok(b.sentences)
}

pub fn parse_conllu_str(input: &str) -> Result<Vec<Sentence>> {
    parse_conllu(input.as_bytes())
}

fn col(value: &Option<String>) -> &str {
    value.as_deref().unwrap_or("_")
}

pub fn write_token<W: Write>(out: &mut W, t: &Token) -> std::io::Result<()> {
    writeln!(
        out,
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        t.id,
        t.form,
        t.lemma,
        t.upos,
        col(&t.xpos),
        t.feats,
        col(&t.head),
        col(&t.deprel),
        col(&t.deps),
        t.misc
    )
}

/// Writes sentences in canonical CoNLL-U form, each followed by a blank line.
pub fn write_conllu<W: Write>(out: &mut W, sentences: &[Sentence]) -> std::io::Result<()> {
    for s in sentences {
        for c in &s.comments {
            writeln!(out, "#{}", c)?;
        }
        for node in &s.nodes {
            match node {
                Node::Word(t) => write_token(out, t)?,
                Node::Multiword(raw) | Node::Empty(raw) => writeln!(out, "{}", raw)?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn serialize_conllu(sentences: &[Sentence]) -> String {
    let mut buf = Vec::new();
    write_conllu(&mut buf, sentences).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("all parts are UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_word_line() {
        let s = parse_conllu_str("1\tarma\tarma\tNOUN\t_\tCase=Acc|Number=Plur\t_\t_\t_\t_\n")
            .unwrap();
        let t = s[0].tokens().next().unwrap();
        assert_eq!(t.id, 1);
        assert_eq!(t.form, "arma");
        assert_eq!(t.upos, "NOUN");
        assert_eq!(t.feats.single("Case"), Some("Acc"));
        assert_eq!(t.feats.single("Number"), Some("Plur"));
        assert_eq!(t.xpos, None);
        assert!(t.misc.is_empty());
    }

    #[test]
    fn multi_valued_gender() {
        let f: FeatureBundle = "Gender=Fem,Masc".parse().unwrap();
        assert_eq!(f.get("Gender").unwrap(), ["Fem", "Masc"]);
        let f: FeatureBundle = "Gender=Masc,Fem".parse().unwrap();
        assert_eq!(f.to_string(), "Gender=Fem,Masc");
    }

    #[test]
    fn canonical_feature_order() {
        let mut f = FeatureBundle::new();
        f.insert("Number", "Sing").unwrap();
        f.insert("Case", "Nom").unwrap();
        assert_eq!(f.to_string(), "Case=Nom|Number=Sing");
        assert_eq!(FeatureBundle::new().to_string(), "_");
        let f: FeatureBundle = "Number[psor]=Sing|number=x|Case=Nom".parse().unwrap();
        assert_eq!(f.to_string(), "Case=Nom|number=x|Number[psor]=Sing");
    }

    #[test]
    fn rejects_bad_features() {
        for bad in ["Case", "=Nom", "Case=", "Case=Nom|Case=Acc", "Case=Nom,"] {
            assert!(bad.parse::<FeatureBundle>().is_err(), "{bad}");
        }
    }

    #[test]
    fn misc_keys_round_trip() {
        let mut t = Token::new(1, "amauit");
        t.misc.set("TraditionalMood", "Ind");
        let mut s = Sentence::new();
        s.push(t);
        let text = serialize_conllu(&[s.clone()]);
        assert!(text.contains("\tTraditionalMood=Ind\n"));
        assert_eq!(parse_conllu_str(&text).unwrap(), vec![s]);
    }

    #[test]
    fn opaque_misc_survives() {
        let line = "1\ta\ta\tX\t_\t_\t_\t_\t_\tSpaceAfter=No|weird|k=v=w\n";
        let s = parse_conllu_str(line).unwrap();
        let t = s[0].tokens().next().unwrap();
        assert_eq!(t.misc.get("k"), Some("v=w"));
        assert_eq!(t.misc.entries()[1], MiscEntry::Opaque("weird".into()));
        assert_eq!(serialize_conllu(&s), line.to_string() + "\n");
    }

    #[test]
    fn duplicate_misc_key_is_an_error() {
        let err = parse_conllu_str("1\ta\ta\tX\t_\t_\t_\t_\t_\tA=1|A=2\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateMiscKey { .. }));
    }

    #[test]
    fn column_count_error_has_line_and_sentence() {
        let input = "# sent_id = s1\n1\ta\ta\tX\t_\t_\t_\t_\t_\t_\n2\tb\tb\tX\n";
        match parse_conllu_str(input).unwrap_err() {
            Error::ColumnCount { location, found } => {
                assert_eq!(location.line, 3);
                assert_eq!(location.sent_id.as_deref(), Some("s1"));
                assert_eq!(found, 4);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn non_monotonic_ids() {
        let input = "# sent_id = s9\n1\ta\ta\tX\t_\t_\t_\t_\t_\t_\n1\tb\tb\tX\t_\t_\t_\t_\t_\t_\n";
        match parse_conllu_str(input).unwrap_err() {
            Error::NonMonotonicId { location, id, previous } => {
                assert_eq!((id, previous), (1, 1));
                assert_eq!(location.sent_id.as_deref(), Some("s9"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn multiword_and_empty_nodes_pass_through() {
        let input = "# sent_id = a\n# text = nobiscum\n1-2\tnobiscum\t_\t_\t_\t_\t_\t_\t_\t_\n1\tnobis\tnos\tPRON\t_\tCase=Abl\t_\t_\t_\t_\n2\tcum\tcum\tADP\t_\t_\t_\t_\t_\t_\n2.1\tx\tx\tX\t_\t_\t_\t_\t_\t_\n\n";
        let s = parse_conllu_str(input).unwrap();
        assert_eq!(s[0].token_count(), 2);
        assert_eq!(s[0].nodes.len(), 4);
        assert_eq!(s[0].text(), Some("nobiscum"));
        assert_eq!(serialize_conllu(&s), input);
    }

    #[test]
    fn metadata_comments() {
        let mut s = Sentence::new();
        s.comments.push(" newdoc id = caesar-bg".into());
        assert_eq!(s.work_id(), Some("caesar-bg"));
        s.set_meta("work_id", "BellumGallicum");
        s.set_meta("sent_id", "x1");
        s.set_meta("sent_id", "x2");
        assert_eq!(s.work_id(), Some("BellumGallicum"));
        assert_eq!(s.sent_id(), Some("x2"));
        assert_eq!(s.comments.len(), 3);
    }

    #[test]
    fn tolerates_crlf_and_missing_final_blank_line() {
        let s = parse_conllu_str("1\ta\ta\tX\t_\t_\t_\t_\t_\t_\r\n\r\n\n1\tb\tb\tX\t_\t_\t_\t_\t_\t_").unwrap();
        assert_eq!(s.len(), 2);
    }
}
