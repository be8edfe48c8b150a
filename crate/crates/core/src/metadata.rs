//! Per-work metadata: source treebank, author, century, genres and
//! sentence counts, stored as a tab-separated table with a header row.
//!
//! Columns, in canonical order:
//!
//! ```text
//! treebank  work_id  author  century  is_bible  genres  train  dev  test
//! ```
//!
//! `century` is signed (`-1` is the 1st century BCE, `1` the 1st century
//! CE; there is no century 0). `genres` is a comma-separated list drawn
//! from the twelve labels in [`GENRES`]. Rows are emitted sorted by
//! treebank (in [`Treebank`] order) and then by work id.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Treebank {
    Perseus,
    #[serde(rename = "PROIEL")]
    Proiel,
    #[serde(rename = "LLCT")]
    Llct,
    #[serde(rename = "ITTB")]
    Ittb,
    #[serde(rename = "UDante")]
    UDante,
    #[serde(rename = "LASLA")]
    Lasla,
}

impl Treebank {
    pub const ALL: [Treebank; 6] = [
        Treebank::Perseus,
        Treebank::Proiel,
        Treebank::Llct,
        Treebank::Ittb,
        Treebank::UDante,
        Treebank::Lasla,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Treebank::Perseus => "Perseus",
            Treebank::Proiel => "PROIEL",
            Treebank::Llct => "LLCT",
            Treebank::Ittb => "ITTB",
            Treebank::UDante => "UDante",
            Treebank::Lasla => "LASLA",
        }
    }

    pub fn is_ud(self) -> bool {
        self != Treebank::Lasla
    }
}

impl fmt::Display for Treebank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Treebank {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Treebank::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown treebank {s:?}")))
    }
}

pub const GENRES: [&str; 12] = [
    "narrative", "poem", "short poem", "letter", "epic", "history", "satire", "speech",
    "treatise", "Christian", "Bible", "legal",
];

/// Genres of which a text carries at most one.
pub const EXCLUSIVE_GENRES: [&str; 9] = [
    "short poem", "epic", "letter", "history", "satire", "speech", "legal", "treatise", "Bible",
];

pub const MIN_CENTURY: i32 = -3;
pub const MAX_CENTURY: i32 = 14;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextMetadata {
    pub treebank: Treebank,
    pub work_id: String,
    pub author: String,
    pub century: i32,
    pub is_bible: bool,
    pub genres: Vec<String>,
    pub train: u64,
    pub dev: u64,
    pub test: u64,
}

impl TextMetadata {
    pub fn sentences(&self) -> u64 {
        self.train + self.dev + self.test
    }

    pub fn has_genre(&self, genre: &str) -> bool {
        self.genres.iter().any(|g| g == genre)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TimePeriod {
    Classical,
    Bible,
    PostClassical,
}

impl fmt::Display for TimePeriod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimePeriod::Classical => "Classical",
            TimePeriod::Bible => "Bible",
            TimePeriod::PostClassical => "PostClassical",
        })
    }
}

/// Classical runs from the 3rd century BCE to the 2nd century CE; the
/// Vulgate is its own period; everything from the 4th century CE on is
/// post-classical. The 3rd century CE belongs to no period.
pub fn assign_time_period(meta: &TextMetadata) -> Result<TimePeriod> {
    if meta.is_bible {
        Ok(TimePeriod::Bible)
    } else if meta.century <= 2 {
        Ok(TimePeriod::Classical)
    } else if meta.century >= 4 {
        Ok(TimePeriod::PostClassical)
    } else {
        Err(Error::Period(format!(
            "{} ({}): century {} CE falls between the classical and post-classical periods",
            meta.work_id, meta.treebank, meta.century
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetadataViolation {
    /// 1-based line in the table, 0 for file-level problems.
    pub line: usize,
    pub work_id: Option<String>,
    pub code: &'static str,
    pub detail: String,
}

impl fmt::Display for MetadataViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.code)?;
        if let Some(w) = &self.work_id {
            write!(f, " [{w}]")?;
        }
        write!(f, ": {}", self.detail)
    }
}

pub const HEADER: [&str; 9] = [
    "treebank", "work_id", "author", "century", "is_bible", "genres", "train", "dev", "test",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MetadataTable {
    pub rows: Vec<TextMetadata>,
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

fn parse_row(cols: &[&str]) -> std::result::Result<TextMetadata, (&'static str, String)> {
    let num = |i: usize| {
        cols[i]
            .trim()
            .parse::<u64>()
            .map_err(|_| ("BAD_COUNT", format!("{}: {:?}", HEADER[i], cols[i])))
    };
    Ok(TextMetadata {
        treebank: cols[0]
            .trim()
            .parse()
            .map_err(|_| ("UNKNOWN_TREEBANK", cols[0].to_string()))?,
        work_id: cols[1].trim().to_string(),
        author: cols[2].trim().to_string(),
        century: cols[3]
            .trim()
            .parse()
            .map_err(|_| ("BAD_CENTURY", cols[3].to_string()))?,
        is_bible: parse_bool(cols[4].trim()).ok_or(("BAD_BOOL", cols[4].to_string()))?,
        genres: cols[5]
            .split(',')
            .map(str::trim)
            .filter(|g| !g.is_empty() && *g != "_")
            .map(str::to_string)
            .collect(),
        train: num(6)?,
        dev: num(7)?,
        test: num(8)?,
    })
}

/// Checks the invariants of a single row.
pub fn row_violations(row: &TextMetadata) -> Vec<(&'static str, String)> {
    let mut out = Vec::new();
    if row.work_id.is_empty() {
        out.push(("EMPTY_WORK_ID", String::new()));
    }
    if row.genres.is_empty() {
        out.push(("NO_GENRE", "every text needs at least one genre".into()));
    }
    for g in &row.genres {
        if !GENRES.contains(&g.as_str()) {
            out.push(("UNKNOWN_GENRE", g.clone()));
        }
    }
    let exclusive: Vec<&str> = row
        .genres
        .iter()
        .map(String::as_str)
        .filter(|g| EXCLUSIVE_GENRES.contains(g))
        .collect();
    if row.has_genre("epic") && row.has_genre("short poem") {
        out.push(("EPIC_AND_SHORT_POEM", "epic and short poem are mutually exclusive".into()));
    } else if exclusive.len() > 1 {
        out.push(("MULTIPLE_EXCLUSIVE_GENRES", exclusive.join(",")));
    }
    if row.has_genre("Bible") && !row.has_genre("Christian") {
        out.push(("BIBLE_NOT_CHRISTIAN", "Bible implies Christian".into()));
    }
    if row.is_bible != row.has_genre("Bible") {
        out.push(("BIBLE_FLAG_MISMATCH", format!("is_bible={} but genres={}", row.is_bible, row.genres.join(","))));
    }
    if !(MIN_CENTURY..=MAX_CENTURY).contains(&row.century) || row.century == 0 {
        out.push(("CENTURY_OUT_OF_RANGE", row.century.to_string()));
    }
    out
}

impl MetadataTable {
    /// Parses a table, collecting every problem instead of stopping at the
    /// first one. Rows that cannot be parsed are dropped from the table.
    pub fn parse<R: BufRead>(reader: R) -> Result<(Self, Vec<MetadataViolation>)> {
        let mut rows = Vec::new();
        let mut violations = Vec::new();
        let mut seen = HashSet::new();
        let mut header_seen = false;
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = n + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if !header_seen {
                header_seen = true;
                if cols != HEADER {
                    violations.push(MetadataViolation {
                        line: lineno,
                        work_id: None,
                        code: "BAD_HEADER",
                        detail: format!("expected {:?}", HEADER.join("\t")),
                    });
                }
                continue;
            }
            if cols.len() != HEADER.len() {
                violations.push(MetadataViolation {
                    line: lineno,
                    work_id: cols.get(1).map(|s| s.to_string()),
                    code: "COLUMN_COUNT",
                    detail: format!("expected {} columns, found {}", HEADER.len(), cols.len()),
                });
                continue;
            }
            let row = match parse_row(&cols) {
                Ok(r) => r,
                Err((code, detail)) => {
                    violations.push(MetadataViolation {
                        line: lineno,
                        work_id: Some(cols[1].to_string()),
                        code,
                        detail,
                    });
                    continue;
                }
            };
            for (code, detail) in row_violations(&row) {
                violations.push(MetadataViolation {
                    line: lineno,
                    work_id: Some(row.work_id.clone()),
                    code,
                    detail,
                });
            }
            if !seen.insert((row.treebank, row.work_id.clone())) {
                violations.push(MetadataViolation {
                    line: lineno,
                    work_id: Some(row.work_id.clone()),
                    code: "DUPLICATE_WORK_ID",
                    detail: format!("{} already listed for {}", row.work_id, row.treebank),
                });
            }
            rows.push(row);
        }
        if !header_seen {
            violations.push(MetadataViolation {
                line: 0,
                work_id: None,
                code: "EMPTY_TABLE",
                detail: "no header row".into(),
            });
        }
        Ok((MetadataTable { rows }, violations))
    }

    /// Parses a table and fails on any violation.
    pub fn load<R: BufRead>(reader: R) -> Result<Self> {
        let (table, violations) = Self::parse(reader)?;
        match violations.first() {
            None => Ok(table),
            Some(v) => Err(Error::Config(format!(
                "metadata table has {} violation(s); first: {v}",
                violations.len()
            ))),
        }
    }

    pub fn load_file(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::from(e).in_file(path))?;
        Self::load(std::io::BufReader::new(f)).map_err(|e| e.in_file(path))
    }

    pub fn get(&self, treebank: Treebank, work_id: &str) -> Option<&TextMetadata> {
        self.rows
            .iter()
            .find(|r| r.treebank == treebank && r.work_id == work_id)
    }

    /// First row with this work id, preferring UD treebanks.
    pub fn find_work(&self, work_id: &str) -> Option<&TextMetadata> {
        let mut hits = self.rows.iter().filter(|r| r.work_id == work_id);
        let first = hits.next()?;
        if first.treebank.is_ud() {
            return Some(first);
        }
        hits.find(|r| r.treebank.is_ud()).or(Some(first))
    }

    /// Writes the table in canonical form.
    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{}", HEADER.join("\t"))?;
        let mut rows: Vec<&TextMetadata> = self.rows.iter().collect();
        rows.sort_by(|a, b| (a.treebank, &a.work_id).cmp(&(b.treebank, &b.work_id)));
        for r in rows {
            let mut genres = r.genres.clone();
            genres.sort_by_key(|g| GENRES.iter().position(|x| x == g).unwrap_or(GENRES.len()));
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.treebank,
                r.work_id,
                r.author,
                r.century,
                r.is_bible,
                if genres.is_empty() { "_".to_string() } else { genres.join(",") },
                r.train,
                r.dev,
                r.test
            )?;
        }
        Ok(())
    }

    /// Per-treebank sentence totals compared against corpus sentence counts.
    /// Returns the treebanks whose totals disagree, with (table, corpus).
    pub fn check_counts(&self, corpus_counts: &[(Treebank, u64)]) -> Vec<(Treebank, u64, u64)> {
        corpus_counts
            .iter()
            .filter_map(|&(tb, n)| {
                let total: u64 = self.rows.iter().filter(|r| r.treebank == tb).map(TextMetadata::sentences).sum();
                (total != n).then_some((tb, total, n))
            })
            .collect()
    }
}
