//! Per-feature annotation agreement between the two copies of duplicated
//! sentences.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::conllu::{Sentence, Token};
use crate::convert::ANOMALY_KEY;
use crate::dedup::DuplicatePair;
use crate::error::{Error, Result};
use crate::normalize::matching_key;
use crate::standardize::{StandardRecord, MORPH_FEATURES};

/// Features that can be compared at the raw stage besides the standard
/// ones.
const RAW_ONLY: [&str; 2] = ["Aspect", "VerbForm"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Strict,
    /// A single value on one side counts as agreeing when it is one of the
    /// values on the other side.
    LooseGender,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    /// FEATS as found in the source files.
    Raw,
    /// Standardized and harmonized records.
    Converted,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Raw => "before",
            Stage::Converted => "after",
        })
    }
}

impl FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" | "before" => Ok(Stage::Raw),
            "converted" | "after" => Ok(Stage::Converted),
            _ => Err(Error::Config(format!("unknown stage {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementRow {
    pub feature: String,
    pub percent_same: f64,
    pub count_same: u64,
    pub count_total: u64,
}

impl AgreementRow {
    fn new(feature: String, count_same: u64, count_total: u64) -> Self {
        let percent_same = if count_total == 0 {
            0.0
        } else {
            count_same as f64 / count_total as f64
        };
        AgreementRow {
            feature,
            percent_same,
            count_same,
            count_total,
        }
    }
}

/// Two annotations of the same word.
#[derive(Debug, Clone, Copy)]
pub struct TokenPair<'a> {
    pub a: &'a Token,
    pub b: &'a Token,
}

impl TokenPair<'_> {
    pub fn is_anomalous(&self) -> bool {
        self.a.misc.get(ANOMALY_KEY).is_some() || self.b.misc.get(ANOMALY_KEY).is_some()
    }
}

/// Word pairs of every duplicate, in pair order.
pub fn aligned_tokens<'a>(
    corpus_a: &'a [Sentence],
    corpus_b: &'a [Sentence],
    pairs: &[DuplicatePair],
) -> Vec<TokenPair<'a>> {
    pairs
        .par_iter()
        .flat_map_iter(|p| {
            let (sa, sb) = (&corpus_a[p.a.index], &corpus_b[p.b.index]);
            let ta: Vec<&Token> = sa.tokens().collect();
            let tb: Vec<&Token> = sb.tokens().collect();
            p.token_pairs(&matching_key(sa), &matching_key(sb))
                .into_iter()
                .map(|(i, j)| TokenPair { a: ta[i], b: tb[j] })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn check_feature(feature: &str, stage: Stage) -> Result<()> {
    let known = feature == "UPOS"
        || MORPH_FEATURES.contains(&feature)
        || (stage == Stage::Raw && RAW_ONLY.contains(&feature));
    if known {
        Ok(())
    } else {
        Err(Error::Config(format!("unknown feature {feature:?} for the {stage} stage")))
    }
}

fn values(token: &Token, feature: &str, stage: Stage) -> Result<Vec<String>> {
    let raw = match stage {
        Stage::Raw => {
            if feature == "UPOS" {
                Some(token.upos.clone()).filter(|u| u != "_")
            } else {
                token.feats.joined(feature)
            }
        }
        Stage::Converted => StandardRecord::from_token(token)
            .map_err(|e| Error::Config(format!("token {:?} is not standardized: {e}", token.form)))?
            .feature(feature)
            .filter(|u| u != "_"),
    };
    Ok(raw.map_or_else(Vec::new, |v| v.split(',').map(str::to_string).collect()))
}

fn same(a: &[String], b: &[String], mode: Mode) -> bool {
    if a == b {
        return true;
    }
    mode == Mode::LooseGender
        && ((a.len() == 1 && b.contains(&a[0])) || (b.len() == 1 && a.contains(&b[0])))
}

/// Agreement on one feature. Pairs where neither side has a value are not
/// counted.
pub fn feature_agreement(
    pairs: &[TokenPair],
    feature: &str,
    mode: Mode,
    stage: Stage,
) -> Result<AgreementRow> {
    check_feature(feature, stage)?;
    let counts = pairs
        .par_iter()
        .map(|p| -> Result<(u64, u64)> {
            let va = values(p.a, feature, stage)?;
            let vb = values(p.b, feature, stage)?;
            if va.is_empty() && vb.is_empty() {
                return Ok((0, 0));
            }
            Ok((same(&va, &vb, mode) as u64, 1))
        })
        .collect::<Result<Vec<_>>>()?;
    let (s, t) = counts
        .into_iter()
        .fold((0, 0), |acc, (s, t)| (acc.0 + s, acc.1 + t));
    let name = match mode {
        Mode::Strict => feature.to_string(),
        Mode::LooseGender => format!("{feature} (loose)"),
    };
    Ok(AgreementRow::new(name, s, t))
}

/// UPOS followed by the eight morphological features.
pub fn default_features() -> Vec<String> {
    std::iter::once("UPOS")
        .chain(MORPH_FEATURES)
        .map(str::to_string)
        .collect()
}

/// One strict row per feature, with a loose row after Gender.
pub fn agreement_table(
    pairs: &[TokenPair],
    features: &[String],
    stage: Stage,
    exclude_anomalous: bool,
) -> Result<Vec<AgreementRow>> {
    let kept: Vec<TokenPair> = if exclude_anomalous {
        pairs.iter().copied().filter(|p| !p.is_anomalous()).collect()
    } else {
        pairs.to_vec()
    };
    let mut rows = Vec::new();
    for f in features {
        rows.push(feature_agreement(&kept, f, Mode::Strict, stage)?);
        if f == "Gender" {
            rows.push(feature_agreement(&kept, f, Mode::LooseGender, stage)?);
        }
    }
    Ok(rows)
}

pub const REPORT_HEADER: &str = "stage\tfeature\tpercent_same\tcount_same\tcount_total";

/// Rows as TSV; percentages with one decimal.
pub fn write_report<W: Write>(out: &mut W, tables: &[(Stage, Vec<AgreementRow>)]) -> std::io::Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for (stage, rows) in tables {
        for r in rows {
            writeln!(
                out,
                "{}\t{}\t{:.1}\t{}\t{}",
                stage,
                r.feature,
                100.0 * r.percent_same,
                r.count_same,
                r.count_total
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(upos: &str, feats: &str) -> Token {
        let mut t = Token::new(1, "x");
        t.upos = upos.into();
        t.feats = feats.parse().unwrap();
        t
    }

    fn pairs(toks: &[(Token, Token)]) -> Vec<TokenPair<'_>> {
        toks.iter().map(|(a, b)| TokenPair { a, b }).collect()
    }

    #[test]
    fn loose_gender() {
        let toks = [(tok("ADJ", "Gender=Fem"), tok("ADJ", "Gender=Fem,Masc"))];
        let p = pairs(&toks);
        let strict = feature_agreement(&p, "Gender", Mode::Strict, Stage::Converted).unwrap();
        let loose = feature_agreement(&p, "Gender", Mode::LooseGender, Stage::Converted).unwrap();
        assert_eq!((strict.count_same, strict.count_total), (0, 1));
        assert_eq!((loose.count_same, loose.count_total), (1, 1));
        assert_eq!(loose.feature, "Gender (loose)");
    }

    #[test]
    fn both_none_is_excluded() {
        let toks = [
            (tok("ADV", "_"), tok("ADV", "_")),
            (tok("NOUN", "Case=Nom"), tok("NOUN", "_")),
        ];
        let r = feature_agreement(&pairs(&toks), "Case", Mode::Strict, Stage::Raw).unwrap();
        assert_eq!((r.count_same, r.count_total), (0, 1));
        assert_eq!(r.percent_same, 0.0);
    }

    #[test]
    fn ten_pair_tally() {
        // Case: 6 same, 2 differ, 1 one-sided, 1 both empty.
        let cases = [
            ("Nom", "Nom"), ("Gen", "Gen"), ("Dat", "Dat"), ("Acc", "Acc"), ("Abl", "Abl"),
            ("Nom", "Nom"), ("Nom", "Acc"), ("Dat", "Abl"), ("Gen", "_"), ("_", "_"),
        ];
        let toks: Vec<_> = cases
            .iter()
            .map(|(a, b)| {
                let f = |v: &str| if v == "_" { tok("NOUN", "_") } else { tok("NOUN", &format!("Case={v}")) };
                (f(a), f(b))
            })
            .collect();
        let r = feature_agreement(&pairs(&toks), "Case", Mode::Strict, Stage::Converted).unwrap();
        assert_eq!((r.count_same, r.count_total), (6, 9));
        assert!((r.percent_same - 6.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_feature_is_a_config_error() {
        let toks = [(tok("NOUN", "_"), tok("NOUN", "_"))];
        assert!(matches!(
            feature_agreement(&pairs(&toks), "Colour", Mode::Strict, Stage::Raw),
            Err(Error::Config(_))
        ));
        assert!(feature_agreement(&pairs(&toks), "VerbForm", Mode::Strict, Stage::Converted).is_err());
        assert!(feature_agreement(&pairs(&toks), "VerbForm", Mode::Strict, Stage::Raw).is_ok());
    }

    #[test]
    fn table_and_report() {
        let toks = [
            (tok("NOUN", "Case=Nom|Gender=Fem|Number=Sing"), tok("NOUN", "Case=Nom|Gender=Fem,Masc|Number=Sing")),
            (tok("VERB", "Mood=Ind|Number=Sing|Person=3|Tense=Pres|Voice=Act"), tok("VERB", "Mood=Ind|Number=Sing|Person=3|Tense=Pres|Voice=Act")),
        ];
        let rows = agreement_table(&pairs(&toks), &default_features(), Stage::Converted, false).unwrap();
        let names: Vec<_> = rows.iter().map(|r| r.feature.as_str()).collect();
        assert_eq!(
            names,
            ["UPOS", "Case", "Degree", "Gender", "Gender (loose)", "Mood", "Number", "Person", "Tense", "Voice"]
        );
        let mut out = Vec::new();
        write_report(&mut out, &[(Stage::Converted, rows)]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("after\tGender\t0.0\t0\t1\n"));
        assert!(text.contains("after\tGender (loose)\t100.0\t1\t1\n"));
        assert!(text.contains("after\tDegree\t0.0\t0\t0\n"));
    }

    #[test]
    fn anomalous_pairs_can_be_excluded() {
        let mut flagged = tok("NOUN", "Case=Nom");
        flagged.misc.set(ANOMALY_KEY, "X");
        let toks = [(flagged, tok("NOUN", "Case=Acc")), (tok("NOUN", "Case=Nom"), tok("NOUN", "Case=Nom"))];
        let all = agreement_table(&pairs(&toks), &["Case".into()], Stage::Converted, false).unwrap();
        let kept = agreement_table(&pairs(&toks), &["Case".into()], Stage::Converted, true).unwrap();
        assert_eq!((all[0].count_same, all[0].count_total), (1, 2));
        assert_eq!((kept[0].count_same, kept[0].count_total), (1, 1));
    }
}
