//! Standardization and harmonization of whole corpora in one pass.

use rayon::prelude::*;

use crate::conllu::{Node, Sentence};
use crate::harmonize::{
    collapse_upos, detect_iri_construction, enforce_arbitrary_values, AuditLog, IriWindow,
    PronounPersons,
};
use crate::standardize::{standardize, Flavor, Mood, StandardRecord, TenseAspectTable};

/// MISC key marking tokens whose standardization raised anomalies.
pub const ANOMALY_KEY: &str = "StdAnomaly";

#[derive(Debug, Clone)]
pub struct ConvertOptions {
    pub flavor: Flavor,
    pub tense_table: TenseAspectTable,
    pub iri_window: IriWindow,
    /// Person repair for personal pronouns; off unless set.
    pub pronoun_persons: Option<PronounPersons>,
}

impl ConvertOptions {
    pub fn new(flavor: Flavor) -> Self {
        ConvertOptions {
            flavor,
            tense_table: TenseAspectTable::default(),
            iri_window: IriWindow::default(),
            pronoun_persons: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnomalyRow {
    pub sent_id: String,
    pub token_id: u32,
    pub code: String,
}

#[derive(Debug, Clone, Default)]
pub struct Converted {
    pub sentences: Vec<Sentence>,
    pub audit: AuditLog,
    pub anomalies: Vec<AnomalyRow>,
}

/// Identifier used in reports: the `sent_id` comment, or the 1-based
/// position in the file.
pub fn sentence_label(sentence: &Sentence, index: usize) -> String {
    sentence
        .sent_id()
        .map_or_else(|| format!("#{}", index + 1), str::to_string)
}

/// Standardized and harmonized records of every word in a sentence, in
/// `Sentence::tokens()` order, with the rules that fired and any anomalies.
pub fn convert_sentence(
    sentence: &Sentence,
    opts: &ConvertOptions,
) -> Vec<(StandardRecord, Vec<crate::harmonize::RuleId>, Vec<String>)> {
    sentence
        .tokens()
        .enumerate()
        .map(|(i, token)| {
            let std = standardize(token, opts.flavor, &opts.tense_table);
            let mut record = std.record;
            let mut fired = Vec::new();
            fired.extend(collapse_upos(&mut record));
            let iri = record.mood == Some(Mood::Sup)
                && detect_iri_construction(sentence, i, opts.iri_window);
            fired.extend(enforce_arbitrary_values(&mut record, iri));
            if let Some(p) = &opts.pronoun_persons {
                fired.extend(p.repair(&token.lemma, &mut record));
            }
            let codes = std.anomalies.iter().map(|a| a.code()).collect();
            (record, fired, codes)
        })
        .collect()
}

fn apply(sentence: &Sentence, index: usize, opts: &ConvertOptions) -> Converted {
    let converted = convert_sentence(sentence, opts);
    let label = sentence_label(sentence, index);
    let mut out = sentence.clone();
    let mut audit = AuditLog::default();
    let mut anomalies = Vec::new();
    let words = out.nodes.iter_mut().filter_map(|n| match n {
        Node::Word(t) => Some(t),
        _ => None,
    });
    for (token, (record, fired, codes)) in words.zip(converted) {
        audit.record(fired);
        token.upos = record.upos.to_string();
        token.feats = record.to_features();
        // Already-standardized input keeps the flags of its first conversion.
        if opts.flavor != Flavor::Standard {
            token.misc.remove(ANOMALY_KEY);
        }
        if !codes.is_empty() {
            token.misc.set(ANOMALY_KEY, &codes.join(";"));
            anomalies.extend(codes.into_iter().map(|code| AnomalyRow {
                sent_id: label.clone(),
                token_id: token.id,
                code,
            }));
        }
    }
    Converted {
        sentences: vec![out],
        audit,
        anomalies,
    }
}

/// Converts a corpus. Sentences are processed in parallel; the result is
/// independent of the thread count.
pub fn convert_corpus(sentences: &[Sentence], opts: &ConvertOptions) -> Converted {
    let parts: Vec<Converted> = sentences
        .par_iter()
        .enumerate()
        .map(|(i, s)| apply(s, i, opts))
        .collect();
    let mut out = Converted::default();
    for p in parts {
        out.sentences.extend(p.sentences);
        out.audit.merge(&p.audit);
        out.anomalies.extend(p.anomalies);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::parse_conllu_str;
    use crate::harmonize::RuleId;

    const UD: &str = "# sent_id = t1
1\teum\tis\tPRON\t_\tCase=Acc|Gender=Masc|Number=Sing\t_\t_\t_\t_
2\toccisum\toccido\tVERB\t_\tAspect=Prosp|VerbForm=Conv|Voice=Act\t_\t_\t_\t_
3\tiri\teo\tAUX\t_\tAspect=Imp|Tense=Pres|VerbForm=Inf|Voice=Pass\t_\t_\t_\tTraditionalMood=Infinitivus
4\to\to\tINTJ\t_\t_\t_\t_\t_\t_
5\t.\t.\tPUNCT\t_\t_\t_\t_\t_\t_

";

    #[test]
    fn converts_and_audits() {
        let sents = parse_conllu_str(UD).unwrap();
        let out = convert_corpus(&sents, &ConvertOptions::new(Flavor::Ud));
        let toks: Vec<_> = out.sentences[0].tokens().collect();
        // Supine with iri in the sentence becomes passive.
        assert_eq!(toks[1].feats.to_string(), "Mood=Sup|Voice=Pass");
        // AUX infinitive: Voice forced active, Number/Gender absent anyway.
        assert_eq!(toks[2].feats.to_string(), "Mood=Inf|Tense=Pres|Voice=Act");
        assert_eq!(toks[3].upos, "PART");
        assert_eq!(toks[4].feats.to_string(), "_");
        assert_eq!(out.audit.counts[&RuleId::SupineVoice], 1);
        assert_eq!(out.audit.counts[&RuleId::AuxVoice], 1);
        assert_eq!(out.audit.counts[&RuleId::IntjToPart], 1);
        assert!(out.anomalies.is_empty());
        // MISC survives.
        assert_eq!(toks[2].misc.get("TraditionalMood"), Some("Infinitivus"));
    }

    #[test]
    fn anomalies_are_marked() {
        let sents = parse_conllu_str("1\tx\tx\tNOUN\t_\tCase=Ins\t_\t_\t_\t_\n").unwrap();
        let out = convert_corpus(&sents, &ConvertOptions::new(Flavor::Lasla));
        assert_eq!(out.anomalies, [AnomalyRow { sent_id: "#1".into(), token_id: 1, code: "UNKNOWN_VALUE:Case=Ins".into() }]);
        let t = out.sentences[0].tokens().next().unwrap();
        assert_eq!(t.misc.get(ANOMALY_KEY), Some("UNKNOWN_VALUE:Case=Ins"));
    }

    #[test]
    fn standard_output_is_a_fixed_point() {
        let sents = parse_conllu_str(UD).unwrap();
        let once = convert_corpus(&sents, &ConvertOptions::new(Flavor::Ud));
        let twice = convert_corpus(&once.sentences, &ConvertOptions::new(Flavor::Standard));
        assert_eq!(once.sentences, twice.sentences);
        assert_eq!(twice.audit.total(), 0);
    }
}
