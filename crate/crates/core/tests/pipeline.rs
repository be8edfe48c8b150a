use std::path::{Path, PathBuf};

use proptest::prelude::*;

use latstd::agreement::{agreement_table, aligned_tokens, default_features, Stage};
use latstd::conllu::{parse_conllu_str, serialize_conllu, Sentence};
use latstd::convert::{convert_corpus, ConvertOptions};
use latstd::dedup::{find_duplicates, MinOverlap};
use latstd::eval::{evaluate, whole_string_accuracy};
use latstd::lasla::{ingest_lasla_file, ColumnMapping};
use latstd::metadata::MetadataTable;
use latstd::splits::{build_splits, works_from_corpus, AssignmentSource, SplitInput, SplitOptions};
use latstd::standardize::Flavor;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn ud() -> Vec<Sentence> {
    parse_conllu_str(&std::fs::read_to_string(fixture("ud_sample.conllu")).unwrap()).unwrap()
}

fn lasla() -> Vec<Sentence> {
    ingest_lasla_file(&fixture("lasla_sample.tsv"), &ColumnMapping::default())
        .unwrap()
        .sentences
}

#[test]
fn duplicates_between_fixtures() {
    let pairs = find_duplicates(&ud(), &lasla(), MinOverlap::default());
    assert_eq!(pairs.len(), 4);
    assert!(pairs.iter().all(|p| p.a.work_id.as_deref() == Some("BellumGallicum")));
    assert!(pairs.iter().all(|p| p.alignment.len() >= 5));
}

#[test]
fn conversion_raises_gender_agreement_under_loose_matching() {
    let (u, l) = (ud(), lasla());
    let pairs = find_duplicates(&u, &l, MinOverlap::default());
    let cu = convert_corpus(&u, &ConvertOptions::new(Flavor::Ud)).sentences;
    let cl = convert_corpus(&l, &ConvertOptions::new(Flavor::Lasla)).sentences;
    let rows = agreement_table(&aligned_tokens(&cu, &cl, &pairs), &default_features(), Stage::Converted, false).unwrap();
    let get = |name: &str| rows.iter().find(|r| r.feature == name).unwrap();
    let (strict, loose) = (get("Gender"), get("Gender (loose)"));
    assert!(loose.count_same > strict.count_same);
    assert_eq!(loose.count_total, strict.count_total);
    // The planted Case disagreement.
    let case = get("Case");
    assert_eq!(case.count_total - case.count_same, 1);
}

#[test]
fn gold_scores_perfectly_against_itself() {
    let gold = convert_corpus(&ud(), &ConvertOptions::new(Flavor::Ud)).sentences;
    let report = evaluate(&gold, &gold).unwrap();
    assert_eq!(report.morph_accuracy, 1.0);
    assert_eq!(report.upos_accuracy, 1.0);
    assert!(report.macro_f1.values().all(|&f| f == 1.0));
    assert!(report.per_value.iter().all(|v| v.zero_support || v.f1 == 1.0));
}

#[test]
fn misaligned_predictions_are_rejected() {
    let gold = ud();
    let mut pred = gold.clone();
    pred.pop();
    assert!(whole_string_accuracy(&gold, &pred, false).is_err());
}

#[test]
fn fixture_splits_are_deterministic() {
    let (u, l) = (ud(), lasla());
    let pairs = find_duplicates(&u, &l, MinOverlap::default());
    // Only the classical works; the other periods have a single tiny work.
    let mut works: Vec<_> = works_from_corpus(&u, false)
        .unwrap()
        .into_iter()
        .filter(|w| w.work_id == "BellumGallicum" || w.work_id == "phaedrus_fabulae")
        .collect();
    works.extend(works_from_corpus(&l, true).unwrap());
    let input = SplitInput {
        works,
        duplicates: pairs.iter().map(|p| p.a.sent_id.clone()).collect(),
    };
    let meta = MetadataTable::load_file(&fixture("metadata.tsv")).unwrap();
    let opts = SplitOptions {
        min_test: 1,
        assignment: AssignmentSource::Greedy,
        dev_fraction: 0.5,
        seed: 11,
        ..SplitOptions::default()
    };
    let first = build_splits(&input, Some(&meta), &opts).unwrap();
    let second = build_splits(&input, Some(&meta), &opts).unwrap();
    assert_eq!(first, second);
    for m in &first {
        assert!(m.passed(), "{:?}", m.audit);
        assert!(m.dev_sentences.iter().all(|id| !input.duplicates.contains(id)));
    }
}

fn feats() -> impl Strategy<Value = String> {
    (
        prop::option::of(prop_oneof![Just("Case=Abl"), Just("Case=Nom")]),
        prop::option::of(Just("Gender=Fem,Masc")),
        prop::option::of(Just("Number=Plur")),
        prop::option::of(Just("Tense=Past")),
        prop::option::of(Just("VerbForm=Part")),
    )
        .prop_map(|(a, b, c, d, e)| {
            let parts: Vec<&str> = [a, b, c, d, e].into_iter().flatten().collect();
            if parts.is_empty() {
                "_".to_string()
            } else {
                parts.join("|")
            }
        })
}

proptest! {
    #[test]
    fn generated_corpora_round_trip(
        sents in prop::collection::vec(
            prop::collection::vec(("[a-z]{1,8}", feats(), "[A-Za-z]{0,6}"), 1..8),
            1..6,
        )
    ) {
        let mut text = String::new();
        for (k, words) in sents.iter().enumerate() {
            text.push_str(&format!("# sent_id = s{k}\n"));
            for (i, (form, f, misc)) in words.iter().enumerate() {
                let misc = if misc.is_empty() { "_".to_string() } else { format!("Note={misc}") };
                text.push_str(&format!("{}\t{form}\t{form}\tNOUN\t_\t{f}\t0\troot\t_\t{misc}\n", i + 1));
            }
            text.push('\n');
        }
        let parsed = parse_conllu_str(&text).unwrap();
        prop_assert_eq!(serialize_conllu(&parsed), text);
    }
}
