//! Orthographic normalization for cross-treebank sentence matching.

use std::sync::OnceLock;

use regex::Regex;

use crate::conllu::{Sentence, Token};

/// Replaces `j`/`v` with `i`/`u`, preserving case.
pub fn jv_replace(text: &str) -> String {
    text.chars()
        .map(|c| match c {
            'j' => 'i',
            'J' => 'I',
            'v' => 'u',
            'V' => 'U',
            c => c,
        })
        .collect()
}

fn punctuation_only() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[\p{P}\x{00A7}]+$").expect("valid regex"))
}

/// True when `form` is non-empty and made only of punctuation characters
/// (Unicode general category P*, plus the section sign).
pub fn is_punctuation(form: &str) -> bool {
    punctuation_only().is_match(form)
}

fn is_punct_token(t: &Token) -> bool {
    t.upos == "PUNCT" || is_punctuation(&t.form)
}

/// Drops punctuation tokens, keeping the order of the rest.
pub fn strip_punctuation<'a, I>(tokens: I) -> Vec<&'a Token>
where
    I: IntoIterator<Item = &'a Token>,
{
    tokens.into_iter().filter(|t| !is_punct_token(t)).collect()
}

/// Normalized view of a sentence used for duplicate detection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingKey {
    /// Lowercased, j/v-replaced forms of the non-punctuation tokens.
    pub forms: Vec<String>,
    /// For each entry of `forms`, the index of the source word in
    /// `Sentence::tokens()`.
    pub positions: Vec<usize>,
    /// `forms` joined by single spaces.
    pub chars: String,
}

pub fn normalize_form(form: &str) -> String {
    jv_replace(&form.to_lowercase())
}

pub fn matching_key(sentence: &Sentence) -> MatchingKey {
    let mut forms = Vec::new();
    let mut positions = Vec::new();
    for (i, t) in sentence.tokens().enumerate() {
        if is_punct_token(t) {
            continue;
        }
        forms.push(normalize_form(&t.form));
        positions.push(i);
    }
    let chars = forms.join(" ");
    MatchingKey {
        forms,
        positions,
        chars,
    }
}
