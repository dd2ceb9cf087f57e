//! Case/diacritic folding and the word tokenizer shared by the query filter,
//! the reference matcher and the vocabulary tagger.

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Lowercases and strips combining diacritics (`"Müller"` -> `"muller"`).
pub fn fold(s: &str) -> String {
    s.nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .collect()
}

/// Folds and keeps only alphanumerics, collapsing everything else to single
/// spaces. Used for exact-key comparison of names and journal titles.
pub fn fold_key(s: &str) -> String {
    let folded = fold(s);
    let mut out = String::with_capacity(folded.len());
    for word in folded.split(|c: char| !c.is_alphanumeric()) {
        if word.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Splits text into folded word tokens.
///
/// Tokens are maximal runs of alphanumeric characters; a hyphen is kept when
/// it sits between two alphanumerics (`"anti-tumor"` stays one token).
pub fn tokenize(s: &str) -> Vec<String> {
    split_tokens(&fold(s), |_| false)
}

/// Like [`tokenize`] but keeps `*` as a token character, for wildcard patterns.
pub(crate) fn tokenize_pattern(s: &str) -> Vec<String> {
    split_tokens(&fold(s), |c| c == '*')
}

fn split_tokens(folded: &str, extra: impl Fn(char) -> bool) -> Vec<String> {
    let chars: Vec<char> = folded.chars().collect();
    let is_word = |c: char| c.is_alphanumeric() || extra(c);
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if is_word(c) {
            current.push(c);
            continue;
        }
        let intra_hyphen = c == '-' && !current.is_empty() && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if intra_hyphen {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}
