/// Joins the words of a multi-word name into a single token.
///
/// The base tokenizer splits on this character, so it only ever appears
/// inside merged phrase tokens.
pub const PHRASE_SEPARATOR: char = '_';

/// Splits a line into normalized base tokens.
///
/// Lowercases, splits on whitespace and on [`PHRASE_SEPARATOR`], and strips
/// non-alphanumeric characters from both edges of each piece. Pieces that
/// are empty after stripping are dropped.
pub fn tokenize(line: &str) -> impl Iterator<Item = String> + '_ {
    line.split(|c: char| c.is_whitespace() || c == PHRASE_SEPARATOR)
        .filter_map(normalize_piece)
}

fn normalize_piece(piece: &str) -> Option<String> {
    let trimmed = piece.trim_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() {
        None
    } else {
        Some(trimmed.to_lowercase())
    }
}

/// True for number-like tokens such as `12`, `3.14` or `1,000`.
pub fn is_numeric_token(token: &str) -> bool {
    let mut saw_digit = false;
    for c in token.chars() {
        if c.is_numeric() {
            saw_digit = true;
        } else if !matches!(c, '.' | ',' | '-') {
            return false;
        }
    }
    saw_digit
}

/// Normalizes an entity or lexicon name to its token form.
///
/// `"John F. Kennedy"` and `"john_f_kennedy"` both become `john_f_kennedy`.
pub fn normalize_name(name: &str) -> Option<String> {
    let words: Vec<String> = tokenize(name).collect();
    if words.is_empty() {
        None
    } else {
        Some(join_words(&words))
    }
}

pub(crate) fn join_words<S: AsRef<str>>(words: &[S]) -> String {
    let mut out = String::new();
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            out.push(PHRASE_SEPARATOR);
        }
        out.push_str(w.as_ref());
    }
    out
}
