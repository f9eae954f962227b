//! Deterministic place-name normalization applied before any matching or
//! querying: lowercasing, accent folding, parenthetical extraction,
//! punctuation cleanup and optional removal of generic descriptors
//! ("province", "district", ...).

use std::collections::HashSet;

use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Generic administrative descriptors stripped from toponyms when they are
/// not the whole name. Overridable through the pipeline config.
pub const DEFAULT_DESCRIPTORS: &[&str] = &[
    "region",
    "district",
    "province",
    "state",
    "county",
    "municipality",
    "department",
    "prefecture",
    "governorate",
    "city",
    "town",
    "village",
    "area",
    "commune",
    "canton",
    "island",
    "islands",
];

/// Connector tokens dropped only when adjacent to a removed descriptor,
/// e.g. the "of" in "province of sindh".
pub const DEFAULT_CONNECTORS: &[&str] = &["of", "de", "du", "da", "del", "di", "la", "le"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NormError {
    /// The input normalizes to an empty string; the location must be skipped.
    #[error("name normalizes to an empty string")]
    EmptyResult,
}

/// A name after normalization: lowercase, ASCII-folded where possible, no
/// parentheses, single-spaced. Parenthetical content is captured separately
/// in input order, before any folding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedName {
    pub text: String,
    pub parentheticals: Vec<String>,
}

/// Descriptor lexicon used by [`normalize_name_with`]; the default mirrors
/// the generic descriptors seen in disaster-database location strings.
#[derive(Debug, Clone)]
pub struct DescriptorLexicon {
    descriptors: HashSet<String>,
    connectors: HashSet<String>,
}

impl DescriptorLexicon {
    pub fn new<I, J>(descriptors: I, connectors: J) -> Self
    where
        I: IntoIterator,
        I::Item: Into<String>,
        J: IntoIterator,
        J::Item: Into<String>,
    {
        DescriptorLexicon {
            descriptors: descriptors.into_iter().map(Into::into).collect(),
            connectors: connectors.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_descriptor(&self, token: &str) -> bool {
        self.descriptors.contains(token)
    }

    fn is_connector(&self, token: &str) -> bool {
        self.connectors.contains(token)
    }
}

impl Default for DescriptorLexicon {
    fn default() -> Self {
        DescriptorLexicon::new(
            DEFAULT_DESCRIPTORS.iter().copied(),
            DEFAULT_CONNECTORS.iter().copied(),
        )
    }
}

/// Remove every balanced `(...)` span from `raw`, returning the remaining
/// text and the inner content of each span in left-to-right order.
/// Unbalanced parentheses are kept as literal characters. Nested spans are
/// captured whole: the outermost balanced span wins.
pub fn strip_parentheticals(raw: &str) -> (String, Vec<String>) {
    let chars: Vec<char> = raw.chars().collect();
    let mut base = String::with_capacity(raw.len());
    let mut spans = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '(' {
            if let Some(close) = matching_close(&chars, i) {
                let inner: String = chars[i + 1..close].iter().collect();
                spans.push(inner);
                i = close + 1;
                continue;
            }
        }
        base.push(chars[i]);
        i += 1;
    }
    (base, spans)
}

/// Index of the `)` closing the `(` at `open`, honoring nesting; `None`
/// when unbalanced.
fn matching_close(chars: &[char], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (i, &c) in chars.iter().enumerate().skip(open) {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Normalize a raw toponym with the default descriptor lexicon.
pub fn normalize_name(raw: &str, strip_descriptors: bool) -> Result<NormalizedName, NormError> {
    normalize_name_with(raw, strip_descriptors, &DescriptorLexicon::default())
}

/// Normalize a raw toponym: extract parentheticals, lowercase, fold accents
/// (NFKD, combining marks dropped, plus a small transliteration table for
/// characters without a decomposition), replace punctuation other than
/// hyphen/apostrophe by spaces, and collapse whitespace.
///
/// With `strip_descriptors`, lexicon tokens and connectors adjacent to them
/// are removed -- unless that would leave the name empty, in which case the
/// name is kept as-is.
pub fn normalize_name_with(
    raw: &str,
    strip_descriptors: bool,
    lexicon: &DescriptorLexicon,
) -> Result<NormalizedName, NormError> {
    let (base, parentheticals) = strip_parentheticals(raw);
    let folded = fold_text(&base);
    let collapsed = collapse_spaces(&folded);
    let text = if strip_descriptors {
        strip_descriptor_tokens(&collapsed, lexicon)
    } else {
        collapsed
    };
    if text.is_empty() {
        return Err(NormError::EmptyResult);
    }
    Ok(NormalizedName {
        text,
        parentheticals,
    })
}

/// Lowercase, NFKD-fold and replace punctuation with spaces. Hyphens and
/// apostrophes stay: they are part of official toponyms (Val-d'Or).
/// Decomposition runs before and after lowercasing so compatibility
/// characters that decompose to uppercase letters still end up folded.
fn fold_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        for decomposed in c.nfkd() {
            if is_combining_mark(decomposed) {
                continue;
            }
            for lower in decomposed.to_lowercase() {
                for d in lower.nfkd() {
                    if is_combining_mark(d) {
                        continue;
                    }
                    match transliterate(d) {
                        Some(t) => out.push_str(t),
                        None => {
                            if d == '-' || d == '\'' {
                                out.push(d);
                            } else if d.is_alphanumeric() {
                                out.push(d);
                            } else {
                                out.push(' ');
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Fixed table for characters NFKD leaves alone but that have a
/// conventional ASCII form. Everything else (non-Latin scripts included)
/// passes through unchanged.
fn transliterate(c: char) -> Option<&'static str> {
    match c {
        'ß' => Some("ss"),
        'æ' => Some("ae"),
        'œ' => Some("oe"),
        'ø' => Some("o"),
        'ð' => Some("d"),
        'đ' => Some("d"),
        'þ' => Some("th"),
        'ł' => Some("l"),
        'ı' => Some("i"),
        'ħ' => Some("h"),
        'ŋ' => Some("ng"),
        '\u{2018}' | '\u{2019}' | '\u{02BC}' => Some("'"),
        '\u{2010}' | '\u{2011}' | '\u{2012}' | '\u{2013}' | '\u{2014}' => Some("-"),
        _ => None,
    }
}

fn collapse_spaces(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Drop descriptor tokens and connectors adjacent to them; keep the input
/// untouched when stripping would remove everything.
fn strip_descriptor_tokens(text: &str, lexicon: &DescriptorLexicon) -> String {
    let tokens: Vec<&str> = text.split(' ').filter(|t| !t.is_empty()).collect();
    let mut remove = vec![false; tokens.len()];
    for (i, tok) in tokens.iter().enumerate() {
        if lexicon.is_descriptor(tok) {
            remove[i] = true;
        }
    }
    for (i, tok) in tokens.iter().enumerate() {
        if lexicon.is_connector(tok) {
            let prev_removed = i > 0 && remove[i - 1] && lexicon.is_descriptor(tokens[i - 1]);
            let next_removed =
                i + 1 < tokens.len() && remove[i + 1] && lexicon.is_descriptor(tokens[i + 1]);
            if prev_removed || next_removed {
                remove[i] = true;
            }
        }
    }
    let kept: Vec<&str> = tokens
        .iter()
        .zip(&remove)
        .filter(|(_, r)| !**r)
        .map(|(t, _)| *t)
        .collect();
    if kept.is_empty() {
        text.to_string()
    } else {
        kept.join(" ")
    }
}
