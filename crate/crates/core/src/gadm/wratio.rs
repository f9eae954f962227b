//! Composite fuzzy similarity scorer (0-100) over normalized names,
//! combining the indel ratio with token-sort, token-set and substring
//! comparisons under length-dependent weights. Robust to typos, word-order
//! differences and partial mentions.

use std::collections::BTreeSet;

/// Composite score in [0, 100]; 100 means equal strings. Empty input
/// scores 0 against anything non-empty.
///
/// With `L = max(len)/min(len)` (character counts):
/// - `L < 1.5`: max of the plain ratio and 0.95× the token-sort and
///   token-set ratios;
/// - otherwise, with `p = 0.9` for `L < 8` and `0.6` beyond: max of the
///   plain ratio, `p`× the partial ratio and `0.95·p`× the partial
///   token-sort and partial token-set ratios.
pub fn wratio(s1: &str, s2: &str) -> f64 {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 100.0 } else { 0.0 };
    }

    let base = ratio(&a, &b);
    let (short, long) = if a.len() <= b.len() {
        (a.len(), b.len())
    } else {
        (b.len(), a.len())
    };
    let length_ratio = long as f64 / short as f64;

    if length_ratio < 1.5 {
        let token_sort = ratio_str(&token_sort_join(s1), &token_sort_join(s2));
        let token_set = token_set_score(s1, s2, ratio_str);
        base.max(0.95 * token_sort).max(0.95 * token_set)
    } else {
        let p = if length_ratio < 8.0 { 0.9 } else { 0.6 };
        let partial = partial_ratio(&a, &b);
        let partial_token_sort = partial_ratio_str(&token_sort_join(s1), &token_sort_join(s2));
        let partial_token_set = token_set_score(s1, s2, partial_ratio_str);
        base.max(p * partial)
            .max(0.95 * p * partial_token_sort)
            .max(0.95 * p * partial_token_set)
    }
}

/// Indel distance between the full strings, for tie-breaking equal scores.
pub fn indel_distance(s1: &str, s2: &str) -> usize {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    indel(&a, &b)
}

/// Normalized indel similarity: 100·(1 − distance/(len1+len2)).
fn ratio(a: &[char], b: &[char]) -> f64 {
    let total = a.len() + b.len();
    if total == 0 {
        return 100.0;
    }
    100.0 * (1.0 - indel(a, b) as f64 / total as f64)
}

fn ratio_str(s1: &str, s2: &str) -> f64 {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    ratio(&a, &b)
}

/// Best ratio of the shorter string against every same-length window of
/// the longer one.
fn partial_ratio(a: &[char], b: &[char]) -> f64 {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return if long.is_empty() { 100.0 } else { 0.0 };
    }
    let mut best = 0.0f64;
    for start in 0..=(long.len() - short.len()) {
        let window = &long[start..start + short.len()];
        best = best.max(ratio(short, window));
        if best == 100.0 {
            break;
        }
    }
    best
}

fn partial_ratio_str(s1: &str, s2: &str) -> f64 {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    partial_ratio(&a, &b)
}

fn token_sort_join(s: &str) -> String {
    let mut tokens: Vec<&str> = s.split_whitespace().collect();
    tokens.sort_unstable();
    tokens.join(" ")
}

/// Max of the three set comparisons (intersection vs each side, side vs
/// side) under the supplied scorer.
fn token_set_score(s1: &str, s2: &str, score: fn(&str, &str) -> f64) -> f64 {
    let ta: BTreeSet<&str> = s1.split_whitespace().collect();
    let tb: BTreeSet<&str> = s2.split_whitespace().collect();
    let sect = join(ta.intersection(&tb));
    let diff_ab = join(ta.difference(&tb));
    let diff_ba = join(tb.difference(&ta));
    let combined_ab = join_nonempty(&sect, &diff_ab);
    let combined_ba = join_nonempty(&sect, &diff_ba);
    score(&sect, &combined_ab)
        .max(score(&sect, &combined_ba))
        .max(score(&combined_ab, &combined_ba))
}

fn join<'a>(tokens: impl Iterator<Item = &'a &'a str>) -> String {
    tokens.copied().collect::<Vec<_>>().join(" ")
}

fn join_nonempty(head: &str, tail: &str) -> String {
    match (head.is_empty(), tail.is_empty()) {
        (true, _) => tail.to_string(),
        (_, true) => head.to_string(),
        _ => format!("{head} {tail}"),
    }
}

/// Insert/delete edit distance via the longest common subsequence:
/// d = len(a) + len(b) − 2·lcs(a, b). Two-row DP.
fn indel(a: &[char], b: &[char]) -> usize {
    a.len() + b.len() - 2 * lcs(a, b)
}

fn lcs(a: &[char], b: &[char]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for &ca in a {
        for (j, &cb) in b.iter().enumerate() {
            curr[j + 1] = if ca == cb {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}
