//! Test-only reference implementations, kept independent of the library's
//! algorithm paths so they can serve as oracles.

/// Brute-force composite similarity scorer. Sub-scorers are computed from
/// first principles: the insert/delete distance comes from a full dynamic
/// programming matrix over both strings (the production scorer goes
/// through the longest common subsequence instead), windows are rescanned
/// naively, token forms are rebuilt with plain sorts.
pub fn wratio_reference(s1: &str, s2: &str) -> f64 {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 100.0 } else { 0.0 };
    }
    let base = ratio_ref(&a, &b);
    let (short, long) = if a.len() <= b.len() {
        (a.len(), b.len())
    } else {
        (b.len(), a.len())
    };
    let length_ratio = long as f64 / short as f64;
    if length_ratio < 1.5 {
        let token_sort = ratio_str_ref(&token_sort_ref(s1), &token_sort_ref(s2));
        let token_set = token_set_ref(s1, s2, ratio_str_ref);
        base.max(0.95 * token_sort).max(0.95 * token_set)
    } else {
        let p = if length_ratio < 8.0 { 0.9 } else { 0.6 };
        let partial = partial_ref(&a, &b);
        let partial_token_sort =
            partial_str_ref(&token_sort_ref(s1), &token_sort_ref(s2));
        let partial_token_set = token_set_ref(s1, s2, partial_str_ref);
        base.max(p * partial)
            .max(0.95 * p * partial_token_sort)
            .max(0.95 * p * partial_token_set)
    }
}

/// Full-matrix DP for the insert/delete edit distance: substitutions are
/// not allowed, so a mismatch costs one insertion plus one deletion.
pub fn indel_reference(a: &[char], b: &[char]) -> usize {
    let (n, m) = (a.len(), b.len());
    let mut table = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in table.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=m {
        table[0][j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            table[i][j] = if a[i - 1] == b[j - 1] {
                table[i - 1][j - 1]
            } else {
                1 + table[i - 1][j].min(table[i][j - 1])
            };
        }
    }
    table[n][m]
}

fn ratio_ref(a: &[char], b: &[char]) -> f64 {
    let total = a.len() + b.len();
    if total == 0 {
        return 100.0;
    }
    100.0 * (1.0 - indel_reference(a, b) as f64 / total as f64)
}

fn ratio_str_ref(s1: &str, s2: &str) -> f64 {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    ratio_ref(&a, &b)
}

fn partial_ref(a: &[char], b: &[char]) -> f64 {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return if long.is_empty() { 100.0 } else { 0.0 };
    }
    let mut best = 0.0f64;
    for start in 0..=(long.len() - short.len()) {
        best = best.max(ratio_ref(short, &long[start..start + short.len()]));
    }
    best
}

fn partial_str_ref(s1: &str, s2: &str) -> f64 {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    partial_ref(&a, &b)
}

fn token_sort_ref(s: &str) -> String {
    let mut tokens: Vec<&str> = s.split_whitespace().collect();
    tokens.sort_unstable();
    tokens.join(" ")
}

fn sorted_unique(tokens: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = tokens.iter().map(|t| t.to_string()).collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn token_set_ref(s1: &str, s2: &str, score: fn(&str, &str) -> f64) -> f64 {
    let t1 = sorted_unique(&s1.split_whitespace().collect::<Vec<_>>());
    let t2 = sorted_unique(&s2.split_whitespace().collect::<Vec<_>>());
    let sect: Vec<String> = t1.iter().filter(|t| t2.contains(t)).cloned().collect();
    let d1: Vec<String> = t1.iter().filter(|t| !t2.contains(t)).cloned().collect();
    let d2: Vec<String> = t2.iter().filter(|t| !t1.contains(t)).cloned().collect();
    let joined_sect = sect.join(" ");
    let joined_1 = join_nonempty(&joined_sect, &d1.join(" "));
    let joined_2 = join_nonempty(&joined_sect, &d2.join(" "));
    score(&joined_sect, &joined_1)
        .max(score(&joined_sect, &joined_2))
        .max(score(&joined_1, &joined_2))
}

fn join_nonempty(head: &str, tail: &str) -> String {
    match (head.is_empty(), tail.is_empty()) {
        (true, _) => tail.to_string(),
        (_, true) => head.to_string(),
        _ => format!("{head} {tail}"),
    }
}

/// Spherical-excess area of a polygon given in lon/lat degrees, on the
/// authalic sphere (km²); the independent check for the projected area
/// path. L'Huilier via the signed spherical polygon excess.
pub fn spherical_area_km2(geom: &disgeo::Geom) -> f64 {
    const R: f64 = 6371.0072;
    match geom {
        disgeo::Geom::Point(_) => 0.0,
        disgeo::Geom::Polygon(p) => spherical_polygon_area(p) * R * R,
        disgeo::Geom::MultiPolygon(mp) => {
            mp.0.iter().map(spherical_polygon_area).sum::<f64>() * R * R
        }
    }
}

fn spherical_polygon_area(p: &geo::Polygon<f64>) -> f64 {
    let mut total = spherical_ring_excess(p.exterior()).abs();
    for hole in p.interiors() {
        total -= spherical_ring_excess(hole).abs();
    }
    total.max(0.0)
}

/// Signed spherical excess of a closed ring via the classic longitude
/// integral: sum of (λ2−λ1)·(2 + sin φ1 + sin φ2)/2 over edges.
fn spherical_ring_excess(ring: &geo::LineString<f64>) -> f64 {
    let coords = &ring.0;
    if coords.len() < 4 {
        return 0.0;
    }
    let mut sum = 0.0;
    for pair in coords.windows(2) {
        let (lon1, lat1) = (pair[0].x.to_radians(), pair[0].y.to_radians());
        let (lon2, lat2) = (pair[1].x.to_radians(), pair[1].y.to_radians());
        sum += (lon2 - lon1) * (2.0 + lat1.sin() + lat2.sin());
    }
    (sum / 2.0).abs()
}
