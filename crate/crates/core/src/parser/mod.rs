//! Free-text location strings to hierarchical administrative trees, via a
//! pluggable completion provider with caching and retries, or a
//! deterministic rule-based fallback.

mod fallback;
mod prompt;
mod provider;

pub use fallback::parse_fallback;
pub use prompt::{build_prompt, PromptTemplate};
pub use provider::{HttpProvider, Provider, ProviderError, RetryPolicy};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::cache::{digest, CacheError, JsonCache};
use crate::textnorm;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("location string is empty")]
    EmptyLocation,
    #[error("provider exhausted after {attempts} attempts: {last}")]
    ProviderExhausted { attempts: u32, last: String },
    #[error("no valid location JSON in provider output")]
    MalformedOutput,
    #[error("parse produced zero locations")]
    EmptyParse,
    #[error("schema violation at {path}: {reason}")]
    SchemaViolation { path: String, reason: String },
    #[error(transparent)]
    Cache(#[from] CacheError),
}

/// Subnational administrative level, finest is Admin3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AdminLevel {
    Admin1,
    Admin2,
    Admin3,
}

impl AdminLevel {
    pub fn as_u8(&self) -> u8 {
        match self {
            AdminLevel::Admin1 => 1,
            AdminLevel::Admin2 => 2,
            AdminLevel::Admin3 => 3,
        }
    }

    pub fn from_u8(v: u8) -> Option<AdminLevel> {
        match v {
            1 => Some(AdminLevel::Admin1),
            2 => Some(AdminLevel::Admin2),
            3 => Some(AdminLevel::Admin3),
            _ => None,
        }
    }

    pub fn key(&self) -> &'static str {
        match self {
            AdminLevel::Admin1 => "Admin1",
            AdminLevel::Admin2 => "Admin2",
            AdminLevel::Admin3 => "Admin3",
        }
    }

    pub fn finer(&self) -> Option<AdminLevel> {
        AdminLevel::from_u8(self.as_u8() + 1)
    }
}

impl std::fmt::Display for AdminLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.key())
    }
}

/// One named unit in the parse tree; children are at finer levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdminEntry {
    pub name: String,
    pub level: AdminLevel,
    pub children: Vec<AdminEntry>,
}

impl AdminEntry {
    pub fn new(name: impl Into<String>, level: AdminLevel) -> AdminEntry {
        AdminEntry {
            name: name.into(),
            level,
            children: Vec::new(),
        }
    }
}

/// Hierarchical parse result. `admin1` holds the roots; `orphans` holds
/// Admin2/Admin3 entries whose parent could not be determined.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LocationTree {
    pub admin1: Vec<AdminEntry>,
    pub orphans: Vec<AdminEntry>,
}

/// Flattened view of one tree entry with its ancestor names, most
/// specific first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeEntry {
    pub name: String,
    pub level: AdminLevel,
    pub parents: Vec<(AdminLevel, String)>,
}

impl LocationTree {
    pub fn is_empty(&self) -> bool {
        self.admin1.is_empty() && self.orphans.is_empty()
    }

    /// Every entry in the tree, parents before children.
    pub fn entries(&self) -> Vec<TreeEntry> {
        let mut out = Vec::new();
        for root in &self.admin1 {
            flatten(root, &mut Vec::new(), &mut out);
        }
        for orphan in &self.orphans {
            flatten(orphan, &mut Vec::new(), &mut out);
        }
        out
    }

    /// Serialize to the canonical three-key JSON object. Lower-level
    /// entries name their parent so the hierarchy survives the flat form.
    pub fn to_json(&self) -> Value {
        let mut admin1 = Vec::new();
        let mut admin2 = Vec::new();
        let mut admin3 = Vec::new();
        for root in &self.admin1 {
            admin1.push(Value::String(root.name.clone()));
            for child in &root.children {
                let bucket = match child.level {
                    AdminLevel::Admin2 => &mut admin2,
                    AdminLevel::Admin3 => &mut admin3,
                    AdminLevel::Admin1 => continue,
                };
                bucket.push(json!({"name": child.name, "parent": root.name}));
                for grandchild in &child.children {
                    admin3.push(json!({"name": grandchild.name, "parent": child.name}));
                }
            }
        }
        for orphan in &self.orphans {
            let bucket = match orphan.level {
                AdminLevel::Admin1 => &mut admin1,
                AdminLevel::Admin2 => &mut admin2,
                AdminLevel::Admin3 => &mut admin3,
            };
            bucket.push(Value::String(orphan.name.clone()));
            for child in &orphan.children {
                let bucket = match child.level {
                    AdminLevel::Admin2 => &mut admin2,
                    AdminLevel::Admin3 => &mut admin3,
                    AdminLevel::Admin1 => continue,
                };
                bucket.push(json!({"name": child.name, "parent": orphan.name}));
            }
        }
        json!({"Admin1": admin1, "Admin2": admin2, "Admin3": admin3})
    }
}

fn flatten(entry: &AdminEntry, path: &mut Vec<(AdminLevel, String)>, out: &mut Vec<TreeEntry>) {
    let mut parents = path.clone();
    parents.reverse(); // most specific ancestor first
    out.push(TreeEntry {
        name: entry.name.clone(),
        level: entry.level,
        parents,
    });
    path.push((entry.level, entry.name.clone()));
    for child in &entry.children {
        flatten(child, path, out);
    }
    path.pop();
}

/// Validate a parsed JSON value against the canonical schema: exactly the
/// keys `Admin1`, `Admin2`, `Admin3` (each a list of names or
/// `{name, parent}` objects), nothing else. Returns the linked tree.
pub fn validate_tree(value: &Value) -> Result<LocationTree, ParseError> {
    let object = value.as_object().ok_or_else(|| violation("$", "not an object"))?;
    for key in object.keys() {
        if !matches!(key.as_str(), "Admin1" | "Admin2" | "Admin3") {
            return Err(violation(key, "key not permitted"));
        }
    }

    let admin1_raw = entries_at(object, "Admin1")?;
    let admin2_raw = entries_at(object, "Admin2")?;
    let admin3_raw = entries_at(object, "Admin3")?;

    let mut tree = LocationTree::default();
    for (name, parent) in &admin1_raw {
        if parent.is_some() {
            return Err(violation("Admin1", "top-level entries cannot have a parent"));
        }
        push_unique(&mut tree.admin1, AdminEntry::new(name.clone(), AdminLevel::Admin1));
    }

    for (name, parent) in &admin2_raw {
        match parent {
            Some(parent_name) => {
                let parent_entry = find_or_create_root(&mut tree, parent_name);
                push_unique(
                    &mut parent_entry.children,
                    AdminEntry::new(name.clone(), AdminLevel::Admin2),
                );
            }
            None => push_unique(
                &mut tree.orphans,
                AdminEntry::new(name.clone(), AdminLevel::Admin2),
            ),
        }
    }

    for (name, parent) in &admin3_raw {
        let entry = AdminEntry::new(name.clone(), AdminLevel::Admin3);
        match parent {
            Some(parent_name) => match find_parent_for_admin3(&mut tree, parent_name) {
                Some(children) => push_unique(children, entry),
                None => {
                    // named parent unseen at Admin1/Admin2: carry it as an
                    // orphan Admin2 so the reference is not lost
                    let mut parent_entry =
                        AdminEntry::new(parent_name.clone(), AdminLevel::Admin2);
                    parent_entry.children.push(entry);
                    push_unique_subtree(&mut tree.orphans, parent_entry);
                }
            },
            None => push_unique(&mut tree.orphans, entry),
        }
    }
    Ok(tree)
}

fn violation(path: &str, reason: &str) -> ParseError {
    ParseError::SchemaViolation {
        path: path.to_string(),
        reason: reason.to_string(),
    }
}

/// Extract `(name, parent)` pairs from one of the three lists.
fn entries_at(
    object: &Map<String, Value>,
    key: &str,
) -> Result<Vec<(String, Option<String>)>, ParseError> {
    let Some(value) = object.get(key) else {
        return Ok(Vec::new());
    };
    let list = value
        .as_array()
        .ok_or_else(|| violation(key, "expected a list"))?;
    let mut out = Vec::new();
    for (i, item) in list.iter().enumerate() {
        let path = format!("{key}[{i}]");
        match item {
            Value::String(s) => {
                let name = s.trim();
                if name.is_empty() {
                    return Err(violation(&path, "empty name"));
                }
                out.push((name.to_string(), None));
            }
            Value::Object(fields) => {
                for field in fields.keys() {
                    if !matches!(field.as_str(), "name" | "parent") {
                        return Err(violation(
                            &format!("{path}.{field}"),
                            "field not permitted",
                        ));
                    }
                }
                let name = fields
                    .get("name")
                    .and_then(Value::as_str)
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| violation(&path, "missing or empty name"))?;
                let parent = match fields.get("parent") {
                    None | Some(Value::Null) => None,
                    Some(Value::String(p)) => {
                        let p = p.trim();
                        if p.is_empty() {
                            None
                        } else {
                            Some(p.to_string())
                        }
                    }
                    Some(_) => return Err(violation(&format!("{path}.parent"), "not a string")),
                };
                out.push((name.to_string(), parent));
            }
            _ => return Err(violation(&path, "expected a name or an object")),
        }
    }
    Ok(out)
}

fn names_match(a: &str, b: &str) -> bool {
    a.eq_ignore_ascii_case(b)
}

fn push_unique(list: &mut Vec<AdminEntry>, entry: AdminEntry) {
    if !list
        .iter()
        .any(|e| names_match(&e.name, &entry.name) && e.level == entry.level)
    {
        list.push(entry);
    }
}

/// Like [`push_unique`], but merges children when the entry already exists.
fn push_unique_subtree(list: &mut Vec<AdminEntry>, entry: AdminEntry) {
    if let Some(existing) = list
        .iter_mut()
        .find(|e| names_match(&e.name, &entry.name) && e.level == entry.level)
    {
        for child in entry.children {
            push_unique(&mut existing.children, child);
        }
    } else {
        list.push(entry);
    }
}

fn find_or_create_root<'t>(tree: &'t mut LocationTree, name: &str) -> &'t mut AdminEntry {
    let position = tree.admin1.iter().position(|e| names_match(&e.name, name));
    let index = match position {
        Some(i) => i,
        None => {
            tree.admin1
                .push(AdminEntry::new(name.to_string(), AdminLevel::Admin1));
            tree.admin1.len() - 1
        }
    };
    &mut tree.admin1[index]
}

/// Children list of the named Admin2 (searched first) or Admin1.
fn find_parent_for_admin3<'t>(
    tree: &'t mut LocationTree,
    name: &str,
) -> Option<&'t mut Vec<AdminEntry>> {
    // borrow-checker friendly: locate first, then reborrow
    for (ri, root) in tree.admin1.iter().enumerate() {
        for (ci, child) in root.children.iter().enumerate() {
            if child.level == AdminLevel::Admin2 && names_match(&child.name, name) {
                return Some(&mut tree.admin1[ri].children[ci].children);
            }
        }
    }
    for (oi, orphan) in tree.orphans.iter().enumerate() {
        if orphan.level == AdminLevel::Admin2 && names_match(&orphan.name, name) {
            return Some(&mut tree.orphans[oi].children);
        }
    }
    for (ri, root) in tree.admin1.iter().enumerate() {
        if names_match(&root.name, name) {
            return Some(&mut tree.admin1[ri].children);
        }
    }
    None
}

/// Candidate top-level `{...}` spans in provider output, in order.
/// Tolerates chatty responses by scanning for balanced brace spans outside
/// string literals.
fn json_spans(text: &str) -> Vec<&str> {
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate() {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' if depth > 0 => in_string = true,
            b'{' => {
                if depth == 0 {
                    start = i;
                }
                depth += 1;
            }
            b'}' => {
                if depth > 0 {
                    depth -= 1;
                    if depth == 0 {
                        spans.push(&text[start..=i]);
                    }
                }
            }
            _ => {}
        }
    }
    spans
}

/// First balanced JSON object in `text` that passes [`validate_tree`].
pub fn extract_tree(text: &str) -> Result<LocationTree, ParseError> {
    for span in json_spans(text) {
        if let Ok(value) = serde_json::from_str::<Value>(span) {
            if let Ok(tree) = validate_tree(&value) {
                return Ok(tree);
            }
        }
    }
    Err(ParseError::MalformedOutput)
}

/// Cache key for one parse: normalized location text, country, prompt
/// version and provider identity. Stable across runs and platforms.
pub fn parse_cache_key(
    location: &str,
    country: &str,
    template: &PromptTemplate,
    provider_identity: &str,
) -> String {
    let normalized = textnorm::normalize_name(location, false)
        .map(|n| n.text)
        .unwrap_or_default();
    digest(&[
        &normalized,
        country,
        &template.version,
        provider_identity,
    ])
}

/// Parse one location with the provider, consulting the cache first. On a
/// key hit the provider is not called at all. Transient provider failures
/// are retried with exponential backoff and jitter.
pub fn parse_with_provider(
    location: &str,
    country: &str,
    template: &PromptTemplate,
    provider: &dyn Provider,
    cache: Option<&JsonCache>,
    retry: &RetryPolicy,
) -> Result<LocationTree, ParseError> {
    let key = parse_cache_key(location, country, template, &provider.identity());
    if let Some(cache) = cache {
        if let Some(value) = cache.get::<Value>("parse", &key)? {
            let tree = validate_tree(&value)?;
            return if tree.is_empty() {
                Err(ParseError::EmptyParse)
            } else {
                Ok(tree)
            };
        }
    }

    let prompt = build_prompt(template, location, country)?;
    let output = call_with_retries(provider, &prompt, retry)?;
    let tree = extract_tree(&output)?;
    if let Some(cache) = cache {
        cache.put("parse", &key, &tree.to_json())?;
    }
    if tree.is_empty() {
        return Err(ParseError::EmptyParse);
    }
    Ok(tree)
}

fn call_with_retries(
    provider: &dyn Provider,
    prompt: &str,
    retry: &RetryPolicy,
) -> Result<String, ParseError> {
    let mut rng = rand::thread_rng();
    let mut last = String::new();
    for attempt in 0..=retry.retries {
        match provider.complete(prompt) {
            Ok(text) => return Ok(text),
            Err(ProviderError::Transient(reason)) => {
                last = reason;
                if attempt < retry.retries {
                    std::thread::sleep(retry.delay(attempt, &mut rng));
                }
            }
            Err(ProviderError::Fatal(reason)) => {
                return Err(ParseError::ProviderExhausted {
                    attempts: attempt + 1,
                    last: reason,
                })
            }
        }
    }
    Err(ParseError::ProviderExhausted {
        attempts: retry.retries + 1,
        last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;
    use std::sync::atomic::{AtomicU32, Ordering};

    #[test]
    fn minimal_valid_tree() {
        let tree = validate_tree(&json!({"Admin1": ["Sindh"], "Admin2": [], "Admin3": []}))
            .unwrap();
        assert_eq!(tree.admin1.len(), 1);
        assert_eq!(tree.admin1[0].name, "Sindh");
        assert!(tree.orphans.is_empty());
    }

    #[test]
    fn forbidden_key_is_rejected() {
        let err = validate_tree(&json!({"Admin1": [], "Region": ["x"]})).unwrap_err();
        match err {
            ParseError::SchemaViolation { path, .. } => assert_eq!(path, "Region"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parent_linking() {
        let tree = validate_tree(&json!({
            "Admin1": ["Punjab"],
            "Admin2": [{"name": "Lahore", "parent": "Punjab"}],
        }))
        .unwrap();
        assert_eq!(tree.admin1.len(), 1);
        assert_eq!(tree.admin1[0].children.len(), 1);
        assert_eq!(tree.admin1[0].children[0].name, "Lahore");
        assert_eq!(tree.admin1[0].children[0].level, AdminLevel::Admin2);
    }

    #[test]
    fn named_but_unlisted_parent_is_created() {
        let tree = validate_tree(&json!({
            "Admin2": [{"name": "Lahore", "parent": "Punjab"}],
        }))
        .unwrap();
        assert_eq!(tree.admin1.len(), 1);
        assert_eq!(tree.admin1[0].name, "Punjab");
        assert_eq!(tree.admin1[0].children[0].name, "Lahore");
    }

    #[test]
    fn admin3_attaches_to_admin1_when_no_admin2() {
        let tree = validate_tree(&json!({
            "Admin1": ["Punjab"],
            "Admin3": [{"name": "Model Town", "parent": "Punjab"}],
        }))
        .unwrap();
        assert_eq!(tree.admin1[0].children.len(), 1);
        assert_eq!(tree.admin1[0].children[0].level, AdminLevel::Admin3);
    }

    #[test]
    fn plain_lower_level_names_become_orphans() {
        let tree = validate_tree(&json!({"Admin2": ["Dadu", "Thatta"]})).unwrap();
        assert_eq!(tree.orphans.len(), 2);
        assert!(tree.orphans.iter().all(|e| e.level == AdminLevel::Admin2));
    }

    #[test]
    fn empty_name_rejected() {
        assert!(validate_tree(&json!({"Admin1": ["  "]})).is_err());
        assert!(validate_tree(&json!({"Admin2": [{"name": "", "parent": "X"}]})).is_err());
        assert!(validate_tree(&json!({"Admin1": [42]})).is_err());
        assert!(validate_tree(&json!({"Admin2": [{"name": "a", "levelx": 1}]})).is_err());
    }

    #[test]
    fn serialize_validate_round_trip() {
        let tree = validate_tree(&json!({
            "Admin1": ["Punjab", "Sindh"],
            "Admin2": [{"name": "Lahore", "parent": "Punjab"}, "Orphantown"],
            "Admin3": [{"name": "Model Town", "parent": "Lahore"}],
        }))
        .unwrap();
        let back = validate_tree(&tree.to_json()).unwrap();
        assert_eq!(tree, back);
    }

    #[test]
    fn entries_are_flattened_with_ancestors() {
        let tree = validate_tree(&json!({
            "Admin1": ["Punjab"],
            "Admin2": [{"name": "Lahore", "parent": "Punjab"}],
            "Admin3": [{"name": "Model Town", "parent": "Lahore"}],
        }))
        .unwrap();
        let entries = tree.entries();
        assert_eq!(entries.len(), 3);
        let deepest = &entries[2];
        assert_eq!(deepest.name, "Model Town");
        assert_eq!(
            deepest.parents,
            vec![
                (AdminLevel::Admin2, "Lahore".to_string()),
                (AdminLevel::Admin1, "Punjab".to_string()),
            ]
        );
    }

    #[test]
    fn json_span_extraction_tolerates_prose() {
        let text = r#"Sure! Here is the result: {"Admin1": ["Sindh"]} — let me know."#;
        let tree = extract_tree(text).unwrap();
        assert_eq!(tree.admin1[0].name, "Sindh");
    }

    #[test]
    fn extraction_skips_invalid_spans() {
        let text = r#"{"oops": 1} then {"Admin1": ["Sindh"], "Admin2": []}"#;
        let tree = extract_tree(text).unwrap();
        assert_eq!(tree.admin1[0].name, "Sindh");
    }

    #[test]
    fn extraction_handles_braces_in_strings() {
        let text = r#"{"Admin1": ["sindh } {"]}"#;
        let tree = extract_tree(text).unwrap();
        assert_eq!(tree.admin1[0].name, "sindh } {");
    }

    struct ScriptedProvider {
        calls: AtomicU32,
        fail_first: u32,
        response: String,
    }

    impl Provider for ScriptedProvider {
        fn complete(&self, _prompt: &str) -> Result<String, ProviderError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            if n < self.fail_first {
                Err(ProviderError::Transient("scripted outage".into()))
            } else {
                Ok(self.response.clone())
            }
        }
        fn identity(&self) -> String {
            "scripted".into()
        }
    }

    fn fast_retry() -> RetryPolicy {
        RetryPolicy {
            retries: 5,
            base: std::time::Duration::from_millis(1),
            cap: std::time::Duration::from_millis(8),
        }
    }

    #[test]
    fn succeeds_after_two_transient_failures_with_three_calls() {
        let provider = ScriptedProvider {
            calls: AtomicU32::new(0),
            fail_first: 2,
            response: r#"{"Admin1": ["Sindh"]}"#.into(),
        };
        let template = PromptTemplate::default();
        let tree =
            parse_with_provider("Sindh", "Pakistan", &template, &provider, None, &fast_retry())
                .unwrap();
        assert_eq!(tree.admin1[0].name, "Sindh");
        assert_eq!(provider.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn exhausts_after_all_transient_failures() {
        let provider = ScriptedProvider {
            calls: AtomicU32::new(0),
            fail_first: u32::MAX,
            response: String::new(),
        };
        let template = PromptTemplate::default();
        let err =
            parse_with_provider("Sindh", "Pakistan", &template, &provider, None, &fast_retry())
                .unwrap_err();
        match err {
            ParseError::ProviderExhausted { attempts, .. } => assert_eq!(attempts, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(provider.calls.load(Ordering::SeqCst), 6);
    }

    #[test]
    fn cache_hit_skips_provider() {
        let dir = tempfile::tempdir().unwrap();
        let cache = JsonCache::new(dir.path());
        let provider = ScriptedProvider {
            calls: AtomicU32::new(0),
            fail_first: 0,
            response: r#"{"Admin1": ["Sindh"]}"#.into(),
        };
        let template = PromptTemplate::default();
        let first = parse_with_provider(
            "Sindh",
            "Pakistan",
            &template,
            &provider,
            Some(&cache),
            &fast_retry(),
        )
        .unwrap();
        assert_eq!(provider.calls.load(Ordering::SeqCst), 1);
        let second = parse_with_provider(
            "Sindh",
            "Pakistan",
            &template,
            &provider,
            Some(&cache),
            &fast_retry(),
        )
        .unwrap();
        assert_eq!(provider.calls.load(Ordering::SeqCst), 1, "cache hit must not call");
        assert_eq!(first, second);
    }

    #[test]
    fn malformed_output_is_reported() {
        let provider = ScriptedProvider {
            calls: AtomicU32::new(0),
            fail_first: 0,
            response: "no json here".into(),
        };
        let template = PromptTemplate::default();
        let err =
            parse_with_provider("Sindh", "Pakistan", &template, &provider, None, &fast_retry())
                .unwrap_err();
        assert!(matches!(err, ParseError::MalformedOutput));
    }

    #[test]
    fn empty_parse_is_reported() {
        let provider = ScriptedProvider {
            calls: AtomicU32::new(0),
            fail_first: 0,
            response: r#"{"Admin1": [], "Admin2": [], "Admin3": []}"#.into(),
        };
        let template = PromptTemplate::default();
        let err =
            parse_with_provider("Sindh", "Pakistan", &template, &provider, None, &fast_retry())
                .unwrap_err();
        assert!(matches!(err, ParseError::EmptyParse));
    }

    #[test]
    fn cache_key_is_stable_and_discriminating() {
        let template = PromptTemplate::default();
        let a = parse_cache_key("Sindh", "Pakistan", &template, "m1");
        assert_eq!(a, parse_cache_key("Sindh", "Pakistan", &template, "m1"));
        // same text after normalization: case and spacing do not matter
        assert_eq!(a, parse_cache_key("  SINDH ", "Pakistan", &template, "m1"));
        assert_ne!(a, parse_cache_key("Sindh", "India", &template, "m1"));
        assert_ne!(a, parse_cache_key("Sindh", "Pakistan", &template, "m2"));
        let mut other = PromptTemplate::default();
        other.version = "other".into();
        assert_ne!(a, parse_cache_key("Sindh", "Pakistan", &other, "m1"));
    }
}
