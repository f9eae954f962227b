//! Deterministic offline parser: comma/semicolon splitting, parentheticals
//! as parents, descriptor keywords as level hints. A crude substitute for
//! the provider so the pipeline runs hermetically.

use super::{AdminEntry, AdminLevel, LocationTree, ParseError};
use crate::textnorm::{self, strip_parentheticals};

const ADMIN1_KEYWORDS: &[&str] = &["province", "state", "region", "governorate", "prefecture"];
const ADMIN2_KEYWORDS: &[&str] = &["district", "county", "department"];

/// Parse a location string without a model: split on commas, semicolons
/// and " and "; treat parentheticals as higher-level parents; assign
/// levels from descriptor keywords (province/state/region at Admin1,
/// district/county/department at Admin2, Admin2 by default, Admin3 under
/// an Admin2 parent). Pure function of its inputs.
pub fn parse_fallback(location: &str, country: &str) -> Result<LocationTree, ParseError> {
    let country_norm = textnorm::normalize_name(country, false)
        .map(|n| n.text)
        .unwrap_or_default();

    let mut tree = LocationTree::default();
    for fragment in split_fragments(location) {
        let (base, parentheticals) = strip_parentheticals(&fragment);

        let keyword_level = detect_level(&base);
        let name = match textnorm::normalize_name(&base, true) {
            Ok(n) => n.text,
            Err(_) => continue,
        };
        if !country_norm.is_empty() && name == country_norm {
            continue; // the country itself carries no subnational information
        }

        let parent = parentheticals
            .iter()
            .find_map(|span| parent_from_span(span, &country_norm));

        let level = match keyword_level {
            Some(level) => level,
            None => match &parent {
                Some((parent_level, _)) => parent_level.finer().unwrap_or(AdminLevel::Admin3),
                None => AdminLevel::Admin2,
            },
        };

        match parent {
            Some((parent_level, parent_name)) if parent_level < level => {
                attach_under_parent(&mut tree, parent_level, &parent_name, name, level);
            }
            _ => insert_entry(&mut tree, AdminEntry::new(name, level)),
        }
    }

    if tree.is_empty() {
        return Err(ParseError::EmptyParse);
    }
    Ok(tree)
}

fn split_fragments(location: &str) -> Vec<String> {
    location
        .split([',', ';'])
        .flat_map(|piece| piece.split(" and "))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Level implied by a descriptor keyword in the raw fragment, if any.
fn detect_level(text: &str) -> Option<AdminLevel> {
    let lowered = match textnorm::normalize_name(text, false) {
        Ok(n) => n.text,
        Err(_) => return None,
    };
    for token in lowered.split(' ') {
        if ADMIN1_KEYWORDS.contains(&token) {
            return Some(AdminLevel::Admin1);
        }
        if ADMIN2_KEYWORDS.contains(&token) {
            return Some(AdminLevel::Admin2);
        }
    }
    None
}

/// A parenthetical span as a (level, name) parent; countries are skipped.
fn parent_from_span(span: &str, country_norm: &str) -> Option<(AdminLevel, String)> {
    let level = detect_level(span).unwrap_or(AdminLevel::Admin1);
    let name = textnorm::normalize_name(span, true).ok()?.text;
    if !country_norm.is_empty() && name == country_norm {
        return None;
    }
    Some((level, name))
}

fn insert_entry(tree: &mut LocationTree, entry: AdminEntry) {
    let list = match entry.level {
        AdminLevel::Admin1 => &mut tree.admin1,
        _ => &mut tree.orphans,
    };
    if !list
        .iter()
        .any(|e| e.name == entry.name && e.level == entry.level)
    {
        list.push(entry);
    }
}

/// Attach `name` under the parent, creating or merging the parent entry.
fn attach_under_parent(
    tree: &mut LocationTree,
    parent_level: AdminLevel,
    parent_name: &str,
    name: String,
    level: AdminLevel,
) {
    let child = AdminEntry::new(name, level);
    let parent_list = match parent_level {
        AdminLevel::Admin1 => &mut tree.admin1,
        _ => &mut tree.orphans,
    };
    if let Some(existing) = parent_list
        .iter_mut()
        .find(|e| e.name == parent_name && e.level == parent_level)
    {
        if !existing
            .children
            .iter()
            .any(|c| c.name == child.name && c.level == child.level)
        {
            existing.children.push(child);
        }
    } else {
        let mut parent = AdminEntry::new(parent_name.to_string(), parent_level);
        parent.children.push(child);
        parent_list.push(parent);
    }
}
