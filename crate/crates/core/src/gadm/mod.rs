//! Local GADM v4.1 backend: loads administrative units, indexes them per
//! country and level, and matches parsed location trees hierarchically
//! with the [`wratio`] fuzzy scorer at a configurable threshold.

mod load;
pub mod wratio;

pub use load::{load_gadm, load_gadm_with, LayerNaming};
pub use wratio::{indel_distance, wratio};

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{Geom, GeomError};
use crate::parser::{LocationTree, TreeEntry};
use crate::textnorm::{self, DescriptorLexicon};

/// Score required for a fuzzy match to be retained.
pub const DEFAULT_FUZZY_THRESHOLD: f64 = 85.0;

#[derive(Debug, Error)]
pub enum GadmError {
    #[error("missing layer {0}")]
    MissingLayer(String),
    #[error("schema mismatch: field {0} absent")]
    SchemaMismatch(String),
    #[error("country {0} has no units at any level")]
    EmptyCountry(String),
    #[error("country {0} is not covered by the index")]
    UnknownCountry(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid GeoJSON: {0}")]
    Geojson(String),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("geopackage: {0}")]
    Gpkg(String),
}

/// One administrative unit: a GADM gid, its names, hierarchy links and
/// polygon geometry.
#[derive(Debug, Clone)]
pub struct GadmUnit {
    pub gid: String,
    pub name: String,
    pub variant_names: Vec<String>,
    pub level: u8,
    pub parent_gid: Option<String>,
    pub country_iso3: String,
    pub geometry: Geom,
}

/// A retained fuzzy match: the unit, its score and the query it answered.
#[derive(Debug, Clone)]
pub struct UnitMatch {
    pub unit: Arc<GadmUnit>,
    pub score: f64,
    pub query_name: String,
}

/// Immutable in-memory index over GADM units: per (country, level) name
/// lookup plus gid and parent-child navigation.
#[derive(Debug, Default)]
pub struct GadmIndex {
    units: Vec<Arc<GadmUnit>>,
    by_gid: HashMap<String, usize>,
    by_name: HashMap<(String, u8), HashMap<String, Vec<usize>>>,
    children: HashMap<String, Vec<usize>>,
    countries: BTreeSet<String>,
    lexicon: DescriptorLexicon,
}

impl GadmIndex {
    pub fn build(units: Vec<GadmUnit>) -> GadmIndex {
        GadmIndex::build_with_lexicon(units, DescriptorLexicon::default())
    }

    pub fn build_with_lexicon(units: Vec<GadmUnit>, lexicon: DescriptorLexicon) -> GadmIndex {
        let mut index = GadmIndex {
            lexicon,
            ..GadmIndex::default()
        };
        for unit in units {
            index.insert(unit);
        }
        index
    }

    fn insert(&mut self, unit: GadmUnit) {
        let names = self.normalized_names_of(&unit);
        let slot = self.units.len();
        self.by_gid.insert(unit.gid.clone(), slot);
        self.countries.insert(unit.country_iso3.clone());
        if let Some(parent) = &unit.parent_gid {
            self.children.entry(parent.clone()).or_default().push(slot);
        }
        let name_map = self
            .by_name
            .entry((unit.country_iso3.clone(), unit.level))
            .or_default();
        for name in names {
            name_map.entry(name).or_default().push(slot);
        }
        self.units.push(Arc::new(unit));
    }

    /// Primary name plus variants, normalized with descriptors stripped;
    /// this is the form queries are matched against.
    fn normalized_names_of(&self, unit: &GadmUnit) -> Vec<String> {
        let mut out = Vec::new();
        for raw in std::iter::once(&unit.name).chain(unit.variant_names.iter()) {
            if let Ok(n) = textnorm::normalize_name_with(raw, true, &self.lexicon) {
                if !out.contains(&n.text) {
                    out.push(n.text);
                }
            }
        }
        out
    }

    pub fn lexicon(&self) -> &DescriptorLexicon {
        &self.lexicon
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn countries(&self) -> impl Iterator<Item = &str> {
        self.countries.iter().map(String::as_str)
    }

    pub fn has_country(&self, iso3: &str) -> bool {
        self.countries.contains(iso3)
    }

    pub fn unit_by_gid(&self, gid: &str) -> Option<&Arc<GadmUnit>> {
        self.by_gid.get(gid).map(|&i| &self.units[i])
    }

    pub fn units_at(&self, iso3: &str, level: u8) -> Vec<&Arc<GadmUnit>> {
        let mut slots: Vec<usize> = self
            .by_name
            .get(&(iso3.to_string(), level))
            .map(|m| m.values().flatten().copied().collect())
            .unwrap_or_default();
        slots.sort_unstable();
        slots.dedup();
        slots.into_iter().map(|i| &self.units[i]).collect()
    }

    pub fn direct_children(&self, gid: &str) -> Vec<&Arc<GadmUnit>> {
        self.children
            .get(gid)
            .map(|slots| slots.iter().map(|&i| &self.units[i]).collect())
            .unwrap_or_default()
    }

    /// Descendants of `parent` at exactly `level`, walking intermediate
    /// levels when the gap is more than one.
    pub fn descendants_at(&self, parent: &GadmUnit, level: u8) -> Vec<&Arc<GadmUnit>> {
        let mut frontier: Vec<&Arc<GadmUnit>> = self.direct_children(&parent.gid);
        let mut current = parent.level + 1;
        while current < level {
            frontier = frontier
                .iter()
                .flat_map(|u| self.direct_children(&u.gid))
                .collect();
            current += 1;
        }
        frontier.into_iter().filter(|u| u.level == level).collect()
    }

    /// Best fuzzy match for a normalized name among the country's units at
    /// `level`, restricted to descendants of `parent` when given. Exact
    /// normalized-name equality short-circuits with score 100; otherwise
    /// the highest-scoring candidate at or above `threshold` wins. Ties
    /// break on smaller edit distance to the query, then smallest gid.
    pub fn match_unit(
        &self,
        iso3: &str,
        name: &str,
        level: u8,
        parent: Option<&GadmUnit>,
        threshold: f64,
    ) -> Option<UnitMatch> {
        let pool: Vec<&Arc<GadmUnit>> = match parent {
            Some(p) => self.descendants_at(p, level),
            None => self.units_at(iso3, level),
        };
        if pool.is_empty() {
            return None;
        }

        // exact short-circuit
        let mut exact: Vec<&Arc<GadmUnit>> = pool
            .iter()
            .filter(|u| self.normalized_names_of(u).iter().any(|n| n == name))
            .copied()
            .collect();
        if !exact.is_empty() {
            exact.sort_by(|a, b| a.gid.cmp(&b.gid));
            return Some(UnitMatch {
                unit: exact[0].clone(),
                score: 100.0,
                query_name: name.to_string(),
            });
        }

        let mut best: Option<(f64, usize, &Arc<GadmUnit>)> = None;
        for unit in pool {
            for candidate_name in self.normalized_names_of(unit) {
                let score = wratio(name, &candidate_name);
                if score < threshold {
                    continue;
                }
                let distance = indel_distance(name, &candidate_name);
                let better = match &best {
                    None => true,
                    Some((s, d, u)) => {
                        score > *s
                            || (score == *s && distance < *d)
                            || (score == *s && distance == *d && unit.gid < u.gid)
                    }
                };
                if better {
                    best = Some((score, distance, unit));
                }
            }
        }
        best.map(|(score, _, unit)| UnitMatch {
            unit: unit.clone(),
            score,
            query_name: name.to_string(),
        })
    }
}

/// One parsed entry together with its GADM outcome; unmatched entries are
/// carried forward so the remote backends can still resolve them.
#[derive(Debug, Clone)]
pub struct TreeMatch {
    pub entry: TreeEntry,
    pub unit_match: Option<UnitMatch>,
}

/// Match a parse tree hierarchically: Admin1 entries first, each child
/// constrained to its matched parent's descendants. When the parent failed
/// to match, the child falls back to the unconstrained country pool.
pub fn match_tree(
    tree: &LocationTree,
    iso3: &str,
    index: &GadmIndex,
    threshold: f64,
) -> Result<Vec<TreeMatch>, GadmError> {
    if !index.has_country(iso3) {
        return Err(GadmError::UnknownCountry(iso3.to_string()));
    }

    let mut matched_ancestors: HashMap<(u8, String), UnitMatch> = HashMap::new();
    let mut out = Vec::new();
    for entry in tree.entries() {
        let level = entry.level.as_u8();
        let query = match textnorm::normalize_name_with(&entry.name, true, &index.lexicon) {
            Ok(n) => n.text,
            Err(_) => {
                out.push(TreeMatch {
                    entry,
                    unit_match: None,
                });
                continue;
            }
        };

        // nearest ancestor that actually matched
        let parent_match = entry
            .parents
            .iter()
            .find_map(|(lvl, name)| matched_ancestors.get(&(lvl.as_u8(), name.clone())));

        let unit_match = match parent_match {
            Some(parent) => index.match_unit(iso3, &query, level, Some(&parent.unit), threshold),
            None => index.match_unit(iso3, &query, level, None, threshold),
        };

        if let Some(m) = &unit_match {
            matched_ancestors.insert((level, entry.name.clone()), m.clone());
        }
        out.push(TreeMatch { entry, unit_match });
    }
    Ok(out)
}
