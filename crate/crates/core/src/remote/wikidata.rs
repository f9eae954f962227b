//! Wikidata SPARQL client: label/alias lookup with coordinates (P625) and
//! country (P17), country-consistency filtering and geodesic ranking
//! against the parent unit.

use std::sync::Arc;
use std::time::Duration;

use serde_json::Value;

use super::{get_json_with_retry, RandomizedBackoff, RateLimiter, RemoteError};
use crate::candidate::{CandidateGeometry, SourceTag};
use crate::countries::CountryAliases;
use crate::geometry::{self, Geom};

pub const DEFAULT_RESULT_LIMIT: u32 = 10;

/// SPARQL for entities whose English (or untagged) label or alias equals
/// `name` case-insensitively, binding coordinates, country label and QID.
pub fn build_sparql(name: &str, _country: &str) -> String {
    assert!(!name.trim().is_empty(), "query name must be non-empty");
    build_sparql_with_limit(name, DEFAULT_RESULT_LIMIT)
}

pub fn build_sparql_with_limit(name: &str, limit: u32) -> String {
    let literal = name.replace('\\', "\\\\").replace('"', "\\\"");
    format!(
        r#"SELECT DISTINCT ?item ?label ?coord ?countryLabel WHERE {{
  ?item rdfs:label|skos:altLabel ?label .
  FILTER((LANG(?label) = "en" || LANG(?label) = "") && LCASE(STR(?label)) = LCASE("{literal}"))
  ?item wdt:P625 ?coord .
  OPTIONAL {{
    ?item wdt:P17 ?country .
    ?country rdfs:label ?countryLabel .
    FILTER(LANG(?countryLabel) = "en")
  }}
}}
LIMIT {limit}"#
    )
}

#[derive(Debug, Clone)]
struct WikidataCandidate {
    qid: String,
    label: String,
    point: Geom,
    country_label: Option<String>,
    rank: usize,
}

pub struct WikidataClient {
    agent: ureq::Agent,
    endpoint: String,
    result_limit: u32,
    limiter: Arc<RateLimiter>,
    backoff: RandomizedBackoff,
}

impl WikidataClient {
    pub fn new(
        endpoint: impl Into<String>,
        limiter: Arc<RateLimiter>,
        backoff: RandomizedBackoff,
        result_limit: u32,
    ) -> WikidataClient {
        WikidataClient {
            agent: ureq::AgentBuilder::new()
                .timeout(Duration::from_secs(60))
                .build(),
            endpoint: endpoint.into(),
            result_limit,
            limiter,
            backoff,
        }
    }

    /// Geocode one parsed location. Candidates are filtered to the
    /// record's country; with a parent geometry, candidates inside the
    /// parent polygon rank ahead of all outside ones and geodesic
    /// distance to the parent's representative point breaks the rest.
    /// Without a parent, the first country-consistent candidate wins.
    pub fn geocode(
        &self,
        name: &str,
        country: &str,
        parent_geometry: Option<&Geom>,
        aliases: &CountryAliases,
    ) -> Result<Option<CandidateGeometry>, RemoteError> {
        let query = build_sparql_with_limit(name, self.result_limit);
        let value = get_json_with_retry(
            || {
                self.agent
                    .get(&self.endpoint)
                    .set("Accept", "application/sparql-results+json")
                    .query("format", "json")
                    .query("query", &query)
            },
            &self.limiter,
            &self.backoff,
        )?;

        let candidates = parse_bindings(&value)?;
        let consistent: Vec<&WikidataCandidate> = candidates
            .iter()
            .filter(|c| match &c.country_label {
                Some(label) => aliases.same_country(label, country),
                None => false,
            })
            .collect();
        if consistent.is_empty() {
            return Ok(None);
        }

        let chosen = match parent_geometry {
            Some(parent) => rank_by_parent(&consistent, parent),
            None => consistent[0],
        };
        Ok(Some(CandidateGeometry {
            source: SourceTag::WIKIDATA,
            matched_name: chosen.label.clone(),
            geometry: chosen.point.clone(),
            external_id: chosen.qid.clone(),
            score_or_rank: chosen.rank as f64,
            query_context: vec![name.to_string(), country.to_string()],
        }))
    }
}

/// Containment in the parent polygon beats everything; geodesic distance
/// to the parent's representative point orders the rest. Response order
/// breaks ties.
fn rank_by_parent<'c>(
    candidates: &[&'c WikidataCandidate],
    parent: &Geom,
) -> &'c WikidataCandidate {
    let reference = parent.representative_point();
    let mut best: Option<(&WikidataCandidate, bool, f64)> = None;
    for c in candidates {
        let inside = parent.is_polygonal()
            && geometry::contains_point(parent, &c.point).unwrap_or(false);
        let distance = match (reference, c.point.as_point()) {
            (Some(r), Ok(p)) => geometry::geodesic_distance(p, r),
            _ => f64::INFINITY,
        };
        let better = match &best {
            None => true,
            Some((_, best_inside, best_distance)) => {
                (inside && !best_inside) || (inside == *best_inside && distance < *best_distance)
            }
        };
        if better {
            best = Some((c, inside, distance));
        }
    }
    best.expect("candidates are non-empty").0
}

fn parse_bindings(value: &Value) -> Result<Vec<WikidataCandidate>, RemoteError> {
    let bindings = value
        .pointer("/results/bindings")
        .and_then(Value::as_array)
        .ok_or_else(|| RemoteError::MalformedResponse("no results.bindings".into()))?;
    let mut out = Vec::new();
    for (rank, binding) in bindings.iter().enumerate() {
        let item = binding_value(binding, "item")
            .ok_or_else(|| RemoteError::MalformedResponse("binding without item".into()))?;
        let qid = item.rsplit('/').next().unwrap_or(&item).to_string();
        let label = binding_value(binding, "label").unwrap_or_else(|| qid.clone());
        let coord = binding_value(binding, "coord")
            .ok_or_else(|| RemoteError::MalformedResponse("binding without coord".into()))?;
        let point = parse_wkt_point(&coord)?;
        let country_label = binding_value(binding, "countryLabel");
        out.push(WikidataCandidate {
            qid,
            label,
            point,
            country_label,
            rank,
        });
    }
    Ok(out)
}

fn binding_value(binding: &Value, key: &str) -> Option<String> {
    binding
        .get(key)
        .and_then(|v| v.get("value"))
        .and_then(Value::as_str)
        .map(str::to_string)
}

/// P625 literals arrive as WKT, e.g. "Point(74.35 31.52)".
fn parse_wkt_point(wkt: &str) -> Result<Geom, RemoteError> {
    let trimmed = wkt.trim();
    let lower = trimmed.to_ascii_lowercase();
    let inner = lower
        .strip_prefix("point(")
        .and_then(|rest| rest.strip_suffix(')'))
        .ok_or_else(|| RemoteError::MalformedResponse(format!("not a WKT point: {wkt}")))?;
    let mut parts = inner.split_whitespace();
    let lon: f64 = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| RemoteError::MalformedResponse(format!("bad WKT point: {wkt}")))?;
    let lat: f64 = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| RemoteError::MalformedResponse(format!("bad WKT point: {wkt}")))?;
    Ok(Geom::point(lon, lat))
}
