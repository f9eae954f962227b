//! Nominatim search client: context-aware free-form queries built from
//! the parsed hierarchy, polygon-preferring result selection.

use std::sync::Arc;
use std::time::Duration;

use serde_json::Value;

use super::{get_json_with_retry, RandomizedBackoff, RateLimiter, RemoteError};
use crate::candidate::{CandidateGeometry, SourceTag};
use crate::geometry::Geom;

pub const DEFAULT_USER_AGENT: &str = concat!("disgeo/", env!("CARGO_PKG_VERSION"));
pub const DEFAULT_RESULT_LIMIT: u32 = 5;

/// Descriptor for one search request; `q` composes the place name with
/// its parent units and the country, most specific first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NominatimQuery {
    pub q: String,
    pub limit: u32,
    pub user_agent: String,
}

impl NominatimQuery {
    /// Fixed query string parameters: structured JSON output with polygon
    /// geometry included and no address breakdown.
    pub fn params(&self) -> Vec<(&'static str, String)> {
        vec![
            ("q", self.q.clone()),
            ("format", "jsonv2".to_string()),
            ("polygon_geojson", "1".to_string()),
            ("limit", self.limit.to_string()),
            ("addressdetails", "0".to_string()),
        ]
    }
}

/// Compose "name, parent_1, ..., country".
pub fn build_nominatim_query(name: &str, parents: &[String], country: &str) -> NominatimQuery {
    assert!(!name.trim().is_empty(), "query name must be non-empty");
    let mut pieces = vec![name.to_string()];
    pieces.extend(parents.iter().cloned());
    if !country.trim().is_empty() {
        pieces.push(country.to_string());
    }
    NominatimQuery {
        q: pieces.join(", "),
        limit: DEFAULT_RESULT_LIMIT,
        user_agent: DEFAULT_USER_AGENT.to_string(),
    }
}

pub struct NominatimClient {
    agent: ureq::Agent,
    base_url: String,
    user_agent: String,
    result_limit: u32,
    limiter: Arc<RateLimiter>,
    backoff: RandomizedBackoff,
}

impl NominatimClient {
    pub fn new(
        base_url: impl Into<String>,
        limiter: Arc<RateLimiter>,
        backoff: RandomizedBackoff,
        result_limit: u32,
    ) -> NominatimClient {
        NominatimClient {
            agent: ureq::AgentBuilder::new()
                .timeout(Duration::from_secs(30))
                .build(),
            base_url: base_url.into(),
            user_agent: DEFAULT_USER_AGENT.to_string(),
            result_limit,
            limiter,
            backoff,
        }
    }

    /// Geocode one parsed location. Among returned results the first one
    /// carrying a polygon wins; otherwise the top point result; `None` on
    /// an empty result set.
    pub fn geocode(
        &self,
        name: &str,
        parents: &[String],
        country: &str,
    ) -> Result<Option<CandidateGeometry>, RemoteError> {
        let mut query = build_nominatim_query(name, parents, country);
        query.limit = self.result_limit;
        query.user_agent = self.user_agent.clone();

        let url = format!("{}/search", self.base_url);
        let value = get_json_with_retry(
            || {
                let mut request = self
                    .agent
                    .get(&url)
                    .set("User-Agent", &query.user_agent);
                for (k, v) in query.params() {
                    request = request.query(k, &v);
                }
                request
            },
            &self.limiter,
            &self.backoff,
        )?;

        let results = value
            .as_array()
            .ok_or_else(|| RemoteError::MalformedResponse("expected a JSON array".into()))?;
        if results.is_empty() {
            return Ok(None);
        }

        let mut context = vec![name.to_string()];
        context.extend(parents.iter().cloned());
        context.push(country.to_string());

        // first polygonal result, else the top-ranked point
        for (rank, result) in results.iter().enumerate() {
            if let Some(geojson_value) = result.get("geojson") {
                if let Ok(geom) = parse_polygonal(geojson_value) {
                    return Ok(Some(candidate(result, geom, rank, &context)?));
                }
            }
        }
        let top = &results[0];
        let geom = point_of(top)?;
        Ok(Some(candidate(top, geom, 0, &context)?))
    }
}

fn parse_polygonal(geojson_value: &Value) -> Result<Geom, RemoteError> {
    let geometry: geojson::Geometry = geojson::Geometry::try_from(geojson_value.clone())
        .map_err(|e| RemoteError::MalformedResponse(e.to_string()))?;
    let geom = Geom::ingest(&geometry.value)
        .map_err(|e| RemoteError::MalformedResponse(e.to_string()))?;
    if geom.is_polygonal() && !geom.is_empty() {
        Ok(geom)
    } else {
        Err(RemoteError::MalformedResponse("not polygonal".into()))
    }
}

fn point_of(result: &Value) -> Result<Geom, RemoteError> {
    let lon = coordinate_field(result, "lon")?;
    let lat = coordinate_field(result, "lat")?;
    Ok(Geom::point(lon, lat))
}

/// jsonv2 serializes coordinates as strings; tolerate numbers too.
fn coordinate_field(result: &Value, key: &str) -> Result<f64, RemoteError> {
    let field = result
        .get(key)
        .ok_or_else(|| RemoteError::MalformedResponse(format!("result without {key}")))?;
    match field {
        Value::String(s) => s
            .parse()
            .map_err(|_| RemoteError::MalformedResponse(format!("unparseable {key}: {s}"))),
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| RemoteError::MalformedResponse(format!("non-finite {key}"))),
        _ => Err(RemoteError::MalformedResponse(format!("bad {key} type"))),
    }
}

fn candidate(
    result: &Value,
    geometry: Geom,
    rank: usize,
    context: &[String],
) -> Result<CandidateGeometry, RemoteError> {
    let display_name = result
        .get("display_name")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();
    let osm_type = result
        .get("osm_type")
        .and_then(Value::as_str)
        .unwrap_or("unknown");
    let osm_id = match result.get("osm_id") {
        Some(Value::Number(n)) => n.to_string(),
        Some(Value::String(s)) => s.clone(),
        _ => "0".to_string(),
    };
    Ok(CandidateGeometry {
        source: SourceTag::OSM,
        matched_name: display_name,
        geometry,
        external_id: format!("{osm_type}/{osm_id}"),
        score_or_rank: rank as f64,
        query_context: context.to_vec(),
    })
}
