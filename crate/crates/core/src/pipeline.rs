//! End-to-end orchestration: ingest event records, parse locations, query
//! the three backends, score and harmonize, then export GeoJSON/CSV plus
//! aggregate statistics. Per-record failures become diagnostics; only
//! configuration problems abort a run.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::cache::{digest, CacheError, JsonCache};
use crate::candidate::{CandidateGeometry, CandidateSet, SourceTag};
use crate::config::{ConfigError, PipelineConfig};
use crate::countries::CountryAliases;
use crate::evaluation::{self, BenchmarkFormat, EvalError, FootprintMetrics, Summary};
use crate::gadm::{self, GadmError, GadmIndex, UnitMatch};
use crate::geometry::{Geom, GeomError};
use crate::harmonize::{self, GeocodedLocation};
use crate::parser::{
    self, parse_fallback, HttpProvider, PromptTemplate, Provider, RetryPolicy, TreeEntry,
};
use crate::remote::{NominatimClient, RandomizedBackoff, RateLimiter, WikidataClient};
use crate::textnorm::{self, DescriptorLexicon};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("missing column {0}")]
    MissingColumn(String),
    #[error("duplicate event identifier {0}")]
    DuplicateDisNo(String),
    #[error("no events to report on")]
    EmptyEvents,
    #[error("candidate and benchmark share no event identifiers")]
    EmptyJoin,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Gadm(#[from] GadmError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("invalid GeoJSON: {0}")]
    Geojson(String),
}

/// One ingested record: identifier, free-text location, country.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisasterRecord {
    pub dis_no: String,
    pub location_raw: String,
    pub country: String,
    pub subgroup: Option<String>,
    pub dtype: Option<String>,
    pub year: Option<i32>,
}

/// One geocoded event: every resolved location of one record.
#[derive(Debug, Clone)]
pub struct GeocodedEvent {
    pub dis_no: String,
    pub locations: Vec<GeocodedLocation>,
    pub coverage_flag: bool,
}

/// Non-fatal problem attached to one record and stage.
#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub dis_no: String,
    pub stage: &'static str,
    pub message: String,
}

#[derive(Debug)]
pub struct PipelineOutcome {
    pub events: Vec<GeocodedEvent>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Default)]
pub struct IngestResult {
    pub records: Vec<DisasterRecord>,
    pub skipped_empty_location: usize,
}

/// Event year encoded in the identifier prefix ("2004-0659-IDN" -> 2004).
pub fn year_from_dis_no(dis_no: &str) -> Option<i32> {
    dis_no.split('-').next()?.parse().ok()
}

const DIS_NO_ALIASES: &[&str] = &["DisNo.", "Dis No", "DisNo", "Dis No."];

/// Read an EM-DAT style CSV: "DisNo.", "Location", "Country" required
/// (with header alias tolerance), classification columns optional. Rows
/// with an empty location are dropped and counted; duplicate identifiers
/// are rejected.
pub fn ingest_emdat_csv(path: &Path) -> Result<IngestResult, PipelineError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |names: &[&str]| -> Option<usize> {
        headers
            .iter()
            .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
    };
    let dis_no_col = find(DIS_NO_ALIASES).ok_or_else(|| PipelineError::MissingColumn("DisNo.".into()))?;
    let location_col =
        find(&["Location"]).ok_or_else(|| PipelineError::MissingColumn("Location".into()))?;
    let country_col =
        find(&["Country"]).ok_or_else(|| PipelineError::MissingColumn("Country".into()))?;
    let subgroup_col = find(&["Disaster Subgroup"]);
    let dtype_col = find(&["Disaster Type"]);

    let mut result = IngestResult::default();
    let mut seen = std::collections::BTreeSet::new();
    for row in reader.records() {
        let row = row?;
        let get = |i: usize| row.get(i).unwrap_or("").trim().to_string();
        let dis_no = get(dis_no_col);
        if dis_no.is_empty() {
            continue;
        }
        let location_raw = get(location_col);
        if location_raw.is_empty() {
            result.skipped_empty_location += 1;
            log::warn!("{dis_no}: empty location, skipped");
            continue;
        }
        if !seen.insert(dis_no.clone()) {
            return Err(PipelineError::DuplicateDisNo(dis_no));
        }
        let year = year_from_dis_no(&dis_no);
        result.records.push(DisasterRecord {
            dis_no,
            location_raw,
            country: get(country_col),
            subgroup: subgroup_col.map(get).filter(|s| !s.is_empty()),
            dtype: dtype_col.map(get).filter(|s| !s.is_empty()),
            year,
        });
    }
    Ok(result)
}

/// Everything a run needs, built once from the config.
pub struct PipelineDeps {
    pub index: Arc<GadmIndex>,
    pub aliases: CountryAliases,
    pub lexicon: DescriptorLexicon,
    pub provider: Option<Arc<dyn Provider>>,
    pub template: PromptTemplate,
    pub retry: RetryPolicy,
    pub cache: Option<Arc<JsonCache>>,
    pub nominatim: Option<Arc<NominatimClient>>,
    pub wikidata: Option<Arc<WikidataClient>>,
    pub fuzzy_threshold: f64,
    pub tau: f64,
    pub offline: bool,
    pub concurrency: usize,
}

/// Wire up clients, limiters, cache and provider. With `offline` the
/// fallback parser replaces the provider and remote backends answer from
/// the cache only.
pub fn build_deps(
    config: &PipelineConfig,
    index: Arc<GadmIndex>,
    offline: bool,
) -> Result<PipelineDeps, PipelineError> {
    let aliases = config.country_aliases()?;
    let lexicon = config.descriptor_lexicon();
    let cache = if config.cache.enabled {
        Some(Arc::new(JsonCache::new(config.cache.dir.clone())))
    } else {
        None
    };
    let template = match &config.provider.prompt_template {
        Some(path) => PromptTemplate::from_file(path)?,
        None => PromptTemplate::default(),
    };
    let provider: Option<Arc<dyn Provider>> = match (&config.provider.endpoint, offline) {
        (Some(endpoint), false) if !endpoint.is_empty() => Some(Arc::new(HttpProvider::new(
            endpoint.clone(),
            config.provider.model.clone(),
            config.api_key(),
        ))),
        _ => None,
    };
    let retry = RetryPolicy {
        retries: config.provider.retries,
        base: Duration::from_secs_f64(config.provider.backoff_base_secs),
        cap: Duration::from_secs_f64(config.provider.backoff_cap_secs),
    };
    let (nominatim, wikidata) = if offline {
        (None, None)
    } else {
        let osm_limiter = Arc::new(RateLimiter::new(config.nominatim_interval()));
        let wd_limiter = Arc::new(RateLimiter::new(config.wikidata_interval()));
        (
            Some(Arc::new(NominatimClient::new(
                config.nominatim.base_url.clone(),
                osm_limiter,
                RandomizedBackoff {
                    retries: config.nominatim.retries,
                    min: Duration::from_secs_f64(config.nominatim.backoff_min_secs),
                    max: Duration::from_secs_f64(config.nominatim.backoff_max_secs),
                },
                config.nominatim.result_limit,
            ))),
            Some(Arc::new(WikidataClient::new(
                config.wikidata.endpoint.clone(),
                wd_limiter,
                RandomizedBackoff {
                    retries: config.wikidata.retries,
                    min: Duration::from_secs_f64(config.wikidata.backoff_min_secs),
                    max: Duration::from_secs_f64(config.wikidata.backoff_max_secs),
                },
                config.wikidata.result_limit,
            ))),
        )
    };
    Ok(PipelineDeps {
        index,
        aliases,
        lexicon,
        provider,
        template,
        retry,
        cache,
        nominatim,
        wikidata,
        fuzzy_threshold: config.gadm.fuzzy_threshold,
        tau: config.harmonize.tau,
        offline,
        concurrency: config.pipeline.concurrency.max(1),
    })
}

/// Geocode every record with a worker pool sharing the cache and the
/// per-endpoint rate limiters. Output order follows input order; failures
/// degrade to diagnostics.
pub fn run_pipeline(records: &[DisasterRecord], deps: &PipelineDeps) -> PipelineOutcome {
    let next = AtomicUsize::new(0);
    let events: Mutex<Vec<Option<GeocodedEvent>>> = Mutex::new(vec![None; records.len()]);
    let diagnostics: Mutex<Vec<(usize, Diagnostic)>> = Mutex::new(Vec::new());

    std::thread::scope(|scope| {
        for _ in 0..deps.concurrency.min(records.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= records.len() {
                    break;
                }
                let (event, diags) = process_record(&records[i], deps);
                events.lock().unwrap()[i] = Some(event);
                let mut sink = diagnostics.lock().unwrap();
                sink.extend(diags.into_iter().map(|d| (i, d)));
            });
        }
    });

    let events = events
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|e| e.expect("every record processed"))
        .collect();
    let mut diagnostics = diagnostics.into_inner().unwrap();
    diagnostics.sort_by_key(|(i, _)| *i);
    PipelineOutcome {
        events,
        diagnostics: diagnostics.into_iter().map(|(_, d)| d).collect(),
    }
}

fn process_record(record: &DisasterRecord, deps: &PipelineDeps) -> (GeocodedEvent, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut event = GeocodedEvent {
        dis_no: record.dis_no.clone(),
        locations: Vec::new(),
        coverage_flag: false,
    };
    let diag = |diags: &mut Vec<Diagnostic>, stage: &'static str, message: String| {
        log::warn!("{}: {stage}: {message}", record.dis_no);
        diags.push(Diagnostic {
            dis_no: record.dis_no.clone(),
            stage,
            message,
        });
    };

    let Some(iso3) = deps.aliases.resolve(&record.country) else {
        diag(
            &mut diags,
            "country",
            format!("unresolvable country name: {}", record.country),
        );
        return (event, diags);
    };

    let tree = match parse_record(record, deps, &mut diags) {
        Some(tree) => tree,
        None => return (event, diags),
    };

    let matches = match gadm::match_tree(&tree, &iso3, &deps.index, deps.fuzzy_threshold) {
        Ok(m) => m,
        Err(GadmError::UnknownCountry(c)) => {
            diag(&mut diags, "gadm", format!("country {c} not in index"));
            tree.entries()
                .into_iter()
                .map(|entry| gadm::TreeMatch {
                    entry,
                    unit_match: None,
                })
                .collect()
        }
        Err(other) => {
            diag(&mut diags, "gadm", other.to_string());
            return (event, diags);
        }
    };

    // geometry of each resolved ancestor, for ranking child candidates
    let mut resolved: HashMap<(u8, String), Geom> = HashMap::new();
    for tree_match in &matches {
        let entry = &tree_match.entry;
        match geocode_entry(record, entry, tree_match.unit_match.as_ref(), &iso3, &resolved, deps) {
            Ok(Some((location, chosen_geom))) => {
                resolved.insert((entry.level.as_u8(), entry.name.clone()), chosen_geom);
                event.locations.push(location);
            }
            Ok(None) => {
                diag(
                    &mut diags,
                    "geocode",
                    format!("no source produced a candidate for '{}'", entry.name),
                );
            }
            Err(message) => diag(&mut diags, "geocode", message),
        }
    }

    event.coverage_flag = !event.locations.is_empty();
    (event, diags)
}

fn parse_record(
    record: &DisasterRecord,
    deps: &PipelineDeps,
    diags: &mut Vec<Diagnostic>,
) -> Option<parser::LocationTree> {
    let provider_tree = deps.provider.as_ref().and_then(|provider| {
        match parser::parse_with_provider(
            &record.location_raw,
            &record.country,
            &deps.template,
            provider.as_ref(),
            deps.cache.as_deref(),
            &deps.retry,
        ) {
            Ok(tree) => Some(tree),
            Err(e) => {
                log::warn!("{}: provider parse failed: {e}", record.dis_no);
                diags.push(Diagnostic {
                    dis_no: record.dis_no.clone(),
                    stage: "parse",
                    message: format!("provider parse failed, using fallback: {e}"),
                });
                None
            }
        }
    });
    if let Some(tree) = provider_tree {
        return Some(tree);
    }
    match parse_fallback(&record.location_raw, &record.country) {
        Ok(tree) => Some(tree),
        Err(e) => {
            diags.push(Diagnostic {
                dis_no: record.dis_no.clone(),
                stage: "parse",
                message: e.to_string(),
            });
            None
        }
    }
}

/// Geocode one parsed entry through all three backends, score and
/// harmonize. Returns the location plus the geometry later children rank
/// against; `Ok(None)` when nothing was found anywhere.
fn geocode_entry(
    record: &DisasterRecord,
    entry: &TreeEntry,
    unit_match: Option<&UnitMatch>,
    iso3: &str,
    resolved: &HashMap<(u8, String), Geom>,
    deps: &PipelineDeps,
) -> Result<Option<(GeocodedLocation, Geom)>, String> {
    let name = match textnorm::normalize_name_with(&entry.name, true, &deps.lexicon) {
        Ok(n) => n.text,
        Err(e) => return Err(format!("'{}': {e}", entry.name)),
    };
    let parents: Vec<String> = entry
        .parents
        .iter()
        .filter_map(|(_, p)| {
            textnorm::normalize_name_with(p, true, &deps.lexicon)
                .ok()
                .map(|n| n.text)
        })
        .collect();
    let parent_geometry = entry
        .parents
        .iter()
        .find_map(|(lvl, p)| resolved.get(&(lvl.as_u8(), p.clone())))
        .cloned();

    let gadm_candidate = unit_match.map(|m| CandidateGeometry {
        source: SourceTag::GADM,
        matched_name: m.unit.name.clone(),
        geometry: m.unit.geometry.clone(),
        external_id: m.unit.gid.clone(),
        score_or_rank: m.score,
        query_context: vec![m.query_name.clone()],
    });

    let osm_candidate = cached_osm(&name, &parents, record, deps)?;
    let wikidata_candidate =
        cached_wikidata(&name, &parents, record, parent_geometry.as_ref(), deps)?;

    let cands = CandidateSet {
        gadm: gadm_candidate,
        osm: osm_candidate,
        wikidata: wikidata_candidate,
    };
    if cands.is_empty() {
        return Ok(None);
    }

    let reliability = harmonize::score_consistency(&cands, deps.tau).map_err(|e| e.to_string())?;
    let location = harmonize::reproject_to_gadm(
        &cands,
        &entry.name,
        entry.level.as_u8(),
        iso3,
        &deps.index,
        reliability,
    )
    .map_err(|e| e.to_string())?;

    // children rank against the best available geometry for this entry
    let chosen_geom = cands
        .gadm
        .as_ref()
        .map(|c| c.geometry.clone())
        .or_else(|| {
            cands
                .osm
                .as_ref()
                .filter(|c| c.geometry.is_polygonal())
                .map(|c| c.geometry.clone())
        })
        .unwrap_or_else(|| location.geometry.clone());
    Ok(Some((location, chosen_geom)))
}

fn cached_osm(
    name: &str,
    parents: &[String],
    record: &DisasterRecord,
    deps: &PipelineDeps,
) -> Result<Option<CandidateGeometry>, String> {
    let mut parts: Vec<&str> = vec!["osm", name];
    parts.extend(parents.iter().map(String::as_str));
    parts.push(&record.country);
    let key = digest(&parts);
    remote_cached("osm", &key, deps, record, || {
        deps.nominatim
            .as_ref()
            .map(|client| client.geocode(name, parents, &record.country))
    })
}

fn cached_wikidata(
    name: &str,
    parents: &[String],
    record: &DisasterRecord,
    parent_geometry: Option<&Geom>,
    deps: &PipelineDeps,
) -> Result<Option<CandidateGeometry>, String> {
    let mut parts: Vec<&str> = vec!["wikidata", name];
    parts.extend(parents.iter().map(String::as_str));
    parts.push(&record.country);
    let key = digest(&parts);
    remote_cached("wikidata", &key, deps, record, || {
        deps.wikidata
            .as_ref()
            .map(|client| client.geocode(name, &record.country, parent_geometry, &deps.aliases))
    })
}

/// Answer from the cache when possible; otherwise call the backend and
/// persist the outcome (including "nothing found"). Offline runs are
/// cache-only. Backend failures degrade to "no candidate" with an error
/// string the caller turns into a diagnostic.
fn remote_cached(
    namespace: &str,
    key: &str,
    deps: &PipelineDeps,
    record: &DisasterRecord,
    call: impl FnOnce() -> Option<Result<Option<CandidateGeometry>, crate::remote::RemoteError>>,
) -> Result<Option<CandidateGeometry>, String> {
    if let Some(cache) = &deps.cache {
        match cache.get::<Option<CandidateGeometry>>(namespace, key) {
            Ok(Some(cached)) => return Ok(cached),
            Ok(None) => {}
            Err(e) => log::warn!("{}: cache read failed: {e}", record.dis_no),
        }
    }
    let Some(outcome) = call() else {
        return Ok(None); // offline (or backend disabled): cache-only
    };
    match outcome {
        Ok(candidate) => {
            if let Some(cache) = &deps.cache {
                if let Err(e) = cache.put(namespace, key, &candidate) {
                    log::warn!("{}: cache write failed: {e}", record.dis_no);
                }
            }
            Ok(candidate)
        }
        Err(e) => Err(format!("{namespace}: {e}")),
    }
}

// --- export ---

#[derive(Debug)]
pub struct ExportPaths {
    pub geojson: PathBuf,
    pub csv: PathBuf,
}

fn mask_string(mask: &[SourceTag]) -> String {
    mask.iter()
        .map(SourceTag::as_str)
        .collect::<Vec<_>>()
        .join("|")
}

/// Write `locations.geojson` (FeatureCollection) and `locations.csv`.
/// Output is deterministic for a fixed input order.
pub fn export(events: &[GeocodedEvent], out_dir: &Path) -> Result<ExportPaths, PipelineError> {
    std::fs::create_dir_all(out_dir)?;
    let geojson_path = out_dir.join("locations.geojson");
    let csv_path = out_dir.join("locations.csv");

    let mut features = Vec::new();
    for event in events {
        for loc in &event.locations {
            features.push(json!({
                "type": "Feature",
                "properties": {
                    "dis_no": event.dis_no,
                    "gadm_gid": loc.gadm_gid,
                    "gadm_name": loc.gadm_name,
                    "admin_level": loc.admin_level,
                    "source_mask": mask_string(&loc.source_mask),
                    "reliability_value": loc.reliability.value,
                    "reliability_label": loc.reliability.label.as_str(),
                    "proxy_used": loc.proxy_used.map(|s| s.as_str()),
                },
                "geometry": serde_json::to_value(&loc.geometry).expect("geometry serializes"),
            }));
        }
    }
    let collection = json!({"type": "FeatureCollection", "features": features});
    std::fs::write(&geojson_path, serde_json::to_string_pretty(&collection)?.as_bytes())?;

    let mut writer = csv::Writer::from_path(&csv_path)?;
    writer.write_record([
        "dis_no",
        "query_name",
        "gadm_gid",
        "gadm_name",
        "admin_level",
        "source_mask",
        "reliability_value",
        "reliability_label",
        "proxy_used",
    ])?;
    for event in events {
        for loc in &event.locations {
            writer.write_record([
                event.dis_no.as_str(),
                loc.query_name.as_str(),
                loc.gadm_gid.as_deref().unwrap_or(""),
                loc.gadm_name.as_deref().unwrap_or(""),
                &loc.admin_level.to_string(),
                &mask_string(&loc.source_mask),
                &loc.reliability.value.to_string(),
                loc.reliability.label.as_str(),
                loc.proxy_used.map(|s| s.as_str()).unwrap_or(""),
            ])?;
        }
    }
    writer.flush()?;
    Ok(ExportPaths {
        geojson: geojson_path,
        csv: csv_path,
    })
}

impl From<serde_json::Error> for PipelineError {
    fn from(e: serde_json::Error) -> Self {
        PipelineError::Geojson(e.to_string())
    }
}

/// Flat per-location row for the aggregate report, reconstructible from
/// memory or from an exported GeoJSON.
#[derive(Debug, Clone)]
pub struct LocationRow {
    pub dis_no: String,
    pub year: Option<i32>,
    pub admin_level: u8,
    pub sources: Vec<SourceTag>,
    pub reliability_label: String,
}

pub fn rows_from_events(events: &[GeocodedEvent]) -> Vec<LocationRow> {
    let mut out = Vec::new();
    for event in events {
        for loc in &event.locations {
            out.push(LocationRow {
                dis_no: event.dis_no.clone(),
                year: year_from_dis_no(&event.dis_no),
                admin_level: loc.admin_level,
                sources: loc.source_mask.clone(),
                reliability_label: loc.reliability.label.as_str().to_string(),
            });
        }
    }
    out
}

/// Re-read an exported `locations.geojson`.
pub fn rows_from_geojson(path: &Path) -> Result<Vec<LocationRow>, PipelineError> {
    let text = std::fs::read_to_string(path)?;
    let collection: geojson::FeatureCollection = text
        .parse()
        .map_err(|e: geojson::Error| PipelineError::Geojson(e.to_string()))?;
    let mut out = Vec::new();
    for feature in collection.features {
        let properties = feature.properties.unwrap_or_default();
        let get_str = |key: &str| {
            properties
                .get(key)
                .and_then(Value::as_str)
                .map(str::to_string)
        };
        let dis_no = get_str("dis_no")
            .ok_or_else(|| PipelineError::Geojson("feature without dis_no".into()))?;
        let admin_level = properties
            .get("admin_level")
            .and_then(Value::as_u64)
            .ok_or_else(|| PipelineError::Geojson("feature without admin_level".into()))?
            as u8;
        let sources = get_str("source_mask")
            .unwrap_or_default()
            .split('|')
            .filter_map(|s| match s {
                "GADM" => Some(SourceTag::GADM),
                "OSM" => Some(SourceTag::OSM),
                "WIKIDATA" => Some(SourceTag::WIKIDATA),
                _ => None,
            })
            .collect();
        out.push(LocationRow {
            year: year_from_dis_no(&dis_no),
            dis_no,
            admin_level,
            sources,
            reliability_label: get_str("reliability_label").unwrap_or_default(),
        });
    }
    Ok(out)
}

// --- aggregate statistics ---

#[derive(Debug, Serialize)]
pub struct AdminShare {
    pub level: u8,
    pub count: usize,
    pub share: f64,
}

#[derive(Debug, Serialize)]
pub struct YearlySources {
    pub year: i32,
    pub gadm: usize,
    pub osm: usize,
    pub wikidata: usize,
}

#[derive(Debug, Serialize)]
pub struct StatsReport {
    pub total_locations: usize,
    pub admin_level_shares: Vec<AdminShare>,
    pub yearly_source_counts: Vec<YearlySources>,
    /// (locations per event, number of events)
    pub locations_per_event: Vec<(usize, usize)>,
    pub reliability_distribution: Vec<(String, usize)>,
}

/// Aggregate tables: admin-level shares, per-year per-source counts,
/// locations-per-event histogram and the reliability-label distribution.
pub fn stats_report(rows: &[LocationRow]) -> Result<StatsReport, PipelineError> {
    if rows.is_empty() {
        return Err(PipelineError::EmptyEvents);
    }
    let total = rows.len();

    let mut level_counts: BTreeMap<u8, usize> = BTreeMap::new();
    let mut yearly: BTreeMap<i32, (usize, usize, usize)> = BTreeMap::new();
    let mut per_event: BTreeMap<String, usize> = BTreeMap::new();
    let mut reliability: BTreeMap<String, usize> = BTreeMap::new();
    for row in rows {
        *level_counts.entry(row.admin_level).or_default() += 1;
        *per_event.entry(row.dis_no.clone()).or_default() += 1;
        *reliability.entry(row.reliability_label.clone()).or_default() += 1;
        if let Some(year) = row.year {
            let slot = yearly.entry(year).or_default();
            for source in &row.sources {
                match source {
                    SourceTag::GADM => slot.0 += 1,
                    SourceTag::OSM => slot.1 += 1,
                    SourceTag::WIKIDATA => slot.2 += 1,
                }
            }
        }
    }

    let mut counts_per_size: BTreeMap<usize, usize> = BTreeMap::new();
    for n in per_event.values() {
        *counts_per_size.entry(*n).or_default() += 1;
    }

    Ok(StatsReport {
        total_locations: total,
        admin_level_shares: level_counts
            .into_iter()
            .map(|(level, count)| AdminShare {
                level,
                count,
                share: count as f64 / total as f64,
            })
            .collect(),
        yearly_source_counts: yearly
            .into_iter()
            .map(|(year, (gadm, osm, wikidata))| YearlySources {
                year,
                gadm,
                osm,
                wikidata,
            })
            .collect(),
        locations_per_event: counts_per_size.into_iter().collect(),
        reliability_distribution: reliability.into_iter().collect(),
    })
}

/// Write the four report tables as CSV files under `out_dir`.
pub fn write_stats(report: &StatsReport, out_dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let path = out_dir.join("stats_admin_levels.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["admin_level", "count", "share"])?;
    for s in &report.admin_level_shares {
        w.write_record([
            s.level.to_string(),
            s.count.to_string(),
            format!("{:.4}", s.share),
        ])?;
    }
    w.flush()?;
    written.push(path);

    let path = out_dir.join("stats_yearly_sources.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["year", "gadm", "osm", "wikidata"])?;
    for y in &report.yearly_source_counts {
        w.write_record([
            y.year.to_string(),
            y.gadm.to_string(),
            y.osm.to_string(),
            y.wikidata.to_string(),
        ])?;
    }
    w.flush()?;
    written.push(path);

    let path = out_dir.join("stats_locations_per_event.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["locations", "events"])?;
    for (n, events) in &report.locations_per_event {
        w.write_record([n.to_string(), events.to_string()])?;
    }
    w.flush()?;
    written.push(path);

    let path = out_dir.join("stats_reliability.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["label", "count"])?;
    for (label, count) in &report.reliability_distribution {
        w.write_record([label.as_str(), &count.to_string()])?;
    }
    w.flush()?;
    written.push(path);

    Ok(written)
}

// --- evaluation command ---

#[derive(Debug, Serialize)]
pub struct EvaluationReport {
    pub events_compared: usize,
    pub unit_count: usize,
    pub unit_histogram: Vec<usize>,
    pub unit_summary: Summary,
    pub unit_frac_non_intersecting: f64,
    #[serde(skip)]
    pub footprints: Vec<FootprintMetrics>,
    pub footprint_count: usize,
    pub a_in_b_histogram: Vec<usize>,
    pub b_in_a_histogram: Vec<usize>,
    pub jaccard_histogram: Vec<usize>,
    pub a_in_b_summary: Summary,
    pub b_in_a_summary: Summary,
    pub jaccard_summary: Summary,
    pub footprint_frac_non_intersecting: f64,
}

/// Compare a geocoded dataset against a benchmark: join on event ids,
/// unit-level containment plus dissolved-footprint metrics, decimal-bin
/// histograms. `index` enables Admin3 coarsening when the benchmark
/// resolution stops at Admin2.
pub fn evaluate_datasets(
    candidate_path: &Path,
    benchmark_path: &Path,
    format: BenchmarkFormat,
    index: Option<&GadmIndex>,
) -> Result<EvaluationReport, PipelineError> {
    let mut units = evaluation::load_units(candidate_path, BenchmarkFormat::LlmGeodis)?;
    let benchmark = evaluation::load_benchmark(benchmark_path, format)?;
    if format.max_admin_level() < 3 {
        if let Some(index) = index {
            units = evaluation::coarsen_admin3(&units, index);
        }
    }

    let shared: Vec<&evaluation::EvalUnit> = units
        .iter()
        .filter(|u| benchmark.contains_key(&u.dis_no))
        .collect();
    if shared.is_empty() {
        return Err(PipelineError::EmptyJoin);
    }

    let mut unit_values = Vec::new();
    for unit in &shared {
        let footprint = &benchmark[&unit.dis_no];
        unit_values.push(evaluation::unit_level_metrics(unit, footprint)?);
    }

    let mut grouped: BTreeMap<&str, Vec<Geom>> = BTreeMap::new();
    for unit in &shared {
        if unit.geometry.is_polygonal() {
            grouped
                .entry(unit.dis_no.as_str())
                .or_default()
                .push(unit.geometry.clone());
        }
    }
    let mut footprints = Vec::new();
    for (dis_no, geoms) in &grouped {
        let metrics = evaluation::footprint_metrics(geoms, &benchmark[*dis_no])?;
        footprints.push(metrics);
    }

    let events_compared = grouped.len();
    let a_in_b: Vec<f64> = footprints.iter().map(|m| m.a_in_b).collect();
    let b_in_a: Vec<f64> = footprints.iter().map(|m| m.b_in_a).collect();
    let jaccard: Vec<f64> = footprints.iter().map(|m| m.jaccard).collect();
    let non_intersecting_units =
        unit_values.iter().filter(|v| **v == 0.0).count() as f64 / unit_values.len() as f64;
    let non_intersecting_footprints = if footprints.is_empty() {
        0.0
    } else {
        footprints.iter().filter(|m| !m.intersects).count() as f64 / footprints.len() as f64
    };

    Ok(EvaluationReport {
        events_compared,
        unit_count: unit_values.len(),
        unit_histogram: evaluation::histogram_01(&unit_values, 0.1)?,
        unit_summary: evaluation::summary(&unit_values).expect("non-empty"),
        unit_frac_non_intersecting: non_intersecting_units,
        footprint_count: footprints.len(),
        a_in_b_histogram: evaluation::histogram_01(&a_in_b, 0.1)?,
        b_in_a_histogram: evaluation::histogram_01(&b_in_a, 0.1)?,
        jaccard_histogram: evaluation::histogram_01(&jaccard, 0.1)?,
        a_in_b_summary: evaluation::summary(&a_in_b).unwrap_or(Summary {
            median: 0.0,
            mean: 0.0,
            frac_zero: 0.0,
        }),
        b_in_a_summary: evaluation::summary(&b_in_a).unwrap_or(Summary {
            median: 0.0,
            mean: 0.0,
            frac_zero: 0.0,
        }),
        jaccard_summary: evaluation::summary(&jaccard).unwrap_or(Summary {
            median: 0.0,
            mean: 0.0,
            frac_zero: 0.0,
        }),
        footprint_frac_non_intersecting: non_intersecting_footprints,
        footprints,
    })
}

/// Write per-event metrics CSV and the JSON summary.
pub fn write_evaluation(
    report: &EvaluationReport,
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf), PipelineError> {
    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join("evaluation_metrics.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["dis_no", "a_in_b", "b_in_a", "jaccard", "intersects"])?;
    for m in &report.footprints {
        w.write_record([
            m.dis_no.as_str(),
            &format!("{:.6}", m.a_in_b),
            &format!("{:.6}", m.b_in_a),
            &format!("{:.6}", m.jaccard),
            &m.intersects.to_string(),
        ])?;
    }
    w.flush()?;
    let json_path = out_dir.join("evaluation_summary.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(report)?)?;
    Ok((csv_path, json_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonize::{AgreementChecks, ReliabilityScore};

    fn loc(level: u8, sources: Vec<SourceTag>) -> GeocodedLocation {
        GeocodedLocation {
            query_name: "q".into(),
            admin_level: level,
            gadm_gid: Some("TST.1_1".into()),
            gadm_name: Some("Unit".into()),
            geometry: Geom::rect(0.0, 0.0, 1.0, 1.0),
            source_mask: sources.clone(),
            reliability: ReliabilityScore::from_observations(
                sources.len(),
                AgreementChecks::none_applicable(),
            ),
            proxy_used: None,
        }
    }

    fn event(dis_no: &str, levels: &[u8]) -> GeocodedEvent {
        GeocodedEvent {
            dis_no: dis_no.into(),
            locations: levels
                .iter()
                .map(|l| loc(*l, vec![SourceTag::GADM]))
                .collect(),
            coverage_flag: !levels.is_empty(),
        }
    }

    #[test]
    fn ingest_drops_empty_locations_and_counts_them() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emdat.csv");
        std::fs::write(
            &path,
            "DisNo.,Location,Country\n\
             2004-0659-IDN,Aceh province,Indonesia\n\
             2005-0001-PAK,,Pakistan\n\
             2006-0002-IND,Kerala,India\n",
        )
        .unwrap();
        let result = ingest_emdat_csv(&path).unwrap();
        assert_eq!(result.records.len(), 2);
        assert_eq!(result.skipped_empty_location, 1);
        assert_eq!(result.records[0].year, Some(2004));
    }

    #[test]
    fn ingest_accepts_header_aliases() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emdat.csv");
        std::fs::write(
            &path,
            "Dis No,Location,Country\n2004-0659-IDN,Aceh,Indonesia\n",
        )
        .unwrap();
        assert_eq!(ingest_emdat_csv(&path).unwrap().records.len(), 1);
    }

    #[test]
    fn ingest_rejects_missing_column_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let no_location = dir.path().join("a.csv");
        std::fs::write(&no_location, "DisNo.,Country\nX,Y\n").unwrap();
        assert!(matches!(
            ingest_emdat_csv(&no_location),
            Err(PipelineError::MissingColumn(c)) if c == "Location"
        ));

        let dup = dir.path().join("b.csv");
        std::fs::write(
            &dup,
            "DisNo.,Location,Country\nE1,A,X\nE1,B,X\n",
        )
        .unwrap();
        assert!(matches!(
            ingest_emdat_csv(&dup),
            Err(PipelineError::DuplicateDisNo(d)) if d == "E1"
        ));
    }

    #[test]
    fn year_parses_from_prefix() {
        assert_eq!(year_from_dis_no("2004-0659-IDN"), Some(2004));
        assert_eq!(year_from_dis_no("garbage"), None);
    }

    #[test]
    fn admin_level_shares_from_fixture() {
        // 4 locations at levels 1, 1, 2, 3 -> shares 50/25/25
        let events = vec![event("2004-0001-TST", &[1, 1, 2, 3])];
        let report = stats_report(&rows_from_events(&events)).unwrap();
        assert_eq!(report.total_locations, 4);
        let shares: Vec<(u8, f64)> = report
            .admin_level_shares
            .iter()
            .map(|s| (s.level, s.share))
            .collect();
        assert_eq!(shares, vec![(1, 0.5), (2, 0.25), (3, 0.25)]);
    }

    #[test]
    fn stats_need_events() {
        assert!(matches!(
            stats_report(&[]),
            Err(PipelineError::EmptyEvents)
        ));
    }

    #[test]
    fn locations_per_event_histogram() {
        let events = vec![
            event("2004-0001-TST", &[1]),
            event("2004-0002-TST", &[1, 2]),
            event("2004-0003-TST", &[1]),
        ];
        let report = stats_report(&rows_from_events(&events)).unwrap();
        assert_eq!(report.locations_per_event, vec![(1, 2), (2, 1)]);
    }

    #[test]
    fn export_round_trips_through_own_reader() {
        let dir = tempfile::tempdir().unwrap();
        let events = vec![event("2004-0001-TST", &[1, 2])];
        let paths = export(&events, dir.path()).unwrap();
        let rows = rows_from_geojson(&paths.geojson).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].dis_no, "2004-0001-TST");
        assert_eq!(rows[0].year, Some(2004));
        assert_eq!(rows[0].sources, vec![SourceTag::GADM]);
        // and through the evaluation loader
        let units =
            evaluation::load_units(&paths.geojson, BenchmarkFormat::LlmGeodis).unwrap();
        assert_eq!(units.len(), 2);
        assert_eq!(units[0].gadm_gid.as_deref(), Some("TST.1_1"));
    }

    #[test]
    fn export_is_deterministic() {
        let dir1 = tempfile::tempdir().unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let events = vec![event("2004-0001-TST", &[1, 2, 3])];
        let p1 = export(&events, dir1.path()).unwrap();
        let p2 = export(&events, dir2.path()).unwrap();
        assert_eq!(
            std::fs::read(&p1.geojson).unwrap(),
            std::fs::read(&p2.geojson).unwrap()
        );
        assert_eq!(
            std::fs::read(&p1.csv).unwrap(),
            std::fs::read(&p2.csv).unwrap()
        );
    }
}
