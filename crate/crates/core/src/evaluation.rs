//! Comparison of a geocoded dataset against a benchmark at unit and
//! dissolved-footprint level: containment ratios, Jaccard, decimal-bin
//! histograms and non-intersection accounting.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gadm::GadmIndex;
use crate::geometry::{self, Geom, GeomError};
use crate::gpkg;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("event mismatch: unit belongs to {unit}, footprint to {footprint}")]
    DisNoMismatch { unit: String, footprint: String },
    #[error("no polygonal candidate geometries for {0}")]
    EmptyCandidateSet(String),
    #[error("value {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("benchmark format: {0}")]
    FormatError(String),
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

/// Dissolved benchmark geometry for one event.
#[derive(Debug, Clone)]
pub struct BenchmarkFootprint {
    pub dis_no: String,
    pub geometry: Geom,
}

/// One candidate row on the evaluation side: an event id, the unit
/// geometry and whatever identity columns the file carried.
#[derive(Debug, Clone)]
pub struct EvalUnit {
    pub dis_no: String,
    pub gadm_gid: Option<String>,
    pub admin_level: Option<u8>,
    pub geometry: Geom,
}

/// Per-event containment ratios and Jaccard index against the benchmark.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FootprintMetrics {
    pub dis_no: String,
    pub a_in_b: f64,
    pub b_in_a: f64,
    pub jaccard: f64,
    pub intersects: bool,
}

/// Supported benchmark layouts; each knows its event-id property and
/// whether its resolution tops out at Admin2 (forcing Admin3 coarsening
/// on the candidate side).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkFormat {
    GaulArchive,
    Gdis,
    LlmGeodis,
}

impl BenchmarkFormat {
    pub fn dis_no_property(&self) -> &'static str {
        match self {
            BenchmarkFormat::GaulArchive => "DisNo.",
            BenchmarkFormat::Gdis => "disasterno",
            BenchmarkFormat::LlmGeodis => "dis_no",
        }
    }

    /// Finest administrative level the benchmark distinguishes.
    pub fn max_admin_level(&self) -> u8 {
        match self {
            BenchmarkFormat::GaulArchive => 2,
            BenchmarkFormat::Gdis | BenchmarkFormat::LlmGeodis => 3,
        }
    }

    pub fn parse(name: &str) -> Option<BenchmarkFormat> {
        match name.to_ascii_lowercase().as_str() {
            "gaul_archive" | "gaul" => Some(BenchmarkFormat::GaulArchive),
            "gdis" => Some(BenchmarkFormat::Gdis),
            "llmgeodis" | "geocoded" => Some(BenchmarkFormat::LlmGeodis),
            _ => None,
        }
    }
}

/// Proportion of one candidate unit inside the event footprint: polygons
/// report their covered area share, points a binary containment index.
pub fn unit_level_metrics(
    unit: &EvalUnit,
    footprint: &BenchmarkFootprint,
) -> Result<f64, EvalError> {
    if unit.dis_no != footprint.dis_no {
        return Err(EvalError::DisNoMismatch {
            unit: unit.dis_no.clone(),
            footprint: footprint.dis_no.clone(),
        });
    }
    if unit.geometry.is_point() {
        let contained = geometry::contains_point(&footprint.geometry, &unit.geometry)?;
        Ok(if contained { 1.0 } else { 0.0 })
    } else {
        Ok(geometry::overlap_ratio(&unit.geometry, &footprint.geometry)?)
    }
}

/// Dissolve the event's polygonal candidates and compare against the
/// benchmark footprint. Point-only events cannot be dissolved and are
/// rejected.
pub fn footprint_metrics(
    candidate_units: &[Geom],
    footprint: &BenchmarkFootprint,
) -> Result<FootprintMetrics, EvalError> {
    let polygonal: Vec<Geom> = candidate_units
        .iter()
        .filter(|g| g.is_polygonal())
        .cloned()
        .collect();
    if polygonal.is_empty() {
        return Err(EvalError::EmptyCandidateSet(footprint.dis_no.clone()));
    }
    let dissolved = geometry::union_all(&polygonal)?;
    let a_in_b = geometry::overlap_ratio(&dissolved, &footprint.geometry)?;
    let b_in_a = geometry::overlap_ratio(&footprint.geometry, &dissolved)?;
    let jaccard = geometry::jaccard(&dissolved, &footprint.geometry)?;
    Ok(FootprintMetrics {
        dis_no: footprint.dis_no.clone(),
        a_in_b,
        b_in_a,
        jaccard,
        intersects: a_in_b > 0.0,
    })
}

/// Histogram over [0, 1]: bins [0, w), [w, 2w), ..., with the last bin
/// closed at the top so a ratio of exactly 1 lands in it.
pub fn histogram_01(values: &[f64], bin_width: f64) -> Result<Vec<usize>, EvalError> {
    assert!(bin_width > 0.0 && bin_width <= 1.0);
    let bins = (1.0 / bin_width).round() as usize;
    let mut counts = vec![0usize; bins];
    for &v in values {
        if !(0.0..=1.0).contains(&v) {
            return Err(EvalError::OutOfRange(v));
        }
        let slot = ((v / bin_width) as usize).min(bins - 1);
        counts[slot] += 1;
    }
    Ok(counts)
}

/// Median, mean and the fraction of exact zeros. Zeros are worth keeping
/// apart from the first histogram bin: a unit barely intersecting and one
/// not intersecting at all land in the same bin otherwise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub median: f64,
    pub mean: f64,
    pub frac_zero: f64,
}

pub fn summary(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let zeros = sorted.iter().filter(|v| **v == 0.0).count();
    Some(Summary {
        median,
        mean,
        frac_zero: zeros as f64 / n as f64,
    })
}

/// Load the per-unit rows of a dataset (GeoJSON FeatureCollection or a
/// GeoPackage with a single feature layer).
pub fn load_units(path: &Path, format: BenchmarkFormat) -> Result<Vec<EvalUnit>, EvalError> {
    let property = format.dis_no_property();
    let mut out = Vec::new();
    if path.extension().and_then(|e| e.to_str()) == Some("gpkg") {
        let layers =
            gpkg::feature_layers(path).map_err(|e| EvalError::FormatError(e.to_string()))?;
        let layer = layers
            .first()
            .ok_or_else(|| EvalError::FormatError("gpkg has no feature layer".into()))?;
        let rows =
            gpkg::read_layer(path, layer).map_err(|e| EvalError::FormatError(e.to_string()))?;
        for row in rows {
            let dis_no = row
                .fields
                .get(property)
                .and_then(|v| v.as_str())
                .ok_or_else(|| EvalError::FormatError(format!("row without {property}")))?
                .to_string();
            out.push(EvalUnit {
                dis_no,
                gadm_gid: row
                    .fields
                    .get("gadm_gid")
                    .and_then(|v| v.as_str())
                    .map(str::to_string),
                admin_level: row
                    .fields
                    .get("admin_level")
                    .and_then(|v| v.as_u64())
                    .map(|v| v as u8),
                geometry: row.geometry,
            });
        }
    } else {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EvalError::FormatError(format!("{}: {e}", path.display())))?;
        let collection: geojson::FeatureCollection = text
            .parse()
            .map_err(|e: geojson::Error| EvalError::FormatError(e.to_string()))?;
        for feature in collection.features {
            let properties = feature.properties.unwrap_or_default();
            let dis_no = properties
                .get(property)
                .and_then(|v| v.as_str())
                .ok_or_else(|| EvalError::FormatError(format!("feature without {property}")))?
                .to_string();
            let geometry = feature
                .geometry
                .ok_or_else(|| EvalError::FormatError("feature without geometry".into()))?;
            out.push(EvalUnit {
                dis_no,
                gadm_gid: properties
                    .get("gadm_gid")
                    .and_then(|v| v.as_str())
                    .map(str::to_string),
                admin_level: properties
                    .get("admin_level")
                    .and_then(|v| v.as_u64())
                    .map(|v| v as u8),
                geometry: Geom::ingest(&geometry.value)?,
            });
        }
    }
    Ok(out)
}

/// Load a benchmark as one dissolved footprint per event. Events with no
/// polygonal geometry are dropped (points cannot form a footprint).
pub fn load_benchmark(
    path: &Path,
    format: BenchmarkFormat,
) -> Result<BTreeMap<String, BenchmarkFootprint>, EvalError> {
    let units = load_units(path, format)?;
    dissolve_per_event(&units)
}

pub fn dissolve_per_event(
    units: &[EvalUnit],
) -> Result<BTreeMap<String, BenchmarkFootprint>, EvalError> {
    let mut grouped: BTreeMap<String, Vec<Geom>> = BTreeMap::new();
    for unit in units {
        if unit.geometry.is_polygonal() {
            grouped
                .entry(unit.dis_no.clone())
                .or_default()
                .push(unit.geometry.clone());
        }
    }
    let mut out = BTreeMap::new();
    for (dis_no, geoms) in grouped {
        let geometry = geometry::union_all(&geoms)?;
        if geometry.is_empty() {
            continue;
        }
        out.insert(
            dis_no.clone(),
            BenchmarkFootprint { dis_no, geometry },
        );
    }
    Ok(out)
}

/// Substitute each Admin3 unit with its parent Admin2 geometry, for
/// comparisons against benchmarks that stop at Admin2. Substituted rows
/// are deduplicated per (event, parent unit).
pub fn coarsen_admin3(units: &[EvalUnit], index: &GadmIndex) -> Vec<EvalUnit> {
    let mut out: Vec<EvalUnit> = Vec::with_capacity(units.len());
    let mut seen: std::collections::BTreeSet<(String, String)> = std::collections::BTreeSet::new();
    for unit in units {
        let is_admin3 = unit.admin_level == Some(3);
        let parent = unit
            .gadm_gid
            .as_ref()
            .and_then(|gid| index.unit_by_gid(gid))
            .and_then(|u| u.parent_gid.clone())
            .and_then(|pgid| index.unit_by_gid(&pgid).cloned());
        match (is_admin3, parent) {
            (true, Some(parent)) => {
                if seen.insert((unit.dis_no.clone(), parent.gid.clone())) {
                    out.push(EvalUnit {
                        dis_no: unit.dis_no.clone(),
                        gadm_gid: Some(parent.gid.clone()),
                        admin_level: Some(2),
                        geometry: parent.geometry.clone(),
                    });
                }
            }
            _ => out.push(unit.clone()),
        }
    }
    out
}
