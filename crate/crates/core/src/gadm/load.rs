//! GADM v4.1 ingestion from per-level GeoJSON files or a GeoPackage.
//!
//! Level `n` features carry `GID_n`, `NAME_n`, optional `VARNAME_n`
//! (pipe-separated aliases), the parent `GID_{n-1}` and `GID_0` (ISO3).

use std::collections::BTreeSet;
use std::path::Path;

use serde_json::Value;

use super::{GadmError, GadmIndex, GadmUnit};
use crate::geometry::Geom;
use crate::gpkg;

/// Layer names per level; GADM ships ADM_1..ADM_3 but exports differ.
#[derive(Debug, Clone)]
pub struct LayerNaming {
    pub layers: [String; 3],
}

impl Default for LayerNaming {
    fn default() -> Self {
        LayerNaming {
            layers: ["ADM_1".into(), "ADM_2".into(), "ADM_3".into()],
        }
    }
}

/// Load GADM units into an index. `path` is either a directory holding
/// per-level GeoJSON files (`ADM_1.geojson`, ...) or a `.gpkg` with the
/// same layer names. Level 1 must exist; deeper levels are optional.
/// `countries`, when given, restricts the index to those ISO3 codes.
pub fn load_gadm(
    path: &Path,
    countries: Option<&BTreeSet<String>>,
    naming: &LayerNaming,
) -> Result<GadmIndex, GadmError> {
    load_gadm_with(
        path,
        countries,
        naming,
        crate::textnorm::DescriptorLexicon::default(),
    )
}

/// [`load_gadm`] with a custom descriptor lexicon for name indexing.
pub fn load_gadm_with(
    path: &Path,
    countries: Option<&BTreeSet<String>>,
    naming: &LayerNaming,
    lexicon: crate::textnorm::DescriptorLexicon,
) -> Result<GadmIndex, GadmError> {
    let mut units = Vec::new();
    if path.extension().and_then(|e| e.to_str()) == Some("gpkg") {
        load_from_gpkg(path, countries, naming, &mut units)?;
    } else if path.is_dir() {
        load_from_dir(path, countries, naming, &mut units)?;
    } else {
        return Err(GadmError::MissingLayer(format!(
            "{} is neither a directory nor a .gpkg",
            path.display()
        )));
    }

    if let Some(filter) = countries {
        let present: BTreeSet<&str> = units.iter().map(|u| u.country_iso3.as_str()).collect();
        for wanted in filter {
            if !present.contains(wanted.as_str()) {
                return Err(GadmError::EmptyCountry(wanted.clone()));
            }
        }
    }
    Ok(GadmIndex::build_with_lexicon(units, lexicon))
}

fn load_from_dir(
    dir: &Path,
    countries: Option<&BTreeSet<String>>,
    naming: &LayerNaming,
    units: &mut Vec<GadmUnit>,
) -> Result<(), GadmError> {
    for (i, layer) in naming.layers.iter().enumerate() {
        let level = (i + 1) as u8;
        let file = ["geojson", "json"]
            .iter()
            .map(|ext| dir.join(format!("{layer}.{ext}")))
            .find(|p| p.exists());
        let Some(file) = file else {
            if level == 1 {
                return Err(GadmError::MissingLayer(layer.clone()));
            }
            continue;
        };
        let text = std::fs::read_to_string(&file)?;
        let collection: geojson::FeatureCollection = text
            .parse()
            .map_err(|e: geojson::Error| GadmError::Geojson(e.to_string()))?;
        for feature in collection.features {
            let properties = feature.properties.unwrap_or_default();
            let lookup = |key: &str| properties.get(key).cloned();
            let geometry = feature
                .geometry
                .ok_or_else(|| GadmError::SchemaMismatch("geometry".into()))?;
            let geom = Geom::ingest(&geometry.value)?;
            if let Some(unit) = unit_from_fields(level, &lookup, geom, countries)? {
                units.push(unit);
            }
        }
    }
    Ok(())
}

fn load_from_gpkg(
    path: &Path,
    countries: Option<&BTreeSet<String>>,
    naming: &LayerNaming,
    units: &mut Vec<GadmUnit>,
) -> Result<(), GadmError> {
    let available = gpkg::feature_layers(path).map_err(|e| GadmError::Gpkg(e.to_string()))?;
    for (i, layer) in naming.layers.iter().enumerate() {
        let level = (i + 1) as u8;
        if !available.contains(layer) {
            if level == 1 {
                return Err(GadmError::MissingLayer(layer.clone()));
            }
            continue;
        }
        let rows = gpkg::read_layer(path, layer).map_err(|e| GadmError::Gpkg(e.to_string()))?;
        for row in rows {
            let lookup = |key: &str| row.fields.get(key).cloned();
            if let Some(unit) = unit_from_fields(level, &lookup, row.geometry, countries)? {
                units.push(unit);
            }
        }
    }
    Ok(())
}

/// Build one unit from level-`n` fields; `None` when filtered out by the
/// country selection.
fn unit_from_fields(
    level: u8,
    lookup: &dyn Fn(&str) -> Option<Value>,
    geometry: Geom,
    countries: Option<&BTreeSet<String>>,
) -> Result<Option<GadmUnit>, GadmError> {
    let gid = required_string(lookup, &format!("GID_{level}"))?;
    let name = required_string(lookup, &format!("NAME_{level}"))?;
    let parent_gid = if level > 1 {
        Some(required_string(lookup, &format!("GID_{}", level - 1))?)
    } else {
        None
    };
    let country_iso3 = optional_string(lookup, "GID_0")
        .unwrap_or_else(|| gid.split('.').next().unwrap_or_default().to_string());
    if let Some(filter) = countries {
        if !filter.contains(&country_iso3) {
            return Ok(None);
        }
    }
    let variant_names = optional_string(lookup, &format!("VARNAME_{level}"))
        .map(|raw| {
            raw.split('|')
                .map(str::trim)
                .filter(|v| !v.is_empty() && *v != "NA")
                .map(str::to_string)
                .collect()
        })
        .unwrap_or_default();
    if !geometry.is_polygonal() {
        return Err(GadmError::SchemaMismatch("geometry".into()));
    }
    Ok(Some(GadmUnit {
        gid,
        name,
        variant_names,
        level,
        parent_gid,
        country_iso3,
        geometry,
    }))
}

fn required_string(lookup: &dyn Fn(&str) -> Option<Value>, key: &str) -> Result<String, GadmError> {
    optional_string(lookup, key).ok_or_else(|| GadmError::SchemaMismatch(key.to_string()))
}

fn optional_string(lookup: &dyn Fn(&str) -> Option<Value>, key: &str) -> Option<String> {
    match lookup(key)? {
        Value::String(s) if !s.is_empty() => Some(s),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn write_layer(dir: &Path, name: &str, features: Value) {
        let collection = json!({"type": "FeatureCollection", "features": features});
        std::fs::write(dir.join(name), collection.to_string()).unwrap();
    }

    fn feature(level: u8, gid: &str, name: &str, parent: Option<&str>, rect: [f64; 4]) -> Value {
        let mut properties = json!({
            format!("GID_{level}"): gid,
            format!("NAME_{level}"): name,
            "GID_0": gid.split('.').next().unwrap(),
        });
        if let Some(p) = parent {
            properties[format!("GID_{}", level - 1)] = json!(p);
        }
        json!({
            "type": "Feature",
            "properties": properties,
            "geometry": {
                "type": "Polygon",
                "coordinates": [[
                    [rect[0], rect[1]], [rect[2], rect[1]],
                    [rect[2], rect[3]], [rect[0], rect[3]],
                    [rect[0], rect[1]],
                ]],
            },
        })
    }

    #[test]
    fn loads_fixture_with_parent_links() {
        let dir = tempfile::tempdir().unwrap();
        write_layer(
            dir.path(),
            "ADM_1.geojson",
            json!([
                feature(1, "PAK.1_1", "Punjab", None, [0.0, 0.0, 2.0, 2.0]),
                feature(1, "PAK.2_1", "Sindh", None, [2.0, 0.0, 4.0, 2.0]),
                feature(1, "PAK.3_1", "Balochistan", None, [4.0, 0.0, 6.0, 2.0]),
            ]),
        );
        write_layer(
            dir.path(),
            "ADM_2.geojson",
            json!([
                feature(2, "PAK.1.1_1", "Lahore", Some("PAK.1_1"), [0.0, 0.0, 1.0, 2.0]),
                feature(2, "PAK.1.2_1", "Multan", Some("PAK.1_1"), [1.0, 0.0, 2.0, 2.0]),
                feature(2, "PAK.2.1_1", "Dadu", Some("PAK.2_1"), [2.0, 0.0, 3.0, 2.0]),
                feature(2, "PAK.2.2_1", "Thatta", Some("PAK.2_1"), [3.0, 0.0, 4.0, 2.0]),
                feature(2, "PAK.3.1_1", "Quetta", Some("PAK.3_1"), [4.0, 0.0, 5.0, 2.0]),
            ]),
        );
        let index = load_gadm(dir.path(), None, &LayerNaming::default()).unwrap();
        assert_eq!(index.len(), 8);
        let lahore = index.unit_by_gid("PAK.1.1_1").unwrap();
        assert_eq!(lahore.parent_gid.as_deref(), Some("PAK.1_1"));
        assert_eq!(index.direct_children("PAK.1_1").len(), 2);
        assert_eq!(index.direct_children("PAK.2_1").len(), 2);
    }

    #[test]
    fn empty_filter_indexes_everything() {
        let dir = tempfile::tempdir().unwrap();
        write_layer(
            dir.path(),
            "ADM_1.geojson",
            json!([
                feature(1, "PAK.1_1", "Punjab", None, [0.0, 0.0, 2.0, 2.0]),
                feature(1, "IND.1_1", "Kerala", None, [10.0, 0.0, 12.0, 2.0]),
            ]),
        );
        let index = load_gadm(dir.path(), None, &LayerNaming::default()).unwrap();
        assert_eq!(index.len(), 2);
        assert!(index.has_country("PAK"));
        assert!(index.has_country("IND"));
    }

    #[test]
    fn country_filter_restricts_units() {
        let dir = tempfile::tempdir().unwrap();
        write_layer(
            dir.path(),
            "ADM_1.geojson",
            json!([
                feature(1, "PAK.1_1", "Punjab", None, [0.0, 0.0, 2.0, 2.0]),
                feature(1, "IND.1_1", "Kerala", None, [10.0, 0.0, 12.0, 2.0]),
            ]),
        );
        let filter: BTreeSet<String> = ["PAK".to_string()].into();
        let index = load_gadm(dir.path(), Some(&filter), &LayerNaming::default()).unwrap();
        assert_eq!(index.len(), 1);
        assert!(!index.has_country("IND"));
    }

    #[test]
    fn filtered_country_without_units_errors() {
        let dir = tempfile::tempdir().unwrap();
        write_layer(
            dir.path(),
            "ADM_1.geojson",
            json!([feature(1, "PAK.1_1", "Punjab", None, [0.0, 0.0, 2.0, 2.0])]),
        );
        let filter: BTreeSet<String> = ["ATL".to_string()].into();
        assert!(matches!(
            load_gadm(dir.path(), Some(&filter), &LayerNaming::default()),
            Err(GadmError::EmptyCountry(c)) if c == "ATL"
        ));
    }

    #[test]
    fn missing_name_field_is_a_schema_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let mut bad = feature(1, "PAK.1_1", "Punjab", None, [0.0, 0.0, 2.0, 2.0]);
        bad["properties"].as_object_mut().unwrap().remove("NAME_1");
        write_layer(dir.path(), "ADM_1.geojson", json!([bad]));
        assert!(matches!(
            load_gadm(dir.path(), None, &LayerNaming::default()),
            Err(GadmError::SchemaMismatch(f)) if f == "NAME_1"
        ));
    }

    #[test]
    fn missing_level_one_layer_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_gadm(dir.path(), None, &LayerNaming::default()),
            Err(GadmError::MissingLayer(l)) if l == "ADM_1"
        ));
    }

    #[test]
    fn variant_names_are_split_on_pipes() {
        let dir = tempfile::tempdir().unwrap();
        let mut f = feature(1, "SEN.1_1", "Dakar", None, [0.0, 0.0, 2.0, 2.0]);
        f["properties"]["VARNAME_1"] = json!("Dakhar|Ndakaaru|NA");
        write_layer(dir.path(), "ADM_1.geojson", json!([f]));
        let index = load_gadm(dir.path(), None, &LayerNaming::default()).unwrap();
        let unit = index.unit_by_gid("SEN.1_1").unwrap();
        assert_eq!(unit.variant_names, vec!["Dakhar", "Ndakaaru"]);
    }
}
