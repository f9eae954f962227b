//! Minimal GeoPackage reader: enumerates feature layers and decodes rows
//! with their GeoPackage-binary geometry (header + ISO WKB). Covers what
//! GADM and benchmark archives need: 2D points, polygons, multipolygons.

use std::collections::HashMap;
use std::path::Path;

use rusqlite::Connection;
use serde_json::Value;
use thiserror::Error;

use crate::geometry::{repair, Geom};

#[derive(Debug, Error)]
pub enum GpkgError {
    #[error(transparent)]
    Sqlite(#[from] rusqlite::Error),
    #[error("geometry blob: {0}")]
    Blob(String),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeomError),
}

/// One feature row: attribute fields plus the decoded geometry.
#[derive(Debug)]
pub struct FeatureRow {
    pub fields: HashMap<String, Value>,
    pub geometry: Geom,
}

/// Names of the feature layers registered in `gpkg_contents`.
pub fn feature_layers(path: &Path) -> Result<Vec<String>, GpkgError> {
    let conn = Connection::open(path)?;
    let mut stmt =
        conn.prepare("SELECT table_name FROM gpkg_contents WHERE data_type = 'features'")?;
    let names = stmt
        .query_map([], |row| row.get::<_, String>(0))?
        .collect::<Result<Vec<_>, _>>()?;
    Ok(names)
}

/// Read every row of one layer. The geometry column is looked up in
/// `gpkg_geometry_columns`; remaining columns become attribute fields.
pub fn read_layer(path: &Path, layer: &str) -> Result<Vec<FeatureRow>, GpkgError> {
    let conn = Connection::open(path)?;
    let geom_column: String = conn.query_row(
        "SELECT column_name FROM gpkg_geometry_columns WHERE table_name = ?1",
        [layer],
        |row| row.get(0),
    )?;

    let mut stmt = conn.prepare(&format!("SELECT * FROM \"{layer}\""))?;
    let column_names: Vec<String> = stmt
        .column_names()
        .into_iter()
        .map(str::to_string)
        .collect();
    let mut rows = stmt.query([])?;
    let mut out = Vec::new();
    while let Some(row) = rows.next()? {
        let mut fields = HashMap::new();
        let mut geometry = None;
        for (i, name) in column_names.iter().enumerate() {
            if name == &geom_column {
                let blob: Vec<u8> = row.get(i)?;
                geometry = Some(decode_gpkg_geometry(&blob)?);
                continue;
            }
            let value = match row.get_ref(i)? {
                rusqlite::types::ValueRef::Null => Value::Null,
                rusqlite::types::ValueRef::Integer(v) => Value::from(v),
                rusqlite::types::ValueRef::Real(v) => Value::from(v),
                rusqlite::types::ValueRef::Text(t) => {
                    Value::String(String::from_utf8_lossy(t).into_owned())
                }
                rusqlite::types::ValueRef::Blob(_) => Value::Null,
            };
            fields.insert(name.clone(), value);
        }
        let geometry =
            geometry.ok_or_else(|| GpkgError::Blob("row without geometry column".into()))?;
        out.push(FeatureRow { fields, geometry });
    }
    Ok(out)
}

/// GeoPackage binary: "GP" magic, version, flags (endianness, envelope
/// size, empty bit), srs id, optional envelope, then WKB.
pub fn decode_gpkg_geometry(blob: &[u8]) -> Result<Geom, GpkgError> {
    if blob.len() < 8 || blob[0] != b'G' || blob[1] != b'P' {
        return Err(GpkgError::Blob("not a GeoPackage geometry".into()));
    }
    let flags = blob[3];
    if flags & 0b0010_0000 != 0 {
        return Err(GpkgError::Blob("extended geometry not supported".into()));
    }
    let envelope_size = match (flags >> 1) & 0b111 {
        0 => 0,
        1 => 32,
        2 | 3 => 48,
        4 => 64,
        other => return Err(GpkgError::Blob(format!("invalid envelope indicator {other}"))),
    };
    let wkb_start = 8 + envelope_size;
    if blob.len() <= wkb_start {
        return Err(GpkgError::Blob("truncated blob".into()));
    }
    let geom = decode_wkb(&blob[wkb_start..])?;
    Ok(repair(geom)?)
}

struct WkbReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    little: bool,
}

impl<'a> WkbReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], GpkgError> {
        if self.pos + n > self.bytes.len() {
            return Err(GpkgError::Blob("truncated WKB".into()));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn byte_order(&mut self) -> Result<(), GpkgError> {
        self.little = self.take(1)?[0] == 1;
        Ok(())
    }

    fn u32(&mut self) -> Result<u32, GpkgError> {
        let b: [u8; 4] = self.take(4)?.try_into().unwrap();
        Ok(if self.little {
            u32::from_le_bytes(b)
        } else {
            u32::from_be_bytes(b)
        })
    }

    fn f64(&mut self) -> Result<f64, GpkgError> {
        let b: [u8; 8] = self.take(8)?.try_into().unwrap();
        Ok(if self.little {
            f64::from_le_bytes(b)
        } else {
            f64::from_be_bytes(b)
        })
    }

    /// Geometry type with dimensionality; reads the optional EWKB srid.
    fn type_and_dims(&mut self) -> Result<(u32, usize), GpkgError> {
        let raw = self.u32()?;
        let has_srid = raw & 0x2000_0000 != 0;
        let mut base = raw & 0x0FFF_FFFF;
        let mut extra = 0usize;
        if raw & 0x8000_0000 != 0 {
            extra += 1; // wkb25d Z flag
        }
        if raw & 0x4000_0000 != 0 {
            extra += 1; // wkb25d M flag
        }
        match base / 1000 {
            0 => {}
            1 | 2 => {
                extra += 1;
                base %= 1000;
            }
            3 => {
                extra += 2;
                base %= 1000;
            }
            _ => return Err(GpkgError::Blob(format!("geometry type {raw}"))),
        }
        if has_srid {
            self.u32()?;
        }
        Ok((base, 2 + extra))
    }

    fn coord(&mut self, dims: usize) -> Result<(f64, f64), GpkgError> {
        let x = self.f64()?;
        let y = self.f64()?;
        for _ in 2..dims {
            self.f64()?;
        }
        Ok((x, y))
    }

    fn ring(&mut self, dims: usize) -> Result<geo::LineString<f64>, GpkgError> {
        let n = self.u32()? as usize;
        let mut coords = Vec::with_capacity(n);
        for _ in 0..n {
            let (x, y) = self.coord(dims)?;
            coords.push(geo::Coord { x, y });
        }
        Ok(geo::LineString(coords))
    }

    fn polygon_body(&mut self, dims: usize) -> Result<geo::Polygon<f64>, GpkgError> {
        let n_rings = self.u32()? as usize;
        if n_rings == 0 {
            return Ok(geo::Polygon::new(geo::LineString(vec![]), vec![]));
        }
        let exterior = self.ring(dims)?;
        let mut interiors = Vec::with_capacity(n_rings - 1);
        for _ in 1..n_rings {
            interiors.push(self.ring(dims)?);
        }
        Ok(geo::Polygon::new(exterior, interiors))
    }
}

fn decode_wkb(bytes: &[u8]) -> Result<Geom, GpkgError> {
    let mut reader = WkbReader {
        bytes,
        pos: 0,
        little: true,
    };
    decode_wkb_geometry(&mut reader)
}

fn decode_wkb_geometry(reader: &mut WkbReader) -> Result<Geom, GpkgError> {
    reader.byte_order()?;
    let (kind, dims) = reader.type_and_dims()?;
    match kind {
        1 => {
            let (x, y) = reader.coord(dims)?;
            Ok(Geom::point(x, y))
        }
        3 => Ok(Geom::Polygon(reader.polygon_body(dims)?)),
        6 => {
            let n = reader.u32()? as usize;
            let mut polys = Vec::with_capacity(n);
            for _ in 0..n {
                reader.byte_order()?;
                let (inner_kind, inner_dims) = reader.type_and_dims()?;
                if inner_kind != 3 {
                    return Err(GpkgError::Blob(format!(
                        "multipolygon member of type {inner_kind}"
                    )));
                }
                polys.push(reader.polygon_body(inner_dims)?);
            }
            Ok(Geom::MultiPolygon(geo::MultiPolygon(polys)))
        }
        other => Err(GpkgError::Blob(format!("unsupported WKB type {other}"))),
    }
}
