//! Geometry kernel over WGS84 points and (multi)polygons: equal-area
//! areas, set operations, containment, dissolution, geodesic distance and
//! the overlap/Jaccard ratios built on them.
//!
//! Set operations run on longitude/latitude coordinates; areas are
//! evaluated after projecting vertices to a cylindrical equal-area frame
//! (standard parallel 0), so containment ratios are area-true.

use geo::algorithm::bool_ops::unary_union;
use geo::algorithm::line_measures::{Distance, Haversine};
use geo::{Area, BooleanOps, Coord, Intersects, LineString, MultiPolygon, Point, Polygon};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Radius of the sphere with the same surface area as the WGS84 ellipsoid,
/// in kilometres. Used by the equal-area projection.
pub const AUTHALIC_RADIUS_KM: f64 = 6371.0072;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("operation expects {expected}, got {got}")]
    KindError {
        expected: &'static str,
        got: &'static str,
    },
    #[error("irreparable geometry: {0}")]
    TopologyError(String),
    #[error("coordinate out of range: lon {lon}, lat {lat}")]
    OutOfRange { lon: f64, lat: f64 },
    #[error("unsupported GeoJSON geometry: {0}")]
    UnsupportedGeometry(String),
}

/// Area in square kilometres; never negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct AreaKm2(pub f64);

/// A WGS84 geometry: point, polygon or multipolygon, coordinates in
/// degrees (longitude, latitude).
#[derive(Debug, Clone, PartialEq)]
pub enum Geom {
    Point(Point<f64>),
    Polygon(Polygon<f64>),
    MultiPolygon(MultiPolygon<f64>),
}

impl Geom {
    pub fn point(lon: f64, lat: f64) -> Geom {
        Geom::Point(Point::new(lon, lat))
    }

    /// Axis-aligned rectangle, handy for fixtures and clipping.
    pub fn rect(min_lon: f64, min_lat: f64, max_lon: f64, max_lat: f64) -> Geom {
        Geom::Polygon(rect_polygon(min_lon, min_lat, max_lon, max_lat))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Geom::Point(_) => "Point",
            Geom::Polygon(_) => "Polygon",
            Geom::MultiPolygon(_) => "MultiPolygon",
        }
    }

    pub fn is_point(&self) -> bool {
        matches!(self, Geom::Point(_))
    }

    pub fn is_polygonal(&self) -> bool {
        !self.is_point()
    }

    /// True for polygonal geometries with no rings left (e.g. an empty
    /// intersection).
    pub fn is_empty(&self) -> bool {
        match self {
            Geom::Point(_) => false,
            Geom::Polygon(p) => p.exterior().0.is_empty(),
            Geom::MultiPolygon(mp) => mp.0.iter().all(|p| p.exterior().0.is_empty()),
        }
    }

    pub fn as_point(&self) -> Result<Point<f64>, GeomError> {
        match self {
            Geom::Point(p) => Ok(*p),
            other => Err(GeomError::KindError {
                expected: "Point",
                got: other.kind(),
            }),
        }
    }

    pub fn as_multi_polygon(&self) -> Result<MultiPolygon<f64>, GeomError> {
        match self {
            Geom::Polygon(p) => Ok(MultiPolygon(vec![p.clone()])),
            Geom::MultiPolygon(mp) => Ok(mp.clone()),
            Geom::Point(_) => Err(GeomError::KindError {
                expected: "Polygon or MultiPolygon",
                got: "Point",
            }),
        }
    }

    /// A point guaranteed to lie on the geometry, used as the reference
    /// for distance ranking against parent units.
    pub fn representative_point(&self) -> Option<Point<f64>> {
        use geo::InteriorPoint;
        match self {
            Geom::Point(p) => Some(*p),
            Geom::Polygon(p) => p.interior_point(),
            Geom::MultiPolygon(mp) => mp.interior_point(),
        }
    }
}

fn rect_polygon(min_lon: f64, min_lat: f64, max_lon: f64, max_lat: f64) -> Polygon<f64> {
    Polygon::new(
        LineString::from(vec![
            (min_lon, min_lat),
            (max_lon, min_lat),
            (max_lon, max_lat),
            (min_lon, max_lat),
            (min_lon, min_lat),
        ]),
        vec![],
    )
}

/// Area of a polygonal geometry in km², computed on an equal-area basis:
/// vertices are projected to a cylindrical equal-area frame before planar
/// evaluation. Degenerate rings contribute zero.
pub fn area(g: &Geom) -> Result<AreaKm2, GeomError> {
    let mp = g.as_multi_polygon()?;
    let projected = MultiPolygon(mp.0.iter().map(project_polygon).collect());
    Ok(AreaKm2(projected.unsigned_area()))
}

fn project_polygon(p: &Polygon<f64>) -> Polygon<f64> {
    Polygon::new(
        project_ring(p.exterior()),
        p.interiors().iter().map(project_ring).collect(),
    )
}

fn project_ring(ring: &LineString<f64>) -> LineString<f64> {
    LineString(ring.0.iter().map(|c| project_coord(*c)).collect())
}

/// Cylindrical equal-area projection, standard parallel 0:
/// x = R·λ, y = R·sin(φ).
fn project_coord(c: Coord<f64>) -> Coord<f64> {
    Coord {
        x: AUTHALIC_RADIUS_KM * c.x.to_radians(),
        y: AUTHALIC_RADIUS_KM * c.y.to_radians().sin(),
    }
}

/// Set-theoretic intersection of two polygonal geometries. Disjoint inputs
/// yield an empty multipolygon.
pub fn intersection(a: &Geom, b: &Geom) -> Result<Geom, GeomError> {
    let (ma, mb) = (a.as_multi_polygon()?, b.as_multi_polygon()?);
    Ok(Geom::MultiPolygon(ma.intersection(&mb)))
}

/// Dissolve: union of all polygonal inputs. Order-independent.
pub fn union_all(gs: &[Geom]) -> Result<Geom, GeomError> {
    let mut polys: Vec<Polygon<f64>> = Vec::new();
    for g in gs {
        polys.extend(g.as_multi_polygon()?.0);
    }
    Ok(Geom::MultiPolygon(unary_union(polys.iter())))
}

/// Share of `a`'s area that falls within `b`; 0 when `a` has no area.
pub fn overlap_ratio(a: &Geom, b: &Geom) -> Result<f64, GeomError> {
    let area_a = area(a)?.0;
    if area_a == 0.0 {
        return Ok(0.0);
    }
    let area_b = area(b)?.0;
    let inter = area(&intersection(a, b)?)?.0;
    // in exact arithmetic the intersection never exceeds either operand;
    // capping removes the set-operation quantization noise
    Ok(inter.min(area_a).min(area_b) / area_a)
}

/// Jaccard index |A∩B| / |A∪B|; 0 when both are empty.
pub fn jaccard(a: &Geom, b: &Geom) -> Result<f64, GeomError> {
    let area_a = area(a)?.0;
    let area_b = area(b)?.0;
    let inter = area(&intersection(a, b)?)?.0.min(area_a).min(area_b);
    // the union covers each operand; same noise cap as above
    let uni = area(&union_all(&[a.clone(), b.clone()])?)?
        .0
        .max(area_a)
        .max(area_b);
    if uni == 0.0 {
        return Ok(0.0);
    }
    Ok(inter / uni)
}

/// Boundary-inclusive point-in-polygon test.
pub fn contains_point(poly: &Geom, p: &Geom) -> Result<bool, GeomError> {
    let point = p.as_point()?;
    let mp = poly.as_multi_polygon()?;
    Ok(mp.intersects(&point))
}

/// Great-circle (haversine) distance in kilometres, mean Earth radius
/// 6371.0088 km.
pub fn geodesic_distance(p1: Point<f64>, p2: Point<f64>) -> f64 {
    Haversine.distance(p1, p2) / 1000.0
}

/// Validity repair applied to every ingested polygon: closes rings, drops
/// consecutive duplicate vertices and degenerate rings, fixes ring
/// orientation, and splits antimeridian-crossing polygons at ±180°.
pub fn repair(g: Geom) -> Result<Geom, GeomError> {
    match g {
        Geom::Point(p) => {
            check_finite(p.x(), p.y())?;
            check_range(p.x(), p.y())?;
            Ok(Geom::Point(p))
        }
        Geom::Polygon(p) => {
            let cleaned = repair_multi(MultiPolygon(vec![p]))?;
            Ok(collapse_single(cleaned))
        }
        Geom::MultiPolygon(mp) => {
            let cleaned = repair_multi(mp)?;
            Ok(Geom::MultiPolygon(cleaned))
        }
    }
}

fn collapse_single(mp: MultiPolygon<f64>) -> Geom {
    if mp.0.len() == 1 {
        Geom::Polygon(mp.0.into_iter().next().unwrap())
    } else {
        Geom::MultiPolygon(mp)
    }
}

fn repair_multi(mp: MultiPolygon<f64>) -> Result<MultiPolygon<f64>, GeomError> {
    use geo::orient::{Direction, Orient};
    let mut out: Vec<Polygon<f64>> = Vec::new();
    for poly in mp.0 {
        let exterior = match clean_ring(poly.exterior())? {
            Some(r) => r,
            None => continue, // degenerate ring, contributes nothing
        };
        let mut interiors = Vec::new();
        for hole in poly.interiors() {
            if let Some(r) = clean_ring(hole)? {
                interiors.push(r);
            }
        }
        out.push(Polygon::new(exterior, interiors));
    }
    let oriented = MultiPolygon(out).orient(Direction::Default);
    split_antimeridian(oriented)
}

fn clean_ring(ring: &LineString<f64>) -> Result<Option<LineString<f64>>, GeomError> {
    let mut coords: Vec<Coord<f64>> = Vec::with_capacity(ring.0.len());
    for c in &ring.0 {
        check_finite(c.x, c.y)?;
        if coords.last() != Some(c) {
            coords.push(*c);
        }
    }
    if let (Some(first), Some(last)) = (coords.first().copied(), coords.last().copied()) {
        if first != last {
            coords.push(first);
        }
    }
    // a closed ring needs at least a triangle
    if coords.len() < 4 {
        return Ok(None);
    }
    Ok(Some(LineString(coords)))
}

fn check_finite(lon: f64, lat: f64) -> Result<(), GeomError> {
    if !lon.is_finite() || !lat.is_finite() {
        return Err(GeomError::TopologyError(format!(
            "non-finite coordinate ({lon}, {lat})"
        )));
    }
    Ok(())
}

fn check_range(lon: f64, lat: f64) -> Result<(), GeomError> {
    if !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
        return Err(GeomError::OutOfRange { lon, lat });
    }
    Ok(())
}

/// Split polygons that cross ±180° into a western and an eastern part so
/// wrap-around does not corrupt areas (Fiji, Chukotka). Rings are first
/// unwrapped into a continuous longitude frame, then clipped against the
/// two hemispheric rectangles.
fn split_antimeridian(mp: MultiPolygon<f64>) -> Result<MultiPolygon<f64>, GeomError> {
    let crosses = mp.0.iter().any(|p| {
        p.exterior()
            .0
            .windows(2)
            .any(|w| (w[1].x - w[0].x).abs() > 180.0)
    });
    if !crosses {
        return Ok(mp);
    }

    let unwrapped = MultiPolygon(
        mp.0
            .iter()
            .map(|p| {
                Polygon::new(
                    unwrap_ring(p.exterior()),
                    p.interiors().iter().map(unwrap_ring).collect(),
                )
            })
            .collect(),
    );

    let world = rect_polygon(-180.0, -90.0, 180.0, 90.0);
    let east_overflow = rect_polygon(180.0, -90.0, 540.0, 90.0);
    let west_overflow = rect_polygon(-540.0, -90.0, -180.0, 90.0);

    let mut parts: Vec<Polygon<f64>> = unwrapped.intersection(&MultiPolygon(vec![world])).0;
    for poly in unwrapped
        .intersection(&MultiPolygon(vec![east_overflow]))
        .0
    {
        parts.push(shift_lon(&poly, -360.0));
    }
    for poly in unwrapped
        .intersection(&MultiPolygon(vec![west_overflow]))
        .0
    {
        parts.push(shift_lon(&poly, 360.0));
    }
    Ok(MultiPolygon(parts))
}

fn unwrap_ring(ring: &LineString<f64>) -> LineString<f64> {
    let mut out: Vec<Coord<f64>> = Vec::with_capacity(ring.0.len());
    let mut offset = 0.0;
    for (i, c) in ring.0.iter().enumerate() {
        if i > 0 {
            let prev = ring.0[i - 1].x;
            let delta = c.x - prev;
            if delta > 180.0 {
                offset -= 360.0;
            } else if delta < -180.0 {
                offset += 360.0;
            }
        }
        out.push(Coord {
            x: c.x + offset,
            y: c.y,
        });
    }
    LineString(out)
}

fn shift_lon(p: &Polygon<f64>, shift: f64) -> Polygon<f64> {
    let shift_ring = |r: &LineString<f64>| {
        LineString(
            r.0.iter()
                .map(|c| Coord {
                    x: c.x + shift,
                    y: c.y,
                })
                .collect(),
        )
    };
    Polygon::new(
        shift_ring(p.exterior()),
        p.interiors().iter().map(shift_ring).collect(),
    )
}

// --- GeoJSON interchange (RFC 7946: coordinates are lon, lat) ---

impl Geom {
    pub fn from_geojson(value: &geojson::Value) -> Result<Geom, GeomError> {
        match value {
            geojson::Value::Point(c) => {
                if c.len() < 2 {
                    return Err(GeomError::UnsupportedGeometry("empty point".into()));
                }
                Ok(Geom::Point(Point::new(c[0], c[1])))
            }
            geojson::Value::Polygon(_) | geojson::Value::MultiPolygon(_) => {
                let geometry: geo::Geometry<f64> = value.clone().try_into().map_err(
                    |e: geojson::Error| GeomError::UnsupportedGeometry(e.to_string()),
                )?;
                match geometry {
                    geo::Geometry::Polygon(p) => Ok(Geom::Polygon(p)),
                    geo::Geometry::MultiPolygon(mp) => Ok(Geom::MultiPolygon(mp)),
                    _ => Err(GeomError::UnsupportedGeometry("unexpected kind".into())),
                }
            }
            other => Err(GeomError::UnsupportedGeometry(other.type_name().into())),
        }
    }

    /// Parse and repair in one step; every loader goes through this.
    pub fn ingest(value: &geojson::Value) -> Result<Geom, GeomError> {
        repair(Geom::from_geojson(value)?)
    }

    pub fn to_geojson(&self) -> geojson::Value {
        match self {
            Geom::Point(p) => geojson::Value::from(p),
            Geom::Polygon(p) => geojson::Value::from(p),
            Geom::MultiPolygon(mp) => geojson::Value::from(mp),
        }
    }
}

impl Serialize for Geom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        geojson::Geometry::new(self.to_geojson()).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Geom {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Geom, D::Error> {
        let geometry = geojson::Geometry::deserialize(deserializer)?;
        Geom::from_geojson(&geometry.value).map_err(D::Error::custom)
    }
}
