//! Fuse per-location candidates from the three sources into a
//! reliability-scored, GADM-harmonized location: cross-source agreement
//! checks, the 0-4 score, and maximal-overlap reprojection for locations
//! lacking a direct GADM match.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::candidate::{CandidateSet, SourceTag};
use crate::gadm::GadmIndex;
use crate::geometry::{self, Geom, GeomError};

pub const DEFAULT_TAU: f64 = 0.5;

#[derive(Debug, Error)]
pub enum HarmonizeError {
    #[error("no candidate from any source")]
    NoCandidates,
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

/// Outcome of one pairwise agreement check; `NotApplicable` when either
/// operand is missing or the check cannot be evaluated for its kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TriState {
    Pass,
    Fail,
    NotApplicable,
}

impl TriState {
    fn passed(&self) -> bool {
        matches!(self, TriState::Pass)
    }

    fn from_bool(b: bool) -> TriState {
        if b {
            TriState::Pass
        } else {
            TriState::Fail
        }
    }
}

/// The three pairwise agreement checks behind the reliability score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementChecks {
    pub gadm_osm: TriState,
    pub wiki_in_gadm: TriState,
    pub wiki_in_osm: TriState,
}

impl AgreementChecks {
    pub fn none_applicable() -> AgreementChecks {
        AgreementChecks {
            gadm_osm: TriState::NotApplicable,
            wiki_in_gadm: TriState::NotApplicable,
            wiki_in_osm: TriState::NotApplicable,
        }
    }

    fn passes(&self) -> usize {
        [self.gadm_osm, self.wiki_in_gadm, self.wiki_in_osm]
            .iter()
            .filter(|c| c.passed())
            .count()
    }

    fn all_three_pass(&self) -> bool {
        self.passes() == 3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReliabilityLabel {
    NoMatch,
    SingleSource,
    TwoAvailable,
    HighAgreement,
    FullAgreement,
}

impl ReliabilityLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReliabilityLabel::NoMatch => "NoMatch",
            ReliabilityLabel::SingleSource => "SingleSource",
            ReliabilityLabel::TwoAvailable => "TwoAvailable",
            ReliabilityLabel::HighAgreement => "HighAgreement",
            ReliabilityLabel::FullAgreement => "FullAgreement",
        }
    }

    pub fn from_value(value: u8) -> Option<ReliabilityLabel> {
        match value {
            0 => Some(ReliabilityLabel::NoMatch),
            1 => Some(ReliabilityLabel::SingleSource),
            2 => Some(ReliabilityLabel::TwoAvailable),
            3 => Some(ReliabilityLabel::HighAgreement),
            4 => Some(ReliabilityLabel::FullAgreement),
            _ => None,
        }
    }
}

impl std::fmt::Display for ReliabilityLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Cross-source agreement score, 0-4. Higher is stronger concordance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReliabilityScore {
    pub value: u8,
    pub label: ReliabilityLabel,
    pub checks: AgreementChecks,
}

impl ReliabilityScore {
    /// Pure scoring rule over (number of sources, check outcomes):
    /// 0 sources -> 0; 1 -> 1; 2 -> 3 when the single applicable check
    /// passes, else 2; 3 -> 4 when all three checks pass, 3 when at least
    /// one passes, else 2.
    pub fn from_observations(sources: usize, checks: AgreementChecks) -> ReliabilityScore {
        let value = match sources {
            0 => 0,
            1 => 1,
            2 => {
                if checks.passes() >= 1 {
                    3
                } else {
                    2
                }
            }
            _ => {
                if checks.all_three_pass() {
                    4
                } else if checks.passes() >= 1 {
                    3
                } else {
                    2
                }
            }
        };
        ReliabilityScore {
            value,
            label: ReliabilityLabel::from_value(value).expect("value is 0..=4"),
            checks,
        }
    }
}

/// Evaluate the agreement checks on actual geometries and score them.
///
/// The GADM-OSM check passes when the overlap `area(G∩O)/min(area G,
/// area O)` reaches `tau`; for a point-valued OSM result it degrades to
/// point-in-polygon. The Wikidata checks are point containment in the
/// respective polygon.
pub fn score_consistency(cands: &CandidateSet, tau: f64) -> Result<ReliabilityScore, GeomError> {
    debug_assert!(tau > 0.0 && tau <= 1.0);
    let mut checks = AgreementChecks::none_applicable();

    if let (Some(gadm), Some(osm)) = (&cands.gadm, &cands.osm) {
        checks.gadm_osm = if osm.geometry.is_polygonal() {
            let inter = geometry::area(&geometry::intersection(
                &gadm.geometry,
                &osm.geometry,
            )?)?
            .0;
            let denom = geometry::area(&gadm.geometry)?
                .0
                .min(geometry::area(&osm.geometry)?.0);
            TriState::from_bool(denom > 0.0 && inter / denom >= tau)
        } else {
            TriState::from_bool(geometry::contains_point(&gadm.geometry, &osm.geometry)?)
        };
    }

    if let (Some(gadm), Some(wiki)) = (&cands.gadm, &cands.wikidata) {
        checks.wiki_in_gadm =
            TriState::from_bool(geometry::contains_point(&gadm.geometry, &wiki.geometry)?);
    }

    if let (Some(osm), Some(wiki)) = (&cands.osm, &cands.wikidata) {
        checks.wiki_in_osm = if osm.geometry.is_polygonal() {
            TriState::from_bool(geometry::contains_point(&osm.geometry, &wiki.geometry)?)
        } else {
            TriState::NotApplicable
        };
    }

    Ok(ReliabilityScore::from_observations(cands.count(), checks))
}

/// Harmonized result: one location expressed on the GADM hierarchy (or
/// carrying its proxy geometry when no unit intersects).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeocodedLocation {
    pub query_name: String,
    pub admin_level: u8,
    pub gadm_gid: Option<String>,
    pub gadm_name: Option<String>,
    pub geometry: Geom,
    pub source_mask: Vec<SourceTag>,
    pub reliability: ReliabilityScore,
    pub proxy_used: Option<SourceTag>,
}

/// Express one candidate set on the GADM hierarchy. A GADM candidate is
/// adopted directly. Otherwise the Wikidata candidate (preferred) or the
/// OSM one serves as a proxy: a polygon proxy adopts the unit at the
/// entry's level with the largest intersection area (ties: larger share
/// of the unit covered, then smallest gid); a point proxy adopts the
/// containing unit. With no intersection at all the proxy geometry is
/// kept and `gadm_gid` stays empty.
pub fn reproject_to_gadm(
    cands: &CandidateSet,
    query_name: &str,
    level: u8,
    country_iso3: &str,
    index: &GadmIndex,
    reliability: ReliabilityScore,
) -> Result<GeocodedLocation, HarmonizeError> {
    if cands.is_empty() {
        return Err(HarmonizeError::NoCandidates);
    }
    let source_mask = cands.present_sources();

    if let Some(gadm) = &cands.gadm {
        return Ok(GeocodedLocation {
            query_name: query_name.to_string(),
            admin_level: level,
            gadm_gid: Some(gadm.external_id.clone()),
            gadm_name: Some(gadm.matched_name.clone()),
            geometry: gadm.geometry.clone(),
            source_mask,
            reliability,
            proxy_used: None,
        });
    }

    let proxy = cands
        .wikidata
        .as_ref()
        .or(cands.osm.as_ref())
        .expect("candidate set is non-empty");

    let adopted = if proxy.geometry.is_polygonal() {
        best_unit_by_overlap(&proxy.geometry, level, country_iso3, index)?
    } else {
        containing_unit(&proxy.geometry, level, country_iso3, index)?
    };

    Ok(match adopted {
        Some(unit) => GeocodedLocation {
            query_name: query_name.to_string(),
            admin_level: level,
            gadm_gid: Some(unit.gid.clone()),
            gadm_name: Some(unit.name.clone()),
            geometry: unit.geometry.clone(),
            source_mask,
            reliability,
            proxy_used: Some(proxy.source),
        },
        None => GeocodedLocation {
            query_name: query_name.to_string(),
            admin_level: level,
            gadm_gid: None,
            gadm_name: None,
            geometry: proxy.geometry.clone(),
            source_mask,
            reliability,
            proxy_used: Some(proxy.source),
        },
    })
}

fn best_unit_by_overlap(
    proxy: &Geom,
    level: u8,
    iso3: &str,
    index: &GadmIndex,
) -> Result<Option<std::sync::Arc<crate::gadm::GadmUnit>>, HarmonizeError> {
    let mut best: Option<(f64, f64, std::sync::Arc<crate::gadm::GadmUnit>)> = None;
    for unit in index.units_at(iso3, level) {
        let inter = geometry::area(&geometry::intersection(&unit.geometry, proxy)?)?.0;
        if inter <= 0.0 {
            continue;
        }
        let unit_share = geometry::overlap_ratio(&unit.geometry, proxy)?;
        let better = match &best {
            None => true,
            Some((best_inter, best_share, best_unit)) => {
                inter > *best_inter
                    || (inter == *best_inter && unit_share > *best_share)
                    || (inter == *best_inter
                        && unit_share == *best_share
                        && unit.gid < best_unit.gid)
            }
        };
        if better {
            best = Some((inter, unit_share, unit.clone()));
        }
    }
    Ok(best.map(|(_, _, unit)| unit))
}

fn containing_unit(
    point: &Geom,
    level: u8,
    iso3: &str,
    index: &GadmIndex,
) -> Result<Option<std::sync::Arc<crate::gadm::GadmUnit>>, HarmonizeError> {
    let mut containing: Vec<std::sync::Arc<crate::gadm::GadmUnit>> = Vec::new();
    for unit in index.units_at(iso3, level) {
        if geometry::contains_point(&unit.geometry, point)? {
            containing.push(unit.clone());
        }
    }
    containing.sort_by(|a, b| a.gid.cmp(&b.gid));
    Ok(containing.into_iter().next())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidate::CandidateGeometry;
    use crate::gadm::GadmUnit;

    fn cand(source: SourceTag, geometry: Geom) -> CandidateGeometry {
        CandidateGeometry {
            source,
            matched_name: format!("{source}-name"),
            geometry,
            external_id: format!("{source}-id"),
            score_or_rank: 0.0,
            query_context: vec![],
        }
    }

    fn square() -> Geom {
        Geom::rect(0.0, 0.0, 1.0, 1.0)
    }

    #[test]
    fn single_source_scores_one() {
        let cands = CandidateSet {
            gadm: Some(cand(SourceTag::GADM, square())),
            ..Default::default()
        };
        let score = score_consistency(&cands, DEFAULT_TAU).unwrap();
        assert_eq!(score.value, 1);
        assert_eq!(score.label, ReliabilityLabel::SingleSource);
        assert_eq!(score.checks, AgreementChecks::none_applicable());
    }

    #[test]
    fn identical_gadm_osm_polygons_score_three() {
        let cands = CandidateSet {
            gadm: Some(cand(SourceTag::GADM, square())),
            osm: Some(cand(SourceTag::OSM, square())),
            ..Default::default()
        };
        let score = score_consistency(&cands, DEFAULT_TAU).unwrap();
        assert_eq!(score.value, 3);
        assert_eq!(score.label, ReliabilityLabel::HighAgreement);
        assert_eq!(score.checks.gadm_osm, TriState::Pass);
    }

    #[test]
    fn all_three_agreeing_score_four() {
        let cands = CandidateSet {
            gadm: Some(cand(SourceTag::GADM, square())),
            osm: Some(cand(SourceTag::OSM, square())),
            wikidata: Some(cand(SourceTag::WIKIDATA, Geom::point(0.5, 0.5))),
        };
        let score = score_consistency(&cands, DEFAULT_TAU).unwrap();
        assert_eq!(score.value, 4);
        assert_eq!(score.label, ReliabilityLabel::FullAgreement);
    }

    #[test]
    fn disjoint_two_sources_score_two() {
        let cands = CandidateSet {
            gadm: Some(cand(SourceTag::GADM, square())),
            osm: Some(cand(SourceTag::OSM, Geom::rect(5.0, 5.0, 6.0, 6.0))),
            ..Default::default()
        };
        let score = score_consistency(&cands, DEFAULT_TAU).unwrap();
        assert_eq!(score.value, 2);
        assert_eq!(score.label, ReliabilityLabel::TwoAvailable);
    }

    #[test]
    fn point_valued_osm_uses_containment() {
        let inside = CandidateSet {
            gadm: Some(cand(SourceTag::GADM, square())),
            osm: Some(cand(SourceTag::OSM, Geom::point(0.5, 0.5))),
            ..Default::default()
        };
        assert_eq!(score_consistency(&inside, DEFAULT_TAU).unwrap().value, 3);
        let outside = CandidateSet {
            gadm: Some(cand(SourceTag::GADM, square())),
            osm: Some(cand(SourceTag::OSM, Geom::point(9.0, 9.0))),
            ..Default::default()
        };
        assert_eq!(score_consistency(&outside, DEFAULT_TAU).unwrap().value, 2);
    }

    #[test]
    fn overlap_just_below_tau_fails_check() {
        // overlap is 0.4 of the smaller square
        let cands = CandidateSet {
            gadm: Some(cand(SourceTag::GADM, square())),
            osm: Some(cand(SourceTag::OSM, Geom::rect(0.6, 0.0, 1.6, 1.0))),
            ..Default::default()
        };
        let score = score_consistency(&cands, DEFAULT_TAU).unwrap();
        assert_eq!(score.checks.gadm_osm, TriState::Fail);
        assert_eq!(score.value, 2);
    }

    fn unit(gid: &str, rect: [f64; 4]) -> GadmUnit {
        GadmUnit {
            gid: gid.to_string(),
            name: format!("unit-{gid}"),
            variant_names: vec![],
            level: 2,
            parent_gid: None,
            country_iso3: "TST".to_string(),
            geometry: Geom::rect(rect[0], rect[1], rect[2], rect[3]),
        }
    }

    fn fixture_index() -> GadmIndex {
        GadmIndex::build(vec![
            unit("TST.1.1_1", [0.0, 0.0, 6.0, 1.0]),
            unit("TST.1.2_1", [6.0, 0.0, 9.0, 1.0]),
            unit("TST.1.3_1", [9.0, 0.0, 10.0, 1.0]),
        ])
    }

    fn neutral_score() -> ReliabilityScore {
        ReliabilityScore::from_observations(1, AgreementChecks::none_applicable())
    }

    #[test]
    fn polygon_proxy_adopts_largest_overlap() {
        // proxy covers 60% / 30% / 10% of its own area across the units
        let index = fixture_index();
        let proxy = Geom::rect(0.0, 0.0, 10.0, 1.0);
        let cands = CandidateSet {
            osm: Some(cand(SourceTag::OSM, proxy)),
            ..Default::default()
        };
        let loc =
            reproject_to_gadm(&cands, "q", 2, "TST", &index, neutral_score()).unwrap();
        assert_eq!(loc.gadm_gid.as_deref(), Some("TST.1.1_1"));
        assert_eq!(loc.proxy_used, Some(SourceTag::OSM));
        // geometry is the adopted unit's polygon
        let unit_area = geometry::area(&index.unit_by_gid("TST.1.1_1").unwrap().geometry)
            .unwrap()
            .0;
        assert!((geometry::area(&loc.geometry).unwrap().0 - unit_area).abs() < 1e-9);
    }

    #[test]
    fn point_proxy_adopts_containing_unit() {
        let index = fixture_index();
        let cands = CandidateSet {
            wikidata: Some(cand(SourceTag::WIKIDATA, Geom::point(7.0, 0.5))),
            ..Default::default()
        };
        let loc =
            reproject_to_gadm(&cands, "q", 2, "TST", &index, neutral_score()).unwrap();
        assert_eq!(loc.gadm_gid.as_deref(), Some("TST.1.2_1"));
        assert_eq!(loc.proxy_used, Some(SourceTag::WIKIDATA));
    }

    #[test]
    fn gadm_candidate_passes_through_unchanged() {
        let index = fixture_index();
        let gadm_geom = index.unit_by_gid("TST.1.2_1").unwrap().geometry.clone();
        let mut gadm_cand = cand(SourceTag::GADM, gadm_geom.clone());
        gadm_cand.external_id = "TST.1.2_1".into();
        let cands = CandidateSet {
            gadm: Some(gadm_cand),
            wikidata: Some(cand(SourceTag::WIKIDATA, Geom::point(0.1, 0.1))),
            ..Default::default()
        };
        let loc =
            reproject_to_gadm(&cands, "q", 2, "TST", &index, neutral_score()).unwrap();
        assert_eq!(loc.gadm_gid.as_deref(), Some("TST.1.2_1"));
        assert!(loc.proxy_used.is_none());
        assert_eq!(loc.geometry, gadm_geom);
    }

    #[test]
    fn wikidata_preferred_over_osm_as_proxy() {
        let index = fixture_index();
        let cands = CandidateSet {
            osm: Some(cand(SourceTag::OSM, Geom::rect(0.0, 0.0, 1.0, 1.0))),
            wikidata: Some(cand(SourceTag::WIKIDATA, Geom::point(9.5, 0.5))),
            ..Default::default()
        };
        let loc =
            reproject_to_gadm(&cands, "q", 2, "TST", &index, neutral_score()).unwrap();
        assert_eq!(loc.proxy_used, Some(SourceTag::WIKIDATA));
        assert_eq!(loc.gadm_gid.as_deref(), Some("TST.1.3_1"));
    }

    #[test]
    fn no_intersection_keeps_proxy_geometry() {
        let index = fixture_index();
        let proxy = Geom::rect(50.0, 50.0, 51.0, 51.0);
        let cands = CandidateSet {
            osm: Some(cand(SourceTag::OSM, proxy.clone())),
            ..Default::default()
        };
        let loc =
            reproject_to_gadm(&cands, "q", 2, "TST", &index, neutral_score()).unwrap();
        assert!(loc.gadm_gid.is_none());
        assert!(loc.gadm_name.is_none());
        assert_eq!(loc.geometry, proxy);
        assert_eq!(loc.proxy_used, Some(SourceTag::OSM));
    }

    #[test]
    fn empty_candidate_set_is_an_error() {
        let index = fixture_index();
        assert!(matches!(
            reproject_to_gadm(
                &CandidateSet::default(),
                "q",
                2,
                "TST",
                &index,
                neutral_score()
            ),
            Err(HarmonizeError::NoCandidates)
        ));
    }

    // the exhaustive enumeration of presence patterns and check outcomes
    // lives in the acceptance suite; these spot-check the rule table
    #[test]
    fn score_rule_spot_checks() {
        let mut checks = AgreementChecks::none_applicable();
        assert_eq!(ReliabilityScore::from_observations(0, checks).value, 0);
        assert_eq!(ReliabilityScore::from_observations(1, checks).value, 1);
        assert_eq!(ReliabilityScore::from_observations(2, checks).value, 2);
        checks.gadm_osm = TriState::Pass;
        assert_eq!(ReliabilityScore::from_observations(2, checks).value, 3);
        checks.wiki_in_gadm = TriState::Pass;
        checks.wiki_in_osm = TriState::Pass;
        assert_eq!(ReliabilityScore::from_observations(3, checks).value, 4);
        checks.wiki_in_osm = TriState::Fail;
        assert_eq!(ReliabilityScore::from_observations(3, checks).value, 3);
        checks.gadm_osm = TriState::Fail;
        checks.wiki_in_gadm = TriState::Fail;
        assert_eq!(ReliabilityScore::from_observations(3, checks).value, 2);
    }
}
