//! Candidate geometries proposed by the individual geocoding sources.

use serde::{Deserialize, Serialize};

use crate::geometry::Geom;

/// The geospatial reference a candidate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SourceTag {
    GADM,
    OSM,
    WIKIDATA,
}

impl SourceTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SourceTag::GADM => "GADM",
            SourceTag::OSM => "OSM",
            SourceTag::WIKIDATA => "WIKIDATA",
        }
    }
}

impl std::fmt::Display for SourceTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One source's proposal for one parsed location.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateGeometry {
    pub source: SourceTag,
    pub matched_name: String,
    pub geometry: Geom,
    /// osm_type/osm_id, a Wikidata QID, or a GADM gid.
    pub external_id: String,
    /// Fuzzy score for GADM, service rank for the remote sources.
    pub score_or_rank: f64,
    /// The query terms that produced this candidate, most specific first.
    pub query_context: Vec<String>,
}

/// Per-location candidates from the three sources, fused by
/// [`crate::harmonize`].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CandidateSet {
    pub gadm: Option<CandidateGeometry>,
    pub osm: Option<CandidateGeometry>,
    pub wikidata: Option<CandidateGeometry>,
}

impl CandidateSet {
    pub fn present_sources(&self) -> Vec<SourceTag> {
        let mut out = Vec::new();
        if self.gadm.is_some() {
            out.push(SourceTag::GADM);
        }
        if self.osm.is_some() {
            out.push(SourceTag::OSM);
        }
        if self.wikidata.is_some() {
            out.push(SourceTag::WIKIDATA);
        }
        out
    }

    pub fn count(&self) -> usize {
        self.present_sources().len()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }
}
