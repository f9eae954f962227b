//! Geocoding engine for free-text disaster location descriptions.
//!
//! The pipeline turns an event record (identifier, free-text location,
//! country) into reliability-scored subnational geometries:
//!
//! 1. [`parser`] structures the location string into an administrative
//!    hierarchy, via an LLM provider with caching and retries, or a
//!    deterministic rule-based fallback.
//! 2. [`gadm`], [`remote::nominatim`] and [`remote::wikidata`] each propose
//!    candidate geometries for every parsed entry.
//! 3. [`harmonize`] cross-checks the candidates, assigns a 0-4 reliability
//!    score, and reprojects everything onto the GADM hierarchy.
//! 4. [`evaluation`] compares geocoded footprints against benchmark
//!    datasets.
//!
//! [`pipeline`] orchestrates the whole run; the `disgeo` binary is a thin
//! CLI over it.

pub mod cache;
pub mod candidate;
pub mod config;
pub mod countries;
pub mod evaluation;
pub mod gadm;
pub mod geometry;
pub mod gpkg;
pub mod harmonize;
pub mod parser;
pub mod pipeline;
pub mod remote;
pub mod testing;
pub mod textnorm;

pub use candidate::{CandidateGeometry, CandidateSet, SourceTag};
pub use config::PipelineConfig;
pub use gadm::{GadmIndex, GadmUnit, UnitMatch};
pub use geometry::{AreaKm2, Geom};
pub use harmonize::{GeocodedLocation, ReliabilityLabel, ReliabilityScore};
pub use parser::{AdminEntry, AdminLevel, LocationTree};
pub use pipeline::{DisasterRecord, GeocodedEvent};
pub use textnorm::NormalizedName;
