//! `disgeo` command line: geocode event records, evaluate against
//! benchmarks, report aggregate statistics, inspect the cache.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use disgeo::cache::JsonCache;
use disgeo::evaluation::BenchmarkFormat;
use disgeo::gadm::{self, LayerNaming};
use disgeo::pipeline;
use disgeo::PipelineConfig;

#[derive(Parser)]
#[command(name = "disgeo", version, about = "Geocode free-text disaster locations onto the GADM hierarchy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: ingest, parse, geocode, score, export.
    Geocode {
        /// Input CSV with DisNo., Location and Country columns.
        #[arg(long)]
        input: PathBuf,
        /// GADM data: directory of per-level GeoJSON or a .gpkg file
        /// (overrides the config).
        #[arg(long)]
        gadm: Option<PathBuf>,
        /// Pipeline configuration (TOML). Defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for locations.geojson / locations.csv.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Use the rule-based parser and answer remote lookups from the
        /// cache only; no network traffic.
        #[arg(long)]
        offline: bool,
        /// Restrict the GADM index to these ISO3 codes (comma separated).
        #[arg(long)]
        countries: Option<String>,
    },
    /// Compare a geocoded dataset against a benchmark.
    Evaluate {
        /// Geocoded output (locations.geojson).
        #[arg(long)]
        candidate: PathBuf,
        /// Benchmark dataset (GeoJSON or GeoPackage).
        #[arg(long)]
        benchmark: PathBuf,
        /// Benchmark layout: gaul_archive, gdis or llmgeodis.
        #[arg(long)]
        format: String,
        /// GADM data, needed to coarsen Admin3 units against an
        /// Admin2-resolution benchmark.
        #[arg(long)]
        gadm: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Aggregate tables over a geocoded output.
    Stats {
        /// Geocoded output (locations.geojson).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Inspect or clear the parse/geocode cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand)]
enum CacheAction {
    /// Entry counts per namespace.
    Inspect {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Remove every cached entry.
    Clear {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match Cli::parse().command {
        Command::Geocode {
            input,
            gadm,
            config,
            out,
            offline,
            countries,
        } => geocode(input, gadm, config, out, offline, countries),
        Command::Evaluate {
            candidate,
            benchmark,
            format,
            gadm,
            out,
        } => evaluate(candidate, benchmark, &format, gadm, out),
        Command::Stats { input, out } => stats(input, out),
        Command::Cache { action } => cache(action),
    }
}

fn load_config(path: Option<PathBuf>) -> Result<PipelineConfig> {
    match path {
        Some(p) => Ok(PipelineConfig::from_file(&p)?),
        None => Ok(PipelineConfig::default()),
    }
}

fn geocode(
    input: PathBuf,
    gadm_path: Option<PathBuf>,
    config_path: Option<PathBuf>,
    out: PathBuf,
    offline: bool,
    countries: Option<String>,
) -> Result<()> {
    let config = load_config(config_path)?;
    let gadm_path = gadm_path
        .or_else(|| config.gadm.path.clone())
        .context("no GADM path: pass --gadm or set gadm.path in the config")?;
    let filter: Option<BTreeSet<String>> = countries.map(|list| {
        list.split(',')
            .map(|c| c.trim().to_uppercase())
            .filter(|c| !c.is_empty())
            .collect()
    });
    let naming = LayerNaming {
        layers: config.gadm.layers.clone(),
    };
    log::info!("loading GADM data from {}", gadm_path.display());
    let index = gadm::load_gadm_with(
        &gadm_path,
        filter.as_ref(),
        &naming,
        config.descriptor_lexicon(),
    )?;
    log::info!(
        "indexed {} units across {} countries",
        index.len(),
        index.countries().count()
    );

    let ingest = pipeline::ingest_emdat_csv(&input)?;
    log::info!(
        "{} records ingested, {} skipped for empty location",
        ingest.records.len(),
        ingest.skipped_empty_location
    );

    let deps = pipeline::build_deps(&config, Arc::new(index), offline)?;
    let outcome = pipeline::run_pipeline(&ingest.records, &deps);

    let covered = outcome.events.iter().filter(|e| e.coverage_flag).count();
    let locations: usize = outcome.events.iter().map(|e| e.locations.len()).sum();
    for d in &outcome.diagnostics {
        log::warn!("{} [{}] {}", d.dis_no, d.stage, d.message);
    }
    let paths = pipeline::export(&outcome.events, &out)?;
    log::info!(
        "geocoded {covered}/{} events ({locations} locations); wrote {} and {}",
        outcome.events.len(),
        paths.geojson.display(),
        paths.csv.display()
    );
    Ok(())
}

fn evaluate(
    candidate: PathBuf,
    benchmark: PathBuf,
    format: &str,
    gadm_path: Option<PathBuf>,
    out: PathBuf,
) -> Result<()> {
    let Some(format) = BenchmarkFormat::parse(format) else {
        bail!("unknown benchmark format '{format}' (expected gaul_archive, gdis or llmgeodis)");
    };
    let index = match gadm_path {
        Some(path) => Some(gadm::load_gadm(&path, None, &LayerNaming::default())?),
        None => None,
    };
    let report = pipeline::evaluate_datasets(&candidate, &benchmark, format, index.as_ref())?;
    let (csv_path, json_path) = pipeline::write_evaluation(&report, &out)?;
    log::info!(
        "compared {} events / {} units; median Jaccard {:.3}; wrote {} and {}",
        report.events_compared,
        report.unit_count,
        report.jaccard_summary.median,
        csv_path.display(),
        json_path.display()
    );
    Ok(())
}

fn stats(input: PathBuf, out: PathBuf) -> Result<()> {
    let rows = pipeline::rows_from_geojson(&input)?;
    let report = pipeline::stats_report(&rows)?;
    let written = pipeline::write_stats(&report, &out)?;
    for path in written {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn cache(action: CacheAction) -> Result<()> {
    match action {
        CacheAction::Inspect { config } => {
            let config = load_config(config)?;
            let cache = JsonCache::new(config.cache.dir.clone());
            let namespaces = cache.namespaces()?;
            if namespaces.is_empty() {
                println!("cache at {} is empty", cache.root().display());
            }
            for ns in namespaces {
                println!("{ns}: {} entries", cache.keys(&ns)?.len());
            }
        }
        CacheAction::Clear { config } => {
            let config = load_config(config)?;
            let cache = JsonCache::new(config.cache.dir.clone());
            let removed = cache.clear()?;
            println!("removed {removed} entries from {}", cache.root().display());
        }
    }
    Ok(())
}
