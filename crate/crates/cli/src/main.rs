use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use icn_fed::index::{compute_smin, tessellate, CostModel};
use icn_fed::sim::workload::QUERY_DID;
use icn_fed::sim::{find_max_query_rate, Locality, Mode, Scenario, ScenarioConfig};
use icn_fed::store::ingest::{parse_dataset, to_geojson};
use icn_fed::store::{Dialect, Geometry, SpatialStore};
use icn_fed::{Grid, Rect, Tile};
use serde_json::json;

#[derive(Parser)]
#[command(name = "icnfed", version, about = "Federated spatial databases over an ICN: tools and simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum LocalityArg {
    Random,
    Region,
}

impl From<LocalityArg> for Locality {
    fn from(l: LocalityArg) -> Self {
        match l {
            LocalityArg::Random => Locality::Random,
            LocalityArg::Region => Locality::Region,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Split a GeoJSON/CSV dataset into per-site snapshot files.
    Ingest {
        dataset: PathBuf,
        #[arg(long, default_value_t = 3)]
        sites: usize,
        #[arg(long, value_enum, default_value = "random")]
        locality: LocalityArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory for `db{i}.geojson` snapshots.
        #[arg(long)]
        out: PathBuf,
    },
    /// Tessellate one snapshot into at most k tiles.
    Tessellate {
        snapshot: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        levels: u8,
        /// Tessellation GeoJSON output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one trial of a scenario and write metrics CSVs.
    Run {
        config: PathBuf,
        /// Output directory for queries.csv, summary.csv and links.csv.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Search the maximum stable query rate of a scenario.
    Capacity {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Capacity search over a grid of scenario variations.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Query areas in km²; defaults to the config value.
        #[arg(long, value_delimiter = ',')]
        area: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        cache: Vec<bool>,
        #[arg(long, value_delimiter = ',', value_enum)]
        locality: Vec<LocalityArg>,
        /// routing or flooding
        #[arg(long, value_delimiter = ',')]
        mode: Vec<String>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Ingest {
            dataset,
            sites,
            locality,
            seed,
            out,
        } => ingest(&dataset, sites, locality.into(), seed, &out),
        Cmd::Tessellate { snapshot, k, levels, out } => tessellate_cmd(&snapshot, k, levels, &out),
        Cmd::Run { config, out, trial } => run(&config, &out, trial),
        Cmd::Capacity { config, out } => capacity(&config, &out),
        Cmd::Sweep {
            config,
            out,
            area,
            k,
            cache,
            locality,
            mode,
        } => sweep(&config, &out, area, k, cache, locality, mode),
    }
}

fn ingest(dataset: &Path, sites: usize, locality: Locality, seed: u64, out: &Path) -> Result<()> {
    if sites == 0 {
        bail!("sites must be positive");
    }
    let text = fs::read_to_string(dataset).with_context(|| format!("reading {}", dataset.display()))?;
    let parsed = parse_dataset(&text)?;
    let a = icn_fed::sim::assign(&parsed.records, sites, locality, seed);
    fs::create_dir_all(out)?;
    for (i, records) in a.per_site.iter().enumerate() {
        fs::write(out.join(format!("{}.geojson", Scenario::dbsid(i))), to_geojson(records))?;
        println!("{}: {} records", Scenario::dbsid(i), records.len());
    }
    println!("malformed: {}, without region: {}", parsed.rejected, a.rejected);
    Ok(())
}

fn tile_feature(t: &Tile, cost: u64) -> serde_json::Value {
    let r: Rect = t.extent();
    let (lo, hi) = (r.min(), r.max());
    json!({
        "type": "Feature",
        "geometry": {"type": "Polygon", "coordinates": [[
            [lo.lon(), lo.lat()], [hi.lon(), lo.lat()], [hi.lon(), hi.lat()], [lo.lon(), hi.lat()], [lo.lon(), lo.lat()]
        ]]},
        "properties": {"level": t.level, "ix": t.ix, "iy": t.iy, "cost_cells": cost},
    })
}

fn tessellate_cmd(snapshot: &Path, k: usize, levels: u8, out: &Path) -> Result<()> {
    let grid = Grid::new(levels)?;
    let text = fs::read_to_string(snapshot).with_context(|| format!("reading {}", snapshot.display()))?;
    let parsed = parse_dataset(&text)?;
    let mut store = SpatialStore::new("snapshot", grid, Dialect::A);
    for r in &parsed.records {
        store.insert(QUERY_DID, &r.id, Geometry::Point(r.point), r.properties.clone())?;
    }
    let smin = compute_smin(&store, None);
    let tiles = tessellate(grid, &smin, k);
    let model = CostModel::new(grid, &smin);
    let features: Vec<_> = tiles.iter().map(|t| tile_feature(t, model.tile_cost_cells(t))).collect();
    fs::write(
        out,
        serde_json::to_string_pretty(&json!({"type": "FeatureCollection", "features": features}))?,
    )?;
    let levels_used: BTreeSet<u8> = tiles.iter().map(|t| t.level).collect();
    println!("objects: {}", store.len());
    println!("finest active tiles: {}", smin.len());
    println!("tiles: {} (k = {k}, levels {:?})", tiles.len(), levels_used);
    println!("cost cells: {}", model.tessellation_cost_cells(&tiles));
    println!("cost deg2: {}", model.tessellation_cost::<f64>(&tiles));
    Ok(())
}

fn load(config: &Path) -> Result<ScenarioConfig> {
    Ok(ScenarioConfig::load(config)?)
}

fn run(config: &Path, out: &Path, trial: u64) -> Result<()> {
    let cfg = load(config)?;
    let scn = Scenario::new(cfg.clone())?;
    let m = scn.run_trial(cfg.rate, trial);
    let theta = (cfg.stability_theta > 0.0).then_some(cfg.stability_theta);
    fs::create_dir_all(out)?;
    m.write_queries_csv(fs::File::create(out.join("queries.csv"))?)?;
    m.write_summary_csv(fs::File::create(out.join("summary.csv"))?, cfg.stability_window, theta)?;
    m.write_links_csv(fs::File::create(out.join("links.csv"))?)?;
    for (k, v) in m.summary(cfg.stability_window, theta) {
        println!("{k} = {v}");
    }
    Ok(())
}

fn capacity(config: &Path, out: &Path) -> Result<()> {
    let scn = Scenario::new(load(config)?)?;
    let r = find_max_query_rate(&scn)?;
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(["rate", "stable", "slope", "theta", "mean_ms", "timed_out"])?;
    for p in &r.probes {
        w.write_record([
            format!("{:.4}", p.rate),
            p.stable.to_string(),
            format!("{:.6}", p.slope),
            format!("{:.6}", p.theta),
            format!("{:.3}", p.mean_ms),
            p.timed_out.to_string(),
        ])?;
    }
    w.flush()?;
    println!("max rate: {:.2} q/s{}", r.rate, if r.saturated { " (probe budget exhausted)" } else { "" });
    Ok(())
}

/// `v`, or the single config default when no values were given.
fn or<T>(v: Vec<T>, default: T) -> Vec<T> {
    if v.is_empty() {
        vec![default]
    } else {
        v
    }
}

fn sweep(
    config: &Path,
    out: &Path,
    area: Vec<f64>,
    k: Vec<usize>,
    cache: Vec<bool>,
    locality: Vec<LocalityArg>,
    mode: Vec<String>,
) -> Result<()> {
    let base = load(config)?;
    let areas = or(area, base.area_km2);
    let ks = or(k, base.k);
    let caches = or(cache, base.cache);
    let localities: Vec<Locality> = if locality.is_empty() {
        vec![base.locality]
    } else {
        locality.into_iter().map(Into::into).collect()
    };
    let modes = mode
        .iter()
        .map(|m| match m.as_str() {
            "routing" => Ok(Mode::Routing),
            "flooding" => Ok(Mode::Flooding),
            other => bail!("unknown mode {other}"),
        })
        .collect::<Result<Vec<_>>>()?;
    let modes = or(modes, base.mode);
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(["area_km2", "k", "cache", "locality", "mode", "max_rate", "saturated", "probes"])?;
    for &a in &areas {
        for &k in &ks {
            for &c in &caches {
                for &l in &localities {
                    for &m in &modes {
                        let cfg = ScenarioConfig {
                            area_km2: a,
                            k,
                            cache: c,
                            locality: l,
                            mode: m,
                            ..base.clone()
                        };
                        let scn = Scenario::new(cfg)?;
                        let row = match find_max_query_rate(&scn) {
                            Ok(r) => (format!("{:.4}", r.rate), r.saturated.to_string(), r.probes.len()),
                            Err(e) => {
                                eprintln!("area {a} k {k}: {e}");
                                ("NaN".into(), "false".into(), 0)
                            }
                        };
                        w.write_record([
                            a.to_string(),
                            k.to_string(),
                            c.to_string(),
                            format!("{l:?}").to_lowercase(),
                            format!("{m:?}").to_lowercase(),
                            row.0,
                            row.1,
                            row.2.to_string(),
                        ])?;
                        w.flush()?;
                    }
                }
            }
        }
    }
    Ok(())
}
