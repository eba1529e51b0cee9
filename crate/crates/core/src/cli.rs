//! Batch command line: `simulate`, `analyze`, `proximity`, `render` and
//! `dump-config`.
//!
//! A campaign directory written by `simulate` looks like
//!
//! ```text
//! out/
//!   manifest.json          run records, sorted by run_index
//!   scenario.toml          canonical scenario with overrides applied
//!   runs/run_000/edges.json
//!   runs/run_000/meta.json
//!   runs/run_000/occupancy_006192.png
//!   runs/run_000/chemo_006192.png
//! ```
//!
//! and `analyze` reads it back.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::citymap::{load_scenario_file, Nutrient, Scenario, ScenarioConfig};
use crate::error::{Error, Result};
use crate::exec::{map_indices, with_workers, Exec};
use crate::geometry::{self, PointSet};
use crate::graph::CityGraph;
use crate::graphlab::{
    aggregate, findings_report, load_road_graph, threshold, FindingsInput, Fraction,
    WeightedCityGraph,
};
use crate::netextract::RunEdges;
use crate::plasmodium::{run_with, ModelParams, RunResult, RNG_NAME};
use crate::render;

pub const MANIFEST_FILE: &str = "manifest.json";
const SCENARIO_FILE: &str = "scenario.toml";

#[derive(Debug, Parser)]
#[command(name = "physarum", version, about = "Virtual plasmodium road-network experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulation campaign and write edge sets, snapshots and a manifest.
    Simulate(SimulateArgs),
    /// Aggregate a campaign, sweep thresholds and evaluate the findings.
    Analyze(AnalyzeArgs),
    /// Export proximity graphs and the Prim growth order of the cities.
    Proximity(ProximityArgs),
    /// Draw snapshot series and graphs over the map.
    Render(RenderArgs),
    /// Print the scenario with every default filled in.
    DumpConfig(DumpConfigArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct Overrides {
    /// Base seed; run i uses base_seed XOR i.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<u32>,
    #[arg(long)]
    pub steps: Option<u64>,
    /// Occupancy dilation (cells) before edge extraction.
    #[arg(long)]
    pub dilation: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum ImageKind {
    #[default]
    Png,
    Pgm,
}

impl ImageKind {
    fn ext(self) -> &'static str {
        match self {
            ImageKind::Png => "png",
            ImageKind::Pgm => "pgm",
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Number of runs executed concurrently.
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    #[arg(long, value_enum, default_value_t = ImageKind::Png)]
    pub image_format: ImageKind,
    /// Skip writing snapshot images.
    #[arg(long)]
    pub no_snapshots: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Campaign directory or its manifest.json.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Road graph edge list.
    #[arg(long)]
    pub roads: Option<PathBuf>,
    /// Laboratory weighted graph (same JSON layout as weighted.json).
    #[arg(long)]
    pub lab: Option<PathBuf>,
    /// Thresholds to export, e.g. `--theta 10/20,20/20`. Defaults to every count/k.
    #[arg(long, value_delimiter = ',')]
    pub theta: Vec<Fraction>,
    /// Output directory; defaults to `<campaign>/analysis`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Analyse an incomplete campaign over the runs that finished.
    #[arg(long)]
    pub allow_partial: bool,
}

#[derive(Debug, Args)]
pub struct ProximityArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Root city of the growth sequence.
    #[arg(long, default_value = "Roma")]
    pub root: String,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Scenario providing the map; taken from the campaign when `--manifest` is given.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Graph documents (edge lists or weighted graphs) to draw over the map.
    #[arg(long)]
    pub graph: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Only render this run of the campaign.
    #[arg(long)]
    pub run: Option<u32>,
    /// Snapshot tiles per row in series composites.
    #[arg(long, default_value_t = 3)]
    pub per_row: usize,
}

#[derive(Debug, Args)]
pub struct DumpConfigArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Write to a file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Campaign record written next to the run outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub tool: String,
    pub version: String,
    pub rng: String,
    /// Canonical scenario, relative to the campaign directory.
    pub scenario: PathBuf,
    pub source_scenario: PathBuf,
    pub base_seed: u64,
    pub runs: u32,
    pub steps: u64,
    pub nutrient: Nutrient,
    pub dilation: u32,
    pub cities: Vec<String>,
    pub complete: bool,
    pub records: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_index: u32,
    pub seed: u64,
    pub digest: String,
    pub particles: usize,
    pub edges: PathBuf,
    pub meta: PathBuf,
    pub snapshots: Vec<SnapshotRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub step: u64,
    pub particles: usize,
    pub occupancy: PathBuf,
    pub chemo: PathBuf,
}

#[derive(Debug, Serialize)]
struct RunMeta<'a> {
    run_index: u32,
    seed: u64,
    rng: &'a str,
    steps: u64,
    particles: usize,
    digest: &'a str,
    nutrient: Nutrient,
    dilation: u32,
    params: &'a ModelParams,
}

impl ExperimentManifest {
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let file = if path.is_dir() {
            path.join(MANIFEST_FILE)
        } else {
            path.to_path_buf()
        };
        let text = read(&file)?;
        let m = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: file.clone(),
            message: e.to_string(),
        })?;
        let dir = file.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok((m, dir))
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a).map(|m| {
            println!(
                "{} runs written to {} ({})",
                m.records.len(),
                a.out.display(),
                if m.complete { "complete" } else { "partial" }
            );
        }),
        Command::Analyze(a) => cmd_analyze(&a).map(|table| print!("{table}")),
        Command::Proximity(a) => cmd_proximity(&a).map(|s| print!("{s}")),
        Command::Render(a) => cmd_render(&a).map(|files| {
            for f in files {
                println!("{}", f.display());
            }
        }),
        Command::DumpConfig(a) => cmd_dump_config(&a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Loads a scenario and applies command-line overrides, keeping the
/// canonical document in sync.
pub fn load_with_overrides(path: &Path, o: &Overrides) -> Result<Scenario> {
    let base = load_scenario_file(path)?;
    let mut config: ScenarioConfig = base.config().cloned().expect("loaded from a document");
    let exp = &mut config.experiment;
    if let Some(s) = o.seed {
        exp.base_seed = s;
    }
    if let Some(r) = o.runs {
        exp.runs = r as i64;
    }
    if let Some(d) = o.dilation {
        exp.dilation = d as i64;
    }
    if let Some(st) = o.steps {
        exp.steps = st as i64;
        if let Some(snaps) = &mut exp.snapshot_steps {
            snaps.retain(|&s| s <= st as i64);
        }
    }
    let image = base
        .habitat
        .source()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| config.map.image.clone());
    config.map.image = fs::canonicalize(&image).unwrap_or(image);
    Ok(Scenario::with_habitat(config, base.habitat)?)
}

fn cmd_dump_config(a: &DumpConfigArgs) -> Result<()> {
    let s = load_with_overrides(&a.scenario, &a.overrides)?;
    let text = s.canonical_toml().expect("scenario from a document");
    match &a.out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

// ---- simulate ----

fn write_run(
    scenario: &Scenario,
    out: &Path,
    r: &RunResult,
    kind: ImageKind,
    snapshots: bool,
) -> Result<RunRecord> {
    let rel = PathBuf::from("runs").join(format!("run_{:03}", r.run_index));
    let dir = out.join(&rel);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let edges = rel.join("edges.json");
    write(&out.join(&edges), to_json(&RunEdges::new(r.run_index, r.seed, &r.edges)))?;
    let meta = rel.join("meta.json");
    write(
        &out.join(&meta),
        to_json(&RunMeta {
            run_index: r.run_index,
            seed: r.seed,
            rng: RNG_NAME,
            steps: r.state.step,
            particles: r.state.len(),
            digest: &r.digest,
            nutrient: scenario.nutrient,
            dilation: scenario.dilation,
            params: &scenario.params,
        }),
    )?;

    let mut snaps = Vec::new();
    if snapshots {
        for s in &r.snapshots {
            let occ = rel.join(format!("occupancy_{:06}.{}", s.step, kind.ext()));
            let chemo = rel.join(format!("chemo_{:06}.{}", s.step, kind.ext()));
            render::save_gray(&render::occupancy_image(&scenario.habitat, &s.occupied), &out.join(&occ))?;
            render::save_gray(&render::chemo_image(&scenario.habitat, &s.chemo), &out.join(&chemo))?;
            snaps.push(SnapshotRecord {
                step: s.step,
                particles: s.particles,
                occupancy: occ,
                chemo,
            });
        }
    }
    Ok(RunRecord {
        run_index: r.run_index,
        seed: r.seed,
        digest: r.digest.clone(),
        particles: r.state.len(),
        edges,
        meta,
        snapshots: snaps,
    })
}

/// Executes every run of the scenario, writing results as runs finish.
/// The manifest is rewritten after each run and marked complete at the end.
pub fn cmd_simulate(a: &SimulateArgs) -> Result<ExperimentManifest> {
    let scenario = load_with_overrides(&a.scenario, &a.overrides)?;
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    write(
        &a.out.join(SCENARIO_FILE),
        scenario.canonical_toml().expect("scenario from a document"),
    )?;
    let manifest_path = a.out.join(MANIFEST_FILE);
    let manifest = Mutex::new(ExperimentManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        rng: RNG_NAME.into(),
        scenario: SCENARIO_FILE.into(),
        source_scenario: fs::canonicalize(&a.scenario).unwrap_or_else(|_| a.scenario.clone()),
        base_seed: scenario.base_seed,
        runs: scenario.runs,
        steps: scenario.steps,
        nutrient: scenario.nutrient,
        dilation: scenario.dilation,
        cities: scenario.cities.names(),
        complete: false,
        records: Vec::new(),
    });
    write(&manifest_path, to_json(&*manifest.lock().expect("manifest lock")))?;

    log::info!(
        "simulating {} runs x {} steps with {} worker(s)",
        scenario.runs,
        scenario.steps,
        a.parallel.max(1)
    );
    let results = with_workers(a.parallel, |exec| {
        map_indices(exec, scenario.runs as usize, |i| -> Result<()> {
            let r = run_with(&scenario, i as u32, Exec::Sequential)?;
            let rec = write_run(&scenario, &a.out, &r, a.image_format, !a.no_snapshots)?;
            log::info!("run {i}: {} particles, {} edges", r.state.len(), r.edges.edge_count());
            let mut m = manifest.lock().expect("manifest lock");
            m.records.push(rec);
            m.records.sort_by_key(|r| r.run_index);
            write(&manifest_path, to_json(&*m))
        })
    });
    let mut m = manifest.into_inner().expect("manifest lock");
    if let Some(err) = results.into_iter().find_map(|r| r.err()) {
        return Err(err);
    }
    m.complete = m.records.len() == m.runs as usize;
    write(&manifest_path, to_json(&m))?;
    Ok(m)
}

// ---- analyze ----

fn theta_tag(t: Fraction) -> String {
    format!("{}-{}", t.num(), t.den())
}

fn load_campaign(path: &Path, allow_partial: bool) -> Result<(ExperimentManifest, PathBuf, Scenario, Option<String>)> {
    let (m, dir) = ExperimentManifest::load(path)?;
    let note = if m.complete && m.records.len() == m.runs as usize {
        None
    } else if allow_partial {
        Some(format!(
            "partial campaign: {} of {} runs finished",
            m.records.len(),
            m.runs
        ))
    } else {
        return Err(Error::Validation(format!(
            "campaign in {} is incomplete ({} of {} runs); pass --allow-partial to analyse it anyway",
            dir.display(),
            m.records.len(),
            m.runs
        )));
    };
    let scenario = load_scenario_file(&dir.join(&m.scenario))?;
    Ok((m, dir, scenario, note))
}

/// Aggregates the campaign, writes weighted and threshold graphs and the
/// findings report. Returns the report table.
pub fn cmd_analyze(a: &AnalyzeArgs) -> Result<String> {
    let (m, dir, scenario, partial) = load_campaign(&a.manifest, a.allow_partial)?;
    if m.records.is_empty() {
        return Err(Error::Validation("campaign has no finished runs".into()));
    }
    let out = a.out.clone().unwrap_or_else(|| dir.join("analysis"));
    let names = scenario.cities.names();

    let mut sets = Vec::with_capacity(m.records.len());
    for r in &m.records {
        let p = dir.join(&r.edges);
        let doc: RunEdges = serde_json::from_str(&read(&p)?).map_err(|e| Error::Format {
            path: p.clone(),
            message: e.to_string(),
        })?;
        sets.push(doc.to_graph(&names)?);
    }
    let v = aggregate(&sets, sets.len() as u32)?;

    let road = match &a.roads {
        Some(p) if p.exists() => Some(load_road_graph(&read(p)?, &names)?),
        Some(p) => {
            log::warn!("road graph {} not found; road relations skipped", p.display());
            None
        }
        None => None,
    };
    let lab = match &a.lab {
        Some(p) => Some(WeightedCityGraph::from_json(&read(p)?)?),
        None => None,
    };

    let sites = scenario.cities.point_set()?;
    let mut report = findings_report(FindingsInput {
        sites: &sites,
        lab: lab.as_ref(),
        simulated: Some(&v),
        road: road.as_ref().map(|r| &r.graph),
        thetas: &a.theta,
    })?;
    if let Some(n) = partial {
        report.notes.push(n);
    }
    if let Some(p) = road.as_ref().and_then(|r| r.provenance.as_ref()) {
        report.notes.push(format!("road graph: {p}"));
    }

    write(&out.join("weighted.json"), v.to_json() + "\n")?;
    write(&out.join("weighted.dot"), v.to_dot("V"))?;
    let mut csv = String::from("a,b,count,k,weight,weight_decimal\n");
    for (e, w) in v.edges() {
        csv.push_str(&format!(
            "{},{},{},{},{},{:.6}\n",
            e.a(),
            e.b(),
            w.num(),
            w.den(),
            w,
            w.to_f64()
        ));
    }
    write(&out.join("weights.csv"), csv)?;

    let thetas: Vec<Fraction> = if a.theta.is_empty() {
        (1..=v.k()).filter_map(|c| Fraction::new(c, v.k())).collect()
    } else {
        a.theta.clone()
    };
    let pos = |n: &str| scenario.cities.position(n).map(|i| {
        let c = &scenario.cities.cities[i];
        (c.x as f64, c.y as f64)
    });
    for t in thetas {
        let g = threshold(&v, t);
        let stem = out.join("thresholds").join(format!("V_{}", theta_tag(t)));
        write(&stem.with_extension("json"), g.to_json() + "\n")?;
        write(&stem.with_extension("dot"), g.to_dot(&format!("V({t})"), Some(&pos)))?;
        write(
            &stem.with_extension("svg"),
            render::graph_svg(&scenario.habitat, &scenario.cities, &g, Some(&v), &format!("V({t})")),
        )?;
    }
    let table = report.to_table();
    write(&out.join("report.json"), report.to_json() + "\n")?;
    write(&out.join("report.txt"), &table)?;
    Ok(table)
}

// ---- proximity ----

#[derive(Debug, Serialize)]
struct ProximitySummary {
    cities: usize,
    mst_equals_rng: bool,
    mst_length: f64,
    gg_edges: usize,
    rng_edges: usize,
    mst_edges: usize,
    gg_planar: bool,
    growth_root: String,
}

/// Writes GG, RNG, MST and the Prim growth sequence. Returns a summary.
pub fn cmd_proximity(a: &ProximityArgs) -> Result<String> {
    let scenario = load_scenario_file(&a.scenario)?;
    let sites: PointSet = scenario.cities.point_set()?;
    let growth = geometry::prim_growth(&sites, &a.root)?;
    let gg = geometry::gabriel_graph(&sites);
    let rng = geometry::rng_graph(&sites);
    let mst = geometry::emst(&sites);
    let pos = |n: &str| scenario.cities.position(n).map(|i| {
        let c = &scenario.cities.cities[i];
        (c.x as f64, c.y as f64)
    });
    let graphs: [(&str, &CityGraph); 3] = [("gg", &gg), ("rng", &rng), ("mst", &mst)];
    for (name, g) in graphs {
        write(&a.out.join(format!("{name}.json")), g.to_json() + "\n")?;
        write(&a.out.join(format!("{name}.dot")), g.to_dot(name, Some(&pos)))?;
    }
    write(&a.out.join("growth.json"), to_json(&growth))?;
    write(
        &a.out.join("growth.dot"),
        growth.to_graph(&sites).to_dot("growth", Some(&pos)),
    )?;
    let summary = ProximitySummary {
        cities: sites.len(),
        mst_equals_rng: mst == rng,
        mst_length: sites.total_length(&mst)?,
        gg_edges: gg.edge_count(),
        rng_edges: rng.edge_count(),
        mst_edges: mst.edge_count(),
        gg_planar: geometry::straightline_planar(&gg, &sites)?.planar,
        growth_root: growth.root.clone(),
    };
    write(&a.out.join("proximity.json"), to_json(&summary))?;
    let mut text = format!(
        "GG {} edges, RNG {} edges, MST {} edges (length {:.1}); MST = RNG: {}\ngrowth from {}:",
        summary.gg_edges,
        summary.rng_edges,
        summary.mst_edges,
        summary.mst_length,
        summary.mst_equals_rng,
        growth.root
    );
    for st in &growth.stages {
        text.push_str(&format!(" {}<-{}", st.node, st.parent));
    }
    text.push('\n');
    Ok(text)
}

// ---- render ----

fn load_graph_file(path: &Path, names: &[String]) -> Result<(CityGraph, Option<WeightedCityGraph>)> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.into(),
        message: e.to_string(),
    })?;
    if value.get("k").is_some() {
        let w = WeightedCityGraph::from_json(&text)?;
        let g = threshold(&w, Fraction::new(0, 1).expect("nonzero denominator"));
        return Ok((g, Some(w)));
    }
    if value.get("nodes").is_some() {
        return Ok((CityGraph::from_json(&text)?, None));
    }
    // Per-run edge lists and road graphs carry only edges.
    let g = load_road_graph(&text, names)?;
    Ok((g.graph, None))
}

fn occupancy_from_file(path: &Path) -> Result<Vec<bool>> {
    let img = image::open(path).map_err(|e| Error::Format {
        path: path.into(),
        message: e.to_string(),
    })?;
    Ok(img.to_luma8().pixels().map(|p| p.0[0] < 128).collect())
}

/// Renders snapshot series of a campaign and graph overlays. Returns the
/// files written.
pub fn cmd_render(a: &RenderArgs) -> Result<Vec<PathBuf>> {
    let (scenario, campaign) = match (&a.manifest, &a.scenario) {
        (Some(m), _) => {
            let (m, dir) = ExperimentManifest::load(m)?;
            (load_scenario_file(&dir.join(&m.scenario))?, Some((m, dir)))
        }
        (None, Some(s)) => (load_scenario_file(s)?, None),
        (None, None) => {
            return Err(Error::Validation("render needs --scenario or --manifest".into()))
        }
    };
    let mut written = Vec::new();
    if let Some((m, dir)) = &campaign {
        for r in m.records.iter().filter(|r| a.run.is_none_or(|i| i == r.run_index)) {
            let mut tiles = Vec::new();
            for s in &r.snapshots {
                let occ = occupancy_from_file(&dir.join(&s.occupancy))?;
                if occ.len() != scenario.habitat.len() {
                    return Err(Error::Format {
                        path: dir.join(&s.occupancy),
                        message: "snapshot size differs from the map".into(),
                    });
                }
                tiles.push(render::map_image(&scenario.habitat, Some(&occ), &scenario.cities));
            }
            let Some(last) = tiles.last() else { continue };
            let final_path = a.out.join(format!("run_{:03}_final.png", r.run_index));
            fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
            render::save_rgb(last, &final_path)?;
            written.push(final_path);
            let series = a.out.join(format!("run_{:03}_series.png", r.run_index));
            render::save_rgb(&render::tile(&tiles, a.per_row), &series)?;
            written.push(series);
        }
    }
    let names = scenario.cities.names();
    let mut graphs = Vec::new();
    for p in &a.graph {
        let (g, w) = load_graph_file(p, &names)?;
        let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("graph").to_string();
        graphs.push((stem, g, w));
    }
    if graphs.is_empty() && campaign.is_none() {
        graphs.push(("map".into(), CityGraph::new(names.clone())?, None));
    }
    for (stem, g, w) in graphs {
        let path = a.out.join(format!("{stem}.svg"));
        write(&path, render::graph_svg(&scenario.habitat, &scenario.cities, &g, w.as_ref(), &stem))?;
        written.push(path);
    }
    Ok(written)
}
