//! Run orchestration: simulation with periodic SON updates, parameter sweeps,
//! and the built-in validation suite.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, LoadError, Result};
use crate::flowsim::{collect_kpis, CellWindow, CompletedFlow, TrafficLayer, World};
use crate::geometry::{AttachmentMap, CellConfig, CellId, CellKind, Position, Region};
use crate::loadcalc::{
    analytic_global_elastic, analytic_global_gbr, analytic_load_elastic, analytic_load_gbr, busy_load, global_load,
    scheduler_load, AnalyticScenario, CellLoadParams,
};
use crate::scenario::ScenarioConfig;
use crate::son::{SonState, SonVariant};
use crate::table;

/// Token written for indicators with no samples.
pub const NULL_TOKEN: &str = "NA";

pub const WINDOW_COLUMNS: &[&str] = &[
    "time_s",
    "cell",
    "kind",
    "cio_db",
    "reference",
    "scheduler_load",
    "busy_load",
    "global_load",
    "analytic_local",
    "analytic_global",
    "mean_ftt_s",
    "mut_mbps",
    "cet_mbps",
    "backhaul_occupancy",
    "completed",
];

pub const SWEEP_COLUMNS: &[&str] = &[
    "parameter",
    "value",
    "seed",
    "cell",
    "kind",
    "final_cio_db",
    "final_scheduler_load",
    "final_global_load",
    "mean_ftt_s",
    "mut_mbps",
];

pub const FLOW_COLUMNS: &[&str] =
    &["id", "cell", "arrival_s", "completion_s", "volume_mbits", "ftt_s", "throughput_mbps"];

/// One cell over one SON window. MUT and CET are cluster-wide and repeat on
/// every row of the same window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowRow {
    /// End of the window.
    pub time_s: f64,
    pub cell: CellId,
    pub kind: CellKind,
    /// CIO in force during the window.
    pub cio_db: f64,
    /// SON reference at the end of the window; `None` for uncontrolled cells.
    pub reference: Option<CellId>,
    pub scheduler_load: f64,
    pub busy_load: f64,
    pub global_load: f64,
    pub analytic_local: Option<f64>,
    pub analytic_global: Option<f64>,
    pub mean_ftt_s: Option<f64>,
    pub mut_mbps: Option<f64>,
    pub cet_mbps: Option<f64>,
    pub backhaul_occupancy: f64,
    pub completed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: CellId,
    pub kind: CellKind,
    pub final_cio_db: f64,
    pub final_scheduler_load: f64,
    pub final_global_load: f64,
    pub mean_ftt_s: Option<f64>,
    pub completed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub variant: SonVariant,
    pub seed: u64,
    pub duration_s: f64,
    pub windows: usize,
    pub completed_flows: usize,
    pub blocked_gbr_sessions: u64,
    pub mut_mbps: Option<f64>,
    pub cet_mbps: Option<f64>,
    /// MUT over the last window only.
    pub final_mut_mbps: Option<f64>,
    pub cells: Vec<CellSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub config_hash: String,
    pub seed: u64,
    pub variant: SonVariant,
    pub version: String,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub windows: Vec<WindowRow>,
    pub flows: Vec<CompletedFlow>,
    pub summary: Summary,
    pub manifest: Manifest,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| NULL_TOKEN.to_string(), |x| format!("{x:.6}"))
}

impl RunOutput {
    /// Rows of the given cell, in time order.
    pub fn cell_rows(&self, cell: CellId) -> impl Iterator<Item = &WindowRow> {
        self.windows.iter().filter(move |r| r.cell == cell)
    }

    pub fn windows_csv(&self) -> String {
        table::render(
            WINDOW_COLUMNS,
            self.windows.iter().map(|r| {
                vec![
                    format!("{:.3}", r.time_s),
                    r.cell.to_string(),
                    r.kind.as_str().to_string(),
                    format!("{:.6}", r.cio_db),
                    r.reference.map_or_else(|| NULL_TOKEN.to_string(), |c| c.to_string()),
                    format!("{:.6}", r.scheduler_load),
                    format!("{:.6}", r.busy_load),
                    format!("{:.6}", r.global_load),
                    opt(r.analytic_local),
                    opt(r.analytic_global),
                    opt(r.mean_ftt_s),
                    opt(r.mut_mbps),
                    opt(r.cet_mbps),
                    format!("{:.6}", r.backhaul_occupancy),
                    r.completed.to_string(),
                ]
            }),
        )
    }

    pub fn flows_csv(&self) -> String {
        table::render(
            FLOW_COLUMNS,
            self.flows.iter().map(|f| {
                vec![
                    f.id.to_string(),
                    f.cell.to_string(),
                    format!("{:.6}", f.arrival_time),
                    format!("{:.6}", f.completion_time),
                    format!("{:.6}", f.volume_mbits),
                    format!("{:.6}", f.ftt()),
                    format!("{:.6}", f.throughput_mbps()),
                ]
            }),
        )
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }

    pub fn manifest_json(&self) -> String {
        serde_json::to_string_pretty(&self.manifest).expect("manifest serializes")
    }

    /// Writes `windows.csv`, `flows.csv`, `summary.json` and `manifest.json`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("windows.csv"), self.windows_csv())?;
        fs::write(dir.join("flows.csv"), self.flows_csv())?;
        fs::write(dir.join("summary.json"), self.summary_json())?;
        fs::write(dir.join("manifest.json"), self.manifest_json())?;
        Ok(())
    }
}

fn analytic_loads(
    map: &AttachmentMap,
    cells: &[CellConfig],
    windows: &[Option<CellWindow>],
    mean_file_size: f64,
) -> Vec<(Option<f64>, Option<f64>)> {
    let params = cells
        .iter()
        .zip(windows)
        .map(|(c, w)| CellLoadParams {
            backhaul_mbps: c.backhaul_mbps,
            gbr_radio_fraction: w.as_ref().map_or(0.0, |w| w.window.mean_gbr_resource_fraction().min(1.0)),
            gbr_demand_mbps: w.as_ref().map_or(0.0, |w| w.mean_gbr_mbps),
        })
        .collect();
    let Ok(scenario) = AnalyticScenario::new(map, mean_file_size, params) else {
        return vec![(None, None); cells.len()];
    };
    cells
        .iter()
        .map(|c| {
            if !c.carries_traffic() {
                return (None, None);
            }
            let p = &scenario.cells[c.id.0];
            let (local, global) = if p.gbr_radio_fraction > 0.0 || p.gbr_demand_mbps > 0.0 {
                (analytic_load_gbr(&scenario, c.id), analytic_global_gbr(&scenario, c.id))
            } else {
                (analytic_load_elastic(&scenario, c.id), analytic_global_elastic(&scenario, c.id))
            };
            // A cell with no pixels left has no analytic load to report.
            (local.ok(), global.ok())
        })
        .collect()
}

/// Simulates `config` for its configured duration with one SON update per
/// window, using `seed` instead of the config's seed.
pub fn run(config: &ScenarioConfig, seed: u64) -> Result<RunOutput> {
    config.validate().map_err(|(path, msg)| crate::error::ConfigError::new(format!("{}: {msg}", path.join("."))))?;
    let built = config.build()?;
    let mut son = SonState::new(config.son.clone(), &built.cells)?;
    let mut world = World::new(
        built.cells,
        Some(built.env),
        built.map,
        built.layers,
        config.run.slot_duration_s,
        seed,
    )?;
    world.apply_son(&son)?;
    let mean_file_size = config.mean_file_size();

    let period = config.son.update_period_s;
    let duration = config.run.duration_s;
    let slot = config.run.slot_duration_s;
    let total_slots = (duration / slot).round() as u64;
    let slots_per_window = ((period / slot).round() as u64).max(1);

    let mut rows = Vec::new();
    let mut flows = Vec::new();
    let mut last_mut = None;
    let mut windows = 0;
    let mut done = 0;
    while done < total_slots {
        let n = slots_per_window.min(total_slots - done);
        for _ in 0..n {
            world.step();
        }
        done += n;
        windows += 1;

        let cell_windows = world.take_windows();
        let completed = world.drain_completed();
        let kpi = collect_kpis(&completed, world.cells().len());
        last_mut = kpi.mut_mbps;
        let analytic = analytic_loads(world.map(), world.cells(), &cell_windows, mean_file_size);

        let mut loads = vec![0.0; world.cells().len()];
        let mut window_rows = Vec::new();
        for (cell, w) in world.cells().iter().zip(&cell_windows) {
            let Some(w) = w else { continue };
            let row = WindowRow {
                time_s: world.time(),
                cell: cell.id,
                kind: cell.kind,
                cio_db: cell.cio_db,
                reference: None,
                scheduler_load: scheduler_load(&w.window),
                busy_load: busy_load(&w.window),
                global_load: global_load(&w.window),
                analytic_local: analytic[cell.id.0].0,
                analytic_global: analytic[cell.id.0].1,
                mean_ftt_s: kpi.mean_ftt_s[cell.id.0],
                mut_mbps: kpi.mut_mbps,
                cet_mbps: kpi.cet_mbps,
                backhaul_occupancy: w.window.mean_backhaul_occupancy(),
                completed: kpi.completed_per_cell[cell.id.0],
            };
            loads[cell.id.0] = match config.son.variant {
                SonVariant::Local => row.scheduler_load,
                SonVariant::Global => row.global_load,
            };
            window_rows.push(row);
        }
        son.update(world.cells(), &loads)?;
        for row in &mut window_rows {
            if let Some(k) = son.controlled.iter().position(|&c| c == row.cell) {
                row.reference = Some(son.reference[k]);
            }
        }
        rows.extend(window_rows);
        world.apply_son(&son)?;
        flows.extend(completed);
    }

    let cell_count = world.cells().len();
    let overall = collect_kpis(&flows, cell_count);
    let cells = world
        .cells()
        .iter()
        .filter(|c| c.carries_traffic())
        .map(|c| {
            let last = rows.iter().rev().find(|r| r.cell == c.id);
            CellSummary {
                cell: c.id,
                kind: c.kind,
                final_cio_db: c.cio_db,
                final_scheduler_load: last.map_or(0.0, |r| r.scheduler_load),
                final_global_load: last.map_or(0.0, |r| r.global_load),
                mean_ftt_s: overall.mean_ftt_s[c.id.0],
                completed: overall.completed_per_cell[c.id.0],
            }
        })
        .collect();
    let summary = Summary {
        scenario: config.name.clone(),
        variant: config.son.variant,
        seed,
        duration_s: duration,
        windows,
        completed_flows: flows.len(),
        blocked_gbr_sessions: world.blocked_gbr_sessions(),
        mut_mbps: overall.mut_mbps,
        cet_mbps: overall.cet_mbps,
        final_mut_mbps: last_mut,
        cells,
    };
    let manifest = Manifest {
        config_hash: config.hash(),
        seed,
        variant: config.son.variant,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    Ok(RunOutput { windows: rows, flows, summary, manifest })
}

/// Parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Backhaul of every small cell, Mbps.
    BackhaulCapacity,
    /// SON step size.
    Epsilon,
    /// Arrival rate of every whole-area layer, users/s.
    Lambda,
}

impl SweepParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::BackhaulCapacity => "backhaul_capacity",
            Self::Epsilon => "epsilon",
            Self::Lambda => "lambda",
        }
    }

    /// Returns a copy of `config` with the parameter set to `value`.
    pub fn apply(self, config: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut c = config.clone();
        match self {
            Self::BackhaulCapacity => c.geometry.small_cells.iter_mut().for_each(|s| s.backhaul_mbps = value),
            Self::Epsilon => c.son.step_size = value,
            Self::Lambda => c
                .traffic
                .iter_mut()
                .filter(|l| l.region == Region::WholeArea)
                .for_each(|l| l.arrival_rate = value),
        }
        c
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "backhaul_capacity" | "backhaul" => Ok(Self::BackhaulCapacity),
            "epsilon" | "step_size" => Ok(Self::Epsilon),
            "lambda" => Ok(Self::Lambda),
            _ => Err(format!("unknown sweep parameter '{s}' (expected backhaul_capacity, epsilon or lambda)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub seed: u64,
    pub output: RunOutput,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub parameter: SweepParameter,
    pub points: Vec<SweepPoint>,
}

impl SweepOutput {
    /// One row per point and cell: final CIO, final loads and mean FTT.
    pub fn table_csv(&self) -> String {
        let rows = self.points.iter().flat_map(|p| {
            let s = &p.output.summary;
            s.cells.iter().map(move |c| {
                vec![
                    self.parameter.as_str().to_string(),
                    p.value.to_string(),
                    p.seed.to_string(),
                    c.cell.to_string(),
                    c.kind.as_str().to_string(),
                    format!("{:.6}", c.final_cio_db),
                    format!("{:.6}", c.final_scheduler_load),
                    format!("{:.6}", c.final_global_load),
                    opt(c.mean_ftt_s),
                    opt(s.mut_mbps),
                ]
            })
        });
        table::render(SWEEP_COLUMNS, rows)
    }
}

/// Independent runs, one per value; run `k` uses `seed ^ k`.
pub fn sweep(config: &ScenarioConfig, parameter: SweepParameter, values: &[f64], seed: u64) -> Result<SweepOutput> {
    if values.is_empty() {
        return Err(crate::error::ConfigError::new("sweep needs at least one value").into());
    }
    let points = values
        .par_iter()
        .enumerate()
        .map(|(k, &value)| {
            let seed = seed ^ k as u64;
            let output = run(&parameter.apply(config, value), seed)?;
            Ok(SweepPoint { value, seed, output })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepOutput { parameter, points })
}

/// Outcome of one built-in check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

fn single_cell_busy(peak: f64, backhaul: f64, demand_mbps: f64, hours: f64, seed: u64) -> Result<(f64, f64)> {
    let file = 4.0;
    let layer = TrafficLayer::elastic("uniform", demand_mbps / file, Region::WholeArea, file);
    let map = AttachmentMap::uniform(CellId(0), peak, 10, 5.0, &[layer.support()])?;
    let cells = vec![CellConfig::small(0, Position::new(25.0, 25.0), 30.0).with_backhaul(backhaul)];
    let scenario = AnalyticScenario::new(&map, file, vec![CellLoadParams::elastic_only(backhaul)])?;
    let analytic = analytic_global_elastic(&scenario, CellId(0))?;
    let mut world = World::new(cells, None, map, vec![layer], 0.01, seed)?;
    world.run_for(hours * 3600.0);
    let w = world.take_windows().swap_remove(0).ok_or(LoadError::EmptyWindow)?;
    Ok((busy_load(&w.window), analytic))
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail }
}

/// Runs the canned estimator and queue checks.
pub fn validate() -> ValidationReport {
    let mut checks = Vec::new();

    let mut push = |name: &str, outcome: Result<(bool, String)>| {
        checks.push(match outcome {
            Ok((passed, detail)) => check(name, passed, detail),
            Err(e) => check(name, false, format!("error: {e}")),
        })
    };

    push(
        "ps-busy-probability",
        single_cell_busy(20.0, f64::INFINITY, 10.0, 1.0, 11).map(|(busy, analytic)| {
            ((busy - 0.5).abs() <= 0.03, format!("busy_load {busy:.4}, analytic {analytic:.4}, expected 0.5 ± 0.03"))
        }),
    );
    push(
        "backhaul-limited-busy",
        single_cell_busy(20.0, 10.0, 4.0, 1.0, 12).map(|(busy, analytic)| {
            (
                (busy - 0.4).abs() <= 0.03 && (analytic - 0.4).abs() < 1e-9,
                format!("busy_load {busy:.4}, analytic {analytic:.4}, expected 0.4 ± 0.03"),
            )
        }),
    );
    push("backhaul-starvation", starvation_check());
    push("preset-builds", preset_check());

    ValidationReport { checks }
}

fn starvation_check() -> Result<(bool, String)> {
    let layer = TrafficLayer::elastic("uniform", 9.0 / 4.0, Region::WholeArea, 4.0);
    let map = AttachmentMap::uniform(CellId(0), 50.0, 10, 5.0, &[layer.support()])?;
    let cells = vec![CellConfig::small(0, Position::new(25.0, 25.0), 30.0).with_backhaul(10.0)];
    let mut world = World::new(cells, None, map, vec![layer], 0.01, 13)?;
    world.run_for(1800.0);
    let w = world.take_windows().swap_remove(0).ok_or(LoadError::EmptyWindow)?;
    let (s, g) = (scheduler_load(&w.window), global_load(&w.window));
    Ok((s <= 0.35 && g >= 0.85, format!("scheduler_load {s:.4} (≤ 0.35), global_load {g:.4} (≥ 0.85)")))
}

fn preset_check() -> Result<(bool, String)> {
    let mut names = Vec::new();
    for name in crate::scenario::PRESETS {
        let config = ScenarioConfig::preset(name).ok_or_else(|| Error::from(crate::error::ConfigError::new(format!("missing preset {name}"))))?;
        config.validate().map_err(|(path, msg)| crate::error::ConfigError::new(format!("{}: {msg}", path.join("."))))?;
        let built = config.build()?;
        names.push(format!("{name} ({} pixels)", built.map.pixels().len()));
    }
    Ok((true, names.join(", ")))
}
