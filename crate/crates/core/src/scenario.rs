//! Scenario configuration files.
//!
//! Scenarios are TOML documents. Parse errors and validation errors carry the
//! source line when it can be located. The shipped presets live in
//! `presets/` and are compiled into the crate.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ConfigError;
use crate::flowsim::{TrafficKind, TrafficLayer};
use crate::geometry::{
    build_attachment_map, AttachmentMap, Bounds, CellConfig, CellKind, LayerSupport, Position, RadioEnvironment,
    Region,
};
use crate::son::SonConfig;

const PAPER_TABLE1: &str = include_str!("../presets/paper_table1.toml");

/// Names of the compiled-in presets.
pub const PRESETS: &[&str] = &["paper_table1"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub environment: RadioEnvironment,
    #[serde(default)]
    pub traffic: Vec<LayerConfig>,
    #[serde(default)]
    pub son: SonConfig,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub isd_m: f64,
    pub macro_tx_power_dbm: f64,
    pub small_tx_power_dbm: f64,
    /// Backhaul of the studied macro sector; `inf` when unconstrained.
    #[serde(default = "infinite")]
    pub macro_backhaul_mbps: f64,
    /// Boresight of the studied sector; the site's other sectors are 120° apart.
    #[serde(default)]
    pub studied_azimuth_deg: f64,
    /// Number of first-ring interfering sites (0 to 6).
    #[serde(default = "six")]
    pub interfering_sites: usize,
    /// Whether the studied site's two other sectors interfere.
    #[serde(default = "yes")]
    pub co_sited_sectors: bool,
    /// Rasterized area; defaults to a square of ±0.9 ISD around the site.
    #[serde(default)]
    pub bounds: Option<Bounds>,
    #[serde(default)]
    pub small_cells: Vec<SmallCellConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmallCellConfig {
    /// Distance from the macro site, meters.
    pub distance_m: f64,
    /// Bearing relative to the studied sector's boresight, degrees.
    pub bearing_deg: f64,
    #[serde(default = "infinite")]
    pub backhaul_mbps: f64,
    #[serde(default)]
    pub tx_power_dbm: Option<f64>,
    #[serde(default)]
    pub cio_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerKind {
    Elastic,
    Gbr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub name: String,
    /// Arrivals per second over the whole region.
    pub arrival_rate: f64,
    pub region: Region,
    #[serde(default = "elastic")]
    pub kind: LayerKind,
    #[serde(default)]
    pub file_size_mbits: f64,
    #[serde(default)]
    pub gbr_rate_mbps: f64,
    #[serde(default)]
    pub gbr_mean_holding_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub duration_s: f64,
    pub slot_duration_s: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { duration_s: 1800.0, slot_duration_s: 0.01, seed: 1 }
    }
}

fn infinite() -> f64 {
    f64::INFINITY
}
fn six() -> usize {
    6
}
fn yes() -> bool {
    true
}
fn elastic() -> LayerKind {
    LayerKind::Elastic
}

/// Everything a simulation needs, built from a validated config.
#[derive(Debug, Clone)]
pub struct BuiltScenario {
    pub cells: Vec<CellConfig>,
    pub env: RadioEnvironment,
    pub bounds: Bounds,
    pub layers: Vec<TrafficLayer>,
    pub map: AttachmentMap,
}

impl ScenarioConfig {
    pub fn preset(name: &str) -> Option<Self> {
        let src = match name {
            "paper_table1" => PAPER_TABLE1,
            _ => return None,
        };
        Some(Self::from_toml_str(src).expect("shipped presets are valid"))
    }

    /// Parses and validates a scenario.
    pub fn from_toml_str(src: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(src).map_err(|e| {
            let line = e.span().map(|s| line_of_offset(src, s.start));
            ConfigError::at(line, e.message().to_string())
        })?;
        cfg.validate()
            .map_err(|(path, msg)| ConfigError::at(locate_key(src, &path), format!("{}: {msg}", path.join("."))))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// SHA-256 over the canonical TOML rendering.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    /// Checks every invariant; errors name the offending key path.
    pub fn validate(&self) -> Result<(), (Vec<String>, String)> {
        let err = |path: &[&str], msg: &str| Err((path.iter().map(|s| s.to_string()).collect(), msg.to_string()));
        let g = &self.geometry;
        if !(g.isd_m > 0.0 && g.isd_m.is_finite()) {
            return err(&["geometry", "isd_m"], "must be positive");
        }
        if !g.macro_tx_power_dbm.is_finite() {
            return err(&["geometry", "macro_tx_power_dbm"], "must be finite");
        }
        if !g.small_tx_power_dbm.is_finite() {
            return err(&["geometry", "small_tx_power_dbm"], "must be finite");
        }
        if !(g.macro_backhaul_mbps > 0.0) {
            return err(&["geometry", "macro_backhaul_mbps"], "must be positive (inf for unconstrained)");
        }
        if g.interfering_sites > 6 {
            return err(&["geometry", "interfering_sites"], "at most 6 first-ring sites");
        }
        if let Some(b) = g.bounds {
            if !b.is_valid() {
                return err(&["geometry", "bounds"], "must be finite with max > min");
            }
        }
        for (k, sc) in g.small_cells.iter().enumerate() {
            let idx = format!("small_cells[{k}]");
            let path = |key: &str| vec!["geometry".to_string(), idx.clone(), key.to_string()];
            if !(sc.distance_m >= 0.0 && sc.distance_m.is_finite()) {
                return Err((path("distance_m"), "must be non-negative".into()));
            }
            if !sc.bearing_deg.is_finite() {
                return Err((path("bearing_deg"), "must be finite".into()));
            }
            if !(sc.backhaul_mbps > 0.0) {
                return Err((path("backhaul_mbps"), "must be positive (inf for unconstrained)".into()));
            }
            if sc.tx_power_dbm.is_some_and(|p| !p.is_finite()) {
                return Err((path("tx_power_dbm"), "must be finite".into()));
            }
            if !(self.son.cio_min_db..=self.son.cio_max_db).contains(&sc.cio_db) {
                return Err((path("cio_db"), "must lie within the SON CIO bounds".into()));
            }
        }
        if let Err(e) = self.environment.validate() {
            let field = match &e {
                crate::error::GeometryError::InvalidEnvironment { field, .. } => *field,
                _ => "environment",
            };
            return err(&["environment", field], &e.to_string());
        }
        if self.traffic.is_empty() {
            return err(&["traffic"], "at least one traffic layer is required");
        }
        for (k, l) in self.traffic.iter().enumerate() {
            let idx = format!("traffic[{k}]");
            let path = |key: &str| vec![idx.clone(), key.to_string()];
            if !(l.arrival_rate >= 0.0 && l.arrival_rate.is_finite()) {
                return Err((path("arrival_rate"), "must be non-negative".into()));
            }
            match l.kind {
                LayerKind::Elastic if !(l.file_size_mbits > 0.0 && l.file_size_mbits.is_finite()) => {
                    return Err((path("file_size_mbits"), "elastic layers need a positive mean file size".into()));
                }
                LayerKind::Gbr if !(l.gbr_rate_mbps > 0.0 && l.gbr_mean_holding_s > 0.0) => {
                    return Err((path("gbr_rate_mbps"), "GBR layers need positive rate and holding time".into()));
                }
                _ => {}
            }
            if l.region == Region::Hotspot && g.small_cells.is_empty() && l.arrival_rate > 0.0 {
                return Err((path("region"), "hotspot layers need at least one small cell".into()));
            }
        }
        if let Err(e) = self.son.validate() {
            return err(&["son"], &e.to_string());
        }
        let r = &self.run;
        if !(r.slot_duration_s > 0.0 && r.slot_duration_s.is_finite()) {
            return err(&["run", "slot_duration_s"], "must be positive");
        }
        if !(r.duration_s.is_finite() && r.duration_s >= self.son.update_period_s) {
            return err(&["run", "duration_s"], "must cover at least one SON period");
        }
        if r.slot_duration_s > self.son.update_period_s {
            return err(&["run", "slot_duration_s"], "must not exceed the SON period");
        }
        Ok(())
    }

    /// Cell list: studied sector (id 0), small cells (ids 1..), then interferers.
    pub fn cells(&self) -> Vec<CellConfig> {
        let g = &self.geometry;
        let origin = Position::new(0.0, 0.0);
        let az = g.studied_azimuth_deg;
        let mut cells = vec![CellConfig::macro_sector(0, origin, az, g.macro_tx_power_dbm).with_backhaul(g.macro_backhaul_mbps)];
        for sc in &g.small_cells {
            let site = origin.offset(sc.distance_m, az + sc.bearing_deg);
            let power = sc.tx_power_dbm.unwrap_or(g.small_tx_power_dbm);
            cells.push(
                CellConfig::small(cells.len(), site, power)
                    .with_backhaul(sc.backhaul_mbps)
                    .with_cio(sc.cio_db),
            );
        }
        if g.co_sited_sectors {
            for k in 1..3 {
                let id = cells.len();
                cells.push(CellConfig::macro_sector(id, origin, az + 120.0 * k as f64, g.macro_tx_power_dbm).as_interferer());
            }
        }
        for s in 0..g.interfering_sites {
            let site = origin.offset(g.isd_m, az + 60.0 * s as f64);
            for k in 0..3 {
                let id = cells.len();
                cells.push(
                    CellConfig::macro_sector(id, site, az + 120.0 * k as f64, g.macro_tx_power_dbm).as_interferer(),
                );
            }
        }
        cells
    }

    pub fn bounds(&self) -> Bounds {
        self.geometry.bounds.unwrap_or_else(|| {
            let r = 0.9 * self.geometry.isd_m;
            Bounds { min_x: -r, min_y: -r, max_x: r, max_y: r }
        })
    }

    pub fn layers(&self) -> Vec<TrafficLayer> {
        self.traffic
            .iter()
            .map(|l| TrafficLayer {
                name: l.name.clone(),
                arrival_rate: l.arrival_rate,
                region: l.region,
                file_size_mean: l.file_size_mbits,
                kind: match l.kind {
                    LayerKind::Elastic => TrafficKind::Elastic,
                    LayerKind::Gbr => TrafficKind::Gbr { rate_mbps: l.gbr_rate_mbps, mean_holding_s: l.gbr_mean_holding_s },
                },
            })
            .collect()
    }

    /// Mean file size of the elastic layers, weighted by arrival rate.
    pub fn mean_file_size(&self) -> f64 {
        let (mass, rate) = self
            .traffic
            .iter()
            .filter(|l| l.kind == LayerKind::Elastic)
            .fold((0.0, 0.0), |(m, r), l| (m + l.arrival_rate * l.file_size_mbits, r + l.arrival_rate));
        if rate > 0.0 {
            mass / rate
        } else {
            self.traffic.iter().map(|l| l.file_size_mbits).fold(0.0, f64::max).max(1.0)
        }
    }

    /// Builds cells and the attachment map. The hotspot region is fixed here, at zero CIO.
    pub fn build(&self) -> Result<BuiltScenario, crate::error::GeometryError> {
        let cells = self.cells();
        let layers = self.layers();
        let supports: Vec<LayerSupport> = layers.iter().map(TrafficLayer::support).collect();
        let bounds = self.bounds();
        let map = build_attachment_map(&cells, &self.environment, bounds, &supports)?;
        Ok(BuiltScenario { cells, env: self.environment.clone(), bounds, layers, map })
    }

    pub fn small_cell_ids(&self) -> Vec<usize> {
        self.cells().iter().filter(|c| c.kind == CellKind::Small && c.carries_traffic()).map(|c| c.id.0).collect()
    }
}

fn line_of_offset(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// Best-effort line lookup for a key path such as `["geometry", "small_cells[1]", "cio_db"]`.
fn locate_key(src: &str, path: &[String]) -> Option<usize> {
    let (key, tables) = path.split_last()?;
    let mut want = String::new();
    let mut want_index = 0usize;
    for t in tables {
        if !want.is_empty() {
            want.push('.');
        }
        match t.split_once('[') {
            Some((name, idx)) => {
                want.push_str(name);
                want_index = idx.trim_end_matches(']').parse().unwrap_or(0);
            }
            None => want.push_str(t),
        }
    }
    let mut seen = 0usize;
    let mut in_target = tables.is_empty();
    let mut fallback = None;
    for (n, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if let Some(h) = line.strip_prefix("[[").and_then(|l| l.strip_suffix("]]")) {
            in_target = h.trim() == want && {
                seen += 1;
                seen - 1 == want_index
            };
            if in_target {
                fallback = Some(n + 1);
            }
        } else if let Some(h) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            in_target = h.trim() == want;
            if in_target {
                fallback = Some(n + 1);
            }
        } else if in_target {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(n + 1);
                }
            }
        }
    }
    fallback
}
