//! Network layout, propagation, attachment and peak-rate computation.
//!
//! Everything here is a pure function of the cell list and the radio
//! environment. The [`AttachmentMap`] rasterizes the studied area so that
//! analytic loads can be evaluated as a midpoint sum over pixels and the
//! simulator can draw arrival positions from it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::GeometryError;

/// Identifier of a cell; also its index in the cell list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId(pub usize);

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A point in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Point at `distance` meters from `self` along `bearing_deg` (counter-clockwise from +x).
    pub fn offset(self, distance: f64, bearing_deg: f64) -> Self {
        let theta = bearing_deg.to_radians();
        Self::new(self.x + distance * theta.cos(), self.y + distance * theta.sin())
    }

    pub fn distance(self, other: Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellKind {
    MacroSector,
    Small,
}

impl CellKind {
    /// Distance-dependent pathloss in dB with the distance in km, no clamping.
    pub fn pathloss_db(self, distance_km: f64) -> f64 {
        match self {
            CellKind::MacroSector => 128.0 + 36.4 * distance_km.log10(),
            CellKind::Small => 140.7 + 36.7 * distance_km.log10(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CellKind::MacroSector => "macro",
            CellKind::Small => "small",
        }
    }
}

/// Static radio and backhaul parameters of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    pub id: CellId,
    pub kind: CellKind,
    pub site: Position,
    /// Boresight in degrees, counter-clockwise from +x. Ignored for small cells.
    pub azimuth_deg: f64,
    pub tx_power_dbm: f64,
    pub cio_db: f64,
    /// Backhaul capacity in Mbps; `f64::INFINITY` for an unconstrained link.
    pub backhaul_mbps: f64,
    /// Interference-only cells transmit but never carry traffic.
    pub interferer: bool,
}

impl CellConfig {
    pub fn macro_sector(id: usize, site: Position, azimuth_deg: f64, tx_power_dbm: f64) -> Self {
        Self {
            id: CellId(id),
            kind: CellKind::MacroSector,
            site,
            azimuth_deg,
            tx_power_dbm,
            cio_db: 0.0,
            backhaul_mbps: f64::INFINITY,
            interferer: false,
        }
    }

    pub fn small(id: usize, site: Position, tx_power_dbm: f64) -> Self {
        Self {
            id: CellId(id),
            kind: CellKind::Small,
            site,
            azimuth_deg: 0.0,
            tx_power_dbm,
            cio_db: 0.0,
            backhaul_mbps: f64::INFINITY,
            interferer: false,
        }
    }

    pub fn with_backhaul(mut self, mbps: f64) -> Self {
        self.backhaul_mbps = mbps;
        self
    }

    pub fn with_cio(mut self, cio_db: f64) -> Self {
        self.cio_db = cio_db;
        self
    }

    pub fn as_interferer(mut self) -> Self {
        self.interferer = true;
        self
    }

    pub fn carries_traffic(&self) -> bool {
        !self.interferer
    }
}

/// Radio parameters shared by every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioEnvironment {
    pub bandwidth_mhz: f64,
    pub noise_density_dbm_hz: f64,
    /// Spectral efficiency ceiling in bit/s/Hz.
    pub spectral_efficiency_cap: f64,
    /// Fraction of the Shannon rate achieved, in (0, 1].
    pub bandwidth_efficiency: f64,
    pub min_coupling_distance_m: f64,
    pub grid_pitch_m: f64,
}

impl Default for RadioEnvironment {
    fn default() -> Self {
        Self {
            bandwidth_mhz: 20.0,
            noise_density_dbm_hz: -174.0,
            spectral_efficiency_cap: 6.0,
            bandwidth_efficiency: 0.8,
            min_coupling_distance_m: 10.0,
            grid_pitch_m: 5.0,
        }
    }
}

impl RadioEnvironment {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |field: &'static str, reason: &str| {
            Err(GeometryError::InvalidEnvironment { field, reason: reason.to_string() })
        };
        if !(self.bandwidth_mhz > 0.0 && self.bandwidth_mhz.is_finite()) {
            return bad("bandwidth_mhz", "must be positive and finite");
        }
        if !(self.bandwidth_efficiency > 0.0 && self.bandwidth_efficiency <= 1.0) {
            return bad("bandwidth_efficiency", "must lie in (0, 1]");
        }
        if !(self.spectral_efficiency_cap > 0.0 && self.spectral_efficiency_cap.is_finite()) {
            return bad("spectral_efficiency_cap", "must be positive and finite");
        }
        if !self.noise_density_dbm_hz.is_finite() {
            return bad("noise_density_dbm_hz", "must be finite");
        }
        if !(self.min_coupling_distance_m > 0.0 && self.min_coupling_distance_m.is_finite()) {
            return bad("min_coupling_distance_m", "must be positive and finite");
        }
        if !(self.grid_pitch_m > 0.0 && self.grid_pitch_m.is_finite()) {
            return bad("grid_pitch_m", "must be positive and finite");
        }
        Ok(())
    }

    /// Pathloss in dB with the distance clamped below at the minimum coupling distance.
    pub fn pathloss_db(&self, kind: CellKind, distance_m: f64) -> f64 {
        kind.pathloss_db(distance_m.max(self.min_coupling_distance_m) / 1000.0)
    }

    /// Thermal noise over the full bandwidth, in mW.
    pub fn noise_mw(&self) -> f64 {
        dbm_to_mw(self.noise_density_dbm_hz + 10.0 * (self.bandwidth_mhz * 1e6).log10())
    }

    /// Largest rate any position can reach, in Mbps.
    pub fn max_rate_mbps(&self) -> f64 {
        self.bandwidth_efficiency * self.bandwidth_mhz * self.spectral_efficiency_cap
    }

    /// Truncated Shannon mapping from linear SINR to Mbps.
    pub fn rate_from_sinr(&self, sinr: f64) -> f64 {
        let se = (1.0 + sinr).log2().min(self.spectral_efficiency_cap);
        self.bandwidth_efficiency * self.bandwidth_mhz * se
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Antenna gain in dB towards `pos`. Small cells are omni; macro sectors use
/// a parabolic pattern with 65 degree beamwidth and 20 dB front-to-back ratio.
pub fn antenna_gain_db(cell: &CellConfig, pos: Position) -> f64 {
    match cell.kind {
        CellKind::Small => 0.0,
        CellKind::MacroSector => {
            let dx = pos.x - cell.site.x;
            let dy = pos.y - cell.site.y;
            if dx == 0.0 && dy == 0.0 {
                return 0.0;
            }
            let bearing = dy.atan2(dx).to_degrees();
            let off = wrap_degrees(bearing - cell.azimuth_deg);
            -(12.0 * (off / 65.0).powi(2)).min(20.0)
        }
    }
}

/// Wraps an angle to [-180, 180).
fn wrap_degrees(angle: f64) -> f64 {
    (angle + 180.0).rem_euclid(360.0) - 180.0
}

/// Received pilot power in dBm at `pos`, without CIO.
pub fn received_power_dbm(cell: &CellConfig, pos: Position, env: &RadioEnvironment) -> f64 {
    let d = cell.site.distance(pos);
    cell.tx_power_dbm + antenna_gain_db(cell, pos) - env.pathloss_db(cell.kind, d)
}

/// Serving cell under the CIO-biased strongest-pilot rule; ties go to the lowest id.
///
/// Panics if `cells` is empty.
pub fn attach(pos: Position, cells: &[CellConfig], env: &RadioEnvironment) -> CellId {
    let mut best: Option<(f64, CellId)> = None;
    for cell in cells {
        let metric = cell.cio_db + received_power_dbm(cell, pos, env);
        best = match best {
            Some((m, id)) if m > metric || (m == metric && id < cell.id) => Some((m, id)),
            _ => Some((metric, cell.id)),
        };
    }
    best.expect("attach needs at least one cell").1
}

/// Downlink SINR with every other cell transmitting at full power.
pub fn sinr_linear(pos: Position, serving: CellId, cells: &[CellConfig], env: &RadioEnvironment) -> f64 {
    let mut signal = 0.0;
    let mut interference = 0.0;
    for cell in cells {
        let p = dbm_to_mw(received_power_dbm(cell, pos, env));
        if cell.id == serving {
            signal += p;
        } else {
            interference += p;
        }
    }
    signal / (env.noise_mw() + interference)
}

pub fn peak_rate_mbps(pos: Position, serving: CellId, cells: &[CellConfig], env: &RadioEnvironment) -> f64 {
    env.rate_from_sinr(sinr_linear(pos, serving, cells, env))
}

/// Axis-aligned rectangle that bounds the rasterized area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Bounds {
    pub fn is_valid(&self) -> bool {
        [self.min_x, self.min_y, self.max_x, self.max_y].iter().all(|v| v.is_finite())
            && self.max_x > self.min_x
            && self.max_y > self.min_y
    }
}

/// Spatial support of a traffic layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// Every pixel served by a traffic-carrying cell at all-zero CIO.
    WholeArea,
    /// Pixels served by a small cell at all-zero CIO.
    Hotspot,
}

/// Input to the map builder: how many arrivals per second a layer spreads over its region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSupport {
    pub region: Region,
    pub arrival_rate: f64,
    /// GBR layers are excluded from the elastic demand integral.
    pub elastic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerDensity {
    pub support: LayerSupport,
    /// Arrivals per second per square meter on the region's pixels.
    pub density: f64,
    pub pixel_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pixel {
    pub center: Position,
    pub serving: CellId,
    pub peak_rate_mbps: f64,
    /// Whether the pixel belonged to a small cell when every CIO was zero.
    pub hotspot: bool,
}

/// Rasterized service area with per-pixel serving cell, peak rate and layer densities.
#[derive(Debug, Clone, PartialEq)]
pub struct AttachmentMap {
    pitch: f64,
    pixels: Vec<Pixel>,
    layers: Vec<LayerDensity>,
}

impl AttachmentMap {
    /// Builds a map from explicit pixels, bypassing the propagation model.
    ///
    /// Used for synthetic scenarios such as a single cell with a constant rate.
    pub fn from_pixels(pitch: f64, pixels: Vec<Pixel>, layers: &[LayerSupport]) -> Result<Self, GeometryError> {
        if !(pitch > 0.0 && pitch.is_finite()) {
            return Err(GeometryError::InvalidEnvironment {
                field: "grid_pitch_m",
                reason: "must be positive and finite".into(),
            });
        }
        if pixels.is_empty() {
            return Err(GeometryError::EmptyRegion);
        }
        if let Some(p) = pixels.iter().find(|p| !(p.peak_rate_mbps > 0.0)) {
            return Err(GeometryError::CoverageHole { x: p.center.x, y: p.center.y, cell: p.serving });
        }
        let area = pitch * pitch;
        let layers = layers
            .iter()
            .map(|&support| {
                let pixel_count = pixels.iter().filter(|p| in_region(p, support.region)).count();
                if pixel_count == 0 && support.arrival_rate > 0.0 {
                    return Err(GeometryError::EmptyLayerRegion(support.region));
                }
                let density = if pixel_count == 0 { 0.0 } else { support.arrival_rate / (pixel_count as f64 * area) };
                Ok(LayerDensity { support, density, pixel_count })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { pitch, pixels, layers })
    }

    /// A square single-cell map where every pixel has the same peak rate.
    pub fn uniform(cell: CellId, peak_rate_mbps: f64, side_pixels: usize, pitch: f64, layers: &[LayerSupport]) -> Result<Self, GeometryError> {
        let pixels = (0..side_pixels * side_pixels)
            .map(|k| Pixel {
                center: Position::new(((k % side_pixels) as f64 + 0.5) * pitch, ((k / side_pixels) as f64 + 0.5) * pitch),
                serving: cell,
                peak_rate_mbps,
                hotspot: false,
            })
            .collect();
        Self::from_pixels(pitch, pixels, layers)
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn pixel_area(&self) -> f64 {
        self.pitch * self.pitch
    }

    pub fn pixels(&self) -> &[Pixel] {
        &self.pixels
    }

    pub fn layers(&self) -> &[LayerDensity] {
        &self.layers
    }

    /// Total area of the studied region in m².
    pub fn area(&self) -> f64 {
        self.pixels.len() as f64 * self.pixel_area()
    }

    /// Elastic arrivals per second per m² on a pixel, summed over layers.
    pub fn elastic_density(&self, pixel: &Pixel) -> f64 {
        self.layers
            .iter()
            .filter(|l| l.support.elastic && in_region(pixel, l.support.region))
            .map(|l| l.density)
            .sum()
    }

    /// Arrival density of one layer on a pixel.
    pub fn layer_density(&self, layer: usize, pixel: &Pixel) -> f64 {
        let l = &self.layers[layer];
        if in_region(pixel, l.support.region) {
            l.density
        } else {
            0.0
        }
    }

    /// Indices of the pixels that make up a layer's region.
    pub fn region_pixels(&self, region: Region) -> Vec<usize> {
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, p)| in_region(p, region))
            .map(|(k, _)| k)
            .collect()
    }

    pub fn pixel_count(&self, cell: CellId) -> usize {
        self.pixels.iter().filter(|p| p.serving == cell).count()
    }

    /// Recomputes serving cell and peak rate of every pixel after CIO changes.
    /// Region membership is fixed at build time.
    pub fn reattach(&mut self, cells: &[CellConfig], env: &RadioEnvironment) -> Result<(), GeometryError> {
        let updated: Vec<(CellId, f64)> = self
            .pixels
            .par_iter()
            .map(|p| {
                let serving = attach(p.center, cells, env);
                (serving, peak_rate_mbps(p.center, serving, cells, env))
            })
            .collect();
        for (p, (serving, rate)) in self.pixels.iter_mut().zip(updated) {
            if !(rate > 0.0) {
                return Err(GeometryError::CoverageHole { x: p.center.x, y: p.center.y, cell: serving });
            }
            p.serving = serving;
            p.peak_rate_mbps = rate;
        }
        Ok(())
    }

    /// CSV dump: x, y, serving_cell, peak_rate_mbps.
    pub fn to_csv(&self) -> String {
        crate::table::render(
            &["x", "y", "serving_cell", "peak_rate_mbps"],
            self.pixels.iter().map(|p| {
                vec![
                    format!("{:.3}", p.center.x),
                    format!("{:.3}", p.center.y),
                    p.serving.to_string(),
                    format!("{:.6}", p.peak_rate_mbps),
                ]
            }),
        )
    }
}

fn in_region(pixel: &Pixel, region: Region) -> bool {
    match region {
        Region::WholeArea => true,
        Region::Hotspot => pixel.hotspot,
    }
}

/// Rasterizes `bounds` at the environment's grid pitch.
///
/// The studied region is the set of pixels whose serving cell at all-zero CIO
/// carries traffic; hotspot pixels are those served by a small cell at
/// all-zero CIO. Serving cells and peak rates are then evaluated with the
/// cells' actual CIOs.
pub fn build_attachment_map(
    cells: &[CellConfig],
    env: &RadioEnvironment,
    bounds: Bounds,
    layers: &[LayerSupport],
) -> Result<AttachmentMap, GeometryError> {
    env.validate()?;
    if cells.is_empty() {
        return Err(GeometryError::NoCells);
    }
    if !bounds.is_valid() {
        return Err(GeometryError::InvalidBounds);
    }
    let pitch = env.grid_pitch_m;
    let nx = ((bounds.max_x - bounds.min_x) / pitch).floor() as usize;
    let ny = ((bounds.max_y - bounds.min_y) / pitch).floor() as usize;

    let zero_cio: Vec<CellConfig> = cells.iter().cloned().map(|c| c.with_cio(0.0)).collect();
    let pixels: Vec<Pixel> = (0..nx * ny)
        .into_par_iter()
        .filter_map(|k| {
            let center = Position::new(
                bounds.min_x + ((k % nx) as f64 + 0.5) * pitch,
                bounds.min_y + ((k / nx) as f64 + 0.5) * pitch,
            );
            let initial = &cells[attach(center, &zero_cio, env).0];
            if !initial.carries_traffic() {
                return None;
            }
            let serving = attach(center, cells, env);
            Some(Pixel {
                center,
                serving,
                peak_rate_mbps: peak_rate_mbps(center, serving, cells, env),
                hotspot: initial.kind == CellKind::Small,
            })
        })
        .collect();
    AttachmentMap::from_pixels(pitch, pixels, layers)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn env() -> RadioEnvironment {
        RadioEnvironment::default()
    }

    #[test]
    fn pathloss_reference_values() {
        assert!(close(CellKind::MacroSector.pathloss_db(1.0), 128.0, 1e-12));
        assert!(close(CellKind::Small.pathloss_db(1.0), 140.7, 1e-12));
        assert!(close(CellKind::MacroSector.pathloss_db(0.1), 91.6, 1e-9));
        assert!(close(env().pathloss_db(CellKind::MacroSector, 1000.0), 128.0, 1e-12));
    }

    #[test]
    fn pathloss_clamps_at_min_coupling_distance() {
        let e = env();
        let at_min = e.pathloss_db(CellKind::Small, 10.0);
        assert_eq!(e.pathloss_db(CellKind::Small, 0.0), at_min);
        assert_eq!(e.pathloss_db(CellKind::Small, 3.0), at_min);
        assert!(e.pathloss_db(CellKind::Small, 11.0) > at_min);
    }

    #[test]
    fn antenna_pattern() {
        let sector = CellConfig::macro_sector(0, Position::new(0.0, 0.0), 30.0, 46.0);
        let on_axis = Position::new(0.0, 0.0).offset(100.0, 30.0);
        assert!(close(antenna_gain_db(&sector, on_axis), 0.0, 1e-12));
        let at_beamwidth = Position::new(0.0, 0.0).offset(100.0, 95.0);
        assert!(close(antenna_gain_db(&sector, at_beamwidth), -12.0, 1e-9));
        let behind = Position::new(0.0, 0.0).offset(100.0, 210.0);
        assert!(close(antenna_gain_db(&sector, behind), -20.0, 1e-12));
        // wrap across +-180
        let s2 = CellConfig::macro_sector(1, Position::new(0.0, 0.0), 170.0, 46.0);
        let p = Position::new(0.0, 0.0).offset(50.0, -170.0);
        assert!(close(antenna_gain_db(&s2, p), -12.0 * (20.0f64 / 65.0).powi(2), 1e-9));

        let small = CellConfig::small(2, Position::new(5.0, 5.0), 30.0);
        assert_eq!(antenna_gain_db(&small, on_axis), 0.0);
    }

    #[test]
    fn attach_prefers_nearer_and_breaks_ties_by_id() {
        let e = env();
        let a = CellConfig::small(3, Position::new(0.0, 0.0), 30.0);
        let b = CellConfig::small(7, Position::new(200.0, 0.0), 30.0);
        let cells = vec![b.clone(), a.clone()];
        assert_eq!(attach(Position::new(40.0, 0.0), &cells, &e), CellId(3));
        assert_eq!(attach(Position::new(160.0, 0.0), &cells, &e), CellId(7));
        assert_eq!(attach(Position::new(100.0, 30.0), &cells, &e), CellId(3));
    }

    #[test]
    fn cio_flips_attachment() {
        let e = env();
        let a = CellConfig::small(0, Position::new(0.0, 0.0), 30.0);
        let b = CellConfig::small(1, Position::new(200.0, 0.0), 28.0);
        // at the midpoint, B trails A by exactly its 2 dB power deficit
        let pos = Position::new(100.0, 0.0);
        let ra = received_power_dbm(&a, pos, &e);
        let rb = received_power_dbm(&b, pos, &e);
        assert!(close(ra - rb, 2.0, 1e-9));
        assert_eq!(attach(pos, &[a.clone(), b.clone()], &e), CellId(0));
        assert_eq!(attach(pos, &[a, b.with_cio(3.0)], &e), CellId(1));
    }

    #[test]
    fn sinr_values() {
        let e = env();
        let noise_dbm = 10.0 * e.noise_mw().log10();
        // received power equals noise: pick tx so that tx - pathloss(1 km) = noise
        let pos = Position::new(1000.0, 0.0);
        let s = CellConfig::small(0, Position::new(0.0, 0.0), noise_dbm + 140.7);
        assert!(close(sinr_linear(pos, CellId(0), std::slice::from_ref(&s), &e), 1.0, 1e-9));

        let s10 = CellConfig::small(0, Position::new(0.0, 0.0), noise_dbm + 10.0 + 140.7);
        let i10 = CellConfig::small(1, Position::new(2000.0, 0.0), noise_dbm + 10.0 + 140.7);
        let sinr = sinr_linear(pos, CellId(0), &[s10, i10], &e);
        assert!(close(sinr, 10.0 / 11.0, 1e-9));

        let weak = CellConfig::small(0, Position::new(0.0, 0.0), -300.0);
        let v = sinr_linear(pos, CellId(0), &[weak], &e);
        assert!(v > 0.0 && v.is_finite());
    }

    #[test]
    fn rate_mapping() {
        let e = env();
        assert!(close(e.rate_from_sinr(1.0), 16.0, 1e-12));
        assert!(close(e.rate_from_sinr(1e6), 96.0, 1e-12));
        assert!(e.rate_from_sinr(1e-12) < 1e-9);
        assert!(close(e.max_rate_mbps(), 96.0, 1e-12));
    }

    #[test]
    fn environment_validation() {
        let mut e = env();
        e.bandwidth_mhz = 0.0;
        assert!(matches!(e.validate(), Err(GeometryError::InvalidEnvironment { field: "bandwidth_mhz", .. })));
        let mut e = env();
        e.bandwidth_efficiency = 1.5;
        assert!(e.validate().is_err());
    }

    #[test]
    fn single_cell_map_partition() {
        let e = RadioEnvironment { grid_pitch_m: 10.0, ..env() };
        let cell = CellConfig::small(0, Position::new(50.0, 50.0), 30.0);
        let bounds = Bounds { min_x: 0.0, min_y: 0.0, max_x: 100.0, max_y: 100.0 };
        let layers = [LayerSupport { region: Region::WholeArea, arrival_rate: 3.0, elastic: true }];
        let map = build_attachment_map(&[cell], &e, bounds, &layers).unwrap();
        assert_eq!(map.pixels().len(), 100);
        assert!(map.pixels().iter().all(|p| p.serving == CellId(0)));
        let mass: f64 = map.pixels().iter().map(|p| map.elastic_density(p) * map.pixel_area()).sum();
        assert!(close(mass, 3.0, 1e-9));
        // a lone small cell is its own hotspot
        assert!(map.pixels().iter().all(|p| p.hotspot));
    }

    #[test]
    fn interferer_pixels_are_excluded() {
        let e = RadioEnvironment { grid_pitch_m: 10.0, ..env() };
        let a = CellConfig::small(0, Position::new(50.0, 50.0), 30.0);
        let b = CellConfig::small(1, Position::new(250.0, 50.0), 30.0).as_interferer();
        let bounds = Bounds { min_x: 0.0, min_y: 0.0, max_x: 300.0, max_y: 100.0 };
        let layers = [LayerSupport { region: Region::WholeArea, arrival_rate: 1.0, elastic: true }];
        let map = build_attachment_map(&[a, b], &e, bounds, &layers).unwrap();
        assert_eq!(map.pixels().len(), 150);
        assert!(map.pixels().iter().all(|p| p.center.x < 150.0));
    }

    #[test]
    fn csv_dump_has_one_row_per_pixel() {
        let layers = [LayerSupport { region: Region::WholeArea, arrival_rate: 1.0, elastic: true }];
        let map = AttachmentMap::uniform(CellId(0), 20.0, 3, 5.0, &layers).unwrap();
        let csv = map.to_csv();
        assert_eq!(csv.lines().count(), 10);
        assert_eq!(csv.lines().nth(1).unwrap(), "2.500,2.500,0,20.000000");
    }

    #[test]
    fn zero_rate_pixel_is_a_coverage_hole() {
        let pixels = vec![Pixel { center: Position::new(0.0, 0.0), serving: CellId(0), peak_rate_mbps: 0.0, hotspot: false }];
        assert!(matches!(AttachmentMap::from_pixels(5.0, pixels, &[]), Err(GeometryError::CoverageHole { .. })));
    }
}
