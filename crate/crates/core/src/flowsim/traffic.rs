use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::geometry::{AttachmentMap, CellId, LayerSupport, Position, Region};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum TrafficKind {
    Elastic,
    /// Sessions holding a fixed rate for an exponential time.
    Gbr { rate_mbps: f64, mean_holding_s: f64 },
}

/// One Poisson arrival stream spread uniformly over a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficLayer {
    pub name: String,
    /// Aggregate arrivals per second over the whole region.
    pub arrival_rate: f64,
    pub region: Region,
    /// Mean file size in Mbits; unused by GBR layers.
    pub file_size_mean: f64,
    pub kind: TrafficKind,
}

impl TrafficLayer {
    pub fn elastic(name: &str, arrival_rate: f64, region: Region, file_size_mean: f64) -> Self {
        Self { name: name.to_string(), arrival_rate, region, file_size_mean, kind: TrafficKind::Elastic }
    }

    pub fn is_elastic(&self) -> bool {
        matches!(self.kind, TrafficKind::Elastic)
    }

    pub fn support(&self) -> LayerSupport {
        LayerSupport { region: self.region, arrival_rate: self.arrival_rate, elastic: self.is_elastic() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowKind {
    Elastic { remaining_mbits: f64 },
    Gbr { guaranteed_mbps: f64, departure_time: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    pub id: u64,
    pub kind: FlowKind,
    pub position: Position,
    pub serving: CellId,
    pub arrival_time: f64,
    /// File size for elastic flows; zero for GBR sessions.
    pub volume_mbits: f64,
    /// Volume delivered so far.
    pub served_mbits: f64,
    /// Peak rate at the flow's position, cached at arrival.
    pub peak_rate_mbps: f64,
}

impl Flow {
    pub fn is_elastic(&self) -> bool {
        matches!(self.kind, FlowKind::Elastic { .. })
    }
}

/// Draws this slot's arrivals for one layer.
///
/// `region_pixels` lists the map pixels of the layer's region; a position is
/// a uniform pixel pick plus uniform jitter inside it. The serving cell and
/// peak rate are read from the map as it stands at arrival time.
pub fn spawn_arrivals<R: Rng + ?Sized>(
    layer: &TrafficLayer,
    map: &AttachmentMap,
    region_pixels: &[usize],
    now: f64,
    slot_duration: f64,
    next_id: &mut u64,
    rng: &mut R,
) -> Vec<Flow> {
    let mean = layer.arrival_rate * slot_duration;
    if !(mean > 0.0) || region_pixels.is_empty() {
        return Vec::new();
    }
    let count = Poisson::new(mean).expect("positive Poisson mean").sample(rng) as u64;
    let half = map.pitch() / 2.0;
    (0..count)
        .map(|_| {
            let pixel = &map.pixels()[region_pixels[rng.random_range(0..region_pixels.len())]];
            let position = Position::new(
                pixel.center.x + rng.random_range(-half..half),
                pixel.center.y + rng.random_range(-half..half),
            );
            let (kind, volume) = match layer.kind {
                TrafficKind::Elastic => {
                    let size = Exp::new(1.0 / layer.file_size_mean).expect("positive file size").sample(rng);
                    (FlowKind::Elastic { remaining_mbits: size }, size)
                }
                TrafficKind::Gbr { rate_mbps, mean_holding_s } => {
                    let hold = Exp::new(1.0 / mean_holding_s).expect("positive holding time").sample(rng);
                    (FlowKind::Gbr { guaranteed_mbps: rate_mbps, departure_time: now + hold }, 0.0)
                }
            };
            let id = *next_id;
            *next_id += 1;
            Flow {
                id,
                kind,
                position,
                serving: pixel.serving,
                arrival_time: now,
                volume_mbits: volume,
                served_mbits: 0.0,
                peak_rate_mbps: pixel.peak_rate_mbps,
            }
        })
        .collect()
}
