//! Time-stepped flow-level simulation of the cluster.
//!
//! Each slot draws Poisson arrivals on every traffic layer, shares each
//! cell's radio and backhaul among its flows, drains elastic volumes and
//! records one [`SlotObservation`] per traffic-carrying cell. Flows keep the
//! serving cell they were attached to on arrival.

mod kpi;
mod sharing;
mod traffic;

pub use kpi::{collect_kpis, nearest_rank, CompletedFlow, KpiRecord};
pub use sharing::{allocate_rates, Allocation};
pub use traffic::{spawn_arrivals, Flow, FlowKind, TrafficKind, TrafficLayer};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GeometryError, LoadError};
use crate::geometry::{AttachmentMap, CellConfig, CellId, RadioEnvironment};
use crate::loadcalc::{MeasurementWindow, SlotObservation};
use crate::son::SonState;

/// Dynamic state of one cell.
#[derive(Debug, Clone, Default)]
pub struct CellState {
    pub active_flows: Vec<Flow>,
    observations: Vec<SlotObservation>,
    gbr_mbps_sum: f64,
}

impl CellState {
    pub fn elastic_count(&self) -> usize {
        self.active_flows.iter().filter(|f| f.is_elastic()).count()
    }
}

/// Observables of one cell over one estimation window.
#[derive(Debug, Clone)]
pub struct CellWindow {
    pub window: MeasurementWindow,
    /// Mean GBR rate carried during the window, Mbps.
    pub mean_gbr_mbps: f64,
}

pub struct World {
    cells: Vec<CellConfig>,
    env: Option<RadioEnvironment>,
    map: AttachmentMap,
    layers: Vec<TrafficLayer>,
    region_pixels: Vec<Vec<usize>>,
    states: Vec<CellState>,
    slot_duration: f64,
    slot_index: u64,
    rng: ChaCha8Rng,
    next_flow_id: u64,
    completed: Vec<CompletedFlow>,
    blocked_gbr: u64,
}

impl World {
    /// `env` is needed to re-attach the map when CIOs change; synthetic maps
    /// built with [`AttachmentMap::uniform`] can pass `None`.
    pub fn new(
        cells: Vec<CellConfig>,
        env: Option<RadioEnvironment>,
        map: AttachmentMap,
        layers: Vec<TrafficLayer>,
        slot_duration: f64,
        seed: u64,
    ) -> Result<Self, GeometryError> {
        if !(slot_duration > 0.0 && slot_duration.is_finite()) {
            return Err(GeometryError::InvalidEnvironment {
                field: "slot_duration_s",
                reason: "must be positive and finite".into(),
            });
        }
        if let Some(p) = map.pixels().iter().find(|p| p.serving.0 >= cells.len()) {
            return Err(GeometryError::CoverageHole { x: p.center.x, y: p.center.y, cell: p.serving });
        }
        let region_pixels = layers.iter().map(|l| map.region_pixels(l.region)).collect();
        let states = vec![CellState::default(); cells.len()];
        Ok(Self {
            cells,
            env,
            map,
            layers,
            region_pixels,
            states,
            slot_duration,
            slot_index: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            next_flow_id: 0,
            completed: Vec::new(),
            blocked_gbr: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.slot_index as f64 * self.slot_duration
    }

    pub fn slot_duration(&self) -> f64 {
        self.slot_duration
    }

    pub fn cells(&self) -> &[CellConfig] {
        &self.cells
    }

    pub fn map(&self) -> &AttachmentMap {
        &self.map
    }

    pub fn layers(&self) -> &[TrafficLayer] {
        &self.layers
    }

    pub fn state(&self, cell: CellId) -> &CellState {
        &self.states[cell.0]
    }

    pub fn blocked_gbr_sessions(&self) -> u64 {
        self.blocked_gbr
    }

    /// Advances the world by one slot.
    pub fn step(&mut self) {
        let now = self.time();
        let dt = self.slot_duration;
        for (layer, region) in self.layers.iter().zip(&self.region_pixels) {
            let arrivals = spawn_arrivals(layer, &self.map, region, now, dt, &mut self.next_flow_id, &mut self.rng);
            for flow in arrivals {
                admit(&self.cells[flow.serving.0], &mut self.states[flow.serving.0], flow, &mut self.blocked_gbr);
            }
        }

        for (cell, state) in self.cells.iter().zip(self.states.iter_mut()) {
            if !cell.carries_traffic() {
                continue;
            }
            state.active_flows.retain(|f| match f.kind {
                FlowKind::Gbr { departure_time, .. } => departure_time > now,
                FlowKind::Elastic { .. } => true,
            });
            let alloc = allocate_rates(cell, &state.active_flows);
            state.observations.push(alloc.observation);
            state.gbr_mbps_sum += alloc.gbr_mbps;

            let completed = &mut self.completed;
            let mut k = 0;
            state.active_flows.retain_mut(|flow| {
                let rate = alloc.rates[k];
                k += 1;
                let FlowKind::Elastic { remaining_mbits } = &mut flow.kind else {
                    return true;
                };
                if rate > 0.0 && rate * dt >= *remaining_mbits {
                    flow.served_mbits += *remaining_mbits;
                    completed.push(CompletedFlow {
                        id: flow.id,
                        cell: cell.id,
                        arrival_time: flow.arrival_time,
                        completion_time: now + *remaining_mbits / rate,
                        volume_mbits: flow.volume_mbits,
                        served_mbits: flow.served_mbits,
                    });
                    false
                } else {
                    *remaining_mbits -= rate * dt;
                    flow.served_mbits += rate * dt;
                    true
                }
            });
        }
        self.slot_index += 1;
    }

    pub fn run_for(&mut self, seconds: f64) {
        let slots = (seconds / self.slot_duration).round() as u64;
        for _ in 0..slots {
            self.step();
        }
    }

    /// Takes the observations recorded since the last call, per cell id.
    /// Interference-only cells and cells with no recorded slot yield `None`.
    pub fn take_windows(&mut self) -> Vec<Option<CellWindow>> {
        let dt = self.slot_duration;
        self.states
            .iter_mut()
            .map(|s| {
                let slots = std::mem::take(&mut s.observations);
                let n = slots.len();
                let gbr = std::mem::take(&mut s.gbr_mbps_sum);
                match MeasurementWindow::new(slots, dt) {
                    Ok(window) => Some(CellWindow { window, mean_gbr_mbps: gbr / n as f64 }),
                    Err(LoadError::EmptyWindow) => None,
                    Err(_) => unreachable!("window construction only fails when empty"),
                }
            })
            .collect()
    }

    /// Completed elastic flows since the last call.
    pub fn drain_completed(&mut self) -> Vec<CompletedFlow> {
        std::mem::take(&mut self.completed)
    }

    /// Pushes the controller's CIOs into the cells and re-attaches the map.
    /// Flows already in progress keep their serving cell.
    pub fn apply_son(&mut self, son: &SonState) -> Result<(), GeometryError> {
        son.apply(&mut self.cells);
        if let Some(env) = &self.env {
            self.map.reattach(&self.cells, env)?;
        }
        Ok(())
    }
}

/// Inserts an arriving flow. GBR sessions are clamped to what the cell's
/// radio and backhaul can still reserve and dropped if nothing is left.
fn admit(cell: &CellConfig, state: &mut CellState, mut flow: Flow, blocked: &mut u64) {
    if let FlowKind::Gbr { guaranteed_mbps, departure_time } = flow.kind {
        let (radio, backhaul) = state.active_flows.iter().fold((0.0, 0.0), |(r, b), f| match f.kind {
            FlowKind::Gbr { guaranteed_mbps: g, .. } => (r + g / f.peak_rate_mbps, b + g),
            FlowKind::Elastic { .. } => (r, b),
        });
        let headroom = (flow.peak_rate_mbps * (1.0 - radio)).min(cell.backhaul_mbps - backhaul);
        let granted = guaranteed_mbps.min(headroom);
        if !(granted > 1e-9) {
            *blocked += 1;
            return;
        }
        flow.kind = FlowKind::Gbr { guaranteed_mbps: granted, departure_time };
    }
    state.active_flows.push(flow);
}
