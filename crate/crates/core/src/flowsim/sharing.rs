use crate::geometry::CellConfig;
use crate::loadcalc::SlotObservation;

use super::traffic::{Flow, FlowKind};

/// Per-flow rates for one slot plus what the cell's counters record.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// Rate in Mbps for each flow, in the order the flows were given.
    pub rates: Vec<f64>,
    pub observation: SlotObservation,
    /// Sum of all served rates, in Mbps.
    pub total_mbps: f64,
    /// Sum of GBR rates, in Mbps.
    pub gbr_mbps: f64,
}

/// Shares one cell's radio and backhaul among its flows for one slot.
///
/// GBR sessions are served first at their guaranteed rate. Elastic flows then
/// split the residual joint bottleneck equally: with `n` of them, flow `u`
/// gets `min(R_u * (1 - γ), C_BH - Σ gbr) / n`.
pub fn allocate_rates(cell: &CellConfig, flows: &[Flow]) -> Allocation {
    let mut rates = vec![0.0; flows.len()];
    let mut gbr_fraction = 0.0;
    let mut gbr_mbps = 0.0;
    let mut elastic = 0u32;
    for (rate, flow) in rates.iter_mut().zip(flows) {
        match flow.kind {
            FlowKind::Gbr { guaranteed_mbps, .. } => {
                *rate = guaranteed_mbps;
                gbr_mbps += guaranteed_mbps;
                gbr_fraction += guaranteed_mbps / flow.peak_rate_mbps;
            }
            FlowKind::Elastic { .. } => elastic += 1,
        }
    }
    let gbr_fraction = gbr_fraction.min(1.0);
    let residual_radio = 1.0 - gbr_fraction;
    let residual_backhaul = (cell.backhaul_mbps - gbr_mbps).max(0.0);

    let mut elastic_mbps = 0.0;
    let mut elastic_radio = 0.0;
    if elastic > 0 {
        let n = elastic as f64;
        for (rate, flow) in rates.iter_mut().zip(flows) {
            if flow.is_elastic() {
                *rate = (flow.peak_rate_mbps * residual_radio).min(residual_backhaul) / n;
                elastic_mbps += *rate;
                elastic_radio += *rate / flow.peak_rate_mbps;
            }
        }
    }
    let total_mbps = gbr_mbps + elastic_mbps;
    let backhaul_occupancy = if cell.backhaul_mbps.is_finite() {
        (total_mbps / cell.backhaul_mbps).min(1.0)
    } else {
        0.0
    };
    Allocation {
        rates,
        observation: SlotObservation {
            used_resource_fraction: (elastic_radio + gbr_fraction).min(1.0),
            elastic_active_count: elastic,
            gbr_resource_fraction: gbr_fraction,
            backhaul_occupancy,
        },
        total_mbps,
        gbr_mbps,
    }
}
