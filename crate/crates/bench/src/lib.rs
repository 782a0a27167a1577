//! Fixtures shared by the benchmarks.

use hetlb_core::flowsim::{Flow, FlowKind};
use hetlb_core::scenario::ScenarioConfig;
use hetlb_core::{CellId, Position};

pub fn paper_scenario() -> ScenarioConfig {
    ScenarioConfig::preset("paper_table1").expect("preset ships with the crate")
}

/// `n` elastic flows with peak rates spread over 5..=60 Mbps.
pub fn elastic_flows(n: usize) -> Vec<Flow> {
    (0..n)
        .map(|k| Flow {
            id: k as u64,
            kind: FlowKind::Elastic { remaining_mbits: 4.0 },
            position: Position::default(),
            serving: CellId(0),
            arrival_time: 0.0,
            volume_mbits: 4.0,
            served_mbits: 0.0,
            peak_rate_mbps: 5.0 + (k * 11 % 56) as f64,
        })
        .collect()
}
