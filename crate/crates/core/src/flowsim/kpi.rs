use serde::Serialize;

use crate::geometry::CellId;

/// An elastic download that finished.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompletedFlow {
    pub id: u64,
    pub cell: CellId,
    pub arrival_time: f64,
    pub completion_time: f64,
    pub volume_mbits: f64,
    /// Volume actually delivered; equals `volume_mbits` up to rounding.
    pub served_mbits: f64,
}

impl CompletedFlow {
    /// File transfer time in seconds.
    pub fn ftt(&self) -> f64 {
        self.completion_time - self.arrival_time
    }

    pub fn throughput_mbps(&self) -> f64 {
        self.volume_mbits / self.ftt()
    }
}

/// User-performance indicators over a set of completed flows.
/// `None` marks an indicator with no samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KpiRecord {
    pub completed: usize,
    /// Mean user throughput, Mbps.
    pub mut_mbps: Option<f64>,
    /// Cell-edge throughput: 5th percentile of per-flow throughput, Mbps.
    pub cet_mbps: Option<f64>,
    /// Mean FTT per cell, indexed by cell id.
    pub mean_ftt_s: Vec<Option<f64>>,
    pub completed_per_cell: Vec<usize>,
}

/// Nearest-rank percentile of an ascending slice; `q` in (0, 100].
pub fn nearest_rank(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((q / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

pub fn collect_kpis(flows: &[CompletedFlow], cell_count: usize) -> KpiRecord {
    let mut throughputs: Vec<f64> = flows.iter().map(CompletedFlow::throughput_mbps).collect();
    throughputs.sort_by(f64::total_cmp);
    let mut_mbps = (!throughputs.is_empty()).then(|| throughputs.iter().sum::<f64>() / throughputs.len() as f64);

    let mut ftt_sum = vec![0.0; cell_count];
    let mut completed_per_cell = vec![0usize; cell_count];
    for f in flows {
        if let Some(slot) = ftt_sum.get_mut(f.cell.0) {
            *slot += f.ftt();
            completed_per_cell[f.cell.0] += 1;
        }
    }
    let mean_ftt_s = ftt_sum
        .iter()
        .zip(&completed_per_cell)
        .map(|(&s, &n)| (n > 0).then(|| s / n as f64))
        .collect();
    KpiRecord {
        completed: flows.len(),
        mut_mbps,
        cet_mbps: nearest_rank(&throughputs, 5.0),
        mean_ftt_s,
        completed_per_cell,
    }
}
