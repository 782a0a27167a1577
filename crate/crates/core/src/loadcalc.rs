//! Base-station load definitions.
//!
//! Two families live here. Measurement-based estimators consume a
//! [`MeasurementWindow`] of per-slot scheduler and backhaul observables.
//! Analytic loads integrate traffic demand over the [`AttachmentMap`] with a
//! midpoint sum over its pixels. Each family has a local (radio only) and a
//! global (radio plus backhaul) variant.

use serde::{Deserialize, Serialize};

use crate::error::LoadError;
use crate::geometry::{AttachmentMap, CellId};

/// What one cell's scheduler and backhaul looked like during one slot.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SlotObservation {
    /// Share of radio resources in use.
    pub used_resource_fraction: f64,
    /// Number of elastic flows present.
    pub elastic_active_count: u32,
    /// Share of radio resources reserved by GBR sessions.
    pub gbr_resource_fraction: f64,
    /// Carried backhaul traffic over backhaul capacity.
    pub backhaul_occupancy: f64,
}

impl SlotObservation {
    pub fn idle() -> Self {
        Self::default()
    }

    pub fn is_valid(&self) -> bool {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        unit(self.used_resource_fraction) && unit(self.gbr_resource_fraction) && unit(self.backhaul_occupancy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementWindow {
    slots: Vec<SlotObservation>,
    slot_duration: f64,
}

impl MeasurementWindow {
    pub fn new(slots: Vec<SlotObservation>, slot_duration: f64) -> Result<Self, LoadError> {
        if slots.is_empty() {
            return Err(LoadError::EmptyWindow);
        }
        Ok(Self { slots, slot_duration })
    }

    pub fn slots(&self) -> &[SlotObservation] {
        &self.slots
    }

    pub fn slot_duration(&self) -> f64 {
        self.slot_duration
    }

    /// Window length in slots.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.slots.len() as f64 * self.slot_duration
    }

    fn mean_of(&self, f: impl Fn(&SlotObservation) -> f64) -> f64 {
        self.slots.iter().map(f).sum::<f64>() / self.slots.len() as f64
    }

    pub fn mean_backhaul_occupancy(&self) -> f64 {
        self.mean_of(|s| s.backhaul_occupancy)
    }

    pub fn mean_gbr_resource_fraction(&self) -> f64 {
        self.mean_of(|s| s.gbr_resource_fraction)
    }

    pub fn mean_elastic_count(&self) -> f64 {
        self.mean_of(|s| s.elastic_active_count as f64)
    }
}

/// Mean share of radio resources the scheduler used over the window.
pub fn scheduler_load(window: &MeasurementWindow) -> f64 {
    window.mean_of(|s| s.used_resource_fraction)
}

/// Fraction of slots in which at least one elastic flow was present.
pub fn busy_load(window: &MeasurementWindow) -> f64 {
    window.mean_of(|s| if s.elastic_active_count > 0 { 1.0 } else { 0.0 })
}

/// Busy fraction, with elastic-idle slots charged the larger of GBR radio
/// share and backhaul occupancy.
pub fn global_load(window: &MeasurementWindow) -> f64 {
    window.mean_of(|s| {
        if s.elastic_active_count > 0 {
            1.0
        } else {
            s.gbr_resource_fraction.max(s.backhaul_occupancy)
        }
    })
}

/// Per-cell inputs to the analytic loads that do not come from the map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellLoadParams {
    /// Backhaul capacity in Mbps (`f64::INFINITY` when unconstrained).
    pub backhaul_mbps: f64,
    /// Share of radio resources held by GBR traffic.
    pub gbr_radio_fraction: f64,
    /// Total GBR traffic demand in Mbps.
    pub gbr_demand_mbps: f64,
}

impl CellLoadParams {
    pub fn elastic_only(backhaul_mbps: f64) -> Self {
        Self { backhaul_mbps, gbr_radio_fraction: 0.0, gbr_demand_mbps: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct AnalyticScenario<'a> {
    pub map: &'a AttachmentMap,
    /// Mean file size in Mbits.
    pub mean_file_size: f64,
    /// Indexed by cell id.
    pub cells: Vec<CellLoadParams>,
}

impl<'a> AnalyticScenario<'a> {
    pub fn new(map: &'a AttachmentMap, mean_file_size: f64, cells: Vec<CellLoadParams>) -> Result<Self, LoadError> {
        if !(mean_file_size > 0.0 && mean_file_size.is_finite()) {
            return Err(LoadError::InvalidScenario(format!("mean file size {mean_file_size} must be positive")));
        }
        for (id, c) in cells.iter().enumerate() {
            if !(c.backhaul_mbps > 0.0) {
                return Err(LoadError::InvalidScenario(format!("cell {id}: backhaul capacity must be positive")));
            }
            if !(0.0..=1.0).contains(&c.gbr_radio_fraction) {
                return Err(LoadError::InvalidScenario(format!("cell {id}: GBR radio fraction outside [0, 1]")));
            }
            if !(c.gbr_demand_mbps >= 0.0 && c.gbr_demand_mbps.is_finite()) {
                return Err(LoadError::InvalidScenario(format!("cell {id}: GBR demand must be non-negative")));
            }
        }
        Ok(Self { map, mean_file_size, cells })
    }

    fn params(&self, cell: CellId) -> Result<&CellLoadParams, LoadError> {
        self.cells
            .get(cell.0)
            .ok_or_else(|| LoadError::InvalidScenario(format!("no load parameters for cell {cell}")))
    }

    /// Elastic demand in Mbps offered to a cell's pixels.
    pub fn elastic_demand(&self, cell: CellId) -> f64 {
        let area = self.map.pixel_area();
        self.map
            .pixels()
            .iter()
            .filter(|p| p.serving == cell)
            .map(|p| self.map.elastic_density(p) * area * self.mean_file_size)
            .sum()
    }

    /// Midpoint sum of demand density over `capacity(peak_rate)` on the cell's pixels.
    fn integrate(&self, cell: CellId, capacity: impl Fn(f64) -> f64) -> Result<f64, LoadError> {
        let area = self.map.pixel_area();
        let mut any = false;
        let mut total = 0.0;
        for p in self.map.pixels().iter().filter(|p| p.serving == cell) {
            any = true;
            if !(p.peak_rate_mbps > 0.0) {
                return Err(LoadError::ZeroPeakRate(cell));
            }
            let demand = self.map.elastic_density(p) * area * self.mean_file_size;
            if demand > 0.0 {
                total += demand / capacity(p.peak_rate_mbps);
            }
        }
        if !any {
            return Err(LoadError::NoPixels(cell));
        }
        Ok(total)
    }
}

/// Elastic demand over radio peak rate, capped at 1.
pub fn analytic_load_elastic(s: &AnalyticScenario<'_>, cell: CellId) -> Result<f64, LoadError> {
    Ok(s.integrate(cell, |r| r)?.min(1.0))
}

/// GBR traffic takes its radio share first; elastic traffic sees the rest.
pub fn analytic_load_gbr(s: &AnalyticScenario<'_>, cell: CellId) -> Result<f64, LoadError> {
    let gbr = s.params(cell)?.gbr_radio_fraction;
    let residual = 1.0 - gbr;
    let elastic = s.integrate(cell, |r| residual * r)?;
    if residual <= 0.0 {
        return Ok(1.0);
    }
    Ok((gbr + elastic).min(1.0))
}

/// Like [`analytic_load_elastic`] but each position's rate is capped by the backhaul.
pub fn analytic_global_elastic(s: &AnalyticScenario<'_>, cell: CellId) -> Result<f64, LoadError> {
    let backhaul = s.params(cell)?.backhaul_mbps;
    Ok(s.integrate(cell, |r| backhaul.min(r))?.min(1.0))
}

/// Global load with GBR traffic served first on both radio and backhaul.
pub fn analytic_global_gbr(s: &AnalyticScenario<'_>, cell: CellId) -> Result<f64, LoadError> {
    let p = *s.params(cell)?;
    let residual_backhaul = (p.backhaul_mbps - p.gbr_demand_mbps).max(0.0);
    let gbr_global = (p.gbr_demand_mbps / p.backhaul_mbps).max(p.gbr_radio_fraction);
    let residual_radio = 1.0 - p.gbr_radio_fraction;
    let elastic = s.integrate(cell, |r| residual_backhaul.min(residual_radio * r))?;
    // a zero residual pipe makes any elastic demand infinite load
    if elastic > 0.0 && !elastic.is_finite() {
        return Ok(1.0);
    }
    Ok((gbr_global + elastic).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{LayerSupport, Pixel, Position, Region};
    use proptest::prelude::*;

    fn obs(used: f64, n: u32, gbr: f64, bh: f64) -> SlotObservation {
        SlotObservation {
            used_resource_fraction: used,
            elastic_active_count: n,
            gbr_resource_fraction: gbr,
            backhaul_occupancy: bh,
        }
    }

    fn window(slots: Vec<SlotObservation>) -> MeasurementWindow {
        MeasurementWindow::new(slots, 1.0).unwrap()
    }

    /// One cell with constant peak rate carrying `demand` Mbps of elastic traffic.
    fn constant_map(rate: f64, demand: f64) -> AttachmentMap {
        let layers = [LayerSupport { region: Region::WholeArea, arrival_rate: demand / 4.0, elastic: true }];
        AttachmentMap::uniform(CellId(0), rate, 4, 5.0, &layers).unwrap()
    }

    #[test]
    fn empty_window_is_rejected() {
        assert_eq!(MeasurementWindow::new(vec![], 0.01), Err(LoadError::EmptyWindow));
    }

    #[test]
    fn scheduler_load_examples() {
        assert_eq!(scheduler_load(&window(vec![obs(1.0, 1, 0.0, 0.0); 5])), 1.0);
        assert_eq!(scheduler_load(&window(vec![obs(0.5, 1, 0.0, 0.0); 7])), 0.5);
        let w = window(vec![obs(1.0, 1, 0.0, 0.0), obs(0.0, 0, 0.0, 0.0), obs(0.5, 1, 0.0, 0.0), obs(0.5, 1, 0.0, 0.0)]);
        assert_eq!(scheduler_load(&w), 0.5);
    }

    #[test]
    fn busy_load_examples() {
        assert_eq!(busy_load(&window(vec![SlotObservation::idle(); 60])), 0.0);
        assert_eq!(busy_load(&window(vec![obs(0.1, 2, 0.0, 0.0); 60])), 1.0);
        let mut slots = vec![obs(0.2, 1, 0.0, 0.0); 45];
        slots.extend(vec![SlotObservation::idle(); 15]);
        assert_eq!(busy_load(&window(slots)), 0.75);
    }

    #[test]
    fn global_load_examples() {
        assert_eq!(global_load(&window(vec![obs(0.1, 1, 0.3, 0.2); 60])), 1.0);
        assert!((global_load(&window(vec![obs(0.0, 0, 0.0, 0.3); 60])) - 0.3).abs() < 1e-12);
        let mut slots = vec![obs(0.5, 3, 0.0, 0.0); 30];
        slots.extend(vec![obs(0.4, 0, 0.4, 0.1); 30]);
        assert!((global_load(&window(slots)) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn analytic_elastic_examples() {
        let map = constant_map(10.0, 4.0);
        let s = AnalyticScenario::new(&map, 4.0, vec![CellLoadParams::elastic_only(f64::INFINITY)]).unwrap();
        assert!((s.elastic_demand(CellId(0)) - 4.0).abs() < 1e-12);
        assert!((analytic_load_elastic(&s, CellId(0)).unwrap() - 0.4).abs() < 1e-12);

        let map = constant_map(10.0, 20.0);
        let s = AnalyticScenario::new(&map, 4.0, vec![CellLoadParams::elastic_only(f64::INFINITY)]).unwrap();
        assert_eq!(analytic_load_elastic(&s, CellId(0)).unwrap(), 1.0);
    }

    #[test]
    fn analytic_elastic_two_pixel_cell() {
        // whole-area layer gives 1 Mbps to each pixel, hotspot adds 1 Mbps on the 20 Mbps pixel
        let pixels = vec![
            Pixel { center: Position::new(0.0, 0.0), serving: CellId(0), peak_rate_mbps: 10.0, hotspot: false },
            Pixel { center: Position::new(1.0, 0.0), serving: CellId(0), peak_rate_mbps: 20.0, hotspot: true },
        ];
        let layers = [
            LayerSupport { region: Region::WholeArea, arrival_rate: 0.5, elastic: true },
            LayerSupport { region: Region::Hotspot, arrival_rate: 0.25, elastic: true },
        ];
        let map = AttachmentMap::from_pixels(1.0, pixels, &layers).unwrap();
        let s = AnalyticScenario::new(&map, 4.0, vec![CellLoadParams::elastic_only(f64::INFINITY)]).unwrap();
        assert!((s.elastic_demand(CellId(0)) - 3.0).abs() < 1e-12);
        assert!((analytic_load_elastic(&s, CellId(0)).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn analytic_gbr_examples() {
        let map = constant_map(10.0, 2.0);
        let base = CellLoadParams::elastic_only(f64::INFINITY);
        let s0 = AnalyticScenario::new(&map, 4.0, vec![base]).unwrap();
        assert_eq!(analytic_load_gbr(&s0, CellId(0)).unwrap(), analytic_load_elastic(&s0, CellId(0)).unwrap());

        let s = AnalyticScenario::new(&map, 4.0, vec![CellLoadParams { gbr_radio_fraction: 0.5, ..base }]).unwrap();
        assert!((analytic_load_gbr(&s, CellId(0)).unwrap() - 0.9).abs() < 1e-12);

        let s = AnalyticScenario::new(&map, 4.0, vec![CellLoadParams { gbr_radio_fraction: 1.0, ..base }]).unwrap();
        assert_eq!(analytic_load_gbr(&s, CellId(0)).unwrap(), 1.0);
    }

    #[test]
    fn analytic_global_elastic_examples() {
        let map = constant_map(50.0, 4.0);
        let wide = AnalyticScenario::new(&map, 4.0, vec![CellLoadParams::elastic_only(60.0)]).unwrap();
        assert_eq!(
            analytic_global_elastic(&wide, CellId(0)).unwrap(),
            analytic_load_elastic(&wide, CellId(0)).unwrap()
        );
        let narrow = AnalyticScenario::new(&map, 4.0, vec![CellLoadParams::elastic_only(10.0)]).unwrap();
        assert!((analytic_global_elastic(&narrow, CellId(0)).unwrap() - 0.4).abs() < 1e-12);

        let map = constant_map(50.0, 12.0);
        let narrow = AnalyticScenario::new(&map, 4.0, vec![CellLoadParams::elastic_only(10.0)]).unwrap();
        assert_eq!(analytic_global_elastic(&narrow, CellId(0)).unwrap(), 1.0);
    }

    #[test]
    fn analytic_global_gbr_examples() {
        let map = constant_map(10.0, 3.0);
        let s = AnalyticScenario::new(&map, 4.0, vec![CellLoadParams::elastic_only(10.0)]).unwrap();
        assert_eq!(analytic_global_gbr(&s, CellId(0)).unwrap(), analytic_global_elastic(&s, CellId(0)).unwrap());

        // R̄ = (1 - 0.2) × 10 = 8; C̄ = 10 - 4 = 6; max(0.4, 0.2) + 3 / min(6, 8)
        let p = CellLoadParams { backhaul_mbps: 10.0, gbr_radio_fraction: 0.2, gbr_demand_mbps: 4.0 };
        let s = AnalyticScenario::new(&map, 4.0, vec![p]).unwrap();
        assert!((analytic_global_gbr(&s, CellId(0)).unwrap() - 0.9).abs() < 1e-12);

        let p = CellLoadParams { backhaul_mbps: 10.0, gbr_radio_fraction: 0.1, gbr_demand_mbps: 10.0 };
        let s = AnalyticScenario::new(&map, 4.0, vec![p]).unwrap();
        assert_eq!(analytic_global_gbr(&s, CellId(0)).unwrap(), 1.0);
        let p = CellLoadParams { backhaul_mbps: 10.0, gbr_radio_fraction: 0.1, gbr_demand_mbps: 25.0 };
        let s = AnalyticScenario::new(&map, 4.0, vec![p]).unwrap();
        assert_eq!(analytic_global_gbr(&s, CellId(0)).unwrap(), 1.0);
    }

    #[test]
    fn analytic_errors() {
        let map = constant_map(10.0, 3.0);
        let s = AnalyticScenario::new(&map, 4.0, vec![CellLoadParams::elastic_only(10.0); 2]).unwrap();
        assert_eq!(analytic_load_elastic(&s, CellId(1)), Err(LoadError::NoPixels(CellId(1))));
        assert!(AnalyticScenario::new(&map, 0.0, vec![]).is_err());
        assert!(AnalyticScenario::new(&map, 4.0, vec![CellLoadParams::elastic_only(0.0)]).is_err());
    }

    #[test]
    fn unconstrained_reductions() {
        let map = constant_map(25.0, 7.0);
        let s = AnalyticScenario::new(&map, 4.0, vec![CellLoadParams::elastic_only(f64::INFINITY)]).unwrap();
        let local = analytic_load_elastic(&s, CellId(0)).unwrap();
        assert_eq!(analytic_global_elastic(&s, CellId(0)).unwrap(), local);
        assert_eq!(analytic_global_gbr(&s, CellId(0)).unwrap(), local);
    }

    fn slot_strategy() -> impl Strategy<Value = SlotObservation> {
        (0.0..=1.0f64, 0u32..4, 0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(u, n, g, b)| obs(u, n, g, b))
    }

    proptest! {
        #[test]
        fn estimators_stay_in_unit_interval(slots in prop::collection::vec(slot_strategy(), 1..200)) {
            let w = window(slots);
            for v in [scheduler_load(&w), busy_load(&w), global_load(&w)] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(global_load(&w) >= busy_load(&w));
        }

        #[test]
        fn global_equals_busy_without_gbr_or_backhaul(counts in prop::collection::vec(0u32..3, 1..100)) {
            let w = window(counts.iter().map(|&n| obs(0.3, n, 0.0, 0.0)).collect());
            prop_assert_eq!(global_load(&w), busy_load(&w));
        }

        #[test]
        fn analytic_loads_bounded_and_ordered(
            rate in 1.0..100.0f64,
            demand in 0.0..60.0f64,
            backhaul in 1.0..100.0f64,
            gbr_frac in 0.0..0.99f64,
            gbr_demand in 0.0..50.0f64,
        ) {
            let map = constant_map(rate, demand);
            let p = CellLoadParams { backhaul_mbps: backhaul, gbr_radio_fraction: gbr_frac, gbr_demand_mbps: gbr_demand };
            let s = AnalyticScenario::new(&map, 4.0, vec![p]).unwrap();
            let local = analytic_load_elastic(&s, CellId(0)).unwrap();
            let global = analytic_global_elastic(&s, CellId(0)).unwrap();
            for v in [local, global, analytic_load_gbr(&s, CellId(0)).unwrap(), analytic_global_gbr(&s, CellId(0)).unwrap()] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(global >= local);
        }
    }
}
