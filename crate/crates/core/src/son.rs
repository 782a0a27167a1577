//! Stochastic-approximation load balancing on small-cell CIOs.
//!
//! Each controlled cell moves its CIO by `step_size * (ρ_ref - ρ_s)` once per
//! measurement window. The local and global variants share this update and
//! differ only in which estimator produces the load reports.

use serde::{Deserialize, Serialize};

use crate::error::SonError;
use crate::geometry::{CellConfig, CellId, CellKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SonVariant {
    /// Feeds scheduler resource occupancy.
    Local,
    /// Feeds the backhaul-aware global load.
    Global,
}

impl SonVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            SonVariant::Local => "local",
            SonVariant::Global => "global",
        }
    }
}

impl std::str::FromStr for SonVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local" => Ok(SonVariant::Local),
            "global" => Ok(SonVariant::Global),
            other => Err(format!("unknown SON variant `{other}` (expected local or global)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceRule {
    NearestMacro,
    MostLoaded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SonConfig {
    /// CIO change in dB per unit of load difference.
    pub step_size: f64,
    /// Seconds between updates; also the estimation window length.
    pub update_period_s: f64,
    pub cio_min_db: f64,
    pub cio_max_db: f64,
    pub variant: SonVariant,
    pub reference_rule: ReferenceRule,
}

impl Default for SonConfig {
    fn default() -> Self {
        Self {
            step_size: 1.0,
            update_period_s: 60.0,
            cio_min_db: 0.0,
            cio_max_db: 12.0,
            variant: SonVariant::Global,
            reference_rule: ReferenceRule::NearestMacro,
        }
    }
}

impl SonConfig {
    pub fn validate(&self) -> Result<(), SonError> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(SonError::InvalidConfig("step_size must be positive".into()));
        }
        if !(self.update_period_s > 0.0 && self.update_period_s.is_finite()) {
            return Err(SonError::InvalidConfig("update_period_s must be positive".into()));
        }
        if !(self.cio_min_db.is_finite() && self.cio_max_db.is_finite() && self.cio_min_db <= self.cio_max_db) {
            return Err(SonError::InvalidConfig("need finite cio_min_db <= cio_max_db".into()));
        }
        Ok(())
    }

    pub fn clamp(&self, cio: f64) -> f64 {
        cio.clamp(self.cio_min_db, self.cio_max_db)
    }
}

/// Picks the reference cell for `controlled` among the traffic-carrying cells.
///
/// `loads` is indexed by cell id and only consulted by the most-loaded rule.
pub fn select_reference(
    controlled: CellId,
    cells: &[CellConfig],
    loads: &[f64],
    rule: ReferenceRule,
) -> Result<CellId, SonError> {
    let candidates = cells.iter().filter(|c| c.carries_traffic());
    match rule {
        ReferenceRule::NearestMacro => {
            let site = cells
                .iter()
                .find(|c| c.id == controlled)
                .map(|c| c.site)
                .ok_or(SonError::MissingReport(controlled))?;
            candidates
                .filter(|c| c.kind == CellKind::MacroSector)
                .map(|c| (c.site.distance(site), c.id))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .map(|(_, id)| id)
                .ok_or(SonError::NoMacro(controlled))
        }
        ReferenceRule::MostLoaded => {
            let mut best: Option<(f64, CellId)> = None;
            for c in candidates {
                let load = *loads.get(c.id.0).ok_or(SonError::MissingReport(c.id))?;
                if best.is_none_or(|(b, _)| load > b) {
                    best = Some((load, c.id));
                }
            }
            best.map(|(_, id)| id).ok_or(SonError::NoMacro(controlled))
        }
    }
}

/// Controller state: one CIO per controlled cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SonState {
    pub config: SonConfig,
    pub controlled: Vec<CellId>,
    pub cio_db: Vec<f64>,
    /// Reference used at the last update (or the initial selection).
    pub reference: Vec<CellId>,
    pub iteration: u64,
}

impl SonState {
    /// Controls every traffic-carrying small cell, starting from its configured CIO.
    pub fn new(config: SonConfig, cells: &[CellConfig]) -> Result<Self, SonError> {
        config.validate()?;
        let controlled: Vec<CellId> = cells
            .iter()
            .filter(|c| c.carries_traffic() && c.kind == CellKind::Small)
            .map(|c| c.id)
            .collect();
        let cio_db = controlled.iter().map(|id| config.clamp(cells[id.0].cio_db)).collect();
        let zeros = vec![0.0; cells.len()];
        let reference = controlled
            .iter()
            .map(|&id| select_reference(id, cells, &zeros, config.reference_rule))
            .collect::<Result<_, _>>()?;
        Ok(Self { config, controlled, cio_db, reference, iteration: 0 })
    }

    pub fn cio_of(&self, cell: CellId) -> Option<f64> {
        self.controlled.iter().position(|&c| c == cell).map(|k| self.cio_db[k])
    }

    /// One SA step from per-cell load reports indexed by cell id.
    pub fn update(&mut self, cells: &[CellConfig], loads: &[f64]) -> Result<(), SonError> {
        let check = |cell: CellId| -> Result<f64, SonError> {
            let load = *loads.get(cell.0).ok_or(SonError::MissingReport(cell))?;
            if !(0.0..=1.0).contains(&load) {
                return Err(SonError::LoadOutOfRange { cell, load });
            }
            Ok(load)
        };
        for c in cells.iter().filter(|c| c.carries_traffic()) {
            check(c.id)?;
        }
        let mut next = self.cio_db.clone();
        let mut refs = self.reference.clone();
        for (k, &cell) in self.controlled.iter().enumerate() {
            let reference = select_reference(cell, cells, loads, self.config.reference_rule)?;
            let gap = check(reference)? - check(cell)?;
            next[k] = self.config.clamp(self.cio_db[k] + self.config.step_size * gap);
            refs[k] = reference;
        }
        self.cio_db = next;
        self.reference = refs;
        self.iteration += 1;
        Ok(())
    }

    /// Writes the controlled CIOs into the cell list.
    pub fn apply(&self, cells: &mut [CellConfig]) {
        for (&id, &cio) in self.controlled.iter().zip(&self.cio_db) {
            cells[id.0].cio_db = cio;
        }
    }
}
