use thiserror::Error;

use crate::geometry::{CellId, Region};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid radio environment: {field} {reason}")]
    InvalidEnvironment { field: &'static str, reason: String },
    #[error("at least one cell is required")]
    NoCells,
    #[error("map bounds must be finite with max > min")]
    InvalidBounds,
    #[error("no pixel of the map is served by a traffic-carrying cell")]
    EmptyRegion,
    #[error("traffic layer region {0:?} has no pixels")]
    EmptyLayerRegion(Region),
    #[error("coverage hole at ({x:.1}, {y:.1}): zero peak rate from cell {cell}")]
    CoverageHole { x: f64, y: f64, cell: CellId },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoadError {
    #[error("measurement window is empty")]
    EmptyWindow,
    #[error("cell {0} has no pixel in the attachment map")]
    NoPixels(CellId),
    #[error("cell {0} has a pixel with zero peak rate")]
    ZeroPeakRate(CellId),
    #[error("invalid analytic scenario: {0}")]
    InvalidScenario(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SonError {
    #[error("invalid SON configuration: {0}")]
    InvalidConfig(String),
    #[error("no macro cell available as reference for cell {0}")]
    NoMacro(CellId),
    #[error("missing load report for cell {0}")]
    MissingReport(CellId),
    #[error("load report {load} for cell {cell} is outside [0, 1]")]
    LoadOutOfRange { cell: CellId, load: f64 },
}

/// Scenario configuration errors, with the source line when it can be located.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }

    pub fn at(line: Option<usize>, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Son(#[from] SonError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error stems from the scenario description rather than
    /// from the environment or a bug.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::Geometry(_) => true,
            Error::Son(e) => matches!(e, SonError::InvalidConfig(_) | SonError::NoMacro(_)),
            Error::Load(_) | Error::Io(_) => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
