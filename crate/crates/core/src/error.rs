use thiserror::Error;

/// Errors shared by the simulation and analysis modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("no coincidences for setting pair ({alpha1} rad, {alpha2} rad)")]
    NoCoincidences { alpha1: f64, alpha2: f64 },
    #[error("correlation undefined: all counts are zero")]
    ZeroCounts,
    #[error("no records carry the requested setting")]
    EmptySelection,
    #[error("degenerate fit model: every model value is zero")]
    DegenerateModel,
    #[error("station logs differ in length: {left} vs {right}")]
    LogLengthMismatch { left: usize, right: usize },
    #[error("time-window density vanished: every quadrature weight is zero")]
    VanishingDensity,
    #[error("quadrature node hits a double zero of the delay scales; change grid_points")]
    SingularQuadratureNode,
}

pub type Result<T> = std::result::Result<T, Error>;
