use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of a function or operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// `J_order(x)` is numerically zero, so a ratio with it in the
    /// denominator is a pole. Root searches treat this as a bracket edge.
    #[error("pole: J_{order}({x}) vanishes")]
    Pole { order: u32, x: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("root refinement failed in [{lo}, {hi}]: {reason}")]
    NoConvergence { lo: f64, hi: f64, reason: String },

    #[error("no bound mode with |m| = {m_abs} at radial index {radial_index}")]
    Cutoff { m_abs: u32, radial_index: usize },

    /// A result violated an invariant that holds for every genuine mode.
    #[error("internal consistency: {0}")]
    Internal(String),
}
