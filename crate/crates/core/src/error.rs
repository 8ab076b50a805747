use thiserror::Error;

/// Everything that can go wrong inside the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BfnError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid gain: {0}")]
    InvalidGain(String),

    #[error("invalid equation: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested (equation, gain) pairing has no well-posed one-step BFN.
    /// `anchor` names the result that explains the refusal.
    #[error("unsupported regime ({anchor}): {reason}")]
    UnsupportedRegime { anchor: String, reason: String },

    /// Backward modal recovery would need amplification beyond the cap.
    #[error(
        "truncation: {refused_modes} modes refused, carrying {refused_energy_fraction:.3e} of the energy"
    )]
    Truncation {
        refused_modes: usize,
        refused_energy_fraction: f64,
    },

    /// Characteristic curves crossed (or touched) before the final time.
    #[error("characteristics cross at t = {time:.6} near foot index {foot} (shock reached)")]
    Crossing { time: f64, foot: usize },

    #[error("stability guard failed: courant number {courant:.4} exceeds {limit}")]
    Stability { courant: f64, limit: f64 },

    #[error("heat variable not positive at node {index} (value {value:e})")]
    Positivity { index: usize, value: f64 },

    #[error("no oracle for {0}")]
    NoOracle(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl BfnError {
    /// The result that explains why a run was refused, where one applies.
    pub fn anchor(&self) -> Option<&str> {
        match self {
            BfnError::UnsupportedRegime { anchor, .. } => Some(anchor),
            BfnError::Truncation { .. } => Some("Theorem 1 (backward diffusion is ill-posed)"),
            BfnError::Crossing { .. } => Some("Theorem 6 (smooth solutions only, before the shock)"),
            BfnError::Positivity { .. } => Some("Proposition 3 (Cole-Hopf needs v > 0)"),
            _ => None,
        }
    }
}

impl From<std::io::Error> for BfnError {
    fn from(e: std::io::Error) -> Self {
        BfnError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for BfnError {
    fn from(e: serde_json::Error) -> Self {
        BfnError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, BfnError>;
