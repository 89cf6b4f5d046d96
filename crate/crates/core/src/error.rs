use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("simulation diverged at step {step} (t = {time:.6} s): {detail}")]
    Divergence {
        step: u64,
        time: f64,
        detail: String,
    },

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
