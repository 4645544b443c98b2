use thiserror::Error;

use crate::tensor::{TensorError, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("invalid crossing parameter η = {0}: {1}")]
    InvalidEta(C64, &'static str),
    #[error("cosh η = {0} is too close to zero; S is undefined")]
    DegenerateS(C64),
    #[error("chain length N = {n} outside the supported range 1..={max}")]
    ChainSize { n: usize, max: usize },
    #[error("inhomogeneity list must have even positive length, got {0}")]
    InhomogeneityCount(usize),
    #[error("boundary parameters degenerate: {0}")]
    DegenerateBoundary(&'static str),
    #[error("Hamiltonian via ln t(u) requires tr K⁺(0) ≠ 0; class II has tr K⁺(0) = 0 and needs a different construction")]
    HamiltonianUnsupported,
    #[error("stagger pattern {pattern} does not match boundary class {class}")]
    PatternMismatch {
        pattern: &'static str,
        class: &'static str,
    },
    #[error("evaluation point u = {0} is singular: {1}")]
    SingularPoint(C64, &'static str),
    #[error("Λ̃ has a pole at u = {0}: Q vanishes there and the Bethe equations do not hold")]
    Pole(C64),
    #[error("no fusion-constant branch satisfies the constraint set (best residual {0:.3e})")]
    NoBranch(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
