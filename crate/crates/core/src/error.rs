use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("index {index} out of range (size {size})")]
    OutOfRange { index: usize, size: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("enumeration budget exceeded: {what} needs 2^{bits} items, cap is 2^{cap}")]
    Budget { what: &'static str, bits: u32, cap: u32 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("linear program hit the iteration cap of {0} pivots")]
    IterationLimit(usize),

    #[error("linear program is numerically unstable: {0}")]
    Numerical(String),

    #[error(
        "certification failed: LP reported feasible but the exhaustive check disagrees \
         ({detail}; feas_tol={feas_tol:e}, tol={tol:e})"
    )]
    Certification { detail: String, feas_tol: f64, tol: f64 },

    #[error("Hamiltonian does not encode the circuit (solution gap {gap})")]
    NotEncoding { gap: f64 },

    #[error("spurious local minimum at output state {state} for input {input}")]
    SpuriousMinimum { input: String, state: String },

    #[error("invalid spanning tree: {0}")]
    InvalidTree(String),

    #[error("degeneracy elimination stalled with D = {0}")]
    GenericityStalled(usize),

    #[error("greedy descent exceeded the step cap of {0}")]
    StepCap(usize),

    #[error("not a Voronoi solution")]
    NotVoronoiSolution,

    #[error("embedding is not injective on the output hypercube")]
    NotInjective,

    #[error("random auxiliary search exhausted {0} trials")]
    TrialsExhausted(usize),

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
