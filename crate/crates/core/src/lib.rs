//! Symmetric channel verification (SCV) toolkit.
//!
//! Dense density-matrix machinery for purifying noisy quantum channels through
//! the symmetry they carry. The crate builds the purification supermaps exactly
//! on n-qubit Kraus channels, runs the Monte-Carlo virtual estimator, checks the
//! detectability/correctability conditions by brute force, evaluates the
//! Clifford-purification fidelity bounds, and drives the numerical experiments
//! behind the `scv` command-line tool.
//!
//! Module map:
//! - [`pauli`]: exact Pauli-group arithmetic over the symplectic GF(2) encoding.
//! - [`channels`]: states, Kraus channels, noise models, distances and fidelities.
//! - [`symmetry`]: eigenspace projectors of a symmetric operator and the phase
//!   operator `V_S` built from them.
//! - [`scv`]: detection (post-selection) and correction (feedback) supermaps,
//!   the explicit noisy gadget circuit, and the theorem-condition checkers.
//! - [`vscv`]: quasi-probability decomposition of the detection supermap and the
//!   single-ancilla virtual estimator, plus the idling/`SELECT` error models.
//! - [`clifford`]: magic robustness/weight closed forms, their stabilizer-polytope
//!   brute force, and the worst-case-fidelity bounds for Clifford purification.
//! - [`experiments`]: Hamiltonian builders, sweep runners, and CSV/JSON output.

pub mod channels;
pub mod cli;
pub mod clifford;
pub mod experiments;
pub mod linalg;
pub mod pauli;
pub mod scv;
pub mod symmetry;
pub mod vscv;

use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum ScvError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix of dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("qubit cap exceeded: {got} qubits requested, dense simulation is capped at {cap}")]
    QubitCapExceeded { got: usize, cap: usize },
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("invalid trace {0}")]
    InvalidTrace(f64),
    #[error("invalid probability: {0}")]
    InvalidProbability(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("feedback policy is missing syndrome {0}")]
    PartialPolicy(u64),
    #[error("degenerate denominator (|{0:.3e}| below threshold)")]
    DegenerateDenominator(f64),
    #[error("zero-probability symmetry sector: {0}")]
    ZeroProbabilitySector(String),
    #[error("numerical invariant violated: {0}")]
    InvariantViolation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ScvError>;
