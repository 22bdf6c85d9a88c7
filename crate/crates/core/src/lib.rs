//! Path-based power flow with transmission expansion under demand
//! uncertainty: instance parsing, path enumeration, deterministic and robust
//! model builders, and a brute-force worst-case oracle.

pub mod formulations;
pub mod grid;
pub mod oracle;
pub mod paths;

use robopf_milp::{ModelError, Status};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate bus id {0}")]
    DuplicateBus(usize),
    #[error("bus ids must run 1..n; {0} is missing")]
    NonContiguous(usize),
    #[error("line {line}: unknown bus {bus}")]
    UnknownBus { bus: usize, line: usize },
    #[error("disconnected load at bus {0}")]
    DisconnectedLoad(usize),
    #[error("network has no generator")]
    NoGenerator,
    #[error("missing cost for generator at bus {0}")]
    MissingCost(usize),
    #[error("{0}")]
    Invalid(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("instance infeasible: no admissible path reaches load {0}")]
    NoPath(usize),
    #[error("vertex count {0} exceeds the enumeration limit")]
    TooManyVertices(f64),
    #[error("{0} candidate lines exceed the brute-force limit")]
    TooManyCandidates(usize),
    #[error("uncertainty set `{0}` not configured")]
    MissingSet(&'static str),
    #[error("dual eta on branch {0} at its bound; increase M_eta")]
    EtaAtBound(usize),
    #[error("recourse primal and dual objectives differ by {0}")]
    DualityGap(f64),
    #[error("solve ended with status {0}")]
    Solve(Status),
    #[error(transparent)]
    Model(#[from] ModelError),
}
