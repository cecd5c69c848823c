//! Inflated graph states: reference experiments, exact stabilizer and
//! state-vector oracles, d-LHV* parity certificates and SWAP-isometry
//! self-testing checks.

pub mod commands;
pub mod graph;
pub mod io;
pub mod adversary;
pub mod experiments;
pub mod pauli;
pub mod selftest;
pub mod simulator;

pub use graph::{inflate, Graph, GraphError, InflatedGraph, Vertex};
pub use pauli::{Pauli, PauliError, PauliString, StabilizerTableau};
