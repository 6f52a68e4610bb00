//! Desk-scale workbench for studying graph kernels on a fine-grained,
//! event-driven lane architecture.
//!
//! The crate is organised along the evaluation pipeline:
//!
//! * [`graph`] builds the inputs: compressed undirected graphs, the ER, RMAT
//!   and Forest Fire generators, vertex splitting and degree statistics.
//! * [`machine`] is a deterministic discrete-event simulator of the lane
//!   machine (event queues, per-operation cycle costs, message and DRAM
//!   latencies) plus the `parallel_for` primitives kernels are built on.
//! * [`kernels`] holds the five PageRank/BFS variants written as event-driven
//!   programs, together with sequential reference implementations.
//! * [`profiler`] measures the available edge parallelism per step.
//! * [`projection`] fits the per-lane work-rate curve and projects runtimes
//!   and GTEPS to full-size systems.
//! * [`network`] is the nanosecond-stepped interconnect congestion simulator.

pub mod error;
pub mod graph;
pub mod kernels;
pub mod machine;
pub mod network;
pub mod profiler;
pub mod projection;

pub use error::{Error, Result};
pub use graph::{DegreeStats, GeneratorFamily, GeneratorParams, Graph, SplitGraph};
pub use kernels::{BfsResult, KernelKind, PrResult};
pub use machine::{MachineConfig, SimResult};
