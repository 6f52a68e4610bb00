//! Nanosecond-stepped interconnect model: routers with minimal and adaptive
//! routing, unbounded FIFO link queues, and queue/latency statistics.

mod routing;
mod sim;
mod stats;
mod topology;

pub use routing::{compute_routes, RoutingTable};
pub use sim::{saturation_bandwidth, simulate, Injection, NetConfig};
pub use stats::{stats_report, LatencyHistogram, NetStats, QueueSample};
pub use topology::{
    build_topology, random_regular_topology, round_robin_attachments, synthetic, Topology,
    TopologySpec, DEFAULT_HOP_LATENCY_NS,
};
