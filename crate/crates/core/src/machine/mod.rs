//! Discrete-event model of the lane machine.
//!
//! Lanes execute short tasks one at a time from their own queues. A task is
//! charged its declared instruction budget plus fixed costs for every send
//! and DRAM operation it issues; messages and DRAM replies arrive after fixed
//! latencies that depend on whether the other side is on the same node.

mod cache;
mod engine;
mod primitives;
mod result;

pub use cache::{CacheOutcome, SoftwareCache};
pub use engine::{run_program, LaneCtx, PhaseCtx, Program};
pub use primitives::{lb_split, lb_tree, LbAssignment, LbNode, SPLIT_HANDLER};
pub use result::{LaneCounters, PhaseRecord, SimResult};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Cycle costs charged on the issuing lane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostTable {
    pub thread_create: u32,
    pub thread_yield: u32,
    pub thread_dealloc: u32,
    pub send_message: u32,
    pub dram_issue: u32,
}

impl Default for CostTable {
    fn default() -> Self {
        CostTable {
            thread_create: 0,
            thread_yield: 1,
            thread_dealloc: 1,
            send_message: 2,
            dram_issue: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LatencyTable {
    pub local_dram_roundtrip_ns: f64,
    pub remote_dram_roundtrip_ns: f64,
    pub local_message_ns: f64,
    pub remote_message_ns: f64,
}

impl Default for LatencyTable {
    fn default() -> Self {
        LatencyTable {
            local_dram_roundtrip_ns: 150.0,
            remote_dram_roundtrip_ns: 1250.0,
            local_message_ns: 150.0,
            remote_message_ns: 500.0,
        }
    }
}

/// Instruction budgets of the kernel handlers, in cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HandlerBudgets {
    /// Applying one pushed update at its destination.
    pub edge_update: u32,
    /// Per-vertex work such as reading an offset pair or applying a score.
    pub vertex_task: u32,
    /// Fixed part of handling one returned chunk of neighbor ids.
    pub chunk_base: u32,
    /// Combining one partial value in a reduction or broadcast tree.
    pub reduce: u32,
}

impl Default for HandlerBudgets {
    fn default() -> Self {
        HandlerBudgets {
            edge_update: 10,
            vertex_task: 10,
            chunk_base: 4,
            reduce: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MachineConfig {
    pub node_count: u32,
    pub lanes_per_node: u32,
    pub clock_hz: f64,
    pub hw_threads_per_lane: u32,
    pub scratchpad_bytes: u64,
    pub costs: CostTable,
    pub latency: LatencyTable,
    pub budgets: HandlerBudgets,
}

impl Default for MachineConfig {
    fn default() -> Self {
        MachineConfig {
            node_count: 1,
            lanes_per_node: 2048,
            clock_hz: 2e9,
            hw_threads_per_lane: 128,
            scratchpad_bytes: 65536,
            costs: CostTable::default(),
            latency: LatencyTable::default(),
            budgets: HandlerBudgets::default(),
        }
    }
}

impl MachineConfig {
    pub fn with_lanes(node_count: u32, lanes_per_node: u32) -> Self {
        MachineConfig {
            node_count,
            lanes_per_node,
            ..Default::default()
        }
    }

    /// Configuration with `total` lanes, filling nodes of up to 2048 lanes.
    pub fn for_total_lanes(total: u32) -> Self {
        let per_node = total.min(2048).max(1);
        Self::with_lanes(total.div_ceil(per_node).max(1), per_node)
    }

    pub fn total_lanes(&self) -> u32 {
        self.node_count * self.lanes_per_node
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count == 0 || self.lanes_per_node == 0 || self.hw_threads_per_lane == 0 {
            return Err(Error::Parameter(
                "node, lane and thread counts must be at least 1".into(),
            ));
        }
        if (self.node_count as u64) * (self.lanes_per_node as u64) > u32::MAX as u64 / 2 {
            return Err(Error::Parameter("too many lanes".into()));
        }
        if !(self.clock_hz > 0.0) {
            return Err(Error::Parameter("clock_hz must be positive".into()));
        }
        if self.scratchpad_bytes < 16 {
            return Err(Error::Parameter(
                "scratchpad must hold at least one entry".into(),
            ));
        }
        let l = &self.latency;
        for (name, x) in [
            ("local_dram_roundtrip_ns", l.local_dram_roundtrip_ns),
            ("remote_dram_roundtrip_ns", l.remote_dram_roundtrip_ns),
            ("local_message_ns", l.local_message_ns),
            ("remote_message_ns", l.remote_message_ns),
        ] {
            if !(x >= 0.0) {
                return Err(Error::Parameter(format!("{name} must be non-negative")));
            }
        }
        Ok(())
    }

    pub fn ns_to_cycles(&self, ns: f64) -> u64 {
        (ns * self.clock_hz / 1e9).round() as u64
    }

    pub fn local_message_cycles(&self) -> u64 {
        self.ns_to_cycles(self.latency.local_message_ns)
    }

    pub fn remote_message_cycles(&self) -> u64 {
        self.ns_to_cycles(self.latency.remote_message_ns)
    }

    pub fn local_dram_cycles(&self) -> u64 {
        self.ns_to_cycles(self.latency.local_dram_roundtrip_ns)
    }

    pub fn remote_dram_cycles(&self) -> u64 {
        self.ns_to_cycles(self.latency.remote_dram_roundtrip_ns)
    }

    /// Message latency between two lanes.
    pub fn message_cycles(&self, from: u32, to: u32) -> u64 {
        if from == to {
            0
        } else if from / self.lanes_per_node == to / self.lanes_per_node {
            self.local_message_cycles()
        } else {
            self.remote_message_cycles()
        }
    }

    /// Global synchronization between phases: a reduction tree over nodes,
    /// each level a remote round trip, plus one local notification.
    pub fn barrier_cycles(&self) -> u64 {
        let levels = (self.node_count as f64).log2().ceil() as u64;
        levels * self.remote_dram_cycles() + self.local_message_cycles()
    }

    /// Lane that owns vertex `v`.
    #[inline]
    pub fn lane_of(&self, v: u64) -> u32 {
        map_vertex(v, self).1
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: MachineConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Hash placement of a vertex: `(node, global lane)`.
///
/// Each block of `L` consecutive ids is rotated by a hash of the block index,
/// so any id range is spread evenly while placement still looks random.
#[inline]
pub fn map_vertex(v: u64, config: &MachineConfig) -> (u32, u32) {
    let lanes = config.total_lanes() as u64;
    let lane = ((v % lanes + splitmix64(v / lanes) % lanes) % lanes) as u32;
    (lane / config.lanes_per_node, lane)
}

/// A unit of work queued on a lane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Task {
    pub handler: u16,
    /// Instruction budget charged when the task runs.
    pub cost: u32,
    pub payload: [u64; 4],
}

impl Task {
    pub fn new(handler: u16, cost: u32, payload: [u64; 4]) -> Self {
        Task {
            handler,
            cost,
            payload,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_lane_maps_everything_to_zero() {
        let cfg = MachineConfig::with_lanes(1, 1);
        for v in 0..1000 {
            assert_eq!(map_vertex(v, &cfg), (0, 0));
        }
    }

    #[test]
    fn placement_is_balanced() {
        let cfg = MachineConfig::with_lanes(2, 2048);
        let mut load = vec![0u32; 4096];
        for v in 0..1u64 << 20 {
            load[map_vertex(v, &cfg).1 as usize] += 1;
        }
        let mean = (1u64 << 20) as f64 / 4096.0;
        let max = *load.iter().max().unwrap() as f64;
        assert!(max <= 1.25 * mean);
    }

    #[test]
    fn placement_is_stable_and_consistent() {
        let cfg = MachineConfig::with_lanes(4, 64);
        for v in [0u64, 17, 999_999] {
            let (node, lane) = map_vertex(v, &cfg);
            assert_eq!((node, lane), map_vertex(v, &cfg));
            assert_eq!(node, lane / 64);
            assert!(lane < 256);
        }
    }

    #[test]
    fn latency_conversion() {
        let cfg = MachineConfig::with_lanes(2, 4);
        assert_eq!(cfg.message_cycles(1, 1), 0);
        assert_eq!(cfg.message_cycles(0, 3), 300);
        assert_eq!(cfg.message_cycles(0, 4), 1000);
        assert_eq!(cfg.local_dram_cycles(), 300);
        assert_eq!(cfg.remote_dram_cycles(), 2500);
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let cfg = MachineConfig::with_lanes(8, 256);
        assert_eq!(MachineConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        let partial =
            MachineConfig::from_toml("node_count = 3\n[latency]\nremote_message_ns = 400\n")
                .unwrap();
        assert_eq!(partial.node_count, 3);
        assert_eq!(partial.lanes_per_node, 2048);
        assert_eq!(partial.latency.remote_message_ns, 400.0);
        assert!(MachineConfig::from_toml("node_count = 0").is_err());
    }

    #[test]
    fn total_lane_configs() {
        let c = MachineConfig::for_total_lanes(64);
        assert_eq!((c.node_count, c.lanes_per_node), (1, 64));
        let c = MachineConfig::for_total_lanes(4096);
        assert_eq!((c.node_count, c.lanes_per_node), (2, 2048));
    }
}
