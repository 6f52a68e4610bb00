use super::MachineConfig;
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaneCounters {
    pub tasks_run: u64,
    pub edges_processed: u64,
    pub messages_sent: u64,
    pub dram_ops: u64,
    pub busy_cycles: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub label: String,
    pub start_cycle: u64,
    /// Cycles from the end of the previous phase, barrier included.
    pub cycles: u64,
    /// Edges processed during the phase.
    pub work: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub kernel: String,
    pub graph: String,
    pub scale: u32,
    pub nodes: u32,
    pub lanes_per_node: u32,
    pub clock_hz: f64,
    pub elapsed_cycles: u64,
    pub elapsed_seconds: f64,
    pub lanes: Vec<LaneCounters>,
    pub phases: Vec<PhaseRecord>,
}

impl SimResult {
    pub(crate) fn new(
        config: &MachineConfig,
        elapsed_cycles: u64,
        lanes: Vec<LaneCounters>,
        phases: Vec<PhaseRecord>,
    ) -> Self {
        SimResult {
            kernel: String::new(),
            graph: String::new(),
            scale: 0,
            nodes: config.node_count,
            lanes_per_node: config.lanes_per_node,
            clock_hz: config.clock_hz,
            elapsed_cycles,
            elapsed_seconds: elapsed_cycles as f64 / config.clock_hz,
            lanes,
            phases,
        }
    }

    pub fn total_lanes(&self) -> u32 {
        self.nodes * self.lanes_per_node
    }

    pub fn total_edges_processed(&self) -> u64 {
        self.lanes.iter().map(|l| l.edges_processed).sum()
    }

    pub fn total_messages(&self) -> u64 {
        self.lanes.iter().map(|l| l.messages_sent).sum()
    }

    pub fn total_tasks(&self) -> u64 {
        self.lanes.iter().map(|l| l.tasks_run).sum()
    }

    pub fn max_busy_cycles(&self) -> u64 {
        self.lanes.iter().map(|l| l.busy_cycles).max().unwrap_or(0)
    }

    pub fn mean_busy_cycles(&self) -> f64 {
        if self.lanes.is_empty() {
            return 0.0;
        }
        self.lanes.iter().map(|l| l.busy_cycles as f64).sum::<f64>() / self.lanes.len() as f64
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub const CSV_HEADER: [&'static str; 9] = [
        "kernel", "graph", "scale", "nodes", "lanes", "phase", "work", "cycles", "seconds",
    ];

    /// One CSV row per phase.
    pub fn write_phase_csv<W: Write>(&self, writer: W, header: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        if header {
            w.write_record(Self::CSV_HEADER)?;
        }
        for p in &self.phases {
            w.write_record([
                self.kernel.clone(),
                self.graph.clone(),
                self.scale.to_string(),
                self.nodes.to_string(),
                self.total_lanes().to_string(),
                p.label.clone(),
                p.work.to_string(),
                p.cycles.to_string(),
                format!("{:e}", p.cycles as f64 / self.clock_hz),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
