//! PageRank and BFS variants written as event-driven programs for the lane
//! machine, plus their sequential oracles.
//!
//! | kernel          | strategy                                                   |
//! |-----------------|------------------------------------------------------------|
//! | `push_pr`       | every vertex pushes its scaled score to all neighbors      |
//! | `dd_pr`         | active vertices pull, then push residuals to neighbors     |
//! | `push_bfs`      | level-synchronous push from the distributed frontier       |
//! | `push_pull_bfs` | push, switching to pull on levels with a heavy frontier    |
//! | `lb_push_bfs`   | push driven by a weight-balanced parallel-for, no splitting |

mod bfs;
pub mod oracle;
mod pagerank;
mod scan;
mod view;

pub use bfs::{
    lb_push_bfs, push_bfs, push_pull_bfs, run_bfs, BfsOptions, BfsResult, BfsVariant, FrontierStat,
};
pub use oracle::{
    bfs_levels, l1_distance, power_iteration_oracle, seq_bfs_oracle, seq_data_driven_pagerank,
    SeqDataDriven, UNREACHED,
};
pub use pagerank::{
    data_driven_pagerank, jacobi_iterations, push_pagerank, run_pagerank, PrOptions, PrResult,
    PrVariant,
};
pub use view::GraphView;

use crate::error::Error;
use serde::{Deserialize, Serialize};

pub const DEFAULT_ALPHA: f64 = 0.85;
pub const DEFAULT_SWITCH_FRACTION: f64 = 0.10;

/// Which edges the GTEPS numerator counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeCounting {
    /// Each undirected edge of the traversed component once.
    #[default]
    Undirected,
    /// Every directed edge traversal the kernel performed.
    Directed,
}

impl std::str::FromStr for EdgeCounting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "undirected" => Ok(EdgeCounting::Undirected),
            "directed" => Ok(EdgeCounting::Directed),
            o => Err(Error::Parameter(format!("unknown edge counting '{o}'"))),
        }
    }
}

/// The five kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    PushPr,
    DdPr,
    PushBfs,
    PushPullBfs,
    LbPushBfs,
}

impl KernelKind {
    pub const ALL: [KernelKind; 5] = [
        KernelKind::PushPr,
        KernelKind::DdPr,
        KernelKind::PushBfs,
        KernelKind::PushPullBfs,
        KernelKind::LbPushBfs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::PushPr => "push_pr",
            KernelKind::DdPr => "dd_pr",
            KernelKind::PushBfs => "push_bfs",
            KernelKind::PushPullBfs => "push_pull_bfs",
            KernelKind::LbPushBfs => "lb_push_bfs",
        }
    }

    pub fn is_bfs(self) -> bool {
        matches!(
            self,
            KernelKind::PushBfs | KernelKind::PushPullBfs | KernelKind::LbPushBfs
        )
    }
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.replace('-', "_");
        KernelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .or(match s.as_str() {
                "data_driven_pr" | "data_driven_pagerank" => Some(KernelKind::DdPr),
                "push_pagerank" => Some(KernelKind::PushPr),
                _ => None,
            })
            .ok_or_else(|| Error::Parameter(format!("unknown kernel '{s}'")))
    }
}

/// `edges / seconds / 1e9`, or 0 for an instantaneous run.
pub fn gteps(edges: u64, seconds: f64) -> f64 {
    if seconds > 0.0 {
        edges as f64 / seconds / 1e9
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_names_round_trip() {
        for k in KernelKind::ALL {
            assert_eq!(k.name().parse::<KernelKind>().unwrap(), k);
        }
        assert_eq!(
            "push-pull-bfs".parse::<KernelKind>().unwrap(),
            KernelKind::PushPullBfs
        );
        assert!("sssp".parse::<KernelKind>().is_err());
    }
}
