//! Available edge parallelism per algorithm step, computed with the
//! sequential reference implementations rather than the machine model.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernels::{
    power_iteration_oracle, seq_bfs_oracle, seq_data_driven_pagerank, PrVariant, UNREACHED,
};
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelismProfile {
    pub algorithm: String,
    pub graph: String,
    pub scale: u32,
    /// Edge operations available at each step.
    pub ops: Vec<u64>,
}

impl ParallelismProfile {
    pub fn peak(&self) -> u64 {
        self.ops.iter().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.ops.iter().sum()
    }

    pub fn with_graph(mut self, graph: impl Into<String>) -> Self {
        self.graph = graph.into();
        self
    }

    pub const CSV_HEADER: [&'static str; 5] = ["step", "ops", "algorithm", "graph", "scale"];

    pub fn write_csv<W: Write>(&self, writer: W, header: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        if header {
            w.write_record(Self::CSV_HEADER)?;
        }
        for (step, ops) in self.ops.iter().enumerate() {
            w.write_record([
                step.to_string(),
                ops.to_string(),
                self.algorithm.clone(),
                self.graph.clone(),
                self.scale.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Push BFS profile: each undirected edge in the source's component is
/// counted once, at the level of its nearer endpoint. The profile has one
/// entry per level, so its length is the source's eccentricity plus one.
pub fn profile_bfs(g: &Graph, source: u32) -> Result<ParallelismProfile> {
    if source as usize >= g.vertex_count() {
        return Err(Error::Parameter(format!(
            "source {source} out of range for {} vertices",
            g.vertex_count()
        )));
    }
    let dist = seq_bfs_oracle(g, source);
    let depth = dist
        .iter()
        .filter(|&&d| d != UNREACHED)
        .max()
        .copied()
        .unwrap_or(0);
    let mut ops = vec![0u64; depth as usize + 1];
    for (u, v) in g.edges() {
        let (a, b) = (dist[u as usize], dist[v as usize]);
        if a != UNREACHED {
            debug_assert!(b != UNREACHED);
            ops[a.min(b) as usize] += 1;
        }
    }
    Ok(ParallelismProfile {
        algorithm: "push_bfs".into(),
        graph: String::new(),
        scale: g.scale(),
        ops,
    })
}

/// PageRank profile to tolerance `tol`: every directed edge per push
/// iteration, or the active-set volume per data-driven round. A converged
/// data-driven run ends with a zero step.
pub fn profile_pr(
    g: &Graph,
    alpha: f64,
    tol: f64,
    variant: PrVariant,
    max_iters: usize,
) -> Result<ParallelismProfile> {
    if !(tol > 0.0) || max_iters == 0 {
        return Err(Error::Parameter(
            "tol must be positive and max_iters at least 1".into(),
        ));
    }
    let (algorithm, ops) = match variant {
        PrVariant::Push => {
            let iters = if g.vertex_count() == 0 {
                0
            } else {
                power_iteration_oracle(g, alpha, tol, max_iters).1
            };
            ("push_pr", vec![g.directed_edge_count(); iters])
        }
        PrVariant::DataDriven => {
            let run = seq_data_driven_pagerank(g, alpha, tol, max_iters);
            let mut ops = run.volumes;
            if run.converged {
                ops.push(0);
            }
            ("dd_pr", ops)
        }
    };
    Ok(ParallelismProfile {
        algorithm: algorithm.into(),
        graph: String::new(),
        scale: g.scale(),
        ops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorFamily, GeneratorParams};
    use crate::kernels::DEFAULT_ALPHA;

    #[test]
    fn path_from_end() {
        let edges: Vec<(u32, u32)> = (1..6).map(|v| (v - 1, v)).collect();
        let g = Graph::undirect(6, &edges).unwrap();
        let p = profile_bfs(&g, 0).unwrap();
        assert_eq!(p.ops, vec![1, 1, 1, 1, 1, 0]);
    }

    #[test]
    fn star_from_center() {
        let edges: Vec<(u32, u32)> = (1..10).map(|v| (0, v)).collect();
        let g = Graph::undirect(10, &edges).unwrap();
        assert_eq!(profile_bfs(&g, 0).unwrap().ops, vec![9, 0]);
    }

    #[test]
    fn bfs_profile_covers_component() {
        let g = generate(&GeneratorParams::new(GeneratorFamily::Rmat, 10, 2)).unwrap();
        let p = profile_bfs(&g, 0).unwrap();
        let dist = seq_bfs_oracle(&g, 0);
        let reached_volume: u64 = (0..g.vertex_count() as u32)
            .filter(|&v| dist[v as usize] != UNREACHED)
            .map(|v| g.degree(v))
            .sum();
        assert_eq!(p.total(), reached_volume / 2);
        let ecc = dist.iter().filter(|&&d| d != UNREACHED).max().unwrap();
        assert_eq!(p.ops.len(), *ecc as usize + 1);
    }

    #[test]
    fn push_profile_is_flat() {
        let g = generate(&GeneratorParams::new(GeneratorFamily::Er, 8, 1)).unwrap();
        let p = profile_pr(&g, DEFAULT_ALPHA, 1e-6, PrVariant::Push, 1000).unwrap();
        assert!(!p.ops.is_empty());
        assert!(p.ops.iter().all(|&o| o == 2 * g.undirected_edge_count()));
    }

    #[test]
    fn data_driven_dominated_by_push() {
        let g = generate(&GeneratorParams::new(GeneratorFamily::Rmat, 12, 1)).unwrap();
        let tol = 1.0 / g.vertex_count() as f64;
        let push = profile_pr(&g, DEFAULT_ALPHA, tol, PrVariant::Push, 1000).unwrap();
        let dd = profile_pr(&g, DEFAULT_ALPHA, tol, PrVariant::DataDriven, 1000).unwrap();
        assert_eq!(*dd.ops.last().unwrap(), 0);
        for (d, p) in dd.ops.iter().zip(&push.ops) {
            assert!(d <= p);
        }
    }

    #[test]
    fn csv_layout() {
        let p = ParallelismProfile {
            algorithm: "push_bfs".into(),
            graph: "er".into(),
            scale: 3,
            ops: vec![4, 2],
        };
        let mut out = Vec::new();
        p.write_csv(&mut out, true).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "step,ops,algorithm,graph,scale\n0,4,push_bfs,er,3\n1,2,push_bfs,er,3\n"
        );
    }

    #[test]
    fn bad_source() {
        assert!(profile_bfs(&Graph::empty(2), 2).is_err());
    }
}
