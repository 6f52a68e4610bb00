use super::fit::WorkRateModel;
use super::workload::WorkloadCharacterization;
use crate::error::{Error, Result};
use crate::kernels::KernelKind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    pub p: u32,
    pub lanes_per_node: u32,
    pub dram_roundtrip_s: f64,
    pub split_size: u64,
    pub dram_bytes_per_node: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            p: 1,
            lanes_per_node: 2048,
            dram_roundtrip_s: 1.25e-6,
            split_size: crate::graph::DEFAULT_SPLIT_SIZE,
            // 8 PB spread over 16,384 nodes.
            dram_bytes_per_node: (1u64 << 39) as f64,
        }
    }
}

impl SystemParams {
    pub fn with_nodes(p: u32) -> Self {
        SystemParams {
            p,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.lanes_per_node == 0 || self.split_size == 0 {
            return Err(Error::Parameter(
                "p, lanes_per_node and split_size must be at least 1".into(),
            ));
        }
        if !(self.dram_roundtrip_s >= 0.0) || !(self.dram_bytes_per_node > 0.0) {
            return Err(Error::Parameter(
                "DRAM parameters must be non-negative".into(),
            ));
        }
        Ok(())
    }

    fn lanes(&self) -> f64 {
        self.p as f64 * self.lanes_per_node as f64
    }

    /// Depth of the reduction tree over one vertex's copies, at least 0.
    fn split_levels(&self, max_degree: f64) -> f64 {
        (max_degree / (self.split_size as f64 * self.p as f64))
            .log2()
            .max(0.0)
    }

    fn fits(&self, edges: f64, vertices: f64, vectors: f64) -> bool {
        8.0 * 2.0 * edges + 8.0 * vertices * vectors <= self.p as f64 * self.dram_bytes_per_node
    }
}

/// How the BFS sync term combines with the traversal term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BfsBracket {
    /// Traversal counted once, sync paid per frontier.
    #[default]
    TraversalOnce,
    /// Both terms multiplied by the frontier count.
    Literal,
}

impl std::str::FromStr for BfsBracket {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self, crate::Error> {
        match s {
            "traversal_once" => Ok(BfsBracket::TraversalOnce),
            "literal" => Ok(BfsBracket::Literal),
            o => Err(crate::Error::Parameter(format!("unknown BFS bracket '{o}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub runtime_s: f64,
    pub gteps: f64,
    pub effective_gteps: f64,
    pub feasible: bool,
}

/// PageRank runtime at `scale` on `sys`. With `original`, the effective
/// rate credits that workload's work to this run's time.
pub fn project_pr(
    model: &WorkRateModel,
    workload: &WorkloadCharacterization,
    sys: &SystemParams,
    scale: u32,
    original: Option<&WorkloadCharacterization>,
) -> Result<Projection> {
    sys.validate()?;
    let w = workload.at(scale);
    let per_lane = w.work / (w.iter * sys.lanes());
    let edge_time = per_lane / model.rate(per_lane);
    let sync = sys.dram_roundtrip_s * (sys.split_levels(w.max_degree) + (sys.p as f64).log2());
    let runtime = w.iter * (edge_time + sync);
    let gteps = w.work / runtime / 1e9;
    let effective_gteps = original.map_or(gteps, |o| o.at(scale).work / runtime / 1e9);
    Ok(Projection {
        runtime_s: runtime,
        gteps,
        effective_gteps,
        feasible: sys.fits(w.edges, w.vertices, 3.0),
    })
}

/// BFS runtime at `scale` on `sys`.
pub fn project_bfs(
    model: &WorkRateModel,
    workload: &WorkloadCharacterization,
    sys: &SystemParams,
    scale: u32,
    bracket: BfsBracket,
) -> Result<Projection> {
    sys.validate()?;
    let w = workload.at(scale);
    let per_lane = (2.0 * w.edges + w.vertices) / sys.lanes();
    let traverse = per_lane / model.rate(per_lane);
    let sync =
        sys.dram_roundtrip_s * (sys.split_levels(w.max_degree) + 2.0 * (sys.p as f64).log2());
    let runtime = match bracket {
        BfsBracket::TraversalOnce => traverse + sync * w.frontiers,
        BfsBracket::Literal => (traverse + sync) * w.frontiers,
    };
    let gteps = w.edges / runtime / 1e9;
    Ok(Projection {
        runtime_s: runtime,
        gteps,
        effective_gteps: gteps,
        feasible: sys.fits(w.edges, w.vertices, 2.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub algorithm: String,
    pub family: String,
    pub scale: u32,
    pub nodes: u32,
    pub runtime_s: f64,
    pub gteps: f64,
    pub effective_gteps: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions<'a> {
    pub original: Option<&'a WorkloadCharacterization>,
    pub bracket: BfsBracket,
}

/// Projects every `(scale, nodes)` pair, scales outermost.
pub fn sweep(
    model: &WorkRateModel,
    workload: &WorkloadCharacterization,
    base: &SystemParams,
    node_counts: &[u32],
    scales: &[u32],
    opts: &SweepOptions<'_>,
) -> Result<Vec<ProjectionRow>> {
    let kind: KernelKind = workload.algorithm.parse()?;
    let cells: Vec<(u32, u32)> = scales
        .iter()
        .flat_map(|&s| node_counts.iter().map(move |&p| (s, p)))
        .collect();
    cells
        .par_iter()
        .map(|&(scale, p)| {
            let sys = SystemParams { p, ..base.clone() };
            let r = if kind.is_bfs() {
                project_bfs(model, workload, &sys, scale, opts.bracket)?
            } else {
                project_pr(model, workload, &sys, scale, opts.original)?
            };
            Ok(ProjectionRow {
                algorithm: workload.algorithm.clone(),
                family: workload.family.clone(),
                scale,
                nodes: p,
                runtime_s: r.runtime_s,
                gteps: r.gteps,
                effective_gteps: r.effective_gteps,
                feasible: r.feasible,
            })
        })
        .collect()
}

pub fn write_projection_csv<W: Write>(writer: W, rows: &[ProjectionRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LogLinearFit;

    fn constant(v: f64) -> LogLinearFit {
        LogLinearFit {
            slope: 0.0,
            intercept: v.log2(),
        }
    }

    fn workload(
        algorithm: &str,
        work: f64,
        iter: f64,
        max_degree: f64,
        frontiers: f64,
        edges: f64,
        vertices: f64,
    ) -> WorkloadCharacterization {
        WorkloadCharacterization {
            algorithm: algorithm.into(),
            family: "rmat".into(),
            work: constant(work),
            iter: constant(iter),
            max_degree: constant(max_degree),
            frontiers: constant(frontiers),
            edges: constant(edges),
            vertices: constant(vertices),
        }
    }

    fn flat(rate: f64) -> WorkRateModel {
        WorkRateModel::new(1e30, 1e30, 1.0, rate)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs()
    }

    #[test]
    fn pr_constant_rate_one_iteration() {
        let w = workload("push_pr", 1e9, 1.0, 1.0, 1.0, 1e8, 1e6);
        let sys = SystemParams {
            p: 1,
            dram_roundtrip_s: 0.0,
            ..Default::default()
        };
        let r = project_pr(&flat(2e8), &w, &sys, 30, None).unwrap();
        assert!(close(r.runtime_s, 1e9 / (2048.0 * 2e8)));
        assert_eq!(r.gteps, r.effective_gteps);
    }

    #[test]
    fn pr_hand_workload() {
        // work 2^20, 2 iterations, max degree = split_size·p, p = 4.
        let w = workload("push_pr", 1048576.0, 2.0, 4096.0, 1.0, 1e5, 1e4);
        let sys = SystemParams {
            p: 4,
            split_size: 1024,
            ..Default::default()
        };
        let m = WorkRateModel::new(3.0e6, 50.0, 0.9, 1.0e8);
        let r = project_pr(&m, &w, &sys, 20, None).unwrap();
        let x = 1048576.0 / (2.0 * 4.0 * 2048.0);
        let f = 3.0e6 * x / (1.0 + (x / 50.0f64).powf(0.9));
        let t = 2.0 * (x / f.min(1.0e8) + 1.25e-6 * (0.0 + 2.0));
        assert!(close(r.runtime_s, t), "{} {t}", r.runtime_s);
    }

    #[test]
    fn bfs_hand_values() {
        let e = 4194304.0;
        let v = 1048576.0;
        let w = workload("push_bfs", 2.0 * e + v, 8.0, 1e6, 8.0, e, v);
        let sys = SystemParams {
            p: 16,
            ..Default::default()
        };
        let m = WorkRateModel::new(2.0e6, 300.0, 1.0, 4.0e8);
        let r = project_bfs(&m, &w, &sys, 22, BfsBracket::TraversalOnce).unwrap();
        let x = (2.0 * e + v) / (16.0 * 2048.0);
        let rate = (2.0e6 * x / (1.0 + x / 300.0)).min(4.0e8);
        let sync = 1.25e-6 * ((1e6f64 / (1024.0 * 16.0)).log2() + 2.0 * 4.0);
        let t = x / rate + sync * 8.0;
        assert!(close(r.runtime_s, t));
        assert!(close(r.gteps, e / t / 1e9));
        let lit = project_bfs(&m, &w, &sys, 22, BfsBracket::Literal).unwrap();
        assert!(close(lit.runtime_s, (x / rate + sync) * 8.0));
    }

    #[test]
    fn bfs_single_frontier_constant_rate() {
        let w = workload("push_bfs", 1.0, 1.0, 1.0, 1.0, 1e9, 1e8);
        let sys = SystemParams {
            p: 8,
            dram_roundtrip_s: 0.0,
            ..Default::default()
        };
        let r = project_bfs(&flat(1e8), &w, &sys, 30, BfsBracket::TraversalOnce).unwrap();
        assert!(close(r.runtime_s, (2e9 + 1e8) / (8.0 * 2048.0 * 1e8)));
    }

    #[test]
    fn effective_uses_original_work() {
        let dd = workload("dd_pr", 1e9, 4.0, 1.0, 4.0, 1e8, 1e6);
        let push = workload("push_pr", 4e9, 10.0, 1.0, 10.0, 1e8, 1e6);
        let r = project_pr(
            &flat(1e8),
            &dd,
            &SystemParams::with_nodes(2),
            30,
            Some(&push),
        )
        .unwrap();
        assert!(close(r.effective_gteps / r.gteps, 4.0));
    }

    #[test]
    fn feasibility_boundary() {
        let sys = SystemParams {
            p: 2,
            dram_bytes_per_node: 1000.0,
            ..Default::default()
        };
        // 16·E + 8·3·V = 2000 exactly.
        let w = workload("push_pr", 1.0, 1.0, 1.0, 1.0, 50.0, 50.0);
        assert!(project_pr(&flat(1.0), &w, &sys, 10, None).unwrap().feasible);
        let w = workload("push_pr", 1.0, 1.0, 1.0, 1.0, 51.0, 50.0);
        assert!(!project_pr(&flat(1.0), &w, &sys, 10, None).unwrap().feasible);
    }

    #[test]
    fn sweep_cells_match_single_projections() {
        let w = workload("push_bfs", 1.0, 1.0, 1e7, 6.0, 1e10, 1e9);
        let m = WorkRateModel::new(1e6, 1e3, 1.0, 5e8);
        let base = SystemParams::default();
        let rows = sweep(
            &m,
            &w,
            &base,
            &[32, 64],
            &[28, 30],
            &SweepOptions::default(),
        )
        .unwrap();
        assert_eq!(rows.len(), 4);
        let single = project_bfs(
            &m,
            &w,
            &SystemParams::with_nodes(64),
            30,
            BfsBracket::TraversalOnce,
        )
        .unwrap();
        let row = rows
            .iter()
            .find(|r| r.nodes == 64 && r.scale == 30)
            .unwrap();
        assert_eq!(row.runtime_s, single.runtime_s);
        let mut out = Vec::new();
        write_projection_csv(&mut out, &rows).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with(
            "algorithm,family,scale,nodes,runtime_s,gteps,effective_gteps,feasible\n"
        ));
    }

    #[test]
    fn gteps_grows_with_nodes_above_knee() {
        let w = workload("push_pr", 1e13, 10.0, 1e6, 10.0, 5e11, 1e10);
        let m = WorkRateModel::new(1e6, 100.0, 1.0, 1e8);
        let mut prev = 0.0;
        for p in [32, 64, 128, 256, 512] {
            let r = project_pr(&m, &w, &SystemParams::with_nodes(p), 34, None).unwrap();
            assert!(r.gteps >= prev);
            prev = r.gteps;
        }
    }
}
