use crate::error::{Error, Result};
use crate::graph::{Graph, LogLinearFit};
use crate::kernels::{
    power_iteration_oracle, seq_bfs_oracle, seq_data_driven_pagerank, KernelKind, UNREACHED,
};
use serde::{Deserialize, Serialize};

/// Workload quantities measured on one generated graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadMeasurement {
    pub scale: u32,
    /// Total work: edge operations for PageRank, `2·edges + vertices` for BFS.
    pub work: f64,
    pub iterations: f64,
    pub max_degree: f64,
    pub frontiers: f64,
    /// Undirected edges.
    pub edges: f64,
    pub vertices: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureOptions {
    pub alpha: f64,
    /// PageRank tolerance; `None` means `1/n`.
    pub tol: Option<f64>,
    /// Weight of the active-vertex count in data-driven work.
    pub active_vertex_weight: f64,
    pub max_iters: usize,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions {
            alpha: crate::kernels::DEFAULT_ALPHA,
            tol: None,
            active_vertex_weight: 1.0,
            max_iters: 1000,
        }
    }
}

/// Measures the projection inputs of `kernel` on `g` with the sequential
/// reference implementations. BFS starts from the highest-degree vertex.
pub fn measure_workload(
    g: &Graph,
    kernel: KernelKind,
    opts: &MeasureOptions,
) -> Result<WorkloadMeasurement> {
    let n = g.vertex_count();
    if n == 0 || g.undirected_edge_count() == 0 {
        return Err(Error::InsufficientData("graph has no edges".into()));
    }
    let tol = opts.tol.unwrap_or(1.0 / n as f64);
    let edges = g.undirected_edge_count() as f64;
    let (work, iterations, frontiers) = match kernel {
        KernelKind::PushPr => {
            let it = power_iteration_oracle(g, opts.alpha, tol, opts.max_iters).1 as f64;
            (it * 2.0 * edges, it, it)
        }
        KernelKind::DdPr => {
            let run = seq_data_driven_pagerank(g, opts.alpha, tol, opts.max_iters);
            let volume: u64 = run.volumes.iter().sum();
            let active: u64 = run.active_counts.iter().sum();
            let it = run.iterations as f64;
            (
                volume as f64 + opts.active_vertex_weight * active as f64,
                it,
                it,
            )
        }
        KernelKind::PushBfs | KernelKind::PushPullBfs | KernelKind::LbPushBfs => {
            let source = (0..n as u32)
                .max_by_key(|&v| (g.degree(v), std::cmp::Reverse(v)))
                .unwrap_or(0);
            let dist = seq_bfs_oracle(g, source);
            let levels = dist
                .iter()
                .filter(|&&d| d != UNREACHED)
                .max()
                .map_or(1, |&d| d + 1) as f64;
            (2.0 * edges + n as f64, levels, levels)
        }
    };
    Ok(WorkloadMeasurement {
        scale: g.scale(),
        work,
        iterations,
        max_degree: g.max_degree() as f64,
        frontiers,
        edges,
        vertices: n as f64,
    })
}

/// Log-linear extrapolations of each workload quantity in the scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadCharacterization {
    pub algorithm: String,
    pub family: String,
    pub work: LogLinearFit,
    pub iter: LogLinearFit,
    pub max_degree: LogLinearFit,
    pub frontiers: LogLinearFit,
    pub edges: LogLinearFit,
    pub vertices: LogLinearFit,
}

/// Workload quantities at one scale, measured or extrapolated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkloadAt {
    pub work: f64,
    pub iter: f64,
    pub max_degree: f64,
    pub frontiers: f64,
    pub edges: f64,
    pub vertices: f64,
}

impl WorkloadCharacterization {
    pub fn at(&self, scale: u32) -> WorkloadAt {
        let s = scale as f64;
        WorkloadAt {
            work: self.work.eval(s),
            iter: self.iter.eval(s),
            max_degree: self.max_degree.eval(s),
            frontiers: self.frontiers.eval(s),
            edges: self.edges.eval(s),
            vertices: self.vertices.eval(s),
        }
    }
}

/// Fits every quantity against scale; needs at least three distinct scales.
pub fn characterize_workload(
    algorithm: &str,
    family: &str,
    measured: &[WorkloadMeasurement],
) -> Result<WorkloadCharacterization> {
    let mut scales: Vec<u32> = measured.iter().map(|m| m.scale).collect();
    scales.sort_unstable();
    scales.dedup();
    if scales.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "workload needs measurements at 3 or more scales, got {}",
            scales.len()
        )));
    }
    let xs: Vec<f64> = measured.iter().map(|m| m.scale as f64).collect();
    let fit = |f: fn(&WorkloadMeasurement) -> f64| {
        let ys: Vec<f64> = measured.iter().map(f).collect();
        LogLinearFit::fit(&xs, &ys)
    };
    Ok(WorkloadCharacterization {
        algorithm: algorithm.into(),
        family: family.into(),
        work: fit(|m| m.work)?,
        iter: fit(|m| m.iterations)?,
        max_degree: fit(|m| m.max_degree)?,
        frontiers: fit(|m| m.frontiers)?,
        edges: fit(|m| m.edges)?,
        vertices: fit(|m| m.vertices)?,
    })
}
