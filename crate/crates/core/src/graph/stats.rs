use super::Graph;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub vertex_count: u64,
    pub undirected_edge_count: u64,
    pub max_degree: u64,
    pub mean_degree: f64,
    /// Vertices with at least one neighbor.
    pub connected_vertex_count: u64,
    /// Bucket 0 counts isolated vertices; bucket `k ≥ 1` counts degrees in
    /// `[2^(k-1), 2^k)`.
    pub degree_histogram: Vec<u64>,
}

pub fn degree_stats(g: &Graph) -> DegreeStats {
    let n = g.vertex_count();
    let mut max_degree = 0;
    let mut connected = 0;
    let mut histogram = vec![0u64];
    for v in 0..n as u32 {
        let d = g.degree(v);
        max_degree = max_degree.max(d);
        let bucket = if d == 0 {
            0
        } else {
            connected += 1;
            (u64::BITS - d.leading_zeros()) as usize
        };
        if bucket >= histogram.len() {
            histogram.resize(bucket + 1, 0);
        }
        histogram[bucket] += 1;
    }
    if n == 0 {
        histogram.clear();
    }
    DegreeStats {
        vertex_count: n as u64,
        undirected_edge_count: g.undirected_edge_count(),
        max_degree,
        mean_degree: if n == 0 {
            0.0
        } else {
            g.directed_edge_count() as f64 / n as f64
        },
        connected_vertex_count: connected,
        degree_histogram: histogram,
    }
}
