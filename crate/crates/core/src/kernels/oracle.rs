//! Sequential reference implementations.

use crate::graph::Graph;
use std::collections::VecDeque;

pub const UNREACHED: u32 = u32::MAX;

/// Textbook queue-based BFS.
pub fn seq_bfs_oracle(g: &Graph, source: u32) -> Vec<u32> {
    let mut dist = vec![UNREACHED; g.vertex_count()];
    let mut queue = VecDeque::new();
    dist[source as usize] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if dist[v as usize] == UNREACHED {
                dist[v as usize] = dist[u as usize] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Vertices and edge volume of every BFS level, in level order.
pub fn bfs_levels(g: &Graph, source: u32) -> Vec<(u64, u64)> {
    let dist = seq_bfs_oracle(g, source);
    let mut levels: Vec<(u64, u64)> = Vec::new();
    for v in 0..g.vertex_count() as u32 {
        let d = dist[v as usize];
        if d == UNREACHED {
            continue;
        }
        if levels.len() <= d as usize {
            levels.resize(d as usize + 1, (0, 0));
        }
        levels[d as usize].0 += 1;
        levels[d as usize].1 += g.degree(v);
    }
    levels
}

/// Power iteration `x ← (1-α)/n + α·Aᵀ D⁻¹ x` from `x = 1/n`, stopped once
/// no entry moves by `tol` or more, then scaled to sum to one. Returns the
/// scores and the number of iterations.
pub fn power_iteration_oracle(
    g: &Graph,
    alpha: f64,
    tol: f64,
    max_iters: usize,
) -> (Vec<f64>, usize) {
    let n = g.vertex_count();
    if n == 0 {
        return (Vec::new(), 0);
    }
    // Work from a flat edge list so the sweep does not share code with the kernels.
    let edges: Vec<(u32, u32)> = g.edges().collect();
    let deg: Vec<f64> = (0..n as u32).map(|v| g.degree(v) as f64).collect();
    let teleport = (1.0 - alpha) / n as f64;
    let mut x = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let mut acc = vec![0.0; n];
        for &(u, v) in &edges {
            acc[v as usize] += x[u as usize] / deg[u as usize];
            acc[u as usize] += x[v as usize] / deg[v as usize];
        }
        let mut change: f64 = 0.0;
        for i in 0..n {
            next[i] = teleport + alpha * acc[i];
            change = change.max((next[i] - x[i]).abs());
        }
        std::mem::swap(&mut x, &mut next);
        if change < tol {
            break;
        }
    }
    normalize(&mut x);
    (x, iterations)
}

pub(crate) fn normalize(x: &mut [f64]) {
    let s: f64 = x.iter().sum();
    if s > 0.0 {
        for v in x.iter_mut() {
            *v /= s;
        }
    }
}

/// Sequential data-driven PageRank: each round the active vertices
/// recompute their value from a snapshot of their neighbors, and push the
/// change into their neighbors' residuals; vertices whose residual reaches
/// `tol` form the next active set.
#[derive(Debug, Clone)]
pub struct SeqDataDriven {
    pub scores: Vec<f64>,
    pub iterations: usize,
    /// Active-set degree volume of each round.
    pub volumes: Vec<u64>,
    pub active_counts: Vec<u64>,
    pub converged: bool,
}

pub fn seq_data_driven_pagerank(
    g: &Graph,
    alpha: f64,
    tol: f64,
    max_iters: usize,
) -> SeqDataDriven {
    let n = g.vertex_count();
    let teleport = (1.0 - alpha) / n.max(1) as f64;
    let mut x = vec![1.0 / n.max(1) as f64; n];
    let mut resid = vec![0.0f64; n];
    let mut active: Vec<u32> = (0..n as u32).collect();
    let mut flag = vec![false; n];
    let mut volumes = Vec::new();
    let mut active_counts = Vec::new();
    let mut fresh = Vec::with_capacity(n);
    while !active.is_empty() && volumes.len() < max_iters {
        volumes.push(active.iter().map(|&v| g.degree(v)).sum());
        active_counts.push(active.len() as u64);
        fresh.clear();
        for &v in &active {
            let mut s = 0.0;
            for &u in g.neighbors(v) {
                s += x[u as usize] / g.degree(u) as f64;
            }
            fresh.push(teleport + alpha * s);
            resid[v as usize] = 0.0;
        }
        for (i, &v) in active.iter().enumerate() {
            let delta = fresh[i] - x[v as usize];
            let d = g.degree(v);
            if d > 0 {
                let push = alpha * delta / d as f64;
                for &w in g.neighbors(v) {
                    resid[w as usize] += push;
                }
            }
        }
        for (i, &v) in active.iter().enumerate() {
            x[v as usize] = fresh[i];
        }
        let mut next = Vec::new();
        for &v in &active {
            for &w in g.neighbors(v) {
                if !flag[w as usize] && resid[w as usize].abs() >= tol {
                    flag[w as usize] = true;
                    next.push(w);
                }
            }
        }
        next.sort_unstable();
        for &w in &next {
            flag[w as usize] = false;
        }
        active = next;
    }
    normalize(&mut x);
    SeqDataDriven {
        scores: x,
        iterations: volumes.len(),
        converged: active.is_empty(),
        volumes,
        active_counts,
    }
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex() {
        let g = Graph::empty(1);
        assert_eq!(seq_bfs_oracle(&g, 0), vec![0]);
        let (x, _) = power_iteration_oracle(&g, 0.85, 1e-12, 100);
        assert_eq!(x, vec![1.0]);
    }

    #[test]
    fn two_cycle() {
        let g = Graph::undirect(2, &[(0, 1)]).unwrap();
        assert_eq!(seq_bfs_oracle(&g, 0), vec![0, 1]);
        let (x, _) = power_iteration_oracle(&g, 0.85, 1e-12, 100);
        assert!((x[0] - 0.5).abs() < 1e-15 && (x[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn star_levels() {
        let edges: Vec<(u32, u32)> = (1..10).map(|v| (0, v)).collect();
        let g = Graph::undirect(10, &edges).unwrap();
        assert_eq!(bfs_levels(&g, 0), vec![(1, 9), (9, 9)]);
    }

    #[test]
    fn pagerank_fixed_point_on_path() {
        // Closed form for the path a-b-c: stationary equations solved by hand.
        let g = Graph::undirect(3, &[(0, 1), (1, 2)]).unwrap();
        let (x, _) = power_iteration_oracle(&g, 0.85, 1e-15, 10_000);
        let t = 0.15 / 3.0;
        // x_end = t + 0.85·x_mid/2, x_mid = t + 0.85·2·x_end.
        let x_end = (t + 0.85 * t / 2.0) / (1.0 - 0.85 * 0.85);
        let x_mid = t + 0.85 * 2.0 * x_end;
        let s = 2.0 * x_end + x_mid;
        assert!((x[0] - x_end / s).abs() < 1e-12);
        assert!((x[1] - x_mid / s).abs() < 1e-12);
    }

    #[test]
    fn data_driven_converges_to_power_iteration() {
        use crate::graph::{generate_rmat, GeneratorFamily, GeneratorParams};
        let g = generate_rmat(&GeneratorParams::new(GeneratorFamily::Rmat, 10, 4)).unwrap();
        let n = g.vertex_count() as f64;
        let (x, _) = power_iteration_oracle(&g, 0.85, 1e-9 / n, 10_000);
        let dd = seq_data_driven_pagerank(&g, 0.85, 1e-9 / n, 10_000);
        assert!(dd.converged);
        assert!(l1_distance(&x, &dd.scores) < 1e-6);
        assert!(dd
            .volumes
            .windows(2)
            .all(|w| w[1] <= g.directed_edge_count()));
    }
}
