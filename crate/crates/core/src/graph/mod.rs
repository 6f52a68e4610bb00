//! Undirected graphs in compressed sparse row form, plus the synthetic
//! generators, vertex splitting and degree statistics built on top of them.

mod extrapolate;
mod generate;
pub mod io;
mod split;
mod stats;

pub use extrapolate::{extrapolate_property, LogLinearFit};
pub use generate::{
    generate, generate_er, generate_forest_fire, generate_rmat, GeneratorFamily, GeneratorParams,
};
pub use split::{split_vertices, SplitGraph, DEFAULT_SPLIT_SIZE};
pub use stats::{degree_stats, DegreeStats};

use crate::error::{Error, Result};
use rayon::prelude::*;

/// Immutable undirected graph. Every undirected edge `{u, v}` is stored twice,
/// once in each endpoint's sorted neighbor list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<u64>,
    neighbors: Vec<u32>,
    undirected_edge_count: u64,
    scale: u32,
}

/// Smallest `s` with `2^s >= n`.
pub fn scale_for(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

impl Graph {
    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            offsets: vec![0; n + 1],
            neighbors: Vec::new(),
            undirected_edge_count: 0,
            scale: scale_for(n),
        }
    }

    /// Builds a symmetric, deduplicated, self-loop-free graph from a list of
    /// (possibly directed, possibly repeated) vertex pairs.
    pub fn undirect(vertex_count: usize, edges: &[(u32, u32)]) -> Result<Self> {
        if vertex_count > u32::MAX as usize {
            return Err(Error::Capacity(format!(
                "{vertex_count} vertices do not fit 32-bit ids"
            )));
        }
        for &(u, v) in edges {
            if u as usize >= vertex_count || v as usize >= vertex_count {
                return Err(Error::Format(format!(
                    "edge ({u}, {v}) out of range for {vertex_count} vertices"
                )));
            }
        }
        let mut degree = vec![0u64; vertex_count + 1];
        for &(u, v) in edges {
            if u != v {
                degree[u as usize] += 1;
                degree[v as usize] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(vertex_count + 1);
        let mut acc = 0u64;
        for d in degree.iter().take(vertex_count) {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        let mut neighbors = vec![0u32; acc as usize];
        let mut cursor: Vec<u64> = offsets[..vertex_count].to_vec();
        for &(u, v) in edges {
            if u != v {
                neighbors[cursor[u as usize] as usize] = v;
                cursor[u as usize] += 1;
                neighbors[cursor[v as usize] as usize] = u;
                cursor[v as usize] += 1;
            }
        }
        drop(cursor);
        Ok(Self::from_raw_adjacency(
            offsets,
            neighbors,
            scale_for(vertex_count),
        ))
    }

    /// Sorts and deduplicates each adjacency slice, then compacts storage.
    fn from_raw_adjacency(offsets: Vec<u64>, mut neighbors: Vec<u32>, scale: u32) -> Self {
        let n = offsets.len() - 1;
        // Sort every list in parallel; slices are disjoint.
        {
            let mut slices: Vec<&mut [u32]> = Vec::with_capacity(n);
            let mut rest: &mut [u32] = &mut neighbors;
            for v in 0..n {
                let len = (offsets[v + 1] - offsets[v]) as usize;
                let (head, tail) = rest.split_at_mut(len);
                slices.push(head);
                rest = tail;
            }
            slices.par_iter_mut().for_each(|s| s.sort_unstable());
        }
        let mut new_offsets = Vec::with_capacity(n + 1);
        let mut write = 0usize;
        for v in 0..n {
            new_offsets.push(write as u64);
            let (start, end) = (offsets[v] as usize, offsets[v + 1] as usize);
            let mut last: Option<u32> = None;
            for i in start..end {
                let x = neighbors[i];
                if last != Some(x) {
                    neighbors[write] = x;
                    write += 1;
                    last = Some(x);
                }
            }
        }
        new_offsets.push(write as u64);
        neighbors.truncate(write);
        neighbors.shrink_to_fit();
        Graph {
            offsets: new_offsets,
            neighbors,
            undirected_edge_count: write as u64 / 2,
            scale,
        }
    }

    /// Builds a graph directly from CSR arrays, validating every invariant.
    pub fn from_csr(offsets: Vec<u64>, neighbors: Vec<u32>, scale: u32) -> Result<Self> {
        if offsets.is_empty() || offsets[0] != 0 {
            return Err(Error::Format("offset array must start at 0".into()));
        }
        if *offsets.last().unwrap() as usize != neighbors.len() {
            return Err(Error::Format(
                "last offset must equal neighbor count".into(),
            ));
        }
        let n = offsets.len() - 1;
        for v in 0..n {
            if offsets[v] > offsets[v + 1] {
                return Err(Error::Format(format!("offsets decrease at vertex {v}")));
            }
            let adj = &neighbors[offsets[v] as usize..offsets[v + 1] as usize];
            for (i, &u) in adj.iter().enumerate() {
                if u as usize >= n {
                    return Err(Error::Format(format!("neighbor {u} of {v} out of range")));
                }
                if u as usize == v {
                    return Err(Error::Format(format!("self-loop at {v}")));
                }
                if i > 0 && adj[i - 1] >= u {
                    return Err(Error::Format(format!(
                        "adjacency of {v} not strictly sorted"
                    )));
                }
            }
        }
        let g = Graph {
            undirected_edge_count: neighbors.len() as u64 / 2,
            offsets,
            neighbors,
            scale,
        };
        for v in 0..n as u32 {
            for &u in g.neighbors(v) {
                if !g.has_edge(u, v) {
                    return Err(Error::Format(format!("edge ({v}, {u}) has no reverse")));
                }
            }
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn undirected_edge_count(&self) -> u64 {
        self.undirected_edge_count
    }

    /// Number of stored adjacency entries, `2·|E|`.
    pub fn directed_edge_count(&self) -> u64 {
        self.neighbors.len() as u64
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn with_scale(mut self, scale: u32) -> Self {
        self.scale = scale;
        self
    }

    #[inline]
    pub fn degree(&self, v: u32) -> u64 {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    #[inline]
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.neighbors[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }

    /// Offset of `v`'s adjacency in the neighbor array.
    #[inline]
    pub fn offset(&self, v: u32) -> u64 {
        self.offsets[v as usize]
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn neighbor_array(&self) -> &[u32] {
        &self.neighbors
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn max_degree(&self) -> u64 {
        (0..self.vertex_count() as u32)
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.vertex_count() as u32).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Drops isolated vertices and relabels the rest densely, preserving
    /// order. Returns the new graph and the old id of each new vertex.
    pub fn restrict_to_connected(&self) -> (Graph, Vec<u32>) {
        let n = self.vertex_count();
        let mut new_id = vec![u32::MAX; n];
        let mut old_id = Vec::new();
        for v in 0..n as u32 {
            if self.degree(v) > 0 {
                new_id[v as usize] = old_id.len() as u32;
                old_id.push(v);
            }
        }
        let mut offsets = Vec::with_capacity(old_id.len() + 1);
        let mut neighbors = Vec::with_capacity(self.neighbors.len());
        for &v in &old_id {
            offsets.push(neighbors.len() as u64);
            neighbors.extend(self.neighbors(v).iter().map(|&u| new_id[u as usize]));
        }
        offsets.push(neighbors.len() as u64);
        let g = Graph {
            offsets,
            neighbors,
            undirected_edge_count: self.undirected_edge_count,
            scale: self.scale,
        };
        (g, old_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn undirect_merges_reverse_pairs() {
        let g = Graph::undirect(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.undirected_edge_count(), 1);
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(1), &[0]);
    }

    #[test]
    fn undirect_drops_self_loops() {
        let g = Graph::undirect(3, &[(2, 2)]).unwrap();
        assert_eq!(g.undirected_edge_count(), 0);
        assert_eq!(g.directed_edge_count(), 0);
    }

    #[test]
    fn undirect_rejects_out_of_range() {
        assert!(matches!(
            Graph::undirect(2, &[(0, 2)]),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn undirect_matches_set_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 300u32;
        let pairs: Vec<(u32, u32)> = (0..10_000)
            .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
            .collect();
        let g = Graph::undirect(n as usize, &pairs).unwrap();
        let mut oracle: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n as usize];
        for &(u, v) in &pairs {
            if u != v {
                oracle[u as usize].insert(v);
                oracle[v as usize].insert(u);
            }
        }
        for v in 0..n {
            let want: Vec<u32> = oracle[v as usize].iter().copied().collect();
            assert_eq!(g.neighbors(v), want.as_slice());
        }
        let total: usize = oracle.iter().map(|s| s.len()).sum();
        assert_eq!(g.undirected_edge_count() as usize * 2, total);
    }

    #[test]
    fn from_csr_validates_symmetry() {
        assert!(Graph::from_csr(vec![0, 1, 1], vec![1], 1).is_err());
        assert!(Graph::from_csr(vec![0, 1, 2], vec![1, 0], 1).is_ok());
    }

    #[test]
    fn restrict_to_connected_relabels() {
        let g = Graph::undirect(5, &[(1, 3)]).unwrap();
        let (h, old) = g.restrict_to_connected();
        assert_eq!(h.vertex_count(), 2);
        assert_eq!(old, vec![1, 3]);
        assert_eq!(h.neighbors(0), &[1]);
    }

    #[test]
    fn scale_for_rounds_up() {
        assert_eq!(scale_for(1), 0);
        assert_eq!(scale_for(2), 1);
        assert_eq!(scale_for(3), 2);
        assert_eq!(scale_for(1024), 10);
    }
}
