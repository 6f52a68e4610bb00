//! Vertex splitting: high-degree vertices are replaced by bounded-degree
//! copies that each own a contiguous slice of the original adjacency.

use super::Graph;
use crate::error::{Error, Result};

pub const DEFAULT_SPLIT_SIZE: u64 = 1024;

/// A graph whose vertices are split copies of an original graph.
///
/// Copy 0 of every original vertex keeps the original id, so ids below
/// `master_count` are masters and extra copies are appended after them.
/// Copy `j` of vertex `a` holds neighbors `N(a)[j·S .. (j+1)·S]`; the edge to
/// `b` becomes an edge between the copy of `a` holding `b` and the copy of `b`
/// holding `a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitGraph {
    pub base: Graph,
    pub master_of: Vec<u32>,
    pub split_size: u64,
    pub reduction_arity: u32,
    master_count: usize,
    // For master m: extra copies are ids extra_start[m] .. extra_start[m+1].
    extra_start: Vec<u32>,
}

impl SplitGraph {
    pub fn master_count(&self) -> usize {
        self.master_count
    }

    /// Total number of split vertices, masters included.
    pub fn unit_count(&self) -> usize {
        self.base.vertex_count()
    }

    /// Number of copies of master `m`, including itself.
    pub fn copy_count(&self, m: u32) -> u32 {
        1 + self.extra_start[m as usize + 1] - self.extra_start[m as usize]
    }

    /// The `j`-th copy of master `m`.
    #[inline]
    pub fn copy(&self, m: u32, j: u32) -> u32 {
        if j == 0 {
            m
        } else {
            self.extra_start[m as usize] + j - 1
        }
    }

    /// Position of split vertex `u` among its master's copies.
    pub fn copy_index(&self, u: u32) -> u32 {
        let m = self.master_of[u as usize];
        if u == m {
            0
        } else {
            u - self.extra_start[m as usize] + 1
        }
    }

    /// Degree of the original vertex.
    pub fn master_degree(&self, m: u32) -> u64 {
        (0..self.copy_count(m))
            .map(|j| self.base.degree(self.copy(m, j)))
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.unit_count() == self.master_count
    }

    /// Collapses split vertices back onto their masters.
    pub fn merge(&self) -> Graph {
        let mut edges = Vec::with_capacity(self.base.undirected_edge_count() as usize);
        for (u, v) in self.base.edges() {
            edges.push((self.master_of[u as usize], self.master_of[v as usize]));
        }
        Graph::undirect(self.master_count, &edges)
            .expect("master ids are in range")
            .with_scale(self.base.scale())
    }
}

/// Splits every vertex of degree above `split_size` into
/// `ceil(degree / split_size)` copies.
pub fn split_vertices(g: &Graph, split_size: u64) -> Result<SplitGraph> {
    split_vertices_with_arity(g, split_size, 2)
}

pub fn split_vertices_with_arity(
    g: &Graph,
    split_size: u64,
    reduction_arity: u32,
) -> Result<SplitGraph> {
    if split_size < 2 {
        return Err(Error::Parameter("split_size must be at least 2".into()));
    }
    if reduction_arity < 2 {
        return Err(Error::Parameter(
            "reduction_arity must be at least 2".into(),
        ));
    }
    let n = g.vertex_count();
    let mut extra_start = Vec::with_capacity(n + 1);
    let mut next = n as u64;
    for v in 0..n as u32 {
        extra_start.push(next as u32);
        next += g.degree(v).div_ceil(split_size).saturating_sub(1);
    }
    extra_start.push(next as u32);
    if next > u32::MAX as u64 {
        return Err(Error::Capacity("too many split vertices".into()));
    }
    let units = next as usize;
    let mut master_of: Vec<u32> = (0..n as u32).collect();
    master_of.reserve(units - n);
    for m in 0..n as u32 {
        for _ in extra_start[m as usize]..extra_start[m as usize + 1] {
            master_of.push(m);
        }
    }
    let copy_of = |m: u32, pos: u64| -> u32 {
        let j = (pos / split_size) as u32;
        if j == 0 {
            m
        } else {
            extra_start[m as usize] + j - 1
        }
    };
    let base = if units == n {
        g.clone()
    } else {
        let mut degree = vec![0u64; units];
        for m in 0..n as u32 {
            let d = g.degree(m);
            let copies = d.div_ceil(split_size).max(1);
            for j in 0..copies {
                let c = if j == 0 {
                    m
                } else {
                    extra_start[m as usize] + j as u32 - 1
                };
                degree[c as usize] = split_size.min(d - j * split_size);
            }
        }
        let mut offsets = Vec::with_capacity(units + 1);
        let mut acc = 0u64;
        for d in &degree {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        let mut neighbors = vec![0u32; acc as usize];
        let mut cursor = offsets[..units].to_vec();
        for a in 0..n as u32 {
            for (i, &b) in g.neighbors(a).iter().enumerate() {
                let pos_in_b = g
                    .neighbors(b)
                    .binary_search(&a)
                    .expect("graph adjacency is symmetric") as u64;
                let ca = copy_of(a, i as u64);
                let cb = copy_of(b, pos_in_b);
                neighbors[cursor[ca as usize] as usize] = cb;
                cursor[ca as usize] += 1;
            }
        }
        for c in 0..units {
            neighbors[offsets[c] as usize..offsets[c + 1] as usize].sort_unstable();
        }
        Graph::from_csr(offsets, neighbors, g.scale())?
    };
    Ok(SplitGraph {
        base,
        master_of,
        split_size,
        reduction_arity,
        master_count: n,
        extra_start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(leaves: u32) -> Graph {
        let edges: Vec<(u32, u32)> = (1..=leaves).map(|v| (0, v)).collect();
        Graph::undirect(leaves as usize + 1, &edges).unwrap()
    }

    #[test]
    fn star_center_splits_by_ceiling() {
        let g = star(10_000);
        let s = split_vertices(&g, 1024).unwrap();
        assert_eq!(s.copy_count(0), 10);
        for j in 0..10 {
            assert!(s.base.degree(s.copy(0, j)) <= 1024);
        }
        assert_eq!(s.master_degree(0), 10_000);
        assert_eq!(s.merge(), g);
    }

    #[test]
    fn identity_when_degrees_are_small() {
        let g = Graph::undirect(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let s = split_vertices(&g, 2).unwrap();
        assert!(s.is_identity());
        assert_eq!(s.base, g);
        assert_eq!(s.master_of, vec![0, 1, 2, 3]);
    }

    #[test]
    fn two_hubs_share_split_edge() {
        // Two hubs connected to each other and to many leaves.
        let mut edges = vec![(0u32, 1u32)];
        for v in 2..50 {
            edges.push((0, v));
            edges.push((1, v));
        }
        let g = Graph::undirect(50, &edges).unwrap();
        let s = split_vertices(&g, 4).unwrap();
        for u in 0..s.unit_count() as u32 {
            assert!(s.base.degree(u) <= 4);
            assert_eq!(s.copy(s.master_of[u as usize], s.copy_index(u)), u);
        }
        assert_eq!(s.merge(), g);
    }

    #[test]
    fn rejects_tiny_split_size() {
        assert!(split_vertices(&star(3), 1).is_err());
    }
}
