use crate::graph::{Graph, SplitGraph};

/// A graph as seen by the kernels: "units" are the vertices the machine
/// stores and scans, "masters" the vertices results are reported for. On a
/// plain graph the two coincide.
#[derive(Debug, Clone, Copy)]
pub enum GraphView<'a> {
    Plain(&'a Graph),
    Split(&'a SplitGraph),
}

impl<'a> From<&'a Graph> for GraphView<'a> {
    fn from(g: &'a Graph) -> Self {
        GraphView::Plain(g)
    }
}

impl<'a> From<&'a SplitGraph> for GraphView<'a> {
    fn from(s: &'a SplitGraph) -> Self {
        GraphView::Split(s)
    }
}

impl<'a> GraphView<'a> {
    /// Unit-level adjacency.
    pub fn base(&self) -> &'a Graph {
        match self {
            GraphView::Plain(g) => g,
            GraphView::Split(s) => &s.base,
        }
    }

    pub fn masters(&self) -> usize {
        match self {
            GraphView::Plain(g) => g.vertex_count(),
            GraphView::Split(s) => s.master_count(),
        }
    }

    pub fn units(&self) -> usize {
        self.base().vertex_count()
    }

    pub fn scale(&self) -> u32 {
        self.base().scale()
    }

    /// Undirected edges of the original graph.
    pub fn undirected_edges(&self) -> u64 {
        self.base().undirected_edge_count()
    }

    #[inline]
    pub fn master_of(&self, u: u32) -> u32 {
        match self {
            GraphView::Plain(_) => u,
            GraphView::Split(s) => s.master_of[u as usize],
        }
    }

    #[inline]
    pub fn copy_count(&self, m: u32) -> u32 {
        match self {
            GraphView::Plain(_) => 1,
            GraphView::Split(s) => s.copy_count(m),
        }
    }

    #[inline]
    pub fn copy(&self, m: u32, j: u32) -> u32 {
        match self {
            GraphView::Plain(_) => m,
            GraphView::Split(s) => s.copy(m, j),
        }
    }

    #[inline]
    pub fn copy_index(&self, u: u32) -> u32 {
        match self {
            GraphView::Plain(_) => 0,
            GraphView::Split(s) => s.copy_index(u),
        }
    }

    pub fn master_degree(&self, m: u32) -> u64 {
        match self {
            GraphView::Plain(g) => g.degree(m),
            GraphView::Split(s) => s.master_degree(m),
        }
    }

    pub fn arity(&self) -> u32 {
        match self {
            GraphView::Plain(_) => 2,
            GraphView::Split(s) => s.reduction_arity,
        }
    }

    /// Children of unit `u` in its master's copy tree (heap order over copy
    /// indices).
    pub fn tree_children(&self, u: u32) -> impl Iterator<Item = u32> + '_ {
        let m = self.master_of(u);
        let j = self.copy_index(u);
        let r = self.arity();
        let k = self.copy_count(m);
        let first = j as u64 * r as u64 + 1;
        let last = (first + r as u64).min(k as u64);
        (first..last).map(move |c| self.copy(m, c as u32))
    }

    pub fn tree_child_count(&self, u: u32) -> u32 {
        let m = self.master_of(u);
        let j = self.copy_index(u) as u64;
        let r = self.arity() as u64;
        let k = self.copy_count(m) as u64;
        let first = j * r + 1;
        (first + r).min(k).saturating_sub(first) as u32
    }

    /// Parent of unit `u` in its copy tree; `None` for masters.
    pub fn tree_parent(&self, u: u32) -> Option<u32> {
        let j = self.copy_index(u);
        if j == 0 {
            None
        } else {
            Some(self.copy(self.master_of(u), (j - 1) / self.arity()))
        }
    }
}
