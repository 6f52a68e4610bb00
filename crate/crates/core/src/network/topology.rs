use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

/// Routers, router links, and the two routers each compute node hangs off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    /// Sorted neighbor lists of the router graph.
    pub adjacency: Vec<Vec<u32>>,
    pub attachments: Vec<[u32; 2]>,
    pub hop_latency_ns: u32,
    pub radix: Option<u32>,
}

/// Where a topology comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologySpec {
    File {
        path: std::path::PathBuf,
        radix: Option<u32>,
    },
    Synthetic {
        router_count: u32,
        radix: u32,
        node_count: u32,
        seed: u64,
    },
}

pub const DEFAULT_HOP_LATENCY_NS: u32 = 100;
const MAX_DIAMETER: u32 = 3;
const ATTEMPTS: u64 = 20;

impl Topology {
    pub fn router_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn node_count(&self) -> usize {
        self.attachments.len()
    }

    pub fn router_link_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn max_router_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Nodes attached to each router.
    pub fn nodes_by_router(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.router_count()];
        for (n, rs) in self.attachments.iter().enumerate() {
            for &r in rs {
                out[r as usize].push(n as u32);
            }
        }
        out
    }

    /// Builds from router links and attachments and checks the invariants.
    pub fn new(
        router_count: usize,
        links: &[(u32, u32)],
        attachments: Vec<[u32; 2]>,
        radix: Option<u32>,
    ) -> Result<Self> {
        let mut sets = vec![BTreeSet::new(); router_count];
        for &(u, v) in links {
            if u as usize >= router_count || v as usize >= router_count {
                return Err(Error::Topology(format!(
                    "link {u}-{v} names a router outside 0..{router_count}"
                )));
            }
            if u == v {
                return Err(Error::Topology(format!("router {u} links to itself")));
            }
            sets[u as usize].insert(v);
            sets[v as usize].insert(u);
        }
        let t = Topology {
            adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
            attachments,
            hop_latency_ns: DEFAULT_HOP_LATENCY_NS,
            radix,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.router_count();
        if r < 2 {
            return Err(Error::Topology("at least 2 routers are needed".into()));
        }
        for (n, &[a, b]) in self.attachments.iter().enumerate() {
            if a as usize >= r || b as usize >= r {
                return Err(Error::Topology(format!(
                    "node {n} attaches to a missing router"
                )));
            }
            if a == b {
                return Err(Error::Topology(format!(
                    "node {n} attaches twice to router {a}"
                )));
            }
        }
        if let Some(radix) = self.radix {
            if let Some((i, a)) = self
                .adjacency
                .iter()
                .enumerate()
                .find(|(_, a)| a.len() > radix as usize)
            {
                return Err(Error::Topology(format!(
                    "router {i} has {} router links, above radix {radix}",
                    a.len()
                )));
            }
        }
        if self.diameter().is_none() {
            return Err(Error::Topology("router graph is disconnected".into()));
        }
        Ok(())
    }

    /// Hop distances from `src` (u32::MAX when unreachable).
    pub fn bfs(&self, src: u32) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.router_count()];
        let mut q = VecDeque::from([src]);
        dist[src as usize] = 0;
        while let Some(u) = q.pop_front() {
            for &v in &self.adjacency[u as usize] {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = dist[u as usize] + 1;
                    q.push_back(v);
                }
            }
        }
        dist
    }

    /// Largest router distance, or `None` when disconnected.
    pub fn diameter(&self) -> Option<u32> {
        let mut best = 0;
        for s in 0..self.router_count() as u32 {
            let d = *self.bfs(s).iter().max()?;
            if d == u32::MAX {
                return None;
            }
            best = best.max(d);
        }
        Some(best)
    }

    /// Reads `R u v` router links and `N n r1 r2` attachments; `#` starts a
    /// comment.
    pub fn parse(text: &str, radix: Option<u32>) -> Result<Self> {
        let mut links = Vec::new();
        let mut nodes: Vec<(u32, [u32; 2])> = Vec::new();
        let mut routers = 0u32;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| {
                s.parse::<u32>()
                    .map_err(|_| Error::Format(format!("line {}: bad number '{s}'", i + 1)))
            };
            match f.as_slice() {
                ["R", u, v] => {
                    let (u, v) = (num(u)?, num(v)?);
                    routers = routers.max(u + 1).max(v + 1);
                    links.push((u, v));
                }
                ["N", n, a, b] => {
                    let (a, b) = (num(a)?, num(b)?);
                    routers = routers.max(a + 1).max(b + 1);
                    nodes.push((num(n)?, [a, b]));
                }
                _ => {
                    return Err(Error::Format(format!(
                        "line {}: expected 'R u v' or 'N n r1 r2'",
                        i + 1
                    )))
                }
            }
        }
        nodes.sort_unstable_by_key(|&(n, _)| n);
        for (i, &(n, _)) in nodes.iter().enumerate() {
            if n as usize != i {
                return Err(Error::Format(format!(
                    "node ids must be 0..{} each once",
                    nodes.len()
                )));
            }
        }
        Topology::new(
            routers as usize,
            &links,
            nodes.into_iter().map(|(_, a)| a).collect(),
            radix,
        )
    }

    pub fn load(path: &Path, radix: Option<u32>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, radix)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (u, a) in self.adjacency.iter().enumerate() {
            for &v in a.iter().filter(|&&v| v as usize > u) {
                let _ = writeln!(s, "R {u} {v}");
            }
        }
        for (n, [a, b]) in self.attachments.iter().enumerate() {
            let _ = writeln!(s, "N {n} {a} {b}");
        }
        s
    }
}

/// Node `i` goes to routers `2i mod R` and `2i+1 mod R`.
pub fn round_robin_attachments(router_count: u32, node_count: u32) -> Vec<[u32; 2]> {
    (0..node_count as u64)
        .map(|i| {
            let r = router_count as u64;
            [(2 * i % r) as u32, ((2 * i + 1) % r) as u32]
        })
        .collect()
}

/// Random `radix`-regular router graph (one router short a link when
/// `R·radix` is odd), made by randomizing a circulant graph with
/// degree-preserving edge swaps. Diameter is not checked.
pub fn random_regular_topology(
    router_count: u32,
    radix: u32,
    node_count: u32,
    seed: u64,
) -> Result<Topology> {
    random_regular_attempt(router_count, radix, node_count, seed, 0)
}

fn random_regular_attempt(
    router_count: u32,
    radix: u32,
    node_count: u32,
    seed: u64,
    attempt: u64,
) -> Result<Topology> {
    if router_count < 2 {
        return Err(Error::Topology("at least 2 routers are needed".into()));
    }
    if radix == 0 {
        return Err(Error::Topology("radix must be positive".into()));
    }
    let attachments = round_robin_attachments(router_count, node_count);
    if radix + 1 >= router_count {
        let links: Vec<(u32, u32)> = (0..router_count)
            .flat_map(|u| (u + 1..router_count).map(move |v| (u, v)))
            .collect();
        return Topology::new(router_count as usize, &links, attachments, Some(radix));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt);
    let links = random_regular(router_count, radix, &mut rng);
    Topology::new(router_count as usize, &links, attachments, Some(radix))
}

/// Random regular router graph retried until its diameter is at most 3.
pub fn synthetic(router_count: u32, radix: u32, node_count: u32, seed: u64) -> Result<Topology> {
    let mut best = u32::MAX;
    for attempt in 0..ATTEMPTS {
        match random_regular_attempt(router_count, radix, node_count, seed, attempt) {
            Ok(t) => {
                let d = t.diameter().unwrap_or(u32::MAX);
                if d <= MAX_DIAMETER {
                    return Ok(t);
                }
                best = best.min(d);
            }
            Err(Error::Topology(m)) if m.contains("disconnected") => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Topology(format!(
        "no diameter-{MAX_DIAMETER} graph found for {router_count} routers at radix {radix} (best diameter {})",
        if best == u32::MAX { "disconnected".to_string() } else { best.to_string() }
    )))
}

fn random_regular(n: u32, d: u32, rng: &mut ChaCha8Rng) -> Vec<(u32, u32)> {
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for i in 0..n {
        for j in 1..=d / 2 {
            edges.push((i, (i + j) % n));
        }
    }
    if d % 2 == 1 {
        for i in 0..n / 2 {
            edges.push((i, i + n / 2));
        }
    }
    let key = |a: u32, b: u32| (a.min(b), a.max(b));
    let mut present: std::collections::HashSet<(u32, u32)> =
        edges.iter().map(|&(a, b)| key(a, b)).collect();
    let swaps = 20 * edges.len();
    for _ in 0..swaps {
        let i = rng.random_range(0..edges.len());
        let j = rng.random_range(0..edges.len());
        if i == j {
            continue;
        }
        let (a, b) = edges[i];
        let (c, mut e) = edges[j];
        let (c, e2) = if rng.random_bool(0.5) { (c, e) } else { (e, c) };
        e = e2;
        if a == e || c == b || a == c || b == e {
            continue;
        }
        let (n1, n2) = (key(a, e), key(c, b));
        if present.contains(&n1) || present.contains(&n2) {
            continue;
        }
        present.remove(&key(a, b));
        present.remove(&key(c, e));
        present.insert(n1);
        present.insert(n2);
        edges[i] = (a, e);
        edges[j] = (c, b);
    }
    edges
}

pub fn build_topology(spec: &TopologySpec) -> Result<Topology> {
    match spec {
        TopologySpec::File { path, radix } => Topology::load(path, *radix),
        TopologySpec::Synthetic {
            router_count,
            radix,
            node_count,
            seed,
        } => synthetic(*router_count, *radix, *node_count, *seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_routers_one_node() {
        let t = synthetic(2, 4, 1, 1).unwrap();
        assert_eq!(t.attachments, vec![[0, 1]]);
        assert_eq!(t.diameter(), Some(1));
    }

    #[test]
    fn synthetic_64_routers() {
        let t = synthetic(64, 14, 256, 7).unwrap();
        assert!(t.diameter().unwrap() <= 3);
        assert!(t.adjacency.iter().all(|a| a.len() == 14));
        let per_router = t.nodes_by_router();
        assert!(per_router.iter().all(|n| n.len() == 8));
        for &[a, b] in &t.attachments {
            assert_ne!(a, b);
        }
        assert_eq!(t, synthetic(64, 14, 256, 7).unwrap());
    }

    #[test]
    fn odd_degree_sum() {
        let t = synthetic(15, 5, 10, 3).unwrap();
        let deg: Vec<usize> = t.adjacency.iter().map(Vec::len).collect();
        assert!(deg.iter().all(|&d| d == 5 || d == 4));
        assert!(t.max_router_degree() <= 5);
    }

    #[test]
    fn infeasible_radix_reports_diameter() {
        let e = synthetic(200, 2, 10, 1).unwrap_err();
        assert!(e.to_string().contains("best diameter"), "{e}");
    }

    #[test]
    fn text_round_trip() {
        let t = synthetic(16, 5, 12, 2).unwrap();
        let back = Topology::parse(&t.to_text(), Some(5)).unwrap();
        assert_eq!(back.adjacency, t.adjacency);
        assert_eq!(back.attachments, t.attachments);
    }

    #[test]
    fn file_errors() {
        assert!(Topology::parse("R 0 1\nN 0 0 0\n", None).is_err());
        assert!(Topology::parse("R 0 1\nR 2 3\nN 0 0 1\n", None).is_err());
        assert!(Topology::parse("R 0 1\nX\n", None).is_err());
        assert!(Topology::parse("R 0 1\nR 0 2\nN 0 1 2\n", Some(1)).is_err());
        assert!(Topology::parse("R 0 1\nN 1 0 1\n", None).is_err());
        let t = Topology::parse("# ring\nR 0 1\nR 1 2\nR 2 0\nN 0 0 1\n", None).unwrap();
        assert_eq!(t.router_link_count(), 3);
    }
}
