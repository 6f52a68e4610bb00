use super::topology::Topology;
use crate::error::{Error, Result};
use rayon::prelude::*;

/// All-pairs router distances; minimal next hops are derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingTable {
    routers: usize,
    dist: Vec<u8>,
    pub diameter: u32,
}

impl RoutingTable {
    pub fn distance(&self, from: u32, to: u32) -> u32 {
        self.dist[from as usize * self.routers + to as usize] as u32
    }

    /// Neighbors of `from` one hop closer to `to`.
    pub fn next_hops<'a>(
        &'a self,
        t: &'a Topology,
        from: u32,
        to: u32,
    ) -> impl Iterator<Item = u32> + 'a {
        let d = self.distance(from, to);
        t.adjacency[from as usize]
            .iter()
            .copied()
            .filter(move |&n| d > 0 && self.distance(n, to) + 1 == d)
    }

    /// Distance from `from` to the nearer of two routers.
    pub fn distance_to_pair(&self, from: u32, pair: [u32; 2]) -> u32 {
        self.distance(from, pair[0])
            .min(self.distance(from, pair[1]))
    }

    /// Neighbors of `from` one hop closer to either router of `pair`.
    pub fn next_hops_to_pair<'a>(
        &'a self,
        t: &'a Topology,
        from: u32,
        pair: [u32; 2],
    ) -> impl Iterator<Item = u32> + 'a {
        let d = self.distance_to_pair(from, pair);
        t.adjacency[from as usize]
            .iter()
            .copied()
            .filter(move |&n| d > 0 && self.distance_to_pair(n, pair) + 1 == d)
    }
}

pub fn compute_routes(t: &Topology) -> Result<RoutingTable> {
    let r = t.router_count();
    let rows: Vec<Vec<u32>> = (0..r as u32).into_par_iter().map(|s| t.bfs(s)).collect();
    let mut dist = Vec::with_capacity(r * r);
    let mut diameter = 0;
    for row in rows {
        for d in row {
            if d == u32::MAX {
                return Err(Error::Topology("router graph is disconnected".into()));
            }
            if d > u8::MAX as u32 {
                return Err(Error::Topology(format!("router distance {d} exceeds 255")));
            }
            diameter = diameter.max(d);
            dist.push(d as u8);
        }
    }
    Ok(RoutingTable {
        routers: r,
        dist,
        diameter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::topology::synthetic;

    fn ring(n: u32) -> Topology {
        let links: Vec<(u32, u32)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Topology::new(n as usize, &links, vec![[0, 1]], None).unwrap()
    }

    #[test]
    fn complete_graph() {
        let t = synthetic(6, 5, 3, 1).unwrap();
        let r = compute_routes(&t).unwrap();
        assert_eq!(r.diameter, 1);
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(r.distance(a, b), u32::from(a != b));
            }
        }
    }

    #[test]
    fn ring_of_five() {
        let t = ring(5);
        let r = compute_routes(&t).unwrap();
        let want = [0, 1, 2, 2, 1];
        for a in 0..5u32 {
            for b in 0..5u32 {
                assert_eq!(r.distance(a, b), want[((b + 5 - a) % 5) as usize]);
            }
        }
        assert_eq!(r.diameter, 2);
        assert_eq!(r.next_hops(&t, 0, 2).collect::<Vec<_>>(), vec![1]);
        assert_eq!(r.next_hops(&t, 0, 0).count(), 0);
    }

    #[test]
    fn random_topology_against_floyd_warshall() {
        let t = synthetic(64, 14, 256, 5).unwrap();
        let r = compute_routes(&t).unwrap();
        let n = 64;
        let mut d = vec![vec![u32::MAX / 4; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
            for &j in &t.adjacency[i] {
                row[j as usize] = 1;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                assert_eq!(r.distance(i as u32, j as u32), d[i][j]);
                for h in r.next_hops(&t, i as u32, j as u32) {
                    assert!(t.adjacency[i].contains(&h));
                    assert_eq!(d[h as usize][j] + 1, d[i][j]);
                }
                if i != j {
                    assert!(r.next_hops(&t, i as u32, j as u32).count() > 0);
                }
            }
        }
        assert!(r.diameter <= 3);
    }

    #[test]
    fn pair_routing() {
        let t = ring(6);
        let r = compute_routes(&t).unwrap();
        assert_eq!(r.distance_to_pair(0, [3, 4]), 2);
        assert_eq!(
            r.next_hops_to_pair(&t, 0, [3, 4]).collect::<Vec<_>>(),
            vec![5]
        );
    }
}
