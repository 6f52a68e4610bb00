use super::routing::RoutingTable;
use super::stats::{NetStats, QueueSample};
use super::topology::Topology;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "fraction")]
pub enum Injection {
    /// Both node links filled every nanosecond.
    MaxRate,
    /// Expected bytes per ns as a fraction of node bandwidth. The fractional
    /// message left over in a nanosecond is sent with that probability.
    Fraction(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetConfig {
    pub duration_ns: u32,
    pub injection: Injection,
    /// Bytes per ns a node can inject, split over its two links.
    pub node_bandwidth: f64,
    /// Bytes per ns per direction of each router-router link.
    pub link_bandwidth: f64,
    pub message_bytes: u32,
    pub queue_sample_period_ns: u32,
    pub reroute_samples: u32,
    pub hop_cap: u32,
    pub seed: u64,
    /// Keep stepping without injection after `duration_ns` until every
    /// message is delivered.
    pub drain: bool,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            duration_ns: 5000,
            injection: Injection::MaxRate,
            node_bandwidth: 4400.0,
            link_bandwidth: 2200.0,
            message_bytes: 34,
            queue_sample_period_ns: 100,
            reroute_samples: 5,
            hop_cap: 16,
            seed: 1,
            drain: false,
        }
    }
}

impl NetConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Parameter(m.into()));
        if self.duration_ns == 0 || self.queue_sample_period_ns == 0 || self.message_bytes == 0 {
            return bad("duration, sample period and message size must be positive");
        }
        if !(self.node_bandwidth > 0.0) || !(self.link_bandwidth > 0.0) {
            return bad("bandwidths must be positive");
        }
        if (self.link_bandwidth as u64) < self.message_bytes as u64
            || (self.node_bandwidth / 2.0) < self.message_bytes as f64
        {
            return bad("a link must carry at least one message per ns");
        }
        if let Injection::Fraction(f) = self.injection {
            if !(0.0..=1.0).contains(&f) {
                return bad("injection fraction must lie in [0, 1]");
            }
        }
        if self.hop_cap == 0 || self.hop_cap > MAX_HOPS {
            return bad("hop cap must lie in 1..=31");
        }
        Ok(())
    }

    /// Messages per node link per ns at full injection.
    fn per_link_messages(&self) -> f64 {
        (self.node_bandwidth / 2.0 / self.message_bytes as f64).floor()
    }
}

const MAX_HOPS: u32 = 31;
const HOP_BITS: u32 = 5;

/// In-flight message: injection time plus destination and hop count packed
/// into one word.
#[derive(Debug, Clone, Copy)]
struct Msg {
    inject: u32,
    packed: u32,
}

impl Msg {
    fn dst(self) -> u32 {
        self.packed >> HOP_BITS
    }
    fn hops(self) -> u32 {
        self.packed & MAX_HOPS
    }
    fn hopped(self) -> Msg {
        Msg {
            inject: self.inject,
            packed: self.packed + 1,
        }
    }
}

struct Links {
    /// First router-link id of each router; the i-th neighbor is `off + i`.
    router_off: Vec<usize>,
    /// First node-link id of each router, after all router links.
    node_off: Vec<usize>,
    nodes_by_router: Vec<Vec<u32>>,
    queues: Vec<VecDeque<Msg>>,
    budget: Vec<u32>,
    router_links: usize,
}

impl Links {
    fn new(t: &Topology) -> Self {
        let mut router_off = Vec::with_capacity(t.router_count());
        let mut acc = 0;
        for a in &t.adjacency {
            router_off.push(acc);
            acc += a.len();
        }
        let router_links = acc;
        let nodes_by_router = t.nodes_by_router();
        let mut node_off = Vec::with_capacity(t.router_count());
        for n in &nodes_by_router {
            node_off.push(acc);
            acc += n.len();
        }
        Links {
            router_off,
            node_off,
            nodes_by_router,
            queues: vec![VecDeque::new(); acc],
            budget: vec![0; acc],
            router_links,
        }
    }

    fn refill(&mut self, router_bytes: u32, node_bytes: u32) {
        let (r, n) = self.budget.split_at_mut(self.router_links);
        r.fill(router_bytes);
        n.fill(node_bytes);
    }

    fn node_link(&self, router: u32, node: u32) -> Option<usize> {
        self.nodes_by_router[router as usize]
            .iter()
            .position(|&n| n == node)
            .map(|j| self.node_off[router as usize] + j)
    }
}

struct Sim<'a> {
    t: &'a Topology,
    routes: &'a RoutingTable,
    cfg: &'a NetConfig,
    links: Links,
    slots: usize,
    /// Router arrivals per time slot.
    arrivals: Vec<Vec<Vec<Msg>>>,
    /// Latencies and hop counts of messages reaching their node per slot.
    landing: Vec<Vec<(u32, u32)>>,
    inject_rng: ChaCha8Rng,
    route_rng: ChaCha8Rng,
    stats: NetStats,
    size: u32,
    hop: u32,
    router_bw: u32,
    scratch_hops: Vec<u32>,
    scratch_pick: Vec<u32>,
}

/// Steps the network one nanosecond at a time. Each ns: nodes inject, node
/// deliveries land, then every router first drains its queues and then
/// routes the messages arriving in that ns.
pub fn simulate(t: &Topology, routes: &RoutingTable, cfg: &NetConfig) -> Result<NetStats> {
    cfg.validate()?;
    if t.node_count() >= 1 << (32 - HOP_BITS) {
        return Err(Error::Parameter("too many compute nodes".into()));
    }
    let slots = t.hop_latency_ns as usize + 1;
    let mut inject_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    inject_rng.set_stream(1);
    let mut route_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    route_rng.set_stream(2);
    let mut sim = Sim {
        t,
        routes,
        cfg,
        links: Links::new(t),
        slots,
        arrivals: vec![vec![Vec::new(); t.router_count()]; slots],
        landing: vec![Vec::new(); slots],
        inject_rng,
        route_rng,
        stats: NetStats::new(
            (routes.diameter + 2) * t.hop_latency_ns,
            cfg.message_bytes,
            cfg.link_bandwidth,
        ),
        size: cfg.message_bytes,
        hop: t.hop_latency_ns,
        router_bw: cfg.link_bandwidth.floor() as u32,
        scratch_hops: Vec::new(),
        scratch_pick: Vec::new(),
    };
    sim.stats.topology = format!(
        "{} routers, {} nodes, diameter {}, max router degree {} (radix counts router-router links; each node adds 2 node links)",
        t.router_count(),
        t.node_count(),
        routes.diameter,
        t.max_router_degree()
    );
    let node_bw = (cfg.node_bandwidth / 2.0).floor() as u32;
    let mut now = 0u32;
    loop {
        if now >= cfg.duration_ns && (!cfg.drain || sim.stats.injected == sim.stats.delivered) {
            break;
        }
        sim.links.refill(sim.router_bw, node_bw);
        if now < cfg.duration_ns {
            sim.inject(now);
        }
        sim.land(now);
        for r in 0..t.router_count() as u32 {
            sim.drain(r, now);
            sim.route_arrivals(r, now);
        }
        sim.track_budget();
        if (now + 1) % cfg.queue_sample_period_ns == 0 {
            sim.sample(now + 1);
        }
        now += 1;
    }
    let in_flight = sim.count_in_flight();
    sim.stats.in_flight = in_flight;
    Ok(sim.stats)
}

impl Sim<'_> {
    fn slot(&self, time: u32) -> usize {
        time as usize % self.slots
    }

    fn inject(&mut self, now: u32) {
        let nodes = self.t.node_count() as u32;
        if nodes < 2 {
            return;
        }
        let full = self.cfg.per_link_messages();
        let (whole, frac) = match self.cfg.injection {
            Injection::MaxRate => (full as u32, 0.0),
            Injection::Fraction(f) => {
                let x = f * self.cfg.node_bandwidth / 2.0 / self.size as f64;
                let x = x.min(full);
                (x.floor() as u32, x - x.floor())
            }
        };
        let arrive = self.slot(now + self.hop);
        for n in 0..nodes {
            for &r in &self.t.attachments[n as usize] {
                let mut count = whole;
                if frac > 0.0 && self.inject_rng.random_bool(frac) {
                    count += 1;
                }
                for _ in 0..count {
                    let mut dst = self.inject_rng.random_range(0..nodes - 1);
                    if dst >= n {
                        dst += 1;
                    }
                    self.arrivals[arrive][r as usize].push(Msg {
                        inject: now,
                        packed: dst << HOP_BITS,
                    });
                }
                self.stats.injected += count as u64;
            }
        }
    }

    fn land(&mut self, now: u32) {
        let s = self.slot(now);
        for (lat, hops) in self.landing[s].drain(..) {
            self.stats.record_delivery(lat, hops, self.hop);
        }
    }

    fn send_router(&mut self, link: usize, to: u32, m: Msg, now: u32) {
        self.links.budget[link] -= self.size;
        let s = self.slot(now + self.hop);
        self.arrivals[s][to as usize].push(m.hopped());
    }

    fn send_node(&mut self, link: usize, m: Msg, now: u32) {
        self.links.budget[link] -= self.size;
        let s = self.slot(now + self.hop);
        self.landing[s].push((now + self.hop - m.inject, m.hops()));
    }

    fn drain(&mut self, r: u32, now: u32) {
        let ru = r as usize;
        for (i, &nbr) in self.t.adjacency[ru].iter().enumerate() {
            let link = self.links.router_off[ru] + i;
            while self.links.budget[link] >= self.size {
                let Some(m) = self.links.queues[link].pop_front() else {
                    break;
                };
                self.send_router(link, nbr, m, now);
            }
        }
        for j in 0..self.links.nodes_by_router[ru].len() {
            let link = self.links.node_off[ru] + j;
            while self.links.budget[link] >= self.size {
                let Some(m) = self.links.queues[link].pop_front() else {
                    break;
                };
                self.send_node(link, m, now);
            }
        }
    }

    fn route_arrivals(&mut self, r: u32, now: u32) {
        let s = self.slot(now);
        let mut batch = std::mem::take(&mut self.arrivals[s][r as usize]);
        for m in batch.drain(..) {
            self.route(r, m, now);
        }
        self.arrivals[s][r as usize] = batch;
    }

    fn route(&mut self, r: u32, m: Msg, now: u32) {
        let dst = m.dst();
        if let Some(link) = self.links.node_link(r, dst) {
            if self.links.budget[link] >= self.size && self.links.queues[link].is_empty() {
                self.send_node(link, m, now);
            } else {
                self.links.queues[link].push_back(m);
            }
            return;
        }
        let ru = r as usize;
        let pair = self.t.attachments[dst as usize];
        let adj = &self.t.adjacency[ru];
        let off = self.links.router_off[ru];
        self.scratch_hops.clear();
        self.scratch_hops.extend(
            self.routes
                .next_hops_to_pair(self.t, r, pair)
                .map(|h| adj.binary_search(&h).unwrap_or_default() as u32),
        );
        let open = self
            .scratch_hops
            .iter()
            .filter(|&&i| self.links.budget[off + i as usize] >= self.size)
            .count();
        if open > 0 {
            let pick = (m.inject as usize + dst as usize) % open;
            let i = self
                .scratch_hops
                .iter()
                .copied()
                .filter(|&i| self.links.budget[off + i as usize] >= self.size)
                .nth(pick)
                .unwrap_or_default() as usize;
            self.send_router(off + i, adj[i], m, now);
            return;
        }
        if m.hops() + 1 < self.cfg.hop_cap {
            self.scratch_pick.clear();
            self.scratch_pick
                .extend((0..adj.len() as u32).filter(|i| !self.scratch_hops.contains(i)));
            let k = (self.cfg.reroute_samples as usize).min(self.scratch_pick.len());
            for j in 0..k {
                let swap = self.route_rng.random_range(j..self.scratch_pick.len());
                self.scratch_pick.swap(j, swap);
                let i = self.scratch_pick[j] as usize;
                if self.links.budget[off + i] >= self.size {
                    self.stats.reroutes += 1;
                    self.send_router(off + i, adj[i], m, now);
                    return;
                }
            }
        } else {
            self.stats.hop_cap_triggers += 1;
        }
        let i = self
            .scratch_hops
            .iter()
            .copied()
            .min_by_key(|&i| self.links.queues[off + i as usize].len())
            .unwrap_or_default() as usize;
        self.links.queues[off + i].push_back(m);
    }

    fn track_budget(&mut self) {
        let lowest = self.links.budget[..self.links.router_links]
            .iter()
            .copied()
            .min();
        if let Some(lowest) = lowest {
            let used = self.router_bw - lowest;
            self.stats.max_router_link_bytes_per_ns =
                self.stats.max_router_link_bytes_per_ns.max(used);
        }
    }

    fn count_in_flight(&self) -> u64 {
        let queued: usize = self.links.queues.iter().map(VecDeque::len).sum();
        let travelling: usize = self.arrivals.iter().flatten().map(Vec::len).sum();
        let landing: usize = self.landing.iter().map(Vec::len).sum();
        (queued + travelling + landing) as u64
    }

    fn sample(&mut self, t_ns: u32) {
        let q = &self.links.queues;
        let longest = q.iter().map(VecDeque::len).max().unwrap_or(0);
        let busy = q.iter().filter(|q| !q.is_empty()).count();
        let in_flight = self.count_in_flight();
        self.stats.queue_series.push(QueueSample {
            t_ns,
            max_queue_bytes: longest as u64 * self.size as u64,
            frac_nonempty: if q.is_empty() {
                0.0
            } else {
                busy as f64 / q.len() as f64
            },
            injected: self.stats.injected,
            delivered: self.stats.delivered,
            in_flight,
        });
        if self.stats.injected != self.stats.delivered + in_flight {
            self.stats.conservation_violations += 1;
        }
    }
}

/// Expected bytes per ns on the busiest router link when every node injects
/// at `cfg`'s rate and traffic splits evenly over minimal next hops.
/// A link bandwidth below this cannot carry the offered load.
pub fn saturation_bandwidth(t: &Topology, routes: &RoutingTable, cfg: &NetConfig) -> f64 {
    let n = t.node_count();
    if n < 2 {
        return 0.0;
    }
    let per_node = match cfg.injection {
        Injection::MaxRate => 2.0 * cfg.per_link_messages() * cfg.message_bytes as f64,
        Injection::Fraction(f) => {
            (f * cfg.node_bandwidth).min(2.0 * cfg.per_link_messages() * cfg.message_bytes as f64)
        }
    };
    let routers = t.router_count();
    let links = Links::new(t);
    let mut load = vec![0.0; links.router_links];
    let mut pairs: Vec<[u32; 2]> = t.attachments.clone();
    pairs.sort_unstable();
    pairs.dedup();
    let mut per_pair = std::collections::HashMap::new();
    for a in &t.attachments {
        *per_pair.entry(*a).or_insert(0usize) += 1;
    }
    let mut flow = vec![0.0; routers];
    let mut order: Vec<u32> = (0..routers as u32).collect();
    for pair in pairs {
        let dests = per_pair[&pair] as f64;
        flow.iter_mut().for_each(|f| *f = 0.0);
        for (src, a) in t.attachments.iter().enumerate() {
            let own = if t.attachments[src] == pair { 1.0 } else { 0.0 };
            let share = per_node / 2.0 * (dests - own) / (n - 1) as f64;
            for &r in a {
                flow[r as usize] += share;
            }
        }
        order.sort_by_key(|&r| std::cmp::Reverse(routes.distance_to_pair(r, pair)));
        for &r in &order {
            let f = flow[r as usize];
            if f == 0.0 || routes.distance_to_pair(r, pair) == 0 {
                continue;
            }
            let hops: Vec<u32> = routes.next_hops_to_pair(t, r, pair).collect();
            let each = f / hops.len() as f64;
            for h in hops {
                let i = t.adjacency[r as usize]
                    .binary_search(&h)
                    .unwrap_or_default();
                load[links.router_off[r as usize] + i] += each;
                flow[h as usize] += each;
            }
        }
    }
    load.into_iter().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::routing::compute_routes;
    use crate::network::topology::synthetic;

    fn small() -> (Topology, RoutingTable) {
        let t = synthetic(16, 5, 32, 3).unwrap();
        let r = compute_routes(&t).unwrap();
        (t, r)
    }

    #[test]
    fn zero_injection() {
        let (t, r) = small();
        let cfg = NetConfig {
            injection: Injection::Fraction(0.0),
            ..NetConfig::default()
        };
        let s = simulate(&t, &r, &cfg).unwrap();
        assert_eq!(s.injected, 0);
        assert_eq!(s.delivered, 0);
        assert_eq!(s.queue_series.len(), 50);
        assert!(s
            .queue_series
            .iter()
            .all(|q| q.max_queue_bytes == 0 && q.frac_nonempty == 0.0));
    }

    #[test]
    fn light_load_is_unloaded() {
        let (t, r) = small();
        let cfg = NetConfig {
            injection: Injection::Fraction(0.0005),
            duration_ns: 3000,
            ..NetConfig::default()
        };
        let s = simulate(&t, &r, &cfg).unwrap();
        assert!(s.delivered > 0);
        assert!(s.latency.max().unwrap() <= 500);
        assert!(s.latency.max().unwrap() <= s.no_load_latency_ns);
        assert_eq!(s.latency_bound_violations, 0);
        assert_eq!(s.reroutes, 0);
    }

    #[test]
    fn single_message() {
        let t = Topology::new(3, &[(0, 1), (1, 2)], vec![[0, 1], [1, 2]], None).unwrap();
        let r = compute_routes(&t).unwrap();
        let cfg = NetConfig {
            injection: Injection::Fraction(1e-6),
            duration_ns: 2_000_000,
            queue_sample_period_ns: 1000,
            ..NetConfig::default()
        };
        let s = simulate(&t, &r, &cfg).unwrap();
        assert!(s.delivered > 0);
        assert!(s.latency.max().unwrap() <= 300);
        assert!(s.latency.min().unwrap() >= 200);
    }

    #[test]
    fn conservation_and_budget_under_load() {
        let (t, r) = small();
        let cfg = NetConfig {
            duration_ns: 1500,
            link_bandwidth: 600.0,
            ..NetConfig::default()
        };
        let s = simulate(&t, &r, &cfg).unwrap();
        assert_eq!(s.conservation_violations, 0);
        assert_eq!(s.injected, s.delivered + s.in_flight);
        assert!(s.max_router_link_bytes_per_ns <= 600);
        assert!(s.max_router_link_bytes_per_ns > 0);
        assert_eq!(s.latency_bound_violations, 0);
        assert!(s.reroutes > 0);
        assert!(s.queue_series.last().unwrap().max_queue_bytes > 0);
    }

    #[test]
    fn deterministic() {
        let (t, r) = small();
        let cfg = NetConfig {
            duration_ns: 800,
            link_bandwidth: 700.0,
            seed: 9,
            ..NetConfig::default()
        };
        let a = simulate(&t, &r, &cfg).unwrap();
        let b = simulate(&t, &r, &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate(&t, &r, &NetConfig { seed: 10, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn doubling_bandwidth_relieves_congestion() {
        let (t, r) = small();
        let base = NetConfig {
            duration_ns: 2000,
            ..NetConfig::default()
        };
        let sat = saturation_bandwidth(&t, &r, &base);
        let b = (sat / 2.0).floor();
        let lo = simulate(
            &t,
            &r,
            &NetConfig {
                link_bandwidth: b,
                ..base.clone()
            },
        )
        .unwrap();
        let hi = simulate(
            &t,
            &r,
            &NetConfig {
                link_bandwidth: 2.0 * b,
                ..base
            },
        )
        .unwrap();
        assert!(hi.latency.percentile(0.99) < lo.latency.percentile(0.99));
        assert!(hi.max_queue_bytes() < lo.max_queue_bytes());
    }

    #[test]
    fn saturation_of_two_routers() {
        let t = Topology::new(2, &[(0, 1)], vec![[0, 1], [0, 1]], None).unwrap();
        let r = compute_routes(&t).unwrap();
        assert_eq!(saturation_bandwidth(&t, &r, &NetConfig::default()), 0.0);
        let t = Topology::new(3, &[(0, 1), (1, 2)], vec![[0, 1], [1, 2]], None).unwrap();
        let r = compute_routes(&t).unwrap();
        let per_node = 2.0 * 64.0 * 34.0;
        assert_eq!(
            saturation_bandwidth(&t, &r, &NetConfig::default()),
            per_node / 2.0
        );
    }

    #[test]
    fn bad_config() {
        let (t, r) = small();
        for cfg in [
            NetConfig {
                duration_ns: 0,
                ..NetConfig::default()
            },
            NetConfig {
                link_bandwidth: 10.0,
                ..NetConfig::default()
            },
            NetConfig {
                injection: Injection::Fraction(1.5),
                ..NetConfig::default()
            },
            NetConfig {
                hop_cap: 40,
                ..NetConfig::default()
            },
        ] {
            assert!(matches!(simulate(&t, &r, &cfg), Err(Error::Parameter(_))));
        }
    }
}
