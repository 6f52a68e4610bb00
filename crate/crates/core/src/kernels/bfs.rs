use super::scan::{ScanItem, Scanners};
use super::{gteps, EdgeCounting, GraphView, DEFAULT_SWITCH_FRACTION, UNREACHED};
use crate::error::{Error, Result};
use crate::machine::{
    lb_tree, run_program, LaneCtx, LbNode, MachineConfig, PhaseCtx, Program, SimResult, Task,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BfsVariant {
    Push,
    PushPull,
    LbPush,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BfsOptions {
    pub source: u32,
    /// Pull levels run when the frontier's edge volume exceeds this share
    /// of all directed edges.
    pub switch_fraction: f64,
    pub counting: EdgeCounting,
    pub scanners_per_lane: u32,
}

impl Default for BfsOptions {
    fn default() -> Self {
        BfsOptions {
            source: 0,
            switch_fraction: DEFAULT_SWITCH_FRACTION,
            counting: EdgeCounting::Undirected,
            scanners_per_lane: 64,
        }
    }
}

impl BfsOptions {
    pub fn from_source(source: u32) -> Self {
        BfsOptions {
            source,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierStat {
    pub level: u32,
    pub vertices: u64,
    /// Sum of the frontier vertices' degrees.
    pub volume: u64,
    pub pull: bool,
    /// Edges the kernel actually touched while expanding this frontier.
    pub edges_traversed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfsResult {
    pub distance: Vec<u32>,
    pub frontiers: Vec<FrontierStat>,
    pub edges_traversed: u64,
    /// Edges in the GTEPS numerator, per the chosen [`EdgeCounting`].
    pub counted_edges: u64,
    pub gteps: f64,
    pub sim: SimResult,
}

const H_SCAN: u16 = 1;
const H_OFFSETS: u16 = 2;
const H_CHUNK: u16 = 3;
const H_VISIT: u16 = 4;
const H_ACTIVATE: u16 = 5;
const H_BITS: u16 = 6;
const H_GATHER: u16 = 7;
const H_GATHER_DONE: u16 = 8;
const H_LB_NODE: u16 = 9;
const H_LB_LEAF: u16 = 10;

const MODE_PUSH: u32 = 0;
const MODE_PULL: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Start,
    Gather,
    Level,
}

struct BfsProgram<'g> {
    view: GraphView<'g>,
    config: MachineConfig,
    variant: BfsVariant,
    opts: BfsOptions,
    dist: Vec<u32>,
    level: u32,
    frontier: Vec<Vec<u32>>,
    next: Vec<Vec<u32>>,
    scanners: Scanners,
    pull_units: Vec<Vec<u32>>,
    stats: Vec<FrontierStat>,
    stage: Stage,
    level_edges: u64,
    total_edges: u64,
    lb_nodes: Vec<LbNode>,
    lb_frontier: Vec<u32>,
}

impl<'g> BfsProgram<'g> {
    fn new(
        view: GraphView<'g>,
        config: &MachineConfig,
        variant: BfsVariant,
        opts: BfsOptions,
    ) -> Result<Self> {
        if opts.source as usize >= view.masters() {
            return Err(Error::Parameter(format!(
                "source {} out of range for {} vertices",
                opts.source,
                view.masters()
            )));
        }
        if !(opts.switch_fraction > 0.0 && opts.switch_fraction < 1.0) {
            return Err(Error::Parameter(
                "switch_fraction must lie in (0, 1)".into(),
            ));
        }
        if variant == BfsVariant::LbPush && matches!(view, GraphView::Split(_)) {
            return Err(Error::Parameter(
                "load-balanced BFS runs on the unsplit graph".into(),
            ));
        }
        let lanes = config.total_lanes() as usize;
        let mut pull_units = vec![Vec::new(); lanes];
        if variant == BfsVariant::PushPull {
            for u in 0..view.units() as u32 {
                pull_units[config.lane_of(u as u64) as usize].push(u);
            }
        }
        let b = &config.budgets;
        Ok(BfsProgram {
            view,
            config: config.clone(),
            variant,
            dist: vec![UNREACHED; view.masters()],
            level: 0,
            frontier: vec![Vec::new(); lanes],
            next: vec![Vec::new(); lanes],
            scanners: Scanners::new(
                lanes,
                opts.scanners_per_lane,
                H_OFFSETS,
                H_CHUNK,
                b.chunk_base,
            ),
            pull_units,
            stats: Vec::new(),
            stage: Stage::Start,
            level_edges: 0,
            total_edges: 0,
            lb_nodes: Vec::new(),
            lb_frontier: Vec::new(),
            opts,
        })
    }

    fn lane_of(&self, v: u32) -> u32 {
        self.config.lane_of(v as u64)
    }

    fn unit_degree(&self, u: u32) -> u32 {
        self.view.base().degree(u) as u32
    }

    fn count(&mut self, ctx: &mut LaneCtx<'_>, edges: u64) {
        ctx.count_edges(edges);
        self.level_edges += edges;
    }

    fn visit(&mut self, ctx: &mut LaneCtx<'_>, m: u32) -> Result<()> {
        let Some(d) = self.dist.get_mut(m as usize) else {
            return Err(ctx.fault(format!("visit of vertex {m} out of range")));
        };
        if *d == UNREACHED {
            *d = self.level + 1;
            ctx.dram_write(m as u64, 1)?;
            self.next[ctx.lane() as usize].push(m);
        }
        Ok(())
    }

    fn activate_children(&mut self, ctx: &mut LaneCtx<'_>, u: u32) {
        let reduce = self.config.budgets.reduce;
        let children: Vec<u32> = self.view.tree_children(u).collect();
        for c in children {
            let lane = self.lane_of(c);
            ctx.send(lane, Task::new(H_ACTIVATE, reduce, [c as u64, 0, 0, 0]));
        }
    }

    fn push_item(&self, u: u32) -> ScanItem {
        ScanItem {
            unit: u,
            lo: 0,
            hi: self.unit_degree(u),
            mode: MODE_PUSH,
        }
    }

    fn scan(&mut self, ctx: &mut LaneCtx<'_>, mode: u32) -> Result<()> {
        let lane = ctx.lane() as usize;
        if mode == MODE_PUSH {
            let list = std::mem::take(&mut self.frontier[lane]);
            ctx.charge(list.len() as u64);
            for &m in &list {
                let item = self.push_item(m);
                self.scanners.enqueue(ctx.lane(), item);
                if self.view.copy_count(m) > 1 {
                    self.activate_children(ctx, m);
                }
            }
            self.frontier[lane] = list;
        } else {
            let mut list = std::mem::take(&mut self.pull_units[lane]);
            ctx.charge(list.len() as u64);
            list.retain(|&u| self.dist[self.view.master_of(u) as usize] == UNREACHED);
            for &u in &list {
                self.scanners.enqueue(
                    ctx.lane(),
                    ScanItem {
                        unit: u,
                        lo: 0,
                        hi: self.unit_degree(u),
                        mode: MODE_PULL,
                    },
                );
            }
            self.pull_units[lane] = list;
        }
        self.scanners.pump(ctx)
    }

    fn on_chunk(&mut self, ctx: &mut LaneCtx<'_>, payload: &[u64; 4]) -> Result<()> {
        let (item, pos) = ScanItem::decode(payload);
        let end = item.chunk_end(pos);
        let g = self.view.base();
        let nbrs = &g.neighbors(item.unit)[pos as usize..end as usize];
        if item.mode == MODE_PUSH {
            for &w in nbrs {
                let m = self.view.master_of(w);
                let lane = self.lane_of(m);
                ctx.send(
                    lane,
                    Task::new(
                        H_VISIT,
                        self.config.budgets.edge_update,
                        [m as u64, 0, 0, 0],
                    ),
                );
            }
            self.count(ctx, nbrs.len() as u64);
            self.scanners.next(ctx)
        } else {
            if self.dist[self.view.master_of(item.unit) as usize] != UNREACHED {
                return self.scanners.next(ctx);
            }
            let masters: Vec<u32> = nbrs.iter().map(|&w| self.view.master_of(w)).collect();
            ctx.dram_gather(
                &masters,
                Task::new(H_BITS, self.config.budgets.chunk_base, *payload),
            )
        }
    }

    fn on_bits(&mut self, ctx: &mut LaneCtx<'_>, payload: &[u64; 4]) -> Result<()> {
        let (item, pos) = ScanItem::decode(payload);
        let end = item.chunk_end(pos);
        let g = self.view.base();
        let mut checked = 0u64;
        let mut found = false;
        for &w in &g.neighbors(item.unit)[pos as usize..end as usize] {
            checked += 1;
            if self.dist[self.view.master_of(w) as usize] == self.level {
                found = true;
                break;
            }
        }
        ctx.charge(checked);
        self.count(ctx, checked);
        if found {
            let m = self.view.master_of(item.unit);
            let lane = self.lane_of(m);
            ctx.send(
                lane,
                Task::new(
                    H_VISIT,
                    self.config.budgets.edge_update,
                    [m as u64, 0, 0, 0],
                ),
            );
            self.scanners.next(ctx)
        } else {
            self.scanners.advance(ctx, item, pos)
        }
    }

    fn on_lb_node(&mut self, ctx: &mut LaneCtx<'_>, idx: usize) -> Result<()> {
        let node = self
            .lb_nodes
            .get(idx)
            .cloned()
            .ok_or_else(|| ctx.fault("bad tree node"))?;
        let cost = self.config.budgets.chunk_base;
        for &c in &node.children {
            let worker = self.lb_nodes[c].worker;
            ctx.send(worker, Task::new(H_LB_NODE, cost, [c as u64, 0, 0, 0]));
        }
        for (i, leaf) in node.leaves.iter().enumerate() {
            if leaf.worker == ctx.lane() {
                self.run_leaf(ctx, idx, i)?;
            } else {
                ctx.send(
                    leaf.worker,
                    Task::new(H_LB_LEAF, cost, [idx as u64, i as u64, 0, 0]),
                );
            }
        }
        Ok(())
    }

    fn run_leaf(&mut self, ctx: &mut LaneCtx<'_>, node: usize, leaf: usize) -> Result<()> {
        let a = *self
            .lb_nodes
            .get(node)
            .and_then(|n| n.leaves.get(leaf))
            .ok_or_else(|| ctx.fault("bad tree leaf"))?;
        ctx.charge((a.end - a.start) as u64);
        for i in a.start..a.end {
            let u = self.lb_frontier[i];
            let d = self.unit_degree(u) as u64;
            let (lo, hi) = if a.parts > 1 {
                (
                    d * a.part as u64 / a.parts as u64,
                    d * (a.part as u64 + 1) / a.parts as u64,
                )
            } else {
                (0, d)
            };
            self.scanners.enqueue(
                ctx.lane(),
                ScanItem {
                    unit: u,
                    lo: lo as u32,
                    hi: hi as u32,
                    mode: MODE_PUSH,
                },
            );
        }
        self.scanners.pump(ctx)
    }

    fn finish_level(&mut self) {
        if let Some(s) = self.stats.last_mut() {
            s.edges_traversed = self.level_edges;
        }
        self.total_edges += self.level_edges;
        self.level_edges = 0;
        for (f, n) in self.frontier.iter_mut().zip(self.next.iter_mut()) {
            f.clear();
            std::mem::swap(f, n);
        }
        self.level += 1;
    }
}

impl Program for BfsProgram<'_> {
    fn next_phase(&mut self, phase: &mut PhaseCtx<'_>) -> Result<bool> {
        match self.stage {
            Stage::Start => {
                let s = self.opts.source;
                self.dist[s as usize] = 0;
                let lane = self.lane_of(s) as usize;
                self.frontier[lane].push(s);
            }
            Stage::Gather => {
                self.lb_frontier = self.frontier.concat();
                let weights: Vec<u64> = self
                    .lb_frontier
                    .iter()
                    .map(|&u| self.unit_degree(u) as u64)
                    .collect();
                let lanes = self.config.total_lanes();
                self.lb_nodes = lb_tree(&weights, 0..lanes);
                self.stage = Stage::Level;
                phase.set_label(format!("level {}", self.level));
                if let Some(root) = self.lb_nodes.first() {
                    phase.launch(
                        root.worker,
                        Task::new(H_LB_NODE, self.config.budgets.chunk_base, [0; 4]),
                    );
                }
                return Ok(true);
            }
            Stage::Level => {
                debug_assert!(self.scanners.is_idle());
                self.finish_level();
            }
        }
        let vertices: u64 = self.frontier.iter().map(|f| f.len() as u64).sum();
        if vertices == 0 {
            return Ok(false);
        }
        let volume: u64 = self
            .frontier
            .iter()
            .flatten()
            .map(|&m| self.view.master_degree(m))
            .sum();
        let directed = 2 * self.view.undirected_edges();
        let pull = self.variant == BfsVariant::PushPull
            && volume as f64 > self.opts.switch_fraction * directed as f64;
        self.stats.push(FrontierStat {
            level: self.level,
            vertices,
            volume,
            pull,
            edges_traversed: 0,
        });
        let cost = self.config.budgets.chunk_base;
        if self.variant == BfsVariant::LbPush {
            self.stage = Stage::Gather;
            phase.set_label(format!("level {} gather", self.level));
            phase.broadcast(H_GATHER, cost, 0);
        } else {
            self.stage = Stage::Level;
            let mode = if pull { MODE_PULL } else { MODE_PUSH };
            phase.set_label(if pull {
                format!("level {} pull", self.level)
            } else {
                format!("level {}", self.level)
            });
            phase.broadcast(H_SCAN, cost, mode as u64);
        }
        Ok(true)
    }

    fn handle(&mut self, ctx: &mut LaneCtx<'_>, task: Task) -> Result<()> {
        let p = task.payload;
        match task.handler {
            H_SCAN => self.scan(ctx, p[2] as u32),
            H_OFFSETS => {
                let (item, _) = ScanItem::decode(&p);
                if item.mode == MODE_PUSH {
                    return self.scanners.fan_out(ctx, &p);
                }
                if self.dist[self.view.master_of(item.unit) as usize] != UNREACHED {
                    return self.scanners.next(ctx);
                }
                self.scanners.on_offsets(ctx, &p)
            }
            H_CHUNK => self.on_chunk(ctx, &p),
            H_BITS => self.on_bits(ctx, &p),
            H_VISIT => self.visit(ctx, p[0] as u32),
            H_ACTIVATE => {
                let u = p[0] as u32;
                self.activate_children(ctx, u);
                let item = self.push_item(u);
                self.scanners.enqueue(ctx.lane(), item);
                self.scanners.pump(ctx)
            }
            H_GATHER => {
                let entries = self.frontier[ctx.lane() as usize].len() as u64;
                // Vertex and degree pairs, four per eight-word store.
                for _ in 0..entries.div_ceil(4) {
                    ctx.dram_write(ctx.lane() as u64, 8)?;
                }
                ctx.send(
                    0,
                    Task::new(
                        H_GATHER_DONE,
                        self.config.budgets.reduce,
                        [entries, 0, 0, 0],
                    ),
                );
                Ok(())
            }
            H_GATHER_DONE => Ok(()),
            H_LB_NODE => self.on_lb_node(ctx, p[0] as usize),
            H_LB_LEAF => self.run_leaf(ctx, p[0] as usize, p[1] as usize),
            other => Err(ctx.fault(format!("unknown BFS handler {other}"))),
        }
    }
}

/// Runs one of the BFS variants on the lane machine.
pub fn run_bfs(
    view: GraphView<'_>,
    config: &MachineConfig,
    variant: BfsVariant,
    opts: &BfsOptions,
) -> Result<BfsResult> {
    let mut program = BfsProgram::new(view, config, variant, opts.clone())?;
    let mut sim = run_program(config, &mut program)?;
    sim.kernel = match variant {
        BfsVariant::Push => "push_bfs",
        BfsVariant::PushPull => "push_pull_bfs",
        BfsVariant::LbPush => "lb_push_bfs",
    }
    .to_string();
    sim.scale = view.scale();
    let edges_traversed = program.total_edges;
    let counted_edges = match opts.counting {
        EdgeCounting::Directed => edges_traversed,
        EdgeCounting::Undirected => {
            let reached: u64 = (0..view.masters() as u32)
                .filter(|&m| program.dist[m as usize] != UNREACHED)
                .map(|m| view.master_degree(m))
                .sum();
            reached / 2
        }
    };
    Ok(BfsResult {
        gteps: gteps(counted_edges, sim.elapsed_seconds),
        distance: program.dist,
        frontiers: program.stats,
        edges_traversed,
        counted_edges,
        sim,
    })
}

/// Level-synchronous push BFS.
pub fn push_bfs<'g>(
    g: impl Into<GraphView<'g>>,
    config: &MachineConfig,
    source: u32,
) -> Result<BfsResult> {
    run_bfs(
        g.into(),
        config,
        BfsVariant::Push,
        &BfsOptions::from_source(source),
    )
}

/// Direction-optimizing BFS with the given frontier-volume threshold.
pub fn push_pull_bfs<'g>(
    g: impl Into<GraphView<'g>>,
    config: &MachineConfig,
    source: u32,
    switch_fraction: f64,
) -> Result<BfsResult> {
    let opts = BfsOptions {
        switch_fraction,
        ..BfsOptions::from_source(source)
    };
    run_bfs(g.into(), config, BfsVariant::PushPull, &opts)
}

/// Push BFS whose frontier is spread by the load-balanced parallel-for.
pub fn lb_push_bfs(
    g: &crate::graph::Graph,
    config: &MachineConfig,
    source: u32,
) -> Result<BfsResult> {
    run_bfs(
        g.into(),
        config,
        BfsVariant::LbPush,
        &BfsOptions::from_source(source),
    )
}
