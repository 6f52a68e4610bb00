use super::oracle::{normalize, power_iteration_oracle};
use super::scan::{ScanItem, Scanners};
use super::{gteps, GraphView, DEFAULT_ALPHA};
use crate::error::{Error, Result};
use crate::machine::{
    run_program, CacheOutcome, LaneCtx, MachineConfig, PhaseCtx, Program, SimResult, SoftwareCache,
    Task,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrVariant {
    Push,
    DataDriven,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrOptions {
    pub alpha: f64,
    /// Convergence threshold; `None` means `1/n`.
    pub tol: Option<f64>,
    /// Iteration cap; `None` means 1000 for push and 5 for data-driven.
    pub max_iters: Option<usize>,
    pub scanners_per_lane: u32,
}

impl Default for PrOptions {
    fn default() -> Self {
        PrOptions {
            alpha: DEFAULT_ALPHA,
            tol: None,
            max_iters: None,
            scanners_per_lane: 64,
        }
    }
}

impl PrOptions {
    pub fn with_tol(tol: f64, max_iters: usize) -> Self {
        PrOptions {
            tol: Some(tol),
            max_iters: Some(max_iters),
            ..Default::default()
        }
    }

    fn resolve(&self, n: usize, variant: PrVariant) -> Result<(f64, usize)> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Parameter("alpha must lie in (0, 1)".into()));
        }
        let tol = self.tol.unwrap_or(1.0 / n.max(1) as f64);
        if !(tol > 0.0) {
            return Err(Error::Parameter("tol must be positive".into()));
        }
        let cap = self.max_iters.unwrap_or(match variant {
            PrVariant::Push => 1000,
            PrVariant::DataDriven => 5,
        });
        if cap == 0 {
            return Err(Error::Parameter("max_iters must be at least 1".into()));
        }
        Ok((tol, cap))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrResult {
    /// Scores scaled to sum to one.
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub edges_traversed: u64,
    pub gteps: f64,
    /// Push work to the same tolerance over this run's time (data-driven only).
    pub effective_gteps: Option<f64>,
    /// The iteration cap stopped the run before convergence.
    pub capped: bool,
    pub tol: f64,
    pub active_counts: Vec<u64>,
    pub active_volumes: Vec<u64>,
    pub sim: SimResult,
}

const H_SCAN: u16 = 1;
const H_OFFSETS: u16 = 2;
const H_CHUNK: u16 = 3;
const H_ACC: u16 = 4;
const H_APPLY: u16 = 5;
const H_REDUCE: u16 = 6;
const H_BCAST: u16 = 7;
const H_SUM: u16 = 8;
const H_ACTIVATE: u16 = 9;
const H_RESID: u16 = 10;
const H_FLUSH: u16 = 11;

const MODE_PULL: u32 = 1;
const MODE_PUSH: u32 = 0;

fn units_by_lane(view: &GraphView<'_>, config: &MachineConfig) -> Vec<Vec<u32>> {
    let mut lanes = vec![Vec::new(); config.total_lanes() as usize];
    for u in 0..view.units() as u32 {
        lanes[config.lane_of(u as u64) as usize].push(u);
    }
    lanes
}

fn bits(x: f64) -> u64 {
    x.to_bits()
}

fn unbits(w: u64) -> f64 {
    f64::from_bits(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Start,
    Push,
    Apply,
    Done,
}

struct PushPr<'g> {
    view: GraphView<'g>,
    config: MachineConfig,
    alpha: f64,
    tol: f64,
    cap: usize,
    x: Vec<f64>,
    acc: Vec<f64>,
    pending: Vec<u32>,
    lanes: Vec<Vec<u32>>,
    caches: Vec<SoftwareCache>,
    scanners: Scanners,
    stage: Stage,
    iterations: usize,
    max_delta: f64,
    capped: bool,
    edges: u64,
}

impl<'g> PushPr<'g> {
    fn new(view: GraphView<'g>, config: &MachineConfig, opts: &PrOptions) -> Result<Self> {
        let n = view.masters();
        let (tol, cap) = opts.resolve(n, PrVariant::Push)?;
        let penalty = config.local_dram_cycles();
        Ok(PushPr {
            view,
            config: config.clone(),
            alpha: opts.alpha,
            tol,
            cap,
            x: vec![1.0 / n.max(1) as f64; n],
            acc: vec![0.0; view.units()],
            pending: vec![0; view.units()],
            lanes: units_by_lane(&view, config),
            caches: (0..config.total_lanes())
                .map(|_| SoftwareCache::for_scratchpad(config.scratchpad_bytes, penalty))
                .collect(),
            scanners: Scanners::new(
                config.total_lanes() as usize,
                opts.scanners_per_lane,
                H_OFFSETS,
                H_CHUNK,
                config.budgets.chunk_base,
            ),
            stage: Stage::Start,
            iterations: 0,
            max_delta: 0.0,
            capped: false,
            edges: 0,
        })
    }

    fn arrive(&mut self, ctx: &mut LaneCtx<'_>, u: u32) -> Result<()> {
        let p = &mut self.pending[u as usize];
        if *p == 0 {
            return Err(ctx.fault(format!("unit {u} reduced twice")));
        }
        *p -= 1;
        if *p > 0 {
            return Ok(());
        }
        let sum = std::mem::take(&mut self.acc[u as usize]);
        match self.view.tree_parent(u) {
            Some(parent) => {
                let lane = self.config.lane_of(parent as u64);
                ctx.send(
                    lane,
                    Task::new(
                        H_REDUCE,
                        self.config.budgets.reduce,
                        [parent as u64, bits(sum), 0, 0],
                    ),
                );
            }
            None => {
                let n = self.view.masters() as f64;
                // Pushed values already carry the damping factor.
                let new = (1.0 - self.alpha) / n + sum;
                let old = &mut self.x[u as usize];
                self.max_delta = self.max_delta.max((new - *old).abs());
                *old = new;
                ctx.charge(self.config.budgets.vertex_task as u64);
                ctx.dram_write(u as u64, 1)?;
                self.bcast(ctx, u);
            }
        }
        Ok(())
    }

    fn bcast(&mut self, ctx: &mut LaneCtx<'_>, u: u32) {
        let children: Vec<u32> = self.view.tree_children(u).collect();
        for c in children {
            let lane = self.config.lane_of(c as u64);
            ctx.send(
                lane,
                Task::new(H_BCAST, self.config.budgets.reduce, [c as u64, 0, 0, 0]),
            );
        }
    }
}

impl Program for PushPr<'_> {
    fn next_phase(&mut self, phase: &mut PhaseCtx<'_>) -> Result<bool> {
        let cost = self.config.budgets.chunk_base;
        match self.stage {
            Stage::Start | Stage::Apply => {
                if self.stage == Stage::Apply {
                    self.iterations += 1;
                    if self.max_delta < self.tol {
                        self.stage = Stage::Done;
                        return Ok(false);
                    }
                    if self.iterations >= self.cap {
                        self.capped = true;
                        self.stage = Stage::Done;
                        return Ok(false);
                    }
                }
                if self.view.masters() == 0 {
                    return Ok(false);
                }
                self.stage = Stage::Push;
                phase.set_label(format!("iter {} push", self.iterations));
                phase.broadcast(H_SCAN, cost, 0);
            }
            Stage::Push => {
                self.stage = Stage::Apply;
                self.max_delta = 0.0;
                for u in 0..self.view.units() as u32 {
                    self.pending[u as usize] = self.view.tree_child_count(u) + 1;
                }
                phase.set_label(format!("iter {} apply", self.iterations));
                phase.broadcast(H_APPLY, cost, 0);
            }
            Stage::Done => return Ok(false),
        }
        Ok(true)
    }

    fn handle(&mut self, ctx: &mut LaneCtx<'_>, task: Task) -> Result<()> {
        let p = task.payload;
        match task.handler {
            H_SCAN => {
                let lane = ctx.lane() as usize;
                let g = self.view.base();
                ctx.charge(self.lanes[lane].len() as u64);
                for &u in &self.lanes[lane] {
                    let d = g.degree(u) as u32;
                    if d > 0 {
                        self.scanners.enqueue(
                            ctx.lane(),
                            ScanItem {
                                unit: u,
                                lo: 0,
                                hi: d,
                                mode: MODE_PUSH,
                            },
                        );
                    }
                }
                self.scanners.pump(ctx)
            }
            H_OFFSETS => self.scanners.fan_out(ctx, &p),
            H_CHUNK => {
                let (item, pos) = ScanItem::decode(&p);
                let m = self.view.master_of(item.unit);
                let value = self.alpha * self.x[m as usize] / self.view.master_degree(m) as f64;
                let end = item.chunk_end(pos);
                let g = self.view.base();
                for &w in &g.neighbors(item.unit)[pos as usize..end as usize] {
                    let lane = self.config.lane_of(w as u64);
                    ctx.send(
                        lane,
                        Task::new(
                            H_ACC,
                            self.config.budgets.edge_update,
                            [w as u64, bits(value), 0, 0],
                        ),
                    );
                }
                let n = (end - pos) as u64;
                ctx.count_edges(n);
                self.edges += n;
                self.scanners.next(ctx)
            }
            H_ACC => {
                let w = p[0] as usize;
                if let CacheOutcome::ConflictMiss { penalty_cycles } =
                    self.caches[ctx.lane() as usize].touch(w as u64)
                {
                    ctx.charge(penalty_cycles);
                }
                self.acc[w] += unbits(p[1]);
                Ok(())
            }
            H_APPLY => {
                let lane = ctx.lane() as usize;
                let resident = self.caches[lane].flush() as u64;
                ctx.charge(resident * self.config.costs.dram_issue as u64);
                let units = std::mem::take(&mut self.lanes[lane]);
                ctx.charge(units.len() as u64);
                let mut out = Ok(());
                for &u in &units {
                    out = self.arrive(ctx, u);
                    if out.is_err() {
                        break;
                    }
                }
                self.lanes[lane] = units;
                out
            }
            H_REDUCE => {
                let u = p[0] as u32;
                self.acc[u as usize] += unbits(p[1]);
                self.arrive(ctx, u)
            }
            H_BCAST => {
                self.bcast(ctx, p[0] as u32);
                Ok(())
            }
            other => Err(ctx.fault(format!("unknown push PageRank handler {other}"))),
        }
    }
}

struct DataDrivenPr<'g> {
    view: GraphView<'g>,
    config: MachineConfig,
    alpha: f64,
    tol: f64,
    cap: usize,
    x: Vec<f64>,
    x_next: Vec<f64>,
    delta: Vec<f64>,
    resid: Vec<f64>,
    flagged: Vec<bool>,
    partial: Vec<f64>,
    pending: Vec<u32>,
    remaining: Vec<u32>,
    active: Vec<Vec<u32>>,
    candidates: Vec<Vec<u32>>,
    masters_by_lane: Vec<Vec<u32>>,
    scanners: Scanners,
    stage: Stage,
    iterations: usize,
    capped: bool,
    edges: u64,
    active_counts: Vec<u64>,
    active_volumes: Vec<u64>,
}

impl<'g> DataDrivenPr<'g> {
    fn new(view: GraphView<'g>, config: &MachineConfig, opts: &PrOptions) -> Result<Self> {
        let n = view.masters();
        let (tol, cap) = opts.resolve(n, PrVariant::DataDriven)?;
        let lanes = config.total_lanes() as usize;
        let mut masters_by_lane = vec![Vec::new(); lanes];
        for m in 0..n as u32 {
            masters_by_lane[config.lane_of(m as u64) as usize].push(m);
        }
        Ok(DataDrivenPr {
            view,
            config: config.clone(),
            alpha: opts.alpha,
            tol,
            cap,
            x: vec![1.0 / n.max(1) as f64; n],
            x_next: vec![0.0; n],
            delta: vec![0.0; n],
            resid: vec![0.0; n],
            flagged: vec![false; n],
            partial: vec![0.0; view.units()],
            pending: vec![0; view.units()],
            remaining: vec![0; view.units()],
            active: masters_by_lane.clone(),
            candidates: vec![Vec::new(); lanes],
            masters_by_lane,
            scanners: Scanners::new(
                lanes,
                opts.scanners_per_lane,
                H_OFFSETS,
                H_CHUNK,
                config.budgets.chunk_base,
            ),
            stage: Stage::Start,
            iterations: 0,
            capped: false,
            edges: 0,
            active_counts: Vec::new(),
            active_volumes: Vec::new(),
        })
    }

    fn activate(&mut self, ctx: &mut LaneCtx<'_>, u: u32) {
        self.pending[u as usize] = self.view.tree_child_count(u) + 1;
        self.partial[u as usize] = 0.0;
        let children: Vec<u32> = self.view.tree_children(u).collect();
        for c in children {
            let lane = self.config.lane_of(c as u64);
            ctx.send(
                lane,
                Task::new(
                    H_ACTIVATE,
                    self.config.budgets.reduce,
                    [c as u64, MODE_PULL as u64, 0, 0],
                ),
            );
        }
        let hi = self.view.base().degree(u) as u32;
        self.scanners.enqueue(
            ctx.lane(),
            ScanItem {
                unit: u,
                lo: 0,
                hi,
                mode: MODE_PULL,
            },
        );
    }

    fn start_push(&mut self, ctx: &mut LaneCtx<'_>, u: u32) -> Result<()> {
        let children: Vec<u32> = self.view.tree_children(u).collect();
        for c in children {
            let lane = self.config.lane_of(c as u64);
            ctx.send(
                lane,
                Task::new(
                    H_ACTIVATE,
                    self.config.budgets.reduce,
                    [c as u64, MODE_PUSH as u64, 0, 0],
                ),
            );
        }
        let hi = self.view.base().degree(u) as u32;
        if hi > 0 {
            self.scanners.enqueue(
                ctx.lane(),
                ScanItem {
                    unit: u,
                    lo: 0,
                    hi,
                    mode: MODE_PUSH,
                },
            );
        }
        self.scanners.pump(ctx)
    }

    fn arrive(&mut self, ctx: &mut LaneCtx<'_>, u: u32) -> Result<()> {
        let p = &mut self.pending[u as usize];
        if *p == 0 {
            return Err(ctx.fault(format!("unit {u} reduced twice")));
        }
        *p -= 1;
        if *p > 0 {
            return Ok(());
        }
        let sum = self.partial[u as usize];
        match self.view.tree_parent(u) {
            Some(parent) => {
                let lane = self.config.lane_of(parent as u64);
                ctx.send(
                    lane,
                    Task::new(
                        H_REDUCE,
                        self.config.budgets.reduce,
                        [parent as u64, bits(sum), 0, 0],
                    ),
                );
                Ok(())
            }
            None => {
                let m = u as usize;
                let n = self.view.masters() as f64;
                let fresh = (1.0 - self.alpha) / n + self.alpha * sum;
                self.x_next[m] = fresh;
                self.delta[m] = fresh - self.x[m];
                ctx.charge(self.config.budgets.vertex_task as u64);
                ctx.dram_write(u as u64, 1)?;
                self.start_push(ctx, u)
            }
        }
    }

    /// Ends a scanner's slice during the pull stage.
    fn pull_done(&mut self, ctx: &mut LaneCtx<'_>, u: u32) -> Result<()> {
        self.arrive(ctx, u)?;
        self.scanners.next(ctx)
    }

    fn end_iteration(&mut self) {
        for lane in 0..self.active.len() {
            for &m in &self.active[lane] {
                self.x[m as usize] = self.x_next[m as usize];
            }
            let mut next = std::mem::take(&mut self.candidates[lane]);
            for &w in &next {
                self.flagged[w as usize] = false;
            }
            next.retain(|&w| self.resid[w as usize].abs() >= self.tol);
            next.sort_unstable();
            self.active[lane] = next;
        }
        self.iterations += 1;
    }
}

impl Program for DataDrivenPr<'_> {
    fn next_phase(&mut self, phase: &mut PhaseCtx<'_>) -> Result<bool> {
        let cost = self.config.budgets.chunk_base;
        match self.stage {
            Stage::Done => return Ok(false),
            Stage::Apply => {
                self.stage = Stage::Done;
                return Ok(false);
            }
            Stage::Push => self.end_iteration(),
            Stage::Start => {}
        }
        let count: u64 = self.active.iter().map(|a| a.len() as u64).sum();
        if count == 0 || self.iterations >= self.cap {
            self.capped = count > 0;
            if self.view.masters() == 0 {
                return Ok(false);
            }
            self.stage = Stage::Apply;
            phase.set_label("flush");
            phase.broadcast(H_FLUSH, cost, 0);
            return Ok(true);
        }
        let volume: u64 = self
            .active
            .iter()
            .flatten()
            .map(|&m| self.view.master_degree(m))
            .sum();
        self.active_counts.push(count);
        self.active_volumes.push(volume);
        for &m in self.active.iter().flatten() {
            self.resid[m as usize] = 0.0;
        }
        self.stage = Stage::Push;
        phase.set_label(format!("iter {}", self.iterations));
        phase.broadcast(H_SCAN, cost, 0);
        Ok(true)
    }

    fn handle(&mut self, ctx: &mut LaneCtx<'_>, task: Task) -> Result<()> {
        let p = task.payload;
        match task.handler {
            H_SCAN => {
                let lane = ctx.lane() as usize;
                let list = std::mem::take(&mut self.active[lane]);
                ctx.charge(list.len() as u64);
                for &m in &list {
                    self.activate(ctx, m);
                }
                self.active[lane] = list;
                self.scanners.pump(ctx)
            }
            H_ACTIVATE => {
                let u = p[0] as u32;
                if p[1] as u32 == MODE_PULL {
                    self.activate(ctx, u);
                    self.scanners.pump(ctx)
                } else {
                    self.start_push(ctx, u)
                }
            }
            H_OFFSETS => {
                let (item, _) = ScanItem::decode(&p);
                if item.mode == MODE_PULL {
                    let chunks = Scanners::chunk_count(&item);
                    self.remaining[item.unit as usize] = chunks;
                    if chunks == 0 {
                        return self.pull_done(ctx, item.unit);
                    }
                }
                self.scanners.fan_out(ctx, &p)
            }
            H_CHUNK => {
                let (item, pos) = ScanItem::decode(&p);
                let end = item.chunk_end(pos);
                let g = self.view.base();
                let nbrs = &g.neighbors(item.unit)[pos as usize..end as usize];
                if item.mode == MODE_PULL {
                    let masters: Vec<u32> = nbrs.iter().map(|&w| self.view.master_of(w)).collect();
                    ctx.dram_gather(
                        &masters,
                        Task::new(H_SUM, self.config.budgets.chunk_base, p),
                    )
                } else {
                    let m = self.view.master_of(item.unit);
                    let value =
                        self.alpha * self.delta[m as usize] / self.view.master_degree(m) as f64;
                    for &w in nbrs {
                        let target = self.view.master_of(w);
                        let lane = self.config.lane_of(target as u64);
                        ctx.send(
                            lane,
                            Task::new(
                                H_RESID,
                                self.config.budgets.edge_update,
                                [target as u64, bits(value), 0, 0],
                            ),
                        );
                    }
                    self.scanners.next(ctx)
                }
            }
            H_SUM => {
                let (item, pos) = ScanItem::decode(&p);
                let end = item.chunk_end(pos);
                let g = self.view.base();
                let mut s = 0.0;
                for &w in &g.neighbors(item.unit)[pos as usize..end as usize] {
                    let m = self.view.master_of(w);
                    s += self.x[m as usize] / self.view.master_degree(m) as f64;
                }
                self.partial[item.unit as usize] += s;
                let n = (end - pos) as u64;
                ctx.charge(n);
                ctx.count_edges(n);
                self.edges += n;
                let left = &mut self.remaining[item.unit as usize];
                *left -= 1;
                if *left == 0 {
                    self.pull_done(ctx, item.unit)
                } else {
                    self.scanners.next(ctx)
                }
            }
            H_REDUCE => {
                let u = p[0] as u32;
                self.partial[u as usize] += unbits(p[1]);
                self.arrive(ctx, u)
            }
            H_RESID => {
                let w = p[0] as usize;
                self.resid[w] += unbits(p[1]);
                if !self.flagged[w] && self.resid[w].abs() >= self.tol {
                    self.flagged[w] = true;
                    self.candidates[ctx.lane() as usize].push(w as u32);
                }
                Ok(())
            }
            H_FLUSH => {
                let lane = ctx.lane() as usize;
                ctx.charge(self.masters_by_lane[lane].len() as u64);
                for &m in &self.masters_by_lane[lane] {
                    let r = std::mem::take(&mut self.resid[m as usize]);
                    if r != 0.0 {
                        self.x[m as usize] += r;
                        ctx.charge(self.config.budgets.vertex_task as u64);
                        ctx.dram_write(m as u64, 1)?;
                    }
                }
                Ok(())
            }
            other => Err(ctx.fault(format!("unknown data-driven PageRank handler {other}"))),
        }
    }
}

/// Iterations the push kernel needs to reach `tol`, from a host-side sweep.
pub fn jacobi_iterations(view: GraphView<'_>, alpha: f64, tol: f64, max_iters: usize) -> usize {
    match view {
        GraphView::Plain(g) => power_iteration_oracle(g, alpha, tol, max_iters).1,
        GraphView::Split(s) => power_iteration_oracle(&s.merge(), alpha, tol, max_iters).1,
    }
}

fn finish(
    mut scores: Vec<f64>,
    sim: &mut SimResult,
    kernel: &str,
    view: &GraphView<'_>,
) -> Vec<f64> {
    sim.kernel = kernel.to_string();
    sim.scale = view.scale();
    normalize(&mut scores);
    scores
}

/// Runs a PageRank variant on the lane machine.
pub fn run_pagerank(
    view: GraphView<'_>,
    config: &MachineConfig,
    variant: PrVariant,
    opts: &PrOptions,
) -> Result<PrResult> {
    match variant {
        PrVariant::Push => {
            let mut prog = PushPr::new(view, config, opts)?;
            let mut sim = run_program(config, &mut prog)?;
            let scores = finish(std::mem::take(&mut prog.x), &mut sim, "push_pr", &view);
            Ok(PrResult {
                scores,
                iterations: prog.iterations,
                edges_traversed: prog.edges,
                gteps: gteps(prog.edges, sim.elapsed_seconds),
                effective_gteps: None,
                capped: prog.capped,
                tol: prog.tol,
                active_counts: vec![view.masters() as u64; prog.iterations],
                active_volumes: vec![2 * view.undirected_edges(); prog.iterations],
                sim,
            })
        }
        PrVariant::DataDriven => {
            let mut prog = DataDrivenPr::new(view, config, opts)?;
            let mut sim = run_program(config, &mut prog)?;
            let scores = finish(std::mem::take(&mut prog.x), &mut sim, "dd_pr", &view);
            let push_iters = jacobi_iterations(view, prog.alpha, prog.tol, 1000);
            let push_work = push_iters as u64 * 2 * view.undirected_edges();
            Ok(PrResult {
                scores,
                iterations: prog.iterations,
                edges_traversed: prog.edges,
                gteps: gteps(prog.edges, sim.elapsed_seconds),
                effective_gteps: Some(gteps(push_work, sim.elapsed_seconds)),
                capped: prog.capped,
                tol: prog.tol,
                active_counts: prog.active_counts,
                active_volumes: prog.active_volumes,
                sim,
            })
        }
    }
}

/// Push PageRank to tolerance `tol`.
pub fn push_pagerank<'g>(
    g: impl Into<GraphView<'g>>,
    config: &MachineConfig,
    tol: f64,
) -> Result<PrResult> {
    let opts = PrOptions {
        tol: Some(tol),
        ..Default::default()
    };
    run_pagerank(g.into(), config, PrVariant::Push, &opts)
}

/// Data-driven PageRank with an iteration cap.
pub fn data_driven_pagerank<'g>(
    g: impl Into<GraphView<'g>>,
    config: &MachineConfig,
    tol: f64,
    max_iters: usize,
) -> Result<PrResult> {
    run_pagerank(
        g.into(),
        config,
        PrVariant::DataDriven,
        &PrOptions::with_tol(tol, max_iters),
    )
}
